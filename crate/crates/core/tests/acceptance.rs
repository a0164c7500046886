//! Acceptance suite: eight criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the per-criterion lines are
//! always printed. The process exits non-zero if any criterion fails.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use divfree::appendix::verify_riemann_fields;
use divfree::fno::{FnoConfig, Network, Variant, OUT_CHANNELS};
use divfree::microstructure::{
    chebyshev_distance_map, generate_microstructure, MicrostructureConfig,
};
use divfree::normalization::NormalizationStats;
use divfree::solver::{solve_equilibrium, SolverConfig};
use divfree::spectral_grid::{relative_divergence, GridConfig, RealTensorField, SpectralGrid};
use divfree::training::train::loss_and_gradient;
use divfree::training::{
    evaluate, evaluate_losses, generate_dataset, train, Dataset, DatasetConfig, FnoModel,
    LossConfig, TrainConfig,
};
use divfree::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_field(cfg: GridConfig, rng: &mut ChaCha8Rng) -> RealTensorField {
    RealTensorField::from_fn(cfg, |_| {
        let mut m = [[0.0; 3]; 3];
        m.iter_mut()
            .flatten()
            .for_each(|v| *v = rng.gen_range(-1.0..1.0));
        m
    })
}

fn demo_stats() -> NormalizationStats {
    NormalizationStats {
        e_min: 50.0,
        e_max: 200.0,
        f_min: [1.0, 0.0, 0.0, 0.0, 1.002, 0.0, 0.0, 0.0, 1.0],
        f_max: [1.0, 0.0, 0.0, 0.0, 1.004, 0.0, 0.0, 0.0, 1.0],
        p_min: [-60.0, -25.0, 0.0, -25.0, 80.0, 0.0, 0.0, 0.0, -15.0],
        p_max: [250.0, 25.0, 0.0, 25.0, 700.0, 0.0, 0.0, 0.0, 300.0],
    }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let stats = demo_stats();
    let mut worst = 0.0_f64;
    for (ni, n) in [16usize, 32, 64].into_iter().enumerate() {
        let cfg = FnoConfig {
            n_dis: n,
            ell_u: 1.0,
            modes: 1,
            width: 1,
            depth: 1,
        };
        let net = Network::new(cfg, Variant::Pe).unwrap();
        let grid = net.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + ni as u64);
        for _ in 0..100 {
            let s: Vec<f64> = (0..OUT_CHANNELS * n * n)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let p = net.output_transform(&stats, &s).unwrap();
            worst = worst.max(relative_divergence(grid, &p).unwrap());
        }
    }
    let el = t.elapsed();
    outcome(
        worst <= 1e-10 && el < Duration::from_secs(10),
        format!("max ||l_U d||/||P|| = {worst:.2e} over 300 fields (<= 1e-10), {el:.2?} (< 10 s)"),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let r = verify_riemann_fields(32, 100, 2, Exec::default()).unwrap();
    let el = t.elapsed();
    outcome(
        r.max_asymmetry <= 1e-12
            && r.max_div_symmetric <= 1e-11
            && r.max_div_general <= 1e-11
            && el < Duration::from_secs(10),
        format!(
            "T asymmetry {:.2e} (<= 1e-12), div T {:.2e}, div P {:.2e} (<= 1e-11), {el:.2?} (< 10 s)",
            r.max_asymmetry, r.max_div_symmetric, r.max_div_general
        ),
    )
}

fn max_rel(a: &[[[f64; 3]; 3]], b: &[[[f64; 3]; 3]]) -> f64 {
    let scale = b
        .iter()
        .flatten()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter()
        .flatten()
        .flatten()
        .zip(b.iter().flatten().flatten())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let n = 64;
    let cfg = GridConfig::plane(n, 1.0).unwrap();
    let g = SpectralGrid::new(cfg).unwrap();
    let sc = SolverConfig::default();
    let f22 = 1.004;
    let fb = common::diag(1.0, f22, 1.0);

    let (e0, nu0) = (120.0, 0.3);
    let hom = solve_equilibrium(&g, &vec![e0; n * n], &vec![nu0; n * n], fb, &sc).unwrap();
    let want = vec![common::svk_pk1(&fb, e0, nu0); n * n];
    let err_hom = max_rel(&hom.p.data, &want);

    let widths = [24usize, 40];
    let mats = [(70.0, 0.27), (180.0, 0.33)];
    let layer = |p: usize| usize::from(p / n >= widths[0]);
    let e: Vec<f64> = (0..n * n).map(|p| mats[layer(p)].0).collect();
    let nu: Vec<f64> = (0..n * n).map(|p| mats[layer(p)].1).collect();
    let lam = solve_equilibrium(&g, &e, &nu, fb, &sc).unwrap();
    let layers: Vec<(f64, f64, f64)> = widths
        .iter()
        .zip(mats)
        .map(|(w, (e, nu))| (*w as f64 / n as f64, e, nu))
        .collect();
    let (f11, _) = common::laminate_oracle(&layers, f22);
    let want: Vec<_> = (0..n * n)
        .map(|p| {
            let l = layer(p);
            common::svk_pk1(&common::diag(f11[l], f22, 1.0), mats[l].0, mats[l].1)
        })
        .collect();
    let err_lam = max_rel(&lam.p.data, &want);

    let m = generate_microstructure(&MicrostructureConfig::new(cfg, 0.25), 3, 0).unwrap();
    let poly = solve_equilibrium(&g, &m.e, &m.nu, fb, &sc).unwrap();
    let el = t.elapsed();
    outcome(
        err_hom <= 1e-10
            && err_lam <= 1e-6
            && poly.residual <= 1e-8
            && el < Duration::from_secs(120),
        format!(
            "n=64: homogeneous {err_hom:.2e} (<= 1e-10), laminate {err_lam:.2e} (<= 1e-6), \
             polycrystal residual {:.2e} after {} iterations (<= 1e-8), {el:.2?} (< 2 min)",
            poly.residual, poly.iterations
        ),
    )
}

fn criterion_4() -> Outcome {
    let ds_cfg = DatasetConfig {
        n_dat: 4,
        n_res: 8,
        n_dis: 8,
        ..DatasetConfig::desk()
    };
    let ds = generate_dataset(&ds_cfg, Exec::default()).unwrap();
    let stats = ds.fit_stats().unwrap();
    let train_set = ds.train();
    let idx: Vec<usize> = (0..train_set.len()).collect();
    let cfg = FnoConfig {
        n_dis: 8,
        ell_u: 1.0,
        modes: 3,
        width: 4,
        depth: 1,
    };
    let h = 1e-5;
    let mut worst = (0.0_f64, String::new());
    for v in Variant::ALL {
        let mut model = FnoModel::new(cfg, LossConfig::new(v, 0.1), stats.clone(), 5).unwrap();
        let (_, grad) = loss_and_gradient(&model, train_set, &idx, Exec::default()).unwrap();
        for (name, range) in model.network.param_groups() {
            let (mut diff, mut norm) = (0.0, 0.0);
            for i in range {
                let x0 = model.params[i];
                model.params[i] = x0 + h;
                let lp = evaluate_losses(&model, train_set, Exec::default())
                    .unwrap()
                    .l_total;
                model.params[i] = x0 - h;
                let lm = evaluate_losses(&model, train_set, Exec::default())
                    .unwrap()
                    .l_total;
                model.params[i] = x0;
                let fd = (lp - lm) / (2.0 * h);
                diff += (fd - grad[i]).powi(2);
                norm += grad[i].powi(2);
            }
            let rel = (diff / norm).sqrt();
            if !(rel <= worst.0) {
                worst = (rel, format!("{v} {name}"));
            }
        }
    }
    outcome(
        worst.0 <= 1e-5,
        format!(
            "worst group relative error {:.2e} ({}), central differences h = 1e-5 (<= 1e-5)",
            worst.0, worst.1
        ),
    )
}

/// Desk-scale models shared by criteria 5, 6 and 8.
struct Desk {
    ds: Dataset,
    models: BTreeMap<&'static str, FnoModel>,
    elapsed: Duration,
}

const DESK_RUNS: [(&str, Variant, f64); 5] = [
    ("Pg", Variant::Pg, 0.0),
    ("Pe", Variant::Pe, 0.0),
    ("Pi 0.1", Variant::Pi, 0.1),
    ("Pi 0.01", Variant::Pi, 0.01),
    ("Pi 10", Variant::Pi, 10.0),
];

fn desk() -> Desk {
    let t = Instant::now();
    let ds = generate_dataset(&DatasetConfig::desk(), Exec::default()).unwrap();
    let stats = ds.fit_stats().unwrap();
    let cfg = FnoConfig {
        n_dis: 32,
        ell_u: 1.0,
        modes: 8,
        width: 16,
        depth: 4,
    };
    let tc = TrainConfig::new(100, 1e-3);
    let mut models = BTreeMap::new();
    for (name, v, c) in DESK_RUNS {
        let mut m = FnoModel::new(cfg, LossConfig::new(v, c), stats.clone(), 7).unwrap();
        train(&mut m, &ds, &tc, Exec::default(), |_| {}).unwrap();
        models.insert(name, m);
    }
    Desk {
        ds,
        models,
        elapsed: t.elapsed(),
    }
}

fn criterion_5(d: &Desk) -> Outcome {
    let rep = |k: &str| evaluate(&d.models[k], d.ds.test(), Exec::default(), false).unwrap();
    let (pg, pe, pi) = (rep("Pg"), rep("Pe"), rep("Pi 0.1"));
    let pass = pe.rel_div * 100.0 <= pg.rel_div
        && pe.rel_div * 100.0 <= pi.rel_div
        && pe.losses.l_dat <= 2.0 * pg.losses.l_dat
        && d.elapsed < Duration::from_secs(1800);
    outcome(
        pass,
        format!(
            "test rel div: Pe {:.2e}, Pg {:.2e}, Pi(0.1) {:.2e} (>= 100x); \
             test L_dat Pe {:.4} vs Pg {:.4} (<= 2x); training {:.0?} (< 30 min)",
            pe.rel_div, pg.rel_div, pi.rel_div, pe.losses.l_dat, pg.losses.l_dat, d.elapsed
        ),
    )
}

fn criterion_6(d: &Desk) -> Outcome {
    let lo = evaluate_losses(&d.models["Pi 0.01"], d.ds.test(), Exec::default()).unwrap();
    let hi = evaluate_losses(&d.models["Pi 10"], d.ds.test(), Exec::default()).unwrap();
    outcome(
        hi.l_div < lo.l_div && hi.l_dat > lo.l_dat,
        format!(
            "c_div 0.01 -> 10: test L_div {:.3e} -> {:.3e} (decrease), test L_dat {:.4} -> {:.4} (increase)",
            lo.l_div, hi.l_div, lo.l_dat, hi.l_dat
        ),
    )
}

fn files_identical(a: &Path, b: &Path) -> bool {
    let list = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        v.sort();
        v
    };
    let (la, lb) = (list(a), list(b));
    la == lb
        && la
            .iter()
            .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut rt, mut pars, mut dc) = (0.0_f64, 0.0_f64, 0.0_f64);
    for n in [16usize, 32, 64] {
        let cfg = GridConfig::plane(n, 1.0).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        for _ in 0..10 {
            let f = random_field(cfg, &mut rng);
            let back = g.dft_inverse(&g.dft_forward(&f).unwrap()).unwrap();
            rt = rt.max(back.max_abs_diff(&f));
            let comp = f.component(0, 1);
            let mean_sq = comp.iter().map(|v| v * v).sum::<f64>() / comp.len() as f64;
            let e = g.spectral_energy(&g.forward_scalar(&comp).unwrap());
            pars = pars.max((e - mean_sq).abs() / mean_sq);
            let p = g.field_curl(&f).unwrap();
            dc = dc.max(relative_divergence(&g, &p).unwrap());
        }
    }

    let tmp = tempfile::tempdir().unwrap();
    let ds_cfg = DatasetConfig {
        n_dat: 4,
        n_res: 16,
        n_dis: 16,
        seed: 7,
        ..DatasetConfig::desk()
    };
    let fcfg = FnoConfig {
        n_dis: 16,
        ell_u: 1.0,
        modes: 4,
        width: 4,
        depth: 2,
    };
    let tc = TrainConfig::new(3, 1e-3);
    let run = |tag: &str, exec: Exec| {
        let ds = generate_dataset(&ds_cfg, exec).unwrap();
        ds.save(&tmp.path().join(format!("ds_{tag}"))).unwrap();
        let mut m = FnoModel::new(
            fcfg,
            LossConfig::new(Variant::Pi, 0.1),
            ds.fit_stats().unwrap(),
            3,
        )
        .unwrap();
        train(&mut m, &ds, &tc, exec, |_| {}).unwrap();
        m.save(&tmp.path().join(format!("ck_{tag}"))).unwrap();
    };
    run("a", Exec::Parallel);
    run("b", Exec::Parallel);
    run("c", Exec::Sequential);
    let same = |x: &str| {
        files_identical(
            &tmp.path().join(x.replace('?', "a")),
            &tmp.path().join(x.replace('?', "b")),
        )
    };
    let same_seq = |x: &str| {
        files_identical(
            &tmp.path().join(x.replace('?', "a")),
            &tmp.path().join(x.replace('?', "c")),
        )
    };
    let det = same("ds_?") && same("ck_?") && same_seq("ds_?") && same_seq("ck_?");
    outcome(
        rt <= 1e-12 && pars <= 1e-12 && dc <= 1e-11 && det,
        format!(
            "round trip {rt:.2e} (<= 1e-12), Parseval {pars:.2e} (<= 1e-12), div curl {dc:.2e} (<= 1e-11), \
             byte-identical datasets and checkpoints: {det}"
        ),
    )
}

fn criterion_8(d: &Desk) -> Outcome {
    let held_cfg = DatasetConfig {
        n_dat: 1,
        seed: 999,
        ..DatasetConfig::desk()
    };
    let held = generate_dataset(&held_cfg, Exec::default()).unwrap();
    let sample = &held.samples[0];
    let n = held_cfg.n_dis;
    let dist = chebyshev_distance_map(&sample.boundary_mask(), n).unwrap();
    let largest = |v: &[f64; 9]| (0..9).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap() == 4;
    let mut pass = true;
    let mut parts = Vec::new();
    for k in ["Pg", "Pi 0.1", "Pe"] {
        let r = evaluate(&d.models[k], &held.samples, Exec::default(), false).unwrap();
        let m = &r.samples[0];
        let ok = largest(&m.mean_abs_pred) && largest(&m.mean_abs_data) && dist[m.argmax_err] <= 2;
        pass &= ok;
        parts.push(format!(
            "{k}: P22 largest (pred {}, data {}), max-error pixel {} px from a boundary",
            largest(&m.mean_abs_pred),
            largest(&m.mean_abs_data),
            dist[m.argmax_err]
        ));
    }
    outcome(pass, format!("{} (<= 2 px)", parts.join("; ")))
}

fn report(id: usize, name: &str, o: &Outcome) -> bool {
    println!(
        "criterion {id} [{}] {name}: {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
    o.pass
}

fn main() {
    // Test runners enumerate targets with `--list`; there is nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut ok = true;
    ok &= report(1, "Pe spectral identity", &criterion_1());
    ok &= report(2, "Riemann stress identities", &criterion_2());
    ok &= report(3, "solver correctness", &criterion_3());
    ok &= report(4, "gradient integrity", &criterion_4());
    let d = desk();
    ok &= report(5, "desk-scale divergence comparison", &criterion_5(&d));
    ok &= report(6, "c_div trade-off direction", &criterion_6(&d));
    ok &= report(7, "property suites and determinism", &criterion_7());
    ok &= report(8, "qualitative field structure", &criterion_8(&d));
    if !ok {
        std::process::exit(1);
    }
}
