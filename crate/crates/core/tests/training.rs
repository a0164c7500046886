use divfree::fno::{FnoConfig, Variant};
use divfree::spectral_grid::{relative_divergence, SpectralGrid};
use divfree::training::{
    evaluate, evaluate_losses, generate_dataset, train, Dataset, DatasetConfig, Downsample,
    FnoModel, LossConfig, TrainConfig,
};
use divfree::{Error, Exec};

fn small_dataset(n_dat: usize) -> Dataset {
    let cfg = DatasetConfig {
        n_dat,
        n_res: 16,
        n_dis: 16,
        seed: 3,
        ..DatasetConfig::desk()
    };
    generate_dataset(&cfg, Exec::default()).unwrap()
}

fn small_model(ds: &Dataset, variant: Variant, c_div: f64) -> FnoModel {
    let cfg = FnoConfig {
        n_dis: 16,
        ell_u: 1.0,
        modes: 4,
        width: 6,
        depth: 2,
    };
    FnoModel::new(
        cfg,
        LossConfig::new(variant, c_div),
        ds.fit_stats().unwrap(),
        11,
    )
    .unwrap()
}

fn tc(epochs: usize) -> TrainConfig {
    TrainConfig::new(epochs, 1e-3)
}

#[test]
fn desk_dataset_is_in_equilibrium() {
    let ds = generate_dataset(&DatasetConfig::desk(), Exec::default()).unwrap();
    let grid = SpectralGrid::new(ds.config.grid().unwrap()).unwrap();
    assert_eq!((ds.train().len(), ds.test().len()), (48, 16));
    for s in &ds.samples {
        let rel = relative_divergence(&grid, &s.p).unwrap();
        assert!(
            rel <= 10.0 * ds.config.solver.tol,
            "sample {}: {rel:e}",
            s.index
        );
    }
}

#[test]
fn spectral_downsampling_keeps_equilibrium() {
    let cfg = DatasetConfig {
        n_dat: 2,
        n_res: 32,
        n_dis: 16,
        downsample: Downsample::Spectral,
        ..DatasetConfig::desk()
    };
    let ds = generate_dataset(&cfg, Exec::default()).unwrap();
    let grid = SpectralGrid::new(cfg.grid().unwrap()).unwrap();
    for s in &ds.samples {
        assert!(relative_divergence(&grid, &s.p).unwrap() <= 10.0 * cfg.solver.tol);
    }
}

#[test]
fn dataset_round_trip_and_corruption() {
    let ds = small_dataset(4);
    let dir = tempfile::tempdir().unwrap();
    ds.save(dir.path()).unwrap();
    let back = Dataset::load(dir.path()).unwrap();
    assert_eq!(back.config, ds.config);
    for (a, b) in back.samples.iter().zip(&ds.samples) {
        assert_eq!(a.p.data, b.p.data);
        assert_eq!(a.e, b.e);
        assert_eq!(a.grain_id, b.grain_id);
        assert_eq!(a.f_bar, b.f_bar);
    }
    let blob = dir.path().join("sample_00001_p.f64");
    let mut bytes = std::fs::read(&blob).unwrap();
    bytes[17] ^= 0x40;
    std::fs::write(&blob, bytes).unwrap();
    assert!(matches!(Dataset::load(dir.path()), Err(Error::Corrupt(_))));
}

#[test]
fn stats_come_from_training_split_only() {
    let mut ds = small_dataset(4);
    let before = ds.fit_stats().unwrap();
    let last = ds.samples.len() - 1;
    ds.samples[last]
        .p
        .data
        .iter_mut()
        .flatten()
        .flatten()
        .for_each(|v| *v *= 1e3);
    ds.samples[last].e.iter_mut().for_each(|v| *v = 1e6);
    assert_eq!(ds.fit_stats().unwrap(), before);
}

#[test]
fn zero_epochs_leave_model_unchanged() {
    let ds = small_dataset(4);
    let mut m = small_model(&ds, Variant::Pe, 0.0);
    let p0 = m.params.clone();
    let h = train(&mut m, &ds, &tc(0), Exec::default(), |_| {}).unwrap();
    assert!(h.is_empty());
    assert_eq!(m.params, p0);
}

#[test]
fn pi_without_penalty_trains_like_pg() {
    let ds = small_dataset(4);
    let mut pg = small_model(&ds, Variant::Pg, 0.0);
    let mut pi = small_model(&ds, Variant::Pi, 0.0);
    assert_eq!(pg.params, pi.params);
    let hg = train(&mut pg, &ds, &tc(3), Exec::default(), |_| {}).unwrap();
    let hi = train(&mut pi, &ds, &tc(3), Exec::default(), |_| {}).unwrap();
    assert_eq!(pg.params, pi.params);
    assert_eq!(hg, hi);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let ds = small_dataset(4);
    let mut full = small_model(&ds, Variant::Pi, 0.1);
    let h_full = train(&mut full, &ds, &tc(6), Exec::default(), |_| {}).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let mut first = small_model(&ds, Variant::Pi, 0.1);
    let interrupted = TrainConfig {
        stop_at: Some(2),
        ..tc(6)
    };
    let mut h = train(&mut first, &ds, &interrupted, Exec::default(), |_| {}).unwrap();
    assert_eq!(first.epoch, 2);
    first.save(dir.path()).unwrap();

    let mut resumed = FnoModel::load(dir.path()).unwrap();
    h.extend(train(&mut resumed, &ds, &tc(6), Exec::default(), |_| {}).unwrap());
    assert_eq!(resumed.epoch, 6);
    let gap = resumed
        .params
        .iter()
        .zip(&full.params)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap <= 1e-10, "parameter gap {gap:e}");
    assert_eq!(h.len(), h_full.len());
    for (a, b) in h.iter().zip(&h_full) {
        assert_eq!((a.epoch, a.lr), (b.epoch, b.lr));
        assert!((a.train_l_dat - b.train_l_dat).abs() <= 1e-10);
    }
}

#[test]
fn checkpoint_round_trip() {
    let ds = small_dataset(4);
    let mut m = small_model(&ds, Variant::Pi, 0.01);
    train(&mut m, &ds, &tc(2), Exec::default(), |_| {}).unwrap();
    let dir = tempfile::tempdir().unwrap();
    m.save(dir.path()).unwrap();
    let back = FnoModel::load(dir.path()).unwrap();
    assert_eq!(back.params, m.params);
    assert_eq!(back.adam.m, m.adam.m);
    assert_eq!(back.adam.v, m.adam.v);
    assert_eq!(back.adam.t, m.adam.t);
    assert_eq!(back.loss, m.loss);
    assert_eq!(back.epoch, 2);
    assert_eq!(back.stats, m.stats);

    let params = dir.path().join("params.f64");
    let mut bytes = std::fs::read(&params).unwrap();
    bytes.pop();
    std::fs::write(&params, bytes).unwrap();
    assert!(matches!(FnoModel::load(dir.path()), Err(Error::Corrupt(_))));
}

#[test]
fn evaluation_reproduces_training_loss() {
    let ds = small_dataset(4);
    let mut m = small_model(&ds, Variant::Pg, 0.0);
    let h = train(&mut m, &ds, &tc(2), Exec::default(), |_| {}).unwrap();
    let r = evaluate(&m, ds.train(), Exec::default(), false).unwrap();
    assert!((r.losses.l_dat - h[1].train_l_dat).abs() <= 1e-12);
    let again = evaluate_losses(&m, ds.train(), Exec::Sequential).unwrap();
    assert_eq!(again.l_dat, h[1].train_l_dat);
}

#[test]
fn pe_predictions_are_divergence_free() {
    let ds = small_dataset(4);
    let mut m = small_model(&ds, Variant::Pe, 0.0);
    train(&mut m, &ds, &tc(2), Exec::default(), |_| {}).unwrap();
    let r = evaluate(&m, &ds.samples, Exec::default(), false).unwrap();
    assert!(r.rel_div <= 1e-10, "{:e}", r.rel_div);
    assert!(r.samples.iter().all(|s| s.rel_div <= 1e-10));
}

#[test]
fn grid_mismatch_is_rejected() {
    let ds = small_dataset(4);
    let mut m = small_model(&ds, Variant::Pg, 0.0);
    let other = generate_dataset(
        &DatasetConfig {
            n_dat: 4,
            n_res: 8,
            n_dis: 8,
            ..DatasetConfig::desk()
        },
        Exec::default(),
    )
    .unwrap();
    assert!(matches!(
        train(&mut m, &other, &tc(1), Exec::default(), |_| {}),
        Err(Error::Mismatch(_))
    ));
}
