//! `divfree` command-line front end.
//!
//! Exit codes: 0 success, 2 I/O or corrupt container, 3 numerical failure
//! (solver non-convergence, non-finite loss), 4 configuration or
//! variant/grid mismatch or invalid arguments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use divfree::appendix::verify_appendix;
use divfree::fno::{FnoConfig, Variant};
use divfree::spectral_grid::{relative_divergence, GridConfig, RealTensorField, SpectralGrid};
use divfree::training::maps::{read_raw, write_map, write_raw};
use divfree::training::{
    evaluate, generate_dataset, train, write_history_csv, Dataset, DatasetConfig, Downsample,
    EpochRecord, FnoModel, LossConfig, Sample, TrainConfig,
};
use divfree::{Error, Exec};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "divfree",
    version,
    about = "Divergence-free neural operators for periodic micromechanics"
)]
struct Cli {
    /// Cap on worker threads (1 runs everything sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Default root for datasets, checkpoints and reports.
    #[arg(long, global = true, env = "DIVFREE_DATA_DIR", default_value = ".")]
    root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset of polycrystal stress solutions.
    Generate(GenerateArgs),
    /// Train one network variant on a dataset.
    Train(TrainArgs),
    /// Evaluate a checkpoint and write error and divergence maps.
    Evaluate(EvaluateArgs),
    /// Report the relative divergence norm of a stored stress field.
    DiagnoseDiv(DiagnoseArgs),
    /// Train Pg, Pe and Pi over a list of c_div values and tabulate.
    Compare(CompareArgs),
    /// Run the whole-field potential-construction audit.
    VerifyAppendix(VerifyArgs),
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

#[derive(Clone, Copy, ValueEnum)]
enum DownsampleArg {
    Stride,
    Spectral,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of samples (the last quarter forms the test split).
    #[arg(long, default_value_t = 64)]
    n_dat: usize,
    /// Stored grid size.
    #[arg(long, default_value_t = 32)]
    n_dis: usize,
    /// Solver grid size (defaults to --n-dis; must be a multiple of it).
    #[arg(long)]
    n_res: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative grain size; the grain count is round(s_u^-2).
    #[arg(long, default_value_t = 1.0 / 3.0)]
    s_u: f64,
    /// Young's modulus range in GPa, `lo,hi`.
    #[arg(long, value_parser = parse_range, default_value = "50,200")]
    e_range: (f64, f64),
    /// Poisson ratio range, `lo,hi`.
    #[arg(long, value_parser = parse_range, default_value = "0.25,0.35")]
    nu_range: (f64, f64),
    /// F22 loads assigned to samples cyclically.
    #[arg(long, value_delimiter = ',', default_value = "1.002,1.004")]
    f22: Vec<f64>,
    /// How solver fields are brought to --n-dis.
    #[arg(long, value_enum, default_value = "stride")]
    downsample: DownsampleArg,
    /// Output directory [default: <root>/dataset].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 12)]
    modes: usize,
    /// Hidden channel count.
    #[arg(long, default_value_t = 32)]
    width: usize,
    /// Number of hidden Fourier layers.
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr0: f64,
    /// Mini-batch size [default: full batch].
    #[arg(long)]
    batch: Option<usize>,
    /// Initialization and shuffling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop after this epoch while keeping the schedule of --epochs
    /// (continue later with --resume).
    #[arg(long)]
    stop_at: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// pg, pi or pe.
    #[arg(long, default_value = "pe")]
    variant: Variant,
    /// Divergence-penalty weight (used by pi).
    #[arg(long, default_value_t = 0.1)]
    c_div: f64,
    #[command(flatten)]
    model: ModelArgs,
    /// Dataset directory [default: <root>/dataset].
    #[arg(long)]
    data: Option<PathBuf>,
    /// Checkpoint directory [default: <root>/checkpoints/<variant>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue from the checkpoint in --out up to --epochs.
    #[arg(long)]
    resume: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Test,
    All,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset directory [default: <root>/dataset].
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    split: Split,
    /// Evaluate a single sample index instead of a split.
    #[arg(long)]
    sample: Option<usize>,
    /// Expected variant; a different checkpoint variant is an error.
    #[arg(long)]
    variant: Option<Variant>,
    /// Report directory [default: <root>/eval].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Dataset directory holding the field.
    #[arg(long, conflicts_with = "field")]
    data: Option<PathBuf>,
    /// Sample index within --data.
    #[arg(long, default_value_t = 0)]
    sample: usize,
    /// Raw little-endian f64 blob of shape n x n x 3 x 3.
    #[arg(long)]
    field: Option<PathBuf>,
    /// Grid size of --field.
    #[arg(long)]
    n_dis: Option<usize>,
    /// Cell side length of --field.
    #[arg(long, default_value_t = 1.0)]
    ell_u: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// c_div values for the Pi runs.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,1,10")]
    c_div: Vec<f64>,
    #[command(flatten)]
    model: ModelArgs,
    /// Dataset directory [default: <root>/dataset].
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory for checkpoints and the table [default: <root>/compare].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    n_dis: usize,
}

struct Ctx {
    root: PathBuf,
    exec: Exec,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Corrupt(_) => 2,
        Error::NotConverged { .. } | Error::NonFiniteLoss { .. } | Error::ZeroMode => 3,
        Error::Sample { source, .. } => exit_code(source),
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let exec = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(4);
        }
        Some(1) => Exec::Sequential,
        Some(t) => {
            divfree::exec::init_thread_cap(t);
            Exec::Parallel
        }
        None => Exec::default(),
    };
    let ctx = Ctx {
        root: cli.root,
        exec,
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Evaluate(a) => cmd_evaluate(&ctx, a),
        Command::DiagnoseDiv(a) => cmd_diagnose_div(a),
        Command::Compare(a) => cmd_compare(&ctx, a),
        Command::VerifyAppendix(a) => cmd_verify(&ctx, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

type CmdResult = divfree::Result<u8>;

fn cmd_generate(ctx: &Ctx, a: GenerateArgs) -> CmdResult {
    let cfg = DatasetConfig {
        n_dat: a.n_dat,
        n_res: a.n_res.unwrap_or(a.n_dis),
        n_dis: a.n_dis,
        s_u: a.s_u,
        e_range: a.e_range,
        nu_range: a.nu_range,
        loads: a.f22,
        seed: a.seed,
        downsample: match a.downsample {
            DownsampleArg::Stride => Downsample::Stride,
            DownsampleArg::Spectral => Downsample::Spectral,
        },
        ..DatasetConfig::desk()
    };
    let out = a.out.unwrap_or_else(|| ctx.root.join("dataset"));
    let ds = generate_dataset(&cfg, ctx.exec)?;
    ds.save(&out)?;
    let max_iter = ds
        .samples
        .iter()
        .map(|s| s.solver_iterations)
        .max()
        .unwrap_or(0);
    let max_res = ds
        .samples
        .iter()
        .map(|s| s.solver_residual)
        .fold(0.0, f64::max);
    println!(
        "wrote {} samples ({} train / {} test) to {}; solver iterations <= {max_iter}, residual <= {max_res:.3e}",
        ds.samples.len(),
        cfg.n_tra(),
        cfg.n_tes(),
        out.display()
    );
    Ok(0)
}

fn fno_config(ds: &Dataset, m: &ModelArgs) -> FnoConfig {
    FnoConfig {
        n_dis: ds.config.n_dis,
        ell_u: ds.config.ell_u,
        modes: m.modes,
        width: m.width,
        depth: m.depth,
    }
}

fn train_config(m: &ModelArgs) -> TrainConfig {
    TrainConfig {
        epochs: m.epochs,
        lr0: m.lr0,
        batch_size: m.batch,
        stop_at: m.stop_at,
    }
}

const HISTORY_HEADER: &str = "epoch,lr,train_L_dat,train_L_div,test_L_dat,test_L_div";

/// Keeps the rows of an existing history up to `epoch`.
fn previous_history(path: &Path, epoch: usize) -> divfree::Result<Vec<String>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    Ok(fs::read_to_string(path)?
        .lines()
        .skip(1)
        .filter(|l| {
            l.split(',')
                .next()
                .and_then(|e| e.parse::<usize>().ok())
                .is_some_and(|e| e <= epoch)
        })
        .map(str::to_owned)
        .collect())
}

fn write_history(path: &Path, previous: &[String], new: &[EpochRecord]) -> divfree::Result<()> {
    write_history_csv(path, new)?;
    if !previous.is_empty() {
        let text = fs::read_to_string(path)?;
        let mut lines = vec![HISTORY_HEADER.to_owned()];
        lines.extend(previous.iter().cloned());
        lines.extend(text.lines().skip(1).map(str::to_owned));
        fs::write(path, lines.join("\n") + "\n")?;
    }
    Ok(())
}

fn print_epoch(r: &EpochRecord) {
    println!(
        "epoch {:>4}  lr {:.3e}  train L_dat {:.4e} L_div {:.4e}  test L_dat {:.4e} L_div {:.4e}",
        r.epoch, r.lr, r.train_l_dat, r.train_l_div, r.test_l_dat, r.test_l_div
    );
}

fn train_one(
    ctx: &Ctx,
    ds: &Dataset,
    loss: LossConfig,
    m: &ModelArgs,
    out: &Path,
    resume: bool,
    quiet: bool,
) -> divfree::Result<FnoModel> {
    let mut model = if resume {
        let model = FnoModel::load(out)?;
        if model.variant() != loss.variant {
            return Err(Error::Mismatch(format!(
                "checkpoint variant {} differs from requested {}",
                model.variant(),
                loss.variant
            )));
        }
        model
    } else {
        FnoModel::new(fno_config(ds, m), loss, ds.fit_stats()?, m.seed)?
    };
    fs::create_dir_all(out)?;
    let history_path = out.join("history.csv");
    let previous = if resume {
        previous_history(&history_path, model.epoch)?
    } else {
        Vec::new()
    };
    let history = train(&mut model, ds, &train_config(m), ctx.exec, |r| {
        if !quiet {
            print_epoch(r)
        }
    })?;
    model.save(out)?;
    write_history(&history_path, &previous, &history)?;
    Ok(model)
}

fn cmd_train(ctx: &Ctx, a: TrainArgs) -> CmdResult {
    let data = a.data.unwrap_or_else(|| ctx.root.join("dataset"));
    let out = a.out.unwrap_or_else(|| {
        ctx.root
            .join("checkpoints")
            .join(a.variant.to_string().to_lowercase())
    });
    let ds = Dataset::load(&data)?;
    let loss = LossConfig::new(a.variant, a.c_div);
    let model = train_one(ctx, &ds, loss, &a.model, &out, a.resume, false)?;
    println!(
        "{} trained to epoch {}; checkpoint in {}",
        model.variant(),
        model.epoch,
        out.display()
    );
    Ok(0)
}

fn select(ds: &Dataset, split: Split, sample: Option<usize>) -> divfree::Result<Vec<&Sample>> {
    if let Some(i) = sample {
        return ds
            .samples
            .iter()
            .find(|s| s.index == i)
            .map(|s| vec![s])
            .ok_or_else(|| Error::Config(format!("no sample with index {i}")));
    }
    Ok(match split {
        Split::Train => ds.train().iter().collect(),
        Split::Test => ds.test().iter().collect(),
        Split::All => ds.samples.iter().collect(),
    })
}

fn cmd_evaluate(ctx: &Ctx, a: EvaluateArgs) -> CmdResult {
    let model = FnoModel::load(&a.checkpoint)?;
    if let Some(v) = a.variant {
        if v != model.variant() {
            return Err(Error::Mismatch(format!(
                "checkpoint holds {}, expected {v}",
                model.variant()
            )));
        }
    }
    let data = a.data.unwrap_or_else(|| ctx.root.join("dataset"));
    let ds = Dataset::load(&data)?;
    let model_grid = *model.network.grid().config();
    if ds.config.grid()? != model_grid {
        return Err(Error::Mismatch(format!(
            "dataset grid n_dis={} l={} differs from checkpoint grid n_dis={} l={}",
            ds.config.n_dis, ds.config.ell_u, model_grid.n_dis, model_grid.ell_u
        )));
    }
    let samples: Vec<Sample> = select(&ds, a.split, a.sample)?
        .into_iter()
        .cloned()
        .collect();
    if samples.is_empty() {
        return Err(Error::Config("selection contains no samples".into()));
    }
    let report = evaluate(&model, &samples, ctx.exec, true)?;
    let out = a.out.unwrap_or_else(|| ctx.root.join("eval"));
    fs::create_dir_all(&out)?;
    let n = model_grid.n_dis;
    let mut per_sample = Vec::new();
    for m in &report.samples {
        let stem = |kind: &str| out.join(format!("sample_{:05}_{kind}", m.index));
        write_map(&stem("err"), "|P_out - P_dat|", &m.err_map, n)?;
        write_map(&stem("div"), "|l_U d_out|", &m.div_map, n)?;
        write_raw(&stem("err").with_extension("f64"), &m.err_map)?;
        write_raw(&stem("div").with_extension("f64"), &m.div_map)?;
        if let Some(p) = &m.prediction {
            let flat: Vec<f64> = p.data.iter().flatten().flatten().copied().collect();
            write_raw(&stem("pred").with_extension("f64"), &flat)?;
        }
        per_sample.push(json!({
            "index": m.index,
            "l_dat": m.l_dat,
            "rel_div_norm": m.rel_div,
            "max_error": m.max_err,
            "median_error": m.median_err,
            "argmax_error_pixel": [m.argmax_err / n, m.argmax_err % n],
            "mean_abs_pred": m.mean_abs_pred,
            "mean_abs_data": m.mean_abs_data,
        }));
    }
    let max_err = report.samples.iter().map(|m| m.max_err).fold(0.0, f64::max);
    let mut medians: Vec<f64> = report.samples.iter().map(|m| m.median_err).collect();
    medians.sort_by(f64::total_cmp);
    let metrics = json!({
        "variant": model.variant().to_string(),
        "epoch": model.epoch,
        "c_div": model.loss.c_div,
        "n_samples": report.samples.len(),
        "l_dat": report.losses.l_dat,
        "l_div": report.losses.l_div,
        "rel_div_norm": report.rel_div,
        "max_error": max_err,
        "median_error": medians[medians.len() / 2],
        "samples": per_sample,
    });
    let text = serde_json::to_string_pretty(&metrics)? + "\n";
    fs::write(out.join("metrics.json"), text)?;
    println!(
        "{}: L_dat {:.6e}  L_div {:.6e}  rel_div_norm {:.3e}  max error {:.3e} MPa",
        model.variant(),
        report.losses.l_dat,
        report.losses.l_div,
        report.rel_div,
        max_err
    );
    println!("metrics and maps in {}", out.display());
    Ok(0)
}

fn cmd_diagnose_div(a: DiagnoseArgs) -> CmdResult {
    let field = match (&a.data, &a.field) {
        (Some(dir), None) => {
            let ds = Dataset::load(dir)?;
            select(&ds, Split::All, Some(a.sample))?[0].p.clone()
        }
        (None, Some(path)) => {
            let n = a
                .n_dis
                .ok_or_else(|| Error::Config("--field requires --n-dis".into()))?;
            let grid = GridConfig::plane(n, a.ell_u)?;
            let raw = read_raw(path)?;
            if raw.len() != 9 * grid.n_points() {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} values ({n} x {n} x 3 x 3)", 9 * grid.n_points()),
                    actual: format!("{} values", raw.len()),
                });
            }
            RealTensorField {
                grid,
                data: raw
                    .chunks_exact(9)
                    .map(|c| [[c[0], c[1], c[2]], [c[3], c[4], c[5]], [c[6], c[7], c[8]]])
                    .collect(),
            }
        }
        _ => {
            return Err(Error::Config(
                "give exactly one of --data or --field".into(),
            ))
        }
    };
    let grid = SpectralGrid::new(field.grid)?;
    let rel = relative_divergence(&grid, &field)?;
    let d = grid.field_div(&field)?;
    let ell = field.grid.ell_u;
    let max_pixel = d.magnitude().into_iter().fold(0.0, f64::max) * ell;
    println!("relative divergence norm ||l_U d|| / ||P||: {rel:e}");
    println!("max per-pixel |l_U d|: {max_pixel:e}");
    Ok(0)
}

fn cmd_compare(ctx: &Ctx, a: CompareArgs) -> CmdResult {
    let data = a.data.unwrap_or_else(|| ctx.root.join("dataset"));
    let out = a.out.unwrap_or_else(|| ctx.root.join("compare"));
    let ds = Dataset::load(&data)?;
    let mut runs: Vec<(Variant, f64)> = vec![(Variant::Pg, 0.0), (Variant::Pe, 0.0)];
    runs.extend(a.c_div.iter().map(|&c| (Variant::Pi, c)));
    let mut rows = Vec::new();
    let header = "variant,c_div,test_L_dat,test_L_div,test_rel_div_norm";
    println!(
        "{:<8}{:>10}{:>14}{:>14}{:>16}",
        "variant", "c_div", "test L_dat", "test L_div", "rel_div_norm"
    );
    for (variant, c_div) in runs {
        let dir = match variant {
            Variant::Pi => out.join(format!("pi_cdiv_{c_div}")),
            v => out.join(v.to_string().to_lowercase()),
        };
        let model = train_one(
            ctx,
            &ds,
            LossConfig::new(variant, c_div),
            &a.model,
            &dir,
            false,
            true,
        )?;
        let test: Vec<Sample> = ds.test().to_vec();
        let r = evaluate(&model, &test, ctx.exec, false)?;
        println!(
            "{:<8}{:>10}{:>14.4e}{:>14.4e}{:>16.3e}",
            variant.to_string(),
            if variant == Variant::Pi {
                c_div.to_string()
            } else {
                "-".into()
            },
            r.losses.l_dat,
            r.losses.l_div,
            r.rel_div
        );
        rows.push(format!(
            "{variant},{c_div:e},{:e},{:e},{:e}",
            r.losses.l_dat, r.losses.l_div, r.rel_div
        ));
    }
    fs::create_dir_all(&out)?;
    fs::write(
        out.join("compare.csv"),
        format!("{header}\n{}\n", rows.join("\n")),
    )?;
    println!("table written to {}", out.join("compare.csv").display());
    Ok(0)
}

fn cmd_verify(ctx: &Ctx, a: VerifyArgs) -> CmdResult {
    let report = verify_appendix(a.n_dis, a.trials, a.seed, ctx.exec)?;
    println!(
        "potential-construction audit: n_dis {}, {} trials, seed {}",
        report.n_dis, report.trials, report.seed
    );
    println!("{:<48}{:>14}{:>14}  result", "check", "value", "tolerance");
    for c in &report.checks {
        println!(
            "{:<48}{:>14.3e}{:>14.3e}  {}",
            c.name,
            c.value,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let r = &report.ranks;
    println!(
        "measured per-mode ranks: curl {}, symmetric stress {}, general stress {}",
        r.mode_rank_curl, r.mode_rank_symmetric_stress, r.mode_rank_general_stress
    );
    Ok(if report.passed() { 0 } else { 3 })
}
