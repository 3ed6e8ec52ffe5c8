use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use isac_core::algorithms::{
    dominance_filter, solve_moop, solve_soop1, solve_soop2, ScalarizationWeights, TrajectoryRecord, Utopia,
};
use isac_core::harness::{
    aggregate, export_records, export_summary, load_config, mix, run_baselines, run_montecarlo, validate_suite,
    write_baselines_csv, write_beampattern_csv, write_file, write_json, ExportFormat, GroupKey, MonteCarloOutput,
    RunConfig, Scheme, FAILURE_THRESHOLD,
};
use isac_core::metrics::beampattern_gain;
use isac_core::model::{draw_scenario, SystemConfig};
use isac_core::{IsacError, Result};

const EXIT_VALIDATION: u8 = 1;
const EXIT_BATCH: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Transmit waveform design for multi-user MIMO sensing and communication.
#[derive(Debug, Parser)]
#[command(name = "isac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; missing keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (default: `out_dir` of the configuration).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master seed; trial t uses a seed derived from it.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Number of Monte-Carlo trials.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Comma-separated antenna counts.
    #[arg(long = "n-tx", global = true, value_name = "LIST", value_delimiter = ',')]
    n_tx: Option<Vec<usize>>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ExportFormat::Csv,
            Format::Json => ExportFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sum-rate design per trial.
    Soop1,
    /// Beampattern design per trial.
    Soop2,
    /// Weight sweep of the trade-off design, averaged over trials.
    Pareto,
    /// Batch over the configured sweep (weights, power budgets, antennas).
    Montecarlo,
    /// Gain versus angle of the beampattern design for each antenna count.
    Beampattern,
    /// Per-iteration traces of the three iterative designs (JSON lines).
    Convergence,
    /// Weighted-sum and constrained single-objective comparison designs.
    Baselines,
    /// Runs the invariant suite.
    Validate,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.system.rng_seed = seed;
    }
    if let Some(n) = cli.trials {
        cfg.n_trials = n;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if let Some(dir) = &cli.out {
        cfg.out_dir = dir.clone();
    }
    if let Some(n) = &cli.n_tx {
        cfg.sweep.n_tx = Some(n.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<u8> {
    let cfg = run_config(cli)?;
    let format = cli.format.map(ExportFormat::from).unwrap_or_default();
    match cli.command {
        Command::Validate => validate(),
        Command::Soop1 => batch(&RunConfig { scheme: Scheme::Soop1, ..cfg }, "soop1", format, &[GroupKey::NTx]),
        Command::Soop2 => batch(&RunConfig { scheme: Scheme::Soop2, ..cfg }, "soop2", format, &[GroupKey::NTx]),
        Command::Pareto => {
            let scheme = if cfg.scheme == Scheme::WeightedSum { Scheme::WeightedSum } else { Scheme::Moop };
            batch(&RunConfig { scheme, ..cfg }, "pareto", format, &[GroupKey::Omega1])
        }
        Command::Montecarlo => {
            batch(&cfg, "montecarlo", format, &[GroupKey::Omega1, GroupKey::PMaxDbm, GroupKey::NTx])
        }
        Command::Beampattern => beampattern(&cfg, format),
        Command::Convergence => convergence(&cfg, cli.trials.unwrap_or(1)),
        Command::Baselines => baselines(&cfg, format),
    }
}

fn save_config(cfg: &RunConfig) -> Result<()> {
    write_file(&cfg.out_dir.join("run_config.json"), |w| write_json(&cfg.to_json(), w))
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

fn batch(cfg: &RunConfig, stem: &str, format: ExportFormat, keys: &[GroupKey]) -> Result<u8> {
    save_config(cfg)?;
    let out: MonteCarloOutput = run_montecarlo(cfg)?;
    report(&export_records(&out.records, &cfg.out_dir, &format!("{stem}_records"), format)?);
    let summary = aggregate(&out.records, keys);
    report(&export_summary(&summary, &cfg.out_dir, stem, format)?);
    if stem == "pareto" {
        let points: Vec<[f64; 2]> = summary.iter().map(|r| [-r.sum_rate.mean, r.mse_extracted.mean]).collect();
        let kept = dominance_filter(&points).len();
        println!("{kept} of {} averaged points are non-dominated", points.len());
    }
    finish_batch(out.failure_fraction(), out.records.len())
}

fn finish_batch(failed: f64, total: usize) -> Result<u8> {
    println!("{total} records, {:.1}% failed", 100.0 * failed);
    if failed > FAILURE_THRESHOLD {
        eprintln!("failure fraction {failed:.3} exceeds {FAILURE_THRESHOLD}");
        return Ok(EXIT_BATCH);
    }
    Ok(0)
}

fn validate() -> Result<u8> {
    let report = validate_suite();
    for c in &report.checks {
        println!("{:4} {:24} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if report.passed() { 0 } else { EXIT_VALIDATION })
}

fn beampattern(cfg: &RunConfig, format: ExportFormat) -> Result<u8> {
    let counts = cfg.sweep.n_tx.clone().unwrap_or_else(|| vec![4, 8, 16]);
    save_config(cfg)?;
    let seed = mix(cfg.system.rng_seed, 0);
    let mut curves = Vec::new();
    for n_tx in counts {
        let sys = SystemConfig { n_tx, rng_seed: seed, ..cfg.system.clone() };
        let sc = draw_scenario(&sys, seed)?;
        let design = solve_soop2(&sc, &sys)?.design;
        let cov = design.covariance.clone().ok_or_else(|| IsacError::Numerical("no covariance".into()))?;
        let gains = beampattern_gain(&cov, &sc.grid)?;
        let angles = sc.grid.degrees();
        let peak = gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("n_tx = {n_tx}: peak gain {peak:.4}, MSE {:.4e}", design.relaxed_mse);
        if format == ExportFormat::Csv {
            let path = cfg.out_dir.join(format!("beampattern_nt{n_tx}.csv"));
            write_file(&path, |w| write_beampattern_csv(&angles, &gains, w))?;
            report(&path);
        }
        curves.push(json!({ "n_tx": n_tx, "angle_deg": angles, "gain": gains }));
    }
    if format == ExportFormat::Json {
        let path = cfg.out_dir.join("beampattern.json");
        write_file(&path, |w| write_json(&curves, w))?;
        report(&path);
    }
    Ok(0)
}

fn convergence(cfg: &RunConfig, trials: usize) -> Result<u8> {
    save_config(cfg)?;
    let omegas = cfg.sweep.omega1.clone().unwrap_or_else(|| vec![0.2, 0.5, 0.8]);
    let mut lines: Vec<Value> = Vec::new();
    let mut failures = 0;
    let mut runs = 0;
    for t in 0..trials {
        let seed = mix(cfg.system.rng_seed, t as u64);
        let sys = SystemConfig { rng_seed: seed, ..cfg.system.clone() };
        let sc = draw_scenario(&sys, seed)?;
        let mut push = |algorithm: &str, omega1: Option<f64>, traj: &[TrajectoryRecord]| {
            for rec in traj {
                let mut v = serde_json::to_value(rec).unwrap_or(Value::Null);
                if let Value::Object(m) = &mut v {
                    m.insert("trial".into(), json!(t));
                    m.insert("seed".into(), json!(seed));
                    m.insert("algorithm".into(), json!(algorithm));
                    m.insert("omega1".into(), json!(omega1));
                }
                lines.push(v);
            }
        };
        runs += 2 + omegas.len();
        let anchors = solve_soop1(&sc, &sys).and_then(|a| Ok((a, solve_soop2(&sc, &sys)?)));
        let u = match anchors.and_then(|(a, b)| {
            push("soop1", None, &a.trajectory);
            push("soop2", None, &b.trajectory);
            Utopia::new(a.f1_star, b.f2_star)
        }) {
            Ok(u) => u,
            Err(e) => {
                log::warn!("trial {t}: {e}");
                failures += 2 + omegas.len();
                continue;
            }
        };
        for &w in &omegas {
            match ScalarizationWeights::new(w, sys.xi).and_then(|weights| solve_moop(&sc, &u, &weights, &sys)) {
                Ok(p) => push("moop", Some(w), &p.trajectory),
                Err(e) => {
                    log::warn!("trial {t}, omega1 = {w}: {e}");
                    failures += 1;
                }
            }
        }
    }
    let path = cfg.out_dir.join("convergence.jsonl");
    write_file(&path, |w| {
        use std::io::Write;
        for v in &lines {
            writeln!(w, "{v}").map_err(|e| IsacError::io("<output>", e))?;
        }
        Ok(())
    })?;
    report(&path);
    finish_batch(failures as f64 / runs.max(1) as f64, runs)
}

fn baselines(cfg: &RunConfig, format: ExportFormat) -> Result<u8> {
    save_config(cfg)?;
    let records = run_baselines(cfg)?;
    let path = cfg.out_dir.join(format!("baselines.{}", format.extension()));
    write_file(&path, |w| match format {
        ExportFormat::Csv => write_baselines_csv(&records, w),
        ExportFormat::Json => write_json(&records, w),
    })?;
    report(&path);
    let failed = records.iter().filter(|r| !r.status.is_success()).count();
    finish_batch(failed as f64 / records.len().max(1) as f64, records.len())
}
