use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{RunConfig, Scheme};
use crate::algorithms::{
    solve_moop, solve_soop1, solve_soop2, utopia, weighted_sum_baseline, Extraction, ParetoPoint, ScalarizationWeights,
    Utopia, WaveformDesign,
};
use crate::convex::SolveStatus;
use crate::error::{IsacError, Result};
use crate::model::{draw_scenario, ScenarioDraw, SystemConfig};
use crate::par::map_indexed;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// A batch fails when more than this fraction of its records failed.
pub const FAILURE_THRESHOLD: f64 = 0.1;

/// SplitMix64 finalizer applied to `seed + t * golden`.
pub fn mix(seed: u64, t: u64) -> u64 {
    let mut z = seed.wrapping_add(t.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Optimal,
    MaxIters,
    Infeasible,
    Failed,
}

impl TrialStatus {
    pub fn is_success(self) -> bool {
        matches!(self, TrialStatus::Optimal | TrialStatus::MaxIters)
    }

    fn from_solve(status: SolveStatus) -> Self {
        match status {
            SolveStatus::Optimal => TrialStatus::Optimal,
            SolveStatus::MaxIters => TrialStatus::MaxIters,
            SolveStatus::Infeasible => TrialStatus::Infeasible,
            _ => TrialStatus::Failed,
        }
    }

    pub(crate) fn from_error(e: &IsacError) -> Self {
        match e {
            IsacError::Infeasible(_) | IsacError::Solver { status: SolveStatus::Infeasible, .. } => TrialStatus::Infeasible,
            _ => TrialStatus::Failed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Optimal => "optimal",
            TrialStatus::MaxIters => "max_iters",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::Failed => "failed",
        }
    }
}

/// One (trial, sweep point) result. Metric fields are empty when the
/// design could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub schema_version: u32,
    pub trial: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub omega1: f64,
    pub p_max_dbm: f64,
    pub n_tx: usize,
    pub status: TrialStatus,
    pub sum_rate: Option<f64>,
    pub relaxed_sum_rate: Option<f64>,
    pub mse_relaxed: Option<f64>,
    pub mse_extracted: Option<f64>,
    pub min_ci_margin: Option<f64>,
    pub tx_power: Option<f64>,
    pub rank_ratio: Option<f64>,
    pub alpha: Option<f64>,
    pub f1_star: Option<f64>,
    pub f2_star: Option<f64>,
    pub extraction: Option<Extraction>,
    pub iters: usize,
    pub wall_ms: f64,
    pub error: Option<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Sweep coordinates of a record.
#[derive(Debug, Clone, Copy)]
struct Point {
    trial: usize,
    seed: u64,
    omega1: f64,
    p_max_dbm: f64,
    n_tx: usize,
}

impl TrialRecord {
    fn blank(scheme: Scheme, at: Point, status: TrialStatus) -> Self {
        TrialRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            trial: at.trial,
            seed: at.seed,
            scheme,
            omega1: at.omega1,
            p_max_dbm: at.p_max_dbm,
            n_tx: at.n_tx,
            status,
            sum_rate: None,
            relaxed_sum_rate: None,
            mse_relaxed: None,
            mse_extracted: None,
            min_ci_margin: None,
            tx_power: None,
            rank_ratio: None,
            alpha: None,
            f1_star: None,
            f2_star: None,
            extraction: None,
            iters: 0,
            wall_ms: 0.0,
            error: None,
        }
    }

    fn failed(scheme: Scheme, at: Point, e: &IsacError) -> Self {
        TrialRecord { error: Some(e.to_string()), ..TrialRecord::blank(scheme, at, TrialStatus::from_error(e)) }
    }

    fn from_design(scheme: Scheme, at: Point, d: &WaveformDesign, status: TrialStatus, iters: usize) -> Self {
        TrialRecord {
            sum_rate: finite(d.sum_rate()),
            relaxed_sum_rate: finite(d.relaxed_sum_rate),
            mse_relaxed: finite(d.relaxed_mse),
            mse_extracted: finite(d.mse()),
            min_ci_margin: finite(d.report.min_margin()),
            tx_power: finite(d.report.tx_power),
            rank_ratio: finite(d.relaxed_rank_ratio),
            extraction: Some(d.extraction),
            iters,
            ..TrialRecord::blank(scheme, at, status)
        }
    }

    fn from_point(scheme: Scheme, at: Point, p: &ParetoPoint, u: &Utopia) -> Self {
        TrialRecord {
            alpha: finite(p.alpha),
            f1_star: Some(u.f1_star),
            f2_star: Some(u.f2_star),
            ..TrialRecord::from_design(scheme, at, &p.design, TrialStatus::from_solve(p.status), p.iterations)
        }
    }
}

/// Records of a batch in (trial, n_tx, p_max, omega1) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOutput {
    pub records: Vec<TrialRecord>,
}

impl MonteCarloOutput {
    pub fn failure_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let failed = self.records.iter().filter(|r| !r.status.is_success()).count();
        failed as f64 / self.records.len() as f64
    }

    pub fn exceeds_failure_threshold(&self) -> bool {
        self.failure_fraction() > FAILURE_THRESHOLD
    }
}

/// Runs every trial of `cfg`. Trials are independent jobs seeded with
/// `mix(rng_seed, t)`; failures are recorded and never stop the batch.
pub fn run_montecarlo(cfg: &RunConfig) -> Result<MonteCarloOutput> {
    cfg.validate()?;
    let per_trial = map_indexed(cfg.n_trials, cfg.jobs, |t| run_trial(cfg, t));
    Ok(MonteCarloOutput { records: per_trial.into_iter().flatten().collect() })
}

fn run_trial(cfg: &RunConfig, trial: usize) -> Vec<TrialRecord> {
    let seed = mix(cfg.system.rng_seed, trial as u64);
    let omegas = cfg.omegas();
    let mut out = Vec::new();
    for n_tx in cfg.n_tx_grid() {
        let base = SystemConfig { n_tx, rng_seed: seed, ..cfg.system.clone() };
        let scenario = draw_scenario(&base, seed);
        for p_max_dbm in cfg.p_max_grid() {
            let sys = SystemConfig { p_max_dbm, ..base.clone() };
            let at = |omega1| Point { trial, seed, omega1, p_max_dbm, n_tx };
            match &scenario {
                Ok(sc) => out.extend(run_point(cfg.scheme, sc, &sys, &omegas, at)),
                Err(e) => out.extend(omegas.iter().map(|&w| TrialRecord::failed(cfg.scheme, at(w), e))),
            }
        }
    }
    out
}

fn run_point(
    scheme: Scheme,
    sc: &ScenarioDraw,
    sys: &SystemConfig,
    omegas: &[f64],
    at: impl Fn(f64) -> Point,
) -> Vec<TrialRecord> {
    let timed = |rec: Result<TrialRecord>, start: Instant, point: Point| {
        let mut rec = rec.unwrap_or_else(|e| TrialRecord::failed(scheme, point, &e));
        rec.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        rec
    };
    match scheme {
        Scheme::Soop1 => {
            let start = Instant::now();
            let rec = solve_soop1(sc, sys).map(|r| {
                let status = if r.converged { TrialStatus::Optimal } else { TrialStatus::MaxIters };
                TrialRecord {
                    f1_star: Some(r.f1_star),
                    ..TrialRecord::from_design(scheme, at(omegas[0]), &r.design, status, r.iterations)
                }
            });
            vec![timed(rec, start, at(omegas[0]))]
        }
        Scheme::Soop2 => {
            let start = Instant::now();
            let rec = solve_soop2(sc, sys).map(|r| {
                let status = if r.converged { TrialStatus::Optimal } else { TrialStatus::MaxIters };
                TrialRecord {
                    f2_star: Some(r.f2_star),
                    ..TrialRecord::from_design(scheme, at(omegas[0]), &r.design, status, r.iterations)
                }
            });
            vec![timed(rec, start, at(omegas[0]))]
        }
        Scheme::Moop | Scheme::WeightedSum => {
            let u = match utopia(sc, sys) {
                Ok(u) => u,
                Err(e) => return omegas.iter().map(|&w| TrialRecord::failed(scheme, at(w), &e)).collect(),
            };
            omegas
                .iter()
                .map(|&w| {
                    let start = Instant::now();
                    let point = ScalarizationWeights::new(w, sys.xi).and_then(|weights| match scheme {
                        Scheme::WeightedSum => weighted_sum_baseline(sc, &u, &weights, sys),
                        _ => solve_moop(sc, &u, &weights, sys),
                    });
                    timed(point.map(|p| TrialRecord::from_point(scheme, at(w), &p, &u)), start, at(w))
                })
                .collect()
        }
    }
}
