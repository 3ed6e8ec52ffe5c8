use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::montecarlo::{mix, TrialStatus, RECORD_SCHEMA_VERSION};
use crate::algorithms::{
    soo_baselines, solve_soop1, solve_soop2, weighted_sum_baseline, ScalarizationWeights, SooMode, Utopia,
    WaveformDesign,
};
use crate::error::Result;
use crate::model::{draw_scenario, ScenarioDraw, SystemConfig};
use crate::par::map_indexed;

/// Fractions of the range between the two single-objective optima at
/// which the constrained baselines are evaluated.
pub const BASELINE_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub const BASELINE_COLUMNS: [&str; 7] = ["seed", "scheme", "parameter", "sum_rate", "mse", "min_ci_margin", "status"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineScheme {
    /// Parameter: omega1.
    WeightedSum,
    /// Parameter: per-user rate floor, bit/s.
    SooMinMse,
    /// Parameter: MSE cap.
    SooMaxRate,
}

impl BaselineScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineScheme::WeightedSum => "weighted_sum",
            BaselineScheme::SooMinMse => "soo_min_mse",
            BaselineScheme::SooMaxRate => "soo_max_rate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub schema_version: u32,
    pub trial: usize,
    pub seed: u64,
    pub scheme: BaselineScheme,
    pub parameter: f64,
    pub sum_rate: Option<f64>,
    pub mse: Option<f64>,
    pub min_ci_margin: Option<f64>,
    pub status: TrialStatus,
    pub error: Option<String>,
}

impl BaselineRecord {
    fn new(trial: usize, seed: u64, scheme: BaselineScheme, parameter: f64, r: Result<(WaveformDesign, bool)>) -> Self {
        let base = BaselineRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            trial,
            seed,
            scheme,
            parameter,
            sum_rate: None,
            mse: None,
            min_ci_margin: None,
            status: TrialStatus::Failed,
            error: None,
        };
        match r {
            Ok((d, converged)) => BaselineRecord {
                sum_rate: Some(d.sum_rate()),
                mse: Some(d.mse()),
                min_ci_margin: Some(d.report.min_margin()),
                status: if converged { TrialStatus::Optimal } else { TrialStatus::MaxIters },
                ..base
            },
            Err(e) => BaselineRecord { status: TrialStatus::from_error(&e), error: Some(e.to_string()), ..base },
        }
    }
}

/// Per trial: the weighted-sum design at every sweep weight, the MSE-optimal
/// design under per-user rate floors q |f1*| / K, and the rate-optimal
/// design under MSE caps f2* + q (M1 - f2*), where M1 is the MSE of the
/// sum-rate design and q runs over [`BASELINE_LEVELS`].
pub fn run_baselines(cfg: &RunConfig) -> Result<Vec<BaselineRecord>> {
    cfg.validate()?;
    let per_trial = map_indexed(cfg.n_trials, cfg.jobs, |t| {
        let seed = mix(cfg.system.rng_seed, t as u64);
        let sys = SystemConfig { rng_seed: seed, ..cfg.system.clone() };
        match draw_scenario(&sys, seed) {
            Ok(sc) => baselines_for(&sc, &sys, &cfg.omegas(), t, seed),
            Err(e) => vec![BaselineRecord::new(t, seed, BaselineScheme::WeightedSum, f64::NAN, Err(e))],
        }
    });
    Ok(per_trial.into_iter().flatten().collect())
}

fn baselines_for(sc: &ScenarioDraw, sys: &SystemConfig, omegas: &[f64], t: usize, seed: u64) -> Vec<BaselineRecord> {
    let rec = |scheme, parameter, r| BaselineRecord::new(t, seed, scheme, parameter, r);
    let anchors = solve_soop1(sc, sys).and_then(|s1| {
        let s2 = solve_soop2(sc, sys)?;
        let u = Utopia::new(s1.f1_star, s2.f2_star)?;
        Ok((u, s1.design.mse()))
    });
    let (u, mse_hi) = match anchors {
        Ok(a) => a,
        Err(e) => return vec![rec(BaselineScheme::WeightedSum, f64::NAN, Err(e))],
    };
    let mut out = Vec::new();
    for &w in omegas {
        let r = ScalarizationWeights::new(w, sys.xi)
            .and_then(|weights| weighted_sum_baseline(sc, &u, &weights, sys))
            .map(|p| (p.design, p.converged));
        out.push(rec(BaselineScheme::WeightedSum, w, r));
    }
    let k = sc.n_users() as f64;
    for q in BASELINE_LEVELS {
        let floor = q * u.f1_star.abs() / k;
        let r = soo_baselines(sc, floor, SooMode::MseMinRateConstrained, sys).map(|d| (d, true));
        out.push(rec(BaselineScheme::SooMinMse, floor, r));
    }
    for q in BASELINE_LEVELS {
        let cap = u.f2_star + q * (mse_hi - u.f2_star).max(0.0);
        let r = soo_baselines(sc, cap, SooMode::RateMaxMseConstrained, sys).map(|d| (d, true));
        out.push(rec(BaselineScheme::SooMaxRate, cap, r));
    }
    out
}

pub fn write_baselines_csv<W: Write>(records: &[BaselineRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(BASELINE_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.scheme.as_str().to_string(),
            r.parameter.to_string(),
            opt(r.sum_rate),
            opt(r.mse),
            opt(r.min_ci_margin),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::error::IsacError::io("<csv>", e))
}
