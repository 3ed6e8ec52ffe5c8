//! Invariant suite run by the `validate` command: each check exercises one
//! module on a small seeded instance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::export::write_records_csv;
use super::montecarlo::mix;
use crate::algorithms::{
    dominance_filter, pareto_sweep_with, scalarize_tchebycheff, solve_soop1, solve_soop2, ScalarizationWeights, Utopia,
};
use crate::convex::{psd_project, psd_trace_project, solve, ConstraintAtom, ConvexProblem, SolverConfig};
use crate::metrics::{beampattern_gain, hermitian_eigen, matched_mse, sum_rate};
use crate::model::{
    build_grid, complex_gaussian, draw_scenario, realify, steering_vector, weight_grid, SystemConfig,
};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small() -> SystemConfig {
    SystemConfig { n_tx: 4, n_users: 2, grid_size: 90, ..SystemConfig::default() }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn config_defaults() -> Outcome {
    let cfg = RunConfig::from_json_str("{}").map_err(|e| e.to_string())?;
    ensure(cfg.system == SystemConfig::default(), || "defaults differ".into())?;
    ensure(weight_grid(0.01).len() == 99, || "weight grid".into())?;
    let bad = RunConfig::from_json_str(r#"{"n_users": 0}"#);
    ensure(bad.is_err_and(|e| e.to_string().contains("n_users")), || "n_users = 0 accepted".into())?;
    Ok("defaults load, invalid input rejected".into())
}

fn steering_norms() -> Outcome {
    for n in [1, 4, 8, 16] {
        for deg in [-90.0, -33.0, 0.0, 45.0, 90.0] {
            let a = steering_vector(n, f64::to_radians(deg)).map_err(|e| e.to_string())?;
            ensure((a.norm() - 1.0).abs() < 1e-12, || format!("n = {n}, {deg} deg"))?;
        }
    }
    Ok("unit norm".into())
}

fn scenario_determinism() -> Outcome {
    let cfg = small();
    let a = draw_scenario(&cfg, 5).map_err(|e| e.to_string())?;
    let b = draw_scenario(&cfg, 5).map_err(|e| e.to_string())?;
    ensure(a.channels == b.channels && a.symbols == b.symbols, || "same seed, different draw".into())?;
    let x = CVector::from_fn(4, |i, _| C64::new(1.0 + i as f64, 0.5 - i as f64));
    let (users, xr) = realify(&a.channels, &a.symbols, &x).map_err(|e| e.to_string())?;
    for (u, h) in users.iter().zip(a.effective_channels()) {
        let (re, im) = u.received(&xr);
        let c = h.dotc(&x);
        ensure((re - c.re).abs() < 1e-12 && (im - c.im).abs() < 1e-12, || "real form mismatch".into())?;
    }
    Ok("seeded draws repeat; real form matches".into())
}

fn projections() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let h = random_hermitian(&mut rng, 3);
        let p = psd_project(&h).map_err(|e| e.to_string())?;
        let (vals, _) = hermitian_eigen(&p);
        ensure(vals.iter().all(|v| *v >= -1e-12), || "negative eigenvalue".into())?;
        let again = psd_project(&p).map_err(|e| e.to_string())?;
        ensure((&again - &p).norm() < 1e-10, || "not idempotent".into())?;
        let t = psd_trace_project(&h, 1.0).map_err(|e| e.to_string())?;
        ensure(t.trace().re <= 1.0 + 1e-12, || "trace above cap".into())?;
    }
    Ok("PSD, idempotent, trace-capped".into())
}

fn solver_kkt() -> Outcome {
    // min (u0 - 1)^2 + (u1 + 2)^2 over the unit ball: optimum (1, -2)/sqrt(5).
    let mut p = ConvexProblem::new(2, 0);
    p.set_quadratic(nalgebra::DMatrix::identity(2, 2) * 2.0);
    p.set_linear(vec![-2.0, 4.0]);
    p.add(ConstraintAtom::Ball { indices: vec![0, 1], radius_sq: 1.0 });
    let sol = solve(&p, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let s = 5f64.sqrt();
    ensure((sol.vector[0] - 1.0 / s).abs() < 1e-6 && (sol.vector[1] + 2.0 / s).abs() < 1e-6, || {
        format!("solution {:?}", sol.vector.as_slice())
    })?;
    ensure(sol.kkt.within(1e-6), || format!("KKT residuals {:?}", sol.kkt))?;
    Ok(format!("status {:?}, residual {:.1e}", sol.status, sol.kkt.max()))
}

fn metrics_consistency() -> Outcome {
    let cfg = small();
    let sc = draw_scenario(&cfg, 2).map_err(|e| e.to_string())?;
    let r = CMatrix::identity(4, 4) * C64::new(cfg.p_max_mw() / 4.0, 0.0);
    let gains = beampattern_gain(&r, &sc.grid).map_err(|e| e.to_string())?;
    let (mse, eta) = matched_mse(&gains, &sc.desired_gain).map_err(|e| e.to_string())?;
    for d in [0.9, 1.1] {
        let other: f64 = gains.iter().zip(&sc.desired_gain).map(|(g, t)| (eta * d * t - g).powi(2)).sum::<f64>()
            / gains.len() as f64;
        ensure(other >= mse - 1e-9, || "eta* is not a minimizer".into())?;
    }
    let x = CVector::from_element(4, C64::new(0.5, 0.0));
    ensure(sum_rate(&sc.channels, &x, cfg.noise_mw(), cfg.bandwidth_hz) >= 0.0, || "negative rate".into())?;
    let grid = build_grid(cfg.grid_size).map_err(|e| e.to_string())?;
    ensure(grid.len() == cfg.grid_size, || "grid size".into())?;
    Ok(format!("matched MSE {mse:.3e}"))
}

fn sum_rate_design() -> Outcome {
    let cfg = small();
    let sc = draw_scenario(&cfg, mix(cfg.rng_seed, 0)).map_err(|e| e.to_string())?;
    let r = solve_soop1(&sc, &cfg).map_err(|e| e.to_string())?;
    ensure(r.design.report.min_margin() >= -1e-9, || "CI violated".into())?;
    ensure(r.design.report.tx_power <= cfg.p_max_mw() * (1.0 + 1e-9), || "power above budget".into())?;
    ensure(r.mu_history.windows(2).all(|w| w[1] >= w[0] - 1e-7), || format!("{:?}", r.mu_history))?;
    Ok(format!("{:.3} bit/s in {} iterations", r.design.sum_rate(), r.iterations))
}

fn beampattern_design() -> Outcome {
    let cfg = small();
    let sc = draw_scenario(&cfg, mix(cfg.rng_seed, 0)).map_err(|e| e.to_string())?;
    let r = solve_soop2(&sc, &cfg).map_err(|e| e.to_string())?;
    let cov = r.design.covariance.as_ref().ok_or("no covariance")?;
    ensure((cov.trace().re - cfg.p_max_mw()).abs() <= 1e-6 * cfg.p_max_mw(), || "trace != P".into())?;
    ensure(r.mse_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), || "MSE increased".into())?;
    ensure(r.design.mse() >= r.f2_star * (1.0 - 1e-9), || "extracted below relaxed".into())?;
    Ok(format!("f2* = {:.4e}", r.f2_star))
}

fn tradeoff_design() -> Outcome {
    let cfg = small();
    let sc = draw_scenario(&cfg, mix(cfg.rng_seed, 0)).map_err(|e| e.to_string())?;
    let front = pareto_sweep_with(&sc, &cfg, &[0.2, 0.5, 0.8], 1).map_err(|e| e.to_string())?;
    ensure(front.failures.is_empty(), || format!("{:?}", front.failures))?;
    for p in &front.points {
        let alphas: Vec<f64> = p.trajectory.iter().map(|t| t.objective).collect();
        ensure(alphas.windows(2).all(|w| w[1] <= w[0] + 1e-9), || format!("alpha rose: {alphas:?}"))?;
        ensure(p.design.report.min_margin() >= -1e-9, || "CI violated".into())?;
    }
    let values: Vec<[f64; 2]> = front.points.iter().map(|p| [p.f1, p.f2]).collect();
    let kept = dominance_filter(&values);
    ensure(!kept.is_empty(), || "empty front".into())?;
    let u = Utopia::new(-10.0, 1.0).map_err(|e| e.to_string())?;
    let w = ScalarizationWeights::new(0.5, 0.0).map_err(|e| e.to_string())?;
    ensure(scalarize_tchebycheff(-10.0, 1.0, &u, &w).alpha.abs() < 1e-15, || "utopia not zero".into())?;
    Ok(format!("{} points, {} non-dominated", front.points.len(), kept.len()))
}

fn csv_schema() -> Outcome {
    let mut buf = Vec::new();
    write_records_csv(&[], &mut buf).map_err(|e| e.to_string())?;
    let header = String::from_utf8(buf).map_err(|e| e.to_string())?;
    ensure(
        header == "seed,omega1,p_max_dbm,n_tx,sum_rate,mse_relaxed,mse_extracted,min_ci_margin,tx_power,iters,status\n",
        || header.clone(),
    )?;
    Ok("header matches".into())
}

/// Runs every check; a panicking check counts as failed.
pub fn validate_suite() -> ValidationReport {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("config", config_defaults),
        ("model.steering", steering_norms),
        ("model.scenario", scenario_determinism),
        ("convex.projection", projections),
        ("convex.solver", solver_kkt),
        ("metrics", metrics_consistency),
        ("algorithms.sum_rate", sum_rate_design),
        ("algorithms.beampattern", beampattern_design),
        ("algorithms.tradeoff", tradeoff_design),
        ("harness.csv", csv_schema),
    ];
    let checks = checks
        .iter()
        .map(|(name, f)| {
            let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { name: name.to_string(), passed, detail }
        })
        .collect();
    ValidationReport { checks }
}
