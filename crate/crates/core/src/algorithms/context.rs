//! Power-normalized view of a scenario shared by every algorithm.
//!
//! Decision variables are scaled by the power budget: x' = x / sqrt(P),
//! R' = R / P, so the budget becomes one and the noise power becomes
//! N0 / P. Reported metrics are always computed in physical units.

use nalgebra::DMatrix;

use crate::convex::{HermitianLayout, SolveStatus, Solution, SolverConfig};
use crate::error::{IsacError, Result};
use crate::metrics::{matched_mse, sum_rate};
use crate::model::{ArrayManifold, RealifiedUser, ScenarioDraw, SystemConfig};
use crate::{CMatrix, CVector, C64};

pub(crate) struct Context<'a> {
    pub scenario: &'a ScenarioDraw,
    pub cfg: &'a SystemConfig,
    pub n: usize,
    pub k: usize,
    pub p_mw: f64,
    /// N0 / P.
    pub n0: f64,
    /// sqrt(N0 Gamma_k / P) per user.
    pub thresholds: Vec<f64>,
    pub tan_phi: f64,
    /// h_k s_k.
    pub h_eff: Vec<CVector>,
    pub users: Vec<RealifiedUser>,
    /// Converts a sum of natural-log rates into bit/s.
    pub bits_per_nat: f64,
    /// Normalized beampattern MSE, minimized over eta, is 1/2 theta^T Q theta
    /// over the parameters of R'.
    pub q: DMatrix<f64>,
    pub manifold: ArrayManifold,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a ScenarioDraw, cfg: &'a SystemConfig) -> Result<Self> {
        let n = scenario.n_tx();
        let k = scenario.n_users();
        if k == 0 || n == 0 {
            return Err(IsacError::DimensionMismatch("scenario has no users or antennas".into()));
        }
        let p_mw = cfg.p_max_mw();
        let n0 = cfg.noise_mw() / p_mw;
        let thresholds = (0..k).map(|u| (cfg.noise_mw() * cfg.gamma_linear(u) / p_mw).sqrt()).collect();
        let h_eff = scenario.effective_channels();
        let users = h_eff.iter().map(RealifiedUser::from_effective_channel).collect();
        let manifold = ArrayManifold::new(n, &scenario.grid);
        let q = mse_quadratic(&manifold, &scenario.desired_gain)?;
        Ok(Context {
            scenario,
            cfg,
            n,
            k,
            p_mw,
            n0,
            thresholds,
            tan_phi: cfg.ci_half_angle().tan(),
            h_eff,
            users,
            bits_per_nat: cfg.bandwidth_hz * std::f64::consts::LOG2_E,
            q,
            manifold,
        })
    }

    pub fn to_physical(&self, x: &CVector) -> CVector {
        x * C64::new(self.p_mw.sqrt(), 0.0)
    }

    /// Received noise-free symbols h~_k^H x'.
    pub fn received(&self, x: &CVector) -> Vec<C64> {
        self.h_eff.iter().map(|h| h.dotc(x)).collect()
    }

    /// Sum of ln(1 + |c_k|^2 / n0).
    pub fn nat_rate(&self, x: &CVector) -> f64 {
        self.received(x).iter().map(|c| (c.norm_sqr() / self.n0).ln_1p()).sum()
    }

    pub fn rate_bps(&self, x: &CVector) -> f64 {
        sum_rate(&self.scenario.channels, &self.to_physical(x), self.cfg.noise_mw(), self.cfg.bandwidth_hz)
    }

    /// Physical beampattern MSE of the covariance P R'.
    pub fn mse_of_cov(&self, r: &CMatrix) -> f64 {
        let gains = self.manifold.gains(&(r * C64::new(self.p_mw, 0.0)));
        matched_mse(&gains, &self.scenario.desired_gain).map_or(f64::INFINITY, |(m, _)| m)
    }

    pub fn mse_of_vector(&self, x: &CVector) -> f64 {
        self.mse_of_cov(&(x * x.adjoint()))
    }

    /// Smallest normalized CI margin; strictly positive means strictly feasible.
    pub fn normalized_margin(&self, x: &CVector) -> f64 {
        self.received(x)
            .iter()
            .zip(&self.thresholds)
            .map(|(c, t)| (c.re - t) * self.tan_phi - c.im.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { max_outer: self.cfg.max_iters.solver, ..SolverConfig::default() }
    }

    /// Scale that brings x' to unit power.
    pub fn unit_power(x: &CVector) -> Option<CVector> {
        let norm = x.norm();
        (norm > 0.0 && norm.is_finite()).then(|| x / C64::new(norm, 0.0))
    }
}

/// Accepts a subproblem solution that carries a usable point.
pub(crate) fn usable(sol: Solution, what: &str) -> Result<Solution> {
    match sol.status {
        SolveStatus::Optimal => Ok(sol),
        SolveStatus::MaxIters => {
            log::debug!("{what}: subproblem stopped early, residuals {:?}", sol.kkt);
            Ok(sol)
        }
        status => Err(IsacError::Solver { status, detail: what.to_string() }),
    }
}

/// Q with 1/2 theta^T Q theta = min_eta (1/L) || eta g^ - G(theta) ||^2.
fn mse_quadratic(manifold: &ArrayManifold, desired: &[f64]) -> Result<DMatrix<f64>> {
    let energy: f64 = desired.iter().map(|g| g * g).sum();
    if energy <= 0.0 {
        return Err(IsacError::DegenerateBeampattern);
    }
    let n = manifold.n_tx();
    let layout = HermitianLayout::new(n);
    let l = manifold.len();
    let mut w = DMatrix::zeros(l, layout.n_params());
    for row in 0..l {
        let a = manifold.steering(row);
        let coeffs = layout.linear_coeffs(&(&a * a.adjoint()));
        for (c, v) in coeffs.into_iter().enumerate() {
            w[(row, c)] = v;
        }
    }
    let g = nalgebra::DVector::from_column_slice(desired);
    let gw = w.tr_mul(&g);
    let proj = &w - &g * gw.transpose() / energy;
    let q = proj.tr_mul(&proj) * (2.0 / l as f64);
    Ok((&q + q.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::draw_scenario;
    use rand::SeedableRng;

    #[test]
    fn quadratic_matches_matched_mse() {
        let cfg = SystemConfig { n_tx: 4, ..SystemConfig::default() };
        let sc = draw_scenario(&cfg, 3).unwrap();
        let ctx = Context::new(&sc, &cfg).unwrap();
        let layout = HermitianLayout::new(4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let b = CMatrix::from_fn(4, 4, |_, _| crate::model::complex_gaussian(&mut rng));
            let r = &b * b.adjoint() * C64::new(0.1, 0.0);
            let theta = nalgebra::DVector::from_vec(layout.to_params(&r));
            let quad = 0.5 * theta.dot(&(&ctx.q * &theta));
            let direct = ctx.mse_of_cov(&r) / (ctx.p_mw * ctx.p_mw);
            assert!((quad - direct).abs() <= 1e-10 * direct.max(1e-12), "{quad} vs {direct}");
        }
    }
}
