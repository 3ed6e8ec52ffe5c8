//! Closed-form performance metrics of a transmit design.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::model::{ArrayManifold, AngleGrid, ScenarioDraw, SystemConfig};
use crate::{CMatrix, CVector};

const HERMITIAN_TOL: f64 = 1e-10;
const PSD_TOL: f64 = -1e-8;

/// Largest entry of |A - A^H|, relative to the largest entry of A (at least 1).
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn check_hermitian(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(IsacError::DimensionMismatch(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    let d = hermitian_defect(a);
    if d > HERMITIAN_TOL {
        return Err(IsacError::NotHermitian(d));
    }
    Ok(())
}

/// Eigenvalues in descending order with matching eigenvector columns.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (a + a.adjoint()) * crate::C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// lambda_2 / lambda_1 of a PSD matrix; zero for rank one or the zero matrix.
pub fn rank_ratio(r: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(r);
    if vals.len() < 2 || vals[0] <= 0.0 {
        return 0.0;
    }
    (vals[1].max(0.0)) / vals[0]
}

/// G(theta_l) = a(theta_l)^H R a(theta_l) on every grid angle.
pub fn beampattern_gain(r: &CMatrix, grid: &AngleGrid) -> Result<Vec<f64>> {
    check_hermitian(r)?;
    let (vals, _) = hermitian_eigen(r);
    let scale = vals.first().copied().unwrap_or(0.0).abs().max(1.0);
    if let Some(&min) = vals.last() {
        if min < PSD_TOL * scale {
            return Err(IsacError::Numerical(format!("covariance has eigenvalue {min:.3e} < 0")));
        }
    }
    Ok(ArrayManifold::new(r.nrows(), grid).gains(r))
}

/// Per-user rates B log2(1 + |h_k^H x|^2 / N0).
pub fn per_user_rates(channels: &[CVector], x: &CVector, noise_mw: f64, bandwidth_hz: f64) -> Vec<f64> {
    channels.iter().map(|h| bandwidth_hz * (1.0 + h.dotc(x).norm_sqr() / noise_mw).log2()).collect()
}

pub fn sum_rate(channels: &[CVector], x: &CVector, noise_mw: f64, bandwidth_hz: f64) -> f64 {
    per_user_rates(channels, x, noise_mw, bandwidth_hz).iter().sum()
}

/// Least-squares scaling of the desired pattern onto the achieved gains.
pub fn eta_star(gains: &[f64], desired: &[f64]) -> Result<f64> {
    if gains.len() != desired.len() {
        return Err(IsacError::DimensionMismatch("gains vs desired pattern".into()));
    }
    let energy: f64 = desired.iter().map(|d| d * d).sum();
    if energy <= 0.0 {
        return Err(IsacError::DegenerateBeampattern);
    }
    Ok(desired.iter().zip(gains).map(|(d, g)| d * g).sum::<f64>() / energy)
}

/// (1/L) sum_l (eta Ghat_l - G_l)^2.
pub fn beampattern_mse(eta: f64, gains: &[f64], desired: &[f64]) -> f64 {
    let l = gains.len().max(1) as f64;
    desired.iter().zip(gains).map(|(d, g)| (eta * d - g).powi(2)).sum::<f64>() / l
}

/// MSE at the optimal scaling, together with that scaling.
pub fn matched_mse(gains: &[f64], desired: &[f64]) -> Result<(f64, f64)> {
    let eta = eta_star(gains, desired)?;
    Ok((beampattern_mse(eta, gains, desired), eta))
}

/// Signed distance of user k's noise-free received symbol into its
/// constructive-interference sector; non-negative means feasible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiMargin {
    pub user: usize,
    pub value: f64,
}

impl CiMargin {
    pub fn is_feasible(&self) -> bool {
        self.value >= 0.0
    }
}

/// (Re(c) - threshold) tan(phi) - |Im(c)| for a rotated received symbol c.
pub fn ci_margin_value(c: crate::C64, threshold: f64, half_angle: f64) -> f64 {
    (c.re - threshold) * half_angle.tan() - c.im.abs()
}

/// CI margins with thresholds sqrt(N0 Gamma_k) and sector half-angle phi.
pub fn ci_margins(
    channels: &[CVector],
    symbols: &[crate::C64],
    x: &CVector,
    noise_mw: f64,
    gamma_linear: &[f64],
    half_angle: f64,
) -> Vec<CiMargin> {
    channels
        .iter()
        .zip(symbols)
        .zip(gamma_linear)
        .enumerate()
        .map(|(k, ((h, s), g))| {
            let c = (h * *s).dotc(x);
            CiMargin { user: k, value: ci_margin_value(c, (noise_mw * g).sqrt(), half_angle) }
        })
        .collect()
}

/// CI margins of `x` for a scenario under `cfg`.
pub fn ci_margin(scenario: &ScenarioDraw, x: &CVector, cfg: &SystemConfig) -> Vec<CiMargin> {
    let gammas: Vec<f64> = (0..scenario.n_users()).map(|k| cfg.gamma_linear(k)).collect();
    ci_margins(&scenario.channels, &scenario.symbols, x, cfg.noise_mw(), &gammas, cfg.ci_half_angle())
}

/// All metrics of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformReport {
    pub sum_rate_bps: f64,
    pub per_user_rate: Vec<f64>,
    pub mse: f64,
    pub eta_star: f64,
    pub margins: Vec<CiMargin>,
    pub tx_power: f64,
    pub beam_gains: Vec<f64>,
    /// lambda_2 / lambda_1 of the covariance used for the beampattern.
    pub rank_ratio: f64,
    /// ||R - x x^H||_F when both a vector and a covariance were supplied.
    pub covariance_gap: Option<f64>,
    /// Rate and CI fields come from the principal eigenvector of R.
    pub approximate: bool,
}

impl WaveformReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.value).fold(f64::INFINITY, f64::min)
    }

    pub fn row(&self, seed: u64, omega1: f64) -> ReportRow {
        ReportRow {
            seed,
            omega1,
            sum_rate: self.sum_rate_bps,
            mse: self.mse,
            tx_power: self.tx_power,
            min_margin: self.min_margin(),
            rank_ratio: self.rank_ratio,
        }
    }
}

/// Flat CSV form of a [`WaveformReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub seed: u64,
    pub omega1: f64,
    pub sum_rate: f64,
    pub mse: f64,
    pub tx_power: f64,
    pub min_margin: f64,
    pub rank_ratio: f64,
}

/// Principal rank-one factor sqrt(lambda_1) v_1 of a PSD matrix.
pub fn principal_component(r: &CMatrix) -> CVector {
    let (vals, vecs) = hermitian_eigen(r);
    let lead = vals.first().copied().unwrap_or(0.0).max(0.0);
    vecs.column(0).into_owned() * crate::C64::new(lead.sqrt(), 0.0)
}

/// Evaluates a transmit vector, a covariance, or both.
pub fn evaluate_waveform(
    x: Option<&CVector>,
    r: Option<&CMatrix>,
    scenario: &ScenarioDraw,
    cfg: &SystemConfig,
) -> Result<WaveformReport> {
    let (x_eval, r_eval, approximate) = match (x, r) {
        (None, None) => return Err(IsacError::MissingWaveform),
        (Some(x), None) => (x.clone(), x * x.adjoint(), false),
        (None, Some(r)) => {
            check_hermitian(r)?;
            (principal_component(r), r.clone(), true)
        }
        (Some(x), Some(r)) => {
            check_hermitian(r)?;
            (x.clone(), r.clone(), false)
        }
    };
    if x_eval.len() != scenario.n_tx() || r_eval.nrows() != scenario.n_tx() {
        return Err(IsacError::DimensionMismatch(format!(
            "waveform of length {} for a {}-antenna scenario",
            x_eval.len(),
            scenario.n_tx()
        )));
    }
    let beam_gains = beampattern_gain(&r_eval, &scenario.grid)?;
    let (mse, eta) = matched_mse(&beam_gains, &scenario.desired_gain)?;
    let per_user_rate =
        per_user_rates(&scenario.channels, &x_eval, cfg.noise_mw(), cfg.bandwidth_hz);
    let covariance_gap = match (x, r) {
        (Some(x), Some(r)) => Some((r - x * x.adjoint()).norm()),
        _ => None,
    };
    Ok(WaveformReport {
        sum_rate_bps: per_user_rate.iter().sum(),
        per_user_rate,
        mse,
        eta_star: eta,
        margins: ci_margin(scenario, &x_eval, cfg),
        tx_power: match (x, r) {
            (None, Some(r)) => r.trace().re,
            _ => x_eval.norm_squared(),
        },
        beam_gains,
        rank_ratio: rank_ratio(&r_eval),
        covariance_gap,
        approximate,
    })
}
