use nalgebra::{DMatrix, DVector};

use crate::error::{IsacError, Result};
use crate::{CVector, C64};

/// Real-valued view of one user's symbol-rotated channel h~ = h s.
///
/// With x~ = [Im(x); Re(x)]:
/// `z . x~ = Im(h~^H x)`, `z_tilde . x~ = Re(h~^H x)` and
/// `|| H^T x~ ||^2 = |h~^H x|^2` where `H = [z | z_tilde]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealifiedUser {
    pub z: DVector<f64>,
    pub z_tilde: DVector<f64>,
    pub h: DMatrix<f64>,
}

impl RealifiedUser {
    pub fn from_effective_channel(h_eff: &CVector) -> Self {
        let n = h_eff.len();
        let z = DVector::from_fn(2 * n, |i, _| if i < n { h_eff[i].re } else { -h_eff[i - n].im });
        let z_tilde = rotate(&z);
        let mut h = DMatrix::zeros(2 * n, 2);
        h.set_column(0, &z);
        h.set_column(1, &z_tilde);
        RealifiedUser { z, z_tilde, h }
    }

    /// (Re, Im) of h~^H x evaluated through the real form.
    pub fn received(&self, x_real: &DVector<f64>) -> (f64, f64) {
        (self.z_tilde.dot(x_real), self.z.dot(x_real))
    }
}

/// Applies [[0, -I], [I, 0]] to a stacked vector.
pub fn rotate(z: &DVector<f64>) -> DVector<f64> {
    let n = z.len() / 2;
    DVector::from_fn(2 * n, |i, _| if i < n { -z[i + n] } else { z[i - n] })
}

/// x~ = [Im(x); Re(x)].
pub fn realify_vector(x: &CVector) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| if i < n { x[i].im } else { x[i - n].re })
}

/// Inverse of [`realify_vector`].
pub fn complexify_vector(x_real: &DVector<f64>) -> CVector {
    let n = x_real.len() / 2;
    CVector::from_fn(n, |i, _| C64::new(x_real[n + i], x_real[i]))
}

/// Realifies every user's h_k s_k together with the transmit vector.
pub fn realify(
    channels: &[CVector],
    symbols: &[C64],
    x: &CVector,
) -> Result<(Vec<RealifiedUser>, DVector<f64>)> {
    if channels.len() != symbols.len() {
        return Err(IsacError::DimensionMismatch(format!(
            "{} channels but {} symbols",
            channels.len(),
            symbols.len()
        )));
    }
    if let Some(h) = channels.iter().find(|h| h.len() != x.len()) {
        return Err(IsacError::DimensionMismatch(format!(
            "channel length {} vs transmit length {}",
            h.len(),
            x.len()
        )));
    }
    let users = channels
        .iter()
        .zip(symbols)
        .map(|(h, s)| RealifiedUser::from_effective_channel(&(h * *s)))
        .collect();
    Ok((users, realify_vector(x)))
}
