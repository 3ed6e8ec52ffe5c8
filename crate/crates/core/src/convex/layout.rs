use serde::{Deserialize, Serialize};

use crate::{CMatrix, C64};

/// Real parameterization of an m x m Hermitian matrix by m^2 numbers.
///
/// Index `i < m` holds the diagonal entry (i, i). The remaining indices
/// walk the strict upper triangle row by row, two slots per entry:
/// `Re R[i][j]` followed by `Im R[i][j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermitianLayout {
    m: usize,
}

/// One elementary term `coef * e_i e_j^T` of a basis matrix.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BasisTerm {
    pub i: usize,
    pub j: usize,
    pub coef: C64,
}

impl HermitianLayout {
    pub fn new(m: usize) -> Self {
        HermitianLayout { m }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn n_params(&self) -> usize {
        self.m * self.m
    }

    fn pair_slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.m);
        // Pairs before row i: sum_{r<i} (m-1-r).
        let before = i * (2 * self.m - i - 1) / 2;
        self.m + 2 * (before + (j - i - 1))
    }

    /// Parameter index of Re R[i][j] (diagonal when i == j).
    pub fn re_index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        if a == b {
            a
        } else {
            self.pair_slot(a, b)
        }
    }

    /// Parameter index of Im R[i][j] for i < j. The lower triangle carries
    /// the same parameter with a negative sign.
    pub fn im_index(&self, i: usize, j: usize) -> Option<usize> {
        if i < j {
            Some(self.pair_slot(i, j) + 1)
        } else {
            None
        }
    }

    pub fn to_matrix(&self, params: &[f64]) -> CMatrix {
        let m = self.m;
        let mut r = CMatrix::zeros(m, m);
        for i in 0..m {
            r[(i, i)] = C64::new(params[i], 0.0);
            for j in i + 1..m {
                let s = self.pair_slot(i, j);
                let v = C64::new(params[s], params[s + 1]);
                r[(i, j)] = v;
                r[(j, i)] = v.conj();
            }
        }
        r
    }

    /// Parameters of the Hermitian part of `r`.
    pub fn to_params(&self, r: &CMatrix) -> Vec<f64> {
        let m = self.m;
        let mut p = vec![0.0; self.n_params()];
        for i in 0..m {
            p[i] = r[(i, i)].re;
            for j in i + 1..m {
                let s = self.pair_slot(i, j);
                let v = (r[(i, j)] + r[(j, i)].conj()) * 0.5;
                p[s] = v.re;
                p[s + 1] = v.im;
            }
        }
        p
    }

    /// Coefficients `c` with `Re Tr(C R) = c . params` for every Hermitian R.
    pub fn linear_coeffs(&self, c: &CMatrix) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; self.n_params()];
        for i in 0..m {
            out[i] = c[(i, i)].re;
            for j in i + 1..m {
                let s = self.pair_slot(i, j);
                out[s] = c[(j, i)].re + c[(i, j)].re;
                out[s + 1] = c[(i, j)].im - c[(j, i)].im;
            }
        }
        out
    }

    /// Coefficients of the trace of the leading `k x k` block.
    pub fn trace_coeffs(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params()];
        out.iter_mut().take(k.min(self.m)).for_each(|v| *v = 1.0);
        out
    }

    /// Elementary terms of the basis matrix E_p, so that R = sum_p params[p] E_p.
    pub(crate) fn basis(&self) -> Vec<Vec<BasisTerm>> {
        let m = self.m;
        let mut out = vec![Vec::new(); self.n_params()];
        for i in 0..m {
            out[i].push(BasisTerm { i, j: i, coef: C64::new(1.0, 0.0) });
            for j in i + 1..m {
                let s = self.pair_slot(i, j);
                out[s].push(BasisTerm { i, j, coef: C64::new(1.0, 0.0) });
                out[s].push(BasisTerm { i: j, j: i, coef: C64::new(1.0, 0.0) });
                out[s + 1].push(BasisTerm { i, j, coef: C64::new(0.0, 1.0) });
                out[s + 1].push(BasisTerm { i: j, j: i, coef: C64::new(0.0, -1.0) });
            }
        }
        out
    }
}
