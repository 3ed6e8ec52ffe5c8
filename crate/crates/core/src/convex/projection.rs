use nalgebra::SymmetricEigen;

use crate::error::{IsacError, Result};
use crate::metrics::check_hermitian;
use crate::{CMatrix, C64};

fn eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(h)?;
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, 1e-15, 10_000)
        .ok_or_else(|| IsacError::Numerical("eigendecomposition did not converge".into()))?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

fn rebuild(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let n = vecs.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v != 0.0 {
            let col = vecs.column(k);
            out += &col * col.adjoint() * C64::new(v, 0.0);
        }
    }
    out
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clamped to zero.
pub fn psd_project(h: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = eigen(h)?;
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    Ok(rebuild(&clipped, &vecs))
}

/// Euclidean projection of a real vector onto {x >= 0, sum x <= cap}.
pub fn project_capped_simplex(v: &[f64], cap: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= cap {
        return clipped;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        acc += s;
        let candidate = (acc - cap) / (k + 1) as f64;
        if s - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Euclidean projection onto {R >= 0, Tr(R) <= cap}.
pub fn psd_trace_project(h: &CMatrix, cap: f64) -> Result<CMatrix> {
    if !(cap > 0.0) {
        return Err(IsacError::MalformedProblem(format!("trace cap {cap} must be positive")));
    }
    let (vals, vecs) = eigen(h)?;
    Ok(rebuild(&project_capped_simplex(&vals, cap), &vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|x| C64::new(*x, 0.0))))
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn psd_examples() {
        assert!((psd_project(&diag(&[2.0, -1.0])).unwrap() - diag(&[2.0, 0.0])).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(4, &mut rng);
        let psd = &a * a.adjoint();
        assert!((psd_project(&psd).unwrap() - &psd).norm() < 1e-12);
    }

    #[test]
    fn trace_examples() {
        let p = psd_trace_project(&diag(&[3.0, 2.0]), 4.0).unwrap();
        assert!((p - diag(&[2.5, 1.5])).norm() < 1e-14);
        let p = psd_trace_project(&diag(&[1.0, 0.5]), 4.0).unwrap();
        assert!((p - diag(&[1.0, 0.5])).norm() < 1e-14);
        let p = psd_trace_project(&diag(&[-1.0, -2.0]), 0.3).unwrap();
        assert!(p.norm() < 1e-14);
    }

    #[test]
    fn two_by_two_trace_example_matches_grid_search() {
        // Brute force over diagonal candidates (the optimum commutes with a diagonal input).
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let steps = 800;
        for i in 0..=steps {
            for j in 0..=steps - i {
                let (a, b) = (4.0 * i as f64 / steps as f64, 4.0 * j as f64 / steps as f64);
                let d = (3.0 - a).powi(2) + (2.0 - b).powi(2);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        assert!((best.1 - 2.5).abs() < 1e-2 && (best.2 - 1.5).abs() < 1e-2);
    }

    #[test]
    fn psd_projection_beats_random_psd_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(3, &mut rng);
        let p = psd_project(&h).unwrap();
        let dist = (&h - &p).norm();
        for _ in 0..100 {
            let a = random_hermitian(3, &mut rng);
            let s = &a * a.adjoint();
            assert!(dist <= (&h - s).norm() + 1e-12);
        }
    }

    #[test]
    fn idempotent_and_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = random_hermitian(3, &mut rng) * C64::new(2.0, 0.0);
            let b = random_hermitian(3, &mut rng) * C64::new(2.0, 0.0);
            for proj in [
                &(|m: &CMatrix| psd_project(m).unwrap()) as &dyn Fn(&CMatrix) -> CMatrix,
                &|m: &CMatrix| psd_trace_project(m, 1.5).unwrap(),
            ] {
                let (pa, pb) = (proj(&a), proj(&b));
                assert!((proj(&pa) - &pa).norm() < 1e-12);
                assert!((&pa - &pb).norm() <= (&a - &b).norm() + 1e-12);
            }
        }
    }

    #[test]
    fn capped_simplex_sums_to_cap_when_active() {
        let p = project_capped_simplex(&[5.0, 1.0, -3.0, 0.5], 2.0);
        assert!((p.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert_eq!(p, vec![2.0, 0.0, 0.0, 0.0]);
    }
}
