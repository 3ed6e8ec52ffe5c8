use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{ci_margin, hermitian_eigen};
use crate::model::{complex_gaussian, ScenarioDraw, SystemConfig};
use crate::{CMatrix, CVector, C64};

/// Candidates whose smallest CI margin is below this are discarded.
pub const CI_MARGIN_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizationOptions {
    pub draws: usize,
    pub seed: u64,
    /// Keep only candidates that satisfy every CI constraint.
    pub require_ci: bool,
}

impl RandomizationOptions {
    pub fn from_config(cfg: &SystemConfig, require_ci: bool) -> Self {
        RandomizationOptions { draws: cfg.randomization_draws.max(1), seed: cfg.rng_seed, require_ci }
    }
}

/// Outcome of a randomized rank-one extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Randomized {
    pub x: CVector,
    /// Selector value of `x`.
    pub score: f64,
    /// False when no candidate passed the filter and `x` is the
    /// power-scaled principal eigenvector.
    pub feasible: bool,
    pub evaluated: usize,
    pub kept: usize,
}

/// Draws x ~ CN(0, R), rescales each draw to ||x||^2 = min(Tr R, P), keeps
/// the admissible ones and returns the one with the smallest `selector`.
pub fn gaussian_randomization<F>(
    r: &CMatrix,
    scenario: &ScenarioDraw,
    cfg: &SystemConfig,
    opts: &RandomizationOptions,
    selector: F,
) -> Randomized
where
    F: Fn(&CVector) -> f64,
{
    let target = r.trace().re.max(0.0).min(cfg.p_max_mw());
    let factor = psd_factor(r);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws = (0..opts.draws).map(|_| {
        let w = CVector::from_fn(r.nrows(), |_, _| complex_gaussian(&mut rng));
        &factor * w
    });
    let fallback = scaled(&crate::metrics::principal_component(r), target);
    pick(draws, target, scenario, cfg, opts.require_ci, fallback, selector)
}

/// Randomization on a homogenized matrix Y = [[R, x], [x^H, t]]: a draw
/// xi ~ CN(0, Y) yields x = xi[..n] conj(xi[n]) / |xi[n]|, which keeps the
/// phase relation between x and the auxiliary coordinate.
pub fn homogeneous_randomization<F>(
    y: &CMatrix,
    scenario: &ScenarioDraw,
    cfg: &SystemConfig,
    opts: &RandomizationOptions,
    selector: F,
) -> Randomized
where
    F: Fn(&CVector) -> f64,
{
    let n = y.nrows() - 1;
    let r = y.view((0, 0), (n, n)).into_owned();
    let target = r.trace().re.max(0.0).min(cfg.p_max_mw());
    let factor = psd_factor(y);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws = (0..opts.draws).map(|_| {
        let w = CVector::from_fn(n + 1, |_, _| complex_gaussian(&mut rng));
        let xi = &factor * w;
        let tail = xi[n];
        let phase = if tail.norm() > 0.0 { tail.conj() / tail.norm() } else { C64::new(1.0, 0.0) };
        xi.rows(0, n).into_owned() * phase
    });
    let fallback = scaled(&y.view((0, n), (n, 1)).column(0).into_owned(), target);
    pick(draws, target, scenario, cfg, opts.require_ci, fallback, selector)
}

fn psd_factor(r: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(r);
    let mut f = vecs;
    for (j, v) in vals.iter().enumerate() {
        let s = C64::new(v.max(0.0).sqrt(), 0.0);
        for i in 0..f.nrows() {
            f[(i, j)] *= s;
        }
    }
    f
}

fn scaled(x: &CVector, power: f64) -> CVector {
    let norm = x.norm();
    if norm > 0.0 {
        x * C64::new((power / (norm * norm)).sqrt(), 0.0)
    } else {
        x.clone()
    }
}

fn pick<I, F>(
    draws: I,
    target: f64,
    scenario: &ScenarioDraw,
    cfg: &SystemConfig,
    require_ci: bool,
    fallback: CVector,
    selector: F,
) -> Randomized
where
    I: Iterator<Item = CVector>,
    F: Fn(&CVector) -> f64,
{
    let mut best: Option<(f64, CVector)> = None;
    let mut evaluated = 0;
    let mut kept = 0;
    for d in draws {
        evaluated += 1;
        let x = scaled(&d, target);
        if require_ci && !admissible(&x, scenario, cfg) {
            continue;
        }
        kept += 1;
        let score = selector(&x);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, x));
        }
    }
    match best {
        Some((score, x)) => Randomized { x, score, feasible: true, evaluated, kept },
        None => {
            let feasible = !require_ci || admissible(&fallback, scenario, cfg);
            Randomized { score: selector(&fallback), x: fallback, feasible, evaluated, kept }
        }
    }
}

pub(crate) fn admissible(x: &CVector, scenario: &ScenarioDraw, cfg: &SystemConfig) -> bool {
    ci_margin(scenario, x, cfg).iter().all(|m| m.value >= CI_MARGIN_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::matched_mse;
    use crate::model::{draw_scenario, ArrayManifold};

    fn setup() -> (SystemConfig, ScenarioDraw) {
        let cfg = SystemConfig { n_tx: 4, ..SystemConfig::default() };
        let sc = draw_scenario(&cfg, 11).unwrap();
        (cfg, sc)
    }

    #[test]
    fn rank_one_input_returns_its_direction() {
        let (cfg, sc) = setup();
        let v = CVector::from_vec(vec![C64::new(1.0, 0.5), C64::new(-0.3, 0.2), C64::new(0.0, 1.0), C64::new(2.0, 0.0)]);
        let r = &v * v.adjoint();
        let opts = RandomizationOptions { draws: 20, seed: 3, require_ci: false };
        let out = gaussian_randomization(&r, &sc, &cfg, &opts, |x| x[0].re);
        assert!(out.feasible);
        // x = e^{j phi} v, so |v^H x| = ||v||^2.
        let inner = v.dotc(&out.x).norm();
        assert!((inner - v.norm_squared()).abs() < 1e-9 * v.norm_squared());
        assert!((out.x.norm() - v.norm()).abs() < 1e-9);
    }

    #[test]
    fn zero_covariance_is_flagged() {
        let (cfg, sc) = setup();
        let r = CMatrix::zeros(4, 4);
        let opts = RandomizationOptions { draws: 10, seed: 0, require_ci: true };
        let out = gaussian_randomization(&r, &sc, &cfg, &opts, |_| 0.0);
        assert!(!out.feasible);
        assert_eq!(out.kept, 0);
        assert!(out.x.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn selected_candidate_minimizes_selector() {
        let (cfg, sc) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = CMatrix::from_fn(4, 4, |_, _| complex_gaussian(&mut rng));
        let r = &b * b.adjoint();
        let manifold = ArrayManifold::new(4, &sc.grid);
        let mse = |x: &CVector| matched_mse(&manifold.gains_of_vector(x), &sc.desired_gain).unwrap().0;
        let opts = RandomizationOptions { draws: 50, seed: 9, require_ci: false };
        let out = gaussian_randomization(&r, &sc, &cfg, &opts, mse);
        assert_eq!(out.evaluated, 50);
        // Re-generate the same candidates and compare.
        let target = r.trace().re.min(cfg.p_max_mw());
        let factor = psd_factor(&r);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let w = CVector::from_fn(4, |_, _| complex_gaussian(&mut rng));
            let x = scaled(&(&factor * w), target);
            assert!(out.score <= mse(&x) + 1e-15);
        }
    }

    #[test]
    fn homogeneous_draws_of_rank_one_recover_vector() {
        let (cfg, sc) = setup();
        let x = CVector::from_vec(vec![C64::new(0.4, 0.1), C64::new(-0.2, 0.3), C64::new(0.1, 0.0), C64::new(0.0, -0.5)]);
        let mut v = CVector::zeros(5);
        v.rows_mut(0, 4).copy_from(&x);
        v[4] = C64::new(1.0, 0.0);
        let y = &v * v.adjoint();
        let opts = RandomizationOptions { draws: 5, seed: 1, require_ci: false };
        let out = homogeneous_randomization(&y, &sc, &cfg, &opts, |_| 0.0);
        // Round-off eigenvalues contribute at the sqrt(eps) level.
        assert!((&out.x - &x).norm() < 1e-6);
    }

    #[test]
    fn factor_reproduces_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = CMatrix::from_fn(3, 3, |_, _| complex_gaussian(&mut rng));
        let r = &b * b.adjoint();
        let f = psd_factor(&r);
        assert!((&f * f.adjoint() - &r).norm() < 1e-10 * r.norm());
    }
}
