//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line each and exits non-zero if any fails.

#[path = "support/oracle.rs"]
mod oracle;

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use isac_core::convex::{
    psd_project, psd_trace_project, solve, ConstraintAtom, ConvexProblem, HermitianLayout, SolveStatus,
    SolverConfig,
};
use isac_core::algorithms::{dominance_filter, solve_moop, solve_soop1, solve_soop2, Extraction, ScalarizationWeights, Utopia};
use isac_core::harness::{mix, validate_suite};
use isac_core::model::{build_grid, draw_scenario, SnrThresholds, SystemConfig};
use isac_core::par::map_indexed;
use isac_core::{CMatrix, CVector, C64};

const TRIALS: usize = 50;
/// Step of the weight sweep.
const SWEEP_STEP: f64 = 0.05;
/// Corner weights.
const CORNERS: [f64; 2] = [0.01, 0.99];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn gauss(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let v = DMatrix::from_vec(rank, n, gauss(rng, rank * n));
    v.transpose() * v / n as f64
}

fn random_hermitian(rng: &mut ChaCha8Rng, m: usize) -> CMatrix {
    let a = CMatrix::from_fn(m, m, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

// ---- criterion 1: convex engine against an independent first-order solver

/// Power minimization under affine rows (vector block only).
fn power_instance(rng: &mut ChaCha8Rng) -> ConvexProblem {
    let n = 2 * rng.random_range(1..=3);
    let mut p = ConvexProblem::new(n, 0);
    p.set_quadratic(DMatrix::identity(n, n) * 2.0);
    let u0: Vec<f64> = gauss(rng, n);
    let norm = dot(&u0, &u0).sqrt();
    let u0: Vec<f64> = u0.iter().map(|v| v / norm).collect();
    for i in 0..rng.random_range(2..=6) {
        let noise = gauss(rng, n);
        let a: Vec<f64> =
            if i == 0 { u0.iter().zip(&noise).map(|(u, e)| -u + 0.3 * e).collect() } else { noise };
        let b = dot(&a, &u0) + rng.random_range(0.05..0.3);
        p.add(ConstraintAtom::AffineIneq { a, b });
    }
    p
}

/// Linear objective over a ball with affine rows and log-affine rate rows.
fn rate_instance(rng: &mut ChaCha8Rng) -> ConvexProblem {
    let (nx, k) = (4, 2);
    let mut p = ConvexProblem::new(nx + k, 0);
    p.set_linear([vec![0.0; nx], vec![-1.0; k]].concat());
    p.add(ConstraintAtom::Ball { indices: (0..nx).collect(), radius_sq: 1.0 });
    let x0: Vec<f64> = gauss(rng, nx);
    let s = 0.5 / dot(&x0, &x0).sqrt();
    let x0: Vec<f64> = x0.iter().map(|v| v * s).collect();
    for _ in 0..2 * k {
        let a = gauss(rng, nx);
        let b = dot(&a, &x0) + rng.random_range(0.05..0.3);
        p.add(ConstraintAtom::AffineIneq { a: [a, vec![0.0; k]].concat(), b });
    }
    for j in 0..k {
        let a = gauss(rng, nx);
        let b = dot(&a, &a).sqrt() + 0.1;
        let mut lhs = vec![0.0; nx + k];
        lhs[nx + j] = 1.0;
        p.add(ConstraintAtom::LogAffine { lhs, lhs_const: rng.random_range(-1.0..1.0), a: [a, vec![0.0; k]].concat(), b });
    }
    p
}

/// Quadratic objective over the PSD matrices of unit trace.
fn beampattern_instance(rng: &mut ChaCha8Rng) -> ConvexProblem {
    let m = rng.random_range(2..=4);
    let d = m * m;
    let mut p = ConvexProblem::new(0, m);
    p.set_quadratic(random_psd(rng, d, d - 1));
    p.add(ConstraintAtom::PsdCone).add(ConstraintAtom::TraceEq { value: 1.0 });
    p
}

/// Shared part of the homogenized instances: Y = [[R, x], [x^H, 1]] with
/// Tr R = 1, affine rows on Y and log-affine rows tying mu_k to Y. Returns
/// the problem and the mu lower bound used.
fn homogenized(rng: &mut ChaCha8Rng, n: usize, k: usize, extra: usize) -> ConvexProblem {
    let m = n + 1;
    let vdim = k + extra;
    let mut p = ConvexProblem::new(vdim, m);
    let layout = HermitianLayout::new(m);
    let x0 = CVector::from_vec(gauss(rng, 2 * n).chunks(2).map(|c| C64::new(c[0], c[1])).collect());
    let x0 = &x0 * C64::new((0.5f64).sqrt() / x0.norm(), 0.0);
    let r0 = &x0 * x0.adjoint() + CMatrix::identity(n, n) * C64::new(0.5 / n as f64, 0.0);
    let mut y0 = CMatrix::zeros(m, m);
    y0.view_mut((0, 0), (n, n)).copy_from(&r0);
    y0.view_mut((0, n), (n, 1)).copy_from(&x0);
    y0.view_mut((n, 0), (1, n)).copy_from(&x0.adjoint());
    y0[(n, n)] = C64::new(1.0, 0.0);
    let theta0 = layout.to_params(&y0);
    let mut corner = CMatrix::zeros(m, m);
    corner[(n, n)] = C64::new(1.0, 0.0);
    let mut lead = CMatrix::identity(m, m);
    lead[(n, n)] = C64::new(0.0, 0.0);
    p.add(ConstraintAtom::PsdCone);
    p.add(ConstraintAtom::AffineEq { a: p.matrix_functional(&corner), b: 1.0 });
    p.add(ConstraintAtom::AffineEq { a: p.matrix_functional(&lead), b: 1.0 });
    for _ in 0..2 * k {
        let a = gauss(rng, m * m);
        let b = dot(&a, &theta0) + rng.random_range(0.05..0.3);
        p.add(ConstraintAtom::AffineIneq { a: p.lift_matrix_coeffs(&a), b });
    }
    for j in 0..k {
        let a = gauss(rng, m * m);
        // Every parameter of a feasible Y lies in [-1, 1].
        let b = a.iter().map(|v| v.abs()).sum::<f64>() + 0.1;
        let c = rng.random_range(-1.0..1.0);
        let mu0 = (dot(&a, &theta0) + b).ln() - c;
        let mut lhs = p.zeros();
        lhs[j] = 1.0;
        p.add(ConstraintAtom::LogAffine { lhs: lhs.clone(), lhs_const: c, a: p.lift_matrix_coeffs(&a), b });
        let floor: Vec<f64> = lhs.iter().map(|v| -v).collect();
        p.add(ConstraintAtom::AffineIneq { a: floor, b: -(mu0 - 1.0) });
    }
    p
}

/// Min-max of two degradations (epigraph variable alpha).
fn tchebycheff_instance(rng: &mut ChaCha8Rng) -> ConvexProblem {
    let (n, k) = (rng.random_range(1..=3), rng.random_range(1..=2));
    let mut p = homogenized(rng, n, k, 1);
    let d = p.dim();
    let mut c = p.zeros();
    c[k] = 1.0;
    p.set_linear(c);
    let mut a1 = p.zeros();
    (0..k).for_each(|j| a1[j] = -rng.random_range(0.2..1.0));
    a1[k] = -1.0;
    p.add(ConstraintAtom::ConvexQuadIneq { q: DMatrix::zeros(d, d), a: a1, b: rng.random_range(-1.0..1.0) });
    let mm = (n + 1) * (n + 1);
    let mut q = DMatrix::zeros(d, d);
    q.view_mut((k + 1, k + 1), (mm, mm)).copy_from(&random_psd(rng, mm, mm / 2 + 1));
    let mut a2 = p.zeros();
    a2[k] = -1.0;
    p.add(ConstraintAtom::ConvexQuadIneq { q, a: a2, b: rng.random_range(-1.0..1.0) });
    p
}

/// Weighted sum of a linear rate term and a quadratic matrix term.
fn weighted_instance(rng: &mut ChaCha8Rng) -> ConvexProblem {
    let (n, k) = (rng.random_range(1..=3), 2);
    let mut p = homogenized(rng, n, k, 0);
    let d = p.dim();
    let w = rng.random_range(0.1..0.9);
    let mut c = p.zeros();
    (0..k).for_each(|j| c[j] = -w);
    p.set_linear(c);
    let mm = (n + 1) * (n + 1);
    let mut q = DMatrix::zeros(d, d);
    q.view_mut((k, k), (mm, mm)).copy_from(&(random_psd(rng, mm, mm - 1) * (1.0 - w)));
    p.set_quadratic(q);
    p
}

fn criterion_1() -> Outcome {
    type Builder = fn(&mut ChaCha8Rng) -> ConvexProblem;
    let families: [(&str, Builder); 5] = [
        ("power", power_instance),
        ("rate", rate_instance),
        ("beampattern", beampattern_instance),
        ("tchebycheff", tchebycheff_instance),
        ("weighted", weighted_instance),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0_1);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut count = 0;
    for (name, build) in families {
        for i in 0..20 {
            let p = build(&mut rng);
            count += 1;
            let ipm = match solve(&p, &SolverConfig::default()) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("{name}#{i}: {e}"));
                    continue;
                }
            };
            if ipm.status != SolveStatus::Optimal {
                failures.push(format!("{name}#{i}: engine status {:?}", ipm.status));
                continue;
            }
            let reference = oracle::first_order(&p, &p.zeros());
            let rel = (ipm.objective - reference.objective).abs() / reference.objective.abs().max(1e-3);
            worst = worst.max(rel);
            if rel > 1e-4 || reference.violation > 1e-7 {
                failures.push(format!(
                    "{name}#{i}: engine {:.9} oracle {:.9} (violation {:.1e})",
                    ipm.objective, reference.objective, reference.violation
                ));
            }
        }
    }
    let mut detail = format!("{count} instances, worst relative objective gap {worst:.2e}");
    if !failures.is_empty() {
        detail += &format!("; {}", failures.join("; "));
    }
    outcome(failures.is_empty(), detail)
}

// ---- criterion 2: projections against closed-form references

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0_2);
    let (mut worst_psd, mut worst_cap) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let h = random_hermitian(&mut rng, 3);
        let cap = rng.random_range(0.1..3.0);
        let got = psd_project(&h).expect("psd projection");
        worst_psd = worst_psd.max((&got - oracle::psd_part(&h)).norm());
        let got = psd_trace_project(&h, cap).expect("capped projection");
        worst_cap = worst_cap.max((&got - oracle::psd_part_capped(&h, cap)).norm());
    }
    outcome(
        worst_psd <= 1e-8 && worst_cap <= 1e-8,
        format!("100 inputs, max Frobenius error {worst_psd:.1e} (PSD), {worst_cap:.1e} (PSD with trace cap)"),
    )
}

// ---- shared default-parameter batch (criteria 3, 4, 5 and 9)

struct Point {
    omega1: f64,
    iterations: usize,
    converged: bool,
    objectives: Vec<f64>,
    rate: f64,
    mse: f64,
    relaxed_rate: f64,
    relaxed_mse: f64,
}

struct SeedRun {
    f1_star: f64,
    f2_star: f64,
    soop2_rank_ratio: f64,
    soop2_mse: f64,
    soop2_extraction: Extraction,
    points: Vec<Option<Point>>,
}

fn sweep_weights() -> Vec<f64> {
    let steps = (1.0 / SWEEP_STEP).round() as usize;
    (1..steps).map(|i| (i as f64 * SWEEP_STEP * 1e12).round() / 1e12).collect()
}

fn all_weights() -> Vec<f64> {
    let mut w = sweep_weights();
    w.extend(CORNERS);
    w
}

fn seed_system(base: &SystemConfig, t: usize) -> (SystemConfig, u64) {
    let seed = mix(base.rng_seed, t as u64);
    (SystemConfig { rng_seed: seed, ..base.clone() }, seed)
}

fn table_one_batch() -> Vec<Option<SeedRun>> {
    let base = SystemConfig::default();
    map_indexed(TRIALS, 0, |t| {
        let (sys, seed) = seed_system(&base, t);
        let sc = draw_scenario(&sys, seed).ok()?;
        let s1 = solve_soop1(&sc, &sys).ok()?;
        let s2 = solve_soop2(&sc, &sys).ok()?;
        let u = Utopia::new(s1.f1_star, s2.f2_star).ok()?;
        let points = all_weights()
            .into_iter()
            .map(|w| {
                let weights = ScalarizationWeights::new(w, sys.xi).ok()?;
                let p = solve_moop(&sc, &u, &weights, &sys).ok()?;
                Some(Point {
                    omega1: w,
                    iterations: p.iterations,
                    converged: p.converged,
                    objectives: p.trajectory.iter().map(|r| r.objective).collect(),
                    rate: -p.f1,
                    mse: p.f2,
                    relaxed_rate: -p.relaxed_f1,
                    relaxed_mse: p.relaxed_f2,
                })
            })
            .collect();
        Some(SeedRun {
            f1_star: s1.f1_star,
            f2_star: s2.f2_star,
            soop2_rank_ratio: s2.design.relaxed_rank_ratio,
            soop2_mse: s2.design.mse(),
            soop2_extraction: s2.design.extraction,
            points,
        })
    })
}

fn point(run: &SeedRun, omega1: f64) -> Option<&Point> {
    run.points.iter().flatten().find(|p| (p.omega1 - omega1).abs() < 1e-9)
}

fn solved(batch: &[Option<SeedRun>]) -> Vec<&SeedRun> {
    batch.iter().flatten().collect()
}

/// Slack allowed on a monotone sequence of subproblem optima, matching the
/// interior-point stopping tolerance.
const MONOTONE_SLACK: f64 = 1e-6;

fn criterion_3(batch: &[Option<SeedRun>]) -> Outcome {
    let runs = solved(batch);
    let mut within = 0;
    let mut worst_rise = 0.0f64;
    let mut non_monotone = 0;
    let mut iters = Vec::new();
    for run in &runs {
        for p in run.points.iter().flatten() {
            let rise = p.objectives.windows(2).map(|w| (w[1] - w[0]) / w[0].abs().max(1.0)).fold(0.0f64, f64::max);
            worst_rise = worst_rise.max(rise);
            non_monotone += usize::from(rise > MONOTONE_SLACK);
        }
        if let Some(p) = point(run, 0.5) {
            iters.push(p.iterations);
            within += usize::from(p.converged && p.iterations <= 30);
        }
    }
    let mean_iters = iters.iter().sum::<usize>() as f64 / iters.len().max(1) as f64;
    let frac = within as f64 / TRIALS as f64;
    outcome(
        frac >= 0.95 && non_monotone == 0,
        format!(
            "{within}/{TRIALS} converged within 30 iterations (mean {mean_iters:.1}, max {}); \
             {non_monotone} non-monotone trajectories, largest relative rise {worst_rise:.1e}",
            iters.iter().max().copied().unwrap_or(0)
        ),
    )
}

fn criterion_4(batch: &[Option<SeedRun>]) -> Outcome {
    let runs = solved(batch);
    let (mut rate_ok, mut mse_ok) = (0, 0);
    let (mut worst_rate, mut worst_mse) = (0.0f64, 0.0f64);
    for run in &runs {
        if let Some(p) = point(run, 0.99) {
            let gap = (p.rate + run.f1_star).abs() / run.f1_star.abs();
            worst_rate = worst_rate.max(gap);
            rate_ok += usize::from(gap <= 0.1);
        }
        if let Some(p) = point(run, 0.01) {
            let gap = (p.relaxed_mse - run.f2_star).abs() / run.f2_star;
            worst_mse = worst_mse.max(gap);
            mse_ok += usize::from(gap <= 0.1);
        }
    }
    let need = (0.9 * TRIALS as f64).ceil() as usize;
    outcome(
        rate_ok >= need && mse_ok >= need,
        format!(
            "rate corner {rate_ok}/{TRIALS} (worst gap {:.1}%), MSE corner {mse_ok}/{TRIALS} (worst gap {:.1}%)",
            100.0 * worst_rate,
            100.0 * worst_mse
        ),
    )
}

struct SweepShape {
    rate: Vec<f64>,
    mse: Vec<f64>,
    rate_drops: usize,
    mse_drops: usize,
    removed: usize,
}

fn sweep_shape(runs: &[&SeedRun], weights: &[f64], rate: fn(&Point) -> f64, mse: fn(&Point) -> f64) -> SweepShape {
    let mean = |w: f64, f: fn(&Point) -> f64| runs.iter().map(|r| f(point(r, w).unwrap())).sum::<f64>() / runs.len() as f64;
    let rate: Vec<f64> = weights.iter().map(|&w| mean(w, rate)).collect();
    let mse: Vec<f64> = weights.iter().map(|&w| mean(w, mse)).collect();
    let drops = |v: &[f64]| v.windows(2).filter(|w| w[1] < w[0]).count();
    let points: Vec<[f64; 2]> = rate.iter().zip(&mse).map(|(r, m)| [-r, *m]).collect();
    let removed = points.len() - dominance_filter(&points).len();
    SweepShape { rate_drops: drops(&rate), mse_drops: drops(&mse), rate, mse, removed }
}

/// Judged on the optimized (relaxed) trade-off; the extracted rank-one
/// designs are reported alongside.
fn criterion_5(batch: &[Option<SeedRun>]) -> Outcome {
    let weights = sweep_weights();
    // Seeds where every sweep weight solved, so each mean uses the same draws.
    let runs: Vec<&SeedRun> =
        solved(batch).into_iter().filter(|r| weights.iter().all(|&w| point(r, w).is_some())).collect();
    if runs.is_empty() {
        return outcome(false, "no seed solved the whole sweep".into());
    }
    let relaxed = sweep_shape(&runs, &weights, |p| p.relaxed_rate, |p| p.relaxed_mse);
    let extracted = sweep_shape(&runs, &weights, |p| p.rate, |p| p.mse);
    let last = weights.len() - 1;
    let describe = |s: &SweepShape| {
        format!(
            "rate {:.3} -> {:.3} bit/s ({} decreases), MSE {:.4e} -> {:.4e} ({} decreases), {} of {} dominated",
            s.rate[0], s.rate[last], s.rate_drops, s.mse[0], s.mse[last], s.mse_drops, s.removed, weights.len()
        )
    };
    outcome(
        relaxed.rate_drops == 0 && relaxed.mse_drops == 0 && relaxed.removed as f64 <= 0.1 * weights.len() as f64,
        format!("{} seeds; relaxed: {}; extracted: {}", runs.len(), describe(&relaxed), describe(&extracted)),
    )
}

/// Mean rate and MSE at (power, omega1) over the trials, per seed.
fn power_batch(base: &SystemConfig, trials: usize) -> Vec<Option<[[(f64, f64); 2]; 2]>> {
    const POWERS: [f64; 2] = [20.0, 30.0];
    const OMEGAS: [f64; 2] = [0.2, 0.8];
    map_indexed(trials, 0, |t| {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for (i, &p_dbm) in POWERS.iter().enumerate() {
            let (sys, seed) = seed_system(&SystemConfig { p_max_dbm: p_dbm, ..base.clone() }, t);
            let sc = draw_scenario(&sys, seed).ok()?;
            let u = Utopia::new(solve_soop1(&sc, &sys).ok()?.f1_star, solve_soop2(&sc, &sys).ok()?.f2_star).ok()?;
            for (j, &w) in OMEGAS.iter().enumerate() {
                let weights = ScalarizationWeights::new(w, sys.xi).ok()?;
                let p = solve_moop(&sc, &u, &weights, &sys).ok()?;
                out[i][j] = (-p.f1, p.f2);
            }
        }
        Some(out)
    })
}

/// Low-SNR regime where the sum rate still responds to the power budget.
fn power_regime() -> SystemConfig {
    SystemConfig { path_loss_db: 90.0, gamma_db: SnrThresholds::Shared(-20.0), ..SystemConfig::default() }
}

struct PowerSummary {
    seeds: usize,
    steeper: usize,
    gain: [f64; 2],
    mse: [f64; 2],
}

fn summarize_power(batch: &[Option<[[(f64, f64); 2]; 2]>]) -> PowerSummary {
    let runs: Vec<_> = batch.iter().flatten().collect();
    let n = runs.len().max(1) as f64;
    let steeper =
        runs.iter().filter(|r| r[1][1].0 - r[0][1].0 > r[1][0].0 - r[0][0].0).count();
    let gain = [0, 1].map(|j| runs.iter().map(|r| r[1][j].0 - r[0][j].0).sum::<f64>() / n);
    let mse = [0, 1].map(|i| runs.iter().map(|r| r[i][1].1).sum::<f64>() / n);
    PowerSummary { seeds: runs.len(), steeper, gain, mse }
}

fn criterion_6(s: &PowerSummary) -> Outcome {
    outcome(
        s.steeper as f64 >= 0.8 * TRIALS as f64,
        format!(
            "steeper at omega1 = 0.8 in {}/{TRIALS} seeds ({} solved); mean gain 20 -> 30 dBm: {:.3} bit/s at 0.8, {:.3} at 0.2",
            s.steeper, s.seeds, s.gain[1], s.gain[0]
        ),
    )
}

fn criterion_7(s: &PowerSummary) -> Outcome {
    outcome(
        s.seeds > 0 && s.mse[1] >= s.mse[0],
        format!("mean MSE at omega2 = 0.2: {:.4e} (20 dBm), {:.4e} (30 dBm)", s.mse[0], s.mse[1]),
    )
}

/// Gain N_t a^H R a on a 0.05 degree grid: peak next to each target and the
/// width of the main lobe above half that peak.
fn main_lobes(n_tx: usize) -> Option<Vec<(f64, f64)>> {
    let base = SystemConfig::default();
    let (sys, seed) = seed_system(&SystemConfig { n_tx, ..base }, 0);
    let sc = draw_scenario(&sys, seed).ok()?;
    let r = solve_soop2(&sc, &sys).ok()?.design.covariance?;
    let fine = build_grid(3601).ok()?;
    let deg = fine.degrees();
    let gains: Vec<f64> =
        isac_core::metrics::beampattern_gain(&r, &fine).ok()?.iter().map(|g| g * n_tx as f64).collect();
    let mut out = Vec::new();
    for &target in &sys.target_angles_deg {
        let near: Vec<usize> = (0..deg.len()).filter(|&i| (deg[i] - target).abs() <= 5.0).collect();
        let peak_i = *near.iter().max_by(|&&a, &&b| gains[a].total_cmp(&gains[b]))?;
        let half = gains[peak_i] / 2.0;
        // The lobe also ends where the pattern stops falling.
        let mut lo = peak_i;
        while lo > 0 && gains[lo - 1] >= half && gains[lo - 1] <= gains[lo] {
            lo -= 1;
        }
        let mut hi = peak_i;
        while hi + 1 < gains.len() && gains[hi + 1] >= half && gains[hi + 1] <= gains[hi] {
            hi += 1;
        }
        out.push((gains[peak_i], deg[hi] - deg[lo]));
    }
    Some(out)
}

fn criterion_8() -> Outcome {
    let counts = [4, 8, 16];
    let lobes: Vec<Option<Vec<(f64, f64)>>> = counts.iter().map(|&n| main_lobes(n)).collect();
    let Some(lobes) = lobes.into_iter().collect::<Option<Vec<_>>>() else {
        return outcome(false, "beampattern design failed".into());
    };
    let targets = lobes[0].len();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 0..targets {
        let peaks: Vec<f64> = lobes.iter().map(|l| l[k].0).collect();
        let widths: Vec<f64> = lobes.iter().map(|l| l[k].1).collect();
        ok &= peaks.windows(2).all(|w| w[1] > w[0]) && widths.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!(
            "target {k}: peak {} width {} deg",
            peaks.iter().map(|p| format!("{p:.1}")).collect::<Vec<_>>().join("/"),
            widths.iter().map(|w| format!("{w:.2}")).collect::<Vec<_>>().join("/")
        ));
    }
    outcome(ok, format!("N_t = 4/8/16; {}", parts.join("; ")))
}

fn criterion_9(batch: &[Option<SeedRun>]) -> Outcome {
    let runs = solved(batch);
    let rank_one = runs.iter().filter(|r| r.soop2_rank_ratio <= 1e-3).count();
    let within = runs.iter().filter(|r| r.soop2_mse <= 2.0 * r.f2_star).count();
    let randomized = runs.iter().filter(|r| r.soop2_extraction == Extraction::Randomized).count();
    let worst = runs.iter().map(|r| r.soop2_mse / r.f2_star).fold(0.0f64, f64::max);
    outcome(
        within as f64 >= 0.9 * TRIALS as f64,
        format!(
            "rank ratio <= 1e-3 in {rank_one}/{TRIALS} ({:.0}%); extracted MSE <= 2x relaxed in {within}/{TRIALS} \
             (worst ratio {worst:.3}, {randomized} by randomization)",
            100.0 * rank_one as f64 / TRIALS as f64
        ),
    )
}

fn report(name: &str, o: &Outcome, elapsed: f64) -> bool {
    println!("{} criterion {name}: {} [{elapsed:.1} s]", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    o.passed
}

fn main() {
    let start = Instant::now();
    let mut all = true;
    let mut timed = |name: &str, run: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = run();
        all &= report(name, &o, t.elapsed().as_secs_f64());
    };
    timed("1 convex engine matches an independent solver", &mut criterion_1);
    timed("2 projections match closed-form references", &mut criterion_2);

    let t = Instant::now();
    let batch = table_one_batch();
    let batch_secs = t.elapsed().as_secs_f64();
    println!("info: default batch, {TRIALS} seeds x {} weights, {batch_secs:.1} s", all_weights().len());
    timed("3 convergence within 30 iterations, monotone objective", &mut || criterion_3(&batch));
    timed("4 corner consistency", &mut || criterion_4(&batch));
    timed("5 trade-off shape of the averaged sweep", &mut || criterion_5(&batch));

    let t = Instant::now();
    let power = summarize_power(&power_batch(&power_regime(), TRIALS));
    let secs = t.elapsed().as_secs_f64();
    timed("6 rate gain with power grows with omega1", &mut || criterion_6(&power));
    timed("7 MSE at omega2 = 0.2 does not improve with power", &mut || criterion_7(&power));
    println!("info: power batch (path loss 90 dB, SNR threshold -20 dB) {secs:.1} s");
    let info = summarize_power(&power_batch(&SystemConfig::default(), 10));
    println!(
        "info: default regime, 10 seeds: gain 20 -> 30 dBm {:.3} (0.8) vs {:.3} (0.2) bit/s, steeper in {}/{}; \
         MSE at omega2 = 0.2 {:.4e} -> {:.4e}",
        info.gain[1], info.gain[0], info.steeper, info.seeds, info.mse[0], info.mse[1]
    );

    timed("8 main lobe narrows and grows with N_t", &mut criterion_8);
    timed("9 relaxation tightness and randomized extraction", &mut || criterion_9(&batch));
    timed("10 suite within 30 minutes and validate passes", &mut || {
        let report = validate_suite();
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let total = start.elapsed().as_secs_f64();
        outcome(
            report.passed() && total <= 1800.0,
            format!("{} checks, failed {:?}; suite time {total:.0} s", report.checks.len(), failed),
        )
    });
    println!("total {:.1} s", start.elapsed().as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}
