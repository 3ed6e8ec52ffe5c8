//! Waveform design algorithms.
//!
//! * [`solve_soop1`]: sum-rate SCA under CI constraints (utopia f1*).
//! * [`solve_soop2`]: beampattern-matching QSDP with rank-one extraction
//!   (utopia f2*).
//! * [`solve_moop`]: augmented Tchebycheff SCA between the two.
//! * [`pareto_sweep`]: the weight sweep and dominance filtering.
//! * [`weighted_sum_baseline`] and [`soo_baselines`]: comparison schemes.
//!
//! All optimization runs in power-normalized units; designs and metrics
//! are reported in physical units (mW, bit/s).

mod baselines;
mod context;
mod design;
mod moop;
mod pareto;
mod randomization;
mod scalarization;
mod soop1;
mod soop2;
mod trajectory;

pub use baselines::{soo_baselines, weighted_sum_baseline, SooMode};
pub use design::{Extraction, WaveformDesign};
pub use moop::{solve_moop, ParetoPoint};
pub use pareto::{dominance_filter, pareto_sweep, pareto_sweep_with, utopia, ParetoFront, SweepFailure};
pub use randomization::{
    gaussian_randomization, homogeneous_randomization, Randomized, RandomizationOptions, CI_MARGIN_FLOOR,
};
pub use scalarization::{
    fairness_gap, scalarize_tchebycheff, scalarize_tchebycheff_with, weighted_sum_value, Normalization,
    ScalarizationWeights, Scalarized, Utopia,
};
pub use soop1::{solve_soop1, Soop1Result};
pub use soop2::{solve_soop2, Soop2Result, RANK_ONE_TOL};
pub use trajectory::{write_jsonl, TrajectoryRecord};
