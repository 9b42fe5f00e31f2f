//! Simulated annealing on finite state spaces, in two flavours.
//!
//! The classical chain `M1` accepts an uphill proposal `x -> y` at rate
//! `Q(x,y) exp(-(U(y) - U(x))_+ / T)`. The boosted chain `M2` instead speeds
//! up downhill proposals, `Q(x,y) exp((U(x) - U(y))_+ / T)`. Both leave the
//! Gibbs law `pi_T ∝ exp(-U/T) pi` invariant, but `M2` mixes faster and
//! tolerates faster cooling.
//!
//! The crate computes the quantities governing convergence (hill-climbing
//! constants, spectral gaps, an explicit gap lower bound), checks cooling
//! schedules against the admissibility conditions, and simulates both chains
//! exactly with two independent engines.
//!
//! ```
//! use anneal::{hill_constants, Landscape};
//!
//! let l3 = Landscape::line(&[0.0, 2.0, 1.0])?;
//! let c = hill_constants(&l3);
//! assert_eq!((c.c_m1, c.c_m2), (1.0, 0.0));
//! # Ok::<(), anneal::Error>(())
//! ```

pub mod analysis;
pub mod elevation;
pub mod error;
pub mod generator;
pub mod landscape;
pub mod schedule;
pub mod simulate;
pub mod spectral;

pub use analysis::{
    conditional_reach, escape_bounds, finite_time_bound, miss_probability, relative_entropy, tv_distance,
    wilson_interval, BoundEvaluation, ConditionalReach, EscapeBounds, FiniteTimeBound, MissEstimate,
};
pub use elevation::{h1, h2, hill_constants, local_min_classes, second_peak, ElevationResult, HillConstants};
pub use error::{Error, Result};
pub use generator::{dirichlet_form, m_at, peskun_dominates, GeneratorSnapshot, Variant};
pub use landscape::{
    gibbs, load_landscape, summary_constants, validate, Distribution, Landscape, LandscapeConstants,
    ValidationReport,
};
pub use schedule::{
    check_entropy_conditions, check_fastcool, ergodicity_audit, ConditionReport, Schedule, Verdict,
};
pub use simulate::{
    run_ensemble, run_replicas, simulate_direct, simulate_uniformized, Engine, EnsembleSummary, Trajectory,
};
pub use spectral::{eigenvalues, gap_bound_constant, spectral_gap, verify_gap_bound, GapBoundCertificate};
