//! Kuramoto oscillators on signed networks and the adaptive phase-lag model.
//!
//! [`model`] holds the shared types and network generators, [`dynamics`]
//! integrates the equations, [`spectral`] gives closed-form and numeric
//! stability spectra, [`basins`] covers invariant sets and the critical
//! diameter, and [`verify`] runs the self-check suites.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basins;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod spectral;
pub mod verify;

pub use basins::{
    check_invariance, check_thm1_conditions, critical_diameter, delta_star, diameter_bound,
    f_gauge, kappa_envelope, kappa_nonneg_time, membership, sweep_critical_diameter,
    verify_theorem2, CriticalDiameterResult, InvariantSetSpec, KappaEnvelope, Partition,
    SweepTable,
};
pub use dynamics::{
    detect_sync, integrate, integrate_observed, rhs_adaptive, rhs_static, Diagnostics,
    IntegratorConfig, SyncKind, SyncVerdict, SystemState, Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{multiset_distance, symmetric_eigenvalues, SquareMatrix};
pub use model::*;
pub use spectral::{
    admissible_p, antipodal_matrix_a, antipodal_spectrum, complete_sync_spectrum, numeric_jacobian,
    numeric_spectrum, rotating_wave_eigenvalues, s_sum, stability_verdict, sync_stability_region,
    AdmissiblePRange, Spectrum, StabilityVerdict,
};
