//! Solvers for linear transport in slab geometry.
//!
//! The crate provides the pieces of a multiscale treatment of the transport
//! equation `eps df/dt + mu df/dx + (sigma/eps) L f = 0` on the slab
//! `x in [-1, 1]`, `mu in [-1, 1]`:
//!
//! - [`quadrature`], [`angular`]: Gauss-Legendre rules and angular grids.
//! - [`collision`]: scattering kernels and the collision operator `L`.
//! - [`halfspace`]: boundary-layer half-space solves, end states, and the
//!   albedo boundary map.
//! - [`heat`]: the interior diffusion solver.
//! - [`kinetic`]: the finite-volume reference transport solver.
//! - [`coupled`]: the kinetic-diffusion domain-decomposition solver.
//! - [`cases`], [`metrics`], [`suite`]: benchmark problems, error norms, and
//!   experiment drivers.

// Validation guards are written `!(x > 0.0)` on purpose: the negated form
// rejects NaN along with the out-of-range values, where `x <= 0.0` lets NaN
// through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod cases;
pub mod collision;
pub mod coupled;
pub mod error;
pub mod halfspace;
pub mod heat;
pub mod kinetic;
pub mod metrics;
pub mod quadrature;
pub mod suite;

pub use angular::{build_angular_grid, AngularGrid};
pub use cases::{make_case, stability_perturbation, CaseId, CaseSigma, CaseSpec};
pub use collision::{build_collision_operator, CollisionOperator, Kernel};
pub use coupled::{
    build_coupled_state, coupled_step, run_coupled, run_stability, CoupledRun, CoupledSetup,
    CoupledState, StabilityRun,
};
pub use error::{Error, Result};
pub use halfspace::{
    build_halfspace_system, end_state_eta, AlbedoMap, HalfSpaceSolution, HalfSpaceSystem,
};
pub use heat::{heat_step, run_heat, HeatGrid, HeatState};
pub use kinetic::{
    advect_step, collide_step, run_reference, KineticGrid, KineticRun, KineticState, SigmaProfile,
};
pub use metrics::{
    convergence_slope, error_norms, interpolated_means, ErrorEntry, ErrorReport, ErrorRow,
    SlopeSet,
};
pub use quadrature::GaussRule;
pub use suite::{
    build_suite_context, coupled_case_data, coupled_error_row, parallel_map, pure_case_data,
    pure_error_row, reference_dx, run_coupled_suite, run_pure_suite, run_stability_probe,
    CoupledCaseData, CoupledCaseReport, CoupledCaseRow, ProfilePoint, PureCaseData, SuiteContext,
    SuiteParams,
};
