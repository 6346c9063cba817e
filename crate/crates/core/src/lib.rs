//! Homoclinic orbits of `q̈ + V_q(t, q) = 0` for the subquadratic potential
//! `V(t, q) = -½|q|² + a(t)|q|^α`, `1 < α < 2`.
//!
//! The orbit is computed as a minimizer of the action
//! `I(q) = ½∫(|q|² + |q̇|²) - ∫ a(t)|q|^α` over a truncated uniform grid,
//! seeded from a negative-action scaling of a bump, and then checked against
//! the equation and the decay inequalities it must satisfy.
//!
//! ```
//! use homoclinic::{minimize, GridSpec, ProblemSpec, SolverConfig, WeightProfile};
//!
//! let spec = ProblemSpec::new(1.5, 1, WeightProfile::gaussian(1.0, 1.0)?)?;
//! let grid = GridSpec::new(10.0, 501, 1)?;
//! let report = minimize(&spec, &grid, &SolverConfig::default())?;
//! assert!(report.converged && report.action.total < 0.0);
//! # Ok::<(), homoclinic::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod function_space;
pub mod functional;
pub mod minimizer;
pub mod potential;
pub mod sampling;
pub mod verifier;

pub use error::{Error, Result};
pub use function_space::{
    central_velocity, check_embedding, h1_norm_sq, plancherel_check, second_difference, sup_norm,
    EmbeddingCheck, GridSpec, Path, PlancherelCheck, SHARP_EMBEDDING_CONSTANT,
    SQRT_PI_EMBEDDING_CONSTANT,
};
pub use functional::{
    action, action_gradient, coercivity_bound, optimal_scaling, sharp_coercivity_bound,
    ActionBreakdown, CoercivityBound, ScalingWitness,
};
pub use minimizer::{
    initial_guess, minimize, minimize_from, normalize_orientation, refine_domain, DescentMetric,
    InitStrategy, SolveReport, SolverConfig, StopReason,
};
pub use potential::{ProblemSpec, WeightFamily, WeightProfile};
pub use verifier::{
    decay_stats, el_residual, gradient_fd_check, qdot_residual_bound_check, tail_rate, verify,
    window_decay_check, DecayStats, ResidualStats, TailFit, Verdict,
};
