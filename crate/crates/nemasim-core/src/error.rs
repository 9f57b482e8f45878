//! Error type shared across the crate.

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

/// Failures raised by parameter validation, grid construction, the solver,
/// threshold analysis, or the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// One or more model parameters violate their admissibility conditions.
    /// Each entry names the parameter and the condition it failed.
    #[error("invalid parameters: {}", join_violations(.0))]
    Parameters(Vec<String>),

    /// A function of age was evaluated outside `[0, a_max]` where it has no
    /// meaning (negative age, or a survival query past the terminal age).
    #[error("age {age} outside domain [0, {a_max}]")]
    Domain { age: f64, a_max: f64 },

    /// The requested discretisation is inconsistent: the step does not tile
    /// the age span or the horizon, or a required age does not sit on a node.
    #[error("grid error: {0}")]
    Grid(String),

    /// Standing biomass fell to (or below) the floor used to guard the
    /// per-biomass infestation pressure, so the step is undefined.
    #[error("standing biomass {biomass} at or below floor at step {step}")]
    PopulationFloor { step: usize, biomass: f64 },

    /// An analysis needs a nontrivial pest-free equilibrium but recruitment
    /// is zero, so the equilibrium is identically zero.
    #[error("pest-free equilibrium is degenerate (zero recruitment)")]
    DegenerateEquilibrium,

    /// An iteration failed to converge or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The request is structurally unanswerable (for example comparing
    /// trajectories recorded on incompatible grids).
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    /// Harvest accounting was asked for a day outside the simulated span.
    #[error("production query outside simulated span: {0}")]
    Production(String),
}

fn join_violations(items: &[String]) -> String {
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(item);
    }
    out
}
