//! Age-structured simulation of a burrowing-nematode infestation in a
//! banana-plantain stand.
//!
//! Two plant compartments structured by age, healthy density `S(a,t)` and
//! infested density `I(a,t)`, are coupled to two nematode pools: free-living
//! soil nematodes `N_F(t)` and root-dwelling nematodes `N_I(t)`. Plants age
//! with unit speed, are recruited at age zero at a constant rate, die at an
//! age-dependent rate that diverges at the maximum age, become infested in
//! proportion to the free-nematode pressure per unit of standing biomass, and
//! lose root mass to saturating (Holling type II) consumption by the
//! root-dwelling pool.
//!
//! The crate provides:
//!
//! * the closed-form age-dependent rates and survival function ([`rates`]),
//! * the semi-implicit Euler scheme on a shared age/time grid with impulsive
//!   nematicide control, positive by construction ([`solver`]),
//! * the pest-free steady state, the basic reproduction number `N`, the
//!   dominant characteristic root, and global-stability thresholds
//!   ([`thresholds`]),
//! * cumulative/daily harvest series and scenario loss reports
//!   ([`production`]),
//! * a verification harness: a method-of-characteristics oracle for frozen
//!   (decoupled) regimes, convergence-order measurement, invariant audits,
//!   and extinction/persistence experiments ([`verify`]).
//!
//! The crate is `no_std` (with `alloc`); all numerics are `f64`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > y)` guards are deliberate throughout: unlike `x <= y`, they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod math;
pub mod params;
pub mod production;
pub mod rates;
pub mod solver;
pub mod state;
pub mod thresholds;
pub mod verify;

pub use error::CoreError;
pub use params::ModelParameters;
pub use rates::{MortalityModel, RateTable};
pub use solver::{simulate, step, SolverConfig};
pub use state::{ControlSchedule, DiscreteState, StepAggregates, Trajectory};
