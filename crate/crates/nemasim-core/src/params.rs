//! Model parameters and their admissibility conditions.
//!
//! All quantities are per-day rates, days, plant-units, or counts; the
//! simulation never mixes unit systems. `validate` collects every violated
//! condition instead of stopping at the first, so a configuration file with
//! several mistakes is reported in one pass.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;

/// Full parameter set of the infestation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    /// Boundary inflow of healthy plants at age zero (density per day).
    pub recruitment_m: f64,
    /// Peak of the Gaussian infection-susceptibility profile (per nematode
    /// per day).
    pub beta_max: f64,
    /// Age of peak infection susceptibility (days).
    pub a_opt: f64,
    /// Width of the susceptibility profile (days).
    pub sigma_p: f64,
    /// Peak root-consumption rate of young plants (per nematode per day).
    pub d_max: f64,
    /// Exponential decay rate of consumption with age (per day).
    pub eta: f64,
    /// Scale of the plant mortality singularity.
    pub mu_alpha0: f64,
    /// Exponent of the mortality singularity; at least 1 so cumulative
    /// mortality over a full lifespan diverges and no plant outlives `a_max`.
    pub mu_exp: f64,
    /// Free-nematode mortality (per day).
    pub mu_f: f64,
    /// Root-dwelling nematode mortality (per day); soil is the harsher
    /// habitat, so this must stay below `mu_f`.
    pub mu_i: f64,
    /// Nematodes recruited into roots per plant-unit of newly infested
    /// biomass.
    pub alpha: f64,
    /// Probability that a nematode leaving an infested plant re-infests
    /// (dimensionless, strictly between 0 and 1).
    pub e_reinfect: f64,
    /// Release rate of free nematodes from infested biomass (per day).
    pub gamma: f64,
    /// Conversion of ingested root mass into new root-dwelling nematodes
    /// (nematodes per plant-unit).
    pub rho: f64,
    /// Logistic carrying capacity of the root-dwelling pool (nematodes).
    pub k_cap: f64,
    /// Half-saturation biomass of the consumption response (plant-units).
    pub k_d: f64,
    /// Maximum plant age (days); mortality diverges as age approaches it.
    pub a_max: f64,
    /// Assumed lower bound on standing biomass; enters the coarse invasion
    /// threshold and renewal ratio only, never the solver.
    pub b_floor: f64,
    /// Maximum bunch weight at full maturity (kg).
    pub theta_max: f64,
    /// Harvest-maturity age: bunches on plants at least this old count
    /// towards production (days).
    pub a_star: f64,
    /// Half-weight age of the bunch growth curve (days).
    pub a_0: f64,
}

impl ModelParameters {
    /// Reference parameter set for a susceptible commercial stand under
    /// sustained nematode pressure. Scenario files override individual
    /// fields (most often `beta_max`).
    pub fn baseline() -> Self {
        ModelParameters {
            recruitment_m: 300.0,
            beta_max: 7e-5,
            a_opt: 5.5,
            sigma_p: 2.5,
            d_max: 1e-4,
            eta: 2.5,
            mu_alpha0: 1.0,
            mu_exp: 3.0,
            mu_f: 0.0495,
            mu_i: 0.045,
            alpha: 100.0,
            e_reinfect: 2e-4,
            gamma: 1000.0,
            rho: 400.0,
            k_cap: 1000.0,
            k_d: 60.0,
            a_max: 300.0,
            b_floor: 100.0,
            theta_max: 35.0,
            a_star: 240.0,
            a_0: 270.0,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 21] {
        [
            ("recruitment_m", self.recruitment_m),
            ("beta_max", self.beta_max),
            ("a_opt", self.a_opt),
            ("sigma_p", self.sigma_p),
            ("d_max", self.d_max),
            ("eta", self.eta),
            ("mu_alpha0", self.mu_alpha0),
            ("mu_exp", self.mu_exp),
            ("mu_f", self.mu_f),
            ("mu_i", self.mu_i),
            ("alpha", self.alpha),
            ("e_reinfect", self.e_reinfect),
            ("gamma", self.gamma),
            ("rho", self.rho),
            ("k_cap", self.k_cap),
            ("k_d", self.k_d),
            ("a_max", self.a_max),
            ("b_floor", self.b_floor),
            ("theta_max", self.theta_max),
            ("a_star", self.a_star),
            ("a_0", self.a_0),
        ]
    }

    /// Checks every admissibility condition, returning the complete list of
    /// violations on failure. Validation of already-valid parameters is a
    /// no-op, so it may be called repeatedly.
    pub fn validate(&self) -> Result<(), CoreError> {
        let mut violations: Vec<String> = Vec::new();
        for (name, value) in self.fields() {
            if !value.is_finite() {
                violations.push(format!("{name} must be finite (got {value})"));
            } else if value < 0.0 {
                violations.push(format!("{name} must be nonnegative (got {value})"));
            }
        }
        if !(self.mu_f > self.mu_i) {
            violations.push(format!(
                "mu_f must exceed mu_i (got mu_f={}, mu_i={})",
                self.mu_f, self.mu_i
            ));
        }
        if !(self.e_reinfect > 0.0 && self.e_reinfect < 1.0) {
            violations.push(format!(
                "e_reinfect must lie strictly between 0 and 1 (got {})",
                self.e_reinfect
            ));
        }
        if !(self.mu_exp >= 1.0) {
            violations.push(format!(
                "mu_exp must be at least 1 so lifetime mortality diverges (got {})",
                self.mu_exp
            ));
        }
        if !(self.a_star < self.a_max) {
            violations.push(format!(
                "a_star must be below a_max (got a_star={}, a_max={})",
                self.a_star, self.a_max
            ));
        }
        if !(self.k_d > 0.0) {
            violations.push(format!("k_d must be positive (got {})", self.k_d));
        }
        if !(self.k_cap > 0.0) {
            violations.push(format!("k_cap must be positive (got {})", self.k_cap));
        }
        if !(self.b_floor > 0.0) {
            violations.push(format!("b_floor must be positive (got {})", self.b_floor));
        }
        if !(self.sigma_p > 0.0) {
            violations.push(format!(
                "sigma_p must be positive for a well-defined susceptibility profile (got {})",
                self.sigma_p
            ));
        }
        if !(self.a_max > 0.0) {
            violations.push(format!("a_max must be positive (got {})", self.a_max));
        }
        if !(self.a_0 > 0.0) {
            violations.push(format!(
                "a_0 must be positive for a well-defined bunch-weight curve (got {})",
                self.a_0
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Parameters(violations))
        }
    }
}
