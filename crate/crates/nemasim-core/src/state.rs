//! State containers: the discrete grid state, per-step aggregates, the
//! impulsive control schedule, and full trajectories.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;

/// Grid state at one time level: age-indexed healthy and infested densities
/// (`M + 1` entries at ages `j h`) plus the two nematode pools.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    /// Time level `n`, so the state refers to `t = n h`.
    pub time_index: usize,
    /// Healthy plant density per age cell.
    pub healthy: Vec<f64>,
    /// Infested plant density per age cell.
    pub infected: Vec<f64>,
    /// Free-living soil nematodes.
    pub free_nematodes: f64,
    /// Root-dwelling nematodes.
    pub infesting_nematodes: f64,
}

impl DiscreteState {
    /// Initial state (time level 0) from raw grids and pool counts.
    pub fn initial(
        healthy: Vec<f64>,
        infected: Vec<f64>,
        free_nematodes: f64,
        infesting_nematodes: f64,
    ) -> Self {
        DiscreteState {
            time_index: 0,
            healthy,
            infected,
            free_nematodes,
            infesting_nematodes,
        }
    }

    /// Number of age cells `M` (grids hold `M + 1` values).
    pub fn cells(&self) -> usize {
        self.healthy.len().saturating_sub(1)
    }

    /// Checks shape and sign: both grids of equal length `cells + 1`, every
    /// entry and both pools finite and nonnegative.
    pub fn check(&self, cells: usize) -> Result<(), CoreError> {
        if self.healthy.len() != cells + 1 || self.infected.len() != cells + 1 {
            return Err(CoreError::Grid(alloc::format!(
                "state grids must have {} entries (got {} healthy, {} infested)",
                cells + 1,
                self.healthy.len(),
                self.infected.len()
            )));
        }
        let bad = |v: f64| !v.is_finite() || v < 0.0;
        if self.healthy.iter().chain(self.infected.iter()).any(|&v| bad(v))
            || bad(self.free_nematodes)
            || bad(self.infesting_nematodes)
        {
            return Err(CoreError::UnsupportedCase(String::from(
                "state entries must be finite and nonnegative",
            )));
        }
        Ok(())
    }
}

/// Nonlocal aggregates of one grid state: right-endpoint rectangle sums over
/// cells `j = 1..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepAggregates {
    /// Standing biomass `P = h sum (S_j + I_j)`.
    pub total_biomass: f64,
    /// Infested biomass `B = h sum I_j`.
    pub infected_biomass: f64,
    /// Susceptibility-weighted biomass `C = h sum beta_j (S_j + e I_j)`.
    pub infection_weighted: f64,
    /// Consumption-weighted infested biomass `D = h sum d_j I_j`.
    pub consumption_weighted: f64,
}

/// Impulsive nematicide schedule: pulses of height `u_max` lasting
/// `pulse_width` days at the start of every `period`, switched off at
/// `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSchedule {
    /// Removal rate applied to free nematodes during a pulse (per day).
    pub u_max: f64,
    /// Days between pulse starts.
    pub period: f64,
    /// Pulse duration (days).
    pub pulse_width: f64,
    /// No pulses at or after this time (days).
    pub horizon: f64,
}

impl ControlSchedule {
    /// One-day pulses every 16 days up to `horizon`, the usual spraying
    /// cadence.
    pub fn pulses(u_max: f64, horizon: f64) -> Self {
        ControlSchedule {
            u_max,
            period: 16.0,
            pulse_width: 1.0,
            horizon,
        }
    }

    /// Validates `u_max >= 0` and `0 < pulse_width <= period`.
    pub fn check(&self) -> Result<(), CoreError> {
        let mut violations: Vec<String> = Vec::new();
        if !(self.u_max >= 0.0) || !self.u_max.is_finite() {
            violations.push(alloc::format!(
                "u_max must be nonnegative and finite (got {})",
                self.u_max
            ));
        }
        if !(self.pulse_width > 0.0 && self.pulse_width <= self.period) {
            violations.push(alloc::format!(
                "pulse_width must satisfy 0 < pulse_width <= period (got width={}, period={})",
                self.pulse_width,
                self.period
            ));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            violations.push(alloc::format!(
                "control horizon must be nonnegative and finite (got {})",
                self.horizon
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Parameters(violations))
        }
    }
}

/// Full solver output: the state at every time level together with its
/// aggregates and the running cumulative harvest.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Shared age/time step (days).
    pub h: f64,
    /// States at levels `0..=N`.
    pub states: Vec<DiscreteState>,
    /// Aggregates of each state.
    pub aggregates: Vec<StepAggregates>,
    /// Cumulative harvested mass up to each level; entry 0 is 0.
    pub cumulative_production: Vec<f64>,
}

impl Trajectory {
    /// Number of time steps `N` (states run `0..=N`).
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    /// Simulated time at level `n`.
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.h
    }

    /// Final state.
    pub fn last(&self) -> &DiscreteState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Uniform all-zero grids helper used by initial-condition builders.
pub fn zero_grid(cells: usize) -> Vec<f64> {
    vec![0.0; cells + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_shape_checks() {
        let s = DiscreteState::initial(zero_grid(4), zero_grid(4), 0.0, 0.0);
        assert_eq!(s.cells(), 4);
        assert!(s.check(4).is_ok());
        assert!(s.check(5).is_err());
        let bad = DiscreteState::initial(zero_grid(4), zero_grid(4), -1.0, 0.0);
        assert!(bad.check(4).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(ControlSchedule::pulses(1.0, 550.0).check().is_ok());
        assert!(ControlSchedule::pulses(-1.0, 550.0).check().is_err());
        let bad = ControlSchedule {
            u_max: 1.0,
            period: 2.0,
            pulse_width: 3.0,
            horizon: 100.0,
        };
        assert!(bad.check().is_err());
        let zero_width = ControlSchedule {
            pulse_width: 0.0,
            ..ControlSchedule::pulses(1.0, 10.0)
        };
        assert!(zero_width.check().is_err());
    }
}
