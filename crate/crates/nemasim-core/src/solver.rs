//! Semi-implicit Euler scheme on the shared age/time grid.
//!
//! Age and time use the same step `h`, so transport moves each density
//! exactly one cell per step. Loss terms (mortality, infestation pressure,
//! consumption, nematode removal) sit in the update denominators while gains
//! stay explicit, which makes every update a ratio of nonnegative numbers:
//! positivity holds unconditionally, with no step-size restriction.
//!
//! Per cell `j = 1..=M` and step `n`:
//!
//! ```text
//! S_j^n = S_{j-1}^{n-1} / (1 + h (mu_j + L_j))
//! I_j^n = (I_{j-1}^{n-1} + h L_j S_j^n) / (1 + h (mu_j + d_j W))
//! ```
//!
//! with infestation pressure `L_j = beta_j N_F^{n-1} / P^{n-1}` and
//! saturating consumption weight `W = N_I^{n-1} / (K_d + B^{n-1})`. The
//! nematode pools update with the same pattern; the free pool sees the
//! control pulse `u(t^{n-1})` in its denominator, and the root-dwelling pool
//! uses the already-updated `N_F^n` in its gain term:
//!
//! ```text
//! N_F^n = (N_F^{n-1} + h gamma B^{n-1})
//!         / (1 + h (mu_F + u^{n-1} + alpha C^{n-1} / P^{n-1}))
//! N_I^n = (N_I^{n-1} (1 + h rho D^{n-1} / (K_d + B^{n-1}))
//!          + h alpha C^{n-1} N_F^n / P^{n-1})
//!         / (1 + h (mu_I + rho N_I^{n-1} D^{n-1} / (K (K_d + B^{n-1}))))
//! ```
//!
//! Aggregates are right-endpoint rectangle sums over `j = 1..=M`. The
//! infinite-mortality sentinel at `j = M` drives those cells to exactly zero
//! without NaN. Standing biomass below the `epsilon_P` floor is a hard error:
//! the model assumes biomass stays bounded away from zero, and a breach means
//! the scenario left the model's domain rather than a numerical hiccup.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::params::ModelParameters;
use crate::rates::{age_cells, RateTable};
use crate::state::{ControlSchedule, DiscreteState, StepAggregates, Trajectory};

/// Discretisation settings shared by age and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Step for both age and time (days).
    pub h: f64,
    /// Simulation horizon (days); must be a multiple of `h`.
    pub t_end: f64,
    /// Keep every k-th step when serialising (the solver itself always
    /// retains all levels; this is plumbing for writers).
    pub record_every: usize,
    /// Standing-biomass floor guarding the per-biomass pressure terms.
    pub epsilon_p: f64,
}

impl SolverConfig {
    /// Config with the default floor (`1e-12`) and full recording.
    pub fn new(h: f64, t_end: f64) -> Self {
        SolverConfig {
            h,
            t_end,
            record_every: 1,
            epsilon_p: 1e-12,
        }
    }

    /// Validates the grid against the model's age span and returns its
    /// dimensions.
    pub fn dims(&self, params: &ModelParameters) -> Result<GridDims, CoreError> {
        let cells = age_cells(self.h, params.a_max)?;
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(CoreError::Grid(String::from(
                "t_end must be positive and finite",
            )));
        }
        let ratio = self.t_end / self.h;
        let steps = libm::round(ratio) as usize;
        if steps == 0 || crate::math::abs(steps as f64 * self.h - self.t_end)
            > 1e-9 * crate::math::fmax(self.t_end, 1.0)
        {
            return Err(CoreError::Grid(alloc::format!(
                "step h={} does not tile the horizon [0, {}]",
                self.h,
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(CoreError::Grid(String::from("record_every must be at least 1")));
        }
        if !(self.epsilon_p > 0.0) {
            return Err(CoreError::Grid(String::from("epsilon_p must be positive")));
        }
        let harvest_ratio = params.a_star / self.h;
        let harvest_index = libm::round(harvest_ratio) as usize;
        if crate::math::abs(harvest_index as f64 * self.h - params.a_star)
            > 1e-9 * crate::math::fmax(params.a_star, 1.0)
        {
            return Err(CoreError::Grid(alloc::format!(
                "harvest-maturity age a_star={} does not sit on the grid with h={}",
                params.a_star,
                self.h
            )));
        }
        Ok(GridDims {
            cells,
            steps,
            harvest_index,
        })
    }
}

/// Grid dimensions derived from a validated config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridDims {
    /// Age cells `M` (`M h = a_max`).
    pub cells: usize,
    /// Time steps `N` (`N h = t_end`).
    pub steps: usize,
    /// First age index contributing to harvest (`j* h = a_star`).
    pub harvest_index: usize,
}

/// Right-endpoint aggregates of a state.
pub fn aggregates(state: &DiscreteState, table: &RateTable, params: &ModelParameters) -> StepAggregates {
    let h = table.h;
    let mut total = 0.0;
    let mut infected_mass = 0.0;
    let mut weighted_infection = 0.0;
    let mut weighted_consumption = 0.0;
    for j in 1..=table.cells {
        let s = state.healthy[j];
        let i = state.infected[j];
        total += s + i;
        infected_mass += i;
        weighted_infection += table.infection[j] * (s + params.e_reinfect * i);
        weighted_consumption += table.consumption[j] * i;
    }
    StepAggregates {
        total_biomass: h * total,
        infected_biomass: h * infected_mass,
        infection_weighted: h * weighted_infection,
        consumption_weighted: h * weighted_consumption,
    }
}

/// Pulse value at time `t`: `u_max` while `t mod period < pulse_width` and
/// `t < horizon`, else zero.
pub fn control_value(t: f64, schedule: &ControlSchedule) -> f64 {
    if t < 0.0 || t >= schedule.horizon {
        return 0.0;
    }
    let phase = libm::fmod(t, schedule.period);
    if phase < schedule.pulse_width {
        schedule.u_max
    } else {
        0.0
    }
}

/// One implicit transport-decay cell: `upstream / (1 + h (mu + pressure))`.
/// An infinite rate yields exactly zero.
#[inline]
pub fn healthy_cell(upstream: f64, mu: f64, pressure: f64, h: f64) -> f64 {
    let denom = 1.0 + h * (mu + pressure);
    if denom.is_finite() {
        upstream / denom
    } else {
        0.0
    }
}

/// One infested cell: gains `h * pressure * new_healthy` from fresh
/// infestations of the already-updated healthy cell, loses to mortality and
/// to consumption at rate `removal`.
#[inline]
pub fn infected_cell(upstream: f64, new_healthy: f64, mu: f64, pressure: f64, removal: f64, h: f64) -> f64 {
    let denom = 1.0 + h * (mu + removal);
    if denom.is_finite() {
        (upstream + h * pressure * new_healthy) / denom
    } else {
        0.0
    }
}

/// Scalar pool update with explicit gain and implicit removal.
#[inline]
pub fn free_nematode_cell(prev: f64, gain: f64, removal: f64, h: f64) -> f64 {
    (prev + h * gain) / (1.0 + h * removal)
}

/// Root-dwelling pool update: logistic-style growth split between an
/// explicit gain factor and an implicit crowding brake, plus the infestation
/// influx `source`.
#[inline]
pub fn infesting_cell(prev: f64, growth: f64, source: f64, mortality: f64, capacity: f64, h: f64) -> f64 {
    (prev * (1.0 + h * growth) + h * source)
        / (1.0 + h * (mortality + growth * prev / capacity))
}

/// Advances one step. `prev_agg` must be the aggregates of `prev`; control is
/// sampled at the previous time level.
pub fn step(
    prev: &DiscreteState,
    prev_agg: &StepAggregates,
    table: &RateTable,
    params: &ModelParameters,
    schedule: Option<&ControlSchedule>,
    config: &SolverConfig,
) -> Result<DiscreteState, CoreError> {
    let h = config.h;
    if !(prev_agg.total_biomass >= config.epsilon_p) {
        return Err(CoreError::PopulationFloor {
            step: prev.time_index,
            biomass: prev_agg.total_biomass,
        });
    }
    let pressure_per_beta = prev.free_nematodes / prev_agg.total_biomass;
    let consumption_weight = prev.infesting_nematodes / (params.k_d + prev_agg.infected_biomass);
    let t_prev = prev.time_index as f64 * h;
    let u_prev = schedule.map_or(0.0, |s| control_value(t_prev, s));

    let cells = table.cells;
    let mut healthy = Vec::with_capacity(cells + 1);
    let mut infected = Vec::with_capacity(cells + 1);
    healthy.push(params.recruitment_m);
    infected.push(0.0);
    for j in 1..=cells {
        let pressure = table.infection[j] * pressure_per_beta;
        let mu = table.mortality[j];
        let s_new = healthy_cell(prev.healthy[j - 1], mu, pressure, h);
        let removal = table.consumption[j] * consumption_weight;
        let i_new = infected_cell(prev.infected[j - 1], s_new, mu, pressure, removal, h);
        healthy.push(s_new);
        infected.push(i_new);
    }

    let nf_removal =
        params.mu_f + u_prev + params.alpha * prev_agg.infection_weighted / prev_agg.total_biomass;
    let nf_new = free_nematode_cell(
        prev.free_nematodes,
        params.gamma * prev_agg.infected_biomass,
        nf_removal,
        h,
    );
    let growth =
        params.rho * prev_agg.consumption_weighted / (params.k_d + prev_agg.infected_biomass);
    let influx = params.alpha * prev_agg.infection_weighted * nf_new / prev_agg.total_biomass;
    let ni_new = infesting_cell(
        prev.infesting_nematodes,
        growth,
        influx,
        params.mu_i,
        params.k_cap,
        h,
    );

    Ok(DiscreteState {
        time_index: prev.time_index + 1,
        healthy,
        infected,
        free_nematodes: nf_new,
        infesting_nematodes: ni_new,
    })
}

/// Runs the scheme from `initial` to `t_end`, recording every level, its
/// aggregates, and cumulative harvest (bunch weight times healthy density
/// summed over harvest-mature ages, accumulated in time).
pub fn simulate(
    initial: &DiscreteState,
    table: &RateTable,
    params: &ModelParameters,
    schedule: Option<&ControlSchedule>,
    config: &SolverConfig,
) -> Result<Trajectory, CoreError> {
    let dims = config.dims(params)?;
    if dims.cells != table.cells || table.h != config.h {
        return Err(CoreError::Grid(String::from(
            "rate table and solver config disagree on the grid",
        )));
    }
    initial.check(dims.cells)?;
    if let Some(s) = schedule {
        s.check()?;
    }

    let mut states = Vec::with_capacity(dims.steps + 1);
    let mut aggs = Vec::with_capacity(dims.steps + 1);
    let mut production = Vec::with_capacity(dims.steps + 1);

    let mut first = initial.clone();
    first.time_index = 0;
    aggs.push(aggregates(&first, table, params));
    states.push(first);
    production.push(0.0);

    let h = config.h;
    for n in 1..=dims.steps {
        let prev = &states[n - 1];
        let prev_agg = &aggs[n - 1];
        let next = step(prev, prev_agg, table, params, schedule, config)?;
        let mut harvest_rate = 0.0;
        for j in dims.harvest_index..=dims.cells {
            harvest_rate += table.bunch[j] * next.healthy[j];
        }
        production.push(production[n - 1] + h * h * harvest_rate);
        aggs.push(aggregates(&next, table, params));
        states.push(next);
    }

    Ok(Trajectory {
        h,
        states,
        aggregates: aggs,
        cumulative_production: production,
    })
}
