//! Harvest accounting: cumulative and daily production series and scenario
//! loss/gain comparisons.
//!
//! Cumulative production integrates the bunch-weight curve against the
//! healthy density over harvest-mature ages (`a >= a_star`) and over time,
//! with the same right-endpoint rectangle rule the solver uses for its
//! aggregates:
//!
//! ```text
//! P_c(t^n) = h^2 sum_{u=1..n} sum_{j >= j*} theta(a_j) S_j^u
//! ```
//!
//! Daily production is the first difference of `P_c` sampled at integer
//! days; when a day falls between grid levels the cumulative value is
//! linearly interpolated. Loss percentages compare final cumulative values
//! between a pest-free baseline, an uncontrolled scenario, and optionally a
//! controlled one. "Relative gain from control" has no single canonical
//! definition, so the report carries all three defensible ratios and leaves
//! the choice to the reader.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::params::ModelParameters;
use crate::rates;
use crate::state::Trajectory;

/// Day-indexed harvest series.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductionSeries {
    /// `P_c(d)` for whole days `d = 0..=D`; nondecreasing, starts at 0.
    pub cumulative: Vec<f64>,
    /// `P_d(d) = P_c(d) - P_c(d-1)`; entry 0 is 0 by convention.
    pub daily: Vec<f64>,
}

impl ProductionSeries {
    /// Last day covered by the series.
    pub fn horizon_days(&self) -> usize {
        self.cumulative.len().saturating_sub(1)
    }

    /// Final cumulative production.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Daily production at day `d >= 1`.
    pub fn daily_at(&self, day: usize) -> Result<f64, CoreError> {
        if day < 1 || day >= self.daily.len() {
            return Err(CoreError::Production(alloc::format!(
                "daily production defined for days 1..={} (asked for {day})",
                self.horizon_days()
            )));
        }
        Ok(self.daily[day])
    }
}

/// Cumulative production along a trajectory, evaluated at time `t` with
/// linear interpolation between grid levels.
pub fn cumulative_at(traj: &Trajectory, pc: &[f64], t: f64) -> Result<f64, CoreError> {
    let steps = traj.steps();
    let t_end = steps as f64 * traj.h;
    if t < 0.0 || t > t_end + 1e-9 * math::fmax(t_end, 1.0) {
        return Err(CoreError::Production(alloc::format!(
            "time {t} outside the simulated span [0, {t_end}]"
        )));
    }
    let position = t / traj.h;
    let lower = math::fmin(libm::floor(position), (steps - 1) as f64) as usize;
    let frac = position - lower as f64;
    Ok(pc[lower] + frac * (pc[lower + 1] - pc[lower]))
}

/// Recomputes the per-level cumulative production from the stored states.
/// Independent of the accumulator the solver carries, so the two can be
/// cross-checked.
pub fn cumulative_levels(traj: &Trajectory, params: &ModelParameters) -> Result<Vec<f64>, CoreError> {
    let h = traj.h;
    let harvest_ratio = params.a_star / h;
    let harvest_index = libm::round(harvest_ratio) as usize;
    if math::abs(harvest_index as f64 * h - params.a_star)
        > 1e-9 * math::fmax(params.a_star, 1.0)
    {
        return Err(CoreError::Grid(alloc::format!(
            "harvest-maturity age a_star={} does not sit on the grid with h={h}",
            params.a_star
        )));
    }
    let cells = traj.states[0].cells();
    let mut bunch = Vec::with_capacity(cells + 1);
    for j in 0..=cells {
        bunch.push(rates::bunch_weight(j as f64 * h, params)?);
    }
    let mut levels = Vec::with_capacity(traj.states.len());
    levels.push(0.0);
    for state in &traj.states[1..] {
        let mut rate = 0.0;
        for (weight, healthy) in bunch[harvest_index..].iter().zip(&state.healthy[harvest_index..]) {
            rate += weight * healthy;
        }
        let prev = *levels.last().unwrap();
        levels.push(prev + h * h * rate);
    }
    Ok(levels)
}

/// Builds the day-indexed series from a trajectory.
pub fn cumulative_production(
    traj: &Trajectory,
    params: &ModelParameters,
) -> Result<ProductionSeries, CoreError> {
    let levels = cumulative_levels(traj, params)?;
    let t_end = traj.steps() as f64 * traj.h;
    let days = libm::floor(t_end + 1e-9) as usize;
    let mut cumulative = Vec::with_capacity(days + 1);
    for d in 0..=days {
        cumulative.push(cumulative_at(traj, &levels, d as f64)?);
    }
    let mut daily = Vec::with_capacity(days + 1);
    daily.push(0.0);
    for d in 1..=days {
        daily.push(cumulative[d] - cumulative[d - 1]);
    }
    Ok(ProductionSeries { cumulative, daily })
}

/// Scenario comparison based on final cumulative production.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    /// Final cumulative production of the pest-free reference.
    pub production_baseline: f64,
    /// Final cumulative production without control.
    pub production_no_control: f64,
    /// Final cumulative production with control, when provided.
    pub production_with_control: Option<f64>,
    /// `100 (1 - no_control / baseline)`.
    pub loss_no_control_pct: f64,
    /// `100 (1 - with_control / baseline)`.
    pub loss_with_control_pct: Option<f64>,
    /// `100 (with_control - no_control) / baseline`.
    pub gain_over_baseline_pct: Option<f64>,
    /// `100 (with_control - no_control) / (baseline - no_control)`: the
    /// fraction of pest-induced loss recovered by control.
    pub gain_recovered_loss_pct: Option<f64>,
    /// `100 (with_control - no_control) / no_control`.
    pub gain_over_uncontrolled_pct: Option<f64>,
}

/// Compares scenarios sharing one horizon. The baseline's final production
/// must be positive for percentages to make sense.
pub fn loss_report(
    baseline: &ProductionSeries,
    no_control: &ProductionSeries,
    with_control: Option<&ProductionSeries>,
) -> Result<LossReport, CoreError> {
    let horizon = baseline.horizon_days();
    if no_control.horizon_days() != horizon
        || with_control.is_some_and(|s| s.horizon_days() != horizon)
    {
        return Err(CoreError::UnsupportedCase(String::from(
            "loss report needs series over one shared horizon",
        )));
    }
    let base = baseline.total();
    if !(base > 0.0) {
        return Err(CoreError::Production(String::from(
            "baseline production is zero; percentages undefined",
        )));
    }
    let unctl = no_control.total();
    let ctl = with_control.map(|s| s.total());
    let gain = ctl.map(|c| c - unctl);
    Ok(LossReport {
        production_baseline: base,
        production_no_control: unctl,
        production_with_control: ctl,
        loss_no_control_pct: 100.0 * (1.0 - unctl / base),
        loss_with_control_pct: ctl.map(|c| 100.0 * (1.0 - c / base)),
        gain_over_baseline_pct: gain.map(|g| 100.0 * g / base),
        gain_recovered_loss_pct: gain.and_then(|g| {
            let denom = base - unctl;
            (denom != 0.0).then(|| 100.0 * g / denom)
        }),
        gain_over_uncontrolled_pct: gain.and_then(|g| (unctl != 0.0).then(|| 100.0 * g / unctl)),
    })
}
