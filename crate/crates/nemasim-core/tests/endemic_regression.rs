//! Full-pipeline regression of the coupled solver.
//!
//! A seedling spike plus a large free-nematode inoculum is run to t = 550
//! under the production parameter set, and a handful of state values and
//! harvest totals are pinned at values frozen from an independent
//! implementation of the identical scheme.

#![allow(clippy::excessive_precision)] // frozen values keep every digit

use approx::assert_relative_eq;
use nemasim_core::production::{cumulative_levels, loss_report};
use nemasim_core::{
    simulate, ControlSchedule, DiscreteState, ModelParameters, RateTable, SolverConfig,
};

/// Planting spike: the whole initial mass sits in the first two age cells
/// so the right-endpoint biomass is exactly `value` at any step size.
fn spike_initial(cells: usize, h: f64, value: f64, n_f0: f64, n_i0: f64) -> DiscreteState {
    let mut healthy = vec![0.0; cells + 1];
    healthy[0] = value / h;
    healthy[1] = value / h;
    DiscreteState::initial(healthy, vec![0.0; cells + 1], n_f0, n_i0)
}

#[test]
fn endemic_trajectory_regression() {
    let p = ModelParameters::baseline();
    let table = RateTable::sample(1.0, &p).unwrap();
    let initial = spike_initial(table.cells, 1.0, 100.0, 1e4, 0.0);
    let config = SolverConfig::new(1.0, 550.0);
    let traj = simulate(&initial, &table, &p, None, &config).unwrap();
    assert_eq!(traj.steps(), 550);

    let s50 = &traj.states[50];
    assert_relative_eq!(s50.free_nematodes, 2052356.300292874, max_relative = 1e-9);
    assert_relative_eq!(s50.infesting_nematodes, 17422.837368908764, max_relative = 1e-9);
    assert_relative_eq!(
        traj.aggregates[50].total_biomass,
        14899.979211380156,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        traj.aggregates[50].infected_biomass,
        263.86733453960284,
        max_relative = 1e-9
    );

    let s_end = traj.last();
    assert_relative_eq!(s_end.free_nematodes, 1768596105.5510509, max_relative = 1e-9);
    assert_relative_eq!(s_end.infesting_nematodes, 640128.65183715988, max_relative = 1e-9);
    assert_relative_eq!(
        traj.aggregates[550].total_biomass,
        89399.608843748618,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        traj.aggregates[550].infected_biomass,
        87932.448513385127,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        *traj.cumulative_production.last().unwrap(),
        36905930.884219773,
        max_relative = 1e-9
    );

    // The independent recomputation from stored fields agrees with the
    // solver's running accumulator at every level.
    let levels = cumulative_levels(&traj, &p).unwrap();
    for (a, b) in levels.iter().zip(traj.cumulative_production.iter()) {
        assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-9);
    }
}

#[test]
fn pest_free_run_accumulates_reference_harvest() {
    let p = ModelParameters::baseline();
    let table = RateTable::sample(1.0, &p).unwrap();
    let initial = spike_initial(table.cells, 1.0, 100.0, 0.0, 0.0);
    let config = SolverConfig::new(1.0, 550.0);
    let traj = simulate(&initial, &table, &p, None, &config).unwrap();
    assert_relative_eq!(
        *traj.cumulative_production.last().unwrap(),
        86836405.664418757,
        max_relative = 1e-12
    );
    // No inoculum, no infestation: every infection-side quantity stays 0.
    for state in &traj.states {
        assert_eq!(state.free_nematodes, 0.0);
        assert_eq!(state.infesting_nematodes, 0.0);
    }
    for agg in &traj.aggregates {
        assert_eq!(agg.infected_biomass, 0.0);
    }
}

#[test]
fn pulsed_control_recovers_most_of_the_loss() {
    let p = ModelParameters::baseline();
    let table = RateTable::sample(1.0, &p).unwrap();
    let config = SolverConfig::new(1.0, 550.0);

    let pest_free = simulate(
        &spike_initial(table.cells, 1.0, 100.0, 0.0, 0.0),
        &table,
        &p,
        None,
        &config,
    )
    .unwrap();
    let infested = spike_initial(table.cells, 1.0, 100.0, 1e4, 0.0);
    let uncontrolled = simulate(&infested, &table, &p, None, &config).unwrap();
    let schedule = ControlSchedule::pulses(2.85, 550.0);
    let controlled = simulate(&infested, &table, &p, Some(&schedule), &config).unwrap();

    let base = *pest_free.cumulative_production.last().unwrap();
    let ctl = *controlled.cumulative_production.last().unwrap();
    let loss_pct = (1.0 - ctl / base) * 100.0;
    assert_relative_eq!(loss_pct, 7.5188, epsilon = 1e-3);

    let report = loss_report(
        &nemasim_core::production::cumulative_production(&pest_free, &p).unwrap(),
        &nemasim_core::production::cumulative_production(&uncontrolled, &p).unwrap(),
        Some(&nemasim_core::production::cumulative_production(&controlled, &p).unwrap()),
    )
    .unwrap();
    assert_relative_eq!(report.loss_with_control_pct.unwrap(), loss_pct, epsilon = 1e-9);
    assert!(report.loss_no_control_pct > report.loss_with_control_pct.unwrap());
    assert!(report.gain_over_uncontrolled_pct.unwrap() > 0.0);
}

#[test]
fn control_intensity_sweep_matches_frozen_losses() {
    let p = ModelParameters::baseline();
    let table = RateTable::sample(1.0, &p).unwrap();
    let config = SolverConfig::new(1.0, 550.0);

    let base = *simulate(
        &spike_initial(table.cells, 1.0, 100.0, 0.0, 0.0),
        &table,
        &p,
        None,
        &config,
    )
    .unwrap()
    .cumulative_production
    .last()
    .unwrap();

    let infested = spike_initial(table.cells, 1.0, 100.0, 1e4, 0.0);
    for (u_max, frozen_loss_pct) in [
        (0.1, 53.1822),
        (0.5, 37.5066),
        (1.0, 23.8911),
        (5.0, 3.9954),
    ] {
        let schedule = ControlSchedule::pulses(u_max, 550.0);
        let traj = simulate(&infested, &table, &p, Some(&schedule), &config).unwrap();
        let loss_pct = (1.0 - traj.cumulative_production.last().unwrap() / base) * 100.0;
        assert_relative_eq!(loss_pct, frozen_loss_pct, epsilon = 1e-3);
    }
}
