//! Output file writers.
//!
//! All numbers are written with Rust's shortest round-trip `Display`
//! formatting and a locale-independent '.' separator, so identical runs
//! produce byte-identical files and parsed values reproduce the original
//! bits exactly.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use nemasim_core::production::{cumulative_at, ProductionSeries};
use nemasim_core::solver::control_value;
use nemasim_core::thresholds::ThresholdReport;
use nemasim_core::verify::{ConvergenceReport, InvariantAuditReport, StabilityOutcome};
use nemasim_core::{ControlSchedule, CoreError, ModelParameters, Trajectory};

/// Time levels that appear in row-oriented outputs: every `record_every`-th
/// level plus the final one.
pub fn recorded_levels(steps: usize, record_every: usize) -> Vec<usize> {
    let r = record_every.max(1);
    let mut levels: Vec<usize> = (0..=steps).step_by(r).collect();
    if *levels.last().expect("at least level 0") != steps {
        levels.push(steps);
    }
    levels
}

/// `timeseries.csv`: one row per recorded level with the pools, the four
/// aggregates, the control value and the cumulative/daily production.
pub fn timeseries_csv(
    traj: &Trajectory,
    schedule: Option<&ControlSchedule>,
    record_every: usize,
) -> Result<String, CoreError> {
    let mut out = String::from("t,N_F,N_I,P,B,C,D,u,P_c,P_d\n");
    let pc = &traj.cumulative_production;
    for &n in &recorded_levels(traj.steps(), record_every) {
        let t = traj.time(n);
        let state = &traj.states[n];
        let agg = &traj.aggregates[n];
        let u = match schedule {
            Some(s) => control_value(t, s),
            None => 0.0,
        };
        let daily = if t < 1.0 {
            0.0
        } else {
            cumulative_at(traj, pc, t)? - cumulative_at(traj, pc, t - 1.0)?
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            t,
            state.free_nematodes,
            state.infesting_nematodes,
            agg.total_biomass,
            agg.infected_biomass,
            agg.infection_weighted,
            agg.consumption_weighted,
            u,
            pc[n],
            daily
        );
    }
    Ok(out)
}

/// One plant field as a matrix: a header row of ages, then one row per
/// recorded level.
pub fn fields_csv(traj: &Trajectory, params: &ModelParameters, record_every: usize, infected: bool) -> String {
    let cells = traj.states[0].cells();
    let h = traj.h;
    let mut out = String::new();
    let mut header: Vec<String> = Vec::with_capacity(cells + 1);
    for j in 0..=cells {
        let a = (j as f64 * h).min(params.a_max);
        header.push(format!("{a}"));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for &n in &recorded_levels(traj.steps(), record_every) {
        let state = &traj.states[n];
        let field = if infected { &state.infected } else { &state.healthy };
        let row: Vec<String> = field.iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `production.csv`: day, cumulative harvest, daily harvest.
pub fn production_csv(series: &ProductionSeries) -> String {
    let mut out = String::from("day,cumulative,daily\n");
    for day in 0..=series.horizon_days() {
        let _ = writeln!(out, "{},{},{}", day, series.cumulative[day], series.daily[day]);
    }
    out
}

/// `thresholds.txt`: the scalar threshold quantities and the verdict.
pub fn thresholds_txt(report: &ThresholdReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sigma = {}", report.sigma);
    let _ = writeln!(out, "n_basic = {}", report.n_basic);
    let _ = writeln!(out, "lambda_star = {}", report.lambda_star);
    let _ = writeln!(out, "n0_threshold = {}", report.n0_threshold);
    let _ = writeln!(out, "renewal_ratio = {}", report.renewal_ratio);
    let _ = writeln!(out, "verdict = {}", report.verdict.label());
    out
}

/// `audit.txt`: the proved bounds and the per-step violation tally.
pub fn audit_txt(report: &InvariantAuditReport) -> String {
    let violations = report.steps.iter().filter(|s| !s.clean()).count();
    let mut out = String::new();
    let _ = writeln!(out, "steps = {}", report.steps.len());
    let _ = writeln!(out, "plant_cap = {}", report.plant_cap);
    let _ = writeln!(out, "biomass_cap = {}", report.biomass_cap);
    let _ = writeln!(out, "nematode_cap = {}", report.nematode_cap);
    let _ = writeln!(out, "violations = {violations}");
    match report.first_violation {
        Some(n) => {
            let _ = writeln!(out, "first_violation = {n}");
        }
        None => {
            let _ = writeln!(out, "first_violation = none");
        }
    }
    let _ = writeln!(out, "passed = {}", report.passed());
    out
}

/// `stability.txt`: measured asymptotics next to the threshold prediction.
pub fn stability_txt(outcome: &StabilityOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n_basic = {}", outcome.n_basic);
    let _ = writeln!(out, "predicted = {}", outcome.predicted.label());
    let _ = writeln!(out, "verdict = {}", outcome.verdict.label());
    let _ = writeln!(out, "agrees = {}", outcome.agrees);
    let _ = writeln!(out, "pools_initial = {}", outcome.pools_initial);
    let _ = writeln!(out, "pools_final = {}", outcome.pools_final);
    let _ = writeln!(out, "infected_mass_final = {}", outcome.infected_mass_final);
    let _ = writeln!(out, "healthy_mass_final = {}", outcome.healthy_mass_final);
    let _ = writeln!(out, "infesting_peak = {}", outcome.infesting_peak);
    let _ = writeln!(out, "infesting_final = {}", outcome.infesting_final);
    out
}

/// `convergence.csv`: one row per step size with both error norms.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("h,error_inf,error_l1\n");
    for k in 0..report.step_sizes.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            report.step_sizes[k], report.errors_inf[k], report.errors_l1[k]
        );
    }
    out
}

/// One `comparison.csv` row; `None` cells are left empty.
pub struct ComparisonRow {
    /// Scenario label (config file stem).
    pub scenario: String,
    /// Final cumulative production.
    pub final_cumulative: f64,
    /// Loss relative to the baseline scenario.
    pub loss_vs_baseline_pct: f64,
    /// Gain of a controlled scenario over the baseline.
    pub gain_over_baseline_pct: Option<f64>,
    /// Share of the uncontrolled loss that control recovered.
    pub gain_recovered_loss_pct: Option<f64>,
    /// Gain over the uncontrolled scenario.
    pub gain_over_uncontrolled_pct: Option<f64>,
}

/// `comparison.csv` from assembled rows.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut out = String::from(
        "scenario,final_cumulative,loss_vs_baseline_pct,gain_over_baseline_pct,gain_recovered_loss_pct,gain_over_uncontrolled_pct\n",
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.scenario,
            row.final_cumulative,
            row.loss_vs_baseline_pct,
            cell(row.gain_over_baseline_pct),
            cell(row.gain_recovered_loss_pct),
            cell(row.gain_over_uncontrolled_pct)
        );
    }
    out
}

/// Writes a file, creating the parent directory first.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}
