//! Command implementations and the error-to-exit-code policy.
//!
//! Exit codes:
//!
//! * 0: success (for `verify`, all suite criteria hold)
//! * 1: runtime failure or verification criteria not met
//! * 2: unreadable or malformed input (config or initial-condition file)
//! * 3: semantically invalid input (parameter ranges, grid alignment,
//!   mismatched comparison grids)
//! * 4: the simulation hit the standing-biomass floor

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use nemasim_core::production::{cumulative_production, loss_report, ProductionSeries};
use nemasim_core::rates::survival_probability;
use nemasim_core::thresholds::{threshold_report, QuadratureGrid};
use nemasim_core::verify::{
    frozen_convergence, invariant_audit, stability_experiment, FrozenRegime,
};
use nemasim_core::{simulate, CoreError, DiscreteState, RateTable, Trajectory};

use crate::config::{
    parse_config, InitialProfile, ParseError, ScenarioConfig,
};
use crate::output;

/// Everything that can stop a command, with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed config or data file.
    Parse {
        /// File the error came from.
        path: PathBuf,
        /// Line-anchored description.
        error: ParseError,
    },
    /// Input file could not be read.
    ReadInput {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: io::Error,
    },
    /// Output file could not be written.
    WriteOutput {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: io::Error,
    },
    /// Semantically invalid input detected by the CLI itself.
    Semantic(String),
    /// Error surfaced from the model library.
    Core(CoreError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { path, error } => write!(f, "{}: {error}", path.display()),
            CliError::ReadInput { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            CliError::WriteOutput { path, source } => {
                write!(f, "cannot write {}: {source}", path.display())
            }
            CliError::Semantic(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::ReadInput { .. } => 2,
            CliError::WriteOutput { .. } => 1,
            CliError::Semantic(_) => 3,
            CliError::Core(e) => match e {
                CoreError::Parameters(_)
                | CoreError::Grid(_)
                | CoreError::Domain { .. }
                | CoreError::UnsupportedCase(_)
                | CoreError::Production(_) => 3,
                CoreError::PopulationFloor { .. } => 4,
                CoreError::DegenerateEquilibrium | CoreError::Numerical(_) => 1,
            },
        }
    }
}

/// A parsed, validated scenario with its sampled rate tables and initial
/// state, ready to simulate.
pub struct PreparedScenario {
    /// Label for reports: the config file stem.
    pub name: String,
    /// Parsed configuration.
    pub config: ScenarioConfig,
    /// Rates sampled on the scenario grid.
    pub table: RateTable,
    /// Initial state.
    pub initial: DiscreteState,
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::ReadInput {
        path: path.to_path_buf(),
        source,
    })
}

fn load_initial_file(
    path: &Path,
    cells: usize,
    h: f64,
    a_max: f64,
) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = read_to_string(path)?;
    let parse_err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        error: ParseError {
            line: Some(line),
            message,
        },
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "age,S,I" => {}
        Some((_, header)) => {
            return Err(parse_err(
                1,
                format!("expected header 'age,S,I', got '{}'", header.trim()),
            ))
        }
        None => return Err(parse_err(1, String::from("empty initial-condition file"))),
    }
    let mut healthy = Vec::with_capacity(cells + 1);
    let mut infected = Vec::with_capacity(cells + 1);
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = raw.trim().split(',').collect();
        if parts.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 'age,S,I' with three columns, got '{}'", raw.trim()),
            ));
        }
        let mut nums = [0.0f64; 3];
        for (k, part) in parts.iter().enumerate() {
            nums[k] = part.trim().parse::<f64>().map_err(|_| {
                parse_err(line, format!("expected a number, got '{}'", part.trim()))
            })?;
        }
        let expected_age = ((healthy.len()) as f64 * h).min(a_max);
        if (nums[0] - expected_age).abs() > 1e-9 * a_max.max(1.0) {
            return Err(CliError::Semantic(format!(
                "initial-condition file {}: age {} at row {} does not sit on the grid (expected {})",
                path.display(),
                nums[0],
                healthy.len(),
                expected_age
            )));
        }
        healthy.push(nums[1]);
        infected.push(nums[2]);
    }
    if healthy.len() != cells + 1 {
        return Err(CliError::Semantic(format!(
            "initial-condition file {}: {} rows for a grid of {} nodes",
            path.display(),
            healthy.len(),
            cells + 1
        )));
    }
    Ok((healthy, infected))
}

/// Loads and validates a scenario end to end (everything short of the time
/// loop).
pub fn prepare(path: &Path) -> Result<PreparedScenario, CliError> {
    let text = read_to_string(path)?;
    let config = parse_config(&text).map_err(|error| CliError::Parse {
        path: path.to_path_buf(),
        error,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("scenario"));
    prepare_config(name, config)
}

/// Validates an already-parsed scenario and builds its grid and initial
/// state.
pub fn prepare_config(name: String, config: ScenarioConfig) -> Result<PreparedScenario, CliError> {
    config.params.validate()?;
    let dims = config.solver.dims(&config.params)?;
    let table = RateTable::sample(config.solver.h, &config.params)?;
    if let Some(schedule) = &config.control {
        schedule.check()?;
    }

    let h = config.solver.h;
    let cells = dims.cells;
    let (healthy, infected) = match &config.initial.profile {
        InitialProfile::SpikeAtZero { value } => {
            let mut healthy = vec![0.0; cells + 1];
            healthy[0] = value / h;
            healthy[1] = value / h;
            (healthy, vec![0.0; cells + 1])
        }
        InitialProfile::SteadyState => {
            let mut healthy = Vec::with_capacity(cells + 1);
            for j in 0..=cells {
                let a = (j as f64 * h).min(config.params.a_max);
                healthy.push(config.params.recruitment_m * survival_probability(a, &config.params)?);
            }
            (healthy, vec![0.0; cells + 1])
        }
        InitialProfile::File { path: data } => {
            load_initial_file(data, cells, h, config.params.a_max)?
        }
    };
    let initial = DiscreteState::initial(
        healthy,
        infected,
        config.initial.n_f0,
        config.initial.n_i0,
    );
    initial.check(cells)?;
    Ok(PreparedScenario {
        name,
        config,
        table,
        initial,
    })
}

impl PreparedScenario {
    /// Runs the time loop.
    pub fn execute(&self) -> Result<Trajectory, CliError> {
        Ok(simulate(
            &self.initial,
            &self.table,
            &self.config.params,
            self.config.control.as_ref(),
            &self.config.solver,
        )?)
    }

    /// Production series for a finished run.
    pub fn production(&self, traj: &Trajectory) -> Result<ProductionSeries, CliError> {
        Ok(cumulative_production(traj, &self.config.params)?)
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    output::write_file(dir, name, contents).map_err(|source| CliError::WriteOutput {
        path: dir.join(name),
        source,
    })
}

/// `simulate <cfg>`: run the scenario and write every output file.
pub fn run_scenario(path: &Path) -> Result<(), CliError> {
    let scenario = prepare(path)?;
    let traj = scenario.execute()?;
    let series = scenario.production(&traj)?;
    let cfg = &scenario.config;
    let dir = &cfg.output_dir;
    let record = cfg.solver.record_every;

    write(
        dir,
        "timeseries.csv",
        &output::timeseries_csv(&traj, cfg.control.as_ref(), record)?,
    )?;
    write(
        dir,
        "healthy.csv",
        &output::fields_csv(&traj, &cfg.params, record, false),
    )?;
    write(
        dir,
        "infected.csv",
        &output::fields_csv(&traj, &cfg.params, record, true),
    )?;
    write(dir, "production.csv", &output::production_csv(&series))?;
    if cfg.analysis.thresholds {
        let grid = QuadratureGrid::standard(&cfg.params)?;
        let report = threshold_report(&cfg.params, &grid)?;
        write(dir, "thresholds.txt", &output::thresholds_txt(&report))?;
    }
    if cfg.analysis.audit {
        let report = invariant_audit(&traj, &cfg.params);
        write(dir, "audit.txt", &output::audit_txt(&report))?;
    }
    let last = traj.last();
    println!(
        "{}: {} steps, N_F(T) = {}, N_I(T) = {}, cumulative production = {}",
        scenario.name,
        traj.steps(),
        last.free_nematodes,
        last.infesting_nematodes,
        series.total()
    );
    println!("wrote outputs to {}", dir.display());
    Ok(())
}

/// `analyze <cfg>`: threshold analysis only, no simulation.
pub fn analyze(path: &Path) -> Result<(), CliError> {
    let scenario = prepare(path)?;
    let cfg = &scenario.config;
    let grid = QuadratureGrid::standard(&cfg.params)?;
    let report = threshold_report(&cfg.params, &grid)?;
    write(&cfg.output_dir, "thresholds.txt", &output::thresholds_txt(&report))?;
    println!(
        "n_basic = {}, lambda_star = {}, verdict = {}",
        report.n_basic,
        report.lambda_star,
        report.verdict.label()
    );
    println!("wrote {}", cfg.output_dir.join("thresholds.txt").display());
    Ok(())
}

fn thread_budget(jobs: usize) -> usize {
    let env_cap = std::env::var("NEMASIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    env_cap.unwrap_or(hw).min(jobs).max(1)
}

/// Runs every scenario, at most `NEMASIM_THREADS` at a time, and preserves
/// input order in the results.
fn run_all(scenarios: &[PreparedScenario]) -> Result<Vec<Trajectory>, CliError> {
    let budget = thread_budget(scenarios.len());
    let mut results: Vec<Option<Result<Trajectory, CliError>>> =
        (0..scenarios.len()).map(|_| None).collect();
    if budget <= 1 {
        for (slot, scenario) in results.iter_mut().zip(scenarios) {
            *slot = Some(scenario.execute());
        }
    } else {
        let work: Mutex<std::iter::Enumerate<std::slice::Iter<PreparedScenario>>> =
            Mutex::new(scenarios.iter().enumerate());
        let slots: Vec<Mutex<&mut Option<Result<Trajectory, CliError>>>> =
            results.iter_mut().map(Mutex::new).collect();
        std::thread::scope(|scope| {
            for _ in 0..budget {
                scope.spawn(|| loop {
                    let next = work.lock().expect("work queue lock").next();
                    match next {
                        Some((idx, scenario)) => {
                            let result = scenario.execute();
                            **slots[idx].lock().expect("result slot lock") = Some(result);
                        }
                        None => break,
                    }
                });
            }
        });
    }
    results
        .into_iter()
        .map(|r| r.expect("every scenario was executed"))
        .collect()
}

/// `compare <base> <others...>`: run all scenarios on a shared grid and
/// tabulate losses against the baseline. The first non-baseline scenario
/// doubles as the uncontrolled reference for the gain columns of the rest.
pub fn compare(base: &Path, others: &[PathBuf]) -> Result<(), CliError> {
    let mut scenarios = vec![prepare(base)?];
    for path in others {
        scenarios.push(prepare(path)?);
    }
    let head = &scenarios[0].config;
    for s in &scenarios[1..] {
        let c = &s.config;
        if c.solver.h != head.solver.h
            || c.solver.t_end != head.solver.t_end
            || c.params.a_max != head.params.a_max
        {
            return Err(CliError::Semantic(format!(
                "scenario {} disagrees with the baseline on the grid (h, t_end, a_max must match)",
                s.name
            )));
        }
    }

    let trajectories = run_all(&scenarios)?;
    let mut series = Vec::with_capacity(scenarios.len());
    for (scenario, traj) in scenarios.iter().zip(&trajectories) {
        series.push(scenario.production(traj)?);
    }

    let mut rows = Vec::with_capacity(scenarios.len());
    rows.push(output::ComparisonRow {
        scenario: scenarios[0].name.clone(),
        final_cumulative: series[0].total(),
        loss_vs_baseline_pct: 0.0,
        gain_over_baseline_pct: None,
        gain_recovered_loss_pct: None,
        gain_over_uncontrolled_pct: None,
    });
    for k in 1..scenarios.len() {
        let report = if k == 1 {
            loss_report(&series[0], &series[1], None)?
        } else {
            loss_report(&series[0], &series[1], Some(&series[k]))?
        };
        let (loss, gains) = if k == 1 {
            (report.loss_no_control_pct, (None, None, None))
        } else {
            (
                report
                    .loss_with_control_pct
                    .expect("controlled series provided"),
                (
                    report.gain_over_baseline_pct,
                    report.gain_recovered_loss_pct,
                    report.gain_over_uncontrolled_pct,
                ),
            )
        };
        rows.push(output::ComparisonRow {
            scenario: scenarios[k].name.clone(),
            final_cumulative: series[k].total(),
            loss_vs_baseline_pct: loss,
            gain_over_baseline_pct: gains.0,
            gain_recovered_loss_pct: gains.1,
            gain_over_uncontrolled_pct: gains.2,
        });
    }

    let dir = scenarios[0].config.output_dir.clone();
    write(&dir, "comparison.csv", &output::comparison_csv(&rows))?;
    println!(
        "compared {} scenarios; wrote {}",
        scenarios.len(),
        dir.join("comparison.csv").display()
    );
    Ok(())
}

/// Verification suites runnable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Frozen-coefficient convergence ladder against the characteristics
    /// oracle.
    Convergence,
    /// Per-step positivity and bound audit of the scenario run.
    Invariants,
    /// Long-run extinction/persistence against the threshold prediction.
    Stability,
}

/// `verify <suite> <cfg>`: returns the process exit code (0 iff the
/// suite's criteria hold).
pub fn verify_suite(suite: Suite, path: &Path) -> Result<i32, CliError> {
    let scenario = prepare(path)?;
    let cfg = &scenario.config;
    let dir = &cfg.output_dir;
    match suite {
        Suite::Convergence => {
            let regime = FrozenRegime::suite(&cfg.params);
            let ladder = [2.0, 1.0, 0.5, 0.25];
            let report = frozen_convergence(&cfg.params, &regime, &ladder, 360.0)?;
            write(dir, "convergence.csv", &output::convergence_csv(&report))?;
            let ok = (0.8..=1.2).contains(&report.order_inf)
                && (0.8..=1.2).contains(&report.order_l1);
            println!(
                "fitted order: sup-norm {}, summed-norm {} (monotone: {}) -> {}",
                report.order_inf,
                report.order_l1,
                report.monotone,
                if ok { "pass" } else { "fail" }
            );
            Ok(if ok { 0 } else { 1 })
        }
        Suite::Invariants => {
            let traj = scenario.execute()?;
            let report = invariant_audit(&traj, &cfg.params);
            write(dir, "audit.txt", &output::audit_txt(&report))?;
            let violations = report.steps.iter().filter(|s| !s.clean()).count();
            println!(
                "{} steps audited, {} violations -> {}",
                report.steps.len(),
                violations,
                if report.passed() { "pass" } else { "fail" }
            );
            Ok(if report.passed() { 0 } else { 1 })
        }
        Suite::Stability => {
            let grid = QuadratureGrid::standard(&cfg.params)?;
            let outcome = stability_experiment(
                &scenario.initial,
                &scenario.table,
                &cfg.params,
                cfg.control.as_ref(),
                &cfg.solver,
                &grid,
            )?;
            write(dir, "stability.txt", &output::stability_txt(&outcome))?;
            println!(
                "N = {}, predicted {}, measured {} -> {}",
                outcome.n_basic,
                outcome.predicted.label(),
                outcome.verdict.label(),
                if outcome.agrees { "pass" } else { "fail" }
            );
            Ok(if outcome.agrees { 0 } else { 1 })
        }
    }
}
