//! Verification harness: empirical confirmation of the scheme's proved
//! properties.
//!
//! Three instruments:
//!
//! * **Characteristics oracle.** With the nematode pools frozen (constant
//!   infestation pressure ratio and root-dwelling count), the plant
//!   equations decouple and integrate exactly along characteristics
//!   `t - a = const`. Writing `Theta(a)` for the cumulative loss rate of
//!   healthy plants and `Psi(a)` for that of infested plants,
//!
//!   ```text
//!   S(a,t) = S0(a-t) exp(-(Theta(a) - Theta(a-t)))          t <= a
//!            m exp(-Theta(a))                               t >  a
//!   I(a,t) = S0(a-t) exp(Theta(a-t) - Psi(a)) (G(a)-G(a-t)) t <= a
//!            m exp(-Psi(a)) G(a)                            t >  a
//!   G(x)   = int_0^x pressure(z) exp(Psi(z) - Theta(z)) dz
//!   ```
//!
//!   Both cumulative rates have closed forms (the Gaussian pressure
//!   integrates to error functions, the exponential consumption to an
//!   elementary expression, and the mortality hazard cancels inside `G`),
//!   so only the one-dimensional `G` needs quadrature. Because age and time
//!   share one step, `a_j - t_n` is itself a grid node and the oracle costs
//!   O(1) per evaluation after a per-grid table build.
//!
//! * **Convergence measurement.** Errors between the scheme and the oracle
//!   (or a fine-grid self-reference for the fully coupled system) in the
//!   discrete norms `max_{n,j}` and `max_n h sum_j`, with the order read off
//!   a log-log least-squares fit. The singular mortality violates the
//!   smoothness the first-order error bound assumes near the terminal age,
//!   so the standard suite swaps in a bounded constant mortality.
//!
//! * **Invariant audit and asymptotics.** Per-step checks of positivity and
//!   the proved uniform bounds, and an extinction/persistence experiment
//!   compared against the sign of `N - 1`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::params::ModelParameters;
use crate::rates::{self, age_cells, MortalityModel, RateTable};
use crate::solver::{self, SolverConfig};
use crate::state::{ControlSchedule, DiscreteState, Trajectory};
use crate::thresholds::{self, QuadratureGrid};

/// A decoupled regime: nematode feedback frozen so the plant equations admit
/// exact characteristic solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenRegime {
    /// Frozen ratio of free nematodes to standing biomass; scales the
    /// infection susceptibility into a fixed infestation pressure.
    pub pressure_ratio: f64,
    /// Frozen root-dwelling count; with the half-saturation biomass it sets
    /// the consumption removal rate on infested plants.
    pub root_pool: f64,
    /// Mortality law; the standard suite uses a bounded constant rate.
    pub mortality: MortalityModel,
}

impl FrozenRegime {
    /// Standard convergence-suite regime: bounded mortality `1 / a_max`,
    /// pressure ratio 1000 and root pool 1e4, amplitudes that exercise both
    /// plant equations well away from their trivial limits.
    pub fn suite(params: &ModelParameters) -> Self {
        FrozenRegime {
            pressure_ratio: 1000.0,
            root_pool: 1e4,
            mortality: MortalityModel::Constant(1.0 / params.a_max),
        }
    }

    /// Pressure-free regime under the production mortality law: pure
    /// aging/death transport, the case where the characteristic formulas
    /// reduce to survival ratios.
    pub fn quiescent() -> Self {
        FrozenRegime {
            pressure_ratio: 0.0,
            root_pool: 0.0,
            mortality: MortalityModel::PowerLaw,
        }
    }

    /// Smooth initial healthy profile `m * survival(a) * (1 + 0.4
    /// sin^2(pi a / a_max))`: near equilibrium but with a bump that keeps
    /// the transport error visible.
    pub fn smooth_initial(&self, params: &ModelParameters, h: f64) -> Result<Vec<f64>, CoreError> {
        let cells = age_cells(h, params.a_max)?;
        let mut out = Vec::with_capacity(cells + 1);
        for j in 0..=cells {
            let a = math::fmin(j as f64 * h, params.a_max);
            let s = libm::sin(core::f64::consts::PI * a / params.a_max);
            out.push(params.recruitment_m * self.mortality.survival(a, params)? * (1.0 + 0.4 * s * s));
        }
        Ok(out)
    }
}

/// Exact solution tables for one frozen regime on one grid.
#[derive(Debug, Clone)]
pub struct CharacteristicsOracle {
    recruitment: f64,
    s0: Vec<f64>,
    survival: Vec<f64>,
    pressure_cum: Vec<f64>,
    consumption_cum: Vec<f64>,
    g: Vec<f64>,
}

impl CharacteristicsOracle {
    /// Builds the per-node tables; the only numerical step is the panelwise
    /// adaptive quadrature for `G`, to relative tolerance 1e-10.
    pub fn build(
        params: &ModelParameters,
        regime: &FrozenRegime,
        h: f64,
    ) -> Result<Self, CoreError> {
        let cells = age_cells(h, params.a_max)?;
        let s0 = regime.smooth_initial(params, h)?;

        // Closed-form cumulative rates.
        let half = core::f64::consts::FRAC_1_SQRT_2;
        let beta_cum = |a: f64| -> f64 {
            let c = params.beta_max * params.sigma_p * libm::sqrt(core::f64::consts::PI / 2.0);
            c * (libm::erf((a - params.a_opt) / params.sigma_p * half)
                + libm::erf(params.a_opt / params.sigma_p * half))
        };
        let consumption_integral = |a: f64| -> f64 {
            if params.eta > 0.0 {
                params.d_max * (1.0 - libm::exp(-params.eta * a)) / params.eta
            } else {
                params.d_max * a
            }
        };
        let pressure_cum_fn = |a: f64| regime.pressure_ratio * beta_cum(a);
        let consumption_cum_fn =
            |a: f64| regime.root_pool / params.k_d * consumption_integral(a);

        let mut survival = Vec::with_capacity(cells + 1);
        let mut pressure_cum = Vec::with_capacity(cells + 1);
        let mut consumption_cum = Vec::with_capacity(cells + 1);
        for j in 0..=cells {
            let a = math::fmin(j as f64 * h, params.a_max);
            survival.push(regime.mortality.survival(a, params)?);
            pressure_cum.push(pressure_cum_fn(a));
            consumption_cum.push(consumption_cum_fn(a));
        }

        // G at the nodes: prefix sums of panel integrals of the source
        // kernel. The mortality hazard cancels between Psi and Theta, so the
        // integrand involves only the closed-form cumulative rates.
        let mut g = vec![0.0; cells + 1];
        if regime.pressure_ratio != 0.0 {
            let f = |z: f64| {
                regime.pressure_ratio
                    * params.beta_max
                    * libm::exp(
                        -0.5 * ((z - params.a_opt) / params.sigma_p)
                            * ((z - params.a_opt) / params.sigma_p),
                    )
                    * libm::exp(consumption_cum_fn(z) - pressure_cum_fn(z))
            };
            for j in 1..=cells {
                let lo = (j - 1) as f64 * h;
                let hi = math::fmin(j as f64 * h, params.a_max);
                g[j] = g[j - 1] + math::adaptive_simpson(&f, lo, hi, 1e-10);
            }
        }

        Ok(CharacteristicsOracle {
            recruitment: params.recruitment_m,
            s0,
            survival,
            pressure_cum,
            consumption_cum,
            g,
        })
    }

    /// Exact healthy density at node `j`, level `n`.
    pub fn healthy(&self, j: usize, n: usize) -> f64 {
        if n == 0 {
            return self.s0[j];
        }
        if n <= j {
            let j0 = j - n;
            self.s0[j0] * (self.survival[j] / self.survival[j0])
                * libm::exp(-(self.pressure_cum[j] - self.pressure_cum[j0]))
        } else {
            self.recruitment * self.survival[j] * libm::exp(-self.pressure_cum[j])
        }
    }

    /// Exact infested density at node `j`, level `n` (zero initial data).
    pub fn infected(&self, j: usize, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if n <= j {
            let j0 = j - n;
            self.s0[j0] * (self.survival[j] / self.survival[j0])
                * libm::exp(self.pressure_cum[j0] - self.consumption_cum[j])
                * (self.g[j] - self.g[j0])
        } else {
            self.recruitment * self.survival[j] * libm::exp(-self.consumption_cum[j]) * self.g[j]
        }
    }
}

/// Error norms of one frozen-regime run against the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenErrors {
    /// `max_{n,j}` over both fields.
    pub err_inf: f64,
    /// `max_n h sum_j` over both fields.
    pub err_l1: f64,
    /// Same `max_n h sum_j` norm of the oracle solution, for relative
    /// comparisons.
    pub ref_l1: f64,
}

/// Runs the scheme's cell kernels under a frozen regime and accumulates
/// error norms against the characteristics oracle.
pub fn frozen_trajectory_errors(
    params: &ModelParameters,
    regime: &FrozenRegime,
    h: f64,
    t_end: f64,
) -> Result<FrozenErrors, CoreError> {
    params.validate()?;
    let cells = age_cells(h, params.a_max)?;
    let steps_f = t_end / h;
    let steps = libm::round(steps_f) as usize;
    if steps == 0 || math::abs(steps as f64 * h - t_end) > 1e-9 * math::fmax(t_end, 1.0) {
        return Err(CoreError::Grid(alloc::format!(
            "step h={h} does not tile the horizon [0, {t_end}]"
        )));
    }
    let oracle = CharacteristicsOracle::build(params, regime, h)?;

    let mut pressure = Vec::with_capacity(cells + 1);
    let mut removal = Vec::with_capacity(cells + 1);
    let mut decay = Vec::with_capacity(cells + 1);
    for j in 0..=cells {
        let a = math::fmin(j as f64 * h, params.a_max);
        pressure.push(regime.pressure_ratio * rates::infection_rate(a, params)?);
        removal.push(regime.root_pool / params.k_d * rates::consumption_rate(a, params)?);
        decay.push(match regime.mortality {
            MortalityModel::Constant(c) => c,
            MortalityModel::PowerLaw => {
                if j == cells {
                    f64::INFINITY
                } else {
                    rates::plant_mortality(a, params)?
                }
            }
        });
    }

    let mut healthy = regime.smooth_initial(params, h)?;
    let mut infected = vec![0.0; cells + 1];
    let mut err_inf = 0.0;
    let mut err_l1 = 0.0;
    let mut ref_l1 = 0.0;
    for n in 1..=steps {
        let mut healthy_next = Vec::with_capacity(cells + 1);
        let mut infected_next = Vec::with_capacity(cells + 1);
        healthy_next.push(params.recruitment_m);
        infected_next.push(0.0);
        for j in 1..=cells {
            let s = solver::healthy_cell(healthy[j - 1], decay[j], pressure[j], h);
            let i = solver::infected_cell(infected[j - 1], s, decay[j], pressure[j], removal[j], h);
            healthy_next.push(s);
            infected_next.push(i);
        }
        healthy = healthy_next;
        infected = infected_next;

        let mut sum_err = 0.0;
        let mut sum_ref = 0.0;
        for j in 0..=cells {
            let sx = oracle.healthy(j, n);
            let ix = oracle.infected(j, n);
            let ds = math::abs(healthy[j] - sx);
            let di = math::abs(infected[j] - ix);
            err_inf = math::fmax(err_inf, math::fmax(ds, di));
            sum_err += ds + di;
            sum_ref += math::abs(sx) + math::abs(ix);
        }
        err_l1 = math::fmax(err_l1, h * sum_err);
        ref_l1 = math::fmax(ref_l1, h * sum_ref);
    }
    Ok(FrozenErrors {
        err_inf,
        err_l1,
        ref_l1,
    })
}

/// Errors across a refinement ladder with the fitted convergence order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Strictly decreasing step sizes.
    pub step_sizes: Vec<f64>,
    /// `max_{n,j}` errors per step size.
    pub errors_inf: Vec<f64>,
    /// `max_n h sum_j` errors per step size.
    pub errors_l1: Vec<f64>,
    /// Fitted order in the sup norm.
    pub order_inf: f64,
    /// Fitted order in the summed norm.
    pub order_l1: f64,
    /// Both error sequences decreased monotonically; a false value flags
    /// noise (for example near machine precision), not failure.
    pub monotone: bool,
}

fn check_step_ladder(step_sizes: &[f64]) -> Result<(), CoreError> {
    if step_sizes.len() < 3 {
        return Err(CoreError::UnsupportedCase(String::from(
            "convergence study needs at least three step sizes",
        )));
    }
    for pair in step_sizes.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(CoreError::UnsupportedCase(String::from(
                "step sizes must be strictly decreasing",
            )));
        }
    }
    if !step_sizes.iter().all(|&h| h > 0.0 && h.is_finite()) {
        return Err(CoreError::UnsupportedCase(String::from(
            "step sizes must be positive and finite",
        )));
    }
    Ok(())
}

fn fit_report(
    step_sizes: &[f64],
    errors_inf: Vec<f64>,
    errors_l1: Vec<f64>,
) -> Result<ConvergenceReport, CoreError> {
    let order_inf = math::log_log_slope(step_sizes, &errors_inf)?;
    let order_l1 = math::log_log_slope(step_sizes, &errors_l1)?;
    let monotone = errors_inf.windows(2).all(|w| w[1] < w[0])
        && errors_l1.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport {
        step_sizes: step_sizes.into(),
        errors_inf,
        errors_l1,
        order_inf,
        order_l1,
        monotone,
    })
}

/// Convergence of the frozen-regime scheme against the characteristics
/// oracle across a ladder of step sizes.
pub fn frozen_convergence(
    params: &ModelParameters,
    regime: &FrozenRegime,
    step_sizes: &[f64],
    t_end: f64,
) -> Result<ConvergenceReport, CoreError> {
    check_step_ladder(step_sizes)?;
    let mut errors_inf = Vec::with_capacity(step_sizes.len());
    let mut errors_l1 = Vec::with_capacity(step_sizes.len());
    for &h in step_sizes {
        let e = frozen_trajectory_errors(params, regime, h, t_end)?;
        errors_inf.push(e.err_inf);
        errors_l1.push(e.err_l1);
    }
    fit_report(step_sizes, errors_inf, errors_l1)
}

/// Self-convergence of the fully coupled system against a reference run at
/// a quarter of the finest step. `build_initial` must produce grid-aligned
/// initial data for any requested resolution (so that coarse initial data
/// are restrictions of fine ones).
pub fn self_convergence<F>(
    params: &ModelParameters,
    build_initial: &F,
    schedule: Option<&ControlSchedule>,
    t_end: f64,
    step_sizes: &[f64],
) -> Result<ConvergenceReport, CoreError>
where
    F: Fn(usize, f64) -> Result<DiscreteState, CoreError>,
{
    check_step_ladder(step_sizes)?;
    let h_min = step_sizes[step_sizes.len() - 1];
    for &h in step_sizes {
        let ratio = h / h_min;
        if math::abs(libm::round(ratio) - ratio) > 1e-9 {
            return Err(CoreError::UnsupportedCase(String::from(
                "every step size must be an integer multiple of the smallest",
            )));
        }
    }
    let h_ref = h_min / 4.0;
    let table_ref = RateTable::sample(h_ref, params)?;
    let config_ref = SolverConfig::new(h_ref, t_end);
    let dims_ref = config_ref.dims(params)?;

    // March the reference run, keeping fields only at times that are
    // multiples of the smallest study step (all comparison times are).
    let keep_stride = libm::round(h_min / h_ref) as usize;
    let mut kept: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(dims_ref.steps / keep_stride + 1);
    let initial_ref = build_initial(dims_ref.cells, h_ref)?;
    initial_ref.check(dims_ref.cells)?;
    let mut state = initial_ref;
    state.time_index = 0;
    kept.push((state.healthy.clone(), state.infected.clone()));
    let mut agg = solver::aggregates(&state, &table_ref, params);
    for n in 1..=dims_ref.steps {
        state = solver::step(&state, &agg, &table_ref, params, schedule, &config_ref)?;
        agg = solver::aggregates(&state, &table_ref, params);
        if n % keep_stride == 0 {
            kept.push((state.healthy.clone(), state.infected.clone()));
        }
    }

    let mut errors_inf = Vec::with_capacity(step_sizes.len());
    let mut errors_l1 = Vec::with_capacity(step_sizes.len());
    for &h in step_sizes {
        let table = RateTable::sample(h, params)?;
        let config = SolverConfig::new(h, t_end);
        let dims = config.dims(params)?;
        let initial = build_initial(dims.cells, h)?;
        let traj = solver::simulate(&initial, &table, params, schedule, &config)?;
        let age_stride = libm::round(h / h_ref) as usize;
        let time_stride = libm::round(h / h_min) as usize;
        let mut err_inf = 0.0;
        let mut err_l1 = 0.0;
        for n in 0..=dims.steps {
            let (ref_s, ref_i) = &kept[n * time_stride];
            let coarse = &traj.states[n];
            let mut sum = 0.0;
            for j in 0..=dims.cells {
                let ds = math::abs(coarse.healthy[j] - ref_s[j * age_stride]);
                let di = math::abs(coarse.infected[j] - ref_i[j * age_stride]);
                err_inf = math::fmax(err_inf, math::fmax(ds, di));
                sum += ds + di;
            }
            err_l1 = math::fmax(err_l1, h * sum);
        }
        errors_inf.push(err_inf);
        errors_l1.push(err_l1);
    }
    fit_report(step_sizes, errors_inf, errors_l1)
}

/// Per-step outcome of the invariant audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepAudit {
    /// All grid entries and both pools `>= 0`.
    pub nonnegative: bool,
    /// `max_j S_j` and `max_j (S_j + I_j)` within the uniform plant bound.
    pub plant_bound: bool,
    /// Standing biomass within `P0 + m T`.
    pub biomass_bound: bool,
    /// Combined nematode pools within the exponential envelope.
    pub nematode_bound: bool,
    /// `B <= P` and the aggregate magnitude bounds.
    pub aggregate_bounds: bool,
}

impl StepAudit {
    /// No violation at this step.
    pub fn clean(&self) -> bool {
        self.nonnegative
            && self.plant_bound
            && self.biomass_bound
            && self.nematode_bound
            && self.aggregate_bounds
    }
}

/// Invariant audit across a whole trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantAuditReport {
    /// Uniform plant-density bound `max(m, ||S0|| + ||I0||)`.
    pub plant_cap: f64,
    /// Biomass bound `P0 + m T`.
    pub biomass_cap: f64,
    /// Nematode-pool bound (may be `+inf`; the bound still holds).
    pub nematode_cap: f64,
    /// One audit per recorded step.
    pub steps: Vec<StepAudit>,
    /// Earliest step with any violation.
    pub first_violation: Option<usize>,
}

impl InvariantAuditReport {
    /// True when every step is clean.
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn within(value: f64, limit: f64) -> bool {
    value <= limit * (1.0 + 1e-9) + f64::MIN_POSITIVE
}

/// Checks positivity and every proved bound at every recorded step.
pub fn invariant_audit(traj: &Trajectory, params: &ModelParameters) -> InvariantAuditReport {
    let initial = &traj.states[0];
    let sup = |v: &[f64]| v.iter().fold(0.0, |m, &x| math::fmax(m, x));
    let plant_cap = math::fmax(
        params.recruitment_m,
        sup(&initial.healthy) + sup(&initial.infected),
    );
    let horizon = traj.steps() as f64 * traj.h;
    let biomass_cap = traj.aggregates[0].total_biomass + params.recruitment_m * horizon;
    let pools_initial = initial.free_nematodes + initial.infesting_nematodes;
    let nematode_cap = if params.rho * params.d_max == 0.0 {
        pools_initial + params.gamma * horizon * params.a_max * plant_cap
    } else {
        let offset = params.gamma * params.k_d / (params.rho * params.d_max);
        let rate = params.rho * params.a_max * params.d_max * plant_cap / params.k_d;
        libm::exp(horizon * rate) * (pools_initial + offset) - offset
    };

    let mut steps = Vec::with_capacity(traj.states.len());
    let mut first_violation = None;
    for (n, state) in traj.states.iter().enumerate() {
        let agg = &traj.aggregates[n];
        let nonnegative = state
            .healthy
            .iter()
            .chain(state.infected.iter())
            .all(|&v| v >= 0.0)
            && state.free_nematodes >= 0.0
            && state.infesting_nematodes >= 0.0;
        let mut max_s = 0.0;
        let mut max_p = 0.0;
        for (s, i) in state.healthy.iter().zip(state.infected.iter()) {
            max_s = math::fmax(max_s, *s);
            max_p = math::fmax(max_p, s + i);
        }
        let plant_bound = within(max_s, plant_cap) && within(max_p, plant_cap);
        let biomass_bound = within(agg.total_biomass, biomass_cap);
        let nematode_bound = within(
            state.free_nematodes + state.infesting_nematodes,
            nematode_cap,
        );
        let aggregate_bounds = within(agg.infected_biomass, agg.total_biomass)
            && within(agg.infected_biomass, params.a_max * plant_cap)
            && within(
                agg.infection_weighted,
                params.a_max * (1.0 + params.e_reinfect) * params.beta_max * plant_cap,
            )
            && within(
                agg.consumption_weighted,
                params.a_max * params.d_max * plant_cap,
            );
        let audit = StepAudit {
            nonnegative,
            plant_bound,
            biomass_bound,
            nematode_bound,
            aggregate_bounds,
        };
        if !audit.clean() && first_violation.is_none() {
            first_violation = Some(n);
        }
        steps.push(audit);
    }
    InvariantAuditReport {
        plant_cap,
        biomass_cap,
        nematode_cap,
        steps,
        first_violation,
    }
}

/// Long-run fate of an infestation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticVerdict {
    /// Nematode pools and infested biomass collapsed below resolution.
    Extinction,
    /// The root-dwelling pool held near its running peak.
    Persistence,
    /// Neither criterion met within the horizon.
    Inconclusive,
}

impl AsymptoticVerdict {
    /// Lowercase label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            AsymptoticVerdict::Extinction => "extinction",
            AsymptoticVerdict::Persistence => "persistence",
            AsymptoticVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of a stability experiment: simulated asymptotics next to the
/// threshold-analysis prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOutcome {
    /// Measured fate.
    pub verdict: AsymptoticVerdict,
    /// Basic reproduction number of the same parameters.
    pub n_basic: f64,
    /// Fate predicted by `sign(N - 1)`.
    pub predicted: AsymptoticVerdict,
    /// Measured fate matches the prediction.
    pub agrees: bool,
    /// Combined nematode pools at start and end.
    pub pools_initial: f64,
    /// Combined pools at the final step.
    pub pools_final: f64,
    /// Infested biomass at the final step.
    pub infected_mass_final: f64,
    /// Healthy biomass at the final step.
    pub healthy_mass_final: f64,
    /// Running peak of the root-dwelling pool.
    pub infesting_peak: f64,
    /// Root-dwelling pool at the final step.
    pub infesting_final: f64,
}

/// Simulates to the horizon and classifies the outcome: extinction when the
/// pools fall six orders below their start and infested biomass six orders
/// below healthy biomass; persistence when the root-dwelling pool ends
/// within two orders of its peak.
pub fn stability_experiment(
    initial: &DiscreteState,
    table: &RateTable,
    params: &ModelParameters,
    schedule: Option<&ControlSchedule>,
    config: &SolverConfig,
    grid: &QuadratureGrid,
) -> Result<StabilityOutcome, CoreError> {
    let n_basic = thresholds::basic_reproduction_number(params, grid)?;
    let traj = solver::simulate(initial, table, params, schedule, config)?;

    let pools_initial = initial.free_nematodes + initial.infesting_nematodes;
    let last = traj.last();
    let pools_final = last.free_nematodes + last.infesting_nematodes;
    let agg_final = traj
        .aggregates
        .last()
        .expect("trajectory holds at least one aggregate");
    let infected_mass_final = agg_final.infected_biomass;
    let healthy_mass_final = agg_final.total_biomass - agg_final.infected_biomass;
    let infesting_peak = traj
        .states
        .iter()
        .fold(0.0, |m, s| math::fmax(m, s.infesting_nematodes));
    let infesting_final = last.infesting_nematodes;

    let pools_collapsed = if pools_initial > 0.0 {
        pools_final < 1e-6 * pools_initial
    } else {
        pools_final == 0.0
    };
    let mass_collapsed = infected_mass_final < 1e-6 * healthy_mass_final;
    let verdict = if pools_collapsed && mass_collapsed {
        AsymptoticVerdict::Extinction
    } else if infesting_peak > 0.0 && infesting_final > 1e-2 * infesting_peak {
        AsymptoticVerdict::Persistence
    } else {
        AsymptoticVerdict::Inconclusive
    };
    let predicted = if n_basic < 1.0 {
        AsymptoticVerdict::Extinction
    } else if n_basic > 1.0 {
        AsymptoticVerdict::Persistence
    } else {
        AsymptoticVerdict::Inconclusive
    };
    Ok(StabilityOutcome {
        verdict,
        n_basic,
        predicted,
        agrees: verdict == predicted,
        pools_initial,
        pools_final,
        infected_mass_final,
        healthy_mass_final,
        infesting_peak,
        infesting_final,
    })
}

/// Sup-norm drift of the pest-free steady profile under the scheme: the
/// initial data `m pi(a_j)` is an exact equilibrium of the continuous
/// problem, so the largest deviation over the run measures the pure
/// discretisation residual and shrinks like O(h).
pub fn steady_state_residual(
    params: &ModelParameters,
    h: f64,
    t_end: f64,
) -> Result<f64, CoreError> {
    let table = RateTable::sample(h, params)?;
    let cells = table.cells;
    let mut steady = Vec::with_capacity(cells + 1);
    for j in 0..=cells {
        let a = math::fmin(j as f64 * h, params.a_max);
        steady.push(params.recruitment_m * rates::survival_probability(a, params)?);
    }
    let initial = DiscreteState::initial(steady.clone(), vec![0.0; cells + 1], 0.0, 0.0);
    let config = SolverConfig::new(h, t_end);
    let traj = solver::simulate(&initial, &table, params, None, &config)?;
    let mut residual = 0.0;
    for state in &traj.states[1..] {
        for (value, reference) in state.healthy.iter().zip(&steady) {
            residual = math::fmax(residual, math::abs(value - reference));
        }
    }
    Ok(residual)
}
