//! Pest-free equilibrium and invasion thresholds.
//!
//! The pest-free steady state is `S0(a) = m pi(a)` with `pi` the survival
//! function. Linearising the infestation loop around it yields:
//!
//! * the return-pressure rate `sigma = alpha ||beta S0|| / ||S0||`,
//! * the basic reproduction number `N = K(0)` where
//!
//!   ```text
//!   K(lambda) = gamma m / ((sigma + mu_F + lambda) ||S0||)
//!               * int_0^{a_max} beta(z) H_lambda(z) dz,
//!   H_lambda(z) = int_z^{a_max} exp(-lambda (a - z)) pi(a) da,
//!   ```
//!
//!   the expected number of free nematodes produced per free nematode over
//!   one infestation generation,
//! * the dominant characteristic root `lambda_star` solving `K(lambda) = 1`,
//!   whose sign matches the sign of `N - 1`,
//! * the coarse global threshold `N_0` and the stand's renewal capacity.
//!
//! `K` is positive and strictly decreasing on `(-(sigma + mu_F), +inf)`,
//! rising to `+inf` at the left end of that interval and falling to `0`; left
//! of the pole it is negative, so a symmetric bracket around zero can
//! straddle the pole and never see a sign change. The root finder therefore
//! works sideways from `lambda = 0`: `N > 1` means the root lies to the
//! right and an expanding bracket `[0, hi]` suffices; `N < 1` means it lies
//! between the pole and zero, approached by halving the distance to the pole
//! until `K > 1`.
//!
//! Outer integrals use composite Simpson on a uniform grid; the inner
//! `H_lambda` is a reverse cumulative trapezoid computed by a backward
//! recurrence that factors the exponential so no large arguments ever enter
//! `exp`. Survival ratios `pi(a)/pi(z)` are cancelled analytically before
//! discretisation, so the vanishing of `pi` at `a_max` never produces `0/0`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::params::ModelParameters;
use crate::rates;

/// Uniform Simpson quadrature grid over `[0, a_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    /// Node abscissae, `0 = a_0 < ... < a_{n-1} = a_max`.
    pub nodes: Vec<f64>,
    /// Simpson weights; nonnegative, summing to `a_max`.
    pub weights: Vec<f64>,
    /// Node spacing.
    pub delta: f64,
}

impl QuadratureGrid {
    /// Composite Simpson rule with `n` nodes (odd, at least 3).
    pub fn simpson(a_max: f64, n: usize) -> Result<Self, CoreError> {
        let (nodes, weights) = math::simpson_weights(0.0, a_max, n)?;
        let delta = a_max / ((n - 1) as f64);
        Ok(QuadratureGrid {
            nodes,
            weights,
            delta,
        })
    }

    /// Default resolution used by all analyses (about 0.1-day spacing on the
    /// standard age span).
    pub fn standard(params: &ModelParameters) -> Result<Self, CoreError> {
        QuadratureGrid::simpson(params.a_max, 3001)
    }

    fn integrate(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(values.iter())
            .map(|(&w, &v)| w * v)
            .sum()
    }
}

/// Stability classification of the pest-free state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// `N < 1`: infestations die out near the pest-free state.
    Stable,
    /// `N > 1`: infestations invade.
    Unstable,
    /// `|N - 1|` below resolution.
    Marginal,
}

impl StabilityVerdict {
    /// Lowercase label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            StabilityVerdict::Stable => "stable",
            StabilityVerdict::Unstable => "unstable",
            StabilityVerdict::Marginal => "marginal",
        }
    }
}

/// Full threshold analysis output.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    /// Pest-free profile `S0(a) = m pi(a)` on the quadrature nodes.
    pub s0_profile: Vec<f64>,
    /// Return-pressure rate `sigma` (per day).
    pub sigma: f64,
    /// Basic reproduction number `N`.
    pub n_basic: f64,
    /// Coarse global-stability threshold `N_0`.
    pub n0_threshold: f64,
    /// Dominant characteristic root (per day).
    pub lambda_star: f64,
    /// Renewal capacity `(m / b) int pi`.
    pub renewal_ratio: f64,
    /// Classification from `N` against 1.
    pub verdict: StabilityVerdict,
}

/// Pest-free steady-state profile on the quadrature nodes.
pub fn disease_free_state(
    params: &ModelParameters,
    grid: &QuadratureGrid,
) -> Result<Vec<f64>, CoreError> {
    grid.nodes
        .iter()
        .map(|&a| Ok(params.recruitment_m * rates::survival_probability(a, params)?))
        .collect()
}

/// Return-pressure rate `sigma = alpha int beta S0 / int S0`.
pub fn sigma_rate(params: &ModelParameters, grid: &QuadratureGrid) -> Result<f64, CoreError> {
    if params.recruitment_m == 0.0 {
        return Err(CoreError::DegenerateEquilibrium);
    }
    let s0 = disease_free_state(params, grid)?;
    let mut weighted = Vec::with_capacity(s0.len());
    for (&a, &v) in grid.nodes.iter().zip(s0.iter()) {
        weighted.push(rates::infection_rate(a, params)? * v);
    }
    let denom = grid.integrate(&s0);
    if !(denom > 0.0) {
        return Err(CoreError::DegenerateEquilibrium);
    }
    Ok(params.alpha * grid.integrate(&weighted) / denom)
}

/// `K(lambda)` evaluated on the grid; the generation gain of the linearised
/// infestation loop. Defined for `lambda > -(sigma + mu_F)`.
pub fn growth_kernel(
    params: &ModelParameters,
    grid: &QuadratureGrid,
    lambda: f64,
) -> Result<f64, CoreError> {
    let sigma = sigma_rate(params, grid)?;
    growth_kernel_with_sigma(params, grid, sigma, lambda)
}

fn growth_kernel_with_sigma(
    params: &ModelParameters,
    grid: &QuadratureGrid,
    sigma: f64,
    lambda: f64,
) -> Result<f64, CoreError> {
    let n = grid.nodes.len();
    let mut pi = Vec::with_capacity(n);
    for &a in &grid.nodes {
        pi.push(rates::survival_probability(a, params)?);
    }
    // Backward trapezoid recurrence for H_lambda on the uniform grid; the
    // exponential is factored per panel so its argument stays O(delta).
    let decay = libm::exp(-lambda * grid.delta);
    let mut h_table = alloc::vec![0.0; n];
    for i in (0..n - 1).rev() {
        h_table[i] = 0.5 * grid.delta * (pi[i] + decay * pi[i + 1]) + decay * h_table[i + 1];
    }
    let mut integrand = Vec::with_capacity(n);
    for (node, tail) in grid.nodes.iter().zip(&h_table) {
        integrand.push(rates::infection_rate(*node, params)? * tail);
    }
    let s0 = disease_free_state(params, grid)?;
    let s0_norm = grid.integrate(&s0);
    if !(s0_norm > 0.0) {
        return Err(CoreError::DegenerateEquilibrium);
    }
    let pole = sigma + params.mu_f + lambda;
    if !(pole > 0.0) {
        return Err(CoreError::Numerical(String::from(
            "growth kernel evaluated at or left of its pole",
        )));
    }
    Ok(params.gamma * params.recruitment_m * grid.integrate(&integrand) / (pole * s0_norm))
}

/// Basic reproduction number `N = K(0)`.
pub fn basic_reproduction_number(
    params: &ModelParameters,
    grid: &QuadratureGrid,
) -> Result<f64, CoreError> {
    growth_kernel(params, grid, 0.0)
}

/// Dominant real characteristic root: the unique solution of
/// `K(lambda) = 1`, located by monotone bisection on the side of zero that
/// `N` dictates. Resolved to `|K(lambda) - 1| <= 1e-10`.
pub fn characteristic_root(
    params: &ModelParameters,
    grid: &QuadratureGrid,
) -> Result<f64, CoreError> {
    let sigma = sigma_rate(params, grid)?;
    let eval = |lambda: f64| growth_kernel_with_sigma(params, grid, sigma, lambda);
    let at_zero = eval(0.0)?;
    if math::abs(at_zero - 1.0) <= 1e-12 {
        return Ok(0.0);
    }

    let pole = -(sigma + params.mu_f);
    let (mut lo, mut hi) = if at_zero > 1.0 {
        // Root to the right of zero: expand until K drops below 1.
        let mut hi = sigma + params.mu_f + 1.0;
        loop {
            if eval(hi)? < 1.0 {
                break;
            }
            hi *= 2.0;
            if hi > 1e6 {
                return Err(CoreError::Numerical(String::from(
                    "characteristic-root bracket exceeded 1e6 per day",
                )));
            }
        }
        (0.0, hi)
    } else {
        // Root between the pole and zero: step toward the pole, where K
        // blows up, halving the remaining distance until K exceeds 1.
        let mut delta = 0.5 * (sigma + params.mu_f);
        loop {
            let candidate = pole + delta;
            if eval(candidate)? > 1.0 {
                break;
            }
            delta *= 0.5;
            if delta < 1e-300 {
                return Err(CoreError::Numerical(String::from(
                    "characteristic root pinned against the kernel pole",
                )));
            }
        }
        (pole + delta, 0.0)
    };

    // K is strictly decreasing, so bisection on K - 1 converges; iterate on
    // the residual rather than the interval width.
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let value = eval(mid)?;
        if math::abs(value - 1.0) <= 1e-10 {
            return Ok(mid);
        }
        if value > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(CoreError::Numerical(String::from(
        "characteristic-root bisection failed to meet tolerance",
    )))
}

/// Coarse global threshold `N_0 = (e alpha beta_min + mu_F) b /
/// ((sigma + mu_F) ||S0||)` with `beta_min` the infimum of the Gaussian
/// profile over `[0, a_max]`, attained at an endpoint.
pub fn global_stability_threshold(
    params: &ModelParameters,
    grid: &QuadratureGrid,
) -> Result<f64, CoreError> {
    let sigma = sigma_rate(params, grid)?;
    let beta_min = math::fmin(
        rates::infection_rate(0.0, params)?,
        rates::infection_rate(params.a_max, params)?,
    );
    let s0 = disease_free_state(params, grid)?;
    let s0_norm = grid.integrate(&s0);
    Ok((params.e_reinfect * params.alpha * beta_min + params.mu_f) * params.b_floor
        / ((sigma + params.mu_f) * s0_norm))
}

/// Renewal capacity `(m / b) int_0^{a_max} pi`.
pub fn renewal_capacity(
    params: &ModelParameters,
    grid: &QuadratureGrid,
) -> Result<f64, CoreError> {
    let mut pi = Vec::with_capacity(grid.nodes.len());
    for &a in &grid.nodes {
        pi.push(rates::survival_probability(a, params)?);
    }
    Ok(params.recruitment_m / params.b_floor * grid.integrate(&pi))
}

/// Runs the whole analysis.
pub fn threshold_report(
    params: &ModelParameters,
    grid: &QuadratureGrid,
) -> Result<ThresholdReport, CoreError> {
    params.validate()?;
    let s0_profile = disease_free_state(params, grid)?;
    let sigma = sigma_rate(params, grid)?;
    let n_basic = basic_reproduction_number(params, grid)?;
    let n0_threshold = global_stability_threshold(params, grid)?;
    let lambda_star = characteristic_root(params, grid)?;
    let renewal_ratio = renewal_capacity(params, grid)?;
    let verdict = if math::abs(n_basic - 1.0) <= 1e-9 {
        StabilityVerdict::Marginal
    } else if n_basic < 1.0 {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::Unstable
    };
    Ok(ThresholdReport {
        s0_profile,
        sigma,
        n_basic,
        n0_threshold,
        lambda_star,
        renewal_ratio,
        verdict,
    })
}
