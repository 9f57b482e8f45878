//! Age-dependent rates of the model and their derived quantities.
//!
//! Three closed-form families drive the dynamics:
//!
//! * infection susceptibility `beta(a) = beta_max * exp(-(a-a_opt)^2 / (2 sigma_p^2))`,
//!   a Gaussian peaking at the most vulnerable age;
//! * root consumption `d(a) = d_max * exp(-eta a)`, largest for seedlings and
//!   decaying with root maturity;
//! * plant mortality `mu(a) = mu_alpha0 / (a_max - a)^{mu_exp}`, increasing and
//!   divergent at the terminal age so no plant outlives `a_max`.
//!
//! The survival function `pi(a) = exp(-int_0^a mu)` has a closed form for the
//! power-law family and is used directly wherever it feeds equilibrium or
//! threshold computations; numerical quadrature of `mu` exists only as a test
//! oracle. The divergence at `a_max` is represented by an infinite-rate
//! sentinel: grid samples place `+inf` at the last node, and the solver's
//! implicit updates turn that into an exact zero without producing NaN.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::params::ModelParameters;

/// Plant mortality law. The power law is the production model; the constant
/// override exists for verification runs where a closed-form reference
/// solution needs a bounded rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MortalityModel {
    /// `mu(a) = mu_alpha0 / (a_max - a)^{mu_exp}`, divergent at `a_max`.
    PowerLaw,
    /// `mu(a) = c` for all ages below `a_max`; the sentinel still applies at
    /// `a_max` so terminal removal is preserved.
    Constant(f64),
}

impl MortalityModel {
    /// Mortality rate at age `a`; `+inf` sentinel at and beyond `a_max`.
    pub fn rate(&self, a: f64, p: &ModelParameters) -> Result<f64, CoreError> {
        if a < 0.0 || !a.is_finite() {
            return Err(CoreError::Domain { age: a, a_max: p.a_max });
        }
        if a >= p.a_max {
            return Ok(f64::INFINITY);
        }
        match *self {
            MortalityModel::PowerLaw => Ok(p.mu_alpha0 / libm::pow(p.a_max - a, p.mu_exp)),
            MortalityModel::Constant(c) => Ok(c),
        }
    }

    /// Survival probability `exp(-int_0^a mu(s) ds)` via the closed-form
    /// antiderivative. Zero at `a_max` whenever the cumulative hazard
    /// diverges (power law with positive scale) and continuous otherwise.
    pub fn survival(&self, a: f64, p: &ModelParameters) -> Result<f64, CoreError> {
        if a < 0.0 || a > p.a_max || !a.is_finite() {
            return Err(CoreError::Domain { age: a, a_max: p.a_max });
        }
        match *self {
            MortalityModel::Constant(c) => Ok(libm::exp(-c * a)),
            MortalityModel::PowerLaw => {
                if p.mu_alpha0 == 0.0 {
                    return Ok(1.0);
                }
                if p.mu_exp == 1.0 {
                    // int mu = alpha0 * ln(a_max/(a_max-a)).
                    Ok(libm::pow((p.a_max - a) / p.a_max, p.mu_alpha0))
                } else {
                    if a >= p.a_max {
                        return Ok(0.0);
                    }
                    let one_minus_m = 1.0 - p.mu_exp;
                    let integral = p.mu_alpha0
                        * (libm::pow(p.a_max - a, one_minus_m) - libm::pow(p.a_max, one_minus_m))
                        / (p.mu_exp - 1.0);
                    Ok(libm::exp(-integral))
                }
            }
        }
    }
}

/// Gaussian infection-susceptibility rate `beta(a)`.
pub fn infection_rate(a: f64, p: &ModelParameters) -> Result<f64, CoreError> {
    if a < 0.0 || a > p.a_max || !a.is_finite() {
        return Err(CoreError::Domain { age: a, a_max: p.a_max });
    }
    let z = (a - p.a_opt) / p.sigma_p;
    Ok(p.beta_max * libm::exp(-0.5 * z * z))
}

/// Exponentially decaying consumption rate `d(a)`.
pub fn consumption_rate(a: f64, p: &ModelParameters) -> Result<f64, CoreError> {
    if a < 0.0 || a > p.a_max || !a.is_finite() {
        return Err(CoreError::Domain { age: a, a_max: p.a_max });
    }
    Ok(p.d_max * libm::exp(-p.eta * a))
}

/// Power-law plant mortality `mu(a)`; `+inf` sentinel at `a >= a_max`.
pub fn plant_mortality(a: f64, p: &ModelParameters) -> Result<f64, CoreError> {
    MortalityModel::PowerLaw.rate(a, p)
}

/// Survival probability to age `a` under the power-law mortality.
pub fn survival_probability(a: f64, p: &ModelParameters) -> Result<f64, CoreError> {
    MortalityModel::PowerLaw.survival(a, p)
}

/// Saturating bunch-weight curve `theta(a) = theta_max * a / (a + a_0)`.
pub fn bunch_weight(a: f64, p: &ModelParameters) -> Result<f64, CoreError> {
    if a < 0.0 || !a.is_finite() {
        return Err(CoreError::Domain { age: a, a_max: p.a_max });
    }
    Ok(p.theta_max * a / (a + p.a_0))
}

/// All three rate profiles sampled on the shared age grid `a_j = j h`,
/// `j = 0..=cells`, with the infinite-mortality sentinel at the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// Grid step (days); also the time step of the solver.
    pub h: f64,
    /// Number of age cells `M`, so profiles have `M + 1` entries.
    pub cells: usize,
    /// `beta(a_j)`.
    pub infection: Vec<f64>,
    /// `d(a_j)`.
    pub consumption: Vec<f64>,
    /// `mu(a_j)`; the entry at `j = cells` is `+inf`.
    pub mortality: Vec<f64>,
    /// `theta(a_j)`.
    pub bunch: Vec<f64>,
}

impl RateTable {
    /// Samples all profiles. `h` must tile `[0, a_max]` exactly (up to a
    /// 1e-9 relative slack on the endpoint).
    pub fn sample(h: f64, p: &ModelParameters) -> Result<Self, CoreError> {
        Self::sample_with_mortality(h, p, MortalityModel::PowerLaw)
    }

    /// Same as [`RateTable::sample`] with an explicit mortality law.
    pub fn sample_with_mortality(
        h: f64,
        p: &ModelParameters,
        mortality_model: MortalityModel,
    ) -> Result<Self, CoreError> {
        let cells = age_cells(h, p.a_max)?;
        let mut infection = Vec::with_capacity(cells + 1);
        let mut consumption = Vec::with_capacity(cells + 1);
        let mut mortality = Vec::with_capacity(cells + 1);
        let mut bunch = Vec::with_capacity(cells + 1);
        for j in 0..=cells {
            let a = math::fmin(j as f64 * h, p.a_max);
            infection.push(infection_rate(a, p)?);
            consumption.push(consumption_rate(a, p)?);
            mortality.push(if j == cells {
                f64::INFINITY
            } else {
                mortality_model.rate(a, p)?
            });
            bunch.push(bunch_weight(a, p)?);
        }
        Ok(RateTable {
            h,
            cells,
            infection,
            consumption,
            mortality,
            bunch,
        })
    }
}

/// Number of age cells `M` such that `M h = a_max`, or a grid error when `h`
/// does not tile the age span.
pub fn age_cells(h: f64, a_max: f64) -> Result<usize, CoreError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(CoreError::Grid(String::from("step h must be positive and finite")));
    }
    let ratio = a_max / h;
    let cells = libm::round(ratio) as usize;
    if cells == 0 || math::abs(cells as f64 * h - a_max) > 1e-9 * math::fmax(a_max, 1.0) {
        return Err(CoreError::Grid(alloc::format!(
            "step h={h} does not tile the age span [0, {a_max}]"
        )));
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> ModelParameters {
        ModelParameters::baseline()
    }

    #[test]
    fn infection_rate_peaks_at_optimum_age() {
        let p = p();
        assert_relative_eq!(infection_rate(p.a_opt, &p).unwrap(), p.beta_max);
        assert_relative_eq!(
            infection_rate(p.a_opt + p.sigma_p, &p).unwrap(),
            p.beta_max * libm::exp(-0.5),
            max_relative = 1e-15
        );
        let mut zeroed = p;
        zeroed.beta_max = 0.0;
        assert_eq!(infection_rate(37.0, &zeroed).unwrap(), 0.0);
    }

    #[test]
    fn consumption_rate_decays_from_d_max() {
        let p = p();
        assert_relative_eq!(consumption_rate(0.0, &p).unwrap(), p.d_max);
        assert_relative_eq!(
            consumption_rate(1.0, &p).unwrap(),
            1e-4 * libm::exp(-2.5),
            max_relative = 1e-15
        );
        let mut flat = p;
        flat.eta = 0.0;
        assert_eq!(consumption_rate(123.0, &flat).unwrap(), flat.d_max);
    }

    #[test]
    fn mortality_matches_power_law_and_sentinel() {
        let p = p();
        assert_relative_eq!(plant_mortality(299.0, &p).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            plant_mortality(0.0, &p).unwrap(),
            1.0 / libm::pow(300.0, 3.0),
            max_relative = 1e-15
        );
        assert_eq!(plant_mortality(p.a_max, &p).unwrap(), f64::INFINITY);
        assert!(plant_mortality(-1.0, &p).is_err());
    }

    #[test]
    fn survival_closed_form_values() {
        let p = p();
        assert_eq!(survival_probability(0.0, &p).unwrap(), 1.0);
        // exp(-(150^-2 - 300^-2)/2) for the cubic law.
        let expected = libm::exp(-(libm::pow(150.0, -2.0) - libm::pow(300.0, -2.0)) / 2.0);
        assert_relative_eq!(
            survival_probability(150.0, &p).unwrap(),
            expected,
            max_relative = 1e-15
        );
        assert_eq!(survival_probability(p.a_max, &p).unwrap(), 0.0);
    }

    #[test]
    fn survival_constant_override_is_exponential() {
        let p = p();
        let m = MortalityModel::Constant(0.03);
        assert_relative_eq!(
            m.survival(40.0, &p).unwrap(),
            libm::exp(-0.03 * 40.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn survival_log_mortality_exponent_one() {
        let mut p = p();
        p.mu_exp = 1.0;
        p.mu_alpha0 = 2.0;
        // pi(a) = ((a_max-a)/a_max)^2.
        assert_relative_eq!(
            survival_probability(75.0, &p).unwrap(),
            libm::pow(225.0 / 300.0, 2.0),
            max_relative = 1e-15
        );
        assert_eq!(survival_probability(300.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn survival_is_bounded_by_initial_hazard_envelope() {
        // pi(a) <= exp(-mu(0) a) for increasing mu.
        let p = p();
        let mu0 = plant_mortality(0.0, &p).unwrap();
        let mut a = 0.0;
        while a <= p.a_max {
            let pi = survival_probability(a, &p).unwrap();
            assert!(pi <= libm::exp(-mu0 * a) + 1e-15, "a={a}");
            a += 7.5;
        }
    }

    #[test]
    fn survival_ratio_identity_holds_on_mesh() {
        // pi(a)/pi(a-t) <= pi(t) for 0 <= t <= a: leftover hazard of an aged
        // plant exceeds that of a young one when mu is increasing.
        let p = p();
        let mesh = [0.0, 12.5, 50.0, 137.5, 200.0, 262.5, 287.5];
        for &a in &mesh {
            for &t in &mesh {
                if t > a {
                    continue;
                }
                let pa = survival_probability(a, &p).unwrap();
                let pat = survival_probability(a - t, &p).unwrap();
                let pt = survival_probability(t, &p).unwrap();
                if pat > 0.0 {
                    assert!(pa / pat <= pt + 1e-12, "a={a} t={t}");
                }
            }
        }
    }

    #[test]
    fn survival_agrees_with_trapezoid_quadrature() {
        // Singular endpoint excluded: integrate mu on [0, a] for a <= a_max-h.
        let p = p();
        let targets = [30.0, 150.0, 240.0, 299.0];
        for &a in &targets {
            let n = 200_000usize;
            let dh = a / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * plant_mortality(dh * i as f64, &p).unwrap();
            }
            let quad = libm::exp(-acc * dh);
            assert_relative_eq!(
                survival_probability(a, &p).unwrap(),
                quad,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn bunch_weight_saturates() {
        let p = p();
        assert_eq!(bunch_weight(0.0, &p).unwrap(), 0.0);
        assert_relative_eq!(bunch_weight(p.a_0, &p).unwrap(), p.theta_max / 2.0);
        assert_relative_eq!(
            bunch_weight(300.0, &p).unwrap(),
            35.0 * 300.0 / 570.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn rate_table_grid_shape_and_sentinel() {
        let p = p();
        let t = RateTable::sample(100.0, &p).unwrap();
        assert_eq!(t.cells, 3);
        assert_eq!(t.infection.len(), 4);
        assert_eq!(t.mortality[3], f64::INFINITY);
        for j in 0..3 {
            assert!(t.mortality[j].is_finite());
            assert!(t.mortality[j] >= 0.0);
            assert!(t.infection[j] >= 0.0);
            assert!(t.consumption[j] >= 0.0);
        }
        // mu strictly increasing over the finite part.
        assert!(t.mortality[0] < t.mortality[1] && t.mortality[1] < t.mortality[2]);
        // beta's max sits at the node nearest a_opt = 5.5, which is age 0 here.
        let argmax = t
            .infection
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 0);
        assert!(RateTable::sample(7.0, &p).is_err());
    }

    #[test]
    fn fine_grid_beta_peak_near_a_opt() {
        let p = p();
        let t = RateTable::sample(0.5, &p).unwrap();
        let argmax = t
            .infection
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_relative_eq!(argmax as f64 * 0.5, 5.5);
    }
}
