//! Scenario configuration files.
//!
//! Flat key-value text with section headers, one key per line, `#`
//! comments. Every model symbol appears by name next to its value:
//!
//! ```text
//! [parameters]
//! recruitment_m = 300
//! beta_max = 7e-5
//! # ... all rate and threshold constants ...
//!
//! [solver]
//! h = 1
//! t_end = 550
//!
//! [initial]
//! profile = spike-at-zero
//! value = 100
//! n_f0 = 10000
//! ```
//!
//! Parsing is strict: unknown sections or keys, duplicate keys, malformed
//! numbers and missing required keys are all rejected with line-anchored
//! messages. Semantic constraints (parameter ranges, grid alignment) are
//! deliberately left to the model library so that they surface as
//! validation failures, not parse failures.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use nemasim_core::{ControlSchedule, ModelParameters, SolverConfig};

/// Parse failure with the offending line when one exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number; `None` for whole-file problems such as a
    /// missing section or key.
    pub line: Option<usize>,
    /// Human-readable description naming the section/key involved.
    pub message: String,
}

impl ParseError {
    fn at(line: usize, message: String) -> Self {
        ParseError {
            line: Some(line),
            message,
        }
    }

    fn whole(message: String) -> Self {
        ParseError {
            line: None,
            message,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ParseError {}

/// Initial-condition profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// All initial plant mass in the first two age cells, scaled so the
    /// right-endpoint biomass equals `value` at any step size.
    SpikeAtZero {
        /// Total initial biomass.
        value: f64,
    },
    /// Pest-free equilibrium profile `m pi(a_j)`.
    SteadyState,
    /// Fields read from a CSV file with columns `age,S,I`.
    File {
        /// Path, resolved relative to the working directory.
        path: PathBuf,
    },
}

/// Parsed `[initial]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    /// Plant-field profile.
    pub profile: InitialProfile,
    /// Free nematode inoculum.
    pub n_f0: f64,
    /// Root-dwelling inoculum.
    pub n_i0: f64,
}

/// Parsed `[analysis]` block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisToggles {
    /// Write `thresholds.txt` after a scenario run.
    pub thresholds: bool,
    /// Write `audit.txt` after a scenario run.
    pub audit: bool,
}

impl Default for AnalysisToggles {
    fn default() -> Self {
        AnalysisToggles {
            thresholds: true,
            audit: true,
        }
    }
}

/// A fully parsed scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Model constants.
    pub params: ModelParameters,
    /// Grid and floor settings.
    pub solver: SolverConfig,
    /// Optional pulsed-control schedule.
    pub control: Option<ControlSchedule>,
    /// Initial condition.
    pub initial: InitialSpec,
    /// Post-run analysis toggles.
    pub analysis: AnalysisToggles,
    /// Directory all output files go to.
    pub output_dir: PathBuf,
}

const SECTIONS: [&str; 6] = [
    "parameters",
    "solver",
    "control",
    "initial",
    "analysis",
    "output",
];

struct Section {
    name: &'static str,
    entries: HashMap<String, (usize, String)>,
}

impl Section {
    fn empty(name: &'static str) -> Self {
        Section {
            name,
            entries: HashMap::new(),
        }
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String), ParseError> {
        self.take(key).ok_or_else(|| {
            ParseError::whole(format!(
                "missing required key '{key}' in [{}]",
                self.name
            ))
        })
    }

    fn require_f64(&mut self, key: &str) -> Result<f64, ParseError> {
        let (line, raw) = self.require(key)?;
        parse_f64(line, key, &raw)
    }

    fn optional_f64(&mut self, key: &str, default: f64) -> Result<f64, ParseError> {
        match self.take(key) {
            Some((line, raw)) => parse_f64(line, key, &raw),
            None => Ok(default),
        }
    }

    fn optional_usize(&mut self, key: &str, default: usize) -> Result<usize, ParseError> {
        match self.take(key) {
            Some((line, raw)) => raw.parse::<usize>().map_err(|_| {
                ParseError::at(
                    line,
                    format!("key '{key}': expected a nonnegative integer, got '{raw}'"),
                )
            }),
            None => Ok(default),
        }
    }

    fn optional_bool(&mut self, key: &str, default: bool) -> Result<bool, ParseError> {
        match self.take(key) {
            Some((_, raw)) if raw == "true" => Ok(true),
            Some((_, raw)) if raw == "false" => Ok(false),
            Some((line, raw)) => Err(ParseError::at(
                line,
                format!("key '{key}': expected 'true' or 'false', got '{raw}'"),
            )),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<(), ParseError> {
        // Report the earliest leftover for a deterministic message.
        if let Some((key, (line, _))) = self
            .entries
            .iter()
            .min_by_key(|(_, (line, _))| *line)
            .map(|(k, v)| (k.clone(), v.clone()))
        {
            return Err(ParseError::at(
                line,
                format!("unknown key '{key}' in [{}]", self.name),
            ));
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64, ParseError> {
    raw.parse::<f64>().map_err(|_| {
        ParseError::at(
            line,
            format!("key '{key}': expected a number, got '{raw}'"),
        )
    })
}

fn split_sections(text: &str) -> Result<HashMap<&'static str, Section>, ParseError> {
    let mut sections: HashMap<&'static str, Section> = HashMap::new();
    let mut current: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let name = inner.strip_suffix(']').ok_or_else(|| {
                ParseError::at(line, format!("malformed section header '{trimmed}'"))
            })?;
            let known = SECTIONS
                .iter()
                .find(|s| **s == name)
                .ok_or_else(|| ParseError::at(line, format!("unknown section '[{name}]'")))?;
            if sections.contains_key(known) {
                return Err(ParseError::at(
                    line,
                    format!("section '[{known}]' appears twice"),
                ));
            }
            sections.insert(known, Section::empty(known));
            current = Some(known);
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| {
            ParseError::at(line, format!("expected 'key = value', got '{trimmed}'"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ParseError::at(
                line,
                format!("expected 'key = value', got '{trimmed}'"),
            ));
        }
        let section = current
            .ok_or_else(|| ParseError::at(line, format!("key '{key}' outside any section")))?;
        let entries = &mut sections
            .get_mut(section)
            .expect("current section was inserted")
            .entries;
        if entries.contains_key(key) {
            return Err(ParseError::at(
                line,
                format!("duplicate key '{key}' in [{section}]"),
            ));
        }
        entries.insert(key.to_string(), (line, value.to_string()));
    }
    Ok(sections)
}

fn assemble_parameters(mut sec: Section) -> Result<ModelParameters, ParseError> {
    let params = ModelParameters {
        recruitment_m: sec.require_f64("recruitment_m")?,
        beta_max: sec.require_f64("beta_max")?,
        a_opt: sec.require_f64("a_opt")?,
        sigma_p: sec.require_f64("sigma_p")?,
        d_max: sec.require_f64("d_max")?,
        eta: sec.require_f64("eta")?,
        mu_alpha0: sec.require_f64("mu_alpha0")?,
        mu_exp: sec.require_f64("mu_exp")?,
        mu_f: sec.require_f64("mu_f")?,
        mu_i: sec.require_f64("mu_i")?,
        alpha: sec.require_f64("alpha")?,
        e_reinfect: sec.require_f64("e_reinfect")?,
        gamma: sec.require_f64("gamma")?,
        rho: sec.require_f64("rho")?,
        k_cap: sec.require_f64("k_cap")?,
        k_d: sec.require_f64("k_d")?,
        a_max: sec.require_f64("a_max")?,
        b_floor: sec.require_f64("b_floor")?,
        theta_max: sec.require_f64("theta_max")?,
        a_star: sec.require_f64("a_star")?,
        a_0: sec.require_f64("a_0")?,
    };
    sec.finish()?;
    Ok(params)
}

fn assemble_solver(mut sec: Section) -> Result<SolverConfig, ParseError> {
    let mut solver = SolverConfig::new(sec.require_f64("h")?, sec.require_f64("t_end")?);
    solver.record_every = sec.optional_usize("record_every", 1)?;
    solver.epsilon_p = sec.optional_f64("epsilon_p", 1e-12)?;
    sec.finish()?;
    Ok(solver)
}

fn assemble_control(mut sec: Section, t_end: f64) -> Result<ControlSchedule, ParseError> {
    let schedule = ControlSchedule {
        u_max: sec.require_f64("u_max")?,
        period: sec.optional_f64("period", 16.0)?,
        pulse_width: sec.optional_f64("pulse_width", 1.0)?,
        horizon: sec.optional_f64("horizon", t_end)?,
    };
    sec.finish()?;
    Ok(schedule)
}

fn assemble_initial(mut sec: Section) -> Result<InitialSpec, ParseError> {
    let (profile_line, profile_raw) = sec.require("profile")?;
    let value = sec.take("value");
    let path = sec.take("path");
    let profile = match profile_raw.as_str() {
        "spike-at-zero" => {
            if let Some((line, _)) = path {
                return Err(ParseError::at(
                    line,
                    String::from("key 'path' only applies to profile = file"),
                ));
            }
            let (line, raw) = value.ok_or_else(|| {
                ParseError::whole(String::from(
                    "missing required key 'value' in [initial] (profile = spike-at-zero)",
                ))
            })?;
            InitialProfile::SpikeAtZero {
                value: parse_f64(line, "value", &raw)?,
            }
        }
        "steady-state" => {
            if let Some((line, _)) = value {
                return Err(ParseError::at(
                    line,
                    String::from("key 'value' only applies to profile = spike-at-zero"),
                ));
            }
            if let Some((line, _)) = path {
                return Err(ParseError::at(
                    line,
                    String::from("key 'path' only applies to profile = file"),
                ));
            }
            InitialProfile::SteadyState
        }
        "file" => {
            if let Some((line, _)) = value {
                return Err(ParseError::at(
                    line,
                    String::from("key 'value' only applies to profile = spike-at-zero"),
                ));
            }
            let (_, raw) = path.ok_or_else(|| {
                ParseError::whole(String::from(
                    "missing required key 'path' in [initial] (profile = file)",
                ))
            })?;
            InitialProfile::File {
                path: PathBuf::from(raw),
            }
        }
        other => {
            return Err(ParseError::at(
                profile_line,
                format!(
                    "key 'profile': expected one of spike-at-zero, steady-state, file; got '{other}'"
                ),
            ))
        }
    };
    let spec = InitialSpec {
        profile,
        n_f0: sec.optional_f64("n_f0", 0.0)?,
        n_i0: sec.optional_f64("n_i0", 0.0)?,
    };
    sec.finish()?;
    Ok(spec)
}

fn assemble_analysis(mut sec: Section) -> Result<AnalysisToggles, ParseError> {
    let toggles = AnalysisToggles {
        thresholds: sec.optional_bool("thresholds", true)?,
        audit: sec.optional_bool("audit", true)?,
    };
    sec.finish()?;
    Ok(toggles)
}

fn assemble_output(mut sec: Section) -> Result<PathBuf, ParseError> {
    let dir = match sec.take("dir") {
        Some((_, raw)) => PathBuf::from(raw),
        None => PathBuf::from("out"),
    };
    sec.finish()?;
    Ok(dir)
}

/// Parses a whole configuration file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ParseError> {
    fn required(
        sections: &mut HashMap<&'static str, Section>,
        name: &'static str,
    ) -> Result<Section, ParseError> {
        sections
            .remove(name)
            .ok_or_else(|| ParseError::whole(format!("missing required section '[{name}]'")))
    }
    let mut sections = split_sections(text)?;
    let params = assemble_parameters(required(&mut sections, "parameters")?)?;
    let solver = assemble_solver(required(&mut sections, "solver")?)?;
    let control = match sections.remove("control") {
        Some(sec) => Some(assemble_control(sec, solver.t_end)?),
        None => None,
    };
    let initial = assemble_initial(required(&mut sections, "initial")?)?;
    let analysis = match sections.remove("analysis") {
        Some(sec) => assemble_analysis(sec)?,
        None => AnalysisToggles::default(),
    };
    let output_dir = match sections.remove("output") {
        Some(sec) => assemble_output(sec)?,
        None => PathBuf::from("out"),
    };
    Ok(ScenarioConfig {
        params,
        solver,
        control,
        initial,
        analysis,
        output_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_config() -> String {
        let p = ModelParameters::baseline();
        format!(
            "# comment line\n\
             [parameters]\n\
             recruitment_m = {}\nbeta_max = {}\na_opt = {}\nsigma_p = {}\n\
             d_max = {}\neta = {}\nmu_alpha0 = {}\nmu_exp = {}\n\
             mu_f = {}\nmu_i = {}\nalpha = {}\ne_reinfect = {}\n\
             gamma = {}\nrho = {}\nk_cap = {}\nk_d = {}\n\
             a_max = {}\nb_floor = {}\ntheta_max = {}\na_star = {}\na_0 = {}\n\
             \n\
             [solver]\nh = 1\nt_end = 550\n\
             [initial]\nprofile = spike-at-zero\nvalue = 100\nn_f0 = 10000\n",
            p.recruitment_m,
            p.beta_max,
            p.a_opt,
            p.sigma_p,
            p.d_max,
            p.eta,
            p.mu_alpha0,
            p.mu_exp,
            p.mu_f,
            p.mu_i,
            p.alpha,
            p.e_reinfect,
            p.gamma,
            p.rho,
            p.k_cap,
            p.k_d,
            p.a_max,
            p.b_floor,
            p.theta_max,
            p.a_star,
            p.a_0
        )
    }

    #[test]
    fn parses_full_config() {
        let cfg = parse_config(&full_config()).unwrap();
        assert_eq!(cfg.params, ModelParameters::baseline());
        assert_eq!(cfg.solver.h, 1.0);
        assert_eq!(cfg.solver.t_end, 550.0);
        assert_eq!(cfg.solver.record_every, 1);
        assert_eq!(cfg.solver.epsilon_p, 1e-12);
        assert!(cfg.control.is_none());
        assert_eq!(cfg.initial.n_f0, 1e4);
        assert_eq!(cfg.initial.n_i0, 0.0);
        assert!(matches!(
            cfg.initial.profile,
            InitialProfile::SpikeAtZero { value } if value == 100.0
        ));
        assert!(cfg.analysis.thresholds && cfg.analysis.audit);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn missing_key_is_named() {
        let text = full_config().replace("k_d = 60\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("'k_d'"), "{err}");
        assert_eq!(err.line, None);
    }

    #[test]
    fn unknown_key_is_line_anchored() {
        let text = format!("{}extra_knob = 3\n", full_config());
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("extra_knob"), "{err}");
        assert!(err.line.is_some());
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = full_config().replace("h = 1\n", "h = 1\nh = 2\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("duplicate key 'h'"), "{err}");
    }

    #[test]
    fn malformed_number_is_line_anchored() {
        let text = full_config().replace("gamma = 1000", "gamma = plenty");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("'gamma'"), "{err}");
        assert!(err.message.contains("plenty"), "{err}");
        assert!(err.line.is_some());
    }

    #[test]
    fn unknown_section_rejected() {
        let text = format!("{}\n[plotting]\ncolor = red\n", full_config());
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("[plotting]"), "{err}");
    }

    #[test]
    fn control_defaults_fill_in() {
        let text = format!("{}\n[control]\nu_max = 2.85\n", full_config());
        let cfg = parse_config(&text).unwrap();
        let c = cfg.control.unwrap();
        assert_eq!(c.u_max, 2.85);
        assert_eq!(c.period, 16.0);
        assert_eq!(c.pulse_width, 1.0);
        assert_eq!(c.horizon, 550.0);
    }

    #[test]
    fn profile_specific_keys_are_policed() {
        let text = full_config().replace(
            "profile = spike-at-zero\nvalue = 100\n",
            "profile = steady-state\nvalue = 100\n",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("'value'"), "{err}");

        let text = full_config().replace(
            "profile = spike-at-zero\nvalue = 100\n",
            "profile = elsewhere\nvalue = 100\n",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("spike-at-zero"), "{err}");
    }
}
