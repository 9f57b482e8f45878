//! Command-line front end for the plantation infestation model.
//!
//! The library half hosts the config parser, output writers and command
//! implementations so integration tests can drive them directly; the
//! `nemasim` binary is a thin argument-parsing shell around [`run`].

#![forbid(unsafe_code)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ScenarioConfig};
pub use run::{
    analyze, compare, prepare, prepare_config, run_scenario, verify_suite, CliError, Suite,
};
