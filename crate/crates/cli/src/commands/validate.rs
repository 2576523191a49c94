//! `qmt validate`: the cross-module invariant suite as a machine-readable
//! report; exit code 1 when anything fails.

use qmt::validate::{run_validation, FaultInjection, ValidationReport};

use crate::config::RunConfig;
use crate::CliError;

pub fn run(
    config: &RunConfig,
    quick: bool,
    corrupt: Option<&str>,
) -> Result<ValidationReport, CliError> {
    let fault = match corrupt {
        None => None,
        Some(name) => Some(FaultInjection::parse(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown --corrupt target {name:?}; available: dirac-algebra"
            ))
        })?),
    };
    Ok(run_validation(config.seed, quick, fault))
}
