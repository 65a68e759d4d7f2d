//! Simulation studies: null rejection rates, power curves under hazard
//! alternatives, and limiting power under local alternatives.

use thiserror::Error;

use crate::logrank::LogrankError;
use crate::numerics::NumericsError;
use crate::surv::SurvError;

pub mod asymptotic;
pub mod plot;
pub mod run;
pub mod sampler;
pub mod scenario;

pub use asymptotic::{asymptotic_power, simulate_local_power, AsymptoticPower, AsymptoticPowerSpec};
pub use run::{run_power_study, run_scenario, run_type1_study, write_csv, SimReport};
pub use sampler::{censoring_rate_for_target, HazardAlternative};
pub use scenario::{Calibration, Censoring, SimScenario, StudyConfig};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("ConfigError: {0}")]
    Config(String),
    #[error("NegativeHazard: 1 + {theta}·{weight} reaches {min} < 0 on [0, 1]")]
    NegativeHazard { theta: f64, weight: String, min: f64 },
    #[error(transparent)]
    Surv(#[from] SurvError),
    #[error(transparent)]
    Logrank(#[from] LogrankError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("OutputError: {0}")]
    Csv(#[from] csv::Error),
    #[error("OutputError: {0}")]
    Io(#[from] std::io::Error),
}
