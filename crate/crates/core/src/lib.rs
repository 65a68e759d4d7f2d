//! Multiple-direction weighted logrank tests for two-sample right-censored
//! data: risk tables, polynomial weights, the quadratic-form statistic with
//! χ² and permutation calibration, and simulation tooling.

pub mod logrank;
pub mod numerics;
pub mod permute;
pub mod rng;
pub mod simstudy;
pub mod surv;
pub mod weights;

pub use logrank::{
    chi2_test, compute_sigma, compute_sn, compute_t_vec, LogrankEngine, LogrankError, StatResult, TestOutcome,
};
pub use permute::{exhaustive_permutation_test, permutation_test, PermConfig, PermError, PermResult};
pub use surv::{build_risk_table, ingest, RawRecord, RiskTable, SurvError, TwoSampleData};
pub use weights::{make_crossing, make_rg, WeightError, WeightFn, WeightSet};
