//! Declarative simulation scenarios and their TOML configuration.
//!
//! ```toml
//! seed = 1
//! alpha = 0.05
//! n_sim = 2000
//! n_perm = 500
//! calibration = "both"          # permutation | chi2 | both
//!
//! [[scenario]]
//! id = "50-50-equal"
//! n1 = 50
//! n2 = 50
//! censoring = { kind = "equal", p = 0.15 }   # none | equal | unequal (p1, p2)
//! menus = ["4dir", "2dir"]                   # optional
//!
//! [scenario.alternative]                     # power studies only
//! weight = "cross"
//! theta_max = 0.9
//! grid_points = 10
//!
//! [[asymptotic]]
//! id = "prop-2dir"
//! eta = 0.5
//! censoring = { kind = "none" }
//! direction = "prop"
//! theta = 1.0
//! menu = "2dir"
//! ```
//!
//! Weight names: `prop`, `cross`, `cent`, `early`, `early5`, or `rg:r,g`.
//! Menu names: `2dir`, `4dir`, a single weight name, or several weight names
//! joined by `+`.

use serde::{Deserialize, Serialize};

use super::sampler::censoring_rate_for_target;
use super::SimError;
use crate::weights::{make_crossing, make_rg, rg, WeightFn, WeightSet};

pub const DESK_TYPE1: (usize, usize) = (2000, 500);
pub const PAPER_TYPE1: (usize, usize) = (10_000, 1000);
pub const DESK_POWER: (usize, usize) = (500, 500);
pub const PAPER_POWER: (usize, usize) = (1000, 1000);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Censoring {
    None,
    Equal { p: f64 },
    Unequal { p1: f64, p2: f64 },
}

impl Censoring {
    /// 15 % in both groups.
    pub const EQUAL: Censoring = Censoring::Equal { p: 0.15 };
    /// 10 % in group 1, 20 % in group 2.
    pub const UNEQUAL: Censoring = Censoring::Unequal { p1: 0.10, p2: 0.20 };

    /// Exponential censoring rates for the two groups.
    pub fn rates(&self) -> Result<(f64, f64), SimError> {
        Ok(match *self {
            Censoring::None => (0.0, 0.0),
            Censoring::Equal { p } => {
                let r = censoring_rate_for_target(p)?;
                (r, r)
            }
            Censoring::Unequal { p1, p2 } => (censoring_rate_for_target(p1)?, censoring_rate_for_target(p2)?),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Censoring::None => "none",
            Censoring::Equal { .. } => "equal",
            Censoring::Unequal { .. } => "unequal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    Permutation,
    Chi2,
    Both,
}

impl Calibration {
    pub fn permutation(self) -> bool {
        matches!(self, Calibration::Permutation | Calibration::Both)
    }

    pub fn chi2(self) -> bool {
        matches!(self, Calibration::Chi2 | Calibration::Both)
    }
}

/// Parses a weight name.
pub fn weight_by_name(name: &str) -> Result<WeightFn, SimError> {
    let name = name.trim();
    let w = match name {
        "prop" => rg(0, 0),
        "cross" => make_crossing(),
        "cent" => rg(1, 1),
        "early" => rg(1, 3),
        "early5" => rg(0, 5),
        _ => {
            let spec = name
                .strip_prefix("rg:")
                .ok_or_else(|| SimError::Config(format!("unknown weight '{name}'")))?;
            let (r, g) = spec
                .split_once(',')
                .and_then(|(r, g)| Some((r.trim().parse().ok()?, g.trim().parse().ok()?)))
                .ok_or_else(|| SimError::Config(format!("bad weight spec '{name}', expected rg:r,g")))?;
            make_rg(r, g).map_err(|e| SimError::Config(e.to_string()))?
        }
    };
    Ok(w)
}

/// Short display name used in method labels.
pub fn short_name(w: &WeightFn) -> String {
    match w.tag() {
        "w(0,0)" => "prop".into(),
        "cross" => "cross".into(),
        "w(1,1)" => "cent".into(),
        "w(1,3)" => "early".into(),
        "w(0,5)" => "early5".into(),
        t => t.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedMenu {
    pub name: String,
    pub set: WeightSet,
}

pub fn menu_by_name(name: &str) -> Result<NamedMenu, SimError> {
    let set = match name.trim() {
        "2dir" => WeightSet::two_direction(),
        "4dir" => WeightSet::four_direction(),
        other => {
            let ws = other.split('+').map(weight_by_name).collect::<Result<Vec<_>, _>>()?;
            WeightSet::new(ws).map_err(|e| SimError::Config(e.to_string()))?
        }
    };
    Ok(NamedMenu {
        name: name.trim().to_string(),
        set,
    })
}

/// Hazard alternative for group 2 with a θ grid from 0 to `theta_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeConfig {
    pub weight: String,
    pub theta_max: f64,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
}

fn default_grid() -> usize {
    10
}

impl AlternativeConfig {
    /// `grid_points` evenly spaced values from 0 to `theta_max`.
    pub fn grid(&self) -> Vec<f64> {
        let k = self.grid_points.max(2);
        (0..k).map(|i| self.theta_max * i as f64 / (k - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub n1: usize,
    pub n2: usize,
    pub censoring: Censoring,
    #[serde(default)]
    pub menus: Option<Vec<String>>,
    #[serde(default)]
    pub alternative: Option<AlternativeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticConfig {
    pub id: String,
    pub eta: f64,
    pub censoring: Censoring,
    pub direction: String,
    #[serde(default = "one")]
    pub theta: f64,
    pub menu: String,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub n_sim: Option<usize>,
    #[serde(default)]
    pub n_perm: Option<usize>,
    #[serde(default = "default_calibration")]
    pub calibration: Calibration,
    #[serde(default)]
    pub scenario: Vec<ScenarioConfig>,
    #[serde(default)]
    pub asymptotic: Vec<AsymptoticConfig>,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_calibration() -> Calibration {
    Calibration::Both
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: StudyConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return Err(SimError::Config(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
        }
        Ok(cfg)
    }
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub id: String,
    pub n1: usize,
    pub n2: usize,
    pub censoring: Censoring,
    /// Group-2 hazard direction; `None` is the null.
    pub alternative: Option<WeightFn>,
    pub theta: f64,
    pub menus: Vec<NamedMenu>,
    pub alpha: f64,
    pub n_sim: usize,
    pub n_perm: usize,
    pub seed: u64,
    pub calibration: Calibration,
}

impl SimScenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(SimError::Config(format!(
                "scenario {}: group sizes must be positive",
                self.id
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SimError::Config(format!(
                "scenario {}: alpha {} not in (0, 1)",
                self.id, self.alpha
            )));
        }
        if self.n_sim == 0 {
            return Err(SimError::Config(format!(
                "scenario {}: n_sim must be positive",
                self.id
            )));
        }
        if self.calibration.permutation() && self.n_perm == 0 {
            return Err(SimError::Config(format!(
                "scenario {}: n_perm must be positive",
                self.id
            )));
        }
        if self.menus.is_empty() {
            return Err(SimError::Config(format!("scenario {}: no test menus", self.id)));
        }
        self.censoring.rates()?;
        Ok(())
    }
}

/// Default line set for a power curve: both multi-direction tests, the
/// single test matching the alternative, and one mismatched single test.
pub fn default_power_menus(alternative: &WeightFn) -> Vec<String> {
    let optimal = short_name(alternative);
    let mismatched = if optimal == "cross" { "prop" } else { "cross" };
    vec!["4dir".into(), "2dir".into(), optimal, mismatched.into()]
}

/// Resolves type-I scenarios (alternative sections are ignored).
pub fn type1_scenarios(cfg: &StudyConfig, paper_scale: bool) -> Result<Vec<SimScenario>, SimError> {
    let (n_sim, n_perm) = scale(cfg, paper_scale, DESK_TYPE1, PAPER_TYPE1);
    cfg.scenario
        .iter()
        .map(|sc| {
            let names = sc.menus.clone().unwrap_or_else(|| vec!["4dir".into(), "2dir".into()]);
            let s = SimScenario {
                id: sc.id.clone(),
                n1: sc.n1,
                n2: sc.n2,
                censoring: sc.censoring,
                alternative: None,
                theta: 0.0,
                menus: names.iter().map(|m| menu_by_name(m)).collect::<Result<_, _>>()?,
                alpha: cfg.alpha,
                n_sim,
                n_perm,
                seed: cfg.seed,
                calibration: cfg.calibration,
            };
            s.validate()?;
            Ok(s)
        })
        .collect()
}

/// Resolves power scenarios: one `SimScenario` per grid point.
pub fn power_scenarios(cfg: &StudyConfig, paper_scale: bool) -> Result<Vec<SimScenario>, SimError> {
    let (n_sim, n_perm) = scale(cfg, paper_scale, DESK_POWER, PAPER_POWER);
    let mut out = Vec::new();
    for sc in &cfg.scenario {
        let alt = sc
            .alternative
            .as_ref()
            .ok_or_else(|| SimError::Config(format!("scenario {}: power study needs [scenario.alternative]", sc.id)))?;
        let w = weight_by_name(&alt.weight)?;
        let names = sc.menus.clone().unwrap_or_else(|| default_power_menus(&w));
        let menus: Vec<NamedMenu> = names.iter().map(|m| menu_by_name(m)).collect::<Result<_, _>>()?;
        for theta in alt.grid() {
            // surface negative hazards at config time
            super::sampler::HazardAlternative::new(theta, w.clone())?;
            let s = SimScenario {
                id: sc.id.clone(),
                n1: sc.n1,
                n2: sc.n2,
                censoring: sc.censoring,
                alternative: Some(w.clone()),
                theta,
                menus: menus.clone(),
                alpha: cfg.alpha,
                n_sim,
                n_perm,
                seed: cfg.seed,
                calibration: cfg.calibration,
            };
            s.validate()?;
            out.push(s);
        }
    }
    Ok(out)
}

fn scale(cfg: &StudyConfig, paper_scale: bool, desk: (usize, usize), paper: (usize, usize)) -> (usize, usize) {
    if paper_scale {
        paper
    } else {
        (cfg.n_sim.unwrap_or(desk.0), cfg.n_perm.unwrap_or(desk.1))
    }
}

/// The twelve null designs: four sample-size pairs by three censoring designs.
pub fn table1_designs() -> Vec<(usize, usize, Censoring)> {
    let mut out = Vec::new();
    for (n1, n2) in [(50, 50), (30, 70), (100, 100), (150, 50)] {
        for c in [Censoring::None, Censoring::EQUAL, Censoring::UNEQUAL] {
            out.push((n1, n2, c));
        }
    }
    out
}
