//! Monte Carlo drivers for null and power studies.

use std::io::Write;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::HazardAlternative;
use super::scenario::SimScenario;
use super::SimError;
use crate::logrank::{LogrankEngine, LogrankError, Menu};
use crate::numerics::chi2_quantile;
use crate::permute::menu_p_values;
use crate::rng;
use crate::surv::TwoSampleData;
use crate::weights::{WeightFn, WeightSet};

/// Survival and censoring law of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLaw {
    pub survival: HazardAlternative,
    pub censoring_rate: f64,
}

impl GroupLaw {
    pub fn draw(&self, rng: &mut impl RngCore) -> (f64, bool) {
        let t = self.survival.sample(rng);
        let c = rng::exponential(rng, self.censoring_rate);
        if t <= c {
            (t, true)
        } else {
            (c, false)
        }
    }
}

/// One simulated dataset: group 1 subjects first, each drawing survival
/// then censoring time.
pub fn simulate_dataset(
    n1: usize,
    n2: usize,
    law1: &GroupLaw,
    law2: &GroupLaw,
    rng: &mut impl RngCore,
) -> Result<TwoSampleData, SimError> {
    let g1: Vec<(f64, bool)> = (0..n1).map(|_| law1.draw(rng)).collect();
    let g2: Vec<(f64, bool)> = (0..n2).map(|_| law2.draw(rng)).collect();
    Ok(TwoSampleData::from_samples(&g1, &g2)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRate {
    /// `perm:<menu>` or `chi2:<menu>`.
    pub method: String,
    pub rejections: usize,
    pub n_valid: usize,
    pub rejection_rate: f64,
    pub se: f64,
}

impl MethodRate {
    fn new(method: String, rejections: usize, n_valid: usize) -> Self {
        let rate = if n_valid > 0 {
            rejections as f64 / n_valid as f64
        } else {
            f64::NAN
        };
        let se = (rate * (1.0 - rate) / n_valid as f64).sqrt();
        MethodRate {
            method,
            rejections,
            n_valid,
            rejection_rate: rate,
            se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scenario_id: String,
    pub n1: usize,
    pub n2: usize,
    pub censoring: String,
    pub theta: f64,
    pub alpha: f64,
    pub n_sim: usize,
    pub n_perm: usize,
    pub methods: Vec<MethodRate>,
    /// Replicates without any event (not counted in the rates).
    pub n_skipped: usize,
    /// Wall-clock time; not part of any written output.
    #[serde(skip)]
    pub seconds: f64,
}

impl SimReport {
    pub fn rate(&self, method: &str) -> Option<&MethodRate> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// FNV-1a, used to key scenario seeds by id.
fn label_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Union of all menu weights (deduplicated by coefficients) plus each menu as
/// an index subset of it.
pub fn union_menus(sets: &[&WeightSet]) -> Result<(WeightSet, Vec<Menu>), SimError> {
    let mut union: Vec<WeightFn> = Vec::new();
    let mut menus = Vec::new();
    for set in sets {
        let mut indices = Vec::new();
        for w in set.weights() {
            let i = match union.iter().position(|u| u.coeffs() == w.coeffs()) {
                Some(i) => i,
                None => {
                    union.push(w.clone());
                    union.len() - 1
                }
            };
            indices.push(i);
        }
        menus.push(Menu {
            indices,
            verified_independent: set.verified_independent(),
        });
    }
    let ws = WeightSet::new(union).map_err(|e| SimError::Config(e.to_string()))?;
    Ok((ws, menus))
}

/// Runs one scenario. Replicate `i` draws its data from stream `i` of a
/// scenario seed derived from `(seed, id)`, and its permutations from a seed
/// derived from that and `i`, so the output does not depend on scheduling.
/// All grid points of a power curve share the data seed.
pub fn run_scenario(s: &SimScenario) -> Result<SimReport, SimError> {
    s.validate()?;
    let start = Instant::now();
    let (c1, c2) = s.censoring.rates()?;
    let law1 = GroupLaw {
        survival: HazardAlternative::null(),
        censoring_rate: c1,
    };
    let survival2 = match &s.alternative {
        Some(w) => HazardAlternative::new(s.theta, w.clone())?,
        None => HazardAlternative::null(),
    };
    let law2 = GroupLaw {
        survival: survival2,
        censoring_rate: c2,
    };

    let sets: Vec<&WeightSet> = s.menus.iter().map(|m| &m.set).collect();
    let (union, menus) = union_menus(&sets)?;
    let critical: Vec<f64> = menus
        .iter()
        .map(|m| chi2_quantile(1.0 - s.alpha, m.indices.len() as u32))
        .collect();
    let data_seed = rng::derive_seed(s.seed, label_hash(&s.id));
    let perm_seed = rng::derive_seed(data_seed, 0x7065_726d);
    let k = menus.len();

    let outcomes: Vec<Option<Vec<bool>>> = (0..s.n_sim as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<Vec<bool>>, SimError> {
            let mut g = rng::stream(data_seed, i);
            let data = simulate_dataset(s.n1, s.n2, &law1, &law2, &mut g)?;
            let engine = match LogrankEngine::new(&data, &union) {
                Ok(e) => e,
                Err(LogrankError::NoEvents) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let mut rejected = vec![false; 2 * k];
            if s.calibration.chi2() {
                let raw = engine.raw(engine.observed_mask());
                for (j, menu) in menus.iter().enumerate() {
                    let (stat, df) = engine.menu_stat(&raw, menu)?;
                    let crit = if df as usize == menu.indices.len() {
                        critical[j]
                    } else {
                        chi2_quantile(1.0 - s.alpha, df)
                    };
                    rejected[k + j] = stat > crit;
                }
            }
            if s.calibration.permutation() {
                let p = menu_p_values(&engine, &menus, s.n_perm, rng::derive_seed(perm_seed, i))?;
                for j in 0..k {
                    rejected[j] = p[j] <= s.alpha;
                }
            }
            Ok(Some(rejected))
        })
        .collect::<Result<_, _>>()?;

    let valid: Vec<&Vec<bool>> = outcomes.iter().flatten().collect();
    let n_valid = valid.len();
    let mut methods = Vec::new();
    for (offset, prefix, enabled) in [
        (0, "perm", s.calibration.permutation()),
        (k, "chi2", s.calibration.chi2()),
    ] {
        if !enabled {
            continue;
        }
        for (j, m) in s.menus.iter().enumerate() {
            let hits = valid.iter().filter(|r| r[offset + j]).count();
            methods.push(MethodRate::new(format!("{prefix}:{}", m.name), hits, n_valid));
        }
    }
    Ok(SimReport {
        scenario_id: s.id.clone(),
        n1: s.n1,
        n2: s.n2,
        censoring: s.censoring.label().to_string(),
        theta: s.theta,
        alpha: s.alpha,
        n_sim: s.n_sim,
        n_perm: s.n_perm,
        methods,
        n_skipped: s.n_sim - n_valid,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_type1_study(scenarios: &[SimScenario]) -> Result<Vec<SimReport>, SimError> {
    if let Some(s) = scenarios.iter().find(|s| s.alternative.is_some() && s.theta != 0.0) {
        return Err(SimError::Config(format!("scenario {} is not a null scenario", s.id)));
    }
    scenarios.iter().map(run_scenario).collect()
}

pub fn run_power_study(scenarios: &[SimScenario]) -> Result<Vec<SimReport>, SimError> {
    scenarios.iter().map(run_scenario).collect()
}

/// Columns: scenario_id, theta, method, rejection_rate, se, n_sim.
pub fn write_csv<W: Write>(reports: &[SimReport], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario_id", "theta", "method", "rejection_rate", "se", "n_sim"])?;
    for r in reports {
        for m in &r.methods {
            w.write_record([
                r.scenario_id.as_str(),
                &format!("{}", r.theta),
                &m.method,
                &format!("{:.6}", m.rejection_rate),
                &format!("{:.6}", m.se),
                &m.n_valid.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simstudy::scenario::{menu_by_name, Calibration, Censoring};
    use crate::weights::make_crossing;

    fn scenario(n_sim: usize) -> SimScenario {
        SimScenario {
            id: "t".into(),
            n1: 20,
            n2: 20,
            censoring: Censoring::EQUAL,
            alternative: Some(make_crossing()),
            theta: 0.9,
            menus: vec![menu_by_name("2dir").unwrap(), menu_by_name("prop").unwrap()],
            alpha: 0.05,
            n_sim,
            n_perm: 50,
            seed: 3,
            calibration: Calibration::Both,
        }
    }

    #[test]
    fn union_dedups() {
        let a = WeightSet::four_direction();
        let b = WeightSet::two_direction();
        let c = WeightSet::single(make_crossing());
        let (u, menus) = union_menus(&[&a, &b, &c]).unwrap();
        assert_eq!(u.len(), 4);
        assert_eq!(menus[1].indices, vec![0, 1]);
        assert_eq!(menus[2].indices, vec![1]);
    }

    #[test]
    fn censoring_proportion_matches_target() {
        let rate = crate::simstudy::censoring_rate_for_target(0.15).unwrap();
        let law = GroupLaw {
            survival: HazardAlternative::null(),
            censoring_rate: rate,
        };
        let mut g = rng::stream(9, 0);
        let n = 100_000;
        let censored = (0..n).filter(|_| !law.draw(&mut g).1).count() as f64 / n as f64;
        assert!(
            (censored - 0.15).abs() < 3.0 * (0.15 * 0.85 / n as f64).sqrt(),
            "{censored}"
        );
    }

    #[test]
    fn report_shape_and_determinism() {
        let s = scenario(40);
        let a = run_scenario(&s).unwrap();
        let names: Vec<&str> = a.methods.iter().map(|m| m.method.as_str()).collect();
        assert_eq!(names, ["perm:2dir", "perm:prop", "chi2:2dir", "chi2:prop"]);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_scenario(&s).unwrap());
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_csv(&[a], &mut x).unwrap();
        write_csv(&[b], &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("scenario_id,theta,method,rejection_rate,se,n_sim\n"));
    }

    #[test]
    fn type1_rejects_alternatives() {
        assert!(run_type1_study(&[scenario(1)]).is_err());
    }
}
