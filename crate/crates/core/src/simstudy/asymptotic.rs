//! Limiting power under local alternatives, and the matching finite-sample
//! simulation.
//!
//! With `u = F₀(t)` for an Exp(1) baseline and exponential censoring with
//! rates `c₁, c₂`, `1 − G_j = (1 − u)^{c_j}` and
//! `ψ(u) = (1−u)^{c₁+c₂} / (η(1−u)^{c₁} + (1−η)(1−u)^{c₂})`.
//! Then `aᵢ = θ∫₀¹ w·wᵢ·ψ du`, `Σ_rs = ∫₀¹ w_r·w_s·ψ du` and `λ = aᵀΣ⁻a`.

use rayon::prelude::*;

use super::run::{simulate_dataset, GroupLaw};
use super::sampler::HazardAlternative;
use super::SimError;
use crate::logrank::{LogrankEngine, LogrankError};
use crate::numerics::{chi2_quantile, noncentral_chi2_cdf, pinv_quadratic_form, quad, SymMatrix};
use crate::rng;
use crate::weights::{WeightFn, WeightSet};

const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticPowerSpec {
    /// Limit of `n1/n`.
    pub eta: f64,
    pub censoring_rate1: f64,
    pub censoring_rate2: f64,
    pub direction: WeightFn,
    /// Multiplier on `direction`.
    pub theta: f64,
    pub menu: WeightSet,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticPower {
    pub lambda: f64,
    pub power: f64,
    pub a: Vec<f64>,
    pub sigma: SymMatrix,
    pub df: u32,
}

impl AsymptoticPowerSpec {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(SimError::Config(format!("eta {} not in (0, 1)", self.eta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SimError::Config(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if self.censoring_rate1 < 0.0 || self.censoring_rate2 < 0.0 {
            return Err(SimError::Config("censoring rates must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn psi(&self, u: f64) -> f64 {
        let (c1, c2) = (self.censoring_rate1, self.censoring_rate2);
        if c1 == 0.0 && c2 == 0.0 {
            return 1.0;
        }
        let x = 1.0 - u;
        if x <= 0.0 {
            return 0.0;
        }
        let (g1, g2) = (x.powf(c1), x.powf(c2));
        g1 * g2 / (self.eta * g1 + (1.0 - self.eta) * g2)
    }
}

pub fn asymptotic_power(spec: &AsymptoticPowerSpec) -> Result<AsymptoticPower, SimError> {
    spec.validate()?;
    let ws = spec.menu.weights();
    let m = ws.len();
    let mut a = Vec::with_capacity(m);
    for wi in ws {
        let v = quad::integrate(
            |u| spec.direction.eval_unchecked(u) * wi.eval_unchecked(u) * spec.psi(u),
            0.0,
            1.0,
            QUAD_TOL,
        )?;
        a.push(spec.theta * v);
    }
    let mut upper = Vec::with_capacity(m * (m + 1) / 2);
    for r in 0..m {
        for s in r..m {
            upper.push(quad::integrate(
                |u| ws[r].eval_unchecked(u) * ws[s].eval_unchecked(u) * spec.psi(u),
                0.0,
                1.0,
                QUAD_TOL,
            )?);
        }
    }
    let sigma = SymMatrix::from_upper(m, &upper);
    let (lambda, rank) = pinv_quadratic_form(&sigma, &a)?;
    let df = if spec.menu.verified_independent() {
        m
    } else {
        rank.max(1)
    } as u32;
    let crit = chi2_quantile(1.0 - spec.alpha, df);
    let power = 1.0 - noncentral_chi2_cdf(crit, df, lambda.max(0.0));
    Ok(AsymptoticPower {
        lambda: lambda.max(0.0),
        power,
        a,
        sigma,
        df,
    })
}

/// Local-alternative coefficients `c₁ = +√(n₁n₂/n)/n₁`, `c₂ = −√(n₁n₂/n)/n₂`.
pub fn local_coefficients(n1: usize, n2: usize) -> (f64, f64) {
    let (a, b) = (n1 as f64, n2 as f64);
    let root = (a * b / (a + b)).sqrt();
    (root / a, -root / b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedPower {
    pub rate: f64,
    pub se: f64,
    pub n_valid: usize,
}

/// χ²-calibrated rejection rate of the menu test when group `j` has hazard
/// `1 + c_j·θ·w(F₀)`, `n1 = round(η·n)`.
pub fn simulate_local_power(
    spec: &AsymptoticPowerSpec,
    n: usize,
    n_sim: usize,
    seed: u64,
) -> Result<SimulatedPower, SimError> {
    spec.validate()?;
    let n1 = ((spec.eta * n as f64).round() as usize).clamp(1, n - 1);
    let n2 = n - n1;
    let (c1, c2) = local_coefficients(n1, n2);
    let law1 = GroupLaw {
        survival: HazardAlternative::new(c1 * spec.theta, spec.direction.clone())?,
        censoring_rate: spec.censoring_rate1,
    };
    let law2 = GroupLaw {
        survival: HazardAlternative::new(c2 * spec.theta, spec.direction.clone())?,
        censoring_rate: spec.censoring_rate2,
    };
    let alpha = spec.alpha;
    let outcomes: Vec<Option<bool>> = (0..n_sim as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<bool>, SimError> {
            let mut g = rng::stream(seed, i);
            let data = simulate_dataset(n1, n2, &law1, &law2, &mut g)?;
            let engine = match LogrankEngine::new(&data, &spec.menu) {
                Ok(e) => e,
                Err(LogrankError::NoEvents) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let st = engine.stat(engine.observed_mask())?;
            Ok(Some(st.s_n > chi2_quantile(1.0 - alpha, st.df_used)))
        })
        .collect::<Result<_, _>>()?;
    let valid: Vec<bool> = outcomes.into_iter().flatten().collect();
    let n_valid = valid.len();
    let rate = valid.iter().filter(|&&r| r).count() as f64 / n_valid as f64;
    Ok(SimulatedPower {
        rate,
        se: (rate * (1.0 - rate) / n_valid as f64).sqrt(),
        n_valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_crossing, rg};

    fn spec(direction: WeightFn, menu: WeightSet) -> AsymptoticPowerSpec {
        AsymptoticPowerSpec {
            eta: 0.5,
            censoring_rate1: 0.0,
            censoring_rate2: 0.0,
            direction,
            theta: 1.0,
            menu,
            alpha: 0.05,
        }
    }

    #[test]
    fn uncensored_proportional_lambda_one() {
        let out = asymptotic_power(&spec(rg(0, 0), WeightSet::single(rg(0, 0)))).unwrap();
        assert!((out.lambda - 1.0).abs() < 1e-12);
        assert!((out.sigma.get(0, 0) - 1.0).abs() < 1e-12);
        assert_eq!(out.df, 1);
    }

    #[test]
    fn orthogonal_direction_gives_level() {
        let out = asymptotic_power(&spec(make_crossing(), WeightSet::single(rg(0, 0)))).unwrap();
        assert!(out.lambda.abs() < 1e-12);
        assert!((out.power - 0.05).abs() < 1e-9);
    }

    #[test]
    fn sigma_matches_exact_integrals() {
        let out = asymptotic_power(&spec(rg(0, 0), WeightSet::four_direction())).unwrap();
        let ws = WeightSet::four_direction();
        for r in 0..4 {
            for s in 0..4 {
                let exact = crate::weights::inner_product_exact(&ws.weights()[r], &ws.weights()[s]);
                let exact = num_traits::ToPrimitive::to_f64(&exact).unwrap();
                assert!((out.sigma.get(r, s) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn equal_censoring_psi() {
        let mut s = spec(rg(0, 0), WeightSet::single(rg(0, 0)));
        s.censoring_rate1 = 0.5;
        s.censoring_rate2 = 0.5;
        // ψ = (1 − u)^c, ∫ψ = 1/(1 + c)
        let out = asymptotic_power(&s).unwrap();
        assert!((out.lambda - 1.0 / 1.5).abs() < 1e-9);
        assert!((s.psi(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coefficients() {
        let (c1, c2) = local_coefficients(500, 500);
        assert!((c1 - 250.0f64.sqrt() / 500.0).abs() < 1e-15);
        assert_eq!(c1, -c2);
    }
}
