//! Survival times under hazard alternatives `α(t) = 1 + θ·w(1 − e^{−t})`
//! relative to an Exp(1) baseline, drawn by hazard thinning.

use rand::RngCore;

use super::SimError;
use crate::numerics::poly;
use crate::rng;
use crate::weights::WeightFn;

/// Past this time `1 − e^{−t}` rounds to 1, so the hazard is constant.
const FLAT_TAIL: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HazardAlternative {
    theta: f64,
    w: WeightFn,
    // 1 + θ·w as a polynomial in u
    hazard: Vec<f64>,
    bound: f64,
    tail_rate: f64,
}

impl HazardAlternative {
    /// Validates `1 + θ·w(u) ≥ 0` on [0, 1] and computes the thinning bound
    /// from the exact polynomial maximum.
    pub fn new(theta: f64, w: WeightFn) -> Result<Self, SimError> {
        if !theta.is_finite() {
            return Err(SimError::Config(format!("theta must be finite, got {theta}")));
        }
        let mut hazard: Vec<f64> = w.coeffs_f64().iter().map(|c| theta * c).collect();
        hazard[0] += 1.0;
        let (min, max) = poly::extrema_in(&hazard, 0.0, 1.0);
        if min < -1e-12 {
            return Err(SimError::NegativeHazard {
                theta,
                weight: w.tag().to_string(),
                min,
            });
        }
        // tiny margin so rounding in the evaluated hazard never exceeds M
        let bound = max * (1.0 + 1e-12);
        let tail_rate = poly::eval(&hazard, 1.0).max(0.0);
        Ok(HazardAlternative {
            theta,
            w,
            hazard,
            bound,
            tail_rate,
        })
    }

    pub fn null() -> Self {
        HazardAlternative::new(0.0, crate::weights::rg(0, 0)).expect("unit hazard")
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn weight(&self) -> &WeightFn {
        &self.w
    }

    /// Thinning bound `M = max (1 + θ·w)` on [0, 1].
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn hazard_at(&self, t: f64) -> f64 {
        let u = -(-t).exp_m1();
        (1.0 + self.theta * self.w.eval_unchecked(u.clamp(0.0, 1.0))).max(0.0)
    }

    /// One survival time. Infinite when the hazard vanishes in the tail and
    /// no event occurred before.
    pub fn sample(&self, rng: &mut impl RngCore) -> f64 {
        if self.theta == 0.0 {
            return rng::exponential(rng, 1.0);
        }
        let mut t = 0.0;
        loop {
            t += rng::exponential(rng, self.bound);
            if t > FLAT_TAIL {
                return FLAT_TAIL + rng::exponential(rng, self.tail_rate);
            }
            if rng::unit(rng) * self.bound < self.hazard_at(t) {
                return t;
            }
        }
    }

    pub fn hazard_poly(&self) -> &[f64] {
        &self.hazard
    }
}

/// Exponential censoring rate giving censoring proportion `p` against Exp(1)
/// survival: `P(C < T) = λ/(1 + λ)`.
pub fn censoring_rate_for_target(p: f64) -> Result<f64, SimError> {
    if !(0.0..1.0).contains(&p) {
        return Err(SimError::Config(format!("censoring proportion {p} not in [0, 1)")));
    }
    Ok(p / (1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_crossing, rg};

    #[test]
    fn censoring_rates() {
        assert_eq!(censoring_rate_for_target(0.0).unwrap(), 0.0);
        assert_eq!(censoring_rate_for_target(0.5).unwrap(), 1.0);
        assert!((censoring_rate_for_target(0.15).unwrap() - 3.0 / 17.0).abs() < 1e-15);
        assert!(censoring_rate_for_target(1.0).is_err());
    }

    #[test]
    fn bounds_are_polynomial_maxima() {
        let a = HazardAlternative::new(0.9, make_crossing()).unwrap();
        assert!((a.bound() - 1.9).abs() < 1e-9);
        let a = HazardAlternative::new(4.5, rg(1, 1)).unwrap();
        assert!((a.bound() - 2.125).abs() < 1e-9);
        let a = HazardAlternative::new(-0.5, rg(0, 0)).unwrap();
        assert!((a.bound() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn negative_hazard_rejected() {
        assert!(matches!(
            HazardAlternative::new(1.5, make_crossing()),
            Err(SimError::NegativeHazard { .. })
        ));
        assert!(HazardAlternative::new(-1.0, make_crossing()).is_ok());
    }

    #[test]
    fn proportional_mean() {
        let a = HazardAlternative::new(0.5, rg(0, 0)).unwrap();
        let mut g = rng::stream(1, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| a.sample(&mut g)).sum::<f64>() / n as f64;
        // Exp(1.5): mean 2/3, sd 2/3
        let se = (2.0 / 3.0) / (n as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn vanishing_tail_gives_infinite_times() {
        // hazard 1 − u → 0 in the tail; survival to infinity has probability e^{−1}
        let b = HazardAlternative::new(1.0, WeightFn::polynomial(vec![0, -1], "-u").unwrap()).unwrap();
        let mut g = rng::stream(2, 0);
        let n = 20_000;
        let inf = (0..n).filter(|_| b.sample(&mut g).is_infinite()).count() as f64 / n as f64;
        let p = (-1.0f64).exp();
        assert!((inf - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{inf}");
    }
}
