//! Polynomial hazard weights on [0, 1] and exact linear-independence checks.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_DEGREE: usize = 20;
/// Practical guard on the number of directions in one test.
pub const MAX_DIRECTIONS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("DegreeTooLarge: degree {degree} exceeds the maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("OutOfDomain: weight evaluated at u = {u}, outside [0, 1]")]
    OutOfDomain { u: f64 },
    #[error("ZeroPolynomial: a weight needs at least one nonzero coefficient")]
    ZeroPolynomial,
    #[error("EmptyWeightSet: at least one weight is required")]
    EmptySet,
    #[error("TooManyDirections: {found} weights given, at most {max} allowed")]
    TooManyDirections { found: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Rg { r: u32, g: u32 },
    Crossing,
    Polynomial,
}

/// A polynomial weight `w(u) = Σ coeffs[k] uᵏ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFn {
    coeffs: Vec<i64>,
    tag: String,
    shape: Shape,
}

impl WeightFn {
    /// Arbitrary integer polynomial. Trailing zeros are dropped.
    pub fn polynomial(coeffs: Vec<i64>, tag: impl Into<String>) -> Result<Self, WeightError> {
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(WeightError::ZeroPolynomial);
        }
        let degree = coeffs.len() - 1;
        if degree > MAX_DEGREE {
            return Err(WeightError::DegreeTooLarge {
                degree,
                max: MAX_DEGREE,
            });
        }
        Ok(WeightFn {
            coeffs,
            tag: tag.into(),
            shape: Shape::Polynomial,
        })
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|&c| c as f64).collect()
    }

    /// Checked evaluation on [0, 1].
    pub fn eval(&self, u: f64) -> Result<f64, WeightError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(WeightError::OutOfDomain { u });
        }
        Ok(self.eval_unchecked(u))
    }

    /// Evaluation without the domain check; `u` must lie in [0, 1].
    #[inline]
    pub fn eval_unchecked(&self, u: f64) -> f64 {
        match self.shape {
            // factored form is far more accurate than the expanded one near u = 1
            Shape::Rg { r, g } => u.powi(r as i32) * (1.0 - u).powi(g as i32),
            Shape::Crossing => 1.0 - 2.0 * u,
            Shape::Polynomial => self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c as f64),
        }
    }

    /// Same polynomial scaled by an integer factor.
    pub fn scaled(&self, k: i64) -> Result<Self, WeightError> {
        WeightFn::polynomial(self.coeffs.iter().map(|c| c * k).collect(), format!("{k}*{}", self.tag))
    }

    /// Coefficient-wise sum.
    pub fn plus(&self, other: &WeightFn) -> Result<Self, WeightError> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len)
            .map(|k| self.coeffs.get(k).unwrap_or(&0) + other.coeffs.get(k).unwrap_or(&0))
            .collect();
        WeightFn::polynomial(c, format!("{}+{}", self.tag, other.tag))
    }

    fn rational_row(&self, len: usize) -> Vec<BigRational> {
        (0..len)
            .map(|k| BigRational::from_integer(BigInt::from(*self.coeffs.get(k).unwrap_or(&0))))
            .collect()
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag)
    }
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `uʳ(1−u)ᵍ`, expanded binomially into exact integer coefficients.
pub fn make_rg(r: u32, g: u32) -> Result<WeightFn, WeightError> {
    let degree = (r + g) as usize;
    if degree > MAX_DEGREE {
        return Err(WeightError::DegreeTooLarge {
            degree,
            max: MAX_DEGREE,
        });
    }
    let mut coeffs = vec![0i64; degree + 1];
    for j in 0..=g {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        coeffs[(r + j) as usize] = sign * binomial(g, j);
    }
    Ok(WeightFn {
        coeffs,
        tag: format!("w({r},{g})"),
        shape: Shape::Rg { r, g },
    })
}

/// `1 − 2u`, sign switch at u = 1/2.
pub fn make_crossing() -> WeightFn {
    WeightFn {
        coeffs: vec![1, -2],
        tag: "cross".to_string(),
        shape: Shape::Crossing,
    }
}

/// Exact ∫₀¹ p(u) q(u) du.
pub fn inner_product_exact(p: &WeightFn, q: &WeightFn) -> BigRational {
    let mut acc = BigRational::zero();
    for (i, &a) in p.coeffs.iter().enumerate() {
        for (j, &b) in q.coeffs.iter().enumerate() {
            acc += BigRational::new(BigInt::from(a) * BigInt::from(b), BigInt::from(i + j + 1));
        }
    }
    acc
}

/// Incremental row echelon form over the rationals.
#[derive(Debug, Clone)]
struct Echelon {
    width: usize,
    // (pivot column, row normalized so the pivot is 1)
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Echelon {
    fn new(width: usize) -> Self {
        Echelon {
            width,
            rows: Vec::new(),
        }
    }

    /// Reduces `row` against the basis; keeps it and returns true when it is
    /// outside the current span.
    fn try_insert(&mut self, mut row: Vec<BigRational>) -> bool {
        debug_assert_eq!(row.len(), self.width);
        for (pivot, basis) in &self.rows {
            if row[*pivot].is_zero() {
                continue;
            }
            let factor = row[*pivot].clone();
            for (x, b) in row.iter_mut().zip(basis) {
                if !b.is_zero() {
                    *x -= &factor * b;
                }
            }
        }
        let Some(pivot) = row.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = BigRational::one() / &row[pivot];
        for x in row.iter_mut() {
            *x *= &inv;
        }
        // keep earlier rows reduced in the new pivot column
        for (_, basis) in self.rows.iter_mut() {
            if basis[pivot].is_zero() {
                continue;
            }
            let factor = basis[pivot].clone();
            for (b, x) in basis.iter_mut().zip(&row) {
                if !x.is_zero() {
                    *b -= &factor * x;
                }
            }
        }
        self.rows.push((pivot, row));
        true
    }
}

fn common_width(weights: &[WeightFn]) -> usize {
    weights.iter().map(|w| w.coeffs.len()).max().unwrap_or(0)
}

/// True iff the coefficient matrix of `weights` has full row rank.
pub fn independent(weights: &[WeightFn]) -> bool {
    let width = common_width(weights);
    let mut ech = Echelon::new(width);
    weights.iter().all(|w| ech.try_insert(w.rational_row(width)))
}

/// An ordered menu of weights. `verified_independent` is only ever true when
/// the exact rank check has passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    weights: Vec<WeightFn>,
    verified_independent: bool,
}

impl WeightSet {
    /// Builds a set and records the result of the exact independence check.
    pub fn new(weights: Vec<WeightFn>) -> Result<Self, WeightError> {
        if weights.is_empty() {
            return Err(WeightError::EmptySet);
        }
        if weights.len() > MAX_DIRECTIONS {
            return Err(WeightError::TooManyDirections {
                found: weights.len(),
                max: MAX_DIRECTIONS,
            });
        }
        let verified_independent = independent(&weights);
        Ok(WeightSet {
            weights,
            verified_independent,
        })
    }

    pub fn weights(&self) -> &[WeightFn] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn verified_independent(&self) -> bool {
        self.verified_independent
    }

    pub fn tags(&self) -> Vec<String> {
        self.weights.iter().map(|w| w.tag.clone()).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.weights.iter().map(WeightFn::degree).max().unwrap_or(0)
    }

    /// `{w(0,0), cross}`.
    pub fn two_direction() -> Self {
        WeightSet::new(vec![rg(0, 0), make_crossing()]).expect("preset menu")
    }

    /// `{w(0,0), cross, w(1,1), w(1,3)}`, the four-direction simulation menu.
    pub fn four_direction() -> Self {
        WeightSet::new(vec![rg(0, 0), make_crossing(), rg(1, 1), rg(1, 3)]).expect("preset menu")
    }

    pub fn single(w: WeightFn) -> Self {
        WeightSet::new(vec![w]).expect("single nonzero weight")
    }
}

/// `make_rg` for small, known-valid degrees.
pub fn rg(r: u32, g: u32) -> WeightFn {
    make_rg(r, g).expect("degree within bound")
}

pub fn check_independence(ws: &WeightSet) -> bool {
    independent(&ws.weights)
}

/// Greedy left-to-right scan keeping each weight outside the span of the ones
/// already kept. Returns the pruned set and the indices that were dropped.
pub fn select_independent_subset(ws: &WeightSet) -> (WeightSet, Vec<usize>) {
    let width = common_width(&ws.weights);
    let mut ech = Echelon::new(width);
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (i, w) in ws.weights.iter().enumerate() {
        if ech.try_insert(w.rational_row(width)) {
            kept.push(w.clone());
        } else {
            dropped.push(i);
        }
    }
    (
        WeightSet {
            weights: kept,
            verified_independent: true,
        },
        dropped,
    )
}
