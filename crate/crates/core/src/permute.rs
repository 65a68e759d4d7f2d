//! Permutation calibration: times and statuses stay in place while the
//! group-label vector is permuted uniformly.

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::logrank::{LogrankEngine, LogrankError, Menu, StatResult};
use crate::rng;
use crate::surv::TwoSampleData;
use crate::weights::WeightSet;

/// Relative tolerance under which a permutation statistic counts as a tie
/// with the observed one. Ties count as at least as extreme.
pub const TIE_RTOL: f64 = 1e-9;
pub const MAX_ASSIGNMENTS: u64 = 1_000_000;
/// Fraction of degenerate replicates above which calibration is refused.
pub const DEGENERATE_LIMIT: f64 = 0.99;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PermError {
    #[error(transparent)]
    Logrank(#[from] LogrankError),
    #[error("InvalidConfig: n_perm must be at least 1")]
    NoPermutations,
    #[error("DegenerateStatistic: {degenerate} of {total} permutations have zero covariance")]
    DegenerateStatistic { degenerate: usize, total: usize },
    #[error("TooManyAssignments: {count} label assignments exceed the limit {max}")]
    TooManyAssignments { count: u64, max: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermConfig {
    pub n_perm: usize,
    pub seed: u64,
    /// Keep the permutation statistics so the randomized test can be built.
    pub report_randomized_gamma: bool,
    /// Keep the permutation statistics regardless.
    pub retain_stats: bool,
}

impl Default for PermConfig {
    fn default() -> Self {
        PermConfig {
            n_perm: 10_000,
            seed: 0,
            report_randomized_gamma: false,
            retain_stats: false,
        }
    }
}

/// Critical value and boundary randomization of the finitely exact test:
/// reject when `S > critical`, and with probability `gamma` when `S` equals it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedTest {
    pub critical: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermResult {
    pub s_obs: f64,
    pub p_perm: f64,
    pub n_perm_used: usize,
    pub seed: u64,
    pub exhaustive: bool,
    pub n_degenerate: usize,
    pub observed: StatResult,
    pub perm_stats: Option<Vec<f64>>,
}

fn is_tie_or_above(s: f64, s_obs: f64) -> bool {
    s >= s_obs - TIE_RTOL * s_obs.abs().max(1.0)
}

/// `(1 + #{S ≥ s_obs}) / (B + 1)`.
pub fn add_one_p_value(s_obs: f64, stats: impl IntoIterator<Item = f64>) -> f64 {
    let (mut b, mut hits) = (0usize, 0usize);
    for s in stats {
        b += 1;
        if is_tie_or_above(s, s_obs) {
            hits += 1;
        }
    }
    (1 + hits) as f64 / (b + 1) as f64
}

/// Empirical (1 − α)-quantile: the smallest sample value `c` with
/// `#{S ≤ c} ≥ (1 − α)·B`.
pub fn permutation_quantile(stats: &[f64], alpha: f64) -> Option<f64> {
    if stats.is_empty() || !(alpha > 0.0 && alpha < 1.0) {
        return None;
    }
    let mut sorted = stats.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    let k = ((1.0 - alpha) * b as f64).ceil() as usize;
    Some(sorted[k.clamp(1, b) - 1])
}

impl PermResult {
    pub fn quantile_at(&self, alpha: f64) -> Option<f64> {
        self.perm_stats.as_deref().and_then(|s| permutation_quantile(s, alpha))
    }

    /// Boundary atom weight γ so that the randomized test has level exactly α
    /// under the permutation distribution.
    pub fn randomized_gamma(&self, alpha: f64) -> Option<RandomizedTest> {
        let stats = self.perm_stats.as_deref()?;
        let critical = permutation_quantile(stats, alpha)?;
        let b = stats.len() as f64;
        let tie = |s: f64| (s - critical).abs() <= TIE_RTOL * critical.abs().max(1.0);
        let above = stats.iter().filter(|&&s| s > critical && !tie(s)).count() as f64;
        let at = stats.iter().filter(|&&s| tie(s)).count() as f64;
        let gamma = if at > 0.0 {
            ((alpha * b - above) / at).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Some(RandomizedTest { critical, gamma })
    }

    pub fn reject_at(&self, alpha: f64) -> bool {
        self.p_perm <= alpha
    }
}

/// Monte Carlo permutation test. Replicate `r` uses the stream `(seed, r)`,
/// so the result is identical for any number of worker threads.
pub fn permutation_test(data: &TwoSampleData, ws: &WeightSet, cfg: &PermConfig) -> Result<PermResult, PermError> {
    if cfg.n_perm == 0 {
        return Err(PermError::NoPermutations);
    }
    let engine = LogrankEngine::new(data, ws)?;
    let observed = engine.stat(engine.observed_mask())?;
    let s_obs = observed.s_n;
    let menu = engine.full_menu();
    let base = engine.observed_mask().to_vec();

    let draws: Vec<(f64, bool)> = (0..cfg.n_perm as u64)
        .into_par_iter()
        .map_init(
            || base.clone(),
            |mask, r| {
                mask.copy_from_slice(&base);
                let mut g = rng::stream(cfg.seed, r);
                rng::shuffle(&mut g, mask);
                let raw = engine.raw(mask);
                let s = engine.menu_s(&raw, &menu)?;
                Ok((s, raw.is_degenerate()))
            },
        )
        .collect::<Result<_, LogrankError>>()?;

    let n_degenerate = draws.iter().filter(|d| d.1).count();
    check_degenerate(n_degenerate, draws.len())?;
    let p_perm = add_one_p_value(s_obs, draws.iter().map(|d| d.0));
    let keep = cfg.retain_stats || cfg.report_randomized_gamma;
    Ok(PermResult {
        s_obs,
        p_perm,
        n_perm_used: cfg.n_perm,
        seed: cfg.seed,
        exhaustive: false,
        n_degenerate,
        observed,
        perm_stats: keep.then(|| draws.iter().map(|d| d.0).collect()),
    })
}

fn check_degenerate(degenerate: usize, total: usize) -> Result<(), PermError> {
    if degenerate as f64 > DEGENERATE_LIMIT * total as f64 {
        Err(PermError::DegenerateStatistic { degenerate, total })
    } else {
        Ok(())
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Visits every distinct group-1 assignment once. `p = #{S ≥ s_obs} / C(n, n1)`.
pub fn exhaustive_permutation_test(data: &TwoSampleData, ws: &WeightSet) -> Result<PermResult, PermError> {
    let engine = LogrankEngine::new(data, ws)?;
    let (n, n1) = (engine.n(), engine.n1());
    let count = binomial(n as u64, n1 as u64);
    if count > MAX_ASSIGNMENTS {
        return Err(PermError::TooManyAssignments {
            count,
            max: MAX_ASSIGNMENTS,
        });
    }
    let observed = engine.stat(engine.observed_mask())?;
    let s_obs = observed.s_n;
    let stats = exhaustive_stats(&engine, &engine.full_menu())?;
    let n_degenerate = stats.iter().filter(|d| d.1).count();
    check_degenerate(n_degenerate, stats.len())?;
    let hits = stats.iter().filter(|d| is_tie_or_above(d.0, s_obs)).count();
    Ok(PermResult {
        s_obs,
        p_perm: hits as f64 / stats.len() as f64,
        n_perm_used: stats.len(),
        seed: 0,
        exhaustive: true,
        n_degenerate,
        observed,
        perm_stats: Some(stats.iter().map(|d| d.0).collect()),
    })
}

/// `S` and the degeneracy flag for every assignment, in lexicographic order
/// of the chosen group-1 positions.
pub fn exhaustive_stats(engine: &LogrankEngine, menu: &Menu) -> Result<Vec<(f64, bool)>, LogrankError> {
    let (n, n1) = (engine.n(), engine.n1());
    let mut mask = vec![false; n];
    let mut out = Vec::new();
    for chosen in (0..n).combinations(n1) {
        mask.iter_mut().for_each(|x| *x = false);
        for i in chosen {
            mask[i] = true;
        }
        let raw = engine.raw(&mask);
        out.push((engine.menu_s(&raw, menu)?, raw.is_degenerate()));
    }
    Ok(out)
}

/// Permutation p-values for several menus sharing the same permutations,
/// run sequentially (callers parallelize at a coarser level).
pub fn menu_p_values(
    engine: &LogrankEngine,
    menus: &[Menu],
    n_perm: usize,
    seed: u64,
) -> Result<Vec<f64>, LogrankError> {
    let observed = engine.raw(engine.observed_mask());
    let s_obs: Vec<f64> = menus
        .iter()
        .map(|m| engine.menu_s(&observed, m))
        .collect::<Result<_, _>>()?;
    let mut hits = vec![0usize; menus.len()];
    let mut mask = engine.observed_mask().to_vec();
    for r in 0..n_perm as u64 {
        mask.copy_from_slice(engine.observed_mask());
        let mut g = rng::stream(seed, r);
        rng::shuffle(&mut g, &mut mask);
        let raw = engine.raw(&mask);
        for (k, menu) in menus.iter().enumerate() {
            if is_tie_or_above(engine.menu_s(&raw, menu)?, s_obs[k]) {
                hits[k] += 1;
            }
        }
    }
    Ok(hits.iter().map(|&h| (1 + h) as f64 / (n_perm + 1) as f64).collect())
}
