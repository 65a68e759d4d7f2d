//! The test report, emitted as text or versioned JSON.

use std::fmt::Write;

use mdir_core::logrank::DirectionStat;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedReport {
    pub alpha: f64,
    pub critical: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliReport {
    pub schema_version: u32,
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    /// Original labels of group 1 and group 2.
    pub labels: [String; 2],
    pub weights: Vec<String>,
    /// Weights removed because they were linearly dependent on earlier ones.
    pub pruned: Vec<String>,
    pub s_n: f64,
    pub df: u32,
    pub alpha: f64,
    pub p_perm: f64,
    pub p_chi2: f64,
    pub reject_perm: bool,
    pub reject_chi2: bool,
    pub n_perm: usize,
    pub seed: u64,
    pub per_direction: Vec<DirectionStat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub randomized: Option<RandomizedReport>,
}

/// Three significant digits, as in published p-value tables.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // round in scientific notation first so 0.9996 becomes 1.00, not 0.9996
    let rounded: f64 = format!("{x:.2e}").parse().unwrap_or(x);
    let mag = rounded.abs().log10().floor() as i32;
    let decimals = (2 - mag).max(0) as usize;
    format!("{rounded:.decimals$}")
}

impl CliReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Multiple-direction logrank test");
        let _ = writeln!(
            s,
            "groups: 1 = {} (n1 = {}), 2 = {} (n2 = {})",
            self.labels[0], self.n1, self.labels[1], self.n2
        );
        let _ = writeln!(s, "weights: {}", self.weights.join(", "));
        if !self.pruned.is_empty() {
            let _ = writeln!(s, "pruned (linearly dependent): {}", self.pruned.join(", "));
        }
        let _ = writeln!(s, "S_n = {:.4}, df = {}", self.s_n, self.df);
        let _ = writeln!(
            s,
            "permutation p = {} ({} permutations, seed {})",
            sig3(self.p_perm),
            self.n_perm,
            self.seed
        );
        let _ = writeln!(s, "chi-square p  = {}", sig3(self.p_chi2));
        let verdict = |r: bool| if r { "reject" } else { "do not reject" };
        let _ = writeln!(
            s,
            "decision at alpha = {}: permutation {}, chi-square {}",
            self.alpha,
            verdict(self.reject_perm),
            verdict(self.reject_chi2)
        );
        if let Some(r) = &self.randomized {
            let _ = writeln!(
                s,
                "randomized permutation test: critical value {:.4}, boundary weight gamma = {:.4}",
                r.critical, r.gamma
            );
        }
        let _ = writeln!(s, "per direction:");
        let _ = writeln!(
            s,
            "  {:<10} {:>10} {:>10} {:>12}",
            "weight", "T", "sigma", "T^2/sigma^2"
        );
        for d in &self.per_direction {
            let _ = writeln!(
                s,
                "  {:<10} {:>10.4} {:>10.4} {:>12.4}",
                d.tag, d.t, d.sigma, d.studentized_sq
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_digits() {
        assert_eq!(sig3(0.007_123), "0.00712");
        assert_eq!(sig3(0.2549), "0.255");
        assert_eq!(sig3(0.018), "0.0180");
        assert_eq!(sig3(1.0), "1.00");
        assert_eq!(sig3(0.000_099_96), "0.000100");
        assert_eq!(sig3(0.9996), "1.00");
    }
}
