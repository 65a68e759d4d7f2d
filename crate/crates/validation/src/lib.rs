//! Shared reporting for the acceptance suite in `tests/acceptance.rs`.

use std::time::Instant;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    /// Indented detail lines printed under the verdict.
    pub details: Vec<String>,
    pub seconds: f64,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds
        )
    }
}

/// Runs one criterion, timing it and printing its verdict as soon as it is known.
pub fn run_criterion(id: u32, title: &str, body: impl FnOnce(&mut Vec<String>) -> bool) -> Verdict {
    let start = Instant::now();
    let mut details = Vec::new();
    let pass = body(&mut details);
    let v = Verdict {
        id,
        title: title.to_string(),
        pass,
        details,
        seconds: start.elapsed().as_secs_f64(),
    };
    println!("{}", v.line());
    for d in &v.details {
        println!("      {d}");
    }
    v
}

/// Binomial standard error of a proportion.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
