//! Central and noncentral chi-square distribution functions via the
//! regularized incomplete gamma function (series below a + 1, Lentz continued
//! fraction above).

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// ln Γ(x) for x > 0 (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = sum;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x).min(1.0)
    } else {
        (1.0 - gamma_continued_fraction(a, x)).clamp(0.0, 1.0)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_series(a, x)).clamp(0.0, 1.0)
    } else {
        gamma_continued_fraction(a, x).clamp(0.0, 1.0)
    }
}

pub fn chi2_cdf(x: f64, df: u32) -> f64 {
    if x.is_nan() || df == 0 {
        return f64::NAN;
    }
    gamma_p(df as f64 / 2.0, x / 2.0)
}

/// Upper tail 1 − cdf, computed directly for accuracy in the tail.
pub fn chi2_sf(x: f64, df: u32) -> f64 {
    if x.is_nan() || df == 0 {
        return f64::NAN;
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

/// Inverse of [`chi2_cdf`] by bracketing and bisection; NaN outside (0, 1).
pub fn chi2_quantile(p: f64, df: u32) -> f64 {
    if !(p > 0.0 && p < 1.0) || df == 0 {
        return f64::NAN;
    }
    let k = df as f64;
    let mut lo = 0.0;
    let mut hi = k + 10.0 * (2.0 * k).sqrt() + 10.0;
    while chi2_cdf(hi, df) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    -mean + k as f64 * mean.ln() - ln_gamma(k as f64 + 1.0)
}

/// Noncentral χ² CDF as a Poisson(λ/2) mixture of central χ²_{df+2k}. The
/// series starts at the Poisson mode and stops once the neglected Poisson
/// mass on each side is below 1e-12.
pub fn noncentral_chi2_cdf(x: f64, df: u32, lambda: f64) -> f64 {
    if x.is_nan() || lambda.is_nan() || df == 0 || lambda < 0.0 {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return chi2_cdf(x, df);
    }
    const TAIL: f64 = 1e-12;
    let mean = lambda / 2.0;
    let mode = mean.floor() as u64;
    let term = |k: u64| ln_poisson_pmf(k, mean).exp() * chi2_cdf(x, df + 2 * k as u32);

    let mut total = 0.0;
    // Downward from the mode; pmf decreases geometrically below it.
    let mut k = mode;
    loop {
        let w = ln_poisson_pmf(k, mean).exp();
        total += term(k);
        // remaining lower mass ≤ w · k / (mean − k + 1) when k ≤ mean
        if k == 0 || w * (k as f64) / (mean - k as f64 + 1.0) < TAIL {
            break;
        }
        k -= 1;
    }
    let mut k = mode + 1;
    loop {
        let w = ln_poisson_pmf(k, mean).exp();
        total += term(k);
        let ratio = mean / (k as f64 + 1.0);
        if ratio < 1.0 && w * ratio / (1.0 - ratio) < TAIL {
            break;
        }
        k += 1;
        if k > 1_000_000 {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}
