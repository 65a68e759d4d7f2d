//! Real polynomials (ascending coefficients): evaluation, derivative, and
//! root isolation on an interval by recursing on the derivative.

pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc.mul_add(x, c))
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let len = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    &coeffs[..len]
}

/// Real roots in `[lo, hi]`, ascending. Between consecutive critical points
/// the polynomial is monotone, so each sign change brackets exactly one root
/// and bisection finds it. The zero polynomial reports no roots.
pub fn roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let p = trimmed(coeffs);
    match p.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let r = -p[0] / p[1];
            return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
        }
        _ => {}
    }
    let mut breaks = vec![lo];
    breaks.extend(roots_in(&derivative(p), lo, hi));
    breaks.push(hi);

    let mut roots: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(p, a), eval(p, b));
        let root = if fa == 0.0 {
            Some(a)
        } else if fb == 0.0 {
            Some(b)
        } else if (fa < 0.0) != (fb < 0.0) {
            Some(bisect(p, a, b, fa))
        } else {
            None
        };
        if let Some(r) = root {
            if roots.last().is_none_or(|&last| r > last) {
                roots.push(r);
            }
        }
    }
    roots
}

fn bisect(p: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = eval(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// (min, max) of the polynomial on `[lo, hi]`, from the endpoints and the
/// critical points.
pub fn extrema_in(coeffs: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let mut candidates = vec![lo, hi];
    candidates.extend(roots_in(&derivative(coeffs), lo, hi));
    candidates
        .into_iter()
        .map(|x| eval(coeffs, x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), v| (mn.min(v), mx.max(v)))
}
