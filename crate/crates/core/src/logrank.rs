//! Vector of weighted logrank statistics, its covariance estimate, and the
//! multiple-direction quadratic form.
//!
//! Per risk-table row the contribution to `T(w)` is `w(F̂(t−))·(d1 − y1·d/y)`
//! and to `Σ̂(r,s)` is `w_r·w_s·(y1·(y − y1)/y)·(d/y)`, both scaled by
//! `n/(n1·n2)` (square root for `T`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{chi2_quantile, chi2_sf, pinv_quadratic_form, NumericsError, SymMatrix};
use crate::surv::{pooled_layout, RiskTable, TwoSampleData};
use crate::weights::WeightSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogrankError {
    #[error("NoEvents: the data contain no observed events, the statistic is undefined")]
    NoEvents,
    #[error("InvalidAlpha: level {alpha} is not in (0, 1)")]
    InvalidAlpha { alpha: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionStat {
    pub tag: String,
    pub t: f64,
    /// Square root of the diagonal covariance entry.
    pub sigma: f64,
    /// `t² / sigma²`, zero when `sigma` is zero.
    pub studentized_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatResult {
    pub t_vec: Vec<f64>,
    pub sigma_hat: SymMatrix,
    pub s_n: f64,
    pub df_used: u32,
    /// Numerical rank of `sigma_hat`.
    pub rank: usize,
    pub per_direction: Vec<DirectionStat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub stat: StatResult,
    pub p_chi2: f64,
}

impl TestOutcome {
    pub fn critical_value(&self, alpha: f64) -> f64 {
        chi2_quantile(1.0 - alpha, self.stat.df_used)
    }

    pub fn reject_at(&self, alpha: f64) -> bool {
        self.stat.s_n > self.critical_value(alpha)
    }
}

fn scale(rt: &RiskTable) -> f64 {
    rt.n as f64 / (rt.n1 as f64 * rt.n2 as f64)
}

fn weight_rows(rt: &RiskTable, ws: &WeightSet) -> Vec<f64> {
    let m = ws.len();
    let mut out = Vec::with_capacity(rt.rows.len() * m);
    for row in &rt.rows {
        out.extend(ws.weights().iter().map(|w| w.eval_unchecked(row.km_left)));
    }
    out
}

pub fn compute_t_vec(rt: &RiskTable, ws: &WeightSet) -> Result<Vec<f64>, LogrankError> {
    if rt.n_events() == 0 {
        return Err(LogrankError::NoEvents);
    }
    let m = ws.len();
    let wv = weight_rows(rt, ws);
    let mut t = vec![0.0; m];
    for (k, row) in rt.rows.iter().enumerate() {
        if row.at_risk == 0 || row.events == 0 {
            continue;
        }
        let oe = row.events1 as f64 - row.at_risk1 as f64 * row.events as f64 / row.at_risk as f64;
        for (ti, w) in t.iter_mut().zip(&wv[k * m..(k + 1) * m]) {
            *ti += w * oe;
        }
    }
    let c = scale(rt).sqrt();
    t.iter_mut().for_each(|x| *x *= c);
    Ok(t)
}

pub fn compute_sigma(rt: &RiskTable, ws: &WeightSet) -> Result<SymMatrix, LogrankError> {
    if rt.n_events() == 0 {
        return Err(LogrankError::NoEvents);
    }
    let m = ws.len();
    let wv = weight_rows(rt, ws);
    let mut upper = vec![0.0; m * (m + 1) / 2];
    for (k, row) in rt.rows.iter().enumerate() {
        if row.at_risk == 0 || row.events == 0 {
            continue;
        }
        let y = row.at_risk as f64;
        let y1 = row.at_risk1 as f64;
        let v = y1 * (y - y1) / y * (row.events as f64 / y);
        if v == 0.0 {
            continue;
        }
        accumulate_upper(&mut upper, &wv[k * m..(k + 1) * m], v);
    }
    let c = scale(rt);
    upper.iter_mut().for_each(|x| *x *= c);
    Ok(SymMatrix::from_upper(m, &upper))
}

#[inline]
fn accumulate_upper(upper: &mut [f64], w: &[f64], v: f64) {
    let m = w.len();
    let mut idx = 0;
    for r in 0..m {
        let wr = w[r] * v;
        for ws in &w[r..] {
            upper[idx] += wr * ws;
            idx += 1;
        }
    }
}

/// Quadratic form, df and per-direction diagnostics from `T` and `Σ̂`.
pub fn assemble(
    t_vec: Vec<f64>,
    sigma_hat: SymMatrix,
    tags: &[String],
    verified_independent: bool,
) -> Result<StatResult, LogrankError> {
    let (s_n, rank) = pinv_quadratic_form(&sigma_hat, &t_vec)?;
    let s_n = s_n.max(0.0);
    let m = t_vec.len();
    let df_used = if verified_independent { m } else { rank.max(1) } as u32;
    let per_direction: Vec<DirectionStat> = (0..m)
        .map(|i| {
            let var = sigma_hat.get(i, i);
            let t = t_vec[i];
            DirectionStat {
                tag: tags[i].clone(),
                t,
                sigma: var.max(0.0).sqrt(),
                studentized_sq: if var > 0.0 { t * t / var } else { 0.0 },
            }
        })
        .collect();
    debug_assert!(
        bound_holds(s_n, &per_direction),
        "quadratic form {s_n} below a studentized direction: {per_direction:?}"
    );
    Ok(StatResult {
        t_vec,
        sigma_hat,
        s_n,
        df_used,
        rank,
        per_direction,
    })
}

/// `S ≥ maxᵢ Tᵢ²/σ̂ᵢ²` up to a relative slack of 1e-9.
pub fn bound_holds(s_n: f64, per_direction: &[DirectionStat]) -> bool {
    let max_stud = per_direction.iter().map(|d| d.studentized_sq).fold(0.0, f64::max);
    s_n >= max_stud - 1e-9 * max_stud.max(1.0)
}

pub fn compute_sn(rt: &RiskTable, ws: &WeightSet) -> Result<StatResult, LogrankError> {
    let t = compute_t_vec(rt, ws)?;
    let sigma = compute_sigma(rt, ws)?;
    assemble(t, sigma, &ws.tags(), ws.verified_independent())
}

pub fn chi2_test(stat: StatResult, alpha: f64) -> Result<TestOutcome, LogrankError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LogrankError::InvalidAlpha { alpha });
    }
    let p_chi2 = if stat.s_n > 0.0 {
        chi2_sf(stat.s_n, stat.df_used)
    } else {
        1.0
    };
    Ok(TestOutcome { stat, p_chi2 })
}

/// Raw `T` and upper-packed `Σ̂` for one labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStat {
    pub t: Vec<f64>,
    pub upper: Vec<f64>,
}

impl RawStat {
    /// True when every covariance entry is zero.
    pub fn is_degenerate(&self) -> bool {
        self.upper.iter().all(|&x| x == 0.0)
    }
}

/// A sub-menu of the engine's weights, given as indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Menu {
    pub indices: Vec<usize>,
    pub verified_independent: bool,
}

/// Statistic evaluator for a fixed pooled sample under arbitrary group-1
/// masks. Times, statuses, the pooled Kaplan–Meier left limits and the weight
/// values are computed once; each evaluation only recounts `y1` and `d1`.
#[derive(Debug, Clone)]
pub struct LogrankEngine {
    n: usize,
    n1: usize,
    scale: f64,
    m: usize,
    tags: Vec<String>,
    verified_independent: bool,
    // per row
    bounds: Vec<(usize, usize)>,
    at_risk: Vec<f64>,
    events: Vec<f64>,
    weights: Vec<f64>,
    // per sorted position
    event: Vec<bool>,
    observed: Vec<bool>,
}

impl LogrankEngine {
    pub fn new(data: &TwoSampleData, ws: &WeightSet) -> Result<Self, LogrankError> {
        let layout = pooled_layout(data);
        let rt = &layout.table;
        if rt.n_events() == 0 {
            return Err(LogrankError::NoEvents);
        }
        // Rows without events never contribute. Their subjects still count
        // towards earlier rows' y1 because `raw` scans every position.
        let mut bounds = Vec::new();
        let mut at_risk = Vec::new();
        let mut events = Vec::new();
        let mut weights = Vec::new();
        for (k, row) in rt.rows.iter().enumerate() {
            if row.events == 0 {
                continue;
            }
            bounds.push((layout.row_start[k], layout.row_start[k + 1]));
            at_risk.push(row.at_risk as f64);
            events.push(row.events as f64);
            weights.extend(ws.weights().iter().map(|w| w.eval_unchecked(row.km_left)));
        }
        Ok(LogrankEngine {
            n: rt.n,
            n1: rt.n1,
            scale: scale(rt),
            m: ws.len(),
            tags: ws.tags(),
            verified_independent: ws.verified_independent(),
            bounds,
            at_risk,
            events,
            weights,
            event: layout.event,
            observed: layout.is_group1,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    /// Observed group-1 mask in sorted order.
    pub fn observed_mask(&self) -> &[bool] {
        &self.observed
    }

    /// `T` and `Σ̂` for a group-1 mask over sorted positions. The mask must
    /// mark exactly `n1` positions.
    pub fn raw(&self, is_group1: &[bool]) -> RawStat {
        debug_assert_eq!(is_group1.len(), self.n);
        let m = self.m;
        let mut t = vec![0.0; m];
        let mut upper = vec![0.0; m * (m + 1) / 2];
        let rows = self.at_risk.len();
        // walk rows backwards; y1 at row k counts group-1 positions ≥ start(k)
        let mut y1 = 0usize;
        let mut pos = self.n;
        for k in (0..rows).rev() {
            let (start, end) = self.bounds[k];
            let mut d1 = 0usize;
            for p in (start..pos).rev() {
                if is_group1[p] {
                    y1 += 1;
                    if p < end && self.event[p] {
                        d1 += 1;
                    }
                }
            }
            pos = start;
            let y = self.at_risk[k];
            let d = self.events[k];
            let y1f = y1 as f64;
            let oe = d1 as f64 - y1f * d / y;
            let v = y1f * (y - y1f) / y * (d / y);
            let w = &self.weights[k * m..(k + 1) * m];
            if oe != 0.0 {
                for (ti, wi) in t.iter_mut().zip(w) {
                    *ti += wi * oe;
                }
            }
            if v != 0.0 {
                accumulate_upper(&mut upper, w, v);
            }
        }
        let c = self.scale.sqrt();
        t.iter_mut().for_each(|x| *x *= c);
        upper.iter_mut().for_each(|x| *x *= self.scale);
        RawStat { t, upper }
    }

    /// Full statistic over all engine weights.
    pub fn stat(&self, is_group1: &[bool]) -> Result<StatResult, LogrankError> {
        let raw = self.raw(is_group1);
        let sigma = SymMatrix::from_upper(self.m, &raw.upper);
        assemble(raw.t, sigma, &self.tags, self.verified_independent)
    }

    /// Just `S` over all engine weights.
    pub fn s_value(&self, is_group1: &[bool]) -> Result<f64, LogrankError> {
        let raw = self.raw(is_group1);
        self.menu_s(&raw, &self.full_menu())
    }

    pub fn full_menu(&self) -> Menu {
        Menu {
            indices: (0..self.m).collect(),
            verified_independent: self.verified_independent,
        }
    }

    /// `S` and df for a sub-menu from an already computed raw statistic.
    pub fn menu_stat(&self, raw: &RawStat, menu: &Menu) -> Result<(f64, u32), LogrankError> {
        let k = menu.indices.len();
        let t: Vec<f64> = menu.indices.iter().map(|&i| raw.t[i]).collect();
        let full = SymMatrix::from_upper(self.m, &raw.upper);
        let sigma = full.submatrix(&menu.indices);
        let (s, rank) = pinv_quadratic_form(&sigma, &t)?;
        let df = if menu.verified_independent { k } else { rank.max(1) };
        let s = s.max(0.0);
        #[cfg(debug_assertions)]
        {
            let per: Vec<DirectionStat> = (0..k)
                .map(|i| {
                    let var = sigma.get(i, i);
                    DirectionStat {
                        tag: String::new(),
                        t: t[i],
                        sigma: var.max(0.0).sqrt(),
                        studentized_sq: if var > 0.0 { t[i] * t[i] / var } else { 0.0 },
                    }
                })
                .collect();
            debug_assert!(bound_holds(s, &per), "quadratic form {s} below a studentized direction");
        }
        Ok((s, df as u32))
    }

    pub fn menu_s(&self, raw: &RawStat, menu: &Menu) -> Result<f64, LogrankError> {
        self.menu_stat(raw, menu).map(|(s, _)| s)
    }
}
