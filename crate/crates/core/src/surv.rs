//! Two-sample right-censored data and the pooled risk table.
//!
//! Everything downstream reads the [`RiskTable`]: one row per distinct
//! observed time with pooled and group-1 at-risk/event counts plus the pooled
//! Kaplan–Meier left limit. Ties are kept as-is (an event count may exceed
//! one), and a subject censored at `t` is still at risk at `t`.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurvError {
    #[error("EmptyGroup: group {group} has no subjects")]
    EmptyGroup { group: String },
    #[error("BadLabelCardinality: expected exactly 2 distinct group labels, found {found}")]
    BadLabelCardinality { found: usize },
    #[error("NegativeTime: record {index} has time {time} < 0")]
    NegativeTime { index: usize, time: f64 },
    #[error("NonFiniteTime: record {index} has non-finite time {time}")]
    NonFiniteTime { index: usize, time: f64 },
    #[error("BadStatus: record {index} has status {status}, expected 0 or 1")]
    BadStatus { index: usize, status: i64 },
}

/// Group index after label mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    One,
    Two,
}

impl Group {
    pub fn other(self) -> Group {
        match self {
            Group::One => Group::Two,
            Group::Two => Group::One,
        }
    }
}

/// One input row before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub time: f64,
    pub status: i64,
    pub group: String,
}

impl RawRecord {
    pub fn new(time: f64, status: i64, group: impl Into<String>) -> Self {
        RawRecord {
            time,
            status,
            group: group.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subject {
    pub time: f64,
    /// `true` when the event was observed, `false` when censored.
    pub event: bool,
    pub group: Group,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleData {
    subjects: Vec<Subject>,
    n1: usize,
    n2: usize,
    labels: [String; 2],
}

impl TwoSampleData {
    /// Build from already-indexed subjects. Labels default to `"1"`/`"2"`.
    pub fn from_subjects(subjects: Vec<Subject>) -> Result<Self, SurvError> {
        Self::with_labels(subjects, ["1".to_string(), "2".to_string()])
    }

    pub fn with_labels(subjects: Vec<Subject>, labels: [String; 2]) -> Result<Self, SurvError> {
        for (index, s) in subjects.iter().enumerate() {
            check_time(index, s.time)?;
        }
        let n1 = subjects.iter().filter(|s| s.group == Group::One).count();
        let n2 = subjects.len() - n1;
        if n1 == 0 {
            return Err(SurvError::EmptyGroup {
                group: labels[0].clone(),
            });
        }
        if n2 == 0 {
            return Err(SurvError::EmptyGroup {
                group: labels[1].clone(),
            });
        }
        Ok(TwoSampleData {
            subjects,
            n1,
            n2,
            labels,
        })
    }

    /// Convenience constructor from per-group `(time, event)` samples.
    pub fn from_samples(group1: &[(f64, bool)], group2: &[(f64, bool)]) -> Result<Self, SurvError> {
        let subjects = group1
            .iter()
            .map(|&(time, event)| Subject {
                time,
                event,
                group: Group::One,
            })
            .chain(group2.iter().map(|&(time, event)| Subject {
                time,
                event,
                group: Group::Two,
            }))
            .collect();
        Self::from_subjects(subjects)
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn n(&self) -> usize {
        self.subjects.len()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Original labels of group 1 and group 2.
    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn n_events(&self) -> usize {
        self.subjects.iter().filter(|s| s.event).count()
    }

    /// The same data with the two groups swapped (labels follow).
    pub fn swapped(&self) -> TwoSampleData {
        TwoSampleData {
            subjects: self
                .subjects
                .iter()
                .map(|s| Subject {
                    group: s.group.other(),
                    ..*s
                })
                .collect(),
            n1: self.n2,
            n2: self.n1,
            labels: [self.labels[1].clone(), self.labels[0].clone()],
        }
    }
}

fn check_time(index: usize, time: f64) -> Result<(), SurvError> {
    if !time.is_finite() {
        return Err(SurvError::NonFiniteTime { index, time });
    }
    if time < 0.0 {
        return Err(SurvError::NegativeTime { index, time });
    }
    Ok(())
}

/// Validate raw records. The lexicographically smaller label becomes group 1.
pub fn ingest<I>(records: I) -> Result<TwoSampleData, SurvError>
where
    I: IntoIterator<Item = RawRecord>,
{
    let records: Vec<RawRecord> = records.into_iter().collect();
    for (index, r) in records.iter().enumerate() {
        check_time(index, r.time)?;
        if r.status != 0 && r.status != 1 {
            return Err(SurvError::BadStatus {
                index,
                status: r.status,
            });
        }
    }
    let mut labels: Vec<&str> = records.iter().map(|r| r.group.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    match labels.len() {
        0 => return Err(SurvError::EmptyGroup { group: "<none>".into() }),
        1 => {
            return Err(SurvError::EmptyGroup {
                group: format!("other than {:?}", labels[0]),
            })
        }
        2 => {}
        found => return Err(SurvError::BadLabelCardinality { found }),
    }
    let labels = [labels[0].to_string(), labels[1].to_string()];
    let subjects = records
        .iter()
        .map(|r| Subject {
            time: r.time,
            event: r.status == 1,
            group: if r.group == labels[0] { Group::One } else { Group::Two },
        })
        .collect();
    TwoSampleData::with_labels(subjects, labels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRow {
    pub time: f64,
    /// Pooled at-risk count Y(t).
    pub at_risk: usize,
    /// Group-1 at-risk count Y₁(t).
    pub at_risk1: usize,
    /// Pooled event count ΔN(t).
    pub events: usize,
    /// Group-1 event count ΔN₁(t).
    pub events1: usize,
    /// Pooled Kaplan–Meier distribution function just before `time`.
    pub km_left: f64,
}

impl RiskRow {
    pub fn at_risk2(&self) -> usize {
        self.at_risk - self.at_risk1
    }

    pub fn events2(&self) -> usize {
        self.events - self.events1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    pub rows: Vec<RiskRow>,
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
}

impl RiskTable {
    pub fn n_events(&self) -> usize {
        self.rows.iter().map(|r| r.events).sum()
    }
}

/// Subjects sorted by time together with the row each one falls in.
///
/// Pooled quantities (times, `y`, `d`, `km_left`) depend only on the sorted
/// times and statuses, so a relabelling of groups only changes `y1`/`d1`.
/// The permutation engine keeps one layout and recomputes those two columns.
#[derive(Debug, Clone)]
pub struct PooledLayout {
    pub table: RiskTable,
    /// `row_start[k]..row_start[k + 1]` are the sorted positions in row `k`.
    pub row_start: Vec<usize>,
    /// Event flag per sorted position.
    pub event: Vec<bool>,
    /// Observed group-1 membership per sorted position.
    pub is_group1: Vec<bool>,
}

pub fn pooled_layout(data: &TwoSampleData) -> PooledLayout {
    let mut sorted: Vec<Subject> = data.subjects().to_vec();
    // Stable sort keeps ties in input order; row contents do not depend on it.
    sorted.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap_or(Ordering::Equal));

    let n = sorted.len();
    let mut rows = Vec::new();
    let mut row_start = Vec::new();
    let mut at_risk = n;
    let mut at_risk1 = data.n1();
    let mut survival = 1.0_f64;
    let mut i = 0;
    while i < n {
        let time = sorted[i].time;
        let mut j = i;
        let (mut events, mut events1, mut leaving1) = (0, 0, 0);
        while j < n && sorted[j].time == time {
            let s = &sorted[j];
            if s.group == Group::One {
                leaving1 += 1;
                if s.event {
                    events1 += 1;
                }
            }
            if s.event {
                events += 1;
            }
            j += 1;
        }
        rows.push(RiskRow {
            time,
            at_risk,
            at_risk1,
            events,
            events1,
            km_left: (1.0 - survival).clamp(0.0, 1.0),
        });
        row_start.push(i);
        survival *= 1.0 - events as f64 / at_risk as f64;
        at_risk -= j - i;
        at_risk1 -= leaving1;
        i = j;
    }
    row_start.push(n);

    PooledLayout {
        table: RiskTable {
            rows,
            n,
            n1: data.n1(),
            n2: data.n2(),
        },
        row_start,
        event: sorted.iter().map(|s| s.event).collect(),
        is_group1: sorted.iter().map(|s| s.group == Group::One).collect(),
    }
}

pub fn build_risk_table(data: &TwoSampleData) -> RiskTable {
    pooled_layout(data).table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HazardGroup {
    Pooled,
    One,
    Two,
}

/// Nelson–Aalen jumps `d_g / y_g` per row (zero where nobody is at risk).
pub fn nelson_aalen_increments(rt: &RiskTable, group: HazardGroup) -> Vec<(f64, f64)> {
    rt.rows
        .iter()
        .map(|r| {
            let (d, y) = match group {
                HazardGroup::Pooled => (r.events, r.at_risk),
                HazardGroup::One => (r.events1, r.at_risk1),
                HazardGroup::Two => (r.events2(), r.at_risk2()),
            };
            let inc = if y > 0 { d as f64 / y as f64 } else { 0.0 };
            (r.time, inc)
        })
        .collect()
}
