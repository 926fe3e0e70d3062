use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::answers::Answer;
use super::runner::EvalRecord;
use crate::schema::{GoldLabel, TaskKind, YesNo};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("no records to score")]
    Empty,
    #[error("records mix benchmarks {0:?} and {1:?}")]
    MixedBenchmarks(String, String),
    #[error("records mix endpoints {0:?} and {1:?}")]
    MixedEndpoints(String, String),
}

/// Binary confusion counts with "Yes" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn f1(&self) -> Option<f64> {
        let denom = 2 * self.tp + self.fp + self.fn_;
        (denom > 0).then(|| 2.0 * self.tp as f64 / denom as f64)
    }
}

/// Additive counts for one category; `merge` is associative and
/// commutative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub n: u64,
    pub n_parsed: u64,
    pub n_correct: u64,
    pub abs_error_sum: u64,
    pub n_age_parsed: u64,
    pub n_age: u64,
    pub n_yes_no: u64,
    pub confusion: Confusion,
}

impl Tally {
    /// Adds a scored record. Description questions are not scored.
    pub fn add(&mut self, r: &EvalRecord) -> bool {
        if r.qa.task == TaskKind::Description {
            return false;
        }
        self.n += 1;
        let parsed = r.parsed.is_parsed();
        self.n_parsed += parsed as u64;
        match (&r.qa.gold, &r.parsed.answer) {
            (GoldLabel::Number(g), a) => {
                self.n_age += 1;
                if let Answer::Number(p) = a {
                    self.n_age_parsed += 1;
                    self.abs_error_sum += g.abs_diff(*p) as u64;
                    self.n_correct += (g == p) as u64;
                }
            }
            (GoldLabel::Boolean(g), a) => {
                self.n_yes_no += 1;
                if let Answer::YesNo(p) = a {
                    self.n_correct += (g == p) as u64;
                    let c = &mut self.confusion;
                    match (p, g) {
                        (YesNo::Yes, YesNo::Yes) => c.tp += 1,
                        (YesNo::Yes, YesNo::No) => c.fp += 1,
                        (YesNo::No, YesNo::No) => c.tn += 1,
                        (YesNo::No, YesNo::Yes) => c.fn_ += 1,
                    }
                }
            }
            (GoldLabel::Letter(g), Answer::Letter(p)) => self.n_correct += (g == p) as u64,
            _ => {}
        }
        true
    }

    pub fn merge(&mut self, other: &Tally) {
        self.n += other.n;
        self.n_parsed += other.n_parsed;
        self.n_correct += other.n_correct;
        self.abs_error_sum += other.abs_error_sum;
        self.n_age_parsed += other.n_age_parsed;
        self.n_age += other.n_age;
        self.n_yes_no += other.n_yes_no;
        self.confusion.tp += other.confusion.tp;
        self.confusion.fp += other.confusion.fp;
        self.confusion.tn += other.confusion.tn;
        self.confusion.fn_ += other.confusion.fn_;
    }

    fn ratio(a: u64, b: u64) -> f64 {
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    pub fn stats(&self, category: &str) -> TaskStats {
        TaskStats {
            category: category.to_string(),
            n: self.n,
            n_parsed: self.n_parsed,
            n_correct: self.n_correct,
            accuracy: Self::ratio(self.n_correct, self.n),
            parse_rate: Self::ratio(self.n_parsed, self.n),
            mae: (self.n_age_parsed > 0).then(|| self.abs_error_sum as f64 / self.n_age_parsed as f64),
            mae_n: self.n_age_parsed,
            mae_excluded: self.n_age - self.n_age_parsed,
            f1: if self.n_yes_no > 0 { self.confusion.f1() } else { None },
            confusion: (self.n_yes_no > 0).then_some(self.confusion),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStats {
    pub category: String,
    pub n: u64,
    pub n_parsed: u64,
    pub n_correct: u64,
    /// Unparseable answers count as incorrect.
    pub accuracy: f64,
    pub parse_rate: f64,
    /// Over parsed age answers only.
    pub mae: Option<f64>,
    pub mae_n: u64,
    pub mae_excluded: u64,
    /// "Yes" class, over parsed yes/no answers.
    pub f1: Option<f64>,
    pub confusion: Option<Confusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub n: u64,
    pub n_parsed: u64,
    pub n_correct: u64,
    pub accuracy: f64,
    pub parse_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: Option<u64>,
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub benchmark: String,
    pub endpoint_id: String,
    pub seed: Option<u64>,
    pub timestamp: Option<String>,
    /// Sorted by category.
    pub tasks: Vec<TaskStats>,
    pub overall: Overall,
    pub n_unscored: u64,
}

impl MetricsReport {
    pub fn task(&self, category: &str) -> Option<&TaskStats> {
        self.tasks.iter().find(|t| t.category == category)
    }
}

/// Per-category tallies of a record set.
pub fn tally(records: &[EvalRecord]) -> (BTreeMap<String, Tally>, u64) {
    let mut by_cat: BTreeMap<String, Tally> = BTreeMap::new();
    let mut unscored = 0;
    for r in records {
        if !by_cat.entry(r.qa.category.clone()).or_default().add(r) {
            unscored += 1;
        }
    }
    by_cat.retain(|_, t| t.n > 0);
    (by_cat, unscored)
}

pub fn score(records: &[EvalRecord], meta: &RunMeta) -> Result<MetricsReport, ScoreError> {
    let first = records.first().ok_or(ScoreError::Empty)?;
    for r in records {
        if r.benchmark != first.benchmark {
            return Err(ScoreError::MixedBenchmarks(first.benchmark.clone(), r.benchmark.clone()));
        }
        if r.endpoint_id != first.endpoint_id {
            return Err(ScoreError::MixedEndpoints(first.endpoint_id.clone(), r.endpoint_id.clone()));
        }
    }
    let (by_cat, n_unscored) = tally(records);
    let mut all = Tally::default();
    for t in by_cat.values() {
        all.merge(t);
    }
    let o = all.stats("overall");
    Ok(MetricsReport {
        benchmark: first.benchmark.clone(),
        endpoint_id: first.endpoint_id.clone(),
        seed: meta.seed,
        timestamp: meta.timestamp.clone(),
        tasks: by_cat.iter().map(|(c, t)| t.stats(c)).collect(),
        overall: Overall {
            n: o.n,
            n_parsed: o.n_parsed,
            n_correct: o.n_correct,
            accuracy: o.accuracy,
            parse_rate: o.parse_rate,
        },
        n_unscored,
    })
}
