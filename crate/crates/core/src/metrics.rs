//! Scores a solved dataset against its ground-truth labels.
//!
//! This is the only module that reads `is_spam_label` / `is_spammer_label`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, ProductId, ReviewerId, UnitScore};
use crate::engine::{solve, ScoreState, SolverConfig};
use crate::error::{Error, Result};

/// Averages over the labeled groups plus the reliability shift on attacked
/// products. Group averages are `None` when the group is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub avg_trust_honest: Option<f64>,
    pub avg_trust_spammer: Option<f64>,
    pub avg_honesty_nonspam: Option<f64>,
    pub avg_honesty_spam: Option<f64>,
    /// Mean target reliability after re-solving without the spam reviews.
    pub reliability_before: Option<f64>,
    /// Mean target reliability in the evaluated state.
    pub reliability_after: Option<f64>,
    /// Mean over targets of `|after - before|`.
    pub deviation: f64,
    /// Products that received at least one spam review.
    pub target_products: Vec<ProductId>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn is_spam(v: &crate::domain::Review) -> bool {
    v.is_spam_label == Some(true)
}

/// Reviewers labeled as spammers, or that wrote any spam-labeled review.
pub fn spammer_set(d: &Dataset) -> BTreeSet<&ReviewerId> {
    let mut out: BTreeSet<&ReviewerId> = d
        .reviewers()
        .iter()
        .filter(|r| r.is_spammer_label == Some(true))
        .map(|r| &r.reviewer_id)
        .collect();
    out.extend(
        d.reviews()
            .iter()
            .filter(|v| is_spam(v))
            .map(|v| &v.reviewer_id),
    );
    out
}

pub fn target_set(d: &Dataset) -> BTreeSet<&ProductId> {
    d.reviews()
        .iter()
        .filter(|v| is_spam(v))
        .map(|v| &v.product_id)
        .collect()
}

fn require_labels(d: &Dataset) -> Result<()> {
    if d.has_labels() || d.reviewers().iter().any(|r| r.is_spammer_label.is_some()) {
        Ok(())
    } else {
        Err(Error::MissingLabels)
    }
}

/// Builds the evaluation table for `state`. The "before" reliabilities come
/// from solving `d` with every spam-labeled review removed, using `cfg`.
pub fn evaluate(d: &Dataset, state: &ScoreState, cfg: &SolverConfig) -> Result<EvaluationReport> {
    require_labels(d)?;
    state.check_covers(d)?;
    let spammers = spammer_set(d);
    let targets = target_set(d);

    // Means run in id order so the report does not depend on input order.
    let trust = |spam: bool| {
        mean(
            state
                .trust
                .iter()
                .filter(|(id, _)| d.reviewer(id).is_some() && spammers.contains(id) == spam)
                .map(|(_, t)| *t),
        )
    };
    let honesty = |spam: bool| {
        mean(
            state
                .honesty
                .iter()
                .filter(|(id, _)| d.review(id).is_some_and(|v| is_spam(v) == spam))
                .map(|(_, h)| *h),
        )
    };

    let (before, after, deviation) = if targets.is_empty() {
        (None, None, 0.0)
    } else {
        let clean = d.without_reviews(is_spam);
        let baseline = solve(&clean, cfg)?.state;
        let after = mean(targets.iter().map(|p| state.reliability[*p]));
        let before = mean(targets.iter().map(|p| baseline.reliability[*p]));
        let deviation = mean(
            targets
                .iter()
                .map(|p| (state.reliability[*p] - baseline.reliability[*p]).abs()),
        )
        .unwrap_or(0.0);
        (before, after, deviation)
    };

    Ok(EvaluationReport {
        avg_trust_honest: trust(false),
        avg_trust_spammer: trust(true),
        avg_honesty_nonspam: honesty(false),
        avg_honesty_spam: honesty(true),
        reliability_before: before,
        reliability_after: after,
        deviation,
        target_products: targets.into_iter().cloned().collect(),
    })
}

const ROWS: [&str; 7] = [
    "Average trust of honest reviewers",
    "Average trust of spam attackers",
    "Average honesty of non-spam reviews",
    "Average honesty of spam reviews",
    "Average target reliability before spam",
    "Average target reliability after spam",
    "Deviation in product reliability",
];

impl EvaluationReport {
    pub fn rows(&self) -> [(&'static str, Option<f64>); 7] {
        [
            (ROWS[0], self.avg_trust_honest),
            (ROWS[1], self.avg_trust_spammer),
            (ROWS[2], self.avg_honesty_nonspam),
            (ROWS[3], self.avg_honesty_spam),
            (ROWS[4], self.reliability_before),
            (ROWS[5], self.reliability_after),
            (ROWS[6], Some(self.deviation)),
        ]
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = ROWS.iter().map(|r| r.len()).max().unwrap_or(0);
        writeln!(f, "{:<width$}  {:>8}", "Item", "ROSD")?;
        writeln!(f, "{}", "-".repeat(width + 10))?;
        for (label, value) in self.rows() {
            match value {
                Some(v) => writeln!(f, "{label:<width$}  {v:>8.4}")?,
                None => writeln!(f, "{label:<width$}  {:>8}", "-")?,
            }
        }
        Ok(())
    }
}

/// Precision / recall / F1 of a flagged set against labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub flagged: usize,
    pub actual: usize,
    pub true_positives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Classification {
    /// Empty flag sets have precision 1; an empty positive class has recall 1.
    pub fn from_counts(flagged: usize, actual: usize, true_positives: usize) -> Self {
        let precision = if flagged == 0 {
            1.0
        } else {
            true_positives as f64 / flagged as f64
        };
        let recall = if actual == 0 {
            1.0
        } else {
            true_positives as f64 / actual as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            flagged,
            actual,
            true_positives,
            precision,
            recall,
            f1,
        }
    }

    fn tally(items: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let (mut flagged, mut actual, mut tp) = (0, 0, 0);
        for (flag, truth) in items {
            flagged += usize::from(flag);
            actual += usize::from(truth);
            tp += usize::from(flag && truth);
        }
        Self::from_counts(flagged, actual, tp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub threshold: f64,
    pub spam_reviews: Classification,
    pub spammers: Classification,
}

/// Flags reviews with honesty below `threshold` as spam and reviewers with
/// trust below `threshold` as spammers.
pub fn detect(d: &Dataset, state: &ScoreState, threshold: UnitScore) -> Result<DetectionReport> {
    require_labels(d)?;
    state.check_covers(d)?;
    let t = threshold.get();
    let spammers = spammer_set(d);
    Ok(DetectionReport {
        threshold: t,
        spam_reviews: Classification::tally(
            d.reviews()
                .iter()
                .map(|v| (state.honesty[&v.review_id] < t, is_spam(v))),
        ),
        spammers: Classification::tally(d.reviewers().iter().map(|r| {
            (
                state.trust[&r.reviewer_id] < t,
                spammers.contains(&r.reviewer_id),
            )
        })),
    })
}

impl fmt::Display for DetectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Detection at threshold {:.4}", self.threshold)?;
        writeln!(
            f,
            "{:<14} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "", "flagged", "actual", "prec", "recall", "f1"
        )?;
        for (name, c) in [
            ("spam reviews", &self.spam_reviews),
            ("spammers", &self.spammers),
        ] {
            writeln!(
                f,
                "{name:<14} {:>8} {:>8} {:>8.4} {:>8.4} {:>8.4}",
                c.flagged, c.actual, c.precision, c.recall, c.f1
            )?;
        }
        Ok(())
    }
}
