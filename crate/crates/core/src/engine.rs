//! Trust / honesty / reliability fixed point.
//!
//! Three mutually dependent scores are computed over a [`Dataset`]:
//!
//! * review honesty `H(v) = 1 - |s - R(p)| / W`, where `s` is the normalized
//!   score, `R(p)` the reliability of the reviewed product and
//!   `W = max(R, 1 - R)` the largest deviation any score could have from it;
//! * reviewer trust `T(r) = Σ seq·H / Σ seq` over the reviewer's reviews, so
//!   recent reviews weigh more;
//! * product reliability `R(p) = Σ T·H·s / Σ T·H` over the product's reviews.
//!
//! [`solve`] repeats [`iterate_once`] until the largest absolute change across
//! all three maps drops to the tolerance. One pass is staged: every honesty is
//! recomputed from the previous reliabilities, then every trust from the new
//! honesties, then every reliability from the new trusts and honesties.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{normalize_score, Dataset, ProductId, ReviewId, ReviewerId, UnitScore};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: u32 = 1000;

/// Reliability of a product nobody has reviewed, and trust of a reviewer with
/// no reviews.
pub const NO_EVIDENCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence threshold on the max absolute change of one pass.
    pub tolerance: f64,
    pub max_iterations: u32,
    /// Starting value for every trust, honesty and reliability.
    pub initial_value: UnitScore,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            initial_value: UnitScore::HALF,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || !self.tolerance.is_finite() {
            return Err(Error::Config(format!(
                "tolerance must be a positive finite number, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_initial_value(mut self, value: UnitScore) -> Self {
        self.initial_value = value;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: u32) -> Self {
        self.max_iterations = max_iterations;
        self
    }
}

/// Current score of every reviewer, review and product.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreState {
    pub trust: BTreeMap<ReviewerId, f64>,
    pub honesty: BTreeMap<ReviewId, f64>,
    pub reliability: BTreeMap<ProductId, f64>,
}

impl ScoreState {
    /// Every node of `d` set to `value`.
    pub fn uniform(d: &Dataset, value: UnitScore) -> Self {
        let v = value.get();
        Self {
            trust: d
                .reviewers()
                .iter()
                .map(|r| (r.reviewer_id.clone(), v))
                .collect(),
            honesty: d
                .reviews()
                .iter()
                .map(|r| (r.review_id.clone(), v))
                .collect(),
            reliability: d
                .products()
                .iter()
                .map(|p| (p.product_id.clone(), v))
                .collect(),
        }
    }

    /// Largest absolute entrywise difference. Both states must have the same
    /// keys; missing keys count as a difference of infinity.
    pub fn max_abs_diff(&self, other: &ScoreState) -> f64 {
        fn side<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            a.iter()
                .map(|(k, x)| b.get(k).map_or(f64::INFINITY, |y| (x - y).abs()))
                .fold(0.0, f64::max)
        }
        side(&self.trust, &other.trust)
            .max(side(&self.honesty, &other.honesty))
            .max(side(&self.reliability, &other.reliability))
    }

    pub fn check_covers(&self, d: &Dataset) -> Result<()> {
        if self.trust.len() != d.reviewers().len()
            || self.honesty.len() != d.reviews().len()
            || self.reliability.len() != d.products().len()
        {
            return Err(Error::Coverage(format!(
                "state has {}/{}/{} trust/honesty/reliability entries, dataset has {}/{}/{} reviewers/reviews/products",
                self.trust.len(),
                self.honesty.len(),
                self.reliability.len(),
                d.reviewers().len(),
                d.reviews().len(),
                d.products().len()
            )));
        }
        if let Some(r) = d
            .reviewers()
            .iter()
            .find(|r| !self.trust.contains_key(&r.reviewer_id))
        {
            return Err(Error::Coverage(format!(
                "no trust for reviewer `{}`",
                r.reviewer_id
            )));
        }
        if let Some(v) = d
            .reviews()
            .iter()
            .find(|v| !self.honesty.contains_key(&v.review_id))
        {
            return Err(Error::Coverage(format!(
                "no honesty for review `{}`",
                v.review_id
            )));
        }
        if let Some(p) = d
            .products()
            .iter()
            .find(|p| !self.reliability.contains_key(&p.product_id))
        {
            return Err(Error::Coverage(format!(
                "no reliability for product `{}`",
                p.product_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub state: ScoreState,
    pub iterations: u32,
    pub converged: bool,
    /// Max absolute change of the last pass.
    pub final_delta: f64,
}

/// Largest possible `|s - r|` for a score in `[0, 1]`.
pub fn max_deviation(reliability: UnitScore) -> f64 {
    max_deviation_raw(reliability.get())
}

fn max_deviation_raw(r: f64) -> f64 {
    if r > 0.5 {
        r
    } else if r < 0.5 {
        1.0 - r
    } else {
        0.5
    }
}

fn honesty_raw(s: f64, r: f64) -> f64 {
    (1.0 - (s - r).abs() / max_deviation_raw(r)).clamp(0.0, 1.0)
}

/// Honesty of a review with normalized score `s` on a product of reliability `r`.
pub fn review_honesty(s: UnitScore, reliability: UnitScore) -> UnitScore {
    UnitScore::clamped(honesty_raw(s.get(), reliability.get()))
}

/// Recency-weighted mean honesty; `seq` is the review's position in the
/// reviewer's own history. An empty history yields [`NO_EVIDENCE`].
pub fn reviewer_trust(reviews: impl IntoIterator<Item = (u32, UnitScore)>) -> UnitScore {
    let (num, den) = reviews
        .into_iter()
        .fold((0.0, 0.0), |(num, den), (seq, h)| {
            let w = f64::from(seq);
            (num + w * h.get(), den + w)
        });
    if den > 0.0 {
        UnitScore::clamped(num / den)
    } else {
        UnitScore::HALF
    }
}

/// Weighted mean of normalized scores, each weighted by `trust · honesty`.
///
/// With zero total weight the unweighted mean of the scores is returned; with
/// no entries at all, [`NO_EVIDENCE`].
pub fn product_reliability(
    entries: impl IntoIterator<Item = (UnitScore, UnitScore, UnitScore)>,
) -> UnitScore {
    let mut acc = ReliabilityAcc::default();
    for (t, h, s) in entries {
        acc.add(t.get(), h.get(), s.get());
    }
    UnitScore::clamped(acc.finish())
}

#[derive(Default)]
struct ReliabilityAcc {
    num: f64,
    den: f64,
    plain_sum: f64,
    count: usize,
}

impl ReliabilityAcc {
    fn add(&mut self, t: f64, h: f64, s: f64) {
        let w = t * h;
        self.num += w * s;
        self.den += w;
        self.plain_sum += s;
        self.count += 1;
    }

    fn finish(&self) -> f64 {
        if self.den > 0.0 {
            self.num / self.den
        } else if self.count > 0 {
            self.plain_sum / self.count as f64
        } else {
            NO_EVIDENCE
        }
    }
}

/// Dense, index-addressed state used inside the solver loop.
#[derive(Debug, Clone, PartialEq)]
struct Dense {
    trust: Vec<f64>,
    honesty: Vec<f64>,
    reliability: Vec<f64>,
}

impl Dense {
    fn uniform(d: &Dataset, v: f64) -> Self {
        Self {
            trust: vec![v; d.reviewers().len()],
            honesty: vec![v; d.reviews().len()],
            reliability: vec![v; d.products().len()],
        }
    }

    fn from_state(d: &Dataset, s: &ScoreState) -> Self {
        Self {
            trust: d
                .reviewers()
                .iter()
                .map(|r| s.trust[&r.reviewer_id])
                .collect(),
            honesty: d
                .reviews()
                .iter()
                .map(|v| s.honesty[&v.review_id])
                .collect(),
            reliability: d
                .products()
                .iter()
                .map(|p| s.reliability[&p.product_id])
                .collect(),
        }
    }

    fn to_state(&self, d: &Dataset) -> ScoreState {
        ScoreState {
            trust: d
                .reviewers()
                .iter()
                .zip(&self.trust)
                .map(|(r, &x)| (r.reviewer_id.clone(), x))
                .collect(),
            honesty: d
                .reviews()
                .iter()
                .zip(&self.honesty)
                .map(|(v, &x)| (v.review_id.clone(), x))
                .collect(),
            reliability: d
                .products()
                .iter()
                .zip(&self.reliability)
                .map(|(p, &x)| (p.product_id.clone(), x))
                .collect(),
        }
    }

    fn max_abs_diff(&self, other: &Dense) -> f64 {
        fn side(a: &[f64], b: &[f64]) -> f64 {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        }
        side(&self.trust, &other.trust)
            .max(side(&self.honesty, &other.honesty))
            .max(side(&self.reliability, &other.reliability))
    }
}

/// Precomputed per-dataset data for repeated passes.
struct Graph<'a> {
    d: &'a Dataset,
    normalized: Vec<f64>,
}

impl<'a> Graph<'a> {
    fn new(d: &'a Dataset) -> Self {
        Self {
            d,
            normalized: d
                .reviews()
                .iter()
                .map(|v| normalize_score(v.score).get())
                .collect(),
        }
    }

    fn step(&self, prev: &Dense, next: &mut Dense) {
        let d = self.d;
        // honesty from previous reliability
        for (i, h) in next.honesty.iter_mut().enumerate() {
            let p = d.review_product_index(i);
            *h = honesty_raw(self.normalized[i], prev.reliability[p]);
        }
        // trust from new honesty, oldest review first
        for (r, t) in next.trust.iter_mut().enumerate() {
            let (num, den) = d
                .reviewer_adjacency(r)
                .iter()
                .fold((0.0, 0.0), |(num, den), &i| {
                    let w = f64::from(d.reviews()[i].seq);
                    (num + w * next.honesty[i], den + w)
                });
            *t = if den > 0.0 {
                (num / den).clamp(0.0, 1.0)
            } else {
                NO_EVIDENCE
            };
        }
        // reliability from new trust and honesty
        for (p, rel) in next.reliability.iter_mut().enumerate() {
            let mut acc = ReliabilityAcc::default();
            for &i in d.product_adjacency(p) {
                acc.add(
                    next.trust[d.review_reviewer_index(i)],
                    next.honesty[i],
                    self.normalized[i],
                );
            }
            *rel = acc.finish().clamp(0.0, 1.0);
        }
    }
}

/// One staged pass starting from `prev`.
pub fn iterate_once(d: &Dataset, prev: &ScoreState) -> Result<ScoreState> {
    prev.check_covers(d)?;
    let g = Graph::new(d);
    let prev = Dense::from_state(d, prev);
    let mut next = prev.clone();
    g.step(&prev, &mut next);
    Ok(next.to_state(d))
}

/// Iterates to a fixed point (or `max_iterations`).
pub fn solve(d: &Dataset, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let g = Graph::new(d);
    let mut cur = Dense::uniform(d, cfg.initial_value.get());
    let mut next = cur.clone();
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        g.step(&cur, &mut next);
        iterations += 1;
        delta = next.max_abs_diff(&cur);
        std::mem::swap(&mut cur, &mut next);
        if delta <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ok(SolverResult {
        state: cur.to_state(d),
        iterations,
        converged,
        final_delta: delta,
    })
}
