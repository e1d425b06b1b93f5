//! Reviewer / review / product graph.
//!
//! A [`Dataset`] is the tripartite graph the engine scores: every review links
//! one reviewer to one product and carries the reviewer's own sequence number
//! (`seq`, 1 = oldest). Adjacency lists are built once at construction and the
//! dataset is immutable afterwards.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IntegrityError, Result};

/// Highest raw score on the review scale.
pub const MAX_SCORE: f64 = 5.0;

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(ReviewId);
string_id!(ReviewerId);
string_id!(ProductId);

/// Raw review score in stars, `0 ..= 5`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Score(f64);

impl Score {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=MAX_SCORE).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::ScoreOutOfRange(value))
        }
    }

    /// Clamps into range; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Self(0.0)
        } else {
            Self(value.clamp(0.0, MAX_SCORE))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Score {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Score> for f64 {
    fn from(s: Score) -> f64 {
        s.0
    }
}

/// Dimensionless score in `0 ..= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct UnitScore(f64);

impl UnitScore {
    pub const ZERO: Self = Self(0.0);
    pub const HALF: Self = Self(0.5);
    pub const ONE: Self = Self(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::UnitScoreOutOfRange(value))
        }
    }

    pub(crate) fn clamped(value: f64) -> Self {
        Self(value.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for UnitScore {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<UnitScore> for f64 {
    fn from(s: UnitScore) -> f64 {
        s.0
    }
}

/// Maps a raw star score onto `[0, 1]` as `s / 5`.
pub fn normalize_score(s: Score) -> UnitScore {
    UnitScore(s.get() / MAX_SCORE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: ReviewId,
    pub reviewer_id: ReviewerId,
    pub product_id: ProductId,
    pub score: Score,
    pub seq: u32,
    /// Ground truth; never read by the engine.
    pub is_spam_label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reviewer {
    pub reviewer_id: ReviewerId,
    /// Ground truth; never read by the engine.
    pub is_spammer_label: Option<bool>,
}

impl Reviewer {
    pub fn new(id: impl Into<ReviewerId>) -> Self {
        Self {
            reviewer_id: id.into(),
            is_spammer_label: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub product_id: ProductId,
    /// Simulation ground truth; never read by the engine.
    pub true_quality: Option<Score>,
}

impl Product {
    pub fn new(id: impl Into<ProductId>) -> Self {
        Self {
            product_id: id.into(),
            true_quality: None,
        }
    }
}

/// Immutable review graph with precomputed adjacency.
///
/// Adjacency lists are kept in a canonical order that does not depend on the
/// storage order of `reviews`: a reviewer's reviews are ordered by `seq`, a
/// product's reviews by `(reviewer_id, seq)`. Every aggregation in the engine
/// walks these lists, which makes results bit-stable under permutation.
#[derive(Debug, Clone)]
pub struct Dataset {
    products: Vec<Product>,
    reviewers: Vec<Reviewer>,
    reviews: Vec<Review>,
    product_index: HashMap<ProductId, usize>,
    reviewer_index: HashMap<ReviewerId, usize>,
    review_index: HashMap<ReviewId, usize>,
    review_product: Vec<usize>,
    review_reviewer: Vec<usize>,
    by_reviewer: Vec<Vec<usize>>,
    by_product: Vec<Vec<usize>>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.products == other.products
            && self.reviewers == other.reviewers
            && self.reviews == other.reviews
    }
}

impl Dataset {
    pub fn new(
        products: Vec<Product>,
        reviewers: Vec<Reviewer>,
        reviews: Vec<Review>,
    ) -> Result<Self> {
        let mut product_index = HashMap::with_capacity(products.len());
        for (i, p) in products.iter().enumerate() {
            if product_index.insert(p.product_id.clone(), i).is_some() {
                return Err(IntegrityError::DuplicateId {
                    kind: "product",
                    id: p.product_id.0.clone(),
                }
                .into());
            }
        }
        let mut reviewer_index = HashMap::with_capacity(reviewers.len());
        for (i, r) in reviewers.iter().enumerate() {
            if reviewer_index.insert(r.reviewer_id.clone(), i).is_some() {
                return Err(IntegrityError::DuplicateId {
                    kind: "reviewer",
                    id: r.reviewer_id.0.clone(),
                }
                .into());
            }
        }

        let mut review_index = HashMap::with_capacity(reviews.len());
        let mut review_product = Vec::with_capacity(reviews.len());
        let mut review_reviewer = Vec::with_capacity(reviews.len());
        let mut by_reviewer = vec![Vec::new(); reviewers.len()];
        let mut by_product = vec![Vec::new(); products.len()];
        for (i, v) in reviews.iter().enumerate() {
            if review_index.insert(v.review_id.clone(), i).is_some() {
                return Err(IntegrityError::DuplicateId {
                    kind: "review",
                    id: v.review_id.0.clone(),
                }
                .into());
            }
            let r = *reviewer_index.get(&v.reviewer_id).ok_or_else(|| {
                IntegrityError::DanglingReviewer {
                    review: v.review_id.0.clone(),
                    reviewer: v.reviewer_id.0.clone(),
                }
            })?;
            let p = *product_index.get(&v.product_id).ok_or_else(|| {
                IntegrityError::DanglingProduct {
                    review: v.review_id.0.clone(),
                    product: v.product_id.0.clone(),
                }
            })?;
            if v.seq == 0 {
                return Err(IntegrityError::ZeroSeq {
                    review: v.review_id.0.clone(),
                }
                .into());
            }
            review_reviewer.push(r);
            review_product.push(p);
            by_reviewer[r].push(i);
            by_product[p].push(i);
        }

        for (r, list) in by_reviewer.iter_mut().enumerate() {
            list.sort_by_key(|&i| reviews[i].seq);
            for (pos, &i) in list.iter().enumerate() {
                let expected = pos as u32 + 1;
                let seq = reviews[i].seq;
                if seq != expected {
                    let reviewer = reviewers[r].reviewer_id.0.clone();
                    return Err(if seq < expected {
                        IntegrityError::DuplicateSeq { reviewer, seq }
                    } else {
                        IntegrityError::SeqGap {
                            reviewer,
                            missing: expected,
                        }
                    }
                    .into());
                }
            }
        }
        for list in &mut by_product {
            list.sort_by(|&a, &b| {
                reviews[a]
                    .reviewer_id
                    .cmp(&reviews[b].reviewer_id)
                    .then(reviews[a].seq.cmp(&reviews[b].seq))
            });
        }

        Ok(Self {
            products,
            reviewers,
            reviews,
            product_index,
            reviewer_index,
            review_index,
            review_product,
            review_reviewer,
            by_reviewer,
            by_product,
        })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new(), Vec::new()).expect("empty dataset is valid")
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn reviewers(&self) -> &[Reviewer] {
        &self.reviewers
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty() && self.products.is_empty() && self.reviewers.is_empty()
    }

    pub fn product(&self, id: &ProductId) -> Option<&Product> {
        self.product_index.get(id).map(|&i| &self.products[i])
    }

    pub fn reviewer(&self, id: &ReviewerId) -> Option<&Reviewer> {
        self.reviewer_index.get(id).map(|&i| &self.reviewers[i])
    }

    pub fn review(&self, id: &ReviewId) -> Option<&Review> {
        self.review_index.get(id).map(|&i| &self.reviews[i])
    }

    /// Reviews written by `id`, oldest first.
    pub fn reviews_of_reviewer(&self, id: &ReviewerId) -> impl Iterator<Item = &Review> {
        let list = self
            .reviewer_index
            .get(id)
            .map(|&r| self.by_reviewer[r].as_slice())
            .unwrap_or(&[]);
        list.iter().map(|&i| &self.reviews[i])
    }

    /// Reviews of product `id`, ordered by `(reviewer_id, seq)`.
    pub fn reviews_of_product(&self, id: &ProductId) -> impl Iterator<Item = &Review> {
        let list = self
            .product_index
            .get(id)
            .map(|&p| self.by_product[p].as_slice())
            .unwrap_or(&[]);
        list.iter().map(|&i| &self.reviews[i])
    }

    /// Reviews of product `product` written by `reviewer`, oldest first.
    pub fn reviews_of_product_by(
        &self,
        product: &ProductId,
        reviewer: &ReviewerId,
    ) -> impl Iterator<Item = &Review> {
        let product = product.clone();
        self.reviews_of_reviewer(reviewer)
            .filter(move |v| v.product_id == product)
    }

    /// Distinct reviewers of a product, sorted by id.
    pub fn reviewers_of_product(&self, id: &ProductId) -> Vec<&ReviewerId> {
        let mut out: Vec<&ReviewerId> = self
            .reviews_of_product(id)
            .map(|v| &v.reviewer_id)
            .collect();
        out.dedup();
        out
    }

    /// True when at least one review carries a spam label.
    pub fn has_labels(&self) -> bool {
        self.reviews.iter().any(|v| v.is_spam_label.is_some())
    }

    /// Returns a copy with the selected reviews removed and every reviewer's
    /// remaining `seq` values renumbered to `1..n` in their original order.
    pub fn without_reviews(&self, mut drop: impl FnMut(&Review) -> bool) -> Dataset {
        let mut kept: Vec<Review> = self.reviews.iter().filter(|v| !drop(v)).cloned().collect();
        let mut order: Vec<usize> = (0..kept.len()).collect();
        order.sort_by(|&a, &b| {
            kept[a]
                .reviewer_id
                .cmp(&kept[b].reviewer_id)
                .then(kept[a].seq.cmp(&kept[b].seq))
        });
        let mut last: Option<ReviewerId> = None;
        let mut next = 0;
        for i in order {
            if last.as_ref() != Some(&kept[i].reviewer_id) {
                last = Some(kept[i].reviewer_id.clone());
                next = 0;
            }
            next += 1;
            kept[i].seq = next;
        }
        Dataset::new(self.products.clone(), self.reviewers.clone(), kept)
            .expect("removing reviews preserves integrity")
    }

    /// Copy with every collection sorted by id; two datasets holding the same
    /// content in different storage orders canonicalize to equal values.
    pub fn canonicalized(&self) -> Dataset {
        let mut products = self.products.clone();
        products.sort_by(|a, b| a.product_id.cmp(&b.product_id));
        let mut reviewers = self.reviewers.clone();
        reviewers.sort_by(|a, b| a.reviewer_id.cmp(&b.reviewer_id));
        let mut reviews = self.reviews.clone();
        reviews.sort_by(|a, b| a.review_id.cmp(&b.review_id));
        Dataset::new(products, reviewers, reviews).expect("reordering preserves integrity")
    }

    // Dense index accessors for the engine.

    pub(crate) fn review_product_index(&self, review: usize) -> usize {
        self.review_product[review]
    }

    pub(crate) fn review_reviewer_index(&self, review: usize) -> usize {
        self.review_reviewer[review]
    }

    pub(crate) fn reviewer_adjacency(&self, reviewer: usize) -> &[usize] {
        &self.by_reviewer[reviewer]
    }

    pub(crate) fn product_adjacency(&self, product: usize) -> &[usize] {
        &self.by_product[product]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn review(id: &str, r: &str, p: &str, score: f64, seq: u32) -> Review {
        Review {
            review_id: id.into(),
            reviewer_id: r.into(),
            product_id: p.into(),
            score: Score::new(score).unwrap(),
            seq,
            is_spam_label: None,
        }
    }

    #[test]
    fn normalize_fixes_endpoints_and_three_stars() {
        assert_eq!(normalize_score(Score::new(0.0).unwrap()).get(), 0.0);
        assert_eq!(normalize_score(Score::new(5.0).unwrap()).get(), 1.0);
        assert!((normalize_score(Score::new(3.0).unwrap()).get() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn score_rejects_out_of_range() {
        assert!(matches!(Score::new(5.5), Err(Error::ScoreOutOfRange(_))));
        assert!(matches!(Score::new(-0.1), Err(Error::ScoreOutOfRange(_))));
        assert!(Score::new(f64::NAN).is_err());
        assert!(UnitScore::new(1.01).is_err());
    }

    #[test]
    fn dangling_references_are_rejected() {
        let err = Dataset::new(
            vec![Product::new("p1")],
            vec![Reviewer::new("r1")],
            vec![review("v1", "r2", "p1", 3.0, 1)],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Integrity(IntegrityError::DanglingReviewer { .. })
        ));

        let err = Dataset::new(
            vec![Product::new("p1")],
            vec![Reviewer::new("r1")],
            vec![review("v1", "r1", "p9", 3.0, 1)],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Integrity(IntegrityError::DanglingProduct { .. })
        ));
    }

    #[test]
    fn seq_must_be_consecutive_per_reviewer() {
        let products = vec![Product::new("p1"), Product::new("p2")];
        let reviewers = vec![Reviewer::new("r1")];
        let dup = Dataset::new(
            products.clone(),
            reviewers.clone(),
            vec![
                review("v1", "r1", "p1", 3.0, 1),
                review("v2", "r1", "p2", 3.0, 1),
            ],
        )
        .unwrap_err();
        assert!(matches!(
            dup,
            Error::Integrity(IntegrityError::DuplicateSeq { seq: 1, .. })
        ));

        let gap = Dataset::new(
            products,
            reviewers,
            vec![
                review("v1", "r1", "p1", 3.0, 1),
                review("v2", "r1", "p2", 3.0, 3),
            ],
        )
        .unwrap_err();
        assert!(matches!(
            gap,
            Error::Integrity(IntegrityError::SeqGap { missing: 2, .. })
        ));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err =
            Dataset::new(vec![Product::new("p1"), Product::new("p1")], vec![], vec![]).unwrap_err();
        assert!(matches!(
            err,
            Error::Integrity(IntegrityError::DuplicateId {
                kind: "product",
                ..
            })
        ));
    }

    #[test]
    fn adjacency_is_canonical() {
        let d = Dataset::new(
            vec![Product::new("p1"), Product::new("p2")],
            vec![Reviewer::new("rb"), Reviewer::new("ra")],
            vec![
                review("v1", "rb", "p1", 1.0, 2),
                review("v2", "ra", "p1", 2.0, 1),
                review("v3", "rb", "p1", 3.0, 1),
                review("v4", "rb", "p2", 4.0, 3),
            ],
        )
        .unwrap();
        let ids: Vec<_> = d
            .reviews_of_product(&"p1".into())
            .map(|v| v.review_id.as_str())
            .collect();
        assert_eq!(ids, ["v2", "v3", "v1"]);
        let seqs: Vec<_> = d.reviews_of_reviewer(&"rb".into()).map(|v| v.seq).collect();
        assert_eq!(seqs, [1, 2, 3]);
        let both: Vec<_> = d
            .reviews_of_product_by(&"p1".into(), &"rb".into())
            .map(|v| v.review_id.as_str())
            .collect();
        assert_eq!(both, ["v3", "v1"]);
        assert_eq!(d.reviewers_of_product(&"p1".into()).len(), 2);
    }

    #[test]
    fn every_review_sits_in_one_reviewer_and_one_product_list() {
        let d = Dataset::new(
            vec![Product::new("p1"), Product::new("p2")],
            vec![Reviewer::new("r1"), Reviewer::new("r2")],
            vec![
                review("v1", "r1", "p1", 1.0, 1),
                review("v2", "r2", "p1", 2.0, 1),
                review("v3", "r1", "p2", 3.0, 2),
            ],
        )
        .unwrap();
        for v in d.reviews() {
            let in_reviewer: usize = d
                .reviewers()
                .iter()
                .map(|r| {
                    d.reviews_of_reviewer(&r.reviewer_id)
                        .filter(|x| x.review_id == v.review_id)
                        .count()
                })
                .sum();
            let in_product: usize = d
                .products()
                .iter()
                .map(|p| {
                    d.reviews_of_product(&p.product_id)
                        .filter(|x| x.review_id == v.review_id)
                        .count()
                })
                .sum();
            assert_eq!((in_reviewer, in_product), (1, 1));
        }
    }

    #[test]
    fn without_reviews_renumbers_seq() {
        let d = Dataset::new(
            vec![Product::new("p1"), Product::new("p2")],
            vec![Reviewer::new("r1")],
            vec![
                review("v1", "r1", "p1", 1.0, 1),
                review("v2", "r1", "p2", 0.0, 2),
                review("v3", "r1", "p1", 3.0, 3),
            ],
        )
        .unwrap();
        let reduced = d.without_reviews(|v| v.review_id.as_str() == "v2");
        let seqs: Vec<_> = reduced
            .reviews_of_reviewer(&"r1".into())
            .map(|v| (v.review_id.as_str(), v.seq))
            .collect();
        assert_eq!(seqs, [("v1", 1), ("v3", 2)]);
        assert_eq!(reduced.products().len(), 2);
    }
}
