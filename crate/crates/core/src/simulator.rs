//! Labeled review-stream generator.
//!
//! A scenario is a bipartite set of reviewer→product connections. Reviews are
//! emitted round-robin over the connection list until `total_reviews` is
//! reached. Honest reviewers draw `Normal(quality, variance)` scores clamped to
//! the star range; spammers follow an [`AttackScript`].

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Product, ProductId, Review, ReviewId, Reviewer, ReviewerId, Score};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_VARIANCE: f64 = 0.5;

/// RNG used by every generator in this crate.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HonestPolicy {
    /// Variance of the score distribution on the raw star scale.
    pub variance: f64,
}

impl Default for HonestPolicy {
    fn default() -> Self {
        Self {
            variance: DEFAULT_VARIANCE,
        }
    }
}

impl HonestPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.variance >= 0.0 && self.variance.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "variance must be a finite non-negative number, got {}",
                self.variance
            )))
        }
    }
}

/// Draws one honest score around `quality`.
pub fn gen_honest_score<R: Rng + ?Sized>(
    quality: Score,
    policy: &HonestPolicy,
    rng: &mut R,
) -> Score {
    if policy.variance == 0.0 {
        return quality;
    }
    let normal =
        Normal::new(quality.get(), policy.variance.sqrt()).expect("finite positive std dev");
    Score::saturating(normal.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// Attack score on every target, no disguise.
    Simple,
    /// Attack score on targets while behaving honestly elsewhere.
    OverProduct,
    /// Alternating honest and attack blocks over the spammer's own history.
    OverTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackScript {
    pub kind: AttackKind,
    pub target_products: Vec<ProductId>,
    pub attack_score: Score,
    /// Score non-target products honestly instead of attacking them too.
    #[serde(default)]
    pub honest_elsewhere: bool,
    /// Block size for [`AttackKind::OverTime`]: reviews `1..=b` honest,
    /// `b+1..=2b` attack, and so on.
    #[serde(default = "default_block_length")]
    pub block_length: u32,
}

fn default_block_length() -> u32 {
    1
}

impl AttackScript {
    pub fn validate(&self) -> Result<()> {
        if self.target_products.is_empty() {
            return Err(Error::Config(
                "attack script needs at least one target product".into(),
            ));
        }
        if self.block_length == 0 {
            return Err(Error::Config("block_length must be at least 1".into()));
        }
        Ok(())
    }

    pub fn targets(&self, product: &ProductId) -> bool {
        self.target_products.contains(product)
    }

    /// Whether the spammer's `seq`-th review, on `product`, takes the attack branch.
    pub fn is_attack(&self, product: &ProductId, seq: u32) -> bool {
        if !self.targets(product) {
            return !self.honest_elsewhere;
        }
        match self.kind {
            AttackKind::Simple | AttackKind::OverProduct => true,
            AttackKind::OverTime => seq.div_ceil(self.block_length).is_multiple_of(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSpec {
    pub id: ProductId,
    pub quality: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HonestPopulation {
    /// Honest reviewers are named `r1 ..= r{count}`.
    pub count: u32,
    #[serde(default)]
    pub policy: HonestPolicy,
}

impl HonestPopulation {
    pub fn ids(&self) -> impl Iterator<Item = ReviewerId> {
        (1..=self.count).map(|i| ReviewerId(format!("r{i}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpammerSpec {
    pub id: ReviewerId,
    pub script: AttackScript,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Connection {
    pub reviewer: ReviewerId,
    pub product: ProductId,
}

impl Connection {
    pub fn new(reviewer: impl Into<ReviewerId>, product: impl Into<ProductId>) -> Self {
        Self {
            reviewer: reviewer.into(),
            product: product.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interleaving {
    /// Review `i` is written over connection `i mod connections.len()`.
    #[default]
    RoundRobin,
}

/// A single attacker appended after the base stream is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionSpec {
    pub reviewer_id: ReviewerId,
    pub script: AttackScript,
    pub n_reviews: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub products: Vec<ProductSpec>,
    pub honest_reviewers: HonestPopulation,
    #[serde(default)]
    pub spammers: Vec<SpammerSpec>,
    pub connections: Vec<Connection>,
    pub total_reviews: u32,
    pub seed: u64,
    #[serde(default)]
    pub interleaving: Interleaving,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<InjectionSpec>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.total_reviews == 0 {
            return Err(Error::Config("total_reviews must be at least 1".into()));
        }
        if self.connections.is_empty() {
            return Err(Error::Config("at least one connection is required".into()));
        }
        self.honest_reviewers.policy.validate()?;

        let mut products = HashSet::new();
        for p in &self.products {
            if !products.insert(&p.id) {
                return Err(Error::Config(format!("duplicate product `{}`", p.id)));
            }
        }
        let mut reviewers: HashSet<ReviewerId> = self.honest_reviewers.ids().collect();
        for s in &self.spammers {
            if !reviewers.insert(s.id.clone()) {
                return Err(Error::Config(format!("duplicate reviewer `{}`", s.id)));
            }
            s.script.validate()?;
            if let Some(t) = s
                .script
                .target_products
                .iter()
                .find(|t| !products.contains(t))
            {
                return Err(Error::Config(format!(
                    "spammer `{}` targets unknown product `{t}`",
                    s.id
                )));
            }
        }
        for c in &self.connections {
            if !reviewers.contains(&c.reviewer) {
                return Err(Error::Config(format!(
                    "connection references unknown reviewer `{}`",
                    c.reviewer
                )));
            }
            if !products.contains(&c.product) {
                return Err(Error::Config(format!(
                    "connection references unknown product `{}`",
                    c.product
                )));
            }
        }
        if let Some(inj) = &self.injection {
            inj.script.validate()?;
            if reviewers.contains(&inj.reviewer_id) {
                return Err(Error::Config(format!(
                    "injected reviewer `{}` collides with a scenario reviewer",
                    inj.reviewer_id
                )));
            }
            if let Some(t) = inj
                .script
                .target_products
                .iter()
                .find(|t| !products.contains(t))
            {
                return Err(Error::Config(format!(
                    "injection targets unknown product `{t}`"
                )));
            }
        }
        Ok(())
    }
}

/// Generates the labeled dataset described by `cfg`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let policy = cfg.honest_reviewers.policy;

    let quality: HashMap<&ProductId, Score> =
        cfg.products.iter().map(|p| (&p.id, p.quality)).collect();
    let scripts: HashMap<&ReviewerId, &AttackScript> =
        cfg.spammers.iter().map(|s| (&s.id, &s.script)).collect();

    let products = cfg
        .products
        .iter()
        .map(|p| Product {
            product_id: p.id.clone(),
            true_quality: Some(p.quality),
        })
        .collect();
    let reviewers = cfg
        .honest_reviewers
        .ids()
        .map(|id| Reviewer {
            reviewer_id: id,
            is_spammer_label: Some(false),
        })
        .chain(cfg.spammers.iter().map(|s| Reviewer {
            reviewer_id: s.id.clone(),
            is_spammer_label: Some(true),
        }))
        .collect();

    let mut seq: HashMap<&ReviewerId, u32> = HashMap::new();
    let mut reviews = Vec::with_capacity(cfg.total_reviews as usize);
    for i in 0..cfg.total_reviews as usize {
        let conn = &cfg.connections[i % cfg.connections.len()];
        let k = seq.entry(&conn.reviewer).or_insert(0);
        *k += 1;
        let k = *k;
        let q = quality[&conn.product];
        let (score, spam) = match scripts.get(&conn.reviewer) {
            None => (gen_honest_score(q, &policy, &mut rng), false),
            Some(script) if script.is_attack(&conn.product, k) => (script.attack_score, true),
            // honest block of an over-time attack on its target: the true quality
            Some(script) if script.targets(&conn.product) => (q, false),
            Some(_) => (gen_honest_score(q, &policy, &mut rng), false),
        };
        reviews.push(Review {
            review_id: ReviewId(format!("v{}", i + 1)),
            reviewer_id: conn.reviewer.clone(),
            product_id: conn.product.clone(),
            score,
            seq: k,
            is_spam_label: Some(spam),
        });
    }
    let base = Dataset::new(products, reviewers, reviews)?;
    match &cfg.injection {
        None => Ok(base),
        Some(inj) => inject_attacker_as(
            &base,
            inj.reviewer_id.clone(),
            &inj.script,
            inj.n_reviews,
            &mut rng,
        ),
    }
}

/// Picks a reviewer id not yet present in `d`.
pub fn fresh_reviewer_id(d: &Dataset) -> ReviewerId {
    let base = ReviewerId::from("attacker");
    if d.reviewer(&base).is_none() {
        return base;
    }
    (2..)
        .map(|i| ReviewerId(format!("attacker{i}")))
        .find(|id| d.reviewer(id).is_none())
        .expect("unbounded search")
}

/// Adds one attacker to `d` under a generated id; see [`inject_attacker_as`].
pub fn inject_attacker<R: Rng + ?Sized>(
    d: &Dataset,
    script: &AttackScript,
    n_reviews: u32,
    rng: &mut R,
) -> Result<Dataset> {
    inject_attacker_as(d, fresh_reviewer_id(d), script, n_reviews, rng)
}

/// Appends a labeled attacker with `n_reviews` reviews to a copy of `d`.
///
/// Attack reviews carry `script.attack_score`. Honest reviews are drawn from
/// `Normal(mean raw score of the product, DEFAULT_VARIANCE)`, clamped. With
/// `honest_elsewhere` and [`AttackKind::OverProduct`], odd-numbered reviews hit
/// the targets in turn and even-numbered ones go to uniformly drawn
/// non-target products that already have reviews. Simple and over-time
/// attackers cycle through the targets only.
pub fn inject_attacker_as<R: Rng + ?Sized>(
    d: &Dataset,
    reviewer_id: ReviewerId,
    script: &AttackScript,
    n_reviews: u32,
    rng: &mut R,
) -> Result<Dataset> {
    script.validate()?;
    if let Some(t) = script
        .target_products
        .iter()
        .find(|t| d.product(t).is_none())
    {
        return Err(Error::TargetNotFound(t.0.clone()));
    }
    if d.reviewer(&reviewer_id).is_some() {
        return Err(Error::Config(format!(
            "reviewer `{reviewer_id}` already exists"
        )));
    }

    let mean_score = |p: &ProductId| -> Score {
        let (sum, n) = d
            .reviews_of_product(p)
            .fold((0.0, 0usize), |(s, n), v| (s + v.score.get(), n + 1));
        if n > 0 {
            Score::saturating(sum / n as f64)
        } else {
            d.product(p)
                .and_then(|p| p.true_quality)
                .unwrap_or(Score::saturating(2.5))
        }
    };
    let elsewhere: Vec<&ProductId> = d
        .products()
        .iter()
        .map(|p| &p.product_id)
        .filter(|p| !script.targets(p) && d.reviews_of_product(p).next().is_some())
        .collect();
    let policy = HonestPolicy::default();
    let disguised =
        script.kind == AttackKind::OverProduct && script.honest_elsewhere && !elsewhere.is_empty();

    let mut reviews = d.reviews().to_vec();
    let mut target_turn = 0usize;
    for k in 1..=n_reviews {
        let product = if disguised && k % 2 == 0 {
            elsewhere[rng.random_range(0..elsewhere.len())].clone()
        } else {
            let p = script.target_products[target_turn % script.target_products.len()].clone();
            target_turn += 1;
            p
        };
        let attack = script.is_attack(&product, k);
        let score = if attack {
            script.attack_score
        } else {
            gen_honest_score(mean_score(&product), &policy, rng)
        };
        let review_id = ReviewId(format!("{reviewer_id}-{k}"));
        if d.review(&review_id).is_some() {
            return Err(Error::Config(format!(
                "review id `{review_id}` already exists"
            )));
        }
        reviews.push(Review {
            review_id,
            reviewer_id: reviewer_id.clone(),
            product_id: product,
            score,
            seq: k,
            is_spam_label: Some(attack),
        });
    }
    let mut reviewers = d.reviewers().to_vec();
    reviewers.push(Reviewer {
        reviewer_id,
        is_spammer_label: Some(true),
    });
    Dataset::new(d.products().to_vec(), reviewers, reviews)
}
