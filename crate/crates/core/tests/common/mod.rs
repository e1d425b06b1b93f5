#![allow(dead_code)]

pub mod oracle;

use rand::Rng;
use rosd_core::presets;
use rosd_core::simulator::{
    rng_from_seed, AttackKind, AttackScript, Connection, HonestPolicy, HonestPopulation,
    Interleaving, ProductSpec, ScenarioConfig, SpammerSpec, SCHEMA_VERSION,
};
use rosd_core::{
    evaluate, run_scenario, solve, Dataset, EvaluationReport, Product, Review, Reviewer, Score,
    ScoreState, SolverConfig,
};

pub struct Run {
    pub dataset: Dataset,
    pub state: ScoreState,
    pub report: EvaluationReport,
}

pub fn run_preset(name: &str, seed: u64) -> Run {
    let mut cfg = presets::preset(name).expect("known preset");
    cfg.seed = seed;
    let dataset = run_scenario(&cfg).unwrap();
    let solver = SolverConfig::default();
    let res = solve(&dataset, &solver).unwrap();
    assert!(res.converged, "{name} seed {seed} did not converge");
    let report = evaluate(&dataset, &res.state, &solver).unwrap();
    Run {
        dataset,
        state: res.state,
        report,
    }
}

/// Trust of every reviewer labeled honest.
pub fn honest_trusts(run: &Run) -> Vec<f64> {
    run.dataset
        .reviewers()
        .iter()
        .filter(|r| r.is_spammer_label == Some(false))
        .map(|r| run.state.trust[&r.reviewer_id])
        .collect()
}

pub fn min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Random scenario drawn from the simulator's own model: 1–5 products of
/// uniform quality, 2–9 honest reviewers each linked to each product with
/// probability 0.7 (at least `min_honest_per_product` per product), an optional
/// single attacker with a random script, and 1–200 reviews in total.
pub fn random_scenario(
    seed: u64,
    min_honest_per_product: usize,
    with_attacker: bool,
) -> ScenarioConfig {
    let mut rng = rng_from_seed(seed);
    let n_products = rng.random_range(1..=5usize);
    let n_honest = rng.random_range(2..=9usize).max(min_honest_per_product);
    let products: Vec<ProductSpec> = (1..=n_products)
        .map(|i| ProductSpec {
            id: format!("p{i}").into(),
            quality: Score::saturating(rng.random_range(0.0..=5.0)),
        })
        .collect();
    let mut connections = Vec::new();
    for p in &products {
        let mut linked = 0;
        for r in 1..=n_honest {
            if rng.random_bool(0.7) {
                connections.push(Connection::new(format!("r{r}"), p.id.clone()));
                linked += 1;
            }
        }
        let mut r = 1;
        while linked < min_honest_per_product.max(1) {
            let c = Connection::new(format!("r{r}"), p.id.clone());
            if !connections.contains(&c) {
                connections.push(c);
                linked += 1;
            }
            r += 1;
        }
    }
    let mut spammers = Vec::new();
    if with_attacker {
        let target = products[rng.random_range(0..n_products)].clone();
        let kind = [
            AttackKind::Simple,
            AttackKind::OverProduct,
            AttackKind::OverTime,
        ][rng.random_range(0..3)];
        let attack = if target.quality.get() >= 2.5 {
            0.0
        } else {
            5.0
        };
        let id = "spammer";
        match kind {
            AttackKind::OverProduct => {
                connections.extend(products.iter().map(|p| Connection::new(id, p.id.clone())))
            }
            _ => connections.push(Connection::new(id, target.id.clone())),
        }
        spammers.push(SpammerSpec {
            id: id.into(),
            script: AttackScript {
                kind,
                target_products: vec![target.id],
                attack_score: Score::new(attack).unwrap(),
                honest_elsewhere: kind == AttackKind::OverProduct,
                block_length: rng.random_range(1..=10),
            },
        });
    }
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: format!("random-{seed}"),
        products,
        honest_reviewers: HonestPopulation {
            count: n_honest as u32,
            policy: HonestPolicy::default(),
        },
        spammers,
        connections,
        total_reviews: rng.random_range(1..=200),
        seed,
        interleaving: Interleaving::RoundRobin,
        injection: None,
    }
}

pub const INIT_VALUES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Largest entrywise disagreement between solves started from `INIT_VALUES`.
pub fn init_spread(d: &Dataset, tolerance: f64) -> f64 {
    let states: Vec<ScoreState> = INIT_VALUES
        .iter()
        .map(|&v| {
            let cfg = SolverConfig::default()
                .with_tolerance(tolerance)
                .with_initial_value(rosd_core::UnitScore::new(v).unwrap());
            solve(d, &cfg).unwrap().state
        })
        .collect();
    states
        .iter()
        .skip(1)
        .map(|s| s.max_abs_diff(&states[0]))
        .fold(0.0, f64::max)
}

/// Restricted growth strings of length `n`: every way to partition `n`
/// positions into unlabeled groups, numbered by first appearance.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                let next = p.iter().max().map_or(0, |m| m + 1);
                (0..=next).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Builds a dataset whose review `i` is by reviewer `who[i]` on product
/// `what[i]` with raw score `raw[i]`; seq follows position.
pub fn build(who: &[usize], what: &[usize], raw: &[f64]) -> Dataset {
    let n_reviewers = who.iter().max().map_or(0, |m| m + 1);
    let n_products = what.iter().max().map_or(0, |m| m + 1);
    let mut seq = vec![0u32; n_reviewers];
    let reviews = (0..who.len())
        .map(|i| {
            seq[who[i]] += 1;
            Review {
                review_id: format!("v{i}").into(),
                reviewer_id: format!("r{}", who[i]).into(),
                product_id: format!("p{}", what[i]).into(),
                score: Score::new(raw[i]).unwrap(),
                seq: seq[who[i]],
                is_spam_label: None,
            }
        })
        .collect();
    Dataset::new(
        (0..n_products)
            .map(|p| Product::new(format!("p{p}")))
            .collect(),
        (0..n_reviewers)
            .map(|r| Reviewer::new(format!("r{r}")))
            .collect(),
        reviews,
    )
    .unwrap()
}
