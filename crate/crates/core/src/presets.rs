//! Built-in scenario configurations.
//!
//! | name | population | attacker |
//! |------|-----------|----------|
//! | `scenario1-*` | 9 honest reviewers on 3 products | `r10` scores only `p3`, no disguise |
//! | `scenario2-*` | same | `r10` reviews all products, attacks only `p3` |
//! | `scenario3-*` | 2 honest reviewers on 3 products | `r3` alternates 20 honest / 20 attack reviews on `p3` |
//! | `inject-*` | 16 honest reviewers on 670 products | 20 injected reviews on a handful of targets |
//!
//! Slander presets push a quality-3 product down; promote presets push a
//! quality-1 product up (scenario 3 promotes a quality-3 product to 5).

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::domain::{ProductId, ReviewerId, Score};
use crate::simulator::{
    rng_from_seed, AttackKind, AttackScript, Connection, HonestPolicy, HonestPopulation,
    InjectionSpec, Interleaving, ProductSpec, ScenarioConfig, SpammerSpec, SCHEMA_VERSION,
};

pub const PRESET_NAMES: [&str; 8] = [
    "scenario1-slander",
    "scenario1-promote",
    "scenario2-slander",
    "scenario2-promote",
    "scenario3-slander",
    "scenario3-promote",
    "inject-slander",
    "inject-promote",
];

pub const DEFAULT_SEED: u64 = 1;
const TOTAL_REVIEWS: u32 = 1000;

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let cfg = match name {
        "scenario1-slander" => small(name, 9, 3.0, AttackKind::Simple, 0.0),
        "scenario1-promote" => small(name, 9, 1.0, AttackKind::Simple, 5.0),
        "scenario2-slander" => small(name, 9, 3.0, AttackKind::OverProduct, 0.0),
        "scenario2-promote" => small(name, 9, 1.0, AttackKind::OverProduct, 5.0),
        "scenario3-slander" => small(name, 2, 3.0, AttackKind::OverTime, 1.0),
        "scenario3-promote" => small(name, 2, 3.0, AttackKind::OverTime, 5.0),
        "inject-slander" => injected(name, 0.5, &[3.5, 4.0]),
        "inject-promote" => injected(name, 5.0, &[1.0, 2.0]),
        _ => return None,
    };
    Some(cfg)
}

fn score(x: f64) -> Score {
    Score::new(x).expect("preset scores are in range")
}

/// Three products, `honest` reviewers connected to all of them and one
/// spammer whose target is `p3`.
fn small(
    name: &str,
    honest: u32,
    target_quality: f64,
    kind: AttackKind,
    attack: f64,
) -> ScenarioConfig {
    let products: Vec<ProductSpec> = (1..=3)
        .map(|i| ProductSpec {
            id: ProductId(format!("p{i}")),
            quality: score(if i == 3 { target_quality } else { 3.0 }),
        })
        .collect();
    let population = HonestPopulation {
        count: honest,
        policy: HonestPolicy::default(),
    };
    let spammer = ReviewerId(format!("r{}", honest + 1));
    let target = ProductId::from("p3");

    let mut connections: Vec<Connection> = population
        .ids()
        .flat_map(|r| {
            products
                .iter()
                .map(move |p| Connection::new(r.clone(), p.id.clone()))
        })
        .collect();
    match kind {
        AttackKind::OverProduct => connections.extend(
            products
                .iter()
                .map(|p| Connection::new(spammer.clone(), p.id.clone())),
        ),
        AttackKind::Simple | AttackKind::OverTime => {
            connections.push(Connection::new(spammer.clone(), target.clone()))
        }
    }

    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_owned(),
        products,
        honest_reviewers: population,
        spammers: vec![SpammerSpec {
            id: spammer,
            script: AttackScript {
                kind,
                target_products: vec![target],
                attack_score: score(attack),
                honest_elsewhere: kind == AttackKind::OverProduct,
                block_length: if kind == AttackKind::OverTime { 20 } else { 1 },
            },
        }],
        connections,
        total_reviews: TOTAL_REVIEWS,
        seed: DEFAULT_SEED,
        interleaving: Interleaving::RoundRobin,
        injection: None,
    }
}

const INJECT_PRODUCTS: usize = 670;
const INJECT_REVIEWERS: u32 = 16;
const INJECT_REVIEWS: u32 = 20;
const TARGETS_PER_QUALITY: usize = 3;

/// Stand-in for a small movie-rating dataset: 670 products with half-star
/// qualities, each rated once by one to four of 16 honest reviewers. The
/// attacker targets well-reviewed products whose qualities average to the
/// mean of `target_qualities`.
fn injected(name: &str, attack: f64, target_qualities: &[f64]) -> ScenarioConfig {
    // Fixed layout; the scenario seed only drives the review scores.
    let mut layout = rng_from_seed(670);
    let products: Vec<ProductSpec> = (1..=INJECT_PRODUCTS)
        .map(|i| ProductSpec {
            id: ProductId(format!("m{i}")),
            quality: score(f64::from(layout.random_range(1..=10u32)) * 0.5),
        })
        .collect();
    let population = HonestPopulation {
        count: INJECT_REVIEWERS,
        policy: HonestPolicy::default(),
    };
    let ids: Vec<ReviewerId> = population.ids().collect();

    let mut raters: BTreeMap<usize, Vec<ReviewerId>> = BTreeMap::new();
    let mut connections = Vec::new();
    for (i, p) in products.iter().enumerate() {
        let n = layout.random_range(1..=4usize);
        let chosen: Vec<ReviewerId> = ids.choose_multiple(&mut layout, n).cloned().collect();
        for r in &chosen {
            connections.push(Connection::new(r.clone(), p.id.clone()));
        }
        raters.insert(i, chosen);
    }
    connections.shuffle(&mut layout);

    let mut targets = Vec::new();
    for &q in target_qualities {
        targets.extend(
            products
                .iter()
                .enumerate()
                .filter(|(i, p)| p.quality.get() == q && raters[i].len() == 4)
                .take(TARGETS_PER_QUALITY)
                .map(|(_, p)| p.id.clone()),
        );
    }

    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_owned(),
        total_reviews: connections.len() as u32,
        products,
        honest_reviewers: population,
        spammers: Vec::new(),
        connections,
        seed: DEFAULT_SEED,
        interleaving: Interleaving::RoundRobin,
        injection: Some(InjectionSpec {
            reviewer_id: ReviewerId::from("attacker"),
            script: AttackScript {
                kind: AttackKind::OverProduct,
                target_products: targets,
                attack_score: score(attack),
                honest_elsewhere: true,
                block_length: 1,
            },
            n_reviews: INJECT_REVIEWS,
        }),
    }
}
