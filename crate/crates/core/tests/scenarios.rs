mod common;

use common::*;
use rosd_core::metrics::detect;
use rosd_core::presets::{self, preset};
use rosd_core::simulator::{inject_attacker, rng_from_seed, DEFAULT_VARIANCE};
use rosd_core::{
    gen_honest_score, run_scenario, AttackKind, AttackScript, HonestPolicy, ProductId, Score,
    UnitScore,
};

#[test]
fn honest_draws_centre_on_quality() {
    let policy = HonestPolicy {
        variance: DEFAULT_VARIANCE,
    };
    let mut rng = rng_from_seed(2024);
    let q = Score::new(3.0).unwrap();
    let mean = (0..10_000)
        .map(|_| gen_honest_score(q, &policy, &mut rng).get())
        .sum::<f64>()
        / 10_000.0;
    assert!((mean - 3.0).abs() < 0.05, "mean {mean}");
}

#[test]
fn top_quality_draws_are_clamped() {
    let policy = HonestPolicy::default();
    let mut rng = rng_from_seed(9);
    let q = Score::new(5.0).unwrap();
    assert!((0..5000).all(|_| gen_honest_score(q, &policy, &mut rng).get() <= 5.0));
}

#[test]
fn scenario_one_spammer_always_scores_zero_on_p3() {
    let cfg = preset("scenario1-slander").unwrap();
    let d = run_scenario(&cfg).unwrap();
    assert_eq!(d.reviews().len(), 1000);
    assert_eq!(d.reviewers().len(), 10);
    let spam: Vec<_> = d
        .reviews()
        .iter()
        .filter(|v| v.reviewer_id.as_str() == "r10")
        .collect();
    assert!(!spam.is_empty());
    assert!(spam.iter().all(|v| v.product_id.as_str() == "p3"
        && v.score.get() == 0.0
        && v.is_spam_label == Some(true)));
    assert!(d
        .reviews()
        .iter()
        .filter(|v| v.reviewer_id.as_str() != "r10")
        .all(|v| v.is_spam_label == Some(false)));
}

#[test]
fn scenario_three_alternates_blocks_of_twenty() {
    let d = run_scenario(&preset("scenario3-slander").unwrap()).unwrap();
    assert_eq!(d.reviewers().len(), 3);
    let spammer: Vec<_> = d.reviews_of_reviewer(&"r3".into()).collect();
    assert!(spammer.len() > 40);
    for v in spammer {
        let attack_block = (v.seq - 1) / 20 % 2 == 1;
        let want = if attack_block { 1.0 } else { 3.0 };
        assert_eq!(v.score.get(), want, "seq {}", v.seq);
        assert_eq!(v.is_spam_label, Some(attack_block));
    }
}

#[test]
fn no_spammers_and_no_variance_reproduce_quality() {
    let mut cfg = preset("scenario1-slander").unwrap();
    cfg.spammers.clear();
    cfg.connections.retain(|c| c.reviewer.as_str() != "r10");
    cfg.honest_reviewers.policy.variance = 0.0;
    cfg.products[2].quality = Score::new(4.5).unwrap();
    let d = run_scenario(&cfg).unwrap();
    for v in d.reviews() {
        assert_eq!(
            Some(v.score),
            d.product(&v.product_id).unwrap().true_quality
        );
    }
}

#[test]
fn scenario_one_reports_zero_spam_honesty_and_trust() {
    let run = run_preset("scenario1-slander", 3);
    assert_eq!(run.report.avg_honesty_spam, Some(0.0));
    assert_eq!(run.report.avg_trust_spammer, Some(0.0));
}

#[test]
fn scenario_one_detection_recall_is_full_at_half() {
    let run = run_preset("scenario1-slander", 4);
    let det = detect(&run.dataset, &run.state, UnitScore::HALF).unwrap();
    assert_eq!(det.spam_reviews.recall, 1.0);
    assert_eq!(det.spammers.recall, 1.0);
}

#[test]
fn scenario_two_spammer_sits_between_its_reviews_and_honest_reviewers() {
    for name in ["scenario2-slander", "scenario2-promote"] {
        let r = run_preset(name, presets::DEFAULT_SEED).report;
        let (spam_h, spammer_t, honest_t) = (
            r.avg_honesty_spam.unwrap(),
            r.avg_trust_spammer.unwrap(),
            r.avg_trust_honest.unwrap(),
        );
        assert!(
            spam_h < spammer_t && spammer_t < honest_t,
            "{name}: {spam_h} {spammer_t} {honest_t}"
        );
    }
}

#[test]
fn promote_before_reliability_tracks_low_quality() {
    let r = run_preset("scenario1-promote", 2).report;
    assert!((r.reliability_before.unwrap() - 0.2).abs() < 0.03);
}

fn slander_script(targets: &[&str]) -> AttackScript {
    AttackScript {
        kind: AttackKind::OverProduct,
        target_products: targets.iter().map(|t| ProductId::from(*t)).collect(),
        attack_score: Score::new(0.5).unwrap(),
        honest_elsewhere: true,
        block_length: 1,
    }
}

#[test]
fn injection_adds_exactly_n_reviews() {
    let base = run_scenario(&preset("scenario1-slander").unwrap()).unwrap();
    let mut rng = rng_from_seed(1);
    let out = inject_attacker(&base, &slander_script(&["p1", "p2"]), 20, &mut rng).unwrap();
    assert_eq!(out.reviews().len(), base.reviews().len() + 20);
    assert_eq!(&out.reviews()[..base.reviews().len()], base.reviews());
}

#[test]
fn injecting_nothing_adds_an_idle_reviewer() {
    let base = run_scenario(&preset("scenario2-slander").unwrap()).unwrap();
    let mut rng = rng_from_seed(1);
    let out = inject_attacker(&base, &slander_script(&["p3"]), 0, &mut rng).unwrap();
    assert_eq!(out.reviews(), base.reviews());
    assert_eq!(out.reviewers().len(), base.reviewers().len() + 1);
}

#[test]
fn injected_slander_hits_high_quality_targets() {
    let run = run_preset("inject-slander", presets::DEFAULT_SEED);
    let spam: Vec<_> = run
        .dataset
        .reviews()
        .iter()
        .filter(|v| v.is_spam_label == Some(true))
        .collect();
    let mean_quality = run
        .report
        .target_products
        .iter()
        .map(|p| run.dataset.product(p).unwrap().true_quality.unwrap().get())
        .sum::<f64>()
        / run.report.target_products.len() as f64;
    assert!((mean_quality - 3.75).abs() < 1e-12);
    assert!(spam.iter().all(|v| v.score.get() == 0.5));
}
