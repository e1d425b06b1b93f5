//! Robust opinion-spam detection over a reviewer / review / product graph.
//!
//! The engine assigns every reviewer a trust, every review an honesty and
//! every product a reliability, iterating the three mutually dependent
//! definitions to a fixed point. The simulator generates labeled review
//! streams with scripted attackers, and the metrics module scores a run
//! against those labels.

pub mod domain;
pub mod engine;
pub mod error;
pub mod io;
pub mod metrics;
pub mod presets;
pub mod simulator;

pub use domain::{
    normalize_score, Dataset, Product, ProductId, Review, ReviewId, Reviewer, ReviewerId, Score,
    UnitScore,
};
pub use engine::{
    iterate_once, product_reliability, review_honesty, reviewer_trust, solve, ScoreState,
    SolverConfig, SolverResult,
};
pub use error::{Error, IntegrityError, Result};
pub use io::{load_dataset, load_scores, save_dataset, save_scores, Format, RunMeta};
pub use metrics::{detect, evaluate, DetectionReport, EvaluationReport};
pub use simulator::{
    gen_honest_score, inject_attacker, run_scenario, AttackKind, AttackScript, HonestPolicy,
    ScenarioConfig,
};
