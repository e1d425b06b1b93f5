use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rosd_core::io::{load_dataset, load_scores, save_dataset, save_scores, RunMeta};
use rosd_core::simulator::{inject_attacker, rng_from_seed, AttackScript, ScenarioConfig};
use rosd_core::{presets, run_scenario, Format, ProductId, Score, SolverConfig, UnitScore};
use serde::Serialize;

use crate::manifest::ManifestBuilder;
use crate::{DetectArgs, EvaluateArgs, InjectArgs, SimulateArgs};

pub const USAGE: i32 = 1;
pub const IO: i32 = 2;
pub const INTEGRITY: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

pub type Outcome = Result<(), Failure>;

fn fail(code: i32, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        error: error.into(),
    }
}

/// Maps a library error to an exit code. `parse_code` decides whether a
/// malformed file counts as a config problem or an unreadable input.
fn core(parse_code: i32, context: String) -> impl FnOnce(rosd_core::Error) -> Failure {
    move |e| {
        use rosd_core::Error as E;
        let code = match &e {
            E::Io(_) => IO,
            E::Parse { .. } => parse_code,
            E::Integrity(_) | E::Coverage(_) => INTEGRITY,
            _ => USAGE,
        };
        fail(code, anyhow::Error::new(e).context(context))
    }
}

fn io_fail(context: String) -> impl FnOnce(std::io::Error) -> Failure {
    move |e| fail(IO, anyhow::Error::new(e).context(context))
}

fn format_for(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| Format::from_path(path))
}

fn load(path: &Path) -> Result<rosd_core::Dataset, Failure> {
    load_dataset(path, Format::from_path(path))
        .map_err(core(IO, format!("loading dataset {}", path.display())))
}

fn save(d: &rosd_core::Dataset, path: &Path, format: Format) -> Outcome {
    save_dataset(d, path, format).map_err(core(IO, format!("writing {}", path.display())))
}

fn finish(m: ManifestBuilder, outputs: &[&Path]) -> Outcome {
    let path = m
        .finish(outputs)
        .map_err(io_fail("writing run manifest".into()))?;
    eprintln!("manifest: {}", path.display());
    Ok(())
}

fn resolve_config(a: &SimulateArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), _) => presets::preset(name).ok_or_else(|| {
            fail(
                USAGE,
                anyhow!(
                    "unknown preset `{name}`; available: {}",
                    presets::PRESET_NAMES.join(", ")
                ),
            )
        })?,
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).map_err(io_fail(format!("reading {}", path.display())))?;
            ScenarioConfig::from_json(&text)
                .map_err(core(USAGE, format!("parsing config {}", path.display())))?
        }
        (None, None) => {
            return Err(fail(
                USAGE,
                anyhow!("one of --preset or --config is required"),
            ))
        }
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate()
        .map_err(core(USAGE, "invalid scenario config".into()))?;
    Ok(cfg)
}

pub fn simulate(a: &SimulateArgs) -> Outcome {
    let cfg = resolve_config(a)?;
    let json = cfg.to_json();
    let mut m = ManifestBuilder::start().config(&json).seed(cfg.seed);
    if let Some(path) = &a.config {
        m = m.input(path);
    }
    if a.dump_preset {
        fs::write(&a.out, json + "\n").map_err(io_fail(format!("writing {}", a.out.display())))?;
        return finish(m, &[&a.out]);
    }
    let d = run_scenario(&cfg).map_err(core(USAGE, format!("running scenario `{}`", cfg.name)))?;
    save(&d, &a.out, format_for(&a.out, a.format))?;
    eprintln!(
        "{}: {} reviews written to {}",
        cfg.name,
        d.reviews().len(),
        a.out.display()
    );
    finish(m, &[&a.out])
}

#[derive(Serialize)]
struct DetectParams {
    tolerance: f64,
    max_iterations: u32,
    initial_value: f64,
}

pub fn detect(a: &DetectArgs) -> Outcome {
    let init = UnitScore::new(a.init).map_err(core(USAGE, "--init".into()))?;
    let cfg = SolverConfig::default()
        .with_tolerance(a.tolerance)
        .with_max_iterations(a.max_iters)
        .with_initial_value(init);
    cfg.validate()
        .map_err(core(USAGE, "solver options".into()))?;
    let params = DetectParams {
        tolerance: a.tolerance,
        max_iterations: a.max_iters,
        initial_value: a.init,
    };
    let m = ManifestBuilder::start()
        .config(&serde_json::to_string(&params).expect("plain struct"))
        .input(&a.input);

    let d = load(&a.input)?;
    let res = rosd_core::solve(&d, &cfg).map_err(core(USAGE, "solving".into()))?;
    if !res.converged {
        eprintln!(
            "warning: not converged after {} iterations (last change {:.3e} > tolerance {:.3e})",
            res.iterations, res.final_delta, a.tolerance
        );
    }
    let meta = RunMeta::from_result(&res, a.tolerance);
    save_scores(&res.state, &meta, &a.out, Format::from_path(&a.out))
        .map_err(core(IO, format!("writing {}", a.out.display())))?;
    eprintln!(
        "{} reviewers, {} reviews, {} products; {} iterations, converged={}",
        d.reviewers().len(),
        d.reviews().len(),
        d.products().len(),
        res.iterations,
        res.converged
    );
    finish(m, &[&a.out])
}

#[derive(Serialize)]
struct InjectParams<'a> {
    script: &'a AttackScript,
    n_reviews: u32,
}

pub fn inject(a: &InjectArgs) -> Outcome {
    let score = Score::new(a.score).map_err(core(USAGE, "--score".into()))?;
    let script = AttackScript {
        kind: a.kind,
        target_products: a
            .targets
            .iter()
            .map(|t| ProductId::from(t.trim()))
            .collect(),
        attack_score: score,
        honest_elsewhere: a.honest_elsewhere,
        block_length: a.block_length,
    };
    let params = InjectParams {
        script: &script,
        n_reviews: a.n,
    };
    let m = ManifestBuilder::start()
        .config(&serde_json::to_string(&params).expect("plain struct"))
        .seed(a.seed)
        .input(&a.input);

    let d = load(&a.input)?;
    let mut rng = rng_from_seed(a.seed);
    let out = inject_attacker(&d, &script, a.n, &mut rng)
        .map_err(core(USAGE, "injecting attacker".into()))?;
    save(&out, &a.out, Format::from_path(&a.out))?;
    eprintln!(
        "added {} reviews ({} -> {})",
        out.reviews().len() - d.reviews().len(),
        d.reviews().len(),
        out.reviews().len()
    );
    finish(m, &[&a.out])
}

#[derive(Serialize)]
struct EvaluateOutput {
    evaluation: rosd_core::EvaluationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    detection: Option<rosd_core::DetectionReport>,
    solver: Option<RunMeta>,
}

pub fn evaluate(a: &EvaluateArgs) -> Outcome {
    let threshold = a
        .threshold
        .map(UnitScore::new)
        .transpose()
        .map_err(core(USAGE, "--threshold".into()))?;
    let m = ManifestBuilder::start()
        .config(&format!(
            "{{\"threshold\":{}}}",
            a.threshold.map_or("null".into(), |t| t.to_string())
        ))
        .input(&a.input)
        .input(&a.scores);

    let d = load(&a.input)?;
    let (state, meta) = load_scores(&a.scores, Format::from_path(&a.scores))
        .map_err(core(IO, format!("loading scores {}", a.scores.display())))?;
    // The "before" baseline is re-solved with the tolerance that produced the scores.
    let solver = meta.as_ref().map_or_else(SolverConfig::default, |m| {
        SolverConfig::default().with_tolerance(m.tolerance)
    });
    let evaluation =
        rosd_core::evaluate(&d, &state, &solver).map_err(core(USAGE, "evaluating".into()))?;
    let detection = threshold
        .map(|t| rosd_core::detect(&d, &state, t))
        .transpose()
        .map_err(core(USAGE, "detecting".into()))?;

    let mut table = evaluation.to_string();
    if let Some(det) = &detection {
        table.push('\n');
        table.push_str(&det.to_string());
    }
    print!("{table}");

    let text_path: PathBuf = a.out.with_extension("txt");
    if text_path == a.out {
        return Err(fail(
            USAGE,
            anyhow!("-o must not end in .txt; the text table is written there"),
        ));
    }
    let report = EvaluateOutput {
        evaluation,
        detection,
        solver: meta,
    };
    let json = serde_json::to_string_pretty(&report)
        .context("serializing report")
        .map_err(|e| fail(USAGE, e))?;
    fs::write(&a.out, json + "\n").map_err(io_fail(format!("writing {}", a.out.display())))?;
    fs::write(&text_path, &table).map_err(io_fail(format!("writing {}", text_path.display())))?;
    finish(m, &[&a.out, &text_path])
}
