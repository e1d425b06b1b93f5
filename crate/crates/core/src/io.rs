//! Dataset and score-state files.
//!
//! Datasets come as CSV (`reviewer_id,product_id,score[,seq][,is_spam]`, header
//! row required, optional `review_id` column) or JSONL (one review object per
//! line, optionally preceded by `{"product": id, "quality": q}` and
//! `{"reviewer": id, "spammer": bool}` header records).
//!
//! Score states are exported as `kind,id,value` rows where `kind` is
//! `trust`, `honesty`, `reliability` or `meta`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Product, ProductId, Review, ReviewId, Reviewer, ReviewerId, Score};
use crate::engine::{ScoreState, SolverResult};
use crate::error::{Error, IntegrityError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.csv` selects CSV; everything else is JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json" => Ok(Format::Jsonl),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (expected csv or jsonl)"
            ))),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Raw review row before ids and seq are resolved.
struct Row {
    line: usize,
    review_id: Option<String>,
    reviewer_id: String,
    product_id: String,
    score: Score,
    seq: Option<u32>,
    is_spam: Option<bool>,
}

/// Collects parsed rows and header records into a [`Dataset`].
#[derive(Default)]
struct Builder {
    products: Vec<Product>,
    product_seen: HashMap<String, usize>,
    reviewers: Vec<Reviewer>,
    reviewer_seen: HashMap<String, usize>,
    declared_products: bool,
    declared_reviewers: bool,
    rows: Vec<Row>,
}

impl Builder {
    fn declare_product(&mut self, line: usize, id: String, quality: Option<Score>) -> Result<()> {
        if self.product_seen.contains_key(&id) {
            return Err(parse_err(line, format!("product `{id}` declared twice")));
        }
        self.declared_products = true;
        self.product_seen.insert(id.clone(), self.products.len());
        self.products.push(Product {
            product_id: ProductId(id),
            true_quality: quality,
        });
        Ok(())
    }

    fn declare_reviewer(&mut self, line: usize, id: String, spammer: Option<bool>) -> Result<()> {
        if self.reviewer_seen.contains_key(&id) {
            return Err(parse_err(line, format!("reviewer `{id}` declared twice")));
        }
        self.declared_reviewers = true;
        self.reviewer_seen.insert(id.clone(), self.reviewers.len());
        self.reviewers.push(Reviewer {
            reviewer_id: ReviewerId(id),
            is_spammer_label: spammer,
        });
        Ok(())
    }

    fn finish(mut self) -> Result<Dataset> {
        if let Some(first) = self.rows.first() {
            let explicit = first.seq.is_some();
            if let Some(bad) = self.rows.iter().find(|r| r.seq.is_some() != explicit) {
                return Err(parse_err(
                    bad.line,
                    "seq must be given on every review or on none",
                ));
            }
        }

        // Undeclared ids are created implicitly unless the file declared that
        // kind of node explicitly.
        for row in &self.rows {
            let review = row
                .review_id
                .clone()
                .unwrap_or_else(|| format!("line{}", row.line));
            if !self.reviewer_seen.contains_key(&row.reviewer_id) {
                if self.declared_reviewers {
                    return Err(IntegrityError::DanglingReviewer {
                        review,
                        reviewer: row.reviewer_id.clone(),
                    }
                    .into());
                }
                self.reviewer_seen
                    .insert(row.reviewer_id.clone(), self.reviewers.len());
                self.reviewers.push(Reviewer::new(row.reviewer_id.as_str()));
            }
            if !self.product_seen.contains_key(&row.product_id) {
                if self.declared_products {
                    return Err(IntegrityError::DanglingProduct {
                        review,
                        product: row.product_id.clone(),
                    }
                    .into());
                }
                self.product_seen
                    .insert(row.product_id.clone(), self.products.len());
                self.products.push(Product::new(row.product_id.as_str()));
            }
        }

        // Reviewer labels derived from review labels when not declared.
        if !self.declared_reviewers && self.rows.iter().any(|r| r.is_spam.is_some()) {
            let mut spammer: HashMap<&str, bool> = HashMap::new();
            for row in &self.rows {
                if let Some(label) = row.is_spam {
                    *spammer.entry(row.reviewer_id.as_str()).or_default() |= label;
                }
            }
            for r in &mut self.reviewers {
                r.is_spammer_label = spammer.get(r.reviewer_id.as_str()).copied();
            }
        }

        let mut next_seq: HashMap<&str, u32> = HashMap::new();
        let mut reviews = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let seq = match row.seq {
                Some(s) => s,
                None => {
                    let n = next_seq.entry(row.reviewer_id.as_str()).or_insert(0);
                    *n += 1;
                    *n
                }
            };
            reviews.push(Review {
                review_id: ReviewId(
                    row.review_id
                        .clone()
                        .unwrap_or_else(|| format!("v{}", i + 1)),
                ),
                reviewer_id: ReviewerId(row.reviewer_id.clone()),
                product_id: ProductId(row.product_id.clone()),
                score: row.score,
                seq,
                is_spam_label: row.is_spam,
            });
        }
        Dataset::new(self.products, self.reviewers, reviews)
    }
}

pub fn load_dataset(path: &Path, format: Format) -> Result<Dataset> {
    let file = File::open(path)?;
    read_dataset(BufReader::new(file), format)
}

pub fn read_dataset<R: Read>(reader: R, format: Format) -> Result<Dataset> {
    match format {
        Format::Csv => read_csv(reader),
        Format::Jsonl => read_jsonl(BufReader::new(reader)),
    }
}

fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_err(e)),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Dataset::empty());
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let reviewer_col =
        col("reviewer_id").ok_or_else(|| parse_err(1, "missing `reviewer_id` column"))?;
    let product_col =
        col("product_id").ok_or_else(|| parse_err(1, "missing `product_id` column"))?;
    let score_col = col("score").ok_or_else(|| parse_err(1, "missing `score` column"))?;
    let seq_col = col("seq");
    let spam_col = col("is_spam");
    let id_col = col("review_id");
    if let Some(unknown) = headers.iter().find(|h| {
        !matches!(
            *h,
            "reviewer_id" | "product_id" | "score" | "seq" | "is_spam" | "review_id"
        )
    }) {
        return Err(parse_err(1, format!("unknown column `{unknown}`")));
    }

    let mut b = Builder::default();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let non_empty = |name: &str, i: usize| -> Result<String> {
            let v = field(i);
            if v.is_empty() {
                Err(parse_err(line, format!("empty `{name}`")))
            } else {
                Ok(v.to_owned())
            }
        };
        let score: f64 = field(score_col).parse().map_err(|_| {
            parse_err(
                line,
                format!("score `{}` is not a number", field(score_col)),
            )
        })?;
        let score = Score::new(score).map_err(|e| parse_err(line, e.to_string()))?;
        let seq = match seq_col.map(field) {
            None => None,
            Some(s) => Some(
                s.parse::<u32>()
                    .map_err(|_| parse_err(line, format!("seq `{s}` is not a positive integer")))?,
            ),
        };
        let is_spam = match spam_col.map(field) {
            None | Some("") => None,
            Some(s) => Some(
                parse_bool(s)
                    .ok_or_else(|| parse_err(line, format!("is_spam `{s}` is not a boolean")))?,
            ),
        };
        b.rows.push(Row {
            line,
            review_id: id_col
                .map(field)
                .filter(|s| !s.is_empty())
                .map(str::to_owned),
            reviewer_id: non_empty("reviewer_id", reviewer_col)?,
            product_id: non_empty("product_id", product_col)?,
            score,
            seq,
            is_spam,
        });
    }
    b.finish()
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => parse_err(line, format!("{other:?}")),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductRecord {
    product: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quality: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReviewerRecord {
    reviewer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spammer: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReviewRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    review_id: Option<String>,
    reviewer_id: String,
    product_id: String,
    score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seq: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    is_spam: Option<bool>,
}

fn read_jsonl<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut b = Builder::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| parse_err(line_no, e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| parse_err(line_no, "expected a JSON object"))?;
        if obj.contains_key("product") {
            let rec: ProductRecord =
                serde_json::from_value(value).map_err(|e| parse_err(line_no, e.to_string()))?;
            let quality = rec
                .quality
                .map(Score::new)
                .transpose()
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            b.declare_product(line_no, rec.product, quality)?;
        } else if obj.contains_key("reviewer") {
            let rec: ReviewerRecord =
                serde_json::from_value(value).map_err(|e| parse_err(line_no, e.to_string()))?;
            b.declare_reviewer(line_no, rec.reviewer, rec.spammer)?;
        } else {
            let rec: ReviewRecord =
                serde_json::from_value(value).map_err(|e| parse_err(line_no, e.to_string()))?;
            let score = Score::new(rec.score).map_err(|e| parse_err(line_no, e.to_string()))?;
            if rec.reviewer_id.is_empty() || rec.product_id.is_empty() {
                return Err(parse_err(line_no, "empty reviewer_id or product_id"));
            }
            b.rows.push(Row {
                line: line_no,
                review_id: rec.review_id,
                reviewer_id: rec.reviewer_id,
                product_id: rec.product_id,
                score,
                seq: rec.seq,
                is_spam: rec.is_spam,
            });
        }
    }
    b.finish()
}

pub fn save_dataset(d: &Dataset, path: &Path, format: Format) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dataset(d, &mut w, format)?;
    w.flush()?;
    Ok(())
}

pub fn write_dataset<W: Write>(d: &Dataset, w: W, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(d, w),
        Format::Jsonl => write_jsonl(d, w),
    }
}

/// CSV carries reviews only: products without reviews, product qualities and
/// declared reviewer labels are not representable.
fn write_csv<W: Write>(d: &Dataset, w: W) -> Result<()> {
    let labeled = d.has_labels();
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["review_id", "reviewer_id", "product_id", "score", "seq"];
    if labeled {
        header.push("is_spam");
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for v in d.reviews() {
        let score = v.score.get().to_string();
        let seq = v.seq.to_string();
        let mut rec = vec![
            v.review_id.as_str(),
            v.reviewer_id.as_str(),
            v.product_id.as_str(),
            &score,
            &seq,
        ];
        if labeled {
            rec.push(match v.is_spam_label {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            });
        }
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_jsonl<W: Write>(d: &Dataset, mut w: W) -> Result<()> {
    let json = |e: serde_json::Error| Error::Io(e.into());
    for p in d.products() {
        let rec = ProductRecord {
            product: p.product_id.0.clone(),
            quality: p.true_quality.map(Score::get),
        };
        writeln!(w, "{}", serde_json::to_string(&rec).map_err(json)?)?;
    }
    for r in d.reviewers() {
        let rec = ReviewerRecord {
            reviewer: r.reviewer_id.0.clone(),
            spammer: r.is_spammer_label,
        };
        writeln!(w, "{}", serde_json::to_string(&rec).map_err(json)?)?;
    }
    for v in d.reviews() {
        let rec = ReviewRecord {
            review_id: Some(v.review_id.0.clone()),
            reviewer_id: v.reviewer_id.0.clone(),
            product_id: v.product_id.0.clone(),
            score: v.score.get(),
            seq: Some(v.seq),
            is_spam: v.is_spam_label,
        };
        writeln!(w, "{}", serde_json::to_string(&rec).map_err(json)?)?;
    }
    Ok(())
}

/// Convergence metadata stored alongside an exported score state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub iterations: u32,
    pub converged: bool,
    pub final_delta: f64,
    pub tolerance: f64,
}

impl RunMeta {
    pub fn from_result(res: &SolverResult, tolerance: f64) -> Self {
        Self {
            iterations: res.iterations,
            converged: res.converged,
            final_delta: res.final_delta,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Meta,
    Trust,
    Honesty,
    Reliability,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreRecord {
    kind: Kind,
    id: String,
    value: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaRecord {
    meta: RunMeta,
}

pub fn save_scores(state: &ScoreState, meta: &RunMeta, path: &Path, format: Format) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_scores(state, meta, &mut w, format)?;
    w.flush()?;
    Ok(())
}

fn score_rows(state: &ScoreState) -> impl Iterator<Item = (Kind, &str, f64)> {
    let trust = state
        .trust
        .iter()
        .map(|(k, &v)| (Kind::Trust, k.as_str(), v));
    let honesty = state
        .honesty
        .iter()
        .map(|(k, &v)| (Kind::Honesty, k.as_str(), v));
    let rel = state
        .reliability
        .iter()
        .map(|(k, &v)| (Kind::Reliability, k.as_str(), v));
    trust.chain(honesty).chain(rel)
}

pub fn write_scores<W: Write>(
    state: &ScoreState,
    meta: &RunMeta,
    mut w: W,
    format: Format,
) -> Result<()> {
    match format {
        Format::Jsonl => {
            let json = |e: serde_json::Error| Error::Io(e.into());
            let m = MetaRecord { meta: meta.clone() };
            writeln!(w, "{}", serde_json::to_string(&m).map_err(json)?)?;
            for (kind, id, value) in score_rows(state) {
                let rec = ScoreRecord {
                    kind,
                    id: id.to_owned(),
                    value,
                };
                writeln!(w, "{}", serde_json::to_string(&rec).map_err(json)?)?;
            }
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["kind", "id", "value"]).map_err(csv_err)?;
            let meta_rows = [
                ("iterations", meta.iterations.to_string()),
                ("converged", meta.converged.to_string()),
                ("final_delta", meta.final_delta.to_string()),
                ("tolerance", meta.tolerance.to_string()),
            ];
            for (k, v) in &meta_rows {
                wtr.write_record(["meta", k, v]).map_err(csv_err)?;
            }
            for (kind, id, value) in score_rows(state) {
                let kind = match kind {
                    Kind::Trust => "trust",
                    Kind::Honesty => "honesty",
                    Kind::Reliability => "reliability",
                    Kind::Meta => unreachable!(),
                };
                wtr.write_record([kind, id, &value.to_string()])
                    .map_err(csv_err)?;
            }
            wtr.flush()?;
        }
    }
    Ok(())
}

pub fn load_scores(path: &Path, format: Format) -> Result<(ScoreState, Option<RunMeta>)> {
    read_scores(BufReader::new(File::open(path)?), format)
}

fn insert_score(
    state: &mut ScoreState,
    line: usize,
    kind: Kind,
    id: String,
    value: f64,
) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(parse_err(line, format!("value {value} outside [0, 1]")));
    }
    let dup = match kind {
        Kind::Trust => state.trust.insert(ReviewerId(id.clone()), value).is_some(),
        Kind::Honesty => state.honesty.insert(ReviewId(id.clone()), value).is_some(),
        Kind::Reliability => state
            .reliability
            .insert(ProductId(id.clone()), value)
            .is_some(),
        Kind::Meta => unreachable!(),
    };
    if dup {
        return Err(parse_err(line, format!("duplicate entry for `{id}`")));
    }
    Ok(())
}

pub fn read_scores<R: BufRead>(reader: R, format: Format) -> Result<(ScoreState, Option<RunMeta>)> {
    let mut state = ScoreState::default();
    match format {
        Format::Jsonl => {
            let mut meta = None;
            for (i, line) in reader.lines().enumerate() {
                let line_no = i + 1;
                let line = line?;
                let text = line.trim();
                if text.is_empty() {
                    continue;
                }
                if text.contains("\"meta\"") {
                    if let Ok(m) = serde_json::from_str::<MetaRecord>(text) {
                        meta = Some(m.meta);
                        continue;
                    }
                }
                let rec: ScoreRecord =
                    serde_json::from_str(text).map_err(|e| parse_err(line_no, e.to_string()))?;
                if rec.kind == Kind::Meta {
                    return Err(parse_err(
                        line_no,
                        "meta rows must use the {\"meta\": …} record",
                    ));
                }
                insert_score(&mut state, line_no, rec.kind, rec.id, rec.value)?;
            }
            Ok((state, meta))
        }
        Format::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(reader);
            let mut fields: HashMap<String, String> = HashMap::new();
            let mut seen_meta = HashSet::new();
            for record in rdr.records() {
                let record = record.map_err(csv_err)?;
                let line = record.position().map_or(0, |p| p.line() as usize);
                if record.len() != 3 {
                    return Err(parse_err(line, "expected kind,id,value"));
                }
                if &record[0] == "meta" {
                    if !seen_meta.insert(record[1].to_owned()) {
                        return Err(parse_err(line, format!("duplicate meta `{}`", &record[1])));
                    }
                    fields.insert(record[1].to_owned(), record[2].to_owned());
                    continue;
                }
                let kind = match &record[0] {
                    "trust" => Kind::Trust,
                    "honesty" => Kind::Honesty,
                    "reliability" => Kind::Reliability,
                    other => return Err(parse_err(line, format!("unknown kind `{other}`"))),
                };
                let value: f64 = record[2].parse().map_err(|_| {
                    parse_err(line, format!("value `{}` is not a number", &record[2]))
                })?;
                insert_score(&mut state, line, kind, record[1].to_owned(), value)?;
            }
            let meta = if fields.is_empty() {
                None
            } else {
                let get = |k: &str| {
                    fields
                        .get(k)
                        .ok_or_else(|| parse_err(0, format!("missing meta `{k}`")))
                };
                let bad = |k: &str| parse_err(0, format!("malformed meta `{k}`"));
                Some(RunMeta {
                    iterations: get("iterations")?.parse().map_err(|_| bad("iterations"))?,
                    converged: get("converged")?.parse().map_err(|_| bad("converged"))?,
                    final_delta: get("final_delta")?
                        .parse()
                        .map_err(|_| bad("final_delta"))?,
                    tolerance: get("tolerance")?.parse().map_err(|_| bad("tolerance"))?,
                })
            };
            Ok((state, meta))
        }
    }
}
