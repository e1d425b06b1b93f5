//! Straight-line reference implementation over flat arrays. Shares no code
//! with the engine: no canonical ordering, no graph indexes, naive sums.

#![allow(dead_code)]

use rosd_core::Dataset;

#[derive(Debug, Clone, Copy)]
pub struct Row {
    pub reviewer: usize,
    pub product: usize,
    pub raw: f64,
    pub seq: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleState {
    pub trust: Vec<f64>,
    pub honesty: Vec<f64>,
    pub reliability: Vec<f64>,
}

pub fn honesty(s: f64, r: f64) -> f64 {
    let worst = if r > 0.5 { r } else { 1.0 - r };
    (1.0 - (s - r).abs() / worst).clamp(0.0, 1.0)
}

pub fn trust(pairs: &[(u32, f64)]) -> f64 {
    let den: f64 = pairs.iter().map(|p| p.0 as f64).sum();
    if den == 0.0 {
        return 0.5;
    }
    pairs.iter().map(|p| p.0 as f64 * p.1).sum::<f64>() / den
}

/// `(trust, honesty, s)` triples; zero total weight falls back to the plain
/// mean of `s`, no entries to 0.5.
pub fn reliability(entries: &[(f64, f64, f64)]) -> f64 {
    if entries.is_empty() {
        return 0.5;
    }
    let den: f64 = entries.iter().map(|e| e.0 * e.1).sum();
    if den == 0.0 {
        return entries.iter().map(|e| e.2).sum::<f64>() / entries.len() as f64;
    }
    entries.iter().map(|e| e.0 * e.1 * e.2).sum::<f64>() / den
}

pub fn pass(
    rows: &[Row],
    n_reviewers: usize,
    n_products: usize,
    prev: &OracleState,
) -> OracleState {
    let honesty_new: Vec<f64> = rows
        .iter()
        .map(|v| honesty(v.raw / 5.0, prev.reliability[v.product]))
        .collect();
    let trust_new: Vec<f64> = (0..n_reviewers)
        .map(|r| {
            let pairs: Vec<(u32, f64)> = rows
                .iter()
                .zip(&honesty_new)
                .filter(|(v, _)| v.reviewer == r)
                .map(|(v, h)| (v.seq, *h))
                .collect();
            trust(&pairs)
        })
        .collect();
    let reliability_new: Vec<f64> = (0..n_products)
        .map(|p| {
            let entries: Vec<(f64, f64, f64)> = rows
                .iter()
                .zip(&honesty_new)
                .filter(|(v, _)| v.product == p)
                .map(|(v, h)| (trust_new[v.reviewer], *h, v.raw / 5.0))
                .collect();
            reliability(&entries)
        })
        .collect();
    OracleState {
        trust: trust_new,
        honesty: honesty_new,
        reliability: reliability_new,
    }
}

fn max_change(a: &OracleState, b: &OracleState) -> f64 {
    a.trust
        .iter()
        .zip(&b.trust)
        .chain(a.honesty.iter().zip(&b.honesty))
        .chain(a.reliability.iter().zip(&b.reliability))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Iterates from `init` until the largest change is at most `tol`.
/// Returns the state and whether it converged within `max_iter` passes.
pub fn solve(
    rows: &[Row],
    n_reviewers: usize,
    n_products: usize,
    init: f64,
    tol: f64,
    max_iter: u32,
) -> (OracleState, bool) {
    let mut state = OracleState {
        trust: vec![init; n_reviewers],
        honesty: vec![init; rows.len()],
        reliability: vec![init; n_products],
    };
    for _ in 0..max_iter {
        let next = pass(rows, n_reviewers, n_products, &state);
        let delta = max_change(&state, &next);
        state = next;
        if delta <= tol {
            return (state, true);
        }
    }
    (state, false)
}

/// Flattens a dataset into oracle rows plus the id order used for indices.
pub struct Flat {
    pub rows: Vec<Row>,
    pub reviewer_ids: Vec<String>,
    pub product_ids: Vec<String>,
    pub review_ids: Vec<String>,
}

pub fn flatten(d: &Dataset) -> Flat {
    let reviewer_ids: Vec<String> = d
        .reviewers()
        .iter()
        .map(|r| r.reviewer_id.0.clone())
        .collect();
    let product_ids: Vec<String> = d
        .products()
        .iter()
        .map(|p| p.product_id.0.clone())
        .collect();
    let pos = |ids: &[String], id: &str| ids.iter().position(|x| x == id).expect("known id");
    let rows = d
        .reviews()
        .iter()
        .map(|v| Row {
            reviewer: pos(&reviewer_ids, v.reviewer_id.as_str()),
            product: pos(&product_ids, v.product_id.as_str()),
            raw: v.score.get(),
            seq: v.seq,
        })
        .collect();
    Flat {
        rows,
        review_ids: d.reviews().iter().map(|v| v.review_id.0.clone()).collect(),
        reviewer_ids,
        product_ids,
    }
}

/// Largest entrywise gap between an engine state and an oracle state.
pub fn gap(flat: &Flat, engine: &rosd_core::ScoreState, oracle: &OracleState) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, id) in flat.reviewer_ids.iter().enumerate() {
        worst = worst.max((engine.trust[&id.as_str().into()] - oracle.trust[i]).abs());
    }
    for (i, id) in flat.review_ids.iter().enumerate() {
        worst = worst.max((engine.honesty[&id.as_str().into()] - oracle.honesty[i]).abs());
    }
    for (i, id) in flat.product_ids.iter().enumerate() {
        worst = worst.max((engine.reliability[&id.as_str().into()] - oracle.reliability[i]).abs());
    }
    worst
}
