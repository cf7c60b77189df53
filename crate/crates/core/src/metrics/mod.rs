//! Aggregate statistics over harvested counterfactual records.

mod druglikeness;
mod histogram;

pub use druglikeness::{druglikeness, Descriptors};
pub use histogram::{mutation_histogram, MutationHistogram};

use crate::marl::{AuditError, CounterfactualRecord};
use crate::smiles::parse_smiles;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no records to evaluate")]
    Empty,
    #[error("record {index} failed its integrity check: {source}")]
    Integrity { index: usize, source: AuditError },
    #[error("record {index} has an unparseable counterfactual SMILES: {message}")]
    Smiles { index: usize, message: String },
    #[error("records mix methods {0} and {1}")]
    MixedMethods(String, String),
}

/// How records are pooled into averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// Mean within each (drug, protein) pair, then mean over pairs.
    #[default]
    PerPair,
    /// Mean over all records.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub avg_delta_joint: f64,
    pub avg_drug_sim: f64,
    pub avg_protein_sim: f64,
    pub avg_druglikeness: f64,
    pub n: usize,
    pub pairs: usize,
    pub grouping: Grouping,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Averages Δ_joint, both similarities and the drug-likeness proxy of the
/// counterfactual drugs. Every record is audited first, and Δ_joint is taken
/// from the recomputation over the stored affinities.
pub fn evaluate(records: &[CounterfactualRecord], grouping: Grouping) -> Result<EvalReport, MetricsError> {
    let first = records.first().ok_or(MetricsError::Empty)?;
    let mut rows = Vec::with_capacity(records.len());
    for (index, r) in records.iter().enumerate() {
        if r.method != first.method {
            return Err(MetricsError::MixedMethods(first.method.to_string(), r.method.to_string()));
        }
        r.audit().map_err(|source| MetricsError::Integrity { index, source })?;
        let g = parse_smiles(&r.drug_counterfactual).map_err(|e| MetricsError::Smiles {
            index,
            message: e.to_string(),
        })?;
        rows.push((
            (r.drug_id.as_str(), r.protein_id.as_str()),
            [
                r.affinities.delta_joint(),
                r.breakdown.sim_drug,
                r.breakdown.sim_protein,
                druglikeness(&g),
            ],
        ));
    }
    let mut groups: BTreeMap<(&str, &str), Vec<[f64; 4]>> = BTreeMap::new();
    for (key, v) in &rows {
        groups.entry(*key).or_default().push(*v);
    }
    let column = |c: usize| match grouping {
        Grouping::Global => mean(rows.iter().map(|(_, v)| v[c])),
        Grouping::PerPair => mean(groups.values().map(|g| mean(g.iter().map(|v| v[c])))),
    };
    Ok(EvalReport {
        method: first.method.to_string(),
        avg_delta_joint: column(0),
        avg_drug_sim: column(1),
        avg_protein_sim: column(2),
        avg_druglikeness: column(3),
        n: records.len(),
        pairs: groups.len(),
        grouping,
    })
}

/// Plain-text table with one row per report.
pub fn render_table(reports: &[EvalReport]) -> String {
    let header = ["Method", "Avg Δ_joint", "Drug sim", "Protein sim", "Drug-likeness", "n"];
    let rows: Vec<[String; 6]> = reports
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                format!("{:.4}", r.avg_delta_joint),
                format!("{:.4}", r.avg_drug_sim),
                format!("{:.4}", r.avg_protein_sim),
                format!("{:.4}", r.avg_druglikeness),
                r.n.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        for (k, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            let pad = w - cell.chars().count();
            if k == 0 {
                let _ = write!(out, "{cell}{}", " ".repeat(pad));
            } else {
                let _ = write!(out, "  {}{cell}", " ".repeat(pad));
            }
        }
        out.push('\n');
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &rows {
        line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}
