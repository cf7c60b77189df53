use super::HarnessError;
use crate::molgraph::MolGraph;
use crate::protein::ProteinSeq;
use crate::smiles::parse_smiles;
use serde::Deserialize;
use std::path::Path;

pub const DATASET_HEADER: [&str; 5] = ["drug_id", "smiles", "protein_id", "sequence", "pkd"];

#[derive(Debug, Clone)]
pub struct DatasetRow {
    pub drug_id: String,
    pub smiles: String,
    pub drug: MolGraph,
    pub protein_id: String,
    pub sequence: ProteinSeq,
    pub pkd: Option<f64>,
}

#[derive(Deserialize)]
struct RawRow {
    drug_id: String,
    smiles: String,
    protein_id: String,
    sequence: String,
    pkd: Option<f64>,
}

/// Reads a `drug_id,smiles,protein_id,sequence,pkd` CSV. Every row is
/// validated; the error lists every invalid row with its line number.
pub fn load_dataset(path: &Path) -> Result<Vec<DatasetRow>, HarnessError> {
    let data = |msg: String| HarnessError::Data(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data(e.to_string()))?;
    let header = reader.headers().map_err(|e| data(e.to_string()))?.clone();
    if header.iter().ne(DATASET_HEADER) {
        return Err(data(format!(
            "expected header {:?}, found {:?}",
            DATASET_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| data(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw: RawRow = match record.deserialize(Some(&header)) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("line {line}: {e}"));
                continue;
            }
        };
        let drug = parse_smiles(&raw.smiles).map_err(|e| format!("line {line}: SMILES {:?}: {e}", raw.smiles));
        let sequence = ProteinSeq::new(&raw.sequence).map_err(|e| format!("line {line}: sequence: {e}"));
        match (drug, sequence) {
            (Ok(drug), Ok(sequence)) => rows.push(DatasetRow {
                drug_id: raw.drug_id,
                smiles: raw.smiles,
                drug,
                protein_id: raw.protein_id,
                sequence,
                pkd: raw.pkd,
            }),
            (d, s) => problems.extend(d.err().into_iter().chain(s.err())),
        }
    }
    if !problems.is_empty() {
        return Err(data(problems.join("; ")));
    }
    if rows.is_empty() {
        return Err(data("no rows".into()));
    }
    Ok(rows)
}
