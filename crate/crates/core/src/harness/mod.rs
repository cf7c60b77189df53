//! Configuration, dataset ingestion and run orchestration behind the CLI.

mod dataset;
mod output;

pub use dataset::{load_dataset, DatasetRow, DATASET_HEADER};
pub use output::write_atomic;

use crate::actionspace::{enumerate_drug_actions, enumerate_protein_actions};
use crate::marl::{
    joint_list_baseline, train_macda, train_mameg, CounterfactualRecord, MarlError, Method, PairInstance, TrainConfig,
};
use crate::metrics::{evaluate, mutation_histogram, render_table, EvalReport, Grouping, MetricsError, MutationHistogram};
use crate::molgraph::Element;
use crate::oracle::{AffinityOracle, Encoders, OracleError, SubprocessOracle, Surrogate, SurrogateSpec};
use crate::protein::ProteinSeq;
use crate::smiles::{parse_smiles, write_smiles};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) => 3,
            HarnessError::Runtime(_) => 4,
        }
    }
}

impl From<MarlError> for HarnessError {
    fn from(e: MarlError) -> Self {
        match e {
            MarlError::Config(_) | MarlError::Reward(_) => HarnessError::Config(e.to_string()),
            MarlError::EmptyActionSpace(_) | MarlError::Smiles(_) => HarnessError::Data(e.to_string()),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<MetricsError> for HarnessError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Empty => HarnessError::Runtime(e.to_string()),
            other => HarnessError::Data(other.to_string()),
        }
    }
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Spec(_) => HarnessError::Config(e.to_string()),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

/// Contents of an oracle file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleFile {
    Surrogate(SurrogateSpec),
    Subprocess {
        program: String,
        #[serde(default)]
        args: Vec<String>,
    },
}

/// Parses `surrogate:SEED` or reads an oracle file.
pub fn load_oracle(spec: &str, base: &Path) -> Result<Box<dyn AffinityOracle>, HarnessError> {
    if let Some(seed) = spec.strip_prefix("surrogate:") {
        let seed = seed
            .parse()
            .map_err(|_| HarnessError::Config(format!("bad surrogate seed in {spec:?}")))?;
        return Ok(Box::new(Surrogate::new(SurrogateSpec::new(seed))?));
    }
    let path = base.join(spec);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| HarnessError::Config(format!("oracle file {}: {e}", path.display())))?;
    let file: OracleFile = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("oracle file {}: {e}", path.display())))?;
    Ok(match file {
        OracleFile::Surrogate(s) => Box::new(Surrogate::new(s)?),
        OracleFile::Subprocess { program, args } => {
            Box::new(SubprocessOracle::spawn(&program, &args, Encoders::default())?)
        }
    })
}

fn default_dataset() -> PathBuf {
    PathBuf::from("data/abl1_fixture.csv")
}
fn default_oracle() -> String {
    "surrogate:0".into()
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_dataset")]
    pub dataset: PathBuf,
    /// Drug ids to keep; all when absent.
    #[serde(default)]
    pub drugs: Option<Vec<String>>,
    /// Protein id to keep; all when absent.
    #[serde(default)]
    pub protein: Option<String>,
    /// `surrogate:SEED` or a path to an oracle file.
    #[serde(default = "default_oracle")]
    pub oracle: String,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub grouping: Grouping,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.train.validate()?;
        let dataset = self.resolve(&self.dataset);
        if !dataset.is_file() {
            return Err(HarnessError::Config(format!("dataset {} not found", dataset.display())));
        }
        if !self.oracle.starts_with("surrogate:") && !self.resolve(Path::new(&self.oracle)).is_file() {
            return Err(HarnessError::Config(format!("oracle file {} not found", self.oracle)));
        }
        Ok(())
    }
}

/// Selected pairs in dataset order, first occurrence of each (drug, protein).
pub fn select_pairs(rows: &[DatasetRow], config: &RunConfig) -> Result<Vec<PairInstance>, HarnessError> {
    let mut seen = BTreeSet::new();
    let pairs: Vec<PairInstance> = rows
        .iter()
        .filter(|r| config.drugs.as_ref().is_none_or(|ids| ids.contains(&r.drug_id)))
        .filter(|r| config.protein.as_ref().is_none_or(|id| id == &r.protein_id))
        .filter(|r| seen.insert((r.drug_id.clone(), r.protein_id.clone())))
        .map(|r| PairInstance {
            drug_id: r.drug_id.clone(),
            protein_id: r.protein_id.clone(),
            drug: r.drug.clone(),
            protein: r.sequence.clone(),
        })
        .collect();
    if pairs.is_empty() {
        return Err(HarnessError::Data("the pair selector matches no dataset rows".into()));
    }
    Ok(pairs)
}

/// Runs one method on one pair.
pub fn generate(
    method: Method,
    pair: &PairInstance,
    oracle: &dyn AffinityOracle,
    train: &TrainConfig,
) -> Result<Vec<CounterfactualRecord>, MarlError> {
    match method {
        Method::Macda => train_macda(pair, oracle, train),
        Method::Mameg => train_mameg(pair, oracle, train),
        Method::Jointlist => joint_list_baseline(pair, oracle, train, train.top_k),
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<CounterfactualRecord>,
    pub report: Option<EvalReport>,
    pub histogram: MutationHistogram,
    pub table: String,
}

/// Evaluates the selected method on every selected pair and writes
/// `records.jsonl`, `report.json`, `report.txt` and `mutations.csv` to
/// `config.out`.
pub fn run(config: &RunConfig) -> Result<RunSummary, HarnessError> {
    config.validate()?;
    let rows = load_dataset(&config.resolve(&config.dataset))?;
    let pairs = select_pairs(&rows, config)?;
    let oracle = load_oracle(&config.oracle, &config.base_dir)?;
    let mut records = Vec::new();
    for (k, pair) in pairs.iter().enumerate() {
        log::info!(
            "{} on pair {}/{}: {} x {}",
            config.method,
            k + 1,
            pairs.len(),
            pair.drug_id,
            pair.protein_id
        );
        let out = generate(config.method, pair, oracle.as_ref(), &config.train)
            .map_err(|e| match HarnessError::from(e) {
                HarnessError::Data(m) => HarnessError::Data(format!("pair {} x {}: {m}", pair.drug_id, pair.protein_id)),
                other => other,
            })?;
        records.extend(out);
    }
    let report = match evaluate(&records, config.grouping) {
        Ok(r) => Some(r),
        Err(MetricsError::Empty) => None,
        Err(e) => return Err(e.into()),
    };
    let histogram = mutation_histogram(&records);
    let table = match &report {
        Some(r) => render_table(std::slice::from_ref(r)),
        None => "no records\n".to_string(),
    };
    write_outputs(&config.resolve(&config.out), &records, report.as_ref(), &histogram, &table)?;
    Ok(RunSummary {
        records,
        report,
        histogram,
        table,
    })
}

pub fn write_outputs(
    dir: &Path,
    records: &[CounterfactualRecord],
    report: Option<&EvalReport>,
    histogram: &MutationHistogram,
    table: &str,
) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Runtime(format!("{}: {e}", dir.display())))?;
    write_atomic(&dir.join("records.jsonl"), |w| {
        for r in records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join("report.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n")
    })?;
    write_atomic(&dir.join("report.txt"), |w| w.write_all(table.as_bytes()))?;
    write_atomic(&dir.join("mutations.csv"), |w| {
        histogram.write_csv(w).map_err(std::io::Error::other)
    })?;
    Ok(())
}

/// Reads a JSON-lines record file.
pub fn read_records(path: &Path) -> Result<Vec<CounterfactualRecord>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| HarnessError::Data(format!("{} line {}: {e}", path.display(), k + 1)))?,
        );
    }
    Ok(out)
}

/// Audits records (and re-queries `oracle` when given), then reports one
/// row per method in order of first appearance.
pub fn evaluate_records(
    records: &[CounterfactualRecord],
    grouping: Grouping,
    oracle: Option<&dyn AffinityOracle>,
) -> Result<Vec<EvalReport>, HarnessError> {
    if records.is_empty() {
        return Err(MetricsError::Empty.into());
    }
    if let Some(oracle) = oracle {
        for (k, r) in records.iter().enumerate() {
            r.verify(oracle)
                .map_err(|e| HarnessError::Data(format!("record {k}: {e}")))?;
        }
    }
    let mut methods: Vec<Method> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let subset: Vec<CounterfactualRecord> = records.iter().filter(|r| r.method == m).cloned().collect();
            Ok(evaluate(&subset, grouping)?)
        })
        .collect()
}

/// One line per enumerated drug action: index, edit, resulting SMILES.
pub fn describe_drug_actions(smiles: &str, admissible: &[Element]) -> Result<Vec<String>, HarnessError> {
    let g = parse_smiles(smiles).map_err(|e| HarnessError::Data(format!("SMILES {smiles:?}: {e}")))?;
    Ok(enumerate_drug_actions(&g, admissible)
        .iter()
        .enumerate()
        .map(|(k, a)| format!("{k}\t{}\t{}", a.edit, write_smiles(&a.result)))
        .collect())
}

/// One line per alanine substitution: index, position, `X→A`.
pub fn describe_protein_actions(sequence: &str) -> Result<Vec<String>, HarnessError> {
    let p = ProteinSeq::new(sequence).map_err(|e| HarnessError::Data(e.to_string()))?;
    Ok(enumerate_protein_actions(&p)
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let note = if a.beyond_encoding { "\tbeyond encoding" } else { "" };
            format!("{k}\t{}\t{}A{note}", a.position, a.original)
        })
        .collect())
}

pub fn query(oracle: &dyn AffinityOracle, smiles: &str, sequence: &str) -> Result<f64, HarnessError> {
    let g = parse_smiles(smiles).map_err(|e| HarnessError::Data(format!("SMILES {smiles:?}: {e}")))?;
    let p = ProteinSeq::new(sequence).map_err(|e| HarnessError::Data(e.to_string()))?;
    Ok(oracle.predict(&g, &p)?)
}
