//! Adapter for an external predictor running as a child process.
//!
//! Protocol, one exchange per line: the request is `SMILES<TAB>SEQUENCE`,
//! the reply a decimal real. Similarity encoders are the local fingerprint
//! and trigram encoders.

use super::{AffinityOracle, Encoders, OracleError};
use crate::molgraph::MolGraph;
use crate::protein::ProteinSeq;
use crate::smiles::write_smiles;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

struct Channel {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct SubprocessOracle {
    channel: Mutex<Channel>,
    encoders: Encoders,
}

impl SubprocessOracle {
    /// Starts `program` with `args` and keeps it alive for the oracle's lifetime.
    pub fn spawn(program: &str, args: &[String], encoders: Encoders) -> Result<Self, OracleError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().ok_or_else(|| OracleError::Process("no stdin".into()))?;
        let stdout = child
            .stdout
            .take()
            .ok_or_else(|| OracleError::Process("no stdout".into()))?;
        Ok(SubprocessOracle {
            channel: Mutex::new(Channel {
                child,
                stdin,
                stdout: BufReader::new(stdout),
            }),
            encoders,
        })
    }

    /// Formats one request line, without the trailing newline.
    pub fn request_line(drug: &MolGraph, protein: &ProteinSeq) -> String {
        format!("{}\t{}", write_smiles(drug), protein)
    }
}

impl AffinityOracle for SubprocessOracle {
    fn predict(&self, drug: &MolGraph, protein: &ProteinSeq) -> Result<f64, OracleError> {
        let line = Self::request_line(drug, protein);
        let mut ch = self
            .channel
            .lock()
            .map_err(|_| OracleError::Process("channel poisoned".into()))?;
        writeln!(ch.stdin, "{line}")?;
        ch.stdin.flush()?;
        let mut reply = String::new();
        if ch.stdout.read_line(&mut reply)? == 0 {
            return Err(OracleError::Process("predictor closed its output".into()));
        }
        let trimmed = reply.trim();
        trimmed
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| OracleError::BadReply(trimmed.to_string()))
    }

    fn encode_drug(&self, drug: &MolGraph) -> Vec<f64> {
        self.encoders.drug(drug)
    }

    fn encode_protein(&self, protein: &ProteinSeq) -> Vec<f64> {
        self.encoders.protein(protein)
    }
}

impl Drop for SubprocessOracle {
    fn drop(&mut self) {
        if let Ok(ch) = self.channel.get_mut() {
            let _ = ch.child.kill();
            let _ = ch.child.wait();
        }
    }
}
