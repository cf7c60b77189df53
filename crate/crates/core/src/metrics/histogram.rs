use crate::marl::CounterfactualRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io;

/// Occurrences of each mutated residue position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationHistogram {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
}

impl MutationHistogram {
    /// Most frequent position; ties go to the lower position.
    pub fn mode(&self) -> Option<usize> {
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&p, _)| p)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["position", "count"])?;
        for (p, c) in &self.counts {
            w.write_record([p.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn mutation_histogram(records: &[CounterfactualRecord]) -> MutationHistogram {
    let mut h = MutationHistogram::default();
    for m in records.iter().filter_map(|r| r.mutation) {
        *h.counts.entry(m.position).or_insert(0) += 1;
        h.total += 1;
    }
    h
}
