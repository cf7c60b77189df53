//! Joint drug-target counterfactual explanations.
//!
//! Two cooperating agents edit a drug molecule and mutate a protein
//! sequence to find minimal (drug, protein) perturbations that shift a
//! black-box affinity predictor, rewarding edits whose effect only appears
//! when both sides change together.

pub mod actionspace;
pub mod harness;
pub mod marl;
pub mod metrics;
pub mod molgraph;
pub mod neural;
pub mod oracle;
pub mod protein;
pub mod reward;
pub mod smiles;
