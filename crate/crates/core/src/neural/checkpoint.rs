//! Checkpoint layout: an 8-byte little-endian header length, a JSON header
//! listing tensor names and shapes, then every value as a little-endian f64
//! in header order.

use super::NeuralError;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    tensors: Vec<Entry>,
}

pub fn write_checkpoint<W: Write>(mut out: W, tensors: &[Tensor]) -> Result<(), NeuralError> {
    for t in tensors {
        if t.shape.iter().product::<usize>() != t.values.len() {
            return Err(NeuralError::Checkpoint(format!(
                "tensor {} has {} values for shape {:?}",
                t.name,
                t.values.len(),
                t.shape
            )));
        }
    }
    let header = Header {
        tensors: tensors
            .iter()
            .map(|t| Entry {
                name: t.name.clone(),
                shape: t.shape.clone(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    for t in tensors {
        for v in &t.values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Vec<Tensor>, NeuralError> {
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = usize::try_from(u64::from_le_bytes(len))
        .map_err(|_| NeuralError::Checkpoint("header too large".into()))?;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    let header: Header =
        serde_json::from_slice(&json).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    let mut tensors = Vec::with_capacity(header.tensors.len());
    let mut buf = [0u8; 8];
    for entry in header.tensors {
        let n: usize = entry.shape.iter().product();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            input.read_exact(&mut buf)?;
            values.push(f64::from_le_bytes(buf));
        }
        tensors.push(Tensor {
            name: entry.name,
            shape: entry.shape,
            values,
        });
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(NeuralError::Checkpoint(format!("{} trailing bytes", rest.len())));
    }
    Ok(tensors)
}
