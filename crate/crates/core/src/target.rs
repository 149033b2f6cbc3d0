use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::sim::{self, full_mask, get_bit, set_bit, word_count};

/// Desired response of each function output over all `2^r` input words,
/// packed like simulator vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSpec {
    pub inputs: usize,
    pub outputs: Vec<Vec<u64>>,
    /// Words applied during normal operation. `None` means all of them.
    pub applied: Option<Vec<u64>>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
}

impl TargetSpec {
    /// Builds a target from one row of `2^r` booleans per output.
    pub fn from_rows(inputs: usize, rows: &[Vec<bool>]) -> Result<Self> {
        let words = word_count(inputs);
        let mut outputs = Vec::with_capacity(rows.len());
        for (j, row) in rows.iter().enumerate() {
            if row.len() != words {
                return Err(Error::Config(format!(
                    "output {j} has {} entries, expected {words}",
                    row.len()
                )));
            }
            let mut v = vec![0u64; sim::block_count(inputs)];
            for (w, &bit) in row.iter().enumerate() {
                set_bit(&mut v, w, bit);
            }
            outputs.push(v);
        }
        Ok(Self::unnamed(inputs, outputs))
    }

    /// Builds a target from packed response vectors.
    pub fn from_packed(inputs: usize, outputs: Vec<Vec<u64>>) -> Self {
        Self::unnamed(inputs, outputs)
    }

    fn unnamed(inputs: usize, outputs: Vec<Vec<u64>>) -> Self {
        Self {
            inputs,
            input_names: (0..inputs).map(|i| format!("x{i}")).collect(),
            output_names: (0..outputs.len()).map(|j| format!("y{j}")).collect(),
            outputs,
            applied: None,
        }
    }

    /// The function computed by `c`'s outputs.
    pub fn from_circuit(c: &Circuit) -> Self {
        let resp = sim::simulate(c, None).expect("fault-free simulation cannot fail");
        Self::unnamed(c.inputs, resp.outputs)
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn words(&self) -> usize {
        word_count(self.inputs)
    }

    pub fn output(&self, j: usize, w: usize) -> bool {
        get_bit(&self.outputs[j], w)
    }

    pub fn applied_mask(&self) -> Vec<u64> {
        self.applied
            .clone()
            .unwrap_or_else(|| full_mask(self.inputs))
    }

    pub fn is_applied(&self, w: usize) -> bool {
        self.applied.as_ref().is_none_or(|m| get_bit(m, w))
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.outputs
            .iter()
            .map(|v| (0..self.words()).map(|w| get_bit(v, w)).collect())
            .collect()
    }
}
