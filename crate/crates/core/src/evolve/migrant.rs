//! Migrant and checkpoint records, exchanged as newline-delimited JSON.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fitness::FitnessVector;
use crate::genome::{GenomeLayout, Genotype};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireLayout {
    pub r: usize,
    pub q: usize,
    pub b: usize,
}

impl From<GenomeLayout> for WireLayout {
    fn from(l: GenomeLayout) -> Self {
        Self {
            r: l.inputs,
            q: l.outputs,
            b: l.addr_bits,
        }
    }
}

/// An individual in transit between islands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MigrantMsg {
    /// Hex serialization of the genotype.
    pub genotype: String,
    /// `[f_f, f_ST, f_FS, f_p]` as measured by the sender.
    pub fitness: [f64; 4],
    pub source: [i64; 2],
    pub generation: u64,
    pub layout: WireLayout,
}

impl MigrantMsg {
    pub fn new(
        genotype: &Genotype,
        fitness: &FitnessVector,
        source: (i64, i64),
        generation: u64,
    ) -> Self {
        Self {
            genotype: genotype.to_hex(),
            fitness: fitness.objectives(),
            source: [source.0, source.1],
            generation,
            layout: genotype.layout().into(),
        }
    }

    pub fn matches(&self, layout: GenomeLayout) -> bool {
        self.layout == WireLayout::from(layout)
    }

    pub fn genotype(&self, layout: GenomeLayout) -> Result<Genotype> {
        Genotype::from_hex(layout, &self.genotype)
    }
}

/// One checkpoint line: the champion as a migrant plus run metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    #[serde(flatten)]
    pub champion: MigrantMsg,
    pub evaluations: u64,
    pub size: usize,
    pub undetected: usize,
    pub unsignalled: usize,
    pub elapsed_secs: f64,
    pub rng_seed: u64,
}

pub fn write_migrant<W: Write>(out: &mut W, msg: &MigrantMsg) -> Result<()> {
    serde_json::to_writer(&mut *out, msg)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Reads every message until end of stream, dropping those whose layout
/// differs from `layout` or whose genotype does not parse under it.
pub fn read_migrants<R: BufRead>(input: R, layout: GenomeLayout) -> Result<Vec<MigrantMsg>> {
    let mut kept = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg: MigrantMsg = serde_json::from_str(&line)?;
        if msg.matches(layout) && msg.genotype(layout).is_ok() {
            kept.push(msg);
        }
    }
    Ok(kept)
}
