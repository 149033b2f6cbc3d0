//! Run records and overhead reports.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{HistoryPoint, StopReason};
use crate::fitness::FitnessVector;
use crate::genome::{GenomeLayout, Genotype, SeedMode};
use crate::netlist::{duplication_overhead, Circuit};
use crate::target::TargetSpec;
use crate::verify::Verifier;

/// Everything a finished run leaves behind, enough to re-verify the
/// champion from scratch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub benchmark: String,
    pub mode: SeedMode,
    pub inputs: usize,
    pub outputs: usize,
    pub seed_gates: usize,
    pub addr_bits: usize,
    pub rng_seed: u64,
    pub islands: usize,
    pub evaluations: u64,
    pub generations: u64,
    pub elapsed_secs: f64,
    pub stop: StopReason,
    /// Hex genotype of the champion.
    pub champion: String,
    pub fitness: FitnessVector,
    /// Target responses, one `0`/`1` string per output indexed by word.
    pub target: Vec<String>,
    pub history: Vec<HistoryPoint>,
}

impl RunRecord {
    pub fn layout(&self) -> Result<GenomeLayout> {
        GenomeLayout::new(self.inputs, self.outputs, self.addr_bits)
    }

    pub fn champion_genotype(&self) -> Result<Genotype> {
        Genotype::from_hex(self.layout()?, &self.champion)
    }

    /// The champion's phenotype with dead gates removed.
    pub fn champion_circuit(&self) -> Result<Circuit> {
        Ok(self.champion_genotype()?.decode_canonical().pruned().0)
    }

    pub fn target_rows(target: &TargetSpec) -> Vec<String> {
        target
            .rows()
            .iter()
            .map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn target_spec(&self) -> Result<TargetSpec> {
        let rows = self
            .target
            .iter()
            .map(|s| {
                s.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(Error::malformed(
                            "run record",
                            format!("target character '{c}'"),
                        )),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        TargetSpec::from_rows(self.inputs, &rows)
    }
}

/// Overheads measured against a smaller function core supplied by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreComparison {
    pub function_gates: usize,
    pub overhead: i64,
    pub dup_overhead: usize,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub benchmark: String,
    pub mode: SeedMode,
    pub inputs: usize,
    pub outputs: usize,
    /// Seed gate count, `g`.
    pub seed_gates: usize,
    /// Champion live gate count, `s`.
    pub champion_size: usize,
    /// `s - g`.
    pub overhead: i64,
    /// `g + 6(q - 1)`.
    pub dup_overhead: usize,
    /// `overhead / dup_overhead`, present only for a verified champion.
    pub ratio: Option<f64>,
    /// Brute-force verdict: TSC, and every output matches its target or
    /// its complement on every word.
    pub verified_tsc: bool,
    /// Outputs that realise the complement of their target.
    pub inverted_outputs: Vec<usize>,
    /// The champion is smaller than the seed, so evolution must have
    /// shrunk the function logic itself.
    pub function_below_seed: bool,
    pub core: Option<CoreComparison>,
    pub verdict: String,
    pub trajectory: Vec<HistoryPoint>,
}

fn ratio(overhead: i64, dup: usize, verified: bool) -> Option<f64> {
    (verified && dup > 0).then(|| overhead as f64 / dup as f64)
}

impl RunReport {
    /// Re-verifies the champion and derives the overhead figures.
    /// `function_gates` is the size of the champion's function core when
    /// the user knows it.
    pub fn from_record(rec: &RunRecord, function_gates: Option<usize>) -> Result<Self> {
        let circuit = rec.champion_circuit()?;
        let target = rec.target_spec()?;
        let verifier = Verifier::for_target(&circuit, &target);
        let tsc = verifier.tsc();
        let polarity = verifier.output_polarity(&target);
        let function_ok = polarity.iter().all(Option::is_some);
        let verified_tsc = tsc.is_tsc && function_ok;
        let inverted_outputs = polarity
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Some(true))
            .map(|(j, _)| j)
            .collect();

        let g = rec.seed_gates;
        let s = circuit.live_count();
        let overhead = s as i64 - g as i64;
        let dup_overhead = duplication_overhead(g, rec.outputs);
        let core = function_gates.map(|fg| {
            let dup = duplication_overhead(fg, rec.outputs);
            let oh = s as i64 - fg as i64;
            CoreComparison {
                function_gates: fg,
                overhead: oh,
                dup_overhead: dup,
                ratio: ratio(oh, dup, verified_tsc),
            }
        });
        let mut verdict = tsc.summary();
        if !function_ok {
            verdict.push_str("\nfunction: incorrect");
        }
        Ok(Self {
            benchmark: rec.benchmark.clone(),
            mode: rec.mode,
            inputs: rec.inputs,
            outputs: rec.outputs,
            seed_gates: g,
            champion_size: s,
            overhead,
            dup_overhead,
            ratio: ratio(overhead, dup_overhead, verified_tsc),
            verified_tsc,
            inverted_outputs,
            function_below_seed: overhead < 0 || function_gates.is_some_and(|fg| fg < g),
            core,
            verdict,
            trajectory: rec.history.clone(),
        })
    }

    /// Overhead table, one row per benchmark with unconstrained and
    /// non-intrusive columns. Overheads of unverified champions carry a `!`
    /// and have no ratio.
    pub fn table(reports: &[RunReport]) -> String {
        let mut names: Vec<&str> = Vec::new();
        for r in reports {
            if !names.contains(&r.benchmark.as_str()) {
                names.push(&r.benchmark);
            }
        }
        let best = |name: &str, mode: SeedMode| {
            reports
                .iter()
                .filter(|r| r.benchmark == name && r.mode == mode)
                .min_by_key(|r| (!r.verified_tsc, r.overhead))
        };
        let oh = |r: Option<&RunReport>| match r {
            Some(r) if r.verified_tsc => r.overhead.to_string(),
            Some(r) => format!("{}!", r.overhead),
            None => "-".into(),
        };
        let rt = |r: Option<&RunReport>| match r.and_then(|r| r.ratio) {
            Some(x) => format!("{x:.2}"),
            None => "-".into(),
        };
        let header = [
            "Benchmark",
            "Ins.",
            "Outs.",
            "Gates",
            "Oh. E_U",
            "Oh. E_NI",
            "Dup.",
            "Oh./Dup. E_U",
            "Oh./Dup. E_NI",
        ];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        let mut notes = Vec::new();
        for name in names {
            let u = best(name, SeedMode::Unconstrained);
            let ni = best(name, SeedMode::NonIntrusive);
            let any = u.or(ni).expect("name came from a report");
            rows.push(vec![
                name.to_string(),
                any.inputs.to_string(),
                any.outputs.to_string(),
                any.seed_gates.to_string(),
                oh(u),
                oh(ni),
                any.dup_overhead.to_string(),
                rt(u),
                rt(ni),
            ]);
            for r in [u, ni].into_iter().flatten() {
                if r.function_below_seed {
                    let mut note = format!(
                        "{name} ({:?}): champion logic is smaller than the seed",
                        r.mode
                    );
                    if let Some(c) = &r.core {
                        let _ = write!(
                            note,
                            "; against a {}-gate function core: overhead {}, dup {}, ratio {}",
                            c.function_gates,
                            c.overhead,
                            c.dup_overhead,
                            c.ratio.map_or("-".into(), |x| format!("{x:.2}"))
                        );
                    }
                    notes.push(note);
                }
            }
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|k| rows.iter().map(|r| r[k].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (c, w))| {
                    if k == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                let _ = writeln!(out, "{}", rule.join("-+-"));
            }
        }
        for note in notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}
