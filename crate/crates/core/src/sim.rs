//! Exhaustive, bit-parallel, levelized simulation with stuck-at fault injection.
//!
//! All `2^r` input words are simulated at once. Word `w` sets input `x_j` to
//! bit `j` of `w`, so `x_0` is the least significant bit. Word `w` lives at
//! bit `w % 64` of block `w / 64` in every packed vector.

use crate::error::{Error, Result};
use crate::netlist::{Circuit, Fault, FaultSite, Pin, SignalRef};

/// Number of input words, `2^r`.
pub fn word_count(inputs: usize) -> usize {
    1usize << inputs
}

/// Number of `u64` blocks needed to hold one bit per input word.
pub fn block_count(inputs: usize) -> usize {
    word_count(inputs).div_ceil(64)
}

/// Packed mask with one bit set per existing input word.
pub fn full_mask(inputs: usize) -> Vec<u64> {
    let words = word_count(inputs);
    let mut mask = vec![!0u64; block_count(inputs)];
    if words < 64 {
        mask[0] = (1u64 << words) - 1;
    }
    mask
}

/// Packed values of input `x_j` over all words.
pub fn input_pattern(inputs: usize, j: usize) -> Vec<u64> {
    const LOW: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let mask = full_mask(inputs);
    (0..block_count(inputs))
        .map(|k| {
            let v = if j < 6 {
                LOW[j]
            } else if (k >> (j - 6)) & 1 == 1 {
                !0
            } else {
                0
            };
            v & mask[k]
        })
        .collect()
}

#[inline]
pub fn get_bit(v: &[u64], w: usize) -> bool {
    (v[w / 64] >> (w % 64)) & 1 == 1
}

#[inline]
pub fn set_bit(v: &mut [u64], w: usize, value: bool) {
    if value {
        v[w / 64] |= 1 << (w % 64);
    } else {
        v[w / 64] &= !(1 << (w % 64));
    }
}

pub fn popcount(v: &[u64]) -> usize {
    v.iter().map(|b| b.count_ones() as usize).sum()
}

/// Responses of every function output and rail over all input words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseMatrix {
    pub inputs: usize,
    pub outputs: Vec<Vec<u64>>,
    pub rails: Option<[Vec<u64>; 2]>,
}

impl ResponseMatrix {
    pub fn words(&self) -> usize {
        word_count(self.inputs)
    }

    pub fn output(&self, j: usize, w: usize) -> bool {
        get_bit(&self.outputs[j], w)
    }

    /// Words where `z0 == z1`. Empty (all zero) when there are no rails.
    pub fn error_mask(&self) -> Vec<u64> {
        let mask = full_mask(self.inputs);
        match &self.rails {
            Some([z0, z1]) => z0
                .iter()
                .zip(z1)
                .zip(&mask)
                .map(|((a, b), m)| !(a ^ b) & m)
                .collect(),
            None => vec![0; mask.len()],
        }
    }

    /// Output values as booleans, one row per output.
    pub fn output_rows(&self) -> Vec<Vec<bool>> {
        self.outputs
            .iter()
            .map(|v| (0..self.words()).map(|w| get_bit(v, w)).collect())
            .collect()
    }
}

/// Which stuck-at faults to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultScope {
    /// Stuck-at-0/1 at gate outputs only.
    OutputsOnly,
    /// Stuck-at-0/1 at gate outputs and both gate inputs.
    All,
}

/// Faults on live gates, ordered by gate, then site (output, input A, input
/// B), then stuck-at-0 before stuck-at-1.
pub fn enumerate_faults(c: &Circuit, scope: FaultScope) -> Vec<Fault> {
    let sites: &[FaultSite] = match scope {
        FaultScope::OutputsOnly => &[FaultSite::Output],
        FaultScope::All => &FaultSite::ALL,
    };
    let mut faults = Vec::new();
    for gate in c.live_set() {
        for &site in sites {
            for stuck in [false, true] {
                faults.push(Fault { gate, site, stuck });
            }
        }
    }
    faults
}

/// Packed simulator for circuits with a fixed number of inputs.
///
/// Signal values are stored in one flat buffer: inputs first, then gates, each
/// taking [`Simulator::blocks`] words.
#[derive(Clone, Debug)]
pub struct Simulator {
    inputs: usize,
    blocks: usize,
    patterns: Vec<u64>,
}

impl Simulator {
    pub fn new(inputs: usize) -> Self {
        let blocks = block_count(inputs);
        let patterns = (0..inputs).flat_map(|j| input_pattern(inputs, j)).collect();
        Self {
            inputs,
            blocks,
            patterns,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Offset of a signal's vector within a value buffer.
    #[inline]
    pub fn offset(&self, s: SignalRef) -> usize {
        match s {
            SignalRef::Input(i) => i * self.blocks,
            SignalRef::Gate(i) => (self.inputs + i) * self.blocks,
        }
    }

    #[inline]
    pub fn signal<'a>(&self, vals: &'a [u64], s: SignalRef) -> &'a [u64] {
        let o = self.offset(s);
        &vals[o..o + self.blocks]
    }

    pub fn buffer_len(&self, c: &Circuit) -> usize {
        (self.inputs + c.gates.len()) * self.blocks
    }

    /// Fault-free simulation of every signal into `vals`.
    pub fn run(&self, c: &Circuit, vals: &mut Vec<u64>) {
        debug_assert_eq!(c.inputs, self.inputs);
        vals.clear();
        vals.extend_from_slice(&self.patterns);
        vals.resize(self.buffer_len(c), 0);
        self.eval_gates(c, 0, vals);
    }

    fn eval_gates(&self, c: &Circuit, from: usize, vals: &mut [u64]) {
        let nb = self.blocks;
        for (i, gate) in c.gates.iter().enumerate().skip(from) {
            let oa = self.offset(gate.a);
            let ob = self.offset(gate.b);
            let out = (self.inputs + i) * nb;
            for k in 0..nb {
                vals[out + k] = gate.tt.eval_packed(vals[oa + k], vals[ob + k]);
            }
        }
    }

    /// Simulates `fault` starting from the fault-free values in `base`.
    /// Only the faulty gate and the gates after it are recomputed.
    pub fn run_faulty(&self, c: &Circuit, base: &[u64], fault: Fault, vals: &mut Vec<u64>) {
        let nb = self.blocks;
        vals.clear();
        vals.extend_from_slice(base);
        let gate = c.gates[fault.gate];
        let fill = if fault.stuck { !0u64 } else { 0 };
        let out = (self.inputs + fault.gate) * nb;
        let oa = self.offset(gate.a);
        let ob = self.offset(gate.b);
        for k in 0..nb {
            vals[out + k] = match fault.site {
                FaultSite::Output => fill,
                FaultSite::InputA => gate.tt.eval_packed(fill, vals[ob + k]),
                FaultSite::InputB => gate.tt.eval_packed(vals[oa + k], fill),
            };
        }
        self.eval_gates(c, fault.gate + 1, vals);
    }

    /// Packed output of `gate` over all words with one input pin forced.
    pub fn gate_with_pin_forced(
        &self,
        c: &Circuit,
        vals: &[u64],
        gate: usize,
        pin: Pin,
        stuck: bool,
    ) -> Vec<u64> {
        let g = c.gates[gate];
        let fill = if stuck { !0u64 } else { 0 };
        let a = self.signal(vals, g.a);
        let b = self.signal(vals, g.b);
        (0..self.blocks)
            .map(|k| match pin {
                Pin::A => g.tt.eval_packed(fill, b[k]),
                Pin::B => g.tt.eval_packed(a[k], fill),
            })
            .collect()
    }

    /// Extracts output and rail responses, clearing bits beyond `2^r`.
    pub fn responses(&self, c: &Circuit, vals: &[u64]) -> ResponseMatrix {
        let mask = full_mask(self.inputs);
        let take = |s: SignalRef| -> Vec<u64> {
            self.signal(vals, s)
                .iter()
                .zip(&mask)
                .map(|(v, m)| v & m)
                .collect()
        };
        ResponseMatrix {
            inputs: self.inputs,
            outputs: c.outputs.iter().map(|&s| take(s)).collect(),
            rails: c.rails.map(|[z0, z1]| [take(z0), take(z1)]),
        }
    }
}

/// Simulates `c` over all `2^r` input words, optionally with one fault.
pub fn simulate(c: &Circuit, fault: Option<Fault>) -> Result<ResponseMatrix> {
    let sim = Simulator::new(c.inputs);
    let mut vals = Vec::new();
    sim.run(c, &mut vals);
    if let Some(fault) = fault {
        if fault.gate >= c.gates.len() || !c.live_mask()[fault.gate] {
            return Err(Error::DeadFaultSite(fault.gate));
        }
        let base = std::mem::take(&mut vals);
        sim.run_faulty(c, &base, fault, &mut vals);
    }
    Ok(sim.responses(c, &vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Gate, TruthTable2};
    use SignalRef::{Gate as G, Input as X};

    fn single(tt: TruthTable2) -> Circuit {
        Circuit::new(2, vec![Gate::new(tt, X(0), X(1))], vec![G(0)], None).unwrap()
    }

    #[test]
    fn input_patterns_follow_word_order() {
        for r in 0..9 {
            for j in 0..r {
                let p = input_pattern(r, j);
                for w in 0..word_count(r) {
                    assert_eq!(get_bit(&p, w), (w >> j) & 1 == 1);
                }
            }
            assert_eq!(popcount(&full_mask(r)), word_count(r));
        }
    }

    #[test]
    fn xor_fault_free() {
        let resp = simulate(&single(TruthTable2::XOR), None).unwrap();
        assert_eq!(resp.output_rows(), vec![vec![false, true, true, false]]);
    }

    #[test]
    fn xor_output_stuck_at_zero() {
        let f = Fault {
            gate: 0,
            site: FaultSite::Output,
            stuck: false,
        };
        let resp = simulate(&single(TruthTable2::XOR), Some(f)).unwrap();
        assert_eq!(resp.output_rows(), vec![vec![false; 4]]);
    }

    #[test]
    fn and_input_a_stuck_at_one() {
        let f = Fault {
            gate: 0,
            site: FaultSite::InputA,
            stuck: true,
        };
        // x0 is the first input; with it stuck at 1 the gate follows x1.
        let resp = simulate(&single(TruthTable2::AND), Some(f)).unwrap();
        assert_eq!(resp.output_rows(), vec![vec![false, false, true, true]]);
    }

    #[test]
    fn input_fault_does_not_affect_other_readers() {
        let gates = vec![
            Gate::new(TruthTable2::AND, X(0), X(1)),
            Gate::new(TruthTable2::BUF_A, X(0), X(0)),
        ];
        let c = Circuit::new(2, gates, vec![G(0), G(1)], None).unwrap();
        let f = Fault {
            gate: 0,
            site: FaultSite::InputA,
            stuck: true,
        };
        let resp = simulate(&c, Some(f)).unwrap();
        assert_eq!(resp.output_rows()[1], vec![false, true, false, true]);
    }

    #[test]
    fn dead_fault_site_rejected() {
        let gates = vec![
            Gate::new(TruthTable2::AND, X(0), X(1)),
            Gate::new(TruthTable2::OR, X(0), X(1)),
        ];
        let c = Circuit::new(2, gates, vec![G(0)], None).unwrap();
        let f = Fault {
            gate: 1,
            site: FaultSite::Output,
            stuck: false,
        };
        assert!(matches!(
            simulate(&c, Some(f)),
            Err(Error::DeadFaultSite(1))
        ));
    }

    #[test]
    fn fault_enumeration_counts_and_order() {
        let c = single(TruthTable2::AND);
        assert_eq!(enumerate_faults(&c, FaultScope::OutputsOnly).len(), 2);
        let gates = vec![
            Gate::new(TruthTable2::AND, X(0), X(1)),
            Gate::new(TruthTable2::OR, G(0), X(1)),
            Gate::new(TruthTable2::XOR, G(1), X(0)),
        ];
        let c = Circuit::new(2, gates, vec![G(2)], None).unwrap();
        let all = enumerate_faults(&c, FaultScope::All);
        assert_eq!(all.len(), 18);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(
            all[..3],
            [
                Fault {
                    gate: 0,
                    site: FaultSite::Output,
                    stuck: false
                },
                Fault {
                    gate: 0,
                    site: FaultSite::Output,
                    stuck: true
                },
                Fault {
                    gate: 0,
                    site: FaultSite::InputA,
                    stuck: false
                },
            ]
        );
    }

    #[test]
    fn ten_live_gates_give_twenty_output_faults() {
        let mut gates = vec![Gate::new(TruthTable2::AND, X(0), X(1))];
        for i in 1..10 {
            gates.push(Gate::new(TruthTable2::XOR, G(i - 1), X(i % 2)));
        }
        let c = Circuit::new(2, gates, vec![G(9)], None).unwrap();
        assert_eq!(enumerate_faults(&c, FaultScope::OutputsOnly).len(), 20);
    }

    #[test]
    fn wide_circuits_span_blocks() {
        // 8 inputs: 256 words in 4 blocks; y = x7 AND x0.
        let c = Circuit::new(
            8,
            vec![Gate::new(TruthTable2::AND, X(7), X(0))],
            vec![G(0)],
            None,
        )
        .unwrap();
        let resp = simulate(&c, None).unwrap();
        for w in 0..256 {
            assert_eq!(resp.output(0, w), w & 0x81 == 0x81);
        }
    }

    #[test]
    fn error_mask_from_rails() {
        let gates = vec![Gate::new(TruthTable2::NOT_A, X(0), X(0))];
        let c = Circuit::new(2, gates, vec![X(1)], Some([G(0), X(1)])).unwrap();
        let resp = simulate(&c, None).unwrap();
        // z0 = !x0, z1 = x1: equal on words 00->(1,0) no; list words where equal.
        let mask = resp.error_mask();
        for w in 0..4 {
            let z0 = w & 1 == 0;
            let z1 = w & 2 == 2;
            assert_eq!(get_bit(&mask, w), z0 == z1);
        }
    }
}
