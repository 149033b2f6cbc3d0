//! Two-input gate netlists.
//!
//! A [`Circuit`] is a topologically ordered list of two-input gates over `r`
//! primary inputs, with `q` function outputs and an optional dual-rail error
//! signal `(z0, z1)`. The rails signal an error when `z0 == z1`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truth table of a two-input function. Bit `2a + b` holds the output for
/// first input `a` and second input `b`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TruthTable2(u8);

impl TruthTable2 {
    pub const ZERO: Self = Self(0b0000);
    pub const AND: Self = Self(0b1000);
    pub const OR: Self = Self(0b1110);
    pub const XOR: Self = Self(0b0110);
    pub const NAND: Self = Self(0b0111);
    pub const NOR: Self = Self(0b0001);
    pub const XNOR: Self = Self(0b1001);
    pub const BUF_A: Self = Self(0b1100);
    pub const NOT_A: Self = Self(0b0011);
    pub const ONE: Self = Self(0b1111);

    /// Builds a table from its low four bits.
    pub const fn from_u8(bits: u8) -> Self {
        Self(bits & 0xf)
    }

    /// Builds a table from `[t0, t1, t2, t3]`.
    pub fn from_bits(bits: [bool; 4]) -> Self {
        let mut v = 0;
        for (k, &bit) in bits.iter().enumerate() {
            if bit {
                v |= 1 << k;
            }
        }
        Self(v)
    }

    pub const fn as_u8(self) -> u8 {
        self.0
    }

    pub fn bits(self) -> [bool; 4] {
        [self.bit(0), self.bit(1), self.bit(2), self.bit(3)]
    }

    #[inline]
    pub const fn bit(self, k: usize) -> bool {
        (self.0 >> k) & 1 == 1
    }

    #[inline]
    pub const fn eval(self, a: bool, b: bool) -> bool {
        self.bit(2 * a as usize + b as usize)
    }

    /// Applies the table bitwise to 64 packed evaluations at once.
    #[inline]
    pub fn eval_packed(self, a: u64, b: u64) -> u64 {
        let m = |k: usize| 0u64.wrapping_sub(((self.0 >> k) & 1) as u64);
        (!a & !b & m(0)) | (!a & b & m(1)) | (a & !b & m(2)) | (a & b & m(3))
    }

    /// Complements the output.
    pub const fn inverted(self) -> Self {
        Self(!self.0 & 0xf)
    }

    /// Table of the same gate with one of its inputs complemented.
    pub fn with_input_inverted(self, pin: Pin) -> Self {
        let mut out = [false; 4];
        for a in [false, true] {
            for b in [false, true] {
                let (sa, sb) = match pin {
                    Pin::A => (!a, b),
                    Pin::B => (a, !b),
                };
                out[2 * a as usize + b as usize] = self.eval(sa, sb);
            }
        }
        Self::from_bits(out)
    }

    pub fn depends_on(self, pin: Pin) -> bool {
        self.with_input_inverted(pin) != self
    }

    /// Conventional name of the function, used for drawings.
    pub fn name(self) -> &'static str {
        const NAMES: [&str; 16] = [
            "ZERO",
            "AND",
            "A_AND_NOTB",
            "A",
            "NOTA_AND_B",
            "B",
            "XOR",
            "OR",
            "NOR",
            "XNOR",
            "NOT_B",
            "A_OR_NOTB",
            "NOT_A",
            "NOTA_OR_B",
            "NAND",
            "ONE",
        ];
        // NAMES is indexed by the string t0t1t2t3 read as a binary number.
        let key = (self.bit(0) as usize) << 3
            | (self.bit(1) as usize) << 2
            | (self.bit(2) as usize) << 1
            | self.bit(3) as usize;
        NAMES[key]
    }
}

impl fmt::Display for TruthTable2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.bits() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for TruthTable2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable2({self})")
    }
}

impl FromStr for TruthTable2 {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 4 {
            return Err(format!("truth table {s:?} must have 4 characters"));
        }
        let mut bits = [false; 4];
        for (k, c) in chars.into_iter().enumerate() {
            bits[k] = match c {
                '0' => false,
                '1' => true,
                _ => return Err(format!("truth table {s:?} must contain only 0 and 1")),
            };
        }
        Ok(Self::from_bits(bits))
    }
}

/// One of the two inputs of a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pin {
    A,
    B,
}

/// A net: either a primary input or the output of a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalRef {
    Input(usize),
    Gate(usize),
}

impl fmt::Display for SignalRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalRef::Input(i) => write!(f, "x{i}"),
            SignalRef::Gate(i) => write!(f, "g{i}"),
        }
    }
}

impl FromStr for SignalRef {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || format!("signal {s:?} must look like x<i> or g<i>");
        let (kind, index) = s.split_at_checked(1).ok_or_else(bad)?;
        if index.is_empty() || !index.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let index: usize = index.parse().map_err(|_| bad())?;
        match kind {
            "x" => Ok(SignalRef::Input(index)),
            "g" => Ok(SignalRef::Gate(index)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub tt: TruthTable2,
    pub a: SignalRef,
    pub b: SignalRef,
}

impl Gate {
    pub fn new(tt: TruthTable2, a: SignalRef, b: SignalRef) -> Self {
        Self { tt, a, b }
    }

    pub fn source(&self, pin: Pin) -> SignalRef {
        match pin {
            Pin::A => self.a,
            Pin::B => self.b,
        }
    }
}

/// Where a stuck-at fault sits on a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultSite {
    Output,
    InputA,
    InputB,
}

impl FaultSite {
    pub const ALL: [FaultSite; 3] = [FaultSite::Output, FaultSite::InputA, FaultSite::InputB];

    pub fn pin(self) -> Option<Pin> {
        match self {
            FaultSite::Output => None,
            FaultSite::InputA => Some(Pin::A),
            FaultSite::InputB => Some(Pin::B),
        }
    }
}

/// A single stuck-at fault on a gate pin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fault {
    pub gate: usize,
    pub site: FaultSite,
    pub stuck: bool,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = match self.site {
            FaultSite::Output => "q",
            FaultSite::InputA => "a",
            FaultSite::InputB => "b",
        };
        write!(f, "{site}{}.{}", self.gate, self.stuck as u8)
    }
}

/// Dual-rail encoding of one bit: `value` carried on `one`, its complement on `zero`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualRail {
    pub zero: SignalRef,
    pub one: SignalRef,
}

/// Feed-forward netlist of two-input gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub inputs: usize,
    pub gates: Vec<Gate>,
    pub outputs: Vec<SignalRef>,
    pub rails: Option<[SignalRef; 2]>,
}

impl Circuit {
    pub fn new(
        inputs: usize,
        gates: Vec<Gate>,
        outputs: Vec<SignalRef>,
        rails: Option<[SignalRef; 2]>,
    ) -> Result<Self> {
        let c = Self {
            inputs,
            gates,
            outputs,
            rails,
        };
        c.validate()?;
        Ok(c)
    }

    /// Checks that every reference resolves and that sources precede sinks.
    pub fn validate(&self) -> Result<()> {
        let check = |s: SignalRef, limit: usize, what: &dyn Fn() -> String| -> Result<()> {
            match s {
                SignalRef::Input(i) if i >= self.inputs => Err(Error::InvalidCircuit(format!(
                    "{} reads {s}, but there are only {} inputs",
                    what(),
                    self.inputs
                ))),
                SignalRef::Gate(i) if i >= limit => Err(Error::InvalidCircuit(format!(
                    "{} reads {s}, which is not an earlier gate",
                    what()
                ))),
                _ => Ok(()),
            }
        };
        for (i, gate) in self.gates.iter().enumerate() {
            check(gate.a, i, &|| format!("gate g{i}"))?;
            check(gate.b, i, &|| format!("gate g{i}"))?;
        }
        let n = self.gates.len();
        for (j, &y) in self.outputs.iter().enumerate() {
            check(y, n, &|| format!("output y{j}"))?;
        }
        if let Some(rails) = self.rails {
            for (j, &z) in rails.iter().enumerate() {
                check(z, n, &|| format!("rail z{j}"))?;
            }
        }
        Ok(())
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Outputs followed by the rails, if any.
    pub fn sinks(&self) -> impl Iterator<Item = SignalRef> + '_ {
        self.outputs
            .iter()
            .copied()
            .chain(self.rails.iter().flatten().copied())
    }

    /// Per-gate flag: true if the gate has a path to an output or a rail.
    pub fn live_mask(&self) -> Vec<bool> {
        let mut live = vec![false; self.gates.len()];
        for s in self.sinks() {
            if let SignalRef::Gate(i) = s {
                live[i] = true;
            }
        }
        for i in (0..self.gates.len()).rev() {
            if !live[i] {
                continue;
            }
            let gate = self.gates[i];
            for s in [gate.a, gate.b] {
                if let SignalRef::Gate(k) = s {
                    live[k] = true;
                }
            }
        }
        live
    }

    /// Indices of the gates with a directed path to an output or rail.
    pub fn live_set(&self) -> Vec<usize> {
        self.live_mask()
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| l.then_some(i))
            .collect()
    }

    pub fn live_count(&self) -> usize {
        self.live_mask().iter().filter(|&&l| l).count()
    }

    /// Copy with every dead gate removed. Also returns, for each kept gate,
    /// its index in `self`.
    pub fn pruned(&self) -> (Circuit, Vec<usize>) {
        let live = self.live_mask();
        let mut remap = vec![usize::MAX; self.gates.len()];
        let mut kept = Vec::new();
        let mut gates = Vec::new();
        let map = |s: SignalRef, remap: &[usize]| match s {
            SignalRef::Gate(i) => SignalRef::Gate(remap[i]),
            s => s,
        };
        for (i, gate) in self.gates.iter().enumerate() {
            if live[i] {
                remap[i] = gates.len();
                kept.push(i);
                gates.push(Gate::new(gate.tt, map(gate.a, &remap), map(gate.b, &remap)));
            }
        }
        let outputs = self.outputs.iter().map(|&s| map(s, &remap)).collect();
        let rails = self
            .rails
            .map(|[z0, z1]| [map(z0, &remap), map(z1, &remap)]);
        let circuit = Circuit {
            inputs: self.inputs,
            gates,
            outputs,
            rails,
        };
        (circuit, kept)
    }
}

/// Appends a two-rail checker merging two dual-rail pairs into one.
///
/// The result is valid (`zero != one`) iff both inputs are valid, and then
/// encodes the XNOR of the two carried values. Costs 6 gates.
pub fn push_two_rail_checker(gates: &mut Vec<Gate>, x: DualRail, y: DualRail) -> DualRail {
    push_checker_with_negation(gates, x, y, [false, false])
}

/// Two-rail checker whose `zero` inputs may be read through a pin inversion
/// (`negate_zero[0]` for `x`, `[1]` for `y`), which is free in a two-input
/// gate library.
fn push_checker_with_negation(
    gates: &mut Vec<Gate>,
    x: DualRail,
    y: DualRail,
    negate_zero: [bool; 2],
) -> DualRail {
    let and = |p: SignalRef, neg_p: bool, q: SignalRef, neg_q: bool| {
        let mut tt = TruthTable2::AND;
        if neg_p {
            tt = tt.with_input_inverted(Pin::A);
        }
        if neg_q {
            tt = tt.with_input_inverted(Pin::B);
        }
        Gate::new(tt, p, q)
    };
    let [nx, ny] = negate_zero;
    let base = gates.len();
    gates.push(and(x.one, false, y.one, false));
    gates.push(and(x.zero, nx, y.zero, ny));
    gates.push(Gate::new(
        TruthTable2::OR,
        SignalRef::Gate(base),
        SignalRef::Gate(base + 1),
    ));
    gates.push(and(x.one, false, y.zero, ny));
    gates.push(and(x.zero, nx, y.one, false));
    gates.push(Gate::new(
        TruthTable2::OR,
        SignalRef::Gate(base + 3),
        SignalRef::Gate(base + 4),
    ));
    DualRail {
        zero: SignalRef::Gate(base + 5),
        one: SignalRef::Gate(base + 2),
    }
}

/// Standalone 6-gate two-rail checker over inputs `x0..x3 = (a0, a1, b0, b1)`.
///
/// The checker output pair is exposed both as function outputs `(c0, c1)`
/// and as the error rails, so fault-secureness covers incorrect codewords.
pub fn two_rail_checker_circuit() -> Circuit {
    let mut gates = Vec::new();
    let out = push_two_rail_checker(
        &mut gates,
        DualRail {
            zero: SignalRef::Input(0),
            one: SignalRef::Input(1),
        },
        DualRail {
            zero: SignalRef::Input(2),
            one: SignalRef::Input(3),
        },
    );
    Circuit {
        inputs: 4,
        gates,
        outputs: vec![out.zero, out.one],
        rails: Some([out.zero, out.one]),
    }
}

/// Gate overhead of duplication with comparison: a full copy of a `g`-gate
/// circuit plus `q - 1` two-rail checkers.
pub fn duplication_overhead(gates: usize, outputs: usize) -> usize {
    gates + 6 * outputs.saturating_sub(1)
}

/// Result of [`build_duplication_baseline`].
#[derive(Clone, Debug)]
pub struct DuplicationBaseline {
    pub circuit: Circuit,
    /// Gates `0..seed_gates` are the seed, unchanged.
    pub seed_gates: usize,
    /// Inverted copy of the seed.
    pub copy_gates: Range<usize>,
    pub checker_gates: Range<usize>,
    /// Checker tree shape: leaves `0..q` are the output pairs, internal node
    /// `q + k` merges `tree[k]`.
    pub tree: Vec<[usize; 2]>,
}

impl DuplicationBaseline {
    pub fn overhead(&self) -> usize {
        self.circuit.gates.len() - self.seed_gates
    }
}

/// Duplication-and-comparison reference design.
///
/// Adds a copy of `seed` whose outputs are inverted (inversion is folded into
/// the gate truth tables, so it costs nothing), pairs each output `y_i` with
/// its inverted copy as `(!y_i, y_i)`, and reduces the pairs with a balanced
/// tree of two-rail checkers in output index order.
pub fn build_duplication_baseline(seed: &Circuit) -> Result<DuplicationBaseline> {
    if seed.rails.is_some() {
        return Err(Error::Unsupported(
            "duplication baseline needs a seed without error rails".into(),
        ));
    }
    let q = seed.outputs.len();
    if q == 0 {
        return Err(Error::Unsupported(
            "duplication baseline needs at least one output".into(),
        ));
    }
    let g = seed.gates.len();
    let mut drives_output = vec![false; g];
    for &y in &seed.outputs {
        if let SignalRef::Gate(i) = y {
            drives_output[i] = true;
        }
    }

    let mut gates = seed.gates.clone();
    for gate in &seed.gates {
        let mut tt = gate.tt;
        let mut map = |s: SignalRef, pin: Pin| match s {
            SignalRef::Gate(k) => {
                if drives_output[k] {
                    tt = tt.with_input_inverted(pin);
                }
                SignalRef::Gate(g + k)
            }
            s => s,
        };
        let a = map(gate.a, Pin::A);
        let b = map(gate.b, Pin::B);
        gates.push(Gate::new(tt, a, b));
    }
    for k in 0..g {
        if drives_output[k] {
            gates[g + k].tt = gates[g + k].tt.inverted();
        }
    }

    // An output driven straight from an input has no copy to invert; its
    // zero rail is the input itself read through inverted checker pins.
    let mut pairs = Vec::with_capacity(q);
    for &y in &seed.outputs {
        let (zero, negated) = match y {
            SignalRef::Gate(k) => (SignalRef::Gate(g + k), false),
            SignalRef::Input(_) if q == 1 => {
                gates.push(Gate::new(TruthTable2::NOT_A, y, y));
                (SignalRef::Gate(gates.len() - 1), false)
            }
            SignalRef::Input(_) => (y, true),
        };
        pairs.push((DualRail { zero, one: y }, negated));
    }
    let copy_end = gates.len();

    let mut level: Vec<(usize, DualRail, bool)> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (pair, negated))| (i, pair, negated))
        .collect();
    let mut tree = Vec::new();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for chunk in level.chunks(2) {
            match chunk {
                [(li, l, ln), (ri, r, rn)] => {
                    let merged = push_checker_with_negation(&mut gates, *l, *r, [*ln, *rn]);
                    tree.push([*li, *ri]);
                    next.push((q + tree.len() - 1, merged, false));
                }
                [single] => next.push(*single),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    let root = level[0].1;
    let circuit = Circuit::new(
        seed.inputs,
        gates,
        seed.outputs.clone(),
        Some([root.zero, root.one]),
    )?;
    let checker_gates = copy_end..circuit.gates.len();
    Ok(DuplicationBaseline {
        circuit,
        seed_gates: g,
        copy_gates: g..copy_end,
        checker_gates,
        tree,
    })
}
