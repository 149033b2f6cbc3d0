//! Fixed-length bit-string genotypes and the operators that vary them.
//!
//! Layout, in genotype bit order:
//!
//! * `m` routing fields of `b` bits each, choosing the drivers of
//!   `y_0..y_{q-1}` and then `z_0, z_1` (`m = q + 2`);
//! * `M = 2^b - r` genes of `4 + 2b` bits: truth table bits `t0..t3`, then the
//!   addresses of the first and second input.
//!
//! Addresses `0..M` name gates by gene position; the `r` largest addresses
//! name the primary inputs `x_0..x_{r-1}` in ascending order. Multi-bit fields
//! are most-significant-bit first.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{duplication_overhead, Circuit, Gate, SignalRef, TruthTable2};
use crate::seeding::splitmix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenomeLayout {
    /// Primary inputs, `r`.
    pub inputs: usize,
    /// Function outputs, `q`.
    pub outputs: usize,
    /// Address width, `b`.
    pub addr_bits: usize,
    /// Whether two extra routing fields encode the error rails.
    pub rails: bool,
}

impl GenomeLayout {
    pub fn new(inputs: usize, outputs: usize, addr_bits: usize) -> Result<Self> {
        Self::build(inputs, outputs, addr_bits, true)
    }

    /// Layout for plain circuits without error rails.
    pub fn without_rails(inputs: usize, outputs: usize, addr_bits: usize) -> Result<Self> {
        Self::build(inputs, outputs, addr_bits, false)
    }

    fn build(inputs: usize, outputs: usize, addr_bits: usize, rails: bool) -> Result<Self> {
        if inputs == 0 {
            return Err(Error::InvalidLayout(
                "at least one primary input is required".into(),
            ));
        }
        if !(1..=20).contains(&addr_bits) {
            return Err(Error::InvalidLayout(format!(
                "address width {addr_bits} outside 1..=20"
            )));
        }
        if (1usize << addr_bits) <= inputs {
            return Err(Error::InvalidLayout(format!(
                "{addr_bits}-bit addresses cannot reach a gate past {inputs} inputs"
            )));
        }
        Ok(Self {
            inputs,
            outputs,
            addr_bits,
            rails,
        })
    }

    /// Smallest address width whose gate budget fits the seed plus a full
    /// duplication-with-comparison design.
    pub fn for_duplication(inputs: usize, outputs: usize, seed_gates: usize) -> Result<Self> {
        let needed = seed_gates + duplication_overhead(seed_gates, outputs);
        let mut b = 1;
        while (1usize << b) < inputs + needed.max(1) {
            b += 1;
        }
        Self::new(inputs, outputs, b)
    }

    /// Number of routed outputs, `m`.
    pub fn routed(&self) -> usize {
        self.outputs + if self.rails { 2 } else { 0 }
    }

    /// Maximum gate count, `M = 2^b - r`.
    pub fn max_gates(&self) -> usize {
        (1usize << self.addr_bits) - self.inputs
    }

    pub fn gene_len(&self) -> usize {
        4 + 2 * self.addr_bits
    }

    pub fn total_len(&self) -> usize {
        self.routed() * self.addr_bits + self.max_gates() * self.gene_len()
    }

    /// Bit position of the `k`-th routing field.
    pub fn routing_field(&self, k: usize) -> usize {
        k * self.addr_bits
    }

    /// Bit position of gene `k`.
    pub fn gene_start(&self, k: usize) -> usize {
        self.routed() * self.addr_bits + k * self.gene_len()
    }

    /// Start positions of every address field: routing fields first, then the
    /// two source fields of each gene.
    pub fn address_fields(&self) -> impl Iterator<Item = usize> + '_ {
        let b = self.addr_bits;
        (0..self.routed())
            .map(|k| self.routing_field(k))
            .chain((0..self.max_gates()).flat_map(move |k| {
                let s = self.gene_start(k) + 4;
                [s, s + b]
            }))
    }

    fn address_of(&self, s: SignalRef) -> usize {
        match s {
            SignalRef::Gate(i) => i,
            SignalRef::Input(j) => self.max_gates() + j,
        }
    }
}

/// A genotype: exactly `layout.total_len()` bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Genotype {
    layout: GenomeLayout,
    words: Vec<u64>,
}

impl Genotype {
    pub fn zeros(layout: GenomeLayout) -> Self {
        Self {
            layout,
            words: vec![0; layout.total_len().div_ceil(64)],
        }
    }

    pub fn random<R: Rng + ?Sized>(layout: GenomeLayout, rng: &mut R) -> Self {
        let mut g = Self::zeros(layout);
        for w in &mut g.words {
            *w = rng.gen();
        }
        g.clear_padding();
        g
    }

    fn clear_padding(&mut self) {
        let len = self.len();
        if !len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
    }

    pub fn layout(&self) -> GenomeLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.layout.total_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    /// Reads `width` bits starting at `start`, most significant first.
    pub fn field(&self, start: usize, width: usize) -> usize {
        (start..start + width).fold(0, |v, i| (v << 1) | self.get(i) as usize)
    }

    pub fn set_field(&mut self, start: usize, width: usize, value: usize) {
        for k in 0..width {
            self.set(start + k, (value >> (width - 1 - k)) & 1 == 1);
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    /// Number of differing bits. Layouts must match.
    pub fn hamming(&self, other: &Genotype) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Stable 64-bit digest of the bit string.
    pub fn fingerprint(&self) -> u64 {
        self.words
            .iter()
            .fold(splitmix64(self.len() as u64), |h, &w| splitmix64(h ^ w))
    }

    /// Lowercase hex, 8 bits per byte, earliest bit in the most significant
    /// position; trailing pad bits are zero.
    pub fn to_hex(&self) -> String {
        let len = self.len();
        let mut out = String::with_capacity(len.div_ceil(8) * 2);
        for k in 0..len.div_ceil(8) {
            let mut byte = 0u8;
            for i in 0..8 {
                let bit = 8 * k + i;
                if bit < len && self.get(bit) {
                    byte |= 0x80 >> i;
                }
            }
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_hex(layout: GenomeLayout, hex: &str) -> Result<Self> {
        let len = layout.total_len();
        if hex.len() != len.div_ceil(8) * 2 {
            return Err(Error::Hex(format!(
                "expected {} hex digits for {len} bits, got {}",
                len.div_ceil(8) * 2,
                hex.len()
            )));
        }
        let mut g = Self::zeros(layout);
        for k in 0..len.div_ceil(8) {
            let byte = hex
                .get(2 * k..2 * k + 2)
                .and_then(|s| u8::from_str_radix(s, 16).ok())
                .ok_or_else(|| Error::Hex(format!("bad digits at byte {k}")))?;
            for i in 0..8 {
                let bit = 8 * k + i;
                let v = byte & (0x80 >> i) != 0;
                if bit < len {
                    g.set(bit, v);
                } else if v {
                    return Err(Error::Hex("pad bits must be zero".into()));
                }
            }
        }
        Ok(g)
    }

    /// Decodes with repairs drawn from the genotype's own bits; see
    /// [`decode_canonical_with_origins`].
    pub fn decode_canonical(&self) -> Circuit {
        decode_canonical_with_origins(self).0
    }
}

impl fmt::Debug for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genotype({})", self.to_hex())
    }
}

/// Positions that genetic operators must not write.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LockMask {
    layout: GenomeLayout,
    locked: Vec<bool>,
    free_bits: Vec<u32>,
    free_fields: Vec<usize>,
    free_genes: Vec<usize>,
}

impl LockMask {
    pub fn empty(layout: GenomeLayout) -> Self {
        Self::from_flags(layout, vec![false; layout.total_len()])
    }

    pub fn from_flags(layout: GenomeLayout, locked: Vec<bool>) -> Self {
        assert_eq!(locked.len(), layout.total_len());
        let free_bits = (0..locked.len())
            .filter(|&i| !locked[i])
            .map(|i| i as u32)
            .collect();
        let b = layout.addr_bits;
        let free_fields = layout
            .address_fields()
            .filter(|&s| !locked[s..s + b].iter().any(|&l| l))
            .collect();
        let free_genes = (0..layout.max_gates())
            .filter(|&k| {
                let s = layout.gene_start(k);
                !locked[s..s + layout.gene_len()].iter().any(|&l| l)
            })
            .collect();
        Self {
            layout,
            locked,
            free_bits,
            free_fields,
            free_genes,
        }
    }

    pub fn layout(&self) -> GenomeLayout {
        self.layout
    }

    pub fn is_locked(&self, i: usize) -> bool {
        self.locked[i]
    }

    pub fn locked_count(&self) -> usize {
        self.locked.len() - self.free_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free_bits.len() == self.locked.len()
    }

    /// Fully unlocked gene slots.
    pub fn free_genes(&self) -> &[usize] {
        &self.free_genes
    }

    /// True if `a` and `b` agree on every locked position.
    pub fn agrees(&self, a: &Genotype, b: &Genotype) -> bool {
        (0..self.locked.len()).all(|i| !self.locked[i] || a.get(i) == b.get(i))
    }
}

/// Decodes a genotype into a feed-forward circuit holding only live gates.
///
/// Loops are broken by depth-first search from each routed output in order,
/// visiting a gate's first source before its second. An edge back to a gate
/// already on the current path is rerouted to a primary input drawn from
/// `rng`. The genotype itself is never modified.
pub fn decode<R: Rng + ?Sized>(g: &Genotype, rng: &mut R) -> Circuit {
    decode_with_origins(g, rng).0
}

/// Like [`decode`], also returning the gene slot each decoded gate came from.
pub fn decode_with_origins<R: Rng + ?Sized>(g: &Genotype, rng: &mut R) -> (Circuit, Vec<usize>) {
    let inputs = g.layout.inputs;
    decode_with_repair(g, |_, _| rng.gen_range(0..inputs))
}

/// Decoding with loop-breaking inputs derived from the offending gene's own
/// bits, its slot, and the pin. The phenotype is a pure function of the
/// genotype, and a loop's repair only changes when the gene closing it does.
pub fn decode_canonical_with_origins(g: &Genotype) -> (Circuit, Vec<usize>) {
    let layout = g.layout;
    let len = layout.gene_len();
    decode_with_repair(g, |gene, pin| {
        let start = layout.gene_start(gene);
        let mut h = splitmix64(((gene as u64) << 1) | pin as u64);
        let mut k = 0;
        while k < len {
            let w = (len - k).min(32);
            h = splitmix64(h ^ g.field(start + k, w) as u64);
            k += w;
        }
        (h % layout.inputs as u64) as usize
    })
}

/// Decoding core. `repair(gene, pin)` names the primary input that replaces
/// a loop-closing source.
fn decode_with_repair(
    g: &Genotype,
    mut repair: impl FnMut(usize, usize) -> usize,
) -> (Circuit, Vec<usize>) {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        New,
        OnPath,
        Done(usize),
    }
    struct Frame {
        gene: usize,
        next_pin: usize,
        srcs: [SignalRef; 2],
    }

    let layout = g.layout;
    let b = layout.addr_bits;
    let max = layout.max_gates();
    let mut state = vec![State::New; max];
    let mut gates: Vec<Gate> = Vec::new();
    let mut origins = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let source_addr = |gene: usize, pin: usize| g.field(layout.gene_start(gene) + 4 + pin * b, b);

    let mut sinks = Vec::with_capacity(layout.routed());
    for k in 0..layout.routed() {
        let addr = g.field(layout.routing_field(k), b);
        if addr >= max {
            sinks.push(SignalRef::Input(addr - max));
            continue;
        }
        if let State::Done(i) = state[addr] {
            sinks.push(SignalRef::Gate(i));
            continue;
        }
        state[addr] = State::OnPath;
        stack.push(Frame {
            gene: addr,
            next_pin: 0,
            srcs: [SignalRef::Input(0); 2],
        });
        while let Some(top) = stack.last_mut() {
            if top.next_pin < 2 {
                let pin = top.next_pin;
                top.next_pin += 1;
                let src = source_addr(top.gene, pin);
                if src >= max {
                    top.srcs[pin] = SignalRef::Input(src - max);
                    continue;
                }
                match state[src] {
                    State::Done(i) => top.srcs[pin] = SignalRef::Gate(i),
                    State::OnPath => {
                        top.srcs[pin] = SignalRef::Input(repair(top.gene, pin));
                    }
                    State::New => {
                        state[src] = State::OnPath;
                        stack.push(Frame {
                            gene: src,
                            next_pin: 0,
                            srcs: [SignalRef::Input(0); 2],
                        });
                    }
                }
            } else {
                let frame = stack.pop().expect("non-empty");
                let start = layout.gene_start(frame.gene);
                let tt = TruthTable2::from_bits([
                    g.get(start),
                    g.get(start + 1),
                    g.get(start + 2),
                    g.get(start + 3),
                ]);
                let index = gates.len();
                gates.push(Gate::new(tt, frame.srcs[0], frame.srcs[1]));
                origins.push(frame.gene);
                state[frame.gene] = State::Done(index);
                let out = SignalRef::Gate(index);
                match stack.last_mut() {
                    Some(parent) => parent.srcs[parent.next_pin - 1] = out,
                    None => sinks.push(out),
                }
            }
        }
    }

    let rails = layout
        .rails
        .then(|| [sinks[layout.outputs], sinks[layout.outputs + 1]]);
    sinks.truncate(layout.outputs);
    let circuit = Circuit {
        inputs: layout.inputs,
        gates,
        outputs: sinks,
        rails,
    };
    debug_assert!(circuit.validate().is_ok());
    (circuit, origins)
}

/// Whether seed logic may be changed by evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    Unconstrained,
    NonIntrusive,
}

/// Encodes `seed` into gene slots `0..g` (in its topological order) with a
/// random remainder. In non-intrusive mode the seed genes and function-output
/// routing fields are locked.
pub fn encode_seed<R: Rng + ?Sized>(
    seed: &Circuit,
    layout: GenomeLayout,
    mode: SeedMode,
    rng: &mut R,
) -> Result<(Genotype, LockMask)> {
    if seed.inputs != layout.inputs {
        return Err(Error::SeedMismatch(format!(
            "seed has {} inputs, layout {}",
            seed.inputs, layout.inputs
        )));
    }
    if seed.outputs.len() != layout.outputs {
        return Err(Error::SeedMismatch(format!(
            "seed has {} outputs, layout {}",
            seed.outputs.len(),
            layout.outputs
        )));
    }
    if seed.gates.len() > layout.max_gates() {
        return Err(Error::SeedTooLarge {
            gates: seed.gates.len(),
            max: layout.max_gates(),
        });
    }
    seed.validate()?;

    let b = layout.addr_bits;
    let mut g = Genotype::random(layout, rng);
    let mut locked = vec![false; layout.total_len()];
    let lock = mode == SeedMode::NonIntrusive;

    for (k, &y) in seed.outputs.iter().enumerate() {
        let start = layout.routing_field(k);
        g.set_field(start, b, layout.address_of(y));
        if lock {
            locked[start..start + b].fill(true);
        }
    }
    if let (true, Some(rails)) = (layout.rails, seed.rails) {
        for (k, &z) in rails.iter().enumerate() {
            g.set_field(
                layout.routing_field(layout.outputs + k),
                b,
                layout.address_of(z),
            );
        }
    }
    for (k, gate) in seed.gates.iter().enumerate() {
        let start = layout.gene_start(k);
        for (i, bit) in gate.tt.bits().into_iter().enumerate() {
            g.set(start + i, bit);
        }
        g.set_field(start + 4, b, layout.address_of(gate.a));
        g.set_field(start + 4 + b, b, layout.address_of(gate.b));
        if lock {
            locked[start..start + layout.gene_len()].fill(true);
        }
    }
    Ok((g, LockMask::from_flags(layout, locked)))
}

/// Whether the circuit decoded from `g` contains `seed` (encoded by
/// [`encode_seed`]) gate for gate, with every function output still driven
/// by the seed's own driver.
pub fn seed_is_embedded(seed: &Circuit, g: &Genotype) -> bool {
    let (decoded, origins) = decode_canonical_with_origins(g);
    let mut map = vec![None; seed.gates.len()];
    for (i, &slot) in origins.iter().enumerate() {
        if slot < seed.gates.len() {
            map[slot] = Some(i);
        }
    }
    let translate = |s: SignalRef| match s {
        SignalRef::Gate(k) => map[k].map(SignalRef::Gate),
        x => Some(x),
    };
    let live = seed.live_mask();
    let gates_match = seed.gates.iter().enumerate().all(|(k, gate)| {
        let (Some(i), Some(a), Some(b)) = (map[k], translate(gate.a), translate(gate.b)) else {
            // A seed gate that drives nothing live is dropped by decoding.
            return map[k].is_none() && !live[k];
        };
        decoded.gates[i] == Gate::new(gate.tt, a, b)
    });
    let outputs_match = seed
        .outputs
        .iter()
        .zip(&decoded.outputs)
        .all(|(&y, &d)| translate(y) == Some(d));
    gates_match && outputs_match
}

fn check_lock(g: &Genotype, lock: &LockMask) -> Result<()> {
    if g.layout != lock.layout {
        return Err(Error::LayoutMismatch);
    }
    Ok(())
}

/// Flips one uniformly chosen unlocked bit.
pub fn mutate_bit<R: Rng + ?Sized>(g: &Genotype, lock: &LockMask, rng: &mut R) -> Result<Genotype> {
    check_lock(g, lock)?;
    if lock.free_bits.is_empty() {
        return Err(Error::AllLocked("bit"));
    }
    let mut child = g.clone();
    child.flip(lock.free_bits[rng.gen_range(0..lock.free_bits.len())] as usize);
    Ok(child)
}

/// Rewrites one uniformly chosen unlocked address field with a uniform value.
pub fn mutate_routing<R: Rng + ?Sized>(
    g: &Genotype,
    lock: &LockMask,
    rng: &mut R,
) -> Result<Genotype> {
    check_lock(g, lock)?;
    if lock.free_fields.is_empty() {
        return Err(Error::AllLocked("address field"));
    }
    let b = g.layout.addr_bits;
    let start = lock.free_fields[rng.gen_range(0..lock.free_fields.len())];
    let mut child = g.clone();
    child.set_field(start, b, rng.gen_range(0..1usize << b));
    Ok(child)
}

/// Copies gene `i` over a distinct, fully unlocked gene `j`.
pub fn mutate_translocate<R: Rng + ?Sized>(
    g: &Genotype,
    lock: &LockMask,
    rng: &mut R,
) -> Result<Genotype> {
    check_lock(g, lock)?;
    let layout = g.layout;
    let genes = layout.max_gates();
    if genes < 2 || lock.free_genes.is_empty() {
        return Err(Error::AllLocked("destination gene"));
    }
    let j = lock.free_genes[rng.gen_range(0..lock.free_genes.len())];
    let mut i = rng.gen_range(0..genes - 1);
    if i >= j {
        i += 1;
    }
    let (src, dst) = (layout.gene_start(i), layout.gene_start(j));
    let mut child = g.clone();
    for k in 0..layout.gene_len() {
        child.set(dst + k, g.get(src + k));
    }
    Ok(child)
}

/// Single-point crossover: bits `0..p` from `a`, `p..` from `b`, with `p`
/// uniform in `1..len`.
pub fn crossover_single_point<R: Rng + ?Sized>(
    a: &Genotype,
    b: &Genotype,
    rng: &mut R,
) -> Result<Genotype> {
    if a.layout != b.layout {
        return Err(Error::LayoutMismatch);
    }
    let len = a.len();
    if len < 2 {
        return Ok(a.clone());
    }
    let p = rng.gen_range(1..len);
    Ok(splice(a, b, p))
}

pub(crate) fn splice(a: &Genotype, b: &Genotype, p: usize) -> Genotype {
    let mut child = a.clone();
    let word = p / 64;
    let keep = if p.is_multiple_of(64) {
        0
    } else {
        (1u64 << (p % 64)) - 1
    };
    if word < child.words.len() {
        child.words[word] = (a.words[word] & keep) | (b.words[word] & !keep);
        child.words[word + 1..].copy_from_slice(&b.words[word + 1..]);
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream;
    use SignalRef::{Gate as G, Input as X};

    fn tiny_layout() -> GenomeLayout {
        GenomeLayout::without_rails(2, 1, 2).unwrap()
    }

    fn from_bit_string(layout: GenomeLayout, s: &str) -> Genotype {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c == '1')
            .collect();
        assert_eq!(bits.len(), layout.total_len());
        let mut g = Genotype::zeros(layout);
        for (i, v) in bits.into_iter().enumerate() {
            g.set(i, v);
        }
        g
    }

    #[test]
    fn layout_sizes() {
        let l = tiny_layout();
        assert_eq!(
            (l.routed(), l.max_gates(), l.gene_len(), l.total_len()),
            (1, 2, 8, 18)
        );
        let l = GenomeLayout::new(4, 10, 6).unwrap();
        assert_eq!(l.max_gates(), 60);
        assert_eq!(l.total_len(), 12 * 6 + 60 * 16);
        assert_eq!(l.total_len(), 1032);
        assert!(GenomeLayout::new(4, 1, 2).is_err());
        assert!(GenomeLayout::new(0, 1, 2).is_err());
    }

    #[test]
    fn duplication_sized_layout() {
        // c17: 6 gates, 2 outputs, 5 inputs needs 18 gates in total.
        let l = GenomeLayout::for_duplication(5, 2, 6).unwrap();
        assert_eq!(l.addr_bits, 5);
        assert!(l.max_gates() >= 18);
        let l = GenomeLayout::for_duplication(4, 4, 7).unwrap();
        assert_eq!(l.addr_bits, 6);
    }

    #[test]
    fn hand_decoded_xor() {
        let l = tiny_layout();
        let g = from_bit_string(l, "00 0110 10 11 00000000");
        let c = decode(&g, &mut stream(0, 0));
        assert_eq!(c.gates, vec![Gate::new(TruthTable2::XOR, X(0), X(1))]);
        assert_eq!(c.outputs, vec![G(0)]);
        assert_eq!(c.rails, None);
    }

    #[test]
    fn self_loop_is_rerouted() {
        let l = tiny_layout();
        // gate 0 reads itself on source a.
        let g = from_bit_string(l, "00 0110 00 11 00000000");
        let c = decode(&g, &mut stream(0, 0));
        assert_eq!(c.gates.len(), 1);
        assert!(matches!(c.gates[0].a, X(_)));
        assert_eq!(c.gates[0].b, X(1));
        c.validate().unwrap();
    }

    #[test]
    fn two_gate_loop_is_broken() {
        let l = tiny_layout();
        // y <- g0; g0 reads g1 and x0; g1 reads g0 and x1.
        let g = from_bit_string(l, "00 0001 01 10 0110 00 11");
        let c = decode(&g, &mut stream(1, 0));
        c.validate().unwrap();
        assert_eq!(c.gates.len(), 2);
        assert_eq!(c.gates[0].tt, TruthTable2::XOR);
        assert!(matches!(c.gates[0].a, X(_)));
        assert_eq!(c.gates[1], Gate::new(TruthTable2::AND, G(0), X(0)));
        assert_eq!(c.outputs, vec![G(1)]);
    }

    #[test]
    fn hex_layout() {
        let l = tiny_layout();
        let g = from_bit_string(l, "00 0110 10 11 00000000");
        // 00011010 11000000 00
        assert_eq!(g.to_hex(), "1ac000");
        assert_eq!(Genotype::from_hex(l, "1ac000").unwrap(), g);
        assert!(Genotype::from_hex(l, "1ac001").is_err());
        assert!(Genotype::from_hex(l, "1ac0").is_err());
        assert!(Genotype::from_hex(l, "1ag000").is_err());
    }

    #[test]
    fn field_roundtrip() {
        let l = GenomeLayout::new(4, 2, 6).unwrap();
        let mut g = Genotype::zeros(l);
        g.set_field(10, 6, 0b101101);
        assert_eq!(g.field(10, 6), 0b101101);
        assert!(g.get(10) && !g.get(11) && g.get(15));
    }

    fn seed_circuit() -> Circuit {
        let gates = vec![
            Gate::new(TruthTable2::AND, X(0), X(1)),
            Gate::new(TruthTable2::XOR, G(0), X(2)),
        ];
        Circuit::new(3, gates, vec![G(1), G(0)], None).unwrap()
    }

    #[test]
    fn seed_encoding_decodes_to_seed() {
        let l = GenomeLayout::new(3, 2, 4).unwrap();
        let seed = seed_circuit();
        let (g, lock) = encode_seed(&seed, l, SeedMode::Unconstrained, &mut stream(3, 0)).unwrap();
        assert!(lock.is_empty());
        let (c, origins) = decode_with_origins(&g, &mut stream(3, 1));
        // function outputs reach exactly the seed gates.
        let (seed_part, _) = Circuit {
            rails: None,
            ..c.clone()
        }
        .pruned();
        assert_eq!(seed_part.gates, seed.gates);
        assert_eq!(seed_part.outputs, seed.outputs);
        assert_eq!(&origins[..2], &[0, 1]);
    }

    #[test]
    fn non_intrusive_locks_seed() {
        let l = GenomeLayout::new(3, 2, 4).unwrap();
        let seed = seed_circuit();
        let (_, lock) = encode_seed(&seed, l, SeedMode::NonIntrusive, &mut stream(3, 0)).unwrap();
        assert_eq!(lock.locked_count(), 2 * l.gene_len() + 2 * l.addr_bits);
        assert!(!lock.free_genes().contains(&0));
        assert!(!lock.free_genes().contains(&1));
        assert_eq!(lock.free_genes().len(), l.max_gates() - 2);
    }

    #[test]
    fn embedded_seed_survives_free_mutations_only() {
        let l = GenomeLayout::new(3, 2, 4).unwrap();
        let seed = seed_circuit();
        let mut rng = stream(5, 0);
        let (g, lock) = encode_seed(&seed, l, SeedMode::NonIntrusive, &mut rng).unwrap();
        assert!(seed_is_embedded(&seed, &g));
        let mut child = g.clone();
        for _ in 0..200 {
            child = mutate_bit(&child, &lock, &mut rng).unwrap();
        }
        assert!(seed_is_embedded(&seed, &child));
        // Rewriting the first seed gate's truth table breaks the embedding.
        let mut broken = g.clone();
        broken.flip(l.gene_start(0));
        assert!(!seed_is_embedded(&seed, &broken));
    }

    #[test]
    fn empty_seed_locks_only_routing() {
        let l = GenomeLayout::new(2, 2, 3).unwrap();
        let seed = Circuit::new(2, vec![], vec![X(0), X(1)], None).unwrap();
        let (_, lock) = encode_seed(&seed, l, SeedMode::NonIntrusive, &mut stream(0, 0)).unwrap();
        assert_eq!(lock.locked_count(), 2 * l.addr_bits);
    }

    #[test]
    fn seed_too_large() {
        let l = GenomeLayout::new(3, 2, 2).unwrap();
        let err = encode_seed(
            &seed_circuit(),
            l,
            SeedMode::Unconstrained,
            &mut stream(0, 0),
        );
        assert!(matches!(err, Err(Error::SeedTooLarge { gates: 2, max: 1 })));
    }

    #[test]
    fn seed_filling_layout_leaves_no_random_genes() {
        let l = GenomeLayout::new(3, 2, 3).unwrap();
        let mut seed = seed_circuit();
        seed.gates.extend([
            Gate::new(TruthTable2::OR, X(0), X(1)),
            Gate::new(TruthTable2::OR, G(2), X(1)),
            Gate::new(TruthTable2::OR, G(3), X(1)),
        ]);
        assert_eq!(seed.gates.len(), l.max_gates());
        let (a, _) = encode_seed(&seed, l, SeedMode::Unconstrained, &mut stream(0, 0)).unwrap();
        let (b, _) = encode_seed(&seed, l, SeedMode::Unconstrained, &mut stream(0, 1)).unwrap();
        // only the rail routing fields differ.
        let first_gene = l.gene_start(0);
        for i in first_gene..l.total_len() {
            assert_eq!(a.get(i), b.get(i));
        }
    }

    #[test]
    fn bit_mutation_flips_one_bit() {
        let l = tiny_layout();
        let g = Genotype::random(l, &mut stream(0, 0));
        let lock = LockMask::empty(l);
        let mut rng = stream(0, 1);
        for _ in 0..50 {
            assert_eq!(mutate_bit(&g, &lock, &mut rng).unwrap().hamming(&g), 1);
        }
    }

    #[test]
    fn bit_mutation_respects_lock() {
        let l = tiny_layout();
        let g = Genotype::random(l, &mut stream(0, 0));
        let mut flags = vec![true; l.total_len()];
        flags[7] = false;
        let lock = LockMask::from_flags(l, flags);
        let child = mutate_bit(&g, &lock, &mut stream(0, 1)).unwrap();
        assert_eq!(child.get(7), !g.get(7));
        assert_eq!(child.hamming(&g), 1);
        let all = LockMask::from_flags(l, vec![true; l.total_len()]);
        assert!(matches!(
            mutate_bit(&g, &all, &mut stream(0, 1)),
            Err(Error::AllLocked(_))
        ));
    }

    #[test]
    fn bit_mutation_is_reproducible() {
        let l = GenomeLayout::new(3, 2, 4).unwrap();
        let lock = LockMask::empty(l);
        let run = || {
            let mut rng = stream(9, 9);
            let mut g = Genotype::zeros(l);
            for _ in 0..20 {
                g = mutate_bit(&g, &lock, &mut rng).unwrap();
            }
            g
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn routing_mutation_touches_one_field() {
        let l = GenomeLayout::new(4, 2, 6).unwrap();
        let g = Genotype::random(l, &mut stream(0, 0));
        let lock = LockMask::empty(l);
        let fields: Vec<usize> = l.address_fields().collect();
        let mut rng = stream(0, 2);
        for _ in 0..200 {
            let child = mutate_routing(&g, &lock, &mut rng).unwrap();
            let changed: Vec<usize> = (0..l.total_len())
                .filter(|&i| child.get(i) != g.get(i))
                .collect();
            if let Some(&first) = changed.first() {
                let field = fields
                    .iter()
                    .copied()
                    .find(|&s| s <= first && first < s + 6)
                    .unwrap();
                assert!(changed.iter().all(|&i| field <= i && i < field + 6));
            }
        }
    }

    #[test]
    fn translocation_copies_gene() {
        let l = GenomeLayout::new(3, 2, 4).unwrap();
        let g = Genotype::random(l, &mut stream(0, 0));
        let seed = seed_circuit();
        let (s, lock) = encode_seed(&seed, l, SeedMode::NonIntrusive, &mut stream(1, 0)).unwrap();
        let mut rng = stream(0, 3);
        for parent in [&g, &s] {
            for _ in 0..100 {
                let child = mutate_translocate(parent, &lock, &mut rng).unwrap();
                assert!(lock.agrees(&child, parent));
                let diff: Vec<usize> = (0..l.max_gates())
                    .filter(|&k| {
                        let st = l.gene_start(k);
                        (st..st + l.gene_len()).any(|i| child.get(i) != parent.get(i))
                    })
                    .collect();
                assert!(diff.len() <= 1);
                if let [j] = diff[..] {
                    assert!(j >= 2, "locked gene overwritten");
                    let sj = l.gene_start(j);
                    let copied = (0..l.max_gates()).any(|i| {
                        let si = l.gene_start(i);
                        i != j && (0..l.gene_len()).all(|k| child.get(sj + k) == parent.get(si + k))
                    });
                    assert!(copied);
                }
            }
        }
    }

    #[test]
    fn crossover_boundaries() {
        let l = GenomeLayout::new(3, 2, 4).unwrap();
        let a = Genotype::random(l, &mut stream(0, 0));
        let b = Genotype::random(l, &mut stream(0, 1));
        let c = splice(&a, &b, 1);
        assert_eq!(c.get(0), a.get(0));
        assert!((1..l.total_len()).all(|i| c.get(i) == b.get(i)));
        for p in [63, 64, 65, 128, l.total_len() - 1] {
            let c = splice(&a, &b, p);
            assert!((0..p).all(|i| c.get(i) == a.get(i)));
            assert!((p..l.total_len()).all(|i| c.get(i) == b.get(i)));
        }
        assert_eq!(
            crossover_single_point(&a, &a, &mut stream(0, 2)).unwrap(),
            a
        );
        let other = Genotype::zeros(GenomeLayout::new(3, 2, 5).unwrap());
        assert!(crossover_single_point(&a, &other, &mut stream(0, 2)).is_err());
    }

    #[test]
    fn canonical_decode_is_stable() {
        let l = GenomeLayout::new(3, 2, 4).unwrap();
        for s in 0..20 {
            let g = Genotype::random(l, &mut stream(5, s));
            assert_eq!(g.decode_canonical(), g.decode_canonical());
        }
    }
}
