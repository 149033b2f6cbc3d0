//! Gate-level BLIF subset: `.model`, `.inputs`, `.outputs`, single-output
//! `.names` covers with at most two inputs, and `.end`.

use std::collections::HashMap;
use std::fmt::Write;

use super::logical_lines;
use crate::error::{Error, Result};
use crate::netlist::{Circuit, Gate, SignalRef, TruthTable2};

/// A parsed BLIF model. Gates appear in topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlifModel {
    pub name: String,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub circuit: Circuit,
}

struct Block {
    line: usize,
    fanin: Vec<String>,
    out: String,
    rows: Vec<(usize, String, char)>,
}

impl Block {
    /// Truth table over `(a, b)`, where a unary cover reads `a` only and a
    /// constant cover reads neither.
    fn table(&self) -> Result<TruthTable2> {
        let n = self.fanin.len();
        let mut polarity = None;
        let mut on = [false; 4];
        for (line, plane, out) in &self.rows {
            let err = |msg: String| Error::parse("blif", *line, msg);
            if plane.chars().count() != n {
                return Err(err(format!(
                    "cube '{plane}' has {} columns, expected {n}",
                    plane.chars().count()
                )));
            }
            let bit = match out {
                '1' => true,
                '0' => false,
                c => return Err(err(format!("output value '{c}' not in {{0,1}}"))),
            };
            if *polarity.get_or_insert(bit) != bit {
                return Err(err("cover mixes on-set and off-set rows".into()));
            }
            let chars: Vec<char> = plane.chars().collect();
            for (k, slot) in on.iter_mut().enumerate() {
                let a = k >> 1 & 1 == 1;
                let b = k & 1 == 1;
                let vals = [a, b];
                let hit = chars
                    .iter()
                    .enumerate()
                    .try_fold(true, |acc, (j, &c)| match c {
                        '0' => Ok(acc && !vals[j]),
                        '1' => Ok(acc && vals[j]),
                        '-' => Ok(acc),
                        _ => Err(err(format!("cube character '{c}' not in {{0,1,-}}"))),
                    })?;
                *slot |= hit;
            }
        }
        // An off-set cover lists the zeros of the function.
        let bits = if polarity == Some(false) {
            on.map(|x| !x)
        } else {
            on
        };
        Ok(TruthTable2::from_bits(bits))
    }
}

pub fn parse_blif(text: &str) -> Result<BlifModel> {
    let mut name = String::new();
    let mut input_names: Vec<String> = Vec::new();
    let mut output_names: Vec<String> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut in_names = false;

    for (n, line) in logical_lines(text) {
        let err = |msg: String| Error::parse("blif", n, msg);
        let mut parts = line.split_whitespace();
        let head = parts.next().expect("logical lines are non-empty");
        if let Some(key) = head.strip_prefix('.') {
            in_names = false;
            let args: Vec<String> = parts.map(str::to_string).collect();
            match key {
                "model" => name = args.join(" "),
                "inputs" => input_names.extend(args),
                "outputs" => output_names.extend(args),
                "names" => {
                    let Some((out, fanin)) = args.split_last() else {
                        return Err(err(".names needs an output net".into()));
                    };
                    if fanin.len() > 2 {
                        return Err(err(format!(
                            "'{out}' has {} inputs; seeds must be in two-input form",
                            fanin.len()
                        )));
                    }
                    blocks.push(Block {
                        line: n,
                        fanin: fanin.to_vec(),
                        out: out.clone(),
                        rows: Vec::new(),
                    });
                    in_names = true;
                }
                "end" => break,
                "latch" | "subckt" | "gate" | "mlatch" | "exdc" | "search" => {
                    return Err(Error::Unsupported(format!("BLIF construct .{key}")))
                }
                _ => return Err(err(format!("unknown directive .{key}"))),
            }
        } else if in_names {
            let block = blocks.last_mut().expect("in_names implies a block");
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (plane, out) = match (block.fanin.is_empty(), fields.as_slice()) {
                (true, [o]) => (String::new(), *o),
                (false, [p, o]) => (p.to_string(), *o),
                _ => return Err(err(format!("malformed cover row '{line}'"))),
            };
            let mut chars = out.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => block.rows.push((n, plane, c)),
                _ => return Err(err(format!("output field '{out}' must be one character"))),
            }
        } else {
            return Err(err(format!("cover row outside a .names block: '{line}'")));
        }
    }

    if input_names.is_empty() {
        return Err(Error::malformed("blif", "model declares no inputs"));
    }
    let mut nets: HashMap<&str, SignalRef> = HashMap::new();
    for (j, net) in input_names.iter().enumerate() {
        if nets.insert(net, SignalRef::Input(j)).is_some() {
            return Err(Error::malformed(
                "blif",
                format!("input '{net}' declared twice"),
            ));
        }
    }
    let mut defined: HashMap<&str, usize> = HashMap::new();
    for (i, block) in blocks.iter().enumerate() {
        if nets.contains_key(block.out.as_str()) || defined.insert(&block.out, i).is_some() {
            return Err(Error::parse(
                "blif",
                block.line,
                format!("net '{}' is driven more than once", block.out),
            ));
        }
    }
    for block in &blocks {
        for net in &block.fanin {
            if !nets.contains_key(net.as_str()) && !defined.contains_key(net.as_str()) {
                return Err(Error::parse(
                    "blif",
                    block.line,
                    format!("undefined net '{net}'"),
                ));
            }
        }
    }

    // Kahn's algorithm, taking ready blocks in file order.
    let mut pending: Vec<usize> = blocks
        .iter()
        .map(|b| {
            b.fanin
                .iter()
                .filter(|f| defined.contains_key(f.as_str()))
                .count()
        })
        .collect();
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); blocks.len()];
    for (i, block) in blocks.iter().enumerate() {
        for net in &block.fanin {
            if let Some(&d) = defined.get(net.as_str()) {
                readers[d].push(i);
            }
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..blocks.len()).filter(|&i| pending[i] == 0).collect();
    let mut gates = Vec::with_capacity(blocks.len());
    while let Some(i) = ready.pop_first() {
        let block = &blocks[i];
        let tt = block.table()?;
        let src = |k: usize| {
            block
                .fanin
                .get(k)
                .map_or(SignalRef::Input(0), |f| nets[f.as_str()])
        };
        let (a, b) = match block.fanin.len() {
            2 => (src(0), src(1)),
            _ => (src(0), SignalRef::Input(0)),
        };
        nets.insert(&block.out, SignalRef::Gate(gates.len()));
        gates.push(Gate::new(tt, a, b));
        for &r in &readers[i] {
            pending[r] -= 1;
            if pending[r] == 0 {
                ready.insert(r);
            }
        }
    }
    if gates.len() != blocks.len() {
        let stuck = (0..blocks.len())
            .find(|&i| pending[i] > 0)
            .expect("some block is blocked");
        return Err(Error::parse(
            "blif",
            blocks[stuck].line,
            format!("cyclic definition through '{}'", blocks[stuck].out),
        ));
    }

    let outputs = output_names
        .iter()
        .map(|net| {
            nets.get(net.as_str())
                .copied()
                .ok_or_else(|| Error::malformed("blif", format!("output '{net}' is never driven")))
        })
        .collect::<Result<Vec<_>>>()?;
    let circuit = Circuit::new(input_names.len(), gates, outputs, None)?;
    Ok(BlifModel {
        name,
        input_names,
        output_names,
        circuit,
    })
}

/// Writes `c` as BLIF. Gate nets are named `g<i>`, inputs `x<i>`, outputs
/// `y<j>` and rails `z0`, `z1`.
pub fn write_blif(c: &Circuit, model: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, ".model {model}");
    let ins: Vec<String> = (0..c.inputs).map(|i| format!("x{i}")).collect();
    let _ = writeln!(s, ".inputs {}", ins.join(" "));
    let mut outs: Vec<String> = (0..c.outputs.len()).map(|j| format!("y{j}")).collect();
    if c.rails.is_some() {
        outs.extend(["z0".to_string(), "z1".to_string()]);
    }
    let _ = writeln!(s, ".outputs {}", outs.join(" "));
    for (i, gate) in c.gates.iter().enumerate() {
        let _ = writeln!(s, ".names {} {} g{i}", gate.a, gate.b);
        for k in 0..4 {
            if gate.tt.bit(k) {
                let _ = writeln!(s, "{}{} 1", k >> 1, k & 1);
            }
        }
    }
    for (name, src) in outs.iter().zip(c.sinks()) {
        let _ = writeln!(s, ".names {src} {name}\n1 1");
    }
    s.push_str(".end\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::simulate;

    #[test]
    fn and_block() {
        let m =
            parse_blif(".model t\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n").unwrap();
        assert_eq!(m.name, "t");
        assert_eq!(
            m.circuit.gates,
            vec![Gate::new(
                TruthTable2::AND,
                SignalRef::Input(0),
                SignalRef::Input(1)
            )]
        );
        assert_eq!(m.circuit.outputs, vec![SignalRef::Gate(0)]);
    }

    #[test]
    fn unary_not_embeds_with_dummy_input() {
        let m = parse_blif(".inputs a b\n.outputs y\n.names b y\n0 1\n.end\n").unwrap();
        let g = m.circuit.gates[0];
        assert_eq!(g.tt, TruthTable2::NOT_A);
        assert_eq!(g.tt.bits(), [true, true, false, false]);
        assert_eq!((g.a, g.b), (SignalRef::Input(1), SignalRef::Input(0)));
    }

    #[test]
    fn constants_and_off_set_covers() {
        let m = parse_blif(
            ".inputs a b\n.outputs one zero nand\n.names one\n1\n.names zero\n.names a b nand\n11 0\n.end\n",
        )
        .unwrap();
        let tts: Vec<_> = m.circuit.gates.iter().map(|g| g.tt).collect();
        assert_eq!(
            tts,
            [TruthTable2::ONE, TruthTable2::ZERO, TruthTable2::NAND]
        );
    }

    #[test]
    fn out_of_order_blocks_are_sorted() {
        let text =
            ".inputs a b\n.outputs y\n.names t b y\n1- 1\n-1 1\n.names a b t\n10 1\n01 1\n.end\n";
        let m = parse_blif(text).unwrap();
        assert_eq!(m.circuit.gates[0].tt, TruthTable2::XOR);
        assert_eq!(m.circuit.gates[1].tt, TruthTable2::OR);
        assert_eq!(m.circuit.gates[1].a, SignalRef::Gate(0));
        let resp = simulate(&m.circuit, None).unwrap();
        assert_eq!(resp.output_rows(), vec![vec![false, true, true, true]]);
    }

    #[test]
    fn continuation_lines() {
        let m = parse_blif(".inputs a \\\n b\n.outputs y\n.names a b y\n11 1\n").unwrap();
        assert_eq!(m.input_names, ["a", "b"]);
    }

    #[test]
    fn rejects_bad_netlists() {
        let wide = ".inputs a b c\n.outputs y\n.names a b c y\n111 1\n.end\n";
        assert!(matches!(parse_blif(wide), Err(Error::Parse { .. })));
        let undefined = ".inputs a\n.outputs y\n.names a q y\n11 1\n.end\n";
        assert!(parse_blif(undefined).is_err());
        let cyclic = ".inputs a\n.outputs y\n.names a t y\n11 1\n.names y t\n1 1\n.end\n";
        assert!(parse_blif(cyclic)
            .unwrap_err()
            .to_string()
            .contains("cyclic"));
        let undriven = ".inputs a\n.outputs y\n.end\n";
        assert!(parse_blif(undriven).is_err());
        let latch = ".inputs a\n.outputs y\n.latch a y\n.end\n";
        assert!(matches!(parse_blif(latch), Err(Error::Unsupported(_))));
        let twice = ".inputs a\n.outputs y\n.names a y\n1 1\n.names a y\n0 1\n.end\n";
        assert!(parse_blif(twice).is_err());
    }

    #[test]
    fn write_then_parse_preserves_function() {
        let c = Circuit::new(
            2,
            vec![
                Gate::new(TruthTable2::XOR, SignalRef::Input(0), SignalRef::Input(1)),
                Gate::new(TruthTable2::NAND, SignalRef::Gate(0), SignalRef::Input(1)),
            ],
            vec![SignalRef::Gate(1), SignalRef::Input(0)],
            Some([SignalRef::Gate(0), SignalRef::Gate(1)]),
        )
        .unwrap();
        let m = parse_blif(&write_blif(&c, "t")).unwrap();
        let a = simulate(&c, None).unwrap();
        let b = simulate(&m.circuit, None).unwrap();
        assert_eq!(b.outputs[..2], a.outputs[..]);
        let [z0, z1] = a.rails.unwrap();
        assert_eq!(b.outputs[2..], [z0, z1]);
    }
}
