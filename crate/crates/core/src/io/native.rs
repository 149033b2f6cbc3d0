//! Canonical JSON circuits:
//! `{"r": 2, "gates": [{"tt": "0110", "a": "x0", "b": "x1"}], "y": ["g0"], "z": []}`.
//!
//! `tt` lists `t0..t3`, where `t_k` is the output for `a = k >> 1`,
//! `b = k & 1`. `z` is empty or holds the two error rails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{Circuit, Gate, SignalRef, TruthTable2};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeGate {
    tt: String,
    a: String,
    b: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeCircuit {
    r: usize,
    gates: Vec<NativeGate>,
    y: Vec<String>,
    z: Vec<String>,
}

pub fn write_native(c: &Circuit) -> String {
    let doc = NativeCircuit {
        r: c.inputs,
        gates: c
            .gates
            .iter()
            .map(|g| NativeGate {
                tt: g.tt.to_string(),
                a: g.a.to_string(),
                b: g.b.to_string(),
            })
            .collect(),
        y: c.outputs.iter().map(ToString::to_string).collect(),
        z: c.rails.iter().flatten().map(ToString::to_string).collect(),
    };
    serde_json::to_string(&doc).expect("plain data always serializes")
}

pub fn read_native(text: &str) -> Result<Circuit> {
    let doc: NativeCircuit = serde_json::from_str(text)?;
    let bad = |msg: String| Error::malformed("native circuit", msg);
    let n = doc.gates.len();
    let resolve = |s: &str, before: usize, what: &str| -> Result<SignalRef> {
        let sig: SignalRef = s.parse().map_err(|e| bad(format!("{what}: {e}")))?;
        match sig {
            SignalRef::Input(i) if i >= doc.r => Err(bad(format!(
                "{what} reads dangling input {s} (r = {})",
                doc.r
            ))),
            SignalRef::Gate(i) if i >= n => Err(bad(format!("{what} reads dangling gate {s}"))),
            SignalRef::Gate(i) if i >= before => {
                Err(bad(format!("{what} reads {s}, out of topological order")))
            }
            _ => Ok(sig),
        }
    };
    let gates = doc
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let what = format!("gate g{i}");
            let tt: TruthTable2 = g.tt.parse().map_err(|e| bad(format!("{what}: {e}")))?;
            Ok(Gate::new(
                tt,
                resolve(&g.a, i, &what)?,
                resolve(&g.b, i, &what)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let outputs = doc
        .y
        .iter()
        .enumerate()
        .map(|(j, s)| resolve(s, n, &format!("output y{j}")))
        .collect::<Result<Vec<_>>>()?;
    let rails = match doc.z.as_slice() {
        [] => None,
        [z0, z1] => Some([resolve(z0, n, "rail z0")?, resolve(z1, n, "rail z1")?]),
        other => {
            return Err(bad(format!(
                "\"z\" must hold 0 or 2 rails, found {}",
                other.len()
            )))
        }
    };
    Circuit::new(doc.r, gates, outputs, rails)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SignalRef::{Gate as G, Input as X};

    #[test]
    fn xor_document() {
        let c = Circuit::new(
            2,
            vec![Gate::new(TruthTable2::XOR, X(0), X(1))],
            vec![G(0)],
            None,
        )
        .unwrap();
        let text = write_native(&c);
        assert_eq!(
            text,
            r#"{"r":2,"gates":[{"tt":"0110","a":"x0","b":"x1"}],"y":["g0"],"z":[]}"#
        );
        assert_eq!(read_native(&text).unwrap(), c);
    }

    #[test]
    fn rails_round_trip() {
        let c = Circuit::new(
            3,
            vec![
                Gate::new(TruthTable2::AND, X(0), X(2)),
                Gate::new(TruthTable2::NOR, G(0), X(1)),
            ],
            vec![G(1), X(2)],
            Some([G(0), G(1)]),
        )
        .unwrap();
        assert_eq!(read_native(&write_native(&c)).unwrap(), c);
    }

    #[test]
    fn rejects_bad_documents() {
        let one_rail = r#"{"r":1,"gates":[],"y":["x0"],"z":["x0"]}"#;
        assert!(read_native(one_rail)
            .unwrap_err()
            .to_string()
            .contains("0 or 2"));
        let dangling = r#"{"r":1,"gates":[{"tt":"0001","a":"x0","b":"x3"}],"y":["g0"],"z":[]}"#;
        assert!(read_native(dangling)
            .unwrap_err()
            .to_string()
            .contains("dangling"));
        let forward = r#"{"r":1,"gates":[{"tt":"0001","a":"g1","b":"x0"},{"tt":"0001","a":"x0","b":"x0"}],"y":["g0"],"z":[]}"#;
        assert!(read_native(forward)
            .unwrap_err()
            .to_string()
            .contains("topological"));
        let bad_tt = r#"{"r":1,"gates":[{"tt":"012","a":"x0","b":"x0"}],"y":[],"z":[]}"#;
        assert!(read_native(bad_tt).is_err());
        assert!(read_native("{").is_err());
    }
}
