//! Espresso-style PLA truth tables.
//!
//! Input columns are written `x_0` first. Only completely specified tables
//! are supported: words covered by no cube are 0 and don't-care outputs are
//! rejected.

use std::fmt::Write;

use super::logical_lines;
use crate::error::{Error, Result};
use crate::sim::{block_count, set_bit, word_count};
use crate::target::TargetSpec;

/// Largest input count a PLA may declare.
pub const MAX_INPUTS: usize = 20;

pub fn parse_pla(text: &str) -> Result<TargetSpec> {
    let err = |line: usize, msg: String| Error::parse("pla", line, msg);
    let mut inputs: Option<usize> = None;
    let mut outputs: Option<usize> = None;
    let mut input_names: Option<Vec<String>> = None;
    let mut output_names: Option<Vec<String>> = None;
    let mut cubes: Vec<(usize, String)> = Vec::new();

    for (n, line) in logical_lines(text) {
        if let Some(directive) = line.strip_prefix('.') {
            let mut parts = directive.split_whitespace();
            let key = parts.next().unwrap_or("");
            let args: Vec<&str> = parts.collect();
            let count = |args: &[&str]| -> Result<usize> {
                match args {
                    [v] => v.parse().map_err(|_| err(n, format!("bad count '{v}'"))),
                    _ => Err(err(n, format!(".{key} takes one number"))),
                }
            };
            match key {
                "i" => inputs = Some(count(&args)?),
                "o" => outputs = Some(count(&args)?),
                "p" => {
                    count(&args)?;
                }
                "ilb" => input_names = Some(args.iter().map(|s| s.to_string()).collect()),
                "ob" => output_names = Some(args.iter().map(|s| s.to_string()).collect()),
                "type" => match args.as_slice() {
                    ["f"] | ["fr"] => {}
                    _ => {
                        return Err(err(
                            n,
                            format!(".type {} would need don't-care outputs", args.join(" ")),
                        ))
                    }
                },
                "e" | "end" => break,
                _ => return Err(err(n, format!("unsupported directive .{key}"))),
            }
        } else {
            cubes.push((n, line));
        }
    }

    let r = inputs.ok_or_else(|| Error::malformed("pla", "missing .i"))?;
    let q = outputs.ok_or_else(|| Error::malformed("pla", "missing .o"))?;
    if r > MAX_INPUTS {
        return Err(Error::malformed(
            "pla",
            format!("{r} inputs exceeds the limit of {MAX_INPUTS}"),
        ));
    }
    let mut table = vec![vec![0u64; block_count(r)]; q];
    for (n, cube) in cubes {
        let row: String = cube.split_whitespace().collect();
        if row.chars().count() != r + q {
            return Err(err(
                n,
                format!(
                    "row '{cube}' has {} columns, expected {}",
                    row.chars().count(),
                    r + q
                ),
            ));
        }
        let chars: Vec<char> = row.chars().collect();
        let (ins, outs) = chars.split_at(r);
        let mut care = 0usize;
        let mut value = 0usize;
        let mut free = Vec::new();
        for (j, &c) in ins.iter().enumerate() {
            match c {
                '0' => care |= 1 << j,
                '1' => {
                    care |= 1 << j;
                    value |= 1 << j;
                }
                '-' => free.push(j),
                _ => return Err(err(n, format!("input character '{c}' not in {{0,1,-}}"))),
            }
        }
        let mut asserted = Vec::new();
        for (k, &c) in outs.iter().enumerate() {
            match c {
                '1' => asserted.push(k),
                '0' | '~' => {}
                '-' | '2' => return Err(err(n, "don't-care outputs are not supported".into())),
                _ => return Err(err(n, format!("output character '{c}' not in {{0,1,~}}"))),
            }
        }
        debug_assert_eq!(care & value, value);
        for sub in 0..1usize << free.len() {
            let mut w = value;
            for (t, &j) in free.iter().enumerate() {
                if sub >> t & 1 == 1 {
                    w |= 1 << j;
                }
            }
            for &k in &asserted {
                set_bit(&mut table[k], w, true);
            }
        }
    }

    let mut target = TargetSpec::from_packed(r, table);
    if let Some(names) = input_names {
        if names.len() != r {
            return Err(Error::malformed(
                "pla",
                format!(".ilb names {} inputs, expected {r}", names.len()),
            ));
        }
        target.input_names = names;
    }
    if let Some(names) = output_names {
        if names.len() != q {
            return Err(Error::malformed(
                "pla",
                format!(".ob names {} outputs, expected {q}", names.len()),
            ));
        }
        target.output_names = names;
    }
    Ok(target)
}

/// One minterm row per word with at least one asserted output.
pub fn render_pla(target: &TargetSpec) -> String {
    let r = target.inputs;
    let q = target.num_outputs();
    let rows: Vec<usize> = (0..word_count(r))
        .filter(|&w| (0..q).any(|j| target.output(j, w)))
        .collect();
    let mut s = String::new();
    let _ = writeln!(s, ".i {r}");
    let _ = writeln!(s, ".o {q}");
    let _ = writeln!(s, ".ilb {}", target.input_names.join(" "));
    let _ = writeln!(s, ".ob {}", target.output_names.join(" "));
    let _ = writeln!(s, ".p {}", rows.len());
    for w in rows {
        let ins: String = (0..r)
            .map(|j| if w >> j & 1 == 1 { '1' } else { '0' })
            .collect();
        let outs: String = (0..q)
            .map(|k| if target.output(k, w) { '1' } else { '0' })
            .collect();
        let _ = writeln!(s, "{ins} {outs}");
    }
    s.push_str(".e\n");
    s
}
