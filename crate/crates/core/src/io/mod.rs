//! File formats: PLA targets, BLIF seeds, native JSON circuits, DOT export,
//! key=value run configuration, and run reports.

pub mod blif;
pub mod config;
pub mod dot;
pub mod native;
pub mod pla;
pub mod report;

pub use blif::{parse_blif, write_blif, BlifModel};
pub use config::parse_config;
pub use dot::export_dot;
pub use native::{read_native, write_native};
pub use pla::{parse_pla, render_pla};
pub use report::{RunRecord, RunReport};

/// Splits `text` into logical lines: comments after `#` removed, trailing
/// backslash continuations joined, blank lines dropped. Each line keeps the
/// 1-based number where it started.
pub(crate) fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim_end();
        let (body, continues) = match line.strip_suffix('\\') {
            Some(b) => (b, true),
            None => (line, false),
        };
        let entry = pending.get_or_insert_with(|| (i + 1, String::new()));
        entry.1.push(' ');
        entry.1.push_str(body);
        if !continues {
            let (n, s) = pending.take().expect("just inserted");
            let s = s.trim().to_string();
            if !s.is_empty() {
                out.push((n, s));
            }
        }
    }
    if let Some((n, s)) = pending {
        let s = s.trim().to_string();
        if !s.is_empty() {
            out.push((n, s));
        }
    }
    out
}
