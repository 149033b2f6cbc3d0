//! Shared fixtures for the benchmarks.

use tscgen::benchmarks;
use tscgen::netlist::build_duplication_baseline;
use tscgen::{Circuit, TargetSpec};

/// A benchmark's duplication baseline and its target function.
pub fn duplicated(name: &str) -> (Circuit, TargetSpec) {
    let b = benchmarks::get(name).expect("bundled benchmark");
    let seed = b.seed().expect("bundled netlist parses").circuit;
    let base = build_duplication_baseline(&seed).expect("seed has outputs");
    (base.circuit, b.target().expect("bundled table parses"))
}
