//! Evolutionary synthesis of totally self-checking (TSC) combinational
//! circuits built from arbitrary two-input gates.
//!
//! The pieces:
//!
//! * [`netlist`]: circuits, faults, and reference constructions (two-rail
//!   checkers, duplication with comparison);
//! * [`genome`]: the bit-string encoding and genetic operators;
//! * [`sim`]: exhaustive bit-parallel fault simulation;
//! * [`fitness`]: the lexicographic `(f_f, f_ST, f_FS, f_p)` fitness vector;
//! * [`verify`]: an independent brute-force TSC checker;
//! * [`evolve`]: the island-model genetic algorithm;
//! * [`io`]: PLA, BLIF, JSON and DOT formats plus run reports.

pub mod benchmarks;
pub mod error;
pub mod evolve;
pub mod fitness;
pub mod genome;
pub mod io;
pub mod netlist;
pub mod seeding;
pub mod sim;
pub mod target;
pub mod verify;

pub use error::{Error, Result};
pub use fitness::{Evaluator, FitnessVector};
pub use genome::{GenomeLayout, Genotype, LockMask, SeedMode};
pub use netlist::{Circuit, Fault, FaultSite, Gate, SignalRef, TruthTable2};
pub use sim::{FaultScope, ResponseMatrix};
pub use target::TargetSpec;
