//! Brute-force TSC verification.
//!
//! Every fault of every live gate (outputs and both inputs, stuck-at 0 and 1)
//! is injected and the circuit is re-evaluated word by word with scalar
//! logic. Nothing here goes through the packed simulator or the fitness
//! shortcuts, so the two can be checked against each other.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::netlist::{Circuit, DuplicationBaseline, Fault, FaultSite, SignalRef};
use crate::sim::FaultScope;
use crate::target::TargetSpec;

/// Self-testing verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StReport {
    pub is_st: bool,
    pub undetected: Vec<Fault>,
}

/// Fault-secureness verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FsReport {
    pub is_fs: bool,
    /// The fault-free circuit signals an error; FS is then reported false.
    pub false_alarm: bool,
    /// `(fault, word)` pairs with incorrect output and no error signal.
    pub violations: Vec<(Fault, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TscReport {
    pub is_tsc: bool,
    pub has_rails: bool,
    /// Applied words on which the fault-free rails collide.
    pub false_alarm_words: Vec<usize>,
    pub st: StReport,
    pub fs: FsReport,
}

impl TscReport {
    pub fn summary(&self) -> String {
        let verdict = |b: bool| if b { "yes" } else { "no" };
        format!(
            "ST: {} ({} undetected faults)\nFS: {} ({} violations{})\nTSC: {}",
            verdict(self.st.is_st),
            self.st.undetected.len(),
            verdict(self.fs.is_fs),
            self.fs.violations.len(),
            if self.fs.false_alarm {
                ", false alarm"
            } else {
                ""
            },
            verdict(self.is_tsc),
        )
    }
}

/// Brute-force counts comparable with the fitness path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckingCounts {
    /// Faults in the full set never signalled.
    pub undetected: usize,
    /// Violations over output faults only.
    pub unsignalled_outputs: usize,
    /// Violations over the full fault set.
    pub unsignalled_all: usize,
}

struct Observation {
    outputs: Vec<bool>,
    rails: Option<(bool, bool)>,
}

impl Observation {
    fn error(&self) -> bool {
        matches!(self.rails, Some((z0, z1)) if z0 == z1)
    }
}

/// Scalar verifier over a chosen set of applied input words.
pub struct Verifier<'a> {
    circuit: &'a Circuit,
    words: Vec<usize>,
    free: Vec<Observation>,
}

impl<'a> Verifier<'a> {
    /// Verifier applying every input word.
    pub fn new(circuit: &'a Circuit) -> Self {
        Self::with_words(circuit, (0..1usize << circuit.inputs).collect())
    }

    /// Verifier applying only the words a target marks as applied.
    pub fn for_target(circuit: &'a Circuit, target: &TargetSpec) -> Self {
        let words = (0..target.words())
            .filter(|&w| target.is_applied(w))
            .collect();
        Self::with_words(circuit, words)
    }

    pub fn with_words(circuit: &'a Circuit, words: Vec<usize>) -> Self {
        let free = words.iter().map(|&w| observe(circuit, w, None)).collect();
        Self {
            circuit,
            words,
            free,
        }
    }

    pub fn words(&self) -> &[usize] {
        &self.words
    }

    fn faults(&self, scope: FaultScope) -> Vec<Fault> {
        let live = self.circuit.live_mask();
        let mut faults = Vec::new();
        for (gate, &is_live) in live.iter().enumerate() {
            if !is_live {
                continue;
            }
            for site in [FaultSite::Output, FaultSite::InputA, FaultSite::InputB] {
                if scope == FaultScope::OutputsOnly && site != FaultSite::Output {
                    continue;
                }
                for stuck in [false, true] {
                    faults.push(Fault { gate, site, stuck });
                }
            }
        }
        faults
    }

    pub fn false_alarm_words(&self) -> Vec<usize> {
        self.words
            .iter()
            .zip(&self.free)
            .filter(|(_, o)| o.error())
            .map(|(&w, _)| w)
            .collect()
    }

    pub fn st(&self) -> StReport {
        let undetected: Vec<Fault> = self
            .faults(FaultScope::All)
            .into_iter()
            .filter(|&f| {
                !self
                    .words
                    .iter()
                    .any(|&w| observe(self.circuit, w, Some(f)).error())
            })
            .collect();
        StReport {
            is_st: undetected.is_empty(),
            undetected,
        }
    }

    pub fn fs(&self, scope: FaultScope) -> FsReport {
        let mut violations = Vec::new();
        for f in self.faults(scope) {
            for (&w, free) in self.words.iter().zip(&self.free) {
                let obs = observe(self.circuit, w, Some(f));
                if obs.outputs != free.outputs && !obs.error() {
                    violations.push((f, w));
                }
            }
        }
        let false_alarm = self.free.iter().any(Observation::error);
        FsReport {
            is_fs: violations.is_empty() && !false_alarm,
            false_alarm,
            violations,
        }
    }

    pub fn tsc(&self) -> TscReport {
        let st = self.st();
        let fs = self.fs(FaultScope::All);
        let false_alarm_words = self.false_alarm_words();
        let has_rails = self.circuit.rails.is_some();
        TscReport {
            is_tsc: has_rails && st.is_st && fs.is_fs && false_alarm_words.is_empty(),
            has_rails,
            false_alarm_words,
            st,
            fs,
        }
    }

    pub fn counts(&self) -> CheckingCounts {
        CheckingCounts {
            undetected: self.st().undetected.len(),
            unsignalled_outputs: self.fs(FaultScope::OutputsOnly).violations.len(),
            unsignalled_all: self.fs(FaultScope::All).violations.len(),
        }
    }

    /// FS over output faults implies FS over all faults.
    pub fn output_fs_suffices(&self) -> bool {
        !self.fs(FaultScope::OutputsOnly).is_fs || self.fs(FaultScope::All).is_fs
    }

    /// Per output: `Some(false)` if it equals the target on every applied
    /// word, `Some(true)` if it equals the complement, `None` otherwise.
    pub fn output_polarity(&self, target: &TargetSpec) -> Vec<Option<bool>> {
        (0..target.num_outputs())
            .map(|j| {
                let same = self
                    .words
                    .iter()
                    .zip(&self.free)
                    .all(|(&w, o)| o.outputs.get(j) == Some(&target.output(j, w)));
                let inverted = self
                    .words
                    .iter()
                    .zip(&self.free)
                    .all(|(&w, o)| o.outputs.get(j) == Some(&!target.output(j, w)));
                if same {
                    Some(false)
                } else if inverted {
                    Some(true)
                } else {
                    None
                }
            })
            .collect()
    }
}

fn observe(c: &Circuit, word: usize, fault: Option<Fault>) -> Observation {
    let mut vals: Vec<bool> = Vec::with_capacity(c.gates.len());
    let read = |s: SignalRef, vals: &[bool]| match s {
        SignalRef::Input(j) => (word >> j) & 1 == 1,
        SignalRef::Gate(i) => vals[i],
    };
    for (i, gate) in c.gates.iter().enumerate() {
        let mut a = read(gate.a, &vals);
        let mut b = read(gate.b, &vals);
        let mut forced = None;
        if let Some(f) = fault.filter(|f| f.gate == i) {
            match f.site {
                FaultSite::Output => forced = Some(f.stuck),
                FaultSite::InputA => a = f.stuck,
                FaultSite::InputB => b = f.stuck,
            }
        }
        vals.push(forced.unwrap_or_else(|| gate.tt.eval(a, b)));
    }
    Observation {
        outputs: c.outputs.iter().map(|&y| read(y, &vals)).collect(),
        rails: c.rails.map(|[z0, z1]| (read(z0, &vals), read(z1, &vals))),
    }
}

pub fn verify_st(c: &Circuit) -> StReport {
    Verifier::new(c).st()
}

pub fn verify_fs(c: &Circuit, scope: FaultScope) -> FsReport {
    Verifier::new(c).fs(scope)
}

pub fn verify_tsc(c: &Circuit) -> TscReport {
    Verifier::new(c).tsc()
}

pub fn check_output_fs_suffices(c: &Circuit) -> bool {
    Verifier::new(c).output_fs_suffices()
}

/// Why a duplication baseline fails self-testing under the seed's codespace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodespaceReport {
    /// Distinct output words the seed produces.
    pub codewords: usize,
    /// `2^q`.
    pub possible_codewords: usize,
    pub is_st: bool,
    /// Undetectable faults inside the checker tree.
    pub checker_faults: Vec<Fault>,
    /// Undetectable faults elsewhere (seed or copy).
    pub other_faults: Vec<Fault>,
}

/// Runs the self-testing check on a duplication baseline and attributes the
/// undetectable faults to the checker tree or the duplicated logic.
pub fn codespace_report(seed: &Circuit, baseline: &DuplicationBaseline) -> CodespaceReport {
    let seed_view = Verifier::new(seed);
    let codewords: BTreeSet<&Vec<bool>> = seed_view.free.iter().map(|o| &o.outputs).collect();
    let st = verify_st(&baseline.circuit);
    let (checker_faults, other_faults) = st
        .undetected
        .iter()
        .partition(|f| baseline.checker_gates.contains(&f.gate));
    CodespaceReport {
        codewords: codewords.len(),
        possible_codewords: 1usize
            .checked_shl(seed.outputs.len() as u32)
            .unwrap_or(usize::MAX),
        is_st: st.is_st,
        checker_faults,
        other_faults,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{build_duplication_baseline, two_rail_checker_circuit, Gate, TruthTable2};
    use SignalRef::{Gate as G, Input as X};

    #[test]
    fn constant_rails_are_not_self_testing() {
        // z0 = x0 AND !x0 = 0, z1 = NOT of that = 1.
        let gates = vec![
            Gate::new(TruthTable2::ZERO, X(0), X(1)),
            Gate::new(TruthTable2::NOT_A, G(0), G(0)),
            Gate::new(TruthTable2::AND, X(0), X(1)),
        ];
        let c = Circuit::new(2, gates, vec![G(2)], Some([G(0), G(1)])).unwrap();
        let st = verify_st(&c);
        assert!(!st.is_st);
        // Output stuck-at-0 on g0 never changes anything.
        assert!(st.undetected.contains(&Fault {
            gate: 0,
            site: FaultSite::Output,
            stuck: false
        }));
    }

    #[test]
    fn identity_duplication_is_st() {
        let seed = Circuit::new(2, vec![], vec![X(0), X(1)], None).unwrap();
        let base = build_duplication_baseline(&seed).unwrap();
        assert_eq!(base.overhead(), 6);
        let report = verify_tsc(&base.circuit);
        assert!(report.st.is_st, "{:?}", report.st.undetected);
        assert!(report.is_tsc);
    }

    #[test]
    fn no_live_gates_is_vacuously_st() {
        let c = Circuit::new(2, vec![], vec![X(0)], Some([X(0), X(1)])).unwrap();
        assert!(verify_st(&c).is_st);
    }

    #[test]
    fn rail_only_fault_cannot_violate() {
        let gates = vec![
            Gate::new(TruthTable2::BUF_A, X(0), X(0)),
            Gate::new(TruthTable2::NOT_A, X(0), X(0)),
        ];
        let c = Circuit::new(1, gates, vec![G(0)], Some([G(1), G(0)])).unwrap();
        let fs = verify_fs(&c, FaultScope::All);
        assert!(fs.violations.iter().all(|(f, _)| f.gate != 1));
    }

    #[test]
    fn unchecked_output_violates_fs() {
        let gates = vec![Gate::new(TruthTable2::BUF_A, X(0), X(0))];
        let c = Circuit::new(1, gates, vec![G(0)], None).unwrap();
        let fs = verify_fs(&c, FaultScope::OutputsOnly);
        assert!(fs.violations.contains(&(
            Fault {
                gate: 0,
                site: FaultSite::Output,
                stuck: false
            },
            1
        )));
        assert!(!verify_tsc(&c).is_tsc);
    }

    #[test]
    fn false_alarm_is_not_tsc() {
        let gates = vec![Gate::new(TruthTable2::BUF_A, X(0), X(0))];
        let c = Circuit::new(1, gates, vec![G(0)], Some([X(0), G(0)])).unwrap();
        let report = verify_tsc(&c);
        assert!(!report.is_tsc);
        assert!(report.fs.false_alarm);
        assert_eq!(report.false_alarm_words, vec![0, 1]);
    }

    #[test]
    fn two_rail_checker_on_codewords_is_tsc() {
        let c = two_rail_checker_circuit();
        // codewords: a0 != a1 and b0 != b1.
        let words: Vec<usize> = (0..16)
            .filter(|w| (w & 1 == 1) != (w & 2 == 2) && (w & 4 == 4) != (w & 8 == 8))
            .collect();
        assert_eq!(words.len(), 4);
        let report = Verifier::with_words(&c, words).tsc();
        assert!(report.is_tsc, "{}", report.summary());
    }

    #[test]
    fn output_fs_suffices_on_duplication() {
        let seed = Circuit::new(
            2,
            vec![Gate::new(TruthTable2::XOR, X(0), X(1))],
            vec![G(0)],
            None,
        )
        .unwrap();
        let base = build_duplication_baseline(&seed).unwrap();
        assert!(check_output_fs_suffices(&base.circuit));
        assert!(verify_fs(&base.circuit, FaultScope::All).is_fs);
    }

    #[test]
    fn full_codespace_has_no_checker_faults() {
        // y0 = x0, y1 = x1: all four codewords occur.
        let seed = Circuit::new(2, vec![], vec![X(0), X(1)], None).unwrap();
        let base = build_duplication_baseline(&seed).unwrap();
        let report = codespace_report(&seed, &base);
        assert_eq!(report.codewords, 4);
        assert!(report.checker_faults.is_empty());
    }

    #[test]
    fn constant_output_starves_checker() {
        // y1 is constant 0.
        let seed = Circuit::new(
            2,
            vec![
                Gate::new(TruthTable2::XOR, X(0), X(1)),
                Gate::new(TruthTable2::ZERO, X(0), X(1)),
            ],
            vec![G(0), G(1)],
            None,
        )
        .unwrap();
        let base = build_duplication_baseline(&seed).unwrap();
        let report = codespace_report(&seed, &base);
        assert_eq!(report.codewords, 2);
        assert!(!report.is_st);
        assert!(!report.checker_faults.is_empty());
    }
}
