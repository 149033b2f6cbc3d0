//! The four-objective fitness vector and its lexicographic order.
//!
//! * `f_f`: mean absolute correlation between each function output and its
//!   target response (inverted outputs score 1);
//! * `f_ST = 1 / (1 + 25 u_f)`, with `u_f` the faults never signalled;
//! * `f_FS = 1 / (1 + 200 u_i)`, with `u_i` the (output fault, word) pairs
//!   giving incorrect output with no error signal;
//! * `f_p = (M - s) / M`, with `s` the live gate count.
//!
//! `f_ST` and `f_FS` are zero if the fault-free circuit ever signals an error.
//!
//! Only gate output faults are simulated. Input faults are accounted for by
//! manifestation: an input stuck-at either leaves its gate's output alone or
//! inverts it, and in the latter case the circuit is in exactly the state of
//! the matching output fault.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::netlist::{Circuit, Fault, FaultSite, Pin, SignalRef};
use crate::sim::{popcount, Simulator};
use crate::target::TargetSpec;

pub const K_ST: f64 = 25.0;
pub const K_FS: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    /// `f_f`
    pub function: f64,
    /// `f_ST`
    pub self_testing: f64,
    /// `f_FS`
    pub fault_secure: f64,
    /// `f_p`
    pub parsimony: f64,
    /// `u_f`
    pub undetected: usize,
    /// `u_i`
    pub unsignalled: usize,
    /// Live gates, `s`.
    pub size: usize,
}

impl FitnessVector {
    pub fn objectives(&self) -> [f64; 4] {
        [
            self.function,
            self.self_testing,
            self.fault_secure,
            self.parsimony,
        ]
    }

    /// Dictionary order on `(f_f, f_ST, f_FS, f_p)`; greater is fitter.
    pub fn compare_lex(&self, other: &Self) -> Ordering {
        compare_lex(self, other)
    }

    /// `f_f = f_ST = f_FS = 1`: correct function, and TSC.
    pub fn is_perfect(&self) -> bool {
        self.function == 1.0 && self.self_testing == 1.0 && self.fault_secure == 1.0
    }
}

pub fn compare_lex(a: &FitnessVector, b: &FitnessVector) -> Ordering {
    a.objectives()
        .iter()
        .zip(b.objectives().iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

pub fn self_testing_score(undetected: usize) -> f64 {
    1.0 / (1.0 + undetected as f64 * K_ST)
}

pub fn fault_secure_score(unsignalled: usize) -> f64 {
    1.0 / (1.0 + unsignalled as f64 * K_FS)
}

/// `|corr(actual, target)|` over the words in `mask`. Zero when either
/// sequence is constant.
pub fn correlation_term(actual: &[u64], target: &[u64], mask: &[u64]) -> f64 {
    let (mut n, mut sx, mut sy, mut sxy) = (0i128, 0i128, 0i128, 0i128);
    for ((&x, &y), &m) in actual.iter().zip(target).zip(mask) {
        n += m.count_ones() as i128;
        sx += (x & m).count_ones() as i128;
        sy += (y & m).count_ones() as i128;
        sxy += (x & y & m).count_ones() as i128;
    }
    let vx = n * sx - sx * sx;
    let vy = n * sy - sy * sy;
    if vx == 0 || vy == 0 {
        return 0.0;
    }
    let num = n * sxy - sx * sy;
    if num * num == vx * vy {
        return 1.0;
    }
    num.unsigned_abs() as f64 / ((vx as f64) * (vy as f64)).sqrt()
}

/// `f_f`: mean over function outputs of the absolute correlation with the target.
pub fn f_function(outputs: &[Vec<u64>], target: &TargetSpec) -> f64 {
    let q = target.num_outputs();
    if q == 0 {
        return 1.0;
    }
    let mask = target.applied_mask();
    let sum: f64 = outputs
        .iter()
        .zip(&target.outputs)
        .map(|(a, t)| correlation_term(a, t, &mask))
        .sum();
    sum / q as f64
}

/// `f_p = (M - s) / M`, clamped at zero.
pub fn f_parsimony(c: &Circuit, max_gates: usize) -> f64 {
    if max_gates == 0 {
        return 0.0;
    }
    let s = c.live_count().min(max_gates);
    (max_gates - s) as f64 / max_gates as f64
}

/// Outcome of [`evaluate_checking`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckingScore {
    /// Faults (outputs and inputs of live gates) never signalled.
    pub undetected: usize,
    /// Output-fault/word pairs with incorrect output and no error signal.
    pub unsignalled: usize,
    /// The fault-free circuit signals an error on some applied word.
    pub false_alarm: bool,
    pub self_testing: f64,
    pub fault_secure: f64,
}

/// Computes `u_f`, `u_i`, `f_ST` and `f_FS` over the words in `mask`.
pub fn evaluate_checking(c: &Circuit, mask: &[u64]) -> CheckingScore {
    let sim = Simulator::new(c.inputs);
    let mut free = Vec::new();
    sim.run(c, &mut free);
    checking_score(&sim, c, &free, mask)
}

fn error_into(sim: &Simulator, c: &Circuit, vals: &[u64], mask: &[u64], out: &mut [u64]) {
    match c.rails {
        Some([z0, z1]) => {
            let a = sim.signal(vals, z0);
            let b = sim.signal(vals, z1);
            for k in 0..out.len() {
                out[k] = !(a[k] ^ b[k]) & mask[k];
            }
        }
        None => out.fill(0),
    }
}

pub(crate) fn checking_score(
    sim: &Simulator,
    c: &Circuit,
    free: &[u64],
    mask: &[u64],
) -> CheckingScore {
    let nb = sim.blocks();
    let mut free_err = vec![0u64; nb];
    error_into(sim, c, free, mask, &mut free_err);
    let false_alarm = free_err.iter().any(|&e| e != 0);

    let mut faulty = Vec::with_capacity(free.len());
    let mut err = [vec![0u64; nb], vec![0u64; nb]];
    let mut undetected = 0;
    let mut unsignalled = 0;

    let live = c.live_mask();
    for (g, gate) in c.gates.iter().enumerate() {
        if !live[g] {
            continue;
        }
        for (d, err_d) in err.iter_mut().enumerate() {
            let fault = Fault {
                gate: g,
                site: FaultSite::Output,
                stuck: d == 1,
            };
            sim.run_faulty(c, free, fault, &mut faulty);
            error_into(sim, c, &faulty, mask, err_d);
            if err_d.iter().all(|&e| e == 0) {
                undetected += 1;
            }
            for k in 0..nb {
                let mut incorrect = 0u64;
                for &y in &c.outputs {
                    if let SignalRef::Gate(i) = y {
                        if i >= g {
                            let o = sim.offset(y) + k;
                            incorrect |= faulty[o] ^ free[o];
                        }
                    }
                }
                unsignalled += (incorrect & mask[k] & !err_d[k]).count_ones() as usize;
            }
        }

        // Input faults: detected where they flip the gate output and that
        // output fault is signalled, or where they are inert and the
        // fault-free circuit already signals.
        let out = sim.signal(free, SignalRef::Gate(g));
        let a = sim.signal(free, gate.a);
        let b = sim.signal(free, gate.b);
        for pin in [Pin::A, Pin::B] {
            for stuck in [false, true] {
                let fill = if stuck { !0u64 } else { 0 };
                let detected = (0..nb).any(|k| {
                    let forced = match pin {
                        Pin::A => gate.tt.eval_packed(fill, b[k]),
                        Pin::B => gate.tt.eval_packed(a[k], fill),
                    };
                    let flip = (forced ^ out[k]) & mask[k];
                    let flipped_err = (forced & err[1][k]) | (!forced & err[0][k]);
                    (flip & flipped_err) | (!flip & free_err[k]) != 0
                });
                if !detected {
                    undetected += 1;
                }
            }
        }
    }

    let (self_testing, fault_secure) = if false_alarm {
        (0.0, 0.0)
    } else {
        (
            self_testing_score(undetected),
            fault_secure_score(unsignalled),
        )
    };
    CheckingScore {
        undetected,
        unsignalled,
        false_alarm,
        self_testing,
        fault_secure,
    }
}

/// Scores circuits against a fixed target and gate budget.
#[derive(Clone, Debug)]
pub struct Evaluator {
    target: TargetSpec,
    mask: Vec<u64>,
    max_gates: usize,
    sim: Simulator,
}

impl Evaluator {
    pub fn new(target: TargetSpec, max_gates: usize) -> Self {
        let mask = target.applied_mask();
        let sim = Simulator::new(target.inputs);
        Self {
            target,
            mask,
            max_gates,
            sim,
        }
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn max_gates(&self) -> usize {
        self.max_gates
    }

    pub fn evaluate(&self, c: &Circuit) -> FitnessVector {
        let mut free = Vec::new();
        self.sim.run(c, &mut free);
        let outputs: Vec<Vec<u64>> = c
            .outputs
            .iter()
            .map(|&y| self.sim.signal(&free, y).to_vec())
            .collect();
        let function = f_function(&outputs, &self.target);
        let checking = checking_score(&self.sim, c, &free, &self.mask);
        let size = c.live_count();
        FitnessVector {
            function,
            self_testing: checking.self_testing,
            fault_secure: checking.fault_secure,
            parsimony: f_parsimony(c, self.max_gates),
            undetected: checking.undetected,
            unsignalled: checking.unsignalled,
            size,
        }
    }
}

/// Number of applied words.
pub fn applied_words(mask: &[u64]) -> usize {
    popcount(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{build_duplication_baseline, Gate, TruthTable2};
    use crate::sim::full_mask;
    use SignalRef::{Gate as G, Input as X};

    fn fv(f: [f64; 4]) -> FitnessVector {
        FitnessVector {
            function: f[0],
            self_testing: f[1],
            fault_secure: f[2],
            parsimony: f[3],
            undetected: 0,
            unsignalled: 0,
            size: 0,
        }
    }

    fn pearson_oracle(x: &[bool], y: &[bool]) -> f64 {
        let n = x.len() as f64;
        let xf: Vec<f64> = x.iter().map(|&b| b as u8 as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
        let mx = xf.iter().sum::<f64>() / n;
        let my = yf.iter().sum::<f64>() / n;
        let cov: f64 = xf.iter().zip(&yf).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = xf.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = yf.iter().map(|b| (b - my).powi(2)).sum();
        if vx == 0.0 || vy == 0.0 {
            0.0
        } else {
            (cov / (vx * vy).sqrt()).abs()
        }
    }

    #[test]
    fn correlation_matches_direct_formula() {
        use rand::Rng;
        let mut rng = crate::seeding::stream(11, 0);
        for r in 1..8 {
            let words = 1 << r;
            for _ in 0..20 {
                let x: Vec<bool> = (0..words).map(|_| rng.gen()).collect();
                let y: Vec<bool> = (0..words).map(|_| rng.gen()).collect();
                let t = TargetSpec::from_rows(r, &[x.clone(), y.clone()]).unwrap();
                let got = correlation_term(&t.outputs[0], &t.outputs[1], &full_mask(r));
                assert!((got - pearson_oracle(&x, &y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn f_function_examples() {
        let t = TargetSpec::from_rows(
            2,
            &[
                vec![false, true, true, false],
                vec![false, false, false, true],
            ],
        )
        .unwrap();
        let exact = t.outputs.clone();
        assert_eq!(f_function(&exact, &t), 1.0);
        let inverted = vec![vec![!exact[0][0] & 0xf], exact[1].clone()];
        assert_eq!(f_function(&inverted, &t), 1.0);
        let constant = vec![exact[0].clone(), vec![0]];
        assert_eq!(f_function(&constant, &t), 0.5);
    }

    #[test]
    fn score_formulas() {
        assert_eq!(self_testing_score(0), 1.0);
        assert_eq!(self_testing_score(1), 1.0 / 26.0);
        assert_eq!(fault_secure_score(1), 1.0 / 201.0);
        assert!((self_testing_score(1) - 0.03846).abs() < 1e-5);
        assert!((fault_secure_score(1) - 0.004975).abs() < 1e-6);
        for u in 0..50 {
            assert!(self_testing_score(u + 1) < self_testing_score(u));
            assert!(fault_secure_score(u + 1) < fault_secure_score(u));
        }
    }

    #[test]
    fn parsimony_examples() {
        let empty = Circuit::new(2, vec![], vec![X(0)], None).unwrap();
        assert_eq!(f_parsimony(&empty, 60), 1.0);
        let mut gates = vec![Gate::new(TruthTable2::AND, X(0), X(1))];
        for i in 1..28 {
            gates.push(Gate::new(TruthTable2::XOR, G(i - 1), X(0)));
        }
        let c = Circuit::new(2, gates, vec![G(27)], None).unwrap();
        assert!((f_parsimony(&c, 60) - 32.0 / 60.0).abs() < 1e-12);
        assert_eq!(f_parsimony(&c, 28), 0.0);
    }

    #[test]
    fn lexicographic_order() {
        assert_eq!(
            compare_lex(&fv([1.0, 0.5, 1.0, 0.9]), &fv([0.99, 1.0, 1.0, 1.0])),
            Ordering::Greater
        );
        assert_eq!(
            compare_lex(&fv([1.0, 1.0, 1.0, 0.3]), &fv([1.0, 1.0, 1.0, 0.4])),
            Ordering::Less
        );
        assert_eq!(
            compare_lex(&fv([1.0, 1.0, 0.2, 0.3]), &fv([1.0, 1.0, 0.2, 0.3])),
            Ordering::Equal
        );
    }

    #[test]
    fn false_alarm_zeroes_checking() {
        // rails both read x0: always equal.
        let gates = vec![Gate::new(TruthTable2::AND, X(0), X(1))];
        let c = Circuit::new(2, gates, vec![G(0)], Some([X(0), X(0)])).unwrap();
        let s = evaluate_checking(&c, &full_mask(2));
        assert!(s.false_alarm);
        assert_eq!((s.self_testing, s.fault_secure), (0.0, 0.0));
    }

    #[test]
    fn manifestation_of_and_input_fault() {
        // At word a=0,b=1 an AND with input a stuck-at-1 outputs 1 instead of 0.
        let and = TruthTable2::AND;
        assert_ne!(and.eval(true, true), and.eval(false, true));
        assert!(and.eval(true, true));
        // At word a=0,b=0 it does not manifest.
        assert_eq!(and.eval(true, false), and.eval(false, false));
    }

    #[test]
    fn duplication_of_xor_scores_perfectly() {
        let seed = Circuit::new(
            2,
            vec![Gate::new(TruthTable2::XOR, X(0), X(1))],
            vec![G(0)],
            None,
        )
        .unwrap();
        let base = build_duplication_baseline(&seed).unwrap();
        let eval = Evaluator::new(TargetSpec::from_circuit(&seed), 10);
        let f = eval.evaluate(&base.circuit);
        assert_eq!(f.function, 1.0);
        assert_eq!(f.unsignalled, 0);
        assert_eq!(f.undetected, 0);
        assert!(f.is_perfect());
        assert_eq!(f.size, 2);
        assert_eq!(f.parsimony, 0.8);
    }

    #[test]
    fn unchecked_seed_has_violations() {
        let seed = Circuit::new(
            2,
            vec![Gate::new(TruthTable2::BUF_A, X(0), X(0))],
            vec![G(0)],
            Some([X(0), X(1)]),
        )
        .unwrap();
        let s = evaluate_checking(&seed, &full_mask(2));
        // z0 = x0, z1 = x1 collide on words 0 and 3.
        assert!(s.false_alarm);
        let plain = Circuit {
            rails: None,
            ..seed
        };
        let s = evaluate_checking(&plain, &full_mask(2));
        assert!(!s.false_alarm);
        // Output stuck-0 is wrong on x0=1 (2 words), stuck-1 on x0=0 (2 words).
        assert_eq!(s.unsignalled, 4);
        assert_eq!(s.undetected, 6);
    }
}
