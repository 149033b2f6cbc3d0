//! Island-model genetic algorithm.
//!
//! Each island evolves a fixed-size population by rank selection, elitism,
//! single-point crossover, and three kinds of mutation. Islands sit on a
//! square spiral and exchange occasional migrants, preferring near
//! neighbours.

mod grid;
mod migrant;

use std::cmp::Ordering;
use std::time::Duration;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{compare_lex, Evaluator, FitnessVector};
use crate::genome::{
    crossover_single_point, mutate_bit, mutate_routing, mutate_translocate, GenomeLayout, Genotype,
    LockMask, SeedMode,
};
use crate::netlist::Circuit;

pub use grid::{
    run, run_with_observer, Grid, HistoryPoint, Progress, RunConfig, RunResult, StopReason,
};
pub use migrant::{read_migrants, write_migrant, CheckpointRecord, MigrantMsg, WireLayout};

/// How each new generation is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffspringMix {
    pub elites: usize,
    pub crossover: usize,
    pub bit_mutants: usize,
    pub translocations: usize,
    pub routing_mutants: usize,
}

impl Default for OffspringMix {
    fn default() -> Self {
        Self {
            elites: 2,
            crossover: 6,
            bit_mutants: 16,
            translocations: 2,
            routing_mutants: 6,
        }
    }
}

impl OffspringMix {
    pub fn total(&self) -> usize {
        self.elites + self.crossover + self.bit_mutants + self.translocations + self.routing_mutants
    }
}

/// Limits on a run. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_evaluations: Option<u64>,
    pub wall_clock: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IslandConfig {
    pub population_size: usize,
    pub mix: OffspringMix,
    /// Probability that an island emits a migrant after a generation.
    pub migration_rate: f64,
    pub rng_seed: u64,
    pub layout: GenomeLayout,
    pub mode: SeedMode,
    pub budget: Budget,
}

impl IslandConfig {
    pub fn new(layout: GenomeLayout) -> Self {
        Self {
            population_size: 32,
            mix: OffspringMix::default(),
            migration_rate: 0.1,
            rng_seed: 0,
            layout,
            mode: SeedMode::Unconstrained,
            budget: Budget::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mix.total() != self.population_size {
            return Err(Error::Config(format!(
                "offspring mix sums to {}, population size is {}",
                self.mix.total(),
                self.population_size
            )));
        }
        if self.population_size == 0 || self.mix.elites == 0 {
            return Err(Error::Config("population needs at least one elite".into()));
        }
        if !(0.0..=1.0).contains(&self.migration_rate) {
            return Err(Error::Config(format!(
                "migration rate {} outside [0, 1]",
                self.migration_rate
            )));
        }
        Ok(())
    }
}

/// An evaluated genotype with its decoded circuit.
#[derive(Clone, Debug)]
pub struct Individual {
    pub genotype: Genotype,
    pub circuit: Circuit,
    pub fitness: FitnessVector,
}

impl Individual {
    pub fn evaluate(genotype: Genotype, evaluator: &Evaluator) -> Self {
        let circuit = genotype.decode_canonical();
        let fitness = evaluator.evaluate(&circuit);
        Self {
            genotype,
            circuit,
            fitness,
        }
    }
}

/// Sorts fittest first. The sort is stable, so among equals earlier entries
/// stay ahead.
pub fn sort_population(pop: &mut [Individual]) {
    pop.sort_by(|a, b| compare_lex(&b.fitness, &a.fitness));
}

/// Rank-proportional choice: rank `i` of `n` (0 = best) has weight
/// `(n - 1) - i`. A population of one always yields its only member.
pub fn select_parent<'a, R: Rng + ?Sized>(
    sorted: &'a [Individual],
    rng: &mut R,
) -> Result<&'a Individual> {
    Ok(&sorted[select_rank(sorted.len(), rng)?])
}

/// Rank drawn by [`select_parent`] for a population of `n`.
pub fn select_rank<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<usize> {
    if n == 0 {
        return Err(Error::EmptyPopulation);
    }
    if n == 1 {
        return Ok(0);
    }
    let total = n * (n - 1) / 2;
    let mut ticket = rng.gen_range(0..total);
    for i in 0..n {
        let w = n - 1 - i;
        if ticket < w {
            return Ok(i);
        }
        ticket -= w;
    }
    unreachable!("ticket below total weight")
}

/// A bred genotype with the population ranks of its parents.
#[derive(Clone, Debug)]
pub struct Offspring {
    pub genotype: Genotype,
    pub parents: [usize; 2],
}

/// The non-elite offspring, in slot order.
pub fn breed<R: Rng + ?Sized>(
    sorted: &[Individual],
    mix: &OffspringMix,
    lock: &LockMask,
    rng: &mut R,
) -> Result<Vec<Offspring>> {
    let mut children = Vec::with_capacity(mix.total() - mix.elites);
    for _ in 0..mix.crossover {
        let a = select_rank(sorted.len(), rng)?;
        let b = select_rank(sorted.len(), rng)?;
        let genotype = crossover_single_point(&sorted[a].genotype, &sorted[b].genotype, rng)?;
        children.push(Offspring {
            genotype,
            parents: [a, b],
        });
    }
    type Op<R> = fn(&Genotype, &LockMask, &mut R) -> Result<Genotype>;
    let ops: [(usize, Op<R>); 3] = [
        (mix.bit_mutants, mutate_bit),
        (mix.translocations, mutate_translocate),
        (mix.routing_mutants, mutate_routing),
    ];
    for (count, op) in ops {
        for _ in 0..count {
            let p = select_rank(sorted.len(), rng)?;
            let parent = &sorted[p].genotype;
            let genotype = match op(parent, lock, rng) {
                Err(Error::AllLocked(_)) => mutate_bit(parent, lock, rng)?,
                other => other?,
            };
            children.push(Offspring {
                genotype,
                parents: [p, p],
            });
        }
    }
    Ok(children)
}

/// Evaluates genotypes, committing results in input order.
pub fn evaluate_all(
    genotypes: Vec<Genotype>,
    evaluator: &Evaluator,
    parallel: bool,
) -> Vec<Individual> {
    if parallel {
        genotypes
            .into_par_iter()
            .map(|g| Individual::evaluate(g, evaluator))
            .collect()
    } else {
        genotypes
            .into_iter()
            .map(|g| Individual::evaluate(g, evaluator))
            .collect()
    }
}

/// Evaluates offspring. A child that decodes to the same circuit as one of
/// its parents inherits that parent's fitness, which is identical by
/// construction.
fn evaluate_offspring(
    children: Vec<Offspring>,
    sorted: &[Individual],
    evaluator: &Evaluator,
    parallel: bool,
) -> Vec<Individual> {
    let eval = |o: Offspring| {
        let circuit = o.genotype.decode_canonical();
        let inherited = o
            .parents
            .iter()
            .map(|&p| &sorted[p])
            .find(|p| p.circuit == circuit)
            .map(|p| p.fitness);
        let fitness = inherited.unwrap_or_else(|| evaluator.evaluate(&circuit));
        Individual {
            genotype: o.genotype,
            circuit,
            fitness,
        }
    };
    if parallel {
        children.into_par_iter().map(eval).collect()
    } else {
        children.into_iter().map(eval).collect()
    }
}

/// One generation: elites copied unchanged, the rest bred from parents
/// chosen by [`select_parent`]. The result is sorted. Offspring are placed
/// ahead of the elites before the stable sort, so a child that ties an
/// elite displaces it and neutral variation can drift.
pub fn step_generation<R: Rng + ?Sized>(
    sorted: &[Individual],
    mix: &OffspringMix,
    lock: &LockMask,
    evaluator: &Evaluator,
    parallel: bool,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let children = breed(sorted, mix, lock, rng)?;
    let mut next = evaluate_offspring(children, sorted, evaluator, parallel);
    next.extend(sorted.iter().take(mix.elites).cloned());
    sort_population(&mut next);
    Ok(next)
}

/// Position of the `index`-th island on a counter-clockwise square spiral
/// starting at the origin and heading first in `+x`.
pub fn spiral_coords(index: usize) -> (i64, i64) {
    if index == 0 {
        return (0, 0);
    }
    let mut k = 1usize;
    while (2 * k + 1) * (2 * k + 1) <= index {
        k += 1;
    }
    let t = index - (2 * k - 1) * (2 * k - 1);
    let (side, p) = (t / (2 * k), (t % (2 * k)) as i64);
    let k = k as i64;
    match side {
        0 => (k, -k + 1 + p),
        1 => (k - 1 - p, k),
        2 => (-k, k - 1 - p),
        _ => (-k + 1 + p, -k),
    }
}

/// Chooses a destination other than `source` with probability proportional
/// to the inverse Euclidean distance.
pub fn pick_migration_target<R: Rng + ?Sized>(
    source: (i64, i64),
    islands: &[(i64, i64)],
    rng: &mut R,
) -> Result<(i64, i64)> {
    let candidates: Vec<(i64, i64)> = islands.iter().copied().filter(|&c| c != source).collect();
    if candidates.is_empty() {
        return Err(Error::SingletonGrid);
    }
    let weights = candidates.iter().map(|&(x, y)| {
        let (dx, dy) = ((x - source.0) as f64, (y - source.1) as f64);
        1.0 / dx.hypot(dy)
    });
    let dist = WeightedIndex::new(weights).expect("distinct points have positive weight");
    Ok(candidates[dist.sample(rng)])
}

/// Whether `a` is strictly fitter than `b`.
pub(crate) fn fitter(a: &FitnessVector, b: &FitnessVector) -> bool {
    compare_lex(a, b) == Ordering::Greater
}
