//! The island grid and run control.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::migrant::{CheckpointRecord, MigrantMsg};
use super::{
    evaluate_all, fitter, pick_migration_target, select_parent, sort_population, spiral_coords,
    step_generation, Individual, IslandConfig,
};
use crate::error::{Error, Result};
use crate::fitness::{Evaluator, FitnessVector};
use crate::genome::{encode_seed, Genotype, LockMask};
use crate::netlist::Circuit;
use crate::seeding::{self, StreamRng};
use crate::target::TargetSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub island: IslandConfig,
    /// Islands created at start.
    pub islands: usize,
    /// Stop once a champion is perfect with at most this many live gates.
    pub goal_size: Option<usize>,
    /// Checkpoint file, one champion per line.
    pub checkpoint: Option<PathBuf>,
    /// Generations between checkpoints.
    pub checkpoint_every: u64,
    /// Evaluate islands (or, with one island, offspring) on the rayon pool.
    pub parallel: bool,
    /// Reseed an island in place once its best member has not improved for
    /// this many generations.
    pub restart_after: Option<u64>,
}

impl RunConfig {
    pub fn new(island: IslandConfig) -> Self {
        Self {
            island,
            islands: 1,
            goal_size: None,
            checkpoint: None,
            checkpoint_every: 100,
            parallel: false,
            restart_after: None,
        }
    }
}

/// Champion fitness at the moment it was first reached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub generation: u64,
    pub evaluations: u64,
    pub fitness: [f64; 4],
    pub size: usize,
    pub undetected: usize,
    pub unsignalled: usize,
}

impl HistoryPoint {
    fn new(generation: u64, evaluations: u64, f: &FitnessVector) -> Self {
        Self {
            generation,
            evaluations,
            fitness: f.objectives(),
            size: f.size,
            undetected: f.undetected,
            unsignalled: f.unsignalled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Goal,
    Evaluations,
    WallClock,
}

pub struct Progress<'a> {
    pub generation: u64,
    pub evaluations: u64,
    pub islands: usize,
    pub champion: &'a FitnessVector,
    pub grid: &'a Grid,
}

pub struct RunResult {
    pub champion: Individual,
    pub history: Vec<HistoryPoint>,
    pub evaluations: u64,
    pub generations: u64,
    pub elapsed: Duration,
    pub stop: StopReason,
    pub lock: LockMask,
    /// Encoding of the seed whose locked bits every individual shares.
    pub reference: Option<Genotype>,
}

struct Island {
    index: usize,
    coords: (i64, i64),
    rng: StreamRng,
    population: Vec<Individual>,
    /// Generation at which the island's best member last improved.
    improved_at: u64,
}

/// Islands on a square spiral, stepped in lockstep generations.
pub struct Grid {
    config: RunConfig,
    evaluator: Evaluator,
    seed: Option<Circuit>,
    reference: Option<Genotype>,
    lock: LockMask,
    islands: Vec<Island>,
    next_index: usize,
    evaluations: u64,
    generation: u64,
    champion: Option<Individual>,
    history: Vec<HistoryPoint>,
}

impl Grid {
    pub fn new(config: RunConfig, target: TargetSpec, seed: Option<&Circuit>) -> Result<Self> {
        config.island.validate()?;
        let layout = config.island.layout;
        if target.inputs != layout.inputs || target.num_outputs() != layout.outputs {
            return Err(Error::Config(format!(
                "target has {} inputs and {} outputs, layout expects {} and {}",
                target.inputs,
                target.num_outputs(),
                layout.inputs,
                layout.outputs
            )));
        }
        if config.islands == 0 {
            return Err(Error::Config("at least one island is required".into()));
        }
        let (reference, lock) = match seed {
            Some(s) => {
                let mut rng = seeding::stream(config.island.rng_seed, u64::MAX);
                let (g, lock) = encode_seed(s, layout, config.island.mode, &mut rng)?;
                (Some(g), lock)
            }
            None => (None, LockMask::empty(layout)),
        };
        let evaluator = Evaluator::new(target, layout.max_gates());
        let mut grid = Self {
            evaluator,
            seed: seed.cloned(),
            reference,
            lock,
            islands: Vec::new(),
            next_index: 0,
            evaluations: 0,
            generation: 0,
            champion: None,
            history: Vec::new(),
            config,
        };
        for _ in 0..grid.config.islands {
            grid.add_island()?;
        }
        Ok(grid)
    }

    /// Adds the next island on the spiral with a freshly seeded population.
    pub fn add_island(&mut self) -> Result<(i64, i64)> {
        let (index, rng, population) = self.fresh_population()?;
        let coords = spiral_coords(index);
        self.islands.push(Island {
            index,
            coords,
            rng,
            population,
            improved_at: self.generation,
        });
        self.update_champion();
        Ok(coords)
    }

    /// Draws the next island stream and an evaluated, sorted population.
    fn fresh_population(&mut self) -> Result<(usize, StreamRng, Vec<Individual>)> {
        let index = self.next_index;
        self.next_index += 1;
        let cfg = &self.config.island;
        let mut rng = seeding::stream(cfg.rng_seed, index as u64);
        let genotypes = (0..cfg.population_size)
            .map(|_| match &self.seed {
                Some(s) => encode_seed(s, cfg.layout, cfg.mode, &mut rng).map(|(g, _)| g),
                None => Ok(Genotype::random(cfg.layout, &mut rng)),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut population = evaluate_all(genotypes, &self.evaluator, self.config.parallel);
        sort_population(&mut population);
        self.evaluations += population.len() as u64;
        Ok((index, rng, population))
    }

    /// Reseeds every island whose best member has stalled for longer than
    /// `restart_after` generations. The island keeps its grid position.
    fn restart_stalled(&mut self) -> Result<()> {
        let Some(limit) = self.config.restart_after else {
            return Ok(());
        };
        for i in 0..self.islands.len() {
            if self.generation - self.islands[i].improved_at < limit {
                continue;
            }
            let (index, rng, population) = self.fresh_population()?;
            let isl = &mut self.islands[i];
            isl.index = index;
            isl.rng = rng;
            isl.population = population;
            isl.improved_at = self.generation;
        }
        Ok(())
    }

    /// Removes the island at `coords`. The last island cannot be removed.
    pub fn remove_island(&mut self, coords: (i64, i64)) -> Result<bool> {
        let Some(pos) = self.islands.iter().position(|i| i.coords == coords) else {
            return Ok(false);
        };
        if self.islands.len() == 1 {
            return Err(Error::Config("cannot remove the last island".into()));
        }
        self.islands.remove(pos);
        Ok(true)
    }

    pub fn island_coords(&self) -> Vec<(i64, i64)> {
        self.islands.iter().map(|i| i.coords).collect()
    }

    pub fn population(&self, coords: (i64, i64)) -> Option<&[Individual]> {
        self.islands
            .iter()
            .find(|i| i.coords == coords)
            .map(|i| i.population.as_slice())
    }

    pub fn champion(&self) -> &Individual {
        self.champion.as_ref().expect("a grid always has an island")
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn history(&self) -> &[HistoryPoint] {
        &self.history
    }

    pub fn lock(&self) -> &LockMask {
        &self.lock
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    /// Evaluations consumed by one call to [`Grid::step`], excluding migrants.
    pub fn generation_cost(&self) -> u64 {
        (self.islands.len() * self.config.island.population_size) as u64
    }

    /// Advances every island one generation, then exchanges migrants.
    pub fn step(&mut self) -> Result<()> {
        let cfg = &self.config.island;
        let evaluator = &self.evaluator;
        let lock = &self.lock;
        let generation = self.generation + 1;
        let step = |isl: &mut Island, parallel: bool| -> Result<()> {
            let next = step_generation(
                &isl.population,
                &cfg.mix,
                lock,
                evaluator,
                parallel,
                &mut isl.rng,
            )?;
            if fitter(&next[0].fitness, &isl.population[0].fitness) {
                isl.improved_at = generation;
            }
            isl.population = next;
            Ok(())
        };
        if self.config.parallel && self.islands.len() > 1 {
            self.islands
                .par_iter_mut()
                .map(|isl| step(isl, false))
                .collect::<Result<()>>()?;
        } else {
            let parallel = self.config.parallel;
            for isl in &mut self.islands {
                step(isl, parallel)?;
            }
        }
        self.evaluations += self.generation_cost();
        self.generation += 1;

        if self.islands.len() > 1 {
            let coords = self.island_coords();
            let mut outbox = Vec::new();
            for isl in &mut self.islands {
                if isl.rng.gen_bool(cfg.migration_rate) {
                    let m = select_parent(&isl.population, &mut isl.rng)?;
                    let dest = pick_migration_target(isl.coords, &coords, &mut isl.rng)?;
                    outbox.push((
                        dest,
                        MigrantMsg::new(&m.genotype, &m.fitness, isl.coords, self.generation),
                    ));
                }
            }
            for (dest, msg) in outbox {
                self.accept_migrant(dest, &msg)?;
            }
        }
        self.update_champion();
        self.restart_stalled()
    }

    /// Re-evaluates an immigrant and puts it in place of the worst non-elite
    /// member at `dest`. Returns false if the message was dropped: wrong
    /// layout, locked bits differing from the seed, or no such island.
    pub fn accept_migrant(&mut self, dest: (i64, i64), msg: &MigrantMsg) -> Result<bool> {
        let layout = self.config.island.layout;
        if !msg.matches(layout) {
            return Ok(false);
        }
        let Ok(genotype) = msg.genotype(layout) else {
            return Ok(false);
        };
        if let Some(reference) = &self.reference {
            if !self.lock.agrees(reference, &genotype) {
                return Ok(false);
            }
        }
        let elites = self.config.island.mix.elites;
        let Some(isl) = self.islands.iter_mut().find(|i| i.coords == dest) else {
            return Ok(false);
        };
        let n = isl.population.len();
        if n <= elites {
            return Ok(false);
        }
        isl.population[n - 1] = Individual::evaluate(genotype, &self.evaluator);
        self.evaluations += 1;
        sort_population(&mut isl.population);
        Ok(true)
    }

    fn update_champion(&mut self) {
        let mut best = self.champion.take();
        for isl in &self.islands {
            let cand = &isl.population[0];
            if best
                .as_ref()
                .is_none_or(|b| fitter(&cand.fitness, &b.fitness))
            {
                best = Some(cand.clone());
                self.history.push(HistoryPoint::new(
                    self.generation,
                    self.evaluations,
                    &cand.fitness,
                ));
            }
        }
        self.champion = best;
    }

    fn goal_reached(&self) -> bool {
        let f = &self.champion().fitness;
        f.is_perfect() && self.config.goal_size.is_some_and(|g| f.size <= g)
    }

    fn checkpoint_record(&self, started: Instant) -> CheckpointRecord {
        let c = self.champion();
        let source = self
            .islands
            .iter()
            .min_by_key(|i| i.index)
            .map_or((0, 0), |i| i.coords);
        CheckpointRecord {
            champion: MigrantMsg::new(&c.genotype, &c.fitness, source, self.generation),
            evaluations: self.evaluations,
            size: c.fitness.size,
            undetected: c.fitness.undetected,
            unsignalled: c.fitness.unsignalled,
            elapsed_secs: started.elapsed().as_secs_f64(),
            rng_seed: self.config.island.rng_seed,
        }
    }

    fn into_result(self, started: Instant, stop: StopReason) -> RunResult {
        RunResult {
            champion: self.champion.expect("a grid always has an island"),
            history: self.history,
            evaluations: self.evaluations,
            generations: self.generation,
            elapsed: started.elapsed(),
            stop,
            lock: self.lock,
            reference: self.reference,
        }
    }
}

pub fn run(config: RunConfig, target: TargetSpec, seed: Option<&Circuit>) -> Result<RunResult> {
    run_with_observer(config, target, seed, |_| {})
}

/// Runs until the goal is met or the budget is spent. `observer` sees the
/// state after every generation.
pub fn run_with_observer(
    config: RunConfig,
    target: TargetSpec,
    seed: Option<&Circuit>,
    mut observer: impl FnMut(&Progress),
) -> Result<RunResult> {
    let started = Instant::now();
    let budget = config.island.budget;
    let mut checkpoint = match &config.checkpoint {
        Some(path) => Some(BufWriter::new(File::create(path)?)),
        None => None,
    };
    let every = config.checkpoint_every.max(1);
    let mut grid = Grid::new(config, target, seed)?;
    let mut write_checkpoint = |grid: &Grid| -> Result<()> {
        if let Some(out) = checkpoint.as_mut() {
            serde_json::to_writer(&mut *out, &grid.checkpoint_record(started))?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
        Ok(())
    };

    let stop = loop {
        if grid.goal_reached() {
            break StopReason::Goal;
        }
        if budget
            .max_evaluations
            .is_some_and(|max| grid.evaluations + grid.generation_cost() > max)
        {
            break StopReason::Evaluations;
        }
        if budget.wall_clock.is_some_and(|t| started.elapsed() >= t) {
            break StopReason::WallClock;
        }
        grid.step()?;
        observer(&Progress {
            generation: grid.generation,
            evaluations: grid.evaluations,
            islands: grid.islands.len(),
            champion: &grid.champion().fitness,
            grid: &grid,
        });
        if grid.generation % every == 0 {
            write_checkpoint(&grid)?;
        }
    };
    write_checkpoint(&grid)?;
    Ok(grid.into_result(started, stop))
}
