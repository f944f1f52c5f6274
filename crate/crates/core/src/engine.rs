//! Generational GA loop with the cross-generational memory PSOX reads from.
//!
//! Each generation fills `population_size` offspring slots: tournament
//! selection, crossover with probability `crossover_rate` (otherwise a copy),
//! mutation, bound repair, evaluation. The offspring replace the population
//! wholesale; with `elitism = e` the `e` worst offspring are then overwritten by
//! the `e` best individuals of the previous generation. Finally every slot's
//! personal best and the global best are refreshed.
//!
//! Slot `i`'s personal best survives replacement: it is compared against each
//! new occupant of slot `i`.

use serde::{Deserialize, Serialize};

use crate::benchmarks::ObjectiveSpec;
use crate::error::{Error, Result};
use crate::operators::{
    ax_crossover, blx_alpha_crossover, fx_crossover, gaussian_mutation, laplace_crossover,
    nonuniform_mutation, psox_crossover, sbx_crossover, tournament_index, CrossoverConfig,
    CrossoverKind, MutationConfig, MutationKind,
};
use crate::rng::RngStream;
use crate::space::{uniform_vector, Individual, RealVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Memo {
    pub position: RealVector,
    pub fitness: f64,
}

/// Per-slot personal bests plus the global best.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmMemory {
    pub pbest: Vec<Memo>,
    pub gbest: Memo,
}

impl SwarmMemory {
    pub fn from_population(pop: &[Individual]) -> Result<Self> {
        let best = argmin(pop).ok_or(Error::EmptyPopulation)?;
        Ok(Self {
            pbest: pop
                .iter()
                .map(|ind| Memo {
                    position: ind.position.clone(),
                    fitness: ind.fitness,
                })
                .collect(),
            gbest: Memo {
                position: pop[best].position.clone(),
                fitness: pop[best].fitness,
            },
        })
    }

    pub fn update(&mut self, pop: &[Individual]) {
        for (memo, ind) in self.pbest.iter_mut().zip(pop) {
            if ind.fitness < memo.fitness {
                memo.position.clone_from(&ind.position);
                memo.fitness = ind.fitness;
            }
        }
        if let Some(i) = self
            .pbest
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.fitness.total_cmp(&b.1.fitness))
            .map(|(i, _)| i)
        {
            if self.pbest[i].fitness < self.gbest.fitness {
                self.gbest = self.pbest[i].clone();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub objective: ObjectiveSpec,
    pub population_size: usize,
    pub generations: usize,
    pub crossover: CrossoverConfig,
    pub mutation: MutationConfig,
    pub selection_k: usize,
    pub seed: u64,
    pub elitism: usize,
}

impl GaConfig {
    /// Reference settings: population 300, 1000 generations, crossover rate
    /// 0.8, mutation rate 0.1, tournament size 3, one elite.
    pub fn new(objective: ObjectiveSpec, crossover: CrossoverKind, mutation: MutationKind) -> Self {
        Self {
            objective,
            population_size: 300,
            generations: 1000,
            crossover: CrossoverConfig::new(crossover),
            mutation: MutationConfig::new(mutation),
            selection_k: 3,
            seed: 0,
            elitism: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.crossover.validate()?;
        self.mutation.validate()?;
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("population_size must be >= 2".into()));
        }
        if self.selection_k == 0 {
            return Err(Error::InvalidConfig("selection_k must be >= 1".into()));
        }
        if self.elitism >= self.population_size {
            return Err(Error::InvalidConfig(
                "elitism must be smaller than population_size".into(),
            ));
        }
        if self.objective.bounds.dim() != self.objective.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.objective.dimension,
                found: self.objective.bounds.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// Best-so-far objective after each generation.
    pub best_per_generation: Vec<f64>,
    pub final_best: Memo,
    pub evaluations: u64,
}

/// Instrumentation hooks. All methods default to no-ops.
pub trait Observer {
    /// A PSOX child was built from the individual selected out of slot
    /// `source` and the personal best of slot `partner`.
    fn on_psox(&mut self, _source: usize, _partner: usize) {}

    /// Called after every completed generation (1-based).
    fn on_generation(&mut self, _generation: usize, _state: &GaState) {}
}

pub struct NoopObserver;

impl Observer for NoopObserver {}

/// Observer that re-checks the memory invariants after every generation:
/// the global best never worsens, each slot's personal best never worsens and
/// never trails the slot's current occupant, an improved personal best is the
/// occupant itself, and every PSOX partner slot differs from its source slot.
#[derive(Debug, Clone, Default)]
pub struct InvariantAudit {
    prev_pbest: Vec<f64>,
    prev_gbest: Option<f64>,
    pub generations_checked: usize,
    pub psox_children: usize,
    pub gbest_violations: usize,
    pub pbest_violations: usize,
    pub partner_violations: usize,
}

impl InvariantAudit {
    /// Records the initial memory so generation 1 is checked too.
    pub fn prime(&mut self, state: &GaState) {
        self.prev_pbest = state.memory.pbest.iter().map(|m| m.fitness).collect();
        self.prev_gbest = Some(state.memory.gbest.fitness);
    }

    pub fn violations(&self) -> usize {
        self.gbest_violations + self.pbest_violations + self.partner_violations
    }
}

impl Observer for InvariantAudit {
    fn on_psox(&mut self, source: usize, partner: usize) {
        self.psox_children += 1;
        if source == partner {
            self.partner_violations += 1;
        }
    }

    fn on_generation(&mut self, _generation: usize, state: &GaState) {
        self.generations_checked += 1;
        let mem = &state.memory;
        if let Some(prev) = self.prev_gbest {
            if mem.gbest.fitness > prev {
                self.gbest_violations += 1;
            }
        }
        let min_pbest = mem
            .pbest
            .iter()
            .map(|m| m.fitness)
            .fold(f64::INFINITY, f64::min);
        if mem.gbest.fitness > min_pbest {
            self.gbest_violations += 1;
        }
        for (i, (memo, ind)) in mem.pbest.iter().zip(&state.population).enumerate() {
            let prev = self.prev_pbest.get(i).copied().unwrap_or(f64::INFINITY);
            let improved = memo.fitness < prev;
            if memo.fitness > prev
                || memo.fitness > ind.fitness
                || (improved && (memo.fitness != ind.fitness || memo.position != ind.position))
            {
                self.pbest_violations += 1;
            }
        }
        self.prev_pbest = mem.pbest.iter().map(|m| m.fitness).collect();
        self.prev_gbest = Some(mem.gbest.fitness);
    }
}

#[derive(Debug, Clone)]
pub struct GaState {
    pub config: GaConfig,
    pub population: Vec<Individual>,
    pub memory: SwarmMemory,
    /// Generations completed so far.
    pub generation: usize,
    pub evaluations: u64,
    rng: RngStream,
}

fn argmin(pop: &[Individual]) -> Option<usize> {
    pop.iter()
        .enumerate()
        .min_by(|a, b| a.1.fitness.total_cmp(&b.1.fitness))
        .map(|(i, _)| i)
}

impl GaState {
    pub fn init(config: GaConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = RngStream::from_seed(config.seed);
        let mut population = Vec::with_capacity(config.population_size);
        for _ in 0..config.population_size {
            let x = uniform_vector(&config.objective.bounds, &mut rng);
            let f = config.objective.evaluate(&x, &mut rng)?;
            population.push(Individual::evaluated(x, f));
        }
        let memory = SwarmMemory::from_population(&population)?;
        Ok(Self {
            evaluations: population.len() as u64,
            config,
            population,
            memory,
            generation: 0,
            rng,
        })
    }

    pub fn best(&self) -> &Memo {
        &self.memory.gbest
    }

    fn finish_child(&mut self, mut x: RealVector) -> Result<Individual> {
        let cfg = &self.config;
        let bounds = &cfg.objective.bounds;
        bounds.clamp_in_place(&mut x)?;
        let x = match cfg.mutation.kind {
            MutationKind::Gaussian => gaussian_mutation(&x, bounds, &cfg.mutation, &mut self.rng)?,
            MutationKind::NonUniform => nonuniform_mutation(
                &x,
                bounds,
                self.generation,
                cfg.generations,
                &cfg.mutation,
                &mut self.rng,
            )?,
        };
        let f = cfg.objective.evaluate(&x, &mut self.rng)?;
        self.evaluations += 1;
        Ok(Individual::evaluated(x, f))
    }

    fn select(&mut self) -> Result<usize> {
        tournament_index(&self.population, self.config.selection_k, &mut self.rng)
    }

    /// Produces the children of one variation event (one or two).
    fn breed(&mut self, observer: &mut dyn Observer) -> Result<Vec<RealVector>> {
        let cx = self.config.crossover.clone();
        match cx.kind {
            CrossoverKind::Psox => {
                let i = self.select()?;
                let p_i = self.population[i].position.clone();
                if self.rng.uniform() >= cx.crossover_rate {
                    return Ok(vec![p_i]);
                }
                let n = self.population.len();
                let mut j = self.rng.index(n - 1);
                if j >= i {
                    j += 1;
                }
                observer.on_psox(i, j);
                let child = psox_crossover(
                    &p_i,
                    &self.memory.pbest[j].position,
                    &self.memory.gbest.position,
                    &cx,
                    &mut self.rng,
                )?;
                Ok(vec![child])
            }
            kind => {
                let a = self.select()?;
                let b = self.select()?;
                let p1 = self.population[a].position.clone();
                let p2 = self.population[b].position.clone();
                let two = kind.children_per_call() == 2;
                if self.rng.uniform() >= cx.crossover_rate {
                    return Ok(if two { vec![p1, p2] } else { vec![p1] });
                }
                let rng = &mut self.rng;
                Ok(match kind {
                    CrossoverKind::Ax => vec![ax_crossover(&p1, &p2, cx.ax_alpha)?],
                    CrossoverKind::Fx => vec![fx_crossover(&p1, &p2, rng)?],
                    CrossoverKind::BlxAlpha => {
                        vec![blx_alpha_crossover(&p1, &p2, cx.blx_alpha, rng)?]
                    }
                    CrossoverKind::Sbx => {
                        let (c1, c2) = sbx_crossover(&p1, &p2, cx.sbx_eta, rng)?;
                        vec![c1, c2]
                    }
                    CrossoverKind::Laplace => {
                        let (c1, c2) =
                            laplace_crossover(&p1, &p2, cx.laplace_a, cx.laplace_b, rng)?;
                        vec![c1, c2]
                    }
                    CrossoverKind::Psox => unreachable!(),
                })
            }
        }
    }

    pub fn step(&mut self, observer: &mut dyn Observer) -> Result<()> {
        let n = self.config.population_size;
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            for child in self.breed(observer)? {
                if offspring.len() == n {
                    break;
                }
                offspring.push(self.finish_child(child)?);
            }
        }

        let e = self.config.elitism;
        if e > 0 {
            let mut prev: Vec<usize> = (0..n).collect();
            prev.sort_by(|&a, &b| {
                self.population[a]
                    .fitness
                    .total_cmp(&self.population[b].fitness)
            });
            let mut worst: Vec<usize> = (0..n).collect();
            worst.sort_by(|&a, &b| offspring[b].fitness.total_cmp(&offspring[a].fitness));
            for (&dst, &src) in worst.iter().zip(&prev).take(e) {
                offspring[dst] = self.population[src].clone();
            }
        }

        self.population = offspring;
        self.memory.update(&self.population);
        self.generation += 1;
        observer.on_generation(self.generation, self);
        Ok(())
    }

    pub fn step_generation(&mut self) -> Result<()> {
        self.step(&mut NoopObserver)
    }
}

pub fn init_state(cfg: GaConfig) -> Result<GaState> {
    GaState::init(cfg)
}

pub fn run_ga(cfg: GaConfig) -> Result<RunTrace> {
    run_ga_observed(cfg, &mut NoopObserver)
}

pub fn run_ga_observed(cfg: GaConfig, observer: &mut dyn Observer) -> Result<RunTrace> {
    let state = GaState::init(cfg)?;
    run_from(state, observer)
}

/// Runs with an [`InvariantAudit`] attached from the initial population on.
pub fn run_ga_audited(cfg: GaConfig) -> Result<(RunTrace, InvariantAudit)> {
    let state = GaState::init(cfg)?;
    let mut audit = InvariantAudit::default();
    audit.prime(&state);
    let trace = run_from(state, &mut audit)?;
    Ok((trace, audit))
}

fn run_from(mut state: GaState, observer: &mut dyn Observer) -> Result<RunTrace> {
    let generations = state.config.generations;
    let mut trace = Vec::with_capacity(generations);
    for _ in 0..generations {
        state.step(observer)?;
        trace.push(state.memory.gbest.fitness);
    }
    Ok(RunTrace {
        best_per_generation: trace,
        final_best: state.memory.gbest.clone(),
        evaluations: state.evaluations,
    })
}
