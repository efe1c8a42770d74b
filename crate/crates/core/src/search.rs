//! The genetic-algorithm engine.
//!
//! Each generation draws one operator and applies it exhaustively to the
//! whole population. Children enter the next population through a
//! duplicate filter. When the best energy has not improved for
//! `stagnation_window` generations, every member is diversified by a
//! constrained pull-move random walk.
//!
//! All randomness comes from one master seed. Each (purpose, generation,
//! member) triple gets its own ChaCha stream, so per-member work can run in
//! parallel without changing results.

use std::time::{Duration, Instant};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformation::{diversity, Conformation};
use crate::energy::{evaluate, ContactMatrix, EnergyModelId, Objective};
use crate::lattice::{neighbors, LatticePoint};
use crate::moves::{do_crossover, do_mutation, macro_mutation, random_pull, random_pull_at, MacroGuidance, MacroParams, Operator};
use crate::sequence::Sequence;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("could not fill a duplicate-free population: {filled} of {wanted} members")]
    InitialisationFailed { filled: usize, wanted: usize },
}

/// Engine parameters. Missing fields in a config file take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub pop_size: usize,
    /// Weights over crossover, rotation, diagonal, pull, tilt, macro.
    pub operator_weights: [f64; 6],
    pub p_polar: f64,
    pub mm_repeat: usize,
    pub stagnation_window: usize,
    pub rw_energy_band: [f64; 2],
    pub rw_diversity_band: [f64; 2],
    pub max_generations: Option<u64>,
    pub max_seconds: Option<f64>,
    pub seed: u64,
    pub init_retries: usize,
    pub duplicate_retries: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pop_size: 50,
            operator_weights: [1.0; 6],
            p_polar: 0.20,
            mm_repeat: 5,
            stagnation_window: 5,
            rw_energy_band: [0.05, 0.10],
            rw_diversity_band: [0.10, 0.75],
            max_generations: Some(100),
            max_seconds: None,
            seed: 1,
            init_retries: 100,
            duplicate_retries: 20,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.pop_size == 0 {
            return bad("pop_size must be positive");
        }
        if self.operator_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("operator weights must be finite and non-negative");
        }
        if self.operator_weights.iter().sum::<f64>() <= 0.0 {
            return bad("operator weights must not all be zero");
        }
        if !(0.0..=1.0).contains(&self.p_polar) {
            return bad("p_polar must lie in [0, 1]");
        }
        for (name, [lo, hi]) in [("rw_energy_band", self.rw_energy_band), ("rw_diversity_band", self.rw_diversity_band)] {
            if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
                return Err(SearchError::InvalidConfig(format!("{name} must satisfy 0 <= low <= high")));
            }
        }
        if self.stagnation_window == 0 {
            return bad("stagnation_window must be positive");
        }
        if self.max_generations.is_none() && self.max_seconds.is_none() {
            return bad("a generation or time budget is required");
        }
        if self.max_seconds.is_some_and(|s| !s.is_finite() || s < 0.0) {
            return bad("max_seconds must be a non-negative number");
        }
        Ok(())
    }

    pub fn weighted_index(&self) -> Result<WeightedIndex<f64>, SearchError> {
        self.validate()?;
        WeightedIndex::new(self.operator_weights).map_err(|e| SearchError::InvalidConfig(e.to_string()))
    }
}

/// Categorical draw over [`Operator::ALL`].
pub fn select_operator<R: Rng + ?Sized>(weights: &WeightedIndex<f64>, rng: &mut R) -> Operator {
    Operator::ALL[weights.sample(rng)]
}

// Stream purposes; combined with generation and member index.
const TAG_INIT: u64 = 1;
const TAG_SCHEDULE: u64 = 2;
const TAG_MEMBER: u64 = 3;
const TAG_WALK: u64 = 4;

fn stream(seed: u64, tag: u64, generation: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 56) ^ ((generation & 0xffff_ffff) << 24) ^ (index as u64 & 0xff_ffff));
    rng
}

#[derive(Debug, Clone)]
pub struct Population {
    pub members: Vec<Conformation>,
    pub generation: u64,
    pub best_ever: Conformation,
    pub best_energy: f64,
}

impl Population {
    pub fn keys_unique(&self) -> bool {
        let mut seen = FxHashSet::default();
        self.members.iter().all(|m| seen.insert(m.canonical_key()))
    }

    pub fn mean_energy(&self) -> f64 {
        self.members.iter().map(|m| m.fitness().unwrap_or(f64::NAN)).sum::<f64>() / self.members.len() as f64
    }

    pub fn best_member(&self) -> &Conformation {
        let mut best = &self.members[0];
        for m in &self.members[1..] {
            if m.fitness() < best.fitness() {
                best = m;
            }
        }
        best
    }
}

/// One line of a run trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: u64,
    /// Best-ever energy under the search objective.
    pub best_energy: f64,
    /// MJ energy of the best-ever structure.
    pub best_mj: f64,
    pub mean_energy: f64,
    /// `"init"` for generation 0.
    pub operator: String,
    pub stagnation: bool,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str = "generation,best_energy,best_mj,mean_energy,operator,stagnation";

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{},{},{}", self.generation, self.best_energy, self.best_mj, self.mean_energy, self.operator, self.stagnation as u8)
    }

    pub fn from_csv(line: &str) -> Option<TraceRow> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return None;
        }
        Some(TraceRow {
            generation: f[0].parse().ok()?,
            best_energy: f[1].parse().ok()?,
            best_mj: f[2].parse().ok()?,
            mean_energy: f[3].parse().ok()?,
            operator: f[4].to_string(),
            stagnation: f[5] == "1",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub sequence_id: String,
    pub model: EnergyModelId,
    pub seed: u64,
    pub best: Conformation,
    /// Best energy under the search objective.
    pub best_energy: f64,
    /// MJ energy of `best`, the figure reported for every variant.
    pub reported_energy: f64,
    pub generations: u64,
    pub random_walks: u64,
    pub trace: Vec<TraceRow>,
    pub elapsed: Duration,
}

/// Outcome of one member's random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome {
    pub accepted: bool,
    pub energy_change: f64,
    pub diversity: f64,
    pub pulls: usize,
}

/// Relative energy change used by the walk acceptance test. Falls back to
/// the new energy as denominator when the start energy is zero.
pub fn relative_energy_change(start: f64, now: f64) -> f64 {
    let delta = (now - start).abs();
    let denom = if start != 0.0 { start.abs() } else { now.abs() };
    if denom == 0.0 {
        0.0
    } else {
        delta / denom
    }
}

fn in_band(x: f64, band: [f64; 2]) -> bool {
    band[0] <= x && x <= band[1]
}

/// Per-generation summary returned by [`Engine::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub operator: Operator,
    pub improved: bool,
}

/// A configured search over one sequence.
pub struct Engine<'a> {
    seq: &'a Sequence,
    cfg: GaConfig,
    model: EnergyModelId,
    matrix: ContactMatrix,
    mj: ContactMatrix,
    weights: WeightedIndex<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(seq: &'a Sequence, cfg: GaConfig, model: EnergyModelId) -> Result<Self, SearchError> {
        let weights = cfg.weighted_index()?;
        Ok(Engine { seq, cfg, model, matrix: model.objective_matrix(), mj: ContactMatrix::mj(), weights })
    }

    pub fn config(&self) -> &GaConfig {
        &self.cfg
    }

    pub fn objective(&self) -> Objective<'_> {
        Objective::new(self.seq, &self.matrix)
    }

    fn macro_params(&self) -> MacroParams {
        let guidance = match self.model {
            EnergyModelId::Mj => MacroGuidance::Unguided,
            EnergyModelId::Hp | EnergyModelId::Mh => MacroGuidance::HydrophobicCore,
        };
        MacroParams { repeat: self.cfg.mm_repeat, p_polar: self.cfg.p_polar, guidance }
    }

    fn grow<R: Rng>(&self, rng: &mut R) -> Option<Conformation> {
        let n = self.seq.len();
        let mut points = vec![LatticePoint::ORIGIN];
        let mut seen = FxHashSet::default();
        seen.insert(LatticePoint::ORIGIN);
        for _ in 1..n {
            let last = *points.last().unwrap();
            let free: Vec<LatticePoint> = neighbors(last).into_iter().filter(|p| !seen.contains(p)).collect();
            let next = *free.choose(rng)?;
            seen.insert(next);
            points.push(next);
        }
        Conformation::from_points(points).ok()
    }

    // Admits `cand`, re-perturbing it with random pulls while it duplicates an
    // existing key. After the retry budget the last candidate goes in as is.
    fn add<R: Rng>(&self, pop: &mut Vec<Conformation>, keys: &mut FxHashSet<Vec<u8>>, mut cand: Conformation, rng: &mut R) {
        let obj = self.objective();
        let mut tries = 0;
        while keys.contains(&cand.canonical_key()) && tries < self.cfg.duplicate_retries {
            tries += 1;
            if let Some(mut p) = random_pull(&cand, rng) {
                obj.score(&mut p);
                cand = p;
            }
        }
        keys.insert(cand.canonical_key());
        obj.fitness(&mut cand);
        pop.push(cand);
    }

    /// Random self-avoiding growth from the origin, retried on dead ends and
    /// duplicates; falls back to a straight chain perturbed by pulls.
    pub fn initialise(&self) -> Result<Population, SearchError> {
        let obj = self.objective();
        let wanted = self.cfg.pop_size;
        let mut members: Vec<Conformation> = Vec::with_capacity(wanted);
        let mut keys = FxHashSet::default();
        for i in 0..wanted {
            let mut rng = stream(self.cfg.seed, TAG_INIT, 0, i);
            let mut chosen = None;
            for _ in 0..self.cfg.init_retries {
                if let Some(c) = self.grow(&mut rng) {
                    if !keys.contains(&c.canonical_key()) {
                        chosen = Some(c);
                        break;
                    }
                }
            }
            if chosen.is_none() {
                let mut c = Conformation::straight(self.seq.len());
                for _ in 0..=self.cfg.duplicate_retries {
                    if !keys.contains(&c.canonical_key()) {
                        chosen = Some(c);
                        break;
                    }
                    match random_pull(&c, &mut rng) {
                        Some(p) => c = Conformation::from_directions(p.directions()).expect("pull keeps walks valid"),
                        None => break,
                    }
                }
            }
            let Some(mut c) = chosen else {
                return Err(SearchError::InitialisationFailed { filled: members.len(), wanted });
            };
            obj.score(&mut c);
            keys.insert(c.canonical_key());
            members.push(c);
        }
        let mut pop = Population { best_ever: members[0].clone(), best_energy: f64::INFINITY, members, generation: 0 };
        let best = pop.best_member().clone();
        pop.best_energy = best.fitness().unwrap();
        pop.best_ever = best;
        Ok(pop)
    }

    /// Builds the next generation in place.
    pub fn step(&self, pop: &mut Population) -> StepReport {
        let gen = pop.generation + 1;
        let mut rng = stream(self.cfg.seed, TAG_SCHEDULE, gen, 0);
        let op = select_operator(&self.weights, &mut rng);
        let obj = self.objective();
        let size = pop.members.len();
        let children: Vec<Conformation> = match op {
            Operator::Crossover => {
                let pairs: Vec<(usize, usize)> = (0..size.div_ceil(2))
                    .map(|_| {
                        if size < 2 {
                            (0, 0)
                        } else {
                            let a = rng.gen_range(0..size);
                            let mut b = rng.gen_range(0..size - 1);
                            if b >= a {
                                b += 1;
                            }
                            (a, b)
                        }
                    })
                    .collect();
                let members = &pop.members;
                let results: Vec<(Conformation, Conformation)> = pairs.par_iter().map(|&(a, b)| do_crossover(&members[a], &members[b], &obj)).collect();
                results.into_iter().flat_map(|(x, y)| [x, y]).take(size).collect()
            }
            Operator::MacroMutation => {
                let params = self.macro_params();
                pop.members
                    .par_iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let mut r = stream(self.cfg.seed, TAG_MEMBER, gen, i);
                        let mut c = macro_mutation(m, self.seq, &params, &mut r).conformation;
                        obj.score(&mut c);
                        c
                    })
                    .collect()
            }
            other => {
                let mop = other.as_mutation().expect("single-chain operator");
                pop.members.par_iter().map(|m| do_mutation(m, mop, &obj).into_conformation(m)).collect()
            }
        };
        let mut next = Vec::with_capacity(size);
        let mut keys = FxHashSet::default();
        for c in children {
            self.add(&mut next, &mut keys, c, &mut rng);
        }
        pop.members = next;
        pop.generation = gen;
        let best = pop.best_member().clone();
        let improved = best.fitness().unwrap() < pop.best_energy;
        if improved {
            pop.best_energy = best.fitness().unwrap();
            pop.best_ever = best;
        }
        StepReport { operator: op, improved }
    }

    /// Pull-move walk for one member until both band tests pass, or
    /// `10 * n` sweeps elapse.
    pub fn walk_member<R: Rng>(&self, member: &Conformation, rng: &mut R) -> (Conformation, WalkOutcome) {
        let obj = self.objective();
        let start = member.fitness().unwrap_or_else(|| obj.energy(member));
        let n = member.len();
        let mut walker = member.clone();
        let mut pulls = 0;
        for _ in 0..10 * n {
            for pos in 0..n {
                let Some(next) = random_pull_at(&walker, pos, rng) else { continue };
                pulls += 1;
                walker = next;
                // diversity is cheap; score only when it is already in band
                let dv = diversity(member, &walker).expect("equal lengths");
                if !in_band(dv, self.cfg.rw_diversity_band) {
                    continue;
                }
                let de = relative_energy_change(start, obj.score(&mut walker));
                if in_band(de, self.cfg.rw_energy_band) {
                    return (walker, WalkOutcome { accepted: true, energy_change: de, diversity: dv, pulls });
                }
            }
        }
        (member.clone(), WalkOutcome { accepted: false, energy_change: 0.0, diversity: 0.0, pulls })
    }

    /// Diversifies every member; stalled members stay as they were.
    pub fn random_walk(&self, pop: &mut Population) -> Vec<WalkOutcome> {
        let gen = pop.generation;
        let walked: Vec<(Conformation, WalkOutcome)> = pop
            .members
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                let mut r = stream(self.cfg.seed, TAG_WALK, gen, i);
                self.walk_member(m, &mut r)
            })
            .collect();
        let mut rng = stream(self.cfg.seed, TAG_WALK, gen, usize::MAX);
        let mut next = Vec::with_capacity(walked.len());
        let mut keys = FxHashSet::default();
        let mut outcomes = Vec::with_capacity(walked.len());
        for ((w, out), orig) in walked.into_iter().zip(&pop.members) {
            if keys.contains(&w.canonical_key()) {
                self.add(&mut next, &mut keys, orig.clone(), &mut rng);
            } else {
                self.add(&mut next, &mut keys, w, &mut rng);
            }
            outcomes.push(out);
        }
        pop.members = next;
        outcomes
    }

    fn trace_row(&self, pop: &Population, operator: &str, stagnation: bool) -> TraceRow {
        TraceRow {
            generation: pop.generation,
            best_energy: pop.best_energy,
            best_mj: evaluate(&pop.best_ever, self.seq, &self.mj),
            mean_energy: pop.mean_energy(),
            operator: operator.to_string(),
            stagnation,
        }
    }

    pub fn run(&self) -> Result<RunResult, SearchError> {
        self.run_with(|_| {})
    }

    /// Like [`Engine::run`], calling `observe` on the population after
    /// initialisation and after every generation.
    pub fn run_with(&self, mut observe: impl FnMut(&Population)) -> Result<RunResult, SearchError> {
        let started = Instant::now();
        let mut pop = self.initialise()?;
        observe(&pop);
        let mut trace = vec![self.trace_row(&pop, "init", false)];
        let mut stale = 0;
        let mut walks = 0;
        let deadline = self.cfg.max_seconds.map(Duration::from_secs_f64);
        loop {
            if self.cfg.max_generations.is_some_and(|g| pop.generation >= g) {
                break;
            }
            if deadline.is_some_and(|d| started.elapsed() >= d) {
                break;
            }
            let report = self.step(&mut pop);
            stale = if report.improved { 0 } else { stale + 1 };
            let stagnant = stale >= self.cfg.stagnation_window;
            if stagnant {
                self.random_walk(&mut pop);
                walks += 1;
                stale = 0;
            }
            observe(&pop);
            trace.push(self.trace_row(&pop, report.operator.as_str(), stagnant));
        }
        let reported_energy = evaluate(&pop.best_ever, self.seq, &self.mj);
        Ok(RunResult {
            sequence_id: self.seq.id().to_string(),
            model: self.model,
            seed: self.cfg.seed,
            best_energy: pop.best_energy,
            best: pop.best_ever,
            reported_energy,
            generations: pop.generation,
            random_walks: walks,
            trace,
            elapsed: started.elapsed(),
        })
    }
}

/// Convenience wrapper: one seeded run.
pub fn run(seq: &Sequence, cfg: &GaConfig, model: EnergyModelId) -> Result<RunResult, SearchError> {
    Engine::new(seq, cfg.clone(), model)?.run()
}

/// Seed for run `index` of a multi-run batch.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    let mut rng = stream(master, 0, 0, index);
    rng.gen()
}
