//! Hill climbing with constant-time delta evaluation.
//!
//! [`DeltaState`] caches every subfunction value together with the fitness
//! change of each single-bit flip. Flipping variable `i` only touches the
//! `c_i` subfunctions that contain it, and only the deltas of `i` and its
//! interaction-graph neighbors can change, so a move costs a number of
//! subfunction evaluations independent of `n`.
//!
//! Optional pair moves flip two variables at once. At a 1-bit local optimum
//! only pairs joined by an interaction-graph edge can improve: for a
//! non-adjacent pair the joint delta is the sum of two non-positive single
//! deltas.

use std::cell::Cell;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adf::{config_index, AdfInstance, Solution};
use crate::error::{Error, Result};
use crate::graph::build_vig;

#[derive(Clone, Debug)]
pub struct DeltaState<'a> {
    instance: &'a AdfInstance,
    solution: Solution,
    /// Current configuration index of every subfunction.
    configs: Vec<usize>,
    values: Vec<f64>,
    /// `(subfunction, bit mask of the variable inside its configuration)`.
    incidence: Vec<Vec<(usize, usize)>>,
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    fitness: f64,
    deltas: Vec<f64>,
    improving: BTreeSet<usize>,
    evaluations: Cell<u64>,
}

impl<'a> DeltaState<'a> {
    pub fn new(instance: &'a AdfInstance, start: Solution) -> Result<Self> {
        instance.require_white_structure()?;
        if start.len() != instance.n() {
            return Err(Error::Structural(format!(
                "start solution has length {} but n = {}",
                start.len(),
                instance.n()
            )));
        }
        let vig = build_vig(instance)?;
        let mut incidence = vec![Vec::new(); instance.n()];
        for (s, sub) in instance.subfunctions().iter().enumerate() {
            let k = sub.order();
            for (pos, &v) in sub.scope().iter().enumerate() {
                incidence[v].push((s, 1usize << (k - 1 - pos)));
            }
        }
        let configs: Vec<usize> = instance
            .subfunctions()
            .iter()
            .map(|sub| config_index(start.bits(), sub.scope()))
            .collect();
        let values: Vec<f64> = instance
            .subfunctions()
            .iter()
            .zip(&configs)
            .map(|(sub, &c)| sub.codomain()[c])
            .collect();
        let fitness = values.iter().sum();
        let mut state = DeltaState {
            instance,
            solution: start,
            configs,
            values,
            incidence,
            neighbors: (0..instance.n())
                .map(|v| vig.neighbors(v).iter().copied().collect())
                .collect(),
            edges: vig.edges(),
            fitness,
            deltas: vec![0.0; instance.n()],
            improving: BTreeSet::new(),
            evaluations: Cell::new(0),
        };
        for i in 0..instance.n() {
            state.refresh_delta(i);
        }
        state.evaluations.set(0);
        Ok(state)
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    pub fn fitness(&self) -> f64 {
        self.fitness
    }

    /// Variables whose flip strictly increases fitness, ascending.
    pub fn improving(&self) -> &BTreeSet<usize> {
        &self.improving
    }

    pub fn cached_delta(&self, i: usize) -> f64 {
        self.deltas[i]
    }

    /// Number of subfunctions containing `i`.
    pub fn incidence_count(&self, i: usize) -> usize {
        self.incidence[i].len()
    }

    /// Subfunction evaluations performed since construction.
    pub fn evaluation_count(&self) -> u64 {
        self.evaluations.get()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.instance.n() {
            return Err(Error::Structural(format!(
                "variable {i} out of range for n = {}",
                self.instance.n()
            )));
        }
        Ok(())
    }

    fn compute_delta(&self, i: usize) -> f64 {
        let subs = self.instance.subfunctions();
        let mut delta = 0.0;
        for &(s, mask) in &self.incidence[i] {
            delta += subs[s].codomain()[self.configs[s] ^ mask] - self.values[s];
        }
        self.evaluations
            .set(self.evaluations.get() + self.incidence[i].len() as u64);
        delta
    }

    fn refresh_delta(&mut self, i: usize) {
        let d = self.compute_delta(i);
        self.deltas[i] = d;
        if d > 0.0 {
            self.improving.insert(i);
        } else {
            self.improving.remove(&i);
        }
    }

    /// `f(x with bit i flipped) − f(x)`, evaluating only the subfunctions containing `i`.
    pub fn delta_flip(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.compute_delta(i))
    }

    /// Flips bit `i` and refreshes the caches it affects. Returns the applied delta.
    pub fn apply_flip(&mut self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let delta = self.deltas[i];
        let subs = self.instance.subfunctions();
        for &(s, mask) in &self.incidence[i] {
            self.configs[s] ^= mask;
            self.values[s] = subs[s].codomain()[self.configs[s]];
        }
        self.solution.flip(i);
        self.fitness += delta;
        self.refresh_delta(i);
        for idx in 0..self.neighbors[i].len() {
            let j = self.neighbors[i][idx];
            self.refresh_delta(j);
        }
        Ok(delta)
    }

    /// Fitness change of flipping `u` and `v` together.
    pub fn delta_pair(&self, u: usize, v: usize) -> Result<f64> {
        self.check_index(u)?;
        self.check_index(v)?;
        if u == v {
            return Err(Error::Structural(format!(
                "pair move needs two distinct variables, got {u} twice"
            )));
        }
        let subs = self.instance.subfunctions();
        let mut delta = 0.0;
        let mut evals = 0u64;
        for &(s, mask_u) in &self.incidence[u] {
            let mask_v = self.incidence[v].iter().find(|(t, _)| *t == s).map_or(0, |&(_, m)| m);
            delta += subs[s].codomain()[self.configs[s] ^ mask_u ^ mask_v] - self.values[s];
            evals += 1;
        }
        for &(s, mask_v) in &self.incidence[v] {
            if self.incidence[u].iter().any(|(t, _)| *t == s) {
                continue;
            }
            delta += subs[s].codomain()[self.configs[s] ^ mask_v] - self.values[s];
            evals += 1;
        }
        self.evaluations.set(self.evaluations.get() + evals);
        Ok(delta)
    }

    /// Interaction-graph edges: the only pairs that can improve once no
    /// single flip does.
    pub fn pair_candidates(&self) -> Result<Vec<(usize, usize)>> {
        if !self.improving.is_empty() {
            return Err(Error::Precondition(format!(
                "{} improving single flips remain",
                self.improving.len()
            )));
        }
        Ok(self.edges.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pivot {
    /// Largest delta; lowest variable index on ties.
    BestImprovement,
    /// First improving variable in a seeded permutation, reshuffled per sweep.
    FirstImprovement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClimbPolicy {
    pub pivot: Pivot,
    pub pair_moves: bool,
    pub max_moves: usize,
    pub seed: u64,
    pub trace: bool,
}

impl Default for ClimbPolicy {
    fn default() -> Self {
        ClimbPolicy {
            pivot: Pivot::BestImprovement,
            pair_moves: false,
            max_moves: usize::MAX,
            seed: 0,
            trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClimbOutcome {
    /// No improving move remains.
    LocalOptimum,
    /// Stopped by the move budget while improving moves remained.
    MoveLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub variables: Vec<usize>,
    pub delta: f64,
    pub fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClimbResult {
    pub solution: Solution,
    pub fitness: f64,
    pub moves: usize,
    pub outcome: ClimbOutcome,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

struct Sweep {
    order: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl Sweep {
    fn next_improving(&mut self, state: &DeltaState<'_>) -> Option<usize> {
        if state.improving().is_empty() {
            return None;
        }
        loop {
            if self.cursor == self.order.len() {
                self.order.shuffle(&mut self.rng);
                self.cursor = 0;
            }
            let v = self.order[self.cursor];
            self.cursor += 1;
            if state.improving().contains(&v) {
                return Some(v);
            }
        }
    }
}

fn best_pair(state: &DeltaState<'_>, first: bool) -> Result<Option<((usize, usize), f64)>> {
    let mut best: Option<((usize, usize), f64)> = None;
    for (u, v) in state.pair_candidates()? {
        let d = state.delta_pair(u, v)?;
        if d > 0.0 && best.is_none_or(|(_, b)| d > b) {
            best = Some(((u, v), d));
            if first {
                break;
            }
        }
    }
    Ok(best)
}

pub fn hill_climb(instance: &AdfInstance, start: Solution, policy: &ClimbPolicy) -> Result<ClimbResult> {
    let mut state = DeltaState::new(instance, start)?;
    let mut sweep = Sweep {
        order: (0..instance.n()).collect(),
        cursor: instance.n(),
        rng: ChaCha8Rng::seed_from_u64(policy.seed),
    };
    let mut moves = 0;
    let mut trace = Vec::new();
    let outcome = loop {
        let single = match policy.pivot {
            Pivot::BestImprovement => state
                .improving()
                .iter()
                .copied()
                .fold(None, |acc: Option<usize>, v| match acc {
                    Some(b) if state.cached_delta(b) >= state.cached_delta(v) => Some(b),
                    _ => Some(v),
                }),
            Pivot::FirstImprovement => sweep.next_improving(&state),
        };
        let (variables, delta) = if let Some(v) = single {
            if moves >= policy.max_moves {
                break ClimbOutcome::MoveLimit;
            }
            (vec![v], state.apply_flip(v)?)
        } else if policy.pair_moves {
            match best_pair(&state, policy.pivot == Pivot::FirstImprovement)? {
                Some(((u, v), d)) => {
                    if moves >= policy.max_moves {
                        break ClimbOutcome::MoveLimit;
                    }
                    state.apply_flip(u)?;
                    state.apply_flip(v)?;
                    (vec![u, v], d)
                }
                None => break ClimbOutcome::LocalOptimum,
            }
        } else {
            break ClimbOutcome::LocalOptimum;
        };
        moves += 1;
        if policy.trace {
            trace.push(TraceEntry {
                step: moves,
                variables,
                delta,
                fitness: state.fitness(),
            });
        }
    };
    Ok(ClimbResult {
        solution: state.solution().clone(),
        fitness: state.fitness(),
        moves,
        outcome,
        trace,
    })
}
