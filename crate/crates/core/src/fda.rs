//! Factorized distribution algorithm with a fixed factorization.
//!
//! Each generation evaluates the population, selects, estimates the
//! conditional tables of the given [`Factorization`] from the selected set and
//! samples the next population ancestrally. No structure is learned.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adf::{config_index, write_config, AdfInstance, Solution};
use crate::error::{Error, Result};
use crate::junction::Factorization;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Selection {
    /// Keep the `ceil(ratio · N)` fittest solutions, ties in population order.
    Truncation { ratio: f64 },
    /// Draw `size` solutions with replacement, `P(x) ∝ exp(beta · f(x))`.
    Boltzmann { beta: f64, size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdaConfig {
    pub population_size: usize,
    pub selection: Selection,
    /// Additive (Laplace) smoothing per configuration.
    pub smoothing: f64,
    pub max_generations: usize,
    pub seed: u64,
    pub elitism: usize,
    /// Stop as soon as a solution reaches this fitness.
    pub target: Option<f64>,
}

impl Default for FdaConfig {
    fn default() -> Self {
        FdaConfig {
            population_size: 500,
            selection: Selection::Truncation { ratio: 0.3 },
            smoothing: 1.0,
            max_generations: 30,
            seed: 0,
            elitism: 1,
            target: None,
        }
    }
}

impl FdaConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.population_size;
        if n == 0 {
            return Err(Error::Config("population size must be at least 1".into()));
        }
        match self.selection {
            Selection::Truncation { ratio } => {
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return Err(Error::Config(format!(
                        "truncation ratio must be in (0, 1], got {ratio}"
                    )));
                }
            }
            Selection::Boltzmann { beta, size } => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return Err(Error::Config(format!(
                        "selection beta must be finite and >= 0, got {beta}"
                    )));
                }
                if size == 0 || size > n {
                    return Err(Error::Config(format!(
                        "Boltzmann selection size must be in [1, {n}], got {size}"
                    )));
                }
            }
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::Config(format!(
                "smoothing must be finite and >= 0, got {}",
                self.smoothing
            )));
        }
        if self.elitism >= n {
            return Err(Error::Config(format!(
                "elitism {} must be smaller than the population size {n}",
                self.elitism
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    solutions: Vec<Solution>,
    fitness: Vec<f64>,
    generation: usize,
}

impl Population {
    pub fn new(solutions: Vec<Solution>, fitness: Vec<f64>, generation: usize) -> Result<Self> {
        if solutions.is_empty() {
            return Err(Error::Precondition("population is empty".into()));
        }
        if solutions.len() != fitness.len() {
            return Err(Error::Structural(format!(
                "{} solutions but {} fitness values",
                solutions.len(),
                fitness.len()
            )));
        }
        Ok(Population {
            solutions,
            fitness,
            generation,
        })
    }

    pub fn evaluate(instance: &AdfInstance, solutions: Vec<Solution>, generation: usize) -> Result<Self> {
        let fitness = solutions
            .iter()
            .map(|s| instance.evaluate(s))
            .collect::<Result<Vec<_>>>()?;
        Population::new(solutions, fitness, generation)
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn solutions(&self) -> &[Solution] {
        &self.solutions
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Indices sorted by decreasing fitness, ties in population order.
    fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.fitness[b].total_cmp(&self.fitness[a]));
        idx
    }

    pub fn best(&self) -> (&Solution, f64) {
        let i = self.ranking()[0];
        (&self.solutions[i], self.fitness[i])
    }

    pub fn mean_fitness(&self) -> f64 {
        self.fitness.iter().sum::<f64>() / self.len() as f64
    }

    fn subset(&self, indices: &[usize]) -> Population {
        Population {
            solutions: indices.iter().map(|&i| self.solutions[i].clone()).collect(),
            fitness: indices.iter().map(|&i| self.fitness[i]).collect(),
            generation: self.generation,
        }
    }
}

fn truncation_size(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).ceil() as usize).clamp(1, n)
}

fn softmax(fitness: &[f64], beta: f64) -> Vec<f64> {
    let fmax = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = fitness
        .iter()
        .map(|&f| if beta == 0.0 { 1.0 } else { (beta * (f - fmax)).exp() })
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub fn select<R: Rng + ?Sized>(population: &Population, selection: &Selection, rng: &mut R) -> Result<Population> {
    if population.is_empty() {
        return Err(Error::Precondition("cannot select from an empty population".into()));
    }
    match *selection {
        Selection::Truncation { ratio } => {
            let k = truncation_size(population.len(), ratio);
            Ok(population.subset(&population.ranking()[..k]))
        }
        Selection::Boltzmann { beta, size } => {
            let probs = softmax(&population.fitness, beta);
            let dist = WeightedIndex::new(&probs).map_err(|e| Error::Config(format!("Boltzmann weights: {e}")))?;
            let picks: Vec<usize> = (0..size).map(|_| dist.sample(rng)).collect();
            Ok(population.subset(&picks))
        }
    }
}

/// Probability with which each population member enters the selected set:
/// `1/K` for the truncation survivors, the softmax weight under Boltzmann.
pub fn selection_probabilities(population: &Population, selection: &Selection) -> Vec<f64> {
    match *selection {
        Selection::Truncation { ratio } => {
            let k = truncation_size(population.len(), ratio);
            let mut p = vec![0.0; population.len()];
            for &i in &population.ranking()[..k] {
                p[i] = 1.0 / k as f64;
            }
            p
        }
        Selection::Boltzmann { beta, .. } => softmax(&population.fitness, beta),
    }
}

/// Conditional probability tables, one per factor. Table entries are indexed
/// by `(conditioning config << |new|) | new config`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorParams {
    pub tables: Vec<Vec<f64>>,
    /// Smoothed joint frequencies over each factor scope.
    pub joints: Vec<Vec<f64>>,
    pub smoothing: f64,
}

impl FactorParams {
    /// Model with every conditional uniform.
    pub fn uniform(factorization: &Factorization) -> Self {
        let tables: Vec<Vec<f64>> = factorization
            .factors()
            .iter()
            .map(|f| {
                let size = 1usize << (f.new.len() + f.conditioning.len());
                vec![1.0 / (1usize << f.new.len()) as f64; size]
            })
            .collect();
        let joints = tables.iter().map(|t| vec![1.0 / t.len() as f64; t.len()]).collect();
        FactorParams {
            tables,
            joints,
            smoothing: f64::INFINITY,
        }
    }

    fn check(&self, factorization: &Factorization) -> Result<()> {
        if self.tables.len() != factorization.factors().len() {
            return Err(Error::Structural(format!(
                "{} parameter tables for {} factors",
                self.tables.len(),
                factorization.factors().len()
            )));
        }
        for (i, (t, f)) in self.tables.iter().zip(factorization.factors()).enumerate() {
            if t.len() != 1 << (f.new.len() + f.conditioning.len()) {
                return Err(Error::Structural(format!("parameter table {i} has the wrong size")));
            }
        }
        Ok(())
    }

    /// Entropy in bits of the factorized model, `Σ H(scope) − H(conditioning)`
    /// over the smoothed factor joints.
    pub fn entropy(&self, factorization: &Factorization) -> f64 {
        self.joints
            .iter()
            .zip(factorization.factors())
            .map(|(joint, f)| {
                let new_size = 1usize << f.new.len();
                let cond_marginal: Vec<f64> = joint.chunks(new_size).map(|c| c.iter().sum()).collect();
                shannon(joint) - shannon(&cond_marginal)
            })
            .sum()
    }
}

fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Maximum-likelihood conditionals with `smoothing` added to every count.
/// Conditioning contexts with no mass fall back to uniform.
pub fn estimate(factorization: &Factorization, selected: &Population, smoothing: f64) -> Result<FactorParams> {
    if selected.is_empty() {
        return Err(Error::Precondition("cannot estimate from an empty selection".into()));
    }
    if smoothing.is_nan() || smoothing < 0.0 {
        return Err(Error::Config(format!("smoothing must be >= 0, got {smoothing}")));
    }
    let mut tables = Vec::with_capacity(factorization.factors().len());
    let mut joints = Vec::with_capacity(factorization.factors().len());
    for factor in factorization.factors() {
        let scope = factor.scope();
        let size = 1usize << scope.len();
        let new_size = 1usize << factor.new.len();
        let mut counts = vec![0.0f64; size];
        for s in selected.solutions() {
            counts[config_index(s.bits(), &scope)] += 1.0;
        }
        let smoothed: Vec<f64> = counts.iter().map(|c| c + smoothing).collect();
        let total: f64 = smoothed.iter().sum();
        joints.push(if total > 0.0 && total.is_finite() {
            smoothed.iter().map(|c| c / total).collect()
        } else {
            vec![1.0 / size as f64; size]
        });
        let mut table = vec![0.0; size];
        for (ctx, chunk) in smoothed.chunks(new_size).enumerate() {
            let mass: f64 = chunk.iter().sum();
            let out = &mut table[ctx * new_size..(ctx + 1) * new_size];
            if mass > 0.0 && mass.is_finite() {
                for (o, c) in out.iter_mut().zip(chunk) {
                    *o = c / mass;
                }
            } else {
                out.fill(1.0 / new_size as f64);
            }
        }
        tables.push(table);
    }
    Ok(FactorParams {
        tables,
        joints,
        smoothing,
    })
}

fn draw(slice: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in slice.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the accumulated mass: last entry with support
    slice.iter().rposition(|&p| p > 0.0).unwrap_or(slice.len() - 1)
}

/// Ancestral sampling in factorization order.
pub fn sample<R: Rng + ?Sized>(
    factorization: &Factorization,
    params: &FactorParams,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Solution>> {
    params.check(factorization)?;
    let n = factorization.n();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut bits = vec![0u8; n];
        let mut assigned = vec![false; n];
        for (f, table) in factorization.factors().iter().zip(&params.tables) {
            if let Some(&v) = f.conditioning.iter().find(|&&v| !assigned[v]) {
                return Err(Error::Structural(format!(
                    "variable {v} used as condition before it is sampled"
                )));
            }
            let ctx = config_index(&bits, &f.conditioning);
            let new_size = 1usize << f.new.len();
            let cfg = draw(&table[ctx * new_size..(ctx + 1) * new_size], rng.random::<f64>());
            write_config(&mut bits, &f.new, cfg);
            for &v in &f.new {
                assigned[v] = true;
            }
        }
        out.push(Solution::new(bits)?);
    }
    Ok(out)
}

/// Probability the model assigns to `solution`.
pub fn model_probability(factorization: &Factorization, params: &FactorParams, solution: &Solution) -> Result<f64> {
    params.check(factorization)?;
    if solution.len() != factorization.n() {
        return Err(Error::Structural(format!(
            "solution has length {} but the factorization covers {} variables",
            solution.len(),
            factorization.n()
        )));
    }
    Ok(factorization
        .factors()
        .iter()
        .zip(&params.tables)
        .map(|(f, t)| t[config_index(solution.bits(), &f.scope())])
        .product())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Entropy (bits) of the model estimated from this generation, if one was built.
    pub entropy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdaResult {
    pub best: Solution,
    pub best_fitness: f64,
    pub generations: usize,
    pub evaluations: usize,
    /// Whether `target` was reached; `None` without a target.
    pub success: Option<bool>,
    pub history: Vec<GenerationStats>,
    pub config: FdaConfig,
}

pub fn run_fda(instance: &AdfInstance, factorization: &Factorization, config: &FdaConfig) -> Result<FdaResult> {
    config.validate()?;
    if factorization.n() != instance.n() {
        return Err(Error::Structural(format!(
            "factorization covers {} variables, instance has {}",
            factorization.n(),
            instance.n()
        )));
    }
    let n = instance.n();
    let size = config.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial: Vec<Solution> = (0..size).map(|_| Solution::random(n, &mut rng)).collect();
    let mut population = Population::evaluate(instance, initial, 0)?;
    let mut evaluations = size;
    let mut history = Vec::new();
    let reached = |f: f64| config.target.is_some_and(|t| f >= t);

    loop {
        let (best_sol, best) = population.best();
        let mut stats = GenerationStats {
            generation: population.generation(),
            best,
            mean: population.mean_fitness(),
            entropy: None,
        };
        if population.generation() >= config.max_generations || reached(best) {
            history.push(stats);
            let best_sol = best_sol.clone();
            return Ok(FdaResult {
                best: best_sol,
                best_fitness: best,
                generations: population.generation(),
                evaluations,
                success: config.target.map(|t| best >= t),
                history,
                config: config.clone(),
            });
        }
        let selected = select(&population, &config.selection, &mut rng)?;
        let params = estimate(factorization, &selected, config.smoothing)?;
        stats.entropy = Some(params.entropy(factorization));
        history.push(stats);

        let mut next: Vec<Solution> = population
            .ranking()
            .into_iter()
            .take(config.elitism)
            .map(|i| population.solutions[i].clone())
            .collect();
        let elite_fitness: Vec<f64> = next.iter().map(|s| instance.evaluate_bits(s.bits())).collect();
        let offspring = sample(factorization, &params, size - config.elitism, &mut rng)?;
        let offspring_fitness: Vec<f64> = offspring.iter().map(|s| instance.evaluate_bits(s.bits())).collect();
        evaluations += offspring.len();
        next.extend(offspring);
        let fitness = elite_fitness.into_iter().chain(offspring_fitness).collect();
        population = Population::new(next, fitness, population.generation() + 1)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::junction::Factor;

    fn pop(fitness: &[f64]) -> Population {
        let sols = (0..fitness.len()).map(|i| Solution::from_index(i as u64, 2)).collect();
        Population::new(sols, fitness.to_vec(), 0).unwrap()
    }

    #[test]
    fn truncation_identity_and_half() {
        let p = pop(&[0.0, 1.0, 2.0, 3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let all = select(&p, &Selection::Truncation { ratio: 1.0 }, &mut rng).unwrap();
        assert_eq!(all.fitness(), &[3.0, 2.0, 1.0, 0.0]);
        let half = select(&p, &Selection::Truncation { ratio: 0.5 }, &mut rng).unwrap();
        assert_eq!(half.fitness(), &[3.0, 2.0]);
    }

    #[test]
    fn truncation_ties_keep_order() {
        let p = pop(&[1.0, 2.0, 2.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = select(&p, &Selection::Truncation { ratio: 0.25 }, &mut rng).unwrap();
        assert_eq!(s.solutions()[0], Solution::from_index(1, 2));
    }

    #[test]
    fn selection_probabilities_sum_to_one() {
        let p = pop(&[0.0, 1.0, 2.0, 3.0]);
        let t = selection_probabilities(&p, &Selection::Truncation { ratio: 0.5 });
        assert_eq!(t, vec![0.0, 0.0, 0.5, 0.5]);
        let b = selection_probabilities(&p, &Selection::Boltzmann { beta: 0.0, size: 4 });
        assert_eq!(b, vec![0.25; 4]);
    }

    #[test]
    fn boltzmann_zero_beta_is_uniform() {
        let p = pop(&[0.0, 10.0, 20.0, 30.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        for _ in 0..200 {
            let s = select(&p, &Selection::Boltzmann { beta: 0.0, size: 100 }, &mut rng).unwrap();
            for sol in s.solutions() {
                counts[sol.to_index() as usize] += 1;
            }
        }
        // 20000 draws, each count ~ Binomial(20000, 1/4): sd ≈ 61
        for c in counts {
            assert!((c as f64 - 5000.0).abs() < 4.0 * 61.3, "{counts:?}");
        }
    }

    #[test]
    fn estimate_degenerate_data() {
        let fz = Factorization::new(
            3,
            vec![
                Factor {
                    new: vec![0, 1],
                    conditioning: vec![],
                },
                Factor {
                    new: vec![2],
                    conditioning: vec![1],
                },
            ],
        )
        .unwrap();
        let sel = Population::new(vec![Solution::ones(3); 5], vec![0.0; 5], 0).unwrap();
        let params = estimate(&fz, &sel, 0.0).unwrap();
        assert_eq!(params.tables[0], vec![0.0, 0.0, 0.0, 1.0]);
        // context x1 = 0 was never seen: uniform fallback
        assert_eq!(params.tables[1], vec![0.5, 0.5, 0.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples = sample(&fz, &params, 50, &mut rng).unwrap();
        assert!(samples.iter().all(|s| *s == Solution::ones(3)));
        assert_eq!(model_probability(&fz, &params, &Solution::ones(3)).unwrap(), 1.0);
        assert_eq!(model_probability(&fz, &params, &Solution::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn estimate_counts_univariate() {
        let fz = Factorization::univariate(2);
        let sols = (0..4).map(|i| Solution::from_index(i, 2)).collect();
        let sel = Population::new(sols, vec![0.0; 4], 0).unwrap();
        let params = estimate(&fz, &sel, 0.0).unwrap();
        assert_eq!(params.tables, vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn heavy_smoothing_tends_to_uniform() {
        let fz = Factorization::univariate(3);
        let sel = Population::new(vec![Solution::ones(3); 10], vec![0.0; 10], 0).unwrap();
        let params = estimate(&fz, &sel, 1e9).unwrap();
        for t in &params.tables {
            assert!((t[0] - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_model_probability() {
        let fz = Factorization::univariate(5);
        let p = model_probability(&fz, &FactorParams::uniform(&fz), &Solution::zeros(5)).unwrap();
        assert_eq!(p, 1.0 / 32.0);
    }

    #[test]
    fn empty_selection_rejected() {
        assert!(Population::new(vec![], vec![], 0).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = FdaConfig::default();
        assert!(c.validate().is_ok());
        c.selection = Selection::Truncation { ratio: 0.0 };
        assert!(c.validate().is_err());
        c = FdaConfig {
            elitism: 500,
            ..FdaConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
