//! Exhaustive statistics over the whole search space: hyperplane (factor)
//! marginal tables, the Boltzmann distribution, global optima and order-j
//! deception diagnostics.
//!
//! Every routine enumerates all `2^n` solutions and refuses instances above
//! an enumeration limit instead of sampling. Accumulation is sequential, so
//! results are reproducible bit for bit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::adf::{config_index, AdfInstance, Solution};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_LIMIT: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StatisticKind {
    /// Sum of fitness over all solutions sharing the configuration.
    FitnessSum,
    /// `FitnessSum / 2^(n - j)`.
    FitnessMean,
    /// Marginal probability of the configuration under the Boltzmann distribution.
    BoltzmannMarginal { beta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalTable {
    pub scope: Vec<usize>,
    pub kind: StatisticKind,
    /// One value per configuration, first scope variable most significant.
    pub values: Vec<f64>,
}

impl MarginalTable {
    pub fn order(&self) -> usize {
        self.scope.len()
    }
}

fn check_limit(instance: &AdfInstance, limit: usize) -> Result<()> {
    if instance.n() > limit || instance.n() >= 63 {
        return Err(Error::Capacity { n: instance.n(), limit });
    }
    Ok(())
}

fn check_scope(instance: &AdfInstance, scope: &[usize]) -> Result<()> {
    if scope.is_empty() {
        return Err(Error::Structural("marginal scope is empty".into()));
    }
    for (i, &v) in scope.iter().enumerate() {
        if v >= instance.n() {
            return Err(Error::Structural(format!(
                "scope index {v} out of range for n = {}",
                instance.n()
            )));
        }
        if scope[..i].contains(&v) {
            return Err(Error::Structural(format!("duplicate variable {v} in scope")));
        }
    }
    Ok(())
}

/// Calls `visit(bits, fitness)` for every solution in index order.
fn for_each_solution(instance: &AdfInstance, mut visit: impl FnMut(&[u8], f64)) {
    let n = instance.n();
    let mut bits = vec![0u8; n];
    let total = 1u64 << n;
    for idx in 0..total {
        if idx > 0 {
            // binary increment, x_{n-1} least significant
            let mut pos = n;
            while pos > 0 {
                pos -= 1;
                bits[pos] ^= 1;
                if bits[pos] == 1 {
                    break;
                }
            }
        }
        let f = instance.evaluate_bits(&bits);
        visit(&bits, f);
    }
}

fn max_fitness(instance: &AdfInstance) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_solution(instance, |_, f| best = best.max(f));
    best
}

/// Tables for several scopes from a single pass over the search space.
pub fn enumerate_marginals(
    instance: &AdfInstance,
    scopes: &[Vec<usize>],
    kind: StatisticKind,
    limit: usize,
) -> Result<Vec<MarginalTable>> {
    check_limit(instance, limit)?;
    for scope in scopes {
        check_scope(instance, scope)?;
    }
    let mut acc: Vec<Vec<f64>> = scopes.iter().map(|s| vec![0.0; 1 << s.len()]).collect();
    match kind {
        StatisticKind::FitnessSum | StatisticKind::FitnessMean => {
            for_each_solution(instance, |bits, f| {
                for (table, scope) in acc.iter_mut().zip(scopes) {
                    table[config_index(bits, scope)] += f;
                }
            });
            if kind == StatisticKind::FitnessMean {
                for (table, scope) in acc.iter_mut().zip(scopes) {
                    let count = (1u64 << (instance.n() - scope.len())) as f64;
                    table.iter_mut().for_each(|v| *v /= count);
                }
            }
        }
        StatisticKind::BoltzmannMarginal { beta } => {
            check_beta(beta)?;
            let fmax = max_fitness(instance);
            let mut z = NeumaierSum::default();
            let mut comp: Vec<Vec<NeumaierSum>> = scopes
                .iter()
                .map(|s| vec![NeumaierSum::default(); 1 << s.len()])
                .collect();
            for_each_solution(instance, |bits, f| {
                let w = boltzmann_weight(beta, f, fmax);
                z.add(w);
                for (table, scope) in comp.iter_mut().zip(scopes) {
                    table[config_index(bits, scope)].add(w);
                }
            });
            let z = z.total();
            for (table, sums) in acc.iter_mut().zip(comp) {
                for (v, s) in table.iter_mut().zip(sums) {
                    *v = s.total() / z;
                }
            }
        }
    }
    Ok(scopes
        .iter()
        .zip(acc)
        .map(|(scope, values)| MarginalTable {
            scope: scope.clone(),
            kind,
            values,
        })
        .collect())
}

pub fn enumerate_marginal(
    instance: &AdfInstance,
    scope: &[usize],
    kind: StatisticKind,
    limit: usize,
) -> Result<MarginalTable> {
    Ok(enumerate_marginals(instance, &[scope.to_vec()], kind, limit)?.remove(0))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Config(format!(
            "beta must be a finite non-negative number, got {beta}"
        )));
    }
    Ok(())
}

#[inline]
fn boltzmann_weight(beta: f64, f: f64, fmax: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else {
        (beta * (f - fmax)).exp()
    }
}

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `p(x) ∝ exp(beta · f(x))` over all `2^n` solutions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoltzmannDistribution {
    pub beta: f64,
    pub n: usize,
    /// Indexed by [`Solution::to_index`].
    pub probabilities: Vec<f64>,
}

impl BoltzmannDistribution {
    pub fn probability(&self, solution: &Solution) -> f64 {
        self.probabilities[solution.to_index() as usize]
    }

    /// Solutions of maximal probability.
    pub fn modes(&self) -> Vec<Solution> {
        let best = self.probabilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == best)
            .map(|(i, _)| Solution::from_index(i as u64, self.n))
            .collect()
    }
}

pub fn boltzmann(instance: &AdfInstance, beta: f64, limit: usize) -> Result<BoltzmannDistribution> {
    check_limit(instance, limit)?;
    check_beta(beta)?;
    let fmax = max_fitness(instance);
    let mut weights = Vec::with_capacity(1 << instance.n());
    let mut z = NeumaierSum::default();
    for_each_solution(instance, |_, f| {
        let w = boltzmann_weight(beta, f, fmax);
        z.add(w);
        weights.push(w);
    });
    let z = z.total();
    weights.iter_mut().for_each(|w| *w /= z);
    Ok(BoltzmannDistribution {
        beta,
        n: instance.n(),
        probabilities: weights,
    })
}

/// Every configuration attaining the table maximum, ascending.
pub fn max_configs(table: &MarginalTable) -> Vec<usize> {
    let best = table.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    table
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .map(|(c, _)| c)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorVerdict {
    /// 1-based position of the scope in the request.
    pub label: usize,
    pub scope: Vec<usize>,
    pub argmax: Vec<usize>,
    pub reference_config: usize,
    pub deceptive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeceptionReport {
    pub reference: Solution,
    pub kind: StatisticKind,
    pub factors: Vec<FactorVerdict>,
}

impl DeceptionReport {
    /// 1-based labels of the deceptive scopes.
    pub fn deceptive_labels(&self) -> Vec<usize> {
        self.factors.iter().filter(|f| f.deceptive).map(|f| f.label).collect()
    }
}

/// Flags a scope as deceptive when none of its best configurations equals
/// the projection of `reference` onto it.
pub fn deception_report(
    instance: &AdfInstance,
    scopes: &[Vec<usize>],
    reference: &Solution,
    kind: StatisticKind,
    limit: usize,
) -> Result<DeceptionReport> {
    if reference.len() != instance.n() {
        return Err(Error::Structural(format!(
            "reference solution has length {} but n = {}",
            reference.len(),
            instance.n()
        )));
    }
    let tables = enumerate_marginals(instance, scopes, kind, limit)?;
    let factors = tables
        .iter()
        .enumerate()
        .map(|(i, table)| {
            let argmax = max_configs(table);
            let reference_config = config_index(reference.bits(), &table.scope);
            FactorVerdict {
                label: i + 1,
                scope: table.scope.clone(),
                deceptive: !argmax.contains(&reference_config),
                argmax,
                reference_config,
            }
        })
        .collect();
    Ok(DeceptionReport {
        reference: reference.clone(),
        kind,
        factors,
    })
}

/// All global maxima, in index order, and their value.
pub fn exhaustive_optimum(instance: &AdfInstance, limit: usize) -> Result<(Vec<Solution>, f64)> {
    check_limit(instance, limit)?;
    let mut best = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    for_each_solution(instance, |bits, f| {
        if f > best {
            best = f;
            argmax.clear();
        }
        if f == best {
            argmax.push(Solution::new(bits.to_vec()).expect("enumerated bits are binary"));
        }
    });
    Ok((argmax, best))
}

/// Bit string of configuration `config` of a scope of size `order`.
pub fn config_string(config: usize, order: usize) -> String {
    (0..order)
        .map(|p| if (config >> (order - 1 - p)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// TSV with one row per configuration and one column per table. Tables are
/// grouped by order; groups are separated by a blank line.
pub fn tables_to_tsv(tables: &[MarginalTable], labels: &[String]) -> String {
    assert_eq!(tables.len(), labels.len(), "one label per table");
    let mut orders: Vec<usize> = tables.iter().map(MarginalTable::order).collect();
    orders.sort_unstable();
    orders.dedup();
    let mut out = String::new();
    for (g, order) in orders.into_iter().enumerate() {
        if g > 0 {
            out.push('\n');
        }
        let group: Vec<usize> = (0..tables.len()).filter(|&i| tables[i].order() == order).collect();
        out.push_str("config");
        for &i in &group {
            write!(out, "\t{}", labels[i]).unwrap();
        }
        out.push('\n');
        for c in 0..1usize << order {
            out.push_str(&config_string(c, order));
            for &i in &group {
                write!(out, "\t{}", format_value(tables[i].values[c])).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// Scope label like `(9,0,1)`.
pub fn scope_label(scope: &[usize]) -> String {
    format!("({})", scope.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
}
