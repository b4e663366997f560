//! Instance families: adjacent (cyclic and acyclic) landscapes, random
//! scopes, separable blocks and the ten-variable worked example.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adf::{AdfInstance, Subfunction, Wgb};
use crate::error::{Error, Result};
use crate::worked_example;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Scopes `{i, i+1, …, i+k-1} mod n` for `i = 0..n`.
    AdjacentCyclic,
    /// Scopes `{i, …, i+k-1}` for `i = 0..=n-k`.
    AdjacentAcyclic,
    /// `m` scopes of `k` distinct variables drawn uniformly.
    RandomScopes,
    /// Disjoint consecutive blocks of size `k`.
    Separable,
    /// The fixed ten-variable cyclic landscape with four optima per subfunction.
    PaperExample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "seed")]
pub enum CodomainSource {
    /// Values drawn from U[0, 1).
    RandomUniform(u64),
    /// Value 1 on the all-ones configuration and on three other random
    /// configurations, 0 elsewhere.
    FourLocalOptima(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub codomain: CodomainSource,
    /// Drives scope sampling for [`GeneratorKind::RandomScopes`].
    pub seed: u64,
}

impl GeneratorSpec {
    /// Spec with `m` set to the value the family requires.
    pub fn new(kind: GeneratorKind, n: usize, k: usize, codomain: CodomainSource, seed: u64) -> Self {
        let m = match kind {
            GeneratorKind::AdjacentCyclic => n,
            GeneratorKind::AdjacentAcyclic => (n + 1).saturating_sub(k),
            GeneratorKind::Separable => n.checked_div(k).unwrap_or(0),
            GeneratorKind::RandomScopes => n,
            GeneratorKind::PaperExample => 10,
        };
        GeneratorSpec {
            kind,
            n,
            k,
            m,
            codomain,
            seed,
        }
    }

    pub fn paper_example() -> Self {
        GeneratorSpec {
            kind: GeneratorKind::PaperExample,
            n: 10,
            k: 3,
            m: 10,
            codomain: CodomainSource::FourLocalOptima(0),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == GeneratorKind::PaperExample {
            return Ok(());
        }
        let GeneratorSpec { n, k, m, .. } = *self;
        if n == 0 || k == 0 {
            return Err(Error::Config("n and k must be positive".into()));
        }
        if k > n {
            return Err(Error::Config(format!("k = {k} exceeds n = {n}")));
        }
        if k > 20 {
            return Err(Error::Config(format!("k = {k} is too large for explicit codomains")));
        }
        if matches!(self.codomain, CodomainSource::FourLocalOptima(_)) && k < 2 {
            return Err(Error::Config("four local optima need k >= 2".into()));
        }
        match self.kind {
            GeneratorKind::AdjacentCyclic if m != n => Err(Error::Config(format!(
                "adjacent cyclic landscapes need m = n, got m = {m}, n = {n}"
            ))),
            GeneratorKind::AdjacentAcyclic if m != n - k + 1 => Err(Error::Config(format!(
                "adjacent acyclic landscapes need m = n - k + 1 = {}, got {m}",
                n - k + 1
            ))),
            GeneratorKind::Separable if n % k != 0 => Err(Error::Config(format!(
                "separable blocks need k | n, got n = {n}, k = {k}"
            ))),
            GeneratorKind::Separable if m != n / k => Err(Error::Config(format!(
                "separable blocks need m = n / k = {}, got {m}",
                n / k
            ))),
            GeneratorKind::RandomScopes if m == 0 => Err(Error::Config("random scopes need m >= 1".into())),
            _ => Ok(()),
        }
    }
}

/// Deterministic instance for a fixed spec.
pub fn generate(spec: &GeneratorSpec) -> Result<AdfInstance> {
    spec.validate()?;
    if spec.kind == GeneratorKind::PaperExample {
        return Ok(worked_example::instance());
    }
    let scopes = scopes_for(spec);
    let (mut rng, four_optima) = match spec.codomain {
        CodomainSource::RandomUniform(seed) => (ChaCha8Rng::seed_from_u64(seed), false),
        CodomainSource::FourLocalOptima(seed) => (ChaCha8Rng::seed_from_u64(seed), true),
    };
    let subfunctions = scopes
        .into_iter()
        .map(|scope| {
            let size = 1usize << scope.len();
            let codomain = if four_optima {
                four_optima_codomain(size, &mut rng)
            } else {
                (0..size).map(|_| rng.random::<f64>()).collect()
            };
            Subfunction::new(scope, codomain)
        })
        .collect::<Result<Vec<_>>>()?;
    let name = format!(
        "{}-n{}-k{}-m{}-seed{}",
        serde_json::to_value(spec.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
        spec.n,
        spec.k,
        spec.m,
        spec.seed
    );
    AdfInstance::with_metadata(spec.n, subfunctions, Wgb::default(), name)
}

fn scopes_for(spec: &GeneratorSpec) -> Vec<Vec<usize>> {
    let GeneratorSpec { n, k, m, .. } = *spec;
    match spec.kind {
        GeneratorKind::AdjacentCyclic => (0..n).map(|i| (0..k).map(|j| (i + j) % n).collect()).collect(),
        GeneratorKind::AdjacentAcyclic => (0..=n - k).map(|i| (i..i + k).collect()).collect(),
        GeneratorKind::Separable => (0..n / k).map(|b| (b * k..(b + 1) * k).collect()).collect(),
        GeneratorKind::RandomScopes => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            (0..m)
                .map(|_| {
                    let mut scope = sample(&mut rng, n, k).into_vec();
                    scope.sort_unstable();
                    scope
                })
                .collect()
        }
        GeneratorKind::PaperExample => unreachable!("handled by generate"),
    }
}

fn four_optima_codomain(size: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut codomain = vec![0.0; size];
    codomain[size - 1] = 1.0;
    let others = 3.min(size - 1);
    for idx in sample(rng, size - 1, others) {
        codomain[idx] = 1.0;
    }
    codomain
}
