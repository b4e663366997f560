//! Additively decomposed pseudo-Boolean functions.
//!
//! An instance is a sum of subfunctions, each defined on a small ordered
//! scope of binary variables through an explicit codomain table. Codomain
//! entries are indexed by the scope configuration read as a binary number
//! with the first scope variable as the most significant bit, so the
//! codomain `<1,1,0,0,1,0,0,1>` maps `000`, `001`, `100` and `111` to 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment of the n binary variables, zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solution(Vec<u8>);

impl Solution {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Structural(format!(
                "bit {pos} has value {} (expected 0 or 1)",
                bits[pos]
            )));
        }
        Ok(Solution(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Solution(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        Solution(vec![1; n])
    }

    /// Uniformly random bit string.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Solution((0..n).map(|_| rng.random_range(0..=1u8)).collect())
    }

    /// Solution whose bit string, read with x0 first, is the binary form of `index`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Solution((0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect())
    }

    /// Inverse of [`Solution::from_index`].
    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: u8) {
        debug_assert!(value <= 1);
        self.0[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Solution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Structural(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Solution)
    }
}

impl Serialize for Solution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Solution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Configuration index of `bits` restricted to `scope`, first scope position most significant.
///
/// Indices are not checked; see [`project`] for the validating version.
#[inline]
pub fn config_index(bits: &[u8], scope: &[usize]) -> usize {
    scope.iter().fold(0usize, |acc, &v| (acc << 1) | bits[v] as usize)
}

/// Writes configuration `config` of `scope` into `bits`.
#[inline]
pub fn write_config(bits: &mut [u8], scope: &[usize], config: usize) {
    let k = scope.len();
    for (pos, &v) in scope.iter().enumerate() {
        bits[v] = ((config >> (k - 1 - pos)) & 1) as u8;
    }
}

/// Projection of a solution onto a scope, as a configuration index in `[0, 2^|scope|)`.
pub fn project(solution: &Solution, scope: &[usize]) -> Result<usize> {
    if let Some(&bad) = scope.iter().find(|&&v| v >= solution.len()) {
        return Err(Error::Structural(format!(
            "scope index {bad} out of range for a solution of length {}",
            solution.len()
        )));
    }
    if scope.len() >= usize::BITS as usize {
        return Err(Error::Structural(format!("scope of size {} is too large", scope.len())));
    }
    Ok(config_index(solution.bits(), scope))
}

/// How much of a problem's information is available to the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    White,
    Gray,
    Black,
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Visibility::White => "white",
            Visibility::Gray => "gray",
            Visibility::Black => "black",
        })
    }
}

impl FromStr for Visibility {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "white" => Ok(Visibility::White),
            "gray" | "grey" => Ok(Visibility::Gray),
            "black" => Ok(Visibility::Black),
            other => Err(Error::Config(format!("unknown visibility {other:?}"))),
        }
    }
}

/// White-Gray-Black classification: visibility of the structure (definition
/// sets) and of the subfunctions themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Wgb {
    pub structure: Visibility,
    pub subfunctions: Visibility,
}

impl Default for Wgb {
    fn default() -> Self {
        Wgb {
            structure: Visibility::White,
            subfunctions: Visibility::White,
        }
    }
}

/// One term of an additive decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subfunction {
    scope: Vec<usize>,
    codomain: Vec<f64>,
}

impl Subfunction {
    pub fn new(scope: Vec<usize>, codomain: Vec<f64>) -> Result<Self> {
        if scope.is_empty() {
            return Err(Error::Structural("subfunction scope is empty".into()));
        }
        if scope.len() > 30 {
            return Err(Error::Structural(format!(
                "subfunction scope of size {} is too large for an explicit codomain",
                scope.len()
            )));
        }
        for (pos, v) in scope.iter().enumerate() {
            if scope[..pos].contains(v) {
                return Err(Error::Structural(format!("duplicate variable {v} in scope {scope:?}")));
            }
        }
        let expected = 1usize << scope.len();
        if codomain.len() != expected {
            return Err(Error::Structural(format!(
                "scope of size {} needs {expected} codomain values, got {}",
                scope.len(),
                codomain.len()
            )));
        }
        if let Some(bad) = codomain.iter().find(|v| !v.is_finite()) {
            return Err(Error::Structural(format!("non-finite codomain value {bad}")));
        }
        Ok(Subfunction { scope, codomain })
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn codomain(&self) -> &[f64] {
        &self.codomain
    }

    pub fn order(&self) -> usize {
        self.scope.len()
    }

    #[inline]
    pub fn value(&self, bits: &[u8]) -> f64 {
        self.codomain[config_index(bits, &self.scope)]
    }
}

/// An additively decomposed function `f(x) = Σ_i f_i(x restricted to s_i)`, maximized.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdfInstance {
    n: usize,
    subfunctions: Vec<Subfunction>,
    k_max: usize,
    wgb: Wgb,
    name: String,
}

impl AdfInstance {
    pub fn new(n: usize, subfunctions: Vec<Subfunction>) -> Result<Self> {
        Self::with_metadata(n, subfunctions, Wgb::default(), String::new())
    }

    pub fn with_metadata(n: usize, subfunctions: Vec<Subfunction>, wgb: Wgb, name: String) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("instance must have at least one variable".into()));
        }
        for (i, sub) in subfunctions.iter().enumerate() {
            if let Some(&bad) = sub.scope.iter().find(|&&v| v >= n) {
                return Err(Error::Structural(format!(
                    "subfunction {i} references variable {bad} but n = {n}"
                )));
            }
        }
        let k_max = subfunctions.iter().map(Subfunction::order).max().unwrap_or(0);
        Ok(AdfInstance {
            n,
            subfunctions,
            k_max,
            wgb,
            name,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subfunctions(&self) -> &[Subfunction] {
        &self.subfunctions
    }

    pub fn num_subfunctions(&self) -> usize {
        self.subfunctions.len()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn wgb(&self) -> Wgb {
        self.wgb
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn set_wgb(&mut self, wgb: Wgb) {
        self.wgb = wgb;
    }

    /// Fails unless the definition sets are fully known.
    pub fn require_white_structure(&self) -> Result<()> {
        match self.wgb.structure {
            Visibility::White => Ok(()),
            other => Err(Error::Visibility(format!(
                "operation needs white structure visibility, instance declares {other}"
            ))),
        }
    }

    /// Fails unless both structure and subfunction definitions are known.
    pub fn require_white_box(&self) -> Result<()> {
        self.require_white_structure()?;
        match self.wgb.subfunctions {
            Visibility::White => Ok(()),
            other => Err(Error::Visibility(format!(
                "operation needs white subfunction visibility, instance declares {other}"
            ))),
        }
    }

    pub fn evaluate(&self, solution: &Solution) -> Result<f64> {
        if solution.len() != self.n {
            return Err(Error::Structural(format!(
                "solution has length {} but the instance has n = {}",
                solution.len(),
                self.n
            )));
        }
        Ok(self.evaluate_bits(solution.bits()))
    }

    /// Unchecked evaluation; `bits.len()` must be at least `n`.
    #[inline]
    pub fn evaluate_bits(&self, bits: &[u8]) -> f64 {
        self.subfunctions.iter().map(|s| s.value(bits)).sum()
    }

    /// True when every codomain value is an integer.
    pub fn is_integer_valued(&self) -> bool {
        self.subfunctions
            .iter()
            .flat_map(|s| s.codomain.iter())
            .all(|v| v.fract() == 0.0)
    }

    /// Subfunction indices containing each variable.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (idx, sub) in self.subfunctions.iter().enumerate() {
            for &v in &sub.scope {
                inc[v].push(idx);
            }
        }
        inc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn project_examples() {
        let ones = Solution::ones(10);
        assert_eq!(project(&ones, &[1, 2, 3]).unwrap(), 7);
        let zeros = Solution::zeros(10);
        assert_eq!(project(&zeros, &[9, 0, 1]).unwrap(), 0);
        let x: Solution = "1010000000".parse().unwrap();
        assert_eq!(project(&x, &[0, 1, 2]).unwrap(), 5);
    }

    #[test]
    fn project_out_of_range() {
        let x = Solution::zeros(4);
        assert!(matches!(project(&x, &[1, 4]), Err(Error::Structural(_))));
    }

    #[test]
    fn single_term_evaluation() {
        let inst = AdfInstance::new(1, vec![Subfunction::new(vec![0], vec![0.0, 1.0]).unwrap()]).unwrap();
        assert_eq!(inst.evaluate(&Solution::ones(1)).unwrap(), 1.0);
        assert_eq!(inst.evaluate(&Solution::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_length_mismatch() {
        let inst = AdfInstance::new(3, vec![Subfunction::new(vec![0, 2], vec![0.0; 4]).unwrap()]).unwrap();
        assert!(matches!(inst.evaluate(&Solution::zeros(2)), Err(Error::Structural(_))));
    }

    #[test]
    fn subfunction_validation() {
        assert!(Subfunction::new(vec![0, 0], vec![0.0; 4]).is_err());
        assert!(Subfunction::new(vec![0, 1, 2], vec![0.0; 7]).is_err());
        assert!(Subfunction::new(vec![], vec![0.0]).is_err());
        assert!(AdfInstance::new(3, vec![Subfunction::new(vec![0, 3], vec![0.0; 4]).unwrap()]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let x: Solution = "0110010011".parse().unwrap();
        assert_eq!(Solution::from_index(x.to_index(), 10), x);
        assert_eq!(x.to_string(), "0110010011");
    }

    #[test]
    fn k_max_tracks_largest_scope() {
        let inst = AdfInstance::new(
            4,
            vec![
                Subfunction::new(vec![0], vec![0.0; 2]).unwrap(),
                Subfunction::new(vec![1, 2, 3], vec![0.0; 8]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(inst.k_max(), 3);
    }

    #[test]
    fn visibility_checks() {
        let mut inst = AdfInstance::new(1, vec![Subfunction::new(vec![0], vec![0.0, 1.0]).unwrap()]).unwrap();
        assert!(inst.require_white_structure().is_ok());
        inst.set_wgb(Wgb {
            structure: Visibility::Gray,
            subfunctions: Visibility::White,
        });
        assert!(matches!(inst.require_white_structure(), Err(Error::Visibility(_))));
    }
}
