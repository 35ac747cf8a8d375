//! Words of bounded multiplicative weight in a free semigroup.
//!
//! A word `i_1 i_2 ... i_m` over an alphabet of size `r` has weight
//! `d_{i_1} * ... * d_{i_m}`; the empty word has weight 1. This module counts
//! such words exactly and evaluates the growth exponent and asymptotic
//! constants that govern the count.

use crate::error::{invalid, Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Default residual tolerance for [`solve_rho`].
pub const DEFAULT_RHO_TOL: f64 = 1e-12;
/// Bisection iteration cap shared by the root finders in this module.
pub const MAX_BISECTION_STEPS: usize = 200;
/// Largest weight cutoff accepted by [`CountTable::build`].
pub const MAX_WEIGHT_CUTOFF: u64 = 100_000_000;
const MAX_ENTRY: u64 = i64::MAX as u64;

/// Polarization degrees `d_1, ..., d_r`, each at least 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector(Vec<u64>);

impl WeightVector {
    pub fn new(d: Vec<u64>) -> Result<Self> {
        if d.is_empty() {
            return Err(invalid("weight vector must be nonempty"));
        }
        if let Some(bad) = d.iter().find(|&&x| x < 2) {
            return Err(invalid(format!("weight {bad} is below 2")));
        }
        if let Some(big) = d.iter().find(|&&x| x > MAX_ENTRY) {
            return Err(invalid(format!("weight {big} exceeds 2^63 - 1")));
        }
        Ok(WeightVector(d))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Number of generators `r`.
    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn min(&self) -> u64 {
        *self.0.iter().min().unwrap()
    }

    pub fn max(&self) -> u64 {
        *self.0.iter().max().unwrap()
    }

    /// `G(s) = sum_i d_i^(-s)`.
    pub fn g(&self, s: f64) -> f64 {
        self.0.iter().map(|&d| (-s * (d as f64).ln()).exp()).sum()
    }

    /// `G'(s) = -sum_i ln(d_i) d_i^(-s)`.
    pub fn g_prime(&self, s: f64) -> f64 {
        -self
            .0
            .iter()
            .map(|&d| {
                let l = (d as f64).ln();
                l * (-s * l).exp()
            })
            .sum::<f64>()
    }

    fn require_rank_two(&self) -> Result<()> {
        if self.rank() < 2 {
            return Err(invalid(
                "growth exponent needs at least two weights (G(s) = 1 has no positive root for r = 1)",
            ));
        }
        Ok(())
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Whether all weights are powers of one base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CyclicClassification {
    Acyclic,
    /// `d_i = base^exponents[i]`, with `gcd(exponents) = 1`.
    Cyclic { base: u64, exponents: Vec<u32> },
}

impl CyclicClassification {
    pub fn is_cyclic(&self) -> bool {
        matches!(self, CyclicClassification::Cyclic { .. })
    }
}

impl fmt::Display for CyclicClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CyclicClassification::Acyclic => write!(f, "acyclic"),
            CyclicClassification::Cyclic { base, exponents } => {
                let e: Vec<String> = exponents.iter().map(|a| a.to_string()).collect();
                write!(f, "cyclic(base={base};exponents={})", e.join(" "))
            }
        }
    }
}

/// The unique `rho > 0` with `G(rho) = 1`, and how closely it was met.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthExponent {
    pub rho: f64,
    /// `|G(rho) - 1|`.
    pub residual: f64,
}

/// Solves `sum_i d_i^(-s) = 1` by bisection on `[0, ln r / ln min d]`.
///
/// `G` is strictly decreasing with `G(0) = r > 1` and `G <= 1` at the right
/// endpoint, so the bracket always holds. Bisection runs until the bracket
/// collapses to adjacent floats (or the iteration cap), and the result is
/// rejected if the residual still exceeds `tol`.
pub fn solve_rho(d: &WeightVector, tol: f64) -> Result<GrowthExponent> {
    d.require_rank_two()?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let mut lo = 0.0_f64;
    let mut hi = (d.rank() as f64).ln() / (d.min() as f64).ln();
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = d.g(mid);
        if gm == 1.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if gm > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick whichever endpoint has the smaller residual
    let (rl, rh) = ((d.g(lo) - 1.0).abs(), (d.g(hi) - 1.0).abs());
    let (rho, residual) = if rl <= rh { (lo, rl) } else { (hi, rh) };
    if residual > tol {
        return Err(Error::NoConvergence(format!(
            "growth exponent residual {residual:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(GrowthExponent { rho, residual })
}

/// Prime factorization by trial division, ascending primes.
pub(crate) fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Decides cyclicity from prime exponent vectors: the vectors must share
/// their support and be pairwise proportional.
pub fn classify(d: &WeightVector) -> CyclicClassification {
    let facts: Vec<Vec<(u64, u32)>> = d.as_slice().iter().map(|&x| factorize(x)).collect();
    let multiplier = |f: &[(u64, u32)]| f.iter().fold(0u32, |g, &(_, e)| g.gcd(&e));
    // primitive direction of the first exponent vector
    let k0 = multiplier(&facts[0]);
    let primitive: Vec<(u64, u32)> = facts[0].iter().map(|&(p, e)| (p, e / k0)).collect();
    let mut multipliers = Vec::with_capacity(facts.len());
    for f in &facts {
        let k = multiplier(f);
        let dir: Vec<(u64, u32)> = f.iter().map(|&(p, e)| (p, e / k)).collect();
        if dir != primitive {
            return CyclicClassification::Acyclic;
        }
        multipliers.push(k);
    }
    let g = multipliers.iter().fold(0u32, |acc, &k| acc.gcd(&k));
    let base = primitive
        .iter()
        .fold(1u64, |acc, &(p, e)| acc * p.pow(e * g));
    CyclicClassification::Cyclic {
        base,
        exponents: multipliers.iter().map(|k| k / g).collect(),
    }
}

/// Exact counts `a_n` of words of weight exactly `n`, for all `n` up to a
/// cutoff, with their running totals.
///
/// Only weights that actually occur (products of the `d_i`) are stored; every
/// other `a_n` is zero.
#[derive(Clone, Debug)]
pub struct CountTable {
    cutoff: u64,
    include_identity: bool,
    weights: Vec<u64>,
    counts: Vec<BigUint>,
    cumulative: Vec<BigUint>,
}

impl CountTable {
    /// Builds the table from `a_1 = 1` and `a_n = sum_{i : d_i | n} a_{n/d_i}`.
    ///
    /// The recurrence always runs with the empty word present; when
    /// `include_identity` is false the weight-1 entry is reported as zero
    /// afterwards.
    pub fn build(d: &WeightVector, cutoff: u64, include_identity: bool) -> Result<Self> {
        if cutoff == 0 {
            return Err(invalid("weight cutoff must be at least 1"));
        }
        if cutoff > MAX_WEIGHT_CUTOFF {
            return Err(Error::ResourceLimit(format!(
                "weight cutoff {cutoff} exceeds the table limit {MAX_WEIGHT_CUTOFF}"
            )));
        }
        let distinct: BTreeSet<u64> = d.as_slice().iter().copied().collect();
        let mut reachable = BTreeSet::from([1u64]);
        let mut frontier = vec![1u64];
        while let Some(w) = frontier.pop() {
            for &di in &distinct {
                if let Some(next) = w.checked_mul(di) {
                    if next <= cutoff && reachable.insert(next) {
                        frontier.push(next);
                    }
                }
            }
        }
        let weights: Vec<u64> = reachable.into_iter().collect();
        let index: HashMap<u64, usize> = weights.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut counts: Vec<BigUint> = Vec::with_capacity(weights.len());
        for &w in &weights {
            if w == 1 {
                counts.push(BigUint::from(1u32));
                continue;
            }
            let mut a = BigUint::zero();
            for &di in d.as_slice() {
                if w % di == 0 {
                    if let Some(&j) = index.get(&(w / di)) {
                        a += &counts[j];
                    }
                }
            }
            counts.push(a);
        }
        if !include_identity {
            counts[0] = BigUint::zero();
        }
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut acc = BigUint::zero();
        for a in &counts {
            acc += a;
            cumulative.push(acc.clone());
        }
        Ok(CountTable {
            cutoff,
            include_identity,
            weights,
            counts,
            cumulative,
        })
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn include_identity(&self) -> bool {
        self.include_identity
    }

    /// `a_n`, the number of words of weight exactly `n`.
    pub fn a(&self, n: u64) -> BigUint {
        match self.weights.binary_search(&n) {
            Ok(i) => self.counts[i].clone(),
            Err(_) => BigUint::zero(),
        }
    }

    /// Number of words of weight at most `x` (for `x` up to the cutoff).
    pub fn count_up_to(&self, x: u64) -> BigUint {
        let k = self.weights.partition_point(|&w| w <= x.min(self.cutoff));
        if k == 0 {
            BigUint::zero()
        } else {
            self.cumulative[k - 1].clone()
        }
    }

    /// Nonzero `(n, a_n)` pairs in increasing `n`.
    pub fn nonzero(&self) -> impl Iterator<Item = (u64, &BigUint)> + '_ {
        self.weights
            .iter()
            .copied()
            .zip(self.counts.iter())
            .filter(|(_, a)| !a.is_zero())
    }
}

/// Exact number of words of weight at most `x`.
pub fn count_exact(d: &WeightVector, x: u64, include_identity: bool) -> Result<BigUint> {
    Ok(CountTable::build(d, x, include_identity)?.count_up_to(x))
}

/// Leading constant `c = -1 / (rho G'(rho))` of the acyclic asymptotic
/// `#{|w| <= X} ~ c X^rho`.
pub fn acyclic_constant(d: &WeightVector, rho: &GrowthExponent) -> Result<f64> {
    if classify(d).is_cyclic() {
        return Err(invalid(
            "cyclic weights have no single asymptotic constant; use cyclic_growth",
        ));
    }
    d.require_rank_two()?;
    Ok(-1.0 / (rho.rho * d.g_prime(rho.rho)))
}

/// Growth data for cyclic weights `d_i = base^{a_i}`: the number of words of
/// weight at most `base^L` is asymptotic to `constant * theta^(-L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicGrowth {
    pub base: u64,
    pub exponents: Vec<u32>,
    /// Root of `1 - sum x^{a_i}` in `(0, 1)`.
    pub theta: f64,
    pub constant: f64,
    /// `-ln(theta) / ln(base)`, so that `theta = base^(-rho)`.
    pub rho: f64,
}

fn cyclic_parts(d: &WeightVector) -> Result<(u64, Vec<u32>)> {
    match classify(d) {
        CyclicClassification::Cyclic { base, exponents } => Ok((base, exponents)),
        CyclicClassification::Acyclic => Err(invalid("weights are acyclic")),
    }
}

pub fn cyclic_growth(d: &WeightVector) -> Result<CyclicGrowth> {
    d.require_rank_two()?;
    let (base, exponents) = cyclic_parts(d)?;
    let g = |x: f64| 1.0 - exponents.iter().map(|&a| x.powi(a as i32)).sum::<f64>();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    let g_prime: f64 = -exponents
        .iter()
        .map(|&a| a as f64 * theta.powi(a as i32 - 1))
        .sum::<f64>();
    let constant = -1.0 / (theta * (1.0 - theta) * g_prime);
    let rho = -theta.ln() / (base as f64).ln();
    Ok(CyclicGrowth {
        base,
        exponents,
        theta,
        constant,
        rho,
    })
}

/// Exact number of words of weight at most `base^L`, from
/// `b_L = 1 + sum_i b_{L - a_i}` with `b_{<0} = 0`.
pub fn cyclic_counts(d: &WeightVector, level: usize) -> Result<BigUint> {
    let (_, exponents) = cyclic_parts(d)?;
    let mut b: Vec<BigUint> = Vec::with_capacity(level + 1);
    for l in 0..=level {
        let mut v = BigUint::from(1u32);
        for &a in &exponents {
            if let Some(prev) = l.checked_sub(a as usize) {
                v += &b[prev];
            }
        }
        b.push(v);
    }
    Ok(b.pop().unwrap())
}

/// Partial sum `sum_{n <= n_max} a_n n^(-s)` of the weight Dirichlet series,
/// which converges to `1 / (1 - G(s))` for `s > rho`.
pub fn dirichlet_eval(d: &WeightVector, s: f64, n_max: u64, margin: f64) -> Result<f64> {
    if !(margin > 0.0) {
        return Err(invalid("margin must be positive"));
    }
    let rho = solve_rho(d, DEFAULT_RHO_TOL)?;
    if !(s > rho.rho + margin) {
        return Err(invalid(format!(
            "s = {s} is not beyond rho + margin = {}",
            rho.rho + margin
        )));
    }
    let table = CountTable::build(d, n_max, true)?;
    Ok(table
        .nonzero()
        .map(|(n, a)| a.to_f64().unwrap_or(f64::INFINITY) * (-s * (n as f64).ln()).exp())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(d: &[u64]) -> WeightVector {
        WeightVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![2, 1]).is_err());
        assert!(WeightVector::new(vec![u64::MAX]).is_err());
        assert!(matches!(
            solve_rho(&wv(&[5]), 1e-12),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn rho_examples() {
        let r = solve_rho(&wv(&[8, 8]), 1e-12).unwrap();
        assert!((r.rho - 1.0 / 3.0).abs() < 1e-12);
        let r = solve_rho(&wv(&[2, 2]), 1e-12).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn word_count_examples() {
        assert_eq!(count_exact(&wv(&[2, 3]), 10, true).unwrap(), 8u32.into());
        assert_eq!(count_exact(&wv(&[2, 3]), 10, false).unwrap(), 7u32.into());
        assert_eq!(count_exact(&wv(&[2, 2]), 8, true).unwrap(), 15u32.into());
        assert_eq!(count_exact(&wv(&[5, 7]), 4, true).unwrap(), 1u32.into());
        assert!(matches!(
            count_exact(&wv(&[2, 3]), MAX_WEIGHT_CUTOFF + 1, true),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn table_recurrence_and_identity_flag() {
        let d = wv(&[2, 3, 2]);
        let with = CountTable::build(&d, 200, true).unwrap();
        let without = CountTable::build(&d, 200, false).unwrap();
        assert_eq!(with.a(1), 1u32.into());
        assert_eq!(without.a(1), 0u32.into());
        for n in 2..=200u64 {
            let expect: BigUint = d
                .as_slice()
                .iter()
                .filter(|&&di| n % di == 0)
                .map(|&di| with.a(n / di))
                .sum();
            assert_eq!(with.a(n), expect, "n = {n}");
            assert_eq!(without.a(n), with.a(n));
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(&wv(&[4, 8])),
            CyclicClassification::Cyclic { base: 2, exponents: vec![2, 3] }
        );
        assert_eq!(classify(&wv(&[2, 3])), CyclicClassification::Acyclic);
        assert_eq!(
            classify(&wv(&[6, 36, 216])),
            CyclicClassification::Cyclic { base: 6, exponents: vec![1, 2, 3] }
        );
        assert_eq!(
            classify(&wv(&[4, 16])),
            CyclicClassification::Cyclic { base: 4, exponents: vec![1, 2] }
        );
        assert_eq!(classify(&wv(&[12, 18])), CyclicClassification::Acyclic);
        assert_eq!(
            classify(&wv(&[7])),
            CyclicClassification::Cyclic { base: 7, exponents: vec![1] }
        );
    }

    #[test]
    fn constant_errors_on_wrong_branch() {
        let cyc = wv(&[4, 8]);
        let rho = solve_rho(&cyc, 1e-12).unwrap();
        assert!(acyclic_constant(&cyc, &rho).is_err());
        assert!(cyclic_growth(&wv(&[2, 3])).is_err());
        assert!(cyclic_counts(&wv(&[2, 3]), 3).is_err());
    }

    #[test]
    fn cyclic_small_cases() {
        let g = cyclic_growth(&wv(&[2, 2])).unwrap();
        assert_eq!(g.theta, 0.5);
        assert!((g.rho - 1.0).abs() < 1e-12);
        assert!((g.constant - 2.0).abs() < 1e-12);
        assert_eq!(cyclic_counts(&wv(&[2, 2]), 3).unwrap(), 15u32.into());
        assert_eq!(cyclic_counts(&wv(&[4, 8]), 0).unwrap(), 1u32.into());
    }

    #[test]
    fn dirichlet_rejects_divergent_region() {
        assert!(dirichlet_eval(&wv(&[2, 3]), 0.5, 100, 0.01).is_err());
        assert!(dirichlet_eval(&wv(&[2, 3]), 0.79, 100, 0.01).is_err());
        assert!(dirichlet_eval(&wv(&[2, 3]), 1.0, 100, 0.0).is_err());
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert_eq!(factorize(2), vec![(2, 1)]);
    }
}
