//! Partitions, types, irrep dimensions and characters for `U(d)` and `S_n`.
//!
//! Dimension and multinomial formulas use exact big integers. Characters of
//! `U(d)` are evaluated in floating point on the unit circle.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::EigenphaseList;

/// Two eigenvalues closer than this are treated as coincident.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A non-increasing tuple of non-negative integers padded with zeros to the
/// ambient dimension `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition whose ambient dimension is `parts.len()`.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not non-increasing")));
        }
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        Ok(Self { parts })
    }

    /// Pads `parts` with zeros to length `d`; fails if it has more than `d`
    /// nonzero parts.
    pub fn with_dimension(parts: &[usize], d: usize) -> Result<Self> {
        let mut p: Vec<usize> = parts.to_vec();
        while p.last() == Some(&0) {
            p.pop();
        }
        if p.len() > d {
            return Err(Error::InvalidPartition(format!(
                "{parts:?} has more than {d} nonzero parts"
            )));
        }
        p.resize(d, 0);
        Self::new(p)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Ambient dimension (padded length).
    pub fn d(&self) -> usize {
        self.parts.len()
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.parts.iter().take_while(|&&p| p > 0).count()
    }

    pub fn nonzero_parts(&self) -> &[usize] {
        &self.parts[..self.length()]
    }

    /// Shifted parts `λ_i + d − i` (1-based `i`), strictly decreasing.
    pub fn shifted(&self) -> Vec<usize> {
        let d = self.d();
        self.parts.iter().enumerate().map(|(i, &p)| p + d - 1 - i).collect()
    }

    /// `λ / n`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.parts.iter().map(|&p| p as f64 / n).collect()
    }

    /// Natural-log Shannon entropy of `λ / n`.
    pub fn entropy(&self) -> f64 {
        -self
            .frequencies()
            .into_iter()
            .filter(|&f| f > 0.0)
            .map(|f| f * f.ln())
            .sum::<f64>()
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

/// Every partition of `n` with at most `d` parts, padded to length `d`.
pub fn partitions(n: usize, d: usize) -> Vec<Partition> {
    fn go(rem: usize, max: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for p in (0..=rem.min(max)).rev() {
            cur.push(p);
            go(rem - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, d, &mut Vec::with_capacity(d), &mut out);
    out.into_iter().map(|parts| Partition { parts }).collect()
}

/// Letter counts of a word of length `n` over an alphabet of size `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeVector {
    counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter("type vector needs at least one count".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.counts.len()
    }

    /// All types in `Type(n, d)`.
    pub fn enumerate(n: usize, d: usize) -> Vec<TypeVector> {
        fn go(rem: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
            if slots == 1 {
                cur.push(rem);
                out.push(TypeVector { counts: cur.clone() });
                cur.pop();
                return;
            }
            for c in 0..=rem {
                cur.push(c);
                go(rem - c, slots - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if d > 0 {
            go(n, d, &mut Vec::new(), &mut out);
        }
        out
    }
}

/// The staircase irrep `λ_i = (d − i)(s − 1)` used by the qudit tester.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircasePlan {
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub lambda: Partition,
}

impl StaircasePlan {
    /// Requires `d >= 3` and odd `s >= 3`.
    pub fn new(d: usize, s: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParameter(format!(
                "staircase plans need d >= 3 (got {d}); use the qubit construction"
            )));
        }
        if s < 3 || s.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("s must be odd and >= 3, got {s}")));
        }
        Ok(Self::unchecked(d, s))
    }

    /// Any `d >= 1`, `s >= 1`; used for small-scale validation.
    pub(crate) fn unchecked(d: usize, s: usize) -> Self {
        let lambda = staircase_partition(d, s);
        Self {
            d,
            s,
            n: (s - 1) * d * (d - 1) / 2,
            lambda,
        }
    }

    /// `s^{d(d−1)/2}`.
    pub fn dim_h(&self) -> BigUint {
        BigUint::from(self.s).pow((self.d * (self.d - 1) / 2) as u32)
    }
}

pub fn staircase_partition(d: usize, s: usize) -> Partition {
    Partition {
        parts: (0..d).map(|i| (d - 1 - i) * (s - 1)).collect(),
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Dimension of the `S_n` irrep `K_λ`:
/// `n! / (λ̃_1! ⋯ λ̃_d!) · ∏_{i<j} (λ̃_i − λ̃_j)`.
pub fn dim_symmetric_irrep(lambda: &Partition) -> BigUint {
    // invariant under zero padding, so use the shortest length
    let parts = lambda.nonzero_parts();
    let shifted: Vec<usize> = parts
        .iter()
        .enumerate()
        .map(|(i, &p)| p + parts.len() - 1 - i)
        .collect();
    let mut num = factorial(lambda.n());
    for i in 0..shifted.len() {
        for j in i + 1..shifted.len() {
            num *= BigUint::from(shifted[i] - shifted[j]);
        }
    }
    let den = shifted.iter().fold(BigUint::one(), |acc, &l| acc * factorial(l));
    num / den
}

/// Weyl dimension of the `U(d)` irrep `H_λ`:
/// `∏_{i<j} (λ_i − λ_j + j − i) / (j − i)`.
pub fn dim_unitary_irrep(lambda: &Partition) -> BigUint {
    let p = lambda.parts();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            num *= BigUint::from(p[i] - p[j] + j - i);
            den *= BigUint::from(j - i);
        }
    }
    num / den
}

/// `n! / (t_1! ⋯ t_d!)`.
pub fn multinomial(t: &TypeVector) -> BigUint {
    let den = t.counts().iter().fold(BigUint::one(), |acc, &c| acc * factorial(c));
    factorial(t.n()) / den
}

pub fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Entropy bounds `(exp(nH)(n+d)^{−d(d+1)/2}, exp(nH))` sandwiching `dim K_λ`.
pub fn dim_bounds_check(lambda: &Partition) -> (f64, f64) {
    let n = lambda.n() as f64;
    let d = lambda.d() as f64;
    let upper = (n * lambda.entropy()).exp();
    let lower = upper * (n + d).powf(-d * (d + 1.0) / 2.0);
    (lower, upper)
}

/// Multinomial bounds `(binom(n,λ)(n+d)^{−d(d−1)/2}, binom(n,λ))` on `dim K_λ`.
pub fn multinomial_bounds(lambda: &Partition) -> (f64, f64) {
    let upper = big_to_f64(&multinomial(&TypeVector {
        counts: lambda.parts().to_vec(),
    }));
    let n = lambda.n() as f64;
    let d = lambda.d() as f64;
    (upper * (n + d).powf(-d * (d - 1.0) / 2.0), upper)
}

fn has_coincident(points: &[Complex64]) -> bool {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() < DEGENERACY_TOL {
                return true;
            }
        }
    }
    false
}

/// Character of `H_λ` at `diag(e^{iθ_1}, …, e^{iθ_d})`.
///
/// Uses the bialternant `det(x_i^{λ_j+d−j}) / det(x_i^{d−j})` when the
/// eigenvalues are distinct and the semistandard-tableau sum otherwise.
pub fn weyl_character(lambda: &Partition, phases: &EigenphaseList) -> Result<Complex64> {
    let d = lambda.d();
    if phases.len() != d {
        return Err(Error::DimensionMismatch(d, phases.len()));
    }
    let x = phases.points();
    if has_coincident(&x) {
        return Ok(schur_polynomial(lambda, &x));
    }
    let p = lambda.parts();
    let num = DMatrix::from_fn(d, d, |i, j| x[i].powu((p[j] + d - 1 - j) as u32)).determinant();
    // det(x_i^{d−j}) is the Vandermonde product ∏_{i<j}(x_i − x_j).
    let mut den = Complex64::one();
    for i in 0..d {
        for j in i + 1..d {
            den *= x[i] - x[j];
        }
    }
    Ok(num / den)
}

/// Schur polynomial `s_λ(x_1, …, x_k)` as a sum over Gelfand–Tsetlin
/// patterns (equivalently semistandard tableaux), via the branching rule
/// `s_λ(x_1..x_k) = Σ_{μ ≺ λ} s_μ(x_1..x_{k−1}) x_k^{|λ|−|μ|}`.
pub fn schur_polynomial(lambda: &Partition, x: &[Complex64]) -> Complex64 {
    let mut memo = HashMap::new();
    let mut parts = lambda.nonzero_parts().to_vec();
    if parts.len() > x.len() {
        return Complex64::zero();
    }
    parts.resize(x.len(), 0);
    schur_rec(&parts, x, &mut memo)
}

fn schur_rec(
    lambda: &[usize],
    x: &[Complex64],
    memo: &mut HashMap<Vec<usize>, Complex64>,
) -> Complex64 {
    let k = x.len();
    if k == 0 {
        return Complex64::one();
    }
    if k == 1 {
        return x[0].powu(lambda[0] as u32);
    }
    if let Some(v) = memo.get(lambda) {
        return *v;
    }
    let total: usize = lambda.iter().sum();
    let mut acc = Complex64::zero();
    let mut mu = vec![0usize; k - 1];
    // μ_i ranges over [λ_{i+1}, λ_i].
    fn interlace(
        i: usize,
        lambda: &[usize],
        mu: &mut Vec<usize>,
        x: &[Complex64],
        total: usize,
        acc: &mut Complex64,
        memo: &mut HashMap<Vec<usize>, Complex64>,
    ) {
        if i == mu.len() {
            let size: usize = mu.iter().sum();
            let sub = schur_rec(mu, &x[..x.len() - 1], memo);
            *acc += sub * x[x.len() - 1].powu((total - size) as u32);
            return;
        }
        for m in lambda[i + 1]..=lambda[i] {
            mu[i] = m;
            interlace(i + 1, lambda, mu, x, total, acc, memo);
        }
    }
    // memo entries are keyed by the partition only, valid because the
    // variable prefix is fixed by the partition length.
    interlace(0, lambda, &mut mu, x, total, &mut acc, memo);
    memo.insert(lambda.to_vec(), acc);
    acc
}

/// `sin(sΔ/2) / sin(Δ/2)` with the confluent limit `s·cos(sΔ/2)/cos(Δ/2)`.
pub fn sine_ratio(s: usize, delta: f64) -> f64 {
    let den = (0.5 * delta).sin();
    let sf = s as f64;
    if den.abs() < DEGENERACY_TOL {
        sf * (0.5 * sf * delta).cos() / (0.5 * delta).cos()
    } else {
        (0.5 * sf * delta).sin() / den
    }
}

/// `∏_{j<k} (x_k^s − x_j^s)/(x_k − x_j)` for any `s >= 1`.
pub(crate) fn staircase_product(s: usize, phases: &[f64]) -> Complex64 {
    let mut acc = Complex64::one();
    let sm1 = s as f64 - 1.0;
    for j in 0..phases.len() {
        for k in j + 1..phases.len() {
            let (tj, tk) = (phases[j], phases[k]);
            let prefactor = Complex64::cis(0.5 * sm1 * (tj + tk));
            acc *= prefactor * sine_ratio(s, tk - tj);
        }
    }
    acc
}

/// Character of the staircase irrep from the pairwise product formula.
pub fn staircase_character(plan: &StaircasePlan, phases: &EigenphaseList) -> Result<Complex64> {
    if phases.len() != plan.d {
        return Err(Error::DimensionMismatch(plan.d, phases.len()));
    }
    Ok(staircase_product(plan.s, phases.as_slice()))
}

/// Irreducible character `χ_λ(μ)` of `S_n` by the Murnaghan–Nakayama rule.
pub fn symmetric_group_character(lambda: &Partition, cycle_type: &Partition) -> Result<BigInt> {
    if lambda.n() != cycle_type.n() {
        return Err(Error::InvalidPartition(format!(
            "λ is a partition of {} but the cycle type is of {}",
            lambda.n(),
            cycle_type.n()
        )));
    }
    let parts = lambda.nonzero_parts();
    let len = parts.len();
    let beta: Vec<usize> = parts.iter().enumerate().map(|(i, &p)| p + len - 1 - i).collect();
    let cycles = cycle_type.nonzero_parts().to_vec();
    let mut memo = HashMap::new();
    Ok(mn_rec(beta, &cycles, &mut memo))
}

/// Rim-hook removal on a beta-set: removing a hook of length `r` moves a bead
/// from `b` to the free position `b − r`, with sign `(−1)^{beads in between}`.
fn mn_rec(
    beta: Vec<usize>,
    cycles: &[usize],
    memo: &mut HashMap<(Vec<usize>, usize), BigInt>,
) -> BigInt {
    let Some((&r, rest)) = cycles.split_first() else {
        return BigInt::one();
    };
    let key = (beta.clone(), cycles.len());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let mut total = BigInt::zero();
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let between = beta.iter().filter(|&&g| g > b - r && g < b).count();
        let mut next = beta.clone();
        next[idx] = b - r;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let v = mn_rec(next, rest, memo);
        if between % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    memo.insert(key, total.clone());
    total
}
