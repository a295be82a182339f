//! Dense tensor-space oracle for small `(C^d)^{⊗n}`.
//!
//! Everything here is built from explicit `d^n × d^n` matrices so that the
//! closed forms elsewhere in the crate can be checked against it. It is slow
//! by construction and capped at `d^n <= TENSOR_CAP`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quantum::{PureState, UnitaryMatrix};
use crate::repr::{
    big_to_f64, dim_symmetric_irrep, dim_unitary_irrep, symmetric_group_character, Partition,
    TypeVector,
};

pub const TENSOR_CAP: usize = 4096;

const IDEMPOTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TensorOperator {
    matrix: DMatrix<Complex64>,
    n: usize,
    d: usize,
}

impl TensorOperator {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Rank of a projector, read off as its rounded trace.
    pub fn rank(&self) -> usize {
        self.trace().re.round().max(0.0) as usize
    }

    /// `max |(P² − P)_{ij}|`.
    pub fn idempotency_error(&self) -> f64 {
        max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `d^n`, or an error past the cap.
pub fn space_dim(d: usize, n: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim.checked_mul(d).filter(|&x| x <= TENSOR_CAP).ok_or_else(|| {
            Error::CapExceeded(d.checked_pow(n as u32).unwrap_or(usize::MAX), TENSOR_CAP)
        })?;
    }
    Ok(dim)
}

/// Base-`d` digits of a basis index, first tensor factor most significant.
fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Diagonal projector onto the span of basis words of type `t`.
pub fn type_projector(t: &TypeVector, d: usize) -> Result<TensorOperator> {
    if t.d() != d {
        return Err(Error::DimensionMismatch(t.d(), d));
    }
    let n = t.n();
    let dim = space_dim(d, n)?;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let mut counts = vec![0; d];
        for x in digits(i, d, n) {
            counts[x] += 1;
        }
        if counts == t.counts() {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(TensorOperator { matrix: m, n, d })
}

fn check_permutation(sigma: &[usize]) -> Result<()> {
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s >= sigma.len() || seen[s] {
            return Err(Error::InvalidParameter(format!("{sigma:?} is not a permutation")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// `P(σ)` moves tensor factor `k` to position `σ(k)`, so `P(σ)P(τ) = P(σ∘τ)`.
pub fn permutation_operator(sigma: &[usize], d: usize) -> Result<TensorOperator> {
    check_permutation(sigma)?;
    let n = sigma.len();
    let dim = space_dim(d, n)?;
    let mut m = DMatrix::zeros(dim, dim);
    let mut out = vec![0; n];
    for i in 0..dim {
        let inp = digits(i, d, n);
        for k in 0..n {
            out[sigma[k]] = inp[k];
        }
        m[(index_of(&out, d), i)] = Complex64::new(1.0, 0.0);
    }
    Ok(TensorOperator { matrix: m, n, d })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Cycle type of `σ`, padded to length `n`.
pub fn cycle_type(sigma: &[usize]) -> Partition {
    let n = sigma.len();
    let mut seen = vec![false; n];
    let mut lens = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = sigma[k];
            len += 1;
        }
        lens.push(len);
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    lens.resize(n.max(1), 0);
    Partition::new(lens).expect("sorted cycle lengths form a partition")
}

pub fn compose(sigma: &[usize], tau: &[usize]) -> Vec<usize> {
    tau.iter().map(|&t| sigma[t]).collect()
}

/// Central idempotent `P_λ = (dim K_λ / n!) Σ_σ χ_λ(σ) P(σ)`, projecting onto
/// the `H_λ ⊗ K_λ` block.
pub fn isotypic_projector(lambda: &Partition, n: usize, d: usize) -> Result<TensorOperator> {
    if lambda.n() != n {
        return Err(Error::InvalidPartition(format!("{:?} is not a partition of {n}", lambda.parts())));
    }
    if lambda.length() > d {
        return Err(Error::InvalidPartition(format!(
            "{:?} has more than {d} parts",
            lambda.parts()
        )));
    }
    let dim = space_dim(d, n)?;
    let padded = Partition::with_dimension(lambda.nonzero_parts(), n.max(1))?;
    let perms = permutations(n);
    let dim_k = big_to_f64(&dim_symmetric_irrep(&padded));
    let scale = dim_k / perms.len() as f64;
    let mut chars: HashMap<Partition, f64> = HashMap::new();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let mut out = vec![0; n];
    for sigma in &perms {
        let ct = cycle_type(sigma);
        let chi = match chars.get(&ct) {
            Some(&c) => c,
            None => {
                let c = symmetric_group_character(&padded, &ct)?
                    .to_f64()
                    .expect("character fits in f64");
                chars.insert(ct, c);
                c
            }
        };
        if chi == 0.0 {
            continue;
        }
        let coef = Complex64::new(scale * chi, 0.0);
        for i in 0..dim {
            let inp = digits(i, d, n);
            for k in 0..n {
                out[sigma[k]] = inp[k];
            }
            m[(index_of(&out, d), i)] += coef;
        }
    }
    let mut op = TensorOperator { matrix: m, n, d };
    if op.idempotency_error() > IDEMPOTENCY_TOL {
        // one Newton–Schulz step: P ← 3P² − 2P³
        let p2 = &op.matrix * &op.matrix;
        let p3 = &p2 * &op.matrix;
        op.matrix = p2 * Complex64::new(3.0, 0.0) - p3 * Complex64::new(2.0, 0.0);
    }
    Ok(op)
}

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// `W^{⊗n}`.
pub fn tensor_power(w: &UnitaryMatrix, n: usize) -> Result<TensorOperator> {
    let d = w.dim();
    space_dim(d, n)?;
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for _ in 0..n {
        m = kron(&m, w.matrix());
    }
    Ok(TensorOperator { matrix: m, n, d })
}

/// `ψ^{⊗n}` as a vector in the computational basis.
pub fn state_tensor_power(psi: &PureState, n: usize) -> Result<DVector<Complex64>> {
    space_dim(psi.dim(), n)?;
    let mut v = DVector::from_element(1, Complex64::new(1.0, 0.0));
    for _ in 0..n {
        v = v.kronecker(&psi.to_vector());
    }
    Ok(v)
}

pub fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    // tr(AB) = Σ_{ij} A_ij B_ji
    let mut acc = Complex64::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `tr(W^{⊗n} P_λ) / dim K_λ`.
pub fn character_via_tensor(lambda: &Partition, w: &UnitaryMatrix, n: usize) -> Result<Complex64> {
    let p = isotypic_projector(lambda, n, w.dim())?;
    let wn = tensor_power(w, n)?;
    let padded = Partition::with_dimension(lambda.nonzero_parts(), n.max(1))?;
    let dim_k = big_to_f64(&dim_symmetric_irrep(&padded));
    Ok(trace_product(wn.matrix(), p.matrix()) / dim_k)
}

/// Known-reference acceptance `|tr((U†V)^{⊗n} P_λ) / (dim K_λ · dim H_λ)|²`.
pub fn known_accept_prob(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    lambda: &Partition,
    n: usize,
) -> Result<f64> {
    let w = u.relative_to(v)?;
    let chi = character_via_tensor(lambda, &w, n)?;
    let padded = Partition::with_dimension(lambda.nonzero_parts(), w.dim())?;
    let dim_h = big_to_f64(&dim_unitary_irrep(&padded));
    Ok((chi / dim_h).norm_sqr())
}

/// `tr(ψ^{⊗n} Π_t)`.
pub fn type_probability(psi: &PureState, t: &TypeVector) -> Result<f64> {
    let proj = type_projector(t, psi.dim())?;
    let v = state_tensor_power(psi, t.n())?;
    Ok((v.adjoint() * proj.matrix() * &v)[(0, 0)].re)
}

/// A unitary whose first row is `φ†`, mapping `φ` to `e_0`.
fn adapted_basis(phi: &PureState) -> DMatrix<Complex64> {
    let d = phi.dim();
    let mut basis: Vec<DVector<Complex64>> = vec![phi.to_vector()];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = DVector::<Complex64>::zeros(d);
        v[k] = Complex64::new(1.0, 0.0);
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    DMatrix::from_fn(d, d, |i, j| basis[i][j].conj())
}

/// `k`-th moment `tr(ψ^{⊗n} M^k)` of `M = Σ_t (t_1/n) Π_t` in the basis where
/// `φ = e_0`, by explicit tensor algebra.
pub fn observable_moments(phi: &PureState, psi: &PureState, n: usize, k: u32) -> Result<f64> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(phi.dim(), psi.dim()));
    }
    if !(1..=2).contains(&k) || n == 0 {
        return Err(Error::InvalidParameter(format!("need k in {{1, 2}} and n >= 1, got k={k}, n={n}")));
    }
    let d = phi.dim();
    let dim = space_dim(d, n)?;
    let b = adapted_basis(phi);
    let rotated = PureState::normalized((&b * psi.to_vector()).iter().copied().collect())?;
    let v = state_tensor_power(&rotated, n)?;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for t in TypeVector::enumerate(n, d) {
        let weight = t.counts()[0] as f64 / n as f64;
        m += type_projector(&t, d)?.matrix * Complex64::new(weight, 0.0);
    }
    let mk = if k == 1 { m } else { &m * &m };
    Ok((v.adjoint() * mk * &v)[(0, 0)].re)
}
