//! States, unitaries, distances and random instance generation.
//!
//! Every quantity here is a pure function of its inputs. Randomized
//! constructors take either an explicit seed or a caller-owned RNG.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for eigen-solves.
pub const EIGEN_TOL: f64 = 1e-9;
/// Tolerance used when admitting a matrix as unitary.
pub const UNITARITY_TOL: f64 = 1e-8;

const NORM_TOL: f64 = 1e-12;

/// Unit-norm complex amplitude vector in dimension `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(invalid(format!(
                "state dimension must be at least 2, got {}",
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero vector"));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::new(amplitudes)
    }

    /// Computational basis vector `e_k`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(invalid(format!("basis index {k} out of range for d = {d}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[k] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        let amps = (0..d).map(|_| complex_gaussian(rng)).collect();
        Self::normalized(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Square complex matrix with `U†U = I` up to [`UNITARITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        if matrix.nrows() == 0 {
            return Err(invalid("empty matrix"));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d, d),
        }
    }

    /// `diag(e^{iθ_1}, …, e^{iθ_d})`.
    pub fn from_phases(phases: &[f64]) -> Self {
        let diag = DVector::from_iterator(phases.len(), phases.iter().map(|&t| Complex64::cis(t)));
        Self {
            matrix: DMatrix::from_diagonal(&diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `W · self · W†`.
    pub fn conjugate_by(&self, w: &UnitaryMatrix) -> Result<Self> {
        check_dims(self.dim(), w.dim())?;
        Ok(Self {
            matrix: &w.matrix * &self.matrix * w.matrix.adjoint(),
        })
    }

    /// `e^{iγ} · self`.
    pub fn with_global_phase(&self, gamma: f64) -> Self {
        Self {
            matrix: &self.matrix * Complex64::cis(gamma),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `max |(U†U − I)_{ij}|`.
    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    /// `U†V` for `U = self`.
    pub fn relative_to(&self, v: &UnitaryMatrix) -> Result<Self> {
        self.adjoint().compose(v)
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let d = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Eigenphases, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenphaseList {
    phases: Vec<f64>,
}

impl EigenphaseList {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return Err(invalid(format!("phase {bad} outside [0, 2π)")));
        }
        Ok(Self { phases })
    }

    /// Reduces arbitrary real angles into `[0, 2π)`.
    pub fn wrapped(phases: impl IntoIterator<Item = f64>) -> Self {
        Self {
            phases: phases.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            phases: vec![0.0; d],
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    /// The points `e^{iθ_k}` on the unit circle.
    pub fn points(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&t| Complex64::cis(t)).collect()
    }
}

pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch(a, b))
    } else {
        Ok(())
    }
}

/// Squared modulus `|<φ|ψ>|²`.
pub fn overlap(psi: &PureState, phi: &PureState) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr().min(1.0))
}

/// Trace distance between pure states, `sqrt(1 − |<φ|ψ>|²)`.
pub fn trace_distance_pure(psi: &PureState, phi: &PureState) -> Result<f64> {
    Ok((1.0 - overlap(psi, phi)?).max(0.0).sqrt())
}

/// `sqrt(1 − |tr(U†V)/d|²)`; invariant under a global phase on either side.
pub fn unitary_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    check_dims(u.dim(), v.dim())?;
    let d = u.dim() as f64;
    let inner: Complex64 = u
        .matrix
        .iter()
        .zip(v.matrix.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let r = (inner.norm() / d).min(1.0);
    Ok((1.0 - r * r).max(0.0).sqrt())
}

/// Eigenphases of a unitary, sorted ascending.
pub fn eigenphases(u: &UnitaryMatrix) -> Result<EigenphaseList> {
    eigenphases_of(u.matrix())
}

/// Eigenphases of an arbitrary square matrix, failing when any eigenvalue
/// modulus is off the unit circle by more than [`UNITARITY_TOL`].
pub fn eigenphases_of(m: &DMatrix<Complex64>) -> Result<EigenphaseList> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000).ok_or(Error::EigenSolver)?;
    let (_, t) = schur.unpack();
    let mut phases = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        let ev = t[(i, i)];
        let modulus = ev.norm();
        if (modulus - 1.0).abs() > UNITARITY_TOL {
            return Err(Error::NotUnitary((modulus - 1.0).abs()));
        }
        phases.push(wrap_phase((ev / modulus).arg()));
    }
    phases.sort_by(|a, b| a.total_cmp(b));
    Ok(EigenphaseList { phases })
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal absorbed into `Q`.
pub fn haar_random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    let z = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new(q)
}

pub fn haar_random_unitary(d: usize, seed: u64) -> Result<UnitaryMatrix> {
    haar_random_unitary_with(d, &mut seeded_rng(seed))
}

/// Eigenphases of a diagonal unitary `W` with `|tr W| = d·sqrt(1 − ε²)`.
///
/// Uses a conjugate pair `(e^{ia}, e^{−ia})` with every other phase at 0 when
/// that reaches the target trace; otherwise falls back to an arithmetic fan
/// `θ_k = a·k`, whose trace modulus decreases from `d` to 0 on `[0, 2π/d]`.
pub fn phases_at_distance(d: usize, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    let target = d as f64 * (1.0 - eps * eps).max(0.0).sqrt();
    let cos_a = (target - (d as f64 - 2.0)) / 2.0;
    if cos_a >= -1.0 {
        let a = cos_a.min(1.0).acos();
        let mut phases = vec![0.0; d];
        phases[0] = a;
        phases[1] = -a;
        return Ok(phases);
    }
    let fan = |a: f64| -> f64 {
        (0..d)
            .map(|k| Complex64::cis(a * k as f64))
            .sum::<Complex64>()
            .norm()
    };
    let (mut lo, mut hi) = (0.0, TAU / d as f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fan(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    Ok((0..d).map(|k| a * k as f64).collect())
}

/// A pair `(U, V)` with `unitary_distance(U, V) = ε`, built as `V = U·Q W Q†`
/// for Haar `U`, `Q` and the diagonal `W` of [`phases_at_distance`].
pub fn pair_at_distance_with<R: Rng + ?Sized>(
    d: usize,
    eps: f64,
    rng: &mut R,
) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    let phases = phases_at_distance(d, eps)?;
    let u = haar_random_unitary_with(d, rng)?;
    let q = haar_random_unitary_with(d, rng)?;
    let w = UnitaryMatrix::from_phases(&phases).conjugate_by(&q)?;
    let v = u.compose(&w)?;
    let got = unitary_distance(&u, &v)?;
    if (got - eps).abs() > EIGEN_TOL {
        return Err(Error::Infeasible(format!(
            "constructed pair has distance {got}, requested {eps}"
        )));
    }
    Ok((u, v))
}

pub fn pair_at_distance(d: usize, eps: f64, seed: u64) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    pair_at_distance_with(d, eps, &mut seeded_rng(seed))
}

/// Swap-test acceptance `½(1 + tr ρσ)` for pure states with squared overlap `overlap_sq`.
pub fn swap_test_accept_prob(overlap_sq: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap_sq) {
        return Err(invalid(format!("overlap must lie in [0, 1], got {overlap_sq}")));
    }
    Ok(0.5 * (1.0 + overlap_sq))
}
