//! Equality testing of unitaries up to global phase.
//!
//! Each tester prepares `|φ^m_U⟩`, the maximally entangled state of the irrep
//! pair `H_λ ⊗ K_λ` rotated by `U^{⊗n}`, and either projects it onto `|φ^m_V⟩`
//! (known reference) or swap-tests it against the copy built from `V`. Both
//! outcome probabilities depend only on `c = χ_λ(U†V)/dim H_λ`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{eigenphases, UnitaryMatrix, ALGEBRAIC_TOL};
use crate::repr::{
    dim_symmetric_irrep, dim_unitary_irrep, sine_ratio, staircase_partition,
    staircase_product, Partition,
};
use crate::state_set::{Decision, Verdict};

/// Slack used when rounding planner formulas such as `3/ε + 1` up to integers,
/// so that `3/0.1 = 30.000000000000004` still gives 31.
pub const ROUNDING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMode {
    QubitKnown,
    QubitSwap,
    QuditKnown,
    QuditSwap,
}

impl TestMode {
    pub fn is_swap(self) -> bool {
        matches!(self, TestMode::QubitSwap | TestMode::QuditSwap)
    }

    pub fn is_qubit(self) -> bool {
        matches!(self, TestMode::QubitKnown | TestMode::QubitSwap)
    }

    /// The mode for dimension `d`; qubits use the `(n−1, 1)` construction.
    pub fn for_dimension(d: usize, known_reference: bool) -> Self {
        match (d == 2, known_reference) {
            (true, true) => TestMode::QubitKnown,
            (true, false) => TestMode::QubitSwap,
            (false, true) => TestMode::QuditKnown,
            (false, false) => TestMode::QuditSwap,
        }
    }
}

impl std::fmt::Display for TestMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestMode::QubitKnown => "qubit-known",
            TestMode::QubitSwap => "qubit-swap",
            TestMode::QuditKnown => "qudit-known",
            TestMode::QuditSwap => "qudit-swap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryTestPlan {
    pub mode: TestMode,
    pub d: usize,
    pub epsilon: f64,
    /// Uses of each unitary per measurement round.
    pub n: usize,
    pub lambda: Partition,
    /// Staircase scale; qudit modes only.
    pub s: Option<usize>,
    pub repetitions: u32,
    pub soundness_cap: f64,
    /// `ceil(dim H_λ / dim K_λ)`: reference system needed to host the
    /// maximally entangled state.
    pub ancilla_dimension: u64,
}

impl UnitaryTestPlan {
    pub(crate) fn build(mode: TestMode, d: usize, epsilon: f64, lambda: Partition, s: Option<usize>) -> Self {
        let n = lambda.n();
        let mut plan = Self {
            mode,
            d,
            epsilon,
            n,
            ancilla_dimension: ancilla_dimension(&lambda),
            lambda,
            s,
            repetitions: if mode.is_swap() { 2 } else { 1 },
            soundness_cap: 0.0,
        };
        plan.soundness_cap = soundness_certificate(&plan, epsilon);
        plan
    }

    /// Same plan with `r` rounds; all rounds must pass for acceptance.
    pub fn with_repetitions(mut self, r: u32) -> Result<Self> {
        if r == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        self.repetitions = r;
        self.soundness_cap = soundness_certificate(&self, self.epsilon);
        Ok(self)
    }

    pub fn dim_h(&self) -> BigUint {
        dim_unitary_irrep(&self.lambda)
    }

    /// Uses of each unitary across all rounds.
    pub fn uses_per_unitary(&self) -> usize {
        self.n * self.repetitions as usize
    }
}

fn ancilla_dimension(lambda: &Partition) -> u64 {
    let h = dim_unitary_irrep(lambda);
    let k = dim_symmetric_irrep(lambda);
    ((h + &k - 1u32) / k).to_u64().unwrap_or(u64::MAX)
}

/// `ceil(x)`, except that values within [`ROUNDING_TOL`] of an integer round to it.
pub fn ceil_tol(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= ROUNDING_TOL {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")))
    }
}

/// Known-reference qubit tester: `n = max(3, ⌈√3/ε + 1⌉)`, `λ = (n−1, 1)`.
pub fn plan_qubit_known(epsilon: f64) -> Result<UnitaryTestPlan> {
    check_epsilon(epsilon)?;
    let n = (ceil_tol(3f64.sqrt() / epsilon + 1.0) as usize).max(3);
    Ok(UnitaryTestPlan::build(
        TestMode::QubitKnown,
        2,
        epsilon,
        Partition::new(vec![n - 1, 1])?,
        None,
    ))
}

/// Two unknown qubit unitaries: `n = ⌈3/ε + 1⌉`, two swap tests.
pub fn plan_qubit_swap(epsilon: f64) -> Result<UnitaryTestPlan> {
    check_epsilon(epsilon)?;
    let n = (ceil_tol(3.0 / epsilon + 1.0) as usize).max(3);
    Ok(UnitaryTestPlan::build(
        TestMode::QubitSwap,
        2,
        epsilon,
        Partition::new(vec![n - 1, 1])?,
        None,
    ))
}

/// Smallest odd integer strictly above `6/ε`.
pub fn staircase_scale(epsilon: f64) -> usize {
    let x = 6.0 / epsilon;
    let floor = {
        let r = x.round();
        if (x - r).abs() <= ROUNDING_TOL {
            r
        } else {
            x.floor()
        }
    } as usize;
    if floor.is_multiple_of(2) {
        floor + 1
    } else {
        floor + 2
    }
}

/// Staircase tester for `d >= 3`: `s` the smallest odd integer above `6/ε`,
/// `n = (s−1)·d(d−1)/2`.
pub fn plan_qudit(d: usize, epsilon: f64, known_reference: bool) -> Result<UnitaryTestPlan> {
    if d < 3 {
        return Err(invalid(format!(
            "the staircase tester needs d >= 3 (got {d}); use the qubit planners"
        )));
    }
    check_epsilon(epsilon)?;
    let s = staircase_scale(epsilon);
    let mode = if known_reference {
        TestMode::QuditKnown
    } else {
        TestMode::QuditSwap
    };
    Ok(UnitaryTestPlan::build(mode, d, epsilon, staircase_partition(d, s), Some(s)))
}

/// Dispatches on `mode`, checking that it fits `d`.
pub fn plan(mode: TestMode, d: usize, epsilon: f64) -> Result<UnitaryTestPlan> {
    match mode {
        TestMode::QubitKnown | TestMode::QubitSwap if d != 2 => Err(invalid(format!(
            "mode {mode} needs d = 2, got {d}"
        ))),
        TestMode::QubitKnown => plan_qubit_known(epsilon),
        TestMode::QubitSwap => plan_qubit_swap(epsilon),
        TestMode::QuditKnown => plan_qudit(d, epsilon, true),
        TestMode::QuditSwap => plan_qudit(d, epsilon, false),
    }
}

/// Upper bound on the acceptance probability of any pair at distance `>= ε`.
pub fn soundness_certificate(plan: &UnitaryTestPlan, epsilon: f64) -> f64 {
    let ratio_cap = match plan.s {
        Some(s) if !plan.mode.is_qubit() => 2.0 / (s as f64 * epsilon),
        _ => 1.0 / ((plan.n as f64 - 1.0) * epsilon),
    }
    .min(1.0);
    accept_from_ratio(plan.mode, ratio_cap, plan.repetitions)
}

fn accept_from_ratio(mode: TestMode, ratio_abs: f64, repetitions: u32) -> f64 {
    let c2 = ratio_abs * ratio_abs;
    let round = if mode.is_swap() { 0.5 * (1.0 + c2) } else { c2 };
    round.powi(repetitions as i32)
}

/// Probability that one measurement round passes.
pub fn round_accept_prob(mode: TestMode, ratio: Complex64) -> f64 {
    accept_from_ratio(mode, ratio.norm().min(1.0), 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceAnalysis {
    /// `χ_λ(U†V) / dim H_λ`.
    pub character_ratio: Complex64,
    pub accept_prob: f64,
    pub soundness_cap: f64,
    /// Eigenphase pairs of `U†V` whose gap meets the distance threshold.
    pub pair_count: usize,
}

/// `|sin((α − β)/2)|`, the distance of `diag(e^{iα}, e^{iβ})` from the identity.
pub fn eigenphase_gap_to_distance(alpha: f64, beta: f64) -> f64 {
    (0.5 * (alpha - beta)).sin().abs()
}

/// `#{j < k : sin²((θ_k − θ_j)/2) >= d(2ε² − ε⁴) / (2(d − 1))}`.
pub fn pair_count(phases: &[f64], epsilon: f64) -> usize {
    let d = phases.len() as f64;
    let cut = d * (2.0 * epsilon * epsilon - epsilon.powi(4)) / (2.0 * (d - 1.0));
    let mut count = 0;
    for j in 0..phases.len() {
        for k in j + 1..phases.len() {
            if (0.5 * (phases[k] - phases[j])).sin().powi(2) >= cut - ALGEBRAIC_TOL {
                count += 1;
            }
        }
    }
    count
}

/// `χ_λ / dim H_λ` of the plan's irrep evaluated on eigenphases.
pub fn character_ratio(plan: &UnitaryTestPlan, phases: &[f64]) -> Result<Complex64> {
    if phases.len() != plan.d {
        return Err(Error::DimensionMismatch(plan.d, phases.len()));
    }
    if plan.mode.is_qubit() {
        if plan.d != 2 {
            return Err(invalid(format!("mode {} needs d = 2, got {}", plan.mode, plan.d)));
        }
        let (a, b) = (phases[0], phases[1]);
        let m = plan.n - 1;
        Ok(Complex64::cis(0.5 * plan.n as f64 * (a + b)) * (sine_ratio(m, a - b) / m as f64))
    } else {
        let s = plan
            .s
            .ok_or_else(|| invalid(format!("mode {} needs a staircase scale", plan.mode)))?;
        if plan.d < 2 {
            return Err(invalid("qudit modes need d >= 2"));
        }
        let binom = (plan.d * (plan.d - 1) / 2) as i32;
        Ok(staircase_product(s, phases) / (s as f64).powi(binom))
    }
}

/// Exact acceptance probability of the planned tester on `(U, V)`.
pub fn analyze(u: &UnitaryMatrix, v: &UnitaryMatrix, plan: &UnitaryTestPlan) -> Result<AcceptanceAnalysis> {
    if u.dim() != plan.d {
        return Err(Error::DimensionMismatch(plan.d, u.dim()));
    }
    let w = u.relative_to(v)?;
    let phases = eigenphases(&w)?;
    let ratio = character_ratio(plan, phases.as_slice())?;
    let mut abs = ratio.norm();
    if abs >= 1.0 - ALGEBRAIC_TOL {
        abs = 1.0;
    }
    Ok(AcceptanceAnalysis {
        character_ratio: ratio,
        accept_prob: accept_from_ratio(plan.mode, abs, plan.repetitions),
        soundness_cap: plan.soundness_cap,
        pair_count: pair_count(phases.as_slice(), plan.epsilon),
    })
}

/// Samples the measurement rounds of a tester with the given analysis.
/// `statistic` is the fraction of rounds that passed.
pub fn draw_verdict<R: Rng + ?Sized>(
    analysis: &AcceptanceAnalysis,
    plan: &UnitaryTestPlan,
    rng: &mut R,
) -> Verdict {
    let mut abs = analysis.character_ratio.norm();
    if abs >= 1.0 - ALGEBRAIC_TOL {
        abs = 1.0;
    }
    let p = accept_from_ratio(plan.mode, abs.min(1.0), 1);
    let passed = (0..plan.repetitions).filter(|_| rng.random::<f64>() < p).count();
    let decision = if passed == plan.repetitions as usize {
        Decision::Member
    } else {
        Decision::Far
    };
    Verdict {
        decision,
        statistic: passed as f64 / plan.repetitions as f64,
    }
}

/// One run of the tester; `Member` means "equal up to a global phase".
pub fn run_unitary_test<R: Rng + ?Sized>(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    plan: &UnitaryTestPlan,
    rng: &mut R,
) -> Result<Verdict> {
    let analysis = analyze(u, v, plan)?;
    Ok(draw_verdict(&analysis, plan, rng))
}

/// Uses of the channel for the Choi-state baseline, `⌈ε⁻²⌉`.
pub fn n_choi(epsilon: f64) -> u64 {
    ceil_tol(epsilon.powi(-2))
}
