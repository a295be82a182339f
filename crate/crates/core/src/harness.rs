//! Seeded Monte Carlo campaigns, the oracle cross-check suite, copy-count
//! comparison tables and instance generation.

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::oracle::{
    isotypic_projector, observable_moments, tensor_power, trace_product, type_probability,
    known_accept_prob,
};
use crate::quantum::{
    haar_random_unitary_with, pair_at_distance_with, unitary_distance, PureState,
    UnitaryMatrix,
};
use crate::repr::{
    big_to_f64, dim_symmetric_irrep, dim_unitary_irrep, multinomial, partitions, weyl_character,
    Partition, StaircasePlan, TypeVector,
};
use crate::state_set::{
    decide_membership, far_state, membership_accept_probability, plan_membership, Decision,
    MembershipPlan, StateSet,
};
use crate::unitary::{self, analyze, ceil_tol, draw_verdict, n_choi, TestMode, UnitaryTestPlan};

/// Two-sided 99% normal quantile.
pub const WILSON_Z_99: f64 = 2.5758293035489;

/// RNG stream reserved for instance generation; trials use streams `0..trials`.
pub const INSTANCE_STREAM: u64 = u64::MAX;

/// Instances closer than this to the target are treated as members.
pub const MEMBER_DISTANCE_TOL: f64 = 1e-6;

/// Independent generator for trial `trial` under root `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Number of trials for which `accept` returns true, each on its own stream.
pub fn count_accepts<F>(trials: u64, seed: u64, parallel: bool, accept: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    if parallel {
        (0..trials)
            .into_par_iter()
            .filter(|&t| accept(&mut trial_rng(seed, t)))
            .count() as u64
    } else {
        (0..trials).filter(|&t| accept(&mut trial_rng(seed, t))).count() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    StateSetMembership,
    UnitaryEquality,
    OracleVerify,
    BoundsTable,
}

/// Which side of the promise an instance lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Member,
    Far,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub epsilon: f64,
    pub dimension: usize,
    pub set_size: usize,
    pub mode: Option<TestMode>,
    pub trials: u64,
    pub seed: u64,
    /// Side of the generated instance; ignored when instances are supplied.
    pub instance: InstanceKind,
    pub instance_supplied: bool,
    #[serde(skip)]
    pub parallel: bool,
    #[serde(skip)]
    pub state_set: Option<StateSet>,
    #[serde(skip)]
    pub state: Option<PureState>,
    #[serde(skip)]
    pub unitaries: Option<(UnitaryMatrix, UnitaryMatrix)>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, epsilon: f64, dimension: usize, seed: u64) -> Self {
        Self {
            kind,
            epsilon,
            dimension,
            set_size: 1,
            mode: None,
            trials: 10_000,
            seed,
            instance: InstanceKind::Member,
            instance_supplied: false,
            parallel: true,
            state_set: None,
            state: None,
            unitaries: None,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_instance(mut self, instance: InstanceKind) -> Self {
        self.instance = instance;
        self
    }

    pub fn with_set_size(mut self, set_size: usize) -> Self {
        self.set_size = set_size;
        self
    }

    pub fn with_mode(mut self, mode: TestMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    /// Tests `state` (or a generated instance when `None`) against `set`.
    pub fn with_state_set(mut self, set: StateSet, state: Option<PureState>) -> Self {
        self.dimension = set.dim();
        self.set_size = set.len();
        self.instance_supplied = state.is_some();
        self.state_set = Some(set);
        self.state = state;
        self
    }

    pub fn with_unitaries(mut self, u: UnitaryMatrix, v: UnitaryMatrix) -> Self {
        self.dimension = u.dim();
        self.instance_supplied = true;
        self.unitaries = Some((u, v));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.kind != ExperimentKind::OracleVerify && !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSummary {
    Membership {
        #[serde(flatten)]
        plan: MembershipPlan,
        /// `n · |P|`, when every observable gets fresh copies.
        total_copies: u64,
    },
    Unitary(UnitaryTestPlan),
    Oracle {
        checks: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub plan: PlanSummary,
    pub side: InstanceKind,
    /// `D(ψ, P)` or `dist(U, V)` of the tested instance.
    pub distance: f64,
    pub accepts: u64,
    pub trials: u64,
    pub empirical_accept_rate: f64,
    pub wilson_interval: (f64, f64),
    pub analytic_prediction: f64,
    /// 1 on the member side, 1/3 on the far side.
    pub threshold: f64,
    pub prediction_in_interval: bool,
    pub threshold_respected: bool,
    pub pass: bool,
}

fn side_of(distance: f64, epsilon: f64) -> Result<InstanceKind> {
    if distance <= MEMBER_DISTANCE_TOL {
        Ok(InstanceKind::Member)
    } else if distance >= epsilon - 1e-9 {
        Ok(InstanceKind::Far)
    } else {
        Err(Error::Infeasible(format!(
            "instance at distance {distance} is neither a member nor {epsilon}-far"
        )))
    }
}

fn assemble(
    spec: ExperimentSpec,
    plan: PlanSummary,
    side: InstanceKind,
    distance: f64,
    accepts: u64,
    prediction: f64,
) -> ExperimentReport {
    let trials = spec.trials;
    let rate = accepts as f64 / trials as f64;
    let (lo, hi) = wilson_interval(accepts, trials, WILSON_Z_99);
    let prediction_in_interval = prediction >= lo - 1e-12 && prediction <= hi + 1e-12;
    let (threshold, threshold_respected) = match side {
        InstanceKind::Member => (1.0, accepts == trials),
        InstanceKind::Far => (1.0 / 3.0, rate <= 1.0 / 3.0 + 0.5 * (hi - lo)),
    };
    ExperimentReport {
        spec,
        plan,
        side,
        distance,
        accepts,
        trials,
        empirical_accept_rate: rate,
        wilson_interval: (lo, hi),
        analytic_prediction: prediction,
        threshold,
        prediction_in_interval,
        threshold_respected,
        pass: prediction_in_interval && threshold_respected,
    }
}

/// Runs a seeded campaign; the result depends only on the spec.
pub fn run_experiment(spec: ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::StateSetMembership => run_membership(spec),
        ExperimentKind::UnitaryEquality => run_unitary(spec),
        ExperimentKind::OracleVerify => {
            let checks = oracle_verify(spec.seed)?;
            let passed = checks.iter().filter(|c| c.passed).count() as u64;
            let mut spec = spec;
            spec.trials = checks.len() as u64;
            let plan = PlanSummary::Oracle { checks: checks.len() };
            Ok(assemble(spec, plan, InstanceKind::Member, 0.0, passed, 1.0))
        }
        ExperimentKind::BoundsTable => Err(invalid("bounds tables are built with bounds_table")),
    }
}

fn run_membership(mut spec: ExperimentSpec) -> Result<ExperimentReport> {
    let mut rng = trial_rng(spec.seed, INSTANCE_STREAM);
    let set = match spec.state_set.take() {
        Some(set) => set,
        None => generate_state_set(spec.dimension, spec.set_size, None, &mut rng)?,
    };
    spec.dimension = set.dim();
    spec.set_size = set.len();
    let plan = plan_membership(spec.epsilon, set.len())?;
    let psi = match spec.state.clone() {
        Some(psi) => psi,
        None => {
            let anchor = rng.random_range(0..set.len());
            match spec.instance {
                InstanceKind::Member => set.states()[anchor].clone(),
                InstanceKind::Far => far_state(&set, anchor, spec.epsilon, &mut rng)?,
            }
        }
    };
    let distance = set.distance_to(&psi)?;
    let side = side_of(distance, spec.epsilon)?;
    let overlaps = set.overlaps(&psi)?;
    let prediction = membership_accept_probability(&overlaps, &plan);
    let accepts = count_accepts(spec.trials, spec.seed, spec.parallel, |rng| {
        decide_membership(&overlaps, &plan, rng).decision == Decision::Member
    });
    spec.state_set = Some(set);
    spec.state = Some(psi);
    let total_copies = plan.total_copies();
    let summary = PlanSummary::Membership { plan, total_copies };
    Ok(assemble(spec, summary, side, distance, accepts, prediction))
}

fn run_unitary(mut spec: ExperimentSpec) -> Result<ExperimentReport> {
    let mut rng = trial_rng(spec.seed, INSTANCE_STREAM);
    let (u, v) = match spec.unitaries.take() {
        Some(pair) => pair,
        None => match spec.instance {
            InstanceKind::Member => {
                let u = haar_random_unitary_with(spec.dimension, &mut rng)?;
                let gamma = rng.random_range(0.0..std::f64::consts::TAU);
                let v = u.with_global_phase(gamma);
                (u, v)
            }
            InstanceKind::Far => pair_at_distance_with(spec.dimension, spec.epsilon, &mut rng)?,
        },
    };
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    spec.dimension = u.dim();
    let mode = spec.mode.unwrap_or(TestMode::for_dimension(spec.dimension, true));
    spec.mode = Some(mode);
    let plan = unitary::plan(mode, spec.dimension, spec.epsilon)?;
    let distance = unitary_distance(&u, &v)?;
    let side = side_of(distance, spec.epsilon)?;
    let analysis = analyze(&u, &v, &plan)?;
    let accepts = count_accepts(spec.trials, spec.seed, spec.parallel, |rng| {
        draw_verdict(&analysis, &plan, rng).decision == Decision::Member
    });
    spec.unitaries = Some((u, v));
    let prediction = analysis.accept_prob;
    Ok(assemble(spec, PlanSummary::Unitary(plan), side, distance, accepts, prediction))
}

/// One row of the oracle cross-check table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub check: String,
    pub d: usize,
    pub n: usize,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(check: &str, d: usize, n: usize, cases: usize, max_error: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            d,
            n,
            cases,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

/// Grid of `(d, n)` covered by [`oracle_verify`].
pub const ORACLE_GRID: &[(usize, usize)] = &[
    (2, 2),
    (2, 3),
    (2, 4),
    (2, 5),
    (2, 6),
    (3, 2),
    (3, 3),
    (3, 4),
];

/// Random unitaries per `(d, n)` in the character check.
pub const ORACLE_UNITARIES: usize = 20;

/// Cross-checks every closed form against explicit tensor algebra.
pub fn oracle_verify(seed: u64) -> Result<Vec<OracleCheck>> {
    let mut rows = Vec::new();
    for &(d, n) in ORACLE_GRID {
        let mut rng = trial_rng(seed, (d * 100 + n) as u64);
        let lambdas = partitions(n, d);
        let dn = BigUint::from(d).pow(n as u32);

        let total: BigUint = lambdas
            .iter()
            .map(|l| dim_unitary_irrep(l) * dim_symmetric_irrep(l))
            .sum();
        let err = if total == dn { 0.0 } else { 1.0 };
        rows.push(OracleCheck::new("schur-weyl-dimensions", d, n, lambdas.len(), err, 0.0));

        let projectors = lambdas
            .iter()
            .map(|l| isotypic_projector(l, n, d))
            .collect::<Result<Vec<_>>>()?;
        let mut rank_err = 0.0f64;
        let mut rank_sum = 0usize;
        for (l, p) in lambdas.iter().zip(&projectors) {
            let expect = big_to_f64(&(dim_unitary_irrep(l) * dim_symmetric_irrep(l)));
            rank_err = rank_err.max((p.trace().re - expect).abs()).max(p.idempotency_error());
            rank_sum += p.rank();
        }
        if rank_sum != d.pow(n as u32) {
            rank_err = rank_err.max(1.0);
        }
        rows.push(OracleCheck::new("isotypic-projectors", d, n, lambdas.len(), rank_err, 1e-10));

        let mut char_err = 0.0f64;
        for _ in 0..ORACLE_UNITARIES {
            let w = haar_random_unitary_with(d, &mut rng)?;
            let wn = tensor_power(&w, n)?;
            let phases = crate::quantum::eigenphases(&w)?;
            for (l, p) in lambdas.iter().zip(&projectors) {
                let dim_k = big_to_f64(&dim_symmetric_irrep(l));
                let tensor = trace_product(wn.matrix(), p.matrix()) / dim_k;
                let closed = weyl_character(l, &phases)?;
                char_err = char_err.max((tensor - closed).norm());
            }
        }
        rows.push(OracleCheck::new(
            "characters",
            d,
            n,
            ORACLE_UNITARIES * lambdas.len(),
            char_err,
            1e-9,
        ));

        let mut moment_err = 0.0f64;
        let cases = 5;
        for _ in 0..cases {
            let phi = PureState::random(d, &mut rng)?;
            let psi = PureState::random(d, &mut rng)?;
            let x = crate::quantum::overlap(&psi, &phi)?;
            let mean = observable_moments(&phi, &psi, n, 1)?;
            let second = observable_moments(&phi, &psi, n, 2)?;
            let var = second - mean * mean;
            moment_err = moment_err
                .max((mean - x).abs())
                .max((var - x * (1.0 - x) / n as f64).abs());
        }
        rows.push(OracleCheck::new("observable-moments", d, n, cases, moment_err, 1e-10));

        let psi = PureState::random(d, &mut rng)?;
        let x: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let types = TypeVector::enumerate(n, d);
        let mut type_err = 0.0f64;
        for t in &types {
            let closed = big_to_f64(&multinomial(t))
                * t.counts()
                    .iter()
                    .zip(&x)
                    .map(|(&c, &xi)| xi.powi(c as i32))
                    .product::<f64>();
            type_err = type_err.max((type_probability(&psi, t)? - closed).abs());
        }
        rows.push(OracleCheck::new("type-probabilities", d, n, types.len(), type_err, 1e-12));

        if let Some(plan) = oracle_known_plan(d, n) {
            let mut err = 0.0f64;
            let cases = 5;
            for _ in 0..cases {
                let u = haar_random_unitary_with(d, &mut rng)?;
                let v = haar_random_unitary_with(d, &mut rng)?;
                let tensor = known_accept_prob(&u, &v, &plan.lambda, n)?;
                err = err.max((analyze(&u, &v, &plan)?.accept_prob - tensor).abs());
            }
            rows.push(OracleCheck::new("known-acceptance", d, n, cases, err, 1e-9));
        }
    }
    Ok(rows)
}

/// Tester plans small enough for the tensor oracle: `(n−1, 1)` for qubits,
/// the `s = 2` staircase for `d = 3, n = 3`.
fn oracle_known_plan(d: usize, n: usize) -> Option<UnitaryTestPlan> {
    match (d, n) {
        (2, n) if n >= 3 => Some(UnitaryTestPlan::build(
            TestMode::QubitKnown,
            2,
            1.0,
            Partition::new(vec![n - 1, 1]).ok()?,
            None,
        )),
        (3, 3) => {
            let st = StaircasePlan::unchecked(3, 2);
            Some(UnitaryTestPlan::build(TestMode::QuditKnown, 3, 1.0, st.lambda, Some(2)))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipRow {
    pub epsilon: f64,
    pub delta: f64,
    pub set_size: usize,
    pub n_thm1_exact: u64,
    pub n_prior: u64,
    pub winner: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryRow {
    pub epsilon: f64,
    pub d: usize,
    pub n_qubit: usize,
    pub n_qudit: Option<usize>,
    pub n_choi: u64,
    pub ancilla_dimension: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsTable {
    pub membership: Vec<MembershipRow>,
    pub unitary: Vec<UnitaryRow>,
}

/// Prior-work copy count `⌈max(ε⁻², δ⁻²) ln|P|⌉`.
pub fn n_prior(epsilon: f64, delta: f64, set_size: usize) -> u64 {
    ceil_tol(epsilon.powi(-2).max(delta.powi(-2)) * (set_size as f64).ln())
}

pub fn bounds_table(
    eps_grid: &[f64],
    d_grid: &[usize],
    set_sizes: &[usize],
    delta_grid: &[f64],
) -> Result<BoundsTable> {
    if eps_grid.is_empty() {
        return Err(invalid("the epsilon grid is empty"));
    }
    if let Some(bad) = delta_grid.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(invalid(format!("delta must lie in (0, 1], got {bad}")));
    }
    let mut membership = Vec::new();
    for &eps in eps_grid {
        for &m in set_sizes {
            let n = plan_membership(eps, m)?.n;
            for &delta in delta_grid {
                let prior = n_prior(eps, delta, m);
                membership.push(MembershipRow {
                    epsilon: eps,
                    delta,
                    set_size: m,
                    n_thm1_exact: n,
                    n_prior: prior,
                    winner: if n < prior { "exact-tail" } else { "prior-work" }.to_string(),
                });
            }
        }
    }
    let mut unitary = Vec::new();
    for &eps in eps_grid {
        let qubit = unitary::plan_qubit_known(eps)?;
        for &d in d_grid {
            if d < 2 {
                return Err(invalid(format!("dimension must be at least 2, got {d}")));
            }
            let qudit = if d >= 3 {
                Some(unitary::plan_qudit(d, eps, true)?)
            } else {
                None
            };
            unitary.push(UnitaryRow {
                epsilon: eps,
                d,
                n_qubit: qubit.n,
                n_qudit: qudit.as_ref().map(|p| p.n),
                n_choi: n_choi(eps),
                ancilla_dimension: qudit.as_ref().unwrap_or(&qubit).ancilla_dimension,
            });
        }
    }
    Ok(BoundsTable { membership, unitary })
}

/// `m` random states in dimension `d`. With `delta`, the minimum pairwise
/// trace distance is `delta` (up to 1e-12): the first `m − 1` states keep
/// pairwise distance at least `delta` and the last sits at exactly `delta`
/// from the first.
pub fn generate_state_set<R: Rng + ?Sized>(
    d: usize,
    m: usize,
    delta: Option<f64>,
    rng: &mut R,
) -> Result<StateSet> {
    if m == 0 {
        return Err(invalid("set size must be at least 1"));
    }
    let Some(delta) = delta else {
        return StateSet::new((0..m).map(|_| PureState::random(d, rng)).collect::<Result<_>>()?);
    };
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    if m == 1 {
        return Err(invalid("a single state has no pairwise distance"));
    }
    if delta >= 1.0 && m > d {
        return Err(Error::Infeasible(format!(
            "at most {d} mutually orthogonal states exist in dimension {d}, requested {m}"
        )));
    }
    if let Some(set) = spread_states(d, m, delta, rng)? {
        return Ok(set);
    }
    if m <= d {
        return orthogonal_construction(d, m, delta, rng);
    }
    Err(Error::Infeasible(format!(
        "could not place {m} states at pairwise distance >= {delta} in dimension {d}"
    )))
}

fn spread_states<R: Rng + ?Sized>(d: usize, m: usize, delta: f64, rng: &mut R) -> Result<Option<StateSet>> {
    const ATTEMPTS: usize = 10_000;
    let mut states: Vec<PureState> = Vec::with_capacity(m);
    while states.len() < m - 1 {
        let mut placed = false;
        for _ in 0..ATTEMPTS {
            let cand = PureState::random(d, rng)?;
            let far_enough = states
                .iter()
                .map(|s| crate::quantum::trace_distance_pure(s, &cand))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .all(|x| x >= delta + 1e-9);
            if far_enough {
                states.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Ok(None);
        }
    }
    let partial = StateSet::new(states.clone())?;
    match far_state(&partial, 0, delta, rng) {
        Ok(last) => {
            states.push(last);
            Ok(Some(StateSet::new(states)?))
        }
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Columns of a Haar unitary, with the last replaced by a mix of the first
/// and an unused column.
fn orthogonal_construction<R: Rng + ?Sized>(d: usize, m: usize, delta: f64, rng: &mut R) -> Result<StateSet> {
    let q = haar_random_unitary_with(d, rng)?;
    let col = |k: usize| -> Vec<Complex64> { q.matrix().column(k).iter().copied().collect() };
    let mut states = (0..m - 1)
        .map(|k| PureState::normalized(col(k)))
        .collect::<Result<Vec<_>>>()?;
    let a = (1.0 - delta * delta).max(0.0).sqrt();
    let last = col(0)
        .iter()
        .zip(col(m - 1))
        .map(|(x, y)| x * a + y * delta)
        .collect();
    states.push(PureState::normalized(last)?);
    StateSet::new(states)
}

/// A pair at unitary distance exactly `epsilon`.
pub fn generate_unitary_pair<R: Rng + ?Sized>(
    d: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    pair_at_distance_with(d, epsilon, rng)
}
