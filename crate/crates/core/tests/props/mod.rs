//! Property checks shared by the `properties` and `acceptance` test targets.
//! Every check runs at least `CASES` generated cases from a fixed seed.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use rand::Rng;

use qcert::harness::{
    count_accepts, run_experiment, wilson_interval, ExperimentKind, ExperimentSpec, InstanceKind,
    WILSON_Z_99,
};
use qcert::oracle::{
    isotypic_projector, known_accept_prob, max_abs, observable_moments, permutation_operator,
    permutations, tensor_power, type_probability, type_projector, TensorOperator,
};
use qcert::quantum::{
    eigenphases, haar_random_unitary_with, overlap, pair_at_distance_with, seeded_rng,
    trace_distance_pure, unitary_distance, EigenphaseList, PureState, UnitaryMatrix,
};
use qcert::repr::{
    big_to_f64, dim_symmetric_irrep, dim_unitary_irrep, multinomial, partitions, sine_ratio,
    staircase_character, weyl_character, Partition, StaircasePlan, TypeVector,
};
use qcert::state_set::{
    chernoff_closed_form_copies, plan_membership, run_membership_test, sample_type_statistic,
    Decision, StateSet,
};
use qcert::unitary::{
    analyze, plan as plan_unitary, soundness_certificate, TestMode, UnitaryTestPlan,
};

pub const CASES: u32 = 1000;

pub type Check = fn() -> Result<(), String>;

fn runner(seed: u64, cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        max_global_rejects: 100_000,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    seed: u64,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(seed, CASES)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(format!("{e:?}")))
}

fn random_set(d: usize, m: usize, seed: u64) -> StateSet {
    let mut rng = seeded_rng(seed);
    StateSet::new((0..m).map(|_| PureState::random(d, &mut rng).unwrap()).collect()).unwrap()
}

// quantum-core

pub fn distance_symmetry() -> Result<(), String> {
    run(101, (2usize..=5, any::<u64>()), |(d, seed)| {
        let mut rng = seeded_rng(seed);
        let u = ok(haar_random_unitary_with(d, &mut rng))?;
        let v = ok(haar_random_unitary_with(d, &mut rng))?;
        let a = ok(unitary_distance(&u, &v))?;
        let b = ok(unitary_distance(&v, &u))?;
        let c = ok(unitary_distance(&UnitaryMatrix::identity(d), &ok(u.relative_to(&v))?))?;
        prop_assert!((a - b).abs() <= 1e-12 && (a - c).abs() <= 1e-12, "{a} {b} {c}");
        Ok(())
    })
}

pub fn distance_phase_invariance() -> Result<(), String> {
    run(102, (2usize..=5, any::<u64>(), 0.0..TAU), |(d, seed, gamma)| {
        let mut rng = seeded_rng(seed);
        let u = ok(haar_random_unitary_with(d, &mut rng))?;
        let v = ok(haar_random_unitary_with(d, &mut rng))?;
        let a = ok(unitary_distance(&u, &v))?;
        let b = ok(unitary_distance(&u.with_global_phase(gamma), &v))?;
        prop_assert!((a - b).abs() <= 1e-12);
        Ok(())
    })
}

pub fn trace_distance_range() -> Result<(), String> {
    run(103, (2usize..=6, any::<u64>(), any::<bool>(), 0.0..TAU), |(d, seed, same, gamma)| {
        let mut rng = seeded_rng(seed);
        let psi = ok(PureState::random(d, &mut rng))?;
        let phi = if same {
            let amps = psi.amplitudes().iter().map(|a| a * Complex64::cis(gamma)).collect();
            ok(PureState::normalized(amps))?
        } else {
            ok(PureState::random(d, &mut rng))?
        };
        let dist = ok(trace_distance_pure(&psi, &phi))?;
        let ov = ok(overlap(&psi, &phi))?;
        prop_assert!((0.0..=1.0).contains(&dist));
        prop_assert_eq!(dist <= 1e-6, ov >= 1.0 - 1e-12);
        Ok(())
    })
}

pub fn eigenphase_round_trip() -> Result<(), String> {
    let phases = proptest::collection::vec(0.01..TAU - 0.01, 2..=6);
    run(104, phases, |mut phases| {
        let found = ok(eigenphases(&UnitaryMatrix::from_phases(&phases)))?;
        phases.sort_by(f64::total_cmp);
        for (a, b) in found.as_slice().iter().zip(&phases) {
            prop_assert!((a - b).abs() <= 1e-9, "{found:?} vs {phases:?}");
        }
        Ok(())
    })
}

pub fn pair_at_distance_checks() -> Result<(), String> {
    run(105, (2usize..=6, 0.01f64..=1.0, any::<u64>()), |(d, eps, seed)| {
        let (u, v) = ok(pair_at_distance_with(d, eps, &mut seeded_rng(seed)))?;
        prop_assert!((ok(unitary_distance(&u, &v))? - eps).abs() <= 1e-9);
        Ok(())
    })
}

// repr-core

pub fn schur_weyl_completeness() -> Result<(), String> {
    run(201, (0usize..=8, 1usize..=4), |(n, d)| {
        let total: BigUint = partitions(n, d)
            .iter()
            .map(|l| dim_unitary_irrep(l) * dim_symmetric_irrep(l))
            .sum();
        prop_assert_eq!(total, BigUint::from(d).pow(n as u32));
        Ok(())
    })
}

fn pick_partition(n: usize, d: usize, idx: usize) -> Partition {
    let all = partitions(n, d);
    all[idx % all.len()].clone()
}

pub fn character_bound() -> Result<(), String> {
    let strategy = (1usize..=8, 2usize..=4, any::<usize>(), proptest::collection::vec(0.0..TAU, 4));
    run(202, strategy, |(n, d, idx, phases)| {
        let lambda = pick_partition(n, d, idx);
        let chi = ok(weyl_character(&lambda, &EigenphaseList::wrapped(phases[..d].to_vec())))?;
        let dim = big_to_f64(&dim_unitary_irrep(&lambda));
        prop_assert!(chi.norm() <= dim * (1.0 + 1e-9), "|χ| = {} > {dim}", chi.norm());
        Ok(())
    })
}

fn min_gap(phases: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..phases.len() {
        for j in i + 1..phases.len() {
            g = g.min((0.5 * (phases[i] - phases[j])).sin().abs());
        }
    }
    g
}

pub fn staircase_matches_bialternant() -> Result<(), String> {
    let strategy = (3usize..=4, 1usize..=3, proptest::collection::vec(0.0..TAU, 4));
    run(203, strategy, |(d, k, phases)| {
        let s = 2 * k + 1;
        let phases = &phases[..d];
        prop_assume!(min_gap(phases) >= 1e-3);
        let plan = ok(StaircasePlan::new(d, s))?;
        let list = EigenphaseList::wrapped(phases.to_vec());
        let a = ok(staircase_character(&plan, &list))?;
        let b = ok(weyl_character(&plan.lambda, &list))?;
        // both sides scale with dim H_λ = s^{d(d−1)/2}
        let scale = big_to_f64(&plan.dim_h());
        prop_assert!((a - b).norm() <= 1e-9 * scale, "{a} vs {b}");
        Ok(())
    })
}

pub fn symmetric_dimension_sandwich() -> Result<(), String> {
    run(204, (1usize..=14, 1usize..=5, any::<usize>()), |(n, d, idx)| {
        let lambda = pick_partition(n, d, idx);
        let k = dim_symmetric_irrep(&lambda);
        let binom = ok(TypeVector::new(lambda.parts().to_vec()).map(|t| multinomial(&t)))?;
        let scale = BigUint::from(n + d).pow((d * (d - 1) / 2) as u32);
        prop_assert!(k <= binom);
        prop_assert!(binom <= &k * scale);
        Ok(())
    })
}

pub fn staircase_continuity() -> Result<(), String> {
    run(205, (0.0..TAU, 1usize..=3), |(x, k)| {
        let s = 2 * k + 1;
        let plan = ok(StaircasePlan::new(3, s))?;
        let spread = EigenphaseList::wrapped((0..3).map(|i| x + i as f64 * 1e-8));
        let equal = EigenphaseList::wrapped(vec![x; 3]);
        let a = ok(staircase_character(&plan, &spread))?;
        let b = ok(staircase_character(&plan, &equal))?;
        prop_assert!((a - b).norm() <= 1e-4, "{a} vs {b}");
        Ok(())
    })
}

pub fn sine_ratio_bound() -> Result<(), String> {
    let cases = 100_000;
    runner(206, cases)
        .run(&(0usize..50, -PI..=PI, any::<bool>()), |(k, x, at_zero)| {
            let s = 2 * k + 1;
            let x = if at_zero { 0.0 } else { x };
            let r = sine_ratio(s, 2.0 * x);
            prop_assert!(r.abs() <= s as f64 * (1.0 + 1e-12), "s={s} x={x} r={r}");
            if x == 0.0 {
                prop_assert!((r - s as f64).abs() <= 1e-12);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// state-set-tester

pub fn membership_perfect_completeness() -> Result<(), String> {
    run(301, (2usize..=5, 1usize..=6, 0.1f64..=1.0, any::<u64>()), |(d, m, eps, seed)| {
        let set = random_set(d, m, seed);
        let plan = ok(plan_membership(eps, m))?;
        let mut rng = seeded_rng(seed ^ 0x5eed);
        let phi = set.states()[rng.random_range(0..m)].clone();
        for _ in 0..20 {
            let v = ok(run_membership_test(&phi, &set, &plan, &mut rng))?;
            prop_assert_eq!(v.decision, Decision::Member);
        }
        Ok(())
    })
}

pub fn exact_tail_dominance() -> Result<(), String> {
    run(302, (0.1f64..=1.0, 1usize..=128), |(eps, m)| {
        let exact = ok(plan_membership(eps, m))?.n;
        if let Some(closed) = chernoff_closed_form_copies(eps, m) {
            prop_assert!(exact <= closed, "ε={eps} |P|={m}: {exact} > {closed}");
        }
        Ok(())
    })
}

pub fn plan_monotone_in_epsilon() -> Result<(), String> {
    run(303, (0.1f64..=1.0, 0.1f64..=1.0, 1usize..=64), |(a, b, m)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let n_lo = ok(plan_membership(lo, m))?.n;
        let n_hi = ok(plan_membership(hi, m))?.n;
        prop_assert!(n_lo >= n_hi, "n({lo}) = {n_lo} < n({hi}) = {n_hi} at |P| = {m}");
        Ok(())
    })
}

pub fn plan_monotone_in_set_size() -> Result<(), String> {
    run(304, (0.1f64..=1.0, 1usize..=256, 1usize..=256), |(eps, a, b)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(ok(plan_membership(eps, lo))?.n <= ok(plan_membership(eps, hi))?.n);
        Ok(())
    })
}

fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let c = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
            c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
        })
        .collect()
}

fn empirical_tv(x1: f64, n: u64, draws: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut counts = vec![0usize; n as usize + 1];
    for _ in 0..draws {
        let x = sample_type_statistic(x1, n, &mut rng);
        counts[(x * n as f64).round() as usize] += 1;
    }
    let pmf = binomial_pmf(n, x1);
    0.5 * counts
        .iter()
        .zip(&pmf)
        .map(|(&c, p)| (c as f64 / draws as f64 - p).abs())
        .sum::<f64>()
}

/// Ten thousand draws per case; the `10⁶`-sample bound of 0.005 is checked
/// separately at fixed overlaps.
pub fn sample_distribution() -> Result<(), String> {
    run(305, (0.0f64..=1.0, any::<u64>()), |(x1, seed)| {
        let tv = empirical_tv(x1, 10, 10_000, seed);
        prop_assert!(tv <= 0.03, "x1 = {x1}: TV = {tv}");
        Ok(())
    })
}

pub fn sample_distribution_large() -> Result<(), String> {
    for (i, x1) in [0.1, 0.5, 0.75, 0.93].into_iter().enumerate() {
        let tv = empirical_tv(x1, 10, 1_000_000, 3050 + i as u64);
        if tv > 0.005 {
            return Err(format!("x1 = {x1}: TV = {tv} at 10^6 samples"));
        }
    }
    Ok(())
}

fn variance_z(x1: f64, n: u64, draws: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let xs: Vec<f64> = (0..draws).map(|_| sample_type_statistic(x1, n, &mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / draws as f64;
    let sample_var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    // central moments of Bin(n, x1) / n
    let nf = n as f64;
    let pq = x1 * (1.0 - x1);
    let var = pq / nf;
    let mu4 = nf * pq * (1.0 + 3.0 * (nf - 2.0) * pq) / nf.powi(4);
    let se = ((mu4 - var * var).max(0.0) / draws as f64).sqrt();
    if se == 0.0 {
        if sample_var.abs() <= 1e-15 { 0.0 } else { f64::INFINITY }
    } else {
        (sample_var - var).abs() / se
    }
}

/// Exact identity against the tensor oracle per case; the empirical
/// variance uses a family-wise 5-SE band over the 10³ cases.
pub fn variance_identity() -> Result<(), String> {
    run(306, (2usize..=3, 1usize..=5, any::<u64>()), |(d, n, seed)| {
        prop_assume!(d.pow(n as u32) <= 243);
        let mut rng = seeded_rng(seed);
        let phi = ok(PureState::random(d, &mut rng))?;
        let psi = ok(PureState::random(d, &mut rng))?;
        let x1 = ok(overlap(&psi, &phi))?;
        let m1 = ok(observable_moments(&phi, &psi, n, 1))?;
        let m2 = ok(observable_moments(&phi, &psi, n, 2))?;
        prop_assert!((m2 - m1 * m1 - x1 * (1.0 - x1) / n as f64).abs() <= 1e-10);
        let z = variance_z(x1, n as u64, 4000, seed);
        prop_assert!(z <= 5.0, "variance off by {z} standard errors");
        Ok(())
    })
}

pub fn variance_identity_fixed() -> Result<(), String> {
    for (i, (x1, n)) in [(0.3, 4u64), (0.5, 10), (0.9, 25), (0.99, 100)].into_iter().enumerate() {
        let z = variance_z(x1, n, 200_000, 3060 + i as u64);
        if z > 3.0 {
            return Err(format!("x1 = {x1}, n = {n}: variance off by {z} standard errors"));
        }
    }
    Ok(())
}

// unitary-tester

fn mode_strategy() -> impl Strategy<Value = (TestMode, usize)> {
    prop_oneof![
        Just((TestMode::QubitKnown, 2)),
        Just((TestMode::QubitSwap, 2)),
        (3usize..=5).prop_map(|d| (TestMode::QuditKnown, d)),
        (3usize..=5).prop_map(|d| (TestMode::QuditSwap, d)),
    ]
}

pub fn analyze_phase_invariance() -> Result<(), String> {
    run(401, (mode_strategy(), 0.2f64..=1.0, any::<u64>(), 0.0..TAU), |((mode, d), eps, seed, gamma)| {
        let plan = ok(plan_unitary(mode, d, eps))?;
        let mut rng = seeded_rng(seed);
        let u = ok(haar_random_unitary_with(d, &mut rng))?;
        let v = ok(haar_random_unitary_with(d, &mut rng))?;
        let a = ok(analyze(&u, &v, &plan))?;
        let b = ok(analyze(&u, &v.with_global_phase(gamma), &plan))?;
        prop_assert!((a.character_ratio.norm() - b.character_ratio.norm()).abs() <= 1e-12);
        prop_assert!((a.accept_prob - b.accept_prob).abs() <= 1e-12);
        Ok(())
    })
}

pub fn analyze_conjugation_invariance() -> Result<(), String> {
    run(402, (mode_strategy(), 0.2f64..=1.0, any::<u64>()), |((mode, d), eps, seed)| {
        let plan = ok(plan_unitary(mode, d, eps))?;
        let mut rng = seeded_rng(seed);
        let u = ok(haar_random_unitary_with(d, &mut rng))?;
        let v = ok(haar_random_unitary_with(d, &mut rng))?;
        let w = ok(haar_random_unitary_with(d, &mut rng))?;
        let a = ok(analyze(&u, &v, &plan))?;
        let b = ok(analyze(&ok(u.conjugate_by(&w))?, &ok(v.conjugate_by(&w))?, &plan))?;
        prop_assert!((a.accept_prob - b.accept_prob).abs() <= 1e-12, "{} vs {}", a.accept_prob, b.accept_prob);
        Ok(())
    })
}

pub fn soundness_dominance() -> Result<(), String> {
    run(403, (mode_strategy(), 0.05f64..=1.0, 0.0f64..=1.0, any::<u64>()), |((mode, d), eps, t, seed)| {
        let plan = ok(plan_unitary(mode, d, eps))?;
        let dist = eps + t * (1.0 - eps);
        let mut rng = seeded_rng(seed);
        let (u, v) = ok(pair_at_distance_with(d, dist, &mut rng))?;
        let w = ok(haar_random_unitary_with(d, &mut rng))?;
        let (u, v) = (ok(u.conjugate_by(&w))?, ok(v.conjugate_by(&w))?);
        prop_assert!(ok(unitary_distance(&u, &v))? >= eps - 1e-9);
        let a = ok(analyze(&u, &v, &plan))?;
        let cap = soundness_certificate(&plan, eps);
        prop_assert!(a.accept_prob <= cap + 1e-12, "{mode} d={d} ε={eps}: {} > {cap}", a.accept_prob);
        Ok(())
    })
}

pub fn staircase_ratio_cap() -> Result<(), String> {
    run(404, (3usize..=4, prop_oneof![Just(0.3), Just(0.6), 0.05f64..=1.0], any::<u64>()), |(d, eps, seed)| {
        let plan = ok(plan_unitary(TestMode::QuditKnown, d, eps))?;
        let mut rng = seeded_rng(seed);
        let u = ok(haar_random_unitary_with(d, &mut rng))?;
        let v = ok(haar_random_unitary_with(d, &mut rng))?;
        let inner = ok(u.relative_to(&v))?.trace().norm() / d as f64;
        prop_assume!(inner <= 1.0 - eps * eps);
        let a = ok(analyze(&u, &v, &plan))?;
        let cap = 2.0 / (plan.s.unwrap() as f64 * eps);
        prop_assert!(a.character_ratio.norm() <= cap, "{} > {cap}", a.character_ratio.norm());
        Ok(())
    })
}

fn small_plan(d: usize, n: usize) -> UnitaryTestPlan {
    let (mode, lambda, s) = if d == 2 {
        (TestMode::QubitKnown, Partition::new(vec![n - 1, 1]).unwrap(), None)
    } else {
        (TestMode::QuditKnown, Partition::new(vec![2, 1, 0]).unwrap(), Some(2))
    };
    UnitaryTestPlan {
        mode,
        d,
        epsilon: 1.0,
        n,
        lambda,
        s,
        repetitions: 1,
        soundness_cap: 1.0,
        ancilla_dimension: 1,
    }
}

pub fn unitary_oracle_equivalence() -> Result<(), String> {
    let grid = prop_oneof![Just((2usize, 3usize)), Just((2, 4)), Just((2, 5)), Just((3, 3))];
    run(405, (grid, any::<u64>()), |((d, n), seed)| {
        let plan = small_plan(d, n);
        let mut rng = seeded_rng(seed);
        let u = ok(haar_random_unitary_with(d, &mut rng))?;
        let v = ok(haar_random_unitary_with(d, &mut rng))?;
        let tensor = ok(known_accept_prob(&u, &v, &plan.lambda, n))?;
        let closed = ok(analyze(&u, &v, &plan))?.accept_prob;
        prop_assert!((tensor - closed).abs() <= 1e-9, "{tensor} vs {closed}");
        Ok(())
    })
}

pub fn qubit_ratio_is_bialternant() -> Result<(), String> {
    run(406, (3usize..=40, 0.0..TAU, 0.0..TAU), |(n, a, b)| {
        let plan = small_plan(2, n);
        let ratio = ok(qcert::unitary::character_ratio(&plan, &[a, b]))?;
        let chi = ok(weyl_character(&plan.lambda, &EigenphaseList::wrapped(vec![a, b])))?;
        prop_assert!((ratio * (n - 1) as f64 - chi).norm() <= 1e-9);
        Ok(())
    })
}

// brute-force-oracle

type ProjectorKey = (Vec<usize>, usize, usize);

fn projector(lambda: &Partition, n: usize, d: usize) -> TensorOperator {
    static CACHE: OnceLock<Mutex<HashMap<ProjectorKey, TensorOperator>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (lambda.parts().to_vec(), n, d);
    if let Some(p) = cache.lock().unwrap().get(&key) {
        return p.clone();
    }
    let p = isotypic_projector(lambda, n, d).unwrap();
    cache.lock().unwrap().insert(key, p.clone());
    p
}

fn oracle_grid() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![(2usize..=2, 1usize..=6), (3usize..=3, 1usize..=4)]
}

pub fn type_projector_completeness() -> Result<(), String> {
    run(501, (1usize..=5, 1usize..=3), |(n, d)| {
        let dim = d.pow(n as u32);
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        let mut ranks = 0;
        for t in TypeVector::enumerate(n, d) {
            let p = ok(type_projector(&t, d))?;
            ranks += p.rank();
            sum += p.matrix();
        }
        prop_assert_eq!(ranks, dim);
        prop_assert_eq!(max_abs(&(sum - DMatrix::identity(dim, dim))), 0.0);
        Ok(())
    })
}

pub fn isotypic_orthogonality() -> Result<(), String> {
    run(502, (oracle_grid(), any::<usize>(), any::<usize>()), |((d, n), i, j)| {
        let lambdas = partitions(n, d);
        let rank: usize = lambdas.iter().map(|l| projector(l, n, d).rank()).sum();
        prop_assert_eq!(rank, d.pow(n as u32));
        let (a, b) = (&lambdas[i % lambdas.len()], &lambdas[j % lambdas.len()]);
        if a != b {
            let prod = projector(a, n, d).matrix() * projector(b, n, d).matrix();
            prop_assert!(prod.norm() <= 1e-10);
        }
        Ok(())
    })
}

pub fn isotypic_commutation() -> Result<(), String> {
    run(503, (oracle_grid(), any::<usize>(), any::<u64>()), |((d, n), i, seed)| {
        let lambdas = partitions(n, d);
        let p = projector(&lambdas[i % lambdas.len()], n, d);
        let mut rng = seeded_rng(seed);
        let w = ok(tensor_power(&ok(haar_random_unitary_with(d, &mut rng))?, n))?;
        let perms = permutations(n);
        let sigma = ok(permutation_operator(&perms[rng.random_range(0..perms.len())], d))?;
        let c1 = p.matrix() * w.matrix() - w.matrix() * p.matrix();
        let c2 = p.matrix() * sigma.matrix() - sigma.matrix() * p.matrix();
        prop_assert!(max_abs(&c1) <= 1e-10 && max_abs(&c2) <= 1e-10);
        Ok(())
    })
}

pub fn closed_forms_match_oracle() -> Result<(), String> {
    run(504, (oracle_grid(), any::<usize>(), any::<u64>()), |((d, n), i, seed)| {
        prop_assume!(n <= 5);
        let mut rng = seeded_rng(seed);
        let lambdas = partitions(n, d);
        let lambda = &lambdas[i % lambdas.len()];
        let w = ok(haar_random_unitary_with(d, &mut rng))?;
        let tensor = qcert::oracle::trace_product(ok(tensor_power(&w, n))?.matrix(), projector(lambda, n, d).matrix())
            / big_to_f64(&dim_symmetric_irrep(lambda));
        let closed = ok(weyl_character(lambda, &ok(eigenphases(&w))?))?;
        prop_assert!((tensor - closed).norm() <= 1e-9);
        let psi = ok(PureState::random(d, &mut rng))?;
        let x: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let types = TypeVector::enumerate(n, d);
        let t = &types[i % types.len()];
        let formula = big_to_f64(&multinomial(t))
            * t.counts().iter().zip(&x).map(|(&c, xi)| xi.powi(c as i32)).product::<f64>();
        prop_assert!((ok(type_probability(&psi, t))? - formula).abs() <= 1e-9);
        Ok(())
    })
}

// harness-cli

fn experiment_strategy() -> impl Strategy<Value = ExperimentSpec> {
    (any::<bool>(), any::<bool>(), 0.1f64..=0.8, 2usize..=4, 1usize..=6, 1u64..=300, any::<u64>()).prop_map(
        |(state_set, far, eps, d, m, trials, seed)| {
            let instance = if far { InstanceKind::Far } else { InstanceKind::Member };
            let kind = if state_set {
                ExperimentKind::StateSetMembership
            } else {
                ExperimentKind::UnitaryEquality
            };
            ExperimentSpec::new(kind, eps, d, seed)
                .with_set_size(m)
                .with_trials(trials)
                .with_instance(instance)
        },
    )
}

/// Far instances cannot always be built (small `d`, many states, large ε);
/// those cases are discarded.
fn attempt(spec: ExperimentSpec) -> Result<qcert::harness::ExperimentReport, TestCaseError> {
    match run_experiment(spec) {
        Err(qcert::Error::Infeasible(msg)) => Err(TestCaseError::reject(msg)),
        r => ok(r),
    }
}

pub fn report_reproducibility() -> Result<(), String> {
    run(601, experiment_strategy(), |spec| {
        let a = attempt(spec.clone())?;
        let b = attempt(spec)?;
        prop_assert_eq!(ok(serde_json::to_string(&a))?, ok(serde_json::to_string(&b))?);
        Ok(())
    })
}

pub fn parallel_serial_equivalence() -> Result<(), String> {
    run(602, (experiment_strategy(), 0.0f64..=1.0), |(spec, p)| {
        let a = attempt(spec.clone())?;
        let b = attempt(spec.clone().serial())?;
        prop_assert_eq!(a.accepts, b.accepts);
        let f = |rng: &mut rand_chacha::ChaCha8Rng| rng.random::<f64>() < p;
        prop_assert_eq!(count_accepts(spec.trials, spec.seed, true, f), count_accepts(spec.trials, spec.seed, false, f));
        Ok(())
    })
}

pub fn report_recomputable() -> Result<(), String> {
    run(603, experiment_strategy(), |spec| {
        let report = attempt(spec)?;
        let v: serde_json::Value = ok(serde_json::to_value(&report))?;
        let accepts = v["accepts"].as_u64().unwrap();
        let trials = v["trials"].as_u64().unwrap();
        let prediction = v["analytic_prediction"].as_f64().unwrap();
        let (lo, hi) = wilson_interval(accepts, trials, WILSON_Z_99);
        prop_assert_eq!(v["wilson_interval"][0].as_f64().unwrap(), lo);
        prop_assert_eq!(v["wilson_interval"][1].as_f64().unwrap(), hi);
        let rate = accepts as f64 / trials as f64;
        prop_assert_eq!(v["empirical_accept_rate"].as_f64().unwrap(), rate);
        let inside = prediction >= lo - 1e-12 && prediction <= hi + 1e-12;
        let respected = match v["side"].as_str().unwrap() {
            "member" => accepts == trials,
            _ => rate <= 1.0 / 3.0 + 0.5 * (hi - lo),
        };
        prop_assert_eq!(v["pass"].as_bool().unwrap(), inside && respected);
        Ok(())
    })
}

pub const ALL: &[(&str, Check)] = &[
    ("distance_symmetry", distance_symmetry),
    ("distance_phase_invariance", distance_phase_invariance),
    ("trace_distance_range", trace_distance_range),
    ("eigenphase_round_trip", eigenphase_round_trip),
    ("pair_at_distance_checks", pair_at_distance_checks),
    ("schur_weyl_completeness", schur_weyl_completeness),
    ("character_bound", character_bound),
    ("staircase_matches_bialternant", staircase_matches_bialternant),
    ("symmetric_dimension_sandwich", symmetric_dimension_sandwich),
    ("staircase_continuity", staircase_continuity),
    ("sine_ratio_bound", sine_ratio_bound),
    ("membership_perfect_completeness", membership_perfect_completeness),
    ("exact_tail_dominance", exact_tail_dominance),
    ("plan_monotone_in_epsilon", plan_monotone_in_epsilon),
    ("plan_monotone_in_set_size", plan_monotone_in_set_size),
    ("sample_distribution", sample_distribution),
    ("sample_distribution_large", sample_distribution_large),
    ("variance_identity", variance_identity),
    ("variance_identity_fixed", variance_identity_fixed),
    ("analyze_phase_invariance", analyze_phase_invariance),
    ("analyze_conjugation_invariance", analyze_conjugation_invariance),
    ("soundness_dominance", soundness_dominance),
    ("staircase_ratio_cap", staircase_ratio_cap),
    ("unitary_oracle_equivalence", unitary_oracle_equivalence),
    ("qubit_ratio_is_bialternant", qubit_ratio_is_bialternant),
    ("type_projector_completeness", type_projector_completeness),
    ("isotypic_orthogonality", isotypic_orthogonality),
    ("isotypic_commutation", isotypic_commutation),
    ("closed_forms_match_oracle", closed_forms_match_oracle),
    ("report_reproducibility", report_reproducibility),
    ("parallel_serial_equivalence", parallel_serial_equivalence),
    ("report_recomputable", report_recomputable),
];
