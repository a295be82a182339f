//! Membership testing of an unknown pure state against a finite known set.
//!
//! For each `φ ∈ P` the type observable `M_φ = Σ_t (t_1/n) Π_t` is measured on
//! `ψ^{⊗n}`; its outcome is `t_1/n` with `t_1 ~ Binomial(n, |<φ|ψ>|²)`. The
//! tester declares membership iff some outcome exceeds `1 − ε²/2`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::quantum::{overlap, trace_distance_pure, PureState, ALGEBRAIC_TOL};

/// Completeness target; soundness is `1 − COMPLETENESS`.
pub const COMPLETENESS: f64 = 2.0 / 3.0;

/// `plan_membership(ε, m).n <= PLAN_CONSTANT · ε⁻⁴ · ln(m + 1)`.
pub const PLAN_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct StateSet {
    states: Vec<PureState>,
    min_pairwise_distance: Option<f64>,
}

impl StateSet {
    pub fn new(states: Vec<PureState>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| invalid("a state set needs at least one state"))?;
        let d = first.dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch(d, bad.dim()));
        }
        let mut min = None::<f64>;
        for i in 0..states.len() {
            for j in i + 1..states.len() {
                let dist = trace_distance_pure(&states[i], &states[j])?;
                min = Some(min.map_or(dist, |m| m.min(dist)));
            }
        }
        Ok(Self {
            states,
            min_pairwise_distance: min,
        })
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `δ`: minimum trace distance over distinct pairs; `None` for a singleton.
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        self.min_pairwise_distance
    }

    /// `D(ψ, P) = min_φ D(ψ, φ)`.
    pub fn distance_to(&self, psi: &PureState) -> Result<f64> {
        self.states
            .iter()
            .map(|phi| trace_distance_pure(psi, phi))
            .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d)))
    }

    /// `|<φ|ψ>|²` for each element.
    pub fn overlaps(&self, psi: &PureState) -> Result<Vec<f64>> {
        self.states.iter().map(|phi| overlap(psi, phi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipPlan {
    pub epsilon: f64,
    pub set_size: usize,
    /// Copies consumed per observable `M_φ`.
    pub n: u64,
    pub threshold: f64,
    pub chernoff_s: f64,
}

impl MembershipPlan {
    /// Worst-case physical copies when every `M_φ` gets fresh copies.
    pub fn total_copies(&self) -> u64 {
        self.n * self.set_size as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Member,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub statistic: f64,
}

fn clamp_unit(x: f64) -> f64 {
    if x >= 1.0 - ALGEBRAIC_TOL {
        1.0
    } else {
        x.max(0.0)
    }
}

/// One outcome `t_1/n` of `M` on `ψ^{⊗n}` given `x1 = |<φ|ψ>|²`.
pub fn sample_type_statistic<R: Rng + ?Sized>(x1: f64, n: u64, rng: &mut R) -> f64 {
    let x1 = clamp_unit(x1);
    if x1 == 1.0 {
        return 1.0;
    }
    if x1 == 0.0 || n == 0 {
        return 0.0;
    }
    let t1 = Binomial::new(n, x1).expect("valid binomial").sample(rng);
    t1 as f64 / n as f64
}

/// `E e^{sX} = (1 + (e^{s/n} − 1) x1)^n`.
pub fn mgf_type_statistic(x1: f64, n: u64, s: f64) -> f64 {
    ln_mgf_type_statistic(x1, n, s).exp()
}

/// `ln E e^{sX}`; finite where the MGF itself overflows.
pub fn ln_mgf_type_statistic(x1: f64, n: u64, s: f64) -> f64 {
    let n_f = n as f64;
    n_f * ((s / n_f).exp_m1() * x1).ln_1p()
}

fn ln_binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0)
        + kf * p.ln()
        + (nf - kf) * (-p).ln_1p()
}

/// `Pr(Binomial(n, p)/n > threshold)` by direct summation of the upper tail.
pub fn binomial_tail_above(n: u64, p: f64, threshold: f64) -> f64 {
    let p = clamp_unit(p);
    let first = (0..=n).find(|&k| k as f64 / n as f64 > threshold);
    let Some(first) = first.map(|k| k.max(tail_start(n, threshold))) else {
        return 0.0;
    };
    if p == 1.0 {
        return 1.0;
    }
    if p == 0.0 {
        return if first == 0 { 1.0 } else { 0.0 };
    }
    let terms: Vec<f64> = (first..=n).map(|k| ln_binomial_pmf(n, k, p)).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    (max.exp() * terms.iter().map(|t| (t - max).exp()).sum::<f64>()).min(1.0)
}

/// Smallest `k` with `k/n > threshold`, found without scanning from zero.
fn tail_start(n: u64, threshold: f64) -> u64 {
    let guess = (threshold * n as f64).floor().max(0.0) as u64;
    let mut k = guess.saturating_sub(1).min(n);
    while k > 0 && (k - 1) as f64 / n as f64 > threshold {
        k -= 1;
    }
    while k <= n && k as f64 / n as f64 <= threshold {
        k += 1;
    }
    k
}

/// Probability that the membership tester declares `Member` when the
/// element overlaps are `overlaps`.
pub fn membership_accept_probability(overlaps: &[f64], plan: &MembershipPlan) -> f64 {
    let reject: f64 = overlaps
        .iter()
        .map(|&x| 1.0 - binomial_tail_above(plan.n, x, plan.threshold))
        .product();
    1.0 - reject
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")))
    }
}

/// Soundness-side false-accept probability per observable at the worst far
/// overlap `1 − ε²`.
pub fn far_tail(epsilon: f64, n: u64) -> f64 {
    binomial_tail_above(n, 1.0 - epsilon * epsilon, 1.0 - epsilon * epsilon / 2.0)
}

/// Smallest `n` with `(1 − q(n))^{|P|} >= 2/3`, where `q(n)` is the exact
/// binomial tail at the worst far overlap `1 − ε²`.
pub fn plan_membership(epsilon: f64, set_size: usize) -> Result<MembershipPlan> {
    check_epsilon(epsilon)?;
    if set_size == 0 {
        return Err(invalid("set size must be at least 1"));
    }
    let threshold = 1.0 - epsilon * epsilon / 2.0;
    let m = set_size as i32;
    let mut n = 1u64;
    while (1.0 - far_tail(epsilon, n)).powi(m) < COMPLETENESS {
        n += 1;
    }
    Ok(MembershipPlan {
        epsilon,
        set_size,
        n,
        threshold,
        chernoff_s: 2.0 * n as f64 * epsilon * epsilon,
    })
}

/// Copy count from the closed-form Chernoff analysis with per-copy factor
/// `1 − ε⁴ + ε⁵`; `None` when that factor is not below one.
pub fn chernoff_closed_form_copies(epsilon: f64, set_size: usize) -> Option<u64> {
    let base = 1.0 - epsilon.powi(4) + epsilon.powi(5);
    if !(base > 0.0 && base < 1.0) {
        return None;
    }
    let target = 1.0 - COMPLETENESS.powf(1.0 / set_size as f64);
    Some((target.ln() / base.ln()).ceil().max(1.0) as u64)
}

pub fn run_membership_test<R: Rng + ?Sized>(
    psi: &PureState,
    set: &StateSet,
    plan: &MembershipPlan,
    rng: &mut R,
) -> Result<Verdict> {
    if plan.set_size != set.len() {
        return Err(invalid(format!(
            "plan built for {} states, set has {}",
            plan.set_size,
            set.len()
        )));
    }
    let overlaps = set.overlaps(psi)?;
    Ok(decide_membership(&overlaps, plan, rng))
}

/// Draws one statistic per element and applies the threshold rule.
pub fn decide_membership<R: Rng + ?Sized>(overlaps: &[f64], plan: &MembershipPlan, rng: &mut R) -> Verdict {
    let statistic = overlaps
        .iter()
        .map(|&x| sample_type_statistic(x, plan.n, rng))
        .fold(f64::NEG_INFINITY, f64::max);
    let decision = if statistic > plan.threshold {
        Decision::Member
    } else {
        Decision::Far
    };
    Verdict { decision, statistic }
}

fn check_gamma_theta(gamma: f64, theta: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(invalid(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    if !(theta > 0.0) {
        return Err(invalid(format!("theta must be positive, got {theta}")));
    }
    Ok(())
}

fn unit_clamp(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Chebyshev lower bounds `1 − Var/(γθ)²` on reporting correctly on either side.
pub fn chebyshev_single_bounds(mean: f64, variance: f64, gamma: f64, theta: f64) -> Result<(f64, f64)> {
    check_gamma_theta(gamma, theta)?;
    if !(variance >= 0.0) || !mean.is_finite() {
        return Err(invalid("variance must be non-negative and mean finite"));
    }
    let b = unit_clamp(1.0 - variance / (gamma * theta).powi(2));
    Ok((b, b))
}

/// Lower bound on accepting with the min-tester, from the smallest-mean variable.
pub fn min_tester_accept_bound(means: &[f64], variances: &[f64], gamma: f64, theta: f64) -> Result<f64> {
    check_gamma_theta(gamma, theta)?;
    if means.is_empty() || means.len() != variances.len() {
        return Err(invalid("means and variances must be non-empty and of equal length"));
    }
    let k = means
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    Ok(unit_clamp(1.0 - variances[k] / (gamma * theta).powi(2)))
}

/// `(accept_lb, reject_lb)` for the min-tester `min_i X_i <= (1−γ)θ`.
pub fn min_tester_bounds(means: &[f64], variances: &[f64], gamma: f64, theta: f64) -> Result<(f64, f64)> {
    let accept = min_tester_accept_bound(means, variances, gamma, theta)?;
    let cut = (1.0 - gamma) * theta;
    if let Some(bad) = means.iter().find(|&&m| m <= cut) {
        return Err(invalid(format!(
            "reject bound needs every mean above (1−γ)θ = {cut}, got {bad}"
        )));
    }
    let reject = means
        .iter()
        .zip(variances)
        .map(|(&m, &v)| (1.0 - v / (m - cut).powi(2)).max(0.0))
        .product();
    Ok((accept, reject))
}

/// Copies for the ℓ₂ min-tester: smallest `n` with
/// `g(n) = c ε⁻⁴ (1/n² + ε²/n) <= 1/3` and `(1 − g(n))^{|P|} >= 2/3`.
pub fn plan_l2_membership(epsilon: f64, set_size: usize, c: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if !(c > 0.0) {
        return Err(invalid(format!("variance constant must be positive, got {c}")));
    }
    if set_size == 0 {
        return Err(invalid("set size must be at least 1"));
    }
    let g = |n: u64| {
        let nf = n as f64;
        c * epsilon.powi(-4) * (1.0 / (nf * nf) + epsilon * epsilon / nf)
    };
    let ok = |n: u64| g(n) <= 1.0 / 3.0 && (1.0 - g(n)).powi(set_size as i32) >= COMPLETENESS;
    // g is decreasing, so bracket then bisect.
    let mut hi = 1u64;
    while !ok(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if lo >= 1 && ok(lo) { lo } else { hi })
}

/// Exponential-Markov bound `1 − E e^{sX} / e^{s(1−γ)θ}`, clamped to `[0, 1]`.
pub fn chernoff_bounds(mgf_value: f64, s: f64, gamma: f64, theta: f64) -> Result<f64> {
    if !(mgf_value > 0.0) {
        return Err(invalid(format!("MGF value must be positive, got {mgf_value}")));
    }
    Ok(chernoff_bounds_ln(mgf_value.ln(), s, gamma, theta))
}

/// [`chernoff_bounds`] taking `ln E e^{sX}`.
pub fn chernoff_bounds_ln(ln_mgf: f64, s: f64, gamma: f64, theta: f64) -> f64 {
    unit_clamp(-(ln_mgf - s * (1.0 - gamma) * theta).exp_m1())
}

/// A state at trace distance exactly `ε` from `set[anchor]` and at least `ε`
/// from every element, obtained by mixing in a random orthogonal direction.
pub fn far_state<R: Rng + ?Sized>(
    set: &StateSet,
    anchor: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<PureState> {
    check_epsilon(epsilon)?;
    let phi = set
        .states()
        .get(anchor)
        .ok_or_else(|| invalid(format!("anchor {anchor} out of range")))?;
    let target = (epsilon + 1e-12).min(1.0);
    for _ in 0..10_000 {
        let chi = orthogonal_direction(phi, rng)?;
        let a = (1.0 - target * target).max(0.0).sqrt();
        let amps = phi
            .amplitudes()
            .iter()
            .zip(chi.amplitudes())
            .map(|(p, c)| p * a + c * target)
            .collect();
        let psi = PureState::normalized(amps)?;
        if set.distance_to(&psi)? >= epsilon {
            return Ok(psi);
        }
    }
    Err(Error::Infeasible(format!(
        "no state at distance {epsilon} from element {anchor} stays that far from the rest"
    )))
}

/// Random unit vector orthogonal to `phi`.
pub fn orthogonal_direction<R: Rng + ?Sized>(phi: &PureState, rng: &mut R) -> Result<PureState> {
    loop {
        let r = PureState::random(phi.dim(), rng)?;
        let proj = phi.inner(&r)?;
        let amps: Vec<_> = r
            .amplitudes()
            .iter()
            .zip(phi.amplitudes())
            .map(|(x, p)| x - p * proj)
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return PureState::normalized(amps);
        }
    }
}
