//! Closed-form required-delay calculators.
//!
//! Every bound has the shape `T ≥ (δ/c)·R` for some effective reward `R`;
//! all of them go through [`scaled_delay`] so that degenerate modifiers
//! (`G = 1`, `p = 0`, `m = 1`, ...) reproduce the linear bound bit-for-bit.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::{RewardModel, Scenario};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest grinding size for which `H_G` is summed term by term.
pub const HARMONIC_DIRECT_LIMIT: u64 = 1_000_000;

#[inline]
fn scaled_delay(speedup: f64, cost_rate: f64, reward: f64) -> f64 {
    speedup / cost_rate * reward
}

/// Expected profit `V − cT/δ` of committing to one full evaluation.
pub fn expected_profit(delay: f64, speedup: f64, cost_rate: f64, reward: f64) -> f64 {
    reward - cost_rate * delay / speedup
}

/// Break-even delay `(δ/c)·E[V]`: the round is secure for every delay at or
/// above it and insecure below it.
pub fn linear_threshold(speedup: f64, cost_rate: f64, expected_reward: f64) -> f64 {
    scaled_delay(speedup, cost_rate, expected_reward)
}

/// Worst-case bounds on the adversary's parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterIntervals {
    pub speedup_max: f64,
    pub cost_min: f64,
    pub reward_max: f64,
}

impl ParameterIntervals {
    pub fn new(speedup_max: f64, cost_min: f64, reward_max: f64) -> Result<Self> {
        if !(speedup_max >= 1.0) {
            return Err(Error::arg("speedup_max", "must be >= 1"));
        }
        if !(cost_min > 0.0) {
            return Err(Error::arg("cost_min", "must be > 0"));
        }
        if !(reward_max >= 0.0) {
            return Err(Error::arg("reward_max", "must be >= 0"));
        }
        Ok(Self {
            speedup_max,
            cost_min,
            reward_max,
        })
    }
}

/// Bounds on the first two moments of the reward plus the tolerated
/// probability of a profitable attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBounds {
    pub mean_max: f64,
    pub std_max: f64,
    pub epsilon: f64,
}

impl MomentBounds {
    pub fn new(mean_max: f64, std_max: f64, epsilon: f64) -> Result<Self> {
        if !(mean_max >= 0.0) {
            return Err(Error::arg("mean_max", "must be >= 0"));
        }
        if !(std_max >= 0.0) {
            return Err(Error::arg("std_max", "must be >= 0"));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::arg("epsilon", "must be in (0, 1]"));
        }
        Ok(Self {
            mean_max,
            std_max,
            epsilon,
        })
    }
}

/// `(δ_max/c_min)·V_max`, secure for every parameter vector inside the box.
pub fn robust_interval_threshold(iv: &ParameterIntervals) -> f64 {
    scaled_delay(iv.speedup_max, iv.cost_min, iv.reward_max)
}

/// `(δ_max/c_min)·(μ_max + σ_max/√ε)`; at or above it the probability that an
/// attempt is profitable is at most `ε` (Chebyshev).
pub fn epsilon_robust_threshold(iv: &ParameterIntervals, mb: &MomentBounds) -> Result<f64> {
    if !(mb.epsilon > 0.0) {
        return Err(Error::arg("epsilon", "must be > 0"));
    }
    let reward = mb.mean_max + mb.std_max / mb.epsilon.sqrt();
    Ok(scaled_delay(iv.speedup_max, iv.cost_min, reward))
}

/// Delay against an adversary that exploits several protocols sharing one
/// beacon output. With `max_attacked = Some(k)` the adversary is limited to
/// at most `k` protocols, and the bound uses the `k` largest means.
pub fn composition_threshold(
    speedup: f64,
    cost_rate: f64,
    protocol_means: &[f64],
    max_attacked: Option<usize>,
) -> Result<f64> {
    if protocol_means.is_empty() {
        return Err(Error::arg("protocol_means", "must not be empty"));
    }
    if protocol_means.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::arg("protocol_means", "must be >= 0"));
    }
    let total = match max_attacked {
        None => protocol_means.iter().sum::<f64>(),
        Some(0) => return Err(Error::arg("k", "must be >= 1")),
        Some(k) if k > protocol_means.len() => {
            return Err(Error::arg(
                "k",
                format!(
                    "{k} exceeds the number of protocols ({})",
                    protocol_means.len()
                ),
            ))
        }
        Some(k) => {
            let mut sorted = protocol_means.to_vec();
            sorted.sort_by(|a, b| b.total_cmp(a));
            sorted[..k].iter().sum::<f64>()
        }
    };
    Ok(scaled_delay(speedup, cost_rate, total))
}

/// Multi-round bound over prefix expectations, where `prefix_means[k]` is the
/// expected total reward of rounds `1..=k+1`.
pub fn multiround_threshold(speedup: f64, cost_rate: f64, prefix_means: &[f64]) -> Result<f64> {
    if prefix_means.is_empty() {
        return Err(Error::arg("prefix_means", "must not be empty"));
    }
    if !(prefix_means[0] >= 0.0) {
        return Err(Error::arg("prefix_means", "must be >= 0"));
    }
    if let Some(i) = prefix_means.windows(2).position(|w| !(w[1] >= w[0])) {
        return Err(Error::arg(
            "prefix_means",
            format!("decreases between rounds {} and {}", i + 1, i + 2),
        ));
    }
    let worst = prefix_means
        .iter()
        .enumerate()
        .map(|(i, total)| total / (i + 1) as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(scaled_delay(speedup, cost_rate, worst))
}

/// Largest number of rounds accepted by [`multiround_subset_threshold`].
pub const SUBSET_ENUMERATION_LIMIT: usize = 20;

/// Multi-round bound quantified over every attacked subset of rounds: the
/// worst average expected reward over all non-empty subsets of
/// `round_means`. Enumerates all `2^n − 1` subsets.
pub fn multiround_subset_threshold(
    speedup: f64,
    cost_rate: f64,
    round_means: &[f64],
) -> Result<f64> {
    let n = round_means.len();
    if n == 0 {
        return Err(Error::arg("round_means", "must not be empty"));
    }
    if n > SUBSET_ENUMERATION_LIMIT {
        return Err(Error::arg(
            "round_means",
            format!("at most {SUBSET_ENUMERATION_LIMIT} rounds can be enumerated"),
        ));
    }
    if round_means.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::arg("round_means", "must be >= 0"));
    }
    let mut worst = f64::NEG_INFINITY;
    for mask in 1u32..(1u32 << n) {
        let (sum, k) = round_means
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold((0.0, 0u32), |(s, k), (_, m)| (s + m, k + 1));
        worst = worst.max(sum / k as f64);
    }
    Ok(scaled_delay(speedup, cost_rate, worst))
}

/// Grinding bound `δ·E[V_max] / (c·G^α)`. `α = 1` provisions `G` full
/// streams; `α = 1/2` is the shared-stream sublinear regime.
pub fn grinding_threshold(
    speedup: f64,
    cost_rate: f64,
    grinding_size: u64,
    expected_max_reward: f64,
    cost_exponent: f64,
) -> f64 {
    let effective_cost = cost_rate * (grinding_size as f64).powf(cost_exponent);
    scaled_delay(speedup, effective_cost, expected_max_reward)
}

/// `H_G = Σ_{i=1..G} 1/i`. Summed directly up to [`HARMONIC_DIRECT_LIMIT`],
/// asymptotic `ln G + γ + 1/(2G)` above.
pub fn harmonic_number(g: u64) -> f64 {
    if g <= HARMONIC_DIRECT_LIMIT {
        // smallest terms first
        (1..=g).rev().map(|i| 1.0 / i as f64).sum()
    } else {
        let g = g as f64;
        g.ln() + EULER_GAMMA + 1.0 / (2.0 * g)
    }
}

/// Expected maximum of `G` i.i.d. exponential rewards, `μ·H_G`.
pub fn expected_max_exponential(mean: f64, grinding_size: u64) -> f64 {
    mean * harmonic_number(grinding_size)
}

/// Expected maximum of `G` independent draws from `model`.
///
/// `G = 1` returns [`RewardModel::expected_reward`] exactly. `Bounded` uses
/// its bound and `MarkovOu` its expected reward, since neither describes the
/// spread across seeds.
pub fn expected_max_reward(model: &RewardModel, grinding_size: u64) -> Result<f64> {
    if grinding_size == 0 {
        return Err(Error::arg("grinding_size", "must be >= 1"));
    }
    if grinding_size == 1 {
        return Ok(model.expected_reward());
    }
    Ok(match model {
        RewardModel::Constant { value } => *value,
        RewardModel::Exponential { mean } => expected_max_exponential(*mean, grinding_size),
        RewardModel::Lognormal { mean, variance } => {
            lognormal_expected_max(*mean, *variance, grinding_size)
        }
        RewardModel::Empirical { samples } => empirical_expected_max(samples, grinding_size),
        RewardModel::Bounded { max } => *max,
        RewardModel::MarkovOu { .. } => model.expected_reward(),
    })
}

/// Exact expectation of the maximum of `G` draws with replacement.
fn empirical_expected_max(samples: &[f64], g: u64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let g = g as i32;
    sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let hi = ((i + 1) as f64 / n).powi(g);
            let lo = (i as f64 / n).powi(g);
            x * (hi - lo)
        })
        .sum()
}

/// `E[max]` of `G` lognormals as `∫ e^{m+sz}·G·Φ(z)^{G−1}·φ(z) dz`, composite
/// Simpson on `z ∈ [−12, 12]`.
fn lognormal_expected_max(mean: f64, variance: f64, g: u64) -> f64 {
    let sigma2 = (1.0 + variance / (mean * mean)).ln();
    let sigma = sigma2.sqrt();
    let mu = mean.ln() - 0.5 * sigma2;
    let gf = g as f64;
    let integrand = |z: f64| {
        let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cdf = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
        if cdf <= 0.0 {
            return 0.0;
        }
        (mu + sigma * z + (gf - 1.0) * cdf.ln()).exp() * gf * phi
    };
    const STEPS: usize = 24_000;
    let (a, b) = (-12.0_f64, 12.0_f64);
    let h = (b - a) / STEPS as f64;
    let mut acc = integrand(a) + integrand(b);
    for i in 1..STEPS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `(δ/c)·E[V]/(1 − p)` for an adversary with abort leverage `p`.
pub fn abort_threshold(
    speedup: f64,
    cost_rate: f64,
    expected_reward: f64,
    abort_probability: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&abort_probability) {
        return Err(Error::arg("abort_probability", "must be in [0, 1)"));
    }
    Ok(scaled_delay(speedup, cost_rate, expected_reward) / (1.0 - abort_probability))
}

/// `(δ·m/c)·E[V]` for a coalition of `m` members splitting the cost.
pub fn coalition_threshold(
    speedup: f64,
    cost_rate: f64,
    coalition_size: u64,
    expected_reward: f64,
) -> f64 {
    scaled_delay(speedup * coalition_size as f64, cost_rate, expected_reward)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Linear,
    RobustInterval,
    Grinding,
    Abort,
    Coalition,
    Composition,
    Multiround,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Linear => "linear",
            Condition::RobustInterval => "robust_interval",
            Condition::Grinding => "grinding",
            Condition::Abort => "abort",
            Condition::Coalition => "coalition",
            Condition::Composition => "composition",
            Condition::Multiround => "multiround",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub condition: Condition,
    /// Smallest secure delay under this condition, in seconds.
    pub required_delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub delay: f64,
    pub secure: bool,
}

/// Required delay per applicable condition and the binding maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub requirements: Vec<Requirement>,
    pub binding_condition: Condition,
    pub esdp: f64,
    pub secure_at: Option<Verdict>,
    pub notes: Vec<String>,
}

impl ThresholdReport {
    pub fn required(&self, condition: Condition) -> Option<f64> {
        self.requirements
            .iter()
            .find(|r| r.condition == condition)
            .map(|r| r.required_delay)
    }
}

fn tagged<T>(condition: Condition, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Condition {
        condition: condition.name(),
        source: Box::new(e),
    })
}

/// Evaluates every condition the scenario's modifiers make applicable and
/// reports the binding one. With `candidate_delay`, also reports whether that
/// delay is secure (equality counts as secure).
pub fn esdp(scenario: &Scenario, candidate_delay: Option<f64>) -> Result<ThresholdReport> {
    scenario.validate()?;
    let env = &scenario.env;
    let (d, c) = (env.speedup, env.cost_rate);
    let ev = scenario.reward.expected_reward();
    let mut reqs = vec![Requirement {
        condition: Condition::Linear,
        required_delay: linear_threshold(d, c, ev),
    }];
    let mut notes = Vec::new();
    let mut push = |condition, required_delay| {
        reqs.push(Requirement {
            condition,
            required_delay,
        })
    };

    match &scenario.reward {
        RewardModel::Bounded { max } => {
            let iv = tagged(
                Condition::RobustInterval,
                ParameterIntervals::new(d, c, *max),
            )?;
            push(Condition::RobustInterval, robust_interval_threshold(&iv));
            notes.push("bounded reward: expected reward taken as the support bound".into());
        }
        RewardModel::MarkovOu { .. } => notes
            .push("markov_ou reward: expected reward taken as max(initial, long_run_mean)".into()),
        _ => {}
    }

    if scenario.grinding_size > 1 {
        let g = scenario.grinding_size;
        let vmax = tagged(
            Condition::Grinding,
            expected_max_reward(&scenario.reward, g),
        )?;
        let t = grinding_threshold(d, c, g, vmax, scenario.grinding_cost_exponent);
        if t < linear_threshold(d, c, ev) {
            notes.push(format!(
                "grinding bound ({t:.6e} s) is below the linear bound: the cost of {g} \
                 streams outgrows E[V_max]"
            ));
        }
        push(Condition::Grinding, t);
    }
    if scenario.abort_probability > 0.0 {
        let t = tagged(
            Condition::Abort,
            abort_threshold(d, c, ev, scenario.abort_probability),
        )?;
        push(Condition::Abort, t);
    }
    if scenario.coalition_size > 1 {
        push(
            Condition::Coalition,
            coalition_threshold(d, c, scenario.coalition_size, ev),
        );
    }
    if !scenario.protocol_means.is_empty() {
        let t = tagged(
            Condition::Composition,
            composition_threshold(d, c, &scenario.protocol_means, None),
        )?;
        push(Condition::Composition, t);
    }
    if scenario.rounds > 1 {
        let prefix: Vec<f64> = (1..=scenario.rounds).map(|k| k as f64 * ev).collect();
        let t = tagged(Condition::Multiround, multiround_threshold(d, c, &prefix))?;
        push(Condition::Multiround, t);
    }

    let binding = reqs
        .iter()
        .copied()
        .reduce(|best, r| {
            if r.required_delay > best.required_delay {
                r
            } else {
                best
            }
        })
        .expect("linear requirement is always present");
    Ok(ThresholdReport {
        requirements: reqs,
        binding_condition: binding.condition,
        esdp: binding.required_delay,
        secure_at: candidate_delay.map(|delay| Verdict {
            delay,
            secure: delay >= binding.required_delay,
        }),
        notes,
    })
}
