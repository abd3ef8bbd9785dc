//! Domain types shared by every analysis: the adversary's economic
//! environment, the reward model and the attack-surface modifiers.
//!
//! Units are fixed throughout the crate: seconds for time, USD for money and
//! USD/s for cost rates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adversary hardware and timing parameters for one beacon round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicEnvironment {
    /// Speedup of adversarial hardware over the honest evaluator (dimensionless).
    pub speedup: f64,
    /// USD per second of adversarial running time.
    pub cost_rate: f64,
    /// Honest evaluation time of the delay function, in seconds.
    pub honest_delay: f64,
    /// Time at which the seed becomes known, in seconds.
    #[serde(default)]
    pub seed_time: f64,
}

impl EconomicEnvironment {
    pub fn new(speedup: f64, cost_rate: f64, honest_delay: f64) -> Self {
        Self {
            speedup,
            cost_rate,
            honest_delay,
            seed_time: 0.0,
        }
    }

    /// Time at which the honest evaluator publishes the output.
    pub fn honest_deadline(&self) -> f64 {
        self.seed_time + self.honest_delay
    }

    /// Cost of one full adversarial evaluation at the current delay, `c·T/δ`.
    pub fn attack_cost(&self) -> f64 {
        self.cost_rate * self.honest_delay / self.speedup
    }

    fn collect_violations(&self, out: &mut Vec<FieldViolation>) {
        if !(self.speedup >= 1.0) || !self.speedup.is_finite() {
            out.push(FieldViolation::new("env.speedup", "speedup < 1"));
        }
        if !(self.cost_rate > 0.0) || !self.cost_rate.is_finite() {
            out.push(FieldViolation::new(
                "env.cost_rate",
                "cost_rate must be > 0",
            ));
        }
        if !(self.honest_delay > 0.0) || !self.honest_delay.is_finite() {
            out.push(FieldViolation::new(
                "env.honest_delay",
                "honest_delay must be > 0",
            ));
        }
        if !self.seed_time.is_finite() {
            out.push(FieldViolation::new(
                "env.seed_time",
                "seed_time must be finite",
            ));
        }
    }
}

/// Distributional or dynamic description of the per-round reward `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardModel {
    Constant {
        value: f64,
    },
    Exponential {
        mean: f64,
    },
    Lognormal {
        mean: f64,
        variance: f64,
    },
    Empirical {
        samples: Vec<f64>,
    },
    /// Only the support bound `[0, max]` is known.
    Bounded {
        max: f64,
    },
    /// Mean-reverting diffusion `dV = κ(θ − V)dt + σ dW`, reflected at zero.
    MarkovOu {
        initial: f64,
        long_run_mean: f64,
        reversion_rate: f64,
        volatility: f64,
    },
}

impl RewardModel {
    pub fn kind(&self) -> &'static str {
        match self {
            RewardModel::Constant { .. } => "constant",
            RewardModel::Exponential { .. } => "exponential",
            RewardModel::Lognormal { .. } => "lognormal",
            RewardModel::Empirical { .. } => "empirical",
            RewardModel::Bounded { .. } => "bounded",
            RewardModel::MarkovOu { .. } => "markov_ou",
        }
    }

    /// True for the models the dynamic-programming solver accepts.
    pub fn is_markov(&self) -> bool {
        matches!(
            self,
            RewardModel::Constant { .. } | RewardModel::MarkovOu { .. }
        )
    }

    /// Expected reward used by the closed-form conditions.
    ///
    /// `Bounded` contributes its support bound. `MarkovOu` contributes
    /// `max(initial, long_run_mean)`, the larger of its start and its
    /// stationary level.
    pub fn expected_reward(&self) -> f64 {
        match self {
            RewardModel::Constant { value } => *value,
            RewardModel::Exponential { mean } => *mean,
            RewardModel::Lognormal { mean, .. } => *mean,
            RewardModel::Empirical { samples } => {
                samples.iter().sum::<f64>() / samples.len() as f64
            }
            RewardModel::Bounded { max } => *max,
            RewardModel::MarkovOu {
                initial,
                long_run_mean,
                ..
            } => initial.max(*long_run_mean),
        }
    }

    /// Variance of the reward; zero for point models, `None` when unknown.
    pub fn variance(&self) -> Option<f64> {
        match self {
            RewardModel::Constant { .. } => Some(0.0),
            RewardModel::Exponential { mean } => Some(mean * mean),
            RewardModel::Lognormal { variance, .. } => Some(*variance),
            RewardModel::Empirical { samples } => {
                let n = samples.len() as f64;
                let mean = samples.iter().sum::<f64>() / n;
                Some(samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
            }
            RewardModel::Bounded { .. } => None,
            RewardModel::MarkovOu {
                reversion_rate,
                volatility,
                ..
            } => Some(ou_stationary_variance(*reversion_rate, *volatility)),
        }
    }

    /// Level the reward starts from in dynamic analyses.
    pub fn initial_level(&self) -> f64 {
        match self {
            RewardModel::MarkovOu { initial, .. } => *initial,
            other => other.expected_reward(),
        }
    }

    /// Mean and standard deviation of the long-run reward level.
    pub fn stationary_moments(&self) -> (f64, f64) {
        match self {
            RewardModel::MarkovOu {
                long_run_mean,
                reversion_rate,
                volatility,
                ..
            } => (
                *long_run_mean,
                ou_stationary_variance(*reversion_rate, *volatility).sqrt(),
            ),
            other => (
                other.expected_reward(),
                other.variance().unwrap_or(0.0).sqrt(),
            ),
        }
    }

    fn collect_violations(&self, out: &mut Vec<FieldViolation>) {
        let mut nonneg = |field: &'static str, x: f64| {
            if !(x >= 0.0) || !x.is_finite() {
                out.push(FieldViolation::new(field, format!("{field} must be >= 0")));
            }
        };
        match self {
            RewardModel::Constant { value } => nonneg("reward.value", *value),
            RewardModel::Exponential { mean } => nonneg("reward.mean", *mean),
            RewardModel::Lognormal { mean, variance } => {
                nonneg("reward.mean", *mean);
                if !(*variance > 0.0) || !variance.is_finite() {
                    out.push(FieldViolation::new(
                        "reward.variance",
                        "lognormal variance must be > 0",
                    ));
                }
                if *mean == 0.0 {
                    out.push(FieldViolation::new(
                        "reward.mean",
                        "lognormal mean must be > 0",
                    ));
                }
            }
            RewardModel::Empirical { samples } => {
                if samples.is_empty() {
                    out.push(FieldViolation::new(
                        "reward.samples",
                        "empirical model requires at least one sample",
                    ));
                }
                if samples.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                    out.push(FieldViolation::new(
                        "reward.samples",
                        "reward.samples must be >= 0",
                    ));
                }
            }
            RewardModel::Bounded { max } => nonneg("reward.max", *max),
            RewardModel::MarkovOu {
                initial,
                long_run_mean,
                reversion_rate,
                volatility,
            } => {
                nonneg("reward.initial", *initial);
                nonneg("reward.long_run_mean", *long_run_mean);
                nonneg("reward.reversion_rate", *reversion_rate);
                nonneg("reward.volatility", *volatility);
            }
        }
    }
}

/// Mean and standard deviation of the exact one-step OU transition from `v`
/// over `dt`, before reflection at zero.
pub fn ou_transition(
    v: f64,
    long_run_mean: f64,
    reversion_rate: f64,
    volatility: f64,
    dt: f64,
) -> (f64, f64) {
    let decay = (-reversion_rate * dt).exp();
    let mean = long_run_mean + (v - long_run_mean) * decay;
    let var = if reversion_rate == 0.0 {
        volatility * volatility * dt
    } else {
        // (1 − e^{−2κdt}) / (2κ), stable for small κ·dt
        -volatility * volatility * (-2.0 * reversion_rate * dt).exp_m1() / (2.0 * reversion_rate)
    };
    (mean, var.sqrt())
}

/// Stationary variance `σ²/(2κ)` of an OU process; infinite when `κ = 0`
/// and `σ > 0`.
pub(crate) fn ou_stationary_variance(kappa: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else if kappa == 0.0 {
        f64::INFINITY
    } else {
        sigma * sigma / (2.0 * kappa)
    }
}

/// Environment, reward model and attack-surface modifiers for one analysis.
///
/// The defaults reduce every extended condition to the baseline linear one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub env: EconomicEnvironment,
    pub reward: RewardModel,
    pub grinding_size: u64,
    pub abort_probability: f64,
    pub protocol_means: Vec<f64>,
    pub coalition_size: u64,
    pub players: u64,
    pub rounds: u64,
    pub grinding_cost_exponent: f64,
}

impl Scenario {
    pub fn new(env: EconomicEnvironment, reward: RewardModel) -> Self {
        Self {
            env,
            reward,
            grinding_size: 1,
            abort_probability: 0.0,
            protocol_means: Vec::new(),
            coalition_size: 1,
            players: 1,
            rounds: 1,
            grinding_cost_exponent: 1.0,
        }
    }

    /// Baseline environment `δ = 3`, `c = 0.05` USD/s with a constant reward.
    pub fn baseline(honest_delay: f64, reward: f64) -> Self {
        Self::new(
            EconomicEnvironment::new(3.0, 0.05, honest_delay),
            RewardModel::Constant { value: reward },
        )
    }

    /// Every violated invariant, in field order.
    pub fn violations(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        self.env.collect_violations(&mut out);
        self.reward.collect_violations(&mut out);
        if self.grinding_size < 1 {
            out.push(FieldViolation::new(
                "grinding_size",
                "grinding_size must be >= 1",
            ));
        }
        if !(self.abort_probability >= 0.0) {
            out.push(FieldViolation::new(
                "abort_probability",
                "abort_probability must be >= 0",
            ));
        }
        if !(self.abort_probability < 1.0) {
            out.push(FieldViolation::new(
                "abort_probability",
                "abort_probability must be < 1",
            ));
        }
        if self
            .protocol_means
            .iter()
            .any(|x| !(*x >= 0.0) || !x.is_finite())
        {
            out.push(FieldViolation::new(
                "protocol_means",
                "protocol_means must be >= 0",
            ));
        }
        if self.coalition_size < 1 {
            out.push(FieldViolation::new(
                "coalition_size",
                "coalition_size must be >= 1",
            ));
        }
        if self.players < 1 {
            out.push(FieldViolation::new("players", "players must be >= 1"));
        }
        if self.rounds < 1 {
            out.push(FieldViolation::new("rounds", "rounds must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.grinding_cost_exponent) {
            out.push(FieldViolation::new(
                "grinding_cost_exponent",
                "grinding_cost_exponent must be in [0, 1]",
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(ValidationErrors(violations)))
        }
    }
}

/// Returns the scenario unchanged when every invariant holds, otherwise every
/// violated invariant by field name.
pub fn validate_scenario(scenario: Scenario) -> std::result::Result<Scenario, ValidationErrors> {
    let violations = scenario.violations();
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ValidationErrors(violations))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldViolation {
    pub field: &'static str,
    pub message: String,
}

impl FieldViolation {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<FieldViolation>);

impl ValidationErrors {
    pub fn fields(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.0.iter().map(|v| v.field)
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_valid() {
        let s = Scenario::baseline(2.0, 10.0);
        assert_eq!(validate_scenario(s.clone()), Ok(s));
    }

    #[test]
    fn low_speedup_is_rejected() {
        let mut s = Scenario::baseline(2.0, 10.0);
        s.env.speedup = 0.5;
        let err = validate_scenario(s).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].message, "speedup < 1");
    }

    #[test]
    fn certain_abort_is_rejected() {
        let mut s = Scenario::baseline(2.0, 10.0);
        s.abort_probability = 1.0;
        let err = validate_scenario(s).unwrap_err();
        assert!(err.to_string().contains("abort_probability must be < 1"));
    }

    #[test]
    fn violations_are_aggregated() {
        let mut s = Scenario::baseline(-1.0, 10.0);
        s.env.speedup = 0.0;
        s.env.cost_rate = 0.0;
        s.players = 0;
        s.reward = RewardModel::Empirical { samples: vec![] };
        let fields: Vec<_> = validate_scenario(s).unwrap_err().fields().collect();
        assert_eq!(
            fields,
            [
                "env.speedup",
                "env.cost_rate",
                "env.honest_delay",
                "reward.samples",
                "players"
            ]
        );
    }

    #[test]
    fn lognormal_needs_positive_variance() {
        let mut s = Scenario::baseline(2.0, 10.0);
        s.reward = RewardModel::Lognormal {
            mean: 10.0,
            variance: 0.0,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn nan_fields_fail() {
        let mut s = Scenario::baseline(2.0, 10.0);
        s.env.cost_rate = f64::NAN;
        s.abort_probability = f64::NAN;
        assert_eq!(s.violations().len(), 3);
    }

    #[test]
    fn empirical_moments() {
        let r = RewardModel::Empirical {
            samples: vec![1.0, 3.0],
        };
        assert_eq!(r.expected_reward(), 2.0);
        assert_eq!(r.variance(), Some(1.0));
    }
}
