//! Seeded Monte Carlo: reward paths, policy rollouts, tail probabilities and
//! brute-force oracles for the closed forms.
//!
//! Trial `i` draws from its own ChaCha8 stream (`set_stream(i)` on the master
//! seed), results are collected in trial order and reduced sequentially, so
//! output is bit-identical across runs and across execution strategies.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fmt::full;
use crate::model::{ou_transition, RewardModel, Scenario};
use crate::stopping::{extract_decision_boundary, PolicyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    /// Seconds per simulation step.
    pub time_step: f64,
    pub seed: u64,
    /// Two-sided confidence level of reported intervals.
    pub confidence: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            time_step: 1.0,
            seed: 0,
            confidence: 0.99,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::arg("trials", "must be >= 1"));
        }
        if !(self.time_step > 0.0) || !self.time_step.is_finite() {
            return Err(Error::arg("time_step", "must be > 0"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::arg("confidence", "must be in (0, 1)"));
        }
        Ok(())
    }

    /// Two-sided normal quantile for the configured confidence.
    pub fn z(&self) -> f64 {
        normal_quantile(0.5 + 0.5 * self.confidence)
    }
}

fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(p)
}

/// RNG for one trial: the master seed's ChaCha8 stream number `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            samples: xs.len() as u64,
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub confidence_interval: (f64, f64),
    pub positive_profit_fraction: f64,
    pub trials: u64,
}

impl ProfitEstimate {
    pub fn from_profits(profits: &[f64], confidence: f64) -> Self {
        let e = Estimate::from_samples(profits);
        let half = normal_quantile(0.5 + 0.5 * confidence) * e.std_error;
        let positive = profits.iter().filter(|p| **p > 0.0).count();
        Self {
            mean: e.mean,
            std_error: e.std_error,
            confidence_interval: (e.mean - half, e.mean + half),
            positive_profit_fraction: positive as f64 / profits.len() as f64,
            trials: profits.len() as u64,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        let (lo, hi) = self.confidence_interval;
        lo <= value && value <= hi
    }
}

/// A sampled proportion with a normal-approximation interval clipped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionEstimate {
    pub fraction: f64,
    pub std_error: f64,
    pub confidence_interval: (f64, f64),
    pub trials: u64,
}

/// One simulated attack attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub profit: f64,
    pub success: bool,
    /// Completion time, or the end of the last computing step for failed or
    /// abandoned attempts (the seed time when nothing was computed).
    pub stop_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn step_count(horizon: f64, dt: f64) -> usize {
    let x = horizon / dt;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[inline]
fn ou_step(v: f64, model: &RewardModel, dt: f64, rng: &mut impl Rng) -> f64 {
    match model {
        RewardModel::MarkovOu {
            long_run_mean,
            reversion_rate,
            volatility,
            ..
        } => {
            let (mean, sd) = ou_transition(v, *long_run_mean, *reversion_rate, *volatility, dt);
            let z: f64 = rng.sample(StandardNormal);
            (mean + sd * z).abs()
        }
        _ => v,
    }
}

/// One draw of the per-round reward. Dynamic models are simulated for
/// `horizon` seconds from their initial level; `Bounded` draws its bound.
fn sample_reward(model: &RewardModel, horizon: f64, dt: f64, rng: &mut impl Rng) -> f64 {
    match model {
        RewardModel::Constant { value } => *value,
        RewardModel::Exponential { mean } => mean * rng.sample::<f64, _>(Exp1),
        RewardModel::Lognormal { mean, variance } => {
            let sigma2 = (1.0 + variance / (mean * mean)).ln();
            LogNormal::new(mean.ln() - 0.5 * sigma2, sigma2.sqrt())
                .expect("validated lognormal")
                .sample(rng)
        }
        RewardModel::Empirical { samples } => samples[rng.random_range(0..samples.len())],
        RewardModel::Bounded { max } => *max,
        RewardModel::MarkovOu { initial, .. } => {
            let mut v = *initial;
            for _ in 0..step_count(horizon, dt) {
                v = ou_step(v, model, dt, rng);
            }
            v
        }
    }
}

/// Reward path of trial `trial` over `[0, horizon]`. Constant and OU models
/// produce one value per time step; distributional models produce a single
/// terminal draw at `horizon`.
pub fn simulate_reward_path_for_trial(
    model: &RewardModel,
    horizon: f64,
    cfg: &SimConfig,
    trial: u64,
) -> Result<RewardPath> {
    if !(horizon > 0.0) {
        return Err(Error::arg("horizon", "must be > 0"));
    }
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    if !model.is_markov() {
        return Ok(RewardPath {
            times: vec![horizon],
            values: vec![sample_reward(model, horizon, cfg.time_step, &mut rng)],
        });
    }
    let steps = step_count(horizon, cfg.time_step);
    let mut v = model.initial_level();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        times.push((k as f64 * cfg.time_step).min(horizon));
        values.push(v);
        v = ou_step(v, model, cfg.time_step, &mut rng);
    }
    Ok(RewardPath { times, values })
}

pub fn simulate_reward_path(
    model: &RewardModel,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<RewardPath> {
    simulate_reward_path_for_trial(model, horizon, cfg, 0)
}

/// Runs the adversary following `pg` on fresh reward paths, one outcome per
/// trial in trial order.
pub fn rollout_trials(
    pg: &PolicyGrid,
    scenario: &Scenario,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    scenario.validate()?;
    if scenario.env != pg.scenario.env || scenario.reward != pg.scenario.reward {
        return Err(Error::Mismatch(
            "policy was solved for a different environment or reward model".into(),
        ));
    }
    let l = &pg.lattice;
    if (cfg.time_step - l.time_step).abs() > 1e-12 * l.time_step {
        return Err(Error::Mismatch(format!(
            "simulation step {} differs from the grid step {}",
            cfg.time_step, l.time_step
        )));
    }
    let boundary = extract_decision_boundary(pg)?;
    let step_cost = scenario.env.cost_rate * l.time_step;
    let done = l.done_index();
    let deadline = l.deadline_index();
    let model = &scenario.reward;
    let v0 = model.initial_level();

    Ok(map_indexed(exec, cfg.trials as usize, |trial| {
        let trial = trial as u64;
        let mut rng = trial_rng(cfg.seed, trial);
        let (mut j, mut v, mut steps) = (0usize, v0, 0u64);
        let mut stop_time = l.seed_time;
        for k in 0..deadline {
            let compute = v >= boundary.threshold(j, k);
            if compute {
                j += 1;
                steps += 1;
                stop_time = l.time(k + 1);
            }
            v = ou_step(v, model, l.time_step, &mut rng);
            if j == done {
                // k + 1 < deadline is the strict success condition
                let success = k + 1 < deadline;
                let reward = if success { v } else { 0.0 };
                return TrialOutcome {
                    trial,
                    profit: reward - steps as f64 * step_cost,
                    success,
                    stop_time,
                };
            }
        }
        TrialOutcome {
            trial,
            profit: -(steps as f64) * step_cost,
            success: false,
            stop_time,
        }
    }))
}

pub fn rollout_policy(
    pg: &PolicyGrid,
    scenario: &Scenario,
    cfg: &SimConfig,
) -> Result<ProfitEstimate> {
    rollout_policy_with(pg, scenario, cfg, Execution::default())
}

pub fn rollout_policy_with(
    pg: &PolicyGrid,
    scenario: &Scenario,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<ProfitEstimate> {
    let outcomes = rollout_trials(pg, scenario, cfg, exec)?;
    Ok(summarize(&outcomes, cfg.confidence))
}

/// Commit-to-full-evaluation attack under any reward model: each trial pays
/// `cT/δ` and receives one reward draw.
pub fn commit_attack_trials(
    scenario: &Scenario,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    scenario.validate()?;
    let env = scenario.env;
    let duration = env.honest_delay / env.speedup;
    let cost = env.attack_cost();
    Ok(map_indexed(exec, cfg.trials as usize, |trial| {
        let trial = trial as u64;
        let mut rng = trial_rng(cfg.seed, trial);
        let v = sample_reward(&scenario.reward, duration, cfg.time_step, &mut rng);
        TrialOutcome {
            trial,
            profit: v - cost,
            success: true,
            stop_time: env.seed_time + duration,
        }
    }))
}

pub fn summarize(outcomes: &[TrialOutcome], confidence: f64) -> ProfitEstimate {
    let profits: Vec<f64> = outcomes.iter().map(|o| o.profit).collect();
    ProfitEstimate::from_profits(&profits, confidence)
}

/// Fraction of attempts with `V − cT/δ > 0` at delay `delay`.
pub fn estimate_tail_probability(
    scenario: &Scenario,
    delay: f64,
    cfg: &SimConfig,
) -> Result<FractionEstimate> {
    estimate_tail_probability_with(scenario, delay, cfg, Execution::default())
}

pub fn estimate_tail_probability_with(
    scenario: &Scenario,
    delay: f64,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<FractionEstimate> {
    cfg.validate()?;
    scenario.validate()?;
    if !(delay >= 0.0) {
        return Err(Error::arg("delay", "must be >= 0"));
    }
    if scenario.reward.variance().is_some_and(f64::is_infinite) {
        return Err(Error::arg("reward", "requires finite variance"));
    }
    let env = scenario.env;
    let cost = env.cost_rate * delay / env.speedup;
    let duration = delay / env.speedup;
    let hits = map_indexed(exec, cfg.trials as usize, |trial| {
        let mut rng = trial_rng(cfg.seed, trial as u64);
        sample_reward(&scenario.reward, duration, cfg.time_step, &mut rng) - cost > 0.0
    });
    let n = cfg.trials as f64;
    let fraction = hits.iter().filter(|h| **h).count() as f64 / n;
    let std_error = (fraction * (1.0 - fraction) / n).sqrt();
    let half = cfg.z() * std_error;
    Ok(FractionEstimate {
        fraction,
        std_error,
        confidence_interval: ((fraction - half).max(0.0), (fraction + half).min(1.0)),
        trials: cfg.trials,
    })
}

/// Mean of `max` over `G` i.i.d. exponential draws with mean `mean`.
pub fn grinding_max_oracle(mean: f64, grinding_size: u64, cfg: &SimConfig) -> Result<Estimate> {
    grinding_max_oracle_with(mean, grinding_size, cfg, Execution::default())
}

pub fn grinding_max_oracle_with(
    mean: f64,
    grinding_size: u64,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<Estimate> {
    cfg.validate()?;
    if grinding_size < 1 {
        return Err(Error::arg("grinding_size", "must be >= 1"));
    }
    if !(mean >= 0.0) {
        return Err(Error::arg("mean", "must be >= 0"));
    }
    let maxima = map_indexed(exec, cfg.trials as usize, |trial| {
        let mut rng = trial_rng(cfg.seed, trial as u64);
        (0..grinding_size)
            .map(|_| mean * rng.sample::<f64, _>(Exp1))
            .fold(0.0, f64::max)
    });
    Ok(Estimate::from_samples(&maxima))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InverseCheck {
    Estimate(Estimate),
    /// Every draw had `K = 0`.
    InsufficientData {
        trials: u64,
    },
}

/// Empirical `E[1/K | K ≥ 1]` from `trials` binomial draws, discarding `K = 0`.
pub fn equilibrium_empirical_check(n: u64, p: f64, trials: u64, seed: u64) -> Result<InverseCheck> {
    equilibrium_empirical_check_with(n, p, trials, seed, Execution::default())
}

pub fn equilibrium_empirical_check_with(
    n: u64,
    p: f64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<InverseCheck> {
    if n < 1 {
        return Err(Error::arg("n", "must be >= 1"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg("p", "must be in (0, 1]"));
    }
    if trials < 1 {
        return Err(Error::arg("trials", "must be >= 1"));
    }
    let dist = Binomial::new(n, p).map_err(|e| Error::arg("p", e.to_string()))?;
    let draws = map_indexed(exec, trials as usize, |trial| {
        dist.sample(&mut trial_rng(seed, trial as u64))
    });
    let inverses: Vec<f64> = draws
        .into_iter()
        .filter(|k| *k > 0)
        .map(|k| 1.0 / k as f64)
        .collect();
    if inverses.is_empty() {
        return Ok(InverseCheck::InsufficientData { trials });
    }
    Ok(InverseCheck::Estimate(Estimate::from_samples(&inverses)))
}

/// Writes one `trial, profit, success, stop_time` row per outcome.
pub fn write_trials_csv<W: Write>(out: &mut W, outcomes: &[TrialOutcome]) -> io::Result<()> {
    writeln!(out, "trial(index),profit(USD),success(flag),stop_time(s)")?;
    for o in outcomes {
        writeln!(
            out,
            "{},{},{},{}",
            o.trial,
            full(o.profit),
            u8::from(o.success),
            full(o.stop_time)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::conditional_inverse_expectation;
    use crate::model::EconomicEnvironment;
    use crate::stopping::{solve, GridSpec};
    use crate::thresholds::{epsilon_robust_threshold, MomentBounds, ParameterIntervals};

    fn cfg(trials: u64) -> SimConfig {
        SimConfig {
            trials,
            ..SimConfig::default()
        }
    }

    fn ou_model(kappa: f64, sigma: f64) -> RewardModel {
        RewardModel::MarkovOu {
            initial: 10.0,
            long_run_mean: 10.0,
            reversion_rate: kappa,
            volatility: sigma,
        }
    }

    #[test]
    fn constant_path_is_flat() {
        let path =
            simulate_reward_path(&RewardModel::Constant { value: 10.0 }, 600.0, &cfg(1)).unwrap();
        assert_eq!(path.values.len(), 601);
        assert!(path.values.iter().all(|v| *v == 10.0));
    }

    #[test]
    fn degenerate_ou_stays_put() {
        let path = simulate_reward_path(&ou_model(50.0, 1e-9), 600.0, &cfg(1)).unwrap();
        assert!(path.values.iter().all(|v| (v - 10.0).abs() < 1e-6));
    }

    #[test]
    fn nonpositive_horizon_is_rejected() {
        assert!(simulate_reward_path(&ou_model(0.1, 2.0), 0.0, &cfg(1)).is_err());
    }

    #[test]
    fn paths_are_reproducible() {
        let m = ou_model(0.1, 2.0);
        let a = simulate_reward_path_for_trial(&m, 100.0, &cfg(1), 7).unwrap();
        let b = simulate_reward_path_for_trial(&m, 100.0, &cfg(1), 7).unwrap();
        let c = simulate_reward_path_for_trial(&m, 100.0, &cfg(1), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ou_terminal_mean_matches_closed_form() {
        // start far from the long-run level so reflection is negligible
        let model = RewardModel::MarkovOu {
            initial: 30.0,
            long_run_mean: 10.0,
            reversion_rate: 0.01,
            volatility: 0.2,
        };
        let horizon = 100.0;
        let trials = 100_000u64;
        let c = SimConfig {
            trials,
            time_step: 10.0,
            ..SimConfig::default()
        };
        let terminal: Vec<f64> = map_indexed(Execution::Parallel, trials as usize, |t| {
            *simulate_reward_path_for_trial(&model, horizon, &c, t as u64)
                .unwrap()
                .values
                .last()
                .unwrap()
        });
        let est = Estimate::from_samples(&terminal);
        let want = 10.0 + 20.0 * (-0.01f64 * horizon).exp();
        assert!(est.agrees_with(want, 3.0), "{est:?} vs {want}");
    }

    #[test]
    fn ou_centered_terminal_mean() {
        let model = ou_model(0.01, 2.0);
        let c = cfg(100_000);
        let terminal: Vec<f64> = map_indexed(Execution::Parallel, 100_000, |t| {
            *simulate_reward_path_for_trial(&model, 2.0, &c, t as u64)
                .unwrap()
                .values
                .last()
                .unwrap()
        });
        assert!(Estimate::from_samples(&terminal).agrees_with(10.0, 3.0));
    }

    #[test]
    fn commit_attack_profit() {
        let s = Scenario::baseline(300.0, 10.0);
        let outcomes = commit_attack_trials(&s, &cfg(100), Execution::Parallel).unwrap();
        assert!(outcomes.iter().all(|o| o.profit == 5.0));
    }

    #[test]
    fn constant_rollouts() {
        for (delay, want) in [(600.0, 0.0), (1200.0, 0.0), (300.0, 5.0)] {
            let s = Scenario::baseline(delay, 10.0);
            let (_, pg) = solve(&s, &GridSpec::default()).unwrap();
            let est = rollout_policy(&pg, &s, &cfg(1000)).unwrap();
            assert!((est.mean - want).abs() < 1e-9, "T={delay}: {est:?}");
            if delay == 1200.0 {
                assert_eq!(est.mean, 0.0);
            }
        }
    }

    #[test]
    fn rollout_rejects_mismatch() {
        let s = Scenario::baseline(60.0, 10.0);
        let (_, pg) = solve(&s, &GridSpec::default()).unwrap();
        let other = Scenario::baseline(90.0, 10.0);
        assert!(matches!(
            rollout_policy(&pg, &other, &cfg(10)),
            Err(Error::Mismatch(_))
        ));
        let c = SimConfig {
            time_step: 0.5,
            ..cfg(10)
        };
        assert!(matches!(
            rollout_policy(&pg, &s, &c),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn ou_rollout_respects_profit_floor() {
        let s = Scenario::new(
            EconomicEnvironment::new(3.0, 0.05, 60.0),
            ou_model(0.1, 2.0),
        );
        let (_, pg) = solve(&s, &GridSpec::default()).unwrap();
        let outcomes = rollout_trials(&pg, &s, &cfg(2000), Execution::Parallel).unwrap();
        let floor = -s.env.attack_cost() - s.env.cost_rate;
        assert!(outcomes.iter().all(|o| o.profit >= floor));
    }

    #[test]
    fn tail_probability_examples() {
        let s = Scenario::baseline(600.0, 10.0);
        assert_eq!(
            estimate_tail_probability(&s, 600.0, &cfg(1000))
                .unwrap()
                .fraction,
            0.0
        );
        assert_eq!(
            estimate_tail_probability(&s, 599.0, &cfg(1000))
                .unwrap()
                .fraction,
            1.0
        );
    }

    #[test]
    fn chebyshev_guarantee_holds() {
        let mut s = Scenario::baseline(600.0, 10.0);
        s.reward = RewardModel::Lognormal {
            mean: 10.0,
            variance: 25.0,
        };
        let iv = ParameterIntervals::new(3.0, 0.05, 10.0).unwrap();
        let mb = MomentBounds::new(10.0, 5.0, 0.01).unwrap();
        let t = epsilon_robust_threshold(&iv, &mb).unwrap();
        let est = estimate_tail_probability(&s, t, &cfg(100_000)).unwrap();
        assert!(est.confidence_interval.1 <= 0.01);
    }

    #[test]
    fn grinding_oracle_examples() {
        let c = cfg(200_000);
        let e = grinding_max_oracle(10.0, 1, &c).unwrap();
        assert!(e.agrees_with(10.0, 3.0), "{e:?}");
        let e = grinding_max_oracle(10.0, 4, &c).unwrap();
        assert!(e.agrees_with(10.0 * 25.0 / 12.0, 3.0), "{e:?}");
        let e = grinding_max_oracle(0.0, 4, &c).unwrap();
        assert_eq!((e.mean, e.std_error), (0.0, 0.0));
    }

    #[test]
    fn empirical_inverse_examples() {
        match equilibrium_empirical_check(1, 0.5, 1000, 1).unwrap() {
            InverseCheck::Estimate(e) => assert_eq!(e.mean, 1.0),
            other => panic!("{other:?}"),
        }
        for (n, p) in [(2, 2.0 / 3.0), (20, 0.3)] {
            let exact = conditional_inverse_expectation(n, p).unwrap();
            match equilibrium_empirical_check(n, p, 200_000, 3).unwrap() {
                InverseCheck::Estimate(e) => assert!(e.agrees_with(exact, 4.0), "{e:?} vs {exact}"),
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(
            equilibrium_empirical_check(3, 1e-12, 10, 0).unwrap(),
            InverseCheck::InsufficientData { trials: 10 }
        );
    }

    #[test]
    fn strategies_agree_bitwise() {
        let s = Scenario::new(
            EconomicEnvironment::new(3.0, 0.05, 30.0),
            ou_model(0.1, 2.0),
        );
        let (_, pg) = solve(&s, &GridSpec::default()).unwrap();
        let a = rollout_trials(&pg, &s, &cfg(500), Execution::Sequential).unwrap();
        let b = rollout_trials(&pg, &s, &cfg(500), Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trials_csv_layout() {
        let s = Scenario::baseline(300.0, 10.0);
        let outcomes = commit_attack_trials(&s, &cfg(2), Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &outcomes).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "trial(index),profit(USD),success(flag),stop_time(s)\n0,5,1,100\n1,5,1,100\n"
        );
    }

    #[test]
    fn invalid_config_is_rejected() {
        let s = Scenario::baseline(300.0, 10.0);
        assert!(commit_attack_trials(&s, &cfg(0), Execution::Sequential).is_err());
    }
}
