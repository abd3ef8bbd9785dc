//! Symmetric `n`-player attack game: each player attacks independently with
//! probability `p`, the prize goes to one attacker chosen uniformly, and every
//! attacker pays the full evaluation cost `cT/δ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thresholds::linear_threshold;

/// Lower end of the bisection bracket for `p`.
pub const BISECTION_FLOOR: f64 = 1e-12;
/// Bracket width the bisection is guaranteed to reach. It keeps halving past
/// this until the bracket stops shrinking in `f64`, which keeps the
/// indifference residual below `1e-9` even where the left side is steep.
pub const BISECTION_TOLERANCE: f64 = 1e-10;
/// Above this player count the binomial pmf is built in log space.
pub const LOG_SPACE_THRESHOLD: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NoAttack,
    Interior,
    Saturated,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::NoAttack => "no-attack",
            Regime::Interior => "interior",
            Regime::Saturated => "saturated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub attack_probability: f64,
    pub expected_attackers: f64,
    /// Expected profit of a player conditional on attacking at `p*`.
    pub per_attacker_profit: f64,
    pub regime: Regime,
}

/// Payoff `E[V]/k − cT/δ` of each of `k` attackers.
pub fn attacker_payoff(
    attackers: u64,
    expected_reward: f64,
    cost_rate: f64,
    delay: f64,
    speedup: f64,
) -> Result<f64> {
    if attackers == 0 {
        return Err(Error::arg("k", "at least one attacker is required"));
    }
    Ok(expected_reward / attackers as f64 - cost_rate * delay / speedup)
}

/// `E[1/K | K ≥ 1]` for `K ~ Binomial(n, p)`.
pub fn conditional_inverse_expectation(n: u64, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("n", "must be >= 1"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg("p", "must be in (0, 1]"));
    }
    if n == 1 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(1.0 / n as f64);
    }
    let nf = n as f64;
    // P(K ≥ 1) = 1 − (1 − p)^n without cancellation at small p
    let p_any = -(nf * (-p).ln_1p()).exp_m1();
    let ratio = p / (1.0 - p);
    let zero_log = nf * (-p).ln_1p();

    let weighted = if n <= LOG_SPACE_THRESHOLD && zero_log > -700.0 {
        let mut pmf = zero_log.exp();
        let mut acc = 0.0;
        for k in 1..=n {
            pmf *= (n - k + 1) as f64 / k as f64 * ratio;
            acc += pmf / k as f64;
        }
        acc
    } else {
        let log_ratio = p.ln() - (-p).ln_1p();
        let mut log_pmf = zero_log;
        let mut acc = 0.0;
        for k in 1..=n {
            log_pmf += ((n - k + 1) as f64 / k as f64).ln() + log_ratio;
            acc += (log_pmf - (k as f64).ln()).exp();
        }
        acc
    };
    Ok(weighted / p_any)
}

/// Symmetric mixed equilibrium attack probability.
///
/// Below break-even (`E[V] ≤ cT/δ`) nobody attacks. Otherwise the
/// indifference condition `E[1/K | K ≥ 1]·E[V] = cT/δ` is solved by bisection
/// when it has a root in `(0, 1)`; if even `p = 1` leaves attackers in profit
/// the equilibrium saturates at `p* = 1`.
pub fn equilibrium_attack_probability(
    players: u64,
    expected_reward: f64,
    cost_rate: f64,
    delay: f64,
    speedup: f64,
) -> Result<EquilibriumResult> {
    if players == 0 {
        return Err(Error::arg("players", "must be >= 1"));
    }
    if !(expected_reward >= 0.0) {
        return Err(Error::arg("expected_reward", "must be >= 0"));
    }
    if !(cost_rate > 0.0) || !(speedup >= 1.0) || !(delay >= 0.0) {
        return Err(Error::arg(
            "environment",
            "requires cost_rate > 0, speedup >= 1 and delay >= 0",
        ));
    }
    let cost = cost_rate * delay / speedup;
    let profit_at = |p: f64| -> Result<f64> {
        Ok(conditional_inverse_expectation(players, p)? * expected_reward - cost)
    };
    let result = |p: f64, regime| -> Result<EquilibriumResult> {
        let per_attacker_profit = if p == 0.0 {
            expected_reward - cost
        } else {
            profit_at(p)?
        };
        Ok(EquilibriumResult {
            attack_probability: p,
            expected_attackers: players as f64 * p,
            per_attacker_profit,
            regime,
        })
    };

    if expected_reward <= cost
        || delay >= strict_dominance_delay(speedup, cost_rate, expected_reward)
    {
        return result(0.0, Regime::NoAttack);
    }
    if profit_at(1.0)? >= 0.0 {
        return result(1.0, Regime::Saturated);
    }
    let (mut lo, mut hi) = (BISECTION_FLOOR, 1.0);
    if profit_at(lo)? <= 0.0 {
        // root lies below the bracket floor
        return result(lo, Regime::Interior);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if profit_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result(0.5 * (lo + hi), Regime::Interior)
}

/// Delay at which honest behaviour strictly dominates attacking for every
/// player count: the single-attacker bound `(δ/c)·E[V]`.
pub fn strict_dominance_delay(speedup: f64, cost_rate: f64, expected_reward: f64) -> f64 {
    linear_threshold(speedup, cost_rate, expected_reward)
}
