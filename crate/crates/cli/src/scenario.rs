//! Scenario files: `key = value` lines, `#` comments, dotted keys for the
//! environment and reward model.
//!
//! ```text
//! env.speedup = 3
//! env.cost_rate = 0.05
//! env.honest_delay = 600
//! reward.kind = constant
//! reward.value = 10
//! protocol_means = 4, 6
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use esdp_core::fmt::full;
use esdp_core::model::{EconomicEnvironment, RewardModel, Scenario};

use crate::error::CliError;

const TOP_LEVEL_KEYS: [&str; 7] = [
    "grinding_size",
    "abort_probability",
    "protocol_means",
    "coalition_size",
    "players",
    "rounds",
    "grinding_cost_exponent",
];

const ENV_KEYS: [&str; 4] = [
    "env.speedup",
    "env.cost_rate",
    "env.honest_delay",
    "env.seed_time",
];

const REWARD_KINDS: [&str; 6] = [
    "constant",
    "exponential",
    "lognormal",
    "empirical",
    "bounded",
    "markov_ou",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn required<T: FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        match self.take(key) {
            Some((line, raw)) => scalar(key, line, &raw),
            None => Err(CliError::Parse(format!("missing key `{key}`"))),
        }
    }

    fn optional<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        match self.take(key) {
            Some((line, raw)) => scalar(key, line, &raw),
            None => Ok(default),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some((line, raw)) = self.take(key) else {
            return Ok(None);
        };
        if raw.is_empty() {
            return Ok(Some(Vec::new()));
        }
        raw.split(',')
            .map(|item| scalar(key, line, item.trim()))
            .collect::<Result<Vec<f64>, _>>()
            .map(Some)
    }
}

fn scalar<T: FromStr>(key: &str, line: usize, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::Parse(format!("line {line}: `{key}` has unreadable value `{raw}`")))
}

/// Parses a scenario document. Syntax problems are [`CliError::Parse`];
/// out-of-range values are left for [`Scenario::validate`].
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut map = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("line {line_no}: expected `key = value`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Parse(format!("line {line_no}: empty key")));
        }
        if map
            .insert(key.to_string(), (line_no, value.trim().to_string()))
            .is_some()
        {
            return Err(CliError::Parse(format!(
                "line {line_no}: duplicate key `{key}`"
            )));
        }
    }
    if map.is_empty() {
        return Err(CliError::Parse("scenario file is empty".into()));
    }
    let mut e = Entries { map };

    let env = EconomicEnvironment {
        speedup: e.required("env.speedup")?,
        cost_rate: e.required("env.cost_rate")?,
        honest_delay: e.required("env.honest_delay")?,
        seed_time: e.optional("env.seed_time", 0.0)?,
    };
    let reward = parse_reward(&mut e)?;
    let mut scenario = Scenario::new(env, reward);
    scenario.grinding_size = e.optional("grinding_size", scenario.grinding_size)?;
    scenario.abort_probability = e.optional("abort_probability", scenario.abort_probability)?;
    if let Some(means) = e.list("protocol_means")? {
        scenario.protocol_means = means;
    }
    scenario.coalition_size = e.optional("coalition_size", scenario.coalition_size)?;
    scenario.players = e.optional("players", scenario.players)?;
    scenario.rounds = e.optional("rounds", scenario.rounds)?;
    scenario.grinding_cost_exponent =
        e.optional("grinding_cost_exponent", scenario.grinding_cost_exponent)?;

    if let Some((key, (line, _))) = e.map.into_iter().next() {
        return Err(CliError::Parse(format!("line {line}: unknown key `{key}`")));
    }
    Ok(scenario)
}

fn parse_reward(e: &mut Entries) -> Result<RewardModel, CliError> {
    let (line, kind) = e
        .take("reward.kind")
        .ok_or_else(|| CliError::Parse("missing key `reward.kind`".into()))?;
    if !REWARD_KINDS.contains(&kind.as_str()) {
        return Err(CliError::Parse(format!(
            "line {line}: unknown reward.kind `{kind}` (expected one of {})",
            REWARD_KINDS.join(", ")
        )));
    }
    let field = |name: &str| format!("reward.{name}");
    let model = match kind.as_str() {
        "constant" => RewardModel::Constant {
            value: e.required(&field("value"))?,
        },
        "exponential" => RewardModel::Exponential {
            mean: e.required(&field("mean"))?,
        },
        "lognormal" => RewardModel::Lognormal {
            mean: e.required(&field("mean"))?,
            variance: e.required(&field("variance"))?,
        },
        "empirical" => RewardModel::Empirical {
            samples: e
                .list("reward.samples")?
                .ok_or_else(|| CliError::Parse("missing key `reward.samples`".into()))?,
        },
        "bounded" => RewardModel::Bounded {
            max: e.required(&field("max"))?,
        },
        _ => RewardModel::MarkovOu {
            initial: e.required(&field("initial"))?,
            long_run_mean: e.required(&field("long_run_mean"))?,
            reversion_rate: e.required(&field("reversion_rate"))?,
            volatility: e.required(&field("volatility"))?,
        },
    };
    Ok(model)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| full(*v))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical text form; [`parse_scenario`] reads it back unchanged.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let env = [
        s.env.speedup,
        s.env.cost_rate,
        s.env.honest_delay,
        s.env.seed_time,
    ];
    for (key, value) in ENV_KEYS.iter().zip(env) {
        let _ = writeln!(out, "{key} = {}", full(value));
    }
    let _ = writeln!(out, "reward.kind = {}", s.reward.kind());
    let fields: Vec<(&str, String)> = match &s.reward {
        RewardModel::Constant { value } => vec![("value", full(*value))],
        RewardModel::Exponential { mean } => vec![("mean", full(*mean))],
        RewardModel::Lognormal { mean, variance } => {
            vec![("mean", full(*mean)), ("variance", full(*variance))]
        }
        RewardModel::Empirical { samples } => vec![("samples", join(samples))],
        RewardModel::Bounded { max } => vec![("max", full(*max))],
        RewardModel::MarkovOu {
            initial,
            long_run_mean,
            reversion_rate,
            volatility,
        } => vec![
            ("initial", full(*initial)),
            ("long_run_mean", full(*long_run_mean)),
            ("reversion_rate", full(*reversion_rate)),
            ("volatility", full(*volatility)),
        ],
    };
    for (key, value) in fields {
        let _ = writeln!(out, "reward.{key} = {value}");
    }
    let top = [
        s.grinding_size.to_string(),
        full(s.abort_probability),
        join(&s.protocol_means),
        s.coalition_size.to_string(),
        s.players.to_string(),
        s.rounds.to_string(),
        full(s.grinding_cost_exponent),
    ];
    for (key, value) in TOP_LEVEL_KEYS.iter().zip(top) {
        if value.is_empty() {
            let _ = writeln!(out, "{key} =");
        } else {
            let _ = writeln!(out, "{key} = {value}");
        }
    }
    out
}
