//! Data generators for the four reference case studies.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::fmt::full;
use crate::thresholds::{
    expected_max_exponential, expected_profit, grinding_threshold, harmonic_number,
    linear_threshold,
};

/// Baseline hardware speedup of the case studies.
pub const BASELINE_SPEEDUP: f64 = 3.0;
/// Baseline adversarial cost rate, USD/s.
pub const BASELINE_COST_RATE: f64 = 0.05;
/// Reward levels of the profit-curve study, USD.
pub const CASE1_REWARDS: [f64; 3] = [10.0, 50.0, 100.0];
/// Mean per-seed reward of the grinding study, USD.
pub const CASE3_MEAN: f64 = 10.0;
/// Cost scaling exponent of the grinding study.
pub const CASE3_COST_EXPONENT: f64 = 0.5;
/// FPGA speedup of the validator-selection study.
pub const CASE4_SPEEDUP: f64 = 2.5;
/// Cloud FPGA rental cost, USD/s.
pub const CASE4_COST_RATE: f64 = 0.00046;
/// Median and 99th-percentile MEV per block, USD.
pub const CASE4_REWARDS: [f64; 2] = [50.0, 10_000.0];

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub label: String,
    pub value: f64,
    pub unit: String,
}

impl Headline {
    fn new(label: impl Into<String>, value: f64, unit: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            value,
            unit: unit.into(),
        }
    }
}

/// A table keyed by its first column plus labelled headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyOutput {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub headlines: Vec<Headline>,
    pub notes: Vec<String>,
    /// Plot the abscissa on a base-2 log scale.
    pub log2_abscissa: bool,
}

impl CaseStudyOutput {
    fn sorted(mut self) -> Self {
        self.rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        self
    }

    pub fn headline(&self, label: &str) -> Option<f64> {
        self.headlines
            .iter()
            .find(|h| h.label == label)
            .map(|h| h.value)
    }

    /// Values of column `index`, in row order.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[index]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}({})", c.name, c.unit))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| full(*x)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Delays `0, 100, …, 7000` s plus the 2–5 s range of short-delay designs.
pub fn default_case1_delays() -> Vec<f64> {
    let mut d: Vec<f64> = (0..=70).map(|i| f64::from(i) * 100.0).collect();
    d.extend([2.0, 3.0, 4.0, 5.0]);
    d
}

/// `V_max = 0, 5, …, 200` USD.
pub fn default_case2_rewards() -> Vec<f64> {
    (0..=40).map(|i| f64::from(i) * 5.0).collect()
}

/// `G = 2^0 … 2^10`.
pub fn default_case3_sizes() -> Vec<u64> {
    (0..=10).map(|e| 1u64 << e).collect()
}

/// Expected profit against delay for rewards of 10, 50 and 100 USD.
pub fn case1_profit_curves(delays: &[f64]) -> CaseStudyOutput {
    let (d, c) = (BASELINE_SPEEDUP, BASELINE_COST_RATE);
    let mut columns = vec![Column::new("T", "s")];
    columns.extend(
        CASE1_REWARDS
            .iter()
            .map(|v| Column::new(format!("profit_EV{v}"), "USD")),
    );
    let rows = delays
        .iter()
        .map(|&t| {
            std::iter::once(t)
                .chain(CASE1_REWARDS.iter().map(|&v| expected_profit(t, d, c, v)))
                .collect()
        })
        .collect();
    let headlines = CASE1_REWARDS
        .iter()
        .map(|&v| Headline::new(format!("break_even_EV{v}"), linear_threshold(d, c, v), "s"))
        .collect();
    CaseStudyOutput {
        name: "case1_profit_vs_delay".into(),
        columns,
        rows,
        headlines,
        notes: vec![format!(
            "delta = {d}, c = {c} USD/s, cost per second c/delta = {}",
            c / d
        )],
        log2_abscissa: false,
    }
    .sorted()
}

/// Required delay against the reward bound, `(δ/c)·V_max = 60·V_max`.
pub fn case2_delay_curve(reward_bounds: &[f64]) -> CaseStudyOutput {
    let (d, c) = (BASELINE_SPEEDUP, BASELINE_COST_RATE);
    let rows = reward_bounds
        .iter()
        .map(|&v| vec![v, linear_threshold(d, c, v)])
        .collect();
    CaseStudyOutput {
        name: "case2_delay_vs_vmax".into(),
        columns: vec![
            Column::new("V_max", "USD"),
            Column::new("required_delay", "s"),
        ],
        rows,
        headlines: vec![Headline::new(
            "required_delay_Vmax100",
            linear_threshold(d, c, 100.0),
            "s",
        )],
        notes: vec![format!("delta = {d}, c = {c} USD/s")],
        log2_abscissa: false,
    }
    .sorted()
}

/// Grinding delay `(δμ/c)·H_G/√G` for exponential per-seed rewards and
/// square-root cost scaling.
pub fn case3_grinding_curve(sizes: &[u64]) -> CaseStudyOutput {
    let (d, c) = (BASELINE_SPEEDUP, BASELINE_COST_RATE);
    let rows = sizes
        .iter()
        .map(|&g| {
            let vmax = expected_max_exponential(CASE3_MEAN, g);
            vec![
                g as f64,
                harmonic_number(g),
                vmax,
                grinding_threshold(d, c, g, vmax, CASE3_COST_EXPONENT),
            ]
        })
        .collect();
    let at = |g: u64| {
        grinding_threshold(
            d,
            c,
            g,
            expected_max_exponential(CASE3_MEAN, g),
            CASE3_COST_EXPONENT,
        )
    };
    CaseStudyOutput {
        name: "case3_grinding".into(),
        columns: vec![
            Column::new("G", "seeds"),
            Column::new("H_G", "1"),
            Column::new("E_V_max", "USD"),
            Column::new("required_delay", "s"),
        ],
        rows,
        headlines: vec![
            Headline::new("required_delay_G1", at(1), "s"),
            Headline::new("required_delay_G4", at(4), "s"),
            Headline::new("required_delay_G1024", at(1024), "s"),
        ],
        notes: vec![format!(
            "mu = {CASE3_MEAN} USD, delta = {d}, c = {c} USD/s, effective cost c*G^{CASE3_COST_EXPONENT}"
        )],
        log2_abscissa: true,
    }
    .sorted()
}

/// Validator-selection delays for median and tail MEV.
pub fn case4_ethereum() -> CaseStudyOutput {
    let (d, c) = (CASE4_SPEEDUP, CASE4_COST_RATE);
    let rows: Vec<Vec<f64>> = CASE4_REWARDS
        .iter()
        .map(|&v| {
            let t = linear_threshold(d, c, v);
            vec![v, t, t / SECONDS_PER_DAY]
        })
        .collect();
    let headlines = rows
        .iter()
        .flat_map(|r| {
            [
                Headline::new(format!("required_delay_EV{}", r[0]), r[1], "s"),
                Headline::new(format!("required_days_EV{}", r[0]), r[2], "days"),
            ]
        })
        .collect();
    CaseStudyOutput {
        name: "case4_ethereum_randao".into(),
        columns: vec![
            Column::new("E_V", "USD"),
            Column::new("required_delay", "s"),
            Column::new("required_delay", "days"),
        ],
        rows,
        headlines,
        notes: vec![
            format!("delta = {d}, c = {c} USD/s"),
            format!(
                "c is the rounded price; 1.65 USD/hour is exactly {} USD/s",
                1.65 / 3600.0
            ),
        ],
        log2_abscissa: false,
    }
    .sorted()
}

/// Case study by number with its default abscissa.
pub fn by_id(id: u32) -> Option<CaseStudyOutput> {
    match id {
        1 => Some(case1_profit_curves(&default_case1_delays())),
        2 => Some(case2_delay_curve(&default_case2_rewards())),
        3 => Some(case3_grinding_curve(&default_case3_sizes())),
        4 => Some(case4_ethereum()),
        _ => None,
    }
}
