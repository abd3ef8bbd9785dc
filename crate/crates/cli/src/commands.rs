//! Subcommand implementations and the run manifest.
//!
//! Every command writes its human-readable report to the supplied writer.
//! When an output directory is given it also writes its artifacts there,
//! followed by a `manifest.json` from which [`replay`] reruns it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use esdp_core::casestudies::{self, CaseStudyOutput};
use esdp_core::equilibrium::{equilibrium_attack_probability, EquilibriumResult};
use esdp_core::exec::Execution;
use esdp_core::fmt::sig6;
use esdp_core::model::Scenario;
use esdp_core::montecarlo::{
    commit_attack_trials, rollout_trials, summarize, write_trials_csv, ProfitEstimate, SimConfig,
};
use esdp_core::stopping::{
    check_threshold_structure, extract_decision_boundary, initial_security_verdict, solve_with,
    write_boundary_csv, write_value_csv, GridSpec,
};
use esdp_core::thresholds::{esdp, ThresholdReport};

use crate::error::{CliError, ExitStatus};
use crate::svg::Chart;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A fully resolved subcommand: everything needed to reproduce its outputs
/// apart from the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Invocation {
    Threshold {
        delay: Option<f64>,
    },
    Equilibrium {
        players: Option<u64>,
        delay: Option<f64>,
    },
    Solve {
        grid: GridSpec,
        /// Keep every `stride`-th time slice and work level in the value CSV.
        stride: usize,
    },
    Simulate {
        sim: SimConfig,
        grid: GridSpec,
    },
    Casestudy {
        id: u32,
        svg: bool,
    },
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Threshold { .. } => "threshold",
            Invocation::Equilibrium { .. } => "equilibrium",
            Invocation::Solve { .. } => "solve",
            Invocation::Simulate { .. } => "simulate",
            Invocation::Casestudy { .. } => "casestudy",
        }
    }

    fn needs_scenario(&self) -> bool {
        !matches!(self, Invocation::Casestudy { .. })
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Simulate { sim, .. } => Some(sim.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(flatten)]
    pub invocation: Invocation,
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Artifact file names inside `out_dir`.
    pub outputs: Vec<String>,
}

/// Where artifacts go and which files were written.
struct Sink {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Sink {
    fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            written: Vec::new(),
        })
    }

    fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let mut buf = Vec::new();
        body(&mut buf).map_err(|e| CliError::io(name, e))?;
        let path = dir.join(name);
        fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)?;
            buf.push(b'\n');
            Ok(())
        })
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}

/// Runs one subcommand. `json` switches the report to machine-readable form.
pub fn run(
    invocation: &Invocation,
    scenario: Option<&Scenario>,
    out_dir: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let scenario = match (invocation.needs_scenario(), scenario) {
        (true, Some(s)) => {
            s.validate()?;
            Some(s)
        }
        (true, None) => return Err(CliError::invalid("this subcommand needs a scenario")),
        (false, _) => None,
    };
    let mut sink = Sink::new(out_dir)?;
    let status = match invocation {
        Invocation::Threshold { delay } => {
            threshold(scenario.expect("checked"), *delay, &mut sink, json, out)?
        }
        Invocation::Equilibrium { players, delay } => equilibrium(
            scenario.expect("checked"),
            *players,
            *delay,
            &mut sink,
            json,
            out,
        )?,
        Invocation::Solve { grid, stride } => solve(
            scenario.expect("checked"),
            grid,
            *stride,
            &mut sink,
            json,
            out,
        )?,
        Invocation::Simulate { sim, grid } => {
            simulate(scenario.expect("checked"), sim, grid, &mut sink, json, out)?
        }
        Invocation::Casestudy { id, svg } => casestudy(*id, *svg, &mut sink, json, out)?,
    };
    if let Some(dir) = sink.dir.clone() {
        let manifest = RunManifest {
            version: VERSION.to_string(),
            invocation: invocation.clone(),
            scenario: scenario.cloned(),
            seed: invocation.seed(),
            out_dir: dir,
            outputs: std::mem::take(&mut sink.written),
        };
        sink.write_json(MANIFEST_FILE, &manifest)?;
    }
    Ok(status)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Reruns a manifest, writing into `out_dir` or the manifest's own directory.
pub fn replay(
    manifest: &RunManifest,
    out_dir: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let dir = out_dir.unwrap_or(&manifest.out_dir);
    run(
        &manifest.invocation,
        manifest.scenario.as_ref(),
        Some(dir),
        json,
        out,
    )
}

fn check_delay(delay: Option<f64>) -> Result<(), CliError> {
    match delay {
        Some(d) if !(d >= 0.0 && d.is_finite()) => Err(CliError::invalid(format!(
            "--delay must be a finite number >= 0, got {d}"
        ))),
        _ => Ok(()),
    }
}

fn threshold(
    scenario: &Scenario,
    delay: Option<f64>,
    sink: &mut Sink,
    json: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    check_delay(delay)?;
    let report = esdp(scenario, delay)?;
    sink.write_json("threshold.json", &report)?;
    if json {
        emit(out, &to_json(&report)?)?;
    } else {
        emit(out, &render_threshold(&report))?;
    }
    Ok(match report.secure_at {
        Some(v) if !v.secure => ExitStatus::Insecure,
        _ => ExitStatus::Ok,
    })
}

pub fn render_threshold(report: &ThresholdReport) -> String {
    let mut s = format!("{:<16} {}\n", "condition", "required_delay(s)");
    for r in &report.requirements {
        s += &format!("{:<16} {}\n", r.condition.name(), sig6(r.required_delay));
    }
    s += &format!("binding condition: {}\n", report.binding_condition.name());
    s += &format!("ESDP: {} s\n", sig6(report.esdp));
    if let Some(v) = report.secure_at {
        let word = if v.secure { "SECURE" } else { "INSECURE" };
        s += &format!("delay {} s: {word}\n", sig6(v.delay));
    }
    for note in &report.notes {
        s += &format!("note: {note}\n");
    }
    s
}

fn equilibrium(
    scenario: &Scenario,
    players: Option<u64>,
    delay: Option<f64>,
    sink: &mut Sink,
    json: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    check_delay(delay)?;
    let n = players.unwrap_or(scenario.players);
    if n == 0 {
        return Err(CliError::invalid("players must be >= 1"));
    }
    let t = delay.unwrap_or(scenario.env.honest_delay);
    let result = equilibrium_attack_probability(
        n,
        scenario.reward.expected_reward(),
        scenario.env.cost_rate,
        t,
        scenario.env.speedup,
    )?;
    sink.write_json("equilibrium.json", &result)?;
    if json {
        emit(out, &to_json(&result)?)?;
    } else {
        emit(out, &render_equilibrium(n, t, &result))?;
    }
    Ok(ExitStatus::Ok)
}

pub fn render_equilibrium(players: u64, delay: f64, r: &EquilibriumResult) -> String {
    format!(
        "players: {players}\ndelay: {} s\nregime: {}\nattack probability p*: {}\n\
         expected attackers: {}\nper-attacker profit: {} USD\n",
        sig6(delay),
        r.regime.name(),
        sig6(r.attack_probability),
        sig6(r.expected_attackers),
        sig6(r.per_attacker_profit),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub initial_reward: f64,
    pub initial_value: f64,
    pub tolerance: f64,
    pub secure: bool,
    pub first_insecure_reward: Option<f64>,
    pub structure_violations: usize,
}

fn solve(
    scenario: &Scenario,
    grid: &GridSpec,
    stride: usize,
    sink: &mut Sink,
    json: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let (vg, pg) = solve_with(scenario, grid, Execution::default())?;
    let structure = check_threshold_structure(&pg);
    let verdicts = initial_security_verdict(&vg);
    let initial_value = vg.value_at_start();
    let summary = SolveSummary {
        initial_reward: scenario.reward.initial_level(),
        initial_value,
        tolerance: verdicts.tolerance,
        secure: initial_value <= verdicts.tolerance,
        first_insecure_reward: verdicts.first_insecure_reward,
        structure_violations: structure.violations.len(),
    };
    if sink.enabled() {
        sink.write("value.csv", |buf| write_value_csv(buf, &vg, &pg, stride))?;
        if structure.is_monotone() {
            let boundary = extract_decision_boundary(&pg)?;
            sink.write("boundary.csv", |buf| write_boundary_csv(buf, &boundary))?;
        }
        sink.write_json("solve.json", &summary)?;
    }
    if json {
        emit(out, &to_json(&summary)?)?;
    } else {
        let mut s = format!(
            "J(T, v0 = {}, t0) = {} USD (tolerance {} USD)\n",
            sig6(summary.initial_reward),
            sig6(summary.initial_value),
            sig6(summary.tolerance)
        );
        match summary.first_insecure_reward {
            Some(v) => s += &format!("smallest insecure grid reward: {} USD\n", sig6(v)),
            None => s += "secure at every grid reward\n",
        }
        if !structure.is_monotone() {
            s += &format!(
                "warning: {} threshold-structure violations; boundary not written\n",
                structure.violations.len()
            );
        }
        s += if summary.secure {
            "SECURE\n"
        } else {
            "INSECURE\n"
        };
        emit(out, &s)?;
    }
    Ok(if summary.secure {
        ExitStatus::Ok
    } else {
        ExitStatus::Insecure
    })
}

fn simulate(
    scenario: &Scenario,
    sim: &SimConfig,
    grid: &GridSpec,
    sink: &mut Sink,
    json: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    sim.validate()?;
    let exec = Execution::default();
    let (policy, outcomes) = if scenario.reward.is_markov() {
        let (_, pg) = solve_with(scenario, grid, exec)?;
        (
            "optimal stopping rollout",
            rollout_trials(&pg, scenario, sim, exec)?,
        )
    } else {
        ("commit attack", commit_attack_trials(scenario, sim, exec)?)
    };
    let estimate = summarize(&outcomes, sim.confidence);
    sink.write("trials.csv", |buf| write_trials_csv(buf, &outcomes))?;
    sink.write_json("simulate.json", &estimate)?;
    if json {
        emit(out, &to_json(&estimate)?)?;
    } else {
        emit(out, &render_profit(policy, sim, &estimate))?;
    }
    Ok(ExitStatus::Ok)
}

pub fn render_profit(policy: &str, sim: &SimConfig, e: &ProfitEstimate) -> String {
    format!(
        "policy: {policy}\ntrials: {}\nseed: {}\nmean profit: {} USD (std error {})\n\
         {}% CI: [{}, {}] USD\npositive-profit fraction: {}\n",
        e.trials,
        sim.seed,
        sig6(e.mean),
        sig6(e.std_error),
        sig6(sim.confidence * 100.0),
        sig6(e.confidence_interval.0),
        sig6(e.confidence_interval.1),
        sig6(e.positive_profit_fraction),
    )
}

fn casestudy(
    id: u32,
    svg: bool,
    sink: &mut Sink,
    json: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let study = casestudies::by_id(id)
        .ok_or_else(|| CliError::invalid(format!("unknown case study id {id}; expected 1-4")))?;
    if svg && !sink.enabled() {
        return Err(CliError::invalid("--svg needs an output directory (--out)"));
    }
    let stem = format!("case{id}");
    sink.write(&format!("{stem}.csv"), |buf| study.write_csv(buf))?;
    sink.write_json(&format!("{stem}.json"), &study)?;
    if svg {
        let chart = Chart::from_case_study(&study).render();
        sink.write(&format!("{stem}.svg"), |buf| {
            buf.extend_from_slice(chart.as_bytes());
            Ok(())
        })?;
    }
    if json {
        emit(out, &to_json(&study)?)?;
    } else if sink.enabled() {
        emit(out, &render_headlines(&study))?;
    } else {
        let mut buf = Vec::new();
        study
            .write_csv(&mut buf)
            .map_err(|e| CliError::io("<stdout>", e))?;
        out.write_all(&buf)
            .map_err(|e| CliError::io("<stdout>", e))?;
        emit(out, &render_headlines(&study))?;
    }
    Ok(ExitStatus::Ok)
}

pub fn render_headlines(study: &CaseStudyOutput) -> String {
    let mut s = format!("{}\n", study.name);
    for h in &study.headlines {
        s += &format!("{}: {} {}\n", h.label, sig6(h.value), h.unit);
    }
    for note in &study.notes {
        s += &format!("note: {note}\n");
    }
    s
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_to_string(inv: &Invocation, s: Option<&Scenario>) -> (ExitStatus, String) {
        let mut buf = Vec::new();
        let status = run(inv, s, None, false, &mut buf).unwrap();
        (status, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn threshold_verdicts() {
        let s = Scenario::baseline(600.0, 10.0);
        let (st, text) = run_to_string(&Invocation::Threshold { delay: Some(5.0) }, Some(&s));
        assert_eq!(st, ExitStatus::Insecure);
        assert!(
            text.contains("INSECURE") && text.contains("ESDP: 600 s"),
            "{text}"
        );
        let (st, text) = run_to_string(&Invocation::Threshold { delay: Some(600.0) }, Some(&s));
        assert_eq!(st, ExitStatus::Ok);
        assert!(text.contains("SECURE"));
        let (st, _) = run_to_string(&Invocation::Threshold { delay: None }, Some(&s));
        assert_eq!(st, ExitStatus::Ok);
    }

    #[test]
    fn equilibrium_examples() {
        let s = Scenario::baseline(450.0, 10.0);
        let inv = Invocation::Equilibrium {
            players: Some(2),
            delay: Some(450.0),
        };
        let (_, text) = run_to_string(&inv, Some(&s));
        assert!(text.contains("p*: 0.666667"), "{text}");
        let inv = Invocation::Equilibrium {
            players: Some(2),
            delay: Some(720.0),
        };
        let (_, text) = run_to_string(&inv, Some(&s));
        assert!(
            text.contains("regime: no-attack") && text.contains("p*: 0\n"),
            "{text}"
        );
        let inv = Invocation::Equilibrium {
            players: Some(0),
            delay: None,
        };
        let err = run(&inv, Some(&s), None, false, &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), ExitStatus::Invalid);
    }

    #[test]
    fn invalid_scenario_is_exit_two() {
        let mut s = Scenario::baseline(600.0, 10.0);
        s.env.speedup = 0.5;
        let err = run(
            &Invocation::Threshold { delay: None },
            Some(&s),
            None,
            false,
            &mut Vec::new(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), ExitStatus::Invalid);
        assert!(err.to_string().contains("env.speedup"));
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let m = RunManifest {
            version: VERSION.into(),
            invocation: Invocation::Simulate {
                sim: SimConfig::default(),
                grid: GridSpec::default(),
            },
            scenario: Some(Scenario::baseline(300.0, 10.0)),
            seed: Some(0),
            out_dir: "out".into(),
            outputs: vec!["trials.csv".into()],
        };
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains(r#""subcommand":"simulate""#));
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
    }
}
