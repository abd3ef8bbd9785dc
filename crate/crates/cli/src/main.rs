use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use esdp_cli::commands::read_manifest;
use esdp_cli::{parse_scenario, replay, run, CliError, ExitStatus, Invocation};
use esdp_core::montecarlo::SimConfig;
use esdp_core::stopping::GridSpec;

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "ESDP_OUT_DIR";

#[derive(Parser)]
#[command(name = "esdp", version, about = "Economically secure delay parameters")]
struct Cli {
    /// Print results as JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Required delay under every applicable condition.
    Threshold {
        scenario: PathBuf,
        /// Candidate delay to judge, in seconds.
        #[arg(long)]
        delay: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Symmetric mixed-strategy equilibrium among competing attackers.
    Equilibrium {
        scenario: PathBuf,
        /// Number of players; defaults to the scenario's.
        #[arg(long)]
        players: Option<u64>,
        /// Delay in seconds; defaults to env.honest_delay.
        #[arg(long)]
        delay: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Optimal-stopping value and policy grids.
    Solve {
        scenario: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Keep every n-th time slice and work level in value.csv.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo profit estimate.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value_t = SimConfig::default().trials)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Two-sided confidence level of the reported interval.
        #[arg(long, default_value_t = SimConfig::default().confidence)]
        confidence: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Regenerate a reference case study (1-4).
    Casestudy {
        #[arg(long)]
        id: u32,
        /// Also render an SVG chart.
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rerun the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Output directory for artifacts and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn resolve(self) -> Option<PathBuf> {
        self.out
            .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
    }
}

#[derive(Args)]
struct GridArgs {
    /// Time step in seconds.
    #[arg(long, default_value_t = GridSpec::default().time_step)]
    dt: f64,
    /// Reward grid points.
    #[arg(long, default_value_t = GridSpec::default().reward_points)]
    vpoints: usize,
    /// Reward axis maximum in USD.
    #[arg(long)]
    vmax: Option<f64>,
    /// Gauss-Hermite nodes for the reward transition.
    #[arg(long, default_value_t = GridSpec::default().quadrature_nodes)]
    nodes: usize,
}

impl From<GridArgs> for GridSpec {
    fn from(g: GridArgs) -> Self {
        GridSpec {
            time_step: g.dt,
            reward_points: g.vpoints,
            reward_max: g.vmax,
            quadrature_nodes: g.nodes,
        }
    }
}

fn load(path: &Path) -> Result<esdp_core::Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let json = cli.json;
    let (invocation, scenario, dir) = match cli.command {
        Command::Replay { manifest, out: o } => {
            let m = read_manifest(&manifest)?;
            return replay(&m, o.resolve().as_deref(), json, out);
        }
        Command::Threshold {
            scenario,
            delay,
            out,
        } => (Invocation::Threshold { delay }, Some(scenario), out),
        Command::Equilibrium {
            scenario,
            players,
            delay,
            out,
        } => (
            Invocation::Equilibrium { players, delay },
            Some(scenario),
            out,
        ),
        Command::Solve {
            scenario,
            grid,
            stride,
            out,
        } => (
            Invocation::Solve {
                grid: grid.into(),
                stride,
            },
            Some(scenario),
            out,
        ),
        Command::Simulate {
            scenario,
            trials,
            seed,
            confidence,
            grid,
            out,
        } => {
            let grid: GridSpec = grid.into();
            let sim = SimConfig {
                trials,
                time_step: grid.time_step,
                seed,
                confidence,
            };
            (Invocation::Simulate { sim, grid }, Some(scenario), out)
        }
        Command::Casestudy { id, svg, out } => (Invocation::Casestudy { id, svg }, None, out),
    };
    let scenario = scenario.as_deref().map(load).transpose()?;
    run(
        &invocation,
        scenario.as_ref(),
        dir.resolve().as_deref(),
        json,
        out,
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let status = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitStatus::Ok,
                _ => ExitStatus::InputError,
            };
            return ExitCode::from(status.code());
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let status = match dispatch(cli, &mut lock) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    let _ = lock.flush();
    ExitCode::from(status.code())
}
