//! Command-line harness: plan routes, compare planners, render plots, and
//! dump decompositions for scenario files.
//!
//! Exit codes: 0 success, 2 validation/usage error, 3 no path between the
//! endpoints, 4 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use larp::metrics::{evaluate, DEFAULT_MAX_STEP};
use larp::network::build_network;
use larp::plot::{render_svg, PlotArtifacts};
use larp::scenario::{plan_route, run_comparison, PlannerChoice, RouteReport, Scenario};
use larp::{Error, Result};

#[derive(Parser)]
#[command(name = "larp", version, about = "Restrictive-field route planning toolkit")]
struct Cli {
    /// Reserved for future stochastic planners; currently always rejected
    /// because every computation here is deterministic.
    #[arg(long, global = true)]
    seed_free: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's safety weight β.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single planner and write the route with its metrics as JSON.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Planner: PM, APF, APF*, M-APF, or Larp.
        #[arg(long, default_value = "larp")]
        planner: String,
    },
    /// Run planners side by side and write the metric table as CSV.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Planner to include (repeatable); defaults to all five.
        #[arg(long = "planner")]
        planners: Vec<String>,
        /// Omit the runtime column for byte-stable output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Render the field as an SVG heat map with optional overlays.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Outline the decomposition leaves.
        #[arg(long)]
        tree: bool,
        /// Draw the routing-network edges.
        #[arg(long)]
        network: bool,
        /// Overlay the routes of all five planners.
        #[arg(long)]
        routes: bool,
    },
    /// Dump the decomposition tree as JSON.
    Tree {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_planner(name: &str) -> Result<PlannerChoice> {
    PlannerChoice::parse(name).ok_or_else(|| {
        Error::InvalidScenario(format!(
            "unknown planner {name:?} (expected PM, APF, APF*, M-APF, or Larp)"
        ))
    })
}

fn load(common: &Common) -> Result<Scenario> {
    let mut scenario = Scenario::load(&common.scenario)?;
    if let Some(beta) = common.beta {
        scenario.search.beta = beta;
        scenario.validate()?;
    }
    Ok(scenario)
}

fn write_out(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.seed_free {
        return Err(Error::InvalidScenario(
            "--seed-free is reserved: all planners here are deterministic".into(),
        ));
    }
    match cli.command {
        Command::Plan { common, planner } => {
            let choice = parse_planner(&planner)?;
            let scenario = load(&common)?;
            let field = scenario.field();
            let (route, _) = plan_route(&scenario, &field, choice)?;
            let metrics = evaluate(&route, &field, scenario.goal, DEFAULT_MAX_STEP);
            let mut text = serde_json::to_string_pretty(&RouteReport::new(&route, metrics))?;
            text.push('\n');
            write_out(common.out.as_ref(), &text)
        }
        Command::Compare {
            common,
            planners,
            no_timing,
        } => {
            let choices = if planners.is_empty() {
                PlannerChoice::ALL.to_vec()
            } else {
                planners
                    .iter()
                    .map(|name| parse_planner(name))
                    .collect::<Result<Vec<_>>>()?
            };
            let scenario = load(&common)?;
            let report = run_comparison(&scenario, &choices)?;
            write_out(common.out.as_ref(), &report.to_csv(!no_timing))
        }
        Command::Plot {
            common,
            tree,
            network,
            routes,
        } => {
            let scenario = load(&common)?;
            let quad = if tree || network {
                Some(scenario.build_tree()?)
            } else {
                None
            };
            let net = match (network, &quad) {
                (true, Some(quad)) => Some(build_network(quad, &scenario.search)),
                _ => None,
            };
            let comparison = if routes {
                Some(run_comparison(&scenario, &PlannerChoice::ALL)?)
            } else {
                None
            };
            let artifacts = PlotArtifacts {
                tree: if tree { quad.as_ref() } else { None },
                network: net.as_ref(),
                routes: comparison
                    .as_ref()
                    .map(|report| {
                        report
                            .rows
                            .iter()
                            .map(|row| (row.planner, &row.route))
                            .collect()
                    })
                    .unwrap_or_default(),
            };
            write_out(common.out.as_ref(), &render_svg(&scenario, &artifacts))
        }
        Command::Tree { common } => {
            let scenario = load(&common)?;
            let tree = scenario.build_tree()?;
            let mut text = serde_json::to_string_pretty(&tree.export())?;
            text.push('\n');
            write_out(common.out.as_ref(), &text)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoPath | Error::BlockedEndpoint => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
