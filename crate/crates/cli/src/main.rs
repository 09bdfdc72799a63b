use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vortint_core::flows;
use vortint_core::harness::{self, run_suite};
use vortint_core::Error;

#[derive(Parser)]
#[command(
    name = "vortint",
    version,
    about = "Conserved vorticity integrals on advected surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and persist its reports.
    Run {
        /// TOML experiment file; outputs are named after its stem.
        config: PathBuf,
    },
    /// Run a built-in acceptance suite, one row per criterion.
    Suite {
        /// Suite name; `paper-acceptance` is the one that ships.
        name: String,
        /// Reduced resolutions and horizons; each affected row documents
        /// the change in its note.
        #[arg(long)]
        quick: bool,
        /// Run a single criterion by name.
        #[arg(long, value_name = "name")]
        only: Option<String>,
    },
    /// Flow catalog queries.
    Flows {
        #[command(subcommand)]
        command: FlowsCommand,
    },
    /// Equation-of-motion residuals for one catalog flow at default
    /// parameters, over seeded random space-time samples.
    Residual {
        flow: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum FlowsCommand {
    /// Print every flow name the builder accepts.
    List,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

/// Ok(false) is a clean run whose measurements failed their tolerances.
fn dispatch(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { config } => run_config(&config),
        Command::Suite { name, quick, only } => suite(&name, quick, only.as_deref()),
        Command::Flows {
            command: FlowsCommand::List,
        } => {
            for name in flows::catalog_names() {
                println!("{name}");
            }
            Ok(true)
        }
        Command::Residual { flow, samples } => residual(&flow, samples),
    }
}

fn run_config(path: &PathBuf) -> Result<bool, Error> {
    let outcome = harness::run_file(path)?;
    for report in &outcome.reports {
        let verdict = match report.pass {
            Some(true) => " [pass]",
            Some(false) => " [FAIL]",
            None => "",
        };
        let flux = match report.flux_balance_err {
            Some(err) => format!(" flux_balance={err:.3e}"),
            None => String::new(),
        };
        println!(
            "{}: value(t0)={:.12e} drift_abs={:.3e} drift_rel={:.3e}{}{}",
            report.kind, report.series[0].value, report.drift_abs, report.drift_rel, flux, verdict
        );
        if let Some(orders) = &report.convergence_orders {
            let mut parts = Vec::new();
            if let Some(f) = orders.dt_drift {
                parts.push(format!("dt drift {:.2} (r2 {:.4})", f.order, f.r2));
            }
            if let Some(f) = orders.dt_flux {
                parts.push(format!("dt flux {:.2} (r2 {:.4})", f.order, f.r2));
            }
            if let Some(f) = orders.mesh_drift {
                parts.push(format!("mesh drift {:.2} (r2 {:.4})", f.order, f.r2));
            }
            if !parts.is_empty() {
                println!("  orders: {}", parts.join(", "));
            }
        }
        for warning in &report.warnings {
            println!("  warning: {warning}");
        }
    }
    for file in &outcome.files {
        println!("wrote {}", file.display());
    }
    Ok(outcome.passed != Some(false))
}

fn suite(name: &str, quick: bool, only: Option<&str>) -> Result<bool, Error> {
    if name != "paper-acceptance" {
        return Err(Error::config(
            "suite",
            format!("unknown suite `{name}`; available: paper-acceptance"),
        ));
    }
    let rows = run_suite(quick, only)?;
    for row in &rows {
        println!("{}", row.line());
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    println!(
        "{}/{} criteria passed{}",
        rows.len() - failed,
        rows.len(),
        if quick { " (quick)" } else { "" }
    );
    Ok(failed == 0)
}

fn residual(flow_name: &str, samples: usize) -> Result<bool, Error> {
    if !flows::catalog_names().contains(&flow_name) {
        return Err(Error::config(
            "flow",
            format!(
                "unknown flow `{flow_name}`; available: {}",
                flows::catalog_names().join(", ")
            ),
        ));
    }
    let flow = flows::build(flow_name, &serde_json::json!({}))?;
    let points = flows::sample_points(flow.as_ref(), samples, 2024);
    let report = flows::euler_residual(flow.as_ref(), &points)?;
    println!("flow: {} ({} samples)", flow.name(), report.samples);
    println!("max momentum residual:       {:.6e}", report.max_momentum);
    match report.max_continuity {
        Some(c) => println!("max continuity residual:     {c:.6e}"),
        None => println!("max continuity residual:     n/a (no density field)"),
    }
    println!("max entropy residual:        {:.6e}", report.max_entropy);
    println!("max curl transport residual: {:.6e}", report.max_curl_transport);
    println!("worst: {:.6e}", report.worst());
    Ok(true)
}
