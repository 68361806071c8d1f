//! `wigent`: evaluate Wigner-slice entanglement criteria from the command line.
//!
//! Exit codes: 0 success (whatever the verdict), 1 other failure, 2 bad
//! configuration, 3 quadrature did not converge, 4 Fock cutoff too small.

mod config;
mod output;
mod pool;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Table;
use run::{Failure, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "wigent", version, about = "Entanglement criteria from slices of two-mode Wigner functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate criteria for one state and write a JSON (or CSV) report.
    Evaluate(CommonArgs),
    /// Evaluate criteria over a one- or two-parameter grid and write CSV.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Independent checks: PPT, pseudospin EPR, engine cross-checks, CHSH.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        oracle: OracleArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (`key = value` lines under `[section]` headers). Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// State family: tmsv, tmst, werner-phi+, werner-psi+, cat-plus, cat-minus, standard-form.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Two-mode squeezing.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Attenuator transmissivity.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Amplifier gain parameter.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    /// Mixing or dephasing weight.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// Cat amplitude.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Standard-form variance of mode A.
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// Standard-form variance of mode B.
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    /// Standard-form x correlation.
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<String>,
    /// Standard-form p correlation.
    #[arg(long, allow_hyphen_values = true)]
    c2: Option<String>,
    /// Fock cutoff per mode.
    #[arg(long, allow_hyphen_values = true)]
    cutoff: Option<String>,
    /// Comma-separated criteria: c1, c2, c3, purity-s1, simon, duan, ppt, pseudospin-epr, bell-chsh, epsilon-min:<criterion>.
    #[arg(long, allow_hyphen_values = true)]
    criterion: Option<String>,
    /// identity, p-reflect, neg-identity, optimize, or `a,b,c,d,x0,p0`.
    #[arg(long, allow_hyphen_values = true)]
    transform: Option<String>,
    /// Mixing angle in radians, or `optimize`.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// full, shrink, rect:x_min,x_max,p_min,p_max or disks:x,p,r;...
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// CHSH displacements (eight numbers) or `optimize`.
    #[arg(long, allow_hyphen_values = true)]
    displacements: Option<String>,
    /// Quadrature rule: tensor or adaptive.
    #[arg(long, allow_hyphen_values = true)]
    rule: Option<String>,
    /// Tensor Gauss–Legendre order.
    #[arg(long, allow_hyphen_values = true)]
    order: Option<String>,
    /// Absolute quadrature tolerance.
    #[arg(long, allow_hyphen_values = true)]
    tolerance: Option<String>,
    /// Output format: json or csv.
    #[arg(long, allow_hyphen_values = true)]
    format: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o', allow_hyphen_values = true)]
    output: Option<String>,
    /// Record wall-clock runtime in each report. Off by default so outputs are reproducible.
    #[arg(long)]
    timing: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long, allow_hyphen_values = true)]
    workers: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// First (outer) grid parameter.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Values: start:stop:count, start<:stop:count, or a list.
    #[arg(long = "x-values", allow_hyphen_values = true)]
    x_values: Option<String>,
    /// Second (inner) grid parameter.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long = "y-values", allow_hyphen_values = true)]
    y_values: Option<String>,
    /// Write a gnuplot script for the CSV to this path.
    #[arg(long, allow_hyphen_values = true)]
    gnuplot: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    /// Smallest eigenvalue of the partial transpose.
    #[arg(long)]
    ppt: bool,
    /// Pseudospin EPR steering correlator.
    #[arg(long)]
    pseudospin: bool,
    /// Closed-form vs Fock Wigner engines, and Fock kernel vs displaced parity.
    #[arg(long = "crosscheck-wigner")]
    crosscheck_wigner: bool,
    /// CHSH value from displaced parities.
    #[arg(long)]
    bell: bool,
    /// Search the CHSH displacements.
    #[arg(long)]
    optimize: bool,
}

fn build_table(common: &CommonArgs) -> Result<Table, Failure> {
    let mut table = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(config::ConfigError::new(None, "--config", format!("{}: {e}", path.display()))))?;
            Table::parse(&text, &path.display().to_string())?
        }
        None => Table::default(),
    };
    let flags: [(&Option<String>, &str, &str); 22] = [
        (&common.state, "state.family", "--state"),
        (&common.s, "state.s", "--s"),
        (&common.eta, "state.eta", "--eta"),
        (&common.r, "state.r", "--r"),
        (&common.epsilon, "state.epsilon", "--epsilon"),
        (&common.gamma, "state.gamma", "--gamma"),
        (&common.n, "state.n", "--n"),
        (&common.m, "state.m", "--m"),
        (&common.c1, "state.c1", "--c1"),
        (&common.c2, "state.c2", "--c2"),
        (&common.cutoff, "state.cutoff", "--cutoff"),
        (&common.criterion, "criterion.name", "--criterion"),
        (&common.transform, "criterion.transform", "--transform"),
        (&common.theta, "criterion.theta", "--theta"),
        (&common.region, "criterion.region", "--region"),
        (&common.displacements, "criterion.displacements", "--displacements"),
        (&common.rule, "quadrature.rule", "--rule"),
        (&common.order, "quadrature.order", "--order"),
        (&common.tolerance, "quadrature.tolerance", "--tolerance"),
        (&common.format, "output.format", "--format"),
        (&common.output, "output.path", "--output"),
        (&common.workers, "run.workers", "--workers"),
    ];
    for (value, key, flag) in flags {
        if let Some(v) = value {
            table.set_flag(key, v, flag);
        }
    }
    if common.timing {
        table.set_flag("output.timing", "true", "--timing");
    }
    Ok(table)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::Io(format!("cannot write output: {e}"))),
    }
}

fn render(cfg: &RunConfig, outcomes: &[run::Outcome]) -> Vec<u8> {
    match cfg.format {
        run::Format::Json => output::json(&cfg.state, outcomes).into_bytes(),
        run::Format::Csv => output::report_csv(outcomes, cfg.timing),
    }
}

fn cmd_evaluate(cfg: &RunConfig) -> Result<(), Failure> {
    let mut outcomes = Vec::new();
    for &q in &cfg.quantities {
        outcomes.push(run::evaluate_quantity(&cfg.state, q, cfg, cfg.workers)?);
    }
    write_output(cfg.output.as_deref(), &render(cfg, &outcomes))
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let points = cfg.grid();
    let results = pool::ordered_map(points.len(), cfg.workers, |i| -> Result<Vec<run::Outcome>, Failure> {
        let state = cfg.state_at(&points[i]);
        cfg.quantities.iter().map(|&q| run::evaluate_quantity(&state, q, cfg, 1)).collect()
    });
    let results: Vec<Vec<run::Outcome>> = results.into_iter().collect::<Result<_, _>>()?;
    write_output(cfg.output.as_deref(), &output::sweep_csv(cfg, &points, &results))?;
    if let (Some(script), Some(csv_path)) = (&cfg.gnuplot, &cfg.output) {
        write_output(Some(script), output::gnuplot_script(cfg, csv_path).as_bytes())?;
    }
    Ok(())
}

fn cmd_oracle(cfg: &RunConfig) -> Result<(), Failure> {
    let mut outcomes = Vec::new();
    for &check in &cfg.checks {
        outcomes.extend(run::run_check(&cfg.state, check, cfg)?);
    }
    write_output(cfg.output.as_deref(), &render(cfg, &outcomes))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Evaluate(common) => {
            let table = build_table(&common)?;
            cmd_evaluate(&RunConfig::from_table(&table, Mode::Evaluate)?)
        }
        Command::Sweep { common, sweep } => {
            let mut table = build_table(&common)?;
            for (value, key, flag) in [
                (&sweep.x, "sweep.x", "--x"),
                (&sweep.x_values, "sweep.x_values", "--x-values"),
                (&sweep.y, "sweep.y", "--y"),
                (&sweep.y_values, "sweep.y_values", "--y-values"),
                (&sweep.gnuplot, "output.gnuplot", "--gnuplot"),
            ] {
                if let Some(v) = value {
                    table.set_flag(key, v, flag);
                }
            }
            cmd_sweep(&RunConfig::from_table(&table, Mode::Sweep)?)
        }
        Command::Oracle { common, oracle } => {
            let mut table = build_table(&common)?;
            let chosen: Vec<&str> = [
                (oracle.ppt, "ppt"),
                (oracle.pseudospin, "pseudospin"),
                (oracle.crosscheck_wigner, "crosscheck-wigner"),
                (oracle.bell, "bell"),
            ]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, name)| *name)
            .collect();
            if !chosen.is_empty() {
                table.set_flag("oracle.checks", &chosen.join(","), "--ppt/--pseudospin/--crosscheck-wigner/--bell");
            }
            if oracle.optimize {
                table.set_flag("oracle.optimize", "true", "--optimize");
            }
            cmd_oracle(&RunConfig::from_table(&table, Mode::Oracle)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wigent: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
