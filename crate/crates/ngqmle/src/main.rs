use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use ngqmle::io::{read_returns, write_returns};
use ngqmle::mc::{ratio_csv, run_parallel, THREADS_ENV};
use ngqmle::report::{fit_report, FitRequest};
use ngqmle::tables::{compute, TableKind};
use ngqmle_core::estimators::FitOptions;
use ngqmle_core::likelihoods::{parse_family_list, InnovationDistribution, QuasiLikelihood};
use ngqmle_core::montecarlo::{histogram, McConfig, McReport};
use ngqmle_core::selection::CandidateGrid;
use ngqmle_core::volatility::{simulate, GarchOrder, GarchParams};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ngqmle", version, about = "Two-step non-Gaussian QMLE for GARCH(p,q) models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a GARCH path and write it as a one-column CSV.
    Simulate(SimulateArgs),
    /// Fit a GARCH model to a return series and print a JSON report.
    Fit(FitArgs),
    /// Tabulate η_f or μ over likelihood and innovation lists.
    Tables(TablesArgs),
    /// Run a Monte Carlo study from a JSON configuration.
    Mc(McArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Parameters as JSON, e.g. '{"sigma":0.5,"a":[0.35],"b":[0.3]}'.
    #[arg(long)]
    params: String,
    /// Innovation law, e.g. `t:5`, `skewed_t:7:0.5`, `stable:1.5`, or a JSON family spec.
    #[arg(long, default_value = "gaussian")]
    innovation: String,
    #[arg(short = 'T', long = "length")]
    length: usize,
    #[arg(long, default_value_t = 500)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// One-column CSV of returns; `-` reads standard input.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value = "1,1")]
    order: GarchOrder,
    /// Second-step likelihood, e.g. `t:4`, `gg:1.2` or '{"family":"student_t","shape":4}'.
    #[arg(long)]
    likelihood: Option<String>,
    /// Run the two-step estimator (implied by --likelihood).
    #[arg(long)]
    two_step: bool,
    /// Choose the likelihood from a candidate grid.
    #[arg(long)]
    select: bool,
    /// Student t degrees of freedom in the grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid_t: Option<Vec<f64>>,
    /// Generalized Gaussian shapes in the grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid_gg: Option<Vec<f64>>,
    /// Leave the Gaussian likelihood out of the grid.
    #[arg(long)]
    no_gaussian: bool,
    /// Allow generalized Gaussian shapes above 1 in the grid.
    #[arg(long)]
    wide_gg: bool,
    /// Add the aggregation of the two-step and Gaussian estimators.
    #[arg(long)]
    aggregate: bool,
    /// Also report the fit without scale correction.
    #[arg(long)]
    unscaled: bool,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long, default_value_t = 3)]
    multistart: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(value_enum)]
    kind: TableKind,
    /// Likelihood list, e.g. `gg:0.2,0.6,1.0,t:3,5`.
    #[arg(long)]
    likelihoods: String,
    /// Innovation list in the same shorthand.
    #[arg(long)]
    innovations: String,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// JSON Monte Carlo configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Overrides the configuration's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Write ratio tables for these `numerator/denominator` label pairs as CSV.
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    #[arg(long, requires = "pairs")]
    ratios: Option<PathBuf>,
    /// Add histograms of the standardized estimates on [-4, 4) with this many bins.
    #[arg(long)]
    histogram_bins: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let core = e.chain().find_map(|c| c.downcast_ref::<ngqmle_core::Error>());
            let numerical = core.is_some_and(|c| c.is_numerical());
            let stage = core.and_then(|c| match c {
                ngqmle_core::Error::Stage { stage, .. } => Some(stage.to_string()),
                _ => None,
            });
            let body = json!({
                "error": format!("{e:#}"),
                "kind": if numerical { "numerical" } else { "usage" },
                "stage": stage,
            });
            eprintln!("{body}");
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Tables(a) => tables_cmd(a),
        Command::Mc(a) => mc_cmd(a),
    }
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn parse_innovation(s: &str) -> anyhow::Result<InnovationDistribution> {
    if s.trim_start().starts_with('{') {
        Ok(serde_json::from_str(s).context("invalid innovation JSON")?)
    } else {
        Ok(s.parse()?)
    }
}

fn parse_likelihood(s: &str) -> anyhow::Result<QuasiLikelihood> {
    if s.trim_start().starts_with('{') {
        Ok(serde_json::from_str(s).context("invalid likelihood JSON")?)
    } else {
        Ok(s.parse()?)
    }
}

fn simulate_cmd(a: SimulateArgs) -> anyhow::Result<()> {
    let params: GarchParams = serde_json::from_str(&a.params).context("invalid --params")?;
    let innovation = parse_innovation(&a.innovation)?;
    let x = simulate(&params, &innovation, a.length, a.burn_in, a.seed)?;
    let header = json!({
        "command": "simulate",
        "params": params,
        "innovation": innovation,
        "T": a.length,
        "burn_in": a.burn_in,
        "seed": a.seed,
    });
    let mut buf = format!("# {header}\n").into_bytes();
    write_returns(&mut buf, &x)?;
    emit(a.output.as_deref(), std::str::from_utf8(&buf)?)
}

fn fit_cmd(a: FitArgs) -> anyhow::Result<()> {
    let returns = if a.input.as_os_str() == "-" {
        ngqmle::io::parse_returns(std::io::stdin().lock())?
    } else {
        read_returns(&a.input)?
    };
    let likelihood = a.likelihood.as_deref().map(parse_likelihood).transpose()?;
    if a.two_step && likelihood.is_none() && !a.select {
        bail!("--two-step needs --likelihood or --select");
    }
    let defaults = CandidateGrid::default();
    let grid = CandidateGrid {
        t_dofs: a.grid_t.unwrap_or(defaults.t_dofs),
        gg_shapes: a.grid_gg.unwrap_or(defaults.gg_shapes),
        include_gaussian: !a.no_gaussian,
        allow_wide_gg: a.wide_gg,
    };
    let req = FitRequest {
        order: a.order,
        likelihood,
        select: a.select,
        grid,
        aggregate: a.aggregate,
        unscaled: a.unscaled,
        options: FitOptions {
            max_iterations: a.max_iterations,
            gradient_tolerance: a.tolerance,
            initial_params: None,
            multistart: a.multistart,
        },
    };
    let report = fit_report(&returns, &req)?;
    let out = json!({ "command": "fit", "input": a.input, "report": report });
    emit(a.output.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&out)?))
}

fn tables_cmd(a: TablesArgs) -> anyhow::Result<()> {
    let likelihoods =
        parse_family_list(&a.likelihoods)?.iter().map(|s| parse_likelihood(s)).collect::<anyhow::Result<Vec<_>>>()?;
    let innovations =
        parse_family_list(&a.innovations)?.iter().map(|s| parse_innovation(s)).collect::<anyhow::Result<Vec<_>>>()?;
    let table = compute(a.kind, &likelihoods, &innovations);
    let header = json!({
        "command": "tables",
        "kind": a.kind,
        "likelihoods": a.likelihoods,
        "innovations": a.innovations,
    });
    let text = if a.json {
        format!("{}\n", serde_json::to_string_pretty(&json!({ "config": header, "table": table }))?)
    } else {
        format!("# {header}\n{}", table.to_csv()?)
    };
    emit(a.output.as_deref(), &text)
}

fn mc_cmd(a: McArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("cannot read {}", a.config.display()))?;
    let mut config: McConfig = serde_json::from_str(&text).context("invalid Monte Carlo configuration")?;
    if let Some(s) = a.seed {
        config.master_seed = s;
    }
    let report = run_parallel(config, a.threads)?;
    let pairs = a
        .pairs
        .iter()
        .map(|p| match p.split_once('/') {
            Some((n, d)) => Ok((n.to_string(), d.to_string())),
            None => bail!("pair {p:?} is not of the form numerator/denominator"),
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if let Some(path) = &a.ratios {
        fs::write(path, ratio_csv(&report, &pairs)?).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let histograms = a.histogram_bins.map(|bins| histograms(&report, bins));
    let out = json!({ "command": "mc", "report": report, "histograms": histograms });
    emit(a.output.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&out)?))
}

fn histograms(report: &McReport, bins: usize) -> serde_json::Value {
    let per_estimator: serde_json::Map<String, serde_json::Value> = report
        .estimators
        .iter()
        .map(|e| {
            let h: serde_json::Map<String, serde_json::Value> = e
                .parameter_names
                .iter()
                .zip(&e.standardized)
                .map(|(n, z)| (n.clone(), json!(histogram(z, -4.0, 4.0, bins.max(1)))))
                .collect();
            (e.label.clone(), serde_json::Value::Object(h))
        })
        .collect();
    json!({ "range": [-4.0, 4.0], "bins": bins, "counts": per_estimator })
}
