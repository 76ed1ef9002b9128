//! `nestcode`: reproducible experiments for nested lattice codes over the
//! two-user Gaussian MAC and the two-way relay channel.

mod checks;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nestcode::chain::{all_passed, build_chain, build_chain_with_alpha, Alpha, CheckResult, NestedChain};
use nestcode::mac::{run_monte_carlo, MacConfig, Target, SIM_CSV_HEADER};
use nestcode::region::{alpha_grid, RegionReport, REGION_CSV_HEADER};
use nestcode::relay::{run_gtwrc, GTWRC_CSV_HEADER};
use nestcode::Family;
use serde::Serialize;
use serde_json::json;

use output::Sink;

#[derive(Parser, Debug)]
#[command(name = "nestcode", version, about, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Achievable rate regions, bounds and hulls at one SNR.
    Region(RegionArgs),
    /// Monte Carlo decoding of T1 (or T2) over the Gaussian MAC.
    Simulate(SimArgs),
    /// Two-way relay: uplink decoding plus exact recovery at both nodes.
    Gtwrc(SimArgs),
    /// Checks a lattice's quantizer, modulo law and second moment.
    ValidateLattice(LatticeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Flat JSON object of flag values; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RegionArgs {
    #[arg(long)]
    snr: f64,
    /// Uniform alpha grid size; alpha_mmse is always added, and 1 means only alpha_mmse.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Leave out the compute-and-forward square and the hull that includes it.
    #[arg(long)]
    no_cf: bool,
    /// Leave out the outer-bound square.
    #[arg(long)]
    no_outer: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    s.parse::<Alpha>().map_err(|e| e.to_string())
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse::<Target>().map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimArgs {
    /// Base lattice: z, d or e8.
    #[arg(long, value_parser = parse_family, default_value = "e8")]
    family: Family,
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// alpha1 = 1/k.
    #[arg(long, conflicts_with = "alpha")]
    k: Option<u32>,
    /// alpha1 as a fraction p/q; values other than 1/k fail chain validation.
    #[arg(long, value_parser = parse_alpha)]
    #[serde(serialize_with = "output::display")]
    alpha: Option<Alpha>,
    /// Fine-lattice refinement factor.
    #[arg(long, default_value_t = 2)]
    f: u32,
    /// Transmit power per dimension.
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Comma-separated SNR values P/N; one output row each.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    snr: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Master seed; a random one is drawn and recorded when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_target, default_value = "T1")]
    target: Target,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct LatticeArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Random points for the quantizer and modulo checks.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Samples for the second-moment estimate.
    #[arg(long, default_value_t = 200_000)]
    moment_samples: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

/// Failure with its exit code: 2 for bad configuration, 3 for a failed
/// validation, 1 for I/O.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Self { code: 2, message: e.to_string() }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

fn setup_threads(threads: usize) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(Failure::io)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn cmd_region(args: RegionArgs) -> Result<(), Failure> {
    let grid = alpha_grid(args.grid, args.snr).map_err(Failure::config)?;
    let report = RegionReport::compute(args.snr, &grid).map_err(Failure::config)?;
    let config = serde_json::to_value(&args).map_err(Failure::io)?;
    let mut sink = Sink::open(args.common.out.as_deref())?;
    let s = &report.summary;
    let summary = [
        format!("alpha_mmse = {}", output::num(s.alpha_mmse)),
        format!("point A = ({}, {})", output::num(s.point_a.r1), output::num(s.point_a.r2)),
        format!("point B = ({}, {})", output::num(s.point_b.r1), output::num(s.point_b.r2)),
        format!("outer bound = {}", output::num(s.outer_bound)),
        format!("CF rate = {}", output::num(s.cf_rate)),
        format!("hull symmetric rate = {}", output::num(s.hull_symmetric_rate)),
        format!("hull+CF symmetric rate = {}", output::num(s.hull_cf_symmetric_rate)),
    ];
    match args.common.format {
        Format::Csv => {
            sink.header("region", &config)?;
            for line in &summary {
                sink.comment(line)?;
            }
            sink.line(REGION_CSV_HEADER)?;
            for p in report.rows(!args.no_cf, !args.no_outer) {
                sink.line(&p.csv_row())?;
            }
        }
        Format::Json => sink.json(&json!({"command": "region", "config": config, "report": report}))?,
    }
    sink.finish()?;
    if args.common.out.is_some() {
        println!("snr = {}", output::num(args.snr));
        for line in &summary {
            println!("{line}");
        }
    }
    Ok(())
}

fn build(args: &SimArgs) -> Result<NestedChain, Failure> {
    let chain = match (args.k, args.alpha) {
        (_, Some(alpha)) => build_chain_with_alpha(args.family, args.n, alpha, args.f, args.power),
        (k, None) => build_chain(args.family, args.n, k.unwrap_or(2), args.f, args.power),
    };
    chain.map_err(Failure::config)
}

fn report_checks(checks: &[CheckResult]) {
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "validation failed: {} (measured {}, expected {}) {}",
            c.name,
            output::num(c.measured),
            output::num(c.expected),
            c.detail
        );
    }
}

fn validated(args: &SimArgs) -> Result<(NestedChain, Vec<CheckResult>), Failure> {
    for &snr in &args.snr {
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Failure::config(format!("snr must be positive, got {snr}")));
        }
    }
    if args.trials == 0 {
        return Err(Failure::config("trials must be at least 1"));
    }
    let chain = build(args)?;
    let checks = chain.validate();
    if !all_passed(&checks) {
        report_checks(&checks);
        return Err(Failure {
            code: 3,
            message: "chain validation failed".into(),
        });
    }
    Ok((chain, checks))
}

fn measured_sigma2(checks: &[CheckResult]) -> Option<f64> {
    checks.iter().find(|c| c.name == "sigma2(lambda1) = P").map(|c| c.measured)
}

fn mac_config(chain: &NestedChain, args: &SimArgs, snr: f64, seed: u64) -> MacConfig {
    MacConfig {
        chain: chain.clone(),
        noise_var: args.power / snr,
        trials: args.trials,
        master_seed: seed,
        target: args.target,
    }
}

fn sim_config(args: &SimArgs, seed: u64) -> Result<serde_json::Value, Failure> {
    let mut config = serde_json::to_value(args).map_err(Failure::io)?;
    config["seed"] = json!(seed);
    Ok(config)
}

fn cmd_simulate(args: SimArgs) -> Result<(), Failure> {
    let seed = resolve_seed(args.seed);
    let (chain, checks) = validated(&args)?;
    let config = sim_config(&args, seed)?;
    let descriptor = chain.descriptor(measured_sigma2(&checks));
    let reports = args
        .snr
        .iter()
        .map(|&snr| run_monte_carlo(&mac_config(&chain, &args, snr, seed)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::config)?;
    let mut sink = Sink::open(args.common.out.as_deref())?;
    match args.common.format {
        Format::Csv => {
            sink.header("simulate", &config)?;
            sink.comment(&format!("chain: {}", serde_json::to_string(&descriptor).map_err(Failure::io)?))?;
            sink.comment(&format!("target: {}", args.target))?;
            sink.line(SIM_CSV_HEADER)?;
            for r in &reports {
                sink.line(&r.csv_row())?;
            }
        }
        Format::Json => sink.json(&json!({
            "command": "simulate",
            "config": config,
            "chain": descriptor,
            "validation": checks,
            "reports": reports,
        }))?,
    }
    sink.finish()?;
    if args.common.out.is_some() {
        for r in &reports {
            println!(
                "snr {}: {} errors in {} trials, p_e {} [{}, {}], vnr {}",
                output::num(r.snr),
                r.error_count,
                r.trials,
                output::num(r.p_e_hat),
                output::num(r.wilson_95_interval.0),
                output::num(r.wilson_95_interval.1),
                output::num(r.vnr_at_predicted_var)
            );
        }
    }
    Ok(())
}

fn cmd_gtwrc(args: SimArgs) -> Result<(), Failure> {
    let seed = resolve_seed(args.seed);
    let (chain, checks) = validated(&args)?;
    let config = sim_config(&args, seed)?;
    let descriptor = chain.descriptor(measured_sigma2(&checks));
    let reports = args
        .snr
        .iter()
        .map(|&snr| run_gtwrc(&mac_config(&chain, &args, snr, seed)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::config)?;
    let mut sink = Sink::open(args.common.out.as_deref())?;
    match args.common.format {
        Format::Csv => {
            sink.header("gtwrc", &config)?;
            sink.comment(&format!("chain: {}", serde_json::to_string(&descriptor).map_err(Failure::io)?))?;
            sink.comment("downlink: ideal")?;
            sink.line(GTWRC_CSV_HEADER)?;
            for r in &reports {
                sink.line(&r.csv_row())?;
            }
        }
        Format::Json => sink.json(&json!({
            "command": "gtwrc",
            "config": config,
            "chain": descriptor,
            "reports": reports,
        }))?,
    }
    sink.finish()?;
    if args.common.out.is_some() {
        for r in &reports {
            println!(
                "snr {}: uplink errors {}, end-to-end errors {} of {}",
                output::num(r.snr),
                r.uplink_errors,
                r.e2e_errors,
                r.trials
            );
        }
    }
    Ok(())
}

fn cmd_validate_lattice(args: LatticeArgs) -> Result<(), Failure> {
    let seed = resolve_seed(args.seed);
    let mut config = serde_json::to_value(&args).map_err(Failure::io)?;
    config["seed"] = json!(seed);
    let checks = checks::run(args.family, args.n, args.samples, args.moment_samples, seed).map_err(Failure::config)?;
    let mut sink = Sink::open(args.common.out.as_deref())?;
    match args.common.format {
        Format::Csv => {
            sink.header("validate-lattice", &config)?;
            sink.line(checks::CSV_HEADER)?;
            for c in &checks {
                sink.line(&checks::csv_row(c))?;
            }
        }
        Format::Json => sink.json(&json!({"command": "validate-lattice", "config": config, "checks": checks}))?,
    }
    sink.finish()?;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("{status} {}: {}", c.name, c.detail);
    }
    if all_passed(&checks) {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: "lattice validation failed".into(),
        })
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Region(a) => {
            setup_threads(a.common.threads)?;
            cmd_region(a)
        }
        Command::Simulate(a) => {
            setup_threads(a.common.threads)?;
            cmd_simulate(a)
        }
        Command::Gtwrc(a) => {
            setup_threads(a.common.threads)?;
            cmd_gtwrc(a)
        }
        Command::ValidateLattice(a) => {
            setup_threads(a.common.threads)?;
            cmd_validate_lattice(a)
        }
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
