use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cox_grenander::bootstrap::bootstrap_test;
use cox_grenander::limits::{estimate_constants, ArgmaxMcConfig, LimitConstants};
use cox_grenander::study::{lookup, paper_tables, Scale, TablesConfig, TABLE_FILES};
use cox_grenander::{
    breslow, fit_cox, fit_weibull, grenander, Baseline, Dataset, Error, Exec, Result, Scenario, Stat, TestConfig,
    Window,
};

/// Weibull goodness-of-fit tests for the Cox model baseline hazard.
#[derive(Parser, Debug)]
#[command(name = "coxgof", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "COXGOF_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the Cox partial likelihood and the Weibull model; prints JSON.
    Fit(FitArgs),
    /// Grenander-type estimate of the baseline hazard on [eps, M]; prints CSV.
    Grenander(GrenanderArgs),
    /// Bootstrap goodness-of-fit test of a Weibull baseline; prints JSON.
    Test(TestArgs),
    /// Simulate a dataset from a built-in scenario; prints CSV.
    Simulate(SimulateArgs),
    /// Run the level/power tables and write one CSV per table.
    Tables(TablesArgs),
    /// Monte Carlo constants of the limit law of the L_p error; prints CSV.
    Limits(LimitsArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output file (`-` for stdout).
    #[arg(short, long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Input CSV with columns time,status,z1,...,zd (`-` for stdin).
    input: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct GrenanderArgs {
    input: String,
    #[arg(long)]
    eps: f64,
    #[arg(long = "M", alias = "m")]
    m: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct TestArgs {
    input: String,
    /// T, LR, S, or `all` (repeatable).
    #[arg(long, default_value = "T")]
    stat: Vec<String>,
    #[arg(long)]
    eps: f64,
    #[arg(long = "M", alias = "m")]
    m: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replications.
    #[arg(long = "B", alias = "b", default_value_t = 199)]
    b: usize,
    /// Fraction used for the Weibull fit; bare `--split` means 0.5.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.5")]
    split: Option<f64>,
    /// Build the LR estimator on the window only instead of [0, max T].
    #[arg(long)]
    lr_window_only: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the bootstrap values of the first statistic to this CSV.
    #[arg(long)]
    boot_csv: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// `weibull:MU,NU`, `alt_a:C` or `alt_b:C`.
    #[arg(long)]
    scenario: String,
    /// Regression coefficients, comma separated.
    #[arg(long, default_value = "0.5", value_delimiter = ',')]
    beta: Vec<f64>,
    /// Censoring times are uniform on [0, tau]; defaults to the built-in value.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct TablesArgs {
    #[arg(long, default_value = "desk")]
    scale: String,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the outer replications.
    #[arg(long = "N")]
    outer_reps: Option<usize>,
    /// Override the bootstrap replications.
    #[arg(long = "B")]
    b: Option<usize>,
    /// Override the sample sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Args, Debug)]
struct LimitsArgs {
    /// Orders of the L_p error (comma separated).
    #[arg(long, default_value = "1", value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long, default_value_t = 200_000)]
    reps: usize,
    #[arg(long, default_value_t = 6.0)]
    half_width: f64,
    #[arg(long, default_value_t = 0.005)]
    step: f64,
    #[arg(long, default_value_t = 4.0)]
    a_max: f64,
    #[arg(long, default_value_t = 0.1)]
    a_step: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

fn read_input(path: &str) -> Result<Dataset> {
    if path == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        Dataset::read_csv(&buf[..])
    } else {
        Dataset::load_csv(path)
    }
}

fn writer(out: &Output) -> Result<Box<dyn Write>> {
    Ok(if out.out == "-" {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(&out.out)?))
    })
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Resolved configuration goes to stderr so stdout only carries results.
fn log_config(value: serde_json::Value) {
    eprintln!("config: {value}");
}

fn exec() -> Exec {
    Exec::default()
}

fn window(eps: f64, m: f64) -> Result<Window> {
    Window::new(eps, m)
}

fn run_fit(args: &FitArgs) -> Result<()> {
    let data = read_input(&args.input)?;
    log_config(json!({"command": "fit", "input": args.input, "n": data.len(), "d": data.dim()}));
    let cox = fit_cox(&data, &vec![0.0; data.dim()], Default::default())?;
    let theta = fit_weibull(&data, Default::default())?;
    let report = json!({
        "n": data.len(),
        "events": data.events(),
        "beta_hat": cox.beta_hat,
        "partial_loglik": cox.loglik,
        "cox_iterations": cox.iterations,
        "theta": { "mu": theta.mu, "nu": theta.nu, "beta": theta.beta },
    });
    let mut w = writer(&args.output)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
    w.flush()?;
    Ok(())
}

fn run_grenander(args: &GrenanderArgs) -> Result<()> {
    let data = read_input(&args.input)?;
    let win = window(args.eps, args.m)?;
    log_config(json!({"command": "grenander", "input": args.input, "eps": win.eps, "M": win.m}));
    let cox = fit_cox(&data, &vec![0.0; data.dim()], Default::default())?;
    let est = grenander(&breslow(&data, &cox.beta_hat)?, win)?;
    est.write_csv(writer(&args.output)?)
}

fn parse_stats(raw: &[String]) -> Result<Vec<Stat>> {
    let mut stats = Vec::new();
    for s in raw {
        for part in s.split(',') {
            if part.eq_ignore_ascii_case("all") {
                stats.extend(Stat::ALL);
            } else {
                stats.push(part.parse()?);
            }
        }
    }
    stats.dedup();
    Ok(stats)
}

fn run_test(args: &TestArgs) -> Result<()> {
    let data = read_input(&args.input)?;
    let stats = parse_stats(&args.stat)?;
    let mut cfg = TestConfig::new(window(args.eps, args.m)?);
    cfg.p = args.p;
    cfg.alpha = args.alpha;
    cfg.b = args.b;
    cfg.split_ratio = args.split.unwrap_or(1.0);
    cfg.lr_full_range = !args.lr_window_only;
    cfg.validate()?;
    log_config(json!({"command": "test", "input": args.input, "stats": stats, "seed": args.seed, "config": cfg}));
    let reports = bootstrap_test(&data, &cfg, &stats, args.seed, exec())?;
    if let Some(path) = &args.boot_csv {
        reports[0].write_boot_csv(File::create(path)?)?;
    }
    for r in &reports {
        for w in &r.warnings {
            eprintln!("warning ({}): {w}", r.stat);
        }
    }
    let mut w = writer(&args.output)?;
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(&reports)?
    };
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let baseline: Baseline = args.scenario.parse()?;
    let registered = lookup(&baseline);
    let tau = match (args.tau, &registered) {
        (Some(t), _) => t,
        (None, Some(r)) => r.tau,
        (None, None) => return Err(invalid(format!("no built-in tau for {baseline}; pass --tau"))),
    };
    let win = registered.map(|r| r.window()).unwrap_or(Window { eps: 0.0, m: tau });
    let scenario = Scenario { baseline, beta: args.beta.clone(), censor_tau: tau, window: win, n: args.n };
    scenario.validate()?;
    log_config(json!({"command": "simulate", "scenario": scenario, "seed": args.seed}));
    for w in scenario.warnings() {
        eprintln!("warning: {w}");
    }
    scenario.sample_with(args.seed, exec())?.write_csv(writer(&args.output)?)
}

fn run_tables(args: &TablesArgs) -> Result<()> {
    let scale: Scale = args.scale.parse()?;
    let mut tc = TablesConfig::new(scale, args.seed);
    if let Some(n) = args.outer_reps {
        tc.outer_reps = n;
    }
    if let Some(b) = args.b {
        tc.b = b;
    }
    if let Some(ns) = &args.n {
        tc.n_list = ns.clone();
    }
    log_config(json!({"command": "tables", "out": args.out, "config": tc}));
    let paths = paper_tables(&tc, &args.out, exec())?;
    debug_assert_eq!(paths.len(), TABLE_FILES.len());
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run_limits(args: &LimitsArgs) -> Result<()> {
    let cfg = ArgmaxMcConfig {
        half_width: args.half_width,
        step: args.step,
        reps: args.reps,
        a_max: args.a_max,
        a_step: args.a_step,
        zero_noise: false,
    };
    cfg.validate()?;
    log_config(json!({"command": "limits", "p": args.p, "seed": args.seed, "config": cfg}));
    let consts = args
        .p
        .iter()
        .map(|&p| estimate_constants(p, &cfg, args.seed, exec()))
        .collect::<Result<Vec<_>>>()?;
    for c in &consts {
        for w in &c.warnings {
            eprintln!("warning (p={}): {w}", c.p);
        }
    }
    LimitConstants::write_csv(&consts, writer(&args.output)?)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Grenander(a) => run_grenander(a),
        Command::Test(a) => run_test(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Tables(a) => run_tables(a),
        Command::Limits(a) => run_limits(a),
    }
}

#[cfg(feature = "parallel")]
fn run(cli: &Cli) -> Result<()> {
    match cli.threads {
        Some(0) => Err(invalid("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

#[cfg(not(feature = "parallel"))]
fn run(cli: &Cli) -> Result<()> {
    dispatch(cli)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
