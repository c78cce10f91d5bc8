use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use nofjump::generate::sample_instance;
use nofjump::schema::{instance_from_json, instance_to_json};
use nofjump_lab::{
    attack, cover_report, describe_failure, parse_list, plot_setups, run_one, sweep, write_rows, Format, PermChoice,
    Sampling, Setup, UsageError,
};

/// Simulate, verify and attack one-way NOF pointer-jumping protocols
#[derive(Parser, Debug)]
#[command(name = "nofjump", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one instance (from a file, or sampled) and print the transcript
    Run(RunArgs),
    /// Check a protocol against brute-force evaluation
    Verify(SweepArgs),
    /// Measure worst-case costs and compare them with the bound
    Bench(SweepArgs),
    /// Build a d-cover or (S,d)-cover and print it
    Cover(CoverArgs),
    /// Build a fooling pair against a collapsing protocol
    Attack(AttackArgs),
    /// Cost table for every upper-bound protocol, for plotting
    EmitPlotData(PlotArgs),
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    /// index, mpj3-sublinear, mpjk-sublinear, bucketing, bucketing-doubling,
    /// broken-const, truncate<t>, parity<t>, hash<t>, constant
    #[arg(long)]
    protocol: String,

    /// Number of players
    #[arg(long)]
    k: Option<usize>,

    /// Cover parameter of the sublinear protocols
    #[arg(long)]
    d: Option<usize>,

    #[arg(long, value_enum, default_value_t)]
    perm_protocol: PermChoice,
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Seed for sampling and for sample-protocol keys
    #[arg(long, env = "NOFJUMP_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Comma-separated widths
    #[arg(long, default_value = "4")]
    n: String,

    #[command(flatten)]
    seed: SeedArg,

    /// Instances drawn per width when not exhaustive
    #[arg(long, default_value_t = 1000)]
    samples: usize,

    /// Enumerate every instance instead of sampling
    #[arg(long)]
    exhaustive: bool,

    /// Refuse exhaustive sweeps larger than this
    #[arg(long, default_value_t = 1_000_000)]
    budget: u128,

    #[arg(long, value_enum, default_value_t)]
    format: Format,

    /// Write the table here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,

    /// Print the bucket plans as JSON and exit
    #[arg(long)]
    emit_buckets: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Instance JSON file; sampled from --n and --seed when absent
    #[arg(long)]
    input: Option<PathBuf>,

    #[arg(long, default_value_t = 4)]
    n: usize,

    #[command(flatten)]
    seed: SeedArg,

    /// Also write the instance JSON here
    #[arg(long)]
    save_instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoverArgs {
    /// The function, 1-based values, comma-separated
    #[arg(long)]
    f: String,

    #[arg(long)]
    d: usize,

    /// Restrict to this subset (1-based, comma-separated)
    #[arg(long)]
    s: Option<String>,
}

#[derive(Args, Debug)]
struct AttackArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    #[arg(long, default_value_t = 8)]
    n: usize,

    #[command(flatten)]
    seed: SeedArg,

    /// Accept n above 16
    #[arg(long)]
    allow_large_n: bool,

    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long, default_value = "4,8,16")]
    n: String,

    #[arg(long, default_value_t = 3)]
    k: usize,

    #[arg(long, default_value_t = 2)]
    d: usize,

    #[command(flatten)]
    seed: SeedArg,

    #[arg(long, default_value_t = 1000)]
    samples: usize,

    #[arg(long, value_enum, default_value_t)]
    format: Format,

    #[arg(long)]
    output: Option<PathBuf>,
}

impl ProtocolArgs {
    fn setup(&self, seed: u64) -> Result<Setup> {
        Setup::resolve(&self.protocol, self.k, self.d, self.perm_protocol, seed)
    }
}

impl SweepArgs {
    fn sampling(&self) -> Sampling {
        if self.exhaustive {
            Sampling::Exhaustive { budget: self.budget }
        } else {
            Sampling::Seeded { seed: self.seed.seed, samples: self.samples }
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn emit_buckets(setup: &Setup, ns: &[usize]) -> Result<ExitCode> {
    let mut docs = Vec::new();
    for &n in ns {
        match setup.plan(n)? {
            Some(plan) => docs.push(plan.describe()),
            None => anyhow::bail!(UsageError(format!("{} has no bucket plan", setup.name()))),
        }
    }
    write_json(&docs, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &SweepArgs) -> Result<ExitCode> {
    let setup = args.protocol.setup(args.seed.seed)?;
    let ns = parse_list(&args.n)?;
    if args.emit_buckets {
        return emit_buckets(&setup, &ns);
    }
    let outcome = sweep(&setup, &ns, args.sampling())?;
    for r in &outcome.rows {
        println!(
            "{} n={} k={} view={}: checked {}, failures {}, max cost {}",
            r.protocol, r.n, r.k, r.view, r.checked, r.failures, r.max_cost
        );
    }
    if let Some(f) = &outcome.first_failure {
        println!("first failure: {}", describe_failure(f));
    }
    if let Some(path) = &args.output {
        write_rows(&outcome.rows, setup.k, args.format, sink(Some(path))?)?;
    }
    Ok(if outcome.failures() == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_bench(args: &SweepArgs) -> Result<ExitCode> {
    let setup = args.protocol.setup(args.seed.seed)?;
    let ns = parse_list(&args.n)?;
    if args.emit_buckets {
        return emit_buckets(&setup, &ns);
    }
    let outcome = sweep(&setup, &ns, args.sampling())?;
    write_rows(&outcome.rows, setup.k, args.format, sink(args.output.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode> {
    let setup = args.protocol.setup(args.seed.seed)?;
    let inst = match &args.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            instance_from_json(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
        }
        None => sample_instance(&setup.shape(args.n)?, args.seed.seed),
    };
    if let Some(path) = &args.save_instance {
        std::fs::write(path, instance_to_json(&inst) + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    let report = run_one(&setup, &inst)?;
    write_json(&report, None)?;
    Ok(if report.correct { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_cover(args: &CoverArgs) -> Result<ExitCode> {
    let f = parse_list(&args.f)?;
    let s = args.s.as_deref().map(parse_list).transpose()?;
    let report = cover_report(&f, s.as_deref(), args.d)?;
    write_json(&report, None)?;
    Ok(if report.verified { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_attack(args: &AttackArgs) -> Result<ExitCode> {
    let setup = args.protocol.setup(args.seed.seed)?;
    match attack(&setup, args.n, args.allow_large_n) {
        Ok(report) => {
            write_json(&report, args.output.as_deref())?;
            Ok(if report.prefix_equal && report.errors == 1 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Err(e) => match e.downcast_ref::<nofjump::Error>() {
            Some(nofjump::Error::Precondition(why)) => {
                eprintln!("refused: {why}");
                Ok(ExitCode::from(1))
            }
            _ => Err(e),
        },
    }
}

fn cmd_plot(args: &PlotArgs) -> Result<ExitCode> {
    let ns = parse_list(&args.n)?;
    let sampling = Sampling::Seeded { seed: args.seed.seed, samples: args.samples };
    let mut rows = Vec::new();
    let mut players = 0;
    for setup in plot_setups(args.k, args.d, PermChoice::Naive, args.seed.seed)? {
        players = players.max(setup.k);
        // bucketing needs n >= 2
        let usable: Vec<usize> = ns.iter().copied().filter(|&n| setup.shape(n).is_ok() && setup.plan(n).is_ok()).collect();
        rows.extend(sweep(&setup, &usable, sampling)?.rows);
    }
    write_rows(&rows, players, args.format, sink(args.output.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Cover(a) => cmd_cover(a),
        Command::Attack(a) => cmd_attack(a),
        Command::EmitPlotData(a) => cmd_plot(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<UsageError>().is_some()
                || matches!(
                    e.downcast_ref::<nofjump::Error>(),
                    Some(
                        nofjump::Error::InvalidParameter(_)
                            | nofjump::Error::Malformed(_)
                            | nofjump::Error::BudgetExceeded { .. }
                            | nofjump::Error::Json(_)
                            | nofjump::Error::OutOfRange { .. }
                            | nofjump::Error::WidthMismatch { .. }
                    )
                );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
