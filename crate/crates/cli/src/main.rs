//! `mpcc`: allocations, deadline sizing and experiment runs from the command line.
//!
//! Exit status is 0 on success, 1 when a valid query has no feasible answer and 2 on
//! any input error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mpcc_dlt::constellation::{normalize, sample_cluster, Cluster};
use mpcc_dlt::harness::config::{DEFAULT_NEIGHBORS, DEFAULT_PLATFORM_SEED, DEFAULT_W_RANGE, DEFAULT_Z_RANGE};
use mpcc_dlt::harness::{execute, format_number, CsvTable, ExperimentConfig, PlatformSource};
use mpcc_dlt::mpcc::{allocate, makespan_for_load, DivisibilitySpec, NormalizedPlatform};
use mpcc_dlt::sizing::{n_min, DeadlineQuery, MinCooperators};
use mpcc_dlt::{Error, Interval};

#[derive(Parser)]
#[command(
    name = "mpcc",
    version,
    about = "Divisible-load scheduling on a relay-centred satellite cluster"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal load fractions and makespan for one task.
    Allocate(AllocateArgs),
    /// Smallest number of neighbors that meets a deadline.
    Size(SizeArgs),
    /// Run an experiment described by a config file and write its CSV output.
    Experiment(ExperimentArgs),
}

/// A cluster file, or a sampled per-unit-load cluster when no file is given.
#[derive(Args)]
struct PlatformArgs {
    /// Cluster file (`node <id> [relay] cs=<Flops/s> bw=<MB/s>` per line).
    #[arg(long)]
    cluster: Option<PathBuf>,
    /// Compute intensity in Flops/MB used to normalize the cluster file.
    #[arg(long, requires = "cluster")]
    ci: Option<f64>,
    /// Neighbors of a sampled cluster.
    #[arg(long, default_value_t = DEFAULT_NEIGHBORS, conflicts_with = "cluster")]
    neighbors: usize,
    /// Per-unit compute time range of a sampled cluster, `lo:hi`.
    #[arg(long, default_value_t = Interval::new(DEFAULT_W_RANGE.0, DEFAULT_W_RANGE.1).unwrap(), conflicts_with = "cluster")]
    w_range: Interval,
    /// Per-unit link time range of a sampled cluster, `lo:hi`.
    #[arg(long, default_value_t = Interval::new(DEFAULT_Z_RANGE.0, DEFAULT_Z_RANGE.1).unwrap(), conflicts_with = "cluster")]
    z_range: Interval,
    /// Sampler seed.
    #[arg(long, default_value_t = DEFAULT_PLATFORM_SEED, conflicts_with = "cluster")]
    seed: u64,
}

impl PlatformArgs {
    fn platform(&self) -> Result<NormalizedPlatform, Error> {
        match &self.cluster {
            Some(path) => {
                let cluster = Cluster::load(path)?;
                let ci = self
                    .ci
                    .ok_or_else(|| Error::Domain("--ci is required with --cluster".into()))?;
                normalize(&cluster, ci)
            }
            None => sample_cluster(self.neighbors, self.w_range, self.z_range, self.seed),
        }
    }
}

#[derive(Args)]
struct AllocateArgs {
    #[command(flatten)]
    platform: PlatformArgs,
    /// Root-only fraction of the task.
    #[arg(long, conflicts_with = "gamma")]
    f: Option<f64>,
    /// Parallelizable fraction; sets f = 1 - gamma.
    #[arg(long)]
    gamma: Option<f64>,
    /// Result-to-input size ratio.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Task size in MB, for the physical makespan.
    #[arg(long, default_value_t = 1.0)]
    load: f64,
    /// Also write the allocation as a one-row CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SizeArgs {
    #[command(flatten)]
    platform: PlatformArgs,
    /// Required makespan per unit load, seconds.
    #[arg(long)]
    t_req: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Write the ranked contributions as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides the platform sampler seed and the workload seed.
    #[arg(long)]
    seed: Option<u64>,
}

enum Outcome {
    Done,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Allocate(a) => cmd_allocate(a),
        Command::Size(a) => cmd_size(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(1),
        Err(Error::Infeasible(msg)) => {
            eprintln!("mpcc: infeasible: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("mpcc: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_allocate(args: AllocateArgs) -> Result<Outcome, Error> {
    let platform = args.platform.platform()?;
    let f = match (args.f, args.gamma) {
        (Some(f), _) => f,
        (None, Some(g)) => 1.0 - g,
        (None, None) => 0.0,
    };
    let spec = DivisibilitySpec::new(f, args.beta)?;
    let alloc = allocate(&platform, &spec)?;
    let makespan = makespan_for_load(&alloc, args.load)?;

    let mut out = String::new();
    let _ = writeln!(out, "regime={}", alloc.regime);
    let _ = writeln!(out, "t_star={}", format_number(alloc.t_star));
    let _ = writeln!(out, "makespan={}", format_number(makespan));
    let _ = writeln!(out, "alpha_0={}", format_number(alloc.alpha0));
    for (i, a) in alloc.alphas.iter().enumerate() {
        let _ = writeln!(out, "alpha_{}={}", i + 1, format_number(*a));
    }

    if let Some(path) = args.csv {
        let mut header = vec![
            "regime".to_string(),
            "t_star".into(),
            "makespan".into(),
            "alpha_0".into(),
        ];
        header.extend((1..=alloc.alphas.len()).map(|i| format!("alpha_{i}")));
        let mut table = CsvTable::new(&header);
        let mut row = vec![
            alloc.regime.to_string(),
            format_number(alloc.t_star),
            format_number(makespan),
            format_number(alloc.alpha0),
        ];
        row.extend(alloc.alphas.iter().map(|a| format_number(*a)));
        table.push(row);
        table.write_atomic(&path)?;
    }
    emit(&out);
    Ok(Outcome::Done)
}

fn cmd_size(args: SizeArgs) -> Result<Outcome, Error> {
    let platform = args.platform.platform()?;
    let report = n_min(&DeadlineQuery::new(args.t_req, platform, args.beta)?);
    let selected = match report.n_min {
        MinCooperators::Count(n) => n,
        MinCooperators::Infeasible => 0,
    };

    let mut out = String::new();
    let _ = writeln!(out, "delta={}", format_number(report.delta));
    let mut table = CsvTable::new(&["rank", "g", "cumulative", "threshold", "selected"]);
    for (k, (g, c)) in report.sorted_contributions().iter().zip(&report.cumulative).enumerate() {
        let rank = k + 1;
        let _ = writeln!(
            out,
            "rank={rank} child={} g={} cumulative={}",
            report.order[k] + 1,
            format_number(*g),
            format_number(*c)
        );
        table.push(vec![
            rank.to_string(),
            format_number(*g),
            format_number(*c),
            format_number(report.delta),
            u8::from(rank <= selected).to_string(),
        ]);
    }
    let _ = writeln!(out, "n_min={}", report.n_min);

    if let Some(path) = args.csv {
        table.write_atomic(&path)?;
    }
    emit(&out);
    Ok(match report.n_min {
        MinCooperators::Count(_) => Outcome::Done,
        MinCooperators::Infeasible => Outcome::Infeasible,
    })
}

fn cmd_experiment(args: ExperimentArgs) -> Result<Outcome, Error> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(out) = args.output {
        config.output = Some(out);
    }
    if let Some(seed) = args.seed {
        config.workload_seed = seed;
        if let PlatformSource::Sampled { seed: s, .. } = &mut config.platform {
            *s = seed;
        }
    }
    let mut out = String::new();
    for path in execute(&config)? {
        let _ = writeln!(out, "{}", path.display());
    }
    emit(&out);
    Ok(Outcome::Done)
}

/// Prints the report; a closed stdout (e.g. piped into `head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
