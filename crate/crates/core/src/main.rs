//! CLI surface: generate instances, analyze hardness, run Monte Carlo
//! experiments, sweep parameter grids, and recompute reports from raw
//! trial streams.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bestk::algorithm::{cap_term, AlgoConfig};
use bestk::complexity::ComplexityReport;
use bestk::error::Error;
use bestk::harness::{aggregate, generate_family, run_trials, AlgorithmChoice, TrialConfig};
use bestk::instance::Instance;
use bestk::output::{
    aggregate_csv, aggregate_csv_row, parse_trial_stream, trial_stream_to_string,
    AGGREGATE_COLUMNS,
};
use bestk::params::{parse_grid, parse_params};

#[derive(Parser)]
#[command(name = "bestk", about = "Best-k-arm identification simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Bilateral,
    Uniform,
}

impl From<AlgoArg> for AlgorithmChoice {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Bilateral => AlgorithmChoice::Bilateral,
            AlgoArg::Uniform => AlgorithmChoice::Uniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct InstanceSource {
    /// Instance JSON file
    #[arg(long, conflicts_with_all = ["family", "params"])]
    instance: Option<PathBuf>,
    /// Built-in family: appendix_a | symmetric_best1 | uniform_gaps | random
    #[arg(long, requires = "params")]
    family: Option<String>,
    /// Family parameters, e.g. n=4,eps=2^-4
    #[arg(long)]
    params: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file from a built-in family
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute every hardness term for an instance
    Analyze {
        #[arg(long)]
        instance: PathBuf,
        /// Write the JSON report here (table always goes to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run seeded Monte Carlo trials; writes the raw stream to --out and the
    /// aggregate CSV next to it
    Run {
        #[command(flatten)]
        source: InstanceSource,
        #[arg(long, value_enum, default_value = "bilateral")]
        algo: AlgoArg,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        /// Algorithm config JSON (budget constants, cap settings)
        #[arg(long)]
        algo_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one cell per point of a parameter grid; one aggregate row each
    Sweep {
        #[arg(long)]
        family: String,
        /// Axes like eps=2^-4..2^-10;n=8
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value = "bilateral")]
        algo: AlgoArg,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        #[arg(long)]
        algo_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute aggregates from a raw trial stream
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_instance(source: &InstanceSource) -> bestk::Result<Instance> {
    match (&source.instance, &source.family, &source.params) {
        (Some(path), None, None) => Instance::from_json(&fs::read_to_string(path)?),
        (None, Some(family), Some(params)) => generate_family(family, &parse_params(params)?),
        _ => Err(Error::validation(
            "provide either --instance or --family with --params",
        )),
    }
}

fn load_algo_config(path: &Option<PathBuf>) -> bestk::Result<AlgoConfig> {
    let cfg = match path {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => AlgoConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> bestk::Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn run_and_write(config: &TrialConfig, out: &Path) -> bestk::Result<()> {
    let records = run_trials(config)?;
    let agg = aggregate(&records);
    write_text(out, &trial_stream_to_string(config, &records))?;
    let csv_path = out.with_extension("csv");
    write_text(&csv_path, &aggregate_csv(config, &agg))?;
    println!(
        "{} trials, error_rate {} (wilson95 hi {}), median samples {} -> {}, {}",
        agg.trials,
        agg.error_rate,
        agg.error_wilson95_hi,
        agg.samples_median,
        out.display(),
        csv_path.display()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> bestk::Result<()> {
    match cli.command {
        Command::Gen { family, params, out } => {
            let instance = generate_family(&family, &parse_params(&params)?)?;
            write_text(&out, &instance.to_json())?;
            println!(
                "wrote {} ({} arms, k={})",
                out.display(),
                instance.n_arms(),
                instance.k
            );
        }
        Command::Analyze { instance, out } => {
            let inst = Instance::from_json(&fs::read_to_string(&instance)?)?;
            let report =
                ComplexityReport::from_decomposition(&inst.decompose_groups()?, inst.k);
            print!("{}", report.to_table());
            if let Some(out) = out {
                write_text(&out, &serde_json::to_string_pretty(&report)?)?;
            }
        }
        Command::Run {
            source,
            algo,
            delta,
            trials,
            seed,
            jobs,
            algo_config,
            out,
        } => {
            let config = TrialConfig {
                instance: load_instance(&source)?,
                algorithm: algo.into(),
                delta,
                trials,
                master_seed: seed,
                jobs: jobs as usize,
                algo_config: load_algo_config(&algo_config)?,
            };
            run_and_write(&config, &out)?;
        }
        Command::Sweep {
            family,
            grid,
            algo,
            delta,
            trials,
            seed,
            jobs,
            algo_config,
            out,
        } => {
            let cells = parse_grid(&grid)?;
            let algo_config = load_algo_config(&algo_config)?;
            let mut csv = format!(
                "# sweep: family={} grid={:?} algo={:?} delta={} trials={} seed={}\n",
                family,
                grid,
                match AlgorithmChoice::from(algo) {
                    AlgorithmChoice::Bilateral => "bilateral",
                    AlgorithmChoice::Uniform => "uniform",
                },
                delta,
                trials,
                seed
            );
            csv.push_str("cell,params,");
            csv.push_str(AGGREGATE_COLUMNS);
            csv.push_str(",cap_term,samples_median_over_term\n");
            for (i, cell) in cells.iter().enumerate() {
                let instance = generate_family(&family, cell)?;
                let config = TrialConfig {
                    instance,
                    algorithm: algo.into(),
                    delta,
                    trials,
                    master_seed: seed,
                    jobs: jobs as usize,
                    algo_config,
                };
                let records = run_trials(&config)?;
                let agg = aggregate(&records);
                let stream_path = out.with_extension(format!("cell{}.ndjson", i));
                write_text(&stream_path, &trial_stream_to_string(&config, &records))?;
                let term = if config.instance.k < config.instance.n_arms() {
                    cap_term(&config.instance.decompose_groups()?, delta)
                } else {
                    0.0
                };
                let ratio = if term > 0.0 {
                    agg.samples_median as f64 / term
                } else {
                    0.0
                };
                let params_str: Vec<String> =
                    cell.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    i,
                    params_str.join(" "),
                    aggregate_csv_row(&config, &agg),
                    term,
                    ratio
                ));
                println!(
                    "cell {} [{}]: median samples {}, ratio {}",
                    i,
                    params_str.join(" "),
                    agg.samples_median,
                    ratio
                );
            }
            write_text(&out, &csv)?;
        }
        Command::Report { input, format, out } => {
            let (header, records) = parse_trial_stream(&fs::read_to_string(&input)?)?;
            let agg = aggregate(&records);
            let text = match format {
                ReportFormat::Csv => aggregate_csv(&header.config, &agg),
                ReportFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&agg)?;
                    s.push('\n');
                    s
                }
            };
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{}", text),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // exits with code 2 on flag errors
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Validation(_) | Error::Json(_) | Error::CapExhausted)) => {
            eprintln!("error: {}", e);
            ExitCode::from(3)
        }
        Err(e @ Error::Io(_)) => {
            eprintln!("error: {}", e);
            ExitCode::from(4)
        }
    }
}
