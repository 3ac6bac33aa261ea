//! `msplab`: run secretary experiments from the shell.
//!
//! Exit status is 0 on success, 2 for bad arguments or inputs and 3 when
//! the algorithm or partition distribution under test misbehaves.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use msplab::engine::{write_trace_jsonl, TraceLine};
use msplab::experiments::{
    broom_attack_experiment, deterministic_attack_experiment, hat_failure_experiment, resolve_seed, run_estimate,
    simulate_trial, EstimateRun, ExperimentConfig, ExperimentError, OutputFormat, SeedSource,
};
use msplab::greedy::PolicyKind;
use msplab::hat::{default_bound_params, empirical_lemma_checks, scan_failure_bounds};
use msplab::matroid::parse_rational;
use msplab::partition::{
    convex_extremum, find_shattered_triangle, parse_partition, recurrence_check, DegreeTable, DistributionKind,
    EdgePartition, PartitionDistribution,
};
use msplab::engine::{Stream, TrialSeed};

#[derive(Parser)]
#[command(name = "msplab", version, about = "Matroid secretary experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and print its trace.
    Simulate(SimulateArgs),
    /// Estimate utility and per-element competitiveness.
    Estimate(EstimateArgs),
    /// Hat-graph failure experiment.
    Hat(HatArgs),
    /// Random broom against a partition distribution.
    Broom(BroomArgs),
    /// Edge partitions of complete graphs.
    #[command(subcommand)]
    Partition(PartitionCommand),
    /// Scan the induction condition of the low-degree recurrence.
    Recurrence(RecurrenceArgs),
    /// Evaluate the hat failure bound functions.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct Common {
    /// Master seed; MSPLAB_SEED takes precedence.
    #[arg(long)]
    seed: Option<u64>,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    /// supergreedy, dynkin, optimistic, pessimistic, virtual, korula-pal or offline.
    #[arg(long = "alg")]
    algorithm: String,
    /// uniform:k:n, graphic:FILE, complete:n, hat:n:alpha or broom:n.
    #[arg(long)]
    matroid: String,
    /// random, descending or file:PATH.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Trial index under the master seed.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, value_enum, default_value_t = TraceFormat::Jsonl)]
    emit: TraceFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    /// One event per line.
    Jsonl,
    /// A single document with the trial record.
    Json,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value = "json")]
    emit: OutputFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct HatArgs {
    /// Comma-separated claw counts.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [50, 200, 800])]
    ns: Vec<usize>,
    #[arg(long, default_value = "5")]
    alpha: String,
    #[arg(long, default_value = "supergreedy")]
    policy: PolicyKind,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Dump sampled and violating traces here as JSONL.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BroomArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value = "korula-pal")]
    distribution: DistributionKind,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum PartitionCommand {
    /// Report whether a partition file is valid.
    Check {
        #[arg(long)]
        file: PathBuf,
    },
    /// Fix one sampled partition and attack it with adversary weights.
    Attack {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "korula-pal")]
        distribution: DistributionKind,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Count low-degree edges of a file or a sampled partition.
    Degrees {
        #[arg(long, conflicts_with_all = ["n", "distribution"])]
        file: Option<PathBuf>,
        #[arg(long, required_unless_present = "file")]
        n: Option<usize>,
        #[arg(long)]
        distribution: Option<DistributionKind>,
        #[arg(long = "eps", value_delimiter = ',', default_values_t = [0.125, 0.25, 0.375])]
        epsilons: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Largest value of a sum of convex powers under a cap.
    Convex {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        a: f64,
    },
}

#[derive(Args)]
struct RecurrenceArgs {
    #[arg(long = "eps", default_value_t = 0.375)]
    epsilon: f64,
    #[arg(long = "N", default_value_t = 1_000_000)]
    n_max: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 10_000.0)]
    n: f64,
    /// Also estimate the (AA) claw probability with this many trials.
    #[arg(long, default_value_t = 0)]
    lemma_trials: u64,
    #[command(flatten)]
    common: Common,
}

fn emit(output: Option<&Path>, body: &str) -> Result<(), ExperimentError> {
    match output {
        Some(path) => fs::write(path, body)?,
        None => io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn emit_json(output: Option<&Path>, value: &impl serde::Serialize) -> Result<(), ExperimentError> {
    let mut body = serde_json::to_string_pretty(value).expect("reports serialize");
    body.push('\n');
    emit(output, &body)
}

fn seed_of(common: &Common) -> Result<(u64, SeedSource), ExperimentError> {
    resolve_seed(common.seed)
}

fn config(instance: &InstanceArgs, trials: u64, emit: OutputFormat, common: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let (seed, seed_source) = seed_of(common)?;
    Ok(ExperimentConfig {
        instance: instance.matroid.clone(),
        algorithm: instance.algorithm.clone(),
        weights: instance.weights.clone(),
        trials,
        seed,
        seed_source,
        emit,
        output: common.output.as_ref().map(|p| p.display().to_string()),
    })
}

fn write_csv(run: &EstimateRun, out: impl Write) -> Result<(), ExperimentError> {
    let csv_err = |e: csv::Error| ExperimentError::Io(io::Error::other(e));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["trial_seed".to_string(), "utility".into(), "opt_utility".into(), "ratio".into()];
    header.extend(run.report.per_element.iter().map(|e| match e.id {
        Some(id) => format!("e{id}"),
        None => format!("rank{}", e.rank),
    }));
    w.write_record(&header).map_err(csv_err)?;
    let d = run.weight_denominator as f64;
    for r in &run.records {
        let mut row = vec![
            r.trial_seed.to_string(),
            (r.utility as f64 / d).to_string(),
            (r.opt_utility as f64 / d).to_string(),
            r.ratio.to_string(),
        ];
        row.extend(r.indicators.iter().map(|&i| u8::from(i).to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn sampled_partition(n: usize, dist: DistributionKind, seed: u64) -> Result<EdgePartition, ExperimentError> {
    Ok(dist.sample(n, &mut TrialSeed::new(seed, 0).rng(Stream::Instance))?)
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = config(&a.instance, 1, OutputFormat::Json, &a.common)?;
            let sim = simulate_trial(&cfg, a.trial)?;
            let out = a.common.output.as_deref();
            match a.emit {
                TraceFormat::Jsonl => {
                    let mut buf = Vec::new();
                    write_trace_jsonl(&sim.trace, &mut buf)?;
                    emit(out, &String::from_utf8(buf).expect("JSON is UTF-8"))
                }
                TraceFormat::Json => {
                    let d = sim.trace.weight_denominator;
                    let events: Vec<TraceLine> = sim.trace.events.iter().map(|e| TraceLine::from_event(e, d)).collect();
                    emit_json(
                        out,
                        &json!({
                            "config": cfg,
                            "trial": a.trial,
                            "algorithm": sim.trace.algorithm,
                            "record": sim.record,
                            "accepted": sim.trace.accepted.iter().map(|e| e.0).collect::<Vec<_>>(),
                            "broom": sim.broom,
                            "events": events,
                        }),
                    )
                }
            }
        }
        Command::Estimate(a) => {
            let cfg = config(&a.instance, a.trials, a.emit, &a.common)?;
            let run = run_estimate(&cfg)?;
            match (a.emit, a.common.output.as_deref()) {
                (OutputFormat::Json, out) => emit_json(out, &run.report),
                (OutputFormat::Csv, Some(path)) => write_csv(&run, BufWriter::new(File::create(path)?)),
                (OutputFormat::Csv, None) => write_csv(&run, io::stdout().lock()),
            }
        }
        Command::Hat(a) => {
            let alpha = parse_rational(&a.alpha)?;
            let (seed, _) = seed_of(&a.common)?;
            let report = hat_failure_experiment(&a.ns, alpha, a.policy, a.trials, seed, a.trace_dir.as_deref())?;
            emit_json(a.common.output.as_deref(), &report)
        }
        Command::Broom(a) => {
            let (seed, _) = seed_of(&a.common)?;
            let report = broom_attack_experiment(a.n, a.distribution, a.trials, seed)?;
            emit_json(a.common.output.as_deref(), &report)
        }
        Command::Partition(PartitionCommand::Check { file }) => {
            let p = parse_partition(&fs::read_to_string(&file)?)?;
            let line = match find_shattered_triangle(&p) {
                None => format!("valid: K_{} in {} parts\n", p.n(), p.num_parts()),
                Some([a, b, c]) => format!(
                    "invalid: triangle {a}-{b}-{c} uses parts {}, {}, {}\n",
                    p.part_of(msplab::partition::edge_index(p.n(), a, b)),
                    p.part_of(msplab::partition::edge_index(p.n(), a, c)),
                    p.part_of(msplab::partition::edge_index(p.n(), b, c)),
                ),
            };
            emit(None, &line)
        }
        Command::Partition(PartitionCommand::Attack { n, distribution, trials, common }) => {
            let (seed, _) = seed_of(&common)?;
            let report = deterministic_attack_experiment(n, distribution, trials, seed)?;
            emit_json(common.output.as_deref(), &report)
        }
        Command::Partition(PartitionCommand::Degrees { file, n, distribution, epsilons, common }) => {
            let (seed, _) = seed_of(&common)?;
            let p = match (file, n) {
                (Some(path), _) => parse_partition(&fs::read_to_string(path)?)?,
                (None, Some(n)) => sampled_partition(n, distribution.unwrap_or(DistributionKind::KorulaPal), seed)?,
                (None, None) => unreachable!("clap requires --file or --n"),
            };
            let table = DegreeTable::new(&p);
            let nf = p.n() as f64;
            let rows: Vec<_> = epsilons
                .iter()
                .map(|&eps| {
                    let c = nf.powf(eps / 3.0);
                    let count = table.count_below(c);
                    let bound = nf.powf(1.5 + eps);
                    json!({ "epsilon": eps, "c": c, "count": count, "bound": bound, "within": (count as f64) <= bound })
                })
                .collect();
            emit_json(
                common.output.as_deref(),
                &json!({
                    "n": p.n(),
                    "parts": p.num_parts(),
                    "valid": find_shattered_triangle(&p).is_none(),
                    "rows": rows,
                }),
            )
        }
        Command::Partition(PartitionCommand::Convex { n, gamma, a }) => {
            emit_json(None, &json!({ "n": n, "gamma": gamma, "a": a, "value": convex_extremum(n, gamma, a)? }))
        }
        Command::Recurrence(a) => emit_json(a.output.as_deref(), &recurrence_check(a.n_max, a.epsilon)?),
        Command::Bounds(a) => {
            if !(a.n > 1.0) {
                return Err(ExperimentError::Parameter(format!("n must exceed 1, got {}", a.n)));
            }
            let scan = scan_failure_bounds(a.n);
            let lemma = (a.lemma_trials > 0).then(|| {
                let (seed, _) = seed_of(&a.common)?;
                let p = default_bound_params(a.n);
                Ok::<_, ExperimentError>(empirical_lemma_checks(p.x, p.ell, a.lemma_trials, seed))
            });
            let lemma = lemma.transpose()?;
            emit_json(
                a.common.output.as_deref(),
                &json!({
                    "scan": scan,
                    "f_non_increasing": scan.f_non_increasing(),
                    "g_non_decreasing": scan.g_non_decreasing(),
                    "lemma_aa": lemma,
                }),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
