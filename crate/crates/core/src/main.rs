use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use promatch::harness::{
    hw_distribution, latency_report, step_usage, write_csv_rows, Experiment, ExperimentConfig, MainKind,
    PredecoderKind, Weighting, SCHEMA_VERSION,
};
use promatch::noise::CorpusRecord;
use promatch::oracle::{add_chains_to, ChainHistogram};
use promatch::predecoder::HwTarget;
use promatch::{DetectorGraph, PathTable, Syndrome};

#[derive(Parser)]
#[command(name = "promatch", version, about = "Surface-code predecoding and decoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the decoding graph as JSON.
    BuildGraph(GraphArgs),
    /// Decode a JSON-lines corpus of syndromes.
    Decode(DecodeArgs),
    /// Estimate the logical error rate.
    EstimateLer {
        #[arg(value_enum)]
        method: LerMethod,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Hamming-weight histogram before and after predecoding.
    HwDist(CorpusArgs),
    /// Modeled predecode and total latency.
    Latency(CorpusArgs),
    /// Deepest predecoder step used per sample.
    Steps(CorpusArgs),
    /// Hop lengths of oracle-matched chains over sampled syndromes.
    Chains(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LerMethod {
    Direct,
    Rare,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, default_value_t = 5)]
    distance: usize,
    /// Defaults to the distance.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 5)]
    distance: usize,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long, default_value = "promatch")]
    predecoder: PredecoderKind,
    #[arg(long, default_value = "astrea")]
    main: MainKind,
    /// 10, 8, 6 or "adaptive".
    #[arg(long, default_value = "10")]
    hw_target: HwTarget,
    #[arg(long, default_value_t = 1000.0)]
    budget_ns: f64,
    #[arg(long, default_value_t = 250.0)]
    clock_mhz: f64,
    #[arg(long, default_value_t = 24)]
    k_max: usize,
    #[arg(long, default_value_t = 100_000)]
    shots_per_k: u64,
    #[arg(long, default_value_t = 100_000)]
    shots_direct: u64,
    #[arg(long, default_value_t = 1)]
    master_seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

impl ExperimentArgs {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            distance: self.distance,
            rounds: self.rounds,
            p: self.p,
            predecoder: self.predecoder,
            main: self.main,
            hw_target: self.hw_target,
            budget_ns: self.budget_ns,
            clock_mhz: self.clock_mhz,
            k_max: self.k_max,
            shots_per_k: self.shots_per_k,
            shots_direct: self.shots_direct,
            master_seed: self.master_seed,
        }
    }
}

#[derive(Args)]
struct CorpusArgs {
    /// Per-sample weight of the high-HW corpus.
    #[arg(long, default_value = "uniform")]
    weighting: Weighting,
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args)]
struct DecodeArgs {
    /// JSON-lines corpus: {"errors":[..],"flipped":[..],"obs":0|1}.
    #[arg(long)]
    input: PathBuf,
    /// Graph JSON to decode on instead of building one.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a ExperimentConfig,
    result: T,
}

fn emit_json<T: Serialize>(out: &OutputArgs, command: &str, config: &ExperimentConfig, result: T) -> Result<()> {
    let mut w = out.writer()?;
    serde_json::to_writer_pretty(&mut w, &Envelope { schema_version: SCHEMA_VERSION, command, config, result })?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_csv<T: Serialize>(out: &OutputArgs, rows: &[T]) -> Result<()> {
    let mut w = out.writer()?;
    write_csv_rows(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

fn build_graph(args: &GraphArgs) -> Result<()> {
    let g = DetectorGraph::build(args.distance, args.rounds.unwrap_or(args.distance), args.p)?;
    let text = g.to_json();
    match &args.output {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct DecodeRow {
    index: usize,
    hw: usize,
    residual_hw: usize,
    weight: Option<f64>,
    failure: bool,
    cycles_total: u64,
    aborted: bool,
}

fn decode(args: &DecodeArgs) -> Result<()> {
    let config = args.exp.config();
    let mut exp = Experiment::new(config.clone())?;
    if let Some(path) = &args.graph {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        exp.graph = DetectorGraph::from_json(&text)?;
        exp.table = PathTable::build(&exp.graph);
    }
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: CorpusRecord =
            serde_json::from_str(&line).with_context(|| format!("line {}: bad corpus record", n + 1))?;
        rec.syndrome = Syndrome::new(rec.syndrome.flipped, rec.syndrome.true_observable);
        records.push(rec);
    }

    let results: Vec<serde_json::Value> = records
        .par_iter()
        .map(|rec| -> Result<serde_json::Value> {
            let pre = exp.chain.predecode(&exp.graph, &exp.table, &rec.syndrome)?;
            let out = exp.chain.main.decode(&exp.graph, &exp.table, &rec.syndrome, pre.as_ref());
            let outcome = match out {
                Ok(o) => serde_json::to_value(o.record())?,
                Err(e) => serde_json::json!({ "error": e.to_string(), "failure": true }),
            };
            Ok(serde_json::json!({
                "hw": rec.syndrome.hamming_weight(),
                "predecode": pre.map(|r| r.record()),
                "outcome": outcome,
            }))
        })
        .collect::<Result<_>>()?;

    if args.exp.out.format == Format::Csv {
        let rows: Vec<DecodeRow> = results
            .iter()
            .enumerate()
            .map(|(index, v)| {
                let o = &v["outcome"];
                let hw = v["hw"].as_u64().unwrap_or(0) as usize;
                DecodeRow {
                    index,
                    hw,
                    residual_hw: v["predecode"]["residual"].as_array().map_or(hw, Vec::len),
                    weight: o["weight"].as_f64(),
                    failure: o["failure"].as_bool().unwrap_or(true),
                    cycles_total: o["cycles_total"].as_u64().unwrap_or(0),
                    aborted: o["aborted"].as_bool().unwrap_or(false),
                }
            })
            .collect();
        return emit_csv(&args.exp.out, &rows);
    }
    emit_json(&args.exp.out, "decode", &config, results)
}

fn estimate_ler(method: LerMethod, args: &ExperimentArgs) -> Result<()> {
    let config = args.config();
    let exp = Experiment::new(config.clone())?;
    match method {
        LerMethod::Direct => {
            let est = exp.run_direct()?;
            if args.out.format == Format::Csv {
                #[derive(Serialize)]
                struct Row {
                    ler: f64,
                    stderr: f64,
                    failures: u64,
                    shots: u64,
                }
                return emit_csv(
                    &args.out,
                    &[Row { ler: est.ler, stderr: est.stderr, failures: est.failures, shots: est.shots }],
                );
            }
            emit_json(&args.out, "estimate-ler direct", &config, est)
        }
        LerMethod::Rare => {
            let est = exp.run_rare_event()?;
            if args.out.format == Format::Csv {
                return emit_csv(&args.out, &est.per_k);
            }
            emit_json(&args.out, "estimate-ler rare", &config, est)
        }
    }
}

#[derive(Clone, Copy)]
enum Report {
    HwDist,
    Latency,
    Steps,
}

fn corpus_report(which: Report, args: &CorpusArgs) -> Result<()> {
    let config = args.exp.config();
    let exp = Experiment::new(config.clone())?;
    let samples = exp.high_hw_corpus(args.weighting)?;
    let trials = exp.decode_corpus(&samples)?;
    let out = &args.exp.out;
    match which {
        Report::HwDist => {
            let r = hw_distribution(&samples, &trials);
            if out.format == Format::Csv {
                return emit_csv(out, &r.rows);
            }
            emit_json(out, "hw-dist", &config, r)
        }
        Report::Latency => {
            let r = latency_report(&trials, &exp.chain.promatch.timing);
            if out.format == Format::Csv {
                return emit_csv(out, &[r]);
            }
            emit_json(out, "latency", &config, r)
        }
        Report::Steps => {
            let r = step_usage(&samples, &trials);
            if out.format == Format::Csv {
                return emit_csv(out, &r.rows);
            }
            emit_json(out, "steps", &config, r)
        }
    }
}

/// Oracle chain lengths over `shots_direct` i.i.d. shots, keeping nonempty
/// syndromes of Hamming weight at most 14.
fn chains(args: &ExperimentArgs) -> Result<()> {
    let config = args.config();
    let exp = Experiment::new(config.clone())?;
    let per_shot: Vec<ChainHistogram> = (0..config.shots_direct)
        .into_par_iter()
        .map(|i| -> Result<ChainHistogram> {
            let mut h = ChainHistogram::default();
            let s = exp.sampled(i)?;
            if !s.is_empty() && s.hamming_weight() <= promatch::MatchConfig::ORACLE.hw_cap {
                add_chains_to(&mut h, &exp.graph, &exp.table, &s)?;
            }
            Ok(h)
        })
        .collect::<Result<_>>()?;
    let hist = per_shot.into_iter().fold(ChainHistogram::default(), ChainHistogram::merge);
    if args.out.format == Format::Csv {
        let mut w = args.out.writer()?;
        hist.write_csv(&mut w)?;
        w.flush()?;
        return Ok(());
    }
    emit_json(&args.out, "chains", &config, hist.bins())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::BuildGraph(a) => build_graph(a),
        Command::Decode(a) => decode(a),
        Command::EstimateLer { method, exp } => estimate_ler(*method, exp),
        Command::HwDist(a) => corpus_report(Report::HwDist, a),
        Command::Latency(a) => corpus_report(Report::Latency, a),
        Command::Steps(a) => corpus_report(Report::Steps, a),
        Command::Chains(a) => chains(a),
    }
}
