//! `gtuple`: enumerate tuple spaces, decode score matrices, simulate test sets
//! and run the online recognizer over recorded streams.

mod config;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gesture_tuples::formats::{
    read_manifest_file, read_matrix_file, read_stream_file, write_manifest, write_stream_file,
    ManifestEntry,
};
use gesture_tuples::pipeline::run_stream;
use gesture_tuples::{
    aggregate, decode, enumerate_tuples, tuple_count, AlphabetConfig, EvalRecord, RecognitionEvent,
    SpeedPreset, TestSetPlan,
};
use rayon::prelude::*;

use crate::config::RunConfig;

/// Static gestures usable as phonemes, indexed by phoneme id.
const GESTURE_NAMES: [&str; 10] = [
    "Fist",
    "Flat Hand",
    "Thumb Up",
    "Thumb Left",
    "Thumb Right",
    "Two Fingers",
    "Five Fingers",
    "Stop Sign",
    "Check",
    "Zero",
];

#[derive(Parser)]
#[command(
    name = "gtuple",
    version,
    about = "Gesture-tuple decoding, simulation and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Count the tuples of length s over m phonemes, or list them
    Tuples {
        #[arg(long)]
        list: bool,
    },
    /// Decode a matrix file holding one softmaxed column per row
    Decode { matrix: PathBuf },
    /// Write a simulated test set: stream CSVs plus manifest.jsonl
    Simulate {
        /// Recordings per tuple
        #[arg(long)]
        per_class: Option<usize>,
        /// Comma-separated speed presets, cycled over the samples
        #[arg(long, value_delimiter = ',')]
        speeds: Option<Vec<SpeedPreset>>,
    },
    /// Run the recognizer over one stream CSV or every stream of a manifest (.jsonl)
    Run {
        input: Option<PathBuf>,
        /// Print a text chart of post-processed class probabilities (single stream only)
        #[arg(long)]
        plot: bool,
    },
}

/// Flags shared by every command; each one overrides the config file.
#[derive(Args)]
struct Overrides {
    /// TOML file with defaults for every flag below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    s: Option<usize>,
    /// Transitions to decode (default s - 1)
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<usize>,
    #[arg(long, global = true)]
    post_window: Option<usize>,
    #[arg(long, global = true)]
    detector_queue: Option<usize>,
    #[arg(long, global = true)]
    sog_threshold: Option<f64>,
    #[arg(long, global = true)]
    eog_threshold: Option<f64>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Cross-fade width in frames at segment boundaries
    #[arg(long, global = true)]
    blend: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for simulate, report file for run
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::load(self.config.as_deref())?;
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$target = v; })*
            };
        }
        set!(m => m, s => s, delta => delta, gamma => gamma, post_window => post_window,
            detector_queue => detector_queue, sog_threshold => sog_threshold,
            eog_threshold => eog_threshold, sigma => sigma, blend => blend, seed => seed);
        if self.k.is_some() {
            c.k = self.k;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        Ok(c)
    }
}

fn cmd_tuples(config: &RunConfig, list: bool) -> Result<()> {
    if !list {
        println!("{}", tuple_count(config.m, config.s)?);
        return Ok(());
    }
    let named = config.m <= GESTURE_NAMES.len();
    for (index, tuple) in enumerate_tuples(config.m, config.s)?.iter().enumerate() {
        if named {
            let names: Vec<_> = tuple.phonemes().iter().map(|&p| GESTURE_NAMES[p]).collect();
            println!("{index}\t{tuple}\t{}", names.join(" > "));
        } else {
            println!("{index}\t{tuple}");
        }
    }
    Ok(())
}

fn cmd_decode(config: &RunConfig, path: &Path) -> Result<()> {
    let matrix = read_matrix_file(path)?;
    let path = decode(&matrix, &config.decoder()?)?;
    let pi: Vec<String> = path.sequence.iter().map(usize::to_string).collect();
    println!(
        "pi=[{}] score={:.3} k={}",
        pi.join(","),
        path.score,
        path.transitions
    );
    Ok(())
}

fn cmd_simulate(config: &RunConfig) -> Result<()> {
    let Some(dir) = &config.out else {
        bail!("simulate needs an output directory (--out)");
    };
    let plan = TestSetPlan::new(
        config.m,
        config.s,
        config.per_class,
        &config.speeds,
        config.noise()?,
    )?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let entries = plan
        .samples
        .par_iter()
        .map(|p| {
            let sample = plan.render(p)?;
            let name = PathBuf::from(format!("stream_{:05}.csv", sample.index));
            write_stream_file(&dir.join(&name), &plan.alphabet, &sample.frames)?;
            Ok(ManifestEntry {
                path: name,
                truth: sample.ground_truth,
                speed: sample.speed,
                seed: sample.seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = dir.join("manifest.jsonl");
    let mut bytes = Vec::new();
    write_manifest(&mut bytes, &entries)?;
    fs::write(&manifest, bytes).with_context(|| format!("cannot write {}", manifest.display()))?;
    println!(
        "wrote {} streams and {} (seed {})",
        entries.len(),
        manifest.display(),
        config.seed
    );
    Ok(())
}

fn print_event(e: &RecognitionEvent) {
    match (&e.tuple, e.score) {
        (Some(t), Some(score)) => println!(
            "{} frame={} tuple={t} score={score:.3}",
            e.kind.as_str(),
            e.frame
        ),
        _ => println!("{} frame={}", e.kind.as_str(), e.frame),
    }
}

fn run_single(config: &RunConfig, path: &Path, plot: bool) -> Result<()> {
    let alphabet = AlphabetConfig::new(config.m)?;
    let pipeline = config.pipeline()?;
    let frames = read_stream_file(path, &alphabet)?;
    if plot {
        print!(
            "{}",
            plot::probability_chart(&alphabet, &frames, pipeline.post_window)?
        );
    }
    for event in run_stream(alphabet, pipeline, frames)? {
        print_event(&event);
    }
    Ok(())
}

fn run_manifest(config: &RunConfig, path: &Path) -> Result<()> {
    let alphabet = AlphabetConfig::new(config.m)?;
    let pipeline = config.pipeline()?;
    let entries = read_manifest_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));

    let run_one = |entry: &ManifestEntry| -> Result<Vec<RecognitionEvent>> {
        entry.truth.check_alphabet(alphabet.num_phonemes())?;
        let frames = read_stream_file(&base.join(&entry.path), &alphabet)?;
        Ok(run_stream(alphabet, pipeline, frames)?)
    };
    // indexed collect keeps manifest order whatever the scheduling
    let records: Vec<EvalRecord> = entries
        .par_iter()
        .map(|entry| {
            let events = run_one(entry).unwrap_or_else(|err| {
                eprintln!("warning: {}: {err:#}", entry.path.display());
                Vec::new()
            });
            EvalRecord::new(entry.truth.clone(), events)
        })
        .collect();

    let report = aggregate(&records)?;
    println!("{report}");
    if let Some(out) = &config.out {
        fs::write(out, report.to_json() + "\n")
            .with_context(|| format!("cannot write {}", out.display()))?;
    }
    Ok(())
}

fn is_manifest(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

fn cmd_run(config: &RunConfig, input: Option<&Path>, plot: bool) -> Result<()> {
    let Some(input) = input.or(config.input.as_deref()) else {
        bail!("run needs a stream or manifest path");
    };
    if is_manifest(input) {
        if plot {
            bail!("--plot applies to a single stream, not a manifest");
        }
        run_manifest(config, input)
    } else {
        run_single(config, input, plot)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .overrides
        .resolve()
        .and_then(|mut config| match cli.command {
            Command::Tuples { list } => cmd_tuples(&config, list),
            Command::Decode { matrix } => cmd_decode(&config, &matrix),
            Command::Simulate { per_class, speeds } => {
                config.per_class = per_class.unwrap_or(config.per_class);
                config.speeds = speeds.unwrap_or(config.speeds);
                cmd_simulate(&config)
            }
            Command::Run { input, plot } => cmd_run(&config, input.as_deref(), plot),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
