//! The `gazekit` command line.
//!
//! Exit status: 0 success, 1 usage error, 2 invalid data, 3 runtime
//! failure. A nonzero status always comes with a diagnostic on stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gazekit_core::evaluation::{PaddingPolicy, StdKind};
use gazekit_core::features::{Averaging, Feature};
use serde::Serialize;

use crate::error::{Error, ExitCode, Result};
use crate::formats::{emit, read_json};
use crate::pipeline::{
    ablate_stage, analysis_input, analyze, cross_eval_stage, evaluate_saved, evaluate_stage, extract_stage,
    report_stage, run_pipeline, stats_stage, validate_stage, write_analysis, AnalysisKind, AnalysisOutput, Experiment,
    SplitChoice, TrainJob,
};
use crate::run::{create_dir, InputFile, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "gazekit",
    version,
    about = "Predict and analyse eye-tracking reading measures"
)]
pub struct Cli {
    /// Train and score with this single seed instead of the configured list.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Experiment file. Without a command the whole experiment runs;
    /// with one it supplies defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory, or output file for `analyze`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Print results as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a corpus file against every corpus invariant.
    Validate {
        path: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
    /// Corpus statistics.
    Stats {
        path: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
    /// Write raw features, the scaler and the standardized splits.
    Extract {
        path: PathBuf,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Fine-tune an encoder and save the run directory.
    Train {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Score a model against the mean baseline and the untuned encoder.
    Evaluate {
        #[arg(long, conflicts_with = "runs")]
        corpus: Option<PathBuf>,
        /// Rescore saved run directories instead of training.
        #[arg(long, num_args = 1..)]
        runs: Vec<PathBuf>,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Train on every corpus and score on every other.
    CrossEval {
        /// `label=path`, repeated.
        #[arg(long = "corpus", value_name = "LABEL=PATH")]
        corpora: Vec<String>,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Accuracy against the share of training data used.
    Ablate {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        fractions: Vec<f64>,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Word-length, readability or part-of-speech curves as CSV.
    Analyze {
        #[arg(long, value_enum)]
        kind: AnalysisKind,
        #[arg(long)]
        feature: Option<Feature>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Trained run directory whose predictions to add.
        #[arg(long)]
        run: Option<PathBuf>,
        /// TSV of sentence_id, token_index, tag.
        #[arg(long)]
        tags: Option<PathBuf>,
        #[arg(long)]
        bin_width: Option<u32>,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitChoice,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Summary tables over evaluation directories.
    Report {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

/// Settings shared by the commands that load, split or train.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub encoder: Option<String>,
    /// Evaluate the encoder as loaded, with an untrained head.
    #[arg(long)]
    pub no_finetune: bool,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub subsample_seed: Option<u64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Average durations over fixating subjects only.
    #[arg(long)]
    pub fixating_only: bool,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Count padded cells in the MAE divisor.
    #[arg(long)]
    pub include_padding: bool,
    /// Report sample rather than population standard deviations.
    #[arg(long)]
    pub sample_std: bool,
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::Usage
            } else {
                ExitCode::Success
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::Success,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let base = load_experiment(cli.config.as_deref())?;
    let Some(command) = &cli.command else {
        let Some(_) = &cli.config else {
            return Err(Error::Usage(String::from("give a command or --config (see --help)")));
        };
        let exp = apply(cli, base, &ModelArgs::default())?;
        let out = require_out(cli.out.as_deref().or(exp.out.as_deref()))?;
        let summary = run_pipeline(&exp, out)?;
        return print(cli, &summary, || {
            let mut s = format!("stages: {}\n", summary.stages.join(", "));
            if let (Some(a), Some(b)) = (summary.accuracy, summary.baseline_accuracy) {
                s += &format!("accuracy {a:.2}, mean baseline {b:.2}\n");
            }
            s
        });
    };
    match command {
        Command::Validate { path, format } => {
            let format = format.as_deref().unwrap_or(&base.format);
            let report = validate_stage(path, format, cli.out.as_deref())?;
            print(cli, &report, || {
                let mut s: String = report.violations.iter().map(|v| format!("{v}\n")).collect();
                s += &format!("{} violation(s)\n", report.len());
                s
            })?;
            if let Some(first) = report.violations.first() {
                return Err(Error::Invalid {
                    path: path.clone(),
                    count: report.len(),
                    first: first.to_string(),
                });
            }
            Ok(())
        }
        Command::Stats { path, format } => {
            let format = format.as_deref().unwrap_or(&base.format);
            let stats = stats_stage(path, format, cli.out.as_deref())?;
            print(cli, &stats, || {
                let v = serde_json::to_value(&stats).unwrap_or_default();
                v.as_object()
                    .map(|m| m.iter().map(|(k, v)| format!("{k:<17} {v}\n")).collect())
                    .unwrap_or_default()
            })
        }
        Command::Extract { path, opts } => {
            let exp = apply(cli, base, opts)?;
            let out = require_out(cli.out.as_deref())?;
            let mut manifest = manifest("extract", &exp, vec![InputFile::hash(path)?], Vec::new())?;
            manifest.outputs = extract_stage(path, &exp.format, &exp.data, out)?;
            print(cli, &manifest.outputs, || format!("wrote {}\n", out.display()))?;
            manifest.finish(out)
        }
        Command::Train { corpus, opts } => {
            let exp = apply(cli, with_corpus(base, corpus.as_deref())?, opts)?;
            let out = require_out(cli.out.as_deref())?;
            train(cli, &exp, out)
        }
        Command::Evaluate { corpus, runs, opts } => {
            let exp = apply(cli, base, opts)?;
            let out = require_out(cli.out.as_deref())?;
            let (e, files, inputs, seeds) = if runs.is_empty() {
                let exp = with_corpus(exp.clone(), corpus.as_deref())?;
                let (spec, cfg) = (exp.encoder_spec()?, exp.train_config()?);
                let (e, files) = evaluate_stage(&job(&exp, &spec, &cfg), exp.std_kind, out)?;
                (e, files, vec![InputFile::hash(&exp.corpus)?], cfg.seeds)
            } else {
                let padding = if opts.include_padding {
                    PaddingPolicy::Include
                } else {
                    PaddingPolicy::Exclude
                };
                let (e, files) = evaluate_saved(runs, padding, exp.std_kind, out)?;
                let inputs = runs
                    .iter()
                    .map(|r| InputFile::hash(&r.join(crate::run::PARAMS_FILE)))
                    .collect::<Result<_>>()?;
                (e, files, inputs, Vec::new())
            };
            let mut m = manifest("evaluate", &exp, inputs, seeds)?;
            m.outputs = files;
            let reports = [&e.model, &e.baseline, &e.pretrained];
            print(cli, &reports, || {
                reports
                    .iter()
                    .map(|r| format!("{:<28} {}\n", r.model, r.overall))
                    .collect()
            })?;
            m.finish(out)
        }
        Command::CrossEval { corpora, opts } => {
            let mut exp = apply(cli, base, opts)?;
            for c in corpora {
                let (label, path) = c
                    .split_once('=')
                    .ok_or_else(|| Error::Usage(format!("--corpus {c:?} is not label=path")))?;
                exp.corpora.insert(label.to_string(), PathBuf::from(path));
            }
            let out = require_out(cli.out.as_deref())?;
            let (spec, cfg) = (exp.encoder_spec()?, exp.train_config()?);
            let inputs = exp
                .corpora
                .values()
                .map(|p| InputFile::hash(p))
                .collect::<Result<_>>()?;
            let mut m = manifest("cross-eval", &exp, inputs, cfg.seeds.clone())?;
            let (matrix, files) = cross_eval_stage(&exp.corpora, &exp.format, &spec, &exp.data, &cfg, out)?;
            m.outputs = files;
            print(cli, &matrix, || {
                let mut s = format!("{:<12}", "train\\test");
                for l in &matrix.labels {
                    s += &format!(" {l:>10}");
                }
                s.push('\n');
                for (l, row) in matrix.labels.iter().zip(&matrix.errors) {
                    s += &format!("{l:<12}");
                    for v in row {
                        s += &format!(" {v:>10.3}");
                    }
                    s.push('\n');
                }
                s
            })?;
            m.finish(out)
        }
        Command::Ablate {
            corpus,
            fractions,
            opts,
        } => {
            let mut exp = apply(cli, with_corpus(base, corpus.as_deref())?, opts)?;
            if !fractions.is_empty() {
                exp.fractions = fractions.clone();
            }
            let out = require_out(cli.out.as_deref())?;
            let (spec, cfg) = (exp.encoder_spec()?, exp.train_config()?);
            let mut m = manifest("ablate", &exp, vec![InputFile::hash(&exp.corpus)?], cfg.seeds.clone())?;
            let (curve, files) = ablate_stage(&job(&exp, &spec, &cfg), &exp.fractions, exp.std_kind, out)?;
            m.outputs = files;
            print(cli, &curve, || {
                curve
                    .points
                    .iter()
                    .map(|p| format!("{:>5}  {:>6}  {}\n", p.fraction, p.n_sentences, p.accuracy))
                    .collect()
            })?;
            m.finish(out)
        }
        Command::Analyze {
            kind,
            feature,
            corpus,
            run,
            tags,
            bin_width,
            split,
            opts,
        } => {
            let exp = apply(cli, base, opts)?;
            let out = require_out(cli.out.as_deref())?;
            let corpus = corpus
                .clone()
                .or_else(|| (!exp.corpus.as_os_str().is_empty()).then(|| exp.corpus.clone()));
            let input = analysis_input(corpus.as_deref(), &exp.format, &exp.data, run.as_deref(), *split)?;
            let tags = tags.as_deref().or(exp.tags.as_deref());
            let result = analyze(
                &input,
                *kind,
                feature.unwrap_or(exp.feature),
                bin_width.unwrap_or(exp.bin_width),
                tags,
            )?;
            if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                create_dir(dir)?;
            }
            write_analysis(out, &result)?;
            let rows = match &result {
                AnalysisOutput::Curves(c) => c.iter().map(|c| c.points.len()).sum(),
                AnalysisOutput::Tags(t) => t.len(),
            };
            print(cli, &serde_json::json!({ "out": out, "rows": rows }), || {
                format!("wrote {rows} rows to {}\n", out.display())
            })
        }
        Command::Report { dirs } => {
            let (table, files) = report_stage(dirs, cli.out.as_deref())?;
            if let Some(out) = cli.out.as_deref() {
                let inputs = dirs
                    .iter()
                    .flat_map(|d| crate::report::REPORT_FILES.iter().map(move |f| d.join(f)))
                    .filter(|p| p.exists())
                    .map(|p| InputFile::hash(&p))
                    .collect::<Result<_>>()?;
                let mut m = RunManifest::new("report", serde_json::json!({ "dirs": dirs }), inputs, Vec::new());
                m.outputs = files;
                m.finish(out)?;
            }
            let cells = serde_json::json!({
                "models": table.models,
                "datasets": table.datasets,
                "cells": table.cells,
            });
            print(cli, &cells, || table.to_text())
        }
    }
}

fn load_experiment(path: Option<&Path>) -> Result<Experiment> {
    let Some(path) = path else {
        return Ok(Experiment::default());
    };
    let mut exp: Experiment = read_json(path)?;
    exp.resolve_paths(path.parent().unwrap_or(Path::new("")));
    Ok(exp)
}

/// Folds command-line overrides into the experiment.
fn apply(cli: &Cli, mut exp: Experiment, o: &ModelArgs) -> Result<Experiment> {
    if let Some(f) = &o.format {
        exp.format = f.clone();
    }
    if let Some(e) = &o.encoder {
        exp.encoder = e.clone();
    }
    if let Some(f) = o.train_fraction {
        exp.train_fraction = f;
    }
    if let Some(s) = o.subsample_seed {
        exp.subsample_seed = s;
    }
    if let Some(s) = o.split_seed {
        exp.data.split_seed = s;
    }
    if o.fixating_only {
        exp.data.averaging = Averaging::FixatingOnly;
    }
    if o.sample_std {
        exp.std_kind = StdKind::Sample;
    }
    let mut cfg = exp.train_config()?;
    if let Some(n) = o.max_epochs {
        cfg.max_epochs = n;
    }
    if let Some(n) = o.patience {
        cfg.patience = n;
    }
    if let Some(lr) = o.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(b) = o.batch_size {
        cfg.batch_size = b;
    }
    if o.no_finetune {
        cfg.trainable = false;
    }
    if o.include_padding {
        cfg.padding = PaddingPolicy::Include;
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    cfg.check()?;
    exp.train = Some(cfg);
    if !(exp.train_fraction > 0.0 && exp.train_fraction <= 1.0) {
        return Err(Error::Usage(format!(
            "train fraction {} is outside (0, 1]",
            exp.train_fraction
        )));
    }
    Ok(exp)
}

fn with_corpus(mut exp: Experiment, corpus: Option<&Path>) -> Result<Experiment> {
    if let Some(c) = corpus {
        exp.corpus = c.to_path_buf();
    }
    if exp.corpus.as_os_str().is_empty() {
        return Err(Error::Usage(String::from("no corpus given (--corpus or --config)")));
    }
    Ok(exp)
}

fn require_out(out: Option<&Path>) -> Result<&Path> {
    out.ok_or_else(|| Error::Usage(String::from("this command needs --out")))
}

fn job<'a>(
    exp: &'a Experiment,
    spec: &'a gazekit_core::regression::EncoderSpec,
    cfg: &'a gazekit_core::regression::TrainConfig,
) -> TrainJob<'a> {
    TrainJob {
        corpus_path: &exp.corpus,
        format: &exp.format,
        spec,
        data: &exp.data,
        cfg,
        train_fraction: exp.train_fraction,
        subsample_seed: exp.subsample_seed,
    }
}

fn manifest(command: &str, exp: &Experiment, inputs: Vec<InputFile>, seeds: Vec<u64>) -> Result<RunManifest> {
    let config = serde_json::to_value(exp).map_err(Error::json(Path::new("<config>")))?;
    Ok(RunManifest::new(command, config, inputs, seeds))
}

/// One seed trains straight into `out`; several go to `out/seed-<n>`.
fn train(cli: &Cli, exp: &Experiment, out: &Path) -> Result<()> {
    let (spec, cfg) = (exp.encoder_spec()?, exp.train_config()?);
    let job = job(exp, &spec, &cfg);
    let (_, data, runs) = job.run(None)?;
    let input = InputFile::hash(&exp.corpus)?;
    let mut scores = BTreeMap::new();
    for r in &runs {
        let dir = if runs.len() == 1 {
            out.to_path_buf()
        } else {
            out.join(format!("seed-{}", r.seed))
        };
        job.save(&dir, &input, &data, r)?;
        scores.insert(r.seed, r.test.accuracy());
    }
    print(cli, &scores, || {
        scores
            .iter()
            .map(|(s, a)| format!("seed {s}: test accuracy {a:.2}\n"))
            .collect()
    })
}

fn print<T: Serialize + ?Sized>(cli: &Cli, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    let body = if cli.json {
        let mut s = serde_json::to_string_pretty(value).map_err(Error::json(Path::new("<stdout>")))?;
        s.push('\n');
        s
    } else {
        text()
    };
    emit(None, &body)
}
