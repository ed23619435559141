//! Pipeline stages and the experiment file that strings them together.
//!
//! Each stage reads its inputs, writes its outputs into a directory and
//! returns what it computed. The command-line tool calls single stages;
//! [`run_pipeline`] runs the stages an experiment lists, in order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gazekit_core::analysis::{pos_aggregation, readability_accuracy_curve, word_length_curve, BinnedCurve, TagGroup};
use gazekit_core::corpus::{corpus_stats, split_dataset, validate_corpus, Corpus, CorpusStats, ValidationReport};
use gazekit_core::evaluation::experiment::{ablation_run, fine_tune, prepare_data, DataOptions, PreparedData, SeedRun};
use gazekit_core::evaluation::{
    cross_matrix, mean_baseline, nested_subsamples, predict_dataset, run_metrics, AblationCurve, CrossMatrix,
    EvaluationReport, PaddingPolicy, SentencePrediction, StdKind,
};
use gazekit_core::features::{extract_features, Feature, FeatureDataset, Standardizer};
use gazekit_core::regression::{build_regressor, EncoderSpec, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{
    read_pos_tags, write_ablation_csv, write_cross_csv, write_curves_csv, write_features_tsv, write_json,
    write_per_feature_csv, write_pos_csv, write_standardizer,
};
use crate::report::{collect_reports, SummaryTable};
use crate::run::{create_dir, load_run, save_run, InputFile, RunConfig, RunManifest};
use crate::unified::{load_corpus, read_corpus, UNIFIED_JSONL};

pub const DEFAULT_FRACTIONS: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Validate,
    Stats,
    Extract,
    Train,
    Evaluate,
    CrossEval,
    Ablate,
    Analyze,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Stats => "stats",
            Stage::Extract => "extract",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::CrossEval => "cross-eval",
            Stage::Ablate => "ablate",
            Stage::Analyze => "analyze",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisKind {
    Wordlen,
    Readability,
    Pos,
}

/// An experiment file. Every field has a default, so `{}` plus a corpus
/// path is a complete experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Experiment {
    pub corpus: PathBuf,
    pub format: String,
    pub encoder: String,
    pub stages: Vec<Stage>,
    pub data: DataOptions,
    /// Overrides on top of the encoder's default training settings.
    pub train: Option<TrainConfig>,
    pub std_kind: StdKind,
    pub train_fraction: f64,
    pub fractions: Vec<f64>,
    pub subsample_seed: u64,
    pub analyses: Vec<AnalysisKind>,
    pub feature: Feature,
    pub bin_width: u32,
    pub tags: Option<PathBuf>,
    /// Labelled corpora for the transfer matrix.
    pub corpora: BTreeMap<String, PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            corpus: PathBuf::new(),
            format: UNIFIED_JSONL.to_string(),
            encoder: String::from("desk"),
            stages: vec![Stage::Validate, Stage::Stats, Stage::Extract, Stage::Evaluate],
            data: DataOptions::default(),
            train: None,
            std_kind: StdKind::Population,
            train_fraction: 1.0,
            fractions: DEFAULT_FRACTIONS.to_vec(),
            subsample_seed: 0,
            analyses: vec![AnalysisKind::Wordlen, AnalysisKind::Readability],
            feature: Feature::FProp,
            bin_width: 10,
            tags: None,
            corpora: BTreeMap::new(),
            out: None,
        }
    }
}

impl Experiment {
    pub fn encoder_spec(&self) -> Result<EncoderSpec> {
        Ok(EncoderSpec::resolve(&self.encoder)?)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let spec = self.encoder_spec()?;
        let cfg = self.train.clone().unwrap_or_else(|| TrainConfig::for_encoder(&spec));
        cfg.check()?;
        Ok(cfg)
    }

    /// Relative paths resolve against `base`, the experiment file's folder.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        if let Some(t) = &mut self.tags {
            fix(t);
        }
        for p in self.corpora.values_mut() {
            fix(p);
        }
        if let Some(o) = &mut self.out {
            fix(o);
        }
    }
}

fn corpus_label(c: &Corpus) -> String {
    c.name.clone()
}

pub fn validate_stage(corpus: &Path, format: &str, out: Option<&Path>) -> Result<ValidationReport> {
    let c = read_corpus(corpus, format)?;
    let report = validate_corpus(&c);
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("validation.json"), &report)?;
    }
    Ok(report)
}

pub fn stats_stage(corpus: &Path, format: &str, out: Option<&Path>) -> Result<CorpusStats> {
    let c = load_corpus(corpus, format)?;
    let stats = corpus_stats(&c)?;
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("stats.json"), &stats)?;
    }
    Ok(stats)
}

/// Raw features of the whole corpus, the scaler fitted on the training
/// split and the three standardized splits.
pub fn extract_stage(corpus: &Path, format: &str, data: &DataOptions, out: &Path) -> Result<Vec<String>> {
    let c = load_corpus(corpus, format)?;
    create_dir(out)?;
    let all = extract_features(&c, data.averaging)?;
    write_features_tsv(&out.join("features.tsv"), &all)?;
    let prepared = prepare_data(&c, data)?;
    write_standardizer(&out.join("standardizer.json"), &prepared.standardizer)?;
    for (name, d) in [
        ("train", &prepared.train),
        ("val", &prepared.val),
        ("test", &prepared.test),
    ] {
        write_features_tsv(&out.join(format!("{name}.tsv")), d)?;
    }
    Ok(
        ["features.tsv", "standardizer.json", "train.tsv", "val.tsv", "test.tsv"]
            .map(String::from)
            .to_vec(),
    )
}

/// Everything needed to fine-tune on one corpus.
pub struct TrainJob<'a> {
    pub corpus_path: &'a Path,
    pub format: &'a str,
    pub spec: &'a EncoderSpec,
    pub data: &'a DataOptions,
    pub cfg: &'a TrainConfig,
    pub train_fraction: f64,
    pub subsample_seed: u64,
}

impl TrainJob<'_> {
    fn prepare(&self) -> Result<(Corpus, PreparedData)> {
        let c = load_corpus(self.corpus_path, self.format)?;
        let data = prepare_data(&c, self.data)?;
        Ok((c, data))
    }

    fn training_set(&self, data: &PreparedData) -> Result<FeatureDataset> {
        if self.train_fraction == 1.0 {
            return Ok(data.train.clone());
        }
        let sample = nested_subsamples(data.train.sentences.len(), &[self.train_fraction], self.subsample_seed)?;
        Ok(data.train.select(&sample[0]))
    }

    /// Trains one run per configured seed; each lands in `out/seed-<n>`
    /// when `out` is given.
    pub fn run(&self, out: Option<&Path>) -> Result<(Corpus, PreparedData, Vec<SeedRun>)> {
        let (c, data) = self.prepare()?;
        let train_set = self.training_set(&data)?;
        let input = InputFile::hash(self.corpus_path)?;
        let mut runs = Vec::with_capacity(self.cfg.seeds.len());
        for &seed in &self.cfg.seeds {
            log::info!("training {} on {} with seed {seed}", self.spec.id(), c.name);
            let run = fine_tune(self.spec, &data, &train_set, self.cfg, seed)?;
            if let Some(dir) = out {
                self.save(&dir.join(format!("seed-{seed}")), &input, &data, &run)?;
            }
            runs.push(run);
        }
        Ok((c, data, runs))
    }

    pub fn save(&self, dir: &Path, input: &InputFile, data: &PreparedData, run: &SeedRun) -> Result<()> {
        let cfg = RunConfig {
            corpus: input.clone(),
            format: self.format.to_string(),
            encoder: self.spec.clone(),
            data: *self.data,
            train: TrainConfig {
                seeds: vec![run.seed],
                ..self.cfg.clone()
            },
            seed: run.seed,
            train_fraction: self.train_fraction,
        };
        let mut manifest = RunManifest::new(
            "train",
            serde_json::to_value(&cfg).map_err(Error::json(dir))?,
            vec![input.clone()],
            vec![run.seed],
        );
        manifest.outputs = save_run(dir, &cfg, &data.standardizer, run)?;
        manifest.finish(dir)
    }
}

/// Accuracy summaries of a fine-tuned encoder, the mean baseline and the
/// encoder without fine-tuning on the test split.
pub struct Evaluation {
    pub model: EvaluationReport,
    pub baseline: EvaluationReport,
    pub pretrained: EvaluationReport,
    pub truncated_words: usize,
}

pub fn evaluate_runs(
    job: &TrainJob<'_>,
    c: &Corpus,
    data: &PreparedData,
    runs: &[SeedRun],
    kind: StdKind,
) -> Result<Evaluation> {
    let dataset = corpus_label(c);
    let metrics: Vec<_> = runs.iter().map(|r| r.test.clone()).collect();
    let model = EvaluationReport::from_runs(&job.spec.id(), &dataset, &metrics, kind)?;

    let base = mean_baseline(&data.train)?;
    let base_metrics = run_metrics(&base, &data.test, job.cfg.eval_options())?;
    let baseline = EvaluationReport::from_runs("mean-baseline", &dataset, &[base_metrics], kind)?;

    let frozen = TrainConfig {
        trainable: false,
        ..job.cfg.clone()
    };
    let untuned = job
        .cfg
        .seeds
        .iter()
        .map(|&seed| Ok(fine_tune(job.spec, data, &data.train, &frozen, seed)?.test))
        .collect::<Result<Vec<_>>>()?;
    let pretrained =
        EvaluationReport::from_runs(&format!("{} (no fine-tuning)", job.spec.id()), &dataset, &untuned, kind)?;

    let truncated_words = match runs.first() {
        Some(r) => predict_dataset(&r.model, &data.test)?
            .iter()
            .map(|p| p.truncated_words)
            .sum(),
        None => 0,
    };
    if truncated_words > 0 {
        log::warn!("{truncated_words} test words fell past the encoder limit and were not scored");
    }
    Ok(Evaluation {
        model,
        baseline,
        pretrained,
        truncated_words,
    })
}

pub fn write_evaluation(out: &Path, e: &Evaluation) -> Result<Vec<String>> {
    create_dir(out)?;
    write_json(&out.join("report.json"), &e.model)?;
    write_json(&out.join("baseline.json"), &e.baseline)?;
    write_json(&out.join("pretrained.json"), &e.pretrained)?;
    write_per_feature_csv(
        &out.join("per_feature.csv"),
        &[e.model.clone(), e.baseline.clone(), e.pretrained.clone()],
    )?;
    Ok(["report.json", "baseline.json", "pretrained.json", "per_feature.csv"]
        .map(String::from)
        .to_vec())
}

/// Trains every seed on `job`, writes the run directories under
/// `out/runs` and the reports into `out`.
pub fn evaluate_stage(job: &TrainJob<'_>, kind: StdKind, out: &Path) -> Result<(Evaluation, Vec<String>)> {
    let (c, data, runs) = job.run(Some(&out.join("runs")))?;
    let e = evaluate_runs(job, &c, &data, &runs, kind)?;
    let mut files = write_evaluation(out, &e)?;
    files.extend(runs.iter().map(|r| format!("runs/seed-{}", r.seed)));
    Ok((e, files))
}

/// Rescores saved run directories on the test split of the corpus each was
/// trained on.
pub fn evaluate_saved(
    dirs: &[PathBuf],
    padding: PaddingPolicy,
    kind: StdKind,
    out: &Path,
) -> Result<(Evaluation, Vec<String>)> {
    let mut loaded = Vec::with_capacity(dirs.len());
    for d in dirs {
        loaded.push(load_run(d)?);
    }
    let first = loaded
        .first()
        .ok_or_else(|| Error::Usage(String::from("no run directories given")))?;
    let cfg0 = first.config.clone();
    for l in &loaded {
        if l.config.corpus.sha256 != cfg0.corpus.sha256
            || l.config.encoder != cfg0.encoder
            || l.config.data != cfg0.data
        {
            return Err(Error::Data(String::from(
                "runs differ in corpus, encoder or data options",
            )));
        }
    }
    let now = InputFile::hash(&cfg0.corpus.path)?;
    if now.sha256 != cfg0.corpus.sha256 {
        return Err(Error::Data(format!(
            "{} changed since training",
            cfg0.corpus.path.display()
        )));
    }
    let c = load_corpus(&cfg0.corpus.path, &cfg0.format)?;
    let data = prepare_data(&c, &cfg0.data)?;
    let seeds: Vec<u64> = loaded.iter().map(|l| l.config.seed).collect();
    let cfg = TrainConfig {
        seeds: seeds.clone(),
        padding,
        ..cfg0.train.clone()
    };
    let runs = loaded
        .into_iter()
        .map(|l| {
            let test = run_metrics(&l.model, &data.test, cfg.eval_options())?;
            Ok(SeedRun {
                seed: l.config.seed,
                model: l.model,
                history: Default::default(),
                test,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let job = TrainJob {
        corpus_path: &cfg0.corpus.path,
        format: &cfg0.format,
        spec: &cfg0.encoder,
        data: &cfg0.data,
        cfg: &cfg,
        train_fraction: cfg0.train_fraction,
        subsample_seed: 0,
    };
    let e = evaluate_runs(&job, &c, &data, &runs, kind)?;
    let files = write_evaluation(out, &e)?;
    Ok((e, files))
}

/// Trains on each labelled corpus and scores every model on every test
/// split, each scaled with its own corpus's training scaler.
pub fn cross_eval_stage(
    corpora: &BTreeMap<String, PathBuf>,
    format: &str,
    spec: &EncoderSpec,
    data: &DataOptions,
    cfg: &TrainConfig,
    out: &Path,
) -> Result<(CrossMatrix, Vec<String>)> {
    if corpora.len() < 2 {
        return Err(Error::Usage(String::from("cross-eval needs at least two corpora")));
    }
    let mut models = BTreeMap::new();
    let mut tests = BTreeMap::new();
    for (label, path) in corpora {
        let job = TrainJob {
            corpus_path: path,
            format,
            spec,
            data,
            cfg,
            train_fraction: 1.0,
            subsample_seed: 0,
        };
        let (_, prepared, runs) = job.run(Some(&out.join("runs").join(label)))?;
        models.insert(label.clone(), runs.into_iter().map(|r| r.model).collect::<Vec<_>>());
        tests.insert(label.clone(), prepared.test);
    }
    let m = cross_matrix(&models, &tests, cfg.eval_options())?;
    create_dir(out)?;
    write_cross_csv(&out.join("cross_matrix.csv"), &m)?;
    write_json(&out.join("cross_matrix.json"), &m)?;
    let mut files = vec![String::from("cross_matrix.csv"), String::from("cross_matrix.json")];
    files.extend(corpora.keys().map(|l| format!("runs/{l}")));
    Ok((m, files))
}

pub fn ablate_stage(
    job: &TrainJob<'_>,
    fractions: &[f64],
    kind: StdKind,
    out: &Path,
) -> Result<(AblationCurve, Vec<String>)> {
    let (_, data) = job.prepare()?;
    let curve = ablation_run(job.spec, &data, fractions, job.cfg, job.subsample_seed, kind)?;
    create_dir(out)?;
    write_ablation_csv(&out.join("ablation.csv"), &curve)?;
    write_json(&out.join("ablation.json"), &curve)?;
    Ok((curve, vec![String::from("ablation.csv"), String::from("ablation.json")]))
}

/// Which sentences an analysis looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SplitChoice {
    All,
    Train,
    Val,
    #[default]
    Test,
}

pub struct AnalysisInput {
    pub corpus: Corpus,
    /// Standardized features of the chosen sentences.
    pub gold: FeatureDataset,
    /// `(series label, predictions)` aligned with `gold`.
    pub series: Vec<(String, Vec<SentencePrediction>)>,
}

/// Loads the corpus and, when `run` is given, predictions of that run and
/// of its encoder without fine-tuning. Without a run the scaler is fitted
/// on the training split of `data`.
pub fn analysis_input(
    corpus: Option<&Path>,
    format: &str,
    data: &DataOptions,
    run: Option<&Path>,
    split: SplitChoice,
) -> Result<AnalysisInput> {
    let loaded = run.map(load_run).transpose()?;
    let (path, format, data) = match (&loaded, corpus) {
        (_, Some(p)) => (
            p.to_path_buf(),
            format.to_string(),
            loaded.as_ref().map_or(*data, |l| l.config.data),
        ),
        (Some(l), None) => (l.config.corpus.path.clone(), l.config.format.clone(), l.config.data),
        (None, None) => return Err(Error::Usage(String::from("analysis needs --corpus or --run"))),
    };
    let c = load_corpus(&path, &format)?;
    let chosen = match split {
        SplitChoice::All => c.clone(),
        _ => {
            let (train, val, test) = split_dataset(&c, data.ratios, data.split_seed)?;
            match split {
                SplitChoice::Train => train,
                SplitChoice::Val => val,
                _ => test,
            }
        }
    };
    let raw = extract_features(&chosen, data.averaging)?;
    let scaler: Standardizer = match &loaded {
        Some(l) => l.standardizer,
        None => prepare_data(&c, &data)?.standardizer,
    };
    let gold = scaler.standardize(&raw);
    let mut series = Vec::new();
    if let Some(l) = &loaded {
        series.push((String::from("predicted"), predict_dataset(&l.model, &gold)?));
        let untuned = build_regressor(&l.config.encoder, l.config.seed)?;
        series.push((String::from("pretrained"), predict_dataset(&untuned, &gold)?));
    }
    Ok(AnalysisInput {
        corpus: c,
        gold,
        series,
    })
}

pub enum AnalysisOutput {
    Curves(Vec<BinnedCurve>),
    Tags(Vec<TagGroup>),
}

pub fn analyze(
    input: &AnalysisInput,
    kind: AnalysisKind,
    feature: Feature,
    bin_width: u32,
    tags: Option<&Path>,
) -> Result<AnalysisOutput> {
    match kind {
        AnalysisKind::Wordlen => {
            let series: Vec<(&str, &[SentencePrediction])> =
                input.series.iter().map(|(l, p)| (l.as_str(), p.as_slice())).collect();
            Ok(AnalysisOutput::Curves(word_length_curve(
                &input.gold,
                &series,
                feature,
            )?))
        }
        AnalysisKind::Readability => {
            if input.series.is_empty() {
                return Err(Error::Usage(String::from("readability analysis needs --run")));
            }
            let curves = input
                .series
                .iter()
                .map(|(label, preds)| {
                    readability_accuracy_curve(&input.gold, preds, feature, &input.corpus.language, bin_width, label)
                })
                .collect::<gazekit_core::Result<Vec<_>>>()?;
            Ok(AnalysisOutput::Curves(curves))
        }
        AnalysisKind::Pos => {
            let path = tags.ok_or_else(|| Error::Usage(String::from("POS analysis needs --tags")))?;
            let tags = read_pos_tags(path, &input.gold)?;
            let preds = input.series.first().map(|(_, p)| p.as_slice());
            Ok(AnalysisOutput::Tags(pos_aggregation(
                &input.gold,
                &tags,
                feature,
                preds,
            )?))
        }
    }
}

pub fn write_analysis(path: &Path, out: &AnalysisOutput) -> Result<()> {
    match out {
        AnalysisOutput::Curves(c) => write_curves_csv(path, c),
        AnalysisOutput::Tags(t) => write_pos_csv(path, t),
    }
}

pub fn analysis_file(kind: AnalysisKind) -> &'static str {
    match kind {
        AnalysisKind::Wordlen => "wordlen.csv",
        AnalysisKind::Readability => "readability.csv",
        AnalysisKind::Pos => "pos.csv",
    }
}

pub fn report_stage(dirs: &[PathBuf], out: Option<&Path>) -> Result<(SummaryTable, Vec<String>)> {
    let reports = collect_reports(dirs)?;
    let table = SummaryTable::build(&reports);
    let mut files = Vec::new();
    if let Some(dir) = out {
        create_dir(dir)?;
        std::fs::write(dir.join("summary.txt"), table.to_text()).map_err(Error::io(&dir.join("summary.txt")))?;
        table.write_csv(&dir.join("summary.csv"))?;
        write_per_feature_csv(&dir.join("per_feature.csv"), &reports)?;
        files = ["summary.txt", "summary.csv", "per_feature.csv"]
            .map(String::from)
            .to_vec();
    }
    Ok((table, files))
}

/// What a pipeline run produced, for printing.
#[derive(Debug, Default, Serialize)]
pub struct PipelineSummary {
    pub out: PathBuf,
    pub stages: Vec<String>,
    pub violations: Option<usize>,
    pub accuracy: Option<f64>,
    pub baseline_accuracy: Option<f64>,
}

fn in_stage<T>(stage: Stage, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: stage.name().to_string(),
        source: Box::new(e),
    })
}

/// Runs the experiment's stages in order, writing into `out`. A failing
/// stage stops the run; earlier outputs stay on disk.
pub fn run_pipeline(exp: &Experiment, out: &Path) -> Result<PipelineSummary> {
    let spec = exp.encoder_spec()?;
    let cfg = exp.train_config()?;
    create_dir(out)?;
    let mut inputs = vec![InputFile::hash(&exp.corpus)?];
    for p in exp.corpora.values() {
        inputs.push(InputFile::hash(p)?);
    }
    if let Some(t) = &exp.tags {
        inputs.push(InputFile::hash(t)?);
    }
    let mut manifest = RunManifest::new(
        "pipeline",
        serde_json::to_value(exp).map_err(Error::json(out))?,
        inputs,
        cfg.seeds.clone(),
    );
    let mut summary = PipelineSummary {
        out: out.to_path_buf(),
        ..PipelineSummary::default()
    };
    let job = TrainJob {
        corpus_path: &exp.corpus,
        format: &exp.format,
        spec: &spec,
        data: &exp.data,
        cfg: &cfg,
        train_fraction: exp.train_fraction,
        subsample_seed: exp.subsample_seed,
    };
    let mut evaluated = false;

    for &stage in &exp.stages {
        log::info!("stage {}", stage.name());
        let files: Vec<String> = match stage {
            Stage::Validate => {
                let report = in_stage(stage, validate_stage(&exp.corpus, &exp.format, Some(out)))?;
                summary.violations = Some(report.len());
                if !report.is_clean() {
                    manifest.outputs.push(String::from("validation.json"));
                    manifest.finish(out)?;
                    return Err(Error::Stage {
                        stage: stage.name().to_string(),
                        source: Box::new(Error::Invalid {
                            path: exp.corpus.clone(),
                            count: report.len(),
                            first: report.violations[0].to_string(),
                        }),
                    });
                }
                vec![String::from("validation.json")]
            }
            Stage::Stats => {
                in_stage(stage, stats_stage(&exp.corpus, &exp.format, Some(out)))?;
                vec![String::from("stats.json")]
            }
            Stage::Extract => in_stage(
                stage,
                extract_stage(&exp.corpus, &exp.format, &exp.data, &out.join("features")),
            )?
            .into_iter()
            .map(|f| format!("features/{f}"))
            .collect(),
            Stage::Train => {
                let dir = out.join("runs");
                in_stage(stage, job.run(Some(&dir)))?;
                cfg.seeds.iter().map(|s| format!("runs/seed-{s}")).collect()
            }
            Stage::Evaluate => {
                let (e, files) = in_stage(stage, evaluate_stage(&job, exp.std_kind, out))?;
                summary.accuracy = Some(e.model.overall.mean);
                summary.baseline_accuracy = Some(e.baseline.overall.mean);
                evaluated = true;
                files
            }
            Stage::CrossEval => {
                let dir = out.join("cross-eval");
                let (_, files) = in_stage(
                    stage,
                    cross_eval_stage(&exp.corpora, &exp.format, &spec, &exp.data, &cfg, &dir),
                )?;
                files.into_iter().map(|f| format!("cross-eval/{f}")).collect()
            }
            Stage::Ablate => {
                let dir = out.join("ablation");
                let (_, files) = in_stage(stage, ablate_stage(&job, &exp.fractions, exp.std_kind, &dir))?;
                files.into_iter().map(|f| format!("ablation/{f}")).collect()
            }
            Stage::Analyze => {
                let run = cfg.seeds.first().map(|s| out.join("runs").join(format!("seed-{s}")));
                let run = run.filter(|r| r.join(crate::run::CONFIG_FILE).exists());
                let input = in_stage(
                    stage,
                    analysis_input(
                        Some(&exp.corpus),
                        &exp.format,
                        &exp.data,
                        run.as_deref(),
                        SplitChoice::Test,
                    ),
                )?;
                let dir = out.join("analysis");
                create_dir(&dir)?;
                let mut files = Vec::new();
                for &kind in &exp.analyses {
                    if kind == AnalysisKind::Readability && input.series.is_empty() {
                        log::warn!("skipping readability analysis: no trained run");
                        continue;
                    }
                    let result = in_stage(
                        stage,
                        analyze(&input, kind, exp.feature, exp.bin_width, exp.tags.as_deref()),
                    )?;
                    write_analysis(&dir.join(analysis_file(kind)), &result)?;
                    files.push(format!("analysis/{}", analysis_file(kind)));
                }
                files
            }
            Stage::Report => {
                if !evaluated {
                    return Err(Error::Stage {
                        stage: stage.name().to_string(),
                        source: Box::new(Error::Usage(String::from("report needs the evaluate stage first"))),
                    });
                }
                let (_, files) = in_stage(stage, report_stage(&[out.to_path_buf()], Some(&out.join("summary"))))?;
                files.into_iter().map(|f| format!("summary/{f}")).collect()
            }
        };
        manifest.outputs.extend(files);
        summary.stages.push(stage.name().to_string());
    }
    manifest.finish(out)?;
    Ok(summary)
}
