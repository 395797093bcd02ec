use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use satd_core::detector::{DetectorHp, DetectorModel, SvmConfig};
use satd_core::eval::report::{bleu_table, detection_table, project_table, write_bundle};
use satd_core::eval::{
    corpus_bleu, cross_project_rounds, prf1, record_labels, run_cross_project, run_cv,
    run_generation_cv, select_top_per_group, sort_rows, stratified_folds, task_sequences,
    tuning_split, BleuScores, DetectRecipe, DetectorRecipe, GenerateRecipe, GeneratorRecipe,
    ModelSpec, ResultRow, Task, TuningRow,
};
use satd_core::generator::{train_generator, GeneratorHp, GeneratorModel};
use satd_core::miner::{build_dataset, label_records, mine_dir, CorpusRecord, Label};
use satd_core::pretrain::{train_next_token_lm, LanguageModel, PretrainMode};
use satd_core::sbt::sbt_of_source;
use satd_core::text::normalize_comment;
use serde_json::{json, Value};

use crate::artifacts::{read_records, write_json, write_meta, write_records};
use crate::config::{load_grid, load_run_config, Overrides, RunConfig, SCHEMA_VERSION};
use crate::{Command, PretrainedArgs};

/// A problem with how the tool was invoked (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 1 for usage errors, 3 for failures while fitting a model, 2 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(core) = cause.downcast_ref::<satd_core::Error>() {
            if core.is_training_failure() {
                return 3;
            }
        }
    }
    2
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Mine { src_dir, out } => mine(&src_dir, &out),
        Command::Label { corpus, out } => label(&corpus, out.as_deref()),
        Command::Dataset {
            corpus,
            seed,
            balance,
            out,
            pool_out,
        } => dataset(&corpus, seed, balance, &out, pool_out.as_deref()),
        Command::Tune {
            data,
            task,
            grid,
            out,
            seed,
            fraction,
            top,
            overrides,
        } => tune(
            &data,
            task,
            grid.as_deref(),
            &out,
            seed,
            fraction,
            top,
            &overrides,
        ),
        Command::Cv {
            data,
            task,
            hp,
            k,
            seed,
            report,
            no_holdout,
            fraction,
            pretrained,
            overrides,
        } => {
            let holdout = (!no_holdout).then_some(fraction);
            cv(
                &data,
                task,
                hp.as_deref(),
                k,
                seed,
                &report,
                holdout,
                &pretrained,
                &overrides,
            )
        }
        Command::Pretrain {
            pool,
            out,
            task,
            hp,
            seed,
            overrides,
        } => pretrain(&pool, &out, task, hp.as_deref(), seed, &overrides),
        Command::Train {
            data,
            task,
            out,
            hp,
            model,
            seed,
            pretrained,
            overrides,
        } => train(
            &data,
            task,
            &out,
            hp.as_deref(),
            model.as_deref(),
            seed,
            &pretrained,
            &overrides,
        ),
        Command::Detect { model, input, task } => detect(&model, &input, task),
        Command::Generate { model, input } => generate(&model, &input),
        Command::Xproject {
            data,
            report,
            task,
            hp,
            seed,
            projects,
            pretrained,
            overrides,
        } => xproject(
            &data,
            &report,
            task,
            hp.as_deref(),
            seed,
            projects,
            &pretrained,
            &overrides,
        ),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn mine(src: &Path, out: &Path) -> Result<()> {
    if !src.is_dir() {
        bail!("{} is not a directory", src.display());
    }
    let mined = mine_dir(src)?;
    write_records(out, &mined.records)?;
    let with_comment = mined
        .records
        .iter()
        .filter(|r| r.comment_raw.is_some())
        .count();
    log::info!(
        "{} files, {} fragments ({} with a comment), {} skipped candidates",
        mined.files,
        mined.records.len(),
        with_comment,
        mined.diagnostics.len()
    );
    let diagnostics: Vec<Value> = mined
        .diagnostics
        .iter()
        .map(|(path, d)| json!({"path": path, "line": d.line, "column": d.column, "message": d.message}))
        .collect();
    write_meta(
        out,
        "mine",
        None,
        json!({
            "source": path_str(src),
            "files": mined.files,
            "records": mined.records.len(),
            "with_comment": with_comment,
            "diagnostics": diagnostics,
            "failed_files": mined.failed_files,
        }),
    )
}

fn label_counts(records: &[CorpusRecord]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        let key = serde_json::to_value(r.label)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

fn label(corpus: &Path, out: Option<&Path>) -> Result<()> {
    let mut records = read_records(corpus)?;
    label_records(&mut records);
    let out = out.unwrap_or(corpus);
    write_records(out, &records)?;
    let counts = label_counts(&records);
    log::info!("labels: {counts:?}");
    write_meta(
        out,
        "label",
        None,
        json!({"input": path_str(corpus), "counts": counts}),
    )
}

fn dataset(
    corpus: &Path,
    seed: u64,
    balance: bool,
    out: &Path,
    pool_out: Option<&Path>,
) -> Result<()> {
    let records = read_records(corpus)?;
    if !records.is_empty() && records.iter().all(|r| r.label == Label::Unlabeled) {
        bail!(
            "{}: no record is labeled; run `satd-forge label` first",
            corpus.display()
        );
    }
    let data = build_dataset(records, seed, balance)?;
    write_records(out, &data.pairs)?;
    if let Some(pool) = pool_out {
        write_records(pool, &data.pool)?;
        write_meta(
            pool,
            "dataset",
            Some(seed),
            json!({"input": path_str(corpus), "role": "pool"}),
        )?;
    }
    log::info!("{} pairs, {} pooled", data.pairs.len(), data.pool.len());
    write_meta(
        out,
        "dataset",
        Some(seed),
        json!({
            "input": path_str(corpus),
            "balance": balance,
            "provenance": data.provenance,
            "pool_out": pool_out.map(path_str),
        }),
    )
}

fn subset<T: Clone>(all: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| all[i].clone()).collect()
}

fn is_detection(task: Task) -> bool {
    task != Task::Generate
}

/// Generation trains on SATD pairs whose comment survived normalization.
fn generation_records(records: Vec<CorpusRecord>) -> Vec<CorpusRecord> {
    records
        .into_iter()
        .filter(|r| r.is_satd() && !r.comment_words.is_empty())
        .collect()
}

fn load_task_records(data: &Path, task: Task) -> Result<Vec<CorpusRecord>> {
    let records = read_records(data)?;
    let records = if is_detection(task) {
        records
    } else {
        generation_records(records)
    };
    if records.is_empty() {
        bail!("{}: no usable records for {task}", data.display());
    }
    Ok(records)
}

fn generator_label(hp: &GeneratorHp) -> String {
    format!(
        "LSTM latent {}, {} layer(s), batch {}",
        hp.latent_dim, hp.layers, hp.batch_size
    )
}

fn load_pretrained(args: &PretrainedArgs) -> Result<Option<(LanguageModel, PretrainMode)>> {
    let Some(path) = &args.init else {
        return Ok(None);
    };
    let lm = LanguageModel::load(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(Some((lm, args.mode.unwrap_or(PretrainMode::End2end))))
}

fn pretrained_meta(args: &PretrainedArgs) -> Value {
    json!({
        "init": args.init.as_deref().map(path_str),
        "mode": args.init.as_ref().map(|_| args.mode.unwrap_or(PretrainMode::End2end)),
    })
}

fn spec_label(spec: &ModelSpec, pretrained: Option<PretrainMode>) -> String {
    match (spec, pretrained) {
        (ModelSpec::Dl(_), Some(PretrainMode::End2end)) => {
            format!("{}, pre-trained end to end", spec.label())
        }
        (ModelSpec::Dl(_), Some(PretrainMode::EmbeddingOnly)) => {
            format!("{}, pre-trained embeddings", spec.label())
        }
        (ModelSpec::Svm(_), Some(_)) => "SVM, pre-trained embeddings".into(),
        _ => spec.label(),
    }
}

/// Detector specs usable with the given initialization; naive Bayes has no
/// embedding to take over, so it is left out when a language model is given.
fn usable_detectors(cfg: &RunConfig, pretrained: bool) -> Result<Vec<ModelSpec>> {
    let specs: Vec<ModelSpec> = cfg
        .detectors
        .iter()
        .filter(|s| {
            let keep = !(pretrained && matches!(s, ModelSpec::Mnb { .. }));
            if !keep {
                log::warn!("skipping MNB: it cannot use a pre-trained language model");
            }
            keep
        })
        .cloned()
        .collect();
    if specs.is_empty() {
        bail!("the run config lists no usable detectors");
    }
    Ok(specs)
}

#[allow(clippy::too_many_arguments)]
fn tune(
    data: &Path,
    task: Task,
    grid: Option<&Path>,
    out: &Path,
    seed: u64,
    fraction: f64,
    top: usize,
    overrides: &Overrides,
) -> Result<()> {
    let mut grid = load_grid(grid)?;
    overrides.grid(&mut grid);
    let records = load_task_records(data, task)?;
    let sequences = task_sequences(&records, task);
    let labels = record_labels(&records);
    let (tuning, rest) = tuning_split(&labels, fraction, is_detection(task), seed)?;
    log::info!(
        "tuning on {} items, training on {}",
        tuning.len(),
        rest.len()
    );

    let (rows, hp) = if is_detection(task) {
        let hps = grid.detector.expand();
        let rows = hps
            .par_iter()
            .map(|hp| {
                let recipe = DetectorRecipe {
                    sequences: &sequences,
                    labels: &labels,
                    spec: ModelSpec::Dl(hp.clone()),
                    seed,
                    pretrained: None,
                };
                let predicted = recipe.fit_predict(&rest, &tuning)?;
                let m = prf1(&predicted, &subset(&labels, &tuning))?;
                log::info!("{}: F1 {:.3}", ModelSpec::Dl(hp.clone()).label(), m.f1);
                Ok(TuningRow {
                    group: hp.pooling.to_string(),
                    config: serde_json::to_value(hp)?,
                    score: m.f1,
                    tiebreak: m.precision,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut detectors = select_top_per_group(&rows, top)
            .into_iter()
            .map(|r| Ok(ModelSpec::Dl(serde_json::from_value(r.config)?)))
            .collect::<Result<Vec<_>>>()?;
        detectors.push(ModelSpec::Mnb { alpha: 1.0 });
        detectors.push(ModelSpec::Svm(SvmConfig::default()));
        let hp = RunConfig {
            schema_version: SCHEMA_VERSION,
            detectors,
            generators: Vec::new(),
        };
        (rows, hp)
    } else {
        let comments: Vec<Vec<String>> = records.iter().map(|r| r.comment_words.clone()).collect();
        let hps = grid.generator.expand();
        let rows = hps
            .par_iter()
            .map(|hp| {
                let recipe = GeneratorRecipe {
                    code: &sequences,
                    comments: &comments,
                    hp: hp.clone(),
                    seed,
                };
                let generated = recipe.fit_generate(&rest, &tuning)?;
                let pairs: Vec<_> = generated
                    .into_iter()
                    .zip(&tuning)
                    .map(|(g, &i)| (g, comments[i].clone()))
                    .collect();
                let b = corpus_bleu(&pairs)?;
                log::info!("{}: BLEU-4 {:.3}", generator_label(hp), b.bleu_4);
                Ok(TuningRow {
                    group: "generator".into(),
                    config: serde_json::to_value(hp)?,
                    score: b.bleu_4,
                    tiebreak: b.bleu_3,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let generators = select_top_per_group(&rows, top)
            .into_iter()
            .map(|r| Ok(serde_json::from_value(r.config)?))
            .collect::<Result<Vec<GeneratorHp>>>()?;
        let hp = RunConfig {
            schema_version: SCHEMA_VERSION,
            detectors: Vec::new(),
            generators,
        };
        (rows, hp)
    };
    let selected = select_top_per_group(&rows, top);
    write_json(
        out,
        &json!({
            "schema_version": SCHEMA_VERSION,
            "command": "tune",
            "task": task,
            "seed": seed,
            "input": path_str(data),
            "fraction": fraction,
            "tuning_size": tuning.len(),
            "grid": grid,
            "rows": rows,
            "selected": selected,
            "hp": hp,
        }),
    )
}

#[allow(clippy::too_many_arguments)]
fn cv(
    data: &Path,
    task: Task,
    hp: Option<&Path>,
    k: usize,
    seed: u64,
    report: &Path,
    holdout: Option<f64>,
    pretrained_args: &PretrainedArgs,
    overrides: &Overrides,
) -> Result<()> {
    let mut cfg = load_run_config(hp)?;
    overrides.run_config(&mut cfg);
    let records = load_task_records(data, task)?;
    let stratified = is_detection(task);
    let all_labels = record_labels(&records);
    let keep = match holdout {
        Some(f) => tuning_split(&all_labels, f, stratified, seed)?.1,
        None => (0..records.len()).collect(),
    };
    let records = subset(&records, &keep);
    let sequences = task_sequences(&records, task);
    let labels = record_labels(&records);
    if k < 2 || k > labels.len() {
        return Err(usage(format!(
            "--k must be between 2 and {} for this dataset",
            labels.len()
        )));
    }
    let plan = stratified_folds(&labels, k, stratified, seed)?;
    let fold_indices: Vec<Vec<usize>> = plan
        .folds
        .iter()
        .map(|f| f.iter().map(|&i| keep[i]).collect())
        .collect();
    let header = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "cv",
        "task": task,
        "seed": seed,
        "input": path_str(data),
        "k": k,
        "holdout_fraction": holdout,
        "items": labels.len(),
    });

    let (rows_json, models, folds, table) = if is_detection(task) {
        let pretrained = load_pretrained(pretrained_args)?;
        let mode = pretrained.as_ref().map(|p| p.1);
        let mut rows = Vec::new();
        let mut models = Vec::new();
        let mut folds = Vec::new();
        for spec in usable_detectors(&cfg, pretrained.is_some())? {
            let name = spec_label(&spec, mode);
            log::info!("cross-validating {name}");
            let recipe = DetectorRecipe {
                sequences: &sequences,
                labels: &labels,
                spec: spec.clone(),
                seed,
                pretrained: pretrained.as_ref().map(|(lm, m)| (lm, *m)),
            };
            let result = run_cv(&labels, &recipe, &plan)?;
            rows.push(ResultRow::new(name.clone(), &result.mean));
            models.push(json!({"name": name, "spec": spec, "mean": result.mean}));
            folds.push(json!({"name": name, "folds": result.folds}));
        }
        sort_rows(&mut rows);
        let table = detection_table(&rows);
        (serde_json::to_value(rows)?, models, folds, table)
    } else {
        let comments: Vec<Vec<String>> = records.iter().map(|r| r.comment_words.clone()).collect();
        if cfg.generators.is_empty() {
            bail!("the run config lists no generators");
        }
        let mut rows: Vec<(String, BleuScores)> = Vec::new();
        let mut models = Vec::new();
        let mut folds = Vec::new();
        for hp in &cfg.generators {
            let name = generator_label(hp);
            log::info!("cross-validating {name}");
            let recipe = GeneratorRecipe {
                code: &sequences,
                comments: &comments,
                hp: hp.clone(),
                seed,
            };
            let result = run_generation_cv(&comments, &recipe, &plan)?;
            rows.push((name.clone(), result.mean));
            models.push(json!({"name": name, "hp": hp, "mean": result.mean}));
            folds.push(json!({"name": name, "folds": result.folds}));
        }
        rows.sort_by(|a, b| b.1.bleu_4.total_cmp(&a.1.bleu_4));
        let table = bleu_table(&rows);
        let rows_json: Vec<Value> = rows
            .iter()
            .map(|(name, b)| json!({"name": name, "bleu": b}))
            .collect();
        (Value::Array(rows_json), models, folds, table)
    };

    let mut metrics = header.clone();
    metrics["config"] = serde_json::to_value(&cfg)?;
    metrics["pretrained"] = pretrained_meta(pretrained_args);
    metrics["rows"] = rows_json;
    metrics["models"] = Value::Array(models);
    let mut folds_doc = header;
    folds_doc["plan"] = serde_json::to_value(fold_indices)?;
    folds_doc["models"] = Value::Array(folds);
    write_bundle(report, &metrics, &folds_doc, &table)?;
    print!("{table}");
    Ok(())
}

fn pretrain(
    pool: &Path,
    out: &Path,
    task: Task,
    hp: Option<&Path>,
    seed: u64,
    overrides: &Overrides,
) -> Result<()> {
    if !is_detection(task) {
        return Err(usage(
            "pretrain works on detection inputs (detect-code or detect-comment)",
        ));
    }
    let cfg = load_run_config(hp)?;
    let mut hp = cfg
        .detectors
        .iter()
        .find_map(|s| match s {
            ModelSpec::Dl(hp) => Some(hp.clone()),
            _ => None,
        })
        .unwrap_or_default();
    overrides.detector(&mut hp);
    let records = read_records(pool)?;
    let sequences = task_sequences(&records, task);
    let (lm, losses) = train_next_token_lm(&sequences, &hp, seed)?;
    let accuracy = lm.next_token_accuracy(&sequences)?;
    log::info!("next-token accuracy on the pool: {accuracy:.3}");
    lm.save(out)?;
    write_meta(
        out,
        "pretrain",
        Some(seed),
        json!({
            "input": path_str(pool),
            "task": task,
            "hp": hp,
            "sequences": sequences.len(),
            "epoch_losses": losses,
            "next_token_accuracy": accuracy,
        }),
    )
}

fn default_spec(kind: &str) -> Result<ModelSpec> {
    Ok(match kind {
        "dl" => ModelSpec::Dl(DetectorHp::default()),
        "mnb" => ModelSpec::Mnb { alpha: 1.0 },
        "svm" => ModelSpec::Svm(SvmConfig::default()),
        _ => {
            return Err(usage(format!(
                "--model must be dl, mnb or svm, got {kind:?}"
            )))
        }
    })
}

fn spec_kind(spec: &ModelSpec) -> &'static str {
    match spec {
        ModelSpec::Dl(_) => "dl",
        ModelSpec::Mnb { .. } => "mnb",
        ModelSpec::Svm(_) => "svm",
    }
}

#[allow(clippy::too_many_arguments)]
fn train(
    data: &Path,
    task: Task,
    out: &Path,
    hp: Option<&Path>,
    model: Option<&str>,
    seed: u64,
    pretrained_args: &PretrainedArgs,
    overrides: &Overrides,
) -> Result<()> {
    let mut cfg = load_run_config(hp)?;
    overrides.run_config(&mut cfg);
    let records = load_task_records(data, task)?;
    let sequences = task_sequences(&records, task);
    let details = if is_detection(task) {
        let spec = match model {
            None => cfg
                .detectors
                .first()
                .cloned()
                .map_or_else(|| default_spec("dl"), Ok)?,
            Some(kind) => match cfg.detectors.iter().find(|s| spec_kind(s) == kind) {
                Some(s) => s.clone(),
                None => default_spec(kind)?,
            },
        };
        let pretrained = load_pretrained(pretrained_args)?;
        let labels = record_labels(&records);
        let detector = satd_core::eval::train_detector(
            &spec,
            &sequences,
            &labels,
            seed,
            pretrained.as_ref().map(|(lm, m)| (lm, *m)),
        )?;
        detector.save(out)?;
        json!({"spec": spec, "kind": detector.kind().as_str()})
    } else {
        if model.is_some() || pretrained_args.init.is_some() {
            return Err(usage("--model and --init apply to detection tasks only"));
        }
        let hp = cfg.generators.first().cloned().unwrap_or_default();
        let comments: Vec<Vec<String>> = records.iter().map(|r| r.comment_words.clone()).collect();
        let (generator, losses) = train_generator(&sequences, &comments, &hp, seed)?;
        generator.save(out)?;
        json!({"hp": hp, "final_loss": losses.last()})
    };
    let mut details = details;
    details["input"] = json!(path_str(data));
    details["task"] = json!(task);
    details["items"] = json!(records.len());
    details["pretrained"] = pretrained_meta(pretrained_args);
    write_meta(out, "train", Some(seed), details)
}

/// One token sequence per input item. A `.jsonl` file holds corpus records;
/// any other file has one item per non-blank line: Java source of an `if`
/// statement for code tasks, raw comment text for comment detection.
fn read_inputs(path: &Path, task: Task) -> Result<Vec<Vec<String>>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        return Ok(task_sequences(&read_records(path)?, task));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| match task {
            Task::DetectComment => Ok(normalize_comment(line)),
            _ => sbt_of_source(line).with_context(|| format!("{}:{}", path.display(), i + 1)),
        })
        .collect()
}

fn detect(model: &Path, input: &Path, task: Task) -> Result<()> {
    if !is_detection(task) {
        return Err(usage("detect needs --task detect-code or detect-comment"));
    }
    let model =
        DetectorModel::load(model).with_context(|| format!("loading {}", model.display()))?;
    let items = read_inputs(input, task)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for seq in &items {
        let p = model.predict_lenient(seq)?;
        let label = if p.positive { "satd" } else { "non-satd" };
        writeln!(out, "{:.6}\t{label}", p.score)?;
    }
    out.flush()?;
    Ok(())
}

fn generate(model: &Path, input: &Path) -> Result<()> {
    let model =
        GeneratorModel::load(model).with_context(|| format!("loading {}", model.display()))?;
    let items = read_inputs(input, Task::Generate)?;
    let comments = items
        .par_iter()
        .map(|seq| model.generate_comment(seq))
        .collect::<satd_core::Result<Vec<_>>>()?;
    let mut out = BufWriter::new(io::stdout().lock());
    for words in comments {
        writeln!(out, "// {}", words.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn xproject(
    data: &Path,
    report: &Path,
    task: Task,
    hp: Option<&Path>,
    seed: u64,
    projects: Option<Vec<String>>,
    pretrained_args: &PretrainedArgs,
    overrides: &Overrides,
) -> Result<()> {
    if !is_detection(task) {
        return Err(usage(
            "xproject evaluates detectors; use detect-code or detect-comment",
        ));
    }
    let mut cfg = load_run_config(hp)?;
    overrides.run_config(&mut cfg);
    let records = load_task_records(data, task)?;
    let sequences = task_sequences(&records, task);
    let labels = record_labels(&records);
    let names: Vec<String> = records.iter().map(|r| r.project.clone()).collect();
    let rounds = cross_project_rounds(&names, projects.as_deref())?;
    let pretrained = load_pretrained(pretrained_args)?;
    let mode = pretrained.as_ref().map(|p| p.1);

    let mut rows = Vec::new();
    let mut models = Vec::new();
    let mut table = String::new();
    for spec in usable_detectors(&cfg, pretrained.is_some())? {
        let name = spec_label(&spec, mode);
        log::info!("leave-one-project-out for {name}");
        let recipe = DetectorRecipe {
            sequences: &sequences,
            labels: &labels,
            spec: spec.clone(),
            seed,
            pretrained: pretrained.as_ref().map(|(lm, m)| (lm, *m)),
        };
        let result = run_cross_project(&labels, &recipe, &rounds)?;
        rows.push(ResultRow::new(name.clone(), &result.mean));
        table.push_str(&format!("{name}\n{}\n", project_table(&result)));
        models.push(
            json!({"name": name, "spec": spec, "rounds": result.rounds, "mean": result.mean}),
        );
    }
    sort_rows(&mut rows);
    table.push_str(&detection_table(&rows));

    let header = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "xproject",
        "task": task,
        "seed": seed,
        "input": path_str(data),
    });
    let mut metrics = header.clone();
    metrics["config"] = serde_json::to_value(&cfg)?;
    metrics["pretrained"] = pretrained_meta(pretrained_args);
    metrics["rows"] = serde_json::to_value(&rows)?;
    metrics["models"] = Value::Array(models);
    let mut folds = header;
    folds["rounds"] = serde_json::to_value(&rounds)?;
    write_bundle(report, &metrics, &folds, &table)?;
    print!("{table}");
    Ok(())
}
