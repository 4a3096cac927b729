use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, ValueEnum};
use colabel::corpus::synth::{self, SynthConfig};
use colabel::corpus::{
    anonymize, filter_raw, labeled_at, parse_gold_tsv, read_raw_jsonl, write_gold_tsv, write_raw_jsonl,
    DropReason, FilterDecision, Instance, LabeledInstance, RawLine,
};
use colabel::cotrain::{
    distill_labels, read_distant, read_predictions_a, run_cascade, write_distant, write_predictions_a,
    CascadeOptions, Ensemble,
};
use colabel::eval::{evaluate_buckets, macro_f1, score_histogram, EvalReport};
use colabel::models::external::serve as serve_protocol;
use colabel::models::{
    ExternalScorer, LexiconModel, LinearConfig, LinearModel, ModelKind, NativeModel, PmiModel, Scorer,
};
use colabel::select::{
    class_weights, partition_easy_hard, select_training, upsample_balance, write_buckets, Bucket,
    CurriculumSchedule, DataSource,
};
use colabel::{ClassLabel, Level};
use serde::Serialize;

use crate::manifest::{beside, ModelEntry, RunManifest, ScorerEntry};
use crate::settings::Settings;
use crate::CliError;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn flush(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn read_gold(path: &Path) -> Result<Vec<LabeledInstance>, CliError> {
    parse_gold_tsv(open(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Reads an ingested (or raw) JSONL corpus. Malformed lines are input errors.
fn read_corpus(path: &Path) -> Result<Vec<Instance>, CliError> {
    let mut out = Vec::new();
    for line in read_raw_jsonl(open(path)?) {
        match line? {
            RawLine::Record(r) => out.push(Instance::new(r.id, &r.text)),
            RawLine::Malformed { line, message } => {
                return Err(CliError::Usage(format!("{}:{line}: {message}", path.display())))
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw corpus, one `{"id": ..., "text": ...}` object per line.
    #[arg(long)]
    input: PathBuf,
    /// Accepted instances (JSONL with anonymized text and tokens).
    #[arg(long)]
    out: PathBuf,
    /// Rejection summary [default: <out>.rejections.json].
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct IngestReport {
    accepted: u64,
    malformed: u64,
    rejected: BTreeMap<&'static str, u64>,
}

pub fn ingest(settings: &Settings, args: IngestArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(settings.seed()?, settings.snapshot());
    manifest.input(&args.input)?;
    let mut out = create(&args.out)?;
    let mut report = IngestReport {
        accepted: 0,
        malformed: 0,
        rejected: DropReason::ALL.iter().map(|r| (r.as_str(), 0)).chain([("duplicate_id", 0)]).collect(),
    };
    let mut seen = BTreeSet::new();
    for line in read_raw_jsonl(open(&args.input)?) {
        let rec = match line? {
            RawLine::Record(r) => r,
            RawLine::Malformed { line, message } => {
                eprintln!("warning: {}:{line}: skipped ({message})", args.input.display());
                report.malformed += 1;
                continue;
            }
        };
        let text = anonymize(&rec.text);
        if let FilterDecision::Drop(reason) = filter_raw(&text) {
            *report.rejected.get_mut(reason.as_str()).unwrap() += 1;
            continue;
        }
        if !seen.insert(rec.id.clone()) {
            *report.rejected.get_mut("duplicate_id").unwrap() += 1;
            continue;
        }
        let inst = Instance::new(rec.id, &text);
        serde_json::to_writer(&mut out, &inst).map_err(|e| CliError::Usage(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| CliError::io(&args.out, e))?;
        report.accepted += 1;
    }
    flush(out, &args.out)?;
    let report_path = args.report.unwrap_or_else(|| {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".rejections.json");
        args.out.with_file_name(name)
    });
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    fs::write(&report_path, json).map_err(|e| CliError::io(&report_path, e))?;
    eprintln!(
        "accepted {}, malformed {}, rejected {:?}",
        report.accepted, report.malformed, report.rejected
    );
    manifest.finish(&[args.out.clone(), report_path], &beside(&args.out))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelType {
    Pmi,
    Linear,
    Lexicon,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Gold TSV (`id, tweet, subtask_a, subtask_b, subtask_c`).
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: ModelType,
    #[arg(long)]
    out: PathBuf,
    /// Name the model goes by inside an ensemble.
    #[arg(long)]
    name: Option<String>,
    /// Distant data in gold format (see `select --distilled`).
    #[arg(long)]
    distant: Option<PathBuf>,
    /// Balance classes by upsampling before training.
    #[arg(long)]
    upsample: bool,
    /// Apply the level's class weights to the training loss.
    #[arg(long)]
    class_weights: bool,
    /// Phase schedule for the linear model, e.g. `distant:1,gold:2`.
    #[arg(long)]
    curriculum: Option<String>,
    /// One word per line, replacing the built-in curse list.
    #[arg(long)]
    lexicon_words: Option<PathBuf>,
}

pub fn train(settings: &Settings, args: TrainArgs) -> Result<(), CliError> {
    let mut overrides = Vec::new();
    if args.upsample {
        overrides.push(("train.upsample".to_string(), "true".to_string()));
    }
    if args.class_weights {
        overrides.push(("train.class_weights".to_string(), "true".to_string()));
    }
    if let Some(c) = &args.curriculum {
        overrides.push(("train.curriculum".to_string(), c.clone()));
    }
    let mut settings = settings.clone();
    settings.apply(&overrides)?;
    let seed = settings.seed()?;
    let mut manifest = RunManifest::new(seed, settings.snapshot());

    let mut model = match args.model {
        ModelType::Lexicon => {
            if settings.opt::<Level>("level")?.is_some_and(|l| l != Level::A) {
                return Err(CliError::Usage("the lexicon model only labels Level A".into()));
            }
            match &args.lexicon_words {
                None => NativeModel::Lexicon(LexiconModel::default()),
                Some(path) => {
                    manifest.input(path)?;
                    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                    NativeModel::Lexicon(LexiconModel::new(text.lines().map(str::trim).filter(|w| !w.is_empty())))
                }
            }
        }
        kind => {
            let level = settings.level()?;
            let gold_path = args.gold.as_ref().ok_or_else(|| CliError::Usage("--gold is required".into()))?;
            manifest.input(gold_path)?;
            let upsample: bool = settings.get("train.upsample")?;
            let prepare = |data: Vec<LabeledInstance>, salt: u64| -> Result<Vec<LabeledInstance>, CliError> {
                let data = labeled_at(&data, level);
                Ok(if upsample { upsample_balance(&data, level, seed ^ salt)? } else { data })
            };
            let gold = prepare(read_gold(gold_path)?, 0)?;
            let distant = match &args.distant {
                None => None,
                Some(p) => {
                    manifest.input(p)?;
                    Some(prepare(read_gold(p)?, 1)?)
                }
            };
            match kind {
                ModelType::Pmi => {
                    if settings.get::<bool>("train.class_weights")? {
                        eprintln!("note: class weights affect loss-trained models only; PMI ignores them");
                    }
                    let mut data = gold;
                    data.extend(distant.unwrap_or_default());
                    NativeModel::Pmi(PmiModel::train(&data, level, settings.pmi()?)?)
                }
                _ => {
                    let mut cfg: LinearConfig = settings.linear(level)?;
                    if settings.get::<bool>("train.class_weights")? {
                        let w = class_weights(level);
                        cfg.class_weights = Some(level.classes().iter().map(|c| w[c]).collect());
                    }
                    let (model, losses) = match distant {
                        None => {
                            let epochs = cfg.epochs;
                            LinearModel::train_phases(&[(&gold, epochs)], level, cfg)?
                        }
                        Some(distant) => {
                            let schedule: CurriculumSchedule = match settings.opt::<String>("train.curriculum")? {
                                Some(s) => s.parse()?,
                                None => colabel::select::build_curriculum(level),
                            };
                            eprintln!("curriculum: {schedule}");
                            let phases: Vec<(&[LabeledInstance], usize)> = schedule
                                .phases()
                                .iter()
                                .map(|p| match p.source {
                                    DataSource::Gold => (gold.as_slice(), p.epochs),
                                    DataSource::Distant => (distant.as_slice(), p.epochs),
                                })
                                .collect();
                            LinearModel::train_phases(&phases, level, cfg)?
                        }
                    };
                    if let Some(last) = losses.last() {
                        eprintln!("final training loss: {last:.6} after {} epochs", losses.len());
                    }
                    NativeModel::Linear(model)
                }
            }
        }
    };
    if let Some(name) = &args.name {
        model.set_name(name.clone());
    }
    model.save(&args.out).map_err(|e| match e {
        colabel::Error::Io(io) => CliError::io(&args.out, io),
        other => other.into(),
    })?;
    let entry = ModelEntry::of(&model);
    eprintln!("{} model `{}` for Level {} sha256 {}", entry.model_type, entry.name, entry.level, entry.sha256);
    manifest.models.push(entry);
    manifest.finish(std::slice::from_ref(&args.out), &beside(&args.out))
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Corpus JSONL (output of `ingest`).
    #[arg(long)]
    corpus: PathBuf,
    /// Native model file, optionally renamed: `[name=]path`. Repeatable.
    #[arg(long = "model")]
    models: Vec<String>,
    /// External scorer command line, spawned and spoken to over stdio.
    #[arg(long = "scorer")]
    scorers: Vec<String>,
    /// External scorer listening on TCP, `host:port`.
    #[arg(long = "scorer-tcp")]
    scorers_tcp: Vec<String>,
    /// Override how the gates read a member: `name=continuous|discrete`.
    #[arg(long = "kind")]
    kinds: Vec<String>,
    /// Output directory for level_a.csv, level_b.csv, level_c.csv,
    /// predictions_a.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

fn parse_model_spec(spec: &str) -> (Option<&str>, &Path) {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !name.contains(['/', '\\']) => (Some(name), Path::new(path)),
        _ => (None, Path::new(spec)),
    }
}

fn load_model(spec: &str, manifest: &mut RunManifest) -> Result<NativeModel, CliError> {
    let (name, path) = parse_model_spec(spec);
    let mut model = NativeModel::load(path).map_err(|e| match e {
        colabel::Error::Io(io) => CliError::io(path, io),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })?;
    if let Some(name) = name {
        model.set_name(name);
    }
    manifest.models.push(ModelEntry::of(&model));
    Ok(model)
}

pub fn label(settings: &Settings, args: LabelArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(settings.seed()?, settings.snapshot());
    manifest.input(&args.corpus)?;
    let kinds: HashMap<String, ModelKind> = args
        .kinds
        .iter()
        .map(|k| {
            let (name, kind) = k.split_once('=').ok_or_else(|| CliError::Usage(format!("bad --kind `{k}`")))?;
            Ok((name.to_string(), kind.parse::<ModelKind>()?))
        })
        .collect::<Result<_, CliError>>()?;

    let mut ensemble = Ensemble::new();
    let mut register = |scorer: Arc<dyn Scorer>, levels: Vec<Level>| -> Result<(), CliError> {
        let name = scorer.name().to_string();
        let kind = kinds.get(&name).copied().unwrap_or(scorer.kind());
        for level in levels {
            ensemble.add_as(level, name.clone(), kind, scorer.clone())?;
        }
        Ok(())
    };
    for spec in &args.models {
        let model = load_model(spec, &mut manifest)?;
        let level = model.level();
        register(Arc::new(model), vec![level])?;
    }
    let timeout = Duration::from_secs(settings.get("scorer.timeout_secs")?);
    let mut external = Vec::new();
    for cmd in &args.scorers {
        let mut parts = cmd.split_whitespace();
        let program = parts.next().ok_or_else(|| CliError::Usage("empty --scorer command".into()))?;
        let rest: Vec<String> = parts.map(str::to_string).collect();
        external.push((cmd.clone(), ExternalScorer::spawn(program, &rest, timeout)?));
    }
    for addr in &args.scorers_tcp {
        external.push((format!("tcp://{addr}"), ExternalScorer::connect_tcp(addr.as_str(), timeout)?));
    }
    for (endpoint, scorer) in external {
        let levels = scorer.levels();
        manifest.scorers.push(ScorerEntry {
            name: scorer.name().to_string(),
            endpoint,
            levels: levels.iter().map(Level::to_string).collect(),
        });
        register(Arc::new(scorer), levels)?;
    }

    let corpus = read_corpus(&args.corpus)?;
    let opts = CascadeOptions {
        threads: settings.get("threads")?,
        batch_size: settings.get("batch_size")?,
        gates: settings.gates()?,
    };
    let output = run_cascade(&ensemble, corpus, &opts)?;

    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let paths: Vec<PathBuf> = ["level_a.csv", "level_b.csv", "level_c.csv", "predictions_a.csv"]
        .iter()
        .map(|f| args.out.join(f))
        .collect();
    let (a, b, c, p) = (create(&paths[0])?, create(&paths[1])?, create(&paths[2])?, create(&paths[3])?);
    write_distant(&output.records, a, b, c)?;
    let ids: Vec<&str> = output.records.iter().map(|r| r.id.as_str()).collect();
    write_predictions_a(&ids, &output.level_a, p)?;
    let count = |level| output.records.iter().filter(|r| r.has_level(level)).count();
    eprintln!(
        "labeled {} instances: Level A {}, Level B {}, Level C {}",
        output.records.len(),
        count(Level::A),
        count(Level::B),
        count(Level::C)
    );
    manifest.finish(&paths, &args.out.join("manifest.json"))
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Directory with the score files written by `label`.
    #[arg(long)]
    scores: PathBuf,
    /// Selected ids, one per line.
    #[arg(long)]
    out: PathBuf,
    /// Corpus JSONL; with `--distilled`, texts for the selected ids.
    #[arg(long, requires = "distilled")]
    corpus: Option<PathBuf>,
    /// Gold-format TSV of the selected instances with labels distilled from
    /// their aggregate scores.
    #[arg(long, requires = "corpus")]
    distilled: Option<PathBuf>,
}

pub fn select(settings: &Settings, args: SelectArgs) -> Result<(), CliError> {
    let level = settings.level()?;
    let mut manifest = RunManifest::new(settings.seed()?, settings.snapshot());
    let file = |name: &str| args.scores.join(name);
    let optional = |p: PathBuf| -> Result<Option<BufReader<File>>, CliError> {
        if p.exists() {
            Ok(Some(open(&p)?))
        } else {
            Ok(None)
        }
    };
    for name in ["level_a.csv", "level_b.csv", "level_c.csv"] {
        if file(name).exists() {
            manifest.input(&file(name))?;
        }
    }
    let records = read_distant(open(&file("level_a.csv"))?, optional(file("level_b.csv"))?, optional(file("level_c.csv"))?)?;
    let policy = settings.selection(level)?;
    let ids = select_training(&records, &policy)?;

    let mut out = create(&args.out)?;
    let mut text = String::from("id\n");
    for id in &ids {
        text.push_str(id);
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(|e| CliError::io(&args.out, e))?;
    flush(out, &args.out)?;
    let mut outputs = vec![args.out.clone()];
    eprintln!("selected {} of {} records at Level {level}", ids.len(), records.len());

    if let (Some(corpus_path), Some(distilled)) = (&args.corpus, &args.distilled) {
        manifest.input(corpus_path)?;
        let chosen: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        let by_id: HashMap<&str, _> = records.iter().map(|r| (r.id.as_str(), r)).collect();
        let thresholds = settings.distill()?;
        let mut data = Vec::new();
        for inst in read_corpus(corpus_path)? {
            if chosen.contains(inst.id.as_str()) {
                let label = distill_labels(by_id[inst.id.as_str()], &thresholds)?;
                data.push(LabeledInstance::new(inst, label));
            }
        }
        data.sort_by(|a, b| a.instance.id.cmp(&b.instance.id));
        if data.len() != chosen.len() {
            return Err(CliError::Usage(format!(
                "{} selected ids are missing from the corpus",
                chosen.len() - data.len()
            )));
        }
        let w = create(distilled)?;
        write_gold_tsv(w, &data)?;
        outputs.push(distilled.clone());
    }
    manifest.finish(&outputs, &beside(&args.out))
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// predictions_a.csv written by `label`.
    #[arg(long)]
    predictions: PathBuf,
    /// Bucket CSV `id,difficulty,polarity`.
    #[arg(long)]
    out: PathBuf,
}

pub fn partition(settings: &Settings, args: PartitionArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(settings.seed()?, settings.snapshot());
    manifest.input(&args.predictions)?;
    let preds = read_predictions_a(open(&args.predictions)?)?;
    let t = settings.buckets()?;
    let mut rows: Vec<(&str, Bucket)> = Vec::new();
    for (id, p) in &preds {
        if let Some(b) = partition_easy_hard(p, &t)? {
            rows.push((id, b));
        }
    }
    let out = create(&args.out)?;
    write_buckets(out, rows.iter().copied())?;
    for b in Bucket::ORDER {
        let n = rows.iter().filter(|(_, r)| *r == b).count();
        eprintln!("{} {}: {n}", b.difficulty, b.polarity);
    }
    eprintln!("unbucketed: {} (rule: first match in order easy OFF, hard OFF, hard NOT, easy NOT)", preds.len() - rows.len());
    manifest.finish(std::slice::from_ref(&args.out), &beside(&args.out))
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold TSV.
    #[arg(long)]
    gold: PathBuf,
    /// Predictions CSV `id,label`.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pred: Option<PathBuf>,
    /// Native model used to predict the gold texts.
    #[arg(long)]
    model: Option<String>,
    /// Bucket CSV from `partition`; adds easy and hard slices.
    #[arg(long)]
    buckets: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    out: PathBuf,
}

fn read_label_csv(path: &Path, level: Level) -> Result<HashMap<String, ClassLabel>, CliError> {
    let mut out = HashMap::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if i == 0 && line.trim_end() == "id,label" {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| CliError::Usage(format!("{}:{}: {m}", path.display(), i + 1));
        let (id, label) = line.trim().split_once(',').ok_or_else(|| bad("expected `id,label`".into()))?;
        let label = ClassLabel::parse_for(level, label).map_err(|e| bad(e.to_string()))?;
        if out.insert(id.to_string(), label).is_some() {
            return Err(bad(format!("duplicate id `{id}`")));
        }
    }
    Ok(out)
}

pub fn eval(settings: &Settings, args: EvalArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(settings.seed()?, settings.snapshot());
    manifest.input(&args.gold)?;
    let model = match &args.model {
        Some(spec) => Some(load_model(spec, &mut manifest)?),
        None => None,
    };
    let level = match (&model, settings.opt::<Level>("level")?) {
        (Some(m), Some(l)) if m.level() != l => {
            return Err(CliError::Usage(format!("model is for Level {}, not {l}", m.level())))
        }
        (Some(m), _) => m.level(),
        (None, l) => l.ok_or_else(|| CliError::Usage("--level is required".into()))?,
    };
    let gold_data = labeled_at(&read_gold(&args.gold)?, level);
    let gold: HashMap<String, ClassLabel> =
        gold_data.iter().map(|d| (d.instance.id.clone(), d.label.at(level).unwrap())).collect();
    let pred = match (&model, &args.pred) {
        (Some(m), _) => gold_data.iter().map(|d| (d.instance.id.clone(), m.predict(&d.instance).hard_label)).collect(),
        (None, Some(p)) => {
            manifest.input(p)?;
            read_label_csv(p, level)?
        }
        (None, None) => unreachable!("clap requires --pred or --model"),
    };
    let reports: Vec<EvalReport> = match &args.buckets {
        None => vec![macro_f1(level, &gold, &pred)?],
        Some(path) => {
            manifest.input(path)?;
            let buckets = colabel::select::read_buckets(open(path)?)?;
            evaluate_buckets(level, &gold, &pred, &buckets)?
        }
    };
    for r in &reports {
        eprint!("{}", r.to_text());
    }
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n";
    fs::write(&args.out, json).map_err(|e| CliError::io(&args.out, e))?;
    manifest.finish(std::slice::from_ref(&args.out), &beside(&args.out))
}

#[derive(Debug, Args)]
pub struct HistArgs {
    /// Any CSV with a header row, e.g. level_a.csv.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value = "average")]
    column: String,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    #[arg(long, default_value_t = 1.0)]
    hi: f64,
    /// Histogram CSV `bin_lo,bin_hi,count`.
    #[arg(long)]
    out: PathBuf,
}

pub fn hist(settings: &Settings, args: HistArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(settings.seed()?, settings.snapshot());
    manifest.input(&args.scores)?;
    let mut lines = open(&args.scores)?.lines();
    let header = lines.next().transpose().map_err(|e| CliError::io(&args.scores, e))?.unwrap_or_default();
    let col = header
        .split(',')
        .position(|c| c == args.column)
        .ok_or_else(|| CliError::Usage(format!("no column `{}` in {}", args.column, args.scores.display())))?;
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::io(&args.scores, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let cell = line.split(',').nth(col).unwrap_or("");
        let v: f64 = cell
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{}:{}: bad number `{cell}`", args.scores.display(), i + 2)))?;
        values.push(v);
    }
    let h = score_histogram(values, args.bins, args.lo, args.hi)?;
    let out = create(&args.out)?;
    h.write_csv(out)?;
    eprint!("{}", h.to_text(50));
    manifest.finish(std::slice::from_ref(&args.out), &beside(&args.out))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    n: usize,
    /// Raw JSONL corpus.
    #[arg(long)]
    out: PathBuf,
    /// Also write the same items with their labels as a gold TSV.
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long, default_value_t = 0.33)]
    off_rate: f64,
    #[arg(long, default_value_t = 0.3)]
    unt_rate: f64,
    /// Probability of a curse word in a NOT item.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

pub fn synth(settings: &Settings, args: SynthArgs) -> Result<(), CliError> {
    let seed = settings.seed()?;
    let manifest = RunManifest::new(seed, settings.snapshot());
    for (name, v) in [("off-rate", args.off_rate), ("unt-rate", args.unt_rate), ("noise", args.noise)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Usage(format!("--{name} must be in [0, 1]")));
        }
    }
    let cfg = SynthConfig { off_rate: args.off_rate, unt_rate: args.unt_rate, noise: args.noise, seed };
    let data = synth::labeled(args.n, &cfg);
    let raw: Vec<_> = synth::raw(args.n, &cfg);
    let out = create(&args.out)?;
    write_raw_jsonl(out, &raw)?;
    let mut outputs = vec![args.out.clone()];
    if let Some(gold) = &args.gold {
        write_gold_tsv(create(gold)?, &data)?;
        outputs.push(gold.clone());
    }
    manifest.finish(&outputs, &beside(&args.out))
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Native model files, at most one per level: `[name=]path`.
    #[arg(long = "model", required = true)]
    models: Vec<String>,
    /// Name announced in the handshake.
    #[arg(long, default_value = "colabel")]
    name: String,
    #[arg(long, value_parser = ["continuous", "discrete"], default_value = "discrete")]
    kind: String,
}

pub fn serve(_settings: &Settings, args: ServeArgs) -> Result<(), CliError> {
    let mut scratch = RunManifest::new(0, &BTreeMap::new());
    let mut models = Vec::new();
    let mut levels = BTreeSet::new();
    for spec in &args.models {
        let m = load_model(spec, &mut scratch)?;
        if !levels.insert(m.level()) {
            return Err(CliError::Usage(format!("two models for Level {}", m.level())));
        }
        models.push(m);
    }
    let scorers: Vec<&dyn Scorer> = models.iter().map(|m| m as &dyn Scorer).collect();
    let kind: ModelKind = args.kind.parse()?;
    let stdin = io::stdin().lock();
    let stdout = io::stdout().lock();
    serve_protocol(&args.name, kind, &scorers, stdin, stdout)?;
    Ok(())
}
