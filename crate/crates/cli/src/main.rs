mod tagged;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qadisc::align::{compute_iaa, score_corpus};
use qadisc::baseline::{train_from_corpus, BaselineParser, CompatTable, PrefixModel, TrainConfig};
use qadisc::dataset::{
    annotation_sets, dataset_stats, merge_adjudicated, read_dataset_lenient, verdicts_from_records,
    write_dataset_string, DatasetRecord, Domain, FormatDescriptor, QaKey, Split,
};
use qadisc::report::{iaa_records, metrics_records, render, stats_records, ReportFormat};
use qadisc::targets::{annotate_targets, bracketed, segment_sentence, ConnectiveLexicon};
use qadisc::{AnnotationSet, Source};

use tagged::{parse_tagged, TaggedRow};

#[derive(Parser)]
#[command(name = "qadisc", version, about = "Discourse relations as question-answer pairs")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every stochastic default (weight initialisation).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Column-mapping descriptor for dataset files.
    #[arg(long, global = true)]
    format: Option<PathBuf>,

    /// Report style: `text` (key: value) or `machine` (JSON lines).
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "machine"])]
    report: String,

    /// Connective lexicon file.
    #[arg(long, global = true, env = "QADISC_LEXICON")]
    lexicon: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Prefix threshold override, in (0, 1).
    #[arg(long, global = true)]
    tau: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Segment tagged sentences and list their question targets.
    Extract { input: PathBuf },
    /// Check a dataset file row by row.
    Validate { input: PathBuf },
    /// Score predictions against gold with UQA/LQA alignment.
    Score {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Corpus statistics.
    Stats { input: PathBuf },
    /// Pairwise inter-annotator agreement over worker annotations.
    Iaa { input: PathBuf },
    /// Merge worker annotations under adjudicated verdicts.
    Merge {
        input: PathBuf,
        /// Dataset whose verdict column holds the adjudication.
        #[arg(long)]
        verdicts: PathBuf,
    },
    /// Train the prefix classifier.
    Train {
        /// Gold dataset.
        gold: PathBuf,
        /// Tagged sentences for the gold dataset.
        #[arg(long)]
        tagged: PathBuf,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
    },
    /// Run the baseline parser over tagged sentences.
    Parse {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Extra connective-to-prefix compatibility entries.
        #[arg(long)]
        compat: Option<PathBuf>,
    },
    /// Rewrite a dataset in the canonical layout.
    Convert { input: PathBuf },
}

impl Global {
    fn report_format(&self) -> ReportFormat {
        self.report.parse().unwrap_or_default()
    }

    fn descriptor(&self) -> Result<FormatDescriptor> {
        match &self.format {
            Some(p) => FormatDescriptor::from_file(p).with_context(|| format!("reading descriptor {}", p.display())),
            None => Ok(FormatDescriptor::canonical()),
        }
    }

    fn lexicon(&self) -> Result<ConnectiveLexicon> {
        match &self.lexicon {
            Some(p) => ConnectiveLexicon::from_file(p).with_context(|| format!("reading lexicon {}", p.display())),
            None => Ok(ConnectiveLexicon::default()),
        }
    }

    fn tau(&self) -> Result<Option<f64>> {
        match self.tau {
            Some(t) if !(t > 0.0 && t < 1.0) => bail!("--tau must be in (0, 1), got {t}"),
            t => Ok(t),
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Reads a dataset; row errors are printed and make the read fail.
fn read_records(path: &Path, format: &FormatDescriptor) -> Result<Vec<DatasetRecord>> {
    let (records, errors) = read_dataset_lenient(&read_text(path)?, format)?;
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("{}: {e}", path.display());
        }
        bail!("{} bad rows in {}", errors.len(), path.display());
    }
    Ok(records)
}

fn read_tagged(path: &Path, lexicon: &ConnectiveLexicon) -> Result<Vec<TaggedRow>> {
    let (mut rows, errors) = parse_tagged(&read_text(path)?);
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("{}: {e}", path.display());
        }
        bail!("{} bad rows in {}", errors.len(), path.display());
    }
    for row in &mut rows {
        row.sentence = annotate_targets(row.sentence.clone(), lexicon);
    }
    rows.sort_by(|a, b| (a.split, a.sentence.id()).cmp(&(b.split, b.sentence.id())));
    Ok(rows)
}

/// All QAs of each sentence, regardless of source.
fn sets_by_id(records: &[DatasetRecord], source: Source) -> BTreeMap<String, AnnotationSet> {
    let mut out: BTreeMap<String, AnnotationSet> = BTreeMap::new();
    for r in records {
        out.entry(r.sentence_id.clone())
            .or_insert_with(|| AnnotationSet::empty(r.sentence_id.clone(), source.clone()))
            .pairs
            .push(r.qa.clone());
    }
    out
}

fn to_records(set: &AnnotationSet, split: Split, domain: Domain, sentence: &str) -> Vec<DatasetRecord> {
    set.pairs
        .iter()
        .map(|qa| DatasetRecord {
            sentence_id: set.sentence_id.clone(),
            split,
            domain,
            sentence: sentence.to_string(),
            source: set.source.clone(),
            qa: qa.clone(),
        })
        .collect()
}

fn cmd_extract(g: &Global, input: &Path) -> Result<()> {
    let lexicon = g.lexicon()?;
    let rows = read_tagged(input, &lexicon)?;
    let mut out = String::new();
    for row in &rows {
        let s = &row.sentence;
        let segs = segment_sentence(s, &lexicon);
        match g.report_format() {
            ReportFormat::Text => {
                let targets: Vec<String> = s.targets().iter().map(|&t| format!("{t}:{}", s.surface(t))).collect();
                out.push_str(&format!("{}\t{}\t{}\n", s.id(), bracketed(s, &segs), targets.join(" ")));
            }
            ReportFormat::Machine => {
                let segments: Vec<String> = segs.iter().map(|seg| s.span_text(seg.span.clone())).collect();
                let targets: Vec<_> = s.targets().iter().map(|&t| json!({"index": t, "token": s.surface(t)})).collect();
                out.push_str(&format!("{}\n", json!({"id": s.id(), "segments": segments, "targets": targets})));
            }
        }
    }
    g.emit(&out)
}

fn cmd_validate(g: &Global, input: &Path) -> Result<bool> {
    let (records, errors) = read_dataset_lenient(&read_text(input)?, &g.descriptor()?)?;
    for e in &errors {
        eprintln!("{}: {e}", input.display());
    }
    let out = match g.report_format() {
        ReportFormat::Text => format!("records: {}\nerrors: {}\n", records.len(), errors.len()),
        ReportFormat::Machine => format!(
            "{}\n{}\n",
            json!({"metric": "records", "value": records.len()}),
            json!({"metric": "errors", "value": errors.len()})
        ),
    };
    g.emit(&out)?;
    Ok(errors.is_empty())
}

fn cmd_score(g: &Global, pred: &Path, gold: &Path) -> Result<()> {
    let format = g.descriptor()?;
    let pred: Vec<_> = sets_by_id(&read_records(pred, &format)?, Source::System).into_values().collect();
    let gold: Vec<_> = sets_by_id(&read_records(gold, &format)?, Source::Gold).into_values().collect();
    let report = score_corpus(&pred, &gold).context("sentence-id mismatch between prediction and gold")?;
    g.emit(&render(&metrics_records(&report), g.report_format()))
}

fn cmd_stats(g: &Global, input: &Path) -> Result<()> {
    let records = read_records(input, &g.descriptor()?)?;
    g.emit(&render(&stats_records(&dataset_stats(&records)), g.report_format()))
}

fn cmd_iaa(g: &Global, input: &Path) -> Result<()> {
    let records = read_records(input, &g.descriptor()?)?;
    let mut workers: BTreeMap<String, Vec<AnnotationSet>> = BTreeMap::new();
    for ((_, source), set) in annotation_sets(&records) {
        if let Source::Worker(w) = source {
            workers.entry(w).or_default().push(set);
        }
    }
    if workers.len() < 2 {
        bail!("agreement needs at least two workers, found {}", workers.len());
    }
    let report = compute_iaa(&workers)?;
    g.emit(&render(&iaa_records(&report), g.report_format()))
}

fn cmd_merge(g: &Global, input: &Path, verdicts: &Path) -> Result<()> {
    let format = g.descriptor()?;
    let records = read_records(input, &format)?;
    let verdicts = verdicts_from_records(&read_records(verdicts, &format)?);
    let mut meta: BTreeMap<&str, (Split, Domain, &str)> = BTreeMap::new();
    for r in &records {
        meta.entry(r.sentence_id.as_str()).or_insert((r.split, r.domain, r.sentence.as_str()));
    }
    let mut by_sentence: BTreeMap<String, Vec<AnnotationSet>> = BTreeMap::new();
    for ((id, _), set) in annotation_sets(&records) {
        by_sentence.entry(id).or_default().push(set);
    }
    let mut out = Vec::new();
    for (id, sets) in by_sentence {
        let local = verdicts
            .iter()
            .filter(|((sid, _), _)| *sid == id)
            .map(|((_, key), &v)| (key.clone(), v))
            .collect::<std::collections::HashMap<QaKey, _>>();
        let mut merged = AnnotationSet::empty(id.clone(), Source::Gold);
        for set in &sets {
            merged = merge_adjudicated(&merged, &AnnotationSet { sentence_id: id.clone(), ..set.clone() }, &local)
                .with_context(|| format!("sentence {id}"))?;
        }
        let (split, domain, text) = meta[id.as_str()];
        out.extend(to_records(&merged, split, domain, text));
    }
    g.emit(&write_dataset_string(&out))
}

fn cmd_train(g: &Global, gold: &Path, tagged: &Path, iterations: usize, learning_rate: f64) -> Result<()> {
    let lexicon = g.lexicon()?;
    let rows = read_tagged(tagged, &lexicon)?;
    let mut gold = sets_by_id(&read_records(gold, &g.descriptor()?)?, Source::Gold);
    let corpus: Vec<_> = rows
        .into_iter()
        .map(|row| {
            let set =
                gold.remove(row.sentence.id()).unwrap_or_else(|| AnnotationSet::empty(row.sentence.id(), Source::Gold));
            (row.sentence, set)
        })
        .collect();
    for id in gold.keys() {
        eprintln!("warning: gold sentence {id} has no tagged row; skipped");
    }
    let config = TrainConfig {
        iterations,
        learning_rate,
        threshold: g.tau()?.unwrap_or(TrainConfig::default().threshold),
        seed: g.seed,
    };
    let model = train_from_corpus(&corpus, &lexicon, &config)?;
    g.emit(&model.to_json())
}

fn cmd_parse(g: &Global, input: &Path, model: &Path, compat: Option<&Path>) -> Result<()> {
    let lexicon = g.lexicon()?;
    let mut model = PrefixModel::load(model)?;
    if let Some(t) = g.tau()? {
        model.set_threshold(t)?;
    }
    let mut table = CompatTable::default();
    if let Some(p) = compat {
        table.extend(CompatTable::from_file(p)?);
    }
    let rows = read_tagged(input, &lexicon)?;
    let parser = BaselineParser::new(model, lexicon, table);
    let sentences: Vec<_> = rows.iter().map(|r| r.sentence.clone()).collect();
    let sets = parser.parse_all(&sentences);
    let records: Vec<_> = rows
        .iter()
        .zip(&sets)
        .flat_map(|(row, set)| to_records(set, row.split, row.domain, &row.sentence.text()))
        .collect();
    g.emit(&write_dataset_string(&records))
}

fn cmd_convert(g: &Global, input: &Path) -> Result<()> {
    let records = read_records(input, &g.descriptor()?)?;
    g.emit(&write_dataset_string(&records))
}

fn run(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    g.tau()?;
    match &cli.command {
        Command::Extract { input } => cmd_extract(g, input)?,
        Command::Validate { input } => return cmd_validate(g, input),
        Command::Score { pred, gold } => cmd_score(g, pred, gold)?,
        Command::Stats { input } => cmd_stats(g, input)?,
        Command::Iaa { input } => cmd_iaa(g, input)?,
        Command::Merge { input, verdicts } => cmd_merge(g, input, verdicts)?,
        Command::Train { gold, tagged, iterations, learning_rate } => {
            cmd_train(g, gold, tagged, *iterations, *learning_rate)?
        }
        Command::Parse { input, model, compat } => cmd_parse(g, input, model, compat.as_deref())?,
        Command::Convert { input } => cmd_convert(g, input)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
