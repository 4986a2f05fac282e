//! Tabular annotation files, adjudication merging and corpus statistics.
//!
//! The canonical file is UTF-8, tab separated, one QA per row, with the
//! header `sentence_id split domain sentence source question answer verdict`.
//! Backslash, tab, newline and carriage return inside fields are written as
//! `\\`, `\t`, `\n` and `\r`. Other layouts are read through a
//! [`FormatDescriptor`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::align::tokenize;
use crate::error::{AlignError, DatasetError, GrammarError};
use crate::grammar::parse_question;
use crate::model::{AnnotationSet, Prefix, QaPair, Source, Verdict};

pub const CANONICAL_COLUMNS: [&str; 8] =
    ["sentence_id", "split", "domain", "sentence", "source", "question", "answer", "verdict"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "development" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Wikinews,
    Wikipedia,
    Other,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Wikinews => "wikinews",
            Domain::Wikipedia => "wikipedia",
            Domain::Other => "other",
        }
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wikinews" => Ok(Domain::Wikinews),
            "wikipedia" => Ok(Domain::Wikipedia),
            "other" => Ok(Domain::Other),
            other => Err(format!("unknown domain `{other}`")),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRecord {
    pub sentence_id: String,
    pub split: Split,
    pub domain: Domain,
    pub sentence: String,
    pub source: Source,
    pub qa: QaPair,
}

pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Where a logical field comes from in a foreign file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    /// 1-based position.
    Index(usize),
}

/// Column mapping for reading non-canonical tabular files.
///
/// Written as `key = value` lines (`#` comments allowed):
///
/// ```text
/// delimiter = tab          # tab, comma, or a single character
/// header = true
/// escape = backslash       # backslash or none
/// quoting = false
/// column.question = question_text
/// column.answer = 7        # 1-based index
/// default.split = dev
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatDescriptor {
    pub delimiter: u8,
    pub header: bool,
    pub backslash_escapes: bool,
    pub quoting: bool,
    pub columns: BTreeMap<String, ColumnRef>,
    pub defaults: BTreeMap<String, String>,
}

impl Default for FormatDescriptor {
    fn default() -> Self {
        FormatDescriptor::canonical()
    }
}

impl FormatDescriptor {
    pub fn canonical() -> Self {
        FormatDescriptor {
            delimiter: b'\t',
            header: true,
            backslash_escapes: true,
            quoting: false,
            columns: CANONICAL_COLUMNS.iter().map(|c| (c.to_string(), ColumnRef::Name(c.to_string()))).collect(),
            defaults: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let mut d = FormatDescriptor::canonical();
        let mut explicit_columns = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| DatasetError::Descriptor { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let flag = |v: &str| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(err(format!("`{v}` is not a boolean"))),
            };
            match key {
                "delimiter" => {
                    d.delimiter = match value {
                        "tab" | "\\t" => b'\t',
                        "comma" => b',',
                        v if v.len() == 1 => v.as_bytes()[0],
                        v => return Err(err(format!("bad delimiter `{v}`"))),
                    }
                }
                "header" => d.header = flag(value)?,
                "quoting" => d.quoting = flag(value)?,
                "escape" => {
                    d.backslash_escapes = match value {
                        "backslash" => true,
                        "none" => false,
                        v => return Err(err(format!("bad escape mode `{v}`"))),
                    }
                }
                k => {
                    if let Some(field) = k.strip_prefix("column.") {
                        check_field(field).map_err(err)?;
                        let col = match value.parse::<usize>() {
                            Ok(0) => return Err(err("column indices are 1-based".into())),
                            Ok(n) => ColumnRef::Index(n),
                            Err(_) => ColumnRef::Name(value.to_string()),
                        };
                        explicit_columns.insert(field.to_string(), col);
                    } else if let Some(field) = k.strip_prefix("default.") {
                        check_field(field).map_err(err)?;
                        d.defaults.insert(field.to_string(), value.to_string());
                    } else {
                        return Err(err(format!("unknown key `{k}`")));
                    }
                }
            }
        }
        if !explicit_columns.is_empty() {
            d.columns = explicit_columns;
        }
        for required in ["sentence_id", "question", "answer"] {
            if !d.columns.contains_key(required) {
                return Err(DatasetError::Descriptor { line: 0, message: format!("no column for `{required}`") });
            }
        }
        Ok(d)
    }

    pub fn from_file(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
        FormatDescriptor::parse(&text)
    }
}

fn check_field(field: &str) -> Result<(), String> {
    if CANONICAL_COLUMNS.contains(&field) {
        Ok(())
    } else {
        Err(format!("unknown field `{field}`"))
    }
}

/// Reads a whole file, failing on the first bad row.
pub fn read_dataset(path: &Path, format: &FormatDescriptor) -> Result<Vec<DatasetRecord>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    read_dataset_str(&text, format)
}

pub fn read_dataset_str(text: &str, format: &FormatDescriptor) -> Result<Vec<DatasetRecord>, DatasetError> {
    let (records, mut errors) = read_dataset_lenient(text, format)?;
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(errors.remove(0))
    }
}

/// Reads every valid row and collects row errors instead of stopping.
/// Only an unusable header is fatal.
pub fn read_dataset_lenient(
    text: &str,
    format: &FormatDescriptor,
) -> Result<(Vec<DatasetRecord>, Vec<DatasetError>), DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(false)
        .quoting(format.quoting)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut rows = reader.records();
    let mut positions: BTreeMap<String, usize> = BTreeMap::new();
    if format.header {
        let header = match rows.next() {
            None => return Ok((Vec::new(), Vec::new())),
            Some(h) => h.map_err(|e| DatasetError::Malformed { row: 1, message: e.to_string() })?,
        };
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        for (field, col) in &format.columns {
            let idx = match col {
                ColumnRef::Index(n) => n - 1,
                ColumnRef::Name(name) => names.iter().position(|h| h == name).ok_or_else(|| {
                    DatasetError::Malformed { row: 1, message: format!("header has no column `{name}`") }
                })?,
            };
            positions.insert(field.clone(), idx);
        }
    } else {
        for (field, col) in &format.columns {
            match col {
                ColumnRef::Index(n) => positions.insert(field.clone(), n - 1),
                ColumnRef::Name(name) => {
                    return Err(DatasetError::Descriptor {
                        line: 0,
                        message: format!("column `{name}` referenced by name but the file has no header"),
                    })
                }
            };
        }
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                errors.push(DatasetError::Malformed { row: line, message: e.to_string() });
                continue;
            }
        };
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        match parse_row(&row, line, &positions, format) {
            Ok(r) => records.push(r),
            Err(e) => errors.push(e),
        }
    }
    Ok((records, errors))
}

fn parse_row(
    row: &csv::StringRecord,
    line: usize,
    positions: &BTreeMap<String, usize>,
    format: &FormatDescriptor,
) -> Result<DatasetRecord, DatasetError> {
    let malformed = |message: String| DatasetError::Malformed { row: line, message };
    let field = |name: &str| -> Result<String, DatasetError> {
        if let Some(&idx) = positions.get(name) {
            let raw = row.get(idx).ok_or_else(|| malformed(format!("missing column for `{name}`")))?;
            let value = if format.backslash_escapes { unescape_field(raw) } else { raw.to_string() };
            return Ok(value);
        }
        format.defaults.get(name).cloned().ok_or_else(|| malformed(format!("no column or default for `{name}`")))
    };
    let optional = |name: &str, fallback: &str| -> Result<String, DatasetError> {
        if positions.contains_key(name) || format.defaults.contains_key(name) {
            field(name)
        } else {
            Ok(fallback.to_string())
        }
    };

    let sentence_id = field("sentence_id")?;
    if sentence_id.trim().is_empty() {
        return Err(malformed("empty sentence_id".into()));
    }
    let split: Split = optional("split", "train")?.parse().map_err(malformed)?;
    let domain: Domain = optional("domain", "other")?.parse().map_err(malformed)?;
    let sentence = optional("sentence", "")?;
    let source: Source = optional("source", "GOLD")?.parse().map_err(|e| malformed(format!("{e}")))?;
    let verdict: Verdict = optional("verdict", "UNREVIEWED")?.parse().map_err(|e| malformed(format!("{e}")))?;
    let question = field("question")?;
    let answer = field("answer")?;

    let parsed = parse_question(&question).map_err(|e| match e {
        GrammarError::NoPrefixMatch(_) => DatasetError::UnknownPrefix { row: line, question: question.clone() },
        other => malformed(other.to_string()),
    })?;
    let mut qa =
        QaPair::new(parsed.prefix, parsed.auxiliary, parsed.body, answer).map_err(|e| malformed(e.to_string()))?;
    qa.grammaticality = verdict;
    Ok(DatasetRecord { sentence_id, split, domain, sentence, source, qa })
}

/// Records in canonical file order: by split, then sentence id, otherwise stable.
pub fn canonical_order(records: &[DatasetRecord]) -> Vec<DatasetRecord> {
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| (a.split, &a.sentence_id).cmp(&(b.split, &b.sentence_id)));
    sorted
}

pub fn write_dataset_string(records: &[DatasetRecord]) -> String {
    let mut out = CANONICAL_COLUMNS.join("\t");
    out.push('\n');
    for r in canonical_order(records) {
        let fields = [
            r.sentence_id.clone(),
            r.split.to_string(),
            r.domain.to_string(),
            r.sentence.clone(),
            r.source.to_string(),
            r.qa.question_text(),
            r.qa.answer.clone(),
            r.qa.grammaticality.to_string(),
        ];
        let line: Vec<String> = fields.iter().map(|f| escape_field(f)).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}

pub fn write_dataset(records: &[DatasetRecord], path: &Path) -> Result<(), DatasetError> {
    let io_err = |source| DatasetError::Io { path: path.to_path_buf(), source };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(write_dataset_string(records).as_bytes()).map_err(io_err)
}

/// Groups records into annotation sets keyed by (sentence id, source).
pub fn annotation_sets(records: &[DatasetRecord]) -> BTreeMap<(String, Source), AnnotationSet> {
    let mut out: BTreeMap<(String, Source), AnnotationSet> = BTreeMap::new();
    for r in records {
        out.entry((r.sentence_id.clone(), r.source.clone()))
            .or_insert_with(|| AnnotationSet::empty(r.sentence_id.clone(), r.source.clone()))
            .pairs
            .push(r.qa.clone());
    }
    out
}

/// One annotation set per sentence, ignoring the source column.
pub fn sets_by_sentence(records: &[DatasetRecord], source: Source) -> Vec<AnnotationSet> {
    let mut out: BTreeMap<&str, AnnotationSet> = BTreeMap::new();
    for r in records {
        out.entry(r.sentence_id.as_str())
            .or_insert_with(|| AnnotationSet::empty(r.sentence_id.clone(), source.clone()))
            .pairs
            .push(r.qa.clone());
    }
    out.into_values().collect()
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Surface identity of a QA: whitespace-normalised full question and answer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QaKey {
    pub question: String,
    pub answer: String,
}

impl QaKey {
    pub fn of(qa: &QaPair) -> Self {
        QaKey { question: normalize_ws(&qa.question_text()), answer: normalize_ws(&qa.answer) }
    }
}

/// Verdicts keyed by QA identity, taken from the verdict column of adjudicated rows.
pub fn verdicts_from_records(records: &[DatasetRecord]) -> HashMap<(String, QaKey), Verdict> {
    records.iter().map(|r| ((r.sentence_id.clone(), QaKey::of(&r.qa)), r.qa.grammaticality)).collect()
}

/// Merges two workers' sets under an adjudicator's verdicts.
///
/// QAs judged `NOT_CORRECT` are dropped; exact duplicates keep their first
/// occurrence; the verdict is stored on each kept QA so ungrammatical ones
/// stay flagged.
pub fn merge_adjudicated(
    a: &AnnotationSet,
    b: &AnnotationSet,
    verdicts: &HashMap<QaKey, Verdict>,
) -> Result<AnnotationSet, DatasetError> {
    if a.sentence_id != b.sentence_id {
        return Err(AlignError::SentenceMismatch(a.sentence_id.clone(), b.sentence_id.clone()).into());
    }
    let mut seen = BTreeSet::new();
    let mut merged = Vec::new();
    for qa in a.pairs.iter().chain(&b.pairs) {
        let key = QaKey::of(qa);
        let verdict = *verdicts.get(&key).ok_or_else(|| DatasetError::MissingVerdict(key.question.clone()))?;
        if !verdict.is_kept() || !seen.insert(key) {
            continue;
        }
        let mut kept = qa.clone();
        kept.grammaticality = verdict;
        merged.push(kept);
    }
    Ok(AnnotationSet::new(a.sentence_id.clone(), Source::Gold, merged))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub sentences_with_qa: usize,
    pub total_qas: usize,
    /// count and proportion for every catalog prefix, catalog order
    pub per_prefix: BTreeMap<Prefix, (usize, f64)>,
    pub avg_question_tokens: f64,
    pub avg_answer_tokens: f64,
    /// (sentences, QAs) per domain and split
    pub per_partition: BTreeMap<(Domain, Split), (usize, usize)>,
}

pub fn dataset_stats(records: &[DatasetRecord]) -> StatsReport {
    let total = records.len();
    let sentences: BTreeSet<&str> = records.iter().map(|r| r.sentence_id.as_str()).collect();
    let mut counts = [0usize; Prefix::COUNT];
    let (mut q_tokens, mut a_tokens) = (0usize, 0usize);
    let mut partition_sents: BTreeMap<(Domain, Split), BTreeSet<&str>> = BTreeMap::new();
    let mut partition_qas: BTreeMap<(Domain, Split), usize> = BTreeMap::new();
    for r in records {
        counts[r.qa.prefix.index()] += 1;
        q_tokens += tokenize(&r.qa.question_text()).len();
        a_tokens += tokenize(&r.qa.answer).len();
        partition_sents.entry((r.domain, r.split)).or_default().insert(&r.sentence_id);
        *partition_qas.entry((r.domain, r.split)).or_default() += 1;
    }
    let per_prefix = Prefix::ALL
        .iter()
        .map(|&p| {
            let n = counts[p.index()];
            let prop = if total == 0 { 0.0 } else { n as f64 / total as f64 };
            (p, (n, prop))
        })
        .collect();
    let avg = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
    StatsReport {
        sentences_with_qa: sentences.len(),
        total_qas: total,
        per_prefix,
        avg_question_tokens: avg(q_tokens),
        avg_answer_tokens: avg(a_tokens),
        per_partition: partition_sents.into_iter().map(|(k, s)| (k, (s.len(), partition_qas[&k]))).collect(),
    }
}
