//! POS-tagged sentence files: `id <TAB> tokens <TAB> tags [<TAB> split <TAB> domain]`,
//! tokens and tags space-separated. Blank lines and `#` lines are skipped.

use std::fmt;

use qadisc::dataset::{Domain, Split};
use qadisc::TaggedSentence;

pub struct TaggedRow {
    pub sentence: TaggedSentence,
    pub split: Split,
    pub domain: Domain,
}

#[derive(Debug)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

pub fn parse_tagged(text: &str) -> (Vec<TaggedRow>, Vec<RowError>) {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line) {
            Ok(row) => rows.push(row),
            Err(message) => errors.push(RowError { line: i + 1, message }),
        }
    }
    (rows, errors)
}

fn parse_line(line: &str) -> Result<TaggedRow, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let id = fields[0].trim();
    if id.is_empty() {
        return Err("empty sentence id".into());
    }
    let words: Vec<&str> = fields.get(1).map(|f| f.split_whitespace().collect()).unwrap_or_default();
    let tags: Vec<&str> = match fields.get(2) {
        Some(f) if !f.trim().is_empty() => f.split_whitespace().collect(),
        _ => return Err(format!("sentence {id}: missing POS column")),
    };
    if words.len() != tags.len() {
        return Err(format!("sentence {id}: {} tokens but {} POS tags", words.len(), tags.len()));
    }
    let sentence = TaggedSentence::from_parts(id, &words, &tags).map_err(|e| format!("sentence {id}: {e}"))?;
    let split = match fields.get(3).map(|s| s.trim()).filter(|s| !s.is_empty()) {
        Some(s) => s.parse().map_err(|e| format!("sentence {id}: {e}"))?,
        None => Split::Test,
    };
    let domain = match fields.get(4).map(|s| s.trim()).filter(|s| !s.is_empty()) {
        Some(s) => s.parse().map_err(|e| format!("sentence {id}: {e}"))?,
        None => Domain::Other,
    };
    Ok(TaggedRow { sentence, split, domain })
}
