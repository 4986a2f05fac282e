//! Sentence segmentation and target-word selection.
//!
//! A sentence is cut at `,` `;` `:` and then immediately before every
//! connective from the lexicon. Each segment contributes the last verb of
//! every consecutive verb run as a target. A verbless segment that opens
//! with a connective contributes its first noun (or, failing that, its
//! first adverb).

use std::collections::BTreeSet;
use std::fs;
use std::ops::Range;
use std::path::Path;

use crate::error::LexiconError;
use crate::model::{Pos, TaggedSentence};

const DEFAULT_LEXICON: &str = include_str!("../data/connectives.txt");

/// Tokens that split a sentence before connective matching.
pub const SPLIT_PUNCTUATION: [&str; 3] = [",", ";", ":"];

/// Reporting verbs that never become targets.
pub const EXCLUDED_VERBS: [&str; 3] = ["said", "according", "spoke"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectiveLexicon {
    connectives: BTreeSet<String>,
    excluded: BTreeSet<String>,
    /// Tokenised connectives, longest first.
    patterns: Vec<Vec<String>>,
}

impl Default for ConnectiveLexicon {
    fn default() -> Self {
        ConnectiveLexicon::parse(DEFAULT_LEXICON)
    }
}

impl ConnectiveLexicon {
    /// Parses the lexicon file format: one connective per line, `#` comments,
    /// `!word` lines add exclusions. Exclusions are removed after all lines
    /// are read.
    pub fn parse(text: &str) -> Self {
        let mut connectives = BTreeSet::new();
        let mut excluded = BTreeSet::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.strip_prefix('!') {
                Some(ex) => {
                    excluded.insert(normalize(ex));
                }
                None => {
                    connectives.insert(normalize(line));
                }
            }
        }
        ConnectiveLexicon::from_sets(connectives, excluded)
    }

    pub fn from_sets(connectives: BTreeSet<String>, excluded: BTreeSet<String>) -> Self {
        let connectives: BTreeSet<String> =
            connectives.into_iter().filter(|c| !c.is_empty() && !excluded.contains(c)).collect();
        let mut patterns: Vec<Vec<String>> =
            connectives.iter().map(|c| c.split(' ').map(str::to_string).collect()).collect();
        patterns.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        ConnectiveLexicon { connectives, excluded, patterns }
    }

    pub fn from_file(path: &Path) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })?;
        Ok(ConnectiveLexicon::parse(&text))
    }

    pub fn connectives(&self) -> &BTreeSet<String> {
        &self.connectives
    }

    pub fn excluded(&self) -> &BTreeSet<String> {
        &self.excluded
    }

    pub fn contains(&self, connective: &str) -> bool {
        self.connectives.contains(&normalize(connective))
    }

    /// Length in tokens of the longest connective starting at `words[0]`.
    pub fn match_len<S: AsRef<str>>(&self, words: &[S]) -> Option<usize> {
        self.patterns
            .iter()
            .find(|pat| {
                pat.len() <= words.len() && pat.iter().zip(words).all(|(p, w)| p.eq_ignore_ascii_case(w.as_ref()))
            })
            .map(Vec::len)
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Half-open token range into the sentence.
    pub span: Range<usize>,
    pub starts_with_connective: bool,
    /// Number of leading tokens that form the connective (0 if none).
    pub connective_len: usize,
}

impl Segment {
    pub fn contains(&self, index: usize) -> bool {
        self.span.contains(&index)
    }

    /// The connective opening this segment, lowercased.
    pub fn connective(&self, sentence: &TaggedSentence) -> Option<String> {
        (self.connective_len > 0)
            .then(|| sentence.span_text(self.span.start..self.span.start + self.connective_len).to_lowercase())
    }
}

fn is_split_punct(surface: &str) -> bool {
    SPLIT_PUNCTUATION.contains(&surface)
}

pub fn segment_sentence(sentence: &TaggedSentence, lexicon: &ConnectiveLexicon) -> Vec<Segment> {
    let tokens = sentence.tokens();
    let words: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
    let mut segments = Vec::new();
    let mut start = 0;
    for i in 0..=words.len() {
        if i == words.len() || is_split_punct(words[i]) {
            split_on_connectives(&words, start..i, lexicon, &mut segments);
            start = i + 1;
        }
    }
    segments
}

fn split_on_connectives(words: &[&str], span: Range<usize>, lexicon: &ConnectiveLexicon, out: &mut Vec<Segment>) {
    if span.is_empty() {
        return;
    }
    let mut seg_start = span.start;
    let mut seg_conn = 0;
    let mut j = span.start;
    while j < span.end {
        match lexicon.match_len(&words[j..span.end]) {
            Some(len) => {
                if j > seg_start {
                    out.push(Segment {
                        span: seg_start..j,
                        starts_with_connective: seg_conn > 0,
                        connective_len: seg_conn,
                    });
                    seg_start = j;
                }
                seg_conn = len;
                j += len;
            }
            None => j += 1,
        }
    }
    out.push(Segment { span: seg_start..span.end, starts_with_connective: seg_conn > 0, connective_len: seg_conn });
}

fn is_excluded_verb(surface: &str) -> bool {
    EXCLUDED_VERBS.iter().any(|v| v.eq_ignore_ascii_case(surface))
}

/// Tokens that join two verbs into one run: adverbs ("is also studying")
/// and the infinitive marker ("try to replace").
fn is_bridge(sentence: &TaggedSentence, i: usize) -> bool {
    let t = &sentence.tokens()[i];
    t.pos == Pos::Adv || t.surface.eq_ignore_ascii_case("to")
}

/// Targets contributed by one segment, in token order.
pub fn segment_targets(sentence: &TaggedSentence, segment: &Segment) -> Vec<usize> {
    let tokens = sentence.tokens();
    let span = segment.span.clone();
    let mut targets = Vec::new();
    let mut has_verb = false;
    let mut i = span.start;
    while i < span.end {
        if tokens[i].pos != Pos::Verb {
            i += 1;
            continue;
        }
        has_verb = true;
        let mut last = i;
        loop {
            if last + 1 < span.end && tokens[last + 1].pos == Pos::Verb {
                last += 1;
            } else if last + 2 < span.end && is_bridge(sentence, last + 1) && tokens[last + 2].pos == Pos::Verb {
                last += 2;
            } else {
                break;
            }
        }
        if !is_excluded_verb(&tokens[last].surface) {
            targets.push(last);
        }
        i = last + 1;
    }
    if !has_verb && segment.starts_with_connective {
        let body = span.start + segment.connective_len..span.end;
        let pick = body
            .clone()
            .find(|&k| tokens[k].pos == Pos::Noun)
            .or_else(|| body.clone().find(|&k| tokens[k].pos == Pos::Adv));
        targets.extend(pick);
    }
    targets
}

pub fn extract_targets(sentence: &TaggedSentence, lexicon: &ConnectiveLexicon) -> BTreeSet<usize> {
    segment_sentence(sentence, lexicon).iter().flat_map(|seg| segment_targets(sentence, seg)).collect()
}

/// Returns the sentence with its targets field set by [`extract_targets`].
pub fn annotate_targets(sentence: TaggedSentence, lexicon: &ConnectiveLexicon) -> TaggedSentence {
    let targets = extract_targets(&sentence, lexicon);
    sentence.with_targets(targets).expect("extracted targets are verbs, nouns or adverbs")
}

fn attaches_left(surface: &str) -> bool {
    !surface.is_empty() && surface.chars().all(|c| matches!(c, ',' | ';' | ':' | '.' | '?' | '!'))
}

/// Renders segments as `[..] [..]`, each carrying the splitting punctuation
/// that follows it. Punctuation is written without a leading space.
pub fn bracketed(sentence: &TaggedSentence, segments: &[Segment]) -> String {
    let tokens = sentence.tokens();
    let mut parts = Vec::with_capacity(segments.len());
    for (k, seg) in segments.iter().enumerate() {
        let end = segments.get(k + 1).map_or(tokens.len(), |next| next.span.start);
        let mut text = String::new();
        for t in &tokens[seg.span.start..end] {
            if !text.is_empty() && !attaches_left(&t.surface) {
                text.push(' ');
            }
            text.push_str(&t.surface);
        }
        parts.push(format!("[{text}]"));
    }
    parts.join(" ")
}
