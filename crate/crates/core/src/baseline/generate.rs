//! Rule-based question and answer generation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::ops::Range;
use std::path::Path;

use super::{AnswerGenerator, AnswerSpan, QuestionGenerator, SentenceContext};
use crate::align::TokenBag;
use crate::error::{BaselineError, LexiconError};
use crate::grammar::{compose_question, is_auxiliary, ComposedQuestion};
use crate::model::{Pos, Prefix};

const DEFAULT_COMPAT: &str = include_str!("../../data/compat.txt");

/// Which prefixes a segment-initial connective signals. A connective may
/// appear on several lines ("when" is both temporal and conditional).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatTable {
    entries: BTreeMap<String, BTreeSet<Prefix>>,
}

impl Default for CompatTable {
    fn default() -> Self {
        CompatTable::parse(DEFAULT_COMPAT).expect("builtin compatibility table parses")
    }
}

impl CompatTable {
    /// `connective | prefix surface` per line; `#` comments.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| LexiconError::Table { line: i + 1, message };
            let (conn, prefix) = line.split_once('|').ok_or_else(|| err("expected `connective | prefix`".into()))?;
            let prefix =
                Prefix::from_surface(prefix).ok_or_else(|| err(format!("unknown prefix `{}`", prefix.trim())))?;
            let conn = conn.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            if conn.is_empty() {
                return Err(err("empty connective".into()));
            }
            entries.entry(conn).or_insert_with(BTreeSet::new).insert(prefix);
        }
        Ok(CompatTable { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })?;
        CompatTable::parse(&text)
    }

    /// Adds the entries of another table.
    pub fn extend(&mut self, other: CompatTable) {
        for (conn, prefixes) in other.entries {
            self.entries.entry(conn).or_default().extend(prefixes);
        }
    }

    pub fn get(&self, connective: &str) -> Option<&BTreeSet<Prefix>> {
        self.entries.get(&connective.to_lowercase())
    }

    /// Whether the connective signals the same sense as `prefix`.
    pub fn compatible(&self, connective: &str, prefix: Prefix) -> bool {
        self.get(connective).is_some_and(|ps| ps.iter().any(|p| p.sense() == prefix.sense()))
    }
}

/// Token range of a segment without its opening connective and trailing punctuation.
fn content_range(ctx: &SentenceContext, seg: usize, strip_connective: bool) -> Range<usize> {
    let s = &ctx.segments[seg];
    let tokens = ctx.sentence.tokens();
    let start = if strip_connective { s.span.start + s.connective_len } else { s.span.start };
    let mut end = s.span.end;
    while end > start && tokens[end - 1].pos == Pos::Punct {
        end -= 1;
    }
    start..end
}

fn do_support(verb: &str) -> &'static str {
    let v = verb.to_lowercase();
    if v.ends_with("ed") {
        "did"
    } else if v.ends_with('s') && !v.ends_with("ss") {
        "does"
    } else {
        "do"
    }
}

/// Copies the target's segment as the question body.
///
/// An auxiliary already in the clause before the target is moved in front
/// of the body ("it could hit Hawaii" -> "could it hit Hawaii"); a bare
/// verb target gets do-support chosen from its ending.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleQuestionGenerator;

impl RuleQuestionGenerator {
    fn one(&self, ctx: &SentenceContext, prefix: Prefix, target: usize) -> Result<ComposedQuestion, BaselineError> {
        let seg = ctx.segment_of(target).ok_or(BaselineError::NoTargets)?;
        let range = content_range(ctx, seg, true);
        let tokens = ctx.sentence.tokens();
        let target_is_verb = tokens[target].pos == Pos::Verb;

        let moved = range
            .clone()
            .take_while(|&k| k <= target)
            .find(|&k| tokens[k].pos == Pos::Verb && is_auxiliary(&tokens[k].surface));
        let mut body: Vec<usize> = range.clone().filter(|&k| Some(k) != moved).collect();
        let mut auxiliary = match moved {
            Some(k) => Some(tokens[k].surface.to_lowercase()),
            None if target_is_verb => Some(do_support(&tokens[target].surface).to_string()),
            None => None,
        };
        if body.is_empty() {
            body = range.collect();
            auxiliary = None;
        }

        let mut words: Vec<String> = body.iter().map(|&k| tokens[k].surface.clone()).collect();
        if body.first() == Some(&0) && tokens[0].pos != Pos::Noun && words[0] != "I" {
            words[0] = lowercase_first(&words[0]);
        }
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        Ok(compose_question(prefix, auxiliary.as_deref(), &refs, None)?)
    }
}

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl QuestionGenerator for RuleQuestionGenerator {
    fn generate(
        &self,
        ctx: &SentenceContext,
        prefix: Prefix,
        targets: &[usize],
    ) -> Result<Vec<(usize, ComposedQuestion)>, BaselineError> {
        if targets.is_empty() {
            return Err(BaselineError::NoTargets);
        }
        targets.iter().map(|&t| Ok((t, self.one(ctx, prefix, t)?))).collect()
    }
}

/// Picks the segment that best answers a question: a connective compatible
/// with the prefix sense earns 1, closeness earns 1/distance. Ties go to
/// the nearest segment on the left.
#[derive(Debug, Clone, Default)]
pub struct RuleAnswerGenerator {
    pub compat: CompatTable,
}

impl RuleAnswerGenerator {
    pub fn new(compat: CompatTable) -> Self {
        RuleAnswerGenerator { compat }
    }

    /// Segment the question body was copied from: the one sharing most tokens.
    fn home_segment(&self, ctx: &SentenceContext, question: &ComposedQuestion) -> usize {
        let body = TokenBag::from_text(&question.body);
        let mut best = (0, 0);
        for (k, _) in ctx.segments.iter().enumerate() {
            let text = ctx.sentence.span_text(content_range(ctx, k, false));
            let shared = TokenBag::from_text(&text).overlap(&body).intersection;
            if shared > best.1 {
                best = (k, shared);
            }
        }
        best.0
    }
}

impl AnswerGenerator for RuleAnswerGenerator {
    fn answer(&self, ctx: &SentenceContext, question: &ComposedQuestion) -> Result<AnswerSpan, BaselineError> {
        if ctx.segments.len() < 2 {
            return Err(BaselineError::NoCandidate);
        }
        let home = self.home_segment(ctx, question);
        let mut best: Option<(f64, usize, bool, usize)> = None;
        for (k, seg) in ctx.segments.iter().enumerate() {
            if k == home || content_range(ctx, k, false).is_empty() {
                continue;
            }
            let distance = k.abs_diff(home);
            let bonus = match seg.connective(&ctx.sentence) {
                Some(c) if self.compat.compatible(&c, question.prefix) => 1.0,
                _ => 0.0,
            };
            let score = bonus + 1.0 / distance as f64;
            let left = k < home;
            let better = match best {
                None => true,
                Some((s, d, l, _)) => score > s || (score == s && (distance < d || (distance == d && left && !l))),
            };
            if better {
                best = Some((score, distance, left, k));
            }
        }
        let (_, _, _, k) = best.ok_or(BaselineError::NoCandidate)?;
        let span = content_range(ctx, k, false);
        Ok(AnswerSpan { text: ctx.sentence.span_text(span.clone()), span: Some(span) })
    }
}

/// Questions for each target, one per target in the given order.
pub fn generate_question(
    ctx: &SentenceContext,
    prefix: Prefix,
    targets: &[usize],
) -> Result<Vec<ComposedQuestion>, BaselineError> {
    Ok(RuleQuestionGenerator.generate(ctx, prefix, targets)?.into_iter().map(|(_, q)| q).collect())
}

pub fn generate_answer(
    ctx: &SentenceContext,
    question: &ComposedQuestion,
    compat: &CompatTable,
) -> Result<String, BaselineError> {
    Ok(RuleAnswerGenerator::new(compat.clone()).answer(ctx, question)?.text)
}
