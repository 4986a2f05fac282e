//! Shared domain vocabulary: tagged sentences, the closed prefix set,
//! QA pairs, annotation sets and PDTB relations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

/// Coarse part-of-speech classes. External taggers are mapped into this set
/// with [`Pos::from_tag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Verb,
    Adv,
    Noun,
    /// Open-class words that are neither verbs, nouns nor adverbs (adjectives, numerals).
    OtherOpen,
    Punct,
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Verb => "VERB",
            Pos::Adv => "ADV",
            Pos::Noun => "NOUN",
            Pos::OtherOpen => "OTHER-open",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }

    /// Maps a coarse tag, a Universal Dependencies UPOS tag or a Penn Treebank
    /// tag onto the coarse set. Returns `None` for tags it does not recognise.
    pub fn from_tag(tag: &str) -> Option<Pos> {
        let pos = match tag {
            "VERB" | "AUX" | "MD" => Pos::Verb,
            "ADV" | "RB" | "RBR" | "RBS" | "WRB" => Pos::Adv,
            "NOUN" | "PROPN" | "NN" | "NNS" | "NNP" | "NNPS" => Pos::Noun,
            "OTHER-open" | "ADJ" | "NUM" | "JJ" | "JJR" | "JJS" | "CD" | "FW" => Pos::OtherOpen,
            "PUNCT" | "." | "," | ":" | "``" | "''" | "-LRB-" | "-RRB-" | "#" | "$" | "HYPH" | "NFP" => Pos::Punct,
            "OTHER" | "ADP" | "CCONJ" | "SCONJ" | "DET" | "PRON" | "PART" | "INTJ" | "SYM" | "X" | "CC" | "DT"
            | "EX" | "IN" | "LS" | "PDT" | "POS" | "PRP" | "PRP$" | "RP" | "TO" | "UH" | "WDT" | "WP" | "WP$" => {
                Pos::Other
            }
            t if t.starts_with("VB") => Pos::Verb,
            _ => return None,
        };
        Some(pos)
    }

    /// Whether a token with this tag may be a target.
    pub fn is_target_class(self) -> bool {
        matches!(self, Pos::Verb | Pos::Noun | Pos::Adv)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pos::from_tag(s).ok_or_else(|| ModelError::UnknownPos(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub pos: Pos,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: Pos) -> Self {
        Token { surface: surface.into(), pos }
    }
}

/// A sentence as POS-tagged tokens plus the indices of its target words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    id: String,
    tokens: Vec<Token>,
    targets: BTreeSet<usize>,
}

impl TaggedSentence {
    pub fn new(id: impl Into<String>, tokens: Vec<Token>) -> Result<Self, ModelError> {
        if tokens.is_empty() {
            return Err(ModelError::EmptySentence);
        }
        Ok(TaggedSentence { id: id.into(), tokens, targets: BTreeSet::new() })
    }

    /// Builds a sentence from parallel surface and tag lists.
    pub fn from_parts<S: AsRef<str>, T: AsRef<str>>(
        id: impl Into<String>,
        surfaces: &[S],
        tags: &[T],
    ) -> Result<Self, ModelError> {
        if surfaces.len() != tags.len() {
            return Err(ModelError::TagCountMismatch { tokens: surfaces.len(), tags: tags.len() });
        }
        let tokens = surfaces
            .iter()
            .zip(tags)
            .map(|(s, t)| Ok(Token::new(s.as_ref(), t.as_ref().parse()?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        TaggedSentence::new(id, tokens)
    }

    /// Replaces the target set. Every index must be in range and point at a
    /// verb, noun or adverb.
    pub fn with_targets(mut self, targets: impl IntoIterator<Item = usize>) -> Result<Self, ModelError> {
        let targets: BTreeSet<usize> = targets.into_iter().collect();
        for &t in &targets {
            let token = self.tokens.get(t).ok_or(ModelError::TargetOutOfRange(t))?;
            if !token.pos.is_target_class() {
                return Err(ModelError::TargetNotContentWord(t, token.pos));
            }
        }
        self.targets = targets;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surface(&self, i: usize) -> &str {
        &self.tokens[i].surface
    }

    /// Space-joined surface text.
    pub fn text(&self) -> String {
        self.span_text(0..self.tokens.len())
    }

    pub fn span_text(&self, span: std::ops::Range<usize>) -> String {
        self.tokens[span].iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// How a prefix orders the two discourse units between question and answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    /// A single order is dictated by the question.
    Fixed,
    /// The assertion is unchanged when the units swap places.
    Symmetric,
    /// Paired with a partner prefix that expresses the same assertion with the units swapped.
    Reversed,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Fixed => "FIXED",
            Direction::Symmetric => "SYMMETRIC",
            Direction::Reversed => "REVERSED",
        }
    }
}

impl FromStr for Direction {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FIXED" => Ok(Direction::Fixed),
            "SYMMETRIC" => Ok(Direction::Symmetric),
            "REVERSED" => Ok(Direction::Reversed),
            other => Err(ModelError::UnknownDirection(other.to_string())),
        }
    }
}

/// The closed set of question prefixes. Declaration order is the frequency
/// order of the released dataset; `Prefix::ALL` preserves it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prefix {
    InWhatManner,
    WhatIsTheReason,
    WhatIsTheResultOf,
    WhatIsAnExampleOf,
    AfterWhat,
    WhileWhat,
    InWhatCase,
    DespiteWhat,
    WhatIsContrastedWith,
    BeforeWhat,
    SinceWhen,
    WhatIsSimilarTo,
    UntilWhen,
    InsteadOfWhat,
    WhatIsAnAlternativeTo,
    ExceptWhen,
    UnlessWhat,
}

impl Prefix {
    pub const COUNT: usize = 17;

    pub const ALL: [Prefix; Prefix::COUNT] = [
        Prefix::InWhatManner,
        Prefix::WhatIsTheReason,
        Prefix::WhatIsTheResultOf,
        Prefix::WhatIsAnExampleOf,
        Prefix::AfterWhat,
        Prefix::WhileWhat,
        Prefix::InWhatCase,
        Prefix::DespiteWhat,
        Prefix::WhatIsContrastedWith,
        Prefix::BeforeWhat,
        Prefix::SinceWhen,
        Prefix::WhatIsSimilarTo,
        Prefix::UntilWhen,
        Prefix::InsteadOfWhat,
        Prefix::WhatIsAnAlternativeTo,
        Prefix::ExceptWhen,
        Prefix::UnlessWhat,
    ];

    /// Position in [`Prefix::ALL`]; usable as a dense array index.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn surface(self) -> &'static str {
        match self {
            Prefix::InWhatManner => "In what manner",
            Prefix::WhatIsTheReason => "What is the reason",
            Prefix::WhatIsTheResultOf => "What is the result of",
            Prefix::WhatIsAnExampleOf => "What is an example of",
            Prefix::AfterWhat => "After what",
            Prefix::WhileWhat => "While what",
            Prefix::InWhatCase => "In what case",
            Prefix::DespiteWhat => "Despite what",
            Prefix::WhatIsContrastedWith => "What is contrasted with",
            Prefix::BeforeWhat => "Before what",
            Prefix::SinceWhen => "Since when",
            Prefix::WhatIsSimilarTo => "What is similar to",
            Prefix::UntilWhen => "Until when",
            Prefix::InsteadOfWhat => "Instead of what",
            Prefix::WhatIsAnAlternativeTo => "What is an alternative to",
            Prefix::ExceptWhen => "Except when",
            Prefix::UnlessWhat => "Unless what",
        }
    }

    pub fn sense(self) -> &'static str {
        match self {
            Prefix::InWhatManner => "Expansion.Manner",
            Prefix::WhatIsTheReason | Prefix::WhatIsTheResultOf => "Contingency.Cause",
            Prefix::WhatIsAnExampleOf => "Expansion.Level-of-detail",
            Prefix::AfterWhat | Prefix::BeforeWhat | Prefix::SinceWhen | Prefix::UntilWhen => "Temporal.Asynchronous",
            Prefix::WhileWhat => "Temporal.Synchronous",
            Prefix::InWhatCase => "Contingency.Condition",
            Prefix::DespiteWhat => "Comparison.Concession",
            Prefix::WhatIsContrastedWith => "Comparison.Contrast",
            Prefix::WhatIsSimilarTo => "Comparison.Similarity",
            Prefix::InsteadOfWhat => "Expansion.Substitution",
            Prefix::WhatIsAnAlternativeTo => "Expansion.Disjunction",
            Prefix::ExceptWhen => "Expansion.Exception",
            Prefix::UnlessWhat => "Contingency.Negative-condition",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Prefix::WhatIsTheReason
            | Prefix::WhatIsTheResultOf
            | Prefix::AfterWhat
            | Prefix::BeforeWhat
            | Prefix::SinceWhen
            | Prefix::UntilWhen => Direction::Reversed,
            Prefix::WhatIsContrastedWith | Prefix::WhatIsSimilarTo | Prefix::WhileWhat => Direction::Symmetric,
            _ => Direction::Fixed,
        }
    }

    /// The partner prefix, present iff the direction is `Reversed`.
    pub fn reverse_partner(self) -> Option<Prefix> {
        match self {
            Prefix::WhatIsTheReason => Some(Prefix::WhatIsTheResultOf),
            Prefix::WhatIsTheResultOf => Some(Prefix::WhatIsTheReason),
            Prefix::AfterWhat => Some(Prefix::BeforeWhat),
            Prefix::BeforeWhat => Some(Prefix::AfterWhat),
            Prefix::SinceWhen => Some(Prefix::UntilWhen),
            Prefix::UntilWhen => Some(Prefix::SinceWhen),
            _ => None,
        }
    }

    /// Label shared by reversed partners; every other prefix is its own label.
    pub fn canonical(self) -> &'static str {
        match self {
            Prefix::WhatIsTheReason | Prefix::WhatIsTheResultOf => "What is the reason / What is the result of",
            Prefix::AfterWhat | Prefix::BeforeWhat => "After what / Before what",
            Prefix::SinceWhen | Prefix::UntilWhen => "Since when / Until when",
            p => p.surface(),
        }
    }

    /// Exact, case-insensitive surface lookup.
    pub fn from_surface(s: &str) -> Option<Prefix> {
        let s = s.trim();
        Prefix::ALL.iter().copied().find(|p| p.surface().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.surface())
    }
}

impl FromStr for Prefix {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prefix::from_surface(s).ok_or_else(|| ModelError::UnknownPrefix(s.to_string()))
    }
}

impl Serialize for Prefix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.surface())
    }
}

impl<'de> Deserialize<'de> for Prefix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Adjudication verdict attached to a QA pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub enum Verdict {
    #[default]
    Unreviewed,
    Correct,
    NotCorrect,
    CorrectNotGrammatical,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Unreviewed => "UNREVIEWED",
            Verdict::Correct => "CORRECT",
            Verdict::NotCorrect => "NOT_CORRECT",
            Verdict::CorrectNotGrammatical => "CORRECT_NOT_GRAMMATICAL",
        }
    }

    pub fn is_kept(self) -> bool {
        matches!(self, Verdict::Correct | Verdict::CorrectNotGrammatical)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace([' ', '-'], "_").as_str() {
            "" | "UNREVIEWED" => Ok(Verdict::Unreviewed),
            "CORRECT" => Ok(Verdict::Correct),
            "NOT_CORRECT" => Ok(Verdict::NotCorrect),
            "CORRECT_NOT_GRAMMATICAL" | "CORRECT_BUT_NOT_GRAMMATICAL" => Ok(Verdict::CorrectNotGrammatical),
            _ => Err(ModelError::UnknownVerdict(s.to_string())),
        }
    }
}

/// One question-answer pair. The question is stored decomposed; the full
/// text is recovered with [`QaPair::question_text`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QaPair {
    pub prefix: Prefix,
    pub auxiliary: Option<String>,
    /// Question text after the prefix and auxiliary, including the final `?`.
    pub question_body: String,
    pub answer: String,
    pub source_targets: Option<(usize, usize)>,
    pub grammaticality: Verdict,
}

impl QaPair {
    pub fn new(
        prefix: Prefix,
        auxiliary: Option<String>,
        question_body: impl Into<String>,
        answer: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let qa = QaPair {
            prefix,
            auxiliary,
            question_body: question_body.into(),
            answer: answer.into(),
            source_targets: None,
            grammaticality: Verdict::Unreviewed,
        };
        qa.validate()?;
        Ok(qa)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.question_body.trim().is_empty() {
            return Err(ModelError::EmptyQuestionBody);
        }
        if self.answer.trim().is_empty() {
            return Err(ModelError::EmptyAnswer);
        }
        Ok(())
    }

    /// Checks `source_targets` against the owning sentence.
    pub fn validate_against(&self, sentence: &TaggedSentence) -> Result<(), ModelError> {
        self.validate()?;
        if let Some((a, b)) = self.source_targets {
            for t in [a, b] {
                if !sentence.targets().contains(&t) {
                    return Err(ModelError::NotATarget(t));
                }
            }
        }
        Ok(())
    }

    pub fn question_text(&self) -> String {
        match &self.auxiliary {
            Some(aux) => format!("{} {} {}", self.prefix.surface(), aux, self.question_body),
            None => format!("{} {}", self.prefix.surface(), self.question_body),
        }
    }
}

/// Who produced an annotation set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Worker(String),
    Gold,
    System,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Worker(id) => f.write_str(id),
            Source::Gold => f.write_str("GOLD"),
            Source::System => f.write_str("SYSTEM"),
        }
    }
}

impl FromStr for Source {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "" => Err(ModelError::EmptySource),
            "GOLD" => Ok(Source::Gold),
            "SYSTEM" => Ok(Source::System),
            id => Ok(Source::Worker(id.to_string())),
        }
    }
}

/// All QA pairs one source produced for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    pub sentence_id: String,
    pub source: Source,
    pub pairs: Vec<QaPair>,
}

impl AnnotationSet {
    pub fn new(sentence_id: impl Into<String>, source: Source, pairs: Vec<QaPair>) -> Self {
        AnnotationSet { sentence_id: sentence_id.into(), source, pairs }
    }

    pub fn empty(sentence_id: impl Into<String>, source: Source) -> Self {
        AnnotationSet::new(sentence_id, source, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A PDTB relation as plain argument text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdtbRelation {
    pub arg1: String,
    pub arg2: String,
    pub connective: Option<String>,
    pub senses: Vec<String>,
}

impl PdtbRelation {
    pub fn new(
        arg1: impl Into<String>,
        arg2: impl Into<String>,
        connective: Option<String>,
        senses: Vec<String>,
    ) -> Result<Self, ModelError> {
        let rel = PdtbRelation { arg1: arg1.into(), arg2: arg2.into(), connective, senses };
        if rel.arg1.trim().is_empty() || rel.arg2.trim().is_empty() {
            return Err(ModelError::EmptyArgument);
        }
        if rel.senses.is_empty() {
            return Err(ModelError::NoSenses);
        }
        Ok(rel)
    }
}
