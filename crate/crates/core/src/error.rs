use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::Pos;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("{tokens} tokens but {tags} POS tags")]
    TagCountMismatch { tokens: usize, tags: usize },
    #[error("unknown POS tag `{0}`")]
    UnknownPos(String),
    #[error("target index {0} is out of range")]
    TargetOutOfRange(usize),
    #[error("target index {0} points at a {1} token")]
    TargetNotContentWord(usize, Pos),
    #[error("token {0} is not a target of the sentence")]
    NotATarget(usize),
    #[error("unknown question prefix `{0}`")]
    UnknownPrefix(String),
    #[error("unknown direction class `{0}`")]
    UnknownDirection(String),
    #[error("unknown verdict `{0}`")]
    UnknownVerdict(String),
    #[error("empty source")]
    EmptySource,
    #[error("question body is empty")]
    EmptyQuestionBody,
    #[error("answer is empty")]
    EmptyAnswer,
    #[error("relation argument is empty")]
    EmptyArgument,
    #[error("relation has no senses")]
    NoSenses,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("question does not start with a known prefix: `{0}`")]
    NoPrefixMatch(String),
    #[error("question body is empty")]
    EmptyBody,
    #[error("`{0}` is not an allowed auxiliary")]
    UnknownAuxiliary(String),
    #[error("catalog line {line}: {message}")]
    Catalog { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("reading lexicon {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("compatibility table line {line}: {message}")]
    Table { line: usize, message: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("annotation sets refer to different sentences: `{0}` vs `{1}`")]
    SentenceMismatch(String, String),
    #[error("at least two workers must share a sentence")]
    InsufficientWorkers,
    #[error("predicted sentence `{0}` does not occur in the gold data")]
    UnknownSentence(String),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("row {row}: unknown question prefix in `{question}`")]
    UnknownPrefix { row: usize, question: String },
    #[error("format descriptor line {line}: {message}")]
    Descriptor { line: usize, message: String },
    #[error("no verdict for question `{0}`")]
    MissingVerdict(String),
    #[error(transparent)]
    Align(#[from] AlignError),
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("threshold {0} is outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("no targets given")]
    NoTargets,
    #[error("sentence has a single segment, no answer candidate")]
    NoCandidate,
    #[error("weight matrix has {got} rows, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("model file {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}
