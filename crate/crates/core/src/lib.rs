//! Discourse relations represented as question-answer pairs: target
//! extraction, question grammar, alignment metrics, dataset I/O and a
//! non-neural baseline parser.

pub mod align;
pub mod baseline;
pub mod dataset;
pub mod error;
pub mod grammar;
pub mod model;
pub mod report;
pub mod targets;

pub use error::{AlignError, BaselineError, DatasetError, GrammarError, LexiconError, ModelError};
pub use model::{AnnotationSet, Pos, Prefix, QaPair, Source, TaggedSentence, Token, Verdict};
