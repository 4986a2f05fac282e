//! Non-neural three-stage parser: prefix prediction, question generation,
//! answer generation. Each stage is a trait so other implementations can be
//! swapped in.

pub mod classifier;
pub mod features;
pub mod generate;
pub mod synthetic;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::Range;

use rayon::prelude::*;

pub use classifier::{class_weight, train_prefix_classifier, PrefixModel, TrainConfig, TrainingExample};
pub use features::{feature_names, FeatureVector, Vocabulary};
pub use generate::{generate_answer, generate_question, CompatTable, RuleAnswerGenerator, RuleQuestionGenerator};

use crate::align::TokenBag;
use crate::error::BaselineError;
use crate::grammar::{parse_question, prefix_catalog, ComposedQuestion};
use crate::model::{AnnotationSet, Prefix, QaPair, Source, TaggedSentence};
use crate::targets::{segment_sentence, ConnectiveLexicon, Segment};

/// A sentence together with its segmentation.
#[derive(Debug, Clone)]
pub struct SentenceContext {
    pub sentence: TaggedSentence,
    pub segments: Vec<Segment>,
}

impl SentenceContext {
    pub fn new(sentence: TaggedSentence, lexicon: &ConnectiveLexicon) -> Self {
        let segments = segment_sentence(&sentence, lexicon);
        SentenceContext { sentence, segments }
    }

    pub fn segment_of(&self, index: usize) -> Option<usize> {
        self.segments.iter().position(|s| s.contains(index))
    }
}

pub trait PrefixPredictor: Send + Sync {
    fn predict(&self, ctx: &SentenceContext, target: usize) -> BTreeSet<Prefix>;
}

pub trait QuestionGenerator: Send + Sync {
    /// One question per target, tagged with the target it was built from.
    fn generate(
        &self,
        ctx: &SentenceContext,
        prefix: Prefix,
        targets: &[usize],
    ) -> Result<Vec<(usize, ComposedQuestion)>, BaselineError>;
}

/// An answer and, when it is a contiguous sentence span, its token range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerSpan {
    pub text: String,
    pub span: Option<Range<usize>>,
}

pub trait AnswerGenerator: Send + Sync {
    fn answer(&self, ctx: &SentenceContext, question: &ComposedQuestion) -> Result<AnswerSpan, BaselineError>;
}

impl PrefixPredictor for PrefixModel {
    fn predict(&self, ctx: &SentenceContext, target: usize) -> BTreeSet<Prefix> {
        let fv = self.vocabulary.vectorize(&feature_names(ctx, target));
        PrefixModel::predict(self, &fv)
    }
}

pub fn predict_prefixes(model: &PrefixModel, ctx: &SentenceContext, target: usize) -> BTreeSet<Prefix> {
    PrefixPredictor::predict(model, ctx, target)
}

/// The three stages plus the lexicon used to segment input sentences.
pub struct BaselineParser {
    pub prefixes: Box<dyn PrefixPredictor>,
    pub questions: Box<dyn QuestionGenerator>,
    pub answers: Box<dyn AnswerGenerator>,
    pub lexicon: ConnectiveLexicon,
}

impl BaselineParser {
    /// Trained model with the rule-based generators.
    pub fn new(model: PrefixModel, lexicon: ConnectiveLexicon, compat: CompatTable) -> Self {
        BaselineParser {
            prefixes: Box::new(model),
            questions: Box::new(RuleQuestionGenerator),
            answers: Box::new(RuleAnswerGenerator::new(compat)),
            lexicon,
        }
    }

    /// Runs all stages over the sentence's targets. A candidate whose stage
    /// fails is dropped. At most one QA per (prefix, target).
    pub fn parse_sentence(&self, sentence: &TaggedSentence) -> AnnotationSet {
        let mut out = AnnotationSet::empty(sentence.id(), Source::System);
        if sentence.targets().is_empty() {
            return out;
        }
        let ctx = SentenceContext::new(sentence.clone(), &self.lexicon);

        let mut by_prefix: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &t in sentence.targets() {
            for p in self.prefixes.predict(&ctx, t) {
                by_prefix.entry(p.index()).or_default().push(t);
            }
        }

        let catalog = prefix_catalog();
        let mut seen = HashSet::new();
        for (pi, targets) in by_prefix {
            let prefix = catalog[pi];
            let Ok(questions) = self.questions.generate(&ctx, prefix, &targets) else { continue };
            for (t, q) in questions {
                if parse_question(&q.full_text).map(|p| p.prefix) != Ok(prefix) {
                    continue;
                }
                let Ok(answer) = self.answers.answer(&ctx, &q) else { continue };
                if !seen.insert((q.full_text.clone(), answer.text.clone())) {
                    continue;
                }
                let Ok(mut qa) = QaPair::new(prefix, q.auxiliary.clone(), q.body.clone(), answer.text) else {
                    continue;
                };
                qa.source_targets =
                    answer.span.and_then(|span| sentence.targets().range(span).next().copied()).map(|a| (t, a));
                out.pairs.push(qa);
            }
        }
        out
    }

    pub fn parse_all(&self, sentences: &[TaggedSentence]) -> Vec<AnnotationSet> {
        sentences.par_iter().map(|s| self.parse_sentence(s)).collect()
    }
}

/// Gold prefixes for a target: those of gold QAs whose question mentions it.
pub fn target_labels(ctx: &SentenceContext, target: usize, gold: &AnnotationSet) -> BTreeSet<Prefix> {
    let word = ctx.sentence.surface(target).to_lowercase();
    gold.pairs.iter().filter(|qa| TokenBag::from_text(&qa.question_body).count(&word) > 0).map(|qa| qa.prefix).collect()
}

/// Feature names and gold labels for every target of every sentence.
pub fn labelled_targets(
    corpus: &[(TaggedSentence, AnnotationSet)],
    lexicon: &ConnectiveLexicon,
) -> Vec<(Vec<String>, BTreeSet<Prefix>)> {
    let mut rows = Vec::new();
    for (sentence, gold) in corpus {
        let ctx = SentenceContext::new(sentence.clone(), lexicon);
        for &t in sentence.targets() {
            rows.push((feature_names(&ctx, t), target_labels(&ctx, t, gold)));
        }
    }
    rows
}

/// Builds the vocabulary from the corpus and trains a model on it.
pub fn train_from_corpus(
    corpus: &[(TaggedSentence, AnnotationSet)],
    lexicon: &ConnectiveLexicon,
    config: &TrainConfig,
) -> Result<PrefixModel, BaselineError> {
    let rows = labelled_targets(corpus, lexicon);
    let vocab = Vocabulary::build(rows.iter().flat_map(|(names, _)| names));
    let examples: Vec<TrainingExample> = rows
        .iter()
        .map(|(names, prefixes)| TrainingExample { features: vocab.vectorize(names), prefixes: prefixes.clone() })
        .collect();
    train_prefix_classifier(vocab, &examples, config)
}
