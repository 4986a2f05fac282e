//! Generated two-clause corpus where the joining connective alone decides
//! the prefix. Used to exercise training and the full pipeline end to end.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AnswerGenerator, QuestionGenerator, RuleAnswerGenerator, RuleQuestionGenerator, SentenceContext};
use crate::model::{AnnotationSet, Prefix, QaPair, Source, TaggedSentence, Verdict};
use crate::targets::{annotate_targets, ConnectiveLexicon};

pub const CONNECTIVES: [(&str, Prefix); 8] = [
    ("because", Prefix::WhatIsTheReason),
    ("although", Prefix::DespiteWhat),
    ("if", Prefix::InWhatCase),
    ("unless", Prefix::UnlessWhat),
    ("after", Prefix::AfterWhat),
    ("before", Prefix::BeforeWhat),
    ("while", Prefix::WhileWhat),
    ("until", Prefix::UntilWhen),
];

const NOUNS: [&str; 12] = [
    "farmer", "river", "council", "engineer", "village", "storm", "teacher", "bridge", "market", "doctor", "team",
    "museum",
];
const VERBS: [&str; 10] =
    ["visited", "moved", "praised", "flooded", "closed", "repaired", "opened", "warned", "crossed", "funded"];

/// `n` sentences "the N1 V1 the N2 CONN the N3 V2 the N4 ." with a gold QA
/// asking about V1 under the connective's prefix and answered by the
/// connective clause.
pub fn corpus(n: usize, seed: u64) -> Vec<(TaggedSentence, AnnotationSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = ConnectiveLexicon::default();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (conn, prefix) = CONNECTIVES[i % CONNECTIVES.len()];
        let mut pick = |pool: &[&'static str]| *pool.choose(&mut rng).expect("non-empty pool");
        let words = [
            "the",
            pick(&NOUNS),
            pick(&VERBS),
            "the",
            pick(&NOUNS),
            conn,
            "the",
            pick(&NOUNS),
            pick(&VERBS),
            "the",
            pick(&NOUNS),
            ".",
        ];
        let tags =
            ["OTHER", "NOUN", "VERB", "OTHER", "NOUN", "OTHER", "OTHER", "NOUN", "VERB", "OTHER", "NOUN", "PUNCT"];
        let id = format!("syn-{i:05}");
        let sentence = annotate_targets(
            TaggedSentence::from_parts(&id, &words, &tags).expect("non-empty synthetic sentence"),
            &lexicon,
        );
        let ctx = SentenceContext::new(sentence.clone(), &lexicon);
        let (_, q) = RuleQuestionGenerator.generate(&ctx, prefix, &[2]).expect("target exists").remove(0);
        let answer = RuleAnswerGenerator::default().answer(&ctx, &q).expect("two segments");
        let mut qa = QaPair::new(prefix, q.auxiliary, q.body, answer.text).expect("non-empty QA");
        qa.grammaticality = Verdict::Correct;
        out.push((sentence, AnnotationSet::new(id, Source::Gold, vec![qa])));
    }
    out
}
