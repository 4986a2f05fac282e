//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qadisc::align::{align_qa_sets, compute_iaa, lqa_accuracy, score_corpus, uqa_scores};
use qadisc::baseline::{
    class_weight, synthetic, train_from_corpus, BaselineParser, CompatTable, FeatureVector, PrefixModel, TrainConfig,
    Vocabulary,
};
use qadisc::dataset::{
    canonical_order, dataset_stats, merge_adjudicated, read_dataset, read_dataset_str, write_dataset_string,
    DatasetRecord, Domain, FormatDescriptor, QaKey, Split,
};
use qadisc::grammar::{parse_question, AUXILIARIES};
use qadisc::targets::{bracketed, extract_targets, segment_sentence, ConnectiveLexicon};
use qadisc::{AnnotationSet, Prefix, QaPair, Source, TaggedSentence, Verdict};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const GOLDEN: &str = "Despite/OTHER labor-shortage/OTHER-open warnings/NOUN ,/PUNCT 80%/OTHER aim/VERB for/OTHER \
    first-year/OTHER-open wage/NOUN increases/NOUN of/OTHER under/OTHER 4%/OTHER ;/PUNCT and/OTHER 77%/OTHER \
    say/VERB they'd/OTHER try/VERB to/OTHER replace/VERB workers/NOUN ,/PUNCT if/OTHER struck/VERB ,/PUNCT \
    or/OTHER would/VERB consider/VERB it/OTHER ./PUNCT";

fn tagged(id: &str, spec: &str) -> TaggedSentence {
    let (words, tags): (Vec<&str>, Vec<&str>) = spec.split_whitespace().map(|wt| wt.rsplit_once('/').unwrap()).unzip();
    TaggedSentence::from_parts(id, &words, &tags).unwrap()
}

fn qa(prefix: Prefix, body: &str, answer: &str) -> QaPair {
    QaPair::new(prefix, None, body, answer).unwrap()
}

fn c1_golden_targets() -> Outcome {
    let s = tagged("golden", GOLDEN);
    let lex = ConnectiveLexicon::default();
    let segs = segment_sentence(&s, &lex);
    let expected = "[Despite labor-shortage warnings,] [80% aim for first-year wage increases of under 4%;] \
        [and 77% say they'd try to replace workers,] [if struck,] [or would consider it.]";
    check!(bracketed(&s, &segs) == expected, "segments: {}", bracketed(&s, &segs));
    let words: BTreeSet<&str> = extract_targets(&s, &lex).iter().map(|&i| s.surface(i)).collect();
    let gold: BTreeSet<&str> = ["warnings", "aim", "say", "replace", "struck", "consider"].into();
    check!(words == gold, "targets: {words:?}");

    let runs = 200;
    let start = Instant::now();
    for _ in 0..runs {
        std::hint::black_box(extract_targets(std::hint::black_box(&s), &lex));
    }
    let per_call = start.elapsed() / runs;
    check!(per_call < Duration::from_millis(1), "extraction took {per_call:?}");
    Ok(format!("5 segments, 6 targets, {per_call:?} per sentence"))
}

// Independent brute-force alignment: explicit token lists, exact rationals,
// breadth-first components.
fn oracle_tokens(qa: &QaPair) -> Vec<String> {
    let text = format!("{} {}", qa.question_body, qa.answer);
    let mut toks: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    toks.sort();
    toks
}

fn oracle_overlap(a: &[String], b: &[String]) -> (usize, usize) {
    let mut rest = b.to_vec();
    let mut inter = 0;
    for t in a {
        if let Some(pos) = rest.iter().position(|x| x == t) {
            rest.remove(pos);
            inter += 1;
        }
    }
    (inter, a.len() + b.len() - inter)
}

struct OracleAlignment {
    edges: BTreeSet<(usize, usize)>,
    clusters: BTreeSet<(Vec<usize>, Vec<usize>)>,
    aligned_left: usize,
    aligned_right: usize,
}

fn oracle_align(a: &AnnotationSet, b: &AnnotationSet) -> OracleAlignment {
    let la: Vec<_> = a.pairs.iter().map(oracle_tokens).collect();
    let lb: Vec<_> = b.pairs.iter().map(oracle_tokens).collect();
    let ov: Vec<Vec<(usize, usize)>> = la.iter().map(|x| lb.iter().map(|y| oracle_overlap(x, y)).collect()).collect();
    // every candidate edge whose IOU is the row (or column) maximum, lowest index kept
    let mut edges = BTreeSet::new();
    for i in 0..la.len() {
        let mut best: Option<usize> = None;
        for j in 0..lb.len() {
            let (n, d) = ov[i][j];
            let better = match best {
                None => true,
                Some(k) => {
                    let (bn, bd) = ov[i][k];
                    n * bd > bn * d
                }
            };
            if better {
                best = Some(j);
            }
        }
        if let Some(j) = best {
            let (n, d) = ov[i][j];
            if d > 0 && 2 * n >= d {
                edges.insert((i, j));
            }
        }
    }
    for j in 0..lb.len() {
        let mut best: Option<usize> = None;
        for i in 0..la.len() {
            let (n, d) = ov[i][j];
            let better = match best {
                None => true,
                Some(k) => {
                    let (bn, bd) = ov[k][j];
                    n * bd > bn * d
                }
            };
            if better {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            let (n, d) = ov[i][j];
            if d > 0 && 2 * n >= d {
                edges.insert((i, j));
            }
        }
    }
    let n = la.len();
    let total = n + lb.len();
    let mut seen = vec![false; total];
    let mut clusters = BTreeSet::new();
    for start in 0..total {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(i, j) in &edges {
                let (x, y) = (i, n + j);
                let other = if u == x {
                    y
                } else if u == y {
                    x
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    comp.push(other);
                    queue.push_back(other);
                }
            }
        }
        if comp.len() > 1 {
            let mut left: Vec<usize> = comp.iter().filter(|&&k| k < n).copied().collect();
            let mut right: Vec<usize> = comp.iter().filter(|&&k| k >= n).map(|k| k - n).collect();
            left.sort();
            right.sort();
            clusters.insert((left, right));
        }
    }
    let aligned_left = clusters.iter().map(|c| c.0.len()).sum();
    let aligned_right = clusters.iter().map(|c| c.1.len()).sum();
    OracleAlignment { edges, clusters, aligned_left, aligned_right }
}

const VOCAB: [&str; 8] = ["rain", "fell", "river", "rose", "town", "flooded", "people", "left"];

fn random_qa(rng: &mut ChaCha8Rng) -> QaPair {
    let mut words = |lo: usize, hi: usize| {
        let n = rng.gen_range(lo..=hi);
        (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
    };
    let body = format!("{}?", words(1, 3));
    let answer = words(1, 3);
    QaPair::new(Prefix::ALL[rng.gen_range(0..Prefix::COUNT)], None, body, answer).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng) -> AnnotationSet {
    let n = rng.gen_range(0..=4);
    AnnotationSet::new("s", Source::System, (0..n).map(|_| random_qa(rng)).collect())
}

fn c2_metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut nontrivial = 0;
    for case in 0..1000 {
        let a = random_set(&mut rng);
        let b = random_set(&mut rng);
        let r = align_qa_sets(&a, &b).unwrap();
        let o = oracle_align(&a, &b);
        check!(r.edges == o.edges, "case {case}: edges {:?} vs oracle {:?}", r.edges, o.edges);
        let clusters: BTreeSet<(Vec<usize>, Vec<usize>)> =
            r.clusters.iter().map(|c| (c.left.clone(), c.right.clone())).collect();
        check!(clusters == o.clusters, "case {case}: clusters {clusters:?} vs oracle {:?}", o.clusters);
        check!(r.aligned_left() == o.aligned_left && r.aligned_right() == o.aligned_right, "case {case}: counts");
        let fwd = uqa_scores(&r);
        let back = uqa_scores(&align_qa_sets(&b, &a).unwrap());
        check!(fwd.precision == back.recall && fwd.recall == back.precision, "case {case}: P/R swap symmetry");
        if !o.clusters.is_empty() && o.aligned_left < a.len() {
            nontrivial += 1;
        }
    }
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("1000 cases ({nontrivial} partially aligned) in {elapsed:?}"))
}

fn fixture_corpus(n: usize, words: &[&str], marker: &str, seed: u64) -> Vec<AnnotationSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let k = rng.gen_range(1..=3);
            let pairs = (0..k)
                .map(|q| {
                    let pick = |rng: &mut ChaCha8Rng| (0..4).map(|_| *words.choose(rng).unwrap()).collect::<Vec<_>>();
                    let body = format!("{} {marker}{q}?", pick(&mut rng).join(" "));
                    let answer = format!("{} {marker}a{q}", pick(&mut rng).join(" "));
                    qa(Prefix::ALL[rng.gen_range(0..Prefix::COUNT)], &body, &answer)
                })
                .collect();
            AnnotationSet::new(format!("s{i:02}"), Source::Gold, pairs)
        })
        .collect()
}

fn c3_metric_anchors() -> Outcome {
    let gold = fixture_corpus(50, &VOCAB, "g", 3);
    let m = score_corpus(&gold, &gold).unwrap();
    check!(m.sentences == 50, "sentences {}", m.sentences);
    for (name, v) in [("P", m.uqa_precision), ("R", m.uqa_recall), ("F1", m.uqa_f1), ("LQA", m.lqa_accuracy)] {
        check!(v == 1.0, "gold vs gold {name} = {v}");
    }
    let pred = fixture_corpus(50, &["alpha", "beta", "gamma", "delta"], "p", 4);
    let m = score_corpus(&pred, &gold).unwrap();
    for (name, v) in [
        ("P", m.uqa_precision),
        ("R", m.uqa_recall),
        ("F1", m.uqa_f1),
        ("LQA", m.lqa_accuracy),
        ("prefix", m.prefix_accuracy),
    ] {
        check!(v == 0.0, "disjoint {name} = {v}");
    }
    Ok("gold/gold all 1.0, disjoint all 0.0 on 50 sentences".into())
}

fn c4_canonicalization() -> Outcome {
    let body = "the river flooded the town?";
    let answer = "the rain fell for days";
    let case = |p: Prefix, g: Prefix| {
        let a = AnnotationSet::new("s", Source::System, vec![qa(p, body, answer)]);
        let b = AnnotationSet::new("s", Source::Gold, vec![qa(g, body, answer)]);
        let r = align_qa_sets(&a, &b).unwrap();
        assert_eq!(r.clusters.len(), 1);
        lqa_accuracy(&r, &a, &b)
    };
    for (p, g) in [
        (Prefix::WhatIsTheReason, Prefix::WhatIsTheResultOf),
        (Prefix::AfterWhat, Prefix::BeforeWhat),
        (Prefix::SinceWhen, Prefix::UntilWhen),
    ] {
        check!(case(p, g) == 1.0, "{p} vs {g} judged incorrect");
        check!(case(g, p) == 1.0, "{g} vs {p} judged incorrect");
    }
    check!(case(Prefix::DespiteWhat, Prefix::WhatIsContrastedWith) == 0.0, "Despite what vs contrasted judged correct");
    Ok("3 reversed pairs correct, concession vs contrast incorrect".into())
}

const PARTITION_COUNTS: [(Domain, Split, usize, usize); 6] = [
    (Domain::Wikinews, Split::Train, 3098, 4760),
    (Domain::Wikinews, Split::Dev, 669, 1108),
    (Domain::Wikinews, Split::Test, 658, 1498),
    (Domain::Wikipedia, Split::Train, 3277, 6225),
    (Domain::Wikipedia, Split::Dev, 667, 1524),
    (Domain::Wikipedia, Split::Test, 678, 1498),
];

const PREFIX_COUNTS: [usize; 17] =
    [4225, 3238, 2735, 1757, 1099, 1060, 509, 477, 317, 299, 279, 218, 155, 105, 92, 27, 21];

fn check_table_counts(records: &[DatasetRecord]) -> Result<(), String> {
    let stats = dataset_stats(records);
    check!(stats.sentences_with_qa == 9047, "sentences {}", stats.sentences_with_qa);
    check!(stats.total_qas == 16613, "QAs {}", stats.total_qas);
    for (d, s, sents, qas) in PARTITION_COUNTS {
        let got = stats.per_partition.get(&(d, s)).copied().unwrap_or_default();
        check!(got == (sents, qas), "{d} {s}: {got:?}, expected ({sents}, {qas})");
    }
    for (p, &n) in Prefix::ALL.iter().zip(&PREFIX_COUNTS) {
        let got = stats.per_prefix.get(p).map(|x| x.0).unwrap_or(0);
        check!(got == n, "{p}: {got}, expected {n}");
    }
    Ok(())
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"abcdefghij XYZ0123456789\t\n\\,.'\"-";
    loop {
        let n = rng.gen_range(1..30);
        let s: String = (0..n).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char).collect();
        if !s.trim().is_empty() {
            return s;
        }
    }
}

fn random_record(rng: &mut ChaCha8Rng) -> DatasetRecord {
    let aux = rng.gen_bool(0.5).then(|| AUXILIARIES[rng.gen_range(0..AUXILIARIES.len())].to_string());
    let head = ["river", "town", "people", "rain"][rng.gen_range(0..4)];
    let tail: String = random_text(rng).split_whitespace().collect::<Vec<_>>().join(" ");
    let body = format!("{head} {tail}?").replace(" ?", "?");
    let mut qa = QaPair::new(Prefix::ALL[rng.gen_range(0..Prefix::COUNT)], aux, body, random_text(rng)).unwrap();
    qa.grammaticality = [Verdict::Unreviewed, Verdict::Correct, Verdict::NotCorrect, Verdict::CorrectNotGrammatical]
        [rng.gen_range(0..4)];
    DatasetRecord {
        sentence_id: format!("{:x}", rng.gen_range(0..5000u32)),
        split: Split::ALL[rng.gen_range(0..3)],
        domain: [Domain::Wikinews, Domain::Wikipedia, Domain::Other][rng.gen_range(0..3)],
        sentence: random_text(rng),
        source: match rng.gen_range(0..3) {
            0 => Source::Gold,
            1 => Source::System,
            _ => Source::Worker(format!("w{}", rng.gen_range(0..20))),
        },
        qa,
    }
}

/// Records whose partition and prefix counts are exactly the reference counts.
fn reference_shaped_records() -> Vec<DatasetRecord> {
    let mut prefixes = Prefix::ALL.iter().zip(PREFIX_COUNTS).flat_map(|(&p, n)| std::iter::repeat_n(p, n));
    let mut out = Vec::new();
    for (d, s, sents, qas) in PARTITION_COUNTS {
        for k in 0..qas {
            let sid = k % sents;
            let qa = qa(prefixes.next().unwrap(), "the river rose?", "the rain fell");
            out.push(DatasetRecord {
                sentence_id: format!("{d}-{s}-{sid}"),
                split: s,
                domain: d,
                sentence: "The river rose because the rain fell.".into(),
                source: Source::Gold,
                qa,
            });
        }
    }
    out
}

fn c5_dataset_stats() -> Outcome {
    let start = Instant::now();
    if let Ok(dir) = std::env::var("QADISC_DATASET_DIR") {
        let dir = Path::new(&dir);
        let format_path = dir.join("format.desc");
        let format = if format_path.exists() {
            FormatDescriptor::from_file(&format_path).map_err(|e| e.to_string())?
        } else {
            FormatDescriptor::canonical()
        };
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "tsv" || x == "csv"))
            .collect();
        files.sort();
        let mut records = Vec::new();
        for f in &files {
            records.extend(read_dataset(f, &format).map_err(|e| format!("{}: {e}", f.display()))?);
        }
        check_table_counts(&records)?;
        let stats = dataset_stats(&records);
        check!((stats.avg_question_tokens - 12.22).abs() <= 0.5, "avg question tokens {}", stats.avg_question_tokens);
        check!((stats.avg_answer_tokens - 10.27).abs() <= 0.5, "avg answer tokens {}", stats.avg_answer_tokens);
        let elapsed = start.elapsed();
        check!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
        return Ok(format!("released data reproduced in {elapsed:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let records: Vec<DatasetRecord> = (0..10_000).map(|_| random_record(&mut rng)).collect();
    let text = write_dataset_string(&records);
    let back = read_dataset_str(&text, &FormatDescriptor::canonical()).map_err(|e| e.to_string())?;
    check!(back == canonical_order(&records), "read(write(x)) differs from x");

    let shaped = reference_shaped_records();
    let back =
        read_dataset_str(&write_dataset_string(&shaped), &FormatDescriptor::canonical()).map_err(|e| e.to_string())?;
    check_table_counts(&back)?;
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "released data not supplied (set QADISC_DATASET_DIR); waived, round trip of 10000 records holds and \
         reference-shaped counts are reported exactly, {elapsed:?}"
    ))
}

fn c6_class_weight() -> Outcome {
    let w = class_weight(20, 100);
    check!((w - 4.0).abs() <= 1e-6, "class_weight(20, 100) = {w}");
    let z = class_weight(0, 100);
    check!((z - 1e7).abs() / 1e7 <= 0.01, "class_weight(0, 100) = {z}");
    check!(class_weight(100, 100) == 0.0, "class_weight(100, 100) = {}", class_weight(100, 100));
    Ok(format!("{w} / {z:e}"))
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn c7_threshold() -> Outcome {
    let vocab = Vocabulary::build(&["w=a".to_string(), "w=b".to_string()]);
    let dim = vocab.dim();
    let mut biases = vec![logit(0.05); Prefix::COUNT];
    biases[0] = logit(0.35);
    biases[1] = logit(0.29);
    let model =
        PrefixModel::from_parts(vocab, vec![vec![0.0; dim]; Prefix::COUNT], biases, 0.3).map_err(|e| e.to_string())?;
    let predicted = model.predict(&FeatureVector::default());
    check!(predicted == BTreeSet::from([Prefix::ALL[0]]), "predicted {predicted:?}");

    let corpus = synthetic::corpus(40, 7);
    let lex = ConnectiveLexicon::default();
    let trained = train_from_corpus(&corpus, &lex, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let fv = FeatureVector {
            values: (0..6)
                .map(|_| (rng.gen_range(0..trained.vocabulary.dim() as u32), rng.gen_range(-1.0..2.0)))
                .collect(),
        };
        let mut prev: Option<BTreeSet<Prefix>> = None;
        for step in 0..=10 {
            let tau = step as f64 / 10.0;
            let set = trained.predict_at(&fv, tau);
            if let Some(p) = &prev {
                check!(set.is_subset(p), "tau {tau} added prefixes");
            }
            prev = Some(set);
        }
    }
    check!(model.predict_at(&FeatureVector::default(), 0.0).len() == Prefix::COUNT, "tau 0 should give all");
    check!(model.predict_at(&FeatureVector::default(), 1.0).is_empty(), "tau 1 should give none");
    Ok("{0.35, 0.29} at 0.3 -> one prefix; 11-step sweep monotone".into())
}

fn c8_pipeline() -> Outcome {
    let lex = ConnectiveLexicon::default();
    let corpus = synthetic::corpus(240, 8);
    let (train, test) = corpus.split_at(160);
    let run = || -> Result<(Vec<AnnotationSet>, String), String> {
        let model = train_from_corpus(train, &lex, &TrainConfig { seed: 8, ..TrainConfig::default() })
            .map_err(|e| e.to_string())?;
        let json = model.to_json();
        let parser = BaselineParser::new(model, lex.clone(), CompatTable::default());
        let sentences: Vec<TaggedSentence> = test.iter().map(|(s, _)| s.clone()).collect();
        Ok((parser.parse_all(&sentences), json))
    };
    let (pred, model_json) = run()?;
    let (again, again_json) = run()?;
    check!(pred == again && model_json == again_json, "pipeline not deterministic");

    for ((s, _), set) in test.iter().zip(&pred) {
        check!(set.len() <= s.targets().len() * Prefix::COUNT, "{}: {} QAs over cap", s.id(), set.len());
        for qa in &set.pairs {
            let parsed = parse_question(&qa.question_text()).map_err(|e| format!("{}: {e}", s.id()))?;
            check!(parsed.prefix == qa.prefix, "{}: prefix changed on parse", s.id());
        }
    }
    let gold: Vec<AnnotationSet> = test.iter().map(|(_, g)| g.clone()).collect();
    let m = score_corpus(&pred, &gold).map_err(|e| e.to_string())?;
    check!(m.uqa_f1 >= 0.9, "UQA F1 {}", m.uqa_f1);

    let golden = qadisc::targets::annotate_targets(tagged("golden", GOLDEN), &lex);
    let all = BaselineParser {
        prefixes: Box::new(AllPrefixes),
        questions: Box::new(qadisc::baseline::RuleQuestionGenerator),
        answers: Box::new(qadisc::baseline::RuleAnswerGenerator::default()),
        lexicon: lex.clone(),
    };
    let set = all.parse_sentence(&golden);
    check!(set.len() <= golden.targets().len() * Prefix::COUNT, "cap exceeded with every prefix predicted");
    for qa in &set.pairs {
        check!(parse_question(&qa.question_text()).is_ok(), "unparseable {}", qa.question_text());
    }
    Ok(format!("UQA F1 {:.4} LQA {:.4} on 80 held-out sentences; deterministic", m.uqa_f1, m.lqa_accuracy))
}

struct AllPrefixes;

impl qadisc::baseline::PrefixPredictor for AllPrefixes {
    fn predict(&self, _: &qadisc::baseline::SentenceContext, _: usize) -> BTreeSet<Prefix> {
        Prefix::ALL.into_iter().collect()
    }
}

fn c9_adjudication() -> Outcome {
    let a1 = qa(Prefix::WhatIsTheReason, "did the river flood?", "because the rain fell");
    let a2 = qa(Prefix::AfterWhat, "did the river flood?", "the town was empty");
    let b1 = a1.clone();
    let b2 = QaPair::new(Prefix::InWhatManner, Some("did".into()), "the people left?", "in a hurry").unwrap();
    let first = AnnotationSet::new("s", Source::Worker("w1".into()), vec![a1.clone(), a2.clone()]);
    let second = AnnotationSet::new("s", Source::Worker("w2".into()), vec![b1, b2.clone()]);
    let verdicts: HashMap<QaKey, Verdict> = [
        (QaKey::of(&a1), Verdict::Correct),
        (QaKey::of(&a2), Verdict::NotCorrect),
        (QaKey::of(&b2), Verdict::CorrectNotGrammatical),
    ]
    .into();
    let merged = merge_adjudicated(&first, &second, &verdicts).map_err(|e| e.to_string())?;
    check!(merged.len() == 2, "merged {} QAs", merged.len());
    check!(merged.pairs.iter().all(|q| q.grammaticality != Verdict::NotCorrect), "NOT_CORRECT kept");
    check!(merged.pairs[0].question_text() == a1.question_text(), "duplicate not collapsed");
    check!(merged.pairs[1].grammaticality == Verdict::CorrectNotGrammatical, "flag lost");

    let all_bad: HashMap<QaKey, Verdict> = verdicts.keys().map(|k| (k.clone(), Verdict::NotCorrect)).collect();
    check!(merge_adjudicated(&first, &second, &all_bad).unwrap().is_empty(), "all NOT_CORRECT should merge to empty");
    Ok("NOT_CORRECT dropped, duplicate collapsed, CORRECT_NOT_GRAMMATICAL kept".into())
}

fn c10_iaa() -> Outcome {
    let q1 = qa(Prefix::WhatIsTheReason, "did the river rise?", "the rain fell");
    let q2 = qa(Prefix::AfterWhat, "did people leave town?", "a flood warning came");
    let q3 = qa(Prefix::InWhatManner, "was the bridge built?", "with stone arches");
    let q4 = qa(Prefix::WhatIsTheReason, "was school closed?", "snow blocked roads");
    let q4c = qa(Prefix::DespiteWhat, "was school closed?", "snow blocked roads");
    let set = |id: &str, w: &str, pairs: Vec<QaPair>| AnnotationSet::new(id, Source::Worker(w.into()), pairs);
    let workers: BTreeMap<String, Vec<AnnotationSet>> = [
        ("A".to_string(), vec![set("s1", "A", vec![q1.clone(), q2.clone()]), set("s2", "A", vec![q4.clone()])]),
        ("B".to_string(), vec![set("s1", "B", vec![q1.clone()]), set("s2", "B", vec![q4.clone()])]),
        ("C".to_string(), vec![set("s1", "C", vec![q3]), set("s2", "C", vec![q4c])]),
    ]
    .into();
    let r = compute_iaa(&workers).map_err(|e| e.to_string())?;
    // A-B: P 2/3, R 2/2 -> F1 0.8, LQA 2/2.  A-C: P 1/3, R 1/2 -> F1 0.4, LQA 0/1.
    // B-C: P 1/2, R 1/2 -> F1 0.5, LQA 0/1.
    let expected = [("A", "B", 0.8, 1.0), ("A", "C", 0.4, 0.0), ("B", "C", 0.5, 0.0)];
    check!(r.pairs.len() == 3, "{} pairs", r.pairs.len());
    for ((a, b, u, l, shared), (ea, eb, eu, el)) in r.pairs.iter().zip(expected) {
        check!(a == ea && b == eb && *shared == 2, "pair {a}-{b}");
        check!((u - eu).abs() < 1e-12 && (l - el).abs() < 1e-12, "pair {a}-{b}: ({u}, {l}) vs ({eu}, {el})");
    }
    let (eu, el) = ((0.8 + 0.4 + 0.5) / 3.0, 1.0 / 3.0);
    check!(
        (r.uqa_f1 - eu).abs() < 1e-12 && (r.lqa_accuracy - el).abs() < 1e-12,
        "mean ({}, {})",
        r.uqa_f1,
        r.lqa_accuracy
    );

    let same: BTreeMap<String, Vec<AnnotationSet>> = ["A", "B", "C"]
        .iter()
        .map(|w| (w.to_string(), vec![set("s1", w, vec![q1.clone(), q2.clone()]), set("s2", w, vec![q4.clone()])]))
        .collect();
    let r = compute_iaa(&same).map_err(|e| e.to_string())?;
    check!(r.uqa_f1 == 1.0 && r.lqa_accuracy == 1.0, "identical workers ({}, {})", r.uqa_f1, r.lqa_accuracy);
    Ok(format!("UQA {eu:.4} LQA {el:.4}; identical workers (1.0, 1.0)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("target extraction golden", c1_golden_targets),
        ("metric oracle equivalence", c2_metric_oracle),
        ("metric trivial anchors", c3_metric_anchors),
        ("canonicalization", c4_canonicalization),
        ("dataset statistics", c5_dataset_stats),
        ("class-weight formula", c6_class_weight),
        ("threshold behavior", c7_threshold),
        ("pipeline properties", c8_pipeline),
        ("adjudication", c9_adjudication),
        ("IAA protocol", c10_iaa),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
