//! QA-set alignment by token intersection-over-union, and the metrics built
//! on it: unlabeled span detection (UQA), labeled accuracy over aligned
//! clusters (LQA), prefix accuracy, PDTB argument alignment, and pairwise
//! inter-annotator agreement.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::AlignError;
use crate::model::{AnnotationSet, PdtbRelation, Prefix, QaPair};

/// Lowercased whitespace tokens with surrounding punctuation removed.
/// Tokens made only of punctuation are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation() || c == '“' || c == '”'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Multiset of lowercased tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenBag {
    counts: BTreeMap<String, usize>,
}

impl TokenBag {
    pub fn from_text(text: &str) -> Self {
        let mut bag = TokenBag::default();
        bag.add_text(text);
        bag
    }

    pub fn add_text(&mut self, text: &str) {
        for tok in tokenize(text) {
            *self.counts.entry(tok).or_insert(0) += 1;
        }
    }

    pub fn count(&self, token: &str) -> usize {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Sizes of the multiset intersection and union.
    pub fn overlap(&self, other: &TokenBag) -> Overlap {
        let mut inter = 0;
        for (tok, &n) in &self.counts {
            inter += n.min(other.count(tok));
        }
        Overlap { intersection: inter, union: self.len() + other.len() - inter }
    }
}

/// Intersection and union sizes, kept as integers so comparisons are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overlap {
    pub intersection: usize,
    pub union: usize,
}

impl Overlap {
    pub fn ratio(self) -> f64 {
        if self.union == 0 {
            0.0
        } else {
            self.intersection as f64 / self.union as f64
        }
    }

    /// IOU >= 0.5.
    pub fn aligns(self) -> bool {
        self.union > 0 && 2 * self.intersection >= self.union
    }

    fn greater_than(self, other: Overlap) -> bool {
        // a/b > c/d with empty unions treated as 0
        let lhs = self.intersection * other.union.max(1);
        let rhs = other.intersection * self.union.max(1);
        lhs > rhs
    }
}

/// Tokens of the question body and the answer. Prefix and auxiliary are not included.
pub fn qa_token_bag(qa: &QaPair) -> TokenBag {
    let mut bag = TokenBag::from_text(&qa.question_body);
    bag.add_text(&qa.answer);
    bag
}

pub fn iou(a: &TokenBag, b: &TokenBag) -> f64 {
    a.overlap(b).ratio()
}

/// Clusters of mutually aligned items across a left and a right set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentResult {
    pub clusters: Vec<Cluster>,
    pub unaligned_left: BTreeSet<usize>,
    pub unaligned_right: BTreeSet<usize>,
    /// Directed max-IOU edges that passed the threshold, as (left, right).
    pub edges: BTreeSet<(usize, usize)>,
    /// IOU for every (left, right) pair with a non-empty intersection.
    pub pairwise_iou: BTreeMap<(usize, usize), f64>,
    pub left_len: usize,
    pub right_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl AlignmentResult {
    pub fn aligned_left(&self) -> usize {
        self.left_len - self.unaligned_left.len()
    }

    pub fn aligned_right(&self) -> usize {
        self.right_len - self.unaligned_right.len()
    }

    /// Same alignment viewed from the other side.
    pub fn swapped(&self) -> AlignmentResult {
        AlignmentResult {
            clusters: self.clusters.iter().map(|c| Cluster { left: c.right.clone(), right: c.left.clone() }).collect(),
            unaligned_left: self.unaligned_right.clone(),
            unaligned_right: self.unaligned_left.clone(),
            edges: self.edges.iter().map(|&(a, b)| (b, a)).collect(),
            pairwise_iou: self.pairwise_iou.iter().map(|(&(a, b), &v)| ((b, a), v)).collect(),
            left_len: self.right_len,
            right_len: self.left_len,
        }
    }

    pub fn cluster_of_right(&self, j: usize) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.right.contains(&j))
    }
}

/// Index of the first maximum-IOU counterpart, if it reaches 0.5.
fn best_match(overlaps: impl Iterator<Item = Overlap>) -> Option<usize> {
    let mut best: Option<(usize, Overlap)> = None;
    for (k, ov) in overlaps.enumerate() {
        match best {
            Some((_, b)) if !ov.greater_than(b) => {}
            _ => best = Some((k, ov)),
        }
    }
    best.filter(|(_, ov)| ov.aligns()).map(|(k, _)| k)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Aligns two lists of token bags. Each item points at its max-IOU
/// counterpart (lowest index on ties) when that IOU is at least 0.5;
/// connected components of these edges are the clusters.
pub fn align_bags(left: &[TokenBag], right: &[TokenBag]) -> AlignmentResult {
    let overlaps: Vec<Vec<Overlap>> = left.iter().map(|a| right.iter().map(|b| a.overlap(b)).collect()).collect();

    let mut edges = BTreeSet::new();
    for (i, row) in overlaps.iter().enumerate() {
        if let Some(j) = best_match(row.iter().copied()) {
            edges.insert((i, j));
        }
    }
    for j in 0..right.len() {
        if let Some(i) = best_match(overlaps.iter().map(|row| row[j])) {
            edges.insert((i, j));
        }
    }

    let n = left.len();
    let mut uf = UnionFind::new(n + right.len());
    for &(i, j) in &edges {
        uf.union(i, n + j);
    }
    let mut components: BTreeMap<usize, Cluster> = BTreeMap::new();
    for node in 0..n + right.len() {
        let root = uf.find(node);
        let c = components.entry(root).or_insert_with(|| Cluster { left: Vec::new(), right: Vec::new() });
        if node < n {
            c.left.push(node);
        } else {
            c.right.push(node - n);
        }
    }

    let mut clusters = Vec::new();
    let mut unaligned_left = BTreeSet::new();
    let mut unaligned_right = BTreeSet::new();
    for c in components.into_values() {
        if c.left.len() + c.right.len() > 1 {
            clusters.push(c);
        } else {
            unaligned_left.extend(c.left);
            unaligned_right.extend(c.right);
        }
    }

    let mut pairwise_iou = BTreeMap::new();
    for (i, row) in overlaps.iter().enumerate() {
        for (j, ov) in row.iter().enumerate() {
            if ov.intersection > 0 {
                pairwise_iou.insert((i, j), ov.ratio());
            }
        }
    }

    AlignmentResult {
        clusters,
        unaligned_left,
        unaligned_right,
        edges,
        pairwise_iou,
        left_len: left.len(),
        right_len: right.len(),
    }
}

pub fn align_qa_sets(a: &AnnotationSet, b: &AnnotationSet) -> Result<AlignmentResult, AlignError> {
    if a.sentence_id != b.sentence_id {
        return Err(AlignError::SentenceMismatch(a.sentence_id.clone(), b.sentence_id.clone()));
    }
    let left: Vec<TokenBag> = a.pairs.iter().map(qa_token_bag).collect();
    let right: Vec<TokenBag> = b.pairs.iter().map(qa_token_bag).collect();
    Ok(align_bags(&left, &right))
}

/// Aligns a relation's Arg1 + Arg2 bag (left, index 0) against each QA (right).
pub fn align_pdtb(rel: &PdtbRelation, qas: &AnnotationSet) -> AlignmentResult {
    align_pdtb_all(std::slice::from_ref(rel), qas)
}

/// As [`align_pdtb`] for every relation of a sentence at once.
pub fn align_pdtb_all(rels: &[PdtbRelation], qas: &AnnotationSet) -> AlignmentResult {
    let left: Vec<TokenBag> = rels
        .iter()
        .map(|r| {
            let mut bag = TokenBag::from_text(&r.arg1);
            bag.add_text(&r.arg2);
            bag
        })
        .collect();
    let right: Vec<TokenBag> = qas.pairs.iter().map(qa_token_bag).collect();
    align_bags(&left, &right)
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision is the aligned fraction of the left (predicted) set, recall the
/// aligned fraction of the right (gold) set.
pub fn uqa_scores(r: &AlignmentResult) -> Prf {
    UqaCounts::from_alignment(r).scores()
}

/// Raw counts behind UQA, for pooling across sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct UqaCounts {
    pub aligned_pred: usize,
    pub total_pred: usize,
    pub aligned_gold: usize,
    pub total_gold: usize,
}

impl UqaCounts {
    pub fn from_alignment(r: &AlignmentResult) -> Self {
        UqaCounts {
            aligned_pred: r.aligned_left(),
            total_pred: r.left_len,
            aligned_gold: r.aligned_right(),
            total_gold: r.right_len,
        }
    }

    pub fn add(&mut self, other: UqaCounts) {
        self.aligned_pred += other.aligned_pred;
        self.total_pred += other.total_pred;
        self.aligned_gold += other.aligned_gold;
        self.total_gold += other.total_gold;
    }

    pub fn scores(&self) -> Prf {
        let precision = ratio(self.aligned_pred, self.total_pred);
        let recall = ratio(self.aligned_gold, self.total_gold);
        Prf { precision, recall, f1: f1(precision, recall) }
    }
}

fn labels(set: &AnnotationSet, members: &[usize]) -> BTreeSet<&'static str> {
    members.iter().map(|&k| set.pairs[k].prefix.canonical()).collect()
}

/// Correct and total cluster counts for LQA.
pub fn lqa_counts(r: &AlignmentResult, a: &AnnotationSet, b: &AnnotationSet) -> (usize, usize) {
    let correct = r.clusters.iter().filter(|c| !labels(a, &c.left).is_disjoint(&labels(b, &c.right))).count();
    (correct, r.clusters.len())
}

/// Fraction of clusters whose two sides share at least one canonical label.
pub fn lqa_accuracy(r: &AlignmentResult, a: &AnnotationSet, b: &AnnotationSet) -> f64 {
    let (correct, total) = lqa_counts(r, a, b);
    ratio(correct, total)
}

/// Per gold QA: whether its cluster's predicted side carries its canonical label.
fn gold_matches(r: &AlignmentResult, a: &AnnotationSet, b: &AnnotationSet) -> Vec<bool> {
    (0..b.pairs.len())
        .map(|j| match r.cluster_of_right(j) {
            Some(c) => labels(a, &c.left).contains(b.pairs[j].prefix.canonical()),
            None => false,
        })
        .collect()
}

/// Fraction of all gold QAs whose aligned predictions include their label.
/// Unaligned gold QAs count as wrong.
pub fn prefix_accuracy(r: &AlignmentResult, a: &AnnotationSet, b: &AnnotationSet) -> f64 {
    let m = gold_matches(r, a, b);
    ratio(m.iter().filter(|&&x| x).count(), m.len())
}

/// Counts pooled over one or more sentences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SentenceCounts {
    pub uqa: UqaCounts,
    pub lqa_correct: usize,
    pub clusters: usize,
    pub prefix_correct: usize,
    /// gold count and matched count per prefix
    pub per_prefix: BTreeMap<Prefix, (usize, usize)>,
}

impl SentenceCounts {
    pub fn compute(pred: &AnnotationSet, gold: &AnnotationSet) -> Result<Self, AlignError> {
        let r = align_qa_sets(pred, gold)?;
        let (lqa_correct, clusters) = lqa_counts(&r, pred, gold);
        let matches = gold_matches(&r, pred, gold);
        let mut per_prefix: BTreeMap<Prefix, (usize, usize)> = BTreeMap::new();
        for (qa, &ok) in gold.pairs.iter().zip(&matches) {
            let e = per_prefix.entry(qa.prefix).or_default();
            e.0 += 1;
            e.1 += ok as usize;
        }
        Ok(SentenceCounts {
            uqa: UqaCounts::from_alignment(&r),
            lqa_correct,
            clusters,
            prefix_correct: matches.iter().filter(|&&x| x).count(),
            per_prefix,
        })
    }

    pub fn add(&mut self, other: &SentenceCounts) {
        self.uqa.add(other.uqa);
        self.lqa_correct += other.lqa_correct;
        self.clusters += other.clusters;
        self.prefix_correct += other.prefix_correct;
        for (&p, &(n, m)) in &other.per_prefix {
            let e = self.per_prefix.entry(p).or_default();
            e.0 += n;
            e.1 += m;
        }
    }

    pub fn lqa_accuracy(&self) -> f64 {
        ratio(self.lqa_correct, self.clusters)
    }

    pub fn prefix_accuracy(&self) -> f64 {
        ratio(self.prefix_correct, self.uqa.total_gold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub uqa_precision: f64,
    pub uqa_recall: f64,
    pub uqa_f1: f64,
    pub lqa_accuracy: f64,
    pub prefix_accuracy: f64,
    /// prefix -> (gold count, matched)
    pub per_prefix_breakdown: BTreeMap<Prefix, (usize, usize)>,
    pub macro_uqa_precision: f64,
    pub macro_uqa_recall: f64,
    pub macro_uqa_f1: f64,
    pub macro_lqa_accuracy: f64,
    pub sentences: usize,
    pub counts: SentenceCounts,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Scores predicted sets against gold sets over a corpus.
///
/// Every gold sentence is scored; a gold sentence without predictions is
/// scored against an empty set. A predicted sentence missing from the gold
/// data is an error. Micro figures pool counts across sentences; macro
/// figures average per-sentence values over the sentences where they are
/// defined (non-empty predicted set for precision, non-empty gold set for
/// recall, at least one cluster for LQA).
pub fn score_corpus(pred: &[AnnotationSet], gold: &[AnnotationSet]) -> Result<MetricsReport, AlignError> {
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.sentence_id.as_str()).collect();
    if let Some(p) = pred.iter().find(|p| !gold_ids.contains(p.sentence_id.as_str())) {
        return Err(AlignError::UnknownSentence(p.sentence_id.clone()));
    }
    let mut by_id: BTreeMap<&str, AnnotationSet> = BTreeMap::new();
    for p in pred {
        by_id
            .entry(p.sentence_id.as_str())
            .or_insert_with(|| AnnotationSet::empty(p.sentence_id.clone(), p.source.clone()))
            .pairs
            .extend(p.pairs.iter().cloned());
    }

    let per_sentence: Vec<SentenceCounts> = gold
        .par_iter()
        .map(|g| {
            let empty;
            let p = match by_id.get(g.sentence_id.as_str()) {
                Some(p) => p,
                None => {
                    empty = AnnotationSet::empty(g.sentence_id.clone(), crate::model::Source::System);
                    &empty
                }
            };
            SentenceCounts::compute(p, g)
        })
        .collect::<Result<_, _>>()?;

    let mut total = SentenceCounts::default();
    for c in &per_sentence {
        total.add(c);
    }
    let micro = total.uqa.scores();
    Ok(MetricsReport {
        uqa_precision: micro.precision,
        uqa_recall: micro.recall,
        uqa_f1: micro.f1,
        lqa_accuracy: total.lqa_accuracy(),
        prefix_accuracy: total.prefix_accuracy(),
        per_prefix_breakdown: total.per_prefix.clone(),
        macro_uqa_precision: mean(
            per_sentence.iter().filter(|c| c.uqa.total_pred > 0).map(|c| c.uqa.scores().precision),
        ),
        macro_uqa_recall: mean(per_sentence.iter().filter(|c| c.uqa.total_gold > 0).map(|c| c.uqa.scores().recall)),
        macro_uqa_f1: mean(
            per_sentence.iter().filter(|c| c.uqa.total_pred + c.uqa.total_gold > 0).map(|c| c.uqa.scores().f1),
        ),
        macro_lqa_accuracy: mean(per_sentence.iter().filter(|c| c.clusters > 0).map(SentenceCounts::lqa_accuracy)),
        sentences: gold.len(),
        counts: total,
    })
}

/// Mean pairwise agreement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IaaReport {
    pub uqa_f1: f64,
    pub lqa_accuracy: f64,
    /// (worker a, worker b, UQA F1, LQA accuracy, shared sentences)
    pub pairs: Vec<(String, String, f64, f64, usize)>,
}

/// Agreement between every unordered pair of workers, pooled (micro) over
/// the sentences the two share, then averaged over pairs. Pairs that share
/// no sentence are skipped.
pub fn compute_iaa(annotations: &BTreeMap<String, Vec<AnnotationSet>>) -> Result<IaaReport, AlignError> {
    let by_sentence: BTreeMap<&String, BTreeMap<&str, &AnnotationSet>> =
        annotations.iter().map(|(w, sets)| (w, sets.iter().map(|s| (s.sentence_id.as_str(), s)).collect())).collect();
    let workers: Vec<&String> = by_sentence.keys().copied().collect();
    let mut pairs = Vec::new();
    for (i, &wa) in workers.iter().enumerate() {
        for &wb in &workers[i + 1..] {
            let (sa, sb) = (&by_sentence[wa], &by_sentence[wb]);
            let mut uqa = UqaCounts::default();
            let (mut correct, mut clusters, mut shared) = (0, 0, 0);
            for (id, a) in sa {
                let Some(b) = sb.get(id) else { continue };
                shared += 1;
                let r = align_qa_sets(a, b)?;
                uqa.add(UqaCounts::from_alignment(&r));
                let (c, t) = lqa_counts(&r, a, b);
                correct += c;
                clusters += t;
            }
            if shared > 0 {
                pairs.push((wa.clone(), wb.clone(), uqa.scores().f1, ratio(correct, clusters), shared));
            }
        }
    }
    if pairs.is_empty() {
        return Err(AlignError::InsufficientWorkers);
    }
    Ok(IaaReport { uqa_f1: mean(pairs.iter().map(|p| p.2)), lqa_accuracy: mean(pairs.iter().map(|p| p.3)), pairs })
}

/// Averages [`compute_iaa`] over independent samples.
pub fn compute_iaa_samples(samples: &[BTreeMap<String, Vec<AnnotationSet>>]) -> Result<(f64, f64), AlignError> {
    if samples.is_empty() {
        return Err(AlignError::InsufficientWorkers);
    }
    let reports = samples.iter().map(compute_iaa).collect::<Result<Vec<_>, _>>()?;
    Ok((mean(reports.iter().map(|r| r.uqa_f1)), mean(reports.iter().map(|r| r.lqa_accuracy))))
}
