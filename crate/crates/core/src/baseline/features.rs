//! Sparse lexical features for a (sentence, target) pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SentenceContext;

/// Ids below this are reserved hash buckets for features unseen at training time.
pub const UNKNOWN_BUCKETS: u32 = 16;

const WINDOW: isize = 3;

/// Sparse feature-id -> value map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    pub values: BTreeMap<u32, f64>,
}

impl FeatureVector {
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Feature strings for a target. Kept separate from id assignment so the
/// vocabulary can be built from them.
pub fn feature_names(ctx: &SentenceContext, target: usize) -> Vec<String> {
    let sentence = &ctx.sentence;
    let tokens = sentence.tokens();
    let tok = &tokens[target];
    let mut names = vec![format!("w={}", tok.surface.to_lowercase()), format!("pos={}", tok.pos)];
    for off in -WINDOW..=WINDOW {
        if off == 0 {
            continue;
        }
        let k = target as isize + off;
        let word = if k < 0 || k >= tokens.len() as isize {
            "<pad>".to_string()
        } else {
            tokens[k as usize].surface.to_lowercase()
        };
        names.push(format!("win[{off}]={word}"));
    }

    if let Some(si) = ctx.segment_of(target) {
        let n = ctx.segments.len();
        let position = match (si, n) {
            (_, 1) => "only",
            (0, _) => "first",
            (i, n) if i + 1 == n => "last",
            _ => "middle",
        };
        names.push(format!("segpos={position}"));
        for (k, other) in ctx.segments.iter().enumerate() {
            if let Some(conn) = other.connective(sentence) {
                let rel = match k.cmp(&si) {
                    std::cmp::Ordering::Equal => "segconn",
                    std::cmp::Ordering::Less if k + 1 == si => "prevconn",
                    std::cmp::Ordering::Greater if k == si + 1 => "nextconn",
                    _ => continue,
                };
                names.push(format!("{rel}={conn}"));
            }
        }
    }
    if ctx.segments.first().is_some_and(|s| s.starts_with_connective) {
        names.push("initconn".to_string());
    }
    names
}

/// Fixed feature vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    ids: BTreeMap<String, u32>,
}

impl Vocabulary {
    pub fn build<'a>(names: impl IntoIterator<Item = &'a String>) -> Self {
        let mut ids = BTreeMap::new();
        let mut unique: Vec<&String> = names.into_iter().collect();
        unique.sort();
        unique.dedup();
        for name in unique {
            let id = UNKNOWN_BUCKETS + ids.len() as u32;
            ids.insert(name.clone(), id);
        }
        Vocabulary { ids }
    }

    /// Number of feature ids including the reserved buckets.
    pub fn dim(&self) -> usize {
        UNKNOWN_BUCKETS as usize + self.ids.len()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, name: &str) -> u32 {
        self.ids.get(name).copied().unwrap_or_else(|| unknown_bucket(name))
    }

    pub fn vectorize(&self, names: &[String]) -> FeatureVector {
        let mut fv = FeatureVector::default();
        for name in names {
            *fv.values.entry(self.id(name)).or_insert(0.0) = 1.0;
        }
        fv
    }
}

/// FNV-1a, so bucket assignment is stable across runs and platforms.
fn unknown_bucket(name: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in name.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h % UNKNOWN_BUCKETS
}
