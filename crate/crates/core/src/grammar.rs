//! The prefix catalog, canonical labels, and composition/parsing of full
//! question strings.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::GrammarError;
use crate::model::{Direction, Prefix};

/// Auxiliaries that may follow a prefix.
pub const AUXILIARIES: [&str; 18] = [
    "do", "does", "did", "is", "are", "was", "were", "has", "have", "had", "will", "would", "can", "could", "should",
    "may", "might", "must",
];

pub fn is_auxiliary(word: &str) -> bool {
    AUXILIARIES.iter().any(|a| a.eq_ignore_ascii_case(word))
}

/// All prefixes in dataset frequency order.
pub fn prefix_catalog() -> &'static [Prefix] {
    &Prefix::ALL
}

pub fn canonical_label(prefix: Prefix) -> &'static str {
    prefix.canonical()
}

/// Surfaces sorted longest first, checked once for pairwise prefix collisions.
fn match_order() -> &'static [Prefix] {
    static ORDER: OnceLock<Vec<Prefix>> = OnceLock::new();
    ORDER.get_or_init(|| {
        let mut order = Prefix::ALL.to_vec();
        order.sort_by_key(|p| std::cmp::Reverse(p.surface().len()));
        for (i, a) in order.iter().enumerate() {
            for b in &order[i + 1..] {
                assert!(
                    !starts_with_words(a.surface(), b.surface()),
                    "prefix `{}` shadows `{}`",
                    b.surface(),
                    a.surface()
                );
            }
        }
        order
    })
}

/// Whether `text` begins with `head` followed by a word boundary, ignoring ASCII case.
fn starts_with_words(text: &str, head: &str) -> bool {
    let Some(start) = text.get(..head.len()) else {
        return false;
    };
    if !start.eq_ignore_ascii_case(head) {
        return false;
    }
    match text[head.len()..].chars().next() {
        None => true,
        Some(c) => c.is_whitespace() || c == '?',
    }
}

/// A question split into its parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuestion {
    pub prefix: Prefix,
    pub auxiliary: Option<String>,
    pub body: String,
}

/// Splits a question into prefix, optional auxiliary and body.
///
/// The longest matching prefix wins. The word after it is taken as the
/// auxiliary when it is in [`AUXILIARIES`] and something follows it;
/// otherwise the remainder is the body.
pub fn parse_question(text: &str) -> Result<ParsedQuestion, GrammarError> {
    let text = text.trim();
    let prefix = match_order()
        .iter()
        .copied()
        .find(|p| starts_with_words(text, p.surface()))
        .ok_or_else(|| GrammarError::NoPrefixMatch(text.to_string()))?;
    let rest = text[prefix.surface().len()..].trim_start();

    let mut auxiliary = None;
    let mut body = rest;
    if let Some((word, after)) = rest.split_once(char::is_whitespace) {
        let after = after.trim_start();
        if is_auxiliary(word) && !after.is_empty() {
            auxiliary = Some(word.to_string());
            body = after;
        }
    }
    if body.is_empty() {
        return Err(GrammarError::EmptyBody);
    }
    Ok(ParsedQuestion { prefix, auxiliary, body: body.to_string() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedQuestion {
    pub prefix: Prefix,
    pub auxiliary: Option<String>,
    pub body: String,
    pub full_text: String,
}

/// Assembles a question from a prefix, an optional auxiliary and copied spans.
///
/// A non-blank `edits` string replaces the joined spans as the body. A `?`
/// is appended when missing. Grammaticality is not checked.
pub fn compose_question(
    prefix: Prefix,
    auxiliary: Option<&str>,
    spans: &[&str],
    edits: Option<&str>,
) -> Result<ComposedQuestion, GrammarError> {
    if let Some(aux) = auxiliary {
        if !is_auxiliary(aux) {
            return Err(GrammarError::UnknownAuxiliary(aux.to_string()));
        }
    }
    let mut body = match edits.map(str::trim).filter(|e| !e.is_empty()) {
        Some(edited) => edited.to_string(),
        None => spans.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" "),
    };
    if body.trim_end_matches('?').trim().is_empty() {
        return Err(GrammarError::EmptyBody);
    }
    if !body.ends_with('?') {
        body.push('?');
    }
    let full_text = match auxiliary {
        Some(aux) => format!("{} {} {}", prefix.surface(), aux, body),
        None => format!("{} {}", prefix.surface(), body),
    };
    Ok(ComposedQuestion { prefix, auxiliary: auxiliary.map(str::to_string), body, full_text })
}

/// Per-prefix attributes loaded from an override file. The prefix set itself
/// stays closed; only sense, direction and partner can be changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixEntry {
    pub prefix: Prefix,
    pub sense: String,
    pub direction: Direction,
    pub partner: Option<Prefix>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTable {
    entries: Vec<PrefixEntry>,
}

impl PrefixTable {
    pub fn builtin() -> Self {
        let entries = Prefix::ALL
            .iter()
            .map(|&p| PrefixEntry {
                prefix: p,
                sense: p.sense().to_string(),
                direction: p.direction(),
                partner: p.reverse_partner(),
            })
            .collect();
        PrefixTable { entries }
    }

    /// Parses `surface | sense | direction | partner` lines over the builtin
    /// table. Blank lines and `#` comments are skipped.
    pub fn parse_override(text: &str) -> Result<Self, GrammarError> {
        let mut table = PrefixTable::builtin();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| GrammarError::Catalog { line: line_no, message };
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            if fields.len() < 3 || fields.len() > 4 {
                return Err(err(format!("expected 3 or 4 `|`-separated fields, got {}", fields.len())));
            }
            let prefix = Prefix::from_surface(fields[0])
                .ok_or_else(|| err(format!("`{}` is not one of the 17 prefixes", fields[0])))?;
            if fields[1].is_empty() {
                return Err(err("empty sense".into()));
            }
            let direction: Direction = fields[2].parse().map_err(|e| err(format!("{e}")))?;
            let partner = match fields.get(3).filter(|f| !f.is_empty()) {
                Some(f) => Some(Prefix::from_surface(f).ok_or_else(|| err(format!("unknown partner `{f}`")))?),
                None => None,
            };
            if (direction == Direction::Reversed) != partner.is_some() {
                return Err(err("a partner is required iff the direction is REVERSED".into()));
            }
            let entry = &mut table.entries[prefix.index()];
            entry.sense = fields[1].to_string();
            entry.direction = direction;
            entry.partner = partner;
        }
        table.check_partners()?;
        Ok(table)
    }

    fn check_partners(&self) -> Result<(), GrammarError> {
        for e in &self.entries {
            if let Some(q) = e.partner {
                if self.entries[q.index()].partner != Some(e.prefix) {
                    return Err(GrammarError::Catalog {
                        line: 0,
                        message: format!("`{}` and `{}` are not mutual partners", e.prefix, q),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[PrefixEntry] {
        &self.entries
    }

    pub fn entry(&self, prefix: Prefix) -> &PrefixEntry {
        &self.entries[prefix.index()]
    }

    /// Canonical label under this table: a reversed pair shares the label
    /// of its earlier catalog member joined with the later one.
    pub fn canonical(&self, prefix: Prefix) -> String {
        match self.entry(prefix).partner {
            Some(q) => {
                let (a, b) = if prefix < q { (prefix, q) } else { (q, prefix) };
                format!("{} / {}", a.surface(), b.surface())
            }
            None => prefix.surface().to_string(),
        }
    }

    /// Groups prefixes by canonical label.
    pub fn classes(&self) -> BTreeMap<String, Vec<Prefix>> {
        let mut out: BTreeMap<String, Vec<Prefix>> = BTreeMap::new();
        for p in Prefix::ALL {
            out.entry(self.canonical(p)).or_default().push(p);
        }
        out
    }
}
