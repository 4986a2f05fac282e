//! Rendering of reports as `key: value` text or as one JSON record per line.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::align::{IaaReport, MetricsReport};
use crate::dataset::StatsReport;
use crate::model::Prefix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Machine,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "machine" => Ok(ReportFormat::Machine),
            other => Err(format!("unknown report format `{other}` (expected text or machine)")),
        }
    }
}

/// A flat metric record: name, value, and optional qualifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub metric: String,
    pub value: Value,
    pub labels: Vec<(&'static str, String)>,
}

impl Record {
    fn new(metric: impl Into<String>, value: impl Into<Value>) -> Self {
        Record { metric: metric.into(), value: value.into(), labels: Vec::new() }
    }

    fn label(mut self, key: &'static str, value: impl ToString) -> Self {
        self.labels.push((key, value.to_string()));
        self
    }

    fn text_key(&self) -> String {
        let mut key = self.metric.clone();
        for (_, v) in &self.labels {
            write!(key, "[{v}]").unwrap();
        }
        key
    }

    fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("metric".into(), json!(self.metric));
        for (k, v) in &self.labels {
            obj.insert((*k).into(), json!(v));
        }
        obj.insert("value".into(), self.value.clone());
        Value::Object(obj)
    }
}

pub fn render(records: &[Record], format: ReportFormat) -> String {
    let mut out = String::new();
    for r in records {
        match format {
            ReportFormat::Text => {
                let value = match &r.value {
                    Value::Number(n) if n.is_f64() => format!("{:.4}", n.as_f64().unwrap()),
                    other => other.to_string(),
                };
                writeln!(out, "{}: {}", r.text_key(), value).unwrap();
            }
            ReportFormat::Machine => writeln!(out, "{}", r.to_json()).unwrap(),
        }
    }
    out
}

pub fn metrics_records(m: &MetricsReport) -> Vec<Record> {
    let mut v = vec![
        Record::new("sentences", m.sentences),
        Record::new("uqa_precision", m.uqa_precision),
        Record::new("uqa_recall", m.uqa_recall),
        Record::new("uqa_f1", m.uqa_f1),
        Record::new("lqa_accuracy", m.lqa_accuracy),
        Record::new("prefix_accuracy", m.prefix_accuracy),
        Record::new("macro_uqa_precision", m.macro_uqa_precision),
        Record::new("macro_uqa_recall", m.macro_uqa_recall),
        Record::new("macro_uqa_f1", m.macro_uqa_f1),
        Record::new("macro_lqa_accuracy", m.macro_lqa_accuracy),
    ];
    for (prefix, &(gold, matched)) in &m.per_prefix_breakdown {
        v.push(Record::new("prefix_gold", gold).label("prefix", prefix));
        v.push(Record::new("prefix_matched", matched).label("prefix", prefix));
    }
    v
}

pub fn stats_records(s: &StatsReport) -> Vec<Record> {
    let mut v = vec![
        Record::new("sentences", s.sentences_with_qa),
        Record::new("qas", s.total_qas),
        Record::new("avg_question_tokens", s.avg_question_tokens),
        Record::new("avg_answer_tokens", s.avg_answer_tokens),
    ];
    for p in Prefix::ALL {
        if let Some(&(count, share)) = s.per_prefix.get(&p) {
            v.push(Record::new("prefix_count", count).label("prefix", p));
            v.push(Record::new("prefix_share", share).label("prefix", p));
        }
    }
    for ((domain, split), &(sentences, qas)) in &s.per_partition {
        v.push(Record::new("partition_sentences", sentences).label("domain", domain).label("split", split));
        v.push(Record::new("partition_qas", qas).label("domain", domain).label("split", split));
    }
    v
}

pub fn iaa_records(r: &IaaReport) -> Vec<Record> {
    let mut v = vec![Record::new("iaa_uqa_f1", r.uqa_f1), Record::new("iaa_lqa_accuracy", r.lqa_accuracy)];
    for (a, b, uqa, lqa, shared) in &r.pairs {
        let pair = format!("{a}|{b}");
        v.push(Record::new("pair_uqa_f1", *uqa).label("pair", &pair));
        v.push(Record::new("pair_lqa_accuracy", *lqa).label("pair", &pair));
        v.push(Record::new("pair_shared_sentences", *shared).label("pair", &pair));
    }
    v
}
