use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::Method;
use crate::gig::GigParams;

/// One method on one replication and sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub replication: usize,
    pub method: Method,
    pub sample_size: usize,
    pub true_alpha: f64,
    pub true_gig: Option<GigParams>,
    pub est_alpha: Option<f64>,
    pub est_gig: Option<GigParams>,
    pub e_alpha: Option<f64>,
    pub e_q: Option<f64>,
    pub e_mu: Option<f64>,
    pub e_beta: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub method: Method,
    pub sample_size: usize,
    pub metric: String,
    /// Mean over the replications where the method succeeded.
    pub value: f64,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    pub raw: Vec<RawRecord>,
}

const METRICS: [&str; 4] = ["E_alpha", "E_Q", "E_mu", "E_beta"];

fn metric(r: &RawRecord, name: &str) -> Option<f64> {
    match name {
        "E_alpha" => r.e_alpha,
        "E_Q" => r.e_q,
        "E_mu" => r.e_mu,
        _ => r.e_beta,
    }
}

impl ErrorReport {
    pub fn from_raw(mut raw: Vec<RawRecord>) -> Self {
        raw.sort_by(|a, b| (a.replication, a.sample_size, a.method).cmp(&(b.replication, b.sample_size, b.method)));
        let mut groups: BTreeMap<(Method, usize), Vec<&RawRecord>> = BTreeMap::new();
        for r in &raw {
            groups.entry((r.method, r.sample_size)).or_default().push(r);
        }
        let mut rows = Vec::new();
        for ((method, n), recs) in groups {
            let failures = recs.iter().filter(|r| r.failure.is_some()).count();
            for name in METRICS {
                let vals: Vec<f64> = recs.iter().filter_map(|r| metric(r, name)).collect();
                if vals.is_empty() && failures < recs.len() {
                    continue;
                }
                let applicable = recs.iter().any(|r| metric(r, name).is_some())
                    || (name == "E_alpha")
                    || (name == "E_Q" && recs.iter().any(|r| r.true_gig.is_some()));
                if !applicable {
                    continue;
                }
                rows.push(ErrorRow {
                    method,
                    sample_size: n,
                    metric: name.to_string(),
                    value: if vals.is_empty() { f64::NAN } else { vals.iter().sum::<f64>() / vals.len() as f64 },
                    successes: vals.len(),
                    failures,
                });
            }
        }
        Self { rows, raw }
    }

    pub fn get(&self, method: Method, sample_size: usize, metric: &str) -> Option<&ErrorRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.sample_size == sample_size && r.metric == metric)
    }

    /// Long format: `method,sample_size,metric,value,successes,failures`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,sample_size,metric,value,successes,failures\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{},{}", r.method.name(), r.sample_size, r.metric, r.value, r.successes, r.failures);
        }
        s
    }

    /// One table per metric with sample sizes as rows and methods as columns.
    pub fn to_markdown(&self) -> String {
        let mut methods: Vec<Method> = self.rows.iter().map(|r| r.method).collect();
        methods.sort();
        methods.dedup();
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.sample_size).collect();
        sizes.sort();
        sizes.dedup();
        let mut s = String::new();
        for name in METRICS {
            if !self.rows.iter().any(|r| r.metric == name) {
                continue;
            }
            let _ = writeln!(s, "### {name}\n");
            let _ = write!(s, "| n |");
            for m in &methods {
                let _ = write!(s, " {} |", m.name());
            }
            let _ = write!(s, "\n|---|");
            for _ in &methods {
                let _ = write!(s, "---|");
            }
            s.push('\n');
            for n in &sizes {
                let _ = write!(s, "| {n} |");
                for m in &methods {
                    match self.get(*m, *n, name) {
                        Some(r) if r.failures > 0 => {
                            let _ = write!(s, " {:.3} ({} failed) |", r.value, r.failures);
                        }
                        Some(r) => {
                            let _ = write!(s, " {:.3} |", r.value);
                        }
                        None => s.push_str(" - |"),
                    }
                }
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }
}
