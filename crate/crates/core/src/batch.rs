//! Explaining many instances of one model, with one record per instance and
//! aggregates recomputable from the records.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ExplainError;
use crate::model::{BoostedTree, Instance, Term};
use crate::oracle::{is_abductive, OracleStatus};
use crate::sr::{reduction_rate, sr_explain, ts_sr_pipeline, SrConfig};
use crate::ts::{ts_explain_multi, TsConfig, TsStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Shortest tree-specific explanation over several orderings.
    Ts,
    /// Sufficient reason by elimination from the full instance.
    Sr,
    /// Sufficient reason by elimination from the shortest tree-specific one.
    TsSr,
    /// Verify a given term per instance with the exact oracle.
    Check,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchConfig {
    pub mode: Mode,
    pub ts: TsConfig,
    /// Oracle budget, per-instance time limit and SR ordering.
    pub sr: SrConfig,
    /// Explain instances in parallel (results stay in input order).
    pub parallel: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            mode: Mode::TsSr,
            ts: TsConfig::default(),
            sr: SrConfig::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Characteristic {
    pub attribute: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStats {
    pub calls: usize,
    pub timeouts: usize,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: usize,
    pub predicted_class: usize,
    pub mode: Mode,
    pub explanation: Vec<Characteristic>,
    pub kept: Vec<usize>,
    pub size: usize,
    pub n: usize,
    pub reduction_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ts: Option<TsStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleStats>,
    /// Sufficient-reason modes: whether minimality was proved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_proved: Option<bool>,
    /// Check mode: the oracle's verdict (`None` on timeout).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abductive: Option<bool>,
    pub timed_out: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub errors: usize,
    pub timed_out: usize,
    /// Over records without error.
    pub mean_size: f64,
    pub mean_reduction_rate: f64,
    pub mean_elapsed_secs: f64,
    pub total_elapsed_secs: f64,
    pub minimal_proved: usize,
    pub abductive: usize,
}

impl Aggregate {
    pub fn from_records(records: &[InstanceRecord]) -> Self {
        let ok: Vec<&InstanceRecord> = records.iter().filter(|r| r.error.is_none()).collect();
        let mean = |f: &dyn Fn(&InstanceRecord) -> f64| {
            if ok.is_empty() {
                0.0
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            }
        };
        Aggregate {
            instances: records.len(),
            errors: records.len() - ok.len(),
            timed_out: records.iter().filter(|r| r.timed_out).count(),
            mean_size: mean(&|r| r.size as f64),
            mean_reduction_rate: mean(&|r| r.reduction_rate),
            mean_elapsed_secs: mean(&|r| r.elapsed_secs),
            total_elapsed_secs: records.iter().map(|r| r.elapsed_secs).sum(),
            minimal_proved: records.iter().filter(|r| r.minimal_proved == Some(true)).count(),
            abductive: records.iter().filter(|r| r.abductive == Some(true)).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    pub records: Vec<InstanceRecord>,
    pub aggregate: Aggregate,
}

impl Report {
    pub fn any_timeout(&self) -> bool {
        self.records.iter().any(|r| r.timed_out)
    }
}

/// Explains every instance. In [`Mode::Check`], `terms` must hold one term
/// per instance.
pub fn run_batch(
    bt: &BoostedTree,
    instances: &[Instance],
    terms: Option<&[Term]>,
    cfg: &BatchConfig,
) -> Result<Report, ExplainError> {
    if cfg.mode == Mode::Check {
        match terms {
            Some(t) if t.len() == instances.len() => {}
            Some(t) => {
                return Err(ExplainError::InvalidOrder(format!(
                    "{} terms for {} instances",
                    t.len(),
                    instances.len()
                )))
            }
            None => return Err(ExplainError::InvalidOrder("check mode needs terms".into())),
        }
    }
    let one = |(id, x): (usize, &Instance)| explain_one(bt, id, x, terms.map(|t| &t[id]), cfg);
    let records: Vec<InstanceRecord> = if cfg.parallel {
        instances.par_iter().enumerate().map(one).collect()
    } else {
        instances.iter().enumerate().map(one).collect()
    };
    let aggregate = Aggregate::from_records(&records);
    Ok(Report {
        mode: cfg.mode,
        records,
        aggregate,
    })
}

fn explain_one(
    bt: &BoostedTree,
    id: usize,
    x: &Instance,
    given: Option<&Term>,
    cfg: &BatchConfig,
) -> InstanceRecord {
    let start = Instant::now();
    let n = bt.schema().len();
    let mut rec = InstanceRecord {
        id,
        predicted_class: bt.classify(x),
        mode: cfg.mode,
        explanation: Vec::new(),
        kept: Vec::new(),
        size: 0,
        n,
        reduction_rate: 0.0,
        ts: None,
        oracle: None,
        minimal_proved: None,
        abductive: None,
        timed_out: false,
        error: None,
        elapsed_secs: 0.0,
    };
    let outcome: Result<Term, ExplainError> = (|| match cfg.mode {
        Mode::Ts => {
            let out = ts_explain_multi(bt, x, &cfg.ts)?;
            rec.ts = Some(out.stats);
            Ok(out.term)
        }
        Mode::Sr => {
            let order = cfg.sr.order(n);
            let out = sr_explain(bt, x, &Term::full(n), order.as_slice(), &cfg.sr)?;
            rec.oracle = Some(OracleStats {
                calls: out.oracle_calls,
                timeouts: out.timeouts,
                nodes: out.nodes_explored,
            });
            rec.minimal_proved = Some(out.minimal_proved);
            rec.timed_out = out.timeouts > 0;
            Ok(out.term)
        }
        Mode::TsSr => {
            let out = ts_sr_pipeline(bt, x, &cfg.ts, &cfg.sr)?;
            rec.ts = Some(out.ts.stats);
            rec.oracle = Some(OracleStats {
                calls: out.sr.oracle_calls,
                timeouts: out.sr.timeouts,
                nodes: out.sr.nodes_explored,
            });
            rec.minimal_proved = Some(out.sr.minimal_proved);
            rec.timed_out = out.sr.timeouts > 0;
            Ok(out.sr.term)
        }
        Mode::Check => {
            let t = given.expect("terms validated").clone();
            let mut oc = cfg.sr.oracle;
            oc.time_limit = match (oc.time_limit, cfg.sr.time_limit) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            let v = is_abductive(bt, x, &t, &oc)?;
            rec.oracle = Some(OracleStats {
                calls: 1,
                timeouts: usize::from(v.status == OracleStatus::Timeout),
                nodes: v.nodes_explored,
            });
            rec.abductive = v.abductive();
            rec.timed_out = v.status == OracleStatus::Timeout;
            Ok(t)
        }
    })();
    match outcome {
        Ok(t) => {
            let schema = bt.schema();
            rec.explanation = t
                .iter()
                .map(|i| Characteristic {
                    attribute: schema.attribute(i).name.clone(),
                    value: schema.format_value(i, x.value(i)),
                })
                .collect();
            rec.kept = t.to_vec();
            rec.size = t.len();
            rec.reduction_rate = reduction_rate(&t, n);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec.elapsed_secs = Duration::as_secs_f64(&start.elapsed());
    rec
}
