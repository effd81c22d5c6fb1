//! Sufficient reasons (subset-minimal abductive explanations) by greedy
//! elimination under the exact oracle, and the pipeline seeding that
//! elimination with a tree-specific explanation.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::ExplainError;
use crate::model::{BoostedTree, Instance, Term};
use crate::oracle::{run_search, ConditionUniverse, OracleConfig, OracleStatus};
use crate::ts::{check_term, ts_explain_multi, EliminationOrder, OrderingPolicy, TsConfig, TsOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrConfig {
    /// Budget of each oracle call.
    pub oracle: OracleConfig,
    /// Wall-clock budget of the whole elimination; calls made after it
    /// expires time out immediately unless the root bound settles them.
    pub time_limit: Option<Duration>,
    pub ordering: OrderingPolicy,
    pub seed: u64,
}

impl Default for SrConfig {
    fn default() -> Self {
        SrConfig {
            oracle: OracleConfig::default(),
            time_limit: Some(Duration::from_secs(100)),
            ordering: OrderingPolicy::InstanceOrder,
            seed: 0,
        }
    }
}

impl SrConfig {
    /// The elimination order over all `n` attributes. Random orders use a
    /// stream no tree-specific run uses.
    pub fn order(&self, n: usize) -> EliminationOrder {
        match self.ordering {
            OrderingPolicy::InstanceOrder => EliminationOrder::identity(n),
            OrderingPolicy::Random => EliminationOrder::random(n, self.seed, u64::MAX),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrResult {
    pub term: Term,
    /// True iff no oracle call timed out: the term is then a sufficient
    /// reason. Otherwise it is still abductive (the seed was, and only proved
    /// removals were applied) but possibly not minimal.
    pub minimal_proved: bool,
    pub oracle_calls: usize,
    pub timeouts: usize,
    pub nodes_explored: u64,
    #[serde(with = "duration_secs")]
    pub elapsed: Duration,
}

/// Greedy elimination from `seed` under the exact oracle, visiting the
/// seed's characteristics in the order they appear in `order`. `order` may
/// list attributes outside the seed; they are skipped.
///
/// The seed is checked first: a disproved seed is an error, a timed-out
/// check clears `minimal_proved` and elimination proceeds.
pub fn sr_explain(
    bt: &BoostedTree,
    x: &Instance,
    seed: &Term,
    order: &[usize],
    cfg: &SrConfig,
) -> Result<SrResult, ExplainError> {
    let start = Instant::now();
    check_term(bt, seed)?;
    let n = bt.schema().len();
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n {
            return Err(ExplainError::InvalidOrder(format!("index {i} out of 0..{n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(ExplainError::InvalidOrder(format!("index {i} repeated")));
        }
    }
    if let Some(missing) = seed.iter().find(|&i| !seen[i]) {
        return Err(ExplainError::InvalidOrder(format!(
            "seed attribute {missing} missing from the order"
        )));
    }

    let universe = ConditionUniverse::build(bt);
    let mut oracle = cfg.oracle;
    if let Some(limit) = cfg.time_limit {
        let overall = start.checked_add(limit);
        oracle.deadline = match (oracle.deadline, overall) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }

    let mut result = SrResult {
        term: seed.clone(),
        minimal_proved: true,
        oracle_calls: 0,
        timeouts: 0,
        nodes_explored: 0,
        elapsed: Duration::ZERO,
    };
    let call = |t: &Term, result: &mut SrResult| {
        let v = run_search(bt, x, t, &universe, &oracle, Instant::now());
        result.oracle_calls += 1;
        result.nodes_explored += v.nodes_explored;
        if v.status == OracleStatus::Timeout {
            result.timeouts += 1;
            result.minimal_proved = false;
        }
        v.status
    };

    if call(seed, &mut result) == OracleStatus::Disproved {
        return Err(ExplainError::SeedNotAbductive);
    }
    for &i in order.iter().filter(|&&i| seed.contains(i)) {
        let candidate = result.term.without(i);
        if call(&candidate, &mut result) == OracleStatus::Proved {
            result.term = candidate;
        }
    }
    result.elapsed = start.elapsed();
    Ok(result)
}

/// `1 - |t| / n`.
pub fn reduction_rate(t: &Term, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 - t.len() as f64 / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub ts: TsOutcome,
    pub sr: SrResult,
}

/// Computes a shortest tree-specific explanation over `ts.runs` orderings and
/// reduces it to a sufficient reason, visiting its characteristics in the
/// order given by `sr`'s policy.
pub fn ts_sr_pipeline(
    bt: &BoostedTree,
    x: &Instance,
    ts: &TsConfig,
    sr: &SrConfig,
) -> Result<PipelineOutcome, ExplainError> {
    let start = Instant::now();
    let ts_out = ts_explain_multi(bt, x, ts)?;
    let mut sr_cfg = sr.clone();
    // The per-instance budget covers both stages.
    sr_cfg.time_limit = sr.time_limit.map(|l| l.saturating_sub(start.elapsed()));
    let order = sr.order(bt.schema().len());
    let sr_out = sr_explain(bt, x, &ts_out.term, order.as_slice(), &sr_cfg)?;
    Ok(PipelineOutcome {
        ts: ts_out,
        sr: sr_out,
    })
}

pub(crate) mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn sr_on_running_example_in_stated_order() {
        let bt = running_example();
        let x = running_example_instance(&bt);
        // A2, A3, A1, A4
        let out = sr_explain(&bt, &x, &Term::full(4), &[1, 2, 0, 3], &SrConfig::default()).unwrap();
        assert_eq!(out.term, Term::from_indices([0, 3]));
        assert!(out.minimal_proved);
        assert_eq!(out.oracle_calls, 5);
        assert_eq!(out.timeouts, 0);
    }

    #[test]
    fn sr_from_ts_seed() {
        let bt = running_example();
        let x = running_example_instance(&bt);
        let seed = Term::from_indices([1, 3]);
        let out = sr_explain(&bt, &x, &seed, &[0, 1, 2, 3], &SrConfig::default()).unwrap();
        assert_eq!(out.term, seed);
        assert_eq!(out.oracle_calls, 3);
    }

    #[test]
    fn bad_seed_and_order() {
        let bt = running_example();
        let x = running_example_instance(&bt);
        let cfg = SrConfig::default();
        assert_eq!(
            sr_explain(&bt, &x, &Term::empty(), &[], &cfg),
            Err(ExplainError::SeedNotAbductive)
        );
        assert!(matches!(
            sr_explain(&bt, &x, &Term::full(4), &[0, 1, 2], &cfg),
            Err(ExplainError::InvalidOrder(_))
        ));
        assert!(matches!(
            sr_explain(&bt, &x, &Term::full(4), &[0, 1, 2, 3, 3], &cfg),
            Err(ExplainError::InvalidOrder(_))
        ));
    }

    #[test]
    fn discrepancy_reduces_to_empty() {
        let bt = discrepancy_model(5);
        let x = discrepancy_instance(&bt);
        let out = ts_sr_pipeline(
            &bt,
            &x,
            &TsConfig {
                runs: 10,
                ..TsConfig::default()
            },
            &SrConfig::default(),
        )
        .unwrap();
        assert_eq!(out.ts.term, Term::full(5));
        assert!(out.sr.term.is_empty());
        assert!(out.sr.minimal_proved);
    }

    #[test]
    fn exhausted_budget_keeps_characteristics() {
        let bt = discrepancy_model(6);
        let x = discrepancy_instance(&bt);
        let cfg = SrConfig {
            oracle: OracleConfig {
                max_nodes: 2,
                ..OracleConfig::default()
            },
            ..SrConfig::default()
        };
        let out = sr_explain(&bt, &x, &Term::full(6), &[0, 1, 2, 3, 4, 5], &cfg).unwrap();
        assert!(!out.minimal_proved);
        assert!(out.timeouts > 0);
        assert!(!out.term.is_empty());
    }

    #[test]
    fn reduction_rates() {
        assert_eq!(reduction_rate(&Term::from_indices([0]), 4), 0.75);
        assert_eq!(reduction_rate(&Term::empty(), 0), 0.0);
    }
}
