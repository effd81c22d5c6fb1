//! Tree-specific explanations.
//!
//! The tree-specific test replaces the joint worst instance of a forest by
//! the per-tree worst (and, for competing classes, best) instances: it only
//! needs `w↓`/`w↑` of each tree, so it runs in `O(|BT|)`. When it succeeds
//! the term is an abductive explanation; it may fail on terms that are.
//! Greedy elimination under this test yields a tree-specific explanation
//! after `n` tests.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{forest_bound, tree_bound, Direction, EnsembleBounds, Goal};
use crate::domain::Restriction;
use crate::error::ExplainError;
use crate::model::{BoostedTree, Instance, Term};

/// The order in which characteristics are considered for removal: a
/// permutation of attribute indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder(Vec<usize>);

impl EliminationOrder {
    pub fn identity(n: usize) -> Self {
        EliminationOrder((0..n).collect())
    }

    /// Validates that `order` is a permutation of `0..n`.
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self, ExplainError> {
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n {
                return Err(ExplainError::InvalidOrder(format!("index {i} out of 0..{n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(ExplainError::InvalidOrder(format!("index {i} repeated")));
            }
        }
        if order.len() != n {
            return Err(ExplainError::InvalidOrder(format!(
                "{} indices given, expected {n}",
                order.len()
            )));
        }
        Ok(EliminationOrder(order))
    }

    /// Uniformly random permutation drawn from substream `stream` of `seed`.
    pub fn random(n: usize, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        EliminationOrder(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// The order restricted to the characteristics of `t`.
    pub fn restricted_to(&self, t: &Term) -> Vec<usize> {
        self.0.iter().copied().filter(|&i| t.contains(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPolicy {
    InstanceOrder,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsConfig {
    pub runs: usize,
    pub seed: u64,
    pub ordering: OrderingPolicy,
}

impl Default for TsConfig {
    fn default() -> Self {
        TsConfig {
            runs: 1000,
            seed: 0,
            ordering: OrderingPolicy::Random,
        }
    }
}

impl TsConfig {
    /// The elimination order of run `run`.
    pub fn order(&self, n: usize, run: usize) -> EliminationOrder {
        match self.ordering {
            OrderingPolicy::InstanceOrder => EliminationOrder::identity(n),
            OrderingPolicy::Random => EliminationOrder::random(n, self.seed, run as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsStats {
    pub runs: usize,
    pub min_size: usize,
    pub mean_size: f64,
    pub max_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsOutcome {
    /// A shortest explanation found; ties go to the lexicographically smallest
    /// index set.
    pub term: Term,
    pub stats: TsStats,
    pub elapsed: Duration,
}

pub(crate) fn check_term(bt: &BoostedTree, t: &Term) -> Result<(), ExplainError> {
    let n = bt.schema().len();
    match t.iter().find(|&i| i >= n) {
        Some(attribute) => Err(ExplainError::TermOutOfRange { attribute, len: n }),
        None => Ok(()),
    }
}

/// The tree-specific (incomplete implicant) test of `t` for class `class`,
/// which must be the prediction for `x`: the predicted class's summed worst
/// weights beat every other class's summed best weights (binary: sign
/// tests). When every tree is constant under `t` the test is decided by
/// classification itself, so `t_x` always passes even when `x`'s class is
/// decided by a tie rule.
pub fn ts_test(
    bt: &BoostedTree,
    x: &Instance,
    t: &Term,
    class: usize,
) -> Result<bool, ExplainError> {
    check_term(bt, t)?;
    let predicted = bt.classify(x);
    if predicted != class {
        return Err(ExplainError::ClassMismatch {
            given: class,
            predicted,
        });
    }
    let r = Restriction::of_term(bt.schema(), x, t);
    let forests = bt.forests();
    let certified = match Goal::for_class(bt, class) {
        Goal::Positive => forest_bound(&forests[0], &r, Direction::Min) > 0.0,
        Goal::Negative => forest_bound(&forests[0], &r, Direction::Max) <= 0.0,
        Goal::Class(i) => {
            let worst = forest_bound(&forests[i], &r, Direction::Min);
            (0..forests.len())
                .filter(|&k| k != i)
                .all(|k| worst > forest_bound(&forests[k], &r, Direction::Max))
        }
    };
    Ok(certified || is_constant(bt, &r))
}

/// Whether every tree has a single reachable leaf under `r`.
fn is_constant(bt: &BoostedTree, r: &Restriction) -> bool {
    bt.forests().iter().flat_map(|f| &f.trees).all(|tree| {
        tree_bound(tree, r, Direction::Min).weight == tree_bound(tree, r, Direction::Max).weight
    })
}

/// Greedy elimination from `t_x` under the tree-specific test.
pub fn ts_explain(bt: &BoostedTree, x: &Instance, order: &EliminationOrder) -> Term {
    ts_explain_counted(bt, x, order).0
}

/// [`ts_explain`] plus the number of tree-specific tests performed.
pub(crate) fn ts_explain_counted(
    bt: &BoostedTree,
    x: &Instance,
    order: &EliminationOrder,
) -> (Term, usize) {
    let schema = bt.schema();
    let n = schema.len();
    assert_eq!(order.as_slice().len(), n, "order must cover every attribute");
    let goal = Goal::for_class(bt, bt.classify(x));
    let mut t = Term::full(n);
    let mut r = Restriction::of_term(schema, x, &t);
    let mut bounds = EnsembleBounds::new(bt, &mut r);
    let mut tests = 0;
    for &i in order.as_slice() {
        r.free(schema, i);
        let saved = bounds.refresh(i, &mut r);
        tests += 1;
        // A constant region has the class of x, which lies in it.
        if goal.certifies(bounds.margin_lower_bound(goal)) || bounds.all_tight() {
            t.remove(i);
        } else {
            r.pin(schema, i, x.value(i));
            bounds.restore(i, saved);
        }
    }
    (t, tests)
}

/// Runs [`ts_explain`] `cfg.runs` times with per-run orderings and keeps a
/// shortest result. Runs execute in parallel; the result depends only on
/// `cfg`.
pub fn ts_explain_multi(
    bt: &BoostedTree,
    x: &Instance,
    cfg: &TsConfig,
) -> Result<TsOutcome, ExplainError> {
    if cfg.runs == 0 {
        return Err(ExplainError::NoRuns);
    }
    let start = Instant::now();
    let n = bt.schema().len();
    let terms: Vec<Term> = match cfg.ordering {
        OrderingPolicy::InstanceOrder => {
            vec![ts_explain(bt, x, &EliminationOrder::identity(n)); cfg.runs]
        }
        OrderingPolicy::Random => (0..cfg.runs)
            .into_par_iter()
            .map(|run| ts_explain(bt, x, &cfg.order(n, run)))
            .collect(),
    };
    let sizes = terms.iter().map(Term::len);
    let stats = TsStats {
        runs: cfg.runs,
        min_size: sizes.clone().min().unwrap_or(0),
        mean_size: sizes.clone().sum::<usize>() as f64 / cfg.runs as f64,
        max_size: sizes.max().unwrap_or(0),
    };
    let term = terms
        .into_iter()
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
        .expect("at least one run");
    Ok(TsOutcome {
        term,
        stats,
        elapsed: start.elapsed(),
    })
}
