//! Exact implicant test: is `t` an abductive explanation of `x`?
//!
//! Deciding this is coNP-complete for boosted trees, so both procedures here
//! are exponential in the worst case:
//!
//! * [`is_abductive_bruteforce`] enumerates every cell of the condition
//!   universe compatible with `t` (the model is constant on a cell) and
//!   classifies one representative per cell.
//! * [`is_abductive`] runs a depth-first branch-and-bound over restrictions
//!   extending `t`, bounding the goal margin from below with the per-tree
//!   worst/best weights. A region whose bound certifies the prediction is
//!   pruned; a constant region is classified directly and either raises the
//!   incumbent margin or yields a counterexample.

use std::time::{Duration, Instant};

use crate::bounds::{leaf_range, EnsembleBounds, Goal};
use crate::domain::{interval_representative, CategoryDomain, DomainConstraint, NumberDomain, Restriction};
use crate::error::ExplainError;
use crate::model::{AttributeKind, BoostedTree, Instance, Node, Term, Test, Value};
use crate::ts::check_term;

/// Per-attribute cell decomposition induced by the model's conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeCells {
    /// Cells `(-∞, θ1], (θ1, θ2], …, (θq, +∞)`.
    Numerical { thresholds: Vec<f64> },
    /// One cell per tested category plus, when some declared category is
    /// never tested, an "other" cell represented by the smallest such one.
    Categorical {
        tested: Vec<usize>,
        other: Option<usize>,
    },
    /// Two cells if the attribute is tested, one otherwise.
    Boolean { tested: bool },
}

impl AttributeCells {
    pub fn count(&self) -> usize {
        match self {
            AttributeCells::Numerical { thresholds } => thresholds.len() + 1,
            AttributeCells::Categorical { tested, other } => {
                tested.len() + usize::from(other.is_some())
            }
            AttributeCells::Boolean { tested } => 1 + usize::from(*tested),
        }
    }

    /// One representative value per cell, in cell order.
    pub fn representatives(&self) -> Vec<Value> {
        match self {
            AttributeCells::Numerical { thresholds } => {
                let mut bounds = Vec::with_capacity(thresholds.len() + 2);
                bounds.push(f64::NEG_INFINITY);
                bounds.extend_from_slice(thresholds);
                bounds.push(f64::INFINITY);
                bounds
                    .windows(2)
                    .map(|w| Value::Number(interval_representative(w[0], w[1])))
                    .collect()
            }
            AttributeCells::Categorical { tested, other } => tested
                .iter()
                .chain(other.iter())
                .map(|&c| Value::Category(c))
                .collect(),
            AttributeCells::Boolean { tested } => {
                if *tested {
                    vec![Value::Bool(false), Value::Bool(true)]
                } else {
                    vec![Value::Bool(false)]
                }
            }
        }
    }

    /// Number of cells meeting a constraint's denotation.
    pub fn count_within(&self, dc: &DomainConstraint) -> usize {
        match (self, dc) {
            (_, DomainConstraint::Number(NumberDomain::Pinned(_))) => 1,
            (
                AttributeCells::Numerical { thresholds },
                DomainConstraint::Number(NumberDomain::Interval { lo, hi }),
            ) => 1 + inner_thresholds(thresholds, *lo, *hi).len(),
            (AttributeCells::Categorical { tested, other }, DomainConstraint::Category(d)) => {
                if d.fixed.is_some() {
                    return 1;
                }
                let tested_allowed = tested.iter().filter(|&&c| d.allows_value(c)).count();
                let untested_allowed = d.allowed_count() > tested_allowed;
                debug_assert!(!untested_allowed || other.is_some());
                tested_allowed + usize::from(untested_allowed)
            }
            (AttributeCells::Boolean { tested }, DomainConstraint::Boolean(fixed)) => {
                if *tested && fixed.is_none() {
                    2
                } else {
                    1
                }
            }
            _ => panic!("constraint kind does not match attribute cells"),
        }
    }
}

/// Thresholds strictly inside `(lo, hi)`: the cut points of `(lo, hi]`.
fn inner_thresholds(thresholds: &[f64], lo: f64, hi: f64) -> &[f64] {
    let start = thresholds.partition_point(|&t| t <= lo);
    let end = thresholds.partition_point(|&t| t < hi);
    &thresholds[start..end.max(start)]
}

/// The finite cell decomposition of instance space under which a model is
/// piecewise constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionUniverse {
    attributes: Vec<AttributeCells>,
}

impl ConditionUniverse {
    pub fn build(bt: &BoostedTree) -> Self {
        let schema = bt.schema();
        let mut thresholds: Vec<Vec<f64>> = vec![Vec::new(); schema.len()];
        let mut categories: Vec<Vec<usize>> = vec![Vec::new(); schema.len()];
        let mut booleans = vec![false; schema.len()];
        for tree in bt.forests().iter().flat_map(|f| &f.trees) {
            for c in tree.conditions() {
                match c.test {
                    Test::GreaterThan(t) => thresholds[c.attribute].push(t),
                    Test::EqualsCategory(k) => categories[c.attribute].push(k),
                    Test::IsTrue => booleans[c.attribute] = true,
                }
            }
        }
        let attributes = schema
            .attributes()
            .iter()
            .enumerate()
            .map(|(i, a)| match &a.kind {
                AttributeKind::Numerical => {
                    let mut t = std::mem::take(&mut thresholds[i]);
                    t.sort_by(f64::total_cmp);
                    t.dedup();
                    AttributeCells::Numerical { thresholds: t }
                }
                AttributeKind::Categorical(cats) => {
                    let mut tested = std::mem::take(&mut categories[i]);
                    tested.sort_unstable();
                    tested.dedup();
                    let other = (0..cats.len()).find(|c| tested.binary_search(c).is_err());
                    AttributeCells::Categorical { tested, other }
                }
                AttributeKind::Boolean => AttributeCells::Boolean {
                    tested: booleans[i],
                },
            })
            .collect();
        ConditionUniverse { attributes }
    }

    pub fn attribute(&self, i: usize) -> &AttributeCells {
        &self.attributes[i]
    }

    pub fn attributes(&self) -> &[AttributeCells] {
        &self.attributes
    }

    /// Number of cells compatible with `t` (free attributes only).
    pub fn cells_extending(&self, t: &Term) -> u128 {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(i, _)| !t.contains(*i))
            .fold(1u128, |acc, (_, a)| acc.saturating_mul(a.count() as u128))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Proved,
    Disproved,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleVerdict {
    pub status: OracleStatus,
    /// An instance extending `t` whose class differs from `x`'s.
    pub counterexample: Option<Instance>,
    /// Minimum goal margin over all extensions of `t`, when established: always
    /// for brute force; for branch-and-bound only in
    /// [`Objective::MinimizeMargin`] mode on a proved verdict.
    pub optimal_margin: Option<f64>,
    pub nodes_explored: u64,
}

impl OracleVerdict {
    /// `Some(true)` if proved, `Some(false)` if disproved, `None` on timeout.
    pub fn abductive(&self) -> Option<bool> {
        match self.status {
            OracleStatus::Proved => Some(true),
            OracleStatus::Disproved => Some(false),
            OracleStatus::Timeout => None,
        }
    }
}

/// Attributes evaluated by lookahead at each branching node.
const STRONG_BRANCHING_CANDIDATES: usize = 8;

/// Default cap on the number of cells brute force may enumerate.
pub const DEFAULT_BRUTEFORCE_CAP: u128 = 1 << 24;

/// Exhaustive implicant test over the cells of the condition universe.
///
/// The margin is computed for every cell, so `optimal_margin` is always
/// reported; the counterexample is the first misclassified cell in
/// enumeration order.
pub fn is_abductive_bruteforce(
    bt: &BoostedTree,
    x: &Instance,
    t: &Term,
    cap: u128,
) -> Result<OracleVerdict, ExplainError> {
    check_term(bt, t)?;
    let universe = ConditionUniverse::build(bt);
    let cells = universe.cells_extending(t);
    if cells > cap {
        return Err(ExplainError::CapExceeded { cells, cap });
    }
    let class = bt.classify(x);
    let goal = Goal::for_class(bt, class);
    let free: Vec<(usize, Vec<Value>)> = (0..bt.schema().len())
        .filter(|&i| !t.contains(i))
        .map(|i| (i, universe.attribute(i).representatives()))
        .collect();

    let mut values = x.values().to_vec();
    let mut digits = vec![0usize; free.len()];
    for (d, (i, reps)) in digits.iter().zip(&free) {
        values[*i] = reps[*d];
    }
    let mut counterexample = None;
    let mut min_margin = f64::INFINITY;
    let mut explored = 0u64;
    loop {
        let cell = Instance::from_values_unchecked(values.clone());
        let weights = bt.forest_weights(&cell);
        explored += 1;
        min_margin = min_margin.min(goal.margin(&weights));
        if counterexample.is_none() && bt.class_of_weights(&weights) != class {
            counterexample = Some(cell);
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == free.len() {
                let status = if counterexample.is_some() {
                    OracleStatus::Disproved
                } else {
                    OracleStatus::Proved
                };
                return Ok(OracleVerdict {
                    status,
                    counterexample,
                    optimal_margin: Some(min_margin),
                    nodes_explored: explored,
                });
            }
            let (attr, reps) = &free[pos];
            digits[pos] += 1;
            if digits[pos] < reps.len() {
                values[*attr] = reps[digits[pos]];
                break;
            }
            digits[pos] = 0;
            values[*attr] = reps[0];
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Stop as soon as the answer is known; prune every certified region.
    Decide,
    /// Also compute the exact minimum margin on proved instances.
    MinimizeMargin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
    /// Absolute deadline, combined with `time_limit` (earliest wins).
    pub deadline: Option<Instant>,
    pub objective: Objective,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_nodes: 10_000_000,
            time_limit: Some(Duration::from_secs(100)),
            deadline: None,
            objective: Objective::Decide,
        }
    }
}

impl OracleConfig {
    pub fn minimize(mut self) -> Self {
        self.objective = Objective::MinimizeMargin;
        self
    }

    pub fn unlimited() -> Self {
        OracleConfig {
            max_nodes: u64::MAX,
            time_limit: None,
            deadline: None,
            objective: Objective::Decide,
        }
    }

    fn effective_deadline(&self, start: Instant) -> Option<Instant> {
        let by_limit = self.time_limit.and_then(|d| start.checked_add(d));
        match (by_limit, self.deadline) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Branch-and-bound implicant test. With [`Objective::Decide`] a term
/// passing the tree-specific test is proved at the root.
pub fn is_abductive(
    bt: &BoostedTree,
    x: &Instance,
    t: &Term,
    cfg: &OracleConfig,
) -> Result<OracleVerdict, ExplainError> {
    check_term(bt, t)?;
    let start = Instant::now();
    let universe = ConditionUniverse::build(bt);
    Ok(run_search(bt, x, t, &universe, cfg, start))
}

/// [`is_abductive`] with a prebuilt universe, for repeated calls on one model.
pub(crate) fn run_search(
    bt: &BoostedTree,
    x: &Instance,
    t: &Term,
    universe: &ConditionUniverse,
    cfg: &OracleConfig,
    start: Instant,
) -> OracleVerdict {
    let goal = Goal::for_class(bt, bt.classify(x));
    let mut r = Restriction::of_term(bt.schema(), x, t);
    let bounds = EnsembleBounds::new(bt, &mut r);
    let mut search = Search {
        bt,
        x,
        goal,
        universe,
        bounds,
        r,
        objective: cfg.objective,
        max_nodes: cfg.max_nodes,
        deadline: cfg.effective_deadline(start),
        nodes: 0,
        incumbent: f64::INFINITY,
        counterexample: None,
        timed_out: false,
    };
    let root = search.bounds.margin_lower_bound(goal);
    let settled_at_root = cfg.objective == Objective::Decide && goal.certifies(root);
    if !settled_at_root && !search.bounds.all_tight() {
        if let Flow::Continue = search.probe(x.clone()) {
            let start = greedy_worst_instance(bt, &search.r, goal);
            search.probe(start);
        }
    }
    if search.counterexample.is_none() {
        search.explore(root);
    }
    let status = if search.counterexample.is_some() {
        OracleStatus::Disproved
    } else if search.timed_out {
        OracleStatus::Timeout
    } else {
        OracleStatus::Proved
    };
    let optimal_margin = (status == OracleStatus::Proved
        && cfg.objective == Objective::MinimizeMargin)
        .then_some(search.incumbent);
    OracleVerdict {
        status,
        counterexample: search.counterexample,
        optimal_margin,
        nodes_explored: search.nodes,
    }
}

/// Coordinate descent on the goal margin over the cell representatives
/// allowed by `r`, starting from `start` (which must lie in `r`). Returns the
/// last instance visited with its margin and class; it stops early at the
/// first instance classified differently from the goal class.
fn descend(
    bt: &BoostedTree,
    start: Instance,
    r: &Restriction,
    universe: &ConditionUniverse,
    goal: Goal,
) -> (Instance, f64, usize) {
    const MAX_SWEEPS: usize = 16;
    let forests = bt.forests();
    let mut z = start;
    let mut leaves: Vec<Vec<f64>> = forests
        .iter()
        .map(|f| f.trees.iter().map(|tr| tr.eval(&z)).collect())
        .collect();
    let weights_of = |leaves: &[Vec<f64>]| -> Vec<f64> {
        leaves.iter().map(|l| l.iter().fold(0.0, |acc, w| acc + w)).collect()
    };
    let free: Vec<(usize, Vec<Value>)> = (0..bt.schema().len())
        .filter(|&a| !bt.attribute_trees(a).is_empty())
        .filter_map(|a| {
            let dc = r.constraint(a);
            let reps: Vec<Value> = universe
                .attribute(a)
                .representatives()
                .into_iter()
                .filter(|v| dc.contains(*v))
                .collect();
            (reps.len() > 1).then_some((a, reps))
        })
        .collect();
    let mut weights = weights_of(&leaves);
    let mut current = goal.margin(&weights);
    for _ in 0..MAX_SWEEPS {
        let mut improved = false;
        for (a, reps) in &free {
            let original = z.value(*a);
            let mut best = (current, original);
            for &v in reps {
                if v == original {
                    continue;
                }
                z.set_unchecked(*a, v);
                for &(j, k) in bt.attribute_trees(*a) {
                    leaves[j][k] = forests[j].trees[k].eval(&z);
                }
                let m = goal.margin(&weights_of(&leaves));
                if m < best.0 {
                    best = (m, v);
                }
            }
            z.set_unchecked(*a, best.1);
            for &(j, k) in bt.attribute_trees(*a) {
                leaves[j][k] = forests[j].trees[k].eval(&z);
            }
            if best.1 != original {
                improved = true;
                current = best.0;
                weights = weights_of(&leaves);
                let class = bt.class_of_weights(&weights);
                if class != goal.class() {
                    return (z, current, class);
                }
            }
        }
        if !improved {
            break;
        }
    }
    let class = bt.class_of_weights(&weights);
    (z, current, class)
}

/// An instance of `r` built by committing, widest tree first, to each
/// tree's worst leaf still reachable (lowest for the goal class's forest,
/// highest for the others).
fn greedy_worst_instance(bt: &BoostedTree, r: &Restriction, goal: Goal) -> Instance {
    let mut r = r.clone();
    let mut trees: Vec<(f64, usize, usize)> = Vec::new();
    for (j, f) in bt.forests().iter().enumerate() {
        for (k, tree) in f.trees.iter().enumerate() {
            let range = leaf_range(tree, &mut r);
            if !range.is_tight() {
                trees.push((range.max - range.min, j, k));
            }
        }
    }
    trees.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for (_, j, k) in trees {
        let tree = &bt.forests()[j].trees[k];
        let lowest = match goal {
            Goal::Positive => true,
            Goal::Negative => false,
            Goal::Class(i) => i == j,
        };
        let range = leaf_range(tree, &mut r);
        let leaf = if lowest { range.min_leaf } else { range.max_leaf };
        for (node, outcome) in tree.path_to(leaf) {
            if let Node::Split { condition, .. } = &tree.nodes()[node] {
                r.constraint_mut(condition.attribute).refine(&condition.test, outcome);
            }
        }
    }
    r.representative()
}

struct Search<'a> {
    bt: &'a BoostedTree,
    x: &'a Instance,
    goal: Goal,
    universe: &'a ConditionUniverse,
    bounds: EnsembleBounds<'a>,
    r: Restriction,
    objective: Objective,
    max_nodes: u64,
    deadline: Option<Instant>,
    nodes: u64,
    incumbent: f64,
    counterexample: Option<Instance>,
    timed_out: bool,
}

enum Flow {
    Continue,
    Stop,
}

struct Branch {
    attribute: usize,
    children: Vec<(DomainConstraint, f64)>,
}

impl Search<'_> {
    /// Explores the current region, whose margin lower bound is `lb`.
    fn explore(&mut self, lb: f64) -> Flow {
        self.nodes += 1;
        if self.goal.certifies(lb) {
            match self.objective {
                Objective::Decide => return Flow::Continue,
                Objective::MinimizeMargin if lb >= self.incumbent => return Flow::Continue,
                Objective::MinimizeMargin => {}
            }
        }
        if self.bounds.all_tight() {
            return self.classify_region(lb);
        }
        if self.out_of_budget() {
            self.timed_out = true;
            return Flow::Stop;
        }
        let branch = self.choose_branch(lb);
        let saved_constraint = self.r.constraint(branch.attribute).clone();
        let a = branch.attribute;
        for (child, child_lb) in branch.children {
            self.r.set(a, child);
            let saved = self.bounds.refresh(a, &mut self.r);
            let flow = self.explore(child_lb);
            self.bounds.restore(a, saved);
            if let Flow::Stop = flow {
                self.r.set(a, saved_constraint);
                return Flow::Stop;
            }
        }
        self.r.set(a, saved_constraint);
        Flow::Continue
    }

    /// Runs the descent heuristic from `start` (inside the current region),
    /// recording a counterexample or an improved incumbent.
    fn probe(&mut self, start: Instance) -> Flow {
        let (z, margin, class) = descend(self.bt, start, &self.r, self.universe, self.goal);
        if class != self.goal.class() {
            self.counterexample = Some(z);
            return Flow::Stop;
        }
        self.incumbent = self.incumbent.min(margin);
        Flow::Continue
    }

    /// Every tree is constant on the region: classify one representative.
    fn classify_region(&mut self, lb: f64) -> Flow {
        let rep = self.r.representative();
        let weights = self.bt.forest_weights(&rep);
        let margin = self.goal.margin(&weights);
        debug_assert_eq!(margin, lb, "constant region bound must equal its margin");
        if self.bt.class_of_weights(&weights) != self.goal.class() {
            self.counterexample = Some(rep);
            return Flow::Stop;
        }
        self.incumbent = self.incumbent.min(margin);
        Flow::Continue
    }

    fn out_of_budget(&self) -> bool {
        self.nodes > self.max_nodes || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Picks the attribute whose split raises the bound most (by the worse
    /// child, then the better child, then the smallest index) among the
    /// candidates with the widest non-constant trees, and orders its
    /// children: the child containing `x`'s value last, others by bound.
    fn choose_branch(&mut self, lb: f64) -> Branch {
        let mut candidates: Vec<(f64, usize)> = (0..self.r.len())
            .filter_map(|a| self.spread(a).map(|s| (s, a)))
            .collect();
        if candidates.len() > STRONG_BRANCHING_CANDIDATES {
            candidates.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
            candidates.truncate(STRONG_BRANCHING_CANDIDATES);
            candidates.sort_by_key(|c| c.1);
        }
        let mut best: Option<(f64, f64, Branch)> = None;
        for (_, a) in candidates {
            let Some(split) = self.split(a) else { continue };
            let original = self.r.constraint(a).clone();
            let mut children = Vec::with_capacity(split.len());
            for child in split {
                self.r.set(a, child.clone());
                let saved = self.bounds.refresh(a, &mut self.r);
                children.push((child, self.bounds.margin_lower_bound(self.goal)));
                self.bounds.restore(a, saved);
            }
            self.r.set(a, original);
            let worst = children.iter().map(|c| c.1).fold(f64::INFINITY, f64::min) - lb;
            let better = children.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max) - lb;
            let replace = match &best {
                None => true,
                Some((w, b, _)) => worst > *w || (worst == *w && better > *b),
            };
            if replace {
                best = Some((worst, better, Branch { attribute: a, children }));
            }
        }
        let (_, _, mut branch) = best.expect("a non-constant region has a splittable attribute");
        let own = self.x.value(branch.attribute);
        branch.children.sort_by(|p, q| {
            p.0.contains(own)
                .cmp(&q.0.contains(own))
                .then(p.1.total_cmp(&q.1))
        });
        branch
    }

    /// Total width of the non-constant trees testing `a`, or `None` if
    /// splitting `a` cannot change any bound.
    fn spread(&self, a: usize) -> Option<f64> {
        if self.universe.attribute(a).count_within(self.r.constraint(a)) < 2 {
            return None;
        }
        let mut total = 0.0;
        let mut any = false;
        for &(j, k) in self.bt.attribute_trees(a) {
            if !self.bounds.is_tight(j, k) {
                any = true;
                total += self.bounds.width(j, k);
            }
        }
        any.then_some(total)
    }

    /// Partitions the region's cells of attribute `a` into two constraints.
    fn split(&self, a: usize) -> Option<Vec<DomainConstraint>> {
        match (self.universe.attribute(a), self.r.constraint(a)) {
            (
                AttributeCells::Numerical { thresholds },
                DomainConstraint::Number(NumberDomain::Interval { lo, hi }),
            ) => {
                let inner = inner_thresholds(thresholds, *lo, *hi);
                if inner.is_empty() {
                    return None;
                }
                let cut = inner[(inner.len() - 1) / 2];
                Some(vec![
                    DomainConstraint::Number(NumberDomain::Interval { lo: *lo, hi: cut }),
                    DomainConstraint::Number(NumberDomain::Interval { lo: cut, hi: *hi }),
                ])
            }
            (AttributeCells::Categorical { tested, .. }, DomainConstraint::Category(d)) => {
                if d.fixed.is_some() {
                    return None;
                }
                let c = *tested.iter().find(|&&c| d.allows_value(c))?;
                if d.allowed_count() < 2 {
                    return None;
                }
                let mut rest = d.clone();
                rest.excluded.insert(c);
                Some(vec![
                    DomainConstraint::Category(CategoryDomain {
                        fixed: Some(c),
                        excluded: Default::default(),
                        categories: d.categories,
                    }),
                    DomainConstraint::Category(rest),
                ])
            }
            (AttributeCells::Boolean { tested: true }, DomainConstraint::Boolean(None)) => Some(vec![
                DomainConstraint::Boolean(Some(false)),
                DomainConstraint::Boolean(Some(true)),
            ]),
            _ => None,
        }
    }
}
