//! Worst/best-instance weights of a tree under a restriction.
//!
//! An arc is frozen when its condition outcome is impossible under the
//! constraint state accumulated from the restriction and the conditions
//! already taken on the path. The surviving root-to-leaf paths are exactly
//! those some instance of the restriction can follow, so the extreme leaf
//! weights over them are `w↓(t, T)` and `w↑(t, T)`. One traversal visits each
//! node at most once.

use crate::domain::Restriction;
use crate::model::{BoostedTree, Forest, Instance, Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub weight: f64,
    /// Leaf attaining the bound.
    pub leaf: usize,
    /// `(split node, outcome)` pairs from the root to `leaf`.
    pub witness_path: Vec<(usize, bool)>,
    pub nodes_visited: usize,
}

impl BoundResult {
    /// An instance of `r` following the witness path, hence attaining the
    /// bound. Returns `None` if `r` has an empty denotation.
    pub fn witness_instance(&self, tree: &Tree, r: &Restriction) -> Option<Instance> {
        let mut r = r.clone();
        for &(node, outcome) in &self.witness_path {
            if let Node::Split { condition, .. } = &tree.nodes()[node] {
                let dc = r.constraint_mut(condition.attribute);
                if !dc.allows(&condition.test, outcome) {
                    return None;
                }
                dc.refine(&condition.test, outcome);
            }
        }
        r.is_satisfiable().then(|| r.representative())
    }
}

/// Minimal and maximal reachable leaves, found in one traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LeafRange {
    pub min: f64,
    pub min_leaf: usize,
    pub max: f64,
    pub max_leaf: usize,
    pub visited: usize,
}

impl LeafRange {
    #[inline]
    pub fn is_tight(&self) -> bool {
        self.min == self.max
    }
}

/// Computes the reachable leaf range of `tree` under `r`. `r` is refined and
/// restored in place; it is unchanged on return.
pub(crate) fn leaf_range(tree: &Tree, r: &mut Restriction) -> LeafRange {
    let mut out = LeafRange {
        min: f64::INFINITY,
        min_leaf: usize::MAX,
        max: f64::NEG_INFINITY,
        max_leaf: usize::MAX,
        visited: 0,
    };
    visit(tree.nodes(), 0, r, &mut out);
    assert!(
        out.min_leaf != usize::MAX,
        "no valid root-to-leaf path under a satisfiable restriction"
    );
    out
}

fn visit(nodes: &[Node], node: usize, r: &mut Restriction, out: &mut LeafRange) {
    out.visited += 1;
    match &nodes[node] {
        Node::Leaf { weight } => {
            if *weight < out.min {
                out.min = *weight;
                out.min_leaf = node;
            }
            if *weight > out.max {
                out.max = *weight;
                out.max_leaf = node;
            }
        }
        Node::Split {
            condition,
            if_false,
            if_true,
        } => {
            for (outcome, child) in [(false, *if_false), (true, *if_true)] {
                let dc = r.constraint_mut(condition.attribute);
                if dc.allows(&condition.test, outcome) {
                    let undo = dc.refine(&condition.test, outcome);
                    visit(nodes, child, r, out);
                    r.constraint_mut(condition.attribute).undo(undo);
                }
            }
        }
    }
}

/// `w↓` (`Direction::Min`) or `w↑` (`Direction::Max`) of `tree` under `r`,
/// with a witness path. `r` must have a nonempty denotation.
pub fn tree_bound(tree: &Tree, r: &Restriction, dir: Direction) -> BoundResult {
    let mut scratch = r.clone();
    let range = leaf_range(tree, &mut scratch);
    let (weight, leaf) = match dir {
        Direction::Min => (range.min, range.min_leaf),
        Direction::Max => (range.max, range.max_leaf),
    };
    BoundResult {
        weight,
        leaf,
        witness_path: tree.path_to(leaf),
        nodes_visited: range.visited,
    }
}

/// Sum of [`tree_bound`] over the forest, in tree order.
pub fn forest_bound(forest: &Forest, r: &Restriction, dir: Direction) -> f64 {
    let mut scratch = r.clone();
    forest.trees.iter().fold(0.0, |acc, t| {
        let range = leaf_range(t, &mut scratch);
        acc + match dir {
            Direction::Min => range.min,
            Direction::Max => range.max,
        }
    })
}

/// What must hold on every instance of a restriction for the prediction of
/// `x` to be preserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    /// Binary, `x` positive: `w(F, ·) > 0`.
    Positive,
    /// Binary, `x` negative: `w(F, ·) ≤ 0`.
    Negative,
    /// Multi-class, `x` in class `i`: `w(F^i, ·) > w(F^j, ·)` for `j ≠ i`.
    Class(usize),
}

impl Goal {
    pub fn for_class(bt: &BoostedTree, class: usize) -> Goal {
        if bt.is_binary() {
            if class == 1 {
                Goal::Positive
            } else {
                Goal::Negative
            }
        } else {
            Goal::Class(class)
        }
    }

    pub fn class(&self) -> usize {
        match self {
            Goal::Positive => 1,
            Goal::Negative => 0,
            Goal::Class(i) => *i,
        }
    }

    /// Margin of a weight vector: `w` (positive), `-w` (negative), or
    /// `w_i - max_{j≠i} w_j` (multi-class).
    pub fn margin(&self, weights: &[f64]) -> f64 {
        match *self {
            Goal::Positive => weights[0],
            Goal::Negative => -weights[0],
            Goal::Class(i) => {
                let other = weights
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, w)| *w)
                    .fold(f64::NEG_INFINITY, f64::max);
                weights[i] - other
            }
        }
    }

    /// Whether a margin certifies the prediction. Multi-class ties resolved in
    /// favour of the class are not certified here.
    #[inline]
    pub fn certifies(&self, margin: f64) -> bool {
        match self {
            Goal::Negative => margin >= 0.0,
            Goal::Positive | Goal::Class(_) => margin > 0.0,
        }
    }
}

/// Per-tree leaf ranges of a whole ensemble under a mutable restriction, with
/// incremental refresh of the trees testing a changed attribute.
pub(crate) struct EnsembleBounds<'a> {
    bt: &'a BoostedTree,
    ranges: Vec<Vec<LeafRange>>,
}

impl<'a> EnsembleBounds<'a> {
    pub fn new(bt: &'a BoostedTree, r: &mut Restriction) -> Self {
        let ranges = bt
            .forests()
            .iter()
            .map(|f| f.trees.iter().map(|t| leaf_range(t, r)).collect())
            .collect();
        EnsembleBounds { bt, ranges }
    }

    /// Recomputes the trees testing `attribute`, returning their previous
    /// ranges for [`restore`](Self::restore).
    pub fn refresh(&mut self, attribute: usize, r: &mut Restriction) -> Vec<LeafRange> {
        let affected = self.bt.attribute_trees(attribute);
        let mut saved = Vec::with_capacity(affected.len());
        for &(j, k) in affected {
            saved.push(self.ranges[j][k]);
            self.ranges[j][k] = leaf_range(&self.bt.forests()[j].trees[k], r);
        }
        saved
    }

    pub fn restore(&mut self, attribute: usize, saved: Vec<LeafRange>) {
        for (&(j, k), range) in self.bt.attribute_trees(attribute).iter().zip(saved) {
            self.ranges[j][k] = range;
        }
    }

    pub fn forest_min(&self, j: usize) -> f64 {
        self.ranges[j].iter().fold(0.0, |acc, r| acc + r.min)
    }

    pub fn forest_max(&self, j: usize) -> f64 {
        self.ranges[j].iter().fold(0.0, |acc, r| acc + r.max)
    }

    /// A lower bound on the goal margin over the restriction. Sums are taken
    /// in tree order, so on a restriction where every tree is constant this
    /// is bit-identical to the margin computed from `classify`'s weights.
    pub fn margin_lower_bound(&self, goal: Goal) -> f64 {
        match goal {
            Goal::Positive => self.forest_min(0),
            Goal::Negative => -self.forest_max(0),
            Goal::Class(i) => {
                let other = (0..self.ranges.len())
                    .filter(|&j| j != i)
                    .map(|j| self.forest_max(j))
                    .fold(f64::NEG_INFINITY, f64::max);
                self.forest_min(i) - other
            }
        }
    }

    /// Whether every tree is constant on the restriction.
    pub fn all_tight(&self) -> bool {
        self.ranges.iter().flatten().all(LeafRange::is_tight)
    }

    pub fn is_tight(&self, j: usize, k: usize) -> bool {
        self.ranges[j][k].is_tight()
    }

    /// `max - min` of tree `k` of forest `j`.
    pub fn width(&self, j: usize, k: usize) -> f64 {
        let r = &self.ranges[j][k];
        r.max - r.min
    }
}
