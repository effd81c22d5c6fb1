//! Random boosted trees and instances for testing and benchmarking.
//!
//! Trees are grown top-down while tracking the constraint state of the
//! current path, so every generated root-to-leaf path is satisfiable.
//! Thresholds come from a small grid and leaf weights are multiples of a
//! fixed step, which makes boundary values and weight ties common.

use rand::Rng;

use crate::domain::{DomainConstraint, NumberDomain, Restriction};
use crate::model::{
    Attribute, AttributeKind, AttributeSchema, BoostedTree, Condition, Forest, Instance,
    NestedNode, Tree, Value,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub numerical: usize,
    pub categorical: usize,
    pub boolean: usize,
    /// Categories per categorical attribute.
    pub categories: usize,
    /// 2 for a binary model, otherwise the number of classes (≥ 3).
    pub classes: usize,
    pub trees_per_forest: usize,
    pub max_depth: usize,
    /// Probability that a node above the depth limit becomes a leaf.
    pub leaf_probability: f64,
    /// Candidate thresholds; instance values are drawn from the grid and the
    /// midpoints between consecutive grid values.
    pub threshold_grid: Vec<f64>,
    pub weight_step: f64,
    /// Leaf weights are `k * weight_step` with `|k| <= weight_steps`, scaled
    /// by `weight_decay^i` in the `i`-th tree of a forest.
    pub weight_steps: i32,
    pub weight_decay: f64,
    /// Split attributes are drawn with probability proportional to
    /// `1 / (a + 1)^attribute_skew`; 0 is uniform.
    pub attribute_skew: f64,
}

impl SynthConfig {
    /// Small models whose condition universe stays enumerable.
    pub fn small() -> Self {
        SynthConfig {
            numerical: 2,
            categorical: 1,
            boolean: 2,
            categories: 3,
            classes: 2,
            trees_per_forest: 4,
            max_depth: 3,
            leaf_probability: 0.2,
            threshold_grid: vec![0.0, 1.0, 2.0, 3.0],
            weight_step: 0.05,
            weight_steps: 10,
            weight_decay: 1.0,
            attribute_skew: 0.0,
        }
    }

    /// Binary models over numerical attributes only.
    pub fn numerical(attributes: usize, trees: usize, max_depth: usize) -> Self {
        SynthConfig {
            numerical: attributes,
            categorical: 0,
            boolean: 0,
            categories: 0,
            classes: 2,
            trees_per_forest: trees,
            max_depth,
            leaf_probability: 0.0,
            threshold_grid: (0..=16).map(|i| f64::from(i) * 0.5).collect(),
            weight_step: 0.05,
            weight_steps: 10,
            weight_decay: 1.0,
            attribute_skew: 0.0,
        }
    }

    /// Binary models shaped like trained boosters: a few attributes carry
    /// most splits and later trees have smaller leaves.
    pub fn boosting_like(attributes: usize, trees: usize, max_depth: usize) -> Self {
        SynthConfig {
            weight_decay: 0.98,
            attribute_skew: 1.0,
            ..SynthConfig::numerical(attributes, trees, max_depth)
        }
    }

    pub fn attribute_count(&self) -> usize {
        self.numerical + self.categorical + self.boolean
    }

    pub fn schema(&self) -> AttributeSchema {
        let mut attrs = Vec::with_capacity(self.attribute_count());
        attrs.extend((0..self.numerical).map(|i| Attribute::numerical(format!("n{i}"))));
        attrs.extend((0..self.categorical).map(|i| {
            Attribute::categorical(format!("c{i}"), (0..self.categories).map(|k| format!("v{k}")))
        }));
        attrs.extend((0..self.boolean).map(|i| Attribute::boolean(format!("b{i}"))));
        AttributeSchema::new(attrs).expect("generated names are distinct")
    }
}

/// A random model; the tie class is drawn uniformly.
pub fn random_model<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> BoostedTree {
    assert!(cfg.classes >= 2, "at least two classes");
    assert!(cfg.attribute_count() > 0, "at least one attribute");
    let schema = cfg.schema();
    let forests = if cfg.classes == 2 { 1 } else { cfg.classes };
    let picker = AttributePicker::new(schema.len(), cfg.attribute_skew);
    let forests = (0..forests)
        .map(|j| {
            let trees = (0..cfg.trees_per_forest)
                .map(|i| {
                    let mut r = Restriction::unconstrained(&schema);
                    let g = Grower {
                        cfg,
                        schema: &schema,
                        picker: &picker,
                        scale: cfg.weight_step * cfg.weight_decay.powi(i as i32),
                    };
                    let root = g.grow(&mut r, 0, rng);
                    Tree::from_nested(&root).expect("generated tree is well-formed")
                })
                .collect();
            Forest::new(j, trees)
        })
        .collect();
    let tie_class = rng.random_range(0..cfg.classes);
    BoostedTree::new(schema, forests, tie_class).expect("generated paths are satisfiable")
}

/// Cumulative attribute distribution for split selection.
struct AttributePicker {
    cumulative: Vec<f64>,
}

impl AttributePicker {
    fn new(n: usize, skew: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..n)
            .map(|a| {
                acc += 1.0 / ((a + 1) as f64).powf(skew);
                acc
            })
            .collect();
        AttributePicker { cumulative }
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty schema");
        let u = rng.random_range(0.0..total);
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

struct Grower<'a> {
    cfg: &'a SynthConfig,
    schema: &'a AttributeSchema,
    picker: &'a AttributePicker,
    scale: f64,
}

impl Grower<'_> {
    fn grow<R: Rng + ?Sized>(&self, r: &mut Restriction, depth: usize, rng: &mut R) -> NestedNode {
        let cfg = self.cfg;
        let leaf = |rng: &mut R| {
            let k = rng.random_range(-cfg.weight_steps..=cfg.weight_steps);
            NestedNode::leaf(f64::from(k) * self.scale)
        };
        if depth >= cfg.max_depth || (depth > 0 && rng.random_bool(cfg.leaf_probability)) {
            return leaf(rng);
        }
        let Some(condition) = (0..8).find_map(|_| self.random_split(r, rng)) else {
            return leaf(rng);
        };
        let mut children = [false, true].map(|outcome| {
            let undo = r.constraint_mut(condition.attribute).refine(&condition.test, outcome);
            let child = self.grow(r, depth + 1, rng);
            r.constraint_mut(condition.attribute).undo(undo);
            Some(child)
        });
        NestedNode::split(
            condition,
            children[0].take().expect("built"),
            children[1].take().expect("built"),
        )
    }

    /// A condition with both outcomes possible under `r`, if one was drawn.
    fn random_split<R: Rng + ?Sized>(&self, r: &Restriction, rng: &mut R) -> Option<Condition> {
        let a = self.picker.pick(rng);
        let condition = match (&self.schema.attribute(a).kind, r.constraint(a)) {
            (AttributeKind::Numerical, DomainConstraint::Number(NumberDomain::Interval { lo, hi })) => {
                let inside: Vec<f64> = self
                    .cfg
                    .threshold_grid
                    .iter()
                    .copied()
                    .filter(|t| lo < t && t < hi)
                    .collect();
                if inside.is_empty() {
                    return None;
                }
                Condition::greater_than(a, inside[rng.random_range(0..inside.len())])
            }
            (AttributeKind::Categorical(cats), _) => {
                Condition::equals_category(a, rng.random_range(0..cats.len()))
            }
            (AttributeKind::Boolean, _) => Condition::is_true(a),
            _ => return None,
        };
        let dc = r.constraint(a);
        (dc.allows(&condition.test, false) && dc.allows(&condition.test, true)).then_some(condition)
    }
}

/// A random instance: numerical values are grid points or midpoints
/// (including values just outside the grid).
pub fn random_instance<R: Rng + ?Sized>(
    cfg: &SynthConfig,
    schema: &AttributeSchema,
    rng: &mut R,
) -> Instance {
    let grid = &cfg.threshold_grid;
    let values = schema
        .attributes()
        .iter()
        .map(|a| match &a.kind {
            AttributeKind::Numerical => {
                let v = if grid.is_empty() {
                    0.0
                } else {
                    let i = rng.random_range(0..=2 * grid.len());
                    if i == 0 {
                        grid[0] - 0.5
                    } else if i == 2 * grid.len() {
                        grid[grid.len() - 1] + 0.5
                    } else if i % 2 == 1 {
                        grid[i / 2]
                    } else {
                        (grid[i / 2 - 1] + grid[i / 2]) / 2.0
                    }
                };
                Value::Number(v)
            }
            AttributeKind::Categorical(cats) => Value::Category(rng.random_range(0..cats.len())),
            AttributeKind::Boolean => Value::Bool(rng.random_bool(0.5)),
        })
        .collect();
    Instance::new(schema, values).expect("generated values conform")
}
