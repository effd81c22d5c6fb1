//! Boosted-tree classifiers over numerical, categorical and Boolean attributes.
//!
//! A [`BoostedTree`] is either a single forest (binary classification: the
//! instance is positive iff the summed leaf weights are `> 0`) or one forest
//! per class (multi-class: the class whose forest weight is strictly largest
//! wins). Internal nodes test one [`Condition`]; the left child is taken when
//! the condition is false, the right child when it is true.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Restriction;

/// Errors raised while building or querying a model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("categorical attribute `{0}` declares no category")]
    NoCategories(String),
    #[error("duplicate category `{category}` in attribute `{attribute}`")]
    DuplicateCategory { attribute: String, category: String },
    #[error("attribute index {index} out of range (schema has {len} attributes)")]
    AttributeOutOfRange { index: usize, len: usize },
    #[error("category index {category} out of range for attribute `{attribute}`")]
    CategoryOutOfRange { attribute: String, category: usize },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown category `{category}` for attribute `{attribute}`")]
    UnknownCategory { attribute: String, category: String },
    #[error("attribute `{attribute}` is {expected}, got a {found} value or test")]
    KindMismatch {
        attribute: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("non-finite value for attribute `{0}`")]
    NonFinite(String),
    #[error("instance has {found} values, schema has {expected} attributes")]
    InstanceLength { expected: usize, found: usize },
    #[error("tree {tree}: {reason}")]
    MalformedTree { tree: String, reason: String },
    #[error("tree {tree}: the path to node {node} is unsatisfiable ({condition} cannot be {outcome})")]
    UnsatisfiablePath {
        tree: String,
        node: usize,
        condition: String,
        outcome: bool,
    },
    #[error("{0}")]
    InvalidEnsemble(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Numerical,
    Categorical(Vec<String>),
    Boolean,
}

impl AttributeKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttributeKind::Numerical => "numerical",
            AttributeKind::Categorical(_) => "categorical",
            AttributeKind::Boolean => "boolean",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn numerical(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Numerical,
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Categorical(categories.into_iter().map(Into::into).collect()),
        }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Boolean,
        }
    }

    /// Number of declared categories, or `None` for non-categorical attributes.
    pub fn category_count(&self) -> Option<usize> {
        match &self.kind {
            AttributeKind::Categorical(c) => Some(c.len()),
            _ => None,
        }
    }
}

/// The ordered attribute set `A_1..A_n` of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    by_name: HashMap<String, usize>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self, ModelError> {
        let mut by_name = HashMap::with_capacity(attributes.len());
        for (i, a) in attributes.iter().enumerate() {
            if by_name.insert(a.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateAttribute(a.name.clone()));
            }
            if let AttributeKind::Categorical(cats) = &a.kind {
                if cats.is_empty() {
                    return Err(ModelError::NoCategories(a.name.clone()));
                }
                let mut seen = BTreeSet::new();
                for c in cats {
                    if !seen.insert(c) {
                        return Err(ModelError::DuplicateCategory {
                            attribute: a.name.clone(),
                            category: c.clone(),
                        });
                    }
                }
            }
        }
        Ok(AttributeSchema {
            attributes,
            by_name,
        })
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &Attribute {
        &self.attributes[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    /// Resolves a category label of a categorical attribute to its index.
    pub fn category_index(&self, attribute: usize, label: &str) -> Result<usize, ModelError> {
        let a = self.checked(attribute)?;
        match &a.kind {
            AttributeKind::Categorical(cats) => {
                cats.iter()
                    .position(|c| c == label)
                    .ok_or_else(|| ModelError::UnknownCategory {
                        attribute: a.name.clone(),
                        category: label.to_string(),
                    })
            }
            other => Err(ModelError::KindMismatch {
                attribute: a.name.clone(),
                expected: other.name(),
                found: "categorical",
            }),
        }
    }

    fn checked(&self, index: usize) -> Result<&Attribute, ModelError> {
        self.attributes
            .get(index)
            .ok_or(ModelError::AttributeOutOfRange {
                index,
                len: self.attributes.len(),
            })
    }

    /// Checks that `value` is a legal value of attribute `index`.
    pub fn check_value(&self, index: usize, value: Value) -> Result<(), ModelError> {
        let a = self.checked(index)?;
        match (&a.kind, value) {
            (AttributeKind::Numerical, Value::Number(v)) => {
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(ModelError::NonFinite(a.name.clone()))
                }
            }
            (AttributeKind::Categorical(cats), Value::Category(c)) => {
                if c < cats.len() {
                    Ok(())
                } else {
                    Err(ModelError::CategoryOutOfRange {
                        attribute: a.name.clone(),
                        category: c,
                    })
                }
            }
            (AttributeKind::Boolean, Value::Bool(_)) => Ok(()),
            (kind, v) => Err(ModelError::KindMismatch {
                attribute: a.name.clone(),
                expected: kind.name(),
                found: v.kind_name(),
            }),
        }
    }

    /// Renders a value the way it appears in CSV files and reports.
    pub fn format_value(&self, index: usize, value: Value) -> String {
        match (&self.attributes[index].kind, value) {
            (AttributeKind::Categorical(cats), Value::Category(c)) => cats[c].clone(),
            (_, Value::Number(v)) => format!("{v}"),
            (_, Value::Bool(b)) => if b { "1" } else { "0" }.to_string(),
            (_, Value::Category(c)) => c.to_string(),
        }
    }
}

/// One attribute value. Categories are indices into the declared category list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Category(usize),
    Bool(bool),
}

impl Value {
    fn kind_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "numerical",
            Value::Category(_) => "categorical",
            Value::Bool(_) => "boolean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Test {
    /// `A_i > threshold` (strict).
    GreaterThan(f64),
    /// `A_i = category`.
    EqualsCategory(usize),
    /// `A_i = 1`.
    IsTrue,
}

impl Test {
    fn kind_name(&self) -> &'static str {
        match self {
            Test::GreaterThan(_) => "numerical",
            Test::EqualsCategory(_) => "categorical",
            Test::IsTrue => "boolean",
        }
    }

    /// Evaluates the test on a value of matching kind; `None` on kind mismatch.
    #[inline]
    pub fn eval(&self, value: Value) -> Option<bool> {
        match (*self, value) {
            (Test::GreaterThan(t), Value::Number(v)) => Some(v > t),
            (Test::EqualsCategory(k), Value::Category(c)) => Some(c == k),
            (Test::IsTrue, Value::Bool(b)) => Some(b),
            _ => None,
        }
    }
}

/// A Boolean test on a single attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub attribute: usize,
    pub test: Test,
}

impl Condition {
    pub fn greater_than(attribute: usize, threshold: f64) -> Self {
        Condition {
            attribute,
            test: Test::GreaterThan(threshold),
        }
    }

    pub fn equals_category(attribute: usize, category: usize) -> Self {
        Condition {
            attribute,
            test: Test::EqualsCategory(category),
        }
    }

    pub fn is_true(attribute: usize) -> Self {
        Condition {
            attribute,
            test: Test::IsTrue,
        }
    }

    /// Evaluates the condition on a value of its attribute.
    pub fn eval(&self, schema: &AttributeSchema, value: Value) -> Result<bool, ModelError> {
        schema.check_value(self.attribute, value)?;
        self.test.eval(value).ok_or_else(|| ModelError::KindMismatch {
            attribute: schema.attribute(self.attribute).name.clone(),
            expected: self.test.kind_name(),
            found: value.kind_name(),
        })
    }

    /// Evaluates on an instance already validated against the model schema.
    #[inline]
    pub fn holds(&self, x: &Instance) -> bool {
        self.test
            .eval(x.values[self.attribute])
            .expect("instance validated against schema")
    }

    fn check(&self, schema: &AttributeSchema) -> Result<(), ModelError> {
        let a = schema.checked(self.attribute)?;
        match (&a.kind, self.test) {
            (AttributeKind::Numerical, Test::GreaterThan(t)) => {
                if t.is_finite() {
                    Ok(())
                } else {
                    Err(ModelError::NonFinite(a.name.clone()))
                }
            }
            (AttributeKind::Categorical(cats), Test::EqualsCategory(k)) => {
                if k < cats.len() {
                    Ok(())
                } else {
                    Err(ModelError::CategoryOutOfRange {
                        attribute: a.name.clone(),
                        category: k,
                    })
                }
            }
            (AttributeKind::Boolean, Test::IsTrue) => Ok(()),
            (kind, test) => Err(ModelError::KindMismatch {
                attribute: a.name.clone(),
                expected: kind.name(),
                found: test.kind_name(),
            }),
        }
    }

    pub fn display<'a>(&'a self, schema: &'a AttributeSchema) -> ConditionDisplay<'a> {
        ConditionDisplay {
            condition: self,
            schema,
        }
    }
}

pub struct ConditionDisplay<'a> {
    condition: &'a Condition,
    schema: &'a AttributeSchema,
}

impl fmt::Display for ConditionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.schema.attribute(self.condition.attribute);
        match self.condition.test {
            Test::GreaterThan(t) => write!(f, "{} > {}", a.name, t),
            Test::EqualsCategory(k) => match &a.kind {
                AttributeKind::Categorical(cats) if k < cats.len() => {
                    write!(f, "{} = {}", a.name, cats[k])
                }
                _ => write!(f, "{} = #{}", a.name, k),
            },
            Test::IsTrue => write!(f, "{} = 1", a.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        condition: Condition,
        if_false: usize,
        if_true: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// A regression tree stored as a node arena rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    parent: Vec<Option<(usize, bool)>>,
}

impl Tree {
    /// Builds a tree from an arena, checking it is a proper binary tree rooted
    /// at node 0 with finite leaf weights. Schema-level checks (condition
    /// kinds, path satisfiability) happen in [`BoostedTree::new`].
    pub fn new(nodes: Vec<Node>) -> Result<Self, ModelError> {
        let malformed = |reason: String| ModelError::MalformedTree {
            tree: "?".into(),
            reason,
        };
        if nodes.is_empty() {
            return Err(malformed("no nodes".into()));
        }
        let mut parent: Vec<Option<(usize, bool)>> = vec![None; nodes.len()];
        let mut reached = vec![false; nodes.len()];
        reached[0] = true;
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                Node::Leaf { weight } => {
                    if !weight.is_finite() {
                        return Err(malformed(format!("leaf {i} has a non-finite weight")));
                    }
                }
                Node::Split {
                    if_false, if_true, ..
                } => {
                    for (child, outcome) in [(if_false, false), (if_true, true)] {
                        if child >= nodes.len() {
                            return Err(malformed(format!(
                                "node {i} references missing child {child}"
                            )));
                        }
                        if child == 0 || reached[child] {
                            return Err(malformed(format!(
                                "node {child} has more than one parent"
                            )));
                        }
                        reached[child] = true;
                        parent[child] = Some((i, outcome));
                    }
                }
            }
        }
        if let Some(orphan) = reached.iter().position(|r| !r) {
            return Err(malformed(format!("node {orphan} is unreachable")));
        }
        // Every non-root node has exactly one parent; rule out cycles by
        // walking each parent chain back to the root.
        for start in 0..nodes.len() {
            let mut cur = start;
            let mut steps = 0;
            while let Some((p, _)) = parent[cur] {
                cur = p;
                steps += 1;
                if steps > nodes.len() {
                    return Err(malformed("cycle in node references".into()));
                }
            }
            if cur != 0 {
                return Err(malformed(format!("node {start} is detached from the root")));
            }
        }
        Ok(Tree { nodes, parent })
    }

    /// A single-leaf tree.
    pub fn constant(weight: f64) -> Self {
        Tree::new(vec![Node::Leaf { weight }]).expect("finite constant weight")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Number of nodes, `|T|`.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_weight(&self, node: usize) -> Option<f64> {
        match self.nodes[node] {
            Node::Leaf { weight } => Some(weight),
            Node::Split { .. } => None,
        }
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &Instance) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    condition,
                    if_false,
                    if_true,
                } => i = if condition.holds(x) { *if_true } else { *if_false },
            }
        }
    }

    /// `w(T, x)`.
    pub fn eval(&self, x: &Instance) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { weight } => weight,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// The (split node, outcome) pairs from the root down to `node`.
    pub fn path_to(&self, node: usize) -> Vec<(usize, bool)> {
        let mut path = Vec::new();
        let mut cur = node;
        while let Some((p, outcome)) = self.parent[cur] {
            path.push((p, outcome));
            cur = p;
        }
        path.reverse();
        path
    }

    /// Attributes tested anywhere in the tree.
    pub fn tested_attributes(&self) -> BTreeSet<usize> {
        self.conditions().map(|c| c.attribute).collect()
    }

    pub fn conditions(&self) -> impl Iterator<Item = &Condition> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { condition, .. } => Some(condition),
            Node::Leaf { .. } => None,
        })
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            Node::Leaf { weight } => Some((i, *weight)),
            Node::Split { .. } => None,
        })
    }
}

/// Recursive tree description, flattened into an arena by [`Tree::from_nested`].
#[derive(Debug, Clone, PartialEq)]
pub enum NestedNode {
    Leaf(f64),
    Split {
        condition: Condition,
        if_false: Box<NestedNode>,
        if_true: Box<NestedNode>,
    },
}

impl NestedNode {
    pub fn leaf(weight: f64) -> Self {
        NestedNode::Leaf(weight)
    }

    pub fn split(condition: Condition, if_false: NestedNode, if_true: NestedNode) -> Self {
        NestedNode::Split {
            condition,
            if_false: Box::new(if_false),
            if_true: Box::new(if_true),
        }
    }
}

impl Tree {
    /// Flattens a nested description in pre-order (root at index 0).
    pub fn from_nested(root: &NestedNode) -> Result<Self, ModelError> {
        fn push(n: &NestedNode, nodes: &mut Vec<Node>) -> usize {
            let at = nodes.len();
            match n {
                NestedNode::Leaf(w) => nodes.push(Node::Leaf { weight: *w }),
                NestedNode::Split {
                    condition,
                    if_false,
                    if_true,
                } => {
                    nodes.push(Node::Leaf { weight: 0.0 });
                    let f = push(if_false, nodes);
                    let t = push(if_true, nodes);
                    nodes[at] = Node::Split {
                        condition: *condition,
                        if_false: f,
                        if_true: t,
                    };
                }
            }
            at
        }
        let mut nodes = Vec::new();
        push(root, &mut nodes);
        Tree::new(nodes)
    }
}

/// The trees voting for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub class_id: usize,
}

impl Forest {
    pub fn new(class_id: usize, trees: Vec<Tree>) -> Self {
        Forest { trees, class_id }
    }

    /// `w(F, x)`: tree weights summed in list order.
    pub fn eval(&self, x: &Instance) -> f64 {
        self.trees.iter().fold(0.0, |acc, t| acc + t.eval(x))
    }

    pub fn size(&self) -> usize {
        self.trees.iter().map(Tree::size).sum()
    }
}

/// A validated boosted-tree classifier.
///
/// Classes are 0-based: `{0, 1}` in binary mode, `0..m` in multi-class mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedTree {
    schema: AttributeSchema,
    forests: Vec<Forest>,
    tie_class: usize,
    /// For each attribute, the `(forest, tree)` pairs whose tree tests it.
    attribute_trees: Vec<Vec<(usize, usize)>>,
}

impl BoostedTree {
    pub fn new(
        schema: AttributeSchema,
        forests: Vec<Forest>,
        tie_class: usize,
    ) -> Result<Self, ModelError> {
        if forests.is_empty() {
            return Err(ModelError::InvalidEnsemble("no forest".into()));
        }
        if forests.len() > 1 {
            for (j, f) in forests.iter().enumerate() {
                if f.class_id != j {
                    return Err(ModelError::InvalidEnsemble(format!(
                        "forest {j} has class_id {} (expected {j})",
                        f.class_id
                    )));
                }
            }
            if tie_class >= forests.len() {
                return Err(ModelError::InvalidEnsemble(format!(
                    "tie class {tie_class} outside 0..{}",
                    forests.len()
                )));
            }
        } else if tie_class > 1 {
            return Err(ModelError::InvalidEnsemble(format!(
                "tie class {tie_class} outside 0..2"
            )));
        }
        let mut attribute_trees = vec![Vec::new(); schema.len()];
        for (j, forest) in forests.iter().enumerate() {
            if forest.trees.is_empty() {
                return Err(ModelError::InvalidEnsemble(format!("forest {j} has no tree")));
            }
            for (k, tree) in forest.trees.iter().enumerate() {
                let label = format!("{k} of forest {j}");
                for c in tree.conditions() {
                    c.check(&schema).map_err(|e| ModelError::MalformedTree {
                        tree: label.clone(),
                        reason: e.to_string(),
                    })?;
                }
                check_paths(&schema, tree, &label)?;
                for a in tree.tested_attributes() {
                    attribute_trees[a].push((j, k));
                }
            }
        }
        Ok(BoostedTree {
            schema,
            forests,
            tie_class,
            attribute_trees,
        })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn forests(&self) -> &[Forest] {
        &self.forests
    }

    pub fn is_binary(&self) -> bool {
        self.forests.len() == 1
    }

    /// Number of classes `m` (2 in binary mode).
    pub fn num_classes(&self) -> usize {
        if self.is_binary() {
            2
        } else {
            self.forests.len()
        }
    }

    pub fn tie_class(&self) -> usize {
        self.tie_class
    }

    pub fn with_tie_class(mut self, tie_class: usize) -> Result<Self, ModelError> {
        if tie_class >= self.num_classes() {
            return Err(ModelError::InvalidEnsemble(format!(
                "tie class {tie_class} outside 0..{}",
                self.num_classes()
            )));
        }
        self.tie_class = tie_class;
        Ok(self)
    }

    /// `|BT|`, the total node count.
    pub fn size(&self) -> usize {
        self.forests.iter().map(Forest::size).sum()
    }

    pub fn tree_count(&self) -> usize {
        self.forests.iter().map(|f| f.trees.len()).sum()
    }

    pub(crate) fn attribute_trees(&self, attribute: usize) -> &[(usize, usize)] {
        &self.attribute_trees[attribute]
    }

    /// Per-forest weights `w(F^j, x)`.
    pub fn forest_weights(&self, x: &Instance) -> Vec<f64> {
        self.forests.iter().map(|f| f.eval(x)).collect()
    }

    pub fn classify(&self, x: &Instance) -> usize {
        self.class_of_weights(&self.forest_weights(x))
    }

    /// The class assigned to a vector of forest weights.
    ///
    /// Multi-class ties: all weights equal gives the tie class; a maximum
    /// shared by some but not all classes gives the smallest such class.
    pub fn class_of_weights(&self, weights: &[f64]) -> usize {
        if self.is_binary() {
            return usize::from(weights[0] > 0.0);
        }
        let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = weights.iter().position(|&w| w == max).expect("nonempty");
        if weights.iter().all(|&w| w == max) {
            self.tie_class
        } else {
            first
        }
    }
}

/// Rejects trees containing a root-to-leaf path no instance can follow.
fn check_paths(schema: &AttributeSchema, tree: &Tree, label: &str) -> Result<(), ModelError> {
    fn walk(
        schema: &AttributeSchema,
        tree: &Tree,
        label: &str,
        node: usize,
        r: &mut Restriction,
    ) -> Result<(), ModelError> {
        if let Node::Split {
            condition,
            if_false,
            if_true,
        } = &tree.nodes[node]
        {
            for (outcome, child) in [(false, *if_false), (true, *if_true)] {
                let dc = r.constraint_mut(condition.attribute);
                if !dc.allows(&condition.test, outcome) {
                    return Err(ModelError::UnsatisfiablePath {
                        tree: label.to_string(),
                        node: child,
                        condition: condition.display(schema).to_string(),
                        outcome,
                    });
                }
                let undo = dc.refine(&condition.test, outcome);
                walk(schema, tree, label, child, r)?;
                r.constraint_mut(condition.attribute).undo(undo);
            }
        }
        Ok(())
    }
    let mut r = Restriction::unconstrained(schema);
    walk(schema, tree, label, 0, &mut r)
}

/// A full attribute-value vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    values: Vec<Value>,
}

impl Instance {
    pub fn new(schema: &AttributeSchema, values: Vec<Value>) -> Result<Self, ModelError> {
        if values.len() != schema.len() {
            return Err(ModelError::InstanceLength {
                expected: schema.len(),
                found: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            schema.check_value(i, *v)?;
        }
        Ok(Instance { values })
    }

    /// Builds an instance from a flat numeric encoding: numbers as-is,
    /// categories by index, Booleans as 0/1.
    pub fn from_encoded(schema: &AttributeSchema, encoded: &[f64]) -> Result<Self, ModelError> {
        if encoded.len() != schema.len() {
            return Err(ModelError::InstanceLength {
                expected: schema.len(),
                found: encoded.len(),
            });
        }
        let values = encoded
            .iter()
            .zip(schema.attributes())
            .map(|(&v, a)| match a.kind {
                AttributeKind::Numerical => Ok(Value::Number(v)),
                AttributeKind::Categorical(_) => {
                    if v >= 0.0 && v.fract() == 0.0 {
                        Ok(Value::Category(v as usize))
                    } else {
                        Err(ModelError::UnknownCategory {
                            attribute: a.name.clone(),
                            category: v.to_string(),
                        })
                    }
                }
                AttributeKind::Boolean => match v {
                    0.0 => Ok(Value::Bool(false)),
                    1.0 => Ok(Value::Bool(true)),
                    _ => Err(ModelError::KindMismatch {
                        attribute: a.name.clone(),
                        expected: "boolean",
                        found: "numerical",
                    }),
                },
            })
            .collect::<Result<Vec<_>, _>>()?;
        Instance::new(schema, values)
    }

    pub(crate) fn from_values_unchecked(values: Vec<Value>) -> Self {
        Instance { values }
    }

    /// Replaces one value without validation.
    pub(crate) fn set_unchecked(&mut self, attribute: usize, value: Value) {
        self.values[attribute] = value;
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, attribute: usize) -> Value {
        self.values[attribute]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A subset of an instance's characteristics `(A_i = v_i)`, identified by the
/// kept attribute indices. Ordering is lexicographic on the sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Term {
    kept: BTreeSet<usize>,
}

impl Term {
    /// `t_x`: every characteristic of an instance with `n` attributes.
    pub fn full(n: usize) -> Self {
        Term {
            kept: (0..n).collect(),
        }
    }

    pub fn empty() -> Self {
        Term::default()
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Term {
            kept: indices.into_iter().collect(),
        }
    }

    pub fn contains(&self, attribute: usize) -> bool {
        self.kept.contains(&attribute)
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.kept.iter().copied()
    }

    pub fn insert(&mut self, attribute: usize) -> bool {
        self.kept.insert(attribute)
    }

    pub fn remove(&mut self, attribute: usize) -> bool {
        self.kept.remove(&attribute)
    }

    /// `t \ {c_i}`.
    pub fn without(&self, attribute: usize) -> Term {
        let mut t = self.clone();
        t.remove(attribute);
        t
    }

    pub fn is_subset(&self, other: &Term) -> bool {
        self.kept.is_subset(&other.kept)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for Term {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Term::from_indices(iter)
    }
}
