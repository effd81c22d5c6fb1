//! Native JSON model format.
//!
//! ```json
//! {
//!   "attributes": [
//!     {"name": "A1", "kind": "numerical"},
//!     {"name": "A3", "kind": "categorical", "categories": ["b", "w", "r"]},
//!     {"name": "A4", "kind": "boolean"}
//!   ],
//!   "forests": [
//!     {"class_id": 0, "trees": [{"nodes": [
//!       {"attribute": "A4", "op": "is_true", "no": 1, "yes": 2},
//!       {"leaf": -0.5},
//!       {"leaf": 0.4}
//!     ]}]}
//!   ],
//!   "tie_class": 0
//! }
//! ```
//!
//! Node 0 is the root. `op` is `">"` (numeric threshold in `value`), `"=="`
//! (category label in `value`) or `"is_true"`. `no`/`yes` index the children
//! taken when the condition is false/true.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::model::{
    Attribute, AttributeKind, AttributeSchema, BoostedTree, Condition, Forest, Node, Test, Tree,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub attributes: Vec<AttributeEntry>,
    pub forests: Vec<ForestEntry>,
    #[serde(default)]
    pub tie_class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeEntry {
    pub name: String,
    pub kind: KindEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindEntry {
    Numerical,
    Categorical,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestEntry {
    pub class_id: usize,
    pub trees: Vec<TreeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEntry {
    pub nodes: Vec<NodeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeEntry {
    Leaf {
        leaf: f64,
    },
    Split {
        attribute: String,
        op: OpEntry,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<ValueEntry>,
        no: usize,
        yes: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpEntry {
    #[serde(rename = ">")]
    GreaterThan,
    #[serde(rename = "==")]
    Equals,
    #[serde(rename = "is_true")]
    IsTrue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueEntry {
    Number(f64),
    Label(String),
}

impl ModelFile {
    pub fn from_model(bt: &BoostedTree) -> Self {
        let schema = bt.schema();
        let attributes = schema
            .attributes()
            .iter()
            .map(|a| {
                let (kind, categories) = match &a.kind {
                    AttributeKind::Numerical => (KindEntry::Numerical, None),
                    AttributeKind::Categorical(c) => (KindEntry::Categorical, Some(c.clone())),
                    AttributeKind::Boolean => (KindEntry::Boolean, None),
                };
                AttributeEntry {
                    name: a.name.clone(),
                    kind,
                    categories,
                }
            })
            .collect();
        let forests = bt
            .forests()
            .iter()
            .map(|f| ForestEntry {
                class_id: f.class_id,
                trees: f
                    .trees
                    .iter()
                    .map(|t| TreeEntry {
                        nodes: t.nodes().iter().map(|n| node_entry(schema, n)).collect(),
                    })
                    .collect(),
            })
            .collect();
        ModelFile {
            attributes,
            forests,
            tie_class: bt.tie_class(),
        }
    }

    pub fn to_model(&self) -> Result<BoostedTree, IoError> {
        let attributes = self
            .attributes
            .iter()
            .map(|a| match (a.kind, &a.categories) {
                (KindEntry::Numerical, None) => Ok(Attribute::numerical(&a.name)),
                (KindEntry::Boolean, None) => Ok(Attribute::boolean(&a.name)),
                (KindEntry::Categorical, Some(c)) => Ok(Attribute::categorical(&a.name, c.clone())),
                (KindEntry::Categorical, None) => Err(IoError::format(format!(
                    "categorical attribute `{}` needs `categories`",
                    a.name
                ))),
                (_, Some(_)) => Err(IoError::format(format!(
                    "only categorical attributes take `categories` (`{}`)",
                    a.name
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let schema = AttributeSchema::new(attributes)?;
        let mut forests = Vec::with_capacity(self.forests.len());
        for f in &self.forests {
            let trees = f
                .trees
                .iter()
                .map(|t| {
                    let nodes = t
                        .nodes
                        .iter()
                        .map(|n| node_from_entry(&schema, n))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Tree::new(nodes)?)
                })
                .collect::<Result<Vec<_>, IoError>>()?;
            forests.push(Forest::new(f.class_id, trees));
        }
        Ok(BoostedTree::new(schema, forests, self.tie_class)?)
    }
}

fn node_entry(schema: &AttributeSchema, node: &Node) -> NodeEntry {
    match node {
        Node::Leaf { weight } => NodeEntry::Leaf { leaf: *weight },
        Node::Split {
            condition,
            if_false,
            if_true,
        } => {
            let a = schema.attribute(condition.attribute);
            let (op, value) = match (condition.test, &a.kind) {
                (Test::GreaterThan(t), _) => (OpEntry::GreaterThan, Some(ValueEntry::Number(t))),
                (Test::EqualsCategory(k), AttributeKind::Categorical(c)) => {
                    (OpEntry::Equals, Some(ValueEntry::Label(c[k].clone())))
                }
                (Test::EqualsCategory(k), _) => (OpEntry::Equals, Some(ValueEntry::Number(k as f64))),
                (Test::IsTrue, _) => (OpEntry::IsTrue, None),
            };
            NodeEntry::Split {
                attribute: a.name.clone(),
                op,
                value,
                no: *if_false,
                yes: *if_true,
            }
        }
    }
}

fn node_from_entry(schema: &AttributeSchema, entry: &NodeEntry) -> Result<Node, IoError> {
    let (attribute, op, value, no, yes) = match entry {
        NodeEntry::Leaf { leaf } => return Ok(Node::Leaf { weight: *leaf }),
        NodeEntry::Split {
            attribute,
            op,
            value,
            no,
            yes,
        } => (attribute, op, value, *no, *yes),
    };
    let a = schema
        .index_of(attribute)
        .ok_or_else(|| IoError::format(format!("unknown attribute `{attribute}`")))?;
    let condition = match (op, value) {
        (OpEntry::GreaterThan, Some(ValueEntry::Number(t))) => Condition::greater_than(a, *t),
        (OpEntry::Equals, Some(ValueEntry::Label(l))) => {
            Condition::equals_category(a, schema.category_index(a, l)?)
        }
        (OpEntry::IsTrue, None) => Condition::is_true(a),
        _ => {
            return Err(IoError::format(format!(
                "split on `{attribute}`: `>` needs a numeric value, `==` a category label, `is_true` none"
            )))
        }
    };
    Ok(Node::Split {
        condition,
        if_false: no,
        if_true: yes,
    })
}

pub fn from_json_str(s: &str) -> Result<BoostedTree, IoError> {
    serde_json::from_str::<ModelFile>(s)?.to_model()
}

pub fn to_json_string(bt: &BoostedTree) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(bt)).expect("model serializes")
}

pub fn load(path: impl AsRef<Path>) -> Result<BoostedTree, IoError> {
    from_json_str(&fs::read_to_string(path)?)
}

pub fn save(bt: &BoostedTree, path: impl AsRef<Path>) -> Result<(), IoError> {
    fs::write(path, to_json_string(bt) + "\n")?;
    Ok(())
}
