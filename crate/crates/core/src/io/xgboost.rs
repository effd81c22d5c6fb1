//! XGBoost JSON tree dumps (`Booster.get_dump(dump_format="json")`).
//!
//! Accepted inputs are the bare dump (an array of trees) or an envelope
//! `{"num_class", "base_margin", "feature_names", "trees"}`; [`XgbOptions`]
//! overrides any envelope field. With `num_class = 1` the model is binary;
//! otherwise tree `k` belongs to class `k % num_class`. Each class's base
//! margin becomes a constant tree placed first in its forest.
//!
//! XGBoost compares `f32` feature values: it takes the `yes` branch when
//! `f32(v) < c`. Each split becomes the condition `v > θ` with `θ` chosen so
//! that `v > θ ⇔ f32(v) ≥ c` for every finite `f64` value `v`, and its `yes`
//! child becomes the false branch. Missing values are not supported. Leaf
//! weights are rounded to `f32`, as XGBoost stores them.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::IoError;
use crate::model::{
    Attribute, AttributeSchema, BoostedTree, Condition, Forest, NestedNode, Tree,
};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct XgbOptions {
    pub num_class: Option<usize>,
    pub base_margin: Option<Vec<f64>>,
    pub feature_names: Option<Vec<String>>,
    pub tie_class: usize,
}

#[derive(Debug, Deserialize)]
struct DumpNode {
    nodeid: usize,
    leaf: Option<f64>,
    split: Option<String>,
    split_condition: Option<f64>,
    yes: Option<usize>,
    no: Option<usize>,
    #[serde(default)]
    children: Vec<DumpNode>,
    categories: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Input {
    Envelope {
        num_class: Option<usize>,
        base_margin: Option<Vec<f64>>,
        feature_names: Option<Vec<String>>,
        trees: Vec<DumpNode>,
    },
    Bare(Vec<DumpNode>),
}

/// The threshold `θ` with `v > θ ⇔ f32(v) ≥ c` for finite `v`.
pub fn threshold_for_f32_split(c: f32) -> Option<f64> {
    if !c.is_finite() {
        return None;
    }
    let p = c.next_down();
    if !p.is_finite() {
        return None;
    }
    // Exact in f64: both operands have 24-bit significands.
    let m = (f64::from(p) + f64::from(c)) / 2.0;
    // Values rounding to c are those above m, plus m itself if the tie
    // resolves to c.
    Some(if m as f32 == c { m.next_down() } else { m })
}

pub fn from_json_str(s: &str, opts: &XgbOptions) -> Result<BoostedTree, IoError> {
    let (num_class, base_margin, names, trees) = match serde_json::from_str::<Input>(s)? {
        Input::Envelope {
            num_class,
            base_margin,
            feature_names,
            trees,
        } => (num_class, base_margin, feature_names, trees),
        Input::Bare(trees) => (None, None, None, trees),
    };
    let num_class = opts.num_class.or(num_class).unwrap_or(1);
    if num_class == 0 {
        return Err(IoError::format("num_class must be at least 1"));
    }
    let base_margin = opts
        .base_margin
        .clone()
        .or(base_margin)
        .unwrap_or_else(|| vec![0.0; num_class]);
    if base_margin.len() != num_class {
        return Err(IoError::format(format!(
            "{} base margins for {num_class} classes",
            base_margin.len()
        )));
    }
    if trees.len() % num_class != 0 {
        return Err(IoError::format(format!(
            "{} trees is not a multiple of num_class {num_class}",
            trees.len()
        )));
    }
    let names = match opts.feature_names.clone().or(names) {
        Some(n) => n,
        None => infer_feature_names(&trees)?,
    };
    let schema = AttributeSchema::new(names.iter().map(Attribute::numerical).collect())?;

    let mut forests: Vec<Vec<Tree>> = base_margin
        .iter()
        .map(|&b| {
            if b.is_finite() {
                Ok(vec![Tree::constant(b)])
            } else {
                Err(IoError::format("non-finite base margin"))
            }
        })
        .collect::<Result<_, _>>()?;
    for (k, root) in trees.iter().enumerate() {
        let nested = convert(&schema, root)
            .map_err(|e| IoError::format(format!("tree {k}: {e}")))?;
        forests[k % num_class].push(Tree::from_nested(&nested)?);
    }
    let forests = forests
        .into_iter()
        .enumerate()
        .map(|(j, trees)| Forest::new(j, trees))
        .collect();
    let tie_class = opts.tie_class;
    Ok(BoostedTree::new(schema, forests, tie_class)?)
}

/// `f0..fN` when every split uses XGBoost's default feature names.
fn infer_feature_names(trees: &[DumpNode]) -> Result<Vec<String>, IoError> {
    fn walk(n: &DumpNode, max: &mut Option<usize>) -> Result<(), IoError> {
        if let Some(s) = &n.split {
            let idx = s
                .strip_prefix('f')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| {
                    IoError::format(format!("feature `{s}` is not `f<index>`; supply feature names"))
                })?;
            *max = Some(max.map_or(idx, |m| m.max(idx)));
        }
        n.children.iter().try_for_each(|c| walk(c, max))
    }
    let mut max = None;
    for t in trees {
        walk(t, &mut max)?;
    }
    Ok((0..max.map_or(0, |m| m + 1)).map(|i| format!("f{i}")).collect())
}

fn convert(schema: &AttributeSchema, node: &DumpNode) -> Result<NestedNode, String> {
    if let Some(w) = node.leaf {
        if !w.is_finite() {
            return Err(format!("node {}: non-finite leaf", node.nodeid));
        }
        return Ok(NestedNode::leaf(f64::from(w as f32)));
    }
    if node.categories.is_some() {
        return Err(format!("node {}: categorical splits are not supported", node.nodeid));
    }
    let (Some(feature), Some(c), Some(yes), Some(no)) =
        (&node.split, node.split_condition, node.yes, node.no)
    else {
        return Err(format!("node {}: neither a leaf nor a numeric split", node.nodeid));
    };
    let a = schema
        .index_of(feature)
        .ok_or_else(|| format!("node {}: unknown feature `{feature}`", node.nodeid))?;
    let theta = threshold_for_f32_split(c as f32)
        .ok_or_else(|| format!("node {}: unusable threshold {c}", node.nodeid))?;
    let child = |id: usize| {
        node.children
            .iter()
            .find(|n| n.nodeid == id)
            .ok_or_else(|| format!("node {}: child {id} missing", node.nodeid))
    };
    Ok(NestedNode::split(
        Condition::greater_than(a, theta),
        convert(schema, child(yes)?)?,
        convert(schema, child(no)?)?,
    ))
}

pub fn load(path: impl AsRef<Path>, opts: &XgbOptions) -> Result<BoostedTree, IoError> {
    from_json_str(&fs::read_to_string(path)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Instance, Value};

    #[test]
    fn threshold_matches_f32_rounding() {
        let cs = [0.5f32, 1.0, 3.0, 0.158_3, 106.2, -2.75, 1e-30, -1e30, f32::MIN_POSITIVE];
        for c in cs {
            let theta = threshold_for_f32_split(c).unwrap();
            let mut probes = vec![theta, theta.next_up(), theta.next_down(), f64::from(c)];
            probes.push(f64::from(c.next_down()));
            probes.push(f64::from(c.next_up()));
            for v in probes {
                assert_eq!(v > theta, (v as f32) >= c, "c={c} v={v}");
            }
        }
        assert_eq!(threshold_for_f32_split(f32::INFINITY), None);
    }

    #[test]
    fn envelope_and_bare_dump() {
        let tree = r#"{"nodeid":0,"split":"f1","split_condition":2.5,"yes":1,"no":2,"missing":2,
            "children":[{"nodeid":1,"leaf":-0.25},{"nodeid":2,"leaf":0.75}]}"#;
        let bare = format!("[{tree}]");
        let bt = from_json_str(&bare, &XgbOptions::default()).unwrap();
        assert_eq!(bt.schema().len(), 2);
        assert_eq!(bt.forests()[0].trees.len(), 2);
        let x = |v: f64| Instance::new(bt.schema(), vec![Value::Number(0.0), Value::Number(v)]).unwrap();
        assert_eq!(bt.classify(&x(2.4)), 0);
        assert_eq!(bt.classify(&x(2.5)), 1);

        let env = format!(
            r#"{{"num_class":2,"base_margin":[0.5,0.0],"feature_names":["a","b"],"trees":[{tree},{tree}]}}"#
        )
        .replace("\"f1\"", "\"b\"");
        let bt = from_json_str(&env, &XgbOptions::default()).unwrap();
        assert_eq!(bt.num_classes(), 2);
        assert_eq!(bt.forests()[0].trees[0].eval(&x(0.0)), 0.5);

        let named = bare.replace("\"f1\"", "\"width\"");
        assert!(from_json_str(&named, &XgbOptions::default()).is_err());
        let opts = XgbOptions {
            feature_names: Some(vec!["width".into()]),
            ..XgbOptions::default()
        };
        assert!(from_json_str(&named, &opts).is_ok());
    }
}
