//! Reference implementations used only by tests. They share no code with the
//! library's bounds or oracle: extensions of a term are enumerated directly,
//! using every threshold as a value (each threshold is the right end of its
//! cell) plus one value beyond the last, every declared category and both
//! Booleans.

#![allow(dead_code)]

use bt_explain::{AttributeKind, BoostedTree, Instance, Node, Term, Test, Value};

/// Candidate values per attribute covering every cell of the model.
pub fn candidate_values(bt: &BoostedTree) -> Vec<Vec<Value>> {
    let schema = bt.schema();
    let mut thresholds: Vec<Vec<f64>> = vec![Vec::new(); schema.len()];
    for tree in bt.forests().iter().flat_map(|f| &f.trees) {
        for node in tree.nodes() {
            if let Node::Split { condition, .. } = node {
                if let Test::GreaterThan(t) = condition.test {
                    thresholds[condition.attribute].push(t);
                }
            }
        }
    }
    schema
        .attributes()
        .iter()
        .enumerate()
        .map(|(i, a)| match &a.kind {
            AttributeKind::Numerical => {
                let mut ts = thresholds[i].clone();
                ts.sort_by(f64::total_cmp);
                ts.dedup();
                let mut vals = ts.clone();
                vals.push(ts.last().map_or(0.0, |t| t + 1.0));
                vals.into_iter().map(Value::Number).collect()
            }
            AttributeKind::Categorical(cats) => (0..cats.len()).map(Value::Category).collect(),
            AttributeKind::Boolean => vec![Value::Bool(false), Value::Bool(true)],
        })
        .collect()
}

pub fn extension_count(bt: &BoostedTree, t: &Term) -> u128 {
    candidate_values(bt)
        .iter()
        .enumerate()
        .filter(|(i, _)| !t.contains(*i))
        .map(|(_, v)| v.len() as u128)
        .product()
}

/// Calls `f` on every enumerated extension of `t` built from `x`.
pub fn for_each_extension(bt: &BoostedTree, x: &Instance, t: &Term, mut f: impl FnMut(&Instance)) {
    let cands = candidate_values(bt);
    let free: Vec<usize> = (0..cands.len()).filter(|i| !t.contains(*i)).collect();
    let mut values = x.values().to_vec();
    fn rec(
        k: usize,
        free: &[usize],
        cands: &[Vec<Value>],
        values: &mut Vec<Value>,
        bt: &BoostedTree,
        f: &mut dyn FnMut(&Instance),
    ) {
        if k == free.len() {
            let z = Instance::new(bt.schema(), values.clone()).expect("valid values");
            f(&z);
            return;
        }
        let a = free[k];
        for v in &cands[a] {
            values[a] = *v;
            rec(k + 1, free, cands, values, bt, f);
        }
    }
    rec(0, &free, &cands, &mut values, bt, &mut f);
}

/// Per-forest weights summed tree by tree.
pub fn weights(bt: &BoostedTree, z: &Instance) -> Vec<f64> {
    bt.forests()
        .iter()
        .map(|f| f.trees.iter().fold(0.0, |acc, t| acc + t.eval(z)))
        .collect()
}

/// The decision rule written out directly.
pub fn class_of(bt: &BoostedTree, w: &[f64]) -> usize {
    if w.len() == 1 {
        return usize::from(w[0] > 0.0);
    }
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax: Vec<usize> = (0..w.len()).filter(|&i| w[i] == max).collect();
    if argmax.len() == w.len() {
        bt.tie_class()
    } else {
        argmax[0]
    }
}

/// Margin of class `c`: `w`, `-w` or `w_c - max_{j != c} w_j`.
pub fn margin(w: &[f64], c: usize) -> f64 {
    if w.len() == 1 {
        return if c == 1 { w[0] } else { -w[0] };
    }
    let other = (0..w.len())
        .filter(|&j| j != c)
        .map(|j| w[j])
        .fold(f64::NEG_INFINITY, f64::max);
    w[c] - other
}

pub struct Reference {
    pub abductive: bool,
    pub min_margin: f64,
}

/// Exhaustive implicant check of `t` for `x`.
pub fn reference_check(bt: &BoostedTree, x: &Instance, t: &Term) -> Reference {
    let c = class_of(bt, &weights(bt, x));
    let mut abductive = true;
    let mut min_margin = f64::INFINITY;
    for_each_extension(bt, x, t, |z| {
        let w = weights(bt, z);
        min_margin = min_margin.min(margin(&w, c));
        abductive &= class_of(bt, &w) == c;
    });
    Reference {
        abductive,
        min_margin,
    }
}

/// Extreme leaf weights of one tree over the enumerated extensions.
pub fn reference_tree_range(
    bt: &BoostedTree,
    forest: usize,
    tree: usize,
    x: &Instance,
    t: &Term,
) -> (f64, f64) {
    let tr = &bt.forests()[forest].trees[tree];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for_each_extension(bt, x, t, |z| {
        let w = tr.eval(z);
        lo = lo.min(w);
        hi = hi.max(w);
    });
    (lo, hi)
}

/// Whether `z` agrees with `x` on `t`.
pub fn extends(z: &Instance, x: &Instance, t: &Term) -> bool {
    t.iter().all(|i| z.value(i) == x.value(i))
}

/// Every subset of `0..n` as a term.
pub fn all_terms(n: usize) -> Vec<Term> {
    (0u32..(1 << n))
        .map(|mask| Term::from_indices((0..n).filter(|i| mask >> i & 1 == 1)))
        .collect()
}
