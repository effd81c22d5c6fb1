//! Built-in models: the four-attribute running example and the discrepancy
//! construction where the only tree-specific explanation of `(0,…,0)` keeps
//! every characteristic while the empty term already suffices.

use crate::model::{
    Attribute, AttributeSchema, BoostedTree, Condition, Forest, Instance, NestedNode, Tree, Value,
};

/// Three regression trees over `A1, A2` (numerical), `A3 ∈ {b, w, r}` and
/// `A4` (Boolean), classifying `(4, 3, b, 1)` as positive with weight 0.9.
pub fn running_example() -> BoostedTree {
    use NestedNode as N;
    let schema = AttributeSchema::new(vec![
        Attribute::numerical("A1"),
        Attribute::numerical("A2"),
        Attribute::categorical("A3", ["b", "w", "r"]),
        Attribute::boolean("A4"),
    ])
    .expect("valid schema");
    let a1_gt2 = Condition::greater_than(0, 2.0);
    let a2_gt1 = Condition::greater_than(1, 1.0);
    let a3_b = Condition::equals_category(2, 0);
    let a4 = Condition::is_true(3);

    let t1 = N::split(
        a4,
        N::leaf(-0.5),
        N::split(
            a2_gt1,
            N::leaf(0.4),
            N::split(a3_b, N::leaf(-0.3), N::split(a1_gt2, N::leaf(-0.2), N::leaf(0.3))),
        ),
    );
    let t2 = N::split(
        a2_gt1,
        N::split(a1_gt2, N::leaf(-0.2), N::split(a4, N::leaf(-0.4), N::leaf(0.3))),
        N::leaf(0.5),
    );
    let t3 = N::split(
        a3_b,
        N::split(
            a2_gt1,
            N::split(a1_gt2, N::leaf(-0.2), N::leaf(0.2)),
            N::split(a4, N::leaf(-0.1), N::split(a1_gt2, N::leaf(0.2), N::leaf(0.3))),
        ),
        N::split(
            a2_gt1,
            N::leaf(-0.4),
            N::split(a4, N::leaf(-0.5), N::leaf(0.1)),
        ),
    );
    let trees = [t1, t2, t3]
        .iter()
        .map(|t| Tree::from_nested(t).expect("well-formed tree"))
        .collect();
    BoostedTree::new(schema, vec![Forest::new(0, trees)], 0).expect("valid model")
}

/// The instance `(4, 3, b, 1)` of the running example.
pub fn running_example_instance(bt: &BoostedTree) -> Instance {
    Instance::new(
        bt.schema(),
        vec![
            Value::Number(4.0),
            Value::Number(3.0),
            Value::Category(0),
            Value::Bool(true),
        ],
    )
    .expect("conforms to schema")
}

/// One forest of `2n` depth-1 trees over Boolean attributes `A1..An`: for
/// each `i`, `T_i+` has leaves `(-0.5, 0.5)` and `T_i-` has `(0.5, -0.5)` on
/// the condition `A_i = 1`. Every instance weighs 0 and is classified 0.
pub fn discrepancy_model(n: usize) -> BoostedTree {
    assert!(n >= 1, "discrepancy model needs at least one attribute");
    let schema = AttributeSchema::new(
        (1..=n)
            .map(|i| Attribute::boolean(format!("A{i}")))
            .collect(),
    )
    .expect("distinct names");
    let mut trees = Vec::with_capacity(2 * n);
    for i in 0..n {
        let c = Condition::is_true(i);
        for (off, on) in [(-0.5, 0.5), (0.5, -0.5)] {
            trees.push(
                Tree::from_nested(&NestedNode::split(
                    c,
                    NestedNode::leaf(off),
                    NestedNode::leaf(on),
                ))
                .expect("well-formed tree"),
            );
        }
    }
    BoostedTree::new(schema, vec![Forest::new(0, trees)], 0).expect("valid model")
}

/// The all-zero instance of [`discrepancy_model`].
pub fn discrepancy_instance(bt: &BoostedTree) -> Instance {
    Instance::new(bt.schema(), vec![Value::Bool(false); bt.schema().len()])
        .expect("conforms to schema")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrepancy_model_is_constantly_negative() {
        let bt = discrepancy_model(1);
        for b in [false, true] {
            let x = Instance::new(bt.schema(), vec![Value::Bool(b)]).unwrap();
            assert_eq!(bt.forests()[0].eval(&x), 0.0);
            assert_eq!(bt.classify(&x), 0);
        }
        let bt = discrepancy_model(3);
        assert_eq!(bt.forests()[0].trees.len(), 6);
    }
}
