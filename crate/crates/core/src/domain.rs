//! Per-attribute domain constraints and restrictions.
//!
//! A [`Restriction`] denotes the set of instances satisfying one
//! [`DomainConstraint`] per attribute. A term `t ⊆ t_x` is the special case
//! where kept attributes are pinned to their value in `x` and all others are
//! free; the oracle also uses intermediate states (intervals, excluded
//! categories) produced by branching.

use std::collections::BTreeSet;

use crate::model::{AttributeKind, AttributeSchema, Instance, Term, Test, Value};

/// Constraint on a numerical attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumberDomain {
    /// Exactly this value.
    Pinned(f64),
    /// The half-open interval `(lo, hi]`, `lo < hi`, bounds possibly infinite.
    Interval { lo: f64, hi: f64 },
}

/// Constraint on a categorical attribute over its declared categories.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDomain {
    pub fixed: Option<usize>,
    pub excluded: BTreeSet<usize>,
    pub categories: usize,
}

impl CategoryDomain {
    pub fn free(categories: usize) -> Self {
        CategoryDomain {
            fixed: None,
            excluded: BTreeSet::new(),
            categories,
        }
    }

    pub fn allows_value(&self, c: usize) -> bool {
        match self.fixed {
            Some(f) => f == c,
            None => c < self.categories && !self.excluded.contains(&c),
        }
    }

    pub fn allowed_count(&self) -> usize {
        match self.fixed {
            Some(_) => 1,
            None => self.categories - self.excluded.len(),
        }
    }

    /// Smallest allowed category.
    pub fn first_allowed(&self) -> Option<usize> {
        match self.fixed {
            Some(f) => Some(f),
            None => (0..self.categories).find(|c| !self.excluded.contains(c)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainConstraint {
    Number(NumberDomain),
    Category(CategoryDomain),
    /// `None` means free.
    Boolean(Option<bool>),
}

/// Token restoring a constraint after [`DomainConstraint::refine`].
#[derive(Debug, Clone, Copy)]
pub enum Undo {
    Nothing,
    Interval { lo: f64, hi: f64 },
    Unfix,
    Unexclude(usize),
    Unpin,
}

impl DomainConstraint {
    pub fn free(kind: &AttributeKind) -> Self {
        match kind {
            AttributeKind::Numerical => DomainConstraint::Number(NumberDomain::Interval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            }),
            AttributeKind::Categorical(c) => DomainConstraint::Category(CategoryDomain::free(c.len())),
            AttributeKind::Boolean => DomainConstraint::Boolean(None),
        }
    }

    pub fn pinned(kind: &AttributeKind, value: Value) -> Self {
        match (kind, value) {
            (AttributeKind::Numerical, Value::Number(v)) => {
                DomainConstraint::Number(NumberDomain::Pinned(v))
            }
            (AttributeKind::Categorical(c), Value::Category(k)) => {
                DomainConstraint::Category(CategoryDomain {
                    fixed: Some(k),
                    excluded: BTreeSet::new(),
                    categories: c.len(),
                })
            }
            (AttributeKind::Boolean, Value::Bool(b)) => DomainConstraint::Boolean(Some(b)),
            _ => panic!("value kind does not match attribute kind"),
        }
    }

    /// Whether some value allowed by the constraint gives the test `outcome`.
    #[inline]
    pub fn allows(&self, test: &Test, outcome: bool) -> bool {
        match (self, *test) {
            (DomainConstraint::Number(NumberDomain::Pinned(v)), Test::GreaterThan(t)) => {
                (*v > t) == outcome
            }
            (DomainConstraint::Number(NumberDomain::Interval { lo, hi }), Test::GreaterThan(t)) => {
                if outcome {
                    *hi > t
                } else {
                    *lo < t
                }
            }
            (DomainConstraint::Category(d), Test::EqualsCategory(k)) => {
                if outcome {
                    d.allows_value(k)
                } else {
                    d.allowed_count() > usize::from(d.allows_value(k))
                }
            }
            (DomainConstraint::Boolean(fixed), Test::IsTrue) => match fixed {
                Some(b) => *b == outcome,
                None => true,
            },
            _ => panic!("test kind does not match constraint kind"),
        }
    }

    /// The outcome of `test` if it is the same for every allowed value.
    pub fn decided(&self, test: &Test) -> Option<bool> {
        match (self.allows(test, false), self.allows(test, true)) {
            (true, false) => Some(false),
            (false, true) => Some(true),
            _ => None,
        }
    }

    /// Narrows the constraint to values giving `outcome`. The caller must have
    /// checked [`allows`](Self::allows).
    #[inline]
    pub fn refine(&mut self, test: &Test, outcome: bool) -> Undo {
        debug_assert!(self.allows(test, outcome));
        match (self, *test) {
            (DomainConstraint::Number(NumberDomain::Pinned(_)), _) => Undo::Nothing,
            (DomainConstraint::Number(NumberDomain::Interval { lo, hi }), Test::GreaterThan(t)) => {
                let undo = Undo::Interval { lo: *lo, hi: *hi };
                if outcome {
                    *lo = lo.max(t);
                } else {
                    *hi = hi.min(t);
                }
                undo
            }
            (DomainConstraint::Category(d), Test::EqualsCategory(k)) => {
                if d.fixed.is_some() {
                    Undo::Nothing
                } else if outcome {
                    d.fixed = Some(k);
                    Undo::Unfix
                } else if d.excluded.insert(k) {
                    Undo::Unexclude(k)
                } else {
                    Undo::Nothing
                }
            }
            (DomainConstraint::Boolean(fixed), Test::IsTrue) => {
                if fixed.is_some() {
                    Undo::Nothing
                } else {
                    *fixed = Some(outcome);
                    Undo::Unpin
                }
            }
            _ => panic!("test kind does not match constraint kind"),
        }
    }

    #[inline]
    pub fn undo(&mut self, undo: Undo) {
        match (self, undo) {
            (_, Undo::Nothing) => {}
            (DomainConstraint::Number(NumberDomain::Interval { lo, hi }), Undo::Interval { lo: l, hi: h }) => {
                *lo = l;
                *hi = h;
            }
            (DomainConstraint::Category(d), Undo::Unfix) => d.fixed = None,
            (DomainConstraint::Category(d), Undo::Unexclude(k)) => {
                d.excluded.remove(&k);
            }
            (DomainConstraint::Boolean(fixed), Undo::Unpin) => *fixed = None,
            _ => panic!("undo token does not match constraint"),
        }
    }

    pub fn contains(&self, value: Value) -> bool {
        match (self, value) {
            (DomainConstraint::Number(NumberDomain::Pinned(p)), Value::Number(v)) => *p == v,
            (DomainConstraint::Number(NumberDomain::Interval { lo, hi }), Value::Number(v)) => {
                *lo < v && v <= *hi
            }
            (DomainConstraint::Category(d), Value::Category(c)) => d.allows_value(c),
            (DomainConstraint::Boolean(fixed), Value::Bool(b)) => fixed.is_none_or(|f| f == b),
            _ => false,
        }
    }

    pub fn is_satisfiable(&self) -> bool {
        match self {
            DomainConstraint::Number(NumberDomain::Pinned(v)) => v.is_finite(),
            DomainConstraint::Number(NumberDomain::Interval { lo, hi }) => lo < hi,
            DomainConstraint::Category(d) => match d.fixed {
                Some(f) => f < d.categories,
                None => d.allowed_count() > 0,
            },
            DomainConstraint::Boolean(_) => true,
        }
    }

    /// A deterministic allowed value: the pinned value, an interval
    /// midpoint (`lo + 1` / `hi - 1` at infinite ends), the fixed or smallest
    /// allowed category, the fixed Boolean or 0.
    pub fn representative(&self) -> Value {
        match self {
            DomainConstraint::Number(NumberDomain::Pinned(v)) => Value::Number(*v),
            DomainConstraint::Number(NumberDomain::Interval { lo, hi }) => {
                Value::Number(interval_representative(*lo, *hi))
            }
            DomainConstraint::Category(d) => {
                Value::Category(d.first_allowed().expect("satisfiable category domain"))
            }
            DomainConstraint::Boolean(fixed) => Value::Bool(fixed.unwrap_or(false)),
        }
    }
}

/// A value inside `(lo, hi]`, `lo < hi`.
pub fn interval_representative(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo < hi);
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => 0.0,
        (false, true) => {
            let v = hi - 1.0;
            if v < hi {
                v
            } else {
                hi
            }
        }
        (true, false) => {
            let v = lo + 1.0;
            if v > lo {
                v
            } else {
                lo.next_up()
            }
        }
        (true, true) => {
            let mid = lo + (hi - lo) / 2.0;
            if lo < mid && mid <= hi && mid.is_finite() {
                mid
            } else {
                hi
            }
        }
    }
}

/// One [`DomainConstraint`] per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    constraints: Vec<DomainConstraint>,
}

impl Restriction {
    pub fn unconstrained(schema: &AttributeSchema) -> Self {
        Restriction {
            constraints: schema
                .attributes()
                .iter()
                .map(|a| DomainConstraint::free(&a.kind))
                .collect(),
        }
    }

    /// The restriction whose denotation is `{x' : t ⊆ t_x'}`.
    pub fn of_term(schema: &AttributeSchema, x: &Instance, t: &Term) -> Self {
        let mut r = Restriction::unconstrained(schema);
        for i in t.iter() {
            r.pin(schema, i, x.value(i));
        }
        r
    }

    pub fn from_constraints(constraints: Vec<DomainConstraint>) -> Self {
        Restriction { constraints }
    }

    pub fn pin(&mut self, schema: &AttributeSchema, attribute: usize, value: Value) {
        self.constraints[attribute] =
            DomainConstraint::pinned(&schema.attribute(attribute).kind, value);
    }

    pub fn free(&mut self, schema: &AttributeSchema, attribute: usize) {
        self.constraints[attribute] = DomainConstraint::free(&schema.attribute(attribute).kind);
    }

    pub fn constraints(&self) -> &[DomainConstraint] {
        &self.constraints
    }

    pub fn constraint(&self, attribute: usize) -> &DomainConstraint {
        &self.constraints[attribute]
    }

    pub fn constraint_mut(&mut self, attribute: usize) -> &mut DomainConstraint {
        &mut self.constraints[attribute]
    }

    pub fn set(&mut self, attribute: usize, constraint: DomainConstraint) {
        self.constraints[attribute] = constraint;
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn is_satisfiable(&self) -> bool {
        self.constraints.iter().all(DomainConstraint::is_satisfiable)
    }

    pub fn contains(&self, x: &Instance) -> bool {
        self.constraints
            .iter()
            .zip(x.values())
            .all(|(c, v)| c.contains(*v))
    }

    /// A deterministic instance of the denotation.
    pub fn representative(&self) -> Instance {
        Instance::from_values_unchecked(
            self.constraints
                .iter()
                .map(DomainConstraint::representative)
                .collect(),
        )
    }
}
