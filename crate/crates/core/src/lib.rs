//! Abductive explanations for boosted tree classifiers.
//!
//! * [`ts`]: tree-specific explanations, computed in polynomial time from
//!   per-tree worst/best leaf weights.
//! * [`oracle`]: an exact (exponential worst-case) implicant test.
//! * [`sr`]: sufficient reasons by greedy elimination under the oracle, and
//!   the pipeline seeding it with a tree-specific explanation.
//! * [`batch`]: per-instance reports over many instances.

pub mod batch;
pub mod bounds;
pub mod domain;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod oracle;
pub mod sr;
pub mod synth;
pub mod ts;

pub use error::ExplainError;
pub use model::{
    Attribute, AttributeKind, AttributeSchema, BoostedTree, Condition, Forest, Instance,
    ModelError, NestedNode, Node, Term, Test, Tree, Value,
};
pub use oracle::{
    is_abductive, is_abductive_bruteforce, ConditionUniverse, Objective, OracleConfig,
    OracleStatus, OracleVerdict,
};
pub use sr::{reduction_rate, sr_explain, ts_sr_pipeline, PipelineOutcome, SrConfig, SrResult};
pub use ts::{
    ts_explain, ts_explain_multi, ts_test, EliminationOrder, OrderingPolicy, TsConfig, TsOutcome,
    TsStats,
};
