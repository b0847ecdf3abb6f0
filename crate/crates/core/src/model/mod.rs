//! Terms, atoms, constraints, distributed instances and their semantics.

mod instance;
mod matching;
mod normalize;
mod semantics;
mod syntax;
mod valuation;
mod value;

pub use instance::{DistributedInstance, Fact};
pub use matching::{find_valuations, Binding, FactIndex, Pattern, Slot, Sort};
pub use normalize::{
    alpha_equivalent, alpha_equivalent_all, is_data_full, normalize_heads, normalize_set, NormalizedPart,
};
pub use semantics::{
    model_check, satisfies, violated_by, CompiledConstraint, CompiledHead, Violation, ViolationReport,
};
pub use syntax::{
    extend_schema, Atom, CmpOp, CompAtom, Constraint, ConstraintSet, Degd, Dtgd, Equality, NodeId, NodeTerm, Query,
    RelAtom, Schema, Sym, Term, Var,
};
pub use valuation::Valuation;
pub use value::{Domain, Value, ValueError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("relation {relation} used with arity {found}, expected {expected}")]
    ArityMismatch { relation: Sym, expected: usize, found: usize },
    #[error("dtgd is not data-full: head data variable `{0}` does not occur in the body")]
    NotDataFull(Var),
    #[error("variable `{0}` is used both as a data and as a node variable")]
    SortClash(Var),
    #[error("variable `{0}` does not occur in the relational body")]
    Unsafe(Var),
    #[error("equality mixes node and data variables at `{0}`")]
    MixedEquality(Var),
    #[error("node ids may not occur in constraints")]
    NodeIdInConstraint,
    #[error("query head symbol {0} also occurs in the body")]
    HeadInSchema(Sym),
    #[error("local fact {fact} at node {node} is missing from the global instance")]
    SubsetViolation { node: NodeId, fact: Fact },
    #[error("value {value} is not in domain {domain}")]
    DomainMismatch { value: Value, domain: Domain },
}
