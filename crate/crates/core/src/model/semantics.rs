use std::fmt;
use std::ops::ControlFlow;

use super::instance::DistributedInstance;
use super::matching::{Binding, FactIndex, Pattern, Slot};
use super::syntax::{Constraint, ConstraintSet, Equality};
use super::valuation::Valuation;
use super::ModelError;

/// A constraint compiled for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledConstraint {
    pub body: Pattern,
    pub head: CompiledHead,
}

#[derive(Clone, Debug)]
pub enum CompiledHead {
    /// Head atoms over the body variables plus the head-only variables.
    Atoms(Pattern),
    /// Indices of the two equated variables in the body pattern.
    Equal(usize, usize),
}

impl CompiledConstraint {
    pub fn new(c: &Constraint) -> Self {
        let body = Pattern::new(c.body(), c.comparisons());
        let head = match c {
            Constraint::Tgd(t) => {
                let shared = body.vars().iter().cloned().zip(body.sorts().iter().copied());
                CompiledHead::Atoms(Pattern::with_vars(&t.head, &[], shared))
            }
            Constraint::Egd(e) => {
                let (a, b) = match &e.head {
                    Equality::Data(a, b) | Equality::Node(a, b) => (a, b),
                };
                let idx = |v| body.var_index(v).expect("degd head variable occurs in body");
                CompiledHead::Equal(idx(a), idx(b))
            }
        };
        CompiledConstraint { body, head }
    }

    /// Whether the body valuation `b` is satisfied by the head on `index`.
    /// Returns the extended head binding for tgds when one exists.
    pub fn head_holds(&self, index: &FactIndex<'_>, b: &[Option<Slot>]) -> bool {
        match &self.head {
            CompiledHead::Atoms(h) => h.exists(index, &h.binding_from(&self.body, b)),
            CompiledHead::Equal(i, j) => b[*i] == b[*j],
        }
    }

    pub fn head_extension(&self, index: &FactIndex<'_>, b: &[Option<Slot>]) -> Option<Binding> {
        match &self.head {
            CompiledHead::Atoms(h) => h.first(index, &h.binding_from(&self.body, b)),
            CompiledHead::Equal(i, j) => (b[*i] == b[*j]).then(|| b.to_vec()),
        }
    }

    /// First body valuation (in enumeration order) whose head fails.
    pub fn first_violation(&self, index: &FactIndex<'_>) -> Option<Binding> {
        let mut found = None;
        let _ = self.body.for_each(index, &self.body.empty_binding(), |b| {
            if self.head_holds(index, b) {
                ControlFlow::Continue(())
            } else {
                found = Some(b.to_vec());
                ControlFlow::Break(())
            }
        });
        found
    }
}

/// One violated constraint with a witnessing body valuation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    pub constraint: usize,
    pub valuation: Valuation,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "violated constraint #{} under {}", v.constraint + 1, v.valuation)?;
        }
        Ok(())
    }
}

fn check_arities(d: &DistributedInstance, sigma: &ConstraintSet) -> Result<(), ModelError> {
    let schema = d.schema()?;
    for (rel, &n) in sigma.schema() {
        if let Some(&m) = schema.get(rel) {
            if m != n {
                return Err(ModelError::ArityMismatch { relation: rel.clone(), expected: n, found: m });
            }
        }
    }
    Ok(())
}

/// Whether `d` satisfies `c`.
pub fn satisfies(d: &DistributedInstance, c: &Constraint) -> bool {
    let index = FactIndex::new(d);
    CompiledConstraint::new(c).first_violation(&index).is_none()
}

/// Lists every violated constraint of `sigma` with one witness each.
pub fn model_check(d: &DistributedInstance, sigma: &ConstraintSet) -> Result<ViolationReport, ModelError> {
    check_arities(d, sigma)?;
    let index = FactIndex::new(d);
    let violations = sigma
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let cc = CompiledConstraint::new(c);
            cc.first_violation(&index).map(|b| Violation { constraint: i, valuation: cc.body.to_valuation(&b) })
        })
        .collect();
    Ok(ViolationReport { violations })
}

/// Whether `val` satisfies the body of `c` on `d` but has no head extension.
pub fn violated_by(d: &DistributedInstance, c: &Constraint, val: &Valuation) -> bool {
    let index = FactIndex::new(d);
    let cc = CompiledConstraint::new(c);
    let b = cc.body.binding_from_valuation(val);
    if b.iter().any(Option::is_none) {
        return false;
    }
    cc.body.exists(&index, &b) && !cc.head_holds(&index, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dtgd, Fact, NodeId, RelAtom};

    fn two_node_instance() -> DistributedInstance {
        let mut d = DistributedInstance::from_global([Fact::new("S", [4])]);
        d.insert_local(NodeId(1), Fact::new("R", [1, 2]));
        d.insert_local(NodeId(1), Fact::new("S", [2]));
        d.insert_local(NodeId(2), Fact::new("S", [2]));
        d.insert_local(NodeId(2), Fact::new("S", [3]));
        d
    }

    fn tau_ns() -> Constraint {
        Dtgd::new(vec![RelAtom::vars("S", &["x"]).global()], vec![], vec![RelAtom::vars("S", &["x"]).at("k")]).into()
    }

    #[test]
    fn meeting_facts_satisfy_the_join_constraint() {
        let mut d = DistributedInstance::new();
        d.insert_local(NodeId(1), Fact::new("R", [1, 2]));
        d.insert_local(NodeId(1), Fact::new("S", [1, 2]));
        let sigma: Constraint = Dtgd::new(
            vec![RelAtom::vars("R", &["x", "y"]).global(), RelAtom::vars("S", &["x", "y"]).global()],
            vec![],
            vec![RelAtom::vars("R", &["x", "y"]).at("k"), RelAtom::vars("S", &["x", "y"]).at("k")],
        )
        .into();
        assert!(satisfies(&d, &sigma));
    }

    #[test]
    fn skipped_fact_violates_non_skipping() {
        let d = two_node_instance();
        assert!(!satisfies(&d, &tau_ns()));
        let sigma = ConstraintSet::new(vec![tau_ns()]).unwrap();
        let report = model_check(&d, &sigma).unwrap();
        assert_eq!(report.violations, vec![Violation { constraint: 0, valuation: Valuation::new().with_data("x", 4) }]);
        assert!(model_check(&d, &ConstraintSet::default()).unwrap().is_empty());
    }

    #[test]
    fn arity_conflicts_with_the_instance_are_reported() {
        let d = DistributedInstance::from_global([Fact::new("S", [1, 2])]);
        let sigma = ConstraintSet::new(vec![tau_ns()]).unwrap();
        assert!(matches!(model_check(&d, &sigma), Err(ModelError::ArityMismatch { .. })));
    }
}
