use std::collections::BTreeMap;
use std::fmt;

use super::instance::Fact;
use super::syntax::{Atom, CompAtom, NodeId, NodeTerm, RelAtom, Term, Var};
use super::value::Value;

/// Assignment of data variables to values and node variables to nodes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Valuation {
    pub data: BTreeMap<Var, Value>,
    pub nodes: BTreeMap<Var, NodeId>,
}

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_data(mut self, var: &str, value: i64) -> Self {
        self.data.insert(Var::new(var), Value::int(value));
        self
    }

    pub fn with_node(mut self, var: &str, node: u32) -> Self {
        self.nodes.insert(Var::new(var), NodeId(node));
        self
    }

    pub fn term(&self, t: &Term) -> Option<Value> {
        match t {
            Term::Const(c) => Some(*c),
            Term::Var(v) => self.data.get(v).copied(),
        }
    }

    pub fn node(&self, t: &NodeTerm) -> Option<NodeId> {
        match t {
            NodeTerm::Id(n) => Some(*n),
            NodeTerm::Var(v) => self.nodes.get(v).copied(),
        }
    }

    /// The fact `V(A)`, or `None` if a variable is unassigned.
    pub fn fact(&self, atom: &RelAtom) -> Option<Fact> {
        let values = atom.terms.iter().map(|t| self.term(t)).collect::<Option<Vec<_>>>()?;
        Some(Fact::from_values(atom.relation.clone(), values))
    }

    /// The fact and its node (`None` for a global atom).
    pub fn placed_fact(&self, atom: &Atom) -> Option<(Fact, Option<NodeId>)> {
        let fact = self.fact(&atom.rel)?;
        match &atom.node {
            None => Some((fact, None)),
            Some(n) => Some((fact, Some(self.node(n)?))),
        }
    }

    pub fn satisfies_comparison(&self, c: &CompAtom) -> Option<bool> {
        Some(CompAtom::holds(c.op, self.term(&c.left)?, self.term(&c.right)?))
    }

    /// Whether `other` agrees with `self` on every variable `self` assigns.
    pub fn is_extended_by(&self, other: &Valuation) -> bool {
        self.data.iter().all(|(k, v)| other.data.get(k) == Some(v))
            && self.nodes.iter().all(|(k, n)| other.nodes.get(k) == Some(n))
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty() && self.nodes.is_empty()
    }
}

impl fmt::Display for Valuation {
    /// `{x->1, y->2/3, k->@0}` with data and node variables in name order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: Vec<(&Var, String)> = self.data.iter().map(|(k, v)| (k, v.to_string())).collect();
        entries.extend(self.nodes.iter().map(|(k, n)| (k, format!("@{n}"))));
        entries.sort();
        f.write_str("{")?;
        for (i, (k, v)) in entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
