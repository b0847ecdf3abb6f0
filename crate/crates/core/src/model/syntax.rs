use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::value::{Domain, Value};
use super::ModelError;

/// Relation symbol name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(Arc<str>);

/// Variable name. Data and node variables share this type; the position of
/// an occurrence decides its sort.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

macro_rules! name_type {
    ($t:ident) => {
        impl $t {
            pub fn new(name: &str) -> Self {
                debug_assert!(!name.is_empty());
                $t(Arc::from(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                $t::new(s)
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

name_type!(Sym);
name_type!(Var);

/// Node identifier inside instances and chase states.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    Const(Value),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum NodeTerm {
    Var(Var),
    Id(NodeId),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RelAtom {
    pub relation: Sym,
    pub terms: Vec<Term>,
}

/// A relation atom, optionally placed at a node (`R(x)@k`). Without a node
/// term the atom refers to the global instance.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub rel: RelAtom,
    pub node: Option<NodeTerm>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CmpOp {
    Lt,
    Le,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CompAtom {
    pub left: Term,
    pub op: CmpOp,
    pub right: Term,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dtgd {
    pub body: Vec<Atom>,
    pub comparisons: Vec<CompAtom>,
    pub head: Vec<Atom>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Equality {
    Data(Var, Var),
    Node(Var, Var),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Degd {
    pub body: Vec<Atom>,
    pub comparisons: Vec<CompAtom>,
    pub head: Equality,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Constraint {
    Tgd(Dtgd),
    Egd(Degd),
}

pub type Schema = BTreeMap<Sym, usize>;

/// An ordered set of constraints together with the arities of the symbols
/// they mention.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ConstraintSet {
    schema: Schema,
    constraints: Vec<Constraint>,
}

/// A conjunctive query `H(x̄) <- R₁(ȳ₁), …`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Query {
    pub head: RelAtom,
    pub body: Vec<RelAtom>,
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<Value> {
        match self {
            Term::Const(c) => Some(*c),
            Term::Var(_) => None,
        }
    }
}

impl NodeTerm {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            NodeTerm::Var(v) => Some(v),
            NodeTerm::Id(_) => None,
        }
    }
}

impl RelAtom {
    pub fn new(relation: &str, terms: Vec<Term>) -> Self {
        RelAtom { relation: Sym::new(relation), terms }
    }

    /// Atom over variables only: `RelAtom::vars("R", &["x", "y"])`.
    pub fn vars(relation: &str, names: &[&str]) -> Self {
        RelAtom::new(relation, names.iter().map(|n| Term::var(n)).collect())
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    pub fn data_vars(&self) -> impl Iterator<Item = &Var> {
        self.terms.iter().filter_map(Term::as_var)
    }

    pub fn constants(&self) -> impl Iterator<Item = Value> + '_ {
        self.terms.iter().filter_map(Term::as_const)
    }

    pub fn at(self, node: &str) -> Atom {
        Atom { rel: self, node: Some(NodeTerm::Var(Var::new(node))) }
    }

    pub fn global(self) -> Atom {
        Atom { rel: self, node: None }
    }
}

impl Atom {
    pub fn relation(&self) -> &Sym {
        &self.rel.relation
    }

    pub fn node_var(&self) -> Option<&Var> {
        self.node.as_ref().and_then(NodeTerm::as_var)
    }

    pub fn is_distributed(&self) -> bool {
        self.node.is_some()
    }

    pub fn data_vars(&self) -> impl Iterator<Item = &Var> {
        self.rel.data_vars()
    }
}

impl CompAtom {
    pub fn new(left: Term, op: CmpOp, right: Term) -> Self {
        CompAtom { left, op, right }
    }

    pub fn data_vars(&self) -> impl Iterator<Item = &Var> {
        [&self.left, &self.right].into_iter().filter_map(Term::as_var)
    }

    pub fn constants(&self) -> impl Iterator<Item = Value> {
        [self.left.as_const(), self.right.as_const()].into_iter().flatten()
    }

    pub fn holds(op: CmpOp, l: Value, r: Value) -> bool {
        match op {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
        }
    }
}

fn data_vars_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Var> {
    atoms.into_iter().flat_map(|a| a.data_vars().cloned()).collect()
}

fn node_vars_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Var> {
    atoms.into_iter().filter_map(|a| a.node_var().cloned()).collect()
}

impl Dtgd {
    pub fn new(body: Vec<Atom>, comparisons: Vec<CompAtom>, head: Vec<Atom>) -> Self {
        Dtgd { body, comparisons, head }
    }

    pub fn body_data_vars(&self) -> BTreeSet<Var> {
        data_vars_of(&self.body)
    }

    pub fn body_node_vars(&self) -> BTreeSet<Var> {
        node_vars_of(&self.body)
    }

    pub fn head_data_vars(&self) -> BTreeSet<Var> {
        data_vars_of(&self.head)
    }

    pub fn head_node_vars(&self) -> BTreeSet<Var> {
        node_vars_of(&self.head)
    }

    /// Head data variables missing from the relational body.
    pub fn existential_data_vars(&self) -> BTreeSet<Var> {
        let body = self.body_data_vars();
        self.head_data_vars().into_iter().filter(|v| !body.contains(v)).collect()
    }

    pub fn existential_node_vars(&self) -> BTreeSet<Var> {
        let body = self.body_node_vars();
        self.head_node_vars().into_iter().filter(|v| !body.contains(v)).collect()
    }

    pub fn is_data_full(&self) -> bool {
        self.existential_data_vars().is_empty()
    }
}

impl Degd {
    pub fn new(body: Vec<Atom>, comparisons: Vec<CompAtom>, head: Equality) -> Self {
        Degd { body, comparisons, head }
    }

    pub fn body_data_vars(&self) -> BTreeSet<Var> {
        data_vars_of(&self.body)
    }

    pub fn body_node_vars(&self) -> BTreeSet<Var> {
        node_vars_of(&self.body)
    }

    pub fn is_node_identifying(&self) -> bool {
        matches!(self.head, Equality::Node(..))
    }
}

impl Constraint {
    pub fn body(&self) -> &[Atom] {
        match self {
            Constraint::Tgd(t) => &t.body,
            Constraint::Egd(e) => &e.body,
        }
    }

    pub fn comparisons(&self) -> &[CompAtom] {
        match self {
            Constraint::Tgd(t) => &t.comparisons,
            Constraint::Egd(e) => &e.comparisons,
        }
    }

    /// All relational atoms, body first.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        let head: &[Atom] = match self {
            Constraint::Tgd(t) => &t.head,
            Constraint::Egd(_) => &[],
        };
        self.body().iter().chain(head)
    }

    pub fn constants(&self) -> BTreeSet<Value> {
        self.atoms()
            .flat_map(|a| a.rel.constants())
            .chain(self.comparisons().iter().flat_map(CompAtom::constants))
            .collect()
    }

    pub fn body_data_vars(&self) -> BTreeSet<Var> {
        data_vars_of(self.body())
    }

    pub fn has_comparisons(&self) -> bool {
        !self.comparisons().is_empty()
    }

    pub fn as_tgd(&self) -> Option<&Dtgd> {
        match self {
            Constraint::Tgd(t) => Some(t),
            Constraint::Egd(_) => None,
        }
    }

    pub fn as_egd(&self) -> Option<&Degd> {
        match self {
            Constraint::Egd(e) => Some(e),
            Constraint::Tgd(_) => None,
        }
    }

    /// Checks the sort discipline and safety conditions that every
    /// constraint must meet, independent of any schema.
    pub fn validate(&self) -> Result<(), ModelError> {
        let data: BTreeSet<Var> = self.atoms().flat_map(|a| a.data_vars().cloned()).collect();
        let nodes: BTreeSet<Var> = self.atoms().filter_map(|a| a.node_var().cloned()).collect();
        if let Some(v) = data.intersection(&nodes).next() {
            return Err(ModelError::SortClash(v.clone()));
        }
        if self.atoms().any(|a| matches!(a.node, Some(NodeTerm::Id(_)))) {
            return Err(ModelError::NodeIdInConstraint);
        }
        let body = self.body_data_vars();
        for c in self.comparisons() {
            for v in c.data_vars() {
                if !body.contains(v) {
                    return Err(ModelError::Unsafe(v.clone()));
                }
            }
        }
        if let Constraint::Egd(e) = self {
            let body_nodes = e.body_node_vars();
            match &e.head {
                Equality::Data(a, b) => {
                    for v in [a, b] {
                        if body_nodes.contains(v) {
                            return Err(ModelError::MixedEquality(v.clone()));
                        }
                        if !body.contains(v) {
                            return Err(ModelError::Unsafe(v.clone()));
                        }
                    }
                }
                Equality::Node(a, b) => {
                    for v in [a, b] {
                        if body.contains(v) {
                            return Err(ModelError::MixedEquality(v.clone()));
                        }
                        if !body_nodes.contains(v) {
                            return Err(ModelError::Unsafe(v.clone()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl From<Dtgd> for Constraint {
    fn from(t: Dtgd) -> Self {
        Constraint::Tgd(t)
    }
}

impl From<Degd> for Constraint {
    fn from(e: Degd) -> Self {
        Constraint::Egd(e)
    }
}

/// Records the arity of every symbol in `atoms`, rejecting conflicts.
pub fn extend_schema<'a>(schema: &mut Schema, atoms: impl IntoIterator<Item = &'a RelAtom>) -> Result<(), ModelError> {
    for a in atoms {
        match schema.get(&a.relation) {
            Some(&n) if n != a.arity() => {
                return Err(ModelError::ArityMismatch { relation: a.relation.clone(), expected: n, found: a.arity() })
            }
            Some(_) => {}
            None => {
                schema.insert(a.relation.clone(), a.arity());
            }
        }
    }
    Ok(())
}

impl ConstraintSet {
    /// Builds a set whose schema is collected from the constraints.
    pub fn new(constraints: Vec<Constraint>) -> Result<Self, ModelError> {
        Self::with_schema(Schema::new(), constraints)
    }

    /// Builds a set over a declared schema, which is extended by any
    /// further symbols the constraints mention.
    pub fn with_schema(mut schema: Schema, constraints: Vec<Constraint>) -> Result<Self, ModelError> {
        for c in &constraints {
            c.validate()?;
            extend_schema(&mut schema, c.atoms().map(|a| &a.rel))?;
        }
        Ok(ConstraintSet { schema, constraints })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Constraint> {
        self.constraints.iter()
    }

    pub fn constants(&self) -> BTreeSet<Value> {
        self.constraints.iter().flat_map(Constraint::constants).collect()
    }

    pub fn has_comparisons(&self) -> bool {
        self.constraints.iter().any(Constraint::has_comparisons)
    }

    /// Largest arity in the schema (0 for an empty schema).
    pub fn max_arity(&self) -> usize {
        self.schema.values().copied().max().unwrap_or(0)
    }

    /// Rejects constants outside `domain`.
    pub fn check_domain(&self, domain: Domain) -> Result<(), ModelError> {
        match self.constants().into_iter().find(|c| !domain.contains(*c)) {
            Some(c) => Err(ModelError::DomainMismatch { value: c, domain }),
            None => Ok(()),
        }
    }

    /// Returns a copy without the constraint at `index`.
    pub fn without(&self, index: usize) -> ConstraintSet {
        let mut constraints = self.constraints.clone();
        constraints.remove(index);
        ConstraintSet { schema: self.schema.clone(), constraints }
    }

    /// Returns a copy with `c` appended.
    pub fn with(&self, c: Constraint) -> Result<ConstraintSet, ModelError> {
        let mut constraints = self.constraints.clone();
        constraints.push(c);
        ConstraintSet::with_schema(self.schema.clone(), constraints)
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = &'a Constraint;
    type IntoIter = std::slice::Iter<'a, Constraint>;

    fn into_iter(self) -> Self::IntoIter {
        self.constraints.iter()
    }
}

impl Query {
    pub fn new(head: RelAtom, body: Vec<RelAtom>) -> Result<Self, ModelError> {
        let body_vars: BTreeSet<&Var> = body.iter().flat_map(RelAtom::data_vars).collect();
        if let Some(v) = head.data_vars().find(|v| !body_vars.contains(v)) {
            return Err(ModelError::Unsafe(v.clone()));
        }
        if body.iter().any(|a| a.relation == head.relation) {
            return Err(ModelError::HeadInSchema(head.relation.clone()));
        }
        let mut schema = Schema::new();
        extend_schema(&mut schema, &body)?;
        Ok(Query { head, body })
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.body.iter().flat_map(|a| a.data_vars().cloned()).collect()
    }

    pub fn head_vars(&self) -> BTreeSet<Var> {
        self.head.data_vars().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emp_sal_full() -> Dtgd {
        Dtgd::new(
            vec![RelAtom::vars("Emp", &["x", "y"]).global(), RelAtom::vars("Sal", &["y", "z"]).global()],
            vec![],
            vec![RelAtom::vars("Emp", &["x", "y"]).at("k"), RelAtom::vars("Sal", &["y", "z"]).at("k")],
        )
    }

    #[test]
    fn data_fullness() {
        assert!(emp_sal_full().is_data_full());
        let mut t = emp_sal_full();
        t.head = vec![RelAtom::vars("Emp", &["x", "y2"]).at("k"), RelAtom::vars("Sal", &["y2", "z"]).at("k")];
        assert!(!t.is_data_full());
        assert_eq!(t.existential_data_vars().into_iter().collect::<Vec<_>>(), vec![Var::new("y2")]);
        let nullary =
            Dtgd::new(vec![RelAtom::vars("R", &["x"]).global()], vec![], vec![RelAtom::vars("Acc", &[]).at("k")]);
        assert!(nullary.is_data_full());
    }

    #[test]
    fn validation_rejects_sort_clash_and_unsafe_comparisons() {
        let clash = Dtgd::new(vec![RelAtom::vars("R", &["k"]).at("k")], vec![], vec![]);
        assert!(matches!(Constraint::from(clash).validate(), Err(ModelError::SortClash(_))));
        let unsafe_cmp = Dtgd::new(
            vec![RelAtom::vars("R", &["x"]).global()],
            vec![CompAtom::new(Term::var("x"), CmpOp::Lt, Term::var("y"))],
            vec![],
        );
        assert!(matches!(Constraint::from(unsafe_cmp).validate(), Err(ModelError::Unsafe(_))));
        let mixed =
            Degd::new(vec![RelAtom::vars("R", &["x"]).at("k")], vec![], Equality::Data(Var::new("x"), Var::new("k")));
        assert!(matches!(Constraint::from(mixed).validate(), Err(ModelError::MixedEquality(_))));
    }

    #[test]
    fn schema_is_collected_and_checked() {
        let ok = ConstraintSet::new(vec![emp_sal_full().into()]).unwrap();
        assert_eq!(ok.schema().get(&Sym::new("Emp")), Some(&2));
        let bad =
            Dtgd::new(vec![RelAtom::vars("R", &["x"]).global()], vec![], vec![RelAtom::vars("R", &["x", "x"]).at("k")]);
        assert!(matches!(ConstraintSet::new(vec![bad.into()]), Err(ModelError::ArityMismatch { .. })));
    }

    #[test]
    fn queries_must_be_safe() {
        assert!(Query::new(RelAtom::vars("H", &["x"]), vec![RelAtom::vars("R", &["x", "x"])]).is_ok());
        assert!(matches!(
            Query::new(RelAtom::vars("H", &["y"]), vec![RelAtom::vars("R", &["x", "x"])]),
            Err(ModelError::Unsafe(_))
        ));
    }
}
