//! Valuation search over distributed instances.
//!
//! A body is compiled into a [`Pattern`] whose variables are numbered in
//! name order. Search repeatedly binds the unbound variable with the fewest
//! estimated candidates, lowest index first on ties. A node variable whose
//! atoms have all data positions bound gets the exact intersection of the
//! nodes holding those facts. The visiting order depends only on the
//! pattern and the instance, so enumeration is deterministic; [`Pattern::all`]
//! additionally sorts its output.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use smallvec::SmallVec;

use super::instance::DistributedInstance;
use super::syntax::{Atom, CmpOp, CompAtom, NodeId, NodeTerm, Sym, Term, Var};
use super::valuation::Valuation;
use super::value::Value;

/// The value bound to one pattern variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Slot {
    Data(Value),
    Node(NodeId),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sort {
    Data,
    Node,
}

pub type Binding = Vec<Option<Slot>>;

type Tuple = SmallVec<[Value; 4]>;

#[derive(Clone, Debug)]
enum CTerm {
    Var(usize),
    Const(Value),
}

#[derive(Clone, Debug)]
enum CNode {
    Global,
    Var(usize),
    Id(NodeId),
}

#[derive(Clone, Debug)]
struct CAtom {
    relation: Sym,
    terms: Vec<CTerm>,
    node: CNode,
    vars: Vec<usize>,
}

#[derive(Clone, Debug)]
struct CComp {
    left: CTerm,
    op: CmpOp,
    right: CTerm,
    vars: Vec<usize>,
}

/// A compiled conjunction of (distributed) atoms and comparisons.
#[derive(Clone, Debug)]
pub struct Pattern {
    vars: Vec<Var>,
    sorts: Vec<Sort>,
    atoms: Vec<CAtom>,
    comps: Vec<CComp>,
    atoms_by_var: Vec<Vec<usize>>,
    comps_by_var: Vec<Vec<usize>>,
}

#[derive(Default)]
struct RelFacts<'a> {
    global: Vec<&'a [Value]>,
    global_set: HashSet<&'a [Value]>,
    local: Vec<(NodeId, &'a [Value])>,
    local_set: HashSet<(NodeId, &'a [Value])>,
    by_node: HashMap<NodeId, Vec<&'a [Value]>>,
    /// Ascending nodes holding each tuple.
    nodes_of: HashMap<&'a [Value], Vec<NodeId>>,
}

/// Per-relation lookup structures over one instance.
pub struct FactIndex<'a> {
    rels: HashMap<&'a str, RelFacts<'a>>,
}

impl<'a> FactIndex<'a> {
    pub fn new(d: &'a DistributedInstance) -> Self {
        let mut rels: HashMap<&'a str, RelFacts<'a>> = HashMap::default();
        for f in d.global() {
            let r = rels.entry(f.relation.as_str()).or_default();
            r.global.push(&f.values);
            r.global_set.insert(&f.values);
        }
        for (node, facts) in d.local() {
            for f in facts {
                let r = rels.entry(f.relation.as_str()).or_default();
                r.local.push((*node, &f.values));
                r.local_set.insert((*node, &f.values));
                r.by_node.entry(*node).or_default().push(&f.values);
                r.nodes_of.entry(&f.values).or_default().push(*node);
            }
        }
        FactIndex { rels }
    }

    fn rel(&self, name: &Sym) -> Option<&RelFacts<'a>> {
        self.rels.get(name.as_str())
    }
}

impl Pattern {
    /// Compiles atoms and comparisons over exactly their own variables.
    pub fn new(atoms: &[Atom], comps: &[CompAtom]) -> Self {
        Self::with_vars(atoms, comps, std::iter::empty())
    }

    /// Compiles with additional variables in the table, typically ones that
    /// will be pre-bound from another pattern.
    pub fn with_vars(atoms: &[Atom], comps: &[CompAtom], extra: impl IntoIterator<Item = (Var, Sort)>) -> Self {
        let mut table: std::collections::BTreeMap<Var, Sort> = extra.into_iter().collect();
        for a in atoms {
            for v in a.data_vars() {
                table.entry(v.clone()).or_insert(Sort::Data);
            }
            if let Some(v) = a.node_var() {
                table.insert(v.clone(), Sort::Node);
            }
        }
        for c in comps {
            for v in c.data_vars() {
                table.entry(v.clone()).or_insert(Sort::Data);
            }
        }
        let (vars, sorts): (Vec<Var>, Vec<Sort>) = table.into_iter().unzip();
        let index_of = |v: &Var| vars.binary_search(v).expect("variable in table");
        let cterm = |t: &Term| match t {
            Term::Var(v) => CTerm::Var(index_of(v)),
            Term::Const(c) => CTerm::Const(*c),
        };
        let catoms: Vec<CAtom> = atoms
            .iter()
            .map(|a| {
                let terms: Vec<CTerm> = a.rel.terms.iter().map(cterm).collect();
                let node = match &a.node {
                    None => CNode::Global,
                    Some(NodeTerm::Var(v)) => CNode::Var(index_of(v)),
                    Some(NodeTerm::Id(n)) => CNode::Id(*n),
                };
                let mut vs: BTreeSet<usize> = terms
                    .iter()
                    .filter_map(|t| match t {
                        CTerm::Var(i) => Some(*i),
                        CTerm::Const(_) => None,
                    })
                    .collect();
                if let CNode::Var(i) = node {
                    vs.insert(i);
                }
                CAtom { relation: a.rel.relation.clone(), terms, node, vars: vs.into_iter().collect() }
            })
            .collect();
        let ccomps: Vec<CComp> = comps
            .iter()
            .map(|c| {
                let (left, right) = (cterm(&c.left), cterm(&c.right));
                let vars = [&left, &right]
                    .iter()
                    .filter_map(|t| match t {
                        CTerm::Var(i) => Some(*i),
                        CTerm::Const(_) => None,
                    })
                    .collect();
                CComp { left, op: c.op, right, vars }
            })
            .collect();
        let mut atoms_by_var = vec![Vec::new(); vars.len()];
        for (i, a) in catoms.iter().enumerate() {
            for &v in &a.vars {
                atoms_by_var[v].push(i);
            }
        }
        let mut comps_by_var = vec![Vec::new(); vars.len()];
        for (i, c) in ccomps.iter().enumerate() {
            for &v in &c.vars {
                comps_by_var[v].push(i);
            }
        }
        Pattern { vars, sorts, atoms: catoms, comps: ccomps, atoms_by_var, comps_by_var }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn var_index(&self, v: &Var) -> Option<usize> {
        self.vars.binary_search(v).ok()
    }

    pub fn empty_binding(&self) -> Binding {
        vec![None; self.vars.len()]
    }

    /// Copies bindings of shared variable names from another pattern.
    pub fn binding_from(&self, other: &Pattern, binding: &[Option<Slot>]) -> Binding {
        let mut out = self.empty_binding();
        for (i, v) in other.vars.iter().enumerate() {
            if let (Some(j), Some(s)) = (self.var_index(v), binding[i]) {
                out[j] = Some(s);
            }
        }
        out
    }

    pub fn binding_from_valuation(&self, val: &Valuation) -> Binding {
        self.vars
            .iter()
            .zip(&self.sorts)
            .map(|(v, s)| match s {
                Sort::Data => val.data.get(v).map(|x| Slot::Data(*x)),
                Sort::Node => val.nodes.get(v).map(|n| Slot::Node(*n)),
            })
            .collect()
    }

    pub fn to_valuation(&self, binding: &[Option<Slot>]) -> Valuation {
        let mut val = Valuation::new();
        for (v, s) in self.vars.iter().zip(binding) {
            match s {
                Some(Slot::Data(x)) => {
                    val.data.insert(v.clone(), *x);
                }
                Some(Slot::Node(n)) => {
                    val.nodes.insert(v.clone(), *n);
                }
                None => {}
            }
        }
        val
    }

    /// Calls `f` for every total extension of `prebound` that satisfies the
    /// pattern on `index`, each exactly once.
    pub fn for_each<F>(&self, index: &FactIndex<'_>, prebound: &[Option<Slot>], mut f: F) -> ControlFlow<()>
    where
        F: FnMut(&[Option<Slot>]) -> ControlFlow<()>,
    {
        let mut binding = prebound.to_vec();
        let bound = |i: usize| binding[i].is_some();
        for (i, a) in self.atoms.iter().enumerate() {
            if a.vars.iter().all(|&v| bound(v)) && !self.atom_holds(index, i, &binding) {
                return ControlFlow::Continue(());
            }
        }
        for c in &self.comps {
            if c.vars.iter().all(|&v| bound(v)) && !comp_holds(c, &binding) {
                return ControlFlow::Continue(());
            }
        }
        self.search(index, &mut binding, &mut f)
    }

    /// Whether some extension of `prebound` satisfies the pattern.
    pub fn exists(&self, index: &FactIndex<'_>, prebound: &[Option<Slot>]) -> bool {
        self.first(index, prebound).is_some()
    }

    pub fn first(&self, index: &FactIndex<'_>, prebound: &[Option<Slot>]) -> Option<Binding> {
        let mut found = None;
        let _ = self.for_each(index, prebound, |b| {
            found = Some(b.to_vec());
            ControlFlow::Break(())
        });
        found
    }

    /// All extensions in lexicographic order of the name-ordered variables.
    pub fn all(&self, index: &FactIndex<'_>, prebound: &[Option<Slot>]) -> Vec<Binding> {
        let mut out = Vec::new();
        let _ = self.for_each(index, prebound, |b| {
            out.push(b.to_vec());
            ControlFlow::Continue(())
        });
        out.sort();
        out
    }

    fn search<F>(&self, index: &FactIndex<'_>, binding: &mut Binding, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Option<Slot>]) -> ControlFlow<()>,
    {
        let Some(v) = self.pick(index, binding) else {
            return f(binding);
        };
        for cand in self.candidates(index, v, binding) {
            binding[v] = Some(cand);
            if self.consistent_after(index, v, binding) {
                self.search(index, binding, f)?;
            }
        }
        binding[v] = None;
        ControlFlow::Continue(())
    }

    /// The unbound variable to bind next, or `None` if all are bound.
    fn pick(&self, index: &FactIndex<'_>, binding: &Binding) -> Option<usize> {
        (0..self.vars.len()).filter(|&v| binding[v].is_none()).min_by_key(|&v| (self.estimate(index, v, binding), v))
    }

    /// Tuple of `atom` if every data position is bound.
    fn bound_tuple(atom: &CAtom, binding: &Binding) -> Option<Tuple> {
        atom.terms
            .iter()
            .map(|t| match t {
                CTerm::Const(c) => Some(*c),
                CTerm::Var(i) => match binding[*i] {
                    Some(Slot::Data(x)) => Some(x),
                    _ => None,
                },
            })
            .collect()
    }

    /// Atoms placed at node variable `v` whose data positions are all bound,
    /// with the nodes holding their fact.
    fn node_lists<'i>(&self, index: &'i FactIndex<'_>, v: usize, binding: &Binding) -> SmallVec<[&'i [NodeId]; 4]> {
        self.atoms_by_var[v]
            .iter()
            .map(|&a| &self.atoms[a])
            .filter(|atom| matches!(atom.node, CNode::Var(i) if i == v))
            .filter_map(|atom| {
                let tuple = Self::bound_tuple(atom, binding)?;
                let nodes = index.rel(&atom.relation).and_then(|r| r.nodes_of.get(tuple.as_slice()));
                Some(nodes.map_or(&[][..], Vec::as_slice))
            })
            .collect()
    }

    fn atom_size(&self, index: &FactIndex<'_>, atom: &CAtom, binding: &Binding) -> usize {
        match index.rel(&atom.relation) {
            None => 0,
            Some(rel) => match self.bound_node(atom, binding) {
                Some(None) => rel.global.len(),
                Some(Some(n)) => rel.by_node.get(&n).map_or(0, Vec::len),
                None => rel.local.len(),
            },
        }
    }

    fn estimate(&self, index: &FactIndex<'_>, v: usize, binding: &Binding) -> usize {
        if self.sorts[v] == Sort::Node {
            if let Some(n) = self.node_lists(index, v, binding).iter().map(|l| l.len()).min() {
                return n;
            }
        }
        self.atoms_by_var[v].iter().map(|&a| self.atom_size(index, &self.atoms[a], binding)).min().unwrap_or(usize::MAX)
    }

    /// Checks every atom and comparison mentioning `v` that can be decided.
    fn consistent_after(&self, index: &FactIndex<'_>, v: usize, binding: &Binding) -> bool {
        for &c in &self.comps_by_var[v] {
            let comp = &self.comps[c];
            if comp.vars.iter().all(|&w| binding[w].is_some()) && !comp_holds(comp, binding) {
                return false;
            }
        }
        self.atoms_by_var[v].iter().all(|&a| {
            if self.atoms[a].vars.iter().all(|&w| binding[w].is_some()) {
                self.atom_holds(index, a, binding)
            } else {
                self.atom_possible(index, a, binding)
            }
        })
    }

    fn bound_node(&self, atom: &CAtom, binding: &Binding) -> Option<Option<NodeId>> {
        match atom.node {
            CNode::Global => Some(None),
            CNode::Id(n) => Some(Some(n)),
            CNode::Var(i) => match binding[i] {
                Some(Slot::Node(n)) => Some(Some(n)),
                _ => None,
            },
        }
    }

    fn atom_holds(&self, index: &FactIndex<'_>, a: usize, binding: &Binding) -> bool {
        let atom = &self.atoms[a];
        let Some(rel) = index.rel(&atom.relation) else { return false };
        let Some(tuple) = Self::bound_tuple(atom, binding) else { return false };
        match self.bound_node(atom, binding) {
            Some(None) => rel.global_set.contains(tuple.as_slice()),
            Some(Some(n)) => rel.local_set.contains(&(n, tuple.as_slice())),
            None => false,
        }
    }

    /// Semi-join test: some fact matches the bound positions.
    fn atom_possible(&self, index: &FactIndex<'_>, a: usize, binding: &Binding) -> bool {
        let atom = &self.atoms[a];
        let Some(rel) = index.rel(&atom.relation) else { return false };
        match self.bound_node(atom, binding) {
            Some(None) => rel.global.iter().any(|t| tuple_matches(atom, t, binding)),
            Some(Some(n)) => rel.by_node.get(&n).is_some_and(|ts| ts.iter().any(|t| tuple_matches(atom, t, binding))),
            None => rel.local.iter().any(|(_, t)| tuple_matches(atom, t, binding)),
        }
    }

    /// Ascending and duplicate-free.
    fn candidates(&self, index: &FactIndex<'_>, v: usize, binding: &Binding) -> Vec<Slot> {
        if self.sorts[v] == Sort::Node {
            let mut lists = self.node_lists(index, v, binding);
            if !lists.is_empty() {
                lists.sort_by_key(|l| l.len());
                return lists[0]
                    .iter()
                    .filter(|n| lists[1..].iter().all(|l| l.binary_search(n).is_ok()))
                    .map(|&n| Slot::Node(n))
                    .collect();
            }
        }
        let mut best: Option<(usize, usize)> = None;
        for &a in &self.atoms_by_var[v] {
            let size = self.atom_size(index, &self.atoms[a], binding);
            if best.is_none_or(|(_, s)| size < s) {
                best = Some((a, size));
            }
        }
        let mut out = Vec::new();
        let Some((a, _)) = best else { return out };
        let atom = &self.atoms[a];
        let Some(rel) = index.rel(&atom.relation) else { return out };
        let mut take = |node: Option<NodeId>, t: &[Value]| {
            if !tuple_matches(atom, t, binding) {
                return;
            }
            if let CNode::Var(i) = atom.node {
                if i == v {
                    out.push(Slot::Node(node.expect("local fact has a node")));
                    return;
                }
            }
            let mut value = None;
            for (term, x) in atom.terms.iter().zip(t) {
                if let CTerm::Var(i) = term {
                    if *i == v {
                        match value {
                            None => value = Some(*x),
                            Some(y) if y != *x => return,
                            Some(_) => {}
                        }
                    }
                }
            }
            if let Some(x) = value {
                out.push(Slot::Data(x));
            }
        };
        match self.bound_node(atom, binding) {
            Some(None) => rel.global.iter().for_each(|t| take(None, t)),
            Some(Some(n)) => {
                if let Some(ts) = rel.by_node.get(&n) {
                    ts.iter().for_each(|t| take(Some(n), t));
                }
            }
            None => rel.local.iter().for_each(|(n, t)| take(Some(*n), t)),
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn tuple_matches(atom: &CAtom, tuple: &[Value], binding: &Binding) -> bool {
    atom.terms.len() == tuple.len()
        && atom.terms.iter().zip(tuple).all(|(t, x)| match t {
            CTerm::Const(c) => c == x,
            CTerm::Var(i) => match binding[*i] {
                Some(Slot::Data(y)) => y == *x,
                Some(Slot::Node(_)) => false,
                None => true,
            },
        })
}

fn term_value(t: &CTerm, binding: &Binding) -> Option<Value> {
    match t {
        CTerm::Const(c) => Some(*c),
        CTerm::Var(i) => match binding[*i] {
            Some(Slot::Data(x)) => Some(x),
            _ => None,
        },
    }
}

fn comp_holds(c: &CComp, binding: &Binding) -> bool {
    match (term_value(&c.left, binding), term_value(&c.right, binding)) {
        (Some(l), Some(r)) => CompAtom::holds(c.op, l, r),
        _ => false,
    }
}

/// All valuations of the variables of `atoms` and `comps` that satisfy them
/// on `d`: distributed atoms match local facts, bare atoms match global facts.
pub fn find_valuations(atoms: &[Atom], comps: &[CompAtom], d: &DistributedInstance) -> Vec<Valuation> {
    let pattern = Pattern::new(atoms, comps);
    let index = FactIndex::new(d);
    pattern.all(&index, &pattern.empty_binding()).iter().map(|b| pattern.to_valuation(b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Fact, RelAtom};

    /// Global {R(1,2), S(2), S(3), S(4)}; R(1,2)@1, S(2)@1, S(2)@2, S(3)@2.
    fn two_node_instance() -> DistributedInstance {
        let mut d = DistributedInstance::from_global([Fact::new("S", [4])]);
        d.insert_local(NodeId(1), Fact::new("R", [1, 2]));
        d.insert_local(NodeId(1), Fact::new("S", [2]));
        d.insert_local(NodeId(2), Fact::new("S", [2]));
        d.insert_local(NodeId(2), Fact::new("S", [3]));
        d
    }

    #[test]
    fn distributed_atoms_match_local_facts() {
        let d = two_node_instance();
        let vals = find_valuations(&[RelAtom::vars("R", &["x", "y"]).at("k")], &[], &d);
        assert_eq!(vals, vec![Valuation::new().with_data("x", 1).with_data("y", 2).with_node("k", 1)]);
        let vals = find_valuations(&[RelAtom::vars("S", &["x"]).at("k")], &[], &d);
        assert_eq!(
            vals,
            vec![
                Valuation::new().with_data("x", 2).with_node("k", 1),
                Valuation::new().with_data("x", 2).with_node("k", 2),
                Valuation::new().with_data("x", 3).with_node("k", 2),
            ]
        );
    }

    #[test]
    fn bare_atoms_match_global_facts() {
        let vals = find_valuations(&[RelAtom::vars("S", &["x"]).global()], &[], &two_node_instance());
        let xs: Vec<i64> = vals.iter().map(|v| v.data[&Var::new("x")].numer()).collect();
        assert_eq!(xs, vec![2, 3, 4]);
    }

    #[test]
    fn empty_body_has_one_empty_valuation() {
        assert_eq!(find_valuations(&[], &[], &two_node_instance()), vec![Valuation::new()]);
        assert_eq!(find_valuations(&[], &[], &DistributedInstance::new()), vec![Valuation::new()]);
    }

    #[test]
    fn joins_repeated_variables_and_comparisons() {
        let mut d = DistributedInstance::new();
        for (a, b) in [(1, 1), (1, 2), (2, 3), (3, 3)] {
            d.insert_global(Fact::new("E", [a, b]));
        }
        let path = [RelAtom::vars("E", &["x", "y"]).global(), RelAtom::vars("E", &["y", "z"]).global()];
        let lt = [CompAtom::new(Term::var("x"), CmpOp::Lt, Term::var("z"))];
        let got: Vec<String> = find_valuations(&path, &lt, &d).iter().map(|v| v.to_string()).collect();
        assert_eq!(got, vec!["{x->1, y->1, z->2}", "{x->1, y->2, z->3}", "{x->2, y->3, z->3}"]);
        let self_loop = [RelAtom::vars("E", &["x", "x"]).global()];
        assert_eq!(find_valuations(&self_loop, &[], &d).len(), 2);
        let unsat = [CompAtom::new(Term::var("x"), CmpOp::Lt, Term::var("x"))];
        assert!(find_valuations(&self_loop, &unsat, &d).is_empty());
    }

    #[test]
    fn prebound_variables_restrict_the_search() {
        let d = two_node_instance();
        let atoms = [RelAtom::vars("S", &["x"]).at("k")];
        let p = Pattern::new(&atoms, &[]);
        let mut pre = p.empty_binding();
        pre[p.var_index(&Var::new("k")).unwrap()] = Some(Slot::Node(NodeId(2)));
        let xs: Vec<Valuation> = p.all(&FactIndex::new(&d), &pre).iter().map(|b| p.to_valuation(b)).collect();
        assert_eq!(xs.len(), 2);
        pre[p.var_index(&Var::new("x")).unwrap()] = Some(Slot::Data(Value::int(4)));
        assert!(!p.exists(&FactIndex::new(&d), &pre));
    }

    #[test]
    fn nullary_atoms() {
        let mut d = DistributedInstance::new();
        d.insert_local(NodeId(0), Fact::new("Acc", []));
        d.add_node(NodeId(1));
        let vals = find_valuations(&[RelAtom::vars("Acc", &[]).at("k")], &[], &d);
        assert_eq!(vals, vec![Valuation::new().with_node("k", 0)]);
        assert_eq!(find_valuations(&[RelAtom::vars("Acc", &[]).global()], &[], &d).len(), 1);
    }
}
