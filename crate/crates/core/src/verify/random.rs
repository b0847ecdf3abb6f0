//! Seeded generators of constraints, instances and queries.
//!
//! Data variables are named `x1..`, node variables `k1..`, so the two sorts
//! never clash. Every generated constraint passes `Constraint::validate`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{
    Atom, CmpOp, CompAtom, Constraint, ConstraintSet, Degd, DistributedInstance, Dtgd, Equality, Fact, NodeId,
    NodeTerm, Query, RelAtom, Schema, Sym, Term, Value, Var,
};

/// Knobs for [`random_constraint_set`].
#[derive(Clone, Debug)]
pub struct Shape {
    pub relations: Vec<(Sym, usize)>,
    pub max_constraints: usize,
    pub max_body: usize,
    pub max_head: usize,
    pub data_vars: usize,
    pub node_vars: usize,
    /// Chance that a body atom is placed at a node.
    pub placed: f64,
    pub comparisons: bool,
    pub constants: Vec<Value>,
    pub egds: bool,
    /// Without it, heads may introduce fresh data variables.
    pub data_full: bool,
}

impl Shape {
    /// Binary relations `R`, `S`, up to three constraints, no comparisons.
    pub fn small() -> Self {
        Shape {
            relations: vec![(Sym::new("R"), 2), (Sym::new("S"), 2)],
            max_constraints: 3,
            max_body: 2,
            max_head: 2,
            data_vars: 3,
            node_vars: 2,
            placed: 0.5,
            comparisons: false,
            constants: Vec::new(),
            egds: true,
            data_full: true,
        }
    }

    pub fn schema(&self) -> Schema {
        self.relations.iter().cloned().collect()
    }
}

fn data_var(i: usize) -> Var {
    Var::new(&format!("x{i}"))
}

fn node_var(i: usize) -> Var {
    Var::new(&format!("k{i}"))
}

fn term<R: Rng>(rng: &mut R, shape: &Shape, vars: usize) -> Term {
    if !shape.constants.is_empty() && rng.gen_bool(0.1) {
        Term::Const(*shape.constants.choose(rng).expect("non-empty"))
    } else {
        Term::Var(data_var(rng.gen_range(1..=vars)))
    }
}

fn rel_atom<R: Rng>(rng: &mut R, shape: &Shape, vars: usize) -> RelAtom {
    let (rel, arity) = shape.relations.choose(rng).expect("at least one relation").clone();
    RelAtom { relation: rel, terms: (0..arity).map(|_| term(rng, shape, vars)).collect() }
}

fn body<R: Rng>(rng: &mut R, shape: &Shape) -> Vec<Atom> {
    let n = rng.gen_range(1..=shape.max_body);
    (0..n)
        .map(|_| {
            let rel = rel_atom(rng, shape, shape.data_vars);
            let node = (shape.node_vars > 0 && rng.gen_bool(shape.placed))
                .then(|| NodeTerm::Var(node_var(rng.gen_range(1..=shape.node_vars))));
            Atom { rel, node }
        })
        .collect()
}

fn pick<R: Rng, T: Clone>(rng: &mut R, items: &[T]) -> Option<T> {
    items.choose(rng).cloned()
}

fn comparisons<R: Rng>(rng: &mut R, shape: &Shape, vars: &[Var]) -> Vec<CompAtom> {
    if !shape.comparisons || vars.is_empty() {
        return Vec::new();
    }
    let side = |rng: &mut R| {
        if !shape.constants.is_empty() && rng.gen_bool(0.3) {
            Term::Const(*shape.constants.choose(rng).expect("non-empty"))
        } else {
            Term::Var(vars.choose(rng).expect("non-empty").clone())
        }
    };
    (0..rng.gen_range(0..=2))
        .map(|_| {
            let op = if rng.gen() { CmpOp::Lt } else { CmpOp::Le };
            CompAtom { left: side(rng), op, right: side(rng) }
        })
        .collect()
}

/// One valid constraint, or `None` when the drawn body admits no head.
fn attempt<R: Rng>(rng: &mut R, shape: &Shape) -> Option<Constraint> {
    let body = body(rng, shape);
    let data: Vec<Var> = {
        let mut v: Vec<Var> = body.iter().flat_map(|a| a.data_vars().cloned()).collect();
        v.sort();
        v.dedup();
        v
    };
    let nodes: Vec<Var> = {
        let mut v: Vec<Var> = body.iter().filter_map(|a| a.node_var().cloned()).collect();
        v.sort();
        v.dedup();
        v
    };
    let comps = comparisons(rng, shape, &data);
    if shape.egds && rng.gen_bool(0.25) {
        let head = if !nodes.is_empty() && (data.is_empty() || rng.gen()) {
            Equality::Node(pick(rng, &nodes)?, pick(rng, &nodes)?)
        } else {
            Equality::Data(pick(rng, &data)?, pick(rng, &data)?)
        };
        return Some(Degd::new(body, comps, head).into());
    }
    let fresh_node = node_var(shape.node_vars + 1);
    let head_node = match rng.gen_range(0..3) {
        0 => None,
        1 if !nodes.is_empty() => pick(rng, &nodes),
        _ => Some(fresh_node),
    };
    let head = (0..rng.gen_range(1..=shape.max_head))
        .map(|_| {
            let (rel, arity) = shape.relations.choose(rng).expect("at least one relation").clone();
            let terms = (0..arity)
                .map(|_| {
                    if !shape.data_full && rng.gen_bool(0.2) {
                        Term::Var(Var::new("y"))
                    } else if !shape.constants.is_empty() && rng.gen_bool(0.1) || data.is_empty() {
                        Term::Const(*shape.constants.choose(rng)?)
                    } else {
                        Term::Var(pick(rng, &data)?)
                    }
                    .into()
                })
                .collect::<Option<Vec<Term>>>()?;
            Some(Atom { rel: RelAtom { relation: rel, terms }, node: head_node.clone().map(NodeTerm::Var) })
        })
        .collect::<Option<Vec<Atom>>>()?;
    Some(Dtgd::new(body, comps, head).into())
}

pub fn random_constraint<R: Rng>(rng: &mut R, shape: &Shape) -> Constraint {
    loop {
        if let Some(c) = attempt(rng, shape).filter(|c| c.validate().is_ok()) {
            return c;
        }
    }
}

/// Between one and `max_constraints` constraints over the full schema of `shape`.
pub fn random_constraint_set<R: Rng>(rng: &mut R, shape: &Shape) -> ConstraintSet {
    let n = rng.gen_range(1..=shape.max_constraints);
    let cs = (0..n).map(|_| random_constraint(rng, shape)).collect();
    ConstraintSet::with_schema(shape.schema(), cs).expect("generated over the shape's schema")
}

/// Every global fact is drawn with probability `density`; each of up to
/// `max_nodes` nodes keeps each global fact with the same probability.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    schema: &Schema,
    values: &[Value],
    max_nodes: u32,
    density: f64,
) -> DistributedInstance {
    let mut d = DistributedInstance::new();
    for (rel, &arity) in schema {
        for tuple in tuples(values, arity) {
            if rng.gen_bool(density) {
                d.insert_global(Fact::from_values(rel.clone(), tuple));
            }
        }
    }
    let global: Vec<Fact> = d.global().iter().cloned().collect();
    for n in 0..rng.gen_range(0..=max_nodes) {
        d.add_node(NodeId(n));
        for f in &global {
            if rng.gen_bool(density) {
                d.insert_local(NodeId(n), f.clone());
            }
        }
    }
    d
}

/// All tuples of `arity` values, lexicographically.
pub fn tuples(values: &[Value], arity: usize) -> Vec<Vec<Value>> {
    (0..arity).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|t| {
                values.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push(*v);
                    t
                })
            })
            .collect()
    })
}

/// A safe, constant-free conjunctive query with head symbol `Q`.
pub fn random_query<R: Rng>(rng: &mut R, relations: &[(Sym, usize)], max_body: usize, vars: usize) -> Query {
    let shape = Shape { relations: relations.to_vec(), constants: Vec::new(), ..Shape::small() };
    let body: Vec<RelAtom> = (0..rng.gen_range(1..=max_body)).map(|_| rel_atom(rng, &shape, vars)).collect();
    let mut used: Vec<Var> = body.iter().flat_map(|a| a.terms.iter().filter_map(Term::as_var).cloned()).collect();
    used.sort();
    used.dedup();
    let head: Vec<Term> = (0..rng.gen_range(0..=used.len().min(2)))
        .map(|_| Term::Var(used.choose(rng).expect("non-empty").clone()))
        .collect();
    Query::new(RelAtom { relation: Sym::new("Q"), terms: head }, body).expect("head variables come from the body")
}
