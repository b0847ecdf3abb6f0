//! Constraint sets for common partitioning schemes.
//!
//! Positions are 1-based. Generated rules name data variables `x1..xn`
//! (`y1..yn` for a second atom) and node variables `k`, `k2`, so output is
//! stable across runs.

use std::collections::BTreeSet;

use crate::model::{
    Atom, CmpOp, CompAtom, Constraint, ConstraintSet, Dtgd, ModelError, Query, RelAtom, Schema, Sym, Term, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("position {position} is out of range for {relation}/{arity}")]
    InvalidPosition { relation: Sym, position: usize, arity: usize },
    #[error("only 2-dimensional hypercubes are supported, got {0}")]
    UnsupportedDimension(usize),
    #[error("dimension {0} is not used by any atom")]
    UnusedDimension(usize),
    #[error("the mapping covers {found} atoms but the query has {expected}")]
    AtomCountMismatch { expected: usize, found: usize },
    #[error("relation {0} is reserved by the generator")]
    ReservedRelation(Sym),
    #[error("co-partitioning chain is empty")]
    EmptyChain,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn vars(prefix: &str, n: usize) -> Vec<Term> {
    (1..=n).map(|i| Term::var(&format!("{prefix}{i}"))).collect()
}

fn atom(rel: &Sym, terms: Vec<Term>) -> RelAtom {
    RelAtom { relation: rel.clone(), terms }
}

fn check_position(rel: &Sym, arity: usize, position: usize) -> Result<usize, SchemeError> {
    if position == 0 || position > arity {
        return Err(SchemeError::InvalidPosition { relation: rel.clone(), position, arity });
    }
    Ok(position - 1)
}

fn existence(rel: &Sym, arity: usize) -> Constraint {
    let a = atom(rel, vars("x", arity));
    Dtgd::new(vec![a.clone().global()], vec![], vec![a.at("k")]).into()
}

/// `R(x̄) → R(x̄)@k` for every relation of `schema`.
pub fn gen_non_skipping(schema: &Schema) -> ConstraintSet {
    let rules = schema.iter().map(|(rel, &n)| existence(rel, n)).collect();
    ConstraintSet::with_schema(schema.clone(), rules).expect("rules follow the schema")
}

fn colocation(rel: &Sym, arity: usize, keys: &[usize]) -> Result<Constraint, SchemeError> {
    let keys: BTreeSet<usize> = keys.iter().map(|&p| check_position(rel, arity, p)).collect::<Result<_, _>>()?;
    let placed = vars("x", arity);
    let other: Vec<Term> = (0..arity)
        .map(|i| if keys.contains(&i) { placed[i].clone() } else { Term::var(&format!("y{}", i + 1)) })
        .collect();
    let head = atom(rel, other.clone()).at("k");
    Ok(Dtgd::new(vec![atom(rel, placed).at("k"), atom(rel, other).global()], vec![], vec![head]).into())
}

/// Hash partitioning of `rel` on `keys`: every fact is placed somewhere, and
/// facts agreeing on the key positions are placed together.
pub fn gen_hash_partition(rel: &str, arity: usize, keys: &[usize]) -> Result<ConstraintSet, SchemeError> {
    let rel = Sym::new(rel);
    Ok(ConstraintSet::new(vec![existence(&rel, arity), colocation(&rel, arity, keys)?])?)
}

/// Derived range partitioning: `rel` facts go to every node holding a
/// `range(lo, hi)` fact with `lo <= key <= hi`.
pub fn gen_range_partition(rel: &str, arity: usize, key: usize, range: &str) -> Result<ConstraintSet, SchemeError> {
    let (rel, range) = (Sym::new(rel), Sym::new(range));
    let p = check_position(&rel, arity, key)?;
    let xs = vars("x", arity);
    let bounds = vars("y", 2);
    let collect = Dtgd::new(
        vec![atom(&rel, xs.clone()).at("k"), atom(&range, bounds.clone()).at("k2")],
        vec![
            CompAtom::new(bounds[0].clone(), CmpOp::Le, xs[p].clone()),
            CompAtom::new(xs[p].clone(), CmpOp::Le, bounds[1].clone()),
        ],
        vec![atom(&rel, xs).at("k2")],
    );
    Ok(ConstraintSet::new(vec![existence(&range, 2), existence(&rel, arity), collect.into()])?)
}

/// One relation in a co-partitioning chain. `join` pairs a position of the
/// predecessor with a position of this relation; it is empty for the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainLink {
    pub relation: Sym,
    pub arity: usize,
    pub join: Vec<(usize, usize)>,
}

/// A root relation hashed on `root_keys`, each later relation co-located
/// with the facts of its predecessor it joins with.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoPartitionSpec {
    pub chain: Vec<ChainLink>,
    pub root_keys: Vec<usize>,
}

pub fn gen_copartition(spec: &CoPartitionSpec) -> Result<ConstraintSet, SchemeError> {
    let root = spec.chain.first().ok_or(SchemeError::EmptyChain)?;
    let mut rules: Vec<Constraint> = spec.chain.iter().map(|l| existence(&l.relation, l.arity)).collect();
    rules.push(colocation(&root.relation, root.arity, &spec.root_keys)?);
    for pair in spec.chain.windows(2) {
        let (parent, child) = (&pair[0], &pair[1]);
        let xs = vars("x", parent.arity);
        let mut ys = vars("y", child.arity);
        for &(p, c) in &child.join {
            let p = check_position(&parent.relation, parent.arity, p)?;
            let c = check_position(&child.relation, child.arity, c)?;
            ys[c] = xs[p].clone();
        }
        let head = atom(&child.relation, ys.clone()).at("k");
        let body = vec![atom(&parent.relation, xs).at("k"), atom(&child.relation, ys).global()];
        rules.push(Dtgd::new(body, vec![], vec![head]).into());
    }
    Ok(ConstraintSet::new(rules)?)
}

/// A hypercube distribution for `query`: `mapping[i]` lists the
/// `(dimension, position)` pairs hashing atom `i`; dimensions are 1-based.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HypercubeSpec {
    pub query: Query,
    pub dimensions: usize,
    pub mapping: Vec<Vec<(usize, usize)>>,
}

pub const DOM: &str = "Dom";
pub const GRID: &str = "H";

/// Abstract 2-dimensional hypercube: `Dom` collects all values, every pair
/// of values has a grid node `H(a,b)@k`, and each atom is sent to every
/// grid node matching its hashed positions.
pub fn gen_hypercube(spec: &HypercubeSpec) -> Result<ConstraintSet, SchemeError> {
    if spec.dimensions != 2 {
        return Err(SchemeError::UnsupportedDimension(spec.dimensions));
    }
    let body = &spec.query.body;
    if spec.mapping.len() != body.len() {
        return Err(SchemeError::AtomCountMismatch { expected: body.len(), found: spec.mapping.len() });
    }
    let (dom, grid) = (Sym::new(DOM), Sym::new(GRID));
    if let Some(a) = body.iter().find(|a| a.relation == dom || a.relation == grid) {
        return Err(SchemeError::ReservedRelation(a.relation.clone()));
    }
    for d in 1..=spec.dimensions {
        if !spec.mapping.iter().flatten().any(|&(dim, _)| dim == d) {
            return Err(SchemeError::UnusedDimension(d));
        }
    }
    let mut rules = Vec::new();
    let mut seen = BTreeSet::new();
    for a in body {
        if !seen.insert(a.relation.clone()) {
            continue;
        }
        let xs = vars("x", a.arity());
        for x in &xs {
            rules.push(
                Dtgd::new(
                    vec![atom(&a.relation, xs.clone()).global()],
                    vec![],
                    vec![atom(&dom, vec![x.clone()]).global()],
                )
                .into(),
            );
        }
    }
    let pair = vars("x", 2);
    let dom_pair = pair.iter().map(|x| atom(&dom, vec![x.clone()]).global()).collect();
    rules.push(Dtgd::new(dom_pair, vec![], vec![atom(&grid, pair).at("k")]).into());
    for (a, map) in body.iter().zip(&spec.mapping) {
        let taken: BTreeSet<Var> = a.data_vars().cloned().collect();
        let mut coords: Vec<Option<Term>> = vec![None; spec.dimensions];
        for &(dim, pos) in map {
            if dim == 0 || dim > spec.dimensions {
                return Err(SchemeError::UnsupportedDimension(dim));
            }
            let p = check_position(&a.relation, a.arity(), pos)?;
            coords[dim - 1] = Some(a.terms[p].clone());
        }
        let mut rule_body = vec![a.clone().global()];
        let mut pad = 0;
        let coords = coords
            .into_iter()
            .map(|c| {
                c.unwrap_or_else(|| {
                    let z = loop {
                        pad += 1;
                        let z = Var::new(&format!("z{pad}"));
                        if !taken.contains(&z) {
                            break z;
                        }
                    };
                    rule_body.push(atom(&dom, vec![Term::Var(z.clone())]).global());
                    Term::Var(z)
                })
            })
            .collect();
        rule_body.push(atom(&grid, coords).at("k"));
        rules.push(Dtgd::new(rule_body, vec![], vec![a.clone().at("k")]).into());
    }
    Ok(ConstraintSet::new(rules)?)
}

/// The strong parallel-correctness dtgd of a list of atoms, as used for
/// hypercube checks: `A₁, …, Aₙ → A₁@k, …, Aₙ@k`.
pub fn meet_dtgd(atoms: &[RelAtom]) -> Dtgd {
    Dtgd::new(
        atoms.iter().cloned().map(RelAtom::global).collect(),
        vec![],
        atoms.iter().cloned().map(|a| a.at("k")).collect::<Vec<Atom>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::implication::decide_implication;
    use crate::model::{alpha_equivalent_all, Domain};
    use crate::parser::{parse_constraint, parse_constraints, parse_query, ParseOptions};

    fn same(set: &ConstraintSet, text: &str) -> bool {
        alpha_equivalent_all(set.constraints(), parse_constraints(text).unwrap().constraints())
    }

    fn holds(sigma: &ConstraintSet, tau: &str) -> bool {
        let tau = parse_constraint(tau, &ParseOptions::default()).unwrap();
        decide_implication(sigma, &tau, Domain::Rat).unwrap().holds()
    }

    #[test]
    fn non_skipping() {
        let schema: Schema = [(Sym::new("R"), 2)].into();
        assert!(same(&gen_non_skipping(&schema), "R(a,b) -> R(a,b)@n."));
        assert!(gen_non_skipping(&Schema::new()).is_empty());
    }

    #[test]
    fn hash_partition() {
        let set = gen_hash_partition("Emp", 2, &[2]).unwrap();
        assert!(same(&set, "Emp(n,d) -> Emp(n,d)@k.\nEmp(n,d)@k, Emp(n2,d) -> Emp(n2,d)@k."));
        assert!(holds(&set, "Emp(n,d), Emp(n2,d) -> Emp(n,d)@k, Emp(n2,d)@k."));
        assert!(!holds(&set, "Emp(n,d), Emp(n,d2) -> Emp(n,d)@k, Emp(n,d2)@k."));
        assert!(gen_hash_partition("Emp", 2, &[1, 2]).unwrap().len() == 2);
        assert!(matches!(gen_hash_partition("Emp", 2, &[3]), Err(SchemeError::InvalidPosition { position: 3, .. })));
    }

    #[test]
    fn range_partition() {
        let set = gen_range_partition("Message", 2, 1, "Range").unwrap();
        assert!(same(
            &set,
            "Range(l,u) -> Range(l,u)@k.\nMessage(s,r) -> Message(s,r)@k.\n\
             Message(s,r)@k, Range(l,u)@m, l <= s, s <= u -> Message(s,r)@m."
        ));
    }

    #[test]
    fn copartition_chain() {
        let link = |r: &str, join: Vec<(usize, usize)>| ChainLink { relation: Sym::new(r), arity: 2, join };
        let spec = CoPartitionSpec {
            chain: vec![link("Lineitem", vec![]), link("Orders", vec![(2, 1)]), link("Customer", vec![(2, 1)])],
            root_keys: vec![1],
        };
        let set = gen_copartition(&spec).unwrap();
        assert!(same(
            &set,
            "Lineitem(l,o) -> Lineitem(l,o)@k.\nOrders(o,c) -> Orders(o,c)@k.\nCustomer(c,n) -> Customer(c,n)@k.\n\
             Lineitem(l,o), Lineitem(l,o2)@k -> Lineitem(l,o)@k.\n\
             Lineitem(l,o)@k, Orders(o,c) -> Orders(o,c)@k.\nOrders(o,c)@k, Customer(c,n) -> Customer(c,n)@k."
        ));
        let root = CoPartitionSpec { chain: vec![link("Emp", vec![])], root_keys: vec![2] };
        assert_eq!(gen_copartition(&root).unwrap(), gen_hash_partition("Emp", 2, &[2]).unwrap());
        assert_eq!(
            gen_copartition(&CoPartitionSpec { chain: vec![], root_keys: vec![] }),
            Err(SchemeError::EmptyChain)
        );
    }

    fn triangle() -> HypercubeSpec {
        HypercubeSpec {
            query: parse_query("H(u,x,y,w) <- R(u,x), S(x,y), T(y,w).").unwrap(),
            dimensions: 2,
            mapping: vec![vec![(1, 2)], vec![(1, 1), (2, 2)], vec![(2, 1)]],
        }
    }

    #[test]
    fn hypercube_rules() {
        let set = gen_hypercube(&triangle()).unwrap();
        assert!(same(
            &set,
            "R(a,b) -> Dom(a).\nR(a,b) -> Dom(b).\nS(a,b) -> Dom(a).\nS(a,b) -> Dom(b).\n\
             T(a,b) -> Dom(a).\nT(a,b) -> Dom(b).\nDom(x), Dom(y) -> H(x,y)@k.\n\
             R(u,x), Dom(z), H(x,z)@k -> R(u,x)@k.\nS(x,y), H(x,y)@k -> S(x,y)@k.\n\
             T(y,w), Dom(z), H(z,y)@k -> T(y,w)@k."
        ));
        assert!(holds(&set, "R(u,x), S(x,y), T(y,w) -> R(u,x)@k, S(x,y)@k, T(y,w)@k."));
        assert!(holds(&set, "R(u1,x), R(u2,x) -> R(u1,x)@k, R(u2,x)@k."));
        let mut bad = triangle();
        bad.dimensions = 3;
        assert_eq!(gen_hypercube(&bad), Err(SchemeError::UnsupportedDimension(3)));
        let mut unused = triangle();
        unused.mapping = vec![vec![(1, 2)], vec![(1, 1)], vec![]];
        assert_eq!(gen_hypercube(&unused), Err(SchemeError::UnusedDimension(2)));
    }

    #[test]
    fn generated_sets_reparse() {
        use crate::parser::render_constraints;
        let sets = [
            gen_hash_partition("Emp", 2, &[2]).unwrap(),
            gen_range_partition("Message", 2, 1, "Range").unwrap(),
            gen_hypercube(&triangle()).unwrap(),
        ];
        for set in sets {
            assert_eq!(parse_constraints(&render_constraints(&set)).unwrap(), set);
        }
    }
}
