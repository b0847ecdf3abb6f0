use std::collections::{BTreeMap, BTreeSet};

use super::syntax::{Atom, CmpOp, Constraint, ConstraintSet, Dtgd, Equality, NodeTerm, Term, Var};
use super::ModelError;

/// Whether every head data variable occurs in the relational body.
pub fn is_data_full(sigma: &Dtgd) -> bool {
    sigma.is_data_full()
}

/// Splits the head of a data-full dtgd: one dtgd per bare head atom and one
/// per head node variable carrying all of its atoms. Groups appear in order
/// of first occurrence; bodies are copied unchanged.
pub fn normalize_heads(sigma: &Dtgd) -> Result<Vec<Dtgd>, ModelError> {
    if let Some(v) = sigma.existential_data_vars().into_iter().next() {
        return Err(ModelError::NotDataFull(v));
    }
    let mut groups: Vec<(Option<NodeTerm>, Vec<Atom>)> = Vec::new();
    for a in &sigma.head {
        match &a.node {
            None => groups.push((None, vec![a.clone()])),
            Some(n) => match groups.iter_mut().find(|(k, _)| k.as_ref() == Some(n)) {
                Some((_, atoms)) => atoms.push(a.clone()),
                None => groups.push((Some(n.clone()), vec![a.clone()])),
            },
        }
    }
    Ok(groups.into_iter().map(|(_, head)| Dtgd::new(sigma.body.clone(), sigma.comparisons.clone(), head)).collect())
}

/// One head-normalized piece of a constraint, linked to its origin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NormalizedPart {
    /// Index of the originating constraint in declaration order.
    pub constraint: usize,
    /// Index among the parts of that constraint.
    pub part: usize,
    pub rule: Constraint,
}

/// Head-normalizes every dtgd of `sigma`; degds pass through as one part.
pub fn normalize_set(sigma: &ConstraintSet) -> Result<Vec<NormalizedPart>, ModelError> {
    let mut out = Vec::new();
    for (i, c) in sigma.iter().enumerate() {
        match c {
            Constraint::Tgd(t) => {
                out.extend(normalize_heads(t)?.into_iter().enumerate().map(|(j, p)| NormalizedPart {
                    constraint: i,
                    part: j,
                    rule: p.into(),
                }))
            }
            Constraint::Egd(_) => out.push(NormalizedPart { constraint: i, part: 0, rule: c.clone() }),
        }
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Part {
    Body,
    Head,
    Cmp(CmpOp),
    Eq,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Slot {
    Data(Var),
    Node(Var),
    Const(String),
    Global,
}

type Item = ((Part, String, usize), Vec<Slot>);

fn items(c: &Constraint) -> BTreeSet<Item> {
    let term = |t: &Term| match t {
        Term::Var(v) => Slot::Data(v.clone()),
        Term::Const(x) => Slot::Const(x.to_string()),
    };
    let atom = |part: Part, a: &Atom| -> Item {
        let mut slots: Vec<Slot> = a.rel.terms.iter().map(term).collect();
        slots.push(match &a.node {
            None => Slot::Global,
            Some(NodeTerm::Var(v)) => Slot::Node(v.clone()),
            Some(NodeTerm::Id(n)) => Slot::Const(format!("@{n}")),
        });
        ((part, a.rel.relation.to_string(), slots.len()), slots)
    };
    let mut out: BTreeSet<Item> = c.body().iter().map(|a| atom(Part::Body, a)).collect();
    for cmp in c.comparisons() {
        out.insert(((Part::Cmp(cmp.op), String::new(), 2), vec![term(&cmp.left), term(&cmp.right)]));
    }
    match c {
        Constraint::Tgd(t) => out.extend(t.head.iter().map(|a| atom(Part::Head, a))),
        Constraint::Egd(e) => {
            let (a, b, node) = match &e.head {
                Equality::Data(a, b) => (a, b, false),
                Equality::Node(a, b) => (a, b, true),
            };
            let mk = |v: &Var| if node { Slot::Node(v.clone()) } else { Slot::Data(v.clone()) };
            out.insert(((Part::Eq, String::new(), 2), vec![mk(a), mk(b)]));
        }
    }
    out
}

/// Whether the constraints are equal up to a bijective renaming of
/// variables that preserves sorts. Atom lists are compared as sets and an
/// equality head as an unordered pair.
pub fn alpha_equivalent(a: &Constraint, b: &Constraint) -> bool {
    if matches!(a, Constraint::Tgd(_)) != matches!(b, Constraint::Tgd(_)) {
        return false;
    }
    let xs: Vec<Item> = items(a).into_iter().collect();
    let ys: Vec<Item> = items(b).into_iter().collect();
    if xs.len() != ys.len() {
        return false;
    }
    let mut used = vec![false; ys.len()];
    let mut fwd = BTreeMap::new();
    let mut bwd = BTreeMap::new();
    match_items(&xs, 0, &ys, &mut used, &mut fwd, &mut bwd)
}

fn match_items(
    xs: &[Item],
    i: usize,
    ys: &[Item],
    used: &mut [bool],
    fwd: &mut BTreeMap<Slot, Slot>,
    bwd: &mut BTreeMap<Slot, Slot>,
) -> bool {
    let Some((key, slots)) = xs.get(i) else { return true };
    for j in 0..ys.len() {
        if used[j] || ys[j].0 != *key {
            continue;
        }
        let mut orders = vec![ys[j].1.clone()];
        if key.0 == Part::Eq {
            orders.push(ys[j].1.iter().rev().cloned().collect());
        }
        for target in orders {
            let (f0, b0) = (fwd.clone(), bwd.clone());
            if unify(slots, &target, fwd, bwd) {
                used[j] = true;
                if match_items(xs, i + 1, ys, used, fwd, bwd) {
                    return true;
                }
                used[j] = false;
            }
            *fwd = f0;
            *bwd = b0;
        }
    }
    false
}

fn unify(xs: &[Slot], ys: &[Slot], fwd: &mut BTreeMap<Slot, Slot>, bwd: &mut BTreeMap<Slot, Slot>) -> bool {
    xs.iter().zip(ys).all(|(x, y)| match (x, y) {
        (Slot::Data(_), Slot::Data(_)) | (Slot::Node(_), Slot::Node(_)) => match (fwd.get(x), bwd.get(y)) {
            (Some(fx), Some(by)) => fx == y && by == x,
            (None, None) => {
                fwd.insert(x.clone(), y.clone());
                bwd.insert(y.clone(), x.clone());
                true
            }
            _ => false,
        },
        (Slot::Const(p), Slot::Const(q)) => p == q,
        (Slot::Global, Slot::Global) => true,
        _ => false,
    })
}

/// Whether two constraint lists agree position by position up to renaming.
pub fn alpha_equivalent_all(a: &[Constraint], b: &[Constraint]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| alpha_equivalent(x, y))
}
