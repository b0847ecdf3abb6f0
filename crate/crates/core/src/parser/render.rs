use std::fmt::Write;

use crate::model::{
    Atom, CmpOp, CompAtom, Constraint, ConstraintSet, DistributedInstance, Equality, Fact, NodeTerm, Query, RelAtom,
    Term,
};

/// Canonical text; parsing the output yields a structurally equal value.
pub trait Render {
    fn render(&self) -> String;
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.to_string(),
        Term::Const(c) => c.to_string(),
    }
}

fn rel_atom(a: &RelAtom) -> String {
    let args: Vec<String> = a.terms.iter().map(term).collect();
    format!("{}({})", a.relation, args.join(","))
}

fn atom(a: &Atom) -> String {
    match &a.node {
        None => rel_atom(&a.rel),
        Some(NodeTerm::Var(k)) => format!("{}@{k}", rel_atom(&a.rel)),
        Some(NodeTerm::Id(n)) => format!("{}@{n}", rel_atom(&a.rel)),
    }
}

fn comparison(c: &CompAtom) -> String {
    let op = match c.op {
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
    };
    format!("{} {op} {}", term(&c.left), term(&c.right))
}

/// One `.`-terminated line: relational body atoms, then comparisons.
pub fn render_constraint(c: &Constraint) -> String {
    let body: Vec<String> = c.body().iter().map(atom).chain(c.comparisons().iter().map(comparison)).collect();
    let head = match c {
        Constraint::Tgd(t) => t.head.iter().map(atom).collect::<Vec<_>>().join(", "),
        Constraint::Egd(e) => match &e.head {
            Equality::Data(a, b) | Equality::Node(a, b) => format!("{a} = {b}"),
        },
    };
    if body.is_empty() {
        format!("-> {head}.")
    } else {
        format!("{} -> {head}.", body.join(", "))
    }
}

pub fn render_constraints(set: &ConstraintSet) -> String {
    set.iter().map(|c| render_constraint(c) + "\n").collect()
}

pub fn render_facts<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> String {
    let parts: Vec<String> = facts.into_iter().map(Fact::to_string).collect();
    if parts.is_empty() {
        "{}".into()
    } else {
        format!("{{ {} }}", parts.join(" "))
    }
}

/// `global { .. }` followed by one `local N { .. }` line per node.
pub fn render_instance(d: &DistributedInstance) -> String {
    if d.is_empty() && d.node_count() == 0 {
        return "global {} local {}\n".into();
    }
    let mut out = format!("global {}\n", render_facts(d.global()));
    for (n, facts) in d.local() {
        let _ = writeln!(out, "local {} {}", n.0, render_facts(facts));
    }
    out
}

pub fn render_query(q: &Query) -> String {
    let body: Vec<String> = q.body.iter().map(rel_atom).collect();
    format!("{} <- {}.\n", rel_atom(&q.head), body.join(", "))
}

impl Render for Constraint {
    fn render(&self) -> String {
        render_constraint(self) + "\n"
    }
}

impl Render for ConstraintSet {
    fn render(&self) -> String {
        render_constraints(self)
    }
}

impl Render for DistributedInstance {
    fn render(&self) -> String {
        render_instance(self)
    }
}

impl Render for Query {
    fn render(&self) -> String {
        render_query(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_constraints, parse_instance, parse_query};

    const SIX: &str = "\
Emp(n,t), Sal(t,s) -> Emp(n,t)@k, Sal(t,s)@k.
Emp(n,t)@k, Sal(t,s)@m -> k = m.
Emp(n,t)@k, Emp(n,t2)@k -> t = t2.
Addr(n,a) -> Addr(n,a)@k.
Addr(n,a)@k, Emp(n,t) -> Emp(n,t)@k.
Emp(n,t)@k, Addr(n,a), 0 <= t, t < 7/2 -> Addr(n,a)@k.
";

    #[test]
    fn constraint_sets_round_trip() {
        let set = parse_constraints(SIX).unwrap();
        let text = render_constraints(&set);
        assert_eq!(text, SIX);
        assert_eq!(parse_constraints(&text).unwrap(), set);
    }

    #[test]
    fn comparisons_are_printed_after_atoms() {
        let set = parse_constraints("x < y, R(x,y) -> S(x).").unwrap();
        assert_eq!(render_constraints(&set), "R(x,y), x < y -> S(x).\n");
    }

    #[test]
    fn instances_round_trip() {
        assert_eq!(render_instance(&DistributedInstance::new()), "global {} local {}\n");
        let text = "global { R(1,2) S(-3/2) }\nlocal 0 {}\nlocal 4 { S(-3/2) }\n";
        let d = parse_instance(text).unwrap();
        assert_eq!(render_instance(&d), text);
        assert_eq!(parse_instance(&render_instance(&d)).unwrap(), d);
    }

    #[test]
    fn queries_round_trip() {
        let q = parse_query("H(n,s)<-Emp(n,t),Sal(t,s).").unwrap();
        assert_eq!(render_query(&q), "H(n,s) <- Emp(n,t), Sal(t,s).\n");
    }
}
