//! Text formats for constraints (`.dc`), distributed instances (`.dinst`)
//! and conjunctive queries (`.cq`), with canonical rendering.
//!
//! ```text
//! # constraints
//! Msg(s,r)@n, Range(l,u)@m, l <= s, s <= u -> Msg(s,r)@m.
//! R(x)@k, R(x)@m -> k = m.
//!
//! # instance
//! global { R(1,2) S(4) }
//! local 1 { R(1,2) }
//!
//! # query
//! H(n,s) <- Emp(n,t), Sal(t,s).
//! ```

mod lexer;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub use lexer::SourceSpan;
use lexer::{tokenize, Tok, Token};
pub use render::{render_constraint, render_constraints, render_facts, render_instance, render_query, Render};

use crate::model::{
    Atom, CmpOp, CompAtom, Constraint, ConstraintSet, Degd, DistributedInstance, Domain, Dtgd, Equality, Fact, NodeId,
    NodeTerm, Query, RelAtom, Schema, Sym, Term, Value, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("variable `{0}` must occur in a relational body atom")]
    Safety(String),
    #[error("equality between node variable and data variable `{0}`")]
    MixedEquality(String),
    #[error("`{0}` is used both as a node variable and as a data variable")]
    SortClash(String),
    #[error("relation {relation} has arity {found} here but {expected} elsewhere")]
    ArityMismatch { relation: String, expected: usize, found: usize },
    #[error("local fact {0} is missing from the global facts")]
    SubsetViolation(String),
    #[error("constant {value} is outside domain {domain}")]
    DomainMismatch { value: Value, domain: Domain },
    #[error("invalid number: {0}")]
    Number(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

/// Options shared by all entry points.
#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// File name reported in spans.
    pub file: Option<String>,
    /// Reject constants outside this domain.
    pub domain: Option<Domain>,
    /// Reject local facts that are not listed globally instead of adding them.
    pub strict: bool,
}

impl ParseOptions {
    pub fn file(name: impl Into<String>) -> Self {
        ParseOptions { file: Some(name.into()), ..Default::default() }
    }
}

/// A parsed instance plus the local facts that had to be added globally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedInstance {
    pub instance: DistributedInstance,
    pub added_to_global: Vec<(NodeId, Fact)>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    domain: Option<Domain>,
}

type PResult<T> = Result<T, ParseError>;

fn err<T>(kind: ParseErrorKind, span: &SourceSpan) -> PResult<T> {
    Err(ParseError { kind, span: span.clone() })
}

/// Where each variable occurrence sits, for diagnostics.
type VarSpans = Vec<(Var, SourceSpan)>;

/// Atom together with spans needed for later diagnostics.
struct SpannedAtom {
    atom: Atom,
    span: SourceSpan,
    var_spans: VarSpans,
}

enum BodyItem {
    Atom(SpannedAtom),
    Cmp(CompAtom, VarSpans),
}

impl Parser {
    fn new(text: &str, opts: &ParseOptions) -> PResult<Self> {
        let file: Option<Arc<str>> = opts.file.as_deref().map(Arc::from);
        let toks = tokenize(text, file.as_ref())
            .map_err(|(msg, span)| ParseError { kind: ParseErrorKind::Syntax(msg), span })?;
        Ok(Parser { toks, pos: 0, domain: opts.domain })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<SourceSpan> {
        if *self.peek() == want {
            Ok(self.bump().span)
        } else {
            err(ParseErrorKind::Syntax(format!("expected {want}, found {}", self.peek())), &self.span())
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            other => err(ParseErrorKind::Syntax(format!("expected {what}, found {other}")), &self.span()),
        }
    }

    fn number(&mut self) -> PResult<Value> {
        let span = self.span();
        let Tok::Number(s) = self.peek().clone() else {
            return err(ParseErrorKind::Syntax(format!("expected a number, found {}", self.peek())), &span);
        };
        self.bump();
        let v: Value = s.parse().map_err(|e: crate::model::ValueError| ParseError {
            kind: ParseErrorKind::Number(e.to_string()),
            span: span.clone(),
        })?;
        if let Some(domain) = self.domain {
            if !domain.contains(v) {
                return err(ParseErrorKind::DomainMismatch { value: v, domain }, &span);
            }
        }
        Ok(v)
    }

    fn term(&mut self, var_spans: &mut VarSpans) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                let v = Var::new(&s);
                var_spans.push((v.clone(), span));
                Ok(Term::Var(v))
            }
            Tok::Number(_) => Ok(Term::Const(self.number()?)),
            other => err(ParseErrorKind::Syntax(format!("expected a term, found {other}")), &self.span()),
        }
    }

    fn rel_atom(&mut self) -> PResult<(RelAtom, SourceSpan, VarSpans)> {
        let (name, span) = self.ident("a relation name")?;
        self.expect(Tok::LParen)?;
        let mut terms = Vec::new();
        let mut var_spans = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                terms.push(self.term(&mut var_spans)?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok((RelAtom::new(&name, terms), span, var_spans))
    }

    fn atom(&mut self) -> PResult<SpannedAtom> {
        let (rel, span, var_spans) = self.rel_atom()?;
        let node = if *self.peek() == Tok::At {
            self.bump();
            let (n, _) = self.ident("a node variable after `@`")?;
            Some(NodeTerm::Var(Var::new(&n)))
        } else {
            None
        };
        Ok(SpannedAtom { atom: Atom { rel, node }, span, var_spans })
    }

    fn body_item(&mut self) -> PResult<BodyItem> {
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek2() == Tok::LParen {
            return Ok(BodyItem::Atom(self.atom()?));
        }
        let mut spans = Vec::new();
        let left = self.term(&mut spans)?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            other => {
                return err(
                    ParseErrorKind::Syntax(format!("expected `<` or `<=` in comparison, found {other}")),
                    &self.span(),
                )
            }
        };
        self.bump();
        let right = self.term(&mut spans)?;
        Ok(BodyItem::Cmp(CompAtom::new(left, op, right), spans))
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek(), Tok::Arrow | Tok::Dot | Tok::Eof)
    }

    fn constraint(&mut self, schema: &mut Schema) -> PResult<Constraint> {
        let start = self.span();
        let mut body = Vec::new();
        let mut comps = Vec::new();
        if !self.at_statement_end() {
            loop {
                match self.body_item()? {
                    BodyItem::Atom(a) => body.push(a),
                    BodyItem::Cmp(c, spans) => comps.push((c, spans)),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Arrow)?;
        let body_data: BTreeSet<Var> = body.iter().flat_map(|a| a.atom.data_vars().cloned()).collect();
        let body_nodes: BTreeSet<Var> = body.iter().filter_map(|a| a.atom.node_var().cloned()).collect();
        let constraint = if matches!(self.peek(), Tok::Ident(_)) && *self.peek2() == Tok::Eq {
            let (a, sa) = self.ident("a variable")?;
            self.bump();
            let (b, sb) = self.ident("a variable")?;
            let (a, b) = (Var::new(&a), Var::new(&b));
            let sort = |v: &Var, s: &SourceSpan| -> PResult<bool> {
                if body_nodes.contains(v) {
                    Ok(true)
                } else if body_data.contains(v) {
                    Ok(false)
                } else {
                    err(ParseErrorKind::Safety(v.to_string()), s)
                }
            };
            let (na, nb) = (sort(&a, &sa)?, sort(&b, &sb)?);
            if na != nb {
                let (v, s) = if na { (&b, &sb) } else { (&a, &sa) };
                return err(ParseErrorKind::MixedEquality(v.to_string()), s);
            }
            let head = if na { Equality::Node(a, b) } else { Equality::Data(a, b) };
            self.check_sorts(&body, &[])?;
            self.check_comparisons(&comps, &body_data)?;
            Constraint::Egd(Degd::new(
                body.iter().map(|a| a.atom.clone()).collect(),
                comps.into_iter().map(|(c, _)| c).collect(),
                head,
            ))
        } else {
            let mut head = Vec::new();
            loop {
                head.push(self.atom()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.check_sorts(&body, &head)?;
            self.check_comparisons(&comps, &body_data)?;
            for a in body.iter().chain(&head) {
                record_arity(schema, &a.atom.rel, &a.span)?;
            }
            Constraint::Tgd(Dtgd::new(
                body.iter().map(|a| a.atom.clone()).collect(),
                comps.into_iter().map(|(c, _)| c).collect(),
                head.into_iter().map(|a| a.atom).collect(),
            ))
        };
        if let Constraint::Egd(e) = &constraint {
            for (a, sa) in e.body.iter().zip(body.iter().map(|a| &a.span)) {
                record_arity(schema, &a.rel, sa)?;
            }
        }
        self.expect(Tok::Dot)?;
        constraint.validate().map_err(|e| ParseError { kind: ParseErrorKind::Syntax(e.to_string()), span: start })?;
        Ok(constraint)
    }

    fn check_sorts(&self, body: &[SpannedAtom], head: &[SpannedAtom]) -> PResult<()> {
        let nodes: BTreeSet<&Var> = body.iter().chain(head).filter_map(|a| a.atom.node_var()).collect();
        for a in body.iter().chain(head) {
            if let Some((v, s)) = a.var_spans.iter().find(|(v, _)| nodes.contains(v)) {
                return err(ParseErrorKind::SortClash(v.to_string()), s);
            }
        }
        Ok(())
    }

    fn check_comparisons(&self, comps: &[(CompAtom, VarSpans)], body_data: &BTreeSet<Var>) -> PResult<()> {
        for (_, spans) in comps {
            if let Some((v, s)) = spans.iter().find(|(v, _)| !body_data.contains(v)) {
                return err(ParseErrorKind::Safety(v.to_string()), s);
            }
        }
        Ok(())
    }

    fn fact(&mut self) -> PResult<(Fact, SourceSpan)> {
        let (name, span) = self.ident("a relation name")?;
        self.expect(Tok::LParen)?;
        let mut values = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                values.push(self.number()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok((Fact::from_values(Sym::new(&name), values), span))
    }

    fn fact_block(&mut self, schema: &mut Schema) -> PResult<Vec<(Fact, SourceSpan)>> {
        self.expect(Tok::LBrace)?;
        let mut facts = Vec::new();
        while *self.peek() != Tok::RBrace {
            let (f, s) = self.fact()?;
            let rel = RelAtom::new(f.relation.as_str(), f.values.iter().map(|v| Term::Const(*v)).collect());
            record_arity(schema, &rel, &s)?;
            facts.push((f, s));
            if *self.peek() == Tok::Comma {
                self.bump();
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(facts)
    }
}

fn record_arity(schema: &mut Schema, atom: &RelAtom, span: &SourceSpan) -> PResult<()> {
    match schema.get(&atom.relation) {
        Some(&n) if n != atom.arity() => err(
            ParseErrorKind::ArityMismatch { relation: atom.relation.to_string(), expected: n, found: atom.arity() },
            span,
        ),
        Some(_) => Ok(()),
        None => {
            schema.insert(atom.relation.clone(), atom.arity());
            Ok(())
        }
    }
}

/// Parses a `.dc` constraint file.
pub fn parse_constraints(text: &str) -> Result<ConstraintSet, ParseError> {
    parse_constraints_with(text, &ParseOptions::default())
}

pub fn parse_constraints_with(text: &str, opts: &ParseOptions) -> Result<ConstraintSet, ParseError> {
    let mut p = Parser::new(text, opts)?;
    let mut schema = Schema::new();
    let mut constraints = Vec::new();
    while *p.peek() != Tok::Eof {
        constraints.push(p.constraint(&mut schema)?);
    }
    let span = p.span();
    ConstraintSet::with_schema(schema, constraints)
        .map_err(|e| ParseError { kind: ParseErrorKind::Syntax(e.to_string()), span })
}

/// Parses a file holding exactly one constraint.
pub fn parse_constraint(text: &str, opts: &ParseOptions) -> Result<Constraint, ParseError> {
    let set = parse_constraints_with(text, opts)?;
    match set.constraints() {
        [c] => Ok(c.clone()),
        other => err(
            ParseErrorKind::Syntax(format!("expected exactly one constraint, found {}", other.len())),
            &SourceSpan { file: opts.file.as_deref().map(Arc::from), line: 1, column: 1 },
        ),
    }
}

/// Parses a `.dinst` instance, adding local-only facts to the global set.
pub fn parse_instance(text: &str) -> Result<DistributedInstance, ParseError> {
    parse_instance_with(text, &ParseOptions::default()).map(|p| p.instance)
}

pub fn parse_instance_with(text: &str, opts: &ParseOptions) -> Result<ParsedInstance, ParseError> {
    let mut p = Parser::new(text, opts)?;
    let mut schema = Schema::new();
    let (kw, span) = p.ident("`global`")?;
    if kw != "global" {
        return err(ParseErrorKind::Syntax(format!("expected `global`, found `{kw}`")), &span);
    }
    let global: BTreeSet<Fact> = p.fact_block(&mut schema)?.into_iter().map(|(f, _)| f).collect();
    let mut instance = DistributedInstance::from_global(global);
    let mut added = Vec::new();
    let mut seen = BTreeMap::new();
    while *p.peek() != Tok::Eof {
        let (kw, span) = p.ident("`local`")?;
        if kw != "local" {
            return err(ParseErrorKind::Syntax(format!("expected `local`, found `{kw}`")), &span);
        }
        if *p.peek() == Tok::LBrace {
            if !p.fact_block(&mut schema)?.is_empty() {
                return err(ParseErrorKind::Syntax("facts in a `local` block need a node id".into()), &span);
            }
            continue;
        }
        let nspan = p.span();
        let Tok::Number(n) = p.peek().clone() else {
            return err(ParseErrorKind::Syntax(format!("expected a node id, found {}", p.peek())), &nspan);
        };
        p.bump();
        let id: u32 = n.parse().map_err(|_| ParseError {
            kind: ParseErrorKind::Syntax(format!("invalid node id `{n}`")),
            span: nspan.clone(),
        })?;
        if seen.insert(id, ()).is_some() {
            return err(ParseErrorKind::Syntax(format!("node {id} listed twice")), &nspan);
        }
        let node = NodeId(id);
        instance.add_node(node);
        for (f, s) in p.fact_block(&mut schema)? {
            if !instance.contains_global(&f) {
                if opts.strict {
                    return err(ParseErrorKind::SubsetViolation(f.to_string()), &s);
                }
                added.push((node, f.clone()));
            }
            instance.insert_local(node, f);
        }
    }
    Ok(ParsedInstance { instance, added_to_global: added })
}

/// Parses a `.cq` query.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    parse_query_with(text, &ParseOptions::default())
}

pub fn parse_query_with(text: &str, opts: &ParseOptions) -> Result<Query, ParseError> {
    let mut p = Parser::new(text, opts)?;
    let (head, hspan, head_vars) = p.rel_atom()?;
    p.expect(Tok::LArrow)?;
    let mut body = Vec::new();
    let mut schema = Schema::new();
    loop {
        let (a, s, _) = p.rel_atom()?;
        if *p.peek() == Tok::At {
            return err(ParseErrorKind::Syntax("query atoms cannot be placed at nodes".into()), &p.span());
        }
        record_arity(&mut schema, &a, &s)?;
        body.push(a);
        if *p.peek() == Tok::Comma {
            p.bump();
        } else {
            break;
        }
    }
    p.expect(Tok::Dot)?;
    p.expect(Tok::Eof)?;
    let body_vars: BTreeSet<&Var> = body.iter().flat_map(RelAtom::data_vars).collect();
    if let Some((v, s)) = head_vars.iter().find(|(v, _)| !body_vars.contains(v)) {
        return err(ParseErrorKind::Safety(v.to_string()), s);
    }
    Query::new(head, body).map_err(|e| ParseError { kind: ParseErrorKind::Syntax(e.to_string()), span: hspan })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_rule_with_comparisons() {
        let set = parse_constraints("Msg(s,r)@n, Range(l,u)@m, l <= s, s <= u -> Msg(s,r)@m.").unwrap();
        let t = set.constraints()[0].as_tgd().unwrap();
        assert_eq!(t.body.len(), 2);
        assert_eq!(t.comparisons.len(), 2);
        assert_eq!(t.head, vec![RelAtom::vars("Msg", &["s", "r"]).at("m")]);
        assert_eq!(set.schema().get(&Sym::new("Range")), Some(&2));
    }

    #[test]
    fn degd_sorts_follow_the_body() {
        let set = parse_constraints("R(x)@k, R(x)@m -> k = m.\nAddr(x,y)@k, Addr(x,y2)@k -> y = y2.").unwrap();
        assert!(set.constraints()[0].as_egd().unwrap().is_node_identifying());
        assert_eq!(set.constraints()[1].as_egd().unwrap().head, Equality::Data(Var::new("y"), Var::new("y2")));
    }

    #[test]
    fn diagnostics_point_at_the_offending_token() {
        let e = parse_constraints("R(x)@k -> x = k.").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::MixedEquality(_)));
        assert_eq!((e.span.line, e.span.column), (1, 11));
        let e = parse_constraints("R(x) , x < y -> S(x).").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Safety("y".into()));
        assert_eq!(e.span.column, 12);
        let e = parse_constraints("R(x) -> S(x).\nR(x,y) -> S(x).").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ArityMismatch { .. }));
        assert_eq!((e.span.line, e.span.column), (2, 1));
        let e = parse_constraints("R(x) -> S(x)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        let e = parse_constraints("R(k)@k -> S(k).").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::SortClash(_)));
    }

    #[test]
    fn domain_is_checked_at_parse_time() {
        let opts = ParseOptions { domain: Some(Domain::Int), ..Default::default() };
        let e = parse_constraints_with("R(x), x < 1/2 -> S(x).", &opts).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::DomainMismatch { .. }));
        let opts = ParseOptions { domain: Some(Domain::Nat), ..Default::default() };
        assert!(parse_constraints_with("R(x), -1 < x -> S(x).", &opts).is_err());
    }

    #[test]
    fn instances_and_subset_handling() {
        let text = "global { R(1,2) S(2) S(3) S(4) }\nlocal 1 { R(1,2), S(2) }\nlocal 2 { S(2) S(3) }";
        let d = parse_instance(text).unwrap();
        assert_eq!(d.skipped().len(), 1);
        let empty = parse_instance("global {} local {}").unwrap();
        assert!(empty.is_empty());
        let strict = ParseOptions { strict: true, ..Default::default() };
        let e = parse_instance_with("global {} local 0 { T(1) }", &strict).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::SubsetViolation(_)));
        let lax = parse_instance_with("global {} local 0 { T(1) }", &ParseOptions::default()).unwrap();
        assert_eq!(lax.added_to_global.len(), 1);
        assert!(lax.instance.contains_global(&Fact::new("T", [1])));
        assert!(parse_instance("global { R(1) R(1,2) }").is_err());
    }

    #[test]
    fn queries() {
        let q = parse_query("H(n,s) <- Emp(n,t), Sal(t,s).").unwrap();
        assert_eq!(q.body.len(), 2);
        assert!(parse_query("H(x) <- R(x,x).").is_ok());
        let e = parse_query("H(y) <- R(x,x).").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Safety("y".into()));
        assert_eq!(e.span.column, 3);
    }
}
