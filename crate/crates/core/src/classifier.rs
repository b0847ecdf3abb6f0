//! Kinds, context-bound type tags and fragment membership of constraints.
//!
//! Everything is computed on head-normalized parts, so a node-creating or
//! data-collecting dtgd has exactly one head node variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{normalize_set, Atom, Constraint, ConstraintSet, Degd, Dtgd, Equality, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("dtgd is not data-full: head data variable `{0}` does not occur in the body")]
    NotDataFull(Var),
    #[error("dtgd head is not normalized: it must be one bare atom or atoms at a single node variable")]
    NotNormalized,
}

/// Data variables of the atoms placed at `node`.
pub fn context<'a>(node: &Var, atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Var> {
    atoms.into_iter().filter(|a| a.node_var() == Some(node)).flat_map(|a| a.data_vars().cloned()).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Kind {
    NodeCreating,
    DataCollecting,
    GlobalDtgd,
    NodeIdentifying,
    ValueIdentifying,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::NodeCreating => "node-creating",
            Kind::DataCollecting => "data-collecting",
            Kind::GlobalDtgd => "global-dtgd",
            Kind::NodeIdentifying => "node-identifying",
            Kind::ValueIdentifying => "value-identifying",
        })
    }
}

/// Syntactic forms. More than one can hold, e.g. for an empty body.
#[derive(Clone, Copy, PartialEq, Eq, Default, Debug)]
pub struct Forms {
    /// No distributed atom at all.
    pub global: bool,
    /// Every atom distributed at one and the same node variable.
    pub local: bool,
    /// Bare body, head distributed at one node variable.
    pub global_local: bool,
    /// Body distributed at one node variable, bare head.
    pub local_global: bool,
}

impl Forms {
    pub fn names(&self) -> Vec<&'static str> {
        [
            (self.global, "global"),
            (self.local, "local"),
            (self.global_local, "global-local"),
            (self.local_global, "local-global"),
        ]
        .into_iter()
        .filter_map(|(on, n)| on.then_some(n))
        .collect()
    }
}

fn single_node_var(atoms: &[Atom]) -> Option<&Var> {
    let first = atoms.first()?.node_var()?;
    atoms.iter().all(|a| a.node_var() == Some(first)).then_some(first)
}

fn forms(body: &[Atom], head: &[Atom]) -> Forms {
    let bare = |xs: &[Atom]| xs.iter().all(|a| !a.is_distributed());
    let all: Vec<Atom> = body.iter().chain(head).cloned().collect();
    Forms {
        global: bare(&all),
        local: !all.is_empty() && single_node_var(&all).is_some(),
        global_local: !head.is_empty() && bare(body) && single_node_var(head).is_some(),
        local_global: !body.is_empty() && !head.is_empty() && single_node_var(body).is_some() && bare(head),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KindTag {
    pub kind: Kind,
    pub forms: Forms,
    /// The single head node variable of node-creating and data-collecting dtgds.
    pub head_var: Option<Var>,
}

fn head_var(t: &Dtgd) -> Result<Option<Var>, ClassifyError> {
    match t.head.as_slice() {
        [a] if !a.is_distributed() => Ok(None),
        head => single_node_var(head).cloned().map(Some).ok_or(ClassifyError::NotNormalized),
    }
}

/// Kind and form flags of one head-normalized, data-full constraint.
pub fn classify_kind(c: &Constraint) -> Result<KindTag, ClassifyError> {
    match c {
        Constraint::Tgd(t) => {
            if let Some(v) = t.existential_data_vars().into_iter().next() {
                return Err(ClassifyError::NotDataFull(v));
            }
            let hv = head_var(t)?;
            let kind = match &hv {
                None => Kind::GlobalDtgd,
                Some(k) if t.body_node_vars().contains(k) => Kind::DataCollecting,
                Some(_) => Kind::NodeCreating,
            };
            Ok(KindTag { kind, forms: forms(&t.body, &t.head), head_var: hv })
        }
        Constraint::Egd(e) => Ok(KindTag {
            kind: if e.is_node_identifying() { Kind::NodeIdentifying } else { Kind::ValueIdentifying },
            forms: forms(&e.body, &[]),
            head_var: None,
        }),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Tag {
    G1,
    G2,
    G3,
    G4,
    C1,
    C2,
    C3,
    E1,
    E2,
    E3,
    E4,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TypeTag {
    pub bound: usize,
    pub tags: BTreeSet<Tag>,
    /// Head variables under which E2 holds; both sides when both qualify.
    pub e2_head_vars: Vec<Var>,
}

impl TypeTag {
    pub fn has(&self, t: Tag) -> bool {
        self.tags.contains(&t)
    }
}

fn tgd_tags(t: &Dtgd, kind: &KindTag, b: usize) -> BTreeSet<Tag> {
    let mut tags = BTreeSet::new();
    let Some(k) = &kind.head_var else { return tags };
    let body_nodes = t.body_node_vars();
    let body_ctx = |v: &Var| context(v, &t.body).len();
    let full_ctx = |v: &Var| context(v, t.body.iter().chain(&t.head)).len();
    match kind.kind {
        Kind::NodeCreating => {
            let g1 = full_ctx(k) <= b;
            let unbounded = body_nodes.iter().filter(|v| body_ctx(v) > b).count();
            if g1 {
                tags.insert(Tag::G1);
            }
            if body_nodes.iter().all(|v| full_ctx(v) <= b) {
                tags.insert(Tag::G2);
            }
            if unbounded == 1 {
                tags.insert(Tag::G3);
            }
            if !g1 && unbounded >= 2 {
                tags.insert(Tag::G4);
            }
        }
        Kind::DataCollecting => {
            let c1 = body_ctx(k) <= b;
            let c2 = body_nodes.iter().filter(|v| *v != k).all(|v| full_ctx(v) <= b);
            if c1 {
                tags.insert(Tag::C1);
            }
            if c2 {
                tags.insert(Tag::C2);
            }
            if !c1 && !c2 {
                tags.insert(Tag::C3);
            }
        }
        _ => {}
    }
    tags
}

fn egd_tags(e: &Degd, b: usize) -> (BTreeSet<Tag>, Vec<Var>) {
    let mut tags = BTreeSet::new();
    let Equality::Node(k, m) = &e.head else { return (tags, Vec::new()) };
    let nodes = e.body_node_vars();
    let bounded = |v: &Var| context(v, &e.body).len() <= b;
    if bounded(k) && bounded(m) {
        tags.insert(Tag::E1);
    }
    let others_bounded = nodes.iter().filter(|v| *v != k && *v != m).all(bounded);
    let mut heads = Vec::new();
    for (head, other) in [(k, m), (m, k)] {
        if others_bounded && bounded(other) && !heads.contains(head) {
            heads.push(head.clone());
        }
    }
    if !heads.is_empty() {
        tags.insert(Tag::E2);
    }
    if tags.is_empty() {
        match nodes.iter().filter(|v| !bounded(v)).count() {
            2 => {
                tags.insert(Tag::E3);
            }
            n if n >= 3 => {
                tags.insert(Tag::E4);
            }
            _ => {}
        }
    }
    (tags, heads)
}

/// Type tags of one head-normalized constraint at bound `b`.
pub fn type_tags(c: &Constraint, b: usize) -> Result<TypeTag, ClassifyError> {
    let kind = classify_kind(c)?;
    let (tags, e2_head_vars) = match c {
        Constraint::Tgd(t) => (tgd_tags(t, &kind, b), Vec::new()),
        Constraint::Egd(e) => egd_tags(e, b),
    };
    Ok(TypeTag { bound: b, tags, e2_head_vars })
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Fragment {
    Tbg,
    Tbd,
    Twbd,
    Ebd,
}

impl Fragment {
    pub const ALL: [Fragment; 4] = [Fragment::Tbg, Fragment::Tbd, Fragment::Twbd, Fragment::Ebd];

    pub fn name(self) -> &'static str {
        match self {
            Fragment::Tbg => "Tbg",
            Fragment::Tbd => "Tbd",
            Fragment::Twbd => "Twbd",
            Fragment::Ebd => "Ebd",
        }
    }

    /// Dtgd fragments say nothing about degds and vice versa.
    pub fn applies_to(self, kind: Kind) -> bool {
        let egd = matches!(kind, Kind::NodeIdentifying | Kind::ValueIdentifying);
        egd == (self == Fragment::Ebd)
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether a part with the given kind and tags lies in `frag`.
pub fn in_fragment(frag: Fragment, kind: Kind, tags: &TypeTag) -> bool {
    use Kind::*;
    let tbd = match kind {
        GlobalDtgd => true,
        NodeCreating => tags.has(Tag::G1) || tags.has(Tag::G2),
        DataCollecting => tags.has(Tag::C1) || tags.has(Tag::C2),
        _ => false,
    };
    match (frag, kind) {
        (Fragment::Tbg, GlobalDtgd | DataCollecting) => true,
        (Fragment::Tbg, NodeCreating) => tags.has(Tag::G1),
        (Fragment::Tbd, _) => tbd,
        (Fragment::Twbd, NodeCreating) => tbd || tags.has(Tag::G3),
        (Fragment::Twbd, _) => tbd,
        (Fragment::Ebd, ValueIdentifying) => true,
        (Fragment::Ebd, NodeIdentifying) => tags.has(Tag::E1) || tags.has(Tag::E2),
        _ => false,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Complexity {
    /// Π2, or NP when `np` holds (no comparison atoms).
    Pi2 {
        np: bool,
    },
    Pspace,
    Exptime,
    Undecidable,
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Complexity::Pi2 { np: true } => "PI2/NP",
            Complexity::Pi2 { np: false } => "PI2",
            Complexity::Pspace => "PSPACE",
            Complexity::Exptime => "EXPTIME",
            Complexity::Undecidable => "UNDECIDABLE",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PartReport {
    pub constraint: usize,
    pub part: usize,
    pub rule: Constraint,
    pub kind: KindTag,
    pub tags: TypeTag,
    /// Fragments that contain the part at the report's bound.
    pub fragments: BTreeSet<Fragment>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FragmentReport {
    pub bound: usize,
    pub alpha: usize,
    /// Largest arity used by the constraints.
    pub max_arity: usize,
    pub data_full: bool,
    /// Indices of constraints that are not data-full.
    pub not_data_full: Vec<usize>,
    pub has_comparisons: bool,
    pub parts: Vec<PartReport>,
    /// Least b ≥ 1 with every relevant part inside the fragment; `None` is ∞.
    pub min_bound: BTreeMap<Fragment, Option<usize>>,
    pub verdict: Complexity,
}

fn parts_in(parts: &[(usize, usize, Constraint, KindTag)], frag: Fragment, b: usize) -> bool {
    parts.iter().filter(|p| frag.applies_to(p.3.kind)).all(|(_, _, rule, kind)| {
        let tags = type_tags(rule, b).expect("parts are normalized and data-full");
        in_fragment(frag, kind.kind, &tags)
    })
}

fn largest_context(parts: &[(usize, usize, Constraint, KindTag)]) -> usize {
    parts
        .iter()
        .flat_map(|(_, _, rule, _)| {
            let atoms: Vec<Atom> = rule.atoms().cloned().collect();
            atoms.iter().filter_map(|a| a.node_var().cloned()).map(|v| context(&v, &atoms).len()).collect::<Vec<_>>()
        })
        .max()
        .unwrap_or(0)
}

/// Classifies every constraint and derives the complexity verdict.
///
/// `alpha` defaults to the largest arity in `sigma`; `bound` defaults to
/// `max(alpha, 1)`. A given `alpha` below the actual arity voids the
/// arity-restricted fragments and yields EXPTIME.
pub fn fragment_report(sigma: &ConstraintSet, bound: Option<usize>, alpha: Option<usize>) -> FragmentReport {
    let max_arity = sigma.max_arity();
    let alpha = alpha.unwrap_or(max_arity);
    let b = bound.unwrap_or(alpha.max(1));
    let has_comparisons = sigma.has_comparisons();
    let not_data_full: Vec<usize> = sigma
        .iter()
        .enumerate()
        .filter(|(_, c)| c.as_tgd().is_some_and(|t| !t.is_data_full()))
        .map(|(i, _)| i)
        .collect();
    let data_full = not_data_full.is_empty();
    let normalizable = ConstraintSet::with_schema(
        sigma.schema().clone(),
        sigma.iter().enumerate().filter(|(i, _)| !not_data_full.contains(i)).map(|(_, c)| c.clone()).collect(),
    )
    .expect("subset of a valid set");
    let origin: Vec<usize> = (0..sigma.len()).filter(|i| !not_data_full.contains(i)).collect();
    let raw: Vec<(usize, usize, Constraint, KindTag)> = normalize_set(&normalizable)
        .expect("data-full constraints normalize")
        .into_iter()
        .map(|p| {
            let kind = classify_kind(&p.rule).expect("normalized part");
            (origin[p.constraint], p.part, p.rule, kind)
        })
        .collect();
    let parts = raw
        .iter()
        .map(|(ci, pi, rule, kind)| {
            let tags = type_tags(rule, b).expect("normalized part");
            let fragments = Fragment::ALL
                .into_iter()
                .filter(|f| f.applies_to(kind.kind) && in_fragment(*f, kind.kind, &tags))
                .collect();
            PartReport { constraint: *ci, part: *pi, rule: rule.clone(), kind: kind.clone(), tags, fragments }
        })
        .collect();
    let limit = largest_context(&raw).max(1);
    let min_bound = Fragment::ALL
        .into_iter()
        .map(|f| {
            let least = if data_full { (1..=limit).find(|&b| parts_in(&raw, f, b)) } else { None };
            (f, least)
        })
        .collect();
    let verdict = if !data_full {
        Complexity::Undecidable
    } else if alpha < max_arity {
        Complexity::Exptime
    } else if parts_in(&raw, Fragment::Tbg, b) || (parts_in(&raw, Fragment::Tbd, b) && parts_in(&raw, Fragment::Ebd, b))
    {
        Complexity::Pi2 { np: !has_comparisons }
    } else if parts_in(&raw, Fragment::Twbd, b) && parts_in(&raw, Fragment::Ebd, b) {
        Complexity::Pspace
    } else {
        Complexity::Exptime
    };
    FragmentReport { bound: b, alpha, max_arity, data_full, not_data_full, has_comparisons, parts, min_bound, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_constraints;

    fn one(text: &str) -> Constraint {
        parse_constraints(text).unwrap().constraints()[0].clone()
    }

    fn tags(text: &str, b: usize) -> Vec<Tag> {
        type_tags(&one(text), b).unwrap().tags.into_iter().collect()
    }

    #[test]
    fn contexts() {
        let s1 = one("R(x,y,z), S(y)@k -> T(x)@k.");
        let all: Vec<Atom> = s1.atoms().cloned().collect();
        assert_eq!(context(&Var::new("k"), &all), ["x", "y"].map(Var::new).into());
        assert_eq!(context(&Var::new("k"), s1.body()).len(), 1);
        assert!(context(&Var::new("q"), &all).is_empty());
        let s2 = one("S(x)@k, S(y)@k, R(x,y,z)@l -> k = l.");
        assert_eq!(context(&Var::new("l"), s2.body()).len(), 3);
    }

    #[test]
    fn kinds() {
        let k = classify_kind(&one("R(x,y) -> R(x,y)@k.")).unwrap();
        assert_eq!(k.kind, Kind::NodeCreating);
        assert!(k.forms.global_local && !k.forms.local);
        assert_eq!(classify_kind(&one("S(x)@k, T(x)@l -> T(x)@k.")).unwrap().kind, Kind::DataCollecting);
        let g = classify_kind(&one("R(x,y)@k, T(x)@k -> S(y).")).unwrap();
        assert_eq!(g.kind, Kind::GlobalDtgd);
        assert!(g.forms.local_global);
        assert_eq!(classify_kind(&one("Sal(t,s), Sal(t,u) -> s = u.")).unwrap().forms.names(), ["global"]);
        assert_eq!(classify_kind(&one("Addr(x,y)@k, Addr(x,u)@k -> y = u.")).unwrap().kind, Kind::ValueIdentifying);
        assert!(matches!(classify_kind(&one("R(x) -> S(x,y)@k.")), Err(ClassifyError::NotDataFull(_))));
        assert_eq!(classify_kind(&one("R(x) -> S(x)@k, T(x).")), Err(ClassifyError::NotNormalized));
    }

    #[test]
    fn tags_at_small_bounds() {
        assert_eq!(tags("R(x,y) -> R(x,y)@k.", 2), [Tag::G1, Tag::G2]);
        assert_eq!(tags("Dom(x), Dom(y) -> H(x,y)@k.", 2), [Tag::G1, Tag::G2]);
        let s2 = one("S(x)@k, S(y)@k, R(x,y,z)@l -> k = l.");
        let t = type_tags(&s2, 2).unwrap();
        assert_eq!(t.tags.iter().copied().collect::<Vec<_>>(), [Tag::E2]);
        assert_eq!(t.e2_head_vars, [Var::new("l")]);
        assert_eq!(tags("R(x,y)@k, R(y,x)@m -> k = m.", 1), [Tag::E3]);
        assert_eq!(tags("R(x,y)@k, R(y,x)@m, R(x,x)@l, R(y,y)@l -> k = m.", 0), [Tag::E4]);
        assert_eq!(tags("R(x,y)@k, S(x,y)@m -> T(x)@k.", 1), [Tag::C3]);
        assert_eq!(tags("R(x,y)@l, S(x,y)@m -> T(x,y)@k.", 1), [Tag::G4]);
        assert_eq!(tags("R(x)@l, S(x,y)@m -> T(x,y)@k.", 1), [Tag::G3]);
    }

    #[test]
    fn range_partitioning_is_pi2() {
        let sigma = parse_constraints(
            "Range(l,u) -> Range(l,u)@k.\nMsg(s,r) -> Msg(s,r)@k.\n\
             Msg(s,r)@n, Range(l,u)@m, l <= s, s <= u -> Msg(s,r)@m.",
        )
        .unwrap();
        let r = fragment_report(&sigma, None, None);
        assert_eq!((r.alpha, r.bound), (2, 2));
        assert_eq!(r.verdict, Complexity::Pi2 { np: false });
    }

    #[test]
    fn bounded_context_example_is_np() {
        let sigma = parse_constraints("R(x)@k -> T(x)@l.\nT(x)@k, T(y)@k, T(z)@l, T(w)@l -> U(x,y,z,w)@k.").unwrap();
        let r = fragment_report(&sigma, None, None);
        assert_eq!(r.alpha, 4);
        assert_eq!(r.verdict, Complexity::Pi2 { np: true });
        assert_eq!(r.min_bound[&Fragment::Tbg], Some(1));
        assert_eq!(r.min_bound[&Fragment::Tbd], Some(2));
    }

    #[test]
    fn not_data_full_is_undecidable() {
        let sigma = parse_constraints("Emp(x,y), Sal(y,z) -> Emp(x,u)@k, Sal(u,z)@k.").unwrap();
        let r = fragment_report(&sigma, None, None);
        assert_eq!(r.verdict, Complexity::Undecidable);
        assert!(r.min_bound.values().all(Option::is_none));
    }

    #[test]
    fn alpha_below_arity_falls_back() {
        let sigma = parse_constraints("R(x,y) -> R(x,y)@k.").unwrap();
        assert_eq!(fragment_report(&sigma, Some(2), Some(1)).verdict, Complexity::Exptime);
        assert_eq!(fragment_report(&sigma, Some(2), Some(2)).verdict, Complexity::Pi2 { np: true });
    }

    #[test]
    fn pspace_and_exptime_shapes() {
        let g3 = parse_constraints("R(x,y)@l, S(x)@m -> T(x,y)@k.\nR(x,y)@l, R(y,x)@m -> l = m.").unwrap();
        let r = fragment_report(&g3, Some(1), None);
        assert_eq!(r.verdict, Complexity::Exptime);
        let g3 = parse_constraints("R(x,y)@l, S(x)@m -> T(x,y)@k.").unwrap();
        assert_eq!(fragment_report(&g3, Some(1), None).verdict, Complexity::Pspace);
    }
}
