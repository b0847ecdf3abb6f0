//! Parallel-correctness of conjunctive queries and certain answers.
//!
//! A query is parallel-correct on `D` when evaluating it at every node and
//! taking the union yields the same facts as evaluating it on `global(D)`.
//! Both that property and its strong variant are expressible as dtgds, so
//! parallel-correctness under a constraint set reduces to implication.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::ControlFlow;

use crate::implication::{decide_implication_with, ImplicationError, ImplicationOptions, Verdict};
use crate::model::{
    find_valuations, Atom, CompiledConstraint, CompiledHead, Constraint, ConstraintSet, DistributedInstance, Domain,
    Dtgd, Fact, FactIndex, ModelError, NodeId, Pattern, Query, RelAtom, Slot, Term, Valuation, Var,
};

/// Facts over a query's result symbol.
pub type FactSet = BTreeSet<Fact>;

/// Default cap on distinct states visited by [`certain_answers`].
pub const STATE_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PcError {
    #[error(transparent)]
    Implication(#[from] ImplicationError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("constraint #{} has a head atom without node; it could extend the fixed global instance", .0 + 1)]
    Consistency(usize),
    #[error("certain-answer search exceeded {0} states")]
    BudgetExceeded(u64),
}

fn fresh_var(taken: &BTreeSet<Var>, base: &str) -> Var {
    let mut name = base.to_string();
    while taken.contains(&Var::new(&name)) {
        name.push('\'');
    }
    Var::new(&name)
}

fn head_fact(q: &Query, v: &Valuation) -> Fact {
    v.fact(&q.head).expect("safe query binds every head variable")
}

fn global_body(q: &Query) -> Vec<Atom> {
    q.body.iter().cloned().map(RelAtom::global).collect()
}

/// Every body atom placed at one node variable, so a match evaluates `Q` at a node.
fn node_body(q: &Query) -> Vec<Atom> {
    let k = fresh_var(&q.vars(), "k");
    q.body.iter().cloned().map(|a| a.at(k.as_str())).collect()
}

fn derive(q: &Query, body: &[Atom], index: &FactIndex<'_>) -> FactSet {
    let pattern = Pattern::new(body, &[]);
    let mut out = FactSet::new();
    let _ = pattern.for_each(index, &pattern.empty_binding(), |b| {
        out.insert(head_fact(q, &pattern.to_valuation(b)));
        ControlFlow::Continue(())
    });
    out
}

/// `Q(I)`: all head facts derived from valuations of the body on `facts`.
pub fn eval_cq(q: &Query, facts: &BTreeSet<Fact>) -> FactSet {
    let d = DistributedInstance::from_global(facts.iter().cloned());
    derive(q, &global_body(q), &FactIndex::new(&d))
}

/// Naive distributed evaluation: the union of `Q(I_k)` over all nodes `k`.
pub fn naive_eval(q: &Query, d: &DistributedInstance) -> FactSet {
    derive(q, &node_body(q), &FactIndex::new(d))
}

/// Outcome of checking one instance. `missing` lists the facts of
/// `Q(global(D))` derived at no node.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PcReport {
    pub missing: FactSet,
}

impl PcReport {
    pub fn is_correct(&self) -> bool {
        self.missing.is_empty()
    }
}

pub fn pc_on_instance(q: &Query, d: &DistributedInstance) -> PcReport {
    let index = FactIndex::new(d);
    let naive = derive(q, &node_body(q), &index);
    let missing = derive(q, &global_body(q), &index).into_iter().filter(|f| !naive.contains(f)).collect();
    PcReport { missing }
}

/// The dtgd satisfied exactly by the instances on which `q` is
/// parallel-correct: every global valuation has a possibly different
/// valuation, agreeing on the head variables, whose body facts meet at a node.
pub fn encode_pc(q: &Query) -> Dtgd {
    let head_vars = q.head_vars();
    let mut taken = q.vars();
    let mut renaming: BTreeMap<Var, Var> = BTreeMap::new();
    for v in q.vars() {
        if !head_vars.contains(&v) {
            let fresh = fresh_var(&taken, &format!("{v}'"));
            taken.insert(fresh.clone());
            renaming.insert(v, fresh);
        }
    }
    let k = fresh_var(&taken, "k");
    let rename = |a: &RelAtom| RelAtom {
        relation: a.relation.clone(),
        terms: a
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(renaming.get(v).unwrap_or(v).clone()),
                c => c.clone(),
            })
            .collect(),
    };
    let body = q.body.iter().cloned().map(RelAtom::global).collect();
    let head = q.body.iter().map(|a| rename(a).at(k.as_str())).collect();
    Dtgd::new(body, vec![], head)
}

/// The data-full dtgd requiring the body facts of every valuation to meet.
pub fn encode_strong_pc(q: &Query) -> Dtgd {
    let k = fresh_var(&q.vars(), "k");
    let body = q.body.iter().cloned().map(RelAtom::global).collect();
    let head = q.body.iter().cloned().map(|a| a.at(k.as_str())).collect();
    Dtgd::new(body, vec![], head)
}

/// Decides whether `q` is (strongly) parallel-correct on every instance
/// satisfying `sigma`.
pub fn pc_wrt_constraints(
    q: &Query,
    sigma: &ConstraintSet,
    opts: &ImplicationOptions,
    strong: bool,
) -> Result<Verdict, PcError> {
    let tau = if strong { encode_strong_pc(q) } else { encode_pc(q) };
    Ok(decide_implication_with(sigma, &tau.into(), opts)?)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CertainAnswers {
    Answers(FactSet),
    /// No distributed instance over the given global facts satisfies Σ.
    Inconsistent,
}

/// Search statistics alongside the certain answers.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct CertainStats {
    pub states: u64,
    pub models: u64,
}

pub fn certain_answers(
    q: &Query,
    facts: &BTreeSet<Fact>,
    sigma: &ConstraintSet,
    domain: Domain,
) -> Result<CertainAnswers, PcError> {
    certain_answers_with(q, facts, sigma, domain, STATE_BUDGET).map(|(a, _)| a)
}

/// Facts returned by naive evaluation on every instance `D` with
/// `global(D) = facts` and `D ⊨ sigma`.
///
/// Explores a disjunctive chase with the global instance frozen: each
/// violated dtgd branches over the head witnesses available among `facts`,
/// existential node variables always get fresh nodes. Every model of `sigma`
/// receives a node homomorphism from some leaf, so the leaves are the only
/// models that need evaluating.
pub fn certain_answers_with(
    q: &Query,
    facts: &BTreeSet<Fact>,
    sigma: &ConstraintSet,
    domain: Domain,
    budget: u64,
) -> Result<(CertainAnswers, CertainStats), PcError> {
    if let Some(i) = sigma.iter().position(|c| c.as_tgd().is_some_and(|t| t.head.iter().any(|a| a.node.is_none()))) {
        return Err(PcError::Consistency(i));
    }
    let start = DistributedInstance::from_global(facts.iter().cloned());
    start.check_domain(domain)?;
    let compiled: Vec<CompiledConstraint> = sigma.iter().map(CompiledConstraint::new).collect();
    let mut search = Search {
        q,
        sigma,
        compiled: &compiled,
        seen: HashSet::new(),
        answers: None,
        stats: CertainStats::default(),
        budget,
    };
    search.explore(start)?;
    let answers = match search.answers {
        Some(a) => CertainAnswers::Answers(a),
        None => CertainAnswers::Inconsistent,
    };
    Ok((answers, search.stats))
}

struct Search<'a> {
    q: &'a Query,
    sigma: &'a ConstraintSet,
    compiled: &'a [CompiledConstraint],
    seen: HashSet<Vec<BTreeSet<Fact>>>,
    answers: Option<FactSet>,
    stats: CertainStats,
    budget: u64,
}

enum Repair {
    Branch(Vec<DistributedInstance>),
    Merge(NodeId, NodeId),
    Dead,
}

impl Search<'_> {
    fn explore(&mut self, d: DistributedInstance) -> Result<(), PcError> {
        if self.answers.as_ref().is_some_and(BTreeSet::is_empty) {
            return Ok(());
        }
        // Node ids carry no meaning; states equal up to renaming share subtrees.
        let mut key: Vec<BTreeSet<Fact>> = d.local().values().cloned().collect();
        key.sort();
        if !self.seen.insert(key) {
            return Ok(());
        }
        self.stats.states += 1;
        if self.stats.states > self.budget {
            return Err(PcError::BudgetExceeded(self.budget));
        }
        match self.repair(&d) {
            None => {
                self.stats.models += 1;
                let naive = naive_eval(self.q, &d);
                self.answers = Some(match self.answers.take() {
                    Some(acc) => acc.intersection(&naive).cloned().collect(),
                    None => naive,
                });
            }
            Some(Repair::Dead) => {}
            Some(Repair::Merge(into, from)) => {
                let mut d = d;
                d.merge_nodes(into, from);
                self.explore(d)?;
            }
            Some(Repair::Branch(children)) => {
                for child in children {
                    self.explore(child)?;
                }
            }
        }
        Ok(())
    }

    /// How to fix the first violation of `d`, or `None` if `d` is a model.
    fn repair(&self, d: &DistributedInstance) -> Option<Repair> {
        let index = FactIndex::new(d);
        for (c, cc) in self.sigma.iter().zip(self.compiled) {
            let Some(b) = cc.first_violation(&index) else { continue };
            return Some(match (c, &cc.head) {
                (_, CompiledHead::Equal(i, j)) => match (b[*i], b[*j]) {
                    (Some(Slot::Node(x)), Some(Slot::Node(y))) => Repair::Merge(x.min(y), x.max(y)),
                    // Values are fixed by the global instance.
                    _ => Repair::Dead,
                },
                (Constraint::Tgd(t), CompiledHead::Atoms(_)) => {
                    Repair::Branch(witnesses(t, &cc.body.to_valuation(&b), d))
                }
                (Constraint::Egd(_), CompiledHead::Atoms(_)) => unreachable!("egds compile to equalities"),
            });
        }
        None
    }
}

/// Every way to satisfy the head of `t` under `val` without new global
/// facts, with one fresh node per existential node variable.
fn witnesses(t: &Dtgd, val: &Valuation, d: &DistributedInstance) -> Vec<DistributedInstance> {
    let ground = |a: &Atom| RelAtom {
        relation: a.rel.relation.clone(),
        terms: a
            .rel
            .terms
            .iter()
            .map(|term| match term {
                Term::Var(v) => val.data.get(v).map_or_else(|| term.clone(), |x| Term::Const(*x)),
                c => c.clone(),
            })
            .collect(),
    };
    let global_head: Vec<Atom> = t.head.iter().map(|a| ground(a).global()).collect();
    let mut nodes = val.clone();
    let first = d.max_node().map_or(0, |n| n.0 + 1);
    for (i, k) in t.existential_node_vars().into_iter().enumerate() {
        nodes.nodes.insert(k, NodeId(first + i as u32));
    }
    find_valuations(&global_head, &[], d)
        .into_iter()
        .map(|w| {
            let mut v = nodes.clone();
            v.data.extend(w.data);
            let mut child = d.clone();
            for a in &t.head {
                let (fact, node) = v.placed_fact(a).expect("witness binds every head variable");
                child.insert_local(node.expect("head atoms are placed"), fact);
            }
            child
        })
        .collect()
}
