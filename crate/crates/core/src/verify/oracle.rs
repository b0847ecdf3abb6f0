//! Bounded-model oracles, independent of the chase.
//!
//! `brute_force_refute` grounds Σ and ¬τ over a finite value pool and node
//! set and asks a SAT solver for a model, so it explores every distributed
//! instance within the bounds without listing them. `certain_oracle` lists
//! the distributions of a fixed global instance explicitly.

use std::collections::{BTreeSet, HashMap};

use varisat::{ExtendFormula, Lit, Solver};

use crate::model::{
    model_check, satisfies, Atom, CompAtom, Constraint, ConstraintSet, DistributedInstance, Equality, Fact, ModelError,
    NodeId, Query, Valuation, Value, Var,
};
use crate::pc::{naive_eval, CertainAnswers, FactSet};

/// Default cap on ground clauses.
pub const CLAUSE_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle exceeded its budget of {0}")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("oracle produced an invalid countermodel: {0}")]
    Internal(String),
}

/// Calls `f` with every valuation of `data` over `values` and `nodes` over
/// `0..n` that extends `base` and satisfies `comps`.
fn for_each_grounding(
    base: &Valuation,
    data: &[Var],
    nodes: &[Var],
    values: &[Value],
    n: u32,
    comps: &[CompAtom],
    f: &mut dyn FnMut(&Valuation) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    fn go(
        v: &mut Valuation,
        data: &[Var],
        nodes: &[Var],
        values: &[Value],
        n: u32,
        comps: &[CompAtom],
        f: &mut dyn FnMut(&Valuation) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        if let Some((x, rest)) = data.split_first() {
            for &a in values {
                v.data.insert(x.clone(), a);
                // Prune as soon as a comparison is fully bound and false.
                if comps.iter().all(|c| v.satisfies_comparison(c) != Some(false)) {
                    go(v, rest, nodes, values, n, comps, f)?;
                }
            }
            v.data.remove(x);
            return Ok(());
        }
        if let Some((k, rest)) = nodes.split_first() {
            for i in 0..n {
                v.nodes.insert(k.clone(), NodeId(i));
                go(v, data, rest, values, n, comps, f)?;
            }
            v.nodes.remove(k);
            return Ok(());
        }
        f(v)
    }
    go(&mut base.clone(), data, nodes, values, n, comps, f)
}

struct Grounder {
    solver: Solver<'static>,
    global: HashMap<Fact, Lit>,
    local: HashMap<(Fact, NodeId), Lit>,
    conj: HashMap<Vec<Lit>, Lit>,
    clauses: u64,
    budget: u64,
}

impl Grounder {
    fn clause(&mut self, lits: &[Lit]) -> Result<(), OracleError> {
        self.clauses += 1;
        if self.clauses > self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        self.solver.add_clause(lits);
        Ok(())
    }

    fn global_lit(&mut self, f: Fact) -> Lit {
        let solver = &mut self.solver;
        *self.global.entry(f).or_insert_with(|| solver.new_lit())
    }

    fn atom_lit(&mut self, a: &Atom, v: &Valuation) -> Result<Lit, OracleError> {
        let (fact, node) = v.placed_fact(a).expect("grounding binds every variable");
        let g = self.global_lit(fact.clone());
        let Some(node) = node else { return Ok(g) };
        if let Some(&l) = self.local.get(&(fact.clone(), node)) {
            return Ok(l);
        }
        let l = self.solver.new_lit();
        self.local.insert((fact, node), l);
        self.clause(&[!l, g])?;
        Ok(l)
    }

    /// A literal equivalent to the conjunction of `lits`.
    fn conjunction(&mut self, mut lits: Vec<Lit>) -> Result<Lit, OracleError> {
        lits.sort();
        lits.dedup();
        if let [single] = lits[..] {
            return Ok(single);
        }
        if let Some(&l) = self.conj.get(&lits) {
            return Ok(l);
        }
        let aux = self.solver.new_lit();
        for &l in &lits {
            self.clause(&[!aux, l])?;
        }
        let mut back: Vec<Lit> = lits.iter().map(|&l| !l).collect();
        back.push(aux);
        self.clause(&back)?;
        self.conj.insert(lits, aux);
        Ok(aux)
    }

    fn body_lits(&mut self, c: &Constraint, v: &Valuation) -> Result<Vec<Lit>, OracleError> {
        c.body().iter().map(|a| self.atom_lit(a, v)).collect()
    }

    /// Literals, one per head extension of `v`, each true iff that
    /// extension's head atoms all hold. `None` for a satisfied equality.
    fn head_options(
        &mut self,
        c: &Constraint,
        v: &Valuation,
        values: &[Value],
        n: u32,
    ) -> Result<Option<Vec<Lit>>, OracleError> {
        match c {
            Constraint::Egd(e) => {
                let same = match &e.head {
                    Equality::Data(a, b) => v.data[a] == v.data[b],
                    Equality::Node(a, b) => v.nodes[a] == v.nodes[b],
                };
                Ok((!same).then(Vec::new))
            }
            Constraint::Tgd(t) => {
                let data: Vec<Var> = t.existential_data_vars().into_iter().collect();
                let nodes: Vec<Var> = t.existential_node_vars().into_iter().collect();
                let mut out = Vec::new();
                for_each_grounding(v, &data, &nodes, values, n, &[], &mut |ext| {
                    let lits = t.head.iter().map(|a| self.atom_lit(a, ext)).collect::<Result<Vec<_>, _>>()?;
                    out.push(self.conjunction(lits)?);
                    Ok(())
                })?;
                Ok(Some(out))
            }
        }
    }
}

fn body_vars(c: &Constraint) -> (Vec<Var>, Vec<Var>) {
    let data = c.body_data_vars().into_iter().collect();
    let nodes = c.body().iter().filter_map(Atom::node_var).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    (data, nodes)
}

/// A distributed instance over `values` (plus the constants of Σ and τ) and
/// at most `max_nodes` nodes that satisfies `sigma` and violates `tau`, or
/// `None` if there is none within these bounds.
pub fn brute_force_refute(
    sigma: &ConstraintSet,
    tau: &Constraint,
    values: &[Value],
    max_nodes: usize,
) -> Result<Option<DistributedInstance>, OracleError> {
    brute_force_refute_with(sigma, tau, values, max_nodes, CLAUSE_BUDGET)
}

pub fn brute_force_refute_with(
    sigma: &ConstraintSet,
    tau: &Constraint,
    values: &[Value],
    max_nodes: usize,
    budget: u64,
) -> Result<Option<DistributedInstance>, OracleError> {
    let pool: Vec<Value> = values
        .iter()
        .copied()
        .chain(sigma.constants())
        .chain(tau.constants())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = max_nodes.max(1) as u32;
    let mut g = Grounder {
        solver: Solver::new(),
        global: HashMap::new(),
        local: HashMap::new(),
        conj: HashMap::new(),
        clauses: 0,
        budget,
    };
    for c in sigma {
        let (data, nodes) = body_vars(c);
        for_each_grounding(&Valuation::new(), &data, &nodes, &pool, n, c.comparisons(), &mut |v| {
            let Some(heads) = g.head_options(c, v, &pool, n)? else { return Ok(()) };
            let mut clause: Vec<Lit> = g.body_lits(c, v)?.into_iter().map(|l| !l).collect();
            clause.extend(heads);
            g.clause(&clause)
        })?;
    }
    // ¬τ: some selected body grounding holds and none of its extensions does.
    let (data, nodes) = body_vars(tau);
    let mut selectors = Vec::new();
    for_each_grounding(&Valuation::new(), &data, &nodes, &pool, n, tau.comparisons(), &mut |v| {
        let Some(heads) = g.head_options(tau, v, &pool, n)? else { return Ok(()) };
        let s = g.solver.new_lit();
        for l in g.body_lits(tau, v)? {
            g.clause(&[!s, l])?;
        }
        for h in heads {
            g.clause(&[!s, !h])?;
        }
        selectors.push(s);
        Ok(())
    })?;
    g.clause(&selectors)?;
    if !g.solver.solve().map_err(|e| OracleError::Internal(e.to_string()))? {
        return Ok(None);
    }
    let model: BTreeSet<Lit> = g.solver.model().expect("satisfiable").into_iter().filter(|l| l.is_positive()).collect();
    let mut d = DistributedInstance::new();
    for (f, l) in &g.global {
        if model.contains(l) {
            d.insert_global(f.clone());
        }
    }
    for ((f, node), l) in &g.local {
        if model.contains(l) {
            d.insert_local(*node, f.clone());
        }
    }
    let d = d.compact_nodes();
    let report = model_check(&d, sigma)?;
    if !report.is_empty() || satisfies(&d, tau) {
        return Err(OracleError::Internal(format!("{report}{d:?}")));
    }
    Ok(Some(d))
}

/// Certain answers by listing every distribution of `facts` onto at most
/// `max_nodes` nodes holding pairwise distinct non-empty fact sets.
///
/// Identical or empty nodes never change naive evaluation or whether Σ is
/// satisfied, so this covers every model with at most `max_nodes` distinct
/// local instances.
pub fn certain_oracle(
    q: &Query,
    facts: &BTreeSet<Fact>,
    sigma: &ConstraintSet,
    max_nodes: usize,
) -> Result<CertainAnswers, OracleError> {
    let all: Vec<Fact> = facts.iter().cloned().collect();
    if all.len() >= 32 {
        return Err(OracleError::BudgetExceeded(32));
    }
    let subsets: Vec<u32> = (1..1u32 << all.len()).collect();
    let mut answers: Option<FactSet> = None;
    let mut chosen = Vec::new();
    families(&subsets, 0, max_nodes, &mut chosen, &mut |family| {
        let mut d = DistributedInstance::from_global(all.iter().cloned());
        for (i, &mask) in family.iter().enumerate() {
            for (j, f) in all.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    d.insert_local(NodeId(i as u32), f.clone());
                }
            }
        }
        if model_check(&d, sigma)?.is_empty() {
            let naive = naive_eval(q, &d);
            answers = Some(match answers.take() {
                Some(acc) => acc.intersection(&naive).cloned().collect(),
                None => naive,
            });
        }
        Ok(())
    })?;
    Ok(answers.map_or(CertainAnswers::Inconsistent, CertainAnswers::Answers))
}

fn families(
    subsets: &[u32],
    from: usize,
    left: usize,
    chosen: &mut Vec<u32>,
    f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    f(chosen)?;
    if left == 0 {
        return Ok(());
    }
    for i in from..subsets.len() {
        chosen.push(subsets[i]);
        families(subsets, i + 1, left - 1, chosen, f)?;
        chosen.pop();
    }
    Ok(())
}
