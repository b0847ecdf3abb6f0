//! Deciding `Σ ⊨_𝔻 τ` by chasing every canonical database of τ.
//!
//! The canonical databases are `V(rbody(τ))` for valuations `V` of the body
//! data variables over a finite domain that contains all constants plus
//! enough fresh values around and between them to realise every order type
//! of τ's variables. A database whose chase succeeds without a head
//! extension of `V` is a countermodel. Without comparisons one database with
//! pairwise distinct fresh values suffices, chased with value
//! identification.

use std::collections::BTreeSet;

use crate::chase::{run_chase_with, ChaseError, ChaseOptions, NodeSemantics, Outcome};
use crate::exec::Executor;
use crate::model::{
    model_check, normalize_set, violated_by, CompAtom, CompiledConstraint, CompiledHead, Constraint, ConstraintSet,
    DistributedInstance, Domain, FactIndex, ModelError, NodeId, Valuation, Value, ValueError, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImplicationError {
    #[error("constraint #{} is not data-full: head data variable `{var}` does not occur in the body", .index + 1)]
    NotDataFull { index: usize, var: Var },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("arithmetic overflow while building the value domain")]
    Overflow,
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<ValueError> for ImplicationError {
    fn from(_: ValueError) -> Self {
        ImplicationError::Overflow
    }
}

/// The finite value domain `dom(Σ,τ,𝔻)`, ascending and duplicate-free.
pub fn build_domain(sigma: &ConstraintSet, tau: &Constraint, domain: Domain) -> Result<Vec<Value>, ImplicationError> {
    let constants: BTreeSet<Value> = sigma.constants().into_iter().chain(tau.constants()).collect();
    if let Some(&value) = constants.iter().find(|v| !domain.contains(**v)) {
        return Err(ModelError::DomainMismatch { value, domain }.into());
    }
    let m = tau.body_data_vars().len() as i64;
    domain_values(&constants.into_iter().collect::<Vec<_>>(), m, domain)
}

fn domain_values(cs: &[Value], m: i64, domain: Domain) -> Result<Vec<Value>, ImplicationError> {
    let (Some(&first), Some(&last)) = (cs.first(), cs.last()) else {
        return Ok((0..m).map(Value::int).collect());
    };
    let mut out: BTreeSet<Value> = cs.iter().copied().collect();
    for j in 1..=m {
        let j = Value::int(j);
        let below = first.checked_sub(&j)?;
        if domain != Domain::Nat || !below.is_negative() {
            out.insert(below);
        }
        out.insert(last.checked_add(&j)?);
    }
    for w in cs.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let gap = hi.checked_sub(&lo)?;
        for j in 1..=m {
            let v = match domain {
                Domain::Rat => lo.checked_add(&Value::ratio(j, m + 1)?.checked_mul(&gap)?)?,
                Domain::Int | Domain::Nat => lo.checked_add(&Value::int(j))?,
            };
            if v >= hi {
                break;
            }
            out.insert(v);
        }
    }
    Ok(out.into_iter().collect())
}

/// One canonical database `V(rbody(τ))`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CanonicalDb {
    pub valuation: Valuation,
    pub instance: DistributedInstance,
}

/// `V(rbody(τ))` with node variables numbered `0..k` in name order.
pub fn canonical_db(tau: &Constraint, data: impl IntoIterator<Item = (Var, Value)>) -> CanonicalDb {
    let mut v = Valuation { data: data.into_iter().collect(), ..Valuation::default() };
    let nodes: BTreeSet<&Var> = tau.body().iter().filter_map(|a| a.node_var()).collect();
    for (i, k) in nodes.into_iter().enumerate() {
        v.nodes.insert(k.clone(), NodeId(i as u32));
    }
    let mut d = DistributedInstance::new();
    for n in v.nodes.values() {
        d.add_node(*n);
    }
    for a in tau.body() {
        match v.placed_fact(a).expect("valuation covers the body") {
            (f, None) => {
                d.insert_global(f);
            }
            (f, Some(n)) => {
                d.insert_local(n, f);
            }
        }
    }
    CanonicalDb { valuation: v, instance: d }
}

/// Odometer over valuations of `vars` into `values` that satisfy `comps`.
/// Comparisons are checked as soon as all their variables are assigned.
struct Valuations {
    vars: Vec<Var>,
    values: Vec<Value>,
    /// Comparisons indexed by the position after which they are decidable.
    checks: Vec<Vec<CompAtom>>,
    digits: Vec<usize>,
    started: bool,
    done: bool,
}

impl Valuations {
    fn new(tau: &Constraint, values: Vec<Value>) -> Self {
        let vars: Vec<Var> = tau.body_data_vars().into_iter().collect();
        let mut checks = vec![Vec::new(); vars.len()];
        let mut always = true;
        for c in tau.comparisons() {
            match c.data_vars().filter_map(|v| vars.binary_search(v).ok()).max() {
                Some(pos) => checks[pos].push(c.clone()),
                None => always &= CompAtom::holds(c.op, c.left.as_const().unwrap(), c.right.as_const().unwrap()),
            }
        }
        let done = !always || (!vars.is_empty() && values.is_empty());
        Valuations { digits: vec![0; vars.len()], vars, values, checks, started: false, done }
    }

    fn ok_at(&self, pos: usize) -> bool {
        let val = Valuation {
            data: self.vars[..=pos].iter().cloned().zip(self.digits[..=pos].iter().map(|&d| self.values[d])).collect(),
            ..Valuation::default()
        };
        self.checks[pos].iter().all(|c| val.satisfies_comparison(c) == Some(true))
    }

    /// Moves to the next assignment that passes every check, starting the
    /// search by incrementing position `pos`.
    fn advance(&mut self, mut pos: usize, mut bump: bool) -> bool {
        let n = self.vars.len();
        loop {
            if bump {
                loop {
                    self.digits[pos] += 1;
                    if self.digits[pos] < self.values.len() {
                        break;
                    }
                    self.digits[pos] = 0;
                    if pos == 0 {
                        return false;
                    }
                    pos -= 1;
                }
            }
            if self.ok_at(pos) {
                if pos + 1 == n {
                    return true;
                }
                pos += 1;
                self.digits[pos] = 0;
                bump = false;
            } else {
                bump = true;
            }
        }
    }
}

impl Iterator for Valuations {
    type Item = Vec<(Var, Value)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let n = self.vars.len();
        let found = if n == 0 {
            !std::mem::replace(&mut self.started, true)
        } else if !self.started {
            self.started = true;
            self.digits[0] = 0;
            self.advance(0, false)
        } else {
            self.advance(n - 1, true)
        };
        if !found {
            self.done = true;
            return None;
        }
        Some(self.vars.iter().cloned().zip(self.digits.iter().map(|&d| self.values[d])).collect())
    }
}

/// All canonical databases in deterministic order: data variables by name,
/// values ascending, skipping valuations that violate τ's comparisons.
pub fn canonical_instances(
    sigma: &ConstraintSet,
    tau: &Constraint,
    domain: Domain,
) -> Result<impl Iterator<Item = CanonicalDb>, ImplicationError> {
    let values = build_domain(sigma, tau, domain)?;
    let tau = tau.clone();
    Ok(Valuations::new(&tau, values).map(move |v| canonical_db(&tau, v)))
}

/// First extension of `v` (in deterministic order) satisfying τ's head on
/// `d`. For a degd τ this is `v` itself when the two sides are equal.
pub fn head_extension_exists(v: &Valuation, tau: &Constraint, d: &DistributedInstance) -> Option<Valuation> {
    let cc = CompiledConstraint::new(tau);
    let b = cc.body.binding_from_valuation(v);
    let index = FactIndex::new(d);
    match &cc.head {
        CompiledHead::Atoms(h) => h.first(&index, &h.binding_from(&cc.body, &b)).map(|e| h.to_valuation(&e)),
        CompiledHead::Equal(i, j) => (b[*i].is_some() && b[*i] == b[*j]).then(|| v.clone()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Stats {
    /// Canonical databases examined, up to and including a countermodel.
    pub canonical_dbs: u64,
    pub chase_steps: u64,
    /// Whether the single identification-chase path was used.
    pub single_db: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Holds {
        stats: Stats,
    },
    /// A model of Σ with a valuation satisfying τ's body but not its head.
    Refuted {
        countermodel: DistributedInstance,
        witness: Valuation,
        stats: Stats,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn stats(&self) -> Stats {
        match self {
            Verdict::Holds { stats } | Verdict::Refuted { stats, .. } => *stats,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ImplicationOptions {
    pub domain: Domain,
    pub node_semantics: NodeSemantics,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
    /// Enumerate every canonical database even without comparisons.
    pub force_enumeration: bool,
}

impl ImplicationOptions {
    pub fn new(domain: Domain) -> Self {
        ImplicationOptions { domain, ..Self::default() }
    }
}

/// Decides `Σ ⊨_𝔻 τ`.
pub fn decide_implication(
    sigma: &ConstraintSet,
    tau: &Constraint,
    domain: Domain,
) -> Result<Verdict, ImplicationError> {
    decide_implication_with(sigma, tau, &ImplicationOptions::new(domain))
}

enum DbResult {
    Covered(u64),
    Counter(u64, DistributedInstance, Valuation),
}

fn check_one(
    sigma: &ConstraintSet,
    tau: &Constraint,
    db: &CanonicalDb,
    opts: &ChaseOptions,
) -> Result<DbResult, ImplicationError> {
    let trace = run_chase_with(&db.instance, sigma, opts)?;
    let steps = trace.steps.len() as u64;
    if trace.outcome != Outcome::Success {
        return Ok(DbResult::Covered(steps));
    }
    let v = trace.state.resolve(&db.valuation);
    let fin = trace.final_instance();
    if head_extension_exists(&v, tau, fin).is_some() {
        return Ok(DbResult::Covered(steps));
    }
    let report = model_check(fin, sigma)?;
    if !report.is_empty() || !violated_by(fin, tau, &v) {
        return Err(ImplicationError::Internal(format!("countermodel failed verification:\n{report}witness {v}")));
    }
    Ok(DbResult::Counter(steps, fin.clone(), v))
}

pub fn decide_implication_with(
    sigma: &ConstraintSet,
    tau: &Constraint,
    opts: &ImplicationOptions,
) -> Result<Verdict, ImplicationError> {
    if let Err(ModelError::NotDataFull(var)) = normalize_set(sigma) {
        let index = sigma.iter().position(|c| c.as_tgd().is_some_and(|t| !t.is_data_full())).unwrap_or(0);
        return Err(ImplicationError::NotDataFull { index, var });
    }
    let values = build_domain(sigma, tau, opts.domain)?;
    let comparison_free = !sigma.has_comparisons() && !tau.has_comparisons();
    if comparison_free && !opts.force_enumeration {
        return decide_single(sigma, tau, opts);
    }
    let chase_opts = ChaseOptions { node_semantics: opts.node_semantics, ..ChaseOptions::default() };
    let exec = Executor::new(opts.jobs);
    let results = exec.scan_until(
        Valuations::new(tau, values),
        |v| check_one(sigma, tau, &canonical_db(tau, v.clone()), &chase_opts),
        |r| !matches!(r, Ok(DbResult::Covered(_))),
    );
    let mut stats = Stats { canonical_dbs: results.len() as u64, ..Stats::default() };
    for r in results {
        match r? {
            DbResult::Covered(n) => stats.chase_steps += n,
            DbResult::Counter(n, countermodel, witness) => {
                stats.chase_steps += n;
                return Ok(Verdict::Refuted { countermodel, witness, stats });
            }
        }
    }
    Ok(Verdict::Holds { stats })
}

fn decide_single(
    sigma: &ConstraintSet,
    tau: &Constraint,
    opts: &ImplicationOptions,
) -> Result<Verdict, ImplicationError> {
    let constants: BTreeSet<Value> = sigma.constants().into_iter().chain(tau.constants()).collect();
    let fresh = (0i64..).map(Value::int).filter(|v| !constants.contains(v));
    let db = canonical_db(tau, tau.body_data_vars().into_iter().zip(fresh));
    let chase_opts = ChaseOptions { node_semantics: opts.node_semantics, ..ChaseOptions::identify(constants) };
    let mut stats = Stats { canonical_dbs: 1, single_db: true, ..Stats::default() };
    match check_one(sigma, tau, &db, &chase_opts)? {
        DbResult::Covered(n) => {
            stats.chase_steps = n;
            Ok(Verdict::Holds { stats })
        }
        DbResult::Counter(n, countermodel, witness) => {
            stats.chase_steps = n;
            Ok(Verdict::Refuted { countermodel, witness, stats })
        }
    }
}
