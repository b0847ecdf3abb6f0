//! The chase for data-full dtgds and arbitrary degds.
//!
//! Scheduling is deterministic: head-normalized parts are scanned in
//! declaration order, body valuations in the matcher's deterministic order, the first
//! applicable step is taken and the scan restarts. A part whose scan found
//! nothing stays skipped until a fact lands in one of its body relations or
//! a node or value merge happens, since only those can enable new steps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;

use crate::model::{
    normalize_set, CompiledConstraint, CompiledHead, Constraint, ConstraintSet, DistributedInstance, Dtgd, Fact,
    FactIndex, ModelError, NodeId, Slot, Sym, Valuation, Value, Var,
};

/// Environment variable overriding the computed step budget.
pub const BUDGET_ENV: &str = "DISTCHECK_STEP_BUDGET";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChaseError {
    #[error("dtgd is not data-full: head data variable `{0}` does not occur in the body")]
    NotDataFull(Var),
    #[error("value identification requires constraints without comparisons")]
    ComparisonsInIdentifyMode,
    #[error("chase step is not applicable")]
    NotApplicable,
    #[error("dtgd head must be one bare atom or atoms at a single node variable")]
    NotNormalized,
    #[error("chase exceeded its step budget of {0}; termination is guaranteed, so this is a bug")]
    BudgetExceeded(u64),
}

impl From<ModelError> for ChaseError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NotDataFull(v) => ChaseError::NotDataFull(v),
            _ => ChaseError::NotNormalized,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ChaseMode {
    /// A violated value-identifying degd fails the chase.
    #[default]
    Strict,
    /// Violated value-identifying degds merge the two values, unless both
    /// are distinct protected constants. Requires a comparison-free set.
    Identify,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum NodeSemantics {
    /// Node-identifying degds merge the two nodes.
    #[default]
    Merge,
    /// Node-identifying degds fail the chase on distinct nodes.
    Fail,
}

#[derive(Clone, Debug, Default)]
pub struct ChaseOptions {
    pub mode: ChaseMode,
    pub node_semantics: NodeSemantics,
    /// Values that identification must never rename.
    pub protected: BTreeSet<Value>,
    /// Overrides both the computed budget and [`BUDGET_ENV`].
    pub budget: Option<u64>,
}

impl ChaseOptions {
    pub fn strict() -> Self {
        Self::default()
    }

    pub fn identify(protected: BTreeSet<Value>) -> Self {
        ChaseOptions { mode: ChaseMode::Identify, protected, ..Self::default() }
    }
}

/// Instance plus the bookkeeping needed for node creation and merges.
///
/// Invariant: `next_node` exceeds every node id ever used, so ids are never
/// reused; merged ids point at their surviving root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChaseState {
    instance: DistributedInstance,
    next_node: u32,
    node_parent: BTreeMap<NodeId, NodeId>,
    value_parent: BTreeMap<Value, Value>,
    steps: u64,
}

impl ChaseState {
    pub fn new(d: DistributedInstance) -> Self {
        let next_node = d.max_node().map_or(0, |n| n.0 + 1);
        ChaseState { instance: d, next_node, node_parent: BTreeMap::new(), value_parent: BTreeMap::new(), steps: 0 }
    }

    pub fn instance(&self) -> &DistributedInstance {
        &self.instance
    }

    pub fn into_instance(self) -> DistributedInstance {
        self.instance
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// The surviving node an id was merged into, or the id itself.
    pub fn find_node(&self, mut n: NodeId) -> NodeId {
        while let Some(&p) = self.node_parent.get(&n) {
            n = p;
        }
        n
    }

    /// The value a value was identified with, or the value itself.
    pub fn find_value(&self, mut v: Value) -> Value {
        while let Some(&p) = self.value_parent.get(&v) {
            v = p;
        }
        v
    }

    /// Maps a valuation through all merges so far.
    pub fn resolve(&self, val: &Valuation) -> Valuation {
        Valuation {
            data: val.data.iter().map(|(k, v)| (k.clone(), self.find_value(*v))).collect(),
            nodes: val.nodes.iter().map(|(k, n)| (k.clone(), self.find_node(*n))).collect(),
        }
    }

    fn create_node(&mut self) -> NodeId {
        let n = NodeId(self.next_node);
        self.next_node += 1;
        self.instance.add_node(n);
        n
    }

    fn merge_nodes(&mut self, a: NodeId, b: NodeId) -> (NodeId, NodeId) {
        let (a, b) = (self.find_node(a), self.find_node(b));
        let (into, from) = (a.min(b), a.max(b));
        self.instance.merge_nodes(into, from);
        self.node_parent.insert(from, into);
        (into, from)
    }

    fn merge_values(&mut self, into: Value, from: Value) {
        self.instance.substitute(from, into);
        self.value_parent.insert(from, into);
    }

    fn apply(&mut self, effect: &StepEffect) {
        self.steps += 1;
        match effect {
            StepEffect::Facts { global, local, created } => {
                if let Some(n) = created {
                    debug_assert_eq!(n.0, self.next_node);
                    self.create_node();
                }
                for f in global {
                    self.instance.insert_global(f.clone());
                }
                for (n, f) in local {
                    self.instance.insert_local(*n, f.clone());
                }
            }
            StepEffect::MergeNodes { into, from } => {
                self.merge_nodes(*into, *from);
            }
            StepEffect::MergeValues { into, from } => self.merge_values(*into, *from),
            StepEffect::Fail(_) => {}
        }
    }
}

/// The id the next node-creating step will use.
pub fn fresh_node(state: &ChaseState) -> NodeId {
    NodeId(state.next_node)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Failure {
    /// A value-identifying degd equates two distinct values.
    Values(Value, Value),
    /// Identification would equate two distinct protected constants.
    Constants(Value, Value),
    /// A node-identifying degd equates two nodes under fail semantics.
    Nodes(NodeId, NodeId),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Values(a, b) => write!(f, "values {a} and {b} must be equal"),
            Failure::Constants(a, b) => write!(f, "constants {a} and {b} cannot be identified"),
            Failure::Nodes(a, b) => write!(f, "nodes @{a} and @{b} must be equal"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepEffect {
    /// `W(head)`: bare head facts and placed head facts, plus the node a
    /// node-creating step generated.
    Facts {
        global: Vec<Fact>,
        local: Vec<(NodeId, Fact)>,
        created: Option<NodeId>,
    },
    MergeNodes {
        into: NodeId,
        from: NodeId,
    },
    MergeValues {
        into: Value,
        from: Value,
    },
    Fail(Failure),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChaseStep {
    /// Index of the constraint in the input set.
    pub constraint: usize,
    /// Index of the head-normalized part of that constraint.
    pub part: usize,
    pub valuation: Valuation,
    pub effect: StepEffect,
}

impl fmt::Display for ChaseStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}.{} {} => ", self.constraint + 1, self.part + 1, self.valuation)?;
        match &self.effect {
            StepEffect::Facts { global, local, created } => {
                let mut items: Vec<String> = Vec::new();
                if let Some(n) = created {
                    items.push(format!("new @{n}"));
                }
                items.extend(global.iter().map(Fact::to_string));
                items.extend(local.iter().map(|(n, fact)| format!("{fact}@{n}")));
                f.write_str(&items.join(", "))
            }
            StepEffect::MergeNodes { into, from } => write!(f, "merge @{from} into @{into}"),
            StepEffect::MergeValues { into, from } => write!(f, "identify {from} with {into}"),
            StepEffect::Fail(why) => write!(f, "FAIL: {why}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    Success,
    /// Index of the failing step.
    Failed(usize),
}

#[derive(Clone, Debug)]
pub struct ChaseTrace {
    pub initial: DistributedInstance,
    pub steps: Vec<ChaseStep>,
    pub outcome: Outcome,
    pub state: ChaseState,
}

impl ChaseTrace {
    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::Success
    }

    pub fn final_instance(&self) -> &DistributedInstance {
        self.state.instance()
    }

    /// Re-executes the recorded effects from the initial instance.
    pub fn replay(&self) -> DistributedInstance {
        let mut state = ChaseState::new(self.initial.clone());
        for s in &self.steps {
            state.apply(&s.effect);
        }
        state.into_instance()
    }
}

struct Part {
    constraint: usize,
    part: usize,
    compiled: CompiledConstraint,
    rule: Constraint,
    /// Head variable of a node-creating dtgd.
    created: Option<Var>,
    body_relations: BTreeSet<Sym>,
}

fn compile_parts(sigma: &ConstraintSet) -> Result<Vec<Part>, ChaseError> {
    normalize_set(sigma)?
        .into_iter()
        .map(|p| {
            let created = match &p.rule {
                Constraint::Tgd(t) => node_created(t)?,
                Constraint::Egd(_) => None,
            };
            Ok(Part {
                constraint: p.constraint,
                part: p.part,
                compiled: CompiledConstraint::new(&p.rule),
                body_relations: p.rule.body().iter().map(|a| a.relation().clone()).collect(),
                rule: p.rule,
                created,
            })
        })
        .collect()
}

fn node_created(t: &Dtgd) -> Result<Option<Var>, ChaseError> {
    let mut heads = t.head_node_vars().into_iter();
    let k = heads.next();
    if heads.next().is_some() || (k.is_some() && t.head.iter().any(|a| !a.is_distributed())) {
        return Err(ChaseError::NotNormalized);
    }
    Ok(k.filter(|k| !t.body_node_vars().contains(k)))
}

/// Upper bound on the length of any chase sequence for `d` with `sigma`:
/// `|parts|·V^k·(N+1) + N + V`, where `V` counts the values available,
/// `k` the most data variables in one part and `N` the nodes that can
/// ever exist. The trailing terms cover merges.
pub fn step_budget(d: &DistributedInstance, sigma: &ConstraintSet) -> Result<u64, ChaseError> {
    let parts = normalize_set(sigma)?;
    let values: BTreeSet<Value> = d.adom().into_iter().chain(sigma.constants()).collect();
    let v = values.len() as u64;
    let k = parts.iter().map(|p| p.rule.body_data_vars().len()).max().unwrap_or(0) as u32;
    let vk = v.max(1).saturating_pow(k);
    let creating =
        parts.iter().filter(|p| p.rule.as_tgd().is_some_and(|t| !t.existential_node_vars().is_empty())).count() as u64;
    let n = (d.node_count() as u64).saturating_add(creating.saturating_mul(vk));
    Ok((parts.len() as u64).saturating_mul(vk).saturating_mul(n.saturating_add(1)).saturating_add(n).saturating_add(v))
}

fn budget_for(d: &DistributedInstance, sigma: &ConstraintSet, opts: &ChaseOptions) -> Result<u64, ChaseError> {
    if let Some(b) = opts.budget {
        return Ok(b);
    }
    if let Some(b) = std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse().ok()) {
        return Ok(b);
    }
    step_budget(d, sigma)
}

fn head_facts(rule: &Constraint, w: &Valuation) -> (Vec<Fact>, Vec<(NodeId, Fact)>) {
    let mut global = Vec::new();
    let mut local = Vec::new();
    if let Constraint::Tgd(t) = rule {
        for a in &t.head {
            match w.placed_fact(a).expect("head valuation is total") {
                (f, None) => global.push(f),
                (f, Some(n)) => local.push((n, f)),
            }
        }
    }
    (global, local)
}

fn decide_values(a: Value, b: Value, opts: &ChaseOptions) -> StepEffect {
    let (pa, pb) = (opts.protected.contains(&a), opts.protected.contains(&b));
    match (pa, pb) {
        (true, true) => StepEffect::Fail(Failure::Constants(a, b)),
        (true, false) => StepEffect::MergeValues { into: a, from: b },
        (false, true) => StepEffect::MergeValues { into: b, from: a },
        (false, false) => StepEffect::MergeValues { into: a.min(b), from: a.max(b) },
    }
}

/// First step of `part` on the current state, if any.
fn next_step(part: &Part, state: &ChaseState, index: &FactIndex<'_>, opts: &ChaseOptions) -> Option<ChaseStep> {
    let cc = &part.compiled;
    let mut found = None;
    let _ = cc.body.for_each(index, &cc.body.empty_binding(), |b| match &cc.head {
        CompiledHead::Atoms(_) => {
            if cc.head_holds(index, b) {
                return ControlFlow::Continue(());
            }
            let mut w = cc.body.to_valuation(b);
            let created = part.created.as_ref().map(|k| {
                let n = fresh_node(state);
                w.nodes.insert(k.clone(), n);
                n
            });
            let (global, local) = head_facts(&part.rule, &w);
            found = Some((w, StepEffect::Facts { global, local, created }));
            ControlFlow::Break(())
        }
        CompiledHead::Equal(i, j) => {
            let effect = match (b[*i], b[*j]) {
                (x, y) if x == y => return ControlFlow::Continue(()),
                (Some(Slot::Node(x)), Some(Slot::Node(y))) => match opts.node_semantics {
                    NodeSemantics::Merge => StepEffect::MergeNodes { into: x.min(y), from: x.max(y) },
                    NodeSemantics::Fail => StepEffect::Fail(Failure::Nodes(x, y)),
                },
                (Some(Slot::Data(x)), Some(Slot::Data(y))) => match opts.mode {
                    ChaseMode::Strict => StepEffect::Fail(Failure::Values(x, y)),
                    ChaseMode::Identify => decide_values(x, y, opts),
                },
                _ => unreachable!("degd sides share a sort"),
            };
            found = Some((cc.body.to_valuation(b), effect));
            ControlFlow::Break(())
        }
    });
    found.map(|(valuation, effect)| ChaseStep { constraint: part.constraint, part: part.part, valuation, effect })
}

/// Runs the strict chase with default options.
pub fn run_chase(d: &DistributedInstance, sigma: &ConstraintSet, mode: ChaseMode) -> Result<ChaseTrace, ChaseError> {
    run_chase_with(d, sigma, &ChaseOptions { mode, ..ChaseOptions::default() })
}

/// Computes a maximal chase sequence under the deterministic schedule.
pub fn run_chase_with(
    d: &DistributedInstance,
    sigma: &ConstraintSet,
    opts: &ChaseOptions,
) -> Result<ChaseTrace, ChaseError> {
    chase_state(ChaseState::new(d.clone()), sigma, opts)
}

/// Continues chasing from an existing state.
pub fn chase_state(state: ChaseState, sigma: &ConstraintSet, opts: &ChaseOptions) -> Result<ChaseTrace, ChaseError> {
    if opts.mode == ChaseMode::Identify && sigma.has_comparisons() {
        return Err(ChaseError::ComparisonsInIdentifyMode);
    }
    let parts = compile_parts(sigma)?;
    let budget = budget_for(state.instance(), sigma, opts)?;
    let initial = state.instance().clone();
    let mut state = state;
    let mut steps = Vec::new();
    let mut dirty = vec![true; parts.len()];
    let mut outcome = Outcome::Success;
    while let Some(i) = dirty.iter().position(|d| *d) {
        let step = {
            let index = FactIndex::new(state.instance());
            next_step(&parts[i], &state, &index, opts)
        };
        let Some(step) = step else {
            dirty[i] = false;
            continue;
        };
        if steps.len() as u64 >= budget {
            return Err(ChaseError::BudgetExceeded(budget));
        }
        state.apply(&step.effect);
        match &step.effect {
            StepEffect::Facts { global, local, .. } => {
                let touched: BTreeSet<&Sym> =
                    global.iter().chain(local.iter().map(|(_, f)| f)).map(|f| &f.relation).collect();
                for (j, p) in parts.iter().enumerate() {
                    if p.body_relations.iter().any(|r| touched.contains(r)) {
                        dirty[j] = true;
                    }
                }
            }
            StepEffect::MergeNodes { .. } | StepEffect::MergeValues { .. } => dirty.fill(true),
            StepEffect::Fail(_) => outcome = Outcome::Failed(steps.len()),
        }
        steps.push(step);
        if outcome != Outcome::Success {
            break;
        }
    }
    Ok(ChaseTrace { initial, steps, outcome, state })
}

fn single_part(sigma: &Dtgd) -> Result<Part, ChaseError> {
    let set = ConstraintSet::new(vec![sigma.clone().into()]).map_err(ChaseError::from)?;
    let mut parts = compile_parts(&set)?;
    if parts.len() != 1 {
        return Err(ChaseError::NotNormalized);
    }
    Ok(parts.remove(0))
}

/// Whether the head-normalized dtgd `sigma` can fire with `w` on `state`.
/// `w` must be total on the body; for a node-creating `sigma` it may bind
/// the head variable, which must then be the fresh node.
pub fn applicable(sigma: &Dtgd, w: &Valuation, state: &ChaseState) -> bool {
    let Ok(part) = single_part(sigma) else { return false };
    applicable_part(&part, w, state)
}

fn applicable_part(part: &Part, w: &Valuation, state: &ChaseState) -> bool {
    let cc = &part.compiled;
    let b = cc.body.binding_from_valuation(w);
    if b.iter().any(Option::is_none) {
        return false;
    }
    if let Some(k) = &part.created {
        if w.nodes.get(k).is_some_and(|n| *n != fresh_node(state)) {
            return false;
        }
    }
    let index = FactIndex::new(state.instance());
    cc.body.exists(&index, &b) && !cc.head_holds(&index, &b)
}

/// Applies `(sigma, w)` to `state`, binding a node-creating head variable to
/// the fresh node when `w` leaves it open.
pub fn apply_step(sigma: &Dtgd, w: &Valuation, state: &ChaseState) -> Result<ChaseState, ChaseError> {
    let part = single_part(sigma)?;
    if !applicable_part(&part, w, state) {
        return Err(ChaseError::NotApplicable);
    }
    let mut w = part.compiled.body.to_valuation(&part.compiled.body.binding_from_valuation(w));
    let created = part.created.as_ref().map(|k| {
        let n = fresh_node(state);
        w.nodes.insert(k.clone(), n);
        n
    });
    let (global, local) = head_facts(&part.rule, &w);
    let mut next = state.clone();
    next.apply(&StepEffect::Facts { global, local, created });
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::model_check;
    use crate::parser::{parse_constraints, parse_instance};

    fn tgd(text: &str) -> Dtgd {
        parse_constraints(text).unwrap().constraints()[0].as_tgd().unwrap().clone()
    }

    #[test]
    fn worked_step_example() {
        let sigma = tgd("R(x)@k, S(x,y)@l -> R(x)@m, S(x,y)@m.");
        let d = parse_instance("global {} local 1 { R(1) } local 2 { S(1,2) }").unwrap();
        let state = ChaseState::new(d);
        assert_eq!(fresh_node(&state), NodeId(3));
        let w =
            Valuation::new().with_data("x", 1).with_data("y", 2).with_node("k", 1).with_node("l", 2).with_node("m", 3);
        assert!(applicable(&sigma, &w, &state));
        assert!(!applicable(&sigma, &w.clone().with_node("m", 1), &state));
        let next = apply_step(&sigma, &w, &state).unwrap();
        assert!(next.instance().contains_local(NodeId(3), &Fact::new("R", [1])));
        assert!(next.instance().contains_local(NodeId(3), &Fact::new("S", [1, 2])));
        let w4 = w.clone().with_node("m", 4);
        assert!(!applicable(&sigma, &w4, &next));
        assert_eq!(apply_step(&sigma, &w4, &next), Err(ChaseError::NotApplicable));
    }

    #[test]
    fn global_head_only_grows_global() {
        let sigma = tgd("R(x) -> T(x).");
        let state = ChaseState::new(DistributedInstance::from_global([Fact::new("R", [5])]));
        let next = apply_step(&sigma, &Valuation::new().with_data("x", 5), &state).unwrap();
        assert!(next.instance().contains_global(&Fact::new("T", [5])));
        assert!(next.instance().local().is_empty());
        assert_eq!(next, apply_step(&sigma, &Valuation::new().with_data("x", 5), &state).unwrap());
    }

    #[test]
    fn fresh_ids_are_never_reused() {
        assert_eq!(fresh_node(&ChaseState::new(DistributedInstance::new())), NodeId(0));
        let d = parse_instance("global { R(1) } local 0 {} local 1 { R(1) } local 2 { R(1) }").unwrap();
        let sigma = parse_constraints("R(x)@k, R(x)@m -> k = m.").unwrap();
        let trace = run_chase(&d, &sigma, ChaseMode::Strict).unwrap();
        assert!(trace.succeeded());
        assert_eq!(trace.final_instance().nodes().collect::<Vec<_>>(), [NodeId(0), NodeId(1)]);
        assert_eq!(trace.state.find_node(NodeId(2)), NodeId(1));
        assert_eq!(fresh_node(&trace.state), NodeId(3));
        assert_eq!(trace.replay(), *trace.final_instance());
    }

    #[test]
    fn range_rules_colocate_messages() {
        let sigma = parse_constraints(
            "Range(l,u) -> Range(l,u)@k.\nMsg(s,r) -> Msg(s,r)@k.\n\
             Msg(s,r)@n, Range(l,u)@m, l <= s, s <= u -> Msg(s,r)@m.",
        )
        .unwrap();
        let d = parse_instance("global { Msg(1,9) Msg(2,9) Range(0,5) }").unwrap();
        let trace = run_chase(&d, &sigma, ChaseMode::Strict).unwrap();
        assert!(trace.succeeded());
        let fin = trace.final_instance();
        assert!(model_check(fin, &sigma).unwrap().is_empty());
        let range_node = fin.nodes().find(|n| fin.contains_local(*n, &Fact::new("Range", [0, 5]))).unwrap();
        assert!(fin.contains_local(range_node, &Fact::new("Msg", [1, 9])));
        assert!(fin.contains_local(range_node, &Fact::new("Msg", [2, 9])));
        assert_eq!(trace.replay(), *fin);
    }

    #[test]
    fn unique_salary_fails_strictly() {
        let sigma = parse_constraints("Sal(t,s), Sal(t,u) -> s = u.").unwrap();
        let d = parse_instance("global { Sal(7,1) Sal(7,2) }").unwrap();
        let trace = run_chase(&d, &sigma, ChaseMode::Strict).unwrap();
        assert_eq!(trace.outcome, Outcome::Failed(0));
        let ident = run_chase_with(&d, &sigma, &ChaseOptions::identify(BTreeSet::new())).unwrap();
        assert!(ident.succeeded());
        assert_eq!(ident.final_instance().global().len(), 1);
        let protected = [1, 2].map(Value::int).into();
        let clash = run_chase_with(&d, &sigma, &ChaseOptions::identify(protected)).unwrap();
        assert!(!clash.succeeded());
    }

    #[test]
    fn empty_sigma_and_fail_semantics() {
        let d = parse_instance("global { R(1) } local 0 { R(1) } local 1 { R(1) }").unwrap();
        let trace = run_chase(&d, &ConstraintSet::default(), ChaseMode::Strict).unwrap();
        assert!(trace.succeeded() && trace.steps.is_empty());
        let sigma = parse_constraints("R(x)@k, R(x)@m -> k = m.").unwrap();
        let opts = ChaseOptions { node_semantics: NodeSemantics::Fail, ..Default::default() };
        assert!(!run_chase_with(&d, &sigma, &opts).unwrap().succeeded());
    }

    #[test]
    fn budget_is_enforced() {
        let sigma = parse_constraints("R(x) -> R(x)@k.").unwrap();
        let d = parse_instance("global { R(1) R(2) }").unwrap();
        let opts = ChaseOptions { budget: Some(1), ..Default::default() };
        assert_eq!(run_chase_with(&d, &sigma, &opts).unwrap_err(), ChaseError::BudgetExceeded(1));
        assert!(step_budget(&d, &sigma).unwrap() >= 2);
    }

    #[test]
    fn identify_mode_rejects_comparisons() {
        let sigma = parse_constraints("R(x), x < 3 -> S(x).").unwrap();
        let r = run_chase_with(&DistributedInstance::new(), &sigma, &ChaseOptions::identify(BTreeSet::new()));
        assert_eq!(r.unwrap_err(), ChaseError::ComparisonsInIdentifyMode);
    }
}
