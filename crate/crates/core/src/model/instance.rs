use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::syntax::{NodeId, Schema, Sym};
use super::value::{Domain, Value};
use super::ModelError;

/// A ground relation atom.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub relation: Sym,
    pub values: Vec<Value>,
}

impl Fact {
    pub fn new(relation: &str, values: impl IntoIterator<Item = i64>) -> Self {
        Fact { relation: Sym::new(relation), values: values.into_iter().map(Value::int).collect() }
    }

    pub fn from_values(relation: Sym, values: Vec<Value>) -> Self {
        Fact { relation, values }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A global fact set plus per-node local fact sets.
///
/// Invariant: every local fact is also global. Nodes may hold no facts.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct DistributedInstance {
    global: BTreeSet<Fact>,
    local: BTreeMap<NodeId, BTreeSet<Fact>>,
}

impl DistributedInstance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an instance from explicit parts, checking the subset invariant.
    pub fn from_parts(global: BTreeSet<Fact>, local: BTreeMap<NodeId, BTreeSet<Fact>>) -> Result<Self, ModelError> {
        for (node, facts) in &local {
            if let Some(f) = facts.iter().find(|f| !global.contains(*f)) {
                return Err(ModelError::SubsetViolation { node: *node, fact: f.clone() });
            }
        }
        Ok(DistributedInstance { global, local })
    }

    /// An instance with the given global facts and no nodes.
    pub fn from_global(global: impl IntoIterator<Item = Fact>) -> Self {
        DistributedInstance { global: global.into_iter().collect(), local: BTreeMap::new() }
    }

    pub fn global(&self) -> &BTreeSet<Fact> {
        &self.global
    }

    pub fn local(&self) -> &BTreeMap<NodeId, BTreeSet<Fact>> {
        &self.local
    }

    pub fn facts_at(&self, node: NodeId) -> Option<&BTreeSet<Fact>> {
        self.local.get(&node)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.local.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.local.len()
    }

    pub fn max_node(&self) -> Option<NodeId> {
        self.local.keys().next_back().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty() && self.local.is_empty()
    }

    pub fn contains_global(&self, fact: &Fact) -> bool {
        self.global.contains(fact)
    }

    pub fn contains_local(&self, node: NodeId, fact: &Fact) -> bool {
        self.local.get(&node).is_some_and(|s| s.contains(fact))
    }

    /// Returns whether the fact is new.
    pub fn insert_global(&mut self, fact: Fact) -> bool {
        self.global.insert(fact)
    }

    /// Places `fact` at `node`, adding it globally too. Returns whether the
    /// local set changed.
    pub fn insert_local(&mut self, node: NodeId, fact: Fact) -> bool {
        if !self.global.contains(&fact) {
            self.global.insert(fact.clone());
        }
        self.local.entry(node).or_default().insert(fact)
    }

    pub fn add_node(&mut self, node: NodeId) {
        self.local.entry(node).or_default();
    }

    /// Moves all facts of `from` to `into` and drops `from`.
    pub fn merge_nodes(&mut self, into: NodeId, from: NodeId) {
        if into == from {
            return;
        }
        let moved = self.local.remove(&from).unwrap_or_default();
        self.local.entry(into).or_default().extend(moved);
    }

    /// Global facts that occur at no node.
    pub fn skipped(&self) -> BTreeSet<&Fact> {
        let placed: BTreeSet<&Fact> = self.local.values().flatten().collect();
        self.global.iter().filter(|f| !placed.contains(f)).collect()
    }

    /// All values occurring in the instance.
    pub fn adom(&self) -> BTreeSet<Value> {
        self.global.iter().flat_map(|f| f.values.iter().copied()).collect()
    }

    /// Replaces every occurrence of value `from` by `to`.
    pub fn substitute(&mut self, from: Value, to: Value) {
        let swap = |f: &Fact| Fact {
            relation: f.relation.clone(),
            values: f.values.iter().map(|v| if *v == from { to } else { *v }).collect(),
        };
        self.global = self.global.iter().map(swap).collect();
        for facts in self.local.values_mut() {
            *facts = facts.iter().map(swap).collect();
        }
    }

    /// Collects the symbols used, rejecting inconsistent arities.
    pub fn schema(&self) -> Result<Schema, ModelError> {
        let mut schema = Schema::new();
        for f in &self.global {
            match schema.get(&f.relation) {
                Some(&n) if n != f.values.len() => {
                    return Err(ModelError::ArityMismatch {
                        relation: f.relation.clone(),
                        expected: n,
                        found: f.values.len(),
                    })
                }
                _ => {
                    schema.insert(f.relation.clone(), f.values.len());
                }
            }
        }
        Ok(schema)
    }

    pub fn check_domain(&self, domain: Domain) -> Result<(), ModelError> {
        match self.adom().into_iter().find(|v| !domain.contains(*v)) {
            Some(value) => Err(ModelError::DomainMismatch { value, domain }),
            None => Ok(()),
        }
    }

    /// Renumbers nodes to `0..n` in ascending order of their current ids.
    pub fn compact_nodes(&self) -> DistributedInstance {
        let local = self.local.values().enumerate().map(|(i, facts)| (NodeId(i as u32), facts.clone())).collect();
        DistributedInstance { global: self.global.clone(), local }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_insert_keeps_subset_invariant() {
        let mut d = DistributedInstance::new();
        assert!(d.insert_local(NodeId(1), Fact::new("R", [1, 2])));
        assert!(d.contains_global(&Fact::new("R", [1, 2])));
        assert!(!d.insert_local(NodeId(1), Fact::new("R", [1, 2])));
        assert!(d.insert_local(NodeId(2), Fact::new("R", [1, 2])));
        assert_eq!(d.global().len(), 1);
    }

    #[test]
    fn from_parts_rejects_local_only_facts() {
        let local = BTreeMap::from([(NodeId(0), BTreeSet::from([Fact::new("S", [4])]))]);
        assert!(matches!(
            DistributedInstance::from_parts(BTreeSet::new(), local),
            Err(ModelError::SubsetViolation { .. })
        ));
    }

    #[test]
    fn skipped_facts_and_merges() {
        let mut d = DistributedInstance::from_global([Fact::new("S", [1]), Fact::new("S", [2])]);
        d.insert_local(NodeId(0), Fact::new("S", [1]));
        d.insert_local(NodeId(3), Fact::new("T", [5]));
        assert_eq!(d.skipped().into_iter().cloned().collect::<Vec<_>>(), vec![Fact::new("S", [2])]);
        d.merge_nodes(NodeId(0), NodeId(3));
        assert_eq!(d.node_count(), 1);
        assert!(d.contains_local(NodeId(0), &Fact::new("T", [5])));
    }

    #[test]
    fn substitution_rewrites_every_fact() {
        let mut d = DistributedInstance::new();
        d.insert_local(NodeId(0), Fact::new("R", [1, 2]));
        d.substitute(Value::int(2), Value::int(1));
        assert!(d.contains_local(NodeId(0), &Fact::new("R", [1, 1])));
        assert_eq!(d.adom(), BTreeSet::from([Value::int(1)]));
    }
}
