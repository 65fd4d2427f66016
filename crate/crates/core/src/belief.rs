//! Weighted belief product over a [`Product`].
//!
//! A belief is the set of product states consistent with what the
//! controller has observed. From a belief the controller picks an action
//! and the observation mode to run during the next step; the adversary
//! picks a successor, which the controller only learns through the
//! observation produced by that mode.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use crate::cost::Cost;
use crate::model::{ActionId, ModeId, NtsModel, ObsSet};
use crate::product::{LabelingConvention, Product, ProductId};

pub type BeliefId = u32;

/// A belief-level action: move with `action`, then observe with `mode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeliefAction {
    pub action: ActionId,
    pub mode: ModeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefEdge {
    pub action: BeliefAction,
    pub weight: Cost,
    /// One successor per observation, sorted by belief contents.
    pub successors: Vec<(ObsSet, BeliefId)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BeliefOptions {
    /// Also expand beliefs none of whose members can still change their
    /// acceptance status (all accepting or dead). Such beliefs are either
    /// accepting or can never become accepting, so expanding them does not
    /// affect synthesis.
    pub expand_settled: bool,
}

#[derive(Clone, Debug)]
pub struct BeliefGraph {
    beliefs: Vec<Vec<ProductId>>,
    accepting: Vec<bool>,
    edges: Vec<Vec<BeliefEdge>>,
    index: BTreeMap<Vec<ProductId>, BeliefId>,
    convention: LabelingConvention,
    init_mode: ModeId,
    init_cost: Cost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BeliefStats {
    pub state_count: usize,
    /// `(belief, action, mode)` triples.
    pub transition_count: usize,
    /// `(belief, action, mode, successor)` edges.
    pub edge_count: usize,
}

/// Successor beliefs of `members` under `(action, mode)`, grouped by the
/// observation each successor state yields. `None` when some member has
/// the action disabled.
pub fn belief_successors(
    model: &NtsModel,
    product: &Product,
    members: &[ProductId],
    act: BeliefAction,
) -> Option<Vec<(ObsSet, Vec<ProductId>)>> {
    let mut groups: BTreeMap<&ObsSet, Vec<ProductId>> = BTreeMap::new();
    for &p in members {
        let next = product.post(p, act.action);
        if next.is_empty() {
            return None;
        }
        for &t in next {
            let obs = model.observe(act.mode, product.state(t).state);
            groups.entry(obs).or_default().push(t);
        }
    }
    let mut out: Vec<(ObsSet, Vec<ProductId>)> = groups
        .into_iter()
        .map(|(o, mut ms)| {
            ms.sort_unstable();
            ms.dedup();
            (o.clone(), ms)
        })
        .collect();
    out.sort_by(|x, y| x.1.cmp(&y.1));
    Some(out)
}

pub fn build_belief(model: &NtsModel, product: &Product, options: BeliefOptions) -> BeliefGraph {
    let mut g = BeliefGraph {
        beliefs: Vec::new(),
        accepting: Vec::new(),
        edges: Vec::new(),
        index: BTreeMap::new(),
        convention: product.convention(),
        init_mode: model.init_mode(),
        init_cost: model.cost(model.init_mode()),
    };
    let mut queue = VecDeque::new();
    g.intern(product, alloc::vec![product.init()], &mut queue);

    while let Some(b) = queue.pop_front() {
        let members = g.beliefs[b as usize].clone();
        let settled = members.iter().all(|&p| product.is_accepting(p) || product.is_dead(p));
        if settled && !options.expand_settled {
            continue;
        }
        let mut edges = Vec::new();
        for action in model.action_ids() {
            for mode in model.mode_ids() {
                let act = BeliefAction { action, mode };
                let Some(groups) = belief_successors(model, product, &members, act) else {
                    continue;
                };
                let successors = groups
                    .into_iter()
                    .map(|(o, ms)| (o, g.intern(product, ms, &mut queue)))
                    .collect();
                edges.push(BeliefEdge { action: act, weight: model.cost(mode), successors });
            }
        }
        g.edges[b as usize] = edges;
    }
    g
}

impl BeliefGraph {
    fn intern(
        &mut self,
        product: &Product,
        members: Vec<ProductId>,
        queue: &mut VecDeque<BeliefId>,
    ) -> BeliefId {
        if let Some(id) = self.index.get(&members) {
            return *id;
        }
        let id = self.beliefs.len() as BeliefId;
        self.accepting.push(members.iter().all(|&p| product.is_accepting(p)));
        self.index.insert(members.clone(), id);
        self.beliefs.push(members);
        self.edges.push(Vec::new());
        queue.push_back(id);
        id
    }

    pub fn convention(&self) -> LabelingConvention {
        self.convention
    }

    pub fn init_mode(&self) -> ModeId {
        self.init_mode
    }

    /// `g_{m_init}`, charged once for the initial configuration.
    pub fn init_cost(&self) -> Cost {
        self.init_cost
    }

    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn init(&self) -> BeliefId {
        0
    }

    pub fn members(&self, b: BeliefId) -> &[ProductId] {
        &self.beliefs[b as usize]
    }

    pub fn id_of(&self, members: &[ProductId]) -> Option<BeliefId> {
        self.index.get(members).copied()
    }

    pub fn is_accepting(&self, b: BeliefId) -> bool {
        self.accepting[b as usize]
    }

    pub fn edges(&self, b: BeliefId) -> &[BeliefEdge] {
        &self.edges[b as usize]
    }

    pub fn edge(&self, b: BeliefId, act: BeliefAction) -> Option<&BeliefEdge> {
        self.edges[b as usize].iter().find(|e| e.action == act)
    }

    pub fn ids(&self) -> impl Iterator<Item = BeliefId> {
        0..self.beliefs.len() as BeliefId
    }

    pub fn stats(&self) -> BeliefStats {
        BeliefStats {
            state_count: self.beliefs.len(),
            transition_count: self.edges.iter().map(Vec::len).sum(),
            edge_count: self.edges.iter().flatten().map(|e| e.successors.len()).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfa::compile_to_dfa;
    use crate::formula::{parse_formula, ApSet};
    use crate::model::tests::running_example;
    use crate::product::{build_product, LabelingConvention};
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn setup() -> (NtsModel, Product) {
        let m = running_example();
        let ap = ApSet::new(m.propositions().iter().cloned());
        let dfa = compile_to_dfa(&parse_formula("F star", &ap).unwrap(), &ap).unwrap();
        let p = build_product(&m, &dfa, LabelingConvention::Target).unwrap();
        (m, p)
    }

    fn act(m: &NtsModel, a: &str, mode: &str) -> BeliefAction {
        BeliefAction { action: m.action_id(a).unwrap(), mode: m.mode_id(mode).unwrap() }
    }

    #[test]
    fn blind_mode_keeps_one_belief() {
        let (m, p) = setup();
        let succ = belief_successors(&m, &p, &[p.init()], act(&m, "a", "m1")).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1.len(), 3);
        assert!(succ[0].0.is_empty());
    }

    #[test]
    fn richer_modes_split_finer() {
        let (m, p) = setup();
        let by_shape = belief_successors(&m, &p, &[p.init()], act(&m, "a", "m2")).unwrap();
        let by_colour = belief_successors(&m, &p, &[p.init()], act(&m, "a", "m3")).unwrap();
        assert_eq!(by_shape.len(), 2);
        assert_eq!(by_colour.len(), 3);
        assert!(by_colour.iter().all(|(_, ms)| ms.len() == 1));
    }

    #[test]
    fn disabled_action_is_not_offered() {
        let (m, p) = setup();
        assert!(belief_successors(&m, &p, &[p.init()], act(&m, "b", "m1")).is_none());
    }

    // Every belief reachable in the graph is a subset of product states;
    // recompute the reachable set by brute force over subsets.
    #[test]
    fn matches_naive_subset_exploration() {
        let (m, p) = setup();
        let g = build_belief(&m, &p, BeliefOptions { expand_settled: true });
        let n = p.len();
        assert!(n <= 16);
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        let mut stack = vec![1u32 << p.init()];
        while let Some(mask) = stack.pop() {
            if !seen.insert(mask) {
                continue;
            }
            let members: Vec<ProductId> = (0..n as u32).filter(|i| mask & (1 << i) != 0).collect();
            for a in m.action_ids() {
                if members.iter().any(|&x| p.post(x, a).is_empty()) {
                    continue;
                }
                for mode in m.mode_ids() {
                    for target in 0..n as u32 {
                        let reach = members.iter().any(|&x| p.post(x, a).contains(&target));
                        if !reach {
                            continue;
                        }
                        let o = m.observe(mode, p.state(target).state);
                        let mut next = 0u32;
                        for &x in &members {
                            for &t in p.post(x, a) {
                                if m.observe(mode, p.state(t).state) == o {
                                    next |= 1 << t;
                                }
                            }
                        }
                        stack.push(next);
                    }
                }
            }
        }
        assert_eq!(seen.len(), g.len());
        for mask in seen {
            let members: Vec<ProductId> = (0..n as u32).filter(|i| mask & (1 << i) != 0).collect();
            assert!(g.id_of(&members).is_some());
        }
    }

    #[test]
    fn settled_beliefs_are_not_expanded_by_default() {
        let (m, p) = setup();
        let g = build_belief(&m, &p, BeliefOptions::default());
        for b in g.ids() {
            if g.is_accepting(b) {
                assert!(g.edges(b).is_empty());
            }
        }
        assert_eq!(g.stats().state_count, g.len());
    }
}
