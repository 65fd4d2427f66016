//! Worst-case optimal strategy synthesis on the belief graph.
//!
//! [`synth_unbounded`] grows the winning set one belief at a time in
//! order of weight-to-go, Dijkstra style. [`synth_bounded`] performs
//! synchronous Bellman-Ford rounds, one per allowed step.

use alloc::vec;
use alloc::vec::Vec;

use crate::belief::{BeliefAction, BeliefEdge, BeliefGraph, BeliefId};
use crate::cost::{Cost, Value};
use crate::model::ModeId;
use crate::product::LabelingConvention;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    Unbounded,
    Bounded(u32),
}

/// A belief strategy with its weight-to-go table.
///
/// Unbounded strategies are memoryless. Bounded strategies additionally
/// keep, per belief, the rounds at which the choice improved, so the
/// command can depend on the number of steps left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub convention: LabelingConvention,
    pub init_mode: ModeId,
    pub init_cost: Cost,
    choice: Vec<Option<BeliefAction>>,
    wtg: Vec<Value>,
    /// `(round, choice)` in increasing round order; bounded only.
    revisions: Vec<Vec<(u32, BeliefAction)>>,
}

impl Strategy {
    /// A memoryless strategy from an explicit table. `wtg` may be left
    /// unknown (`Unreachable`) when the table is only meant to be verified.
    pub fn memoryless(
        graph: &BeliefGraph,
        kind: StrategyKind,
        choice: Vec<Option<BeliefAction>>,
        wtg: Vec<Value>,
    ) -> Strategy {
        assert_eq!(choice.len(), graph.len());
        assert_eq!(wtg.len(), graph.len());
        Strategy {
            kind,
            convention: graph.convention(),
            init_mode: graph.init_mode(),
            init_cost: graph.init_cost(),
            choice,
            wtg,
            revisions: Vec::new(),
        }
    }

    /// Rebuilds a strategy from serialized parts.
    pub fn from_parts(
        kind: StrategyKind,
        convention: LabelingConvention,
        init_mode: ModeId,
        init_cost: Cost,
        choice: Vec<Option<BeliefAction>>,
        wtg: Vec<Value>,
        revisions: Vec<Vec<(u32, BeliefAction)>>,
    ) -> Strategy {
        Strategy { kind, convention, init_mode, init_cost, choice, wtg, revisions }
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    /// The final choice at `b` (`C_k` for bounded strategies).
    pub fn choice(&self, b: BeliefId) -> Option<BeliefAction> {
        self.choice.get(b as usize).copied().flatten()
    }

    pub fn choices(&self) -> &[Option<BeliefAction>] {
        &self.choice
    }

    pub fn wtg(&self, b: BeliefId) -> Value {
        self.wtg.get(b as usize).copied().unwrap_or(Value::Unreachable)
    }

    pub fn wtg_table(&self) -> &[Value] {
        &self.wtg
    }

    pub fn revisions(&self) -> &[Vec<(u32, BeliefAction)>] {
        &self.revisions
    }

    /// The command at `b` after `taken` steps.
    pub fn command(&self, b: BeliefId, taken: u32) -> Option<BeliefAction> {
        match self.kind {
            StrategyKind::Unbounded => self.choice(b),
            StrategyKind::Bounded(k) => {
                if self.revisions.is_empty() {
                    return self.choice(b);
                }
                let remaining = k.checked_sub(taken)?;
                self.revisions
                    .get(b as usize)?
                    .iter()
                    .rev()
                    .find(|(round, _)| *round <= remaining)
                    .map(|(_, act)| *act)
            }
        }
    }

    /// Worst-case cost reported to users for a run starting at `b_init`.
    ///
    /// With target labeling this includes the initial configuration's mode
    /// cost; with source labeling it is the raw weight-to-go.
    pub fn reported_total(&self, b_init: BeliefId) -> Value {
        let w = self.wtg(b_init);
        match self.convention {
            LabelingConvention::Target => w.plus(self.init_cost),
            LabelingConvention::Source => w,
        }
    }
}

/// One round of either algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub round: u32,
    /// Beliefs whose value changed this round, with the new choice and value.
    pub updated: Vec<(BeliefId, BeliefAction, Value)>,
    /// Beliefs with finite weight-to-go after the round.
    pub winning: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynthesisTrace {
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no suitable strategy exists{}", match .bound { Some(k) => alloc::format!(" for bound {k}"), None => alloc::string::String::new() })]
pub struct Infeasible {
    pub bound: Option<u32>,
    pub trace: SynthesisTrace,
}

#[derive(Clone, Debug)]
pub struct Synthesis {
    pub strategy: Strategy,
    pub trace: SynthesisTrace,
}

fn edge_value(edge: &BeliefEdge, wtg: &[Value]) -> Value {
    let worst = edge.successors.iter().map(|(_, s)| wtg[*s as usize]).max().unwrap_or(Value::Unreachable);
    worst.plus(edge.weight)
}

/// Unbounded synthesis, stopping as soon as the initial belief is won.
pub fn synth_unbounded(graph: &BeliefGraph) -> Result<Synthesis, Infeasible> {
    run_unbounded(graph, true)
}

/// Unbounded synthesis on the whole graph, so that every winning belief
/// gets its optimal weight-to-go.
pub fn synth_unbounded_full(graph: &BeliefGraph) -> Result<Synthesis, Infeasible> {
    run_unbounded(graph, false)
}

fn run_unbounded(graph: &BeliefGraph, early_exit: bool) -> Result<Synthesis, Infeasible> {
    let n = graph.len();
    let mut wtg = vec![Value::Unreachable; n];
    let mut won = vec![false; n];
    let mut choice = vec![None; n];
    for b in graph.ids() {
        if graph.is_accepting(b) {
            wtg[b as usize] = Value::ZERO;
            won[b as usize] = true;
        }
    }
    let mut winning = won.iter().filter(|w| **w).count();
    let mut trace = SynthesisTrace::default();
    let mut round = 0;

    while !(early_exit && won[graph.init() as usize]) {
        // lexicographic (value, belief, action, mode) minimum; beliefs and
        // edges are scanned in that order so strict `<` is enough
        let mut best: Option<(Value, BeliefId, BeliefAction)> = None;
        for b in graph.ids() {
            if won[b as usize] {
                continue;
            }
            for edge in graph.edges(b) {
                if !edge.successors.iter().all(|(_, s)| won[*s as usize]) {
                    continue;
                }
                let delta = edge_value(edge, &wtg);
                if best.is_none_or(|(v, _, _)| delta < v) {
                    best = Some((delta, b, edge.action));
                }
            }
        }
        let Some((delta, b, act)) = best else { break };
        round += 1;
        wtg[b as usize] = delta;
        won[b as usize] = true;
        choice[b as usize] = Some(act);
        winning += 1;
        trace.steps.push(TraceStep { round, updated: vec![(b, act, delta)], winning });
    }

    if !won[graph.init() as usize] {
        return Err(Infeasible { bound: None, trace });
    }
    let strategy = Strategy {
        kind: StrategyKind::Unbounded,
        convention: graph.convention(),
        init_mode: graph.init_mode(),
        init_cost: graph.init_cost(),
        choice,
        wtg,
        revisions: Vec::new(),
    };
    Ok(Synthesis { strategy, trace })
}

struct BoundedRun {
    wtg: Vec<Value>,
    choice: Vec<Option<BeliefAction>>,
    revisions: Vec<Vec<(u32, BeliefAction)>>,
    trace: SynthesisTrace,
    /// `wtg(b_init)` after rounds `0..=rounds`.
    init_history: Vec<Value>,
}

fn run_bounded(graph: &BeliefGraph, k: u32) -> BoundedRun {
    let n = graph.len();
    let mut wtg: Vec<Value> = graph
        .ids()
        .map(|b| if graph.is_accepting(b) { Value::ZERO } else { Value::Unreachable })
        .collect();
    let mut choice = vec![None; n];
    let mut revisions = vec![Vec::new(); n];
    let mut trace = SynthesisTrace::default();
    let mut init_history = vec![wtg[graph.init() as usize]];
    let cap = (n as u32).saturating_sub(1);

    for round in 1..=k {
        // phase one reads only the previous round's values
        let mut updates = Vec::new();
        for b in graph.ids() {
            if graph.is_accepting(b) {
                continue;
            }
            let mut best: Option<(Value, BeliefAction)> = None;
            for edge in graph.edges(b) {
                let delta = edge_value(edge, &wtg);
                if best.is_none_or(|(v, _)| delta < v) {
                    best = Some((delta, edge.action));
                }
            }
            if let Some((delta, act)) = best {
                if delta < wtg[b as usize] {
                    updates.push((b, act, delta));
                }
            }
        }
        // phase two commits; beliefs that did not improve keep their choice
        for &(b, act, delta) in &updates {
            wtg[b as usize] = delta;
            choice[b as usize] = Some(act);
            revisions[b as usize].push((round, act));
        }
        let changed = !updates.is_empty();
        let winning = wtg.iter().filter(|v| v.is_finite()).count();
        trace.steps.push(TraceStep { round, updated: updates, winning });
        init_history.push(wtg[graph.init() as usize]);
        if !changed || round >= cap {
            break;
        }
    }
    BoundedRun { wtg, choice, revisions, trace, init_history }
}

/// Cheapest strategy that reaches an accepting belief within `k` steps.
pub fn synth_bounded(graph: &BeliefGraph, k: u32) -> Result<Synthesis, Infeasible> {
    let run = run_bounded(graph, k);
    if !run.wtg[graph.init() as usize].is_finite() {
        return Err(Infeasible { bound: Some(k), trace: run.trace });
    }
    let strategy = Strategy {
        kind: StrategyKind::Bounded(k),
        convention: graph.convention(),
        init_mode: graph.init_mode(),
        init_cost: graph.init_cost(),
        choice: run.choice,
        wtg: run.wtg,
        revisions: run.revisions,
    };
    Ok(Synthesis { strategy, trace: run.trace })
}

/// `wtg(b_init)` for every bound `1..=k_max`, from a single bounded run.
pub fn wtg_profile(graph: &BeliefGraph, k_max: u32) -> Vec<Value> {
    let run = run_bounded(graph, k_max);
    let last = *run.init_history.last().expect("round zero is recorded");
    (1..=k_max as usize).map(|k| run.init_history.get(k).copied().unwrap_or(last)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{build_belief, BeliefOptions};
    use crate::dfa::compile_to_dfa;
    use crate::formula::{parse_formula, ApSet};
    use crate::model::tests::running_example;
    use crate::model::NtsModel;
    use crate::product::build_product;

    fn graph(conv: LabelingConvention) -> (NtsModel, BeliefGraph) {
        let m = running_example();
        let ap = ApSet::new(m.propositions().iter().cloned());
        let dfa = compile_to_dfa(&parse_formula("F star", &ap).unwrap(), &ap).unwrap();
        let p = build_product(&m, &dfa, conv).unwrap();
        let g = build_belief(&m, &p, BeliefOptions::default());
        (m, g)
    }

    fn act(m: &NtsModel, a: &str, mode: &str) -> BeliefAction {
        BeliefAction { action: m.action_id(a).unwrap(), mode: m.mode_id(mode).unwrap() }
    }

    #[test]
    fn unbounded_optimum_is_one() {
        let (m, g) = graph(LabelingConvention::Target);
        let s = synth_unbounded(&g).unwrap().strategy;
        assert_eq!(s.wtg(g.init()), Value::Finite(Cost::integer(1)));
        assert_eq!(s.reported_total(g.init()), Value::Finite(Cost::integer(1)));
        assert_eq!(s.choice(g.init()), Some(act(&m, "a", "m2")));
    }

    #[test]
    fn two_step_bound_costs_two() {
        let (m, g) = graph(LabelingConvention::Target);
        let s = synth_bounded(&g, 2).unwrap().strategy;
        assert_eq!(s.wtg(g.init()), Value::Finite(Cost::integer(2)));
        assert_eq!(s.command(g.init(), 0), Some(act(&m, "a", "m3")));
        assert!(synth_bounded(&g, 1).is_err());
    }

    #[test]
    fn unbounded_values_never_decrease_across_rounds() {
        let (_, g) = graph(LabelingConvention::Target);
        let trace = synth_unbounded_full(&g).unwrap().trace;
        let deltas: Vec<Value> = trace.steps.iter().map(|s| s.updated[0].2).collect();
        assert!(deltas.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn profile_is_monotone_and_stabilizes() {
        let (_, g) = graph(LabelingConvention::Target);
        let profile = wtg_profile(&g, 6);
        assert_eq!(profile[0], Value::Unreachable);
        assert_eq!(profile[1], Value::Finite(Cost::integer(2)));
        assert!(profile.windows(2).all(|w| w[1] <= w[0]));
        let full = synth_unbounded(&g).unwrap().strategy;
        assert_eq!(*profile.last().unwrap(), full.wtg(g.init()));
        let cap = g.len() as u32 - 1;
        let at_cap = synth_bounded(&g, cap).unwrap().strategy;
        assert_eq!(at_cap.wtg(g.init()), full.wtg(g.init()));
    }

    #[test]
    fn accepting_start_needs_no_choice() {
        let mut raw = running_example().to_raw();
        raw.init = "s6".into();
        let m = crate::model::validate_model(&raw).unwrap();
        let ap = ApSet::new(m.propositions().iter().cloned());
        let dfa = compile_to_dfa(&parse_formula("F star", &ap).unwrap(), &ap).unwrap();
        let p = build_product(&m, &dfa, LabelingConvention::Target).unwrap();
        let g = build_belief(&m, &p, BeliefOptions::default());
        let s = synth_unbounded(&g).unwrap().strategy;
        assert_eq!(s.wtg(g.init()), Value::ZERO);
        assert!(s.choices().iter().all(Option::is_none));
        assert_eq!(wtg_profile(&g, 3), vec![Value::ZERO; 3]);
    }
}
