//! Brute-force checks of synthesized strategies.
//!
//! [`verify_strategy`] plays the strategy against every resolution of the
//! non-determinism and decides satisfaction from the propositional trace
//! alone. [`backward_induction_value`] computes optimal belief-game values
//! by plain value iteration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::belief::{belief_successors, BeliefGraph, BeliefId};
use crate::cost::{Cost, Value};
use crate::formula::{expand_bounded, holds_strong, Formula};
use crate::model::{ModeId, NtsModel, PropSet, StateId};
use crate::product::{LabelingConvention, Product, ProductId};
use crate::synthesis::{Strategy, StrategyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Distinct nodes explored before giving up.
    pub node_budget: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { node_budget: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub satisfies: bool,
    /// Same reporting convention as [`Strategy::reported_total`].
    pub worst_case_cost: Value,
    /// Largest number of transitions before satisfaction over all branches.
    pub worst_case_steps: Option<u32>,
    /// A run attaining `worst_case_cost`; among those, one with the most
    /// steps, then the lexicographically least by state index.
    pub witness: Vec<(StateId, ModeId)>,
    /// Every visited node's DFA acceptance agreed with the trace check.
    pub dfa_agrees: bool,
    pub nodes: usize,
    pub budget_exhausted: bool,
}

impl VerificationReport {
    pub fn witness_steps(&self) -> usize {
        self.witness.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy, Debug)]
enum Outcome {
    Fail,
    Sat {
        cost: Cost,
        /// length of the witness continuation
        witness_steps: u32,
        max_steps: u32,
        /// `(successor, next belief)` on the witness path
        next: Option<(ProductId, BeliefId, ModeId)>,
    },
}

type Key = (ProductId, BeliefId, u32);

struct Explorer<'a> {
    model: &'a NtsModel,
    product: &'a Product,
    graph: &'a BeliefGraph,
    strategy: &'a Strategy,
    formula: Formula,
    budget: usize,
    memo: BTreeMap<Key, Outcome>,
    on_stack: BTreeSet<Key>,
    trace: Vec<PropSet>,
    dfa_agrees: bool,
    exhausted: bool,
}

impl<'a> Explorer<'a> {
    fn satisfied(&self) -> bool {
        let word = match self.product.convention() {
            LabelingConvention::Target => &self.trace[..],
            LabelingConvention::Source => &self.trace[..self.trace.len() - 1],
        };
        holds_strong(word, &self.formula)
    }

    fn key(&self, p: ProductId, b: BeliefId, taken: u32) -> Key {
        match self.strategy.kind {
            StrategyKind::Unbounded => (p, b, 0),
            StrategyKind::Bounded(_) => (p, b, taken),
        }
    }

    fn visit(&mut self, p: ProductId, b: BeliefId, taken: u32) -> Outcome {
        let sat = self.satisfied();
        if sat != self.product.is_accepting(p) {
            self.dfa_agrees = false;
        }
        if sat {
            return Outcome::Sat { cost: Cost::ZERO, witness_steps: 0, max_steps: 0, next: None };
        }
        let key = self.key(p, b, taken);
        if let Some(o) = self.memo.get(&key) {
            return *o;
        }
        if self.on_stack.contains(&key) {
            // the adversary can repeat this loop forever
            return Outcome::Fail;
        }
        if self.memo.len() + self.on_stack.len() >= self.budget {
            self.exhausted = true;
            return Outcome::Fail;
        }
        self.on_stack.insert(key);
        let outcome = self.expand(p, b, taken);
        self.on_stack.remove(&key);
        self.memo.insert(key, outcome);
        outcome
    }

    fn expand(&mut self, p: ProductId, b: BeliefId, taken: u32) -> Outcome {
        let Some(act) = self.strategy.command(b, taken) else {
            return Outcome::Fail;
        };
        let members = self.graph.members(b);
        let Some(groups) = belief_successors(self.model, self.product, members, act) else {
            return Outcome::Fail;
        };
        let weight = self.model.cost(act.mode);
        let mut succ: Vec<ProductId> = self.product.post(p, act.action).to_vec();
        succ.sort_by_key(|t| self.product.state(*t).state);

        let mut best: Option<(Cost, u32, ProductId, BeliefId)> = None;
        let mut max_steps = 0;
        for t in succ {
            let s = self.product.state(t).state;
            let obs = self.model.observe(act.mode, s);
            let Some((_, next_members)) = groups.iter().find(|(o, ms)| o == obs && ms.contains(&t))
            else {
                return Outcome::Fail;
            };
            let Some(nb) = self.graph.id_of(next_members) else {
                return Outcome::Fail;
            };
            self.trace.push(self.model.label(s));
            let child = self.visit(t, nb, taken + 1);
            self.trace.pop();
            let Outcome::Sat { cost, witness_steps, max_steps: m, .. } = child else {
                return Outcome::Fail;
            };
            let cand = (cost + weight, witness_steps + 1);
            max_steps = max_steps.max(m + 1);
            if best.is_none_or(|(c, w, _, _)| cand > (c, w)) {
                best = Some((cand.0, cand.1, t, nb));
            }
        }
        match best {
            Some((cost, witness_steps, t, nb)) => Outcome::Sat {
                cost,
                witness_steps,
                max_steps,
                next: Some((t, nb, act.mode)),
            },
            None => Outcome::Fail,
        }
    }
}

/// Exhaustively plays `strategy` from the initial configuration.
///
/// Satisfaction is decided by strong finite-word semantics on the labels of
/// the visited states; with source labeling a prefix counts one step later,
/// once its successor has been entered.
pub fn verify_strategy(
    model: &NtsModel,
    formula: &Formula,
    product: &Product,
    graph: &BeliefGraph,
    strategy: &Strategy,
    options: VerifyOptions,
) -> VerificationReport {
    let mut ex = Explorer {
        model,
        product,
        graph,
        strategy,
        formula: expand_bounded(formula),
        budget: options.node_budget,
        memo: BTreeMap::new(),
        on_stack: BTreeSet::new(),
        trace: vec![model.label(model.init())],
        dfa_agrees: true,
        exhausted: false,
    };
    let root = ex.visit(product.init(), graph.init(), 0);
    let nodes = ex.memo.len();
    match root {
        Outcome::Fail => VerificationReport {
            satisfies: false,
            worst_case_cost: Value::Unreachable,
            worst_case_steps: None,
            witness: Vec::new(),
            dfa_agrees: ex.dfa_agrees,
            nodes,
            budget_exhausted: ex.exhausted,
        },
        Outcome::Sat { cost, max_steps, .. } => {
            let mut witness = vec![(model.init(), model.init_mode())];
            let (mut p, mut b, mut taken) = (product.init(), graph.init(), 0);
            loop {
                let key = ex.key(p, b, taken);
                let Some(Outcome::Sat { next: Some((t, nb, m)), .. }) = ex.memo.get(&key) else {
                    break;
                };
                witness.push((product.state(*t).state, *m));
                (p, b, taken) = (*t, *nb, taken + 1);
                // stop where the trace first became good
                let trace: Vec<PropSet> = witness.iter().map(|(s, _)| model.label(*s)).collect();
                let word = match product.convention() {
                    LabelingConvention::Target => &trace[..],
                    LabelingConvention::Source => &trace[..trace.len() - 1],
                };
                if holds_strong(word, &ex.formula) {
                    break;
                }
            }
            let total = match product.convention() {
                LabelingConvention::Target => cost + strategy.init_cost,
                LabelingConvention::Source => cost,
            };
            VerificationReport {
                satisfies: true,
                worst_case_cost: Value::Finite(total),
                worst_case_steps: Some(max_steps),
                witness,
                dfa_agrees: ex.dfa_agrees,
                nodes,
                budget_exhausted: ex.exhausted,
            }
        }
    }
}

/// Configuration-run cost of a witness under the reporting convention.
pub fn witness_cost(model: &NtsModel, convention: LabelingConvention, run: &[(StateId, ModeId)]) -> Cost {
    let skip = match convention {
        LabelingConvention::Target => 0,
        LabelingConvention::Source => 1,
    };
    run.iter().skip(skip).map(|(_, m)| model.cost(*m)).sum()
}

/// Optimal worst-case value of every belief: within `horizon` steps, or
/// without a bound when `horizon` is `None`.
pub fn backward_induction_value(graph: &BeliefGraph, horizon: Option<u32>) -> Vec<Value> {
    let mut value: Vec<Value> = graph
        .ids()
        .map(|b| if graph.is_accepting(b) { Value::ZERO } else { Value::Unreachable })
        .collect();
    let mut round = 0u32;
    loop {
        if horizon.is_some_and(|k| round >= k) {
            break;
        }
        let next: Vec<Value> = graph
            .ids()
            .map(|b| {
                if graph.is_accepting(b) {
                    return Value::ZERO;
                }
                graph
                    .edges(b)
                    .iter()
                    .map(|e| {
                        let worst = e
                            .successors
                            .iter()
                            .map(|(_, s)| value[*s as usize])
                            .max()
                            .unwrap_or(Value::Unreachable);
                        worst.plus(e.weight)
                    })
                    .min()
                    .unwrap_or(Value::Unreachable)
            })
            .collect();
        round += 1;
        if next == value {
            break;
        }
        value = next;
    }
    value
}
