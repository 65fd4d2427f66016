//! Compilation of scLTL formulas into minimal DFAs over `2^AP`.
//!
//! States are residual obligations obtained by taking formula derivatives
//! letter by letter. Residuals are kept in disjunctive normal form over
//! temporal atoms drawn from the formula's subterms, with subsumed clauses
//! removed, so the derivative closure is finite. The result
//! is then minimized with Hopcroft's partition refinement and renumbered
//! in breadth-first order from the initial state.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::{expand_bounded, ApSet, Formula};
use crate::model::{PropSet, MAX_PROPOSITIONS};

/// Default cap on `|AP|` for explicit alphabets.
pub const DEFAULT_PROPOSITION_CAP: usize = 16;

/// Safety valve on the derivative closure.
const MAX_RESIDUALS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DfaError {
    #[error("{count} atomic propositions exceed the alphabet cap of {cap}")]
    AlphabetTooLarge { count: usize, cap: usize },
    #[error("formula mentions proposition index {0} outside the alphabet")]
    PropositionOutOfRange(usize),
    #[error("derivative closure exceeded {0} states")]
    TooManyStates(usize),
}

/// A complete DFA over the alphabet `2^AP`. State 0 is initial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    ap: ApSet,
    /// `delta[q * alphabet + letter]`
    delta: Vec<u32>,
    accepting: Vec<bool>,
}

impl Dfa {
    /// Builds a DFA from explicit tables; `delta` is row-major by state.
    pub fn from_parts(ap: ApSet, delta: Vec<u32>, accepting: Vec<bool>) -> Self {
        assert_eq!(delta.len(), accepting.len() * ap.alphabet_size());
        Dfa { ap, delta, accepting }
    }

    pub fn ap(&self) -> &ApSet {
        &self.ap
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.ap.alphabet_size()
    }

    pub fn init(&self) -> u32 {
        0
    }

    pub fn step(&self, q: u32, letter: PropSet) -> u32 {
        self.delta[q as usize * self.alphabet_size() + letter.0 as usize]
    }

    pub fn is_accepting(&self, q: u32) -> bool {
        self.accepting[q as usize]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = u32> + '_ {
        self.accepting.iter().enumerate().filter(|(_, a)| **a).map(|(q, _)| q as u32)
    }

    pub fn run(&self, word: &[PropSet]) -> u32 {
        word.iter().fold(self.init(), |q, x| self.step(q, *x))
    }

    pub fn accepts(&self, word: &[PropSet]) -> bool {
        self.is_accepting(self.run(word))
    }

    /// States from which some accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut live = self.accepting.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for q in 0..n {
                if live[q] {
                    continue;
                }
                let row = &self.delta[q * self.alphabet_size()..(q + 1) * self.alphabet_size()];
                if row.iter().any(|t| live[*t as usize]) {
                    live[q] = true;
                    changed = true;
                }
            }
        }
        live
    }
}

/// Temporal obligation over interned subformulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Term {
    /// Needs one more letter, any letter.
    AnyLetter,
    Lit { prop: usize, positive: bool },
    Next(u32),
    Until(u32, u32),
    Eventually(u32),
}

type Clause = BTreeSet<Term>;

/// Residual obligation in disjunctive normal form. No clauses is `false`;
/// the empty clause is `true`. Clauses are kept free of supersets.
type Residual = BTreeSet<Clause>;

fn truth() -> Residual {
    BTreeSet::from([Clause::new()])
}

fn single(atom: Term) -> Residual {
    BTreeSet::from([BTreeSet::from([atom])])
}

fn absorb(r: Residual) -> Residual {
    let clauses: Vec<Clause> = r.into_iter().collect();
    let mut out = Residual::new();
    for (i, c) in clauses.iter().enumerate() {
        let subsumed = clauses
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && d.is_subset(c) && (d.len() < c.len() || j < i));
        if !subsumed {
            out.insert(c.clone());
        }
    }
    out
}

fn or_of(a: Residual, b: Residual) -> Residual {
    let mut out = a;
    out.extend(b);
    absorb(out)
}

fn and_of(a: &Residual, b: &Residual) -> Residual {
    let mut out = Residual::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).copied().collect());
        }
    }
    absorb(out)
}

/// Subformulas of a bounded-operator-free formula, children before parents.
#[derive(Default)]
struct Arena {
    nodes: Vec<Formula>,
    index: BTreeMap<Formula, u32>,
}

impl Arena {
    fn intern(&mut self, f: &Formula) -> u32 {
        if let Some(i) = self.index.get(f) {
            return *i;
        }
        match f {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => {
                self.intern(a);
                self.intern(b);
            }
            Formula::Next(a) | Formula::Eventually(a) => {
                self.intern(a);
            }
            _ => {}
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(f.clone());
        self.index.insert(f.clone(), i);
        i
    }

    fn id(&self, f: &Formula) -> u32 {
        self.index[f]
    }

    fn residual(&self, i: u32) -> Residual {
        use Formula::*;
        match &self.nodes[i as usize] {
            True => single(Term::AnyLetter),
            False => Residual::new(),
            Atom(p) => single(Term::Lit { prop: *p, positive: true }),
            NegAtom(p) => single(Term::Lit { prop: *p, positive: false }),
            And(a, b) => and_of(&self.residual(self.id(a)), &self.residual(self.id(b))),
            Or(a, b) => or_of(self.residual(self.id(a)), self.residual(self.id(b))),
            Next(a) => single(Term::Next(self.id(a))),
            Until(a, b) => single(Term::Until(self.id(a), self.id(b))),
            Eventually(a) => single(Term::Eventually(self.id(a))),
            BoundedEventually(..) | BoundedUntil(..) => unreachable!("expanded before interning"),
        }
    }

    fn derive_atom(&self, atom: Term, x: PropSet) -> Residual {
        match atom {
            Term::AnyLetter => truth(),
            Term::Lit { prop, positive } => {
                if x.contains(prop) == positive {
                    truth()
                } else {
                    Residual::new()
                }
            }
            Term::Next(i) => self.residual(i),
            Term::Until(a, b) => or_of(
                self.derive(&self.residual(b), x),
                and_of(&self.derive(&self.residual(a), x), &single(atom)),
            ),
            Term::Eventually(a) => or_of(self.derive(&self.residual(a), x), single(atom)),
        }
    }

    fn derive(&self, r: &Residual, x: PropSet) -> Residual {
        let mut out = Residual::new();
        for clause in r {
            let mut acc = truth();
            for atom in clause {
                acc = and_of(&acc, &self.derive_atom(*atom, x));
                if acc.is_empty() {
                    break;
                }
            }
            out.extend(acc);
        }
        absorb(out)
    }
}

/// Satisfied by the empty remainder of the word.
fn nullable(r: &Residual) -> bool {
    r.iter().any(BTreeSet::is_empty)
}

/// Compiles `f` with the default proposition cap.
pub fn compile_to_dfa(f: &Formula, ap: &ApSet) -> Result<Dfa, DfaError> {
    compile_to_dfa_with_cap(f, ap, DEFAULT_PROPOSITION_CAP)
}

/// Compiles `f` into the minimal DFA accepting exactly the finite words
/// that strongly satisfy it.
pub fn compile_to_dfa_with_cap(f: &Formula, ap: &ApSet, cap: usize) -> Result<Dfa, DfaError> {
    let cap = cap.min(MAX_PROPOSITIONS);
    if ap.len() > cap {
        return Err(DfaError::AlphabetTooLarge { count: ap.len(), cap });
    }
    if let Some(p) = f.max_prop() {
        if p >= ap.len() {
            return Err(DfaError::PropositionOutOfRange(p));
        }
    }
    let sigma = ap.alphabet_size();
    let expanded = expand_bounded(f);
    let mut arena = Arena::default();
    let root = arena.intern(&expanded);
    let start = arena.residual(root);
    let mut index: BTreeMap<Residual, u32> = BTreeMap::new();
    let mut states: Vec<Residual> = Vec::new();
    let mut delta: Vec<u32> = Vec::new();
    index.insert(start.clone(), 0);
    states.push(start);
    let mut next = 0;
    while next < states.len() {
        let current = states[next].clone();
        for letter in 0..sigma {
            let d = arena.derive(&current, PropSet(letter as u32));
            let id = match index.get(&d) {
                Some(id) => *id,
                None => {
                    if states.len() >= MAX_RESIDUALS {
                        return Err(DfaError::TooManyStates(MAX_RESIDUALS));
                    }
                    let id = states.len() as u32;
                    index.insert(d.clone(), id);
                    states.push(d);
                    id
                }
            };
            delta.push(id);
        }
        next += 1;
    }
    let accepting = states.iter().map(nullable).collect();
    let raw = Dfa { ap: ap.clone(), delta, accepting };
    Ok(canonicalize(&minimize(&raw)))
}

/// Hopcroft partition refinement. Assumes every state is reachable.
pub fn minimize(dfa: &Dfa) -> Dfa {
    let n = dfa.state_count();
    let sigma = dfa.alphabet_size();
    if n == 0 {
        return dfa.clone();
    }
    // inverse[letter][target] = sources
    let mut inverse = vec![vec![Vec::new(); n]; sigma];
    for q in 0..n {
        for (c, inv) in inverse.iter_mut().enumerate() {
            inv[dfa.delta[q * sigma + c] as usize].push(q as u32);
        }
    }

    let mut block_of = vec![0usize; n];
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    let (acc, rej): (Vec<u32>, Vec<u32>) = (0..n as u32).partition(|q| dfa.accepting[*q as usize]);
    for b in [acc, rej] {
        if !b.is_empty() {
            for q in &b {
                block_of[*q as usize] = blocks.len();
            }
            blocks.push(b);
        }
    }
    let mut in_work = vec![false; blocks.len()];
    let mut work: Vec<usize> = Vec::new();
    if blocks.len() == 2 {
        let smaller = if blocks[0].len() <= blocks[1].len() { 0 } else { 1 };
        work.push(smaller);
        in_work[smaller] = true;
    }

    let mut mark = vec![false; n];
    while let Some(splitter) = work.pop() {
        in_work[splitter] = false;
        let members = blocks[splitter].clone();
        for inv in &inverse {
            let mut touched: Vec<usize> = Vec::new();
            for &target in &members {
                for &src in &inv[target as usize] {
                    if !mark[src as usize] {
                        mark[src as usize] = true;
                        let b = block_of[src as usize];
                        if !touched.contains(&b) {
                            touched.push(b);
                        }
                    }
                }
            }
            for b in touched {
                let (inside, outside): (Vec<u32>, Vec<u32>) =
                    blocks[b].iter().partition(|q| mark[**q as usize]);
                if !outside.is_empty() {
                    let new_id = blocks.len();
                    let (keep, split) = if inside.len() <= outside.len() {
                        (outside, inside)
                    } else {
                        (inside, outside)
                    };
                    for q in &split {
                        block_of[*q as usize] = new_id;
                    }
                    blocks[b] = keep;
                    blocks.push(split);
                    // if b is pending both halves are now pending, otherwise
                    // the smaller half suffices; either way push the new one
                    in_work.push(true);
                    work.push(new_id);
                    for q in &blocks[new_id] {
                        mark[*q as usize] = false;
                    }
                }
                for q in &blocks[b] {
                    mark[*q as usize] = false;
                }
            }
            for q in &members {
                for src in &inv[*q as usize] {
                    mark[*src as usize] = false;
                }
            }
        }
    }

    let k = blocks.len();
    let mut delta = vec![0u32; k * sigma];
    let mut accepting = vec![false; k];
    for (b, members) in blocks.iter().enumerate() {
        let rep = members[0] as usize;
        accepting[b] = dfa.accepting[rep];
        for c in 0..sigma {
            delta[b * sigma + c] = block_of[dfa.delta[rep * sigma + c] as usize] as u32;
        }
    }
    // keep the initial state's block first
    let init_block = block_of[0];
    let mut out = Dfa { ap: dfa.ap.clone(), delta, accepting };
    if init_block != 0 {
        out = relabel(&out, init_block);
    }
    out
}

fn relabel(dfa: &Dfa, init: usize) -> Dfa {
    let n = dfa.state_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.swap(0, init);
    let mut new_of = vec![0usize; n];
    for (new, old) in order.iter().enumerate() {
        new_of[*old] = new;
    }
    permute(dfa, &order, &new_of)
}

fn permute(dfa: &Dfa, order: &[usize], new_of: &[usize]) -> Dfa {
    let sigma = dfa.alphabet_size();
    let mut delta = Vec::with_capacity(order.len() * sigma);
    let mut accepting = Vec::with_capacity(order.len());
    for &old in order {
        accepting.push(dfa.accepting[old]);
        for c in 0..sigma {
            delta.push(new_of[dfa.delta[old * sigma + c] as usize] as u32);
        }
    }
    Dfa { ap: dfa.ap.clone(), delta, accepting }
}

/// Renumbers states in BFS order from the initial state, letters in
/// increasing bitmask order. Unreachable states are dropped.
pub fn canonicalize(dfa: &Dfa) -> Dfa {
    let n = dfa.state_count();
    let sigma = dfa.alphabet_size();
    let mut new_of = vec![usize::MAX; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    new_of[0] = 0;
    order.push(0);
    while let Some(q) = queue.pop_front() {
        for c in 0..sigma {
            let t = dfa.delta[q * sigma + c] as usize;
            if new_of[t] == usize::MAX {
                new_of[t] = order.len();
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    permute(dfa, &order, &new_of)
}
