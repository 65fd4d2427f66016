//! Synchronous product of an NTS with a DFA over its labels.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use crate::dfa::Dfa;
use crate::model::{ActionId, NtsModel, StateId};

/// Which state's label drives the DFA along a transition `s --a--> s'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LabelingConvention {
    /// `q' = δ(q, L(s))`, initial DFA state `q0`.
    Source,
    /// `q' = δ(q, L(s'))`, initial DFA state `δ(q0, L(s_init))`.
    #[default]
    Target,
}

impl LabelingConvention {
    pub fn name(self) -> &'static str {
        match self {
            LabelingConvention::Source => "source",
            LabelingConvention::Target => "target",
        }
    }
}

impl core::str::FromStr for LabelingConvention {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "source" => Ok(LabelingConvention::Source),
            "target" => Ok(LabelingConvention::Target),
            _ => Err(()),
        }
    }
}

pub type ProductId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub state: StateId,
    pub dfa: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProductError {
    #[error("formula alphabet does not match the model propositions")]
    AlphabetMismatch,
}

/// Reachable part of `NTS × DFA`, numbered in BFS order from the initial pair.
#[derive(Clone, Debug)]
pub struct Product {
    convention: LabelingConvention,
    states: Vec<ProductState>,
    accepting: Vec<bool>,
    /// Some accepting DFA state is still reachable from the DFA component.
    live: Vec<bool>,
    /// `post[p][a]`, sorted.
    post: Vec<Vec<Vec<ProductId>>>,
    index: BTreeMap<ProductState, ProductId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductStats {
    pub state_count: usize,
    /// Enabled `(state, action)` pairs.
    pub transition_count: usize,
    /// Individual `(state, action, successor)` edges.
    pub edge_count: usize,
    pub degree_of_nondeterminism: usize,
}

pub fn build_product(
    model: &NtsModel,
    dfa: &Dfa,
    convention: LabelingConvention,
) -> Result<Product, ProductError> {
    if dfa.ap().names() != model.propositions() {
        return Err(ProductError::AlphabetMismatch);
    }
    let live_q = dfa.live_states();
    let init_q = match convention {
        LabelingConvention::Source => dfa.init(),
        LabelingConvention::Target => dfa.step(dfa.init(), model.label(model.init())),
    };
    let init = ProductState { state: model.init(), dfa: init_q };

    let mut product = Product {
        convention,
        states: Vec::new(),
        accepting: Vec::new(),
        live: Vec::new(),
        post: Vec::new(),
        index: BTreeMap::new(),
    };
    let intern = |p: &mut Product, ps: ProductState, queue: &mut VecDeque<ProductId>| {
        if let Some(id) = p.index.get(&ps) {
            return *id;
        }
        let id = p.states.len() as ProductId;
        p.index.insert(ps, id);
        p.states.push(ps);
        p.accepting.push(dfa.is_accepting(ps.dfa));
        p.live.push(live_q[ps.dfa as usize]);
        p.post.push(Vec::new());
        queue.push_back(id);
        id
    };

    let mut queue = VecDeque::new();
    intern(&mut product, init, &mut queue);
    while let Some(id) = queue.pop_front() {
        let ProductState { state, dfa: q } = product.states[id as usize];
        let mut rows = Vec::with_capacity(model.action_count());
        for a in model.action_ids() {
            let mut row: Vec<ProductId> = model
                .post(state, a)
                .iter()
                .map(|&t| {
                    let letter = match convention {
                        LabelingConvention::Source => model.label(state),
                        LabelingConvention::Target => model.label(t),
                    };
                    let next = ProductState { state: t, dfa: dfa.step(q, letter) };
                    intern(&mut product, next, &mut queue)
                })
                .collect();
            row.sort_unstable();
            row.dedup();
            rows.push(row);
        }
        product.post[id as usize] = rows;
    }
    Ok(product)
}

impl Product {
    pub fn convention(&self) -> LabelingConvention {
        self.convention
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn init(&self) -> ProductId {
        0
    }

    pub fn state(&self, p: ProductId) -> ProductState {
        self.states[p as usize]
    }

    pub fn id_of(&self, ps: ProductState) -> Option<ProductId> {
        self.index.get(&ps).copied()
    }

    pub fn is_accepting(&self, p: ProductId) -> bool {
        self.accepting[p as usize]
    }

    /// Neither accepting nor able to become accepting.
    pub fn is_dead(&self, p: ProductId) -> bool {
        !self.live[p as usize]
    }

    pub fn post(&self, p: ProductId, a: ActionId) -> &[ProductId] {
        &self.post[p as usize][a.index()]
    }

    pub fn action_count(&self) -> usize {
        self.post.first().map_or(0, Vec::len)
    }

    pub fn stats(&self) -> ProductStats {
        let rows = self.post.iter().flatten();
        ProductStats {
            state_count: self.states.len(),
            transition_count: rows.clone().filter(|r| !r.is_empty()).count(),
            edge_count: rows.clone().map(Vec::len).sum(),
            degree_of_nondeterminism: rows.map(Vec::len).max().unwrap_or(0),
        }
    }
}
