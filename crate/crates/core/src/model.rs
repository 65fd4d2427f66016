//! Non-deterministic transition systems with costed observation modes.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cost::{Cost, CostParseError};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $inner:ty) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        #[cfg_attr(feature = "serde", serde(transparent))]
        pub struct $name(pub $inner);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Index into [`NtsModel::states`].
    StateId, u32
);
id_type!(ActionId, u16);
id_type!(ModeId, u16);
id_type!(ObsId, u16);

/// A set of atomic propositions, one bit per proposition index.
///
/// This is also the DFA alphabet letter type: letters range over
/// `0..(1 << |AP|)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct PropSet(pub u32);

impl PropSet {
    pub const EMPTY: PropSet = PropSet(0);

    pub fn contains(self, prop: usize) -> bool {
        self.0 & (1 << prop) != 0
    }

    pub fn with(self, prop: usize) -> PropSet {
        PropSet(self.0 | (1 << prop))
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |i| self.contains(*i))
    }
}

/// Sorted, duplicate-free set of observations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ObsSet(Vec<ObsId>);

impl ObsSet {
    pub fn new(mut ids: Vec<ObsId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        ObsSet(ids)
    }

    pub fn empty() -> Self {
        ObsSet(Vec::new())
    }

    pub fn ids(&self) -> &[ObsId] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: ObsId) -> bool {
        self.0.binary_search(&id).is_ok()
    }
}

impl FromIterator<ObsId> for ObsSet {
    fn from_iter<T: IntoIterator<Item = ObsId>>(iter: T) -> Self {
        ObsSet::new(iter.into_iter().collect())
    }
}

/// A selectable sensing configuration with its per-step cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMode {
    pub name: String,
    pub cost: Cost,
    /// Indexed by state.
    pub obs: Vec<ObsSet>,
}

/// Name-based description of a model, as read from a file.
///
/// Missing label or observation entries mean the empty set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RawModel {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub transitions: Vec<RawTransition>,
    pub init: String,
    pub ap: Vec<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub labels: BTreeMap<String, Vec<String>>,
    pub observations: Vec<String>,
    pub modes: Vec<RawMode>,
    pub init_mode: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RawTransition {
    pub from: String,
    pub action: String,
    pub to: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RawMode {
    pub name: String,
    pub cost: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub obs: BTreeMap<String, Vec<String>>,
}

/// One problem found while validating a [`RawModel`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty(&'static str),
    Duplicate { kind: &'static str, name: String },
    UnknownState { at: String, name: String },
    UnknownAction { at: String, name: String },
    UnknownProposition { at: String, name: String },
    UnknownObservation { at: String, name: String },
    UnknownMode { name: String },
    BadCost { mode: String, error: CostParseError },
    TooManyPropositions { count: usize, max: usize },
    DeadEnd { state: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty(what) => write!(f, "{what} must not be empty"),
            Violation::Duplicate { kind, name } => write!(f, "duplicate {kind} {name}"),
            Violation::UnknownState { at, name } => write!(f, "unknown state {name} ({at})"),
            Violation::UnknownAction { at, name } => write!(f, "unknown action {name} ({at})"),
            Violation::UnknownProposition { at, name } => {
                write!(f, "unknown proposition {name} ({at})")
            }
            Violation::UnknownObservation { at, name } => {
                write!(f, "unknown observation {name} ({at})")
            }
            Violation::UnknownMode { name } => write!(f, "unknown mode {name}"),
            Violation::BadCost { mode, error } => write!(f, "mode {mode}: {error}"),
            Violation::TooManyPropositions { count, max } => {
                write!(f, "{count} atomic propositions exceed the cap of {max}")
            }
            Violation::DeadEnd { state } => write!(f, "dead end {state}"),
        }
    }
}

/// Hard cap on `|AP|`; letters are `u32` bitmasks.
pub const MAX_PROPOSITIONS: usize = 16;

/// A validated NTS with observation modes. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NtsModel {
    states: Vec<String>,
    actions: Vec<String>,
    props: Vec<String>,
    observations: Vec<String>,
    /// `[state][action]`, sorted successor lists.
    post: Vec<Vec<Vec<StateId>>>,
    labels: Vec<PropSet>,
    modes: Vec<ObservationMode>,
    init: StateId,
    init_mode: ModeId,
}

struct Names<'a> {
    index: BTreeMap<&'a str, usize>,
}

impl<'a> Names<'a> {
    fn build(
        kind: &'static str,
        names: &'a [String],
        out: &mut Vec<Violation>,
    ) -> Names<'a> {
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.as_str(), i).is_some() {
                out.push(Violation::Duplicate { kind, name: n.clone() });
            }
        }
        Names { index }
    }

    fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Checks every model invariant and returns either the indexed model or
/// all violations found.
pub fn validate_model(raw: &RawModel) -> Result<NtsModel, Vec<Violation>> {
    let mut errs = Vec::new();
    if raw.states.is_empty() {
        errs.push(Violation::Empty("states"));
    }
    if raw.actions.is_empty() {
        errs.push(Violation::Empty("actions"));
    }
    if raw.modes.is_empty() {
        errs.push(Violation::Empty("modes"));
    }
    if raw.ap.len() > MAX_PROPOSITIONS {
        errs.push(Violation::TooManyPropositions { count: raw.ap.len(), max: MAX_PROPOSITIONS });
    }
    let states = Names::build("state", &raw.states, &mut errs);
    let actions = Names::build("action", &raw.actions, &mut errs);
    let props = Names::build("proposition", &raw.ap, &mut errs);
    let observations = Names::build("observation", &raw.observations, &mut errs);
    let mode_names: Vec<String> = raw.modes.iter().map(|m| m.name.clone()).collect();
    let modes_idx = Names::build("mode", &mode_names, &mut errs);

    let n = raw.states.len();
    let mut post: Vec<Vec<BTreeSet<StateId>>> = vec![vec![BTreeSet::new(); raw.actions.len()]; n];
    for t in &raw.transitions {
        let at = || alloc::format!("transition {} -{}->", t.from, t.action);
        let from = states.get(&t.from);
        if from.is_none() {
            errs.push(Violation::UnknownState { at: at(), name: t.from.clone() });
        }
        let action = actions.get(&t.action);
        if action.is_none() {
            errs.push(Violation::UnknownAction { at: at(), name: t.action.clone() });
        }
        for target in &t.to {
            match states.get(target) {
                Some(s) => {
                    if let (Some(f), Some(a)) = (from, action) {
                        post[f][a].insert(StateId(s as u32));
                    }
                }
                None => errs.push(Violation::UnknownState { at: at(), name: target.clone() }),
            }
        }
    }

    let init = states.get(&raw.init);
    if init.is_none() && !raw.states.is_empty() {
        errs.push(Violation::UnknownState { at: "init".into(), name: raw.init.clone() });
    }

    let mut labels = vec![PropSet::EMPTY; n];
    for (state, props_of) in &raw.labels {
        let at = alloc::format!("label of {state}");
        let s = states.get(state);
        if s.is_none() {
            errs.push(Violation::UnknownState { at: at.clone(), name: state.clone() });
        }
        for p in props_of {
            match (props.get(p), s) {
                (Some(pi), Some(si)) => labels[si] = labels[si].with(pi),
                (Some(_), None) => {}
                (None, _) => {
                    errs.push(Violation::UnknownProposition { at: at.clone(), name: p.clone() })
                }
            }
        }
    }

    let mut modes = Vec::with_capacity(raw.modes.len());
    for m in &raw.modes {
        let cost = match m.cost.parse::<Cost>() {
            Ok(c) => c,
            Err(error) => {
                errs.push(Violation::BadCost { mode: m.name.clone(), error });
                Cost::ZERO
            }
        };
        let mut obs = vec![ObsSet::empty(); n];
        for (state, os) in &m.obs {
            let at = alloc::format!("mode {} at {state}", m.name);
            let s = states.get(state);
            if s.is_none() {
                errs.push(Violation::UnknownState { at: at.clone(), name: state.clone() });
            }
            let mut ids = Vec::new();
            for o in os {
                match observations.get(o) {
                    Some(oi) => ids.push(ObsId(oi as u16)),
                    None => errs.push(Violation::UnknownObservation {
                        at: at.clone(),
                        name: o.clone(),
                    }),
                }
            }
            if let Some(si) = s {
                obs[si] = ObsSet::new(ids);
            }
        }
        modes.push(ObservationMode { name: m.name.clone(), cost, obs });
    }
    let init_mode = modes_idx.get(&raw.init_mode);
    if init_mode.is_none() {
        errs.push(Violation::UnknownMode { name: raw.init_mode.clone() });
    }

    // Dead ends are only meaningful once the structure itself is sound.
    if errs.is_empty() {
        let init = init.expect("checked above");
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([init]);
        seen[init] = true;
        while let Some(s) = queue.pop_front() {
            if post[s].iter().all(|succ| succ.is_empty()) {
                errs.push(Violation::DeadEnd { state: raw.states[s].clone() });
            }
            for succ in &post[s] {
                for t in succ {
                    if !seen[t.index()] {
                        seen[t.index()] = true;
                        queue.push_back(t.index());
                    }
                }
            }
        }
    }

    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(NtsModel {
        states: raw.states.clone(),
        actions: raw.actions.clone(),
        props: raw.ap.clone(),
        observations: raw.observations.clone(),
        post: post
            .into_iter()
            .map(|row| row.into_iter().map(|s| s.into_iter().collect()).collect())
            .collect(),
        labels,
        modes,
        init: StateId(init.unwrap() as u32),
        init_mode: ModeId(init_mode.unwrap() as u16),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("run is empty")]
    Empty,
    #[error("run uses unknown mode index {0}")]
    UnknownMode(u16),
    #[error("run uses unknown state index {0}")]
    UnknownState(u32),
    #[error("no action leads from step {0} to the next")]
    Disconnected(usize),
}

/// A finite run of configurations `(state, mode)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigRun(Vec<(StateId, ModeId)>);

impl ConfigRun {
    /// Builds a run after checking it against `model`.
    pub fn new(model: &NtsModel, steps: Vec<(StateId, ModeId)>) -> Result<Self, RunError> {
        if steps.is_empty() {
            return Err(RunError::Empty);
        }
        for &(s, m) in &steps {
            if s.index() >= model.state_count() {
                return Err(RunError::UnknownState(s.0));
            }
            if m.index() >= model.mode_count() {
                return Err(RunError::UnknownMode(m.0));
            }
        }
        for (i, w) in steps.windows(2).enumerate() {
            let connected = model.action_ids().any(|a| model.post(w[0].0, a).contains(&w[1].0));
            if !connected {
                return Err(RunError::Disconnected(i));
            }
        }
        Ok(ConfigRun(steps))
    }

    /// Wraps steps without checking connectivity.
    pub fn from_steps_unchecked(steps: Vec<(StateId, ModeId)>) -> Self {
        ConfigRun(steps)
    }

    pub fn steps(&self) -> &[(StateId, ModeId)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl NtsModel {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> + '_ {
        (0..self.actions.len() as u16).map(ActionId)
    }

    pub fn mode_ids(&self) -> impl Iterator<Item = ModeId> + '_ {
        (0..self.modes.len() as u16).map(ModeId)
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub fn observation_names(&self) -> &[String] {
        &self.observations
    }

    pub fn modes(&self) -> &[ObservationMode] {
        &self.modes
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.index()]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.index()]
    }

    pub fn mode_name(&self, m: ModeId) -> &str {
        &self.modes[m.index()].name
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|n| n == name).map(|i| ActionId(i as u16))
    }

    pub fn mode_id(&self, name: &str) -> Option<ModeId> {
        self.modes.iter().position(|m| m.name == name).map(|i| ModeId(i as u16))
    }

    pub fn observation_id(&self, name: &str) -> Option<ObsId> {
        self.observations.iter().position(|n| n == name).map(|i| ObsId(i as u16))
    }

    pub fn init(&self) -> StateId {
        self.init
    }

    pub fn init_mode(&self) -> ModeId {
        self.init_mode
    }

    /// Successors of `state` under `action`; empty when the action is disabled.
    pub fn post(&self, state: StateId, action: ActionId) -> &[StateId] {
        &self.post[state.index()][action.index()]
    }

    pub fn label(&self, state: StateId) -> PropSet {
        self.labels[state.index()]
    }

    /// `γ_m(state)`.
    pub fn observe(&self, mode: ModeId, state: StateId) -> &ObsSet {
        &self.modes[mode.index()].obs[state.index()]
    }

    pub fn cost(&self, mode: ModeId) -> Cost {
        self.modes[mode.index()].cost
    }

    /// Sum of the mode costs over every configuration of the run.
    pub fn run_cost(&self, run: &ConfigRun) -> Result<Cost, RunError> {
        run.steps()
            .iter()
            .map(|&(_, m)| {
                if m.index() < self.modes.len() {
                    Ok(self.cost(m))
                } else {
                    Err(RunError::UnknownMode(m.0))
                }
            })
            .sum()
    }

    /// Maximum successor-set size over all `(state, action)` pairs.
    pub fn degree_of_nondeterminism(&self) -> usize {
        self.post.iter().flatten().map(Vec::len).max().unwrap_or(0)
    }

    pub fn obs_names(&self, obs: &ObsSet) -> Vec<&str> {
        obs.ids().iter().map(|o| self.observations[o.index()].as_str()).collect()
    }

    pub fn prop_names(&self, letter: PropSet) -> Vec<&str> {
        letter.iter().filter(|&p| p < self.props.len()).map(|p| self.props[p].as_str()).collect()
    }

    /// Parses a set of observation names against this model.
    pub fn obs_set<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Option<ObsSet> {
        names.into_iter().map(|n| self.observation_id(n)).collect()
    }

    /// Inverse of [`validate_model`]: lossless for validated models.
    pub fn to_raw(&self) -> RawModel {
        let mut transitions = Vec::new();
        for s in self.state_ids() {
            for a in self.action_ids() {
                let succ = self.post(s, a);
                if !succ.is_empty() {
                    transitions.push(RawTransition {
                        from: self.state_name(s).to_string(),
                        action: self.action_name(a).to_string(),
                        to: succ.iter().map(|t| self.state_name(*t).to_string()).collect(),
                    });
                }
            }
        }
        let labels = self
            .state_ids()
            .filter(|s| self.label(*s) != PropSet::EMPTY)
            .map(|s| {
                let names = self.prop_names(self.label(s)).into_iter().map(String::from).collect();
                (self.state_name(s).to_string(), names)
            })
            .collect();
        let modes = self
            .modes
            .iter()
            .map(|m| RawMode {
                name: m.name.clone(),
                cost: m.cost.to_string(),
                obs: self
                    .state_ids()
                    .filter(|s| !m.obs[s.index()].is_empty())
                    .map(|s| {
                        let names =
                            self.obs_names(&m.obs[s.index()]).into_iter().map(String::from).collect();
                        (self.state_name(s).to_string(), names)
                    })
                    .collect(),
            })
            .collect();
        RawModel {
            states: self.states.clone(),
            actions: self.actions.clone(),
            transitions,
            init: self.state_name(self.init).to_string(),
            ap: self.props.clone(),
            labels,
            observations: self.observations.clone(),
            modes,
            init_mode: self.mode_name(self.init_mode).to_string(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::string::ToString;

    fn strs(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    /// The seven-state running example with shape/colour sensing.
    pub(crate) fn running_example_raw() -> RawModel {
        let t = |from: &str, action: &str, to: &[&str]| RawTransition {
            from: from.into(),
            action: action.into(),
            to: strs(to),
        };
        let obs = |pairs: &[(&str, &[&str])]| -> BTreeMap<String, Vec<String>> {
            pairs.iter().map(|(s, o)| (s.to_string(), strs(o))).collect()
        };
        RawModel {
            states: strs(&["s1", "s2", "s3", "s4", "s5", "s6", "s7"]),
            actions: strs(&["a", "b"]),
            transitions: vec![
                t("s1", "a", &["s2", "s3", "s4"]),
                t("s2", "a", &["s5"]),
                t("s2", "b", &["s6"]),
                t("s3", "a", &["s6"]),
                t("s3", "b", &["s7"]),
                t("s4", "a", &["s7"]),
                t("s4", "b", &["s6"]),
                t("s5", "a", &["s6"]),
                t("s6", "a", &["s6"]),
                t("s7", "a", &["s7"]),
            ],
            init: "s1".into(),
            ap: strs(&["star"]),
            labels: [("s6".to_string(), strs(&["star"]))].into_iter().collect(),
            observations: strs(&["white", "blue", "red", "circle", "rectangle", "diamond"]),
            modes: vec![
                RawMode { name: "m1".into(), cost: "0".into(), obs: BTreeMap::new() },
                RawMode {
                    name: "m2".into(),
                    cost: "1".into(),
                    obs: obs(&[
                        ("s1", &["circle"]),
                        ("s2", &["rectangle"]),
                        ("s3", &["rectangle"]),
                        ("s4", &["diamond"]),
                        ("s5", &["circle"]),
                        ("s6", &["circle"]),
                        ("s7", &["circle"]),
                    ]),
                },
                RawMode {
                    name: "m3".into(),
                    cost: "2".into(),
                    obs: obs(&[
                        ("s1", &["circle", "white"]),
                        ("s2", &["rectangle", "blue"]),
                        ("s3", &["rectangle", "red"]),
                        ("s4", &["diamond", "white"]),
                        ("s5", &["circle", "white"]),
                        ("s6", &["circle", "white"]),
                        ("s7", &["circle", "white"]),
                    ]),
                },
            ],
            init_mode: "m1".into(),
        }
    }

    pub(crate) fn running_example() -> NtsModel {
        validate_model(&running_example_raw()).unwrap()
    }

    fn sid(m: &NtsModel, n: &str) -> StateId {
        m.state_id(n).unwrap()
    }

    #[test]
    fn running_example_is_valid() {
        let m = running_example();
        assert_eq!(m.state_count(), 7);
        assert_eq!(m.action_count(), 2);
        assert_eq!(m.mode_count(), 3);
        assert_eq!(m.degree_of_nondeterminism(), 3);
    }

    #[test]
    fn post_matches_edges() {
        let m = running_example();
        let (a, b) = (m.action_id("a").unwrap(), m.action_id("b").unwrap());
        let names = |xs: &[StateId]| xs.iter().map(|s| m.state_name(*s)).collect::<Vec<_>>();
        assert_eq!(names(m.post(sid(&m, "s1"), a)), ["s2", "s3", "s4"]);
        assert_eq!(names(m.post(sid(&m, "s6"), a)), ["s6"]);
        assert!(m.post(sid(&m, "s1"), b).is_empty());
        // pure: same answer twice
        assert_eq!(m.post(sid(&m, "s1"), a), m.post(sid(&m, "s1"), a));
    }

    #[test]
    fn observe_by_mode() {
        let m = running_example();
        let (m1, m2, m3) = (ModeId(0), ModeId(1), ModeId(2));
        let mut o = m.obs_names(m.observe(m3, sid(&m, "s2")));
        o.sort();
        assert_eq!(o, ["blue", "rectangle"]);
        assert!(m.observe(m1, sid(&m, "s2")).is_empty());
        assert_eq!(m.obs_names(m.observe(m2, sid(&m, "s4"))), ["diamond"]);
    }

    #[test]
    fn run_costs() {
        let m = running_example();
        let run = ConfigRun::new(
            &m,
            vec![(sid(&m, "s1"), ModeId(0)), (sid(&m, "s3"), ModeId(1)), (sid(&m, "s6"), ModeId(0))],
        )
        .unwrap();
        assert_eq!(m.run_cost(&run).unwrap(), Cost::integer(1));

        let free = ConfigRun::new(
            &m,
            vec![(sid(&m, "s1"), ModeId(0)), (sid(&m, "s2"), ModeId(0))],
        )
        .unwrap();
        assert_eq!(m.run_cost(&free).unwrap(), Cost::ZERO);

        let dear = ConfigRun::new(
            &m,
            vec![(sid(&m, "s1"), ModeId(2)), (sid(&m, "s2"), ModeId(2)), (sid(&m, "s5"), ModeId(2))],
        )
        .unwrap();
        assert_eq!(m.run_cost(&dear).unwrap(), Cost::integer(6));
    }

    #[test]
    fn run_rejects_bad_steps() {
        let m = running_example();
        assert_eq!(ConfigRun::new(&m, vec![]), Err(RunError::Empty));
        assert_eq!(
            ConfigRun::new(&m, vec![(StateId(0), ModeId(9))]),
            Err(RunError::UnknownMode(9))
        );
        assert_eq!(
            ConfigRun::new(&m, vec![(sid(&m, "s1"), ModeId(0)), (sid(&m, "s6"), ModeId(0))]),
            Err(RunError::Disconnected(0))
        );
        let unchecked = ConfigRun::from_steps_unchecked(vec![(StateId(0), ModeId(7))]);
        assert_eq!(m.run_cost(&unchecked), Err(RunError::UnknownMode(7)));
    }

    #[test]
    fn unknown_target_state_is_reported() {
        let mut raw = running_example_raw();
        raw.transitions[0].to.push("s9".into());
        let errs = validate_model(&raw).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].to_string().starts_with("unknown state s9"), "{}", errs[0]);
    }

    #[test]
    fn reachable_dead_end_is_reported() {
        let mut raw = running_example_raw();
        raw.transitions.retain(|t| t.from != "s7");
        let errs = validate_model(&raw).unwrap_err();
        assert_eq!(errs, vec![Violation::DeadEnd { state: "s7".into() }]);
        assert_eq!(errs[0].to_string(), "dead end s7");
    }

    #[test]
    fn unreachable_dead_end_is_fine() {
        let mut raw = running_example_raw();
        raw.states.push("orphan".into());
        assert!(validate_model(&raw).is_ok());
    }

    #[test]
    fn collects_every_violation() {
        let mut raw = running_example_raw();
        raw.init_mode = "m9".into();
        raw.labels.insert("s1".into(), strs(&["moon"]));
        raw.modes[1].cost = "-1".into();
        raw.modes[2].obs.insert("s1".into(), strs(&["green"]));
        raw.actions.push("a".into());
        let errs = validate_model(&raw).unwrap_err();
        assert_eq!(errs.len(), 5, "{errs:?}");
    }

    #[test]
    fn empty_sets_rejected() {
        let raw = RawModel::default();
        let errs = validate_model(&raw).unwrap_err();
        assert!(errs.contains(&Violation::Empty("states")));
        assert!(errs.contains(&Violation::Empty("actions")));
        assert!(errs.contains(&Violation::Empty("modes")));
    }

    #[test]
    fn raw_round_trip() {
        let m = running_example();
        assert_eq!(validate_model(&m.to_raw()).unwrap(), m);
    }
}
