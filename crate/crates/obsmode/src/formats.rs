//! JSON model and strategy files.
//!
//! Output is canonical: object keys sorted, two-space indentation, trailing
//! newline, so equal values always produce identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use obsmode_core::belief::{BeliefAction, BeliefGraph};
use obsmode_core::cost::{Cost, Value};
use obsmode_core::model::{validate_model, NtsModel, RawModel, Violation};
use obsmode_core::product::{LabelingConvention, Product, ProductState};
use obsmode_core::synthesis::{Strategy, StrategyKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: JSON error at byte {offset} (line {line}, column {column}): {message}")]
    Json { path: String, offset: usize, line: usize, column: usize, message: String },
    #[error("{path}: {} validation error(s)", violations.len())]
    Invalid { path: String, violations: Vec<Violation> },
    #[error("{path}: {message}")]
    Strategy { path: String, message: String },
}

impl LoadError {
    /// Machine-readable form for the command line's error output.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            LoadError::Io { path, source } => {
                json!({"error": "io", "path": path, "message": source.to_string()})
            }
            LoadError::Json { path, offset, line, column, message } => json!({
                "error": "json", "path": path, "offset": offset,
                "line": line, "column": column, "message": message,
            }),
            LoadError::Invalid { path, violations } => json!({
                "error": "invalid",
                "path": path,
                "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            }),
            LoadError::Strategy { path, message } => {
                json!({"error": "strategy", "path": path, "message": message})
            }
        }
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn json_error(path: &str, text: &str, e: serde_json::Error) -> LoadError {
    LoadError::Json {
        path: path.to_string(),
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })
}

pub fn parse_model(text: &str, path: &str) -> Result<NtsModel, LoadError> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| json_error(path, text, e))?;
    validate_model(&raw).map_err(|violations| LoadError::Invalid { path: path.to_string(), violations })
}

pub fn load_model(path: &Path) -> Result<NtsModel, LoadError> {
    let text = read(path)?;
    parse_model(&text, &path.display().to_string())
}

/// Canonical pretty JSON with sorted keys.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut out = serde_json::to_string_pretty(&v).expect("serializable");
    out.push('\n');
    out
}

pub fn model_to_json(model: &NtsModel) -> String {
    to_canonical_json(&model.to_raw())
}

pub fn save_model(model: &NtsModel, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, model_to_json(model))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEntry {
    pub action: String,
    pub mode: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub convention: LabelingConvention,
    pub formula: String,
    /// `"unbounded"` or `"bounded"`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u32>,
    pub expand_settled: bool,
    pub init_mode: String,
    /// Members as `(state, automaton state)` pairs; the list index is the belief index.
    pub beliefs: Vec<Vec<(String, u32)>>,
    pub init_belief: u32,
    pub choices: BTreeMap<String, CommandEntry>,
    /// Per belief, the rounds at which the bounded choice changed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub revisions: BTreeMap<String, Vec<(u32, CommandEntry)>>,
    /// Weight-to-go per belief; `"inf"` when unreachable.
    pub wtg: Vec<String>,
    pub total: String,
}

fn entry(model: &NtsModel, act: BeliefAction) -> CommandEntry {
    CommandEntry {
        action: model.action_name(act.action).to_string(),
        mode: model.mode_name(act.mode).to_string(),
    }
}

impl StrategyFile {
    pub fn from_strategy(
        model: &NtsModel,
        product: &Product,
        graph: &BeliefGraph,
        formula: &str,
        expand_settled: bool,
        strategy: &Strategy,
    ) -> StrategyFile {
        let beliefs = graph
            .ids()
            .map(|b| {
                graph
                    .members(b)
                    .iter()
                    .map(|p| {
                        let ps = product.state(*p);
                        (model.state_name(ps.state).to_string(), ps.dfa)
                    })
                    .collect()
            })
            .collect();
        let choices = graph
            .ids()
            .filter_map(|b| strategy.choice(b).map(|a| (b.to_string(), entry(model, a))))
            .collect();
        let revisions = strategy
            .revisions()
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(b, r)| (b.to_string(), r.iter().map(|(k, a)| (*k, entry(model, *a))).collect()))
            .collect();
        let (kind, bound) = match strategy.kind {
            StrategyKind::Unbounded => ("unbounded", None),
            StrategyKind::Bounded(k) => ("bounded", Some(k)),
        };
        StrategyFile {
            convention: strategy.convention,
            formula: formula.to_string(),
            kind: kind.to_string(),
            bound,
            expand_settled,
            init_mode: model.mode_name(strategy.init_mode).to_string(),
            beliefs,
            init_belief: graph.init(),
            choices,
            revisions,
            wtg: strategy.wtg_table().iter().map(|v| v.to_string()).collect(),
            total: strategy.reported_total(graph.init()).to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }

    pub fn parse(text: &str, path: &str) -> Result<StrategyFile, LoadError> {
        serde_json::from_str(text).map_err(|e| json_error(path, text, e))
    }

    pub fn load(path: &Path) -> Result<StrategyFile, LoadError> {
        let text = read(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Rebinds the file to a belief graph rebuilt from the same model,
    /// formula and convention. Beliefs are matched by their members.
    pub fn to_strategy(
        &self,
        model: &NtsModel,
        product: &Product,
        graph: &BeliefGraph,
    ) -> Result<Strategy, String> {
        if self.convention != product.convention() {
            return Err("labeling convention differs from the strategy file".into());
        }
        let mut ids = Vec::with_capacity(self.beliefs.len());
        for members in &self.beliefs {
            let mut ps = Vec::with_capacity(members.len());
            for (s, q) in members {
                let state = model.state_id(s).ok_or_else(|| format!("unknown state {s}"))?;
                let p = product
                    .id_of(ProductState { state, dfa: *q })
                    .ok_or_else(|| format!("({s}, {q}) is not a product state"))?;
                ps.push(p);
            }
            ps.sort_unstable();
            ids.push(graph.id_of(&ps).ok_or("belief not reachable in the rebuilt graph")?);
        }
        let command = |c: &CommandEntry| -> Result<BeliefAction, String> {
            Ok(BeliefAction {
                action: model.action_id(&c.action).ok_or_else(|| format!("unknown action {}", c.action))?,
                mode: model.mode_id(&c.mode).ok_or_else(|| format!("unknown mode {}", c.mode))?,
            })
        };
        let index = |key: &str| -> Result<usize, String> {
            key.parse::<usize>()
                .ok()
                .filter(|i| *i < ids.len())
                .map(|i| ids[i] as usize)
                .ok_or_else(|| format!("bad belief index {key}"))
        };
        let mut choice = vec![None; graph.len()];
        for (k, c) in &self.choices {
            choice[index(k)?] = Some(command(c)?);
        }
        let mut wtg = vec![Value::Unreachable; graph.len()];
        if self.wtg.len() != ids.len() {
            return Err("wtg table length differs from the belief list".into());
        }
        for (i, text) in self.wtg.iter().enumerate() {
            wtg[ids[i] as usize] = parse_value(text)?;
        }
        let kind = match (self.kind.as_str(), self.bound) {
            ("unbounded", None) => StrategyKind::Unbounded,
            ("bounded", Some(k)) => StrategyKind::Bounded(k),
            _ => return Err("kind must be unbounded, or bounded with a bound".into()),
        };
        let mut revisions = Vec::new();
        if let StrategyKind::Bounded(_) = kind {
            revisions = vec![Vec::new(); graph.len()];
            for (k, list) in &self.revisions {
                let b = index(k)?;
                for (round, c) in list {
                    revisions[b].push((*round, command(c)?));
                }
            }
        } else if !self.revisions.is_empty() {
            return Err("revisions are only meaningful for bounded strategies".into());
        }
        let init_mode = model.mode_id(&self.init_mode).ok_or("unknown initial mode")?;
        if init_mode != model.init_mode() {
            return Err("initial mode differs from the model".into());
        }
        Ok(Strategy::from_parts(
            kind,
            self.convention,
            init_mode,
            model.cost(init_mode),
            choice,
            wtg,
            revisions,
        ))
    }
}

pub fn parse_value(text: &str) -> Result<Value, String> {
    if text == "inf" {
        return Ok(Value::Unreachable);
    }
    text.parse::<Cost>().map(Value::Finite).map_err(|e| e.to_string())
}
