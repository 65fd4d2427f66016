//! The `obsmode` command line.
//!
//! Exit codes: 0 success, 1 infeasible or failed check, 2 input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use obsmode_core::belief::{BeliefAction, BeliefOptions};
use obsmode_core::dfa::compile_to_dfa;
use obsmode_core::formula::{parse_formula, ApSet};
use obsmode_core::model::{NtsModel, PropSet};
use obsmode_core::oracle::{verify_strategy, VerifyOptions};
use obsmode_core::product::{LabelingConvention, ProductId};
use obsmode_core::runtime::{start_session, SessionStatus};
use obsmode_core::synthesis::{synth_bounded, synth_unbounded, wtg_profile, Strategy, SynthesisTrace};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::casestudy::generate_grid_casestudy;
use crate::dot::{belief_dot, dfa_dot, product_dot};
use crate::formats::{load_model, model_to_json, to_canonical_json, LoadError, StrategyFile};
use crate::fuzz::{check_instance, default_seed, random_instance};
use crate::pipeline::Pipeline;

#[derive(Parser, Debug)]
#[command(name = "obsmode", version, about = "Observation-mode scheduling synthesis for co-safe goals")]
pub struct Cli {
    /// Which state's label drives the automaton along a transition.
    #[arg(long, global = true, value_enum)]
    pub labeling: Option<Labeling>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Labeling {
    Source,
    Target,
}

impl From<Labeling> for LabelingConvention {
    fn from(l: Labeling) -> Self {
        match l {
            Labeling::Source => LabelingConvention::Source,
            Labeling::Target => LabelingConvention::Target,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Adversary {
    Random,
    Exhaustive,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize a cost-optimal strategy and write it as JSON.
    Synth {
        model: PathBuf,
        #[arg(long)]
        formula: String,
        /// Reach the goal within this many steps.
        #[arg(long, conflicts_with = "unbounded")]
        bound: Option<u32>,
        /// Explicitly request the unbounded problem.
        #[arg(long)]
        unbounded: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the synthesis trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Keep expanding beliefs whose outcome is already decided.
        #[arg(long)]
        expand_settled: bool,
    },
    /// Exhaustively check a strategy file against the model.
    Verify {
        model: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        /// Must match the formula recorded in the strategy file.
        #[arg(long)]
        formula: Option<String>,
    },
    /// Execute a strategy against an adversary, printing JSON lines.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long, value_enum, default_value = "random")]
        adversary: Adversary,
        #[arg(long, default_value_t = 1)]
        runs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print model, product and belief graph statistics.
    Inspect {
        model: PathBuf,
        #[arg(long)]
        formula: Option<String>,
        /// Also build the belief graph.
        #[arg(long, requires = "formula")]
        belief: bool,
        /// Print Graphviz instead of statistics.
        #[arg(long, requires = "formula")]
        dot: bool,
        #[arg(long)]
        expand_settled: bool,
    },
    /// Compile a formula to its minimal automaton.
    CompileFormula {
        formula: String,
        /// Comma-separated proposition names, in alphabet order.
        #[arg(long, value_delimiter = ',')]
        ap: Vec<String>,
        #[arg(long)]
        dot: bool,
    },
    /// Generate a bundled benchmark model.
    Casestudy {
        #[arg(value_parser = ["grid"])]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check synthesis against the oracles on random instances.
    Fuzz {
        /// Seed range `a..b` (end exclusive) or a single seed.
        #[arg(long)]
        seeds: Option<String>,
        /// Print the generated instance for each seed.
        #[arg(long)]
        show: bool,
    },
    /// Optimal worst-case cost for every bound up to `--k-max`.
    Sweep {
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 16)]
        k_max: u32,
        #[arg(long)]
        expand_settled: bool,
    },
}

#[derive(Debug)]
enum Failure {
    /// Exit 1 after printing the message.
    Negative(Json),
    /// Exit 2 after printing the message.
    Input(Json),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Input(e.to_json())
    }
}

fn input(msg: impl std::fmt::Display) -> Failure {
    Failure::Input(json!({"error": "input", "message": msg.to_string()}))
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(json!({"error": "io", "path": path.display().to_string(), "message": e.to_string()}))
}

type Out<'a> = &'a mut dyn Write;

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn cli_main<I, T>(argv: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(Failure::Negative(j)) => {
            let _ = writeln!(err, "{j}");
            1
        }
        Err(Failure::Input(j)) => {
            let _ = writeln!(err, "{j}");
            2
        }
    }
}

fn write_out(out: Out, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| input(format!("writing output: {e}")))
}

fn write_to(path: Option<&Path>, out: Out, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io(p, e)),
        None => write_out(out, text),
    }
}

fn line(j: &Json) -> String {
    let mut s = j.to_string();
    s.push('\n');
    s
}

fn pipeline(model: NtsModel, formula: &str, conv: LabelingConvention, expand_settled: bool) -> Result<Pipeline, Failure> {
    Pipeline::build(model, formula, conv, BeliefOptions { expand_settled }).map_err(input)
}

fn command_json(model: &NtsModel, a: BeliefAction) -> Json {
    json!({"action": model.action_name(a.action), "mode": model.mode_name(a.mode)})
}

fn trace_lines(model: &NtsModel, trace: &SynthesisTrace) -> String {
    trace
        .steps
        .iter()
        .map(|s| {
            let updated: Vec<Json> = s
                .updated
                .iter()
                .map(|(b, a, v)| {
                    json!({"belief": b, "action": model.action_name(a.action),
                           "mode": model.mode_name(a.mode), "wtg": v.to_string()})
                })
                .collect();
            line(&json!({"round": s.round, "updated": updated, "winning": s.winning}))
        })
        .collect()
}

fn run(cli: Cli, out: Out) -> Result<(), Failure> {
    let conv_flag = cli.labeling.map(LabelingConvention::from);
    let conv = conv_flag.unwrap_or_default();
    match cli.command {
        Command::Synth { model, formula, bound, unbounded: _, out: path, trace, expand_settled } => {
            let m = load_model(&model)?;
            let p = pipeline(m, &formula, conv, expand_settled)?;
            let result = match bound {
                Some(0) => return Err(input("--bound must be at least 1")),
                Some(k) => synth_bounded(&p.graph, k),
                None => synth_unbounded(&p.graph),
            };
            let trace_text = |t: &SynthesisTrace| trace_lines(&p.model, t);
            match result {
                Ok(syn) => {
                    if let Some(tp) = &trace {
                        std::fs::write(tp, trace_text(&syn.trace)).map_err(|e| io(tp, e))?;
                    }
                    let file = StrategyFile::from_strategy(
                        &p.model,
                        &p.product,
                        &p.graph,
                        &formula,
                        expand_settled,
                        &syn.strategy,
                    );
                    write_to(path.as_deref(), out, &file.to_json())
                }
                Err(inf) => {
                    if let Some(tp) = &trace {
                        std::fs::write(tp, trace_text(&inf.trace)).map_err(|e| io(tp, e))?;
                    }
                    Err(Failure::Negative(json!({"error": "infeasible", "message": inf.to_string()})))
                }
            }
        }
        Command::Verify { model, strategy, formula } => {
            let m = load_model(&model)?;
            let (p, s) = load_strategy(m, &strategy, formula.as_deref(), conv_flag)?;
            let report = verify_strategy(&p.model, &p.formula, &p.product, &p.graph, &s, VerifyOptions::default());
            let reported = s.reported_total(p.graph.init());
            let witness: Vec<Json> = report
                .witness
                .iter()
                .map(|(st, md)| json!([p.model.state_name(*st), p.model.mode_name(*md)]))
                .collect();
            let doc = json!({
                "convention": p.convention().name(),
                "satisfies": report.satisfies,
                "worst_case_cost": report.worst_case_cost.to_string(),
                "worst_case_steps": report.worst_case_steps.map_or(Json::from("inf"), Json::from),
                "witness": witness,
                "reported_total": reported.to_string(),
                "matches_report": report.worst_case_cost == reported,
                "dfa_agrees": report.dfa_agrees,
                "nodes": report.nodes,
                "budget_exhausted": report.budget_exhausted,
            });
            write_out(out, &to_canonical_json(&doc))?;
            if report.satisfies && report.worst_case_cost == reported && report.dfa_agrees {
                Ok(())
            } else {
                Err(Failure::Negative(json!({"error": "verification failed"})))
            }
        }
        Command::Simulate { model, strategy, adversary, runs, seed } => {
            let m = load_model(&model)?;
            let (p, s) = load_strategy(m, &strategy, None, conv_flag)?;
            simulate(&p, &s, adversary, runs, seed, out)
        }
        Command::Inspect { model, formula, belief, dot, expand_settled } => {
            let m = load_model(&model)?;
            let Some(f) = formula else {
                return write_out(out, &to_canonical_json(&model_stats(&m)));
            };
            let p = pipeline(m, &f, conv, expand_settled)?;
            if dot {
                let text = if belief { belief_dot(&p.model, &p.product, &p.graph) } else { product_dot(&p.model, &p.product) };
                return write_out(out, &text);
            }
            let ps = p.product.stats();
            let mut doc = json!({
                "model": model_stats(&p.model),
                "convention": p.convention().name(),
                "dfa_states": p.dfa.state_count(),
                "product": {
                    "states": ps.state_count,
                    "transitions": ps.transition_count,
                    "edges": ps.edge_count,
                    "degree_of_nondeterminism": ps.degree_of_nondeterminism,
                },
            });
            if belief {
                let bs = p.graph.stats();
                doc["belief"] = json!({
                    "states": bs.state_count,
                    "transitions": bs.transition_count,
                    "edges": bs.edge_count,
                });
            }
            write_out(out, &to_canonical_json(&doc))
        }
        Command::CompileFormula { formula, ap, dot } => {
            let ap = ApSet::new(ap);
            let f = parse_formula(&formula, &ap).map_err(input)?;
            let dfa = compile_to_dfa(&f, &ap).map_err(input)?;
            if dot {
                return write_out(out, &dfa_dot(&dfa));
            }
            let mut transitions = Vec::new();
            for q in 0..dfa.state_count() as u32 {
                for letter in 0..dfa.alphabet_size() as u32 {
                    let names: Vec<&str> = PropSet(letter).iter().map(|i| ap.name(i)).collect();
                    transitions.push(json!({"from": q, "letter": names, "to": dfa.step(q, PropSet(letter))}));
                }
            }
            let doc = json!({
                "ap": ap.names(),
                "formula": f.display(&ap).to_string(),
                "states": dfa.state_count(),
                "init": dfa.init(),
                "accepting": dfa.accepting_states().collect::<Vec<_>>(),
                "transitions": transitions,
            });
            write_out(out, &to_canonical_json(&doc))
        }
        Command::Casestudy { name: _, out: path } => {
            write_to(path.as_deref(), out, &model_to_json(&generate_grid_casestudy()))
        }
        Command::Fuzz { seeds, show } => {
            let range = match seeds {
                Some(s) => parse_seeds(&s).ok_or_else(|| input(format!("bad seed range {s}")))?,
                None => {
                    let s = default_seed();
                    s..s + 1
                }
            };
            let mut failed = 0usize;
            for seed in range {
                let inst = random_instance(seed);
                for conv in conv_flag.map_or(vec![LabelingConvention::Target, LabelingConvention::Source], |c| vec![c]) {
                    let report = check_instance(seed, &inst, conv);
                    let mut j = serde_json::to_value(&report).expect("serializable");
                    j["ok"] = Json::from(report.ok());
                    if show {
                        j["formula"] = Json::from(inst.formula.clone());
                        j["model"] = serde_json::to_value(&inst.model).expect("serializable");
                    }
                    if !report.ok() {
                        failed += 1;
                    }
                    write_out(out, &line(&j))?;
                }
            }
            if failed > 0 {
                Err(Failure::Negative(json!({"error": "cross-check failed", "count": failed})))
            } else {
                Ok(())
            }
        }
        Command::Sweep { model, formula, k_max, expand_settled } => {
            if k_max == 0 {
                return Err(input("--k-max must be at least 1"));
            }
            let m = load_model(&model)?;
            let p = pipeline(m, &formula, conv, expand_settled)?;
            let offset = match p.convention() {
                LabelingConvention::Target => p.graph.init_cost(),
                LabelingConvention::Source => Default::default(),
            };
            let mut text = String::new();
            for (i, v) in wtg_profile(&p.graph, k_max).into_iter().enumerate() {
                let total = v.plus(offset);
                text.push_str(&line(&json!({"k": i + 1, "total": total.to_string()})));
            }
            write_out(out, &text)
        }
    }
}

fn parse_seeds(s: &str) -> Option<std::ops::Range<u64>> {
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            (a <= b).then_some(a..b)
        }
        None => {
            let a: u64 = s.trim().parse().ok()?;
            Some(a..a + 1)
        }
    }
}

fn model_stats(m: &NtsModel) -> Json {
    let sizes: Vec<usize> =
        m.state_ids().flat_map(|s| m.action_ids().map(move |a| m.post(s, a).len())).collect();
    let enabled = sizes.iter().filter(|n| **n > 0).count();
    let edges: usize = sizes.iter().sum();
    json!({
        "states": m.state_count(),
        "actions": m.action_count(),
        "modes": m.mode_count(),
        "propositions": m.propositions().len(),
        "observations": m.observation_names().len(),
        "transitions": enabled,
        "edges": edges,
        "degree_of_nondeterminism": m.degree_of_nondeterminism(),
    })
}

fn load_strategy(
    model: NtsModel,
    path: &Path,
    formula: Option<&str>,
    conv_flag: Option<LabelingConvention>,
) -> Result<(Pipeline, Strategy), Failure> {
    let file = StrategyFile::load(path)?;
    if formula.is_some_and(|f| f != file.formula) {
        return Err(input("formula differs from the one recorded in the strategy file"));
    }
    if conv_flag.is_some_and(|c| c != file.convention) {
        return Err(input("--labeling differs from the convention recorded in the strategy file"));
    }
    let p = pipeline(model, &file.formula, file.convention, file.expand_settled)?;
    let s = file.to_strategy(&p.model, &p.product, &p.graph).map_err(|message| {
        Failure::Input(LoadError::Strategy { path: path.display().to_string(), message }.to_json())
    })?;
    if !s.wtg(p.graph.init()).is_finite() {
        return Err(Failure::Negative(json!({"error": "strategy is not winning at the initial belief"})));
    }
    Ok((p, s))
}

/// One adversarial execution; `pick` chooses the true successor.
fn play(
    p: &Pipeline,
    s: &Strategy,
    run: u32,
    mut pick: impl FnMut(&[ProductId]) -> ProductId,
) -> Result<Vec<Json>, Failure> {
    let mut records = Vec::new();
    let mut session = start_session(s, &p.graph).map_err(input)?;
    let mut state = p.product.init();
    let limit = p.graph.len() as u32 + 1;
    while session.status() == SessionStatus::Running {
        if session.steps() > limit {
            return Err(Failure::Negative(json!({"error": "run exceeded the belief count without satisfaction", "run": run})));
        }
        let belief = session.current_belief();
        let act = session.next_command().map_err(input)?;
        let succ = p.product.post(state, act.action);
        if succ.is_empty() {
            return Err(Failure::Negative(json!({"error": "commanded action is disabled", "run": run})));
        }
        state = pick(succ);
        let st = p.product.state(state).state;
        let obs = p.model.observe(act.mode, st).clone();
        let status = session.feed_observation(&obs).map_err(input)?;
        records.push(json!({
            "run": run,
            "step": session.steps(),
            "belief": belief,
            "command": command_json(&p.model, act),
            "state": p.model.state_name(st),
            "observation": p.model.obs_names(&obs),
            "cost": session.accumulated_cost().to_string(),
            "status": match status {
                SessionStatus::Running => "running",
                SessionStatus::Satisfied => "satisfied",
                SessionStatus::OffStrategy => "off-strategy",
            },
        }));
    }
    Ok(records)
}

fn simulate(p: &Pipeline, s: &Strategy, adversary: Adversary, runs: u32, seed: u64, out: Out) -> Result<(), Failure> {
    let mut text = String::new();
    match adversary {
        Adversary::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for run in 0..runs {
                for r in play(p, s, run, |succ| *succ.choose(&mut rng).expect("non-empty"))? {
                    text.push_str(&line(&r));
                }
            }
        }
        Adversary::Exhaustive => {
            // enumerate adversary choices as index sequences, odometer style
            let mut run = 0u32;
            let mut script: Vec<usize> = Vec::new();
            loop {
                let mut widths = Vec::new();
                let mut depth = 0;
                let records = play(p, s, run, |succ| {
                    let i = script.get(depth).copied().unwrap_or(0);
                    widths.push(succ.len());
                    depth += 1;
                    succ[i]
                })?;
                for r in records {
                    text.push_str(&line(&r));
                }
                run += 1;
                script.resize(widths.len(), 0);
                while let Some(last) = script.pop() {
                    if last + 1 < widths[script.len()] {
                        script.push(last + 1);
                        break;
                    }
                }
                if script.is_empty() {
                    break;
                }
            }
        }
    }
    write_out(out, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = cli_main(std::iter::once("obsmode").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("3..7"), Some(3..7));
        assert_eq!(parse_seeds("4"), Some(4..5));
        assert_eq!(parse_seeds("7..3"), None);
        assert_eq!(parse_seeds("x"), None);
    }

    #[test]
    fn compile_formula_reports_three_states() {
        let (code, out, _) = run_args(&["compile-formula", "(! dang) U target", "--ap", "dang,target"]);
        assert_eq!(code, 0);
        let j: Json = serde_json::from_str(&out).unwrap();
        assert_eq!(j["states"], 3);
    }

    #[test]
    fn conflicting_flags_exit_two() {
        let (code, _, err) = run_args(&["synth", "m.json", "--formula", "F p", "--bound", "3", "--unbounded"]);
        assert_eq!(code, 2);
        assert!(err.contains("cannot be used with"));
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let (code, _, err) = run_args(&["inspect", "/nonexistent/model.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("\"io\""));
    }
}
