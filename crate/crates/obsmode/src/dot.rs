//! Graphviz renderings of automata, products and belief graphs.

use std::fmt::Write;

use obsmode_core::belief::BeliefGraph;
use obsmode_core::dfa::Dfa;
use obsmode_core::model::{NtsModel, PropSet};
use obsmode_core::product::Product;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn letter_name(dfa: &Dfa, letter: usize) -> String {
    let names: Vec<&str> =
        PropSet(letter as u32).iter().map(|i| dfa.ap().name(i)).collect();
    format!("{{{}}}", names.join(","))
}

/// Parallel edges are merged into one edge listing all letters.
pub fn dfa_dot(dfa: &Dfa) -> String {
    let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  start [shape=point];\n");
    for q in 0..dfa.state_count() as u32 {
        let shape = if dfa.is_accepting(q) { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  q{q} [shape={shape}];");
    }
    let _ = writeln!(out, "  start -> q{};", dfa.init());
    for q in 0..dfa.state_count() as u32 {
        let mut targets: Vec<(u32, Vec<String>)> = Vec::new();
        for letter in 0..dfa.alphabet_size() {
            let t = dfa.step(q, PropSet(letter as u32));
            match targets.iter_mut().find(|(x, _)| *x == t) {
                Some((_, ls)) => ls.push(letter_name(dfa, letter)),
                None => targets.push((t, vec![letter_name(dfa, letter)])),
            }
        }
        for (t, ls) in targets {
            let _ = writeln!(out, "  q{q} -> q{t} [label={}];", quote(&ls.join(" ")));
        }
    }
    out.push_str("}\n");
    out
}

pub fn product_dot(model: &NtsModel, product: &Product) -> String {
    let mut out = String::from("digraph product {\n  start [shape=point];\n");
    for p in 0..product.len() as u32 {
        let ps = product.state(p);
        let shape = if product.is_accepting(p) { "doublecircle" } else { "ellipse" };
        let label = format!("({}, q{})", model.state_name(ps.state), ps.dfa);
        let _ = writeln!(out, "  p{p} [shape={shape}, label={}];", quote(&label));
    }
    let _ = writeln!(out, "  start -> p{};", product.init());
    for p in 0..product.len() as u32 {
        for a in model.action_ids() {
            for t in product.post(p, a) {
                let _ = writeln!(out, "  p{p} -> p{t} [label={}];", quote(model.action_name(a)));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Edges are labelled `action, mode / weight : observation`.
pub fn belief_dot(model: &NtsModel, product: &Product, graph: &BeliefGraph) -> String {
    let mut out = String::from("digraph belief {\n  start [shape=point];\n");
    for b in graph.ids() {
        let members: Vec<String> = graph
            .members(b)
            .iter()
            .map(|p| {
                let ps = product.state(*p);
                format!("({},q{})", model.state_name(ps.state), ps.dfa)
            })
            .collect();
        let shape = if graph.is_accepting(b) { "doubleoctagon" } else { "box" };
        let _ = writeln!(out, "  b{b} [shape={shape}, label={}];", quote(&members.join(" ")));
    }
    let _ = writeln!(out, "  start -> b{};", graph.init());
    for b in graph.ids() {
        for edge in graph.edges(b) {
            for (obs, t) in &edge.successors {
                let label = format!(
                    "{}, {} / {} : {{{}}}",
                    model.action_name(edge.action.action),
                    model.mode_name(edge.action.mode),
                    edge.weight,
                    model.obs_names(obs).join(",")
                );
                let _ = writeln!(out, "  b{b} -> b{t} [label={}];", quote(&label));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use obsmode_core::dfa::compile_to_dfa;
    use obsmode_core::formula::{parse_formula, ApSet};

    #[test]
    fn dfa_has_one_node_per_state() {
        let ap = ApSet::new(["dang", "target"]);
        let dfa = compile_to_dfa(&parse_formula("(! dang) U target", &ap).unwrap(), &ap).unwrap();
        let dot = dfa_dot(&dfa);
        assert_eq!(dot.matches("shape=circle").count() + dot.matches("shape=doublecircle").count(), 3);
        assert!(dot.starts_with("digraph dfa {"));
        assert!(dot.ends_with("}\n"));
    }

    #[test]
    fn quotes_are_escaped() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }
}
