use obsmode::formats::{model_to_json, parse_model, StrategyFile};
use obsmode::fuzz::random_instance;
use obsmode::pipeline::Pipeline;
use obsmode_core::belief::BeliefOptions;
use obsmode_core::oracle::{verify_strategy, VerifyOptions};
use obsmode_core::runtime::{start_session, SessionStatus};
use obsmode_core::synthesis::{synth_bounded, synth_unbounded, wtg_profile};
use obsmode_core::{validate_model, LabelingConvention, Value};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pipeline(seed: u64, target: bool) -> Option<Pipeline> {
    let inst = random_instance(seed);
    let conv = if target { LabelingConvention::Target } else { LabelingConvention::Source };
    let model = validate_model(&inst.model).ok()?;
    Pipeline::build(model, &inst.formula, conv, BeliefOptions::default()).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn model_json_round_trips(seed in 0u64..10_000) {
        let model = validate_model(&random_instance(seed).model).unwrap();
        let text = model_to_json(&model);
        let back = parse_model(&text, "m.json").unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(model_to_json(&back), text);
    }

    #[test]
    fn strategy_file_rebinds_to_the_same_strategy(seed in 0u64..10_000, target: bool, k in 1u32..6) {
        let Some(p) = pipeline(seed, target) else { return Ok(()) };
        let mut strategies = Vec::new();
        if let Ok(s) = synth_unbounded(&p.graph) { strategies.push(s.strategy) }
        if let Ok(s) = synth_bounded(&p.graph, k) { strategies.push(s.strategy) }
        for s in strategies {
            let file = StrategyFile::from_strategy(&p.model, &p.product, &p.graph, &p.formula_text, false, &s);
            let parsed = StrategyFile::parse(&file.to_json(), "s.json").unwrap();
            prop_assert_eq!(&parsed, &file);
            prop_assert_eq!(parsed.to_strategy(&p.model, &p.product, &p.graph).unwrap(), s);
        }
    }

    #[test]
    fn tracked_belief_contains_the_true_state(seed in 0u64..10_000, target: bool, run_seed: u64, k in 1u32..8) {
        let Some(p) = pipeline(seed, target) else { return Ok(()) };
        let Ok(syn) = synth_bounded(&p.graph, k) else { return Ok(()) };
        let s = syn.strategy;
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
        let mut session = start_session(&s, &p.graph).unwrap();
        let mut truth = p.product.init();
        let mut cost = p.graph.init_cost();
        let mut status = session.status();
        while status == SessionStatus::Running {
            prop_assert!(p.graph.members(session.current_belief()).contains(&truth));
            let cmd = session.next_command().unwrap();
            let post = p.product.post(truth, cmd.action);
            truth = post[rng.gen_range(0..post.len())];
            cost = cost + p.model.cost(cmd.mode);
            let obs = p.model.observe(cmd.mode, p.product.state(truth).state).clone();
            status = session.feed_observation(&obs).unwrap();
            prop_assert!(session.steps() <= k);
        }
        prop_assert_eq!(status, SessionStatus::Satisfied);
        prop_assert!(p.graph.members(session.current_belief()).contains(&truth));
        prop_assert_eq!(session.accumulated_cost(), cost);
        prop_assert!(Value::Finite(cost) <= s.wtg(p.graph.init()).plus(p.graph.init_cost()));
    }

    #[test]
    fn bounded_values_decrease_to_the_unbounded_value(seed in 0u64..10_000, target: bool) {
        let Some(p) = pipeline(seed, target) else { return Ok(()) };
        let k_max = p.graph.len() as u32;
        let profile = wtg_profile(&p.graph, k_max);
        prop_assert!(profile.windows(2).all(|w| w[1] <= w[0]));
        let unbounded = synth_unbounded(&p.graph).map_or(Value::Unreachable, |s| s.strategy.wtg(p.graph.init()));
        prop_assert_eq!(*profile.last().unwrap(), unbounded);
    }

    #[test]
    fn unbounded_strategies_never_revisit_a_belief(seed in 0u64..10_000, target: bool) {
        let Some(p) = pipeline(seed, target) else { return Ok(()) };
        let Ok(syn) = synth_unbounded(&p.graph) else { return Ok(()) };
        let r = verify_strategy(&p.model, &p.formula, &p.product, &p.graph, &syn.strategy, VerifyOptions::default());
        prop_assert!(r.satisfies);
        prop_assert!((r.worst_case_steps.unwrap() as usize) < p.graph.len());
    }

    #[test]
    fn synthesis_is_deterministic(seed in 0u64..10_000, target: bool) {
        let (Some(a), Some(b)) = (pipeline(seed, target), pipeline(seed, target)) else { return Ok(()) };
        prop_assert_eq!(a.graph.stats(), b.graph.stats());
        prop_assert!(a.graph.ids().all(|x| a.graph.members(x) == b.graph.members(x) && a.graph.edges(x) == b.graph.edges(x)));
        prop_assert_eq!(synth_unbounded(&a.graph).ok().map(|s| s.strategy), synth_unbounded(&b.graph).ok().map(|s| s.strategy));
    }
}
