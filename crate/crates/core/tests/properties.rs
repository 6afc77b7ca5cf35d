//! Property tests over randomly generated graphs and programs.

use std::collections::BTreeMap;

use gp2_core::bigstep::old_semantic_function;
use gp2_core::explorer::{compare_semantics, new_semantic_function};
use gp2_core::fixtures::{program_with_rules, random_graph, random_program};
use gp2_core::graph::{
    canonical_key, is_isomorphic, make_comb, parse_host_graph, serialize_host_graph, GraphBuilder,
    HostGraph,
};
use gp2_core::outcome::{Bottom, Bounds, OutcomeSet, Stuck};
use gp2_core::program::{
    check_context_conditions, expand_procedures, parse_command, parse_program, Command,
};
use gp2_core::smallstep::{ExtConfig, Machine, Runner, StepOutcome, Strategy};
use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bounds() -> Bounds {
    Bounds {
        max_states: 2_000,
        max_depth: 200,
        old_fuel: 1_000,
        parallel: false,
    }
}

/// The same graph with shuffled node and edge identifiers.
fn renamed(g: &HostGraph, rng: &mut ChaCha8Rng) -> HostGraph {
    let mut ids: Vec<usize> = (0..g.node_count()).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    let name = |i: usize| format!("v{}", ids[i]);
    let mut b = GraphBuilder::new();
    for (i, n) in g.nodes().iter().enumerate() {
        b.add_node(name(i), n.label.clone(), n.mark, n.rooted)
            .unwrap();
    }
    for (k, e) in g.edges().iter().enumerate().rev() {
        b.add_edge(
            format!("e{k}"),
            &name(e.source),
            &name(e.target),
            e.label.clone(),
            e.mark,
        )
        .unwrap();
    }
    b.build()
}

/// Isomorphism by trying every node bijection.
fn brute_force_iso(a: &HostGraph, b: &HostGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let node_sig = |g: &HostGraph, i: usize| {
        let n = g.node(i);
        (n.label.clone(), n.mark, n.rooted)
    };
    let edge_bag = |g: &HostGraph, map: &dyn Fn(usize) -> usize| {
        let mut bag = BTreeMap::new();
        for e in g.edges() {
            *bag.entry((map(e.source), map(e.target), e.label.clone(), e.mark))
                .or_insert(0) += 1;
        }
        bag
    };
    let target = edge_bag(b, &|i| i);
    (0..a.node_count())
        .permutations(a.node_count())
        .any(|perm| {
            (0..a.node_count()).all(|i| node_sig(a, i) == node_sig(b, perm[i]))
                && edge_bag(a, &|i| perm[i]) == target
        })
}

fn small_graph(seed: u64) -> HostGraph {
    random_graph(&mut rng(seed), 5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn host_graph_text_round_trips(seed in any::<u64>()) {
        let g = small_graph(seed);
        let text = serialize_host_graph(&g);
        let back = parse_host_graph(&text).unwrap();
        prop_assert_eq!(serialize_host_graph(&back), text);
    }

    #[test]
    fn renaming_preserves_isomorphism_class(seed in any::<u64>()) {
        let g = small_graph(seed);
        let h = renamed(&g, &mut rng(seed ^ 1));
        prop_assert!(is_isomorphic(&g, &h));
        prop_assert_eq!(canonical_key(&g), canonical_key(&h));
    }

    #[test]
    fn keys_agree_with_brute_force_isomorphism(a in any::<u64>(), b in any::<u64>()) {
        let (g, h) = (small_graph(a), small_graph(b));
        let iso = brute_force_iso(&g, &h);
        prop_assert_eq!(is_isomorphic(&g, &h), iso);
        prop_assert_eq!(canonical_key(&g) == canonical_key(&h), iso);
    }

    #[test]
    fn comb_has_k_teeth(k in 1usize..40) {
        let g = make_comb(k).unwrap();
        let teeth = (0..g.node_count()).filter(|&v| g.indegree(v) == 0 && g.outdegree(v) == 1).count();
        prop_assert_eq!(teeth, k);
        prop_assert_eq!((g.node_count(), g.edge_count()), (2 * k, 2 * k - 1));
    }

    #[test]
    fn printed_programs_parse_back(seed in any::<u64>()) {
        let c = random_program(&mut rng(seed), 4);
        prop_assert_eq!(parse_command(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn expansion_preserves_context_validity(seed in any::<u64>()) {
        let c = random_program(&mut rng(seed), 3);
        let text = format!("Body = {c}\nMain = Body; Body\n{}", gp2_core::fixtures::rule_declarations());
        let p = expand_procedures(&parse_program(&text).unwrap()).unwrap();
        prop_assert_eq!(&p.main, &Command::seq(c.clone(), c));
        prop_assert!(check_context_conditions(&p.main).is_ok());
    }

    #[test]
    fn random_runs_never_block(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = program_with_rules(&random_program(&mut r, 4).to_string());
        let m = Machine::new(&p);
        let mut runner = Runner::new(&m, m.initial(random_graph(&mut r, 5)).unwrap());
        let mut chooser = Strategy::Random(seed).chooser();
        for _ in 0..300 {
            if let ExtConfig::Running(c, s) = runner.current() {
                prop_assert_eq!(s.len(), c.count_aux() + 1);
            }
            match runner.step(&mut *chooser).unwrap() {
                StepOutcome::Moved(_) => {}
                StepOutcome::Finished(status) => {
                    prop_assert_eq!(status, gp2_core::smallstep::RunStatus::Terminated);
                    if let ExtConfig::Stack(s) = runner.current() {
                        prop_assert_eq!(s.len(), 1);
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn successors_are_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = program_with_rules(&random_program(&mut r, 3).to_string());
        let m = Machine::new(&p);
        let start = m.initial(random_graph(&mut r, 4)).unwrap();
        let once: Vec<String> = m.successors(&start).unwrap().iter().map(|(l, c)| format!("{l} {c}")).collect();
        let twice: Vec<String> = m.successors(&start).unwrap().iter().map(|(l, c)| format!("{l} {c}")).collect();
        prop_assert_eq!(once, twice);
    }
}

fn loop_free(c: &Command) -> bool {
    let mut free = true;
    c.visit(&mut |c| free &= !matches!(c, Command::Loop(_)));
    free
}

fn branch_free(c: &Command) -> bool {
    let mut free = true;
    c.visit(&mut |c| {
        free &= !matches!(
            c,
            Command::Loop(_) | Command::If { .. } | Command::Try { .. }
        )
    });
    free
}

/// Programs drawn until `keep` accepts one.
fn program_where(r: &mut ChaCha8Rng, depth: usize, keep: impl Fn(&Command) -> bool) -> Command {
    loop {
        let c = random_program(r, depth);
        if keep(&c) {
            return c;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loop_free_programs_do_not_get_stuck(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = program_where(&mut r, 3, loop_free);
        let out = old_semantic_function(&program_with_rules(&c.to_string()), random_graph(&mut r, 5), &bounds()).unwrap();
        prop_assert_eq!(out.stuck, Stuck::None);
        prop_assert!(!out.exhausted);
    }

    #[test]
    fn single_loops_over_loop_free_bodies_do_not_get_stuck(seed in any::<u64>()) {
        let mut r = rng(seed);
        let body = program_where(&mut r, 2, loop_free);
        let p = program_with_rules(&Command::looped(body).to_string());
        let out = old_semantic_function(&p, random_graph(&mut r, 4), &bounds()).unwrap();
        prop_assert_ne!(out.stuck, Stuck::Definite);
    }

    #[test]
    fn semantics_coincide_without_branching(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = program_where(&mut r, 3, branch_free);
        let p = program_with_rules(&c.to_string());
        let g = random_graph(&mut r, 5);
        let old = old_semantic_function(&p, g.clone(), &bounds()).unwrap();
        let new = new_semantic_function(&p, g, &bounds()).unwrap();
        prop_assert_eq!(old, new);
    }

    #[test]
    fn closed_comparisons_satisfy_the_theorem(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = program_with_rules(&random_program(&mut r, 3).to_string());
        let report = compare_semantics(&p, random_graph(&mut r, 4), &bounds()).unwrap();
        if report.closed {
            prop_assert!(report.contained && report.equal_excluding_bottom, "{:?}", report.violations);
        }
    }
}

#[test]
fn growing_loop_flags_bottom_at_every_depth() {
    let p = program_with_rules("try ({r1, r2}!) then skip else skip");
    let mut previous = 0;
    for depth in [32, 64, 128, 256] {
        let out = new_semantic_function(
            &p,
            gp2_core::fixtures::grey_node(),
            &Bounds {
                max_depth: depth,
                ..bounds()
            },
        )
        .unwrap();
        assert!(out.graphs.len() > previous, "{depth}: {out:?}");
        assert_eq!(out.bottom, Bottom::FuelPossible);
        previous = out.graphs.len();
    }
}

#[test]
fn outcome_sets_serialize_with_stable_fields() {
    let mut out = OutcomeSet::empty();
    out.graphs.insert("[ | ]".into());
    out.bottom = Bottom::CycleDefinite;
    let v = serde_json::to_value(&out).unwrap();
    assert_eq!(v["graphs"], serde_json::json!(["[ | ]"]));
    assert_eq!(v["fail"], false);
    assert_eq!(v["bottom"], "cycle-definite");
    assert_eq!(v["stuck"], "none");
    assert_eq!(v["exhausted"], false);
}
