use std::collections::BTreeSet;

use proptest::prelude::*;
use topiso::closure::closure_of;
use topiso::format::{graph_from_json, graph_to_json, parse_coloring, parse_graph_str, serialize_coloring, serialize_graph};
use topiso::generate::{generate, random_permutation, Family};
use topiso::group::PermGroup;
use topiso::iso::{isomorphisms, IsoOutcome, IsoParams};
use topiso::refine::{color_refine, wl};
use topiso::report::RunReport;
use topiso::{ColoredGraph, Permutation};

fn graph() -> impl Strategy<Value = ColoredGraph> {
    (1usize..12).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n), 0..2 * n),
            prop::collection::vec(0u64..3, n),
            prop::collection::vec((0..n, 0..n, 1u64..4), 0..4),
        )
            .prop_map(|(n, edges, colors, arcs)| {
                let edges: BTreeSet<(usize, usize)> =
                    edges.into_iter().filter(|(u, v)| u != v).map(|(u, v)| (u.min(v), u.max(v))).collect();
                let mut b = ColoredGraph::builder(n);
                for (u, v) in edges {
                    b.add_edge(u, v).unwrap();
                }
                for (v, c) in colors.into_iter().enumerate() {
                    b.vertex_color(v, c).unwrap();
                }
                let mut g = b.build();
                let present: Vec<(usize, usize, u64)> = arcs.into_iter().filter(|&(u, v, _)| g.has_edge(u, v)).collect();
                if !present.is_empty() {
                    let mut b = ColoredGraph::builder(n);
                    for (u, v) in g.edges() {
                        b.add_edge(u, v).unwrap();
                    }
                    for v in 0..n {
                        b.vertex_color(v, g.vertex_color(v)).unwrap();
                    }
                    for (u, v, c) in present {
                        b.arc_color(u, v, c).unwrap();
                    }
                    g = b.build();
                }
                g
            })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    any::<u64>().prop_map(move |seed| random_permutation(n, seed))
}

fn graph_and_perm() -> impl Strategy<Value = (ColoredGraph, Permutation)> {
    graph().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), permutation(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_format_round_trips(g in graph()) {
        prop_assert_eq!(parse_graph_str(&serialize_graph(&g)).unwrap(), g);
    }

    #[test]
    fn json_format_round_trips(g in graph()) {
        prop_assert_eq!(graph_from_json(graph_to_json(&g).as_bytes()).unwrap(), g);
    }

    #[test]
    fn coloring_round_trips(g in graph(), k in 1usize..3) {
        let c = wl(&g, k).unwrap();
        let back = parse_coloring(&serialize_coloring(&c), g.n()).unwrap();
        prop_assert!(back.same_partition(&c));
    }

    #[test]
    fn cycle_notation_round_trips(p in (1usize..10).prop_flat_map(permutation)) {
        prop_assert_eq!(Permutation::parse_cycles(p.degree(), &p.to_cycle_string()).unwrap(), p.clone());
        prop_assert!(p.then(&p.inverse()).is_identity());
    }

    #[test]
    fn renaming_is_an_isomorphism((g, p) in graph_and_perm()) {
        let h = g.apply_permutation(&p).unwrap();
        prop_assert!(g.is_isomorphism(&h, &p));
        prop_assert_eq!(h.apply_permutation(&p.inverse()).unwrap(), g.clone());
        prop_assert_eq!(color_refine(&g).num_colors(), color_refine(&h).num_colors());
    }

    #[test]
    fn groups_contain_their_generators(gens in (1usize..7).prop_flat_map(|n| prop::collection::vec(permutation(n), 0..3))) {
        let n = gens.first().map_or(1, Permutation::degree);
        let group = PermGroup::from_generators(n, &gens).unwrap();
        for g in &gens {
            prop_assert!(group.contains(g).unwrap());
        }
        let factorial: u64 = (1..=n as u64).product();
        let order: u64 = group.order().try_into().unwrap();
        prop_assert_eq!(factorial % order, 0);
        let mut covered: Vec<usize> = group.orbits().concat();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn closure_is_extensive_and_idempotent(g in graph(), t in 1u64..6, seed in any::<u64>()) {
        let x: Vec<usize> = (0..g.n()).filter(|v| (seed >> (v % 64)) & 1 == 1).collect();
        let cl = closure_of(&g, t, &x).unwrap();
        prop_assert!(x.iter().all(|v| cl.binary_search(v).is_ok()));
        prop_assert_eq!(closure_of(&g, t, &cl).unwrap(), cl);
    }

    #[test]
    fn report_json_round_trips(command in "[a-z]{1,8}", nodes in any::<u64>(), detail in ".{0,12}") {
        let mut r = RunReport::new(&command);
        r.nodes = nodes;
        r.detail("note", &detail);
        prop_assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn isomorphism_is_symmetric(n in 4usize..16, seed in any::<u64>(), t in prop::option::of(1u64..3)) {
        let g = generate(&Family::RandomMaxDegree { n, d: 3 }, seed).unwrap();
        let p = random_permutation(n, seed.rotate_left(7));
        let h = g.apply_permutation(&p).unwrap();
        let mut params = IsoParams::new(5);
        if let Some(t) = t {
            params = params.with_t(t);
        }
        let forward = isomorphisms(&g, &h, &params).unwrap();
        let backward = isomorphisms(&h, &g, &params).unwrap();
        match (forward, backward) {
            (IsoOutcome::Isomorphic(f), IsoOutcome::Isomorphic(b)) => {
                prop_assert!(f.contains(&p).unwrap());
                prop_assert!(b.contains(&p.inverse()).unwrap());
                prop_assert!(f.inverse().same_set(&b));
            }
            other => prop_assert!(false, "unexpected outcomes {:?}", other),
        }
    }
}
