use proptest::prelude::*;

use pushsaga_core::digraph::{
    build_cycle_plus_edges, build_exponential_graph, build_geometric_digraph, make_column_stochastic,
    pushsum_profile, spectral_profile, DirectedGraph,
};

fn generated(kind: u8, n: usize, seed: u64) -> DirectedGraph {
    match kind {
        0 => build_exponential_graph(n).unwrap(),
        1 => {
            let room = n * (n - 1) - n;
            build_cycle_plus_edges(n, (seed as usize) % (room + 1), seed).unwrap()
        }
        _ => build_geometric_digraph(n, 0.45, seed).unwrap(),
    }
}

/// Plain reachability from node 0 both forward and backward.
fn reachable_everywhere(g: &DirectedGraph) -> bool {
    let n = g.n();
    let search = |adj: &dyn Fn(usize) -> Vec<usize>| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for u in adj(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    let incoming = g.in_neighbors();
    search(&|v| g.out_neighbors(v).to_vec()) && search(&|v| incoming[v].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_graphs_satisfy_the_network_invariants(kind in 0u8..3, n in 2usize..40, seed in 0u64..10_000) {
        let g = generated(kind, n, seed);
        prop_assert!(g.is_strongly_connected());
        prop_assert!(reachable_everywhere(&g));
        prop_assert!((0..n).all(|i| g.has_edge(i, i)));

        let b = make_column_stochastic::<f64>(&g);
        for j in 0..n {
            prop_assert!((b.column_sum(j) - 1.0).abs() <= 1e-12);
        }

        let prof = spectral_profile(&b, 1e-13).unwrap();
        prop_assert!(prof.psi >= 1.0);
        prop_assert!(prof.lambda >= 0.0 && prof.lambda < 1.0);
        for s in pushsum_profile(&prof, 60) {
            prop_assert!(((s.mass - n as f64) / n as f64).abs() <= 1e-10, "mass {} at {}", s.mass, s.k);
            prop_assert!(s.deviation <= s.bound + 1e-9, "step {}: {} > {}", s.k, s.deviation, s.bound);
        }
        if b.is_doubly_stochastic(1e-12) {
            prop_assert!((prof.psi - 1.0).abs() <= 1e-10);
        }

        let again = spectral_profile(&b, 1e-13).unwrap();
        prop_assert_eq!(format!("{:?}", prof), format!("{:?}", again));
    }

    #[test]
    fn text_format_round_trips(kind in 0u8..3, n in 2usize..30, seed in 0u64..1000) {
        let g = generated(kind, n, seed);
        let text = g.to_text();
        prop_assert_eq!(DirectedGraph::from_text(&text).unwrap(), g);
    }
}

#[test]
fn two_disjoint_cycles_are_not_strongly_connected() {
    let g = DirectedGraph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
    assert!(!g.is_strongly_connected());
    assert!(!reachable_everywhere(&g));
    assert!(build_exponential_graph(64).unwrap().is_strongly_connected());
}
