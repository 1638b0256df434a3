mod common;

use common::*;
use graphtext::graph::{make_split, GraphParts};
use graphtext::{Error, Graph, NodeId, Split, SplitPolicy};
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(NodeId, NodeId)>)> {
    (1..=max_n).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n), 0..(n * 2).max(1));
        (Just(n), edges)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn khop_matches_adjacency_powers((n, edges) in arb_graph(30), directed in any::<bool>()) {
        let g = Graph::from_parts(GraphParts {
            num_nodes: n,
            directed,
            edges: edges.iter().map(|&(a, b)| (a, b, None)).collect(),
            features: vec![0.0; n],
            dim: 1,
            ..GraphParts::default()
        }).unwrap().0;
        let truth = matrix_levels(n, &edges, directed, 3);
        for v in 0..n {
            prop_assert_eq!(&g.khop_neighbors(v, 3).unwrap().levels, &truth[v]);
        }
    }

    #[test]
    fn levels_disjoint_and_symmetric((n, edges) in arb_graph(30)) {
        let g = plain_graph(n, &edges);
        let all: Vec<_> = (0..n).map(|v| g.khop_neighbors(v, 3).unwrap().levels).collect();
        for v in 0..n {
            let mut seen = vec![v];
            for (k, level) in all[v].iter().enumerate() {
                prop_assert!(level.windows(2).all(|w| w[0] < w[1]), "level not sorted");
                for &u in level {
                    prop_assert!(!seen.contains(&u), "{} repeated in levels of {}", u, v);
                    prop_assert!(all[u][k].contains(&v), "distance not symmetric for {} {}", u, v);
                }
                seen.extend(level);
            }
        }
    }

    #[test]
    fn paths_match_brute_force((n, edges) in arb_graph(12), limit in 1usize..20) {
        let g = plain_graph(n, &edges);
        for v in 0..n {
            for k in 2..=3 {
                let brute = brute_paths(n, &edges, v, k);
                let full = g.paths_to_level(v, k, usize::MAX).unwrap();
                prop_assert_eq!(&full.paths, &brute);
                prop_assert!(!full.truncated);
                let cut = g.paths_to_level(v, k, limit).unwrap();
                prop_assert_eq!(&cut.paths[..], &brute[..brute.len().min(limit)]);
                prop_assert_eq!(cut.truncated, brute.len() > limit);
            }
        }
    }

    #[test]
    fn split_is_a_pure_function_of_seed((n, _) in arb_graph(60), seed in any::<u64>()) {
        let g = plain_graph(n, &[]);
        let policy = SplitPolicy::ratio(0.54, 0.18, 0.28).unwrap();
        let a = make_split(&g, &policy, seed).unwrap();
        let b = std::thread::spawn(move || make_split(&g, &policy, seed).unwrap()).join().unwrap();
        prop_assert_eq!(a.splits(), b.splits());
    }
}

#[test]
fn triangle_with_tail_paths() {
    let g = plain_graph(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
    let got = g.paths_to_level(0, 2, 100).unwrap().paths;
    assert_eq!(got, brute_paths(4, &[(0, 1), (1, 2), (0, 2), (2, 3)], 0, 2));
    assert_eq!(got, vec![vec![0, 1, 2], vec![0, 2, 1], vec![0, 2, 3]]);
}

#[test]
fn path_graph_levels() {
    let g = plain_graph(4, &[(0, 1), (1, 2), (2, 3)]);
    assert_eq!(g.khop_neighbors(0, 3).unwrap().levels, vec![vec![1], vec![2], vec![3]]);
    assert_eq!(g.paths_to_level(0, 2, 10).unwrap().paths, vec![vec![0, 1, 2]]);
}

#[test]
fn hop_range_is_checked() {
    let g = plain_graph(3, &[(0, 1)]);
    assert!(matches!(g.khop_neighbors(0, 0), Err(Error::HopOutOfRange { .. })));
    assert!(matches!(g.paths_to_level(0, 1, 10), Err(Error::HopOutOfRange { .. })));
    assert!(matches!(g.khop_neighbors(3, 1), Err(Error::NodeOutOfRange { .. })));
}

#[test]
fn self_loops_and_duplicates_are_counted() {
    let (g, report) = Graph::from_parts(GraphParts {
        num_nodes: 3,
        edges: vec![(0, 0, None), (0, 1, None), (1, 0, None), (1, 2, None)],
        features: vec![0.0; 3],
        dim: 1,
        ..GraphParts::default()
    })
    .unwrap();
    assert_eq!(report.self_loops, 1);
    assert_eq!(report.duplicates, 1);
    assert_eq!(g.num_edges(), 2);
}

#[test]
fn split_policies() {
    let g = plain_graph(10, &[]);
    let all_train = make_split(&g, &SplitPolicy::ratio(1.0, 0.0, 0.0).unwrap(), 0).unwrap();
    assert!(all_train.splits().iter().all(|&s| s == Split::Train));
    assert!(SplitPolicy::ratio(0.5, 0.2, 0.2).is_err());

    let labeled = labeled_graph(1, 30, 0.0, 3, &[]).graph;
    let few = SplitPolicy::PerClass {
        train: 50,
        val: 0,
        test: 0,
    };
    assert!(matches!(make_split(&labeled, &few, 0), Err(Error::InsufficientClass { .. })));
    assert!(make_split(&g, &SplitPolicy::parse("per-class:1").unwrap(), 0).is_err());
}
