use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use socnet::metrics::betweenness_undirected;

/// Definition-level scores: for every unordered pair `{s, t}` and every other `v`,
/// add `sigma_sv * sigma_vt / sigma_st` when `v` lies on a shortest path. Exact arithmetic.
fn exact_scores(adj: &[Vec<usize>]) -> Vec<BigRational> {
    let n = adj.len();
    let mut dist = vec![vec![usize::MAX; n]; n];
    let mut sigma = vec![vec![BigInt::zero(); n]; n];
    for s in 0..n {
        dist[s][s] = 0;
        sigma[s][s] = BigInt::from(1);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if dist[s][w] == usize::MAX {
                    dist[s][w] = dist[s][v] + 1;
                    queue.push_back(w);
                }
                if dist[s][w] == dist[s][v] + 1 {
                    let add = sigma[s][v].clone();
                    sigma[s][w] += add;
                }
            }
        }
    }
    let mut out = vec![BigRational::zero(); n];
    for s in 0..n {
        for t in s + 1..n {
            if dist[s][t] == usize::MAX {
                continue;
            }
            for v in 0..n {
                if v == s || v == t || dist[s][v] == usize::MAX || dist[v][t] == usize::MAX {
                    continue;
                }
                if dist[s][v] + dist[v][t] == dist[s][t] {
                    let through = &sigma[s][v] * &sigma[v][t];
                    out[v] += BigRational::new(through, sigma[s][t].clone());
                }
            }
        }
    }
    out
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        let (a, b) = (a % n, b % n);
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    adj
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn brandes_matches_exact_enumeration(
        n in 1usize..=20,
        edges in prop::collection::vec((0usize..20, 0usize..20), 0..60),
    ) {
        let adj = adjacency(n, &edges);
        let fast = betweenness_undirected(&adj);
        for (f, e) in fast.iter().zip(exact_scores(&adj)) {
            let e = e.to_f64().unwrap();
            prop_assert!((f - e).abs() <= 1e-9 * e.abs().max(1.0), "{f} vs {e}");
        }
    }
}

#[test]
fn analytic_cases() {
    // star with 5 leaves: the hub lies on all C(5, 2) leaf pairs
    let star = adjacency(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
    assert_eq!(betweenness_undirected(&star), vec![10.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    // path 0-1-2-3-4: node k separates k * (4 - k) pairs
    let path = adjacency(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    assert_eq!(betweenness_undirected(&path), vec![0.0, 3.0, 4.0, 3.0, 0.0]);
    let complete: Vec<(usize, usize)> = (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b))).collect();
    assert!(betweenness_undirected(&adjacency(6, &complete)).iter().all(|&x| x == 0.0));
}
