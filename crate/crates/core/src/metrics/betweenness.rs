//! Betweenness centrality on the undirected simplification of the follow graph.

use std::collections::VecDeque;

use crate::graph::EvolvingGraph;

/// Brandes' algorithm on an undirected simple graph given as adjacency lists.
///
/// Scores sum `sigma_kj(i) / sigma_kj` over unordered pairs `{k, j}` not containing `i`;
/// pairs in different components contribute nothing.
pub fn betweenness_undirected(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut score = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![u32::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        if adj[s].is_empty() {
            continue;
        }
        for &v in &order {
            sigma[v] = 0.0;
            dist[v] = u32::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            let coeff = (1.0 + delta[w]) / sigma[w];
            for &v in &preds[w] {
                delta[v] += sigma[v] * coeff;
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    // every unordered pair was visited from both endpoints
    for x in score.iter_mut() {
        *x /= 2.0;
    }
    score
}

/// Per-agent betweenness, indexed by agent index (birth date minus one).
pub fn betweenness(g: &EvolvingGraph) -> Vec<f64> {
    betweenness_undirected(&g.undirected_adjacency())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    #[test]
    fn star() {
        let s = betweenness_undirected(&undirected(4, &[(0, 1), (0, 2), (0, 3)]));
        assert_eq!(s, vec![3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn path() {
        let s = betweenness_undirected(&undirected(3, &[(0, 1), (1, 2)]));
        assert_eq!(s, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn complete() {
        let mut e = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                e.push((a, b));
            }
        }
        assert!(betweenness_undirected(&undirected(6, &e)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn four_cycle_splits_paths() {
        let s = betweenness_undirected(&undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]));
        assert_eq!(s, vec![0.5; 4]);
    }
}
