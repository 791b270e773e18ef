use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Probability that an edge of the geometric base graph survives in one
/// direction only.
pub const DEFAULT_ONE_WAY_PROBABILITY: f64 = 0.3;

/// Maximum number of resampling attempts for the geometric generator.
pub const GEOMETRIC_MAX_ATTEMPTS: usize = 100;

/// A communication topology: `n` nodes and, for every node, the ordered list
/// of nodes it sends to. Every node carries a self-loop, listed first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    out_neighbors: Vec<Vec<usize>>,
}

impl DirectedGraph {
    /// Builds a graph from out-neighbor lists.
    ///
    /// Each list must contain its own node exactly once, no duplicates and
    /// only indices in `[0, n)`. The stored order is self first, then
    /// ascending.
    pub fn new(out_neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = out_neighbors.len();
        if n < 2 {
            return Err(Error::invalid_param(format!("graph needs at least 2 nodes, got {n}")));
        }
        let mut normalized = Vec::with_capacity(n);
        for (i, list) in out_neighbors.into_iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &j in &list {
                if j >= n {
                    return Err(Error::invalid_param(format!("node {i}: neighbor {j} out of range (n = {n})")));
                }
                if !seen.insert(j) {
                    return Err(Error::invalid_param(format!("node {i}: duplicate edge to {j}")));
                }
            }
            if !seen.remove(&i) {
                return Err(Error::invalid_param(format!("node {i}: missing self-loop")));
            }
            let mut ordered = Vec::with_capacity(seen.len() + 1);
            ordered.push(i);
            ordered.extend(seen);
            normalized.push(ordered);
        }
        Ok(Self { out_neighbors: normalized })
    }

    /// Builds a graph from `(from, to)` pairs; self-loops are added.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sets: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for (from, to) in edges {
            if from >= n || to >= n {
                return Err(Error::invalid_param(format!("edge ({from}, {to}) out of range (n = {n})")));
            }
            sets[from].insert(to);
        }
        Self::new(sets.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.out_neighbors.len()
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_neighbors[i]
    }

    /// Out-degree including the self-loop.
    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors[i].len()
    }

    /// Number of directed edges, self-loops excluded.
    pub fn edge_count(&self) -> usize {
        self.out_neighbors.iter().map(|l| l.len() - 1).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out_neighbors[from].contains(&to)
    }

    /// In-neighbor lists (self included), ascending.
    pub fn in_neighbors(&self) -> Vec<Vec<usize>> {
        let mut inn = vec![Vec::new(); self.n()];
        for (i, list) in self.out_neighbors.iter().enumerate() {
            for &j in list {
                inn[j].push(i);
            }
        }
        inn
    }

    /// Forward and reverse reachability from node 0 both cover every node.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n();
        let covers = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
            count == n
        };
        covers(&self.out_neighbors) && covers(&self.in_neighbors())
    }

    /// Text form: `n` on the first line, then `i: j1 j2 ...` per node with the
    /// self-loop first.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n());
        for (i, list) in self.out_neighbors.iter().enumerate() {
            let _ = write!(s, "{i}:");
            for j in list {
                let _ = write!(s, " {j}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty graph file".into() })?;
        let n: usize = header.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            message: format!("expected node count, found `{}`", header.trim()),
        })?;
        let mut lists: Vec<Option<Vec<usize>>> = vec![None; n];
        for (idx, line) in lines {
            let line_no = idx + 1;
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let (head, rest) = line.split_once(':').ok_or_else(|| parse_err("expected `i: j1 j2 ...`".into()))?;
            let i: usize = head.trim().parse().map_err(|_| parse_err(format!("bad node index `{}`", head.trim())))?;
            if i >= n {
                return Err(parse_err(format!("node index {i} out of range (n = {n})")));
            }
            if lists[i].is_some() {
                return Err(parse_err(format!("node {i} listed twice")));
            }
            let neighbors = rest
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| parse_err(format!("bad neighbor `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            lists[i] = Some(neighbors);
        }
        let lists = lists
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::InvalidInput(format!("node {i} has no adjacency line"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(lists)
    }
}

/// Node `i` sends to `(i + 2^j) mod n` for `j = 0..=floor(log2(n-1))`.
pub fn build_exponential_graph(n: usize) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::invalid_param(format!("exponential graph needs n >= 2, got {n}")));
    }
    let hops: Vec<usize> = std::iter::successors(Some(1usize), |h| h.checked_mul(2))
        .take_while(|&h| h < n)
        .collect();
    let lists = (0..n)
        .map(|i| {
            let mut l = vec![i];
            l.extend(hops.iter().map(|h| (i + h) % n));
            l
        })
        .collect();
    DirectedGraph::new(lists)
}

/// Directed cycle `i -> i+1` plus `extra` distinct random non-cycle edges.
pub fn build_cycle_plus_edges(n: usize, extra: usize, seed: u64) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::invalid_param(format!("cycle graph needs n >= 2, got {n}")));
    }
    let capacity = n * (n - 1) - n;
    if extra > capacity {
        return Err(Error::invalid_param(format!(
            "{extra} extra edges requested but only {capacity} non-cycle slots exist for n = {n}"
        )));
    }
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && j != (i + 1) % n)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (chosen, _) = candidates.partial_shuffle(&mut rng, extra);
    let cycle = (0..n).map(|i| (i, (i + 1) % n));
    DirectedGraph::from_edges(n, cycle.chain(chosen.iter().copied()))
}

/// Random geometric digraph on the unit square with the default one-way
/// probability.
pub fn build_geometric_digraph(n: usize, radius: f64, seed: u64) -> Result<DirectedGraph> {
    build_geometric_digraph_with(n, radius, seed, DEFAULT_ONE_WAY_PROBABILITY)
}

/// Points uniform in the unit square, pairs within `radius` connected. Each
/// such pair keeps a single random direction with probability
/// `one_way_probability`, both directions otherwise. Draws that are not
/// strongly connected are discarded and resampled on a fresh stream.
pub fn build_geometric_digraph_with(
    n: usize,
    radius: f64,
    seed: u64,
    one_way_probability: f64,
) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::invalid_param(format!("geometric graph needs n >= 2, got {n}")));
    }
    if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(Error::invalid_param(format!("radius must lie in (0, sqrt 2], got {radius}")));
    }
    if !(0.0..=1.0).contains(&one_way_probability) {
        return Err(Error::invalid_param(format!(
            "one-way probability must lie in [0, 1], got {one_way_probability}"
        )));
    }
    for attempt in 0..GEOMETRIC_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
                if dx.hypot(dy) > radius {
                    continue;
                }
                if rng.random_bool(one_way_probability) {
                    if rng.random_bool(0.5) {
                        edges.push((i, j));
                    } else {
                        edges.push((j, i));
                    }
                } else {
                    edges.push((i, j));
                    edges.push((j, i));
                }
            }
        }
        let g = DirectedGraph::from_edges(n, edges)?;
        if g.is_strongly_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: GEOMETRIC_MAX_ATTEMPTS,
        reason: format!("no strongly connected draw with n = {n}, radius = {radius}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reachable_pairs_oracle(g: &DirectedGraph) -> bool {
        // Floyd-Warshall style closure, independent of the DFS in the type.
        let n = g.n();
        let mut r = vec![vec![false; n]; n];
        for i in 0..n {
            for &j in g.out_neighbors(i) {
                r[i][j] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r.iter().all(|row| row.iter().all(|&b| b))
    }

    #[test]
    fn exponential_small_cases() {
        let g = build_exponential_graph(2).unwrap();
        assert_eq!(g.out_neighbors(0), &[0, 1]);
        assert_eq!(g.out_neighbors(1), &[1, 0]);
        let g = build_exponential_graph(4).unwrap();
        assert_eq!(g.out_neighbors(0), &[0, 1, 2]);
        assert!(build_exponential_graph(1).is_err());
    }

    #[test]
    fn exponential_16_and_64() {
        let g = build_exponential_graph(16).unwrap();
        assert!((0..16).all(|i| g.out_degree(i) == 5));
        assert!(reachable_pairs_oracle(&g));
        assert!(g.is_strongly_connected());
        let g = build_exponential_graph(64).unwrap();
        assert!(reachable_pairs_oracle(&g));
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn cycle_plus_edges_cases() {
        let g = build_cycle_plus_edges(3, 0, 1).unwrap();
        for i in 0..3 {
            assert_eq!(g.out_neighbors(i), &[i, (i + 1) % 3]);
        }
        let g = build_cycle_plus_edges(8, 48, 5).unwrap();
        assert_eq!(g.edge_count(), 56);
        assert!(reachable_pairs_oracle(&g));
        assert!(build_cycle_plus_edges(8, 49, 5).is_err());
        assert!(build_cycle_plus_edges(8, 100, 5).is_err());
        let a = build_cycle_plus_edges(10, 17, 99).unwrap();
        let b = build_cycle_plus_edges(10, 17, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 27);
    }

    #[test]
    fn geometric_cases() {
        let g = build_geometric_digraph(12, std::f64::consts::SQRT_2, 3).unwrap();
        assert!(g.is_strongly_connected());
        let g = build_geometric_digraph(32, 0.5, 7).unwrap();
        assert!(reachable_pairs_oracle(&g));
        assert_eq!(g, build_geometric_digraph(32, 0.5, 7).unwrap());
        match build_geometric_digraph(100, 0.01, 1) {
            Err(Error::GenerationFailed { attempts, .. }) => assert_eq!(attempts, 100),
            other => panic!("expected generation failure, got {other:?}"),
        }
        assert!(build_geometric_digraph(10, 0.0, 1).is_err());
        assert!(build_geometric_digraph(10, 1.5, 1).is_err());
    }

    #[test]
    fn strong_connectivity() {
        let cycle = DirectedGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        assert!(cycle.is_strongly_connected());
        let two = DirectedGraph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert!(!two.is_strongly_connected());
        assert!(!reachable_pairs_oracle(&two));
    }

    #[test]
    fn construction_rejects_bad_lists() {
        assert!(DirectedGraph::new(vec![vec![1], vec![1, 0]]).is_err());
        assert!(DirectedGraph::new(vec![vec![0, 1, 1], vec![1]]).is_err());
        assert!(DirectedGraph::new(vec![vec![0, 2], vec![1]]).is_err());
        let g = DirectedGraph::new(vec![vec![1, 0], vec![1]]).unwrap();
        assert_eq!(g.out_neighbors(0), &[0, 1]);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let g = build_geometric_digraph(20, 0.6, 11).unwrap();
        let text = g.to_text();
        assert!(text.starts_with("20\n0: 0"));
        assert_eq!(DirectedGraph::from_text(&text).unwrap(), g);
        match DirectedGraph::from_text("2\n0: 0 1\n1: 1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(DirectedGraph::from_text("3\n0: 0 1\n1: 1 2\n").is_err());
    }
}
