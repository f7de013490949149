//! Qubit registers on connectivity graphs and region partitions.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

/// A simple undirected graph whose vertices are the sites `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl QubitGraph {
    /// Builds a graph from an edge list. Edges are unordered; self-loops and
    /// repeated edges are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n {
                return Err(Error::UnknownSite(a));
            }
            if b >= n {
                return Err(Error::UnknownSite(b));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at site {a}")));
            }
            let key = (a.min(b), a.max(b));
            if !set.insert(key) {
                return Err(Error::InvalidGraph(format!("duplicate edge {a}-{b}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Ok(Self { n, edges: set, adjacency })
    }

    /// Open chain `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path graph is simple")
    }

    /// `rows x cols` grid with row-major site numbering.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let s = r * cols + c;
                if c + 1 < cols {
                    edges.push((s, s + 1));
                }
                if r + 1 < rows {
                    edges.push((s, s + cols));
                }
            }
        }
        Self::new(rows * cols, edges).expect("grid graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.adjacency[site]
    }
}

/// Graph distance between two site sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Finite(usize),
    /// No path connects the two sets.
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

/// Minimum graph distance between any site of `a` and any site of `b`.
///
/// A multi-source BFS from `a` stops at the first site of `b`.
pub fn graph_distance(graph: &QubitGraph, a: &[usize], b: &[usize]) -> Result<Distance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    for &s in a.iter().chain(b) {
        if s >= graph.n {
            return Err(Error::UnknownSite(s));
        }
    }
    let mut target = vec![false; graph.n];
    for &s in b {
        target[s] = true;
    }
    let mut dist = vec![usize::MAX; graph.n];
    let mut queue = VecDeque::new();
    for &s in a {
        if dist[s] == usize::MAX {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        if target[s] {
            return Ok(Distance::Finite(dist[s]));
        }
        for &t in &graph.adjacency[s] {
            if dist[t] == usize::MAX {
                dist[t] = dist[s] + 1;
                queue.push_back(t);
            }
        }
    }
    Ok(Distance::Infinite)
}

/// Assignment of system sites to regions A, B, C.
///
/// `extra` holds labels of appended registers such as a purifying
/// environment E or a classical record R; they are not system sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionPartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub extra: Vec<(String, Vec<usize>)>,
}

impl RegionPartition {
    /// Validates that A, B, C are disjoint and cover `0..n`.
    pub fn new(n: usize, a: Vec<usize>, b: Vec<usize>, c: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n];
        for &s in a.iter().chain(&b).chain(&c) {
            if s >= n {
                return Err(Error::UnknownSite(s));
            }
            if seen[s] {
                return Err(Error::OverlappingRegions(s));
            }
            seen[s] = true;
        }
        if let Some(missing) = seen.iter().position(|&x| !x) {
            return Err(Error::InvalidParameter(format!("site {missing} is not assigned to a region")));
        }
        Ok(Self { a, b, c, extra: Vec::new() })
    }

    /// Partition with C taken as the complement of A and B.
    pub fn from_ab(n: usize, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        let used: BTreeSet<usize> = a.iter().chain(&b).copied().collect();
        let c = (0..n).filter(|s| !used.contains(s)).collect();
        Self::new(n, a, b, c)
    }

    /// Attaches a labeled register of non-system sites (e.g. `"E"`).
    pub fn with_extra(mut self, label: &str, sites: Vec<usize>) -> Self {
        self.extra.push((label.to_string(), sites));
        self
    }

    pub fn extra(&self, label: &str) -> Option<&[usize]> {
        self.extra.iter().find(|(l, _)| l == label).map(|(_, s)| s.as_slice())
    }

    /// `x_AB` on the given graph.
    pub fn distance(&self, graph: &QubitGraph) -> Result<Distance> {
        graph_distance(graph, &self.a, &self.b)
    }
}

/// Geometry of the chain experiment: A is the central site of an odd chain
/// and B the first `(n+1)/2 - x` sites, so that the nearest B site lies at
/// distance `x` from A.
pub fn chain_geometry(n: usize, x: usize) -> Result<(usize, Vec<usize>)> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("chain of {n} sites is too short")));
    }
    let center = (n - 1) / 2;
    if x == 0 || x > center {
        return Err(Error::InvalidParameter(format!("x_AB = {x} outside 1..={center}")));
    }
    Ok((center, (0..=center - x).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_distances() {
        let g = QubitGraph::path(7);
        assert_eq!(graph_distance(&g, &[0], &[4]).unwrap(), Distance::Finite(4));
        assert_eq!(graph_distance(&g, &[3], &[3]).unwrap(), Distance::Finite(0));
        assert_eq!(graph_distance(&g, &[0, 6], &[3, 5]).unwrap(), Distance::Finite(1));
    }

    #[test]
    fn chain_geometry_places_b_at_distance_x() {
        let n = 301;
        let g = QubitGraph::path(n);
        for x in [1, 2, 17, 150] {
            let (a, b) = chain_geometry(n, x).unwrap();
            assert_eq!(a, 150);
            assert_eq!(b.len(), n.div_ceil(2) - x);
            assert_eq!(graph_distance(&g, &[a], &b).unwrap(), Distance::Finite(x));
        }
    }

    #[test]
    fn disconnected_is_infinite() {
        let g = QubitGraph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(graph_distance(&g, &[0], &[3]).unwrap(), Distance::Infinite);
    }

    #[test]
    fn rejects_bad_graphs_and_partitions() {
        assert!(QubitGraph::new(3, [(0, 0)]).is_err());
        assert!(QubitGraph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(QubitGraph::new(3, [(0, 5)]).is_err());
        assert!(RegionPartition::new(3, vec![0], vec![0], vec![1, 2]).is_err());
        assert!(RegionPartition::new(3, vec![0], vec![1], vec![]).is_err());
        assert!(graph_distance(&QubitGraph::path(3), &[], &[1]).is_err());
    }

    #[test]
    fn grid_distance_is_manhattan() {
        let g = QubitGraph::grid(3, 4);
        assert_eq!(g.edges().count(), 3 * 3 + 2 * 4);
        assert_eq!(graph_distance(&g, &[0], &[11]).unwrap(), Distance::Finite(5));
        let p = RegionPartition::from_ab(12, vec![0], vec![11]).unwrap().with_extra("E", vec![12]);
        assert_eq!(p.c.len(), 10);
        assert_eq!(p.extra("E"), Some(&[12][..]));
        assert_eq!(p.distance(&g).unwrap(), Distance::Finite(5));
    }
}
