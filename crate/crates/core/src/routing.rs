//! Longest-lasting route selection: maximize, over all routes, the smallest
//! link lifetime along the route.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt::Debug;

use thiserror::Error;

use crate::llt::Lifetime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoutingError {
    #[error("unknown node {0}")]
    NodeUnknown(String),
    #[error("source and destination are the same node")]
    SameEndpoints,
    #[error("graph has {0} nodes; exhaustive enumeration is limited to {MAX_ENUMERATION_NODES}")]
    TooLarge(usize),
}

/// Node limit for exhaustive route enumeration.
pub const MAX_ENUMERATION_NODES: usize = 12;

/// Snapshot of the live links at one instant; edge weights are the remaining
/// link lifetimes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGraph<N: Ord> {
    pub snapshot_time: f64,
    nodes: BTreeSet<N>,
    edges: BTreeMap<(N, N), Lifetime>,
}

impl<N: Ord + Clone + Debug> LinkGraph<N> {
    pub fn new(snapshot_time: f64) -> Self {
        Self {
            snapshot_time,
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn add_node(&mut self, n: N) {
        self.nodes.insert(n);
    }

    /// Inserts (or replaces) the undirected edge `a`-`b`. Self-loops are ignored.
    pub fn add_edge(&mut self, a: N, b: N, llt: Lifetime) {
        if a == b {
            return;
        }
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        self.edges.insert(Self::key(a, b), llt);
    }

    fn key(a: N, b: N) -> (N, N) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &N> {
        self.nodes.iter()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, n: &N) -> bool {
        self.nodes.contains(n)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&N, &N, Lifetime)> {
        self.edges.iter().map(|((a, b), &w)| (a, b, w))
    }

    pub fn edge(&self, a: &N, b: &N) -> Option<Lifetime> {
        self.edges.get(&Self::key(a.clone(), b.clone())).copied()
    }

    pub fn set_edge_weight(&mut self, a: &N, b: &N, llt: Lifetime) -> bool {
        match self.edges.get_mut(&Self::key(a.clone(), b.clone())) {
            Some(w) => {
                *w = llt;
                true
            }
            None => false,
        }
    }

    /// Neighbor lists, each sorted by node id.
    pub fn adjacency(&self) -> BTreeMap<N, Vec<(N, Lifetime)>> {
        let mut adj: BTreeMap<N, Vec<(N, Lifetime)>> =
            self.nodes.iter().map(|n| (n.clone(), Vec::new())).collect();
        for ((a, b), &w) in &self.edges {
            adj.entry(a.clone()).or_default().push((b.clone(), w));
            adj.entry(b.clone()).or_default().push((a.clone(), w));
        }
        for list in adj.values_mut() {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        adj
    }

    pub(crate) fn check_endpoints(&self, src: &N, dst: &N) -> Result<(), RoutingError> {
        for n in [src, dst] {
            if !self.nodes.contains(n) {
                return Err(RoutingError::NodeUnknown(format!("{n:?}")));
            }
        }
        if src == dst {
            return Err(RoutingError::SameEndpoints);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route<N> {
    pub nodes: Vec<N>,
    pub bottleneck_llt: Lifetime,
}

impl<N> Route<N> {
    pub fn hops(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

/// Route with the largest bottleneck lifetime. Ties go to fewer hops, then to
/// the lexicographically smallest node sequence.
pub fn max_min_route<N: Ord + Clone + Debug>(
    graph: &LinkGraph<N>,
    src: &N,
    dst: &N,
) -> Result<Option<Route<N>>, RoutingError> {
    graph.check_endpoints(src, dst)?;
    let adj = graph.adjacency();

    // Widest-path search: best-first on the bottleneck width reachable so far.
    let mut width: BTreeMap<&N, Lifetime> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    width.insert(src, Lifetime::Unbounded);
    heap.push((Lifetime::Unbounded, Reverse(src)));
    while let Some((w, Reverse(u))) = heap.pop() {
        if width.get(u).is_some_and(|&best| best > w) {
            continue;
        }
        if u == dst {
            break;
        }
        for (v, edge) in &adj[u] {
            let through = w.min(*edge);
            if width.get(v).is_none_or(|&best| through > best) {
                width.insert(v, through);
                heap.push((through, Reverse(v)));
            }
        }
    }
    let Some(&bottleneck) = width.get(dst) else {
        return Ok(None);
    };

    // Every route over links no weaker than the bottleneck is optimal; take
    // the fewest hops, then the smallest sequence, by walking greedily along
    // hop distances to the destination.
    let mut hops_to_dst: BTreeMap<&N, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    hops_to_dst.insert(dst, 0);
    queue.push_back(dst);
    while let Some(u) = queue.pop_front() {
        let d = hops_to_dst[u];
        for (v, edge) in &adj[u] {
            if *edge >= bottleneck && !hops_to_dst.contains_key(v) {
                hops_to_dst.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![src.clone()];
    let mut at = src;
    while at != dst {
        let d = hops_to_dst[at];
        let (next, _) = adj[at]
            .iter()
            .find(|(v, edge)| *edge >= bottleneck && hops_to_dst.get(v) == Some(&(d - 1)))
            .expect("hop distances are consistent");
        path.push(next.clone());
        at = next;
    }
    Ok(Some(Route {
        nodes: path,
        bottleneck_llt: bottleneck,
    }))
}
