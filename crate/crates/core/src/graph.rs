use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("{0}-{1} is not an edge")]
    NotAnEdge(Vertex, Vertex),
    #[error("loop requested at vertex {0}")]
    LoopRequested(Vertex),
    #[error("graph power must be at least 1")]
    ZeroPower,
}

/// Simple undirected graph on vertices `0..n` with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
}

/// Where an old vertex id went after a mutating operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Image {
    Kept(Vertex),
    Removed,
    MergedInto(Vertex),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRemap {
    images: Vec<Image>,
    new_n: usize,
}

impl VertexRemap {
    pub fn identity(n: usize) -> Self {
        VertexRemap {
            images: (0..n).map(Image::Kept).collect(),
            new_n: n,
        }
    }

    pub fn old_n(&self) -> usize {
        self.images.len()
    }

    pub fn new_n(&self) -> usize {
        self.new_n
    }

    pub fn image(&self, old: Vertex) -> Image {
        self.images[old]
    }

    /// New id of a kept vertex, or of the absorber for a merged one.
    pub fn get(&self, old: Vertex) -> Option<Vertex> {
        match self.images[old] {
            Image::Kept(v) | Image::MergedInto(v) => Some(v),
            Image::Removed => None,
        }
    }

    /// Old id of each new vertex (the kept preimage).
    pub fn preimages(&self) -> Vec<Vertex> {
        let mut back = vec![usize::MAX; self.new_n];
        for (old, img) in self.images.iter().enumerate() {
            if let Image::Kept(v) = img {
                back[*v] = old;
            }
        }
        back
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &VertexRemap) -> VertexRemap {
        assert_eq!(self.new_n, next.old_n(), "remap composition size mismatch");
        let images = self
            .images
            .iter()
            .map(|img| match *img {
                Image::Removed => Image::Removed,
                Image::Kept(a) => next.images[a],
                Image::MergedInto(a) => match next.images[a] {
                    Image::Removed => Image::Removed,
                    Image::Kept(b) | Image::MergedInto(b) => Image::MergedInto(b),
                },
            })
            .collect();
        VertexRemap {
            images,
            new_n: next.new_n,
        }
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        Graph::empty(n).add_edges(edges)
    }

    /// Builds from adjacency lists, symmetrizing and deduplicating.
    pub fn from_adjacency(lists: &[Vec<Vertex>]) -> Result<Self, GraphError> {
        let n = lists.len();
        let mut edges = Vec::new();
        for (u, list) in lists.iter().enumerate() {
            for &v in list {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Index of `v` within the sorted neighbor list of `u`.
    pub fn neighbor_index(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.adj[u].binary_search(&v).ok()
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.n()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    fn check(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n(),
            })
        }
    }

    pub fn add_edges(&self, edges: &[(Vertex, Vertex)]) -> Result<Graph, GraphError> {
        let mut adj = self.adj.clone();
        for &(u, v) in edges {
            self.check(u)?;
            self.check(v)?;
            if u == v {
                return Err(GraphError::LoopRequested(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adj })
    }

    pub fn remove_edges(&self, edges: &[(Vertex, Vertex)]) -> Result<Graph, GraphError> {
        let mut adj = self.adj.clone();
        for &(u, v) in edges {
            self.check(u)?;
            self.check(v)?;
            if !self.has_edge(u, v) {
                return Err(GraphError::NotAnEdge(u, v));
            }
            adj[u].retain(|&w| w != v);
            adj[v].retain(|&w| w != u);
        }
        Ok(Graph { adj })
    }

    /// Deletes the given vertices; survivors are renumbered in increasing order.
    pub fn delete_vertices(&self, gone: &[Vertex]) -> Result<(Graph, VertexRemap), GraphError> {
        let mut dead = vec![false; self.n()];
        for &v in gone {
            self.check(v)?;
            dead[v] = true;
        }
        let mut images = Vec::with_capacity(self.n());
        let mut next = 0;
        for &d in &dead {
            if d {
                images.push(Image::Removed);
            } else {
                images.push(Image::Kept(next));
                next += 1;
            }
        }
        let mut adj = vec![Vec::new(); next];
        for u in self.vertices() {
            if let Image::Kept(nu) = images[u] {
                adj[nu] = self.adj[u]
                    .iter()
                    .filter_map(|&w| match images[w] {
                        Image::Kept(nw) => Some(nw),
                        _ => None,
                    })
                    .collect();
            }
        }
        Ok((
            Graph { adj },
            VertexRemap {
                images,
                new_n: next,
            },
        ))
    }

    /// Contracts `uv`: `v` absorbs the edges of `u`, `u` disappears, multiedges and the loop are dropped.
    pub fn contract_edge(&self, u: Vertex, v: Vertex) -> Result<(Graph, VertexRemap), GraphError> {
        self.check(u)?;
        self.check(v)?;
        if !self.has_edge(u, v) {
            return Err(GraphError::NotAnEdge(u, v));
        }
        let extra: Vec<(Vertex, Vertex)> = self.adj[u]
            .iter()
            .filter(|&&w| w != v)
            .map(|&w| (v, w))
            .collect();
        let merged = self.add_edges(&extra)?;
        let (g, mut remap) = merged.delete_vertices(&[u])?;
        if let Image::Kept(nv) = remap.images[v] {
            remap.images[u] = Image::MergedInto(nv);
        }
        Ok((g, remap))
    }

    /// BFS distances from `s`; unreachable vertices get `None`.
    pub fn distances_from(&self, s: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Edge between u and v iff 1 ≤ dist(u, v) ≤ k.
    pub fn power(&self, k: usize) -> Result<Graph, GraphError> {
        if k == 0 {
            return Err(GraphError::ZeroPower);
        }
        let mut adj = vec![Vec::new(); self.n()];
        for (s, list) in adj.iter_mut().enumerate() {
            for (t, d) in self.distances_from(s).into_iter().enumerate() {
                if matches!(d, Some(d) if d >= 1 && d <= k) {
                    list.push(t);
                }
            }
        }
        Ok(Graph { adj })
    }

    pub fn square(&self) -> Graph {
        self.power(2).expect("power 2 is valid")
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; self.n()];
        let mut comps = Vec::new();
        for s in self.vertices() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// Subgraph induced by `keep` (renumbered in increasing order of old id).
    pub fn induced(&self, keep: &[Vertex]) -> Result<(Graph, VertexRemap), GraphError> {
        let mut inside = vec![false; self.n()];
        for &v in keep {
            self.check(v)?;
            inside[v] = true;
        }
        let gone: Vec<Vertex> = self.vertices().filter(|&v| !inside[v]).collect();
        self.delete_vertices(&gone)
    }

    /// Shortest cycle length, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for s in self.vertices() {
            let mut dist = vec![usize::MAX; self.n()];
            let mut parent = vec![usize::MAX; self.n()];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    pub fn is_independent(&self, set: &[Vertex]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| !self.has_edge(a, b)))
    }

    /// Adjacency bitmasks; requires n ≤ 64.
    pub fn adjacency_masks(&self) -> Vec<u64> {
        assert!(self.n() <= 64, "bitmask view needs n <= 64");
        self.adj
            .iter()
            .map(|list| list.iter().fold(0u64, |m, &w| m | (1 << w)))
            .collect()
    }

    /// Relabels vertices: new id of old vertex v is `perm[v]`.
    pub fn permuted(&self, perm: &[Vertex]) -> Graph {
        assert_eq!(perm.len(), self.n());
        let mut adj = vec![Vec::new(); self.n()];
        for u in self.vertices() {
            adj[perm[u]] = self.adj[u].iter().map(|&w| perm[w]).collect();
            adj[perm[u]].sort_unstable();
        }
        Graph { adj }
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n();
        let mut adj = self.adj.clone();
        adj.extend(
            other
                .adj
                .iter()
                .map(|l| l.iter().map(|&w| w + off).collect()),
        );
        Graph { adj }
    }
}
