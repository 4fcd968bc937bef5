use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbeddedGraph, EmbeddingError, RotationSystem};
use crate::graph::{Graph, Vertex};

/// Bounded embedding search settings. Results depend only on these and the graph.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub seed: u64,
    pub restarts: usize,
    pub steps: usize,
    /// Enumerate every rotation system when there are at most this many.
    pub exhaustive_limit: u64,
    /// Stop as soon as an embedding of at most this genus is found.
    pub target_genus: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            seed: 0,
            restarts: 24,
            steps: 3000,
            exhaustive_limit: 100_000,
            target_genus: None,
        }
    }
}

/// Euler lower bound on the orientable genus, sharpened by the girth.
pub fn euler_genus_lower_bound(g: &Graph) -> usize {
    let Some(k) = g.girth() else { return 0 };
    let (v, e, k) = (g.n() as i64, g.m() as i64, k as i64);
    // (k-2)E <= k(V - 2 + 2g)
    let num = (k - 2) * e - k * (v - 2);
    if num <= 0 {
        0
    } else {
        ((num + 2 * k - 1) / (2 * k)) as usize
    }
}

/// Best embedding found (fewest-genus) within the search budget.
pub fn search_embedding(g: &Graph, opts: &SearchOptions) -> Result<EmbeddedGraph, EmbeddingError> {
    if g.n() == 0 {
        return Err(EmbeddingError::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(EmbeddingError::DisconnectedGraph);
    }
    let floor = euler_genus_lower_bound(g).max(opts.target_genus.unwrap_or(0));
    let max_faces = |genus: usize| 2 + g.m() as i64 - g.n() as i64 - 2 * genus as i64;
    let goal = max_faces(floor);
    let space = rotation_space(g);
    let best = if space.is_some_and(|s| s <= opts.exhaustive_limit) {
        exhaustive(g, goal)
    } else {
        randomized(g, opts, goal)
    };
    let rot = RotationSystem::new(g.clone(), best).expect("search keeps rotations valid");
    EmbeddedGraph::trace(rot)
}

fn rotation_space(g: &Graph) -> Option<u64> {
    let mut total: u64 = 1;
    for v in g.vertices() {
        for k in 2..g.degree(v) as u64 {
            total = total.checked_mul(k)?;
        }
    }
    Some(total)
}

/// Dart-indexed view of a rotation system for fast face counting.
struct Counter {
    slot: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    seen: Vec<u32>,
    stamp: u32,
}

impl Counter {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut offsets = vec![0; n + 1];
        for v in g.vertices() {
            offsets[v + 1] = offsets[v] + g.degree(v);
        }
        Counter {
            slot: vec![vec![usize::MAX; n]; n],
            offsets,
            seen: vec![0; 2 * g.m()],
            stamp: 0,
        }
    }

    fn faces(&mut self, rot: &[Vec<Vertex>]) -> i64 {
        for (v, list) in rot.iter().enumerate() {
            for (i, &w) in list.iter().enumerate() {
                self.slot[v][w] = i;
            }
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        let mut count = 0;
        for u in 0..rot.len() {
            for i in 0..rot[u].len() {
                if self.seen[self.offsets[u] + i] == self.stamp {
                    continue;
                }
                count += 1;
                let (mut a, mut ia) = (u, i);
                while self.seen[self.offsets[a] + ia] != self.stamp {
                    self.seen[self.offsets[a] + ia] = self.stamp;
                    let b = rot[a][ia];
                    let d = rot[b].len();
                    let ib = (self.slot[b][a] + 1) % d;
                    a = b;
                    ia = ib;
                }
            }
        }
        count
    }
}

fn exhaustive(g: &Graph, goal: i64) -> Vec<Vec<Vertex>> {
    let mut rot: Vec<Vec<Vertex>> = g.vertices().map(|v| g.neighbors(v).to_vec()).collect();
    let mut counter = Counter::new(g);
    let mut best = rot.clone();
    let mut best_faces = counter.faces(&rot);
    if best_faces >= goal {
        return best;
    }
    loop {
        // odometer over vertices; each digit is the permutation of the rotation tail
        let mut v = 0;
        loop {
            if v == rot.len() {
                return best;
            }
            if rot[v].len() > 2 && next_permutation(&mut rot[v][1..]) {
                break;
            }
            if rot[v].len() > 2 {
                rot[v][1..].sort_unstable();
            }
            v += 1;
        }
        let f = counter.faces(&rot);
        if f > best_faces {
            best_faces = f;
            best = rot.clone();
            if f >= goal {
                return best;
            }
        }
    }
}

fn next_permutation(xs: &mut [Vertex]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

fn randomized(g: &Graph, opts: &SearchOptions, goal: i64) -> Vec<Vec<Vertex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut counter = Counter::new(g);
    let mut best: Option<(i64, Vec<Vec<Vertex>>)> = None;
    let movable: Vec<Vertex> = g.vertices().filter(|&v| g.degree(v) >= 3).collect();
    for _ in 0..opts.restarts.max(1) {
        let mut rot = greedy(g, &mut rng);
        let mut faces = counter.faces(&rot);
        if best.as_ref().is_none_or(|(b, _)| faces > *b) {
            best = Some((faces, rot.clone()));
        }
        if faces >= goal {
            break;
        }
        for _ in 0..opts.steps {
            if movable.is_empty() {
                break;
            }
            let v = *movable.choose(&mut rng).expect("nonempty");
            let d = rot[v].len();
            let from = rng.gen_range(0..d);
            let mut to = rng.gen_range(0..d - 1);
            if to >= from {
                to += 1;
            }
            let w = rot[v].remove(from);
            rot[v].insert(to, w);
            let f = counter.faces(&rot);
            if f >= faces {
                faces = f;
                if best.as_ref().is_none_or(|(b, _)| f > *b) {
                    best = Some((f, rot.clone()));
                }
                if f >= goal {
                    break;
                }
            } else {
                let w = rot[v].remove(to);
                rot[v].insert(from, w);
            }
        }
        if best.as_ref().is_some_and(|(b, _)| *b >= goal) {
            break;
        }
    }
    best.map(|(_, r)| r).expect("at least one restart")
}

/// Random spanning tree, then each remaining edge placed inside a shared face when one exists.
fn greedy(g: &Graph, rng: &mut ChaCha8Rng) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let mut rot: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    let mut in_tree = vec![false; n];
    let root = rng.gen_range(0..n);
    in_tree[root] = true;
    let mut frontier = vec![root];
    let mut tree_edges = Vec::new();
    while let Some(u) = frontier.pop() {
        let mut nbrs = g.neighbors(u).to_vec();
        nbrs.shuffle(rng);
        for w in nbrs {
            if !in_tree[w] {
                in_tree[w] = true;
                tree_edges.push((u, w));
                frontier.push(w);
            }
        }
        frontier.shuffle(rng);
    }
    for &(u, w) in &tree_edges {
        let at = rng.gen_range(0..=rot[u].len());
        rot[u].insert(at, w);
        let at = rng.gen_range(0..=rot[w].len());
        rot[w].insert(at, u);
    }
    let mut rest: Vec<(Vertex, Vertex)> = g
        .edges()
        .filter(|&(u, w)| !tree_edges.contains(&(u, w)) && !tree_edges.contains(&(w, u)))
        .collect();
    rest.shuffle(rng);
    for (u, w) in rest {
        let faces = raw_orbits(&rot);
        let shared: Vec<&Vec<(Vertex, Vertex)>> = faces
            .iter()
            .filter(|f| f.iter().any(|d| d.0 == u) && f.iter().any(|d| d.0 == w))
            .collect();
        let corner = |face: &Vec<(Vertex, Vertex)>, x: Vertex, rng: &mut ChaCha8Rng| {
            let hits: Vec<usize> = (0..face.len()).filter(|&i| face[i].0 == x).collect();
            let i = *hits.choose(rng).expect("vertex on face");
            face[(i + face.len() - 1) % face.len()].0
        };
        let (pu, pw) = if let Some(face) = shared.choose(rng) {
            (corner(face, u, rng), corner(face, w, rng))
        } else {
            (
                *rot[u].choose(rng).expect("tree degree"),
                *rot[w].choose(rng).expect("tree degree"),
            )
        };
        let iu = rot[u]
            .iter()
            .position(|&x| x == pu)
            .expect("corner neighbor")
            + 1;
        rot[u].insert(iu, w);
        let iw = rot[w]
            .iter()
            .position(|&x| x == pw)
            .expect("corner neighbor")
            + 1;
        rot[w].insert(iw, u);
    }
    rot
}

fn raw_orbits(rot: &[Vec<Vertex>]) -> Vec<Vec<(Vertex, Vertex)>> {
    let mut seen: Vec<Vec<bool>> = rot.iter().map(|l| vec![false; l.len()]).collect();
    let mut faces = Vec::new();
    for u in 0..rot.len() {
        for i in 0..rot[u].len() {
            if seen[u][i] {
                continue;
            }
            let mut face = Vec::new();
            let (mut a, mut ia) = (u, i);
            while !seen[a][ia] {
                seen[a][ia] = true;
                let b = rot[a][ia];
                face.push((a, b));
                let pos = rot[b]
                    .iter()
                    .position(|&x| x == a)
                    .expect("symmetric rotation");
                ia = (pos + 1) % rot[b].len();
                a = b;
            }
            faces.push(face);
        }
    }
    faces
}
