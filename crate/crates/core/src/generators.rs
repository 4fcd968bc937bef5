//! Named graphs, fixed embeddings, random families and exhaustive enumeration.

use std::collections::HashSet;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;

use rayon::prelude::*;

use crate::embedding::{search_embedding, EmbeddedGraph, RotationSystem, SearchOptions};
use crate::format::emit_graph6;
use crate::graph::{Graph, Vertex};

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges).expect("valid path")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycles need three vertices");
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges).expect("valid cycle")
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    Graph::from_edges(n, &edges).expect("valid clique")
}

pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::from_edges(leaves + 1, &edges).expect("valid star")
}

/// Outer 5-cycle 0..5, spokes i–i+5, inner pentagram.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::from_edges(10, &edges).expect("valid Petersen")
}

/// K₄ on {0,1,2,3} with the three edges at 0 subdivided by 4, 5, 6.
pub fn subdivided_k4() -> Graph {
    Graph::from_edges(
        7,
        &[
            (0, 4),
            (4, 1),
            (0, 5),
            (5, 2),
            (0, 6),
            (6, 3),
            (1, 2),
            (2, 3),
            (1, 3),
        ],
    )
    .expect("valid graph")
}

/// Hub 0 joined to the cycle 1..=k.
pub fn wheel(k: usize) -> Graph {
    let mut edges: Vec<_> = (1..=k).map(|i| (0, i)).collect();
    edges.extend((1..=k).map(|i| (i, i % k + 1)));
    Graph::from_edges(k + 1, &edges).expect("valid wheel")
}

pub fn cube() -> Graph {
    let edges: Vec<_> = (0..8usize)
        .flat_map(|a| (0..3).map(move |b| (a, a ^ (1 << b))))
        .filter(|(a, b)| a < b)
        .collect();
    Graph::from_edges(8, &edges).expect("valid cube")
}

/// Poles 0 and 1 joined to the equator cycle 2-3-4-5.
pub fn octahedron() -> Graph {
    let mut edges = vec![(2, 3), (3, 4), (4, 5), (5, 2)];
    edges.extend((2..6).flat_map(|e| [(0, e), (1, e)]));
    Graph::from_edges(6, &edges).expect("valid octahedron")
}

/// Apex 0, upper ring 1..=5, lower ring 6..=10, apex 11.
pub fn icosahedron() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        let (up, up_next) = (1 + i, 1 + (i + 1) % 5);
        let (low, low_next) = (6 + i, 6 + (i + 1) % 5);
        edges.extend([
            (0, up),
            (up, up_next),
            (up, low),
            (up, low_next),
            (low, low_next),
            (low, 11),
        ]);
    }
    Graph::from_edges(12, &edges).expect("valid icosahedron")
}

/// Replaces every edge by a path of length two; new vertices follow the originals in edge order.
pub fn subdivide(g: &Graph) -> Graph {
    let mut edges = Vec::new();
    let mut next = g.n();
    for (u, v) in g.edges() {
        edges.push((u, next));
        edges.push((next, v));
        next += 1;
    }
    Graph::from_edges(next, &edges).expect("valid subdivision")
}

/// Planar rotation of a cycle.
pub fn cycle_embedding(n: usize) -> EmbeddedGraph {
    let rot: Vec<Vec<Vertex>> = (0..n).map(|i| vec![(i + 1) % n, (i + n - 1) % n]).collect();
    embed(rot)
}

/// Planar wheel with the hub inside the rim cycle 1..=k.
pub fn wheel_embedding(k: usize) -> EmbeddedGraph {
    let mut rot = vec![(1..=k).collect::<Vec<_>>()];
    for i in 1..=k {
        let prev = if i == 1 { k } else { i - 1 };
        let next = i % k + 1;
        rot.push(vec![0, prev, next]);
    }
    embed(rot)
}

/// Planar K₄: vertex 0 in the middle of triangle 1-2-3.
pub fn k4_embedding() -> EmbeddedGraph {
    embed(vec![
        vec![1, 2, 3],
        vec![0, 3, 2],
        vec![0, 1, 3],
        vec![0, 2, 1],
    ])
}

/// C_p × C_q on the torus; vertex (i, j) is `q*i + j`, every face a 4-cycle.
pub fn torus_grid(p: usize, q: usize) -> EmbeddedGraph {
    let id = |i: usize, j: usize| (i % p) * q + (j % q);
    let rot = (0..p * q)
        .map(|v| {
            let (i, j) = (v / q, v % q);
            vec![
                id(i, j + 1),
                id(i + p - 1, j),
                id(i, j + q - 1),
                id(i + 1, j),
            ]
        })
        .collect();
    embed(rot)
}

/// The triangulation of the torus by K₇ with rotation i+1, i+3, i+2, i+6, i+4, i+5.
pub fn k7_torus() -> EmbeddedGraph {
    let rot = (0..7)
        .map(|i| [1, 3, 2, 6, 4, 5].iter().map(|d| (i + d) % 7).collect())
        .collect();
    embed(rot)
}

fn embed(rot: Vec<Vec<Vertex>>) -> EmbeddedGraph {
    EmbeddedGraph::trace(RotationSystem::from_rotations(rot).expect("valid rotation"))
        .expect("connected")
}

/// What bounds the face between rim vertex i and rim vertex i+1 of a gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    Tri,
    Quad,
    Pent,
}

/// Plane gadget: center 0 with rim 1..=d at the given degrees. Non-triangular sectors route
/// through extra vertices of degree 4, and pendant leaves in the outer face pad every degree.
/// Panics if a rim degree is below what the sectors already give that vertex.
pub fn fan_gadget(rim: &[usize], sectors: &[Sector]) -> EmbeddedGraph {
    let d = rim.len();
    assert_eq!(sectors.len(), d);
    let mut pos: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut target: Vec<usize> = vec![d];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let polar = |r: f64, a: f64| (r * a.cos(), r * a.sin());
    let step = TAU / d as f64;
    for (i, &t) in rim.iter().enumerate() {
        pos.push(polar(2.0, step * i as f64));
        target.push(t);
        edges.push((0, i + 1));
    }
    for (i, s) in sectors.iter().enumerate() {
        let (a, b) = (i + 1, (i + 1) % d + 1);
        let base = step * i as f64;
        let extra = match s {
            Sector::Tri => 0,
            Sector::Quad => 1,
            Sector::Pent => 2,
        };
        let mut prev = a;
        for j in 1..=extra {
            pos.push(polar(3.5, base + step * j as f64 / (extra + 1) as f64));
            target.push(4);
            edges.push((prev, pos.len() - 1));
            prev = pos.len() - 1;
        }
        edges.push((prev, b));
    }
    let structural = pos.len();
    for v in 1..structural {
        let have = edges.iter().filter(|&&(x, y)| x == v || y == v).count();
        assert!(have <= target[v], "vertex {v} already has degree {have}");
        let (r, a) = (pos[v].0.hypot(pos[v].1), pos[v].1.atan2(pos[v].0));
        let k = target[v] - have;
        for j in 0..k {
            pos.push(polar(
                r + 0.6,
                a + 0.05 * (j as f64 - (k as f64 - 1.0) / 2.0),
            ));
            edges.push((v, pos.len() - 1));
        }
    }
    let g = Graph::from_edges(pos.len(), &edges).expect("simple gadget");
    let rot = g
        .vertices()
        .map(|v| {
            let mut ring = g.neighbors(v).to_vec();
            let angle = |w: usize| (pos[w].1 - pos[v].1).atan2(pos[w].0 - pos[v].0);
            ring.sort_by(|&x, &y| angle(x).total_cmp(&angle(y)));
            ring
        })
        .collect();
    let e = EmbeddedGraph::trace(RotationSystem::new(g, rot).expect("angular rotation"))
        .expect("connected");
    debug_assert_eq!(e.genus(), 0);
    e
}

/// Every connected graph on at most `max_n` vertices whose searched embedding has genus at most 1,
/// then C3×C3, K5, K7 and the Petersen graph on the torus. Labels are graph6 strings or names.
pub fn toroidal_corpus(max_n: usize, opts: &SearchOptions) -> Vec<(String, EmbeddedGraph)> {
    let graphs: Vec<Graph> = (1..=max_n).flat_map(connected_graphs).collect();
    let mut out: Vec<(String, EmbeddedGraph)> = graphs
        .par_iter()
        .filter_map(|g| {
            let e = search_embedding(
                g,
                &SearchOptions {
                    target_genus: Some(1),
                    ..opts.clone()
                },
            )
            .ok()?;
            (e.genus() <= 1).then(|| (emit_graph6(g), e))
        })
        .collect();
    let on_torus = |g: &Graph| {
        let e = search_embedding(
            g,
            &SearchOptions {
                target_genus: Some(1),
                ..opts.clone()
            },
        )
        .expect("connected");
        assert_eq!(e.genus(), 1, "known toroidal graph");
        e
    };
    out.push(("C3xC3".into(), torus_grid(3, 3)));
    out.push(("K5".into(), on_torus(&complete(5))));
    out.push(("K7".into(), k7_torus()));
    out.push(("petersen".into(), on_torus(&petersen())));
    out
}

/// Uniform random labeled tree (Prüfer decoding).
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    if n <= 2 {
        return path(n);
    }
    let prufer: Vec<Vertex> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &prufer {
        degree[x] += 1;
    }
    let mut edges = Vec::new();
    for &x in &prufer {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<Vertex> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::from_edges(n, &edges).expect("valid tree")
}

/// Random simple connected cubic graph on n (even, ≥ 4) vertices by pairing with restarts.
pub fn random_cubic<R: Rng>(n: usize, rng: &mut R) -> Graph {
    assert!(
        n >= 4 && n.is_multiple_of(2),
        "cubic graphs need an even order of at least 4"
    );
    loop {
        let mut points: Vec<Vertex> = (0..n).flat_map(|v| [v, v, v]).collect();
        points.shuffle(rng);
        let edges: Vec<(Vertex, Vertex)> = points.chunks(2).map(|c| (c[0], c[1])).collect();
        if edges.iter().any(|(a, b)| a == b) {
            continue;
        }
        let g = Graph::from_edges(n, &edges).expect("in range");
        if g.m() == 3 * n / 2 && g.is_connected() {
            return g;
        }
    }
}

/// Random connected plane graph grown by pendant insertions and face chords.
/// `chord_rounds` extra chords are attempted after growth; `triangulate` fills every face with chords.
pub fn random_planar<R: Rng>(
    n: usize,
    chord_rounds: usize,
    triangulate: bool,
    rng: &mut R,
) -> EmbeddedGraph {
    assert!(n >= 2, "need at least two vertices");
    let mut emb = embed(vec![vec![1], vec![0]]);
    while emb.graph().n() < n {
        let f = rng.gen_range(0..emb.faces().len());
        let face = emb.face(f).darts().to_vec();
        let i = rng.gen_range(0..face.len());
        let (u, pred) = (face[i].0, face[(i + face.len() - 1) % face.len()].0);
        let mut rot: Vec<Vec<Vertex>> = emb.rotation().rotations().to_vec();
        let new = rot.len();
        let at = rot[u].iter().position(|&x| x == pred).expect("corner") + 1;
        rot[u].insert(at, new);
        rot.push(vec![u]);
        emb = embed(rot);
        if rng.gen_bool(0.5) {
            emb = random_chord_at(&emb, new, rng).unwrap_or(emb);
        }
    }
    for _ in 0..chord_rounds {
        let v = rng.gen_range(0..n);
        emb = random_chord_at(&emb, v, rng).unwrap_or(emb);
    }
    if triangulate {
        loop {
            let open: Vec<usize> = (0..emb.faces().len())
                .filter(|&f| emb.face(f).len() > 3)
                .collect();
            let mut changed = false;
            for f in open {
                if let Some(next) = chord_in_face(&emb, f, rng) {
                    emb = next;
                    changed = true;
                    break;
                }
            }
            if !changed {
                break;
            }
        }
    }
    emb
}

fn random_chord_at<R: Rng>(emb: &EmbeddedGraph, v: Vertex, rng: &mut R) -> Option<EmbeddedGraph> {
    let faces = emb.faces_at(v).to_vec();
    let f = *faces.choose(rng)?;
    let targets: Vec<Vertex> = emb
        .face(f)
        .distinct_vertices()
        .into_iter()
        .filter(|&w| w != v && !emb.graph().has_edge(v, w))
        .collect();
    let w = *targets.choose(rng)?;
    emb.add_edge_in_face(v, w, f).ok()
}

fn chord_in_face<R: Rng>(emb: &EmbeddedGraph, f: usize, rng: &mut R) -> Option<EmbeddedGraph> {
    let vs = emb.face(f).distinct_vertices();
    let mut pairs: Vec<(Vertex, Vertex)> = vs
        .iter()
        .flat_map(|&a| vs.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
        .filter(|&(a, b)| !emb.graph().has_edge(a, b))
        .collect();
    pairs.shuffle(rng);
    let (a, b) = *pairs.first()?;
    emb.add_edge_in_face(a, b, f).ok()
}

/// Every connected graph on `n` ≤ 8 vertices up to isomorphism, in canonical labeling.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 8, "enumeration supports n <= 8");
    if n == 0 {
        return Vec::new();
    }
    let mut level: Vec<Graph> = vec![Graph::empty(1)];
    for k in 2..=n {
        let last = k == n;
        let mut seen: HashSet<u64> = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for mask in 0u32..(1 << (k - 1)) {
                let edges: Vec<(Vertex, Vertex)> = (0..k - 1)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| (i, k - 1))
                    .collect();
                let mut all: Vec<(Vertex, Vertex)> = g.edges().collect();
                all.extend(edges);
                let h = Graph::from_edges(k, &all).expect("in range");
                if last && !h.is_connected() {
                    continue;
                }
                let (code, perm) = canonical_code(&h);
                if seen.insert(code) {
                    next.push(h.permuted(&perm));
                }
            }
        }
        level = next;
    }
    if n == 1 {
        return level;
    }
    level.sort_by_key(|g| canonical_code(g).0);
    level
}

/// Least upper-triangle code over relabelings respecting an iterated degree refinement.
/// Returns the code and the relabeling achieving it.
pub fn canonical_code(g: &Graph) -> (u64, Vec<Vertex>) {
    let n = g.n();
    assert!(n <= 11, "canonical codes fit 64 bits only for n <= 11");
    let masks = g.adjacency_masks();
    let mut color: Vec<u64> = (0..n).map(|v| g.degree(v) as u64).collect();
    loop {
        let mut sig: Vec<(u64, Vec<u64>)> = (0..n)
            .map(|v| {
                let mut ns: Vec<u64> = g.neighbors(v).iter().map(|&w| color[w]).collect();
                ns.sort_unstable();
                (color[v], ns)
            })
            .collect();
        let mut distinct = sig.clone();
        distinct.sort();
        distinct.dedup();
        let refined: Vec<u64> = sig
            .iter_mut()
            .map(|s| distinct.binary_search(s).expect("present") as u64)
            .collect();
        let before = color.iter().collect::<HashSet<_>>().len();
        let after = refined.iter().collect::<HashSet<_>>().len();
        color = refined;
        if after == before {
            break;
        }
    }
    let mut cells: Vec<Vec<Vertex>> = Vec::new();
    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_by_key(|&v| (color[v], v));
    for v in order {
        match cells.last_mut() {
            Some(cell) if color[cell[0]] == color[v] => cell.push(v),
            _ => cells.push(vec![v]),
        }
    }
    let mut best: Option<(u64, Vec<Vertex>)> = None;
    let mut perm = vec![0; n];
    let mut cells_perm = cells.clone();
    search_cells(&masks, &mut cells_perm, 0, &mut perm, &mut best);
    best.expect("at least one labeling")
}

fn search_cells(
    masks: &[u64],
    cells: &mut [Vec<Vertex>],
    idx: usize,
    perm: &mut Vec<Vertex>,
    best: &mut Option<(u64, Vec<Vertex>)>,
) {
    if idx == cells.len() {
        let mut pos = 0;
        for cell in cells.iter() {
            for &v in cell {
                perm[v] = pos;
                pos += 1;
            }
        }
        let n = perm.len();
        let mut inv = vec![0; n];
        for v in 0..n {
            inv[perm[v]] = v;
        }
        let mut code = 0u64;
        for j in 1..n {
            for i in 0..j {
                code = (code << 1) | (masks[inv[i]] >> inv[j] & 1);
            }
        }
        if best.as_ref().is_none_or(|(b, _)| code < *b) {
            *best = Some((code, perm.clone()));
        }
        return;
    }
    let len = cells[idx].len();
    let mut c = vec![0usize; len];
    search_cells(masks, cells, idx + 1, perm, best);
    // Heap's algorithm over this cell
    let mut i = 0;
    while i < len {
        if c[i] < i {
            if i % 2 == 0 {
                cells[idx].swap(0, i);
            } else {
                cells[idx].swap(c[i], i);
            }
            search_cells(masks, cells, idx + 1, perm, best);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
