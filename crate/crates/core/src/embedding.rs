use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{ParseError, MAX_PARSE_VERTICES};
use crate::graph::{Graph, Vertex, VertexRemap};

mod search;

pub use search::{euler_genus_lower_bound, search_embedding, SearchOptions};

pub type Dart = (Vertex, Vertex);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("embedding needs at least one vertex")]
    EmptyGraph,
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("malformed rotation at vertex {vertex}: {reason}")]
    MalformedRotation { vertex: Vertex, reason: String },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("{0} and {1} share no face")]
    NotCofacial(Vertex, Vertex),
    #[error("vertex {vertex} is not on face {face}")]
    NotOnFace { vertex: Vertex, face: usize },
    #[error("face {0} does not exist")]
    FaceOutOfRange(usize),
    #[error("cannot join vertex {0} to itself")]
    Loop(Vertex),
    #[error("deleting the requested vertices disconnects the graph")]
    WouldDisconnect,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Clockwise cyclic neighbor order at every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSystem {
    graph: Graph,
    rot: Vec<Vec<Vertex>>,
    pos: Vec<Vec<usize>>,
}

impl RotationSystem {
    pub fn new(graph: Graph, rot: Vec<Vec<Vertex>>) -> Result<Self, EmbeddingError> {
        if rot.len() != graph.n() {
            return Err(EmbeddingError::MalformedRotation {
                vertex: rot.len().min(graph.n()),
                reason: format!("{} rotation lists for {} vertices", rot.len(), graph.n()),
            });
        }
        for (v, list) in rot.iter().enumerate() {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if sorted != graph.neighbors(v) {
                return Err(EmbeddingError::MalformedRotation {
                    vertex: v,
                    reason: "rotation is not a permutation of the neighborhood".into(),
                });
            }
        }
        Ok(Self::build(graph, rot))
    }

    /// Derives the graph from the rotation lists, which must be symmetric.
    pub fn from_rotations(rot: Vec<Vec<Vertex>>) -> Result<Self, EmbeddingError> {
        let n = rot.len();
        for (v, list) in rot.iter().enumerate() {
            for &w in list {
                if w >= n {
                    return Err(EmbeddingError::VertexOutOfRange { vertex: w, n });
                }
                if w == v {
                    return Err(EmbeddingError::MalformedRotation {
                        vertex: v,
                        reason: "loop".into(),
                    });
                }
                if !rot[w].contains(&v) {
                    return Err(EmbeddingError::MalformedRotation {
                        vertex: v,
                        reason: format!("{w} is listed at {v} but {v} is not listed at {w}"),
                    });
                }
            }
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != list.len() {
                return Err(EmbeddingError::MalformedRotation {
                    vertex: v,
                    reason: "repeated neighbor".into(),
                });
            }
        }
        let graph = Graph::from_adjacency(&rot).map_err(|e| EmbeddingError::MalformedRotation {
            vertex: 0,
            reason: e.to_string(),
        })?;
        Self::new(graph, rot)
    }

    /// Rotation using the sorted neighbor order at every vertex.
    pub fn sorted(graph: Graph) -> Self {
        let rot = graph
            .vertices()
            .map(|v| graph.neighbors(v).to_vec())
            .collect();
        Self::build(graph, rot)
    }

    fn build(graph: Graph, rot: Vec<Vec<Vertex>>) -> Self {
        let mut pos = vec![Vec::new(); graph.n()];
        for v in graph.vertices() {
            pos[v] = vec![0; graph.degree(v)];
            for (i, &w) in rot[v].iter().enumerate() {
                let idx = graph.neighbor_index(v, w).expect("validated rotation");
                pos[v][idx] = i;
            }
        }
        RotationSystem { graph, rot, pos }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn rotation(&self, v: Vertex) -> &[Vertex] {
        &self.rot[v]
    }

    pub fn rotations(&self) -> &[Vec<Vertex>] {
        &self.rot
    }

    fn position(&self, v: Vertex, w: Vertex) -> usize {
        let idx = self
            .graph
            .neighbor_index(v, w)
            .expect("w must be a neighbor of v");
        self.pos[v][idx]
    }

    /// Neighbor following `w` clockwise around `v`.
    pub fn succ(&self, v: Vertex, w: Vertex) -> Vertex {
        let d = self.rot[v].len();
        self.rot[v][(self.position(v, w) + 1) % d]
    }

    pub fn pred(&self, v: Vertex, w: Vertex) -> Vertex {
        let d = self.rot[v].len();
        self.rot[v][(self.position(v, w) + d - 1) % d]
    }

    /// Dart following `(u, v)` on its face.
    pub fn next_dart(&self, (u, v): Dart) -> Dart {
        (v, self.succ(v, u))
    }

    /// Dart orbits, each rotated to its least dart sequence, sorted. Works on disconnected graphs.
    pub fn orbits(&self) -> Vec<Vec<Dart>> {
        let mut seen: Vec<Vec<bool>> = self
            .graph
            .vertices()
            .map(|v| vec![false; self.graph.degree(v)])
            .collect();
        let mut faces = Vec::new();
        for u in self.graph.vertices() {
            for (i, &v) in self.graph.neighbors(u).iter().enumerate() {
                if seen[u][i] {
                    continue;
                }
                let mut face = Vec::new();
                let mut dart = (u, v);
                loop {
                    let idx = self
                        .graph
                        .neighbor_index(dart.0, dart.1)
                        .expect("dart is an edge");
                    if seen[dart.0][idx] {
                        break;
                    }
                    seen[dart.0][idx] = true;
                    face.push(dart);
                    dart = self.next_dart(dart);
                }
                faces.push(canonical_rotation(face));
            }
        }
        faces.sort();
        faces
    }

    /// Inserts edge uv with v placed right after `after_u` around u and u right after `after_v` around v.
    /// `None` is only valid at a vertex with an empty rotation.
    pub fn insert_edge(
        &self,
        u: Vertex,
        after_u: Option<Vertex>,
        v: Vertex,
        after_v: Option<Vertex>,
    ) -> Result<RotationSystem, EmbeddingError> {
        let n = self.graph.n();
        for x in [u, v] {
            if x >= n {
                return Err(EmbeddingError::VertexOutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(EmbeddingError::Loop(u));
        }
        let graph = self.graph.add_edges(&[(u, v)]).expect("endpoints checked");
        let mut rot = self.rot.clone();
        for (x, after, y) in [(u, after_u, v), (v, after_v, u)] {
            let at = match after {
                Some(a) => {
                    if !self.graph.has_edge(x, a) {
                        return Err(EmbeddingError::MalformedRotation {
                            vertex: x,
                            reason: format!("{a} is not a neighbor"),
                        });
                    }
                    self.position(x, a) + 1
                }
                None if rot[x].is_empty() => 0,
                None => {
                    return Err(EmbeddingError::MalformedRotation {
                        vertex: x,
                        reason: "insertion corner required".into(),
                    })
                }
            };
            rot[x].insert(at, y);
        }
        Ok(Self::build(graph, rot))
    }

    /// Restricts rotations to the surviving vertices.
    pub fn delete_vertices(&self, gone: &[Vertex]) -> (RotationSystem, VertexRemap) {
        let (graph, remap) = self.graph.delete_vertices(gone).expect("vertices in range");
        let mut rot = vec![Vec::new(); graph.n()];
        for v in self.graph.vertices() {
            if let Some(nv) = remap.get(v) {
                rot[nv] = self.rot[v].iter().filter_map(|&w| remap.get(w)).collect();
            }
        }
        (Self::build(graph, rot), remap)
    }

    /// Adds uv inside an orbit that visits both, splitting that orbit. Returns `None` if no orbit does.
    pub fn insert_cofacial(&self, u: Vertex, v: Vertex) -> Option<RotationSystem> {
        self.orbits().iter().find_map(|face| {
            let (pu, pv) = (corner_in(face, u)?, corner_in(face, v)?);
            self.insert_edge(u, Some(pu), v, Some(pv)).ok()
        })
    }
}

/// Predecessor of the first visit to `x` on the face: the new edge goes right after it around `x`.
fn corner_in(face: &[Dart], x: Vertex) -> Option<Vertex> {
    let len = face.len();
    (0..len)
        .find(|&i| face[i].0 == x)
        .map(|i| face[(i + len - 1) % len].0)
}

fn canonical_rotation(darts: Vec<Dart>) -> Vec<Dart> {
    let len = darts.len();
    if len == 0 {
        return darts;
    }
    let best = (0..len)
        .min_by(|&a, &b| {
            let ka = darts[a..].iter().chain(&darts[..a]);
            let kb = darts[b..].iter().chain(&darts[..b]);
            ka.cmp(kb)
        })
        .unwrap_or(0);
    let mut out = darts[best..].to_vec();
    out.extend_from_slice(&darts[..best]);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    darts: Vec<Dart>,
}

impl Face {
    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    /// Boundary length ℓ (number of darts).
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    /// Boundary vertices in walk order (one entry per incidence).
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.darts.iter().map(|d| d.0)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.darts.iter().any(|d| d.0 == v)
    }

    pub fn distinct_vertices(&self) -> Vec<Vertex> {
        let mut vs: Vec<Vertex> = self.vertices().collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

/// A connected graph with a rotation system, its faces and orientable genus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedGraph {
    rotation: RotationSystem,
    faces: Vec<Face>,
    genus: usize,
    dart_face: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
}

pub fn trace_faces(rot: RotationSystem) -> Result<EmbeddedGraph, EmbeddingError> {
    EmbeddedGraph::trace(rot)
}

impl EmbeddedGraph {
    pub fn trace(rotation: RotationSystem) -> Result<Self, EmbeddingError> {
        let g = rotation.graph();
        if g.n() == 0 {
            return Err(EmbeddingError::EmptyGraph);
        }
        if !g.is_connected() {
            return Err(EmbeddingError::DisconnectedGraph);
        }
        let mut orbits = rotation.orbits();
        if orbits.is_empty() {
            orbits.push(Vec::new());
        }
        let (v, e, f) = (g.n() as i64, g.m() as i64, orbits.len() as i64);
        let twice_genus = 2 - v + e - f;
        debug_assert!(
            twice_genus >= 0 && twice_genus % 2 == 0,
            "Euler characteristic parity"
        );
        let genus = (twice_genus / 2) as usize;
        let mut dart_face: Vec<Vec<usize>> = g.vertices().map(|v| vec![0; g.degree(v)]).collect();
        let mut vertex_faces = vec![Vec::new(); g.n()];
        for (id, face) in orbits.iter().enumerate() {
            for &(a, b) in face {
                let idx = g.neighbor_index(a, b).expect("dart is an edge");
                dart_face[a][idx] = id;
                vertex_faces[a].push(id);
            }
        }
        if g.m() == 0 {
            vertex_faces[0].push(0);
        }
        for list in &mut vertex_faces {
            list.sort_unstable();
            list.dedup();
        }
        let faces = orbits.into_iter().map(|darts| Face { darts }).collect();
        Ok(EmbeddedGraph {
            rotation,
            faces,
            genus,
            dart_face,
            vertex_faces,
        })
    }

    pub fn graph(&self) -> &Graph {
        self.rotation.graph()
    }

    pub fn rotation(&self) -> &RotationSystem {
        &self.rotation
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    pub fn face_of_dart(&self, u: Vertex, v: Vertex) -> usize {
        let idx = self
            .graph()
            .neighbor_index(u, v)
            .expect("dart must be an edge");
        self.dart_face[u][idx]
    }

    /// Faces visiting v (deduplicated, ascending id).
    pub fn faces_at(&self, v: Vertex) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Face holding the corner at v between `a` and its clockwise successor.
    pub fn corner_face(&self, v: Vertex, a: Vertex) -> usize {
        self.face_of_dart(a, v)
    }

    /// Faces around v in clockwise corner order, one per corner.
    pub fn corner_faces(&self, v: Vertex) -> Vec<usize> {
        self.rotation
            .rotation(v)
            .iter()
            .map(|&a| self.corner_face(v, a))
            .collect()
    }

    fn check(&self, v: Vertex) -> Result<(), EmbeddingError> {
        let n = self.graph().n();
        if v < n {
            Ok(())
        } else {
            Err(EmbeddingError::VertexOutOfRange { vertex: v, n })
        }
    }

    /// Lowest-id face visiting both u and v.
    pub fn cofacial(&self, u: Vertex, v: Vertex) -> Option<usize> {
        if u >= self.graph().n() || v >= self.graph().n() {
            return None;
        }
        let (a, b) = (&self.vertex_faces[u], &self.vertex_faces[v]);
        a.iter().find(|f| b.binary_search(f).is_ok()).copied()
    }

    /// Adds uv through a common face; an existing edge is a no-op.
    pub fn add_cofacial_edge(&self, u: Vertex, v: Vertex) -> Result<EmbeddedGraph, EmbeddingError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(EmbeddingError::Loop(u));
        }
        if self.graph().has_edge(u, v) {
            return Ok(self.clone());
        }
        let face = self
            .cofacial(u, v)
            .ok_or(EmbeddingError::NotCofacial(u, v))?;
        self.add_edge_in_face(u, v, face)
    }

    /// Adds uv splitting the given face at the first visits of u and v.
    pub fn add_edge_in_face(
        &self,
        u: Vertex,
        v: Vertex,
        face: usize,
    ) -> Result<EmbeddedGraph, EmbeddingError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(EmbeddingError::Loop(u));
        }
        if self.graph().has_edge(u, v) {
            return Ok(self.clone());
        }
        let f = self
            .faces
            .get(face)
            .ok_or(EmbeddingError::FaceOutOfRange(face))?;
        let pu = corner_in(&f.darts, u).ok_or(EmbeddingError::NotOnFace { vertex: u, face })?;
        let pv = corner_in(&f.darts, v).ok_or(EmbeddingError::NotOnFace { vertex: v, face })?;
        let rot = self.rotation.insert_edge(u, Some(pu), v, Some(pv))?;
        let out = EmbeddedGraph::trace(rot)?;
        debug_assert_eq!(out.genus, self.genus, "splitting a face keeps the genus");
        Ok(out)
    }

    /// Deletes vertices, restricting rotations and retracing faces.
    pub fn induced_embedding(
        &self,
        delete: &[Vertex],
    ) -> Result<(EmbeddedGraph, VertexRemap), EmbeddingError> {
        for &v in delete {
            self.check(v)?;
        }
        let (rot, remap) = self.rotation.delete_vertices(delete);
        if rot.graph().n() == 0 {
            return Err(EmbeddingError::EmptyGraph);
        }
        if !rot.graph().is_connected() {
            return Err(EmbeddingError::WouldDisconnect);
        }
        let out = EmbeddedGraph::trace(rot)?;
        debug_assert!(out.genus <= self.genus);
        Ok((out, remap))
    }

    pub fn into_rotation(self) -> RotationSystem {
        self.rotation
    }
}

impl fmt::Display for RotationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rot {}", self.graph.n())?;
        for (v, list) in self.rot.iter().enumerate() {
            write!(f, "{v}:")?;
            for w in list {
                write!(f, " {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn emit_rotation(rot: &RotationSystem) -> String {
    rot.to_string()
}

/// Parses `rot <n>` followed by one `<v>: w1 w2 ...` line per vertex.
pub fn parse_rotation(text: &str) -> Result<RotationSystem, EmbeddingError> {
    let mut n: Option<usize> = None;
    let mut rot: Vec<Option<Vec<Vertex>>> = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some(count) = n else {
            let rest = content
                .strip_prefix("rot")
                .ok_or_else(|| ParseError::new(at, "expected header `rot <n>`"))?;
            let count: usize = rest
                .trim()
                .parse()
                .map_err(|_| ParseError::new(at, "header needs a vertex count"))?;
            if count > MAX_PARSE_VERTICES {
                return Err(ParseError::new(at, "vertex count exceeds the limit").into());
            }
            n = Some(count);
            rot = vec![None; count];
            continue;
        };
        let (head, tail) = content
            .split_once(':')
            .ok_or_else(|| ParseError::new(at, "expected `<v>: neighbors`"))?;
        let v: Vertex = head
            .trim()
            .parse()
            .map_err(|_| ParseError::new(at, "bad vertex id"))?;
        if v >= count {
            return Err(ParseError::new(at, format!("vertex {v} out of range")).into());
        }
        if rot[v].is_some() {
            return Err(ParseError::new(at, format!("vertex {v} listed twice")).into());
        }
        let list = tail
            .split_whitespace()
            .map(|t| match t.parse::<Vertex>() {
                Ok(w) if w < count => Ok(w),
                _ => Err(ParseError::new(at, format!("bad neighbor {t:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rot[v] = Some(list);
    }
    let count = n.ok_or_else(|| ParseError::new(0, "missing `rot <n>` header"))?;
    let lists = rot
        .into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or_else(|| ParseError::new(offset, format!("no line for vertex {v}"))))
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert_eq!(lists.len(), count);
    RotationSystem::from_rotations(lists)
}
