use super::{ConfigKind, ConfigMatch, Host};
use crate::embedding::EmbeddedGraph;
use crate::graph::Vertex;

fn roles(pairs: &[(&str, Vertex)]) -> Vec<(String, Vertex)> {
    pairs.iter().map(|&(n, v)| (n.to_string(), v)).collect()
}

pub(super) fn matches(host: Host<'_>, kind: ConfigKind) -> Vec<ConfigMatch> {
    let g = host.graph();
    let d = |v: Vertex| g.degree(v);
    match kind {
        ConfigKind::Deg2Minus => g
            .vertices()
            .filter(|&v| d(v) <= 2)
            .map(|v| deg2_minus(host, v))
            .collect(),
        ConfigKind::Adjacent3s => g
            .edges()
            .filter_map(|(a, b)| adjacent_3s(host, a, b))
            .collect(),
        ConfigKind::ManyThreeNbrs => {
            let emb = host.embedding().expect("checked by caller");
            g.vertices()
                .filter_map(|v| {
                    let m = many_three_nbrs(host, v)?;
                    let k = m.indexed("x").len();
                    let (e3, e4) = expensive_faces(emb, v);
                    (d(v) + k < 10 + e3 + e4).then_some(m)
                })
                .collect()
        }
        ConfigKind::FourWithThreeNbr => g
            .vertices()
            .flat_map(|v1| g.neighbors(v1).iter().map(move |&v2| (v1, v2)))
            .filter_map(|(v1, v2)| four_with_three(host, v1, v2))
            .collect(),
        ConfigKind::LightTriangle => {
            let mut out = Vec::new();
            for (a, b) in g.edges() {
                for &c in g.neighbors(b) {
                    if c > b && g.has_edge(a, c) {
                        let mut tri = [a, b, c];
                        if tri.iter().filter(|&&x| d(x) >= 5).count() > 1 {
                            continue;
                        }
                        tri.sort_by_key(|&x| (d(x), x));
                        out.push(light_triangle(host, tri[0], tri[1], tri[2]));
                    }
                }
            }
            out
        }
        ConfigKind::TwinTriangles => twin_triangles(host),
        ConfigKind::TriangleAnd4Vtx => triangle_and_4vtx(host),
        ConfigKind::ThreeTriangleFan => three_triangle_fan(host),
        ConfigKind::Exp4FaceMeets3Face => exp4_meets_3(host),
        ConfigKind::All4sQuadFace => all4s_quad(host),
        ConfigKind::KpPendant => g
            .vertices()
            .filter(|&v| d(v) == 1)
            .map(|v| ConfigMatch::new(kind, roles(&[("v", v), ("u", g.neighbors(v)[0])])))
            .collect(),
        ConfigKind::KpTwoTwo => g
            .vertices()
            .flat_map(|u| g.neighbors(u).iter().map(move |&v| (u, v)))
            .filter_map(|(u, v)| kp_two_two(host, u, v))
            .filter(|m| d(m.role("u1").expect("set")) >= 3)
            .collect(),
        ConfigKind::KpThreeWithTwos => g
            .vertices()
            .filter(|&u| d(u) == 3)
            .filter_map(|u| {
                let ws: Vec<Vertex> = g
                    .neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&w| d(w) == 2)
                    .collect();
                if ws.is_empty() {
                    return None;
                }
                let mut rs = vec![("u".to_string(), u)];
                for (i, &w) in ws.iter().enumerate() {
                    let wp = other(g.neighbors(w), u);
                    rs.push((format!("w{}", i + 1), w));
                    rs.push((format!("w{}p", i + 1), wp));
                }
                Some(ConfigMatch::new(kind, rs))
            })
            .collect(),
    }
}

fn other(pair: &[Vertex], x: Vertex) -> Vertex {
    if pair[0] == x {
        pair[1]
    } else {
        pair[0]
    }
}

/// Distinct faces at v: 3-faces holding a 3-vertex, and 4-faces holding two.
pub(crate) fn expensive_faces(emb: &EmbeddedGraph, v: Vertex) -> (usize, usize) {
    let g = emb.graph();
    let threes = |f: usize| {
        emb.face(f)
            .distinct_vertices()
            .into_iter()
            .filter(|&x| g.degree(x) == 3)
            .count()
    };
    let mut e3 = 0;
    let mut e4 = 0;
    for &f in emb.faces_at(v) {
        match emb.face(f).len() {
            3 if threes(f) >= 1 => e3 += 1,
            4 if threes(f) >= 2 => e4 += 1,
            _ => {}
        }
    }
    (e3, e4)
}

pub(super) fn deg2_minus(host: Host<'_>, v: Vertex) -> ConfigMatch {
    let ring = host.around(v);
    let rs = match ring.len() {
        0 => roles(&[("v", v)]),
        1 => roles(&[("v", v), ("u", ring[0])]),
        _ => roles(&[("v", v), ("y", ring[0]), ("z", ring[1])]),
    };
    ConfigMatch::new(ConfigKind::Deg2Minus, rs)
}

pub(super) fn adjacent_3s(host: Host<'_>, v1: Vertex, v2: Vertex) -> Option<ConfigMatch> {
    let g = host.graph();
    if !g.has_edge(v1, v2) || g.degree(v1) > 3 || g.degree(v2) > 3 {
        return None;
    }
    let mut rs = roles(&[("v1", v1), ("v2", v2)]);
    for (i, (a, b)) in [(v1, v2), (v2, v1)].into_iter().enumerate() {
        let rest = host.around_from(a, b);
        if rest.len() == 2 {
            rs.push((format!("y{}", i + 1), rest[0]));
            rs.push((format!("z{}", i + 1), rest[1]));
        }
    }
    Some(ConfigMatch::new(ConfigKind::Adjacent3s, rs))
}

/// Roles only; the degree-sum hypothesis is checked by the detector.
pub(super) fn many_three_nbrs(host: Host<'_>, v: Vertex) -> Option<ConfigMatch> {
    let g = host.graph();
    let xs: Vec<Vertex> = host
        .around(v)
        .into_iter()
        .filter(|&x| g.degree(x) == 3)
        .collect();
    if xs.len() < 2 {
        return None;
    }
    let mut rs = roles(&[("v", v)]);
    for (i, &x) in xs.iter().enumerate() {
        let rest = host.around_from(x, v);
        rs.push((format!("x{}", i + 1), x));
        rs.push((format!("y{}", i + 1), rest[0]));
        rs.push((format!("z{}", i + 1), rest[1]));
    }
    let mut m = ConfigMatch::new(ConfigKind::ManyThreeNbrs, rs);
    if let Some(emb) = host.embedding() {
        m.faces = emb.faces_at(v).to_vec();
    }
    Some(m)
}

pub(super) fn four_with_three(host: Host<'_>, v1: Vertex, v2: Vertex) -> Option<ConfigMatch> {
    let g = host.graph();
    if !g.has_edge(v1, v2) || g.degree(v1) > 4 || g.degree(v2) > 3 {
        return None;
    }
    let mut rs = roles(&[("v1", v1), ("v2", v2)]);
    if g.degree(v1) == 4 && g.degree(v2) == 3 {
        // Consecutive around v1, hence on a common face.
        let a = host.around_from(v1, v2);
        let b = host.around_from(v2, v1);
        rs.extend(roles(&[
            ("y1", a[0]),
            ("z1", a[1]),
            ("w1", a[2]),
            ("y2", b[0]),
            ("z2", b[1]),
        ]));
    }
    Some(ConfigMatch::new(ConfigKind::FourWithThreeNbr, rs))
}

/// v1, v2 are the two lowest-degree corners.
fn light_triangle(host: Host<'_>, v1: Vertex, v2: Vertex, z: Vertex) -> ConfigMatch {
    let g = host.graph();
    let mut rs = roles(&[("v1", v1), ("v2", v2), ("z", z)]);
    if g.degree(v1) == 4 && g.degree(v2) == 4 {
        for (i, (a, b)) in [(v1, v2), (v2, v1)].into_iter().enumerate() {
            // A neighbor consecutive with z around a, so that it, a and z share a face.
            let ring = host.around(a);
            let at = ring.iter().position(|&x| x == z).expect("z is a neighbor");
            let len = ring.len();
            let candidates = match host {
                Host::Embedded(_) => vec![ring[(at + 1) % len], ring[(at + len - 1) % len]],
                Host::Bare(_) => ring.clone(),
            };
            let y = candidates
                .into_iter()
                .find(|&y| y != b && y != z)
                .expect("degree 4 leaves a choice");
            rs.push((format!("y{}", i + 1), y));
        }
    }
    ConfigMatch::new(ConfigKind::LightTriangle, rs)
}

/// The third vertex of the triangular face holding dart (a, b).
fn triangle_apex(emb: &EmbeddedGraph, a: Vertex, b: Vertex) -> Option<(usize, Vertex)> {
    let f = emb.face_of_dart(a, b);
    let face = emb.face(f);
    if face.len() != 3 {
        return None;
    }
    face.vertices().find(|&x| x != a && x != b).map(|x| (f, x))
}

fn twin_triangles(host: Host<'_>) -> Vec<ConfigMatch> {
    let emb = host.embedding().expect("checked by caller");
    let g = emb.graph();
    let mut out = Vec::new();
    for v in g.vertices().filter(|&v| g.degree(v) <= 5) {
        for &u in g.neighbors(v) {
            let (Some((f1, y)), Some((f2, z))) =
                (triangle_apex(emb, u, v), triangle_apex(emb, v, u))
            else {
                continue;
            };
            if f1 == f2 || y == z {
                continue;
            }
            let off_ok = g
                .neighbors(v)
                .iter()
                .all(|&w| w == u || w == y || w == z || g.degree(w) >= 4);
            if off_ok {
                let mut m = ConfigMatch::new(
                    ConfigKind::TwinTriangles,
                    roles(&[("v", v), ("u", u), ("y", y), ("z", z)]),
                );
                m.faces = vec![f1, f2];
                out.push(m);
            }
        }
    }
    out
}

fn triangle_and_4vtx(host: Host<'_>) -> Vec<ConfigMatch> {
    let emb = host.embedding().expect("checked by caller");
    let g = emb.graph();
    let mut out = Vec::new();
    for v in g.vertices().filter(|&v| g.degree(v) <= 7) {
        let tri_faces: Vec<usize> = emb
            .faces_at(v)
            .iter()
            .copied()
            .filter(|&f| emb.face(f).len() == 3)
            .collect();
        if tri_faces.len() < 2 {
            continue;
        }
        for &x in g.neighbors(v) {
            if g.degree(x) > 4 || g.neighbors(v).iter().any(|&w| w != x && g.degree(w) == 3) {
                continue;
            }
            let mut rs = roles(&[("v", v), ("x", x)]);
            let rest = host.around_from(x, v);
            if rest.len() >= 2 {
                rs.extend(roles(&[("y", rest[0]), ("z", rest[1])]));
            }
            let mut m = ConfigMatch::new(ConfigKind::TriangleAnd4Vtx, rs);
            m.faces = tri_faces.clone();
            out.push(m);
        }
    }
    out
}

fn three_triangle_fan(host: Host<'_>) -> Vec<ConfigMatch> {
    let emb = host.embedding().expect("checked by caller");
    let g = emb.graph();
    let mut out = Vec::new();
    for v in g.vertices().filter(|&v| (4..=6).contains(&g.degree(v))) {
        let ring = emb.rotation().rotation(v).to_vec();
        let len = ring.len();
        let tri: Vec<bool> = ring
            .iter()
            .map(|&a| emb.face(emb.corner_face(v, a)).len() == 3)
            .collect();
        for i in 0..len {
            if tri[i] && tri[(i + 1) % len] && tri[(i + 2) % len] {
                let at = |j: usize| ring[(i + j) % len];
                let mut m = ConfigMatch::new(
                    ConfigKind::ThreeTriangleFan,
                    roles(&[
                        ("v", v),
                        ("z", at(0)),
                        ("x", at(1)),
                        ("y", at(2)),
                        ("u", at(3)),
                    ]),
                );
                m.faces = (0..3).map(|j| emb.corner_face(v, at(j))).collect();
                out.push(m);
            }
        }
    }
    out
}

fn exp4_meets_3(host: Host<'_>) -> Vec<ConfigMatch> {
    let emb = host.embedding().expect("checked by caller");
    let g = emb.graph();
    let mut out = Vec::new();
    for (fid, face) in emb.faces().iter().enumerate() {
        let q: Vec<Vertex> = face.vertices().collect();
        if q.len() != 4 || face.distinct_vertices().len() != 4 {
            continue;
        }
        if q.iter().filter(|&&x| g.degree(x) == 3).count() < 2 {
            continue;
        }
        for i in 0..4 {
            let (a, b) = (q[i], q[(i + 1) % 4]);
            let Some((tri, z)) = triangle_apex(emb, b, a) else {
                continue;
            };
            if tri == fid {
                continue;
            }
            let (v, y, u2, u1) = if g.degree(a) == 3 || g.degree(b) != 3 {
                (a, q[(i + 3) % 4], q[(i + 2) % 4], b)
            } else {
                (b, q[(i + 2) % 4], q[(i + 3) % 4], a)
            };
            let mut m = ConfigMatch::new(
                ConfigKind::Exp4FaceMeets3Face,
                roles(&[("v", v), ("y", y), ("u2", u2), ("u1", u1), ("z", z)]),
            );
            m.faces = vec![fid, tri];
            out.push(m);
        }
    }
    out
}

fn all4s_quad(host: Host<'_>) -> Vec<ConfigMatch> {
    let emb = host.embedding().expect("checked by caller");
    let g = emb.graph();
    let mut out = Vec::new();
    for (fid, face) in emb.faces().iter().enumerate() {
        let q: Vec<Vertex> = face.vertices().collect();
        if q.len() != 4 || face.distinct_vertices().len() != 4 || q.iter().any(|&x| g.degree(x) > 4)
        {
            continue;
        }
        let mut rs: Vec<(String, Vertex)> = q
            .iter()
            .enumerate()
            .map(|(i, &x)| (format!("v{}", i + 1), x))
            .collect();
        for i in 0..4 {
            let (prev, next) = (q[(i + 3) % 4], q[(i + 1) % 4]);
            let off: Vec<Vertex> = host
                .around_from(q[i], next)
                .into_iter()
                .filter(|&w| w != prev && w != next)
                .collect();
            if off.len() == 2 {
                rs.push((format!("y{}", i + 1), off[0]));
                rs.push((format!("z{}", i + 1), off[1]));
            }
        }
        let mut m = ConfigMatch::new(ConfigKind::All4sQuadFace, rs);
        m.faces = vec![fid];
        out.push(m);
    }
    out
}

pub(super) fn kp_two_two(host: Host<'_>, u: Vertex, v: Vertex) -> Option<ConfigMatch> {
    let g = host.graph();
    if !g.has_edge(u, v) || g.degree(u) != 2 || g.degree(v) != 2 {
        return None;
    }
    let u1 = other(g.neighbors(u), v);
    let v1 = other(g.neighbors(v), u);
    Some(ConfigMatch::new(
        ConfigKind::KpTwoTwo,
        roles(&[("u", u), ("v", v), ("u1", u1), ("v1", v1)]),
    ))
}
