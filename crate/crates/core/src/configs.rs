//! Reducible configurations: detection on bare or embedded graphs, the reduction each one
//! licenses, and two independent checks of a reduction (coloring extension and game budgets).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddedGraph, EmbeddingError, RotationSystem};
use crate::game::{GameError, Trigger, VetoRule};
use crate::graph::{Graph, Vertex};

mod check;
mod detect;

pub use check::{
    check_budget, check_extendable, BudgetOptions, BudgetReport, ExtendBudget, ExtendReport,
    RuleAudit,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfigKind {
    Deg2Minus,
    Adjacent3s,
    ManyThreeNbrs,
    FourWithThreeNbr,
    LightTriangle,
    TwinTriangles,
    TriangleAnd4Vtx,
    ThreeTriangleFan,
    Exp4FaceMeets3Face,
    All4sQuadFace,
    KpPendant,
    KpTwoTwo,
    KpThreeWithTwos,
}

impl ConfigKind {
    /// The configurations reducible for 3-dynamic 10-paintability on the torus.
    pub const TORUS: [ConfigKind; 10] = [
        ConfigKind::Deg2Minus,
        ConfigKind::Adjacent3s,
        ConfigKind::ManyThreeNbrs,
        ConfigKind::FourWithThreeNbr,
        ConfigKind::LightTriangle,
        ConfigKind::TwinTriangles,
        ConfigKind::TriangleAnd4Vtx,
        ConfigKind::ThreeTriangleFan,
        ConfigKind::Exp4FaceMeets3Face,
        ConfigKind::All4sQuadFace,
    ];

    /// The configurations reducible for 2-dynamic 4-choosability of sparse graphs.
    pub const KP: [ConfigKind; 3] = [
        ConfigKind::KpPendant,
        ConfigKind::KpTwoTwo,
        ConfigKind::KpThreeWithTwos,
    ];

    pub fn all() -> impl Iterator<Item = ConfigKind> {
        Self::TORUS.into_iter().chain(Self::KP)
    }

    pub fn name(self) -> &'static str {
        match self {
            ConfigKind::Deg2Minus => "deg2-minus",
            ConfigKind::Adjacent3s => "adjacent-3s",
            ConfigKind::ManyThreeNbrs => "many-three-nbrs",
            ConfigKind::FourWithThreeNbr => "four-with-three-nbr",
            ConfigKind::LightTriangle => "light-triangle",
            ConfigKind::TwinTriangles => "twin-triangles",
            ConfigKind::TriangleAnd4Vtx => "triangle-and-4vtx",
            ConfigKind::ThreeTriangleFan => "three-triangle-fan",
            ConfigKind::Exp4FaceMeets3Face => "exp4face-meets-3face",
            ConfigKind::All4sQuadFace => "all4s-quad-face",
            ConfigKind::KpPendant => "kp-pendant",
            ConfigKind::KpTwoTwo => "kp-two-two",
            ConfigKind::KpThreeWithTwos => "kp-three-with-twos",
        }
    }

    /// (r, k) of the coloring target the configuration is reducible for.
    pub fn target(self) -> (usize, u32) {
        if Self::KP.contains(&self) {
            (2, 4)
        } else {
            (3, 10)
        }
    }

    /// Kinds whose hypotheses mention faces.
    pub fn needs_embedding(self) -> bool {
        matches!(
            self,
            ConfigKind::ManyThreeNbrs
                | ConfigKind::TwinTriangles
                | ConfigKind::TriangleAnd4Vtx
                | ConfigKind::ThreeTriangleFan
                | ConfigKind::Exp4FaceMeets3Face
                | ConfigKind::All4sQuadFace
        )
    }
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConfigKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConfigKind::all()
            .find(|k| k.name() == s)
            .ok_or_else(|| ConfigError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} needs an embedding; supply a rotation system")]
    EmbeddingRequired(ConfigKind),
    #[error("cannot add {0}{1}: the endpoints share no face")]
    EmbeddingSurgeryFailed(Vertex, Vertex),
    #[error("match does not satisfy the {kind} hypotheses: {why}")]
    InvalidMatch { kind: ConfigKind, why: String },
    #[error("unknown configuration kind {0:?}")]
    UnknownKind(String),
    #[error("graph has {n} vertices; the check is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },
    #[error("the auxiliary graph is not won by Painter with the given tokens")]
    InnerNotWinning,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// A graph with or without a rotation system.
#[derive(Clone, Copy, Debug)]
pub enum Host<'a> {
    Bare(&'a Graph),
    Embedded(&'a EmbeddedGraph),
}

impl<'a> Host<'a> {
    pub fn graph(&self) -> &'a Graph {
        match self {
            Host::Bare(g) => g,
            Host::Embedded(e) => e.graph(),
        }
    }

    pub fn embedding(&self) -> Option<&'a EmbeddedGraph> {
        match self {
            Host::Bare(_) => None,
            Host::Embedded(e) => Some(e),
        }
    }

    /// Neighbors in clockwise order when embedded, ascending otherwise.
    fn around(&self, v: Vertex) -> Vec<Vertex> {
        match self {
            Host::Bare(g) => g.neighbors(v).to_vec(),
            Host::Embedded(e) => e.rotation().rotation(v).to_vec(),
        }
    }

    /// The neighbors of v after `w` in cyclic order.
    fn around_from(&self, v: Vertex, w: Vertex) -> Vec<Vertex> {
        let ring = self.around(v);
        let at = ring.iter().position(|&x| x == w).expect("w is a neighbor");
        (1..ring.len())
            .map(|i| ring[(at + i) % ring.len()])
            .collect()
    }
}

/// One occurrence of a configuration: named vertex roles and the faces it was read from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigMatch {
    pub kind: ConfigKind,
    pub roles: Vec<(String, Vertex)>,
    pub faces: Vec<usize>,
}

impl ConfigMatch {
    fn new(kind: ConfigKind, roles: Vec<(String, Vertex)>) -> Self {
        ConfigMatch {
            kind,
            roles,
            faces: Vec::new(),
        }
    }

    pub fn role(&self, name: &str) -> Option<Vertex> {
        self.roles.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    fn need(&self, name: &str) -> Result<Vertex, ConfigError> {
        self.role(name).ok_or_else(|| ConfigError::InvalidMatch {
            kind: self.kind,
            why: format!("missing role {name}"),
        })
    }

    /// Role vertices with the given prefix and a numeric suffix, in suffix order.
    fn indexed(&self, prefix: &str) -> Vec<Vertex> {
        (1..)
            .map_while(|i| self.role(&format!("{prefix}{i}")))
            .collect()
    }
}

impl fmt::Display for ConfigMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let roles: Vec<String> = self.roles.iter().map(|(n, v)| format!("{n}={v}")).collect();
        write!(f, "{} {}", self.kind, roles.join(" "))?;
        if !self.faces.is_empty() {
            let faces: Vec<String> = self.faces.iter().map(|x| x.to_string()).collect();
            write!(f, " faces={}", faces.join(","))?;
        }
        Ok(())
    }
}

/// Every occurrence of the requested kinds. Face kinds on a bare graph are an error.
pub fn find_configs(host: Host<'_>, kinds: &[ConfigKind]) -> Result<Vec<ConfigMatch>, ConfigError> {
    let mut out = Vec::new();
    for &kind in kinds {
        if kind.needs_embedding() && host.embedding().is_none() {
            return Err(ConfigError::EmbeddingRequired(kind));
        }
        out.extend(detect::matches(host, kind));
    }
    Ok(out)
}

/// First occurrence of any kind, trying kinds in the given order.
pub fn first_config(
    host: Host<'_>,
    kinds: &[ConfigKind],
) -> Result<Option<ConfigMatch>, ConfigError> {
    for &kind in kinds {
        if kind.needs_embedding() && host.embedding().is_none() {
            return Err(ConfigError::EmbeddingRequired(kind));
        }
        if let Some(m) = detect::matches(host, kind).into_iter().next() {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// How an added edge was placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgePlacement {
    /// Already an edge of G; nothing added.
    Present,
    /// Inserted through a face of G before the deletion.
    BeforeDeletion,
    /// The endpoints only became cofacial once S was deleted.
    AfterDeletion,
    /// No embedding: added to the abstract graph.
    Abstract,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedEdge {
    pub u: Vertex,
    pub v: Vertex,
    pub placement: EdgePlacement,
}

/// G' = (G + E') − S, the kept-vertex map, and the veto rules for S in decision order.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub matched: ConfigKind,
    /// The kind whose reduction was built; differs from `matched` when a hypothesis fails and a smaller case applies.
    pub kind: ConfigKind,
    pub roles: Vec<(String, Vertex)>,
    pub r: usize,
    pub k: u32,
    pub deleted: Vec<Vertex>,
    pub added: Vec<AddedEdge>,
    pub gprime: Graph,
    pub gprime_embedding: Option<EmbeddedGraph>,
    /// `keep[i]` is the G vertex playing vertex i of G'.
    pub keep: Vec<Vertex>,
    /// G ids; implicit properness included.
    pub rules: Vec<VetoRule>,
    pub budgets: Vec<u32>,
}

impl Reduction {
    /// Every deleted vertex can be rejected at most k − 1 times.
    pub fn within_budget(&self) -> bool {
        self.budgets.iter().all(|&b| b < self.k)
    }

    /// The same reduction with the triggers matching `drop` removed (properness stays).
    pub fn without(&self, g: &Graph, drop: impl Fn(&Trigger) -> bool) -> Reduction {
        let mut out = self.clone();
        for (i, rule) in out.rules.iter_mut().enumerate() {
            rule.triggers.retain(|t| !drop(t));
            let later = &self.deleted[i + 1..];
            *rule = rule.clone().with_properness(g, later);
        }
        out.budgets = out
            .rules
            .iter()
            .map(|rule| rule.budget(g, self.r))
            .collect();
        out
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind {}", self.kind)?;
        if self.kind != self.matched {
            writeln!(f, "matched {}", self.matched)?;
        }
        writeln!(f, "target r={} k={}", self.r, self.k)?;
        let s: Vec<String> = self.deleted.iter().map(|v| v.to_string()).collect();
        writeln!(f, "delete {}", s.join(" "))?;
        for e in &self.added {
            let how = match e.placement {
                EdgePlacement::Present => "present",
                EdgePlacement::BeforeDeletion => "before-deletion",
                EdgePlacement::AfterDeletion => "after-deletion",
                EdgePlacement::Abstract => "abstract",
            };
            writeln!(f, "add {} {} {how}", e.u, e.v)?;
        }
        writeln!(f, "gprime n={} m={}", self.gprime.n(), self.gprime.m())?;
        for (rule, b) in self.rules.iter().zip(&self.budgets) {
            writeln!(f, "rule {rule} | budget {b}")?;
        }
        Ok(())
    }
}

/// Vertex order, added edges and raw triggers before surgery.
struct Plan {
    kind: ConfigKind,
    roles: Vec<(String, Vertex)>,
    deleted: Vec<Vertex>,
    added: Vec<(Vertex, Vertex)>,
    triggers: Vec<Vec<Trigger>>,
}

fn colored(xs: impl IntoIterator<Item = Vertex>) -> Vec<Trigger> {
    xs.into_iter().map(Trigger::Colored).collect()
}

fn dull(xs: impl IntoIterator<Item = Vertex>) -> Vec<Trigger> {
    xs.into_iter().map(Trigger::Dull).collect()
}

fn invalid(kind: ConfigKind, why: impl Into<String>) -> ConfigError {
    ConfigError::InvalidMatch {
        kind,
        why: why.into(),
    }
}

/// Builds the reduction for a match, falling back to the smaller case a failed side hypothesis points to.
pub fn build_reduction(host: Host<'_>, m: &ConfigMatch) -> Result<Reduction, ConfigError> {
    if m.kind.needs_embedding() && host.embedding().is_none() {
        return Err(ConfigError::EmbeddingRequired(m.kind));
    }
    let plan = plan(host, m)?;
    let g = host.graph();
    let (r, k) = m.kind.target();
    let mut rules = Vec::with_capacity(plan.deleted.len());
    for (i, (&v, triggers)) in plan.deleted.iter().zip(plan.triggers).enumerate() {
        let rule = VetoRule {
            vertex: v,
            triggers,
        }
        .with_properness(g, &plan.deleted[i + 1..]);
        rules.push(rule);
    }
    let budgets = rules.iter().map(|rule| rule.budget(g, r)).collect();
    let (gprime, gprime_embedding, keep, added) = surgery(host, &plan.deleted, &plan.added)?;
    Ok(Reduction {
        matched: m.kind,
        kind: plan.kind,
        roles: plan.roles,
        r,
        k,
        deleted: plan.deleted,
        added,
        gprime,
        gprime_embedding,
        keep,
        rules,
        budgets,
    })
}

type Surgery = (Graph, Option<EmbeddedGraph>, Vec<Vertex>, Vec<AddedEdge>);

fn surgery(
    host: Host<'_>,
    deleted: &[Vertex],
    edges: &[(Vertex, Vertex)],
) -> Result<Surgery, ConfigError> {
    let g = host.graph();
    let mut added = Vec::new();
    let mut fresh = Vec::new();
    for &(u, v) in edges {
        if u == v || g.has_edge(u, v) || fresh.contains(&(u.min(v), u.max(v))) {
            if u != v && g.has_edge(u, v) {
                added.push(AddedEdge {
                    u,
                    v,
                    placement: EdgePlacement::Present,
                });
            }
            continue;
        }
        fresh.push((u.min(v), u.max(v)));
    }
    match host.embedding() {
        None => {
            let with = g.add_edges(&fresh).expect("endpoints are vertices");
            let (gprime, remap) = with
                .delete_vertices(deleted)
                .expect("deleted vertices exist");
            added.extend(fresh.iter().map(|&(u, v)| AddedEdge {
                u,
                v,
                placement: EdgePlacement::Abstract,
            }));
            Ok((gprime, None, remap.preimages(), added))
        }
        Some(emb) => {
            let mut rot: RotationSystem = emb.rotation().clone();
            let mut deferred = Vec::new();
            for &(u, v) in &fresh {
                match rot.insert_cofacial(u, v) {
                    Some(next) => {
                        rot = next;
                        added.push(AddedEdge {
                            u,
                            v,
                            placement: EdgePlacement::BeforeDeletion,
                        });
                    }
                    None => deferred.push((u, v)),
                }
            }
            let (mut rot, remap) = rot.delete_vertices(deleted);
            for (u, v) in deferred {
                let (a, b) = (remap.get(u).expect("kept"), remap.get(v).expect("kept"));
                rot = rot
                    .insert_cofacial(a, b)
                    .ok_or(ConfigError::EmbeddingSurgeryFailed(u, v))?;
                added.push(AddedEdge {
                    u,
                    v,
                    placement: EdgePlacement::AfterDeletion,
                });
            }
            let gprime = rot.graph().clone();
            let embedding = if gprime.n() > 0 && gprime.is_connected() {
                let e = EmbeddedGraph::trace(rot)?;
                debug_assert!(e.genus() <= emb.genus(), "surgery never raises the genus");
                Some(e)
            } else {
                None
            };
            Ok((gprime, embedding, remap.preimages(), added))
        }
    }
}

fn plan(host: Host<'_>, m: &ConfigMatch) -> Result<Plan, ConfigError> {
    let g = host.graph();
    let d = |v: Vertex| g.degree(v);
    let kind = m.kind;
    let roles = m.roles.clone();
    let plan =
        |deleted: Vec<Vertex>, added: Vec<(Vertex, Vertex)>, triggers: Vec<Vec<Trigger>>| Plan {
            kind,
            roles: roles.clone(),
            deleted,
            added,
            triggers,
        };
    let delegate = |to: Option<ConfigMatch>, why: &str| match to {
        Some(next) => self::plan(host, &next),
        None => Err(invalid(kind, why)),
    };
    match kind {
        ConfigKind::Deg2Minus => {
            let v = m.need("v")?;
            match d(v) {
                0 => Ok(plan(vec![v], vec![], vec![vec![]])),
                1 => {
                    let u = m.need("u")?;
                    Ok(plan(
                        vec![v],
                        vec![],
                        vec![vec![Trigger::Colored(u), Trigger::Dull(u)]],
                    ))
                }
                2 => {
                    let (y, z) = (m.need("y")?, m.need("z")?);
                    let mut t = colored([y, z]);
                    t.extend(dull([y, z]));
                    Ok(plan(vec![v], vec![(y, z)], vec![t]))
                }
                _ => Err(invalid(kind, "degree above 2")),
            }
        }
        ConfigKind::Adjacent3s => {
            let (v1, v2) = (m.need("v1")?, m.need("v2")?);
            if d(v1) <= 2 || d(v2) <= 2 {
                let low = if d(v1) <= 2 { v1 } else { v2 };
                return delegate(Some(detect::deg2_minus(host, low)), "");
            }
            let (y1, z1, y2, z2) = (m.need("y1")?, m.need("z1")?, m.need("y2")?, m.need("z2")?);
            let mut t1 = colored([y1, y2, z1, z2]);
            t1.extend(dull([y1, z1]));
            let mut t2 = colored([y1, y2, z1, z2]);
            t2.extend(dull([y2, z2]));
            t2.push(Trigger::Colored(v1));
            Ok(plan(vec![v1, v2], vec![(y1, z1), (y2, z2)], vec![t1, t2]))
        }
        ConfigKind::ManyThreeNbrs => {
            let v = m.need("v")?;
            let xs = m.indexed("x");
            if xs.len() < 2 {
                return Err(invalid(kind, "fewer than two 3-neighbors"));
            }
            if d(v) <= 3 {
                return delegate(detect::adjacent_3s(host, v, xs[0]), "");
            }
            for (i, &a) in xs.iter().enumerate() {
                if let Some(&b) = xs[i + 1..].iter().find(|&&b| g.has_edge(a, b)) {
                    return delegate(detect::adjacent_3s(host, a, b), "");
                }
            }
            let ys = m.indexed("y");
            let zs = m.indexed("z");
            let mut deleted = vec![v];
            deleted.extend(&xs);
            let mut watched: Vec<Vertex> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|w| !xs.contains(w))
                .collect();
            watched.extend(ys.iter().chain(&zs));
            watched.sort_unstable();
            watched.dedup();
            let mut triggers = vec![vec![Trigger::AnyColored(watched)]];
            let mut added = Vec::new();
            for i in 0..xs.len() {
                let mut t = colored([v, ys[i], zs[i]]);
                t.extend(dull([ys[i], zs[i]]));
                // The first three 3-neighbors get distinct colors so v sees three.
                if i < 3 {
                    t.extend(colored(xs[..i].iter().copied()));
                }
                triggers.push(t);
                added.push((ys[i], zs[i]));
            }
            Ok(plan(deleted, added, triggers))
        }
        ConfigKind::FourWithThreeNbr => {
            let (v1, v2) = (m.need("v1")?, m.need("v2")?);
            if d(v2) <= 2 {
                return delegate(Some(detect::deg2_minus(host, v2)), "");
            }
            if d(v1) <= 2 {
                return delegate(Some(detect::deg2_minus(host, v1)), "");
            }
            if d(v1) <= 3 {
                return delegate(detect::adjacent_3s(host, v1, v2), "");
            }
            let threes: Vec<Vertex> = g
                .neighbors(v1)
                .iter()
                .copied()
                .filter(|&w| d(w) == 3)
                .collect();
            if threes.len() >= 2 {
                return delegate(detect::many_three_nbrs(host, v1), "");
            }
            let (y1, z1, w1, y2, z2) = (
                m.need("y1")?,
                m.need("z1")?,
                m.need("w1")?,
                m.need("y2")?,
                m.need("z2")?,
            );
            let mut t1 = colored([y1, z1, y2, z2]);
            t1.extend(dull([y1, z1]));
            t1.push(Trigger::Colored(w1));
            let mut t2 = colored([y1, z1, y2, z2]);
            t2.extend(dull([y2, z2]));
            t2.push(Trigger::Colored(v1));
            Ok(plan(vec![v1, v2], vec![(y1, z1), (y2, z2)], vec![t1, t2]))
        }
        ConfigKind::LightTriangle => {
            let (v1, v2, z) = (m.need("v1")?, m.need("v2")?, m.need("z")?);
            if d(v1) <= 3 {
                return delegate(detect::four_with_three(host, v2, v1), "");
            }
            let (y1, y2) = (m.need("y1")?, m.need("y2")?);
            let mut t1 = colored([y1, y2, z]);
            t1.push(Trigger::Dull(y1));
            let mut t2 = colored([y1, y2, z]);
            t2.push(Trigger::Dull(y2));
            t2.push(Trigger::Colored(v1));
            Ok(plan(vec![v1, v2], vec![(y1, z), (y2, z)], vec![t1, t2]))
        }
        ConfigKind::TwinTriangles => {
            let (v, y, z) = (m.need("v")?, m.need("y")?, m.need("z")?);
            let mut t = colored(g.neighbors(v).iter().copied());
            t.extend(dull([y, z]));
            Ok(plan(vec![v], vec![(y, z)], vec![t]))
        }
        ConfigKind::TriangleAnd4Vtx => {
            let (v, x) = (m.need("v")?, m.need("x")?);
            if d(x) <= 2 {
                return delegate(Some(detect::deg2_minus(host, x)), "");
            }
            let (y, z) = (m.need("y")?, m.need("z")?);
            let mut tv = colored(g.neighbors(v).iter().copied());
            tv.extend(colored([y, z]));
            let mut tx = colored(g.neighbors(x).iter().copied());
            tx.extend(dull([v, y, z]));
            Ok(plan(vec![v, x], vec![(y, z)], vec![tv, tx]))
        }
        ConfigKind::ThreeTriangleFan => {
            let (v, x, y, z, u) = (
                m.need("v")?,
                m.need("x")?,
                m.need("y")?,
                m.need("z")?,
                m.need("u")?,
            );
            // A 4⁻ middle vertex sits on two 3-faces sharing its edge to v.
            for (w, a, b) in [(x, z, y), (y, x, u)] {
                if d(w) <= 4 {
                    let twin = ConfigMatch::new(
                        ConfigKind::TwinTriangles,
                        vec![
                            ("v".into(), w),
                            ("u".into(), v),
                            ("y".into(), a),
                            ("z".into(), b),
                        ],
                    );
                    return delegate(Some(twin), "");
                }
            }
            let outside = |w: Vertex| -> Vec<Vertex> {
                g.neighbors(w)
                    .iter()
                    .copied()
                    .filter(|&a| a != v && a != x)
                    .collect()
            };
            let mut t = colored(g.neighbors(v).iter().copied());
            t.push(Trigger::FirstColorIn(outside(y)));
            t.push(Trigger::FirstColorIn(outside(z)));
            Ok(plan(vec![v], vec![(y, z)], vec![t]))
        }
        ConfigKind::Exp4FaceMeets3Face => {
            let quad = [m.need("v")?, m.need("y")?, m.need("u2")?, m.need("u1")?];
            let threes: Vec<usize> = (0..4).filter(|&i| d(quad[i]) == 3).collect();
            if let Some(&i) = threes.iter().find(|&&i| threes.contains(&((i + 1) % 4))) {
                return delegate(detect::adjacent_3s(host, quad[i], quad[(i + 1) % 4]), "");
            }
            for &i in &threes {
                for j in [(i + 1) % 4, (i + 3) % 4] {
                    if d(quad[j]) <= 4 {
                        return delegate(detect::four_with_three(host, quad[j], quad[i]), "");
                    }
                }
            }
            let (v, y, z) = (quad[0], quad[1], m.need("z")?);
            if d(v) != 3 {
                return Err(invalid(kind, "the shared-edge endpoint is not a 3-vertex"));
            }
            let mut t = colored(g.neighbors(v).iter().copied());
            t.extend(dull([y, z]));
            Ok(plan(vec![v], vec![(y, z)], vec![t]))
        }
        ConfigKind::All4sQuadFace => {
            let vs = m.indexed("v");
            if vs.len() != 4 {
                return Err(invalid(kind, "face must have four vertices"));
            }
            for i in 0..4 {
                if d(vs[i]) <= 3 {
                    let next = vs[(i + 1) % 4];
                    return delegate(detect::four_with_three(host, next, vs[i]), "");
                }
            }
            let ys = m.indexed("y");
            let zs = m.indexed("z");
            let (gminus, remap) = g.delete_vertices(&vs).expect("face vertices exist");
            // Off-face neighbors left with degree 2 in G − S need a color distinct from both their neighbors.
            let thin = |w: Vertex| -> Option<Trigger> {
                let nw = remap.get(w)?;
                (gminus.degree(nw) == 2).then(|| {
                    let back = remap.preimages();
                    Trigger::AnyColored(gminus.neighbors(nw).iter().map(|&a| back[a]).collect())
                })
            };
            let mut t1 = colored([ys[0], zs[0]]);
            t1.extend([ys[0], zs[0]].into_iter().filter_map(thin));
            t1.push(Trigger::BothColored(ys[1], zs[1]));
            t1.push(Trigger::BothColored(ys[3], zs[3]));
            let mut t2 = colored([vs[0], ys[1], zs[1]]);
            t2.extend([ys[1], zs[1]].into_iter().filter_map(thin));
            t2.push(Trigger::BothColored(ys[0], zs[0]));
            t2.push(Trigger::BothColored(ys[2], zs[2]));
            let t3 = colored([vs[0], vs[1], ys[1], zs[1], ys[2], zs[2], ys[3], zs[3]]);
            let t4 = colored([
                vs[0], vs[1], vs[2], ys[0], zs[0], ys[2], zs[2], ys[3], zs[3],
            ]);
            Ok(plan(vs, vec![], vec![t1, t2, t3, t4]))
        }
        ConfigKind::KpPendant => {
            let (v, u) = (m.need("v")?, m.need("u")?);
            let rest: Vec<Vertex> = g.neighbors(u).iter().copied().filter(|&w| w != v).collect();
            let mut t = vec![Trigger::Colored(u)];
            if !rest.is_empty() {
                t.push(Trigger::AllColored(rest));
            }
            Ok(plan(vec![v], vec![], vec![t]))
        }
        ConfigKind::KpTwoTwo => {
            let (u, v, u1, v1) = (m.need("u")?, m.need("v")?, m.need("u1")?, m.need("v1")?);
            let tv = vec![
                Trigger::Colored(v1),
                Trigger::NotDynamic {
                    vertex: u,
                    watched: vec![u1],
                },
                Trigger::NotDynamic {
                    vertex: v1,
                    watched: g
                        .neighbors(v1)
                        .iter()
                        .copied()
                        .filter(|&w| w != v)
                        .collect(),
                },
            ];
            let tu = vec![
                Trigger::Colored(v),
                Trigger::Colored(u1),
                Trigger::NotDynamic {
                    vertex: v,
                    watched: vec![v1],
                },
            ];
            Ok(plan(vec![v, u], vec![], vec![tv, tu]))
        }
        ConfigKind::KpThreeWithTwos => {
            let u = m.need("u")?;
            let ws = m.indexed("w");
            let wps: Vec<Vertex> = (1..=ws.len())
                .map(|i| m.need(&format!("w{i}p")))
                .collect::<Result<_, _>>()?;
            if let Some(i) = (0..ws.len()).find(|&i| d(wps[i]) == 2) {
                return delegate(detect::kp_two_two(host, ws[i], wps[i]), "");
            }
            let vp = wps[0];
            let mut deleted = vec![u];
            deleted.extend(&ws);
            let mut triggers = vec![colored(wps.iter().copied())];
            for &wp in &wps {
                triggers.push(colored([u, wp, vp]));
            }
            Ok(plan(deleted, vec![], triggers))
        }
    }
}
