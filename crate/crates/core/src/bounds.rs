//! Genus-indexed bounds, the contraction colorer with its replayable trace, and maximum average degree.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Roots;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{required_colors, verify_r_dynamic, Color, PartialColoring};
use crate::format::ParseError;
use crate::graph::{Graph, Vertex};

mod kp;

pub use kp::{
    kp_pipeline, parse_kp_certificate, replay_kp_certificate, KpCertificate, KpHypothesis,
    KpOptions, KpResidue, KpStep,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("no edge of weight at most {omega}; the declared genus is too small for this graph")]
    NoLightEdge { omega: u64 },
    #[error("r = {r} is below the threshold {threshold} for genus {genus}")]
    Applicability { r: u64, genus: u64, threshold: u64 },
    #[error("graph has {n} vertices; exhaustive mad is capped at {cap}")]
    TooLargeForExhaustive { n: usize, cap: usize },
    #[error("step {step}: {why}")]
    ForbiddenOverflow { step: usize, why: String },
    #[error("the output failed verification: {0}")]
    Unverified(String),
    #[error("trace step {step} does not apply: {why}")]
    BadTrace { step: usize, why: String },
    #[error("mad is {mad}, not below 8/3, and no girth assertion was made")]
    HypothesisFail { mad: Ratio<u64> },
    #[error("the graph is C5, whose 2-dynamic choice number is 5")]
    IsC5,
    #[error("graph must be connected")]
    Disconnected,
    #[error("girth assertion is false: girth {0:?}")]
    GirthAssertion(Option<usize>),
    #[error("a component with maximum degree at most 2 is C5: {0:?}")]
    C5Residue(Vec<Vertex>),
    #[error("no sparse-graph configuration in a component with a 3+-vertex: {0:?}")]
    NoConfiguration(Vec<Vertex>),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Light-edge weight bound for genus g.
pub fn omega(g: u64) -> u64 {
    if g <= 2 {
        2 * g + 13
    } else {
        4 * g + 7
    }
}

/// Paint-number bound of the contraction argument for genus g.
pub fn ell(g: u64, r: u64) -> u64 {
    if g <= 2 {
        (g + 5) * (r + 1) + 3
    } else {
        (2 * g + 2) * (r + 1) + 3
    }
}

/// Least r the contraction argument covers at genus g.
pub fn r_threshold(g: u64) -> u64 {
    if g <= 2 {
        2 * g + 11
    } else {
        4 * g + 5
    }
}

/// floor((7 + sqrt(1 + 48g)) / 2), exact: flooring the root first does not change the outer floor.
pub fn heawood(g: u64) -> u64 {
    (7 + (1 + 48 * g).sqrt()) / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub genus: u64,
    pub r: u64,
    pub omega: u64,
    pub ell: u64,
    pub heawood: u64,
    pub threshold: u64,
    pub applicable: bool,
}

pub fn bound_profile(genus: u64, r: u64) -> BoundProfile {
    BoundProfile {
        genus,
        r,
        omega: omega(genus),
        ell: ell(genus, r),
        heawood: heawood(genus),
        threshold: r_threshold(genus),
        applicable: r >= r_threshold(genus),
    }
}

impl fmt::Display for BoundProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "genus {}", self.genus)?;
        writeln!(f, "r {}", self.r)?;
        writeln!(f, "omega {}", self.omega)?;
        writeln!(f, "ell {}", self.ell)?;
        writeln!(f, "heawood {}", self.heawood)?;
        writeln!(f, "threshold {}", self.threshold)?;
        writeln!(f, "applicable {}", self.applicable)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LightEdge {
    pub edge: Option<(Vertex, Vertex)>,
    pub weight: Option<usize>,
    /// No light edge although every degree is at least 3: the declared genus is wrong.
    pub ivanco_violation: bool,
}

/// A minimum-weight edge (ties to the lexicographically least) when its weight is at most ω.
pub fn find_light_edge(g: &Graph, omega: u64) -> LightEdge {
    let best = g
        .edges()
        .map(|(u, v)| (g.degree(u) + g.degree(v), u, v))
        .min();
    match best {
        Some((w, u, v)) if w as u64 <= omega => LightEdge {
            edge: Some((u, v)),
            weight: Some(w),
            ivanco_violation: false,
        },
        _ => LightEdge {
            edge: None,
            weight: None,
            ivanco_violation: g.m() > 0 && g.min_degree() >= 3,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractionStep {
    /// A vertex of degree ≤ 2 removed; with two nonadjacent neighbors they are joined.
    Deleted2MinusVertex { v: Vertex, neighbors: Vec<Vertex> },
    /// `u` absorbed into `v` along an edge of the given weight.
    ContractedLightEdge { u: Vertex, v: Vertex, weight: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionTrace {
    pub n: usize,
    pub r: u64,
    pub genus: u64,
    pub steps: Vec<ContractionStep>,
    /// Survivors colored 1, 2, ... in this order.
    pub base: Vec<Vertex>,
}

impl fmt::Display for ContractionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "contraction-trace n {} r {} genus {}",
            self.n, self.r, self.genus
        )?;
        for s in &self.steps {
            match s {
                ContractionStep::Deleted2MinusVertex { v, neighbors } => {
                    let ns: Vec<String> = neighbors.iter().map(|x| x.to_string()).collect();
                    writeln!(f, "delete {v} {}", ns.join(" ").trim_end())?
                }
                ContractionStep::ContractedLightEdge { u, v, weight } => {
                    writeln!(f, "contract {u} {v} {weight}")?
                }
            }
        }
        let base: Vec<String> = self.base.iter().map(|x| x.to_string()).collect();
        writeln!(f, "base {}", base.join(" "))
    }
}

pub fn parse_contraction_trace(text: &str) -> Result<ContractionTrace, ParseError> {
    let mut header: Option<(usize, u64, u64)> = None;
    let mut steps = Vec::new();
    let mut base: Option<Vec<Vertex>> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| ParseError::new(at, format!("bad number {s:?}")))
        };
        let vtx = |s: &str| -> Result<Vertex, ParseError> {
            let x = num(s)? as usize;
            if x >= crate::format::MAX_PARSE_VERTICES {
                return Err(ParseError::new(at, "vertex id out of range"));
            }
            Ok(x)
        };
        if base.is_some() {
            return Err(ParseError::new(at, "nothing may follow the base line"));
        }
        match (header.is_some(), toks.as_slice()) {
            (false, ["contraction-trace", "n", n, "r", r, "genus", g]) => {
                let n = num(n)? as usize;
                if n > crate::format::MAX_PARSE_VERTICES {
                    return Err(ParseError::new(at, "vertex count exceeds the limit"));
                }
                header = Some((n, num(r)?, num(g)?));
            }
            (false, _) => {
                return Err(ParseError::new(
                    at,
                    "expected `contraction-trace n <n> r <r> genus <g>`",
                ))
            }
            (true, ["delete", v, rest @ ..]) if rest.len() <= 2 => {
                steps.push(ContractionStep::Deleted2MinusVertex {
                    v: vtx(v)?,
                    neighbors: rest.iter().map(|s| vtx(s)).collect::<Result<_, _>>()?,
                })
            }
            (true, ["contract", u, v, w]) => steps.push(ContractionStep::ContractedLightEdge {
                u: vtx(u)?,
                v: vtx(v)?,
                weight: num(w)? as usize,
            }),
            (true, ["base", rest @ ..]) => {
                base = Some(rest.iter().map(|s| vtx(s)).collect::<Result<_, _>>()?)
            }
            (true, _) => {
                return Err(ParseError::new(
                    at,
                    "expected `delete`, `contract`, or `base`",
                ))
            }
        }
    }
    let (n, r, genus) = header.ok_or_else(|| ParseError::new(0, "missing header"))?;
    let base = base.ok_or_else(|| ParseError::new(offset, "missing base line"))?;
    Ok(ContractionTrace {
        n,
        r,
        genus,
        steps,
        base,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub coloring: PartialColoring,
    pub trace: ContractionTrace,
    pub colors_used: usize,
    pub ell: u64,
    /// Forbidden-set size at each re-insertion, in re-insertion order.
    pub forbidden: Vec<usize>,
}

/// Working graph over the original ids.
#[derive(Clone)]
struct Shrinking {
    adj: Vec<BTreeSet<Vertex>>,
    alive: Vec<bool>,
}

impl Shrinking {
    fn new(g: &Graph) -> Self {
        Shrinking {
            adj: g
                .vertices()
                .map(|v| g.neighbors(v).iter().copied().collect())
                .collect(),
            alive: vec![true; g.n()],
        }
    }

    fn count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    fn deg(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    fn remove(&mut self, v: Vertex) {
        for w in std::mem::take(&mut self.adj[v]) {
            self.adj[w].remove(&v);
        }
        self.alive[v] = false;
    }

    fn join(&mut self, a: Vertex, b: Vertex) {
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    fn apply(&mut self, step: &ContractionStep) {
        match step {
            ContractionStep::Deleted2MinusVertex { v, neighbors } => {
                self.remove(*v);
                if let [y, z] = neighbors.as_slice() {
                    self.join(*y, *z);
                }
            }
            ContractionStep::ContractedLightEdge { u, v, .. } => {
                let nu: Vec<Vertex> = self.adj[*u].iter().copied().filter(|&w| w != *v).collect();
                self.remove(*u);
                for w in nu {
                    self.join(*v, w);
                }
            }
        }
    }
}

/// Forward phase: peel 2⁻-vertices (least id first) or contract a least-weight edge into its heavier end.
fn build_trace(g: &Graph, r: u64, genus: u64) -> Result<ContractionTrace, BoundsError> {
    let om = omega(genus);
    let mut h = Shrinking::new(g);
    let mut steps = Vec::new();
    while h.count() > 4 {
        let low = (0..g.n()).find(|&v| h.alive[v] && h.deg(v) <= 2);
        let step = if let Some(v) = low {
            ContractionStep::Deleted2MinusVertex {
                v,
                neighbors: h.adj[v].iter().copied().collect(),
            }
        } else {
            let (weight, a, b) = (0..g.n())
                .filter(|&a| h.alive[a])
                .flat_map(|a| {
                    h.adj[a]
                        .iter()
                        .filter(move |&&b| b > a)
                        .map(move |&b| (a, b))
                })
                .map(|(a, b)| (h.deg(a) + h.deg(b), a, b))
                .min()
                .expect("a graph with minimum degree 3 has edges");
            if weight as u64 > om {
                return Err(BoundsError::NoLightEdge { omega: om });
            }
            // heavier endpoint absorbs; ties to the lower id
            let (u, v) = if h.deg(a) > h.deg(b) || (h.deg(a) == h.deg(b) && a < b) {
                (b, a)
            } else {
                (a, b)
            };
            ContractionStep::ContractedLightEdge { u, v, weight }
        };
        h.apply(&step);
        steps.push(step);
    }
    let base = (0..g.n()).filter(|&v| h.alive[v]).collect();
    Ok(ContractionTrace {
        n: g.n(),
        r,
        genus,
        steps,
        base,
    })
}

/// Rebuilds the graphs along the trace, checking each step, then colors in reverse.
pub fn replay_contraction(
    g: &Graph,
    trace: &ContractionTrace,
) -> Result<ContractionReport, BoundsError> {
    let bad = |step: usize, why: String| BoundsError::BadTrace { step, why };
    if trace.n != g.n() {
        return Err(bad(
            0,
            format!("trace is for {} vertices, graph has {}", trace.n, g.n()),
        ));
    }
    let (r, genus) = (trace.r, trace.genus);
    let threshold = r_threshold(genus);
    if r < threshold {
        return Err(BoundsError::Applicability {
            r,
            genus,
            threshold,
        });
    }
    let om = omega(genus);
    let palette = ell(genus, r);
    let mut stages = vec![Shrinking::new(g)];
    for (i, step) in trace.steps.iter().enumerate() {
        let h = stages.last().expect("nonempty");
        match step {
            ContractionStep::Deleted2MinusVertex { v, neighbors } => {
                if *v >= g.n() || !h.alive[*v] {
                    return Err(bad(i, format!("vertex {v} is not present")));
                }
                let actual: Vec<Vertex> = h.adj[*v].iter().copied().collect();
                if actual.len() > 2 || &actual != neighbors {
                    return Err(bad(i, format!("vertex {v} has neighbors {actual:?}")));
                }
            }
            ContractionStep::ContractedLightEdge { u, v, weight } => {
                if *u >= g.n() || *v >= g.n() || !h.adj[*u].contains(v) {
                    return Err(bad(i, format!("{u}{v} is not an edge")));
                }
                let w = h.deg(*u) + h.deg(*v);
                if w != *weight || w as u64 > om {
                    return Err(bad(
                        i,
                        format!("edge weight {w} (recorded {weight}, bound {om})"),
                    ));
                }
            }
        }
        let mut next = h.clone();
        next.apply(step);
        stages.push(next);
    }
    let last = stages.last().expect("nonempty");
    let survivors: Vec<Vertex> = (0..g.n()).filter(|&v| last.alive[v]).collect();
    let mut sorted_base = trace.base.clone();
    sorted_base.sort_unstable();
    if sorted_base != survivors {
        return Err(bad(
            trace.steps.len(),
            "base does not list the surviving vertices".into(),
        ));
    }
    let mut color: Vec<Option<Color>> = vec![None; g.n()];
    for (i, &v) in trace.base.iter().enumerate() {
        color[v] = Some(i as Color + 1);
    }
    let mut forbidden_sizes = Vec::new();
    for (i, step) in trace.steps.iter().enumerate().rev() {
        let h = &stages[i];
        let (x, anchor) = match step {
            ContractionStep::Deleted2MinusVertex { v, .. } => (*v, None),
            ContractionStep::ContractedLightEdge { u, v, .. } => (*u, Some(*v)),
        };
        let mut forbidden: BTreeSet<Color> = BTreeSet::new();
        let on = |w: Vertex, color: &[Option<Color>]| -> BTreeSet<Color> {
            h.adj[w]
                .iter()
                .filter(|&&y| y != x)
                .filter_map(|&y| color[y])
                .collect()
        };
        forbidden.extend(h.adj[x].iter().filter_map(|&y| color[y]));
        if let Some(v) = anchor {
            forbidden.extend(on(v, &color));
        }
        for &w in &h.adj[x] {
            let seen = on(w, &color);
            if seen.len() < (r as usize).min(h.deg(w)) {
                forbidden.extend(seen);
            }
        }
        if forbidden.len() as u64 > palette - 1 {
            return Err(BoundsError::ForbiddenOverflow {
                step: i,
                why: format!(
                    "{} forbidden colors exceed {}",
                    forbidden.len(),
                    palette - 1
                ),
            });
        }
        forbidden_sizes.push(forbidden.len());
        let pick = (1..)
            .find(|c| !forbidden.contains(c))
            .expect("palette has room");
        color[x] = Some(pick);
    }
    let coloring = PartialColoring::from_colors(
        color
            .into_iter()
            .map(|c| c.expect("every vertex restored"))
            .collect(),
    );
    let report = verify_r_dynamic(g, &coloring, r as usize)
        .map_err(|e| BoundsError::Unverified(e.to_string()))?;
    if !report.verdict() {
        return Err(BoundsError::Unverified(format!(
            "violating vertices {:?}",
            report.violating
        )));
    }
    let colors_used = coloring.distinct_colors();
    Ok(ContractionReport {
        coloring,
        trace: trace.clone(),
        colors_used,
        ell: palette,
        forbidden: forbidden_sizes,
    })
}

/// An r-dynamic coloring with at most ℓ(g, r) colors for a graph of declared genus g.
pub fn color_by_contraction(
    g: &Graph,
    r: u64,
    declared_genus: u64,
) -> Result<ContractionReport, BoundsError> {
    let threshold = r_threshold(declared_genus);
    if r < threshold {
        return Err(BoundsError::Applicability {
            r,
            genus: declared_genus,
            threshold,
        });
    }
    let trace = build_trace(g, r, declared_genus)?;
    replay_contraction(g, &trace)
}

/// Default vertex cap for exhaustive mad.
pub const MAD_CAP: usize = 20;

pub fn mad(g: &Graph) -> Result<Ratio<u64>, BoundsError> {
    mad_with_cap(g, MAD_CAP)
}

/// Maximum of 2e(H)/|H| over induced subgraphs: closed form on forests, otherwise all subsets in Gray-code order.
pub fn mad_with_cap(g: &Graph, cap: usize) -> Result<Ratio<u64>, BoundsError> {
    let n = g.n();
    let comps = g.components();
    if g.m() + comps.len() == n {
        // A forest: every subgraph is a forest, so the largest tree is densest.
        let c = comps.iter().map(Vec::len).max().unwrap_or(1) as u64;
        return Ok(Ratio::new(2 * (c - 1), c));
    }
    if n > cap || n > 40 {
        return Err(BoundsError::TooLargeForExhaustive {
            n,
            cap: cap.min(40),
        });
    }
    let adj = g.adjacency_masks();
    let (mut set, mut size, mut edges) = (0u64, 0u64, 0u64);
    let (mut best_e, mut best_s) = (0u64, 1u64);
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let inner = (adj[v] & set).count_ones() as u64;
        if set >> v & 1 == 1 {
            set &= !(1 << v);
            size -= 1;
            edges -= inner;
        } else {
            set |= 1 << v;
            size += 1;
            edges += inner;
        }
        if edges * best_s > best_e * size {
            best_e = edges;
            best_s = size;
        }
    }
    Ok(Ratio::new(2 * best_e, best_s))
}

/// Number of distinct colors on N(v) other than on `skip`.
pub fn colors_seen(g: &Graph, c: &PartialColoring, v: Vertex, skip: Option<Vertex>) -> usize {
    g.neighbors(v)
        .iter()
        .filter(|&&w| Some(w) != skip)
        .filter_map(|&w| c.get(w))
        .collect::<BTreeSet<_>>()
        .len()
}

/// r-dull: fewer than min{r, d(w)} − 1 colors on N(w).
pub fn is_r_dull(g: &Graph, c: &PartialColoring, w: Vertex, r: usize) -> bool {
    colors_seen(g, c, w, None) + 1 < required_colors(g, w, r)
}
