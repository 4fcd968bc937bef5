//! Reduction chains certifying 2-dynamic 4-paintability of sparse graphs.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{mad_with_cap, BoundsError, MAD_CAP};
use crate::configs::{build_reduction, find_configs, ConfigKind, ConfigMatch, Host};
use crate::format::{ParseError, MAX_PARSE_VERTICES};
use crate::graph::{Graph, Vertex};

#[derive(Clone, Debug)]
pub struct KpOptions {
    pub mad_cap: usize,
    /// The caller vouches for planarity; girth ≥ 7 is still checked.
    pub planar_girth7: bool,
}

impl Default for KpOptions {
    fn default() -> Self {
        KpOptions {
            mad_cap: MAD_CAP,
            planar_girth7: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KpHypothesis {
    /// mad as numerator, denominator; below 8/3.
    Mad(u64, u64),
    PlanarGirth7,
}

/// One reduction, in original vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpStep {
    pub kind: ConfigKind,
    pub roles: Vec<(String, Vertex)>,
    pub deleted: Vec<Vertex>,
    /// Transcribed rejection bound per deleted vertex.
    pub budgets: Vec<u32>,
}

/// A component left with maximum degree ≤ 2: a path or a cycle other than C5.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpResidue {
    pub vertices: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpCertificate {
    pub n: usize,
    pub hypothesis: KpHypothesis,
    pub steps: Vec<KpStep>,
    pub residues: Vec<KpResidue>,
}

impl KpCertificate {
    /// Every deleted vertex stays below 4 rejections by the transcribed counts.
    pub fn within_budget(&self) -> bool {
        self.steps.iter().flat_map(|s| &s.budgets).all(|&b| b <= 3)
    }
}

impl fmt::Display for KpCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kp-certificate n {}", self.n)?;
        match self.hypothesis {
            KpHypothesis::Mad(a, b) => writeln!(f, "hypothesis mad {a}/{b}")?,
            KpHypothesis::PlanarGirth7 => writeln!(f, "hypothesis planar-girth7")?,
        }
        let join = |xs: &[Vertex]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for s in &self.steps {
            let roles: Vec<String> = s.roles.iter().map(|(n, v)| format!("{n}={v}")).collect();
            let budgets: Vec<String> = s.budgets.iter().map(|b| b.to_string()).collect();
            writeln!(
                f,
                "step {} {} | delete {} | budgets {}",
                s.kind,
                roles.join(" "),
                join(&s.deleted),
                budgets.join(" ")
            )?;
        }
        for r in &self.residues {
            writeln!(f, "residue {}", join(&r.vertices))?;
        }
        Ok(())
    }
}

pub fn parse_kp_certificate(text: &str) -> Result<KpCertificate, ParseError> {
    let mut n: Option<usize> = None;
    let mut hypothesis = None;
    let mut steps = Vec::new();
    let mut residues = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| ParseError::new(at, format!("bad number {s:?}")))
        };
        let vtx = |s: &str| -> Result<Vertex, ParseError> {
            let x = num(s)? as usize;
            match n {
                Some(n) if x < n => Ok(x),
                _ => Err(ParseError::new(at, format!("vertex {x} out of range"))),
            }
        };
        let vtxs = |s: &str| s.split_whitespace().map(vtx).collect::<Result<Vec<_>, _>>();
        let toks: Vec<&str> = content.split_whitespace().collect();
        match (n, &hypothesis, toks.as_slice()) {
            (None, _, ["kp-certificate", "n", count]) => {
                let count = num(count)? as usize;
                if count > MAX_PARSE_VERTICES {
                    return Err(ParseError::new(at, "vertex count exceeds the limit"));
                }
                n = Some(count);
            }
            (None, _, _) => return Err(ParseError::new(at, "expected `kp-certificate n <n>`")),
            (Some(_), None, ["hypothesis", "planar-girth7"]) => {
                hypothesis = Some(KpHypothesis::PlanarGirth7)
            }
            (Some(_), None, ["hypothesis", "mad", frac]) => {
                let (a, b) = frac
                    .split_once('/')
                    .ok_or_else(|| ParseError::new(at, "mad must be a/b"))?;
                let (a, b) = (num(a)?, num(b)?);
                if b == 0 {
                    return Err(ParseError::new(at, "zero denominator"));
                }
                hypothesis = Some(KpHypothesis::Mad(a, b));
            }
            (Some(_), None, _) => return Err(ParseError::new(at, "expected a hypothesis line")),
            (Some(_), Some(_), ["residue", ..]) => {
                residues.push(KpResidue {
                    vertices: vtxs(&content["residue".len()..])?,
                });
            }
            (Some(_), Some(_), ["step", kind, ..]) => {
                if !residues.is_empty() {
                    return Err(ParseError::new(at, "steps must precede residues"));
                }
                let kind: ConfigKind = kind
                    .parse()
                    .map_err(|_| ParseError::new(at, format!("unknown kind {kind:?}")))?;
                let body = content["step".len()..].trim_start()[kind.name().len()..].to_string();
                let parts: Vec<&str> = body.split('|').collect();
                let [roles, deleted, budgets] = parts.as_slice() else {
                    return Err(ParseError::new(
                        at,
                        "expected `step <kind> <roles> | delete .. | budgets ..`",
                    ));
                };
                let roles = roles
                    .split_whitespace()
                    .map(|r| {
                        let (name, v) = r
                            .split_once('=')
                            .ok_or_else(|| ParseError::new(at, "roles are name=vertex"))?;
                        Ok((name.to_string(), vtx(v)?))
                    })
                    .collect::<Result<Vec<_>, ParseError>>()?;
                let deleted = deleted
                    .trim()
                    .strip_prefix("delete")
                    .ok_or_else(|| ParseError::new(at, "missing delete list"))
                    .and_then(vtxs)?;
                let budgets = budgets
                    .trim()
                    .strip_prefix("budgets")
                    .ok_or_else(|| ParseError::new(at, "missing budgets"))?
                    .split_whitespace()
                    .map(|b| num(b).map(|b| b as u32))
                    .collect::<Result<Vec<_>, _>>()?;
                steps.push(KpStep {
                    kind,
                    roles,
                    deleted,
                    budgets,
                });
            }
            _ => return Err(ParseError::new(at, "expected `step` or `residue`")),
        }
    }
    let n = n.ok_or_else(|| ParseError::new(0, "missing header"))?;
    let hypothesis =
        hypothesis.ok_or_else(|| ParseError::new(offset, "missing hypothesis line"))?;
    Ok(KpCertificate {
        n,
        hypothesis,
        steps,
        residues,
    })
}

fn is_c5(g: &Graph) -> bool {
    g.n() == 5 && g.m() == 5 && g.is_connected() && g.vertices().all(|v| g.degree(v) == 2)
}

fn check_hypothesis(g: &Graph, opts: &KpOptions) -> Result<KpHypothesis, BoundsError> {
    if !g.is_connected() {
        return Err(BoundsError::Disconnected);
    }
    if is_c5(g) {
        return Err(BoundsError::IsC5);
    }
    if opts.planar_girth7 {
        return match g.girth() {
            Some(k) if k < 7 => Err(BoundsError::GirthAssertion(Some(k))),
            _ => Ok(KpHypothesis::PlanarGirth7),
        };
    }
    let mad = mad_with_cap(g, opts.mad_cap)?;
    if mad >= Ratio::new(8, 3) {
        return Err(BoundsError::HypothesisFail { mad });
    }
    Ok(KpHypothesis::Mad(*mad.numer(), *mad.denom()))
}

/// The current graph and the original id of each of its vertices.
struct Remainder {
    h: Graph,
    ids: Vec<Vertex>,
}

impl Remainder {
    fn local(&self, v: Vertex) -> Option<Vertex> {
        self.ids.iter().position(|&x| x == v)
    }

    fn delete(&self, gone: &[Vertex]) -> Remainder {
        let (h, remap) = self.h.delete_vertices(gone).expect("local ids");
        let ids = remap.preimages().into_iter().map(|v| self.ids[v]).collect();
        Remainder { h, ids }
    }

    /// Components with a 3⁺-vertex, as a membership mask.
    fn busy(&self) -> Vec<bool> {
        let mut mask = vec![false; self.h.n()];
        for comp in self.h.components() {
            if comp.iter().any(|&v| self.h.degree(v) >= 3) {
                comp.iter().for_each(|&v| mask[v] = true);
            }
        }
        mask
    }

    fn residues(&self) -> Result<Vec<KpResidue>, BoundsError> {
        let mut out = Vec::new();
        for comp in self.h.components() {
            let orig: Vec<Vertex> = comp.iter().map(|&v| self.ids[v]).collect();
            let (c, _) = self.h.induced(&comp).expect("local ids");
            if is_c5(&c) {
                return Err(BoundsError::C5Residue(orig));
            }
            out.push(KpResidue { vertices: orig });
        }
        Ok(out)
    }

    fn creates_c5(&self, gone: &[Vertex]) -> bool {
        let next = self.delete(gone);
        next.h
            .components()
            .into_iter()
            .any(|comp| is_c5(&next.h.induced(&comp).expect("local ids").0))
    }
}

/// Peels 1-vertices and 2-vertices next to 3⁻-vertices until every component has maximum degree ≤ 2.
/// Steps that would strand a C5 component are skipped in favor of another match.
pub fn kp_pipeline(g: &Graph, opts: &KpOptions) -> Result<KpCertificate, BoundsError> {
    let hypothesis = check_hypothesis(g, opts)?;
    let mut rest = Remainder {
        h: g.clone(),
        ids: g.vertices().collect(),
    };
    let mut steps = Vec::new();
    loop {
        let busy = rest.busy();
        if !busy.iter().any(|&b| b) {
            break;
        }
        let host = Host::Bare(&rest.h);
        let matches = find_configs(host, &ConfigKind::KP).expect("KP kinds need no embedding");
        let mut stranded = None;
        let mut chosen = None;
        for m in matches.iter().filter(|m| busy[m.roles[0].1]) {
            let red = build_reduction(host, m).map_err(|e| BoundsError::BadTrace {
                step: steps.len(),
                why: e.to_string(),
            })?;
            if rest.creates_c5(&red.deleted) {
                stranded.get_or_insert(red.deleted.clone());
                continue;
            }
            chosen = Some(red);
            break;
        }
        let Some(red) = chosen else {
            return Err(match stranded {
                Some(gone) => BoundsError::C5Residue(gone.iter().map(|&v| rest.ids[v]).collect()),
                None => BoundsError::NoConfiguration(rest.ids.clone()),
            });
        };
        let orig = |v: Vertex| rest.ids[v];
        steps.push(KpStep {
            kind: red.kind,
            roles: red
                .roles
                .iter()
                .map(|(n, v)| (n.clone(), orig(*v)))
                .collect(),
            deleted: red.deleted.iter().map(|&v| orig(v)).collect(),
            budgets: red.budgets.clone(),
        });
        rest = rest.delete(&red.deleted);
    }
    let residues = rest.residues()?;
    Ok(KpCertificate {
        n: g.n(),
        hypothesis,
        steps,
        residues,
    })
}

fn bad(step: usize, why: impl Into<String>) -> BoundsError {
    BoundsError::BadTrace {
        step,
        why: why.into(),
    }
}

/// Re-derives every step from degrees in the shrinking graph, independently of the detector,
/// then recomputes the budgets and the residue components.
/// `opts.mad_cap` bounds the mad recomputation; the hypothesis kind comes from the certificate.
pub fn replay_kp_certificate(
    g: &Graph,
    cert: &KpCertificate,
    opts: &KpOptions,
) -> Result<(), BoundsError> {
    if cert.n != g.n() {
        return Err(bad(
            0,
            format!(
                "certificate is for {} vertices, graph has {}",
                cert.n,
                g.n()
            ),
        ));
    }
    let opts = KpOptions {
        planar_girth7: cert.hypothesis == KpHypothesis::PlanarGirth7,
        ..opts.clone()
    };
    let hypothesis = check_hypothesis(g, &opts)?;
    if hypothesis != cert.hypothesis {
        return Err(bad(
            0,
            format!(
                "hypothesis is {hypothesis:?}, certificate says {:?}",
                cert.hypothesis
            ),
        ));
    }
    let mut rest = Remainder {
        h: g.clone(),
        ids: g.vertices().collect(),
    };
    for (i, step) in cert.steps.iter().enumerate() {
        let h = &rest.h;
        let mut local = Vec::new();
        for (name, v) in &step.roles {
            let x = rest
                .local(*v)
                .ok_or_else(|| bad(i, format!("vertex {v} already deleted")))?;
            local.push((name.clone(), x));
        }
        let role = |name: &str| {
            local
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, v)| v)
                .ok_or_else(|| bad(i, format!("missing role {name}")))
        };
        let other = |w: Vertex, x: Vertex| h.neighbors(w).iter().copied().find(|&y| y != x);
        let d = |v: Vertex| h.degree(v);
        let expect: Vec<Vertex> = match step.kind {
            ConfigKind::KpPendant => {
                let (v, u) = (role("v")?, role("u")?);
                if d(v) != 1 || !h.has_edge(u, v) || d(u) < 2 {
                    return Err(bad(i, "not a 1-vertex on a 2⁺-vertex"));
                }
                vec![v]
            }
            ConfigKind::KpTwoTwo => {
                let (u, v, u1, v1) = (role("u")?, role("v")?, role("u1")?, role("v1")?);
                let ok = h.has_edge(u, v)
                    && d(u) == 2
                    && d(v) == 2
                    && other(u, v) == Some(u1)
                    && other(v, u) == Some(v1);
                if !ok || d(u1) < 3 {
                    return Err(bad(i, "not two adjacent 2-vertices beside a 3⁺-vertex"));
                }
                vec![v, u]
            }
            ConfigKind::KpThreeWithTwos => {
                let u = role("u")?;
                let twos: Vec<Vertex> = h
                    .neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&w| d(w) == 2)
                    .collect();
                let named: Vec<Vertex> = (1..).map_while(|j| role(&format!("w{j}")).ok()).collect();
                let mut sorted_named = named.clone();
                sorted_named.sort_unstable();
                if d(u) != 3 || twos.is_empty() || sorted_named != twos {
                    return Err(bad(i, "not a 3-vertex listed with all its 2-neighbors"));
                }
                if twos.iter().any(|&w| other(w, u).is_some_and(|x| d(x) < 3)) {
                    return Err(bad(i, "a 2-neighbor continues into a 2⁻-vertex"));
                }
                std::iter::once(u).chain(named).collect()
            }
            kind => {
                return Err(bad(
                    i,
                    format!("{kind} is not a sparse-graph configuration"),
                ))
            }
        };
        let mut want = expect.clone();
        let mut got: Vec<Vertex> = step
            .deleted
            .iter()
            .map(|&v| rest.local(v).unwrap_or(usize::MAX))
            .collect();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return Err(bad(i, "deleted set does not match the configuration"));
        }
        let m = ConfigMatch {
            kind: step.kind,
            roles: local.clone(),
            faces: Vec::new(),
        };
        let red = build_reduction(Host::Bare(h), &m).map_err(|e| bad(i, e.to_string()))?;
        if red.budgets != step.budgets {
            return Err(bad(
                i,
                format!(
                    "budgets are {:?}, certificate says {:?}",
                    red.budgets, step.budgets
                ),
            ));
        }
        rest = rest.delete(&expect);
    }
    if rest.h.vertices().any(|v| rest.h.degree(v) >= 3) {
        return Err(bad(cert.steps.len(), "a 3⁺-vertex survives the chain"));
    }
    let residues = rest.residues()?;
    let key = |rs: &[KpResidue]| {
        let mut xs: Vec<Vec<Vertex>> = rs
            .iter()
            .map(|r| {
                let mut v = r.vertices.clone();
                v.sort_unstable();
                v
            })
            .collect();
        xs.sort();
        xs
    };
    if key(&residues) != key(&cert.residues) {
        return Err(bad(cert.steps.len(), "residue components differ"));
    }
    Ok(())
}
