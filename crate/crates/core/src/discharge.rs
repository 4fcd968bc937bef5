//! Face-charging discharging on embedded graphs: exact charges, the nine vertex-to-face rules,
//! a per-element ledger with a conservation check, and the configuration-or-contradiction driver.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::configs::{first_config, ConfigError, ConfigKind, ConfigMatch, Host};
use crate::embedding::EmbeddedGraph;
use crate::graph::{Graph, Vertex};

/// An exact charge in quarter units. Every rule amount is a multiple of 1/4.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Charge(pub i64);

impl Charge {
    pub const ZERO: Charge = Charge(0);

    pub fn whole(x: i64) -> Charge {
        Charge(4 * x)
    }

    pub fn quarters(self) -> i64 {
        self.0
    }

    pub fn sign(self) -> Sign {
        match self.0.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }
}

impl std::ops::Add for Charge {
    type Output = Charge;
    fn add(self, o: Charge) -> Charge {
        Charge(self.0 + o.0)
    }
}

impl std::ops::Sub for Charge {
    type Output = Charge;
    fn sub(self, o: Charge) -> Charge {
        Charge(self.0 - o.0)
    }
}

impl std::ops::Mul<i64> for Charge {
    type Output = Charge;
    fn mul(self, k: i64) -> Charge {
        Charge(self.0 * k)
    }
}

impl std::iter::Sum for Charge {
    fn sum<I: Iterator<Item = Charge>>(it: I) -> Charge {
        Charge(it.map(|c| c.0).sum())
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = num_integer::gcd(self.0, 4);
        if g == 4 {
            write!(f, "{}", self.0 / 4)
        } else {
            write!(f, "{}/{}", self.0 / g, 4 / g)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a quarter-unit charge: {0:?}")]
pub struct ChargeParseError(String);

impl FromStr for Charge {
    type Err = ChargeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ChargeParseError(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (
                a.trim().parse::<i64>().map_err(|_| bad())?,
                b.trim().parse::<i64>().map_err(|_| bad())?,
            ),
            None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
        };
        if den <= 0 || 4 % den != 0 {
            return Err(bad());
        }
        num.checked_mul(4 / den).map(Charge).ok_or_else(bad)
    }
}

impl Serialize for Charge {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Charge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "negative",
            Sign::Zero => "zero",
            Sign::Positive => "positive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Vertex(Vertex),
    Face(usize),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Vertex(v) => write!(f, "v{v}"),
            Element::Face(x) => write!(f, "f{x}"),
        }
    }
}

/// Low vertices (degree at most 3) never give charge; the rules call them 3-vertices.
fn is_low(d: usize) -> bool {
    d <= 3
}

/// Boundary census of a face, one entry per incidence in walk order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceClass {
    pub len: usize,
    pub degrees: Vec<usize>,
    pub low: usize,
    pub fours: usize,
    pub expensive: bool,
    pub costly: bool,
}

impl FaceClass {
    pub fn of(emb: &EmbeddedGraph, face: usize) -> FaceClass {
        let g = emb.graph();
        let degrees: Vec<usize> = emb.face(face).vertices().map(|v| g.degree(v)).collect();
        FaceClass::from_degrees(degrees)
    }

    pub fn from_degrees(degrees: Vec<usize>) -> FaceClass {
        let len = degrees.len();
        let low = degrees.iter().filter(|&&d| is_low(d)).count();
        let fours = degrees.iter().filter(|&&d| d == 4).count();
        let expensive = (len == 3 && low >= 1) || (len == 4 && low >= 2);
        let costly = len == 3 && fours >= 1;
        FaceClass {
            len,
            degrees,
            low,
            fours,
            expensive,
            costly,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
}

type Claim = fn(&FaceClass) -> bool;
/// Quarters taken from the incidence at position i.
type Take = fn(&FaceClass, usize) -> i64;

fn neighbors_low(c: &FaceClass, i: usize) -> usize {
    let l = c.len;
    [c.degrees[(i + 1) % l], c.degrees[(i + l - 1) % l]]
        .iter()
        .filter(|&&d| is_low(d))
        .count()
}

/// Each rule claims faces by census alone; the table must partition all faces of length at least 3.
const RULES: [(Rule, Claim, Take); 9] = [
    (
        Rule::R1,
        |c| c.len == 3 && c.low >= 1,
        |c, i| if c.degrees[i] >= 5 { 6 } else { 0 },
    ),
    (
        Rule::R2,
        |c| c.len == 3 && c.low == 0 && c.fours >= 1,
        |c, i| match c.degrees[i] {
            4 => 2,
            d if d >= 5 => 5,
            _ => 0,
        },
    ),
    (
        Rule::R3,
        |c| c.len == 3 && c.low == 0 && c.fours == 0,
        |_, _| 4,
    ),
    (
        Rule::R4,
        |c| c.len == 4 && c.low >= 2,
        |c, i| if c.degrees[i] >= 6 { 4 } else { 0 },
    ),
    (
        Rule::R5,
        |c| c.len == 4 && c.low == 1,
        |c, i| {
            let at = c
                .degrees
                .iter()
                .position(|&d| is_low(d))
                .expect("one low vertex");
            if is_low(c.degrees[i]) {
                0
            } else if i == (at + 2) % 4 {
                2
            } else {
                3
            }
        },
    ),
    (Rule::R6, |c| c.len == 4 && c.low == 0, |_, _| 2),
    (
        Rule::R7,
        |c| c.len == 5 && c.low >= 2,
        |c, i| {
            if is_low(c.degrees[i]) {
                0
            } else if neighbors_low(c, i) == 2 {
                2
            } else {
                1
            }
        },
    ),
    (
        Rule::R8,
        |c| c.len == 5 && c.low <= 1,
        |c, i| if is_low(c.degrees[i]) { 0 } else { 1 },
    ),
    (
        Rule::R9,
        |c| c.len >= 6,
        |c, i| if c.degrees[i] >= 4 { 1 } else { 0 },
    ),
];

impl Rule {
    pub fn all() -> impl Iterator<Item = Rule> {
        RULES.iter().map(|r| r.0)
    }

    /// Every rule whose hypothesis the face meets.
    pub fn claims(class: &FaceClass) -> Vec<Rule> {
        RULES.iter().filter(|r| (r.1)(class)).map(|r| r.0).collect()
    }

    fn take(self) -> Take {
        RULES[self as usize].2
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Rule {
    type Err = ChargeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::all()
            .find(|r| r.to_string() == s)
            .ok_or_else(|| ChargeParseError(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DischargeError {
    #[error("face {face} is claimed by {rules:?}")]
    RuleAmbiguity { face: usize, rules: Vec<Rule> },
    #[error("face {face} of length {len} is claimed by no rule")]
    NoRule { face: usize, len: usize },
    #[error("the driver needs genus at most 1, got {genus}")]
    GenusTooLarge { genus: usize },
    #[error("ledger does not belong to this embedding")]
    Mismatch,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub rule: Rule,
    pub from: Vertex,
    pub face: usize,
    pub amount: Charge,
}

/// Initial and final charge of every element with the transfers in between.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeLedger {
    pub vertex_initial: Vec<Charge>,
    pub face_initial: Vec<Charge>,
    pub face_rule: Vec<Option<Rule>>,
    pub transfers: Vec<Transfer>,
    pub vertex_final: Vec<Charge>,
    pub face_final: Vec<Charge>,
}

impl ChargeLedger {
    pub fn total_initial(&self) -> Charge {
        self.vertex_initial
            .iter()
            .chain(&self.face_initial)
            .copied()
            .sum()
    }

    pub fn total_final(&self) -> Charge {
        self.vertex_final
            .iter()
            .chain(&self.face_final)
            .copied()
            .sum()
    }

    pub fn initial(&self, e: Element) -> Charge {
        match e {
            Element::Vertex(v) => self.vertex_initial[v],
            Element::Face(f) => self.face_initial[f],
        }
    }

    pub fn final_charge(&self, e: Element) -> Charge {
        match e {
            Element::Vertex(v) => self.vertex_final[v],
            Element::Face(f) => self.face_final[f],
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.vertex_initial.len())
            .map(Element::Vertex)
            .chain((0..self.face_initial.len()).map(Element::Face))
    }

    /// Recomputes every final charge from the transfer list; true iff all agree and totals match.
    pub fn is_balanced(&self) -> bool {
        let mut vf = self.vertex_initial.clone();
        let mut ff = self.face_initial.clone();
        for t in &self.transfers {
            let (Some(v), Some(f)) = (vf.get_mut(t.from), ff.get_mut(t.face)) else {
                return false;
            };
            *v = *v - t.amount;
            *f = *f + t.amount;
        }
        vf == self.vertex_final
            && ff == self.face_final
            && self.total_initial() == self.total_final()
    }

    pub fn outflow(&self, v: Vertex) -> Charge {
        self.transfers
            .iter()
            .filter(|t| t.from == v)
            .map(|t| t.amount)
            .sum()
    }

    pub fn inflow(&self, f: usize) -> Charge {
        self.transfers
            .iter()
            .filter(|t| t.face == f)
            .map(|t| t.amount)
            .sum()
    }

    /// Tab-separated table: element, initial, out, in, final, rules involved.
    pub fn to_table(&self) -> String {
        let mut out = String::from("element\tinitial\tout\tin\tfinal\trules\n");
        for e in self.elements() {
            let (gave, got, rules): (Charge, Charge, Vec<Rule>) = match e {
                Element::Vertex(v) => {
                    let mut rs: Vec<Rule> = self
                        .transfers
                        .iter()
                        .filter(|t| t.from == v)
                        .map(|t| t.rule)
                        .collect();
                    rs.sort_unstable();
                    rs.dedup();
                    (self.outflow(v), Charge::ZERO, rs)
                }
                Element::Face(f) => (
                    Charge::ZERO,
                    self.inflow(f),
                    self.face_rule[f].into_iter().collect(),
                ),
            };
            let rules: Vec<String> = rules.iter().map(Rule::to_string).collect();
            let rules = if rules.is_empty() {
                "-".to_string()
            } else {
                rules.join(",")
            };
            out += &format!(
                "{e}\t{}\t{gave}\t{got}\t{}\t{rules}\n",
                self.initial(e),
                self.final_charge(e)
            );
        }
        out += &format!(
            "total\t{}\t\t\t{}\n",
            self.total_initial(),
            self.total_final()
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes")
    }
}

/// c(v) = 2d(v) - 6 and c(f) = len(f) - 6; the total is -6 times the Euler characteristic.
pub fn initial_charges(emb: &EmbeddedGraph) -> ChargeLedger {
    let g = emb.graph();
    let vertex_initial: Vec<Charge> = g
        .vertices()
        .map(|v| Charge::whole(2 * g.degree(v) as i64 - 6))
        .collect();
    let face_initial: Vec<Charge> = emb
        .faces()
        .iter()
        .map(|f| Charge::whole(f.len() as i64 - 6))
        .collect();
    ChargeLedger {
        vertex_final: vertex_initial.clone(),
        face_final: face_initial.clone(),
        face_rule: vec![None; face_initial.len()],
        vertex_initial,
        face_initial,
        transfers: Vec::new(),
    }
}

/// The unique rule claiming a face, or None for faces shorter than 3.
pub fn classify(class: &FaceClass, face: usize) -> Result<Option<Rule>, DischargeError> {
    let rules = Rule::claims(class);
    match (rules.len(), class.len) {
        (0, len) if len < 3 => Ok(None),
        (0, len) => Err(DischargeError::NoRule { face, len }),
        (1, _) => Ok(Some(rules[0])),
        _ => Err(DischargeError::RuleAmbiguity { face, rules }),
    }
}

/// Applies the rules face by face. A vertex visited twice by one boundary gives twice.
pub fn apply_rules(
    ledger: &ChargeLedger,
    emb: &EmbeddedGraph,
) -> Result<ChargeLedger, DischargeError> {
    if ledger.vertex_initial.len() != emb.graph().n()
        || ledger.face_initial.len() != emb.faces().len()
    {
        return Err(DischargeError::Mismatch);
    }
    let per_face: Vec<(Option<Rule>, Vec<Transfer>)> = (0..emb.faces().len())
        .into_par_iter()
        .map(|f| {
            let class = FaceClass::of(emb, f);
            let Some(rule) = classify(&class, f)? else {
                return Ok((None, Vec::new()));
            };
            let take = rule.take();
            let transfers = emb
                .face(f)
                .vertices()
                .enumerate()
                .filter_map(|(i, v)| {
                    let q = take(&class, i);
                    (q > 0).then_some(Transfer {
                        rule,
                        from: v,
                        face: f,
                        amount: Charge(q),
                    })
                })
                .collect();
            Ok((Some(rule), transfers))
        })
        .collect::<Result<_, DischargeError>>()?;
    let mut out = ledger.clone();
    for (f, (rule, transfers)) in per_face.into_iter().enumerate() {
        out.face_rule[f] = rule;
        for t in transfers {
            out.vertex_final[t.from] = out.vertex_final[t.from] - t.amount;
            out.face_final[t.face] = out.face_final[t.face] + t.amount;
            out.transfers.push(t);
        }
    }
    debug_assert!(out.is_balanced());
    Ok(out)
}

pub fn discharge(emb: &EmbeddedGraph) -> Result<ChargeLedger, DischargeError> {
    apply_rules(&initial_charges(emb), emb)
}

/// Local picture around a vertex: what the case analysis of final charges splits on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexCase {
    pub degree: usize,
    pub low_neighbors: usize,
    /// Corners lying on 3-faces, and the number of maximal cyclic runs they form.
    pub triangles: usize,
    pub triangle_runs: usize,
    pub costly: usize,
    pub expensive: usize,
}

impl VertexCase {
    pub fn of(emb: &EmbeddedGraph, v: Vertex) -> VertexCase {
        let g = emb.graph();
        let corners: Vec<FaceClass> = emb
            .corner_faces(v)
            .into_iter()
            .map(|f| FaceClass::of(emb, f))
            .collect();
        let tri: Vec<bool> = corners.iter().map(|c| c.len == 3).collect();
        let k = tri.len();
        let triangles = tri.iter().filter(|&&t| t).count();
        let triangle_runs = if triangles == k && k > 0 {
            1
        } else {
            (0..k).filter(|&i| tri[i] && !tri[(i + k - 1) % k]).count()
        };
        VertexCase {
            degree: g.degree(v),
            low_neighbors: g
                .neighbors(v)
                .iter()
                .filter(|&&w| is_low(g.degree(w)))
                .count(),
            triangles,
            triangle_runs,
            costly: corners.iter().filter(|c| c.costly).count(),
            expensive: corners.iter().filter(|c| c.expensive).count(),
        }
    }
}

impl fmt::Display for VertexCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "degree {} | low nbrs {} | 3-faces {} in {} runs | costly {} | expensive {}",
            self.degree,
            self.low_neighbors,
            self.triangles,
            self.triangle_runs,
            self.costly,
            self.expensive
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexVerdict {
    pub vertex: Vertex,
    pub final_charge: Charge,
    pub sign: Sign,
    pub case: VertexCase,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceVerdict {
    pub face: usize,
    pub final_charge: Charge,
    pub sign: Sign,
    pub rule: Option<Rule>,
    pub class: FaceClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalReport {
    pub vertices: Vec<VertexVerdict>,
    pub faces: Vec<FaceVerdict>,
}

impl FinalReport {
    pub fn negative(&self) -> Vec<Element> {
        let vs = self
            .vertices
            .iter()
            .filter(|x| x.sign == Sign::Negative)
            .map(|x| Element::Vertex(x.vertex));
        let fs = self
            .faces
            .iter()
            .filter(|x| x.sign == Sign::Negative)
            .map(|x| Element::Face(x.face));
        vs.chain(fs).collect()
    }
}

impl fmt::Display for FinalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.vertices {
            writeln!(
                f,
                "v{}\t{}\t{}\t{}",
                x.vertex, x.final_charge, x.sign, x.case
            )?;
        }
        for x in &self.faces {
            let rule = x.rule.map_or("-".to_string(), |r| r.to_string());
            let degrees: Vec<String> = x.class.degrees.iter().map(usize::to_string).collect();
            writeln!(
                f,
                "f{}\t{}\t{}\t{rule}\tdegrees {}",
                x.face,
                x.final_charge,
                x.sign,
                degrees.join(",")
            )?;
        }
        Ok(())
    }
}

pub fn final_report(ledger: &ChargeLedger, emb: &EmbeddedGraph) -> FinalReport {
    let vertices = emb
        .graph()
        .vertices()
        .map(|v| VertexVerdict {
            vertex: v,
            final_charge: ledger.vertex_final[v],
            sign: ledger.vertex_final[v].sign(),
            case: VertexCase::of(emb, v),
        })
        .collect();
    let faces = (0..emb.faces().len())
        .map(|f| FaceVerdict {
            face: f,
            final_charge: ledger.face_final[f],
            sign: ledger.face_final[f].sign(),
            rule: ledger.face_rule[f],
            class: FaceClass::of(emb, f),
        })
        .collect();
    FinalReport { vertices, faces }
}

/// What the discharging argument looks like on a configuration-free embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub ledger: ChargeLedger,
    pub report: FinalReport,
    pub negative: Vec<Element>,
    pub four_regular: bool,
    pub all_faces_five: bool,
}

impl Contradiction {
    /// All finals non-negative with a non-positive total is the state the argument rules out.
    pub fn is_soundness_alarm(&self) -> bool {
        self.negative.is_empty() && self.ledger.total_final() <= Charge::ZERO
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DriverOutcome {
    ConfigFound(ConfigMatch),
    DischargeContradiction(Box<Contradiction>),
}

fn four_regular(g: &Graph) -> bool {
    g.vertices().all(|v| g.degree(v) == 4)
}

/// Finds a torus configuration, or else runs the discharging and reports where it breaks.
pub fn unavoidability_driver(emb: &EmbeddedGraph) -> Result<DriverOutcome, DischargeError> {
    if emb.genus() > 1 {
        return Err(DischargeError::GenusTooLarge { genus: emb.genus() });
    }
    if let Some(m) = first_config(Host::Embedded(emb), &ConfigKind::TORUS)? {
        return Ok(DriverOutcome::ConfigFound(m));
    }
    let ledger = discharge(emb)?;
    let report = final_report(&ledger, emb);
    Ok(DriverOutcome::DischargeContradiction(Box::new(
        Contradiction {
            negative: report.negative(),
            four_regular: four_regular(emb.graph()),
            all_faces_five: emb.faces().iter().all(|f| f.len() == 5),
            ledger,
            report,
        },
    )))
}
