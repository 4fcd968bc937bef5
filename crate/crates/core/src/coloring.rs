use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::ParseError;
use crate::graph::{Graph, Vertex};

mod exact;

pub use exact::{
    chi_r_exact, chi_r_via_square, chi_r_with_budget, is_l_colorable_r_dynamic, ChiResult,
    SolverBudget,
};

/// Colors are opaque positive integers.
pub type Color = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("vertex {0} is uncolored")]
    PartialInput(Vertex),
    #[error("coloring covers {got} vertices, graph has {want}")]
    SizeMismatch { got: usize, want: usize },
    #[error("search budget exhausted; bounds so far [{lower}, {upper}]")]
    BudgetExceeded { lower: usize, upper: usize },
    #[error("graph has {n} vertices, solver cap is {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("r = {r} is below the maximum degree {delta}")]
    RNotSaturating { r: usize, delta: usize },
    #[error("empty list at vertex {0}")]
    EmptyList(Vertex),
    #[error("color 0 is not allowed (vertex {0})")]
    ZeroColor(Vertex),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialColoring {
    colors: Vec<Option<Color>>,
}

impl PartialColoring {
    pub fn uncolored(n: usize) -> Self {
        PartialColoring {
            colors: vec![None; n],
        }
    }

    pub fn from_colors(colors: Vec<Color>) -> Self {
        assert!(colors.iter().all(|&c| c > 0), "colors are positive");
        PartialColoring {
            colors: colors.into_iter().map(Some).collect(),
        }
    }

    pub fn rainbow(n: usize) -> Self {
        Self::from_colors((1..=n as Color).collect())
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn get(&self, v: Vertex) -> Option<Color> {
        self.colors[v]
    }

    pub fn set(&mut self, v: Vertex, c: Color) {
        assert!(c > 0, "colors are positive");
        self.colors[v] = Some(c);
    }

    pub fn clear(&mut self, v: Vertex) {
        self.colors[v] = None;
    }

    pub fn as_slice(&self) -> &[Option<Color>] {
        &self.colors
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    pub fn distinct_colors(&self) -> usize {
        self.colors.iter().flatten().collect::<BTreeSet<_>>().len()
    }

    /// Distinct colors currently on N(v).
    pub fn neighborhood_colors(&self, g: &Graph, v: Vertex) -> BTreeSet<Color> {
        g.neighbors(v)
            .iter()
            .filter_map(|&w| self.colors[w])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListAssignment {
    lists: Vec<Vec<Color>>,
}

impl ListAssignment {
    pub fn new(lists: Vec<Vec<Color>>) -> Result<Self, ColoringError> {
        let mut clean = Vec::with_capacity(lists.len());
        for (v, mut list) in lists.into_iter().enumerate() {
            if list.is_empty() {
                return Err(ColoringError::EmptyList(v));
            }
            if list.contains(&0) {
                return Err(ColoringError::ZeroColor(v));
            }
            list.sort_unstable();
            list.dedup();
            clean.push(list);
        }
        Ok(ListAssignment { lists: clean })
    }

    /// The list {1, ..., k} at each of n vertices.
    pub fn uniform(n: usize, k: usize) -> Self {
        assert!(k >= 1, "lists are nonempty");
        ListAssignment {
            lists: vec![(1..=k as Color).collect(); n],
        }
    }

    pub fn list(&self, v: Vertex) -> &[Color] {
        &self.lists[v]
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

/// Lines `<vertex>: <color> <color> ...`; `#` comments. Every vertex needs exactly one line.
pub fn parse_lists(text: &str, n: usize) -> Result<ListAssignment, ColoringError> {
    let mut lists: Vec<Option<Vec<Color>>> = vec![None; n];
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (v, rest) = content
            .split_once(':')
            .ok_or_else(|| ParseError::new(at, "expected `<vertex>: colors`"))?;
        let v: Vertex = v
            .trim()
            .parse()
            .map_err(|_| ParseError::new(at, format!("bad vertex {v:?}")))?;
        if v >= n {
            return Err(ParseError::new(at, format!("vertex {v} out of range for {n}")).into());
        }
        if lists[v].is_some() {
            return Err(ParseError::new(at, format!("vertex {v} listed twice")).into());
        }
        let colors = rest
            .split_whitespace()
            .map(|c| {
                c.parse::<Color>()
                    .map_err(|_| ParseError::new(at, format!("bad color {c:?}")))
            })
            .collect::<Result<Vec<Color>, ParseError>>()?;
        lists[v] = Some(colors);
    }
    let lists = lists
        .into_iter()
        .enumerate()
        .map(|(v, l)| {
            l.ok_or_else(|| {
                ColoringError::from(ParseError::new(
                    text.len(),
                    format!("no list for vertex {v}"),
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    ListAssignment::new(lists)
}

pub fn emit_lists(l: &ListAssignment) -> String {
    let mut out = String::new();
    for v in 0..l.len() {
        let colors: Vec<String> = l.list(v).iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("{v}: {}\n", colors.join(" ")));
    }
    out
}

/// min{r, d(v)}.
pub fn required_colors(g: &Graph, v: Vertex, r: usize) -> usize {
    r.min(g.degree(v))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexCount {
    pub vertex: Vertex,
    pub distinct: usize,
    pub required: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicReport {
    pub r: usize,
    pub proper: bool,
    pub conflicts: Vec<(Vertex, Vertex)>,
    pub counts: Vec<VertexCount>,
    pub violating: Vec<Vertex>,
}

impl DynamicReport {
    pub fn verdict(&self) -> bool {
        self.proper && self.violating.is_empty()
    }
}

impl fmt::Display for DynamicReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "r {}", self.r)?;
        writeln!(f, "proper {}", self.proper)?;
        for (u, v) in &self.conflicts {
            writeln!(f, "conflict {u} {v}")?;
        }
        for c in &self.counts {
            let mark = if c.distinct >= c.required {
                "ok"
            } else {
                "short"
            };
            writeln!(
                f,
                "vertex {} sees {} of {} {mark}",
                c.vertex, c.distinct, c.required
            )?;
        }
        writeln!(f, "verdict {}", self.verdict())
    }
}

pub fn verify_r_dynamic(
    g: &Graph,
    c: &PartialColoring,
    r: usize,
) -> Result<DynamicReport, ColoringError> {
    if c.len() != g.n() {
        return Err(ColoringError::SizeMismatch {
            got: c.len(),
            want: g.n(),
        });
    }
    if let Some(v) = g.vertices().find(|&v| c.get(v).is_none()) {
        return Err(ColoringError::PartialInput(v));
    }
    let conflicts: Vec<(Vertex, Vertex)> =
        g.edges().filter(|&(u, v)| c.get(u) == c.get(v)).collect();
    let counts: Vec<VertexCount> = g
        .vertices()
        .map(|v| VertexCount {
            vertex: v,
            distinct: c.neighborhood_colors(g, v).len(),
            required: required_colors(g, v, r),
        })
        .collect();
    let violating = counts
        .iter()
        .filter(|c| c.distinct < c.required)
        .map(|c| c.vertex)
        .collect();
    Ok(DynamicReport {
        r,
        proper: conflicts.is_empty(),
        conflicts,
        counts,
        violating,
    })
}

/// Lines `<vertex> <color>`; `#` comments. Vertices without a line stay uncolored.
pub fn parse_coloring(text: &str, n: usize) -> Result<PartialColoring, ColoringError> {
    let mut c = PartialColoring::uncolored(n);
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            [v, col] => {
                let v: Vertex = v
                    .parse()
                    .map_err(|_| ParseError::new(at, format!("bad vertex {v:?}")))?;
                let col: Color = col
                    .parse()
                    .map_err(|_| ParseError::new(at, format!("bad color {col:?}")))?;
                if v >= n {
                    return Err(
                        ParseError::new(at, format!("vertex {v} out of range for {n}")).into(),
                    );
                }
                if col == 0 {
                    return Err(ParseError::new(at, "colors must be positive").into());
                }
                if c.get(v).is_some() {
                    return Err(ParseError::new(at, format!("vertex {v} colored twice")).into());
                }
                c.set(v, col);
            }
            _ => return Err(ParseError::new(at, "expected `<vertex> <color>`").into()),
        }
    }
    Ok(c)
}

pub fn emit_coloring(c: &PartialColoring) -> String {
    let mut out = String::new();
    for (v, col) in c.as_slice().iter().enumerate() {
        if let Some(col) = col {
            out.push_str(&format!("{v} {col}\n"));
        }
    }
    out
}
