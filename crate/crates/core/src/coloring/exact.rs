use std::time::{Duration, Instant};

use super::{required_colors, Color, ColoringError, ListAssignment, PartialColoring};
use crate::graph::{Graph, Vertex};

#[derive(Clone, Debug)]
pub struct SolverBudget {
    pub max_n: usize,
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            max_n: 16,
            max_nodes: 200_000_000,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChiResult {
    pub value: usize,
    pub witness: PartialColoring,
    pub nodes: u64,
}

struct OutOfBudget;

/// Backtracking r-dynamic colorer over a palette (with symmetry breaking) or a list assignment.
struct Search<'a> {
    g: &'a Graph,
    k: usize,
    // dense list indices 1..=m; names[i] is the original color of index i
    lists: Option<Vec<Vec<Color>>>,
    names: Vec<Color>,
    color: Vec<Color>,
    // count[v][c]: neighbors of v currently colored c
    count: Vec<Vec<u16>>,
    distinct: Vec<usize>,
    open: Vec<usize>,
    req: Vec<usize>,
    used: Color,
    nodes: u64,
    budget: &'a SolverBudget,
    started: Instant,
}

impl<'a> Search<'a> {
    fn new(
        g: &'a Graph,
        r: usize,
        k: usize,
        lists: Option<&'a ListAssignment>,
        budget: &'a SolverBudget,
    ) -> Self {
        let mut names: Vec<Color> = vec![0];
        let dense = lists.map(|l| {
            let mut all: Vec<Color> = (0..g.n()).flat_map(|v| l.list(v).iter().copied()).collect();
            all.sort_unstable();
            all.dedup();
            names.extend(&all);
            (0..g.n())
                .map(|v| {
                    l.list(v)
                        .iter()
                        .map(|c| all.binary_search(c).expect("present") as Color + 1)
                        .collect()
                })
                .collect::<Vec<Vec<Color>>>()
        });
        let top = if dense.is_some() { names.len() - 1 } else { k };
        Search {
            g,
            k,
            lists: dense,
            names,
            color: vec![0; g.n()],
            count: vec![vec![0; top + 1]; g.n()],
            distinct: vec![0; g.n()],
            open: g.vertices().map(|v| g.degree(v)).collect(),
            req: g.vertices().map(|v| required_colors(g, v, r)).collect(),
            used: 0,
            nodes: 0,
            budget,
            started: Instant::now(),
        }
    }

    fn tight(&self, w: Vertex) -> bool {
        self.distinct[w] + self.open[w] <= self.req[w]
    }

    /// Colors v may take without breaking properness or a tight neighbor's demand.
    fn allowed(&self, v: Vertex) -> Vec<Color> {
        let candidates: Vec<Color> = match &self.lists {
            Some(l) => l[v].clone(),
            None => (1..=(self.used + 1).min(self.k as Color)).collect(),
        };
        candidates
            .into_iter()
            .filter(|&c| {
                self.count[v][c as usize] == 0
                    && self
                        .g
                        .neighbors(v)
                        .iter()
                        .all(|&w| !self.tight(w) || self.count[w][c as usize] == 0)
            })
            .collect()
    }

    fn assign(&mut self, v: Vertex, c: Color) -> bool {
        self.color[v] = c;
        let mut ok = true;
        for &w in self.g.neighbors(v) {
            let slot = &mut self.count[w][c as usize];
            *slot += 1;
            if *slot == 1 {
                self.distinct[w] += 1;
            }
            self.open[w] -= 1;
            if self.distinct[w] + self.open[w] < self.req[w] {
                ok = false;
            }
        }
        ok
    }

    fn unassign(&mut self, v: Vertex) {
        let c = self.color[v];
        for &w in self.g.neighbors(v) {
            let slot = &mut self.count[w][c as usize];
            *slot -= 1;
            if *slot == 0 {
                self.distinct[w] -= 1;
            }
            self.open[w] += 1;
        }
        self.color[v] = 0;
    }

    fn tick(&mut self) -> Result<(), OutOfBudget> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(OutOfBudget);
        }
        if self.nodes.is_multiple_of(4096) {
            if let Some(limit) = self.budget.time_limit {
                if self.started.elapsed() > limit {
                    return Err(OutOfBudget);
                }
            }
        }
        Ok(())
    }

    fn solve(&mut self) -> Result<bool, OutOfBudget> {
        self.tick()?;
        // most constrained uncolored vertex; ties to higher degree, then lower id
        let mut pick: Option<(usize, Vertex, Vec<Color>)> = None;
        for v in self.g.vertices() {
            if self.color[v] != 0 {
                continue;
            }
            let allowed = self.allowed(v);
            if allowed.is_empty() {
                return Ok(false);
            }
            let better = match &pick {
                None => true,
                Some((len, u, _)) => {
                    allowed.len() < *len
                        || (allowed.len() == *len && self.g.degree(v) > self.g.degree(*u))
                }
            };
            if better {
                pick = Some((allowed.len(), v, allowed));
            }
        }
        let Some((_, v, allowed)) = pick else {
            return Ok(true);
        };
        for c in allowed {
            let before = self.used;
            self.used = self.used.max(c);
            let ok = self.assign(v, c);
            if ok && self.solve()? {
                return Ok(true);
            }
            self.unassign(v);
            self.used = before;
        }
        Ok(false)
    }

    fn witness(&self) -> PartialColoring {
        if self.lists.is_some() {
            PartialColoring::from_colors(
                self.color.iter().map(|&c| self.names[c as usize]).collect(),
            )
        } else {
            PartialColoring::from_colors(self.color.clone())
        }
    }
}

/// Lower bound max(2 if any edge, max_v min{r, d(v)} + 1).
fn chi_r_lower_bound(g: &Graph, r: usize) -> usize {
    if g.n() == 0 {
        return 0;
    }
    g.vertices()
        .filter(|&v| g.degree(v) > 0)
        .map(|v| required_colors(g, v, r) + 1)
        .max()
        .unwrap_or(1)
}

/// Exact χ_r with a verifying witness.
pub fn chi_r_exact(g: &Graph, r: usize, budget: &SolverBudget) -> Result<ChiResult, ColoringError> {
    if g.n() > budget.max_n {
        return Err(ColoringError::TooLarge {
            n: g.n(),
            cap: budget.max_n,
        });
    }
    chi_r_with_budget(g, r, budget)
}

/// Same as [`chi_r_exact`] without the size cap.
pub fn chi_r_with_budget(
    g: &Graph,
    r: usize,
    budget: &SolverBudget,
) -> Result<ChiResult, ColoringError> {
    let n = g.n();
    if n == 0 {
        return Ok(ChiResult {
            value: 0,
            witness: PartialColoring::uncolored(0),
            nodes: 0,
        });
    }
    let mut nodes = 0;
    for k in chi_r_lower_bound(g, r)..=n {
        let mut search = Search::new(g, r, k, None, budget);
        let found = search.solve();
        nodes += search.nodes;
        match found {
            Ok(true) => {
                return Ok(ChiResult {
                    value: k,
                    witness: search.witness(),
                    nodes,
                })
            }
            Ok(false) => {}
            Err(OutOfBudget) => return Err(ColoringError::BudgetExceeded { lower: k, upper: n }),
        }
    }
    Ok(ChiResult {
        value: n,
        witness: PartialColoring::rainbow(n),
        nodes,
    })
}

/// An r-dynamic coloring drawn from the lists, if one exists.
pub fn is_l_colorable_r_dynamic(
    g: &Graph,
    lists: &ListAssignment,
    r: usize,
    budget: &SolverBudget,
) -> Result<Option<PartialColoring>, ColoringError> {
    if lists.len() != g.n() {
        return Err(ColoringError::SizeMismatch {
            got: lists.len(),
            want: g.n(),
        });
    }
    let mut search = Search::new(g, r, 0, Some(lists), budget);
    match search.solve() {
        Ok(true) => Ok(Some(search.witness())),
        Ok(false) => Ok(None),
        Err(OutOfBudget) => Err(ColoringError::BudgetExceeded {
            lower: 0,
            upper: g.n(),
        }),
    }
}

/// χ(G²), which equals χ_r(G) once r ≥ Δ(G).
pub fn chi_r_via_square(
    g: &Graph,
    r: usize,
    budget: &SolverBudget,
) -> Result<usize, ColoringError> {
    let delta = g.max_degree();
    if r < delta {
        return Err(ColoringError::RNotSaturating { r, delta });
    }
    Ok(chi_r_exact(&g.square(), 1, budget)?.value)
}
