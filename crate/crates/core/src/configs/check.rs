use serde::{Deserialize, Serialize};

use super::{ConfigError, Reduction};
use crate::coloring::{required_colors, Color, PartialColoring};
use crate::game::{
    exhaustive_lister, solve_xp_r, ExhaustiveBudget, GPrimeFirst, GameBudget, GameVerdict,
    TokenAssignment, Transcript,
};
use crate::graph::{Graph, Vertex};

#[derive(Clone, Debug)]
pub struct ExtendBudget {
    pub max_n: usize,
    pub max_nodes: u64,
}

impl Default for ExtendBudget {
    fn default() -> Self {
        ExtendBudget {
            max_n: 12,
            max_nodes: 200_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendReport {
    pub extendable: bool,
    /// r-dynamic k-colorings of G' up to renaming colors.
    pub colorings: u64,
    pub nodes: u64,
    /// A coloring of G' (in G ids, S left uncolored) with no valid extension.
    pub counterexample: Option<PartialColoring>,
}

struct Search {
    r: usize,
    k: Color,
    nodes: u64,
    max_nodes: u64,
    color: Vec<Option<Color>>,
}

impl Search {
    fn tick(&mut self) -> Result<(), ConfigError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(ConfigError::BudgetExceeded { nodes: self.nodes });
        }
        Ok(())
    }

    fn used(&self) -> Color {
        self.color.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Properness at v, and the dynamic count at every vertex whose graph neighborhood `h` is fully colored.
    fn consistent(&self, h: &Graph, v: Vertex) -> bool {
        let c = self.color[v];
        if h.neighbors(v)
            .iter()
            .any(|&w| self.color[w].is_some() && self.color[w] == c)
        {
            return false;
        }
        std::iter::once(v)
            .chain(h.neighbors(v).iter().copied())
            .all(|w| {
                let seen: Option<Vec<Color>> =
                    h.neighbors(w).iter().map(|&x| self.color[x]).collect();
                match seen {
                    None => true,
                    Some(mut cs) => {
                        cs.sort_unstable();
                        cs.dedup();
                        cs.len() >= required_colors(h, w, self.r)
                    }
                }
            })
    }

    /// Assigns `order[i..]` with colors up to k, new colors introduced in increasing order.
    fn fill(
        &mut self,
        h: &Graph,
        order: &[Vertex],
        i: usize,
        leaf: &mut dyn FnMut(&mut Self) -> Result<bool, ConfigError>,
    ) -> Result<bool, ConfigError> {
        self.tick()?;
        if i == order.len() {
            return leaf(self);
        }
        let v = order[i];
        let top = (self.used() + 1).min(self.k);
        for c in 1..=top {
            self.color[v] = Some(c);
            if self.consistent(h, v) && self.fill(h, order, i + 1, leaf)? {
                self.color[v] = None;
                return Ok(true);
            }
        }
        self.color[v] = None;
        Ok(false)
    }
}

/// Does every r-dynamic k-coloring of G' extend to an r-dynamic k-coloring of G?
pub fn check_extendable(
    g: &Graph,
    red: &Reduction,
    budget: &ExtendBudget,
) -> Result<ExtendReport, ConfigError> {
    if g.n() > budget.max_n {
        return Err(ConfigError::TooLarge {
            n: g.n(),
            cap: budget.max_n,
        });
    }
    let gp = &red.gprime;
    let mut inner = Search {
        r: red.r,
        k: red.k,
        nodes: 0,
        max_nodes: budget.max_nodes,
        color: vec![None; gp.n()],
    };
    let order: Vec<Vertex> = gp.vertices().collect();
    let mut colorings = 0u64;
    let mut outer_nodes = 0u64;
    let mut counterexample = None;
    let (r, k, keep, deleted) = (red.r, red.k, &red.keep, &red.deleted);
    let max_nodes = budget.max_nodes;
    inner.fill(gp, &order, 0, &mut |s: &mut Search| {
        colorings += 1;
        let mut outer = Search {
            r,
            k,
            nodes: 0,
            max_nodes,
            color: vec![None; g.n()],
        };
        for (i, &v) in keep.iter().enumerate() {
            outer.color[v] = s.color[i];
        }
        let base = outer.color.clone();
        let extended = outer.fill(g, deleted, 0, &mut |_| Ok(true))?;
        outer_nodes += outer.nodes;
        s.nodes += outer.nodes;
        if outer_nodes > max_nodes {
            return Err(ConfigError::BudgetExceeded { nodes: outer_nodes });
        }
        if !extended {
            let mut c = PartialColoring::uncolored(g.n());
            for (v, col) in base.iter().enumerate() {
                if let Some(col) = col {
                    c.set(v, *col);
                }
            }
            counterexample = Some(c);
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok(ExtendReport {
        extendable: counterexample.is_none(),
        colorings,
        nodes: inner.nodes,
        counterexample,
    })
}

#[derive(Clone, Debug, Default)]
pub struct BudgetOptions {
    /// Tokens on every G' vertex; defaults to k.
    pub inner_tokens: Option<u32>,
    /// Tokens on every deleted vertex; defaults to k.
    pub outer_tokens: Option<u32>,
    pub game: GameBudget,
    pub walk: ExhaustiveBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleAudit {
    pub vertex: Vertex,
    pub budget: u32,
    pub max_rejections: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    /// No reachable line loses: deleted vertices stay within their tokens and the end coloring is r-dynamic.
    pub verdict: bool,
    pub audits: Vec<RuleAudit>,
    pub losses: u64,
    pub states: u64,
    pub nodes: u64,
    pub losing_line: Option<Transcript>,
}

/// Solves the G' game, wraps the winning strategy with the veto rules, and lets every Lister line play against it.
pub fn check_budget(
    g: &Graph,
    red: &Reduction,
    opts: &BudgetOptions,
) -> Result<BudgetReport, ConfigError> {
    let inner_tokens = opts.inner_tokens.unwrap_or(red.k);
    let outer_tokens = opts.outer_tokens.unwrap_or(red.k);
    let fp = TokenAssignment::uniform(red.gprime.n(), inner_tokens);
    let table = match solve_xp_r(&red.gprime, red.r, &fp, &opts.game)? {
        GameVerdict::PainterWins(t) => t,
        GameVerdict::ListerWins(_) => return Err(ConfigError::InnerNotWinning),
    };
    let painter = GPrimeFirst::new(
        g,
        &red.gprime,
        red.keep.clone(),
        table,
        red.rules.clone(),
        red.r,
    )?;
    let mut tokens = vec![outer_tokens; g.n()];
    for &v in &red.keep {
        tokens[v] = inner_tokens;
    }
    let f = TokenAssignment::new(tokens)?;
    let walk = exhaustive_lister(g, red.r, &f, &painter, &opts.walk)?;
    let audits = red
        .rules
        .iter()
        .zip(&red.budgets)
        .map(|(rule, &budget)| RuleAudit {
            vertex: rule.vertex,
            budget,
            max_rejections: walk.max_rejections[rule.vertex],
        })
        .collect();
    Ok(BudgetReport {
        verdict: walk.painter_survives(),
        audits,
        losses: walk.losses,
        states: walk.states,
        nodes: walk.nodes,
        losing_line: walk.losing_line,
    })
}
