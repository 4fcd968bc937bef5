//! Veto rules for the vertices outside the auxiliary graph, and the composite Painter that obeys them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    play_game, GameError, GameRecord, GameState, ListerStrategy, Outcome, PainterStrategy,
    TokenAssignment,
};
use crate::coloring::required_colors;
use crate::graph::{Graph, Vertex};

/// One reason to reject a vertex in a round. "Being colored" means colored in the current round,
/// either by the inner response or by an earlier vertex of the deletion order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trigger {
    Colored(Vertex),
    /// The vertex shows fewer than min{r, d} − 1 colors and another of its neighbors is being colored.
    Dull(Vertex),
    /// `vertex` shows fewer than min{r, d} colors and some watched vertex is being colored.
    NotDynamic {
        vertex: Vertex,
        watched: Vec<Vertex>,
    },
    /// Every vertex of the set is being colored in the same round.
    AllColored(Vec<Vertex>),
    /// The round in which the first vertex of the set gets colored.
    FirstColorIn(Vec<Vertex>),
    AnyColored(Vec<Vertex>),
    BothColored(Vertex, Vertex),
}

impl Trigger {
    /// Most rounds in which this trigger can fire over a whole game.
    pub fn max_firings(&self, g: &Graph, r: usize) -> u32 {
        match self {
            Trigger::Colored(_)
            | Trigger::AllColored(_)
            | Trigger::FirstColorIn(_)
            | Trigger::BothColored(..) => 1,
            // Each firing adds a color next to w, and w stops being dull after r − 1 of them.
            Trigger::Dull(_) => r.saturating_sub(1) as u32,
            Trigger::NotDynamic { vertex, watched } => {
                let set: BTreeSet<Vertex> = watched.iter().copied().collect();
                if set.iter().all(|&x| g.has_edge(*vertex, x)) {
                    set.len().min(required_colors(g, *vertex, r)) as u32
                } else {
                    set.len() as u32
                }
            }
            Trigger::AnyColored(set) => set.iter().collect::<BTreeSet<_>>().len() as u32,
        }
    }

    /// Does this trigger fire for `owner` given the colors before the round and the vertices colored now?
    pub fn fires(
        &self,
        g: &Graph,
        r: usize,
        before: &GameState,
        now: &[bool],
        owner: Vertex,
    ) -> bool {
        let colors_on = |v: Vertex| before.neighborhood_colors(g, v);
        match self {
            Trigger::Colored(x) => now[*x],
            Trigger::Dull(w) => {
                colors_on(*w) + 1 < required_colors(g, *w, r)
                    && g.neighbors(*w).iter().any(|&x| x != owner && now[x])
            }
            Trigger::NotDynamic { vertex, watched } => {
                colors_on(*vertex) < required_colors(g, *vertex, r)
                    && watched.iter().any(|&x| now[x])
            }
            Trigger::AllColored(set) => !set.is_empty() && set.iter().all(|&x| now[x]),
            Trigger::FirstColorIn(set) => {
                set.iter().any(|&x| now[x]) && set.iter().all(|&x| !before.is_colored(x))
            }
            Trigger::AnyColored(set) => set.iter().any(|&x| now[x]),
            Trigger::BothColored(a, b) => now[*a] && now[*b],
        }
    }

    fn covers(&self, x: Vertex) -> bool {
        match self {
            Trigger::Colored(y) => *y == x,
            Trigger::AnyColored(set) => set.contains(&x),
            _ => false,
        }
    }

    fn vertices(&self) -> Vec<Vertex> {
        match self {
            Trigger::Colored(x) | Trigger::Dull(x) => vec![*x],
            Trigger::NotDynamic { vertex, watched } => std::iter::once(*vertex)
                .chain(watched.iter().copied())
                .collect(),
            Trigger::AllColored(s) | Trigger::FirstColorIn(s) | Trigger::AnyColored(s) => s.clone(),
            Trigger::BothColored(a, b) => vec![*a, *b],
        }
    }
}

fn list(xs: &[Vertex]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::Colored(x) => write!(f, "colored({x})"),
            Trigger::Dull(x) => write!(f, "dull({x})"),
            Trigger::NotDynamic { vertex, watched } => {
                write!(f, "not-dynamic({vertex};{})", list(watched))
            }
            Trigger::AllColored(s) => write!(f, "all-colored({})", list(s)),
            Trigger::FirstColorIn(s) => write!(f, "first-color({})", list(s)),
            Trigger::AnyColored(s) => write!(f, "any-colored({})", list(s)),
            Trigger::BothColored(a, b) => write!(f, "both-colored({a},{b})"),
        }
    }
}

/// The triggers that veto coloring `vertex`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VetoRule {
    pub vertex: Vertex,
    pub triggers: Vec<Trigger>,
}

impl VetoRule {
    /// Drops repeated triggers and adds `Colored(x)` for each uncovered neighbor x outside `later`,
    /// so properness is counted. A later vertex cannot be colored before this one in a round; its own
    /// rule carries the edge.
    pub fn with_properness(mut self, g: &Graph, later: &[Vertex]) -> Self {
        let mut seen = Vec::new();
        self.triggers.retain(|t| {
            let fresh = !seen.contains(t);
            if fresh {
                seen.push(t.clone());
            }
            fresh
        });
        for &x in g.neighbors(self.vertex) {
            if !later.contains(&x) && !self.triggers.iter().any(|t| t.covers(x)) {
                self.triggers.push(Trigger::Colored(x));
            }
        }
        self
    }

    pub fn budget(&self, g: &Graph, r: usize) -> u32 {
        self.triggers.iter().map(|t| t.max_firings(g, r)).sum()
    }

    fn vetoed(&self, g: &Graph, r: usize, before: &GameState, now: &[bool]) -> bool {
        self.triggers
            .iter()
            .any(|t| t.fires(g, r, before, now, self.vertex))
            || g.neighbors(self.vertex).iter().any(|&x| now[x])
    }
}

impl fmt::Display for VetoRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<String> = self.triggers.iter().map(|t| t.to_string()).collect();
        write!(f, "{}: {}", self.vertex, ts.join(" "))
    }
}

/// Plays `inner` on the auxiliary graph and colors each marked outside vertex, in rule order, unless a trigger vetoes it.
pub struct GPrimeFirst<P> {
    g: Graph,
    gprime: Graph,
    keep: Vec<Vertex>,
    index: Vec<Option<Vertex>>,
    inner: P,
    rules: Vec<VetoRule>,
    r: usize,
}

impl<P: PainterStrategy> GPrimeFirst<P> {
    /// `keep[i]` is the vertex of `g` playing vertex i of `gprime`; the rules cover the rest of `g` exactly once.
    pub fn new(
        g: &Graph,
        gprime: &Graph,
        keep: Vec<Vertex>,
        inner: P,
        rules: Vec<VetoRule>,
        r: usize,
    ) -> Result<Self, GameError> {
        let bad = |why: String| GameError::IllegalResponse(why);
        if keep.len() != gprime.n() {
            return Err(bad(format!(
                "{} kept vertices for an auxiliary graph of order {}",
                keep.len(),
                gprime.n()
            )));
        }
        let mut index = vec![None; g.n()];
        for (i, &v) in keep.iter().enumerate() {
            if v >= g.n() || index[v].is_some() {
                return Err(bad(format!("kept vertex {v} invalid or repeated")));
            }
            index[v] = Some(i);
        }
        let mut ruled = vec![false; g.n()];
        for rule in &rules {
            let v = rule.vertex;
            if v >= g.n() || index[v].is_some() || ruled[v] {
                return Err(bad(format!("rule vertex {v} invalid, kept, or repeated")));
            }
            ruled[v] = true;
            if rule
                .triggers
                .iter()
                .flat_map(Trigger::vertices)
                .any(|x| x >= g.n())
            {
                return Err(bad(format!("rule for {v} names a vertex out of range")));
            }
        }
        if let Some(v) = g.vertices().find(|&v| index[v].is_none() && !ruled[v]) {
            return Err(bad(format!("vertex {v} is neither kept nor ruled")));
        }
        Ok(GPrimeFirst {
            g: g.clone(),
            gprime: gprime.clone(),
            keep,
            index,
            inner,
            rules,
            r,
        })
    }

    pub fn rules(&self) -> &[VetoRule] {
        &self.rules
    }

    pub fn gprime(&self) -> &Graph {
        &self.gprime
    }

    pub fn kept(&self) -> &[Vertex] {
        &self.keep
    }

    /// Restriction of a G state to the auxiliary graph.
    pub fn restrict(&self, state: &GameState) -> GameState {
        GameState::from_parts(
            self.keep.iter().map(|&v| state.tokens()[v]).collect(),
            self.keep.iter().map(|&v| state.color(v)).collect(),
        )
    }
}

impl<P: PainterStrategy> PainterStrategy for GPrimeFirst<P> {
    fn respond(&self, g: &Graph, state: &GameState, marked: &[Vertex]) -> Vec<Vertex> {
        debug_assert_eq!(g, &self.g);
        let mut now = vec![false; g.n()];
        let inner_marked: Vec<Vertex> = marked.iter().filter_map(|&v| self.index[v]).collect();
        if !inner_marked.is_empty() {
            let sub = self.restrict(state);
            for i in self.inner.respond(&self.gprime, &sub, &inner_marked) {
                now[self.keep[i]] = true;
            }
        }
        let is_marked = {
            let mut m = vec![false; g.n()];
            marked.iter().for_each(|&v| m[v] = true);
            m
        };
        for rule in &self.rules {
            if is_marked[rule.vertex] && !rule.vetoed(g, self.r, state, &now) {
                now[rule.vertex] = true;
            }
        }
        g.vertices().filter(|&v| now[v]).collect()
    }
}

/// Plays the composite strategy against `lister`, then audits rejection budgets and the inner game.
pub fn run_gprime_first<P: PainterStrategy>(
    g: &Graph,
    painter: &GPrimeFirst<P>,
    f: &TokenAssignment,
    lister: &mut dyn ListerStrategy,
) -> Result<GameRecord, GameError> {
    let record = play_game(g, painter.r, f, painter, lister)?;
    for rule in painter.rules() {
        let v = rule.vertex;
        let used = record.ledger.get(v);
        if used + 1 > f.get(v) {
            return Err(GameError::BudgetViolated {
                vertex: v,
                rejections: used,
                budget: f.get(v) - 1,
            });
        }
    }
    let sub = painter.restrict(&record.final_state);
    let inner_ok = painter
        .keep
        .iter()
        .all(|&v| record.final_state.is_colored(v))
        && sub.outcome(&painter.gprime, painter.r) == (Outcome::Finished { r_dynamic: true });
    if !inner_ok {
        return Err(GameError::InnerLost);
    }
    Ok(record)
}
