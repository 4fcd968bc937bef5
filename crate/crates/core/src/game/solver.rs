//! Exact minimax for the r-dynamic paintability game, strategy tables, and the xp_r interval.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_tokens, class_labels, pack, play_key, GameError, GameState, ListerStrategy,
    PainterStrategy,
};
use super::{TokenAssignment, MAX_GAME_VERTICES};
use crate::bounds::bound_profile;
use crate::coloring::{
    chi_r_exact, is_l_colorable_r_dynamic, required_colors, ColoringError, ListAssignment,
    SolverBudget,
};
use crate::embedding::{search_embedding, SearchOptions};
use crate::format::ParseError;
use crate::graph::{Graph, Vertex};

#[derive(Clone, Debug)]
pub struct GameBudget {
    pub max_n: usize,
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
}

impl Default for GameBudget {
    fn default() -> Self {
        GameBudget {
            max_n: 7,
            max_nodes: 50_000_000,
            time_limit: None,
        }
    }
}

type Tokens = [u8; MAX_GAME_VERTICES];
type Labels = [u8; MAX_GAME_VERTICES];

struct OutOfBudget;

struct Ctx {
    n: usize,
    adj: Vec<u32>,
    req: Vec<u32>,
    nodes: AtomicU64,
    max_nodes: u64,
    deadline: Option<Instant>,
}

fn relabel(lab: &mut Labels, n: usize) {
    let mut map = [0u8; MAX_GAME_VERTICES + 2];
    let mut next = 0u8;
    for l in lab.iter_mut().take(n) {
        if *l != 0 {
            if map[*l as usize] == 0 {
                next += 1;
                map[*l as usize] = next;
            }
            *l = map[*l as usize];
        }
    }
}

impl Ctx {
    fn new(g: &Graph, r: usize, budget: &GameBudget) -> Self {
        let adj = g
            .vertices()
            .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
            .collect();
        Ctx {
            n: g.n(),
            adj,
            req: g
                .vertices()
                .map(|v| required_colors(g, v, r) as u32)
                .collect(),
            nodes: AtomicU64::new(0),
            max_nodes: budget.max_nodes,
            deadline: budget.time_limit.map(|t| Instant::now() + t),
        }
    }

    fn key(&self, tok: &Tokens, lab: &Labels) -> u128 {
        let mut k = 0u128;
        for v in 0..self.n {
            let t = if lab[v] == 0 { tok[v] } else { 0 };
            k |= ((t as u128) | ((lab[v] as u128) << 4)) << (8 * v);
        }
        k
    }

    fn uncolored(&self, lab: &Labels) -> u32 {
        (0..self.n)
            .filter(|&v| lab[v] == 0)
            .fold(0, |m, v| m | 1 << v)
    }

    /// Decided positions: everything colored, a tokenless uncolored vertex, or a neighborhood that can no longer reach its quota.
    fn status(&self, tok: &Tokens, lab: &Labels) -> Option<bool> {
        let open = self.uncolored(lab);
        if (0..self.n).any(|v| open >> v & 1 == 1 && tok[v] == 0) {
            return Some(false);
        }
        for v in 0..self.n {
            let mut seen = 0u32;
            let mut m = self.adj[v];
            while m != 0 {
                let w = m.trailing_zeros() as usize;
                m &= m - 1;
                if lab[w] != 0 {
                    seen |= 1 << lab[w];
                }
            }
            let reach = seen.count_ones() + (self.adj[v] & open).count_ones();
            if reach < self.req[v] {
                return Some(false);
            }
        }
        if open == 0 {
            return Some(true);
        }
        None
    }

    fn step(&self, tok: &Tokens, lab: &Labels, marked: u32, response: u32) -> (Tokens, Labels) {
        let (mut t, mut l) = (*tok, *lab);
        let fresh = l.iter().copied().max().unwrap_or(0) + 1;
        for v in 0..self.n {
            if marked >> v & 1 == 1 {
                t[v] -= 1;
            }
            if response >> v & 1 == 1 {
                l[v] = fresh;
            }
        }
        relabel(&mut l, self.n);
        (t, l)
    }

    fn independent(&self, set: u32) -> bool {
        let mut m = set;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if self.adj[v] & set != 0 {
                return false;
            }
        }
        true
    }

    fn tick(&self) -> Result<(), OutOfBudget> {
        let k = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if k > self.max_nodes {
            return Err(OutOfBudget);
        }
        if k.is_multiple_of(8192) && self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(OutOfBudget);
        }
        Ok(())
    }

    /// Painter's best answer to `marked`, trying larger independent subsets first and ∅ last.
    fn answer(
        &self,
        memo: &mut HashMap<u128, bool>,
        tok: &Tokens,
        lab: &Labels,
        marked: u32,
    ) -> Result<Option<u32>, OutOfBudget> {
        let mut s = marked;
        loop {
            if self.independent(s) {
                let (t, l) = self.step(tok, lab, marked, s);
                if self.wins(memo, &t, &l)? {
                    return Ok(Some(s));
                }
            }
            if s == 0 {
                return Ok(None);
            }
            s = (s - 1) & marked;
        }
    }

    /// Painter to move after Lister's choice; true iff Painter can force an r-dynamic coloring.
    fn wins(
        &self,
        memo: &mut HashMap<u128, bool>,
        tok: &Tokens,
        lab: &Labels,
    ) -> Result<bool, OutOfBudget> {
        if let Some(done) = self.status(tok, lab) {
            return Ok(done);
        }
        let key = self.key(tok, lab);
        if let Some(&v) = memo.get(&key) {
            return Ok(v);
        }
        self.tick()?;
        let open = self.uncolored(lab);
        let mut m = open;
        let mut result = true;
        while m != 0 {
            if self.answer(memo, tok, lab, m)?.is_none() {
                result = false;
                break;
            }
            m = (m - 1) & open;
        }
        memo.insert(key, result);
        Ok(result)
    }

    fn lister_refutation(
        &self,
        memo: &mut HashMap<u128, bool>,
        tok: &Tokens,
        lab: &Labels,
    ) -> Result<Option<u32>, OutOfBudget> {
        let open = self.uncolored(lab);
        let mut m = open;
        while m != 0 {
            if self.answer(memo, tok, lab, m)?.is_none() {
                return Ok(Some(m));
            }
            m = (m - 1) & open;
        }
        Ok(None)
    }
}

fn mask_of(xs: &[Vertex]) -> u32 {
    xs.iter().fold(0, |m, &v| m | 1 << v)
}

fn vertices_of(mask: u32) -> Vec<Vertex> {
    (0..32).filter(|&v| mask >> v & 1 == 1).collect()
}

fn unpack(key: u128, n: usize) -> (Vec<u32>, Vec<u8>) {
    let tokens = (0..n).map(|v| (key >> (8 * v) & 0xF) as u32).collect();
    let labels = (0..n).map(|v| (key >> (8 * v + 4) & 0xF) as u8).collect();
    (tokens, labels)
}

/// Painter's extracted strategy, keyed by (uncolored tokens, class partition) and the marked set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PainterTable {
    n: usize,
    entries: HashMap<(u128, u32), u32>,
}

impl PainterTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl PainterStrategy for PainterTable {
    fn respond(&self, _g: &Graph, state: &GameState, marked: &[Vertex]) -> Vec<Vertex> {
        let key = play_key(state);
        self.entries
            .get(&(key, mask_of(marked)))
            .map(|&s| vertices_of(s))
            .unwrap_or_default()
    }
}

/// Lister's refutation: a mark for every position reachable against any Painter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ListerTable {
    n: usize,
    entries: HashMap<u128, u32>,
}

impl ListerTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl ListerStrategy for ListerTable {
    fn mark(&mut self, _g: &Graph, state: &GameState) -> Vec<Vertex> {
        if let Some(v) = state
            .uncolored()
            .into_iter()
            .find(|&v| state.tokens()[v] == 0)
        {
            return vec![v];
        }
        match self.entries.get(&play_key(state)) {
            Some(&m) => vertices_of(m),
            None => state.uncolored(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GameVerdict {
    PainterWins(PainterTable),
    ListerWins(ListerTable),
}

impl GameVerdict {
    pub fn painter_wins(&self) -> bool {
        matches!(self, GameVerdict::PainterWins(_))
    }
}

/// One first move searched in parallel: its value and the memo it filled.
type Branch = Result<(bool, HashMap<u128, bool>), OutOfBudget>;

/// Exact minimax. Sibling Lister moves at the root are searched in parallel with private memos,
/// so the verdict does not depend on scheduling.
pub fn solve_xp_r(
    g: &Graph,
    r: usize,
    f: &TokenAssignment,
    budget: &GameBudget,
) -> Result<GameVerdict, GameError> {
    let n = g.n();
    let cap = budget.max_n.min(MAX_GAME_VERTICES);
    if n > cap {
        return Err(GameError::TooLarge { n, cap });
    }
    check_tokens(g, f)?;
    let ctx = Ctx::new(g, r, budget);
    let mut tok = [0u8; MAX_GAME_VERTICES];
    for (v, t) in tok.iter_mut().enumerate().take(n) {
        *t = f.get(v) as u8;
    }
    let lab = [0u8; MAX_GAME_VERTICES];
    let mut memo = HashMap::new();
    let verdict = match ctx.status(&tok, &lab) {
        Some(done) => done,
        None => {
            let open = ctx.uncolored(&lab);
            let moves: Vec<u32> = (1..=open).filter(|m| m & !open == 0).collect();
            let results: Vec<Branch> = moves
                .par_iter()
                .map(|&m| {
                    let mut local = HashMap::new();
                    let ok = ctx.answer(&mut local, &tok, &lab, m)?.is_some();
                    Ok((ok, local))
                })
                .collect();
            let mut all = true;
            for res in results {
                let (ok, local) = res.map_err(|_| GameError::BudgetExceeded)?;
                all &= ok;
                memo.extend(local);
            }
            all
        }
    };
    let extract = |memo: &mut HashMap<u128, bool>| -> Result<GameVerdict, OutOfBudget> {
        if verdict {
            extract_painter(&ctx, memo, tok, lab).map(GameVerdict::PainterWins)
        } else {
            extract_lister(&ctx, memo, tok, lab).map(GameVerdict::ListerWins)
        }
    };
    extract(&mut memo).map_err(|_| GameError::BudgetExceeded)
}

fn extract_painter(
    ctx: &Ctx,
    memo: &mut HashMap<u128, bool>,
    tok: Tokens,
    lab: Labels,
) -> Result<PainterTable, OutOfBudget> {
    let mut table = PainterTable {
        n: ctx.n,
        entries: HashMap::new(),
    };
    let mut queue = VecDeque::from([(tok, lab)]);
    let mut done = std::collections::HashSet::new();
    while let Some((t, l)) = queue.pop_front() {
        if ctx.status(&t, &l).is_some() || !done.insert(ctx.key(&t, &l)) {
            continue;
        }
        let open = ctx.uncolored(&l);
        let mut m = open;
        while m != 0 {
            let s = ctx
                .answer(memo, &t, &l, m)?
                .expect("winning position has an answer to every mark");
            table.entries.insert((ctx.key(&t, &l), m), s);
            queue.push_back(ctx.step(&t, &l, m, s));
            m = (m - 1) & open;
        }
    }
    Ok(table)
}

fn extract_lister(
    ctx: &Ctx,
    memo: &mut HashMap<u128, bool>,
    tok: Tokens,
    lab: Labels,
) -> Result<ListerTable, OutOfBudget> {
    let mut table = ListerTable {
        n: ctx.n,
        entries: HashMap::new(),
    };
    let mut queue = VecDeque::from([(tok, lab)]);
    let mut done = std::collections::HashSet::new();
    while let Some((t, l)) = queue.pop_front() {
        if ctx.status(&t, &l).is_some() || !done.insert(ctx.key(&t, &l)) {
            continue;
        }
        let m = ctx
            .lister_refutation(memo, &t, &l)?
            .expect("losing position has a refuting mark");
        table.entries.insert(ctx.key(&t, &l), m);
        let mut s = m;
        loop {
            if ctx.independent(s) {
                queue.push_back(ctx.step(&t, &l, m, s));
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & m;
        }
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Painter,
    Lister,
}

/// One table row. `tokens` are zero on colored vertices; `classes` are canonical class labels (0 = uncolored).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub tokens: Vec<u32>,
    pub classes: Vec<u8>,
    pub marked: Vec<Vertex>,
    #[serde(default)]
    pub response: Vec<Vertex>,
}

/// Reloadable JSON form of a strategy table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub kind: StrategyKind,
    pub n: usize,
    pub entries: Vec<StrategyEntry>,
}

impl StrategyFile {
    pub fn from_painter(t: &PainterTable) -> Self {
        let mut entries: Vec<StrategyEntry> = t
            .entries
            .iter()
            .map(|(&(key, m), &s)| {
                let (tokens, classes) = unpack(key, t.n);
                StrategyEntry {
                    tokens,
                    classes,
                    marked: vertices_of(m),
                    response: vertices_of(s),
                }
            })
            .collect();
        entries.sort_by(|a, b| {
            (&a.tokens, &a.classes, &a.marked).cmp(&(&b.tokens, &b.classes, &b.marked))
        });
        StrategyFile {
            kind: StrategyKind::Painter,
            n: t.n,
            entries,
        }
    }

    pub fn from_lister(t: &ListerTable) -> Self {
        let mut entries: Vec<StrategyEntry> = t
            .entries
            .iter()
            .map(|(&key, &m)| {
                let (tokens, classes) = unpack(key, t.n);
                StrategyEntry {
                    tokens,
                    classes,
                    marked: vertices_of(m),
                    response: Vec::new(),
                }
            })
            .collect();
        entries.sort_by(|a, b| (&a.tokens, &a.classes).cmp(&(&b.tokens, &b.classes)));
        StrategyFile {
            kind: StrategyKind::Lister,
            n: t.n,
            entries,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy tables serialize")
    }

    /// Parses and validates; every row must describe a reachable-shaped position and a legal move.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let file: StrategyFile = serde_json::from_str(text).map_err(|e| {
            ParseError::new(
                e.column().saturating_sub(1),
                format!("bad strategy json: {e}"),
            )
        })?;
        if file.n > MAX_GAME_VERTICES {
            return Err(ParseError::new(
                0,
                format!("order {} exceeds {MAX_GAME_VERTICES}", file.n),
            ));
        }
        for (i, e) in file.entries.iter().enumerate() {
            let bad = |why: &str| ParseError::new(0, format!("entry {i}: {why}"));
            if e.tokens.len() != file.n || e.classes.len() != file.n {
                return Err(bad("length does not match order"));
            }
            if e.tokens.iter().any(|&t| t > super::MAX_TOKENS) {
                return Err(bad("token count too large"));
            }
            let colors: Vec<Option<u32>> = e
                .classes
                .iter()
                .map(|&c| if c == 0 { None } else { Some(c as u32) })
                .collect();
            if class_labels(&colors) != e.classes {
                return Err(bad("class labels are not canonical"));
            }
            if e.tokens
                .iter()
                .zip(&e.classes)
                .any(|(&t, &c)| c != 0 && t != 0)
            {
                return Err(bad("colored vertices carry tokens"));
            }
            if e.marked.is_empty() {
                return Err(bad("empty mark"));
            }
            let mut seen = vec![false; file.n];
            for &v in &e.marked {
                if v >= file.n || e.classes[v] != 0 || seen[v] {
                    return Err(bad("marked vertex invalid, colored, or repeated"));
                }
                seen[v] = true;
            }
            let mut picked = vec![false; file.n];
            for &v in &e.response {
                if v >= file.n || !seen[v] || picked[v] {
                    return Err(bad("response is not a subset of the mark"));
                }
                picked[v] = true;
            }
            if file.kind == StrategyKind::Lister && !e.response.is_empty() {
                return Err(bad("Lister rows carry no response"));
            }
        }
        Ok(file)
    }

    pub fn painter_table(&self) -> Option<PainterTable> {
        (self.kind == StrategyKind::Painter).then(|| PainterTable {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| {
                    (
                        (
                            pack(e.tokens.iter().copied(), &e.classes),
                            mask_of(&e.marked),
                        ),
                        mask_of(&e.response),
                    )
                })
                .collect(),
        })
    }

    pub fn lister_table(&self) -> Option<ListerTable> {
        (self.kind == StrategyKind::Lister).then(|| ListerTable {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| {
                    (
                        pack(e.tokens.iter().copied(), &e.classes),
                        mask_of(&e.marked),
                    )
                })
                .collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSource {
    /// An exactly computed χ_r; every paint number is at least this.
    ChromaticNumber,
    /// max min{r, d(v)} + 1 when χ_r was out of budget.
    DegreeBound,
    /// Identical lists of one fewer color admit no r-dynamic coloring.
    ListRefuter { list_size: usize },
    /// Game solved exactly with uniform tokens.
    GameSolve,
    /// One vertex colored per round gives every vertex its own color.
    Rainbow,
    /// xp_3 ≤ 10 for toroidal graphs, certified here by an embedding of genus ≤ 1.
    TorusTheorem { genus: usize },
    /// The contraction bound ℓ(g, r) for an embedding of genus g found by search.
    ContractionBound { genus: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub value: usize,
    pub source: BoundSource,
}

#[derive(Clone, Debug)]
pub struct XpValue {
    pub lower: Bound,
    pub upper: Bound,
    /// A verified winning strategy at `upper`, when the game solver produced it.
    pub strategy: Option<PainterTable>,
}

impl XpValue {
    pub fn exact(&self) -> Option<usize> {
        (self.lower.value == self.upper.value).then_some(self.lower.value)
    }
}

fn lower_bound(g: &Graph, r: usize) -> Bound {
    let budget = SolverBudget {
        max_n: 16,
        max_nodes: 20_000_000,
        time_limit: None,
    };
    match chi_r_exact(g, r, &budget) {
        Ok(res) => Bound {
            value: res.value,
            source: BoundSource::ChromaticNumber,
        },
        Err(_) => Bound {
            value: g
                .vertices()
                .map(|v| required_colors(g, v, r) + 1)
                .max()
                .unwrap_or(1),
            source: BoundSource::DegreeBound,
        },
    }
}

/// Upper bounds from theorems that apply to g, best first (ties keep the theorem ahead of the rainbow).
fn theorem_upper_bounds(g: &Graph, r: usize) -> Vec<Bound> {
    let mut out = Vec::new();
    if g.n() > 0 && g.is_connected() {
        if let Ok(emb) = search_embedding(
            g,
            &SearchOptions {
                target_genus: Some(1),
                ..SearchOptions::default()
            },
        ) {
            let genus = emb.genus();
            if genus <= 1 && r <= 3 {
                out.push(Bound {
                    value: 10,
                    source: BoundSource::TorusTheorem { genus },
                });
            }
            let p = bound_profile(genus as u64, r as u64);
            if p.applicable {
                out.push(Bound {
                    value: p.ell as usize,
                    source: BoundSource::ContractionBound { genus },
                });
            }
        }
    }
    out.push(Bound {
        value: g.n().max(1),
        source: BoundSource::Rainbow,
    });
    out.sort_by_key(|b| b.value);
    out
}

/// xp_r by bisection between χ_r and the best theorem bound, falling back to the interval when out of budget.
pub fn xp_r_number(g: &Graph, r: usize, budget: &GameBudget) -> XpValue {
    let mut lower = lower_bound(g, r);
    let mut upper = theorem_upper_bounds(g, r).swap_remove(0);
    let mut strategy = None;
    let solvable = g.n() <= budget.max_n.min(MAX_GAME_VERTICES);
    while solvable && lower.value < upper.value {
        let mid = (lower.value + upper.value) / 2;
        if mid as u32 > super::MAX_TOKENS {
            break;
        }
        match solve_xp_r(
            g,
            r,
            &TokenAssignment::uniform(g.n(), mid.max(1) as u32),
            budget,
        ) {
            Ok(GameVerdict::PainterWins(t)) => {
                upper = Bound {
                    value: mid,
                    source: BoundSource::GameSolve,
                };
                strategy = Some(t);
            }
            Ok(GameVerdict::ListerWins(_)) => {
                lower = Bound {
                    value: mid + 1,
                    source: BoundSource::GameSolve,
                }
            }
            Err(_) => break,
        }
    }
    XpValue {
        lower,
        upper,
        strategy,
    }
}

/// χ_r ≤ ch_r ≤ xp_r with the provenance of each side.
#[derive(Clone, Debug)]
pub struct Sandwich {
    pub chi: Bound,
    pub ch_lower: Bound,
    pub ch_upper: Bound,
    pub xp: XpValue,
}

pub fn choice_sandwich(
    g: &Graph,
    r: usize,
    budget: &GameBudget,
) -> Result<Sandwich, ColoringError> {
    let xp = xp_r_number(g, r, budget);
    let chi = lower_bound(g, r);
    let mut ch_lower = chi.clone();
    // identical lists one short of the chromatic bound must fail; the solver confirms it independently
    let k = chi.value.saturating_sub(1);
    if k >= 1 {
        let lists = ListAssignment::uniform(g.n(), k);
        let sb = SolverBudget {
            max_n: usize::MAX,
            ..SolverBudget::default()
        };
        if is_l_colorable_r_dynamic(g, &lists, r, &sb)?.is_none() && k + 1 >= ch_lower.value {
            ch_lower = Bound {
                value: k + 1,
                source: BoundSource::ListRefuter { list_size: k },
            };
        }
    }
    Ok(Sandwich {
        chi,
        ch_lower,
        ch_upper: xp.upper.clone(),
        xp,
    })
}
