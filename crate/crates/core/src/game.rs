//! The Lister/Painter paintability game with the r-dynamic winning condition.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{required_colors, Color, PartialColoring};
use crate::format::ParseError;
use crate::graph::{Graph, Vertex};

mod solver;
mod triggers;

pub use solver::{
    choice_sandwich, solve_xp_r, xp_r_number, Bound, BoundSource, GameBudget, GameVerdict,
    ListerTable, PainterTable, Sandwich, StrategyEntry, StrategyFile, StrategyKind, XpValue,
};
pub use triggers::{run_gprime_first, GPrimeFirst, Trigger, VetoRule};

/// Largest order the packed state keys support.
pub const MAX_GAME_VERTICES: usize = 16;
/// Token counts must fit a nibble in the packed keys.
pub const MAX_TOKENS: u32 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("Lister must mark a nonempty set")]
    EmptyMark,
    #[error("vertex {0} is already colored and cannot be marked")]
    IllegalMark(Vertex),
    #[error("illegal Painter response: {0}")]
    IllegalResponse(String),
    #[error("token vector has {got} entries, graph has {want}")]
    SizeMismatch { got: usize, want: usize },
    #[error("vertex {0} starts with no tokens")]
    ZeroToken(Vertex),
    #[error("vertex {vertex} has {tokens} tokens; at most {MAX_TOKENS} supported")]
    TooManyTokens { vertex: Vertex, tokens: u32 },
    #[error("graph has {n} vertices, game solver cap is {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("game search budget exhausted")]
    BudgetExceeded,
    #[error("vertex {vertex} rejected {rejections} times, budget {budget}")]
    BudgetViolated {
        vertex: Vertex,
        rejections: u32,
        budget: u32,
    },
    #[error("the inner strategy lost on the auxiliary graph")]
    InnerLost,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAssignment {
    tokens: Vec<u32>,
}

impl TokenAssignment {
    pub fn new(tokens: Vec<u32>) -> Result<Self, GameError> {
        if let Some(v) = tokens.iter().position(|&t| t == 0) {
            return Err(GameError::ZeroToken(v));
        }
        Ok(TokenAssignment { tokens })
    }

    pub fn uniform(n: usize, k: u32) -> Self {
        assert!(k > 0, "initial tokens are positive");
        TokenAssignment { tokens: vec![k; n] }
    }

    pub fn get(&self, v: Vertex) -> u32 {
        self.tokens[v]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Round i colors its chosen vertices with color i (1-based), so color classes are rounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    tokens: Vec<u32>,
    color: Vec<Option<Color>>,
    round: u32,
    lister_won: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Ongoing,
    ListerWon,
    /// Everything colored; the flag is the r-dynamic verdict.
    Finished {
        r_dynamic: bool,
    },
}

impl GameState {
    pub fn new(f: &TokenAssignment) -> Self {
        GameState {
            tokens: f.tokens.clone(),
            color: vec![None; f.len()],
            round: 0,
            lister_won: false,
        }
    }

    /// A state with a prescribed coloring; colors are round numbers.
    pub fn from_parts(tokens: Vec<u32>, color: Vec<Option<Color>>) -> Self {
        assert_eq!(tokens.len(), color.len());
        let round = color.iter().flatten().copied().max().unwrap_or(0);
        GameState {
            tokens,
            color,
            round,
            lister_won: false,
        }
    }

    pub fn n(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn color(&self, v: Vertex) -> Option<Color> {
        self.color[v]
    }

    pub fn colors(&self) -> &[Option<Color>] {
        &self.color
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn lister_won(&self) -> bool {
        self.lister_won
    }

    pub fn is_colored(&self, v: Vertex) -> bool {
        self.color[v].is_some()
    }

    pub fn uncolored(&self) -> Vec<Vertex> {
        (0..self.n()).filter(|&v| self.color[v].is_none()).collect()
    }

    /// Nonempty color classes in round order.
    pub fn classes(&self) -> Vec<Vec<Vertex>> {
        let mut by_color: std::collections::BTreeMap<Color, Vec<Vertex>> = Default::default();
        for (v, c) in self.color.iter().enumerate() {
            if let Some(c) = c {
                by_color.entry(*c).or_default().push(v);
            }
        }
        by_color.into_values().collect()
    }

    pub fn coloring(&self) -> PartialColoring {
        let mut c = PartialColoring::uncolored(self.n());
        for (v, col) in self.color.iter().enumerate() {
            if let Some(col) = col {
                c.set(v, *col);
            }
        }
        c
    }

    /// Distinct colors currently on N(v).
    pub fn neighborhood_colors(&self, g: &Graph, v: Vertex) -> usize {
        g.neighbors(v)
            .iter()
            .filter_map(|&w| self.color[w])
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Marks, spends tokens, colors `response` with a fresh color. Marking a tokenless vertex hands Lister the game.
    pub fn play_round(
        &self,
        g: &Graph,
        marked: &[Vertex],
        response: &[Vertex],
    ) -> Result<GameState, GameError> {
        if g.n() != self.n() {
            return Err(GameError::SizeMismatch {
                got: self.n(),
                want: g.n(),
            });
        }
        if marked.is_empty() {
            return Err(GameError::EmptyMark);
        }
        let mut seen = vec![false; self.n()];
        for &v in marked {
            if v >= self.n() || self.color[v].is_some() || seen[v] {
                return Err(GameError::IllegalMark(v));
            }
            seen[v] = true;
        }
        let mut picked = vec![false; self.n()];
        for &v in response {
            if v >= self.n() || !seen[v] || picked[v] {
                return Err(GameError::IllegalResponse(format!(
                    "{v} is not a marked vertex"
                )));
            }
            picked[v] = true;
        }
        if !g.is_independent(response) {
            return Err(GameError::IllegalResponse(
                "response is not independent".into(),
            ));
        }
        let mut next = self.clone();
        next.round += 1;
        for &v in marked {
            if next.tokens[v] == 0 {
                next.lister_won = true;
            } else {
                next.tokens[v] -= 1;
            }
        }
        if !next.lister_won {
            for &v in response {
                next.color[v] = Some(next.round);
            }
        }
        Ok(next)
    }

    pub fn outcome(&self, g: &Graph, r: usize) -> Outcome {
        if self.lister_won {
            Outcome::ListerWon
        } else if self.color.iter().all(Option::is_some) {
            let ok = g
                .vertices()
                .all(|v| self.neighborhood_colors(g, v) >= required_colors(g, v, r));
            Outcome::Finished { r_dynamic: ok }
        } else {
            Outcome::Ongoing
        }
    }
}

/// Rounds in which a vertex was marked but left uncolored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionLedger {
    counts: Vec<u32>,
}

impl RejectionLedger {
    pub fn new(n: usize) -> Self {
        RejectionLedger { counts: vec![0; n] }
    }

    pub fn record(&mut self, marked: &[Vertex], response: &[Vertex]) {
        for &v in marked {
            if !response.contains(&v) {
                self.counts[v] += 1;
            }
        }
    }

    pub fn get(&self, v: Vertex) -> u32 {
        self.counts[v]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Rejections implied by a state: marks spent, minus the one that colored the vertex.
    pub fn implied(f: &TokenAssignment, s: &GameState) -> Self {
        let counts = (0..s.n())
            .map(|v| {
                let marks = f.get(v) - s.tokens[v];
                marks - u32::from(s.is_colored(v) && marks > 0)
            })
            .collect();
        RejectionLedger { counts }
    }
}

pub trait PainterStrategy {
    /// An independent subset of `marked`; must not depend on anything but the arguments.
    fn respond(&self, g: &Graph, state: &GameState, marked: &[Vertex]) -> Vec<Vertex>;
}

pub trait ListerStrategy {
    /// A nonempty set of uncolored vertices.
    fn mark(&mut self, g: &Graph, state: &GameState) -> Vec<Vertex>;
}

impl<P: PainterStrategy + ?Sized> PainterStrategy for &P {
    fn respond(&self, g: &Graph, state: &GameState, marked: &[Vertex]) -> Vec<Vertex> {
        (**self).respond(g, state, marked)
    }
}

impl<P: PainterStrategy + ?Sized> PainterStrategy for Box<P> {
    fn respond(&self, g: &Graph, state: &GameState, marked: &[Vertex]) -> Vec<Vertex> {
        (**self).respond(g, state, marked)
    }
}

/// Colors the least marked vertex each round, so every vertex ends with its own color.
#[derive(Clone, Copy, Debug, Default)]
pub struct RainbowPainter;

impl PainterStrategy for RainbowPainter {
    fn respond(&self, _g: &Graph, _state: &GameState, marked: &[Vertex]) -> Vec<Vertex> {
        marked.iter().min().map(|&v| vec![v]).unwrap_or_default()
    }
}

/// Marks a uniformly random nonempty subset of the uncolored vertices.
#[derive(Clone, Debug)]
pub struct RandomLister {
    rng: ChaCha8Rng,
}

impl RandomLister {
    pub fn new(seed: u64) -> Self {
        RandomLister {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl ListerStrategy for RandomLister {
    fn mark(&mut self, _g: &Graph, state: &GameState) -> Vec<Vertex> {
        let open = state.uncolored();
        loop {
            let pick: Vec<Vertex> = open
                .iter()
                .copied()
                .filter(|_| self.rng.gen_bool(0.5))
                .collect();
            if !pick.is_empty() {
                return pick;
            }
            if open.len() == 1 {
                return open.choose(&mut self.rng).into_iter().copied().collect();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub marked: Vec<Vertex>,
    pub colored: Vec<Vertex>,
    /// Tokens after the round.
    pub tokens: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
}

fn join(xs: &[impl fmt::Display]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rounds {
            writeln!(
                f,
                "round {} | marked: {} | colored: {} | tokens: {}",
                r.round,
                join(&r.marked),
                join(&r.colored),
                join(&r.tokens)
            )?;
        }
        Ok(())
    }
}

/// Parses the line format written by `Display`; blank lines and `#` comments are skipped.
pub fn parse_transcript(text: &str) -> Result<Transcript, ParseError> {
    let mut rounds = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parts: Vec<&str> = content.split('|').map(str::trim).collect();
        let [head, marked, colored, tokens] = parts.as_slice() else {
            return Err(ParseError::new(at, "expected four `|`-separated fields"));
        };
        let round = head
            .strip_prefix("round")
            .and_then(|s| s.trim().parse::<u32>().ok())
            .ok_or_else(|| ParseError::new(at, "expected `round <i>`"))?;
        let field = |s: &str, name: &str| -> Result<Vec<u64>, ParseError> {
            let body = s
                .strip_prefix(name)
                .and_then(|s| s.strip_prefix(':'))
                .ok_or_else(|| ParseError::new(at, format!("expected `{name}:`")))?;
            body.split_whitespace()
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|_| ParseError::new(at, format!("bad number {t:?}")))
                })
                .collect()
        };
        let to_vertices = |xs: Vec<u64>| -> Result<Vec<Vertex>, ParseError> {
            xs.into_iter()
                .map(|x| {
                    usize::try_from(x)
                        .ok()
                        .filter(|&x| x < crate::format::MAX_PARSE_VERTICES)
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| ParseError::new(at, "vertex id out of range"))
        };
        let marked = to_vertices(field(marked, "marked")?)?;
        let colored = to_vertices(field(colored, "colored")?)?;
        let tokens = field(tokens, "tokens")?
            .into_iter()
            .map(|t| u32::try_from(t).map_err(|_| ParseError::new(at, "token count too large")))
            .collect::<Result<Vec<_>, _>>()?;
        if colored.iter().any(|v| !marked.contains(v)) {
            return Err(ParseError::new(at, "colored vertex was not marked"));
        }
        rounds.push(RoundRecord {
            round,
            marked,
            colored,
            tokens,
        });
    }
    Ok(Transcript { rounds })
}

impl Transcript {
    /// Replays the rounds from `f`, checking legality and the recorded token counts.
    pub fn replay(&self, g: &Graph, f: &TokenAssignment) -> Result<GameState, GameError> {
        if f.len() != g.n() {
            return Err(GameError::SizeMismatch {
                got: f.len(),
                want: g.n(),
            });
        }
        let mut s = GameState::new(f);
        for (i, rec) in self.rounds.iter().enumerate() {
            if rec.round as usize != i + 1 {
                return Err(
                    ParseError::new(0, format!("round {} out of sequence", rec.round)).into(),
                );
            }
            s = s.play_round(g, &rec.marked, &rec.colored)?;
            if rec.tokens != s.tokens {
                return Err(ParseError::new(
                    0,
                    format!("round {} token counts disagree", rec.round),
                )
                .into());
            }
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub transcript: Transcript,
    pub ledger: RejectionLedger,
    pub outcome: Outcome,
    pub final_state: GameState,
}

/// Plays until the game ends. An illegal Painter response is reported as an error.
pub fn play_game(
    g: &Graph,
    r: usize,
    f: &TokenAssignment,
    painter: &dyn PainterStrategy,
    lister: &mut dyn ListerStrategy,
) -> Result<GameRecord, GameError> {
    if f.len() != g.n() {
        return Err(GameError::SizeMismatch {
            got: f.len(),
            want: g.n(),
        });
    }
    let mut state = GameState::new(f);
    let mut ledger = RejectionLedger::new(g.n());
    let mut transcript = Transcript::default();
    while state.outcome(g, r) == Outcome::Ongoing {
        let marked = lister.mark(g, &state);
        let response = painter.respond(g, &state, &marked);
        state = state.play_round(g, &marked, &response)?;
        ledger.record(&marked, &response);
        transcript.rounds.push(RoundRecord {
            round: state.round,
            marked,
            colored: response,
            tokens: state.tokens.clone(),
        });
    }
    Ok(GameRecord {
        transcript,
        ledger,
        outcome: state.outcome(g, r),
        final_state: state,
    })
}

#[derive(Clone, Debug)]
pub struct ExhaustiveBudget {
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
}

impl Default for ExhaustiveBudget {
    fn default() -> Self {
        ExhaustiveBudget {
            max_nodes: 10_000_000,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    /// Distinct reachable states where Painter has lost.
    pub losses: u64,
    /// Largest rejection count per vertex over every reachable state.
    pub max_rejections: Vec<u32>,
    pub states: u64,
    pub nodes: u64,
    /// Moves leading to the first loss found, if any.
    pub losing_line: Option<Transcript>,
}

impl ExhaustiveReport {
    pub fn painter_survives(&self) -> bool {
        self.losses == 0
    }
}

/// Plays every Lister line against a deterministic Painter.
/// A state is lost when an uncolored vertex has no tokens, the response is illegal, or the end coloring is not r-dynamic.
pub fn exhaustive_lister(
    g: &Graph,
    r: usize,
    f: &TokenAssignment,
    painter: &dyn PainterStrategy,
    budget: &ExhaustiveBudget,
) -> Result<ExhaustiveReport, GameError> {
    let n = g.n();
    if n > MAX_GAME_VERTICES {
        return Err(GameError::TooLarge {
            n,
            cap: MAX_GAME_VERTICES,
        });
    }
    check_tokens(g, f)?;
    let mut walk = Walk {
        g,
        r,
        f,
        painter,
        budget,
        started: Instant::now(),
        seen: HashMap::new(),
        report: ExhaustiveReport {
            losses: 0,
            max_rejections: vec![0; n],
            states: 0,
            nodes: 0,
            losing_line: None,
        },
        line: Vec::new(),
    };
    walk.visit(GameState::new(f))?;
    walk.report.states = walk.seen.len() as u64;
    Ok(walk.report)
}

pub(crate) fn check_tokens(g: &Graph, f: &TokenAssignment) -> Result<(), GameError> {
    if f.len() != g.n() {
        return Err(GameError::SizeMismatch {
            got: f.len(),
            want: g.n(),
        });
    }
    for (v, &t) in f.as_slice().iter().enumerate() {
        if t > MAX_TOKENS {
            return Err(GameError::TooManyTokens {
                vertex: v,
                tokens: t,
            });
        }
    }
    Ok(())
}

struct Walk<'a> {
    g: &'a Graph,
    r: usize,
    f: &'a TokenAssignment,
    painter: &'a dyn PainterStrategy,
    budget: &'a ExhaustiveBudget,
    started: Instant,
    seen: HashMap<u128, ()>,
    report: ExhaustiveReport,
    line: Vec<RoundRecord>,
}

impl Walk<'_> {
    fn lose(&mut self) {
        self.report.losses += 1;
        if self.report.losing_line.is_none() {
            self.report.losing_line = Some(Transcript {
                rounds: self.line.clone(),
            });
        }
    }

    fn visit(&mut self, state: GameState) -> Result<(), GameError> {
        self.report.nodes += 1;
        if self.report.nodes > self.budget.max_nodes {
            return Err(GameError::BudgetExceeded);
        }
        if self.report.nodes.is_multiple_of(4096)
            && self
                .budget
                .time_limit
                .is_some_and(|t| self.started.elapsed() > t)
        {
            return Err(GameError::BudgetExceeded);
        }
        if self.seen.insert(full_key(&state), ()).is_some() {
            return Ok(());
        }
        let implied = RejectionLedger::implied(self.f, &state);
        for (m, &c) in self.report.max_rejections.iter_mut().zip(implied.counts()) {
            *m = (*m).max(c);
        }
        let open = state.uncolored();
        if open.is_empty() {
            if state.outcome(self.g, self.r) != (Outcome::Finished { r_dynamic: true }) {
                self.lose();
            }
            return Ok(());
        }
        if open.iter().any(|&v| state.tokens[v] == 0) {
            self.lose();
            return Ok(());
        }
        for mask in 1u32..(1 << open.len()) {
            let marked: Vec<Vertex> = (0..open.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| open[i])
                .collect();
            let response = self.painter.respond(self.g, &state, &marked);
            let next = match state.play_round(self.g, &marked, &response) {
                Ok(next) => next,
                Err(GameError::IllegalResponse(_)) => {
                    self.line.push(RoundRecord {
                        round: state.round + 1,
                        marked,
                        colored: response,
                        tokens: vec![],
                    });
                    self.lose();
                    self.line.pop();
                    continue;
                }
                Err(e) => return Err(e),
            };
            self.line.push(RoundRecord {
                round: next.round,
                marked,
                colored: response,
                tokens: next.tokens.clone(),
            });
            self.visit(next)?;
            self.line.pop();
        }
        Ok(())
    }
}

/// Canonical RGS labels of the color classes: 0 for uncolored, classes numbered by least vertex.
pub(crate) fn class_labels(color: &[Option<Color>]) -> Vec<u8> {
    let mut map: Vec<(Color, u8)> = Vec::new();
    color
        .iter()
        .map(|c| match c {
            None => 0,
            Some(c) => match map.iter().find(|(k, _)| k == c) {
                Some(&(_, l)) => l,
                None => {
                    let l = map.len() as u8 + 1;
                    map.push((*c, l));
                    l
                }
            },
        })
        .collect()
}

pub(crate) fn pack(tokens: impl Iterator<Item = u32>, labels: &[u8]) -> u128 {
    let mut key = 0u128;
    for (i, (t, &l)) in tokens.zip(labels).enumerate() {
        key |= ((t as u128 & 0xF) | ((l as u128) << 4)) << (8 * i);
    }
    key
}

/// Tokens of every vertex plus the color-class partition.
fn full_key(s: &GameState) -> u128 {
    pack(s.tokens.iter().copied(), &class_labels(&s.color))
}

/// Tokens of uncolored vertices plus the partition; colored vertices' tokens no longer matter.
pub(crate) fn play_key(s: &GameState) -> u128 {
    let labels = class_labels(&s.color);
    pack(
        s.tokens
            .iter()
            .zip(&labels)
            .map(|(&t, &l)| if l == 0 { t } else { 0 }),
        &labels,
    )
}
