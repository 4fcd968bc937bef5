use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dyncolor::bounds::{
    bound_profile, color_by_contraction, find_light_edge, kp_pipeline, mad_with_cap,
    parse_contraction_trace, parse_kp_certificate, replay_contraction, replay_kp_certificate,
    BoundsError, KpOptions, MAD_CAP,
};
use dyncolor::coloring::{
    chi_r_exact, emit_coloring, is_l_colorable_r_dynamic, parse_coloring, parse_lists,
    verify_r_dynamic, ColoringError, ListAssignment, SolverBudget,
};
use dyncolor::configs::{
    build_reduction, check_budget, check_extendable, find_configs, BudgetOptions, ConfigError,
    ConfigKind, ExtendBudget, Host,
};
use dyncolor::discharge::{
    discharge, final_report, unavoidability_driver, DischargeError, DriverOutcome,
};
use dyncolor::embedding::{parse_rotation, search_embedding, SearchOptions};
use dyncolor::format::{parse_edge_list, parse_graph6};
use dyncolor::game::{
    choice_sandwich, exhaustive_lister, parse_transcript, solve_xp_r, ExhaustiveBudget, GameBudget,
    GameError, GameVerdict, Outcome, StrategyFile, TokenAssignment,
};
use dyncolor::{EmbeddedGraph, Graph};

const EXIT_FALSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dyncolor",
    version,
    about = "Exact r-dynamic coloring, paint games, configurations and discharging"
)]
struct Cli {
    #[command(flatten)]
    opts: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Global {
    /// Seed for embedding search and any other randomized helper.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest graph the exponential solvers accept.
    #[arg(long, global = true)]
    max_n: Option<usize>,
    /// Search-node budget for the exponential solvers.
    #[arg(long, global = true)]
    max_nodes: Option<u64>,
    /// Wall-clock limit in seconds for the exponential solvers.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true, env = "DYNCOLOR_JOBS")]
    jobs: Option<usize>,
    /// Input graph format; `auto` goes by extension, then by content.
    #[arg(long, global = true, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// Structured JSON output where a subcommand supports it.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    G6,
    Edges,
    Rot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReplayKind {
    Contraction,
    Kp,
    Transcript,
    Strategy,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact r-dynamic chromatic number.
    ChiR {
        /// Each vertex must see min{r, d(v)} colors among its neighbors.
        #[arg(long)]
        r: usize,
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Also print an optimal coloring.
        #[arg(long)]
        witness: bool,
    },
    /// Check a coloring file against the r-dynamic conditions.
    Verify {
        /// Each vertex must see min{r, d(v)} colors among its neighbors.
        #[arg(long)]
        r: usize,
        /// Lines `<vertex> <color>`.
        #[arg(long)]
        coloring: PathBuf,
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
    },
    /// Solve the paint game at fixed tokens, or bound the paint number.
    Paint {
        /// Each vertex must see min{r, d(v)} colors among its neighbors.
        #[arg(long)]
        r: usize,
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Tokens on every vertex; without it the paint number is bounded instead.
        #[arg(long)]
        tokens: Option<u32>,
        /// Report chromatic, choice and paint bounds together.
        #[arg(long, conflicts_with = "tokens")]
        sandwich: bool,
        /// Write the winning strategy table as JSON.
        #[arg(long, requires = "tokens")]
        strategy_out: Option<PathBuf>,
    },
    /// Decide whether a list assignment admits an r-dynamic coloring.
    ListCheck {
        /// Each vertex must see min{r, d(v)} colors among its neighbors.
        #[arg(long)]
        r: usize,
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Lines `<vertex>: <color> <color> ...`, one per vertex.
        #[arg(long, conflicts_with = "uniform", required_unless_present = "uniform")]
        lists: Option<PathBuf>,
        /// The list {1..k} at every vertex.
        #[arg(long)]
        uniform: Option<usize>,
    },
    /// List occurrences of reducible configurations.
    FindConfig {
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Comma-separated kind names; defaults to every torus kind the input supports.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        /// Search an embedding for a bare graph so face kinds apply.
        #[arg(long)]
        embed: bool,
    },
    /// Build and optionally check the reduction licensed by a configuration.
    Reduce {
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Configuration kind name, as printed by find-config.
        #[arg(long)]
        kind: String,
        /// Which occurrence to use.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Search an embedding for a bare graph so face kinds apply.
        #[arg(long)]
        embed: bool,
        /// Enumerate every coloring of the reduced graph and try to extend it.
        #[arg(long)]
        check_extend: bool,
        /// Play every Lister line against the combined strategy.
        #[arg(long)]
        check_budget: bool,
        /// Tokens on the reduced graph's vertices; defaults to the kind's k.
        #[arg(long)]
        inner_tokens: Option<u32>,
        /// Tokens on the deleted vertices; defaults to the kind's k.
        #[arg(long)]
        outer_tokens: Option<u32>,
    },
    /// Run the discharging rules and print the charge ledger.
    Discharge {
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Search an embedding for a bare graph so face kinds apply.
        #[arg(long)]
        embed: bool,
        /// Print per-element verdicts instead of the ledger table.
        #[arg(long)]
        report: bool,
    },
    /// Find a torus configuration or show where the discharging breaks.
    Unavoidable {
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Search an embedding for a bare graph so face kinds apply.
        #[arg(long)]
        embed: bool,
    },
    /// Genus-indexed bounds, for a given genus or the genus of a graph.
    Bound {
        /// Each vertex must see min{r, d(v)} colors among its neighbors.
        #[arg(long)]
        r: u64,
        /// Surface genus.
        #[arg(long)]
        genus: Option<u64>,
        /// Take the genus from this graph instead of --genus.
        graph: Option<PathBuf>,
    },
    /// Exact maximum average degree.
    Mad {
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Largest graph the exhaustive mad search accepts.
        #[arg(long, default_value_t = MAD_CAP)]
        cap: usize,
    },
    /// Certify 2-dynamic 4-choosability of a sparse graph by configuration peeling.
    KpCheck {
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Assert the graph is planar with girth at least 7 instead of computing mad.
        #[arg(long)]
        planar_girth7: bool,
        /// Largest graph the exhaustive mad search accepts.
        #[arg(long, default_value_t = MAD_CAP)]
        cap: usize,
        /// Write the certificate for later replay.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Color by light-edge contraction within the genus bound.
    ContractColor {
        /// Each vertex must see min{r, d(v)} colors among its neighbors.
        #[arg(long)]
        r: u64,
        /// Declared genus; defaults to the genus of the input embedding or of a searched one.
        #[arg(long)]
        genus: Option<u64>,
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Write the contraction trace for later replay.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Trace faces of a rotation system, or search an embedding of a bare graph.
    Genus { graph: PathBuf },
    /// Re-check a saved trace, certificate, transcript or strategy against its graph.
    Replay {
        #[arg(value_enum)]
        kind: ReplayKind,
        /// The saved trace, certificate, transcript or strategy.
        file: PathBuf,
        /// Graph file: graph6, edge list or rotation system; `-` reads stdin.
        graph: PathBuf,
        /// Required for transcripts and strategies.
        #[arg(long)]
        r: Option<usize>,
        /// Tokens per vertex; required for transcripts and strategies.
        #[arg(long)]
        tokens: Option<u32>,
        /// The certificate was produced under the planar girth-7 hypothesis.
        #[arg(long)]
        planar_girth7: bool,
        /// Largest graph the exhaustive mad search accepts.
        #[arg(long, default_value_t = MAD_CAP)]
        cap: usize,
    },
}

struct Input {
    graph: Graph,
    embedding: Option<EmbeddedGraph>,
}

fn read(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn sniff(path: &Path, text: &str) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("g6") => return Format::G6,
        Some("rot") => return Format::Rot,
        Some("edges" | "el" | "txt") => return Format::Edges,
        _ => {}
    }
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if first.starts_with("rot ") {
        Format::Rot
    } else if first.split_whitespace().count() == 1 && !first.chars().all(|c| c.is_ascii_digit()) {
        Format::G6
    } else {
        Format::Edges
    }
}

impl Global {
    fn load(&self, path: &Path) -> Result<Input> {
        let text = read(path)?;
        let format = if self.format == Format::Auto {
            sniff(path, &text)
        } else {
            self.format
        };
        Ok(match format {
            Format::G6 => Input {
                graph: parse_graph6(&text)?,
                embedding: None,
            },
            Format::Edges | Format::Auto => Input {
                graph: parse_edge_list(&text)?,
                embedding: None,
            },
            Format::Rot => {
                let e = EmbeddedGraph::trace(parse_rotation(&text)?)?;
                Input {
                    graph: e.graph().clone(),
                    embedding: Some(e),
                }
            }
        })
    }

    /// The input embedding, or a searched one of smallest genus found when `embed` is set.
    fn embedded(&self, input: &Input, embed: bool) -> Result<EmbeddedGraph> {
        if let Some(e) = &input.embedding {
            return Ok(e.clone());
        }
        if !embed {
            bail!("this subcommand needs a rotation system; pass a .rot file or --embed");
        }
        Ok(search_embedding(&input.graph, &self.search())?)
    }

    fn search(&self) -> SearchOptions {
        SearchOptions {
            seed: self.seed,
            ..SearchOptions::default()
        }
    }

    fn time(&self) -> Option<Duration> {
        self.time_limit.map(Duration::from_secs_f64)
    }

    fn solver(&self) -> SolverBudget {
        let d = SolverBudget::default();
        SolverBudget {
            max_n: self.max_n.unwrap_or(d.max_n),
            max_nodes: self.max_nodes.unwrap_or(d.max_nodes),
            time_limit: self.time(),
        }
    }

    fn game(&self) -> GameBudget {
        let d = GameBudget::default();
        GameBudget {
            max_n: self.max_n.unwrap_or(d.max_n),
            max_nodes: self.max_nodes.unwrap_or(d.max_nodes),
            time_limit: self.time(),
        }
    }

    fn walk(&self) -> ExhaustiveBudget {
        let d = ExhaustiveBudget::default();
        ExhaustiveBudget {
            max_nodes: self.max_nodes.unwrap_or(d.max_nodes),
            time_limit: self.time(),
        }
    }
}

fn json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("output serializes")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn kinds_for(names: &[String], embedded: bool) -> Result<Vec<ConfigKind>> {
    if names.is_empty() {
        return Ok(ConfigKind::TORUS
            .into_iter()
            .filter(|k| embedded || !k.needs_embedding())
            .collect());
    }
    Ok(names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?)
}

fn verdict(ok: bool) -> u8 {
    if ok {
        0
    } else {
        EXIT_FALSE
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<u8> {
    let g = &cli.opts;
    match cli.cmd {
        Cmd::ChiR { r, graph, witness } => {
            let input = g.load(&graph)?;
            let res = chi_r_exact(&input.graph, r, &g.solver())?;
            if g.json {
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({ "r": r, "value": res.value, "nodes": res.nodes, "witness": res.witness })
                )?;
            } else {
                writeln!(out, "{}", res.value)?;
                if witness {
                    write!(out, "{}", emit_coloring(&res.witness))?;
                }
            }
            Ok(0)
        }
        Cmd::Verify { r, coloring, graph } => {
            let input = g.load(&graph)?;
            let c = parse_coloring(&read(&coloring)?, input.graph.n())?;
            let rep = verify_r_dynamic(&input.graph, &c, r)?;
            if g.json {
                writeln!(out, "{}", json(&rep))?;
            } else {
                write!(out, "{rep}")?;
            }
            Ok(verdict(rep.verdict()))
        }
        Cmd::Paint {
            r,
            graph,
            tokens,
            sandwich,
            strategy_out,
        } => {
            let input = g.load(&graph)?;
            let budget = g.game();
            if let Some(k) = tokens {
                let f = TokenAssignment::new(vec![k; input.graph.n()])?;
                let v = solve_xp_r(&input.graph, r, &f, &budget)?;
                let file = match &v {
                    GameVerdict::PainterWins(t) => StrategyFile::from_painter(t),
                    GameVerdict::ListerWins(t) => StrategyFile::from_lister(t),
                };
                writeln!(
                    out,
                    "{} wins with {k} tokens",
                    if v.painter_wins() {
                        "painter"
                    } else {
                        "lister"
                    }
                )?;
                if let Some(p) = strategy_out {
                    write_file(&p, &file.to_json())?;
                }
                return Ok(verdict(v.painter_wins()));
            }
            if sandwich {
                let s = choice_sandwich(&input.graph, r, &budget)?;
                writeln!(out, "chi {} ({:?})", s.chi.value, s.chi.source)?;
                writeln!(out, "ch >= {} ({:?})", s.ch_lower.value, s.ch_lower.source)?;
                writeln!(out, "ch <= {} ({:?})", s.ch_upper.value, s.ch_upper.source)?;
                writeln!(out, "xp in [{}, {}]", s.xp.lower.value, s.xp.upper.value)?;
                return Ok(0);
            }
            let xp = dyncolor::game::xp_r_number(&input.graph, r, &budget);
            writeln!(out, "xp in [{}, {}]", xp.lower.value, xp.upper.value)?;
            writeln!(out, "lower {:?}", xp.lower.source)?;
            writeln!(out, "upper {:?}", xp.upper.source)?;
            Ok(0)
        }
        Cmd::ListCheck {
            r,
            graph,
            lists,
            uniform,
        } => {
            let input = g.load(&graph)?;
            let n = input.graph.n();
            let l = match (lists, uniform) {
                (Some(p), _) => parse_lists(&read(&p)?, n)?,
                (None, Some(k)) if k >= 1 => ListAssignment::uniform(n, k),
                _ => bail!("--uniform needs k >= 1"),
            };
            let budget = SolverBudget {
                max_n: g.max_n.unwrap_or(usize::MAX),
                ..g.solver()
            };
            match is_l_colorable_r_dynamic(&input.graph, &l, r, &budget)? {
                Some(c) => {
                    writeln!(out, "colorable")?;
                    write!(out, "{}", emit_coloring(&c))?;
                    Ok(0)
                }
                None => {
                    writeln!(out, "not colorable")?;
                    Ok(EXIT_FALSE)
                }
            }
        }
        Cmd::FindConfig {
            graph,
            kinds,
            embed,
        } => {
            let input = g.load(&graph)?;
            let emb = if input.embedding.is_some() || embed {
                Some(g.embedded(&input, embed)?)
            } else {
                None
            };
            let host = emb
                .as_ref()
                .map_or(Host::Bare(&input.graph), Host::Embedded);
            let kinds = kinds_for(&kinds, emb.is_some())?;
            let found = find_configs(host, &kinds)?;
            if g.json {
                writeln!(out, "{}", json(&found))?;
            } else {
                for m in &found {
                    writeln!(out, "{m}")?;
                }
            }
            Ok(verdict(!found.is_empty()))
        }
        Cmd::Reduce {
            graph,
            kind,
            index,
            embed,
            check_extend,
            check_budget: budget,
            inner_tokens,
            outer_tokens,
        } => {
            let input = g.load(&graph)?;
            let kind: ConfigKind = kind.parse()?;
            let emb = if input.embedding.is_some() || embed {
                Some(g.embedded(&input, embed)?)
            } else {
                None
            };
            let host = emb
                .as_ref()
                .map_or(Host::Bare(&input.graph), Host::Embedded);
            let found = find_configs(host, &[kind])?;
            let m = found.get(index).ok_or_else(|| {
                anyhow!("{kind} has {} occurrences, no index {index}", found.len())
            })?;
            let red = build_reduction(host, m)?;
            write!(out, "{red}")?;
            let mut ok = red.within_budget();
            if check_extend {
                let eb = ExtendBudget {
                    max_n: g.max_n.unwrap_or(ExtendBudget::default().max_n),
                    max_nodes: g.max_nodes.unwrap_or(ExtendBudget::default().max_nodes),
                };
                let rep = check_extendable(&input.graph, &red, &eb)?;
                writeln!(
                    out,
                    "extendable {} colorings {}",
                    rep.extendable, rep.colorings
                )?;
                if let Some(c) = &rep.counterexample {
                    write!(out, "counterexample\n{}", emit_coloring(c))?;
                }
                ok &= rep.extendable;
            }
            if budget {
                let opts = BudgetOptions {
                    inner_tokens,
                    outer_tokens,
                    game: g.game(),
                    walk: g.walk(),
                };
                let rep = check_budget(&input.graph, &red, &opts)?;
                writeln!(out, "budget verdict {} states {}", rep.verdict, rep.states)?;
                for a in &rep.audits {
                    writeln!(
                        out,
                        "vertex {} rejections {} budget {}",
                        a.vertex, a.max_rejections, a.budget
                    )?;
                }
                if let Some(t) = &rep.losing_line {
                    write!(out, "losing line\n{t}")?;
                }
                ok &= rep.verdict;
            }
            Ok(verdict(ok))
        }
        Cmd::Discharge {
            graph,
            embed,
            report,
        } => {
            let input = g.load(&graph)?;
            let emb = g.embedded(&input, embed)?;
            let ledger = discharge(&emb)?;
            if g.json {
                writeln!(out, "{}", ledger.to_json())?;
            } else if report {
                write!(out, "{}", final_report(&ledger, &emb))?;
            } else {
                write!(out, "{}", ledger.to_table())?;
            }
            let balanced = ledger.is_balanced();
            let euler = dyncolor::discharge::Charge::whole(-6 * emb.euler_characteristic());
            if !g.json {
                writeln!(
                    out,
                    "genus {} conservation {}",
                    emb.genus(),
                    if balanced { "ok" } else { "broken" }
                )?;
            }
            Ok(verdict(balanced && ledger.total_initial() == euler))
        }
        Cmd::Unavoidable { graph, embed } => {
            let input = g.load(&graph)?;
            let emb = g.embedded(&input, embed)?;
            match unavoidability_driver(&emb)? {
                DriverOutcome::ConfigFound(m) => {
                    writeln!(out, "config {m}")?;
                    Ok(0)
                }
                DriverOutcome::DischargeContradiction(c) => {
                    writeln!(out, "no configuration found")?;
                    writeln!(out, "total {}", c.ledger.total_final())?;
                    let neg: Vec<String> = c.negative.iter().map(|e| e.to_string()).collect();
                    writeln!(out, "negative {}", neg.join(" "))?;
                    writeln!(
                        out,
                        "four-regular {} all-faces-five {}",
                        c.four_regular, c.all_faces_five
                    )?;
                    if c.is_soundness_alarm() {
                        writeln!(out, "alarm: every final charge is non-negative")?;
                    }
                    write!(out, "{}", c.report)?;
                    Ok(EXIT_FALSE)
                }
            }
        }
        Cmd::Bound { r, genus, graph } => {
            let (genus, input) = match (genus, graph) {
                (Some(gen), p) => (gen, p.map(|p| g.load(&p)).transpose()?),
                (None, Some(p)) => {
                    let input = g.load(&p)?;
                    let emb = g.embedded(&input, true)?;
                    (emb.genus() as u64, Some(input))
                }
                (None, None) => bail!("give --genus or a graph"),
            };
            let p = bound_profile(genus, r);
            if g.json {
                writeln!(out, "{}", json(&p))?;
            } else {
                write!(out, "{p}")?;
            }
            if let Some(input) = input {
                let e = find_light_edge(&input.graph, p.omega);
                match (e.edge, e.weight) {
                    (Some((a, b)), Some(w)) => writeln!(out, "light edge {a} {b} weight {w}")?,
                    _ => writeln!(
                        out,
                        "light edge none{}",
                        if e.ivanco_violation {
                            " (genus too small)"
                        } else {
                            ""
                        }
                    )?,
                }
            }
            Ok(0)
        }
        Cmd::Mad { graph, cap } => {
            let input = g.load(&graph)?;
            let m = mad_with_cap(&input.graph, cap)?;
            writeln!(out, "{m}")?;
            Ok(0)
        }
        Cmd::KpCheck {
            graph,
            planar_girth7,
            cap,
            cert_out,
        } => {
            let input = g.load(&graph)?;
            let opts = KpOptions {
                mad_cap: cap,
                planar_girth7,
            };
            match kp_pipeline(&input.graph, &opts) {
                Ok(cert) => {
                    write!(out, "{cert}")?;
                    if let Some(p) = cert_out {
                        write_file(&p, &cert.to_string())?;
                    }
                    Ok(0)
                }
                Err(e @ BoundsError::TooLargeForExhaustive { .. }) => Err(e.into()),
                Err(e) => {
                    writeln!(out, "rejected: {e}")?;
                    Ok(EXIT_FALSE)
                }
            }
        }
        Cmd::ContractColor {
            r,
            genus,
            graph,
            trace_out,
        } => {
            let input = g.load(&graph)?;
            let genus = match genus {
                Some(x) => x,
                None => g.embedded(&input, true)?.genus() as u64,
            };
            let rep = color_by_contraction(&input.graph, r, genus)?;
            writeln!(out, "colors {} bound {}", rep.colors_used, rep.ell)?;
            write!(out, "{}", emit_coloring(&rep.coloring))?;
            if let Some(p) = trace_out {
                write_file(&p, &rep.trace.to_string())?;
            }
            Ok(0)
        }
        Cmd::Genus { graph } => {
            let input = g.load(&graph)?;
            let searched = input.embedding.is_none();
            let emb = g.embedded(&input, true)?;
            writeln!(
                out,
                "genus {}{}",
                emb.genus(),
                if searched { " (best found)" } else { "" }
            )?;
            writeln!(out, "faces {}", emb.faces().len())?;
            for (i, f) in emb.faces().iter().enumerate() {
                let vs: Vec<String> = f.vertices().map(|v| v.to_string()).collect();
                writeln!(out, "face {i}: {}", vs.join(" "))?;
            }
            if searched {
                write!(out, "{}", emb.rotation())?;
            }
            Ok(0)
        }
        Cmd::Replay {
            kind,
            file,
            graph,
            r,
            tokens,
            planar_girth7,
            cap,
        } => {
            let input = g.load(&graph)?;
            let text = read(&file)?;
            let need_game = || -> Result<(usize, TokenAssignment)> {
                let (Some(r), Some(k)) = (r, tokens) else {
                    bail!("this replay needs --r and --tokens")
                };
                Ok((r, TokenAssignment::new(vec![k; input.graph.n()])?))
            };
            match kind {
                ReplayKind::Contraction => {
                    let trace = parse_contraction_trace(&text)?;
                    let ok = match replay_contraction(&input.graph, &trace) {
                        Ok(rep) => {
                            writeln!(out, "valid; colors {}", rep.colors_used)?;
                            true
                        }
                        Err(e) => {
                            writeln!(out, "invalid: {e}")?;
                            false
                        }
                    };
                    Ok(verdict(ok))
                }
                ReplayKind::Kp => {
                    let cert = parse_kp_certificate(&text)?;
                    let opts = KpOptions {
                        mad_cap: cap,
                        planar_girth7,
                    };
                    match replay_kp_certificate(&input.graph, &cert, &opts) {
                        Ok(()) => {
                            writeln!(
                                out,
                                "valid; {} steps, {} residues",
                                cert.steps.len(),
                                cert.residues.len()
                            )?;
                            Ok(0)
                        }
                        Err(e) => {
                            writeln!(out, "invalid: {e}")?;
                            Ok(EXIT_FALSE)
                        }
                    }
                }
                ReplayKind::Transcript => {
                    let (r, f) = need_game()?;
                    let t = parse_transcript(&text)?;
                    match t.replay(&input.graph, &f) {
                        Ok(state) => {
                            let o = state.outcome(&input.graph, r);
                            writeln!(out, "valid; outcome {o:?}")?;
                            Ok(verdict(o == Outcome::Finished { r_dynamic: true }))
                        }
                        Err(e) => {
                            writeln!(out, "invalid: {e}")?;
                            Ok(EXIT_FALSE)
                        }
                    }
                }
                ReplayKind::Strategy => {
                    let (r, f) = need_game()?;
                    let file = StrategyFile::parse(&text)?;
                    let table = file
                        .painter_table()
                        .ok_or_else(|| anyhow!("only painter strategies can be replayed"))?;
                    if file.n != input.graph.n() {
                        bail!(
                            "strategy is for {} vertices, graph has {}",
                            file.n,
                            input.graph.n()
                        );
                    }
                    let rep = exhaustive_lister(&input.graph, r, &f, &table, &g.walk())?;
                    writeln!(out, "states {} losses {}", rep.states, rep.losses)?;
                    if let Some(t) = &rep.losing_line {
                        write!(out, "losing line\n{t}")?;
                    }
                    Ok(verdict(rep.painter_survives()))
                }
            }
        }
    }
}

/// Budget exhaustion is distinguished from every other failure.
fn exit_code(e: &anyhow::Error) -> u8 {
    let budget = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<ColoringError>(),
            Some(ColoringError::BudgetExceeded { .. } | ColoringError::TooLarge { .. })
        ) || matches!(
            c.downcast_ref::<GameError>(),
            Some(GameError::BudgetExceeded | GameError::TooLarge { .. })
        ) || matches!(
            c.downcast_ref::<ConfigError>(),
            Some(ConfigError::BudgetExceeded { .. } | ConfigError::TooLarge { .. })
        ) || matches!(
            c.downcast_ref::<BoundsError>(),
            Some(BoundsError::TooLargeForExhaustive { .. })
        ) || matches!(
            c.downcast_ref::<DischargeError>(),
            Some(DischargeError::Config(ConfigError::BudgetExceeded { .. }))
        )
    });
    if budget {
        EXIT_BUDGET
    } else {
        EXIT_USAGE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(j) = cli.opts.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
