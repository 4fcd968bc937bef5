use std::path::{Path, PathBuf};
use std::process::Command;

use dyncolor::bounds::{color_by_contraction, parse_contraction_trace, parse_kp_certificate};
use dyncolor::coloring::{emit_coloring, PartialColoring};
use dyncolor::discharge::ChargeLedger;
use dyncolor::format::{emit_edge_list, emit_graph6};
use dyncolor::game::{play_game, RainbowPainter, RandomLister, StrategyFile, TokenAssignment};
use dyncolor::generators::{cycle, path, petersen, random_tree, subdivided_k4, torus_grid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn dyncolor(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_dyncolor"))
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn chi_r_of_petersen_and_subdivided_k4() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "petersen.g6", &emit_graph6(&petersen()));
    let run = dyncolor(&["chi-r", "--r", "3", s(&p)]);
    assert_eq!((run.code, run.stdout.trim()), (0, "10"));
    let k = put(&dir, "k.edges", &emit_edge_list(&subdivided_k4()));
    let run = dyncolor(&["chi-r", "--r", "3", "--witness", s(&k)]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout.lines().next(), Some("7"));
    assert_eq!(run.stdout.lines().count(), 1 + subdivided_k4().n());
    let run = dyncolor(&["--json", "chi-r", "--r", "3", s(&p)]);
    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(v["value"], 10);
}

#[test]
fn verify_accepts_rainbow_and_rejects_improper() {
    let dir = TempDir::new().unwrap();
    let g = put(&dir, "c5.g6", &emit_graph6(&cycle(5)));
    let good = put(
        &dir,
        "good.txt",
        &emit_coloring(&PartialColoring::rainbow(5)),
    );
    assert_eq!(
        dyncolor(&["verify", "--r", "3", "--coloring", s(&good), s(&g)]).code,
        0
    );
    let bad = put(
        &dir,
        "bad.txt",
        &emit_coloring(&PartialColoring::from_colors(vec![1, 1, 2, 1, 2])),
    );
    let run = dyncolor(&["verify", "--r", "2", "--coloring", s(&bad), s(&g)]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.contains("verdict false"));
}

#[test]
fn discharge_on_the_torus_grid_balances_to_zero() {
    let dir = TempDir::new().unwrap();
    let p = put(
        &dir,
        "grid3x3.rot",
        &torus_grid(3, 3).rotation().to_string(),
    );
    let run = dyncolor(&["discharge", s(&p)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("total\t0\t\t\t0"));
    assert!(run
        .stdout
        .lines()
        .filter(|l| l.starts_with('v') || l.starts_with('f'))
        .all(|l| l.split('\t').nth(4) == Some("0")));
    let run = dyncolor(&["--json", "discharge", s(&p)]);
    let ledger: ChargeLedger = serde_json::from_str(&run.stdout).unwrap();
    assert!(ledger.is_balanced());
    let run = dyncolor(&["discharge", "--report", s(&p)]);
    assert!(run.stdout.contains("degree 4 | low nbrs 0"));
}

#[test]
fn unavoidable_and_find_config() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "grid.rot", &torus_grid(3, 3).rotation().to_string());
    let run = dyncolor(&["unavoidable", s(&p)]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.starts_with("config light-triangle"));
    let run = dyncolor(&["find-config", "--kinds", "all4s-quad-face", s(&p)]);
    assert_eq!((run.code, run.stdout.lines().count()), (0, 9));
    let bare = put(&dir, "c6.g6", &emit_graph6(&cycle(6)));
    let run = dyncolor(&["find-config", "--kinds", "all4s-quad-face", s(&bare)]);
    assert_eq!(run.code, 2);
    let run = dyncolor(&["find-config", "--kinds", "light-triangle", s(&bare)]);
    assert_eq!(run.code, 1);
    let run = dyncolor(&["find-config", s(&bare)]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.starts_with("deg2-minus"));
}

#[test]
fn reduce_checks_a_pendant() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "p3.g6", &emit_graph6(&path(3)));
    let run = dyncolor(&[
        "reduce",
        "--kind",
        "deg2-minus",
        "--check-extend",
        "--check-budget",
        "--inner-tokens",
        "4",
        s(&p),
    ]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert!(run.stdout.contains("extendable true"));
    assert!(run.stdout.contains("budget verdict true"));
    let run = dyncolor(&["reduce", "--kind", "deg2-minus", "--index", "99", s(&p)]);
    assert_eq!(run.code, 2);
}

#[test]
fn paint_list_check_and_sandwich() {
    let dir = TempDir::new().unwrap();
    let c5 = put(&dir, "c5.g6", &emit_graph6(&cycle(5)));
    let strat = dir.path().join("s.json");
    let run = dyncolor(&[
        "paint",
        "--r",
        "1",
        "--tokens",
        "3",
        "--strategy-out",
        s(&strat),
        s(&c5),
    ]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.starts_with("painter wins"));
    assert_eq!(
        dyncolor(&["paint", "--r", "1", "--tokens", "2", s(&c5)]).code,
        1
    );
    let run = dyncolor(&[
        "replay",
        "strategy",
        s(&strat),
        s(&c5),
        "--r",
        "1",
        "--tokens",
        "3",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("losses 0"));
    StrategyFile::parse(&std::fs::read_to_string(&strat).unwrap()).unwrap();
    let run = dyncolor(&["list-check", "--r", "2", "--uniform", "4", s(&c5)]);
    assert_eq!((run.code, run.stdout.trim()), (1, "not colorable"));
    assert_eq!(
        dyncolor(&["list-check", "--r", "2", "--uniform", "5", s(&c5)]).code,
        0
    );
    let lists = put(&dir, "l.txt", "0: 1 2\n1: 2 3\n2: 1 3\n3: 1 2\n4: 2 3\n");
    assert_eq!(
        dyncolor(&["list-check", "--r", "1", "--lists", s(&lists), s(&c5)]).code,
        0
    );
    let run = dyncolor(&["paint", "--r", "2", "--sandwich", s(&c5)]);
    assert!(run.stdout.contains("ch >= 5"));
    let run = dyncolor(&["paint", "--r", "1", s(&c5)]);
    assert!(run.stdout.starts_with("xp in [3, 3]"));
}

#[test]
fn bounds_mad_and_kp() {
    let dir = TempDir::new().unwrap();
    let run = dyncolor(&["bound", "--r", "11", "--genus", "0"]);
    assert!(run.stdout.contains("ell 63"));
    let run = dyncolor(&["--json", "bound", "--r", "7", "--genus", "1"]);
    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(v["heawood"], 7);
    assert_eq!(dyncolor(&["bound", "--r", "3"]).code, 2);
    let c5 = put(&dir, "c5.g6", &emit_graph6(&cycle(5)));
    assert_eq!(dyncolor(&["mad", s(&c5)]).stdout.trim(), "2");
    let run = dyncolor(&["kp-check", s(&c5)]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.contains("C5"));
    let t = random_tree(12, &mut ChaCha8Rng::seed_from_u64(5));
    let tp = put(&dir, "t.edges", &emit_edge_list(&t));
    let cert = dir.path().join("t.cert");
    let run = dyncolor(&["kp-check", "--cert-out", s(&cert), s(&tp)]);
    assert_eq!(run.code, 0);
    let text = std::fs::read_to_string(&cert).unwrap();
    parse_kp_certificate(&text).unwrap();
    assert_eq!(dyncolor(&["replay", "kp", s(&cert), s(&tp)]).code, 0);
    let tampered = put(&dir, "bad.cert", &text.replacen("budgets", "budgets 1", 1));
    assert_ne!(dyncolor(&["replay", "kp", s(&tampered), s(&tp)]).code, 0);
    let big = put(&dir, "c30.g6", &emit_graph6(&cycle(30)));
    assert_eq!(dyncolor(&["mad", s(&big)]).code, 3);
}

#[test]
fn contraction_coloring_and_replay() {
    let dir = TempDir::new().unwrap();
    let g = petersen();
    let p = put(&dir, "p.g6", &emit_graph6(&g));
    let trace = dir.path().join("p.trace");
    let run = dyncolor(&[
        "contract-color",
        "--r",
        "13",
        "--genus",
        "1",
        "--trace-out",
        s(&trace),
        s(&p),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let want = color_by_contraction(&g, 13, 1).unwrap();
    assert_eq!(
        parse_contraction_trace(&std::fs::read_to_string(&trace).unwrap()).unwrap(),
        want.trace
    );
    assert_eq!(
        dyncolor(&["replay", "contraction", s(&trace), s(&p)]).code,
        0
    );
    assert_eq!(
        dyncolor(&["contract-color", "--r", "11", "--genus", "1", s(&p)]).code,
        2
    );
}

#[test]
fn genus_and_transcript_replay() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "p.g6", &emit_graph6(&petersen()));
    let run = dyncolor(&["genus", s(&p)]);
    assert!(run.stdout.starts_with("genus 1 (best found)"));
    let rot = run
        .stdout
        .lines()
        .skip_while(|l| !l.starts_with("rot "))
        .collect::<Vec<_>>()
        .join("\n");
    let rp = put(&dir, "p.rot", &rot);
    assert!(dyncolor(&["genus", s(&rp)]).stdout.starts_with("genus 1\n"));
    let c4 = cycle(4);
    let f = TokenAssignment::uniform(4, 3);
    let rec = play_game(&c4, 2, &f, &RainbowPainter, &mut RandomLister::new(1)).unwrap();
    let g = put(&dir, "c4.g6", &emit_graph6(&c4));
    let t = put(&dir, "c4.log", &rec.transcript.to_string());
    let run = dyncolor(&[
        "replay",
        "transcript",
        s(&t),
        s(&g),
        "--r",
        "2",
        "--tokens",
        "3",
    ]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert_eq!(dyncolor(&["replay", "transcript", s(&t), s(&g)]).code, 2);
}

#[test]
fn usage_and_budget_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(dyncolor(&["no-such-command"]).code, 2);
    assert_eq!(dyncolor(&["chi-r", "missing.g6"]).code, 2);
    let bad = put(&dir, "bad.g6", "~~~~");
    assert_eq!(dyncolor(&["chi-r", "--r", "2", s(&bad)]).code, 2);
    let p = put(&dir, "p.g6", &emit_graph6(&petersen()));
    let run = dyncolor(&["--max-nodes", "5", "chi-r", "--r", "3", s(&p)]);
    assert_eq!(run.code, 3, "{}", run.stderr);
    assert_eq!(dyncolor(&["--jobs", "0", "mad", s(&p)]).code, 2);
    let run = Command::new(env!("CARGO_BIN_EXE_dyncolor"))
        .args(["mad", s(&p)])
        .env("DYNCOLOR_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(run.stdout).unwrap().trim(), "3");
}

#[test]
fn output_is_identical_across_job_counts() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "grid.rot", &torus_grid(4, 3).rotation().to_string());
    let one = dyncolor(&["--jobs", "1", "discharge", s(&p)]).stdout;
    let four = dyncolor(&["--jobs", "4", "discharge", s(&p)]).stdout;
    assert_eq!(one, four);
}
