use std::collections::BTreeMap;

use dyncolor::configs::{find_configs, ConfigKind, Host};
use dyncolor::discharge::{
    apply_rules, discharge, final_report, initial_charges, unavoidability_driver, Charge,
    ChargeLedger, DischargeError, DriverOutcome, Element, FaceClass, Rule, Sign, VertexCase,
};
use dyncolor::embedding::{search_embedding, SearchOptions};
use dyncolor::generators::{
    complete, connected_graphs, fan_gadget, k4_embedding, k7_torus, petersen, random_planar,
    random_tree, torus_grid, Sector,
};
use dyncolor::{EmbeddedGraph, Graph, RotationSystem};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(num: i64, den: i64) -> Charge {
    Charge(num * 4 / den)
}

fn on_torus(g: &Graph) -> EmbeddedGraph {
    let e = search_embedding(
        g,
        &SearchOptions {
            target_genus: Some(1),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(e.genus(), 1);
    e
}

/// Quarters each boundary position pays, read straight off the rule statements.
fn oracle_takes(deg: &[usize]) -> Vec<i64> {
    let l = deg.len();
    let three = |d: usize| d <= 3;
    let threes = deg.iter().filter(|&&d| three(d)).count();
    let fours = deg.iter().filter(|&&d| d == 4).count();
    (0..l)
        .map(|i| {
            let d = deg[i];
            match l {
                3 if threes > 0 => [0, 6][(d >= 5) as usize],
                3 if fours > 0 => match d {
                    4 => 2,
                    _ => 5,
                },
                3 => 4,
                4 if threes >= 2 => [0, 4][(d >= 6) as usize],
                4 if threes == 1 => {
                    let t = (0..4).find(|&j| three(deg[j])).unwrap();
                    if i == t {
                        0
                    } else if (i + 4 - t) % 4 == 2 {
                        2
                    } else {
                        3
                    }
                }
                4 => 2,
                5 if threes >= 2 => {
                    let common = three(deg[(i + 1) % 5]) && three(deg[(i + 4) % 5]);
                    if three(d) {
                        0
                    } else if common {
                        2
                    } else {
                        1
                    }
                }
                5 => [0, 1][(d >= 4) as usize],
                l if l >= 6 => [0, 1][(d >= 4) as usize],
                _ => 0,
            }
        })
        .collect()
}

fn random_embedding(rng: &mut ChaCha8Rng) -> EmbeddedGraph {
    let n = rng.gen_range(1..14);
    let t = random_tree(n, rng);
    let mut edges: Vec<(usize, usize)> = t.edges().collect();
    for _ in 0..rng.gen_range(0..3 * n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
            edges.push((a, b));
        }
    }
    let g = Graph::from_edges(n, &edges).unwrap();
    let rot = g
        .vertices()
        .map(|v| {
            let mut ring = g.neighbors(v).to_vec();
            ring.shuffle(rng);
            ring
        })
        .collect();
    EmbeddedGraph::trace(RotationSystem::new(g, rot).unwrap()).unwrap()
}

fn euler_total(e: &EmbeddedGraph) -> Charge {
    Charge::whole(-6 * (2 - 2 * e.genus() as i64))
}

fn check_against_oracle(e: &EmbeddedGraph, ledger: &ChargeLedger) {
    let mut got: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for t in &ledger.transfers {
        *got.entry((t.face, t.from)).or_default() += t.amount.quarters();
    }
    let mut want: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for (f, face) in e.faces().iter().enumerate() {
        let vs: Vec<usize> = face.vertices().collect();
        let deg: Vec<usize> = vs.iter().map(|&v| e.graph().degree(v)).collect();
        for (v, x) in vs.iter().zip(oracle_takes(&deg)) {
            if x > 0 {
                *want.entry((f, *v)).or_default() += x;
            }
        }
    }
    assert_eq!(got, want);
}

#[test]
fn charges_print_and_parse_as_exact_fractions() {
    for (c, s) in [
        (Charge(6), "3/2"),
        (Charge(-4), "-1"),
        (Charge(5), "5/4"),
        (Charge(2), "1/2"),
        (Charge(0), "0"),
    ] {
        assert_eq!(c.to_string(), s);
        assert_eq!(s.parse::<Charge>().unwrap(), c);
    }
    assert!("1/3".parse::<Charge>().is_err());
    assert!("x".parse::<Charge>().is_err());
    assert_eq!("6/4".parse::<Charge>().unwrap(), Charge(6));
}

#[test]
fn initial_charges_follow_degree_and_length() {
    let e = k4_embedding();
    let l = initial_charges(&e);
    assert!(l.vertex_initial.iter().all(|&c| c == Charge::ZERO));
    assert!(l.face_initial.iter().all(|&c| c == Charge::whole(-3)));
    assert_eq!(l.total_initial(), Charge::whole(-12));
    let grid = torus_grid(3, 3);
    assert_eq!(initial_charges(&grid).total_initial(), Charge::ZERO);
    let c5 = dyncolor::generators::cycle_embedding(5);
    let l = initial_charges(&c5);
    assert!(l.face_initial.iter().all(|&c| c == Charge::whole(-1)));
}

#[test]
fn torus_grid_discharges_to_all_zero() {
    let grid = torus_grid(3, 3);
    let l = discharge(&grid).unwrap();
    assert!(l.face_rule.iter().all(|&r| r == Some(Rule::R6)));
    assert!(l
        .vertex_final
        .iter()
        .chain(&l.face_final)
        .all(|&c| c == Charge::ZERO));
    assert_eq!(l.total_final(), Charge::ZERO);
    let table = l.to_table();
    assert!(table.lines().last().unwrap().starts_with("total\t0"));
    let report = final_report(&l, &grid);
    assert!(report
        .vertices
        .iter()
        .all(|v| v.sign == Sign::Zero && v.case.degree == 4));
}

#[test]
fn planar_k4_keeps_its_negative_total() {
    let e = k4_embedding();
    let l = discharge(&e).unwrap();
    assert_eq!(l.total_final(), Charge::whole(-12));
    assert!(l.transfers.is_empty());
    assert!(l.face_rule.iter().all(|&r| r == Some(Rule::R1)));
}

#[test]
fn ledger_json_round_trips() {
    let e = k7_torus();
    let l = discharge(&e).unwrap();
    let back: ChargeLedger = serde_json::from_str(&l.to_json()).unwrap();
    assert_eq!(back, l);
    assert!(back.is_balanced());
    let mut bad = back;
    bad.vertex_final[0] = bad.vertex_final[0] + Charge(1);
    assert!(!bad.is_balanced());
}

#[test]
fn every_face_census_has_exactly_one_rule() {
    for len in 3..=7usize {
        let mut deg = vec![1usize; len];
        loop {
            let class = FaceClass::from_degrees(deg.clone());
            assert_eq!(Rule::claims(&class).len(), 1, "{deg:?}");
            let Some(i) = (0..len).find(|&i| deg[i] < 7) else {
                break;
            };
            deg[i] += 1;
            deg[..i].fill(1);
        }
    }
    assert!(Rule::claims(&FaceClass::from_degrees(vec![1, 1])).is_empty());
}

#[test]
fn rules_are_total_and_conserve_charge_on_random_embeddings() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut genera = [0usize; 8];
    for _ in 0..1000 {
        let e = random_embedding(&mut rng);
        genera[e.genus().min(7)] += 1;
        let l = discharge(&e).unwrap();
        assert_eq!(l.total_initial(), euler_total(&e));
        assert_eq!(l.total_final(), l.total_initial());
        assert!(l.is_balanced());
        for (f, face) in e.faces().iter().enumerate() {
            assert_eq!(l.face_rule[f].is_some(), face.len() >= 3);
        }
        check_against_oracle(&e, &l);
    }
    assert!(genera[0] > 0 && genera[1] > 0 && genera[2] > 0);
}

#[test]
fn mismatched_ledger_is_refused() {
    let l = initial_charges(&k4_embedding());
    assert_eq!(
        apply_rules(&l, &torus_grid(3, 3)).unwrap_err(),
        DischargeError::Mismatch
    );
}

/// Final charge and local picture of the gadget center.
fn center(e: &EmbeddedGraph) -> (Charge, VertexCase) {
    assert_eq!(e.genus(), 0);
    let l = discharge(e).unwrap();
    assert!(l.is_balanced());
    check_against_oracle(e, &l);
    (l.vertex_final[0], VertexCase::of(e, 0))
}

use Sector::{Pent, Quad, Tri};

#[test]
fn degree_five_low_neighbor_on_expensive_triangle() {
    let e = fan_gadget(&[3, 5, 4, 4, 4], &[Tri, Quad, Quad, Quad, Quad]);
    let (fin, case) = center(&e);
    assert_eq!((case.degree, case.low_neighbors, case.expensive), (5, 1, 1));
    let bound = q(4, 1) - q(3, 2) - q(3, 4) - q(1, 2) * 3;
    assert_eq!(bound, q(1, 4));
    assert_eq!(fin, bound);
    let l = discharge(&e).unwrap();
    let tri = e
        .corner_faces(0)
        .into_iter()
        .find(|&f| e.face(f).len() == 3)
        .unwrap();
    assert_eq!(
        FaceClass::of(&e, tri)
            .degrees
            .iter()
            .filter(|&&d| d == 3)
            .count(),
        1
    );
    assert_eq!(l.face_final[tri], Charge::ZERO);
    let report = final_report(&l, &e);
    for f in &report.faces {
        match f.class.len {
            3..=5 => assert_ne!(f.sign, Sign::Negative, "face {}", f.face),
            _ => assert_eq!(f.sign, Sign::Positive),
        }
    }
}

#[test]
fn degree_five_low_neighbor_with_triangle_elsewhere() {
    let e = fan_gadget(&[3, 5, 4, 5, 5], &[Quad, Quad, Tri, Quad, Quad]);
    let (fin, case) = center(&e);
    assert_eq!((case.low_neighbors, case.costly), (1, 1));
    let bound = q(4, 1) - q(3, 4) * 2 - q(5, 4) - q(1, 2) * 2;
    assert_eq!(fin, bound);
    assert!(fin > Charge::ZERO);
}

#[test]
fn degree_five_all_low_neighbors_on_pentagons() {
    let e = fan_gadget(&[3; 5], &[Pent; 5]);
    let (fin, case) = center(&e);
    assert_eq!((case.low_neighbors, case.triangles), (5, 0));
    let bound = q(4, 1) - q(1, 2) * 5;
    assert_eq!(fin, bound);
    assert_eq!(fin, q(3, 2));
}

#[test]
fn degree_six_four_triangles_no_low_neighbors() {
    let e = fan_gadget(&[5; 6], &[Tri, Tri, Tri, Tri, Quad, Quad]);
    let (fin, case) = center(&e);
    assert_eq!(
        (case.triangles, case.triangle_runs, case.low_neighbors),
        (4, 1, 0)
    );
    let bound = q(6, 1) - q(1, 1) * 4 - q(1, 2) * 2;
    assert_eq!(fin, bound);
    assert!(fin > Charge::ZERO);
}

#[test]
fn degree_six_low_neighbor_on_expensive_triangle() {
    let e = fan_gadget(&[3, 5, 4, 4, 4, 4], &[Tri, Quad, Quad, Quad, Quad, Quad]);
    let (fin, _) = center(&e);
    let bound = q(6, 1) - q(3, 2) - q(3, 4) - q(1, 2) * 4;
    assert_eq!(fin, bound);
    assert_eq!(fin, q(7, 4));
}

#[test]
fn degree_seven_four_costly_triangles() {
    let e = fan_gadget(
        &[4, 5, 4, 4, 5, 4, 5],
        &[Tri, Tri, Quad, Tri, Tri, Quad, Quad],
    );
    let (fin, case) = center(&e);
    assert_eq!(
        (case.costly, case.triangle_runs, case.low_neighbors),
        (4, 2, 0)
    );
    let bound = q(8, 1) - q(5, 4) * 4 - q(1, 1) * 2 - q(1, 2);
    assert!(fin >= bound && bound > Charge::ZERO, "{fin} vs {bound}");
}

#[test]
fn degree_seven_one_low_neighbor_three_triangles_beyond_it() {
    let e = fan_gadget(
        &[3, 5, 4, 5, 5, 4, 4],
        &[Tri, Tri, Tri, Tri, Quad, Quad, Quad],
    );
    let (fin, case) = center(&e);
    assert_eq!((case.low_neighbors, case.costly, case.expensive), (1, 2, 1));
    let bound = q(8, 1) - q(3, 2) - q(3, 4) - q(5, 4) * 2 - q(1, 1) * 2;
    assert_eq!(fin, bound);
    // With a third costly triangle the same count reaches exactly zero.
    assert_eq!(
        q(8, 1) - q(3, 2) - q(3, 4) - q(5, 4) * 3 - q(1, 1) * 2,
        Charge::ZERO
    );
}

#[test]
fn degree_seven_three_low_neighbors() {
    let e = fan_gadget(
        &[3, 5, 3, 5, 3, 4, 5],
        &[Quad, Quad, Quad, Quad, Quad, Tri, Quad],
    );
    let (fin, case) = center(&e);
    assert_eq!((case.low_neighbors, case.costly, case.expensive), (3, 1, 0));
    let bound = q(8, 1) - q(5, 4) * 2 - q(1, 1) * 5;
    assert!(fin >= bound && bound > Charge::ZERO);
    assert_eq!(fin, q(9, 4));
}

#[test]
fn degree_eight_four_expensive_triangles() {
    let e = fan_gadget(
        &[3, 6, 3, 6, 3, 6, 5, 5],
        &[Tri, Tri, Quad, Tri, Tri, Quad, Pent, Quad],
    );
    let (fin, case) = center(&e);
    assert_eq!(
        (case.triangles, case.expensive, case.triangle_runs),
        (4, 4, 2)
    );
    let bound = q(10, 1) - q(3, 2) * 4 - q(3, 4) - q(1, 1) * 3;
    assert!(fin >= bound && bound > Charge::ZERO);
    assert_eq!(fin, q(7, 4));
}

#[test]
fn degree_eight_two_runs_ending_in_expensive_triangles() {
    let e = fan_gadget(
        &[3, 6, 6, 3, 3, 6, 3, 5],
        &[Tri, Tri, Tri, Quad, Tri, Tri, Quad, Quad],
    );
    let (fin, case) = center(&e);
    assert_eq!(
        (case.triangles, case.triangle_runs, case.low_neighbors),
        (5, 2, 4)
    );
    let bound = q(10, 1) - q(3, 2) * 4 - q(3, 4) - q(1, 1) * 3;
    assert!(fin >= bound && bound > Charge::ZERO);
    assert_eq!(fin, q(1, 2));
}

#[test]
fn driver_finds_the_expected_configurations() {
    let first = |e: &EmbeddedGraph| match unavoidability_driver(e).unwrap() {
        DriverOutcome::ConfigFound(m) => m.kind,
        DriverOutcome::DischargeContradiction(c) => panic!("no configuration: {:?}", c.negative),
    };
    assert_eq!(first(&on_torus(&petersen())), ConfigKind::Adjacent3s);
    assert_eq!(first(&on_torus(&complete(5))), ConfigKind::LightTriangle);
    // The grid's rows are non-facial triangles of 4-vertices, found before its quadrilaterals.
    let grid = torus_grid(3, 3);
    assert_eq!(first(&grid), ConfigKind::LightTriangle);
    let quads = find_configs(Host::Embedded(&grid), &[ConfigKind::All4sQuadFace]).unwrap();
    assert_eq!(quads.len(), 9);
    let high = EmbeddedGraph::trace(RotationSystem::sorted(complete(8))).unwrap();
    assert!(high.genus() > 1);
    assert!(matches!(
        unavoidability_driver(&high),
        Err(DischargeError::GenusTooLarge { .. })
    ));
}

#[test]
fn driver_finds_a_configuration_on_small_toroidal_graphs() {
    let opts = SearchOptions {
        target_genus: Some(1),
        ..Default::default()
    };
    for n in 1..=6 {
        for g in connected_graphs(n) {
            let e = search_embedding(&g, &opts).unwrap();
            if e.genus() <= 1 {
                assert!(
                    matches!(
                        unavoidability_driver(&e).unwrap(),
                        DriverOutcome::ConfigFound(_)
                    ),
                    "{g:?}"
                );
                let l = discharge(&e).unwrap();
                assert_eq!(l.total_final(), euler_total(&e));
            }
        }
    }
}

#[test]
fn report_lists_negative_elements() {
    let e = k4_embedding();
    let l = discharge(&e).unwrap();
    let report = final_report(&l, &e);
    assert_eq!(
        report.negative(),
        (0..4).map(Element::Face).collect::<Vec<_>>()
    );
    assert!(report.to_string().contains("f0\t-3\tnegative\tR1"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conservation_on_random_planar_graphs(seed in any::<u64>(), n in 4usize..40, tri in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_planar(n, 3, tri, &mut rng);
        let l = discharge(&e).unwrap();
        prop_assert_eq!(l.total_initial(), Charge::whole(-12));
        prop_assert_eq!(l.total_final(), l.total_initial());
        prop_assert!(l.is_balanced());
        prop_assert!(unavoidability_driver(&e).is_ok());
    }

    #[test]
    fn charges_never_appear_or_vanish(seed in any::<u64>()) {
        let e = random_embedding(&mut ChaCha8Rng::seed_from_u64(seed));
        let l = discharge(&e).unwrap();
        for v in e.graph().vertices() {
            prop_assert_eq!(l.vertex_final[v], l.vertex_initial[v] - l.outflow(v));
        }
        for f in 0..e.faces().len() {
            prop_assert_eq!(l.face_final[f], l.face_initial[f] + l.inflow(f));
        }
    }
}
