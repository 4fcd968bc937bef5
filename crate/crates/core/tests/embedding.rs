use dyncolor::embedding::{
    emit_rotation, euler_genus_lower_bound, parse_rotation, search_embedding, SearchOptions,
};
use dyncolor::generators::{
    complete, cube, cycle_embedding, k4_embedding, k7_torus, petersen, random_planar, torus_grid,
    wheel_embedding,
};
use dyncolor::{EmbeddedGraph, EmbeddingError, RotationSystem};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn face_lengths(e: &EmbeddedGraph) -> Vec<usize> {
    let mut v: Vec<usize> = e.faces().iter().map(|f| f.len()).collect();
    v.sort_unstable();
    v
}

#[test]
fn fixed_embeddings_have_expected_genus() {
    let k4 = k4_embedding();
    assert_eq!((k4.genus(), face_lengths(&k4)), (0, vec![3, 3, 3, 3]));
    let w = wheel_embedding(6);
    assert_eq!(
        (w.genus(), face_lengths(&w)),
        (0, vec![3, 3, 3, 3, 3, 3, 6])
    );
    let c = cycle_embedding(5);
    assert_eq!((c.genus(), face_lengths(&c)), (0, vec![5, 5]));
    let grid = torus_grid(3, 3);
    assert_eq!((grid.genus(), face_lengths(&grid)), (1, vec![4; 9]));
    let k7 = k7_torus();
    assert_eq!((k7.genus(), face_lengths(&k7)), (1, vec![3; 14]));
}

#[test]
fn tree_has_one_face() {
    let e = EmbeddedGraph::trace(RotationSystem::sorted(dyncolor::generators::star(4))).unwrap();
    assert_eq!(e.faces().len(), 1);
    assert_eq!(e.face(0).len(), 8);
    assert_eq!(e.genus(), 0);
}

#[test]
fn single_vertex_has_one_empty_face() {
    let e = EmbeddedGraph::trace(RotationSystem::sorted(dyncolor::Graph::empty(1))).unwrap();
    assert_eq!(e.faces().len(), 1);
    assert_eq!(e.genus(), 0);
}

#[test]
fn trace_rejects_disconnected_and_empty() {
    let g = dyncolor::Graph::empty(2);
    assert_eq!(
        EmbeddedGraph::trace(RotationSystem::sorted(g)).unwrap_err(),
        EmbeddingError::DisconnectedGraph
    );
    let g = dyncolor::Graph::empty(0);
    assert_eq!(
        EmbeddedGraph::trace(RotationSystem::sorted(g)).unwrap_err(),
        EmbeddingError::EmptyGraph
    );
}

#[test]
fn search_finds_minimum_genus_on_small_graphs() {
    let opts = SearchOptions::default();
    assert_eq!(search_embedding(&complete(4), &opts).unwrap().genus(), 0);
    assert_eq!(search_embedding(&complete(5), &opts).unwrap().genus(), 1);
    assert_eq!(search_embedding(&cube(), &opts).unwrap().genus(), 0);
    assert_eq!(search_embedding(&petersen(), &opts).unwrap().genus(), 1);
    assert_eq!(euler_genus_lower_bound(&petersen()), 1);
    assert_eq!(euler_genus_lower_bound(&complete(7)), 1);
    assert_eq!(euler_genus_lower_bound(&complete(8)), 2);
}

#[test]
fn cofacial_edge_splits_a_face_and_keeps_genus() {
    let c = cycle_embedding(6);
    let e = c.add_cofacial_edge(0, 3).unwrap();
    assert_eq!(e.genus(), 0);
    assert_eq!(face_lengths(&e), vec![4, 4, 6]);
    let again = e.add_cofacial_edge(0, 3).unwrap();
    assert_eq!(again.graph(), e.graph());

    let grid = torus_grid(3, 3);
    // (0,0) and (1,1) share a square
    let f = grid.cofacial(0, 4).unwrap();
    let split = grid.add_edge_in_face(0, 4, f).unwrap();
    assert_eq!(split.genus(), 1);
    assert_eq!(face_lengths(&split).iter().filter(|&&l| l == 3).count(), 2);
    assert!(matches!(
        grid.add_edge_in_face(0, 8, grid.face_of_dart(1, 2)),
        Err(EmbeddingError::NotOnFace { .. })
    ));
}

#[test]
fn corners_lie_in_the_face_of_the_incoming_dart() {
    let e = wheel_embedding(5);
    for v in e.graph().vertices() {
        for &a in e.rotation().rotation(v) {
            let f = e.corner_face(v, a);
            let b = e.rotation().succ(v, a);
            let darts = e.face(f).darts();
            let i = darts.iter().position(|&d| d == (a, v)).unwrap();
            assert_eq!(darts[(i + 1) % darts.len()], (v, b));
        }
    }
}

#[test]
fn induced_embedding_does_not_raise_genus() {
    let grid = torus_grid(3, 4);
    let (sub, remap) = grid.induced_embedding(&[0]).unwrap();
    assert!(sub.genus() <= 1);
    assert_eq!(sub.graph().n(), 11);
    assert_eq!(remap.get(0), None);
    let w = wheel_embedding(4);
    assert_eq!(
        w.induced_embedding(&[0, 1, 3]).unwrap_err(),
        EmbeddingError::WouldDisconnect
    );
}

#[test]
fn rotation_text_round_trips_and_validates() {
    let k7 = k7_torus();
    let text = emit_rotation(k7.rotation());
    assert_eq!(&parse_rotation(&text).unwrap(), k7.rotation());
    for bad in [
        "",
        "rot 2\n0: 1\n",
        "rot 2\n0: 1\n1: 1\n",
        "rot 2\n0: 1\n0: 1\n1: 0\n",
        "rot x\n",
        "rot 2\n0: 3\n1:\n",
    ] {
        assert!(parse_rotation(bad).is_err(), "{bad:?}");
    }
    assert!(
        parse_rotation("rot 3\n0: 1 2\n1: 0\n2: 1\n").is_err(),
        "asymmetric rotation"
    );
}

#[test]
fn random_planar_graphs_stay_planar() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [5, 12, 30] {
        let sparse = random_planar(n, n / 2, false, &mut rng);
        assert_eq!((sparse.graph().n(), sparse.genus()), (n, 0));
        let tri = random_planar(n, 0, true, &mut rng);
        assert_eq!(tri.genus(), 0);
        assert_eq!(tri.graph().m(), 3 * n - 6);
    }
}

fn arb_rotation() -> impl Strategy<Value = RotationSystem> {
    (2usize..12, any::<u64>()).prop_map(|(n, seed)| {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
        for _ in 0..rng.gen_range(0..2 * n) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                edges.push((a, b));
            }
        }
        let g = dyncolor::Graph::from_edges(n, &edges).unwrap();
        let rot = g
            .vertices()
            .map(|v| {
                let mut l = g.neighbors(v).to_vec();
                l.shuffle(&mut rng);
                l
            })
            .collect();
        RotationSystem::new(g, rot).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn faces_partition_darts_and_genus_is_integral(rot in arb_rotation()) {
        let (n, m) = (rot.graph().n() as i64, rot.graph().m() as i64);
        let e = EmbeddedGraph::trace(rot).unwrap();
        let mut darts: Vec<_> = e.faces().iter().flat_map(|f| f.darts().to_vec()).collect();
        prop_assert_eq!(darts.len() as i64, 2 * m);
        darts.sort_unstable();
        darts.dedup();
        prop_assert_eq!(darts.len() as i64, 2 * m);
        let chi = n - m + e.faces().len() as i64;
        prop_assert_eq!(chi, 2 - 2 * e.genus() as i64);
        for (i, f) in e.faces().iter().enumerate() {
            for &(u, v) in f.darts() {
                prop_assert_eq!(e.face_of_dart(u, v), i);
            }
        }
    }

    #[test]
    fn cofacial_insertion_preserves_genus(rot in arb_rotation(), pick in any::<(usize, usize)>()) {
        let e = EmbeddedGraph::trace(rot).unwrap();
        let n = e.graph().n();
        let (u, v) = (pick.0 % n, pick.1 % n);
        if u != v && !e.graph().has_edge(u, v) {
            if e.cofacial(u, v).is_some() {
                let f = e.add_cofacial_edge(u, v).unwrap();
                prop_assert_eq!(f.genus(), e.genus());
                prop_assert_eq!(f.faces().len(), e.faces().len() + 1);
            } else {
                prop_assert_eq!(e.add_cofacial_edge(u, v).unwrap_err(), EmbeddingError::NotCofacial(u, v));
            }
        }
    }
}
