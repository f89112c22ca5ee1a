mod common;

use std::path::PathBuf;

use rand::Rng;

use stylodist::classify::{feature_distance, Feature, TextInputs};
use stylodist::distance::DistanceParams;
use stylodist::features::{build_letter_pts, combine};
use stylodist::transport::{reference_solve, solve, TransportInstance};
use stylodist::{distance_between, distance_matrix, Pts, StateId};

use common::{naive_distance_matrix, random_pts, rng};

fn id(i: usize) -> StateId {
    StateId::new(i).unwrap()
}

fn fixture(name: &str) -> Pts {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    Pts::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn reference_confirms_self_loop_fixture() {
    let pts = fixture("self_loop_vs_stop.json");
    let params = DistanceParams::new(0.9, 1e-6).unwrap();
    let naive = naive_distance_matrix(&pts, 0.9, params.iterations());
    assert!((naive[0][1] - 1.0).abs() <= 1e-9);
    let d = distance_matrix(&pts, &params).unwrap();
    assert!((d.get(id(1), id(2)) - naive[0][1]).abs() <= 1e-12);
}

#[test]
fn reference_confirms_half_vs_third_fixture() {
    let pts = fixture("half_vs_third.json");
    let params = DistanceParams::new(0.9, 1e-6).unwrap();
    let naive = naive_distance_matrix(&pts, 0.9, params.iterations());
    assert!((naive[0][1] - 1.0 / 6.0).abs() <= 1e-6, "{}", naive[0][1]);
    let d = distance_matrix(&pts, &params).unwrap();
    assert!((d.get(id(1), id(2)) - naive[0][1]).abs() <= 1e-12);
}

#[test]
fn reference_transport_small_example() {
    // supply (0.5, 0.5, 0), demand (0, 0.5, 0.5): the best plan ships 0.5
    // from 0 to 2 at cost 1 and keeps the rest in place, for 0.5 in total
    let mut cost = vec![vec![1.0; 3]; 3];
    for (i, row) in cost.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    cost[1][2] = 0.3;
    let instance = TransportInstance::new(vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5], cost);
    let exact = reference_solve(&instance).unwrap().objective;
    assert!((exact - 0.5).abs() < 1e-12);
    assert!((solve(&instance).unwrap().objective - exact).abs() < 1e-12);
}

#[test]
fn engine_matches_naive_iteration_on_random_systems() {
    let mut rng = rng(11);
    for _ in 0..25 {
        let n = rng.random_range(1..=4);
        let pts = random_pts(&mut rng, n);
        let params = DistanceParams::new(0.8, 0.05).unwrap();
        let naive = naive_distance_matrix(&pts, 0.8, params.iterations());
        let d = distance_matrix(&pts, &params).unwrap();
        for k in pts.states() {
            for l in pts.states() {
                let expected = naive[k.position()][l.position()];
                assert!(
                    (d.get(k, l) - expected).abs() <= 1e-9,
                    "{k} {l}: {} vs {expected}",
                    d.get(k, l)
                );
            }
        }
    }
}

#[test]
fn pair_closure_matches_full_matrix_on_fixture() {
    let pts = fixture("chain.json");
    let params = DistanceParams::new(0.9, 1e-4).unwrap();
    let d = distance_matrix(&pts, &params).unwrap();
    let naive = naive_distance_matrix(&pts, 0.9, params.iterations());
    for k in pts.states() {
        for l in pts.states() {
            assert_eq!(distance_between(&pts, k, l, &params).unwrap(), d.get(k, l));
            assert!((d.get(k, l) - naive[k.position()][l.position()]).abs() <= 1e-9);
        }
    }
}

#[test]
fn letter_distance_agrees_with_naive_oracle() {
    let params = DistanceParams::new(0.9, 1e-6).unwrap();
    let a = build_letter_pts("ab. ab.").unwrap();
    let b = build_letter_pts("b. b.").unwrap();
    let joined = combine(&a, &b);
    let naive = naive_distance_matrix(&joined.pts, 0.9, params.iterations());
    let expected = naive[joined.start_a.position()][joined.start_b.position()];
    assert!((expected - 0.81).abs() < 1e-9);

    let d = feature_distance(
        &TextInputs::new().with_raw_text("ab. ab.").unwrap(),
        &TextInputs::new().with_raw_text("b. b.").unwrap(),
        Feature::Letters,
        &params,
    )
    .unwrap();
    assert!((d - expected).abs() < 1e-12);
}

#[test]
fn fixtures_round_trip() {
    for name in ["self_loop_vs_stop.json", "half_vs_third.json", "chain.json"] {
        let pts = fixture(name);
        assert_eq!(Pts::from_json(&pts.to_json()).unwrap(), pts);
    }
}
