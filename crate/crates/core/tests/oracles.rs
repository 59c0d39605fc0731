mod common;

use common::*;
use rand::Rng;
use rewb_core::adversary::{
    measure_all, AttackPolicy, Membership, ParameterTrajectory, SpoofModel,
};
use rewb_core::engine::{run, ExperimentConfig};
use rewb_core::graph::{
    balance_weights, default_max_iter, diameter, is_strongly_connected, normalize_max,
    weight_update_step,
};
use rewb_core::protocol::{rewb_step, AgentStates, GammaSystem, ProtocolParams};
use rewb_core::Digraph;

fn random_digraph(rng: &mut rand_chacha::ChaCha8Rng, n: usize, p: f64) -> Digraph {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .filter(|_| rng.gen_bool(p))
        .collect();
    Digraph::new(n, edges).unwrap()
}

#[test]
fn connectivity_matches_transitive_closure() {
    let mut r = rng(1);
    let mut seen = [0usize; 2];
    for _ in 0..400 {
        let n = r.gen_range(2..=7);
        let p = r.gen_range(0.1..0.7);
        let g = random_digraph(&mut r, n, p);
        let sc = is_strongly_connected(&g);
        assert_eq!(sc, brute_strongly_connected(&g), "{:?}", g.edges());
        seen[usize::from(sc)] += 1;
        match diameter(&g) {
            Ok(d) => assert_eq!(Some(d), brute_diameter(&g)),
            Err(_) => assert!(!sc),
        }
    }
    assert!(
        seen[0] > 20 && seen[1] > 20,
        "both outcomes exercised: {seen:?}"
    );
}

#[test]
fn balanced_weights_match_exact_null_space() {
    let mut r = rng(2);
    for _ in 0..60 {
        let g = random_strongly_connected(&mut r, 2, 7);
        let basis = exact_balance_null_space(&g);
        assert_eq!(
            basis.len(),
            1,
            "strongly connected graphs have a one-dimensional null space"
        );
        let exact: Vec<f64> = basis[0].iter().map(to_f64).collect();
        let b = balance_weights(
            &g,
            &vec![0.1; g.n()],
            1e-14,
            default_max_iter(&g).unwrap().max(10_000),
        )
        .unwrap();
        for (got, want) in normalize_max(&b.weights).iter().zip(&exact) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }
}

#[test]
fn symmetric_graphs_balance_to_uniform_weights() {
    let mut r = rng(3);
    for _ in 0..20 {
        let g = random_strongly_connected(&mut r, 3, 10);
        let sym_edges: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .flat_map(|&(a, b)| [(a, b), (b, a)])
            .collect();
        let mut uniq = sym_edges.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let s = Digraph::new(g.n(), uniq).unwrap();
        assert!(s.is_symmetric());
        // uniform is already a fixed point
        assert_eq!(
            weight_update_step(&s, &vec![0.25; s.n()]).unwrap(),
            vec![0.25; s.n()]
        );
        let w0: Vec<f64> = (0..s.n()).map(|i| 0.1 + 0.05 * i as f64).collect();
        let b = balance_weights(&s, &w0, 1e-14, 100_000).unwrap();
        for w in normalize_max(&b.weights) {
            assert!((w - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn per_agent_update_matches_dense_matrix_form() {
    let mut r = rng(4);
    let params = ProtocolParams::<f64>::reference_defaults();
    for _ in 0..50 {
        let g = random_strongly_connected(&mut r, 2, 15);
        let n = g.n();
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(-30.0..30.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(-30.0..30.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..1.0)).collect();
        let gamma = r.gen_range(0.0..40.0);
        let t = r.gen_range(0..1000u64);
        let states = AgentStates::from_vec(n, 1, x.clone()).unwrap();
        let got = rewb_step(&states, &w, &y, gamma, &params, &g, t).unwrap();
        let want = dense_step(&g, &x, &w, &y, gamma, params.alpha(t), params.beta(t));
        for (a, b) in got.as_slice().iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn agent_update_reads_only_its_neighbourhood() {
    let mut r = rng(5);
    let params = ProtocolParams::<f64>::reference_defaults();
    for _ in 0..30 {
        let g = random_strongly_connected(&mut r, 4, 12);
        let n = g.n();
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(-5.0..5.0)).collect();
        let w = vec![0.1; n];
        let base = rewb_step(
            &AgentStates::from_vec(n, 1, x.clone()).unwrap(),
            &w,
            &y,
            3.0,
            &params,
            &g,
            7,
        )
        .unwrap();
        let i = r.gen_range(0..n);
        let mut x2 = x.clone();
        let mut y2 = y.clone();
        for k in 0..n {
            if k != i && !g.in_neighbors(i).contains(&k) {
                x2[k] += 1000.0;
            }
            if k != i {
                y2[k] -= 1000.0;
            }
        }
        let moved = rewb_step(
            &AgentStates::from_vec(n, 1, x2).unwrap(),
            &w,
            &y2,
            3.0,
            &params,
            &g,
            7,
        )
        .unwrap();
        assert_eq!(base.row(i), moved.row(i));
    }
}

#[test]
fn engine_follows_measure_update_then_adapt_order() {
    let g = rewb_core::graph::generate_random_digraph(9, 0.4, 11).unwrap();
    let mut cfg = ExperimentConfig::<f64>::new(g.clone(), 11);
    cfg.attack = AttackPolicy {
        s: 0.34,
        membership: Membership::Resample,
        spoof: SpoofModel::UniformNegative,
        seed: 11,
    };
    cfg.params.s = 0.34;
    cfg.horizon = 200;
    cfg.stride = 1;
    let record = run(&cfg).unwrap();

    let p = &cfg.params;
    let traj = ParameterTrajectory::<f64>::reference_default();
    let mut x = AgentStates::zeros(9, 1);
    let mut w = p.initial_weights(9);
    let mut gs = GammaSystem::initial(p.theta_bound);
    let mut y = vec![0.0; 9];
    for t in 0..cfg.horizon {
        let row = &record.rows[t as usize];
        assert_eq!(row.gamma, gs.gamma(), "t={t}");
        let err: f64 = x
            .as_slice()
            .iter()
            .map(|v| (v - traj.component(t)).powi(2))
            .sum::<f64>()
            .sqrt();
        assert_eq!(row.error_l2, err, "t={t}");
        measure_all(&traj, &cfg.attack, t, 9, &mut y).unwrap();
        x = rewb_step(&x, &w, &y, gs.gamma(), p, &g, t).unwrap();
        w = weight_update_step(&g, &w).unwrap();
        gs = gs.step(p, 9);
    }
    assert_eq!(record.final_state, x);
    assert_eq!(record.final_weights, w);
}

#[test]
fn exact_rational_balancing_reaches_fixed_point_of_fixture() {
    use num_rational::Ratio;
    let g = Digraph::unbalanced_triangle();
    let fixed = [Ratio::new(1i64, 2), Ratio::new(3, 2), Ratio::new(1, 1)];
    assert_eq!(weight_update_step(&g, &fixed).unwrap(), fixed.to_vec());
    let basis = exact_balance_null_space(&g);
    let expected: Vec<f64> = [1.0 / 3.0, 1.0, 2.0 / 3.0].to_vec();
    assert_eq!(basis[0].iter().map(to_f64).collect::<Vec<_>>(), expected);
}
