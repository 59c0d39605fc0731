use num_rational::Ratio;
use proptest::prelude::*;
use rewb_core::adversary::{AttackPolicy, Membership, SpoofModel};
use rewb_core::graph::{
    generate_random_digraph, is_strongly_connected, laplacian, weight_update_step, Digraph,
};
use rewb_core::protocol::{innovation_gain, rewb_step, AgentStates, GammaSystem, ProtocolParams};

type Q = Ratio<i64>;

fn digraph() -> impl Strategy<Value = Digraph> {
    (2usize..8, any::<u64>(), 0.2f64..0.9).prop_filter_map("generation budget", |(n, seed, p)| {
        generate_random_digraph(n, p, seed).ok()
    })
}

fn graph_and_weights() -> impl Strategy<Value = (Digraph, Vec<Q>)> {
    digraph().prop_flat_map(|g| {
        let n = g.n();
        (
            Just(g),
            prop::collection::vec((1i64..50, 1i64..20).prop_map(|(a, b)| Q::new(a, b)), n),
        )
    })
}

fn graph_states_weights() -> impl Strategy<Value = (Digraph, Vec<f64>, Vec<f64>, Vec<f64>)> {
    digraph().prop_flat_map(|g| {
        let n = g.n();
        (
            Just(g),
            prop::collection::vec(-40.0f64..40.0, n),
            prop::collection::vec(-40.0f64..40.0, n),
            prop::collection::vec(0.01f64..1.0, n),
        )
    })
}

proptest! {
    #[test]
    fn generated_graphs_are_strongly_connected(g in digraph()) {
        prop_assert!(is_strongly_connected(&g));
    }

    #[test]
    fn graph_json_round_trips(g in digraph()) {
        prop_assert_eq!(Digraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn laplacian_columns_sum_to_zero((g, w) in graph_and_weights()) {
        let l = laplacian(&g, &w).unwrap();
        for j in 0..g.n() {
            let col = (0..g.n()).fold(Q::from_integer(0), |s, i| s + l[(i, j)]);
            prop_assert_eq!(col, Q::from_integer(0));
        }
    }

    #[test]
    fn weight_step_keeps_degree_weighted_sum_and_positivity((g, w) in graph_and_weights()) {
        let next = weight_update_step(&g, &w).unwrap();
        let total = |v: &[Q]| (0..g.n()).fold(Q::from_integer(0), |s, i| s + Q::from_integer(g.out_degree(i) as i64) * v[i]);
        prop_assert_eq!(total(&next), total(&w));
        prop_assert!(next.iter().all(|v| *v > Q::from_integer(0)));
    }

    #[test]
    fn consensus_term_conserves_sum((g, x, _y, w) in graph_states_weights()) {
        // y = x switches the innovation term off; 1ᵀL = 0 then fixes 1ᵀx
        let params = ProtocolParams::<f64>::reference_defaults();
        let n = g.n();
        let next = rewb_step(&AgentStates::from_vec(n, 1, x.clone()).unwrap(), &w, &x, 1.0, &params, &g, 0).unwrap();
        let before: f64 = x.iter().sum();
        let after: f64 = next.as_slice().iter().sum();
        prop_assert!((before - after).abs() < 1e-9 * (1.0 + before.abs()));
    }

    #[test]
    fn update_is_equivariant_under_power_of_two_scaling((g, x, y, w) in graph_states_weights(), gamma in 0.0f64..30.0, t in 0u64..500) {
        let params = ProtocolParams::<f64>::reference_defaults();
        let n = g.n();
        let base = rewb_step(&AgentStates::from_vec(n, 1, x.clone()).unwrap(), &w, &y, gamma, &params, &g, t).unwrap();
        let x4: Vec<f64> = x.iter().map(|v| v * 4.0).collect();
        let y4: Vec<f64> = y.iter().map(|v| v * 4.0).collect();
        let scaled = rewb_step(&AgentStates::from_vec(n, 1, x4).unwrap(), &w, &y4, gamma * 4.0, &params, &g, t).unwrap();
        for (a, b) in base.as_slice().iter().zip(scaled.as_slice()) {
            prop_assert_eq!(a * 4.0, *b);
        }
    }

    #[test]
    fn innovation_step_never_exceeds_gamma(y in prop::collection::vec(-1e3f64..1e3, 1..4), gamma in 0.0f64..100.0) {
        let x = vec![0.0; y.len()];
        let k = innovation_gain(&y, &x, gamma);
        prop_assert!(k > 0.0 && k <= 1.0);
        let step = y.iter().map(|v| (k * v).powi(2)).sum::<f64>().sqrt();
        prop_assert!(step <= gamma * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn bad_sets_have_exact_size(n in 2usize..300, s in 0.0f64..0.499, seed: u64, t in 0u64..1000, resample: bool) {
        let policy = AttackPolicy::<f64> {
            s,
            membership: if resample { Membership::Resample } else { Membership::Fixed },
            spoof: SpoofModel::UniformNegative,
            seed,
        };
        let set = policy.select_bad_set(t, n).unwrap();
        prop_assert_eq!(set.len(), policy.bad_count(n).unwrap());
        prop_assert!(set.len() <= n / 2);
        prop_assert!(set.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(set.iter().all(|&i| i < n));
        if !resample {
            prop_assert_eq!(set, policy.select_bad_set(t + 17, n).unwrap());
        }
    }

    #[test]
    fn spoofs_stay_in_range(seed: u64, t in 0u64..10_000, agent in 0usize..100) {
        let policy = AttackPolicy::<f64> { s: 0.4, membership: Membership::Fixed, spoof: SpoofModel::UniformNegative, seed };
        let traj = rewb_core::adversary::ParameterTrajectory::reference_default();
        let z = policy.spoof(&traj, t, agent);
        prop_assert!(z[0] <= 0.0 && z[0] >= -50.0);
        prop_assert_eq!(z, policy.spoof(&traj, t, agent));
    }

    #[test]
    fn gamma_stays_positive_with_reference_parameters(n in 2usize..200, steps in 1usize..3000) {
        let p = ProtocolParams::<f64>::reference_defaults();
        let mut gs = GammaSystem::initial(p.theta_bound);
        for _ in 0..steps {
            gs = gs.step(&p, n);
            prop_assert!(gs.gamma() > 0.0 && gs.gamma().is_finite());
        }
    }
}

proptest! {
    #[test]
    fn weight_step_keeps_at_least_half((g, w) in graph_and_weights()) {
        let next = weight_update_step(&g, &w).unwrap();
        for (a, b) in next.iter().zip(&w) {
            prop_assert!(*a >= *b / Q::from_integer(2));
        }
    }

    #[test]
    fn balancing_is_scale_equivariant(g in digraph(), k in -8i32..8) {
        use rewb_core::graph::{balance_weights, default_max_iter};
        let n = g.n();
        let w0: Vec<f64> = (0..n).map(|i| 0.1 + 0.01 * i as f64).collect();
        let c = 2f64.powi(k);
        let scaled: Vec<f64> = w0.iter().map(|v| v * c).collect();
        let max_iter = default_max_iter(&g).unwrap().max(10_000);
        let a = balance_weights(&g, &w0, 1e-14, max_iter).unwrap();
        let b = balance_weights(&g, &scaled, 1e-14 * c, max_iter).unwrap();
        // P is linear and scaling by 2^k is exact, so the iterates match exactly
        prop_assert_eq!(a.iterations, b.iterations);
        for (x, y) in a.weights.iter().zip(&b.weights) {
            prop_assert_eq!(x * c, *y);
        }
        let l1 = |v: &[f64]| v.iter().sum::<f64>();
        for (x, y) in a.weights.iter().zip(&b.weights) {
            prop_assert!((x / l1(&a.weights) - y / l1(&b.weights)).abs() <= 1e-10);
        }
    }
}
