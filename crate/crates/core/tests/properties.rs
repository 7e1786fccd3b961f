//! Randomised invariants of the game, network and dynamics layers.

mod common;

use gradplay::dynamics::{self, EstimationMatrix, Initializer};
use gradplay::network::{Graph, MixingMatrix, Topology};
use gradplay::theory::BoundInputs;
use gradplay::QuadraticGame;
use proptest::prelude::*;

fn topology() -> impl Strategy<Value = Topology> {
    prop::sample::select(Topology::ALL.to_vec())
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, n)
}

fn game_and_pair() -> impl Strategy<Value = (QuadraticGame, Vec<f64>, Vec<f64>)> {
    (2usize..25, any::<u64>(), 0.0..1.0f64).prop_flat_map(|(n, seed, scale)| {
        let game = QuadraticGame::random(n, seed, scale).unwrap();
        (Just(game), vec_of(n), vec_of(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strong_monotonicity((game, u, v) in game_and_pair()) {
        let k = game.constants().unwrap();
        let (fu, fv) = (game.mapping(&u).unwrap(), game.mapping(&v).unwrap());
        let inner: f64 = (0..u.len()).map(|i| (fu[i] - fv[i]) * (u[i] - v[i])).sum();
        let d2: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assert!(inner >= k.mu * d2 - 1e-9 * (1.0 + inner.abs()));
    }

    #[test]
    fn per_player_lipschitz((game, u, v) in game_and_pair()) {
        let k = game.constants().unwrap();
        let d: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        for i in 0..u.len() {
            let gap = (game.local_gradient(i, &u).unwrap() - game.local_gradient(i, &v).unwrap()).abs();
            prop_assert!(gap <= k.l_per_player[i] * d * (1.0 + 1e-12) + 1e-12);
            prop_assert_eq!(game.local_gradient(i, &u).unwrap(), game.mapping(&u).unwrap()[i]);
        }
    }

    #[test]
    fn game_json_round_trips_bit_exact((game, _u, _v) in game_and_pair()) {
        let back = QuadraticGame::from_json(&game.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), game.to_json());
        for (x, y) in back.b().iter().zip(game.b()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        prop_assert_eq!(back, game);
    }

    #[test]
    fn network_round_trips_and_averaging(t in topology(), n in 3usize..30, seed in any::<u64>(), x in vec_of(30)) {
        let g = Graph::build(t, n, seed).unwrap();
        prop_assert!(g.is_connected());
        prop_assert_eq!(Graph::from_edge_list(&g.to_edge_list(), Some(n)).unwrap(), g.clone());
        let w = MixingMatrix::metropolis(&g).unwrap();
        let (rows, cols) = w.stochastic_defects();
        prop_assert!(rows <= 1e-12 && cols <= 1e-12);
        prop_assert!(w.matches_graph(&g));
        prop_assert!(w.sigma() < 1.0);
        let back = MixingMatrix::from_csv(&w.to_csv()).unwrap();
        prop_assert_eq!(back.matrix(), w.matrix());
        let (lhs, rhs) = w.average_property(&x[..n]).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn running_average_recursion(t in topology(), n in 3usize..15, seed in any::<u64>(), alpha in 1e-4..0.5f64) {
        let game = QuadraticGame::random(n, seed, 0.3).unwrap();
        let w = MixingMatrix::metropolis(&Graph::build(t, n, seed).unwrap()).unwrap();
        let x = EstimationMatrix::init(Initializer::Uniform, n, seed);
        let g = dynamics::diag_gradient(&game, &x).unwrap();
        let next = dynamics::step(&x, &w, alpha, &game).unwrap();
        let (before, after) = (dynamics::running_average(&x), dynamics::running_average(&next));
        for j in 0..n {
            let expect = before[j] - alpha / n as f64 * g[j];
            prop_assert!((after[j] - expect).abs() <= 1e-12 * (1.0 + before[j].abs()));
        }
    }

    #[test]
    fn admissible_rates_contract(seed in any::<u64>(), frac in 1e-6..0.999f64) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (mu, l, sigma, n) = common::random_tuple(&mut rng);
        let inputs = BoundInputs::new(mu, l, sigma, n);
        let terms = inputs.step_size_terms().unwrap();
        prop_assert!(terms.iter().all(|t| *t > 0.0));
        let amax = inputs.alpha_max().unwrap();
        let r = inputs.rate_bound(frac * amax).unwrap();
        prop_assert!(r.q < 1.0 && r.lambda1 > r.lambda2.abs());
        prop_assert!(inputs.contraction_chain(frac * amax).unwrap().holds());
        // the quadratic-root ceiling shrinks as mixing worsens
        let worse = BoundInputs::new(mu, l, (sigma + 1.0) / 2.0, n);
        prop_assert!(worse.quadratic_root_alpha_bound().unwrap() < inputs.quadratic_root_alpha_bound().unwrap());
    }

    #[test]
    fn doubling_l_quarters_term2(mu in 0.01..10.0f64, l in 1.0..10.0f64, sigma in 0.01..0.99f64, n in 2usize..50) {
        let l = l * mu;
        let a = BoundInputs::new(mu, l, sigma, n).step_size_terms().unwrap()[1];
        let b = BoundInputs::new(mu, 2.0 * l, sigma, n).step_size_terms().unwrap()[1];
        prop_assert!((a / 4.0 - b).abs() <= 1e-15 * a);
    }
}
