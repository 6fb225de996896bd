mod common;

use jacobi_tree::cover::{build_ball, lanczos_top};
use jacobi_tree::spectral::perron;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ball_tops_increase_and_stay_below_sigma(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng);
        let params = common::random_params(&mut rng, &g, 0.5, 1.0);
        let sigma = perron(&g, &params).unwrap().sigma;
        let base = rng.gen_range(0..g.p());
        let mut prev = f64::NEG_INFINITY;
        for r in 0..=6 {
            let ball = build_ball(&g, &params, base, r).unwrap();
            let top = lanczos_top(&ball);
            prop_assert!(top >= prev - 1e-12, "R={r}: {top} < {prev}");
            prop_assert!(top <= sigma + 1e-12, "R={r}: {top} > σ={sigma}");
            prev = top;
        }
    }

    #[test]
    fn interior_degrees_match_the_graph(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng);
        let params = common::random_params(&mut rng, &g, 0.5, 1.0);
        let ball = build_ball(&g, &params, 0, 4).unwrap();
        for (x, node) in ball.nodes().iter().enumerate() {
            if ball.is_interior(x) {
                prop_assert_eq!(ball.degree(x), g.degree(node.projection));
            }
        }
    }
}
