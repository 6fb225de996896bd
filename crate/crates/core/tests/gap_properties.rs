mod common;

use jacobi_tree::gap::{bounds_from_vectors, gap_quantities, gap_report, Reference};
use jacobi_tree::mfunction::ScanConfig;
use jacobi_tree::models::Model;
use jacobi_tree::spectral::perron;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn pick(k: usize) -> Model {
    [Model::Cube, Model::Petersen, Model::Rg(3, 2)][k % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_ground_states_changes_nothing(k in 0usize..3, seed in any::<u64>(), c in 1e-3..1e3f64, ct in 1e-3..1e3f64) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (g, _) = pick(k).build().unwrap();
        let p = common::random_params(&mut rng, &g, 0.4, 0.5);
        let pt = common::random_params(&mut rng, &g, 0.4, 0.5);
        let psi = perron(&g, &p).unwrap().psi;
        let psit = perron(&g, &pt).unwrap().psi;
        let base = bounds_from_vectors(&g, &p, &pt, &psi, &psit, 0.3).unwrap();
        let psi_c: Vec<f64> = psi.iter().map(|x| x * c).collect();
        let psit_c: Vec<f64> = psit.iter().map(|x| x * ct).collect();
        let scaled = bounds_from_vectors(&g, &p, &pt, &psi_c, &psit_c, 0.3).unwrap();
        prop_assert!((base.lower - scaled.lower).abs() <= 1e-13 * base.lower.abs().max(1.0));
        prop_assert!((base.upper - scaled.upper).abs() <= 1e-13 * base.upper.abs().max(1.0));
    }

    #[test]
    fn swapping_parameters_swaps_ratios(k in 0usize..3, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (g, _) = pick(k).build().unwrap();
        let p = common::random_params(&mut rng, &g, 0.4, 0.5);
        let pt = common::random_params(&mut rng, &g, 0.4, 0.5);
        let fwd = gap_quantities(&g, &p, &pt, &Reference::Given(1.0)).unwrap();
        let back = gap_quantities(&g, &pt, &p, &Reference::Given(1.0)).unwrap();
        prop_assert_eq!((fwd.s, fwd.i), (back.s_tilde, back.i_tilde));
        prop_assert_eq!((fwd.s_tilde, fwd.i_tilde), (back.s, back.i));
        prop_assert!(fwd.s * fwd.s_tilde >= 1.0 - 1e-15);
        prop_assert!(fwd.i * fwd.i_tilde <= 1.0 + 1e-15);
        prop_assert!(fwd.lower <= fwd.upper);
    }
}

#[test]
fn gaps_are_positive_on_model_graphs() {
    let cfg = ScanConfig {
        resolution: 201,
        ..ScanConfig::default()
    };
    for model in [
        Model::Free(3),
        Model::Rg(3, 2),
        Model::AlternatingB(1.0),
        Model::Cube,
        Model::Petersen,
    ] {
        let (g, params) = model.build().unwrap();
        assert!(g.cycle_rank() >= 2);
        let rep = gap_report(&g, &params, &cfg).unwrap();
        assert!(rep.gap > 0.0, "{model}: gap {}", rep.gap);
    }
}
