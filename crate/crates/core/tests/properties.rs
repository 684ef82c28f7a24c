use fulldisp_core::conserved::random_smooth;
use fulldisp_core::models::{
    apply_dit, apply_i, Dispersion, Model, ModelKind, Ops, StateForm, StripSettings, WaveStatePsi, WaveStateV,
};
use fulldisp_core::multipliers::{f1_of_x, f2_of_x, f3_of_x, inv_f1_of_x, one_minus_f0_of_x, Params};
use fulldisp_core::spectral::{Grid1D, RealField};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_n() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![16usize, 32, 64])
}

fn x_arg() -> impl Strategy<Value = f64> {
    (-6.0f64..4.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multipliers_lie_in_unit_interval(x in x_arg()) {
        for v in [f1_of_x(x), f2_of_x(x), f3_of_x(x)] {
            prop_assert!(v > 0.0 && v <= 1.0, "x = {x}: {v}");
        }
    }

    #[test]
    fn multiplier_identities_hold(x in x_arg()) {
        prop_assert!((f3_of_x(x) * f1_of_x(x) - f2_of_x(x)).abs() <= 1e-14);
        prop_assert!((f1_of_x(x) - (1.0 - x * x / 3.0 * f2_of_x(x))).abs() <= 1e-14);
        prop_assert!((inv_f1_of_x(x) * f1_of_x(x) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn f2_and_inverse_f1_bounds(x in x_arg()) {
        prop_assert!(f2_of_x(x) * (1.0 + x * x / 3.0) <= 1.0 + 1e-14);
        prop_assert!(inv_f1_of_x(x) <= 1.0 + x + 1e-14);
    }

    #[test]
    fn f0_stays_between_zero_and_one(x in x_arg(), z in -1.0f64..=0.0) {
        let one_minus = one_minus_f0_of_x(z, x);
        prop_assert!((-1e-15..=1.0 + 1e-15).contains(&one_minus), "z = {z}, x = {x}: {one_minus}");
    }

    #[test]
    fn transform_round_trip(n in grid_n(), seed in any::<u64>()) {
        let grid = Grid1D::periodic(n).unwrap();
        let f = random_smooth(grid, n / 2 - 1, &mut ChaCha8Rng::seed_from_u64(seed));
        let back = f.to_spectral().to_real();
        prop_assert!((&back - &f).max_abs() <= 1e-13 * (1.0 + f.max_abs()));
    }

    #[test]
    fn dealias_is_idempotent_and_keeps_low_modes(n in grid_n(), seed in any::<u64>()) {
        let grid = Grid1D::periodic(n).unwrap();
        let f = random_smooth(grid, n / 2 - 1, &mut ChaCha8Rng::seed_from_u64(seed));
        let once = f.dealias();
        prop_assert!((&once.dealias() - &once).max_abs() <= 1e-14);
        let low = random_smooth(grid, n / 3, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        prop_assert!((&low.dealias() - &low).max_abs() <= 1e-13);
    }

    #[test]
    fn derivative_integrates_to_zero(n in grid_n(), seed in any::<u64>()) {
        let grid = Grid1D::periodic(n).unwrap();
        let f = random_smooth(grid, n / 3, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(f.derivative(1).integrate().abs() <= 1e-12);
    }

    #[test]
    fn i_operator_is_symmetric(seed in any::<u64>(), mu in 0.01f64..2.0, eps in 0.0f64..0.5) {
        let grid = Grid1D::periodic(32).unwrap();
        let ops = Ops::new(grid, Params::new(mu, eps, 0.1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeta = random_smooth(grid, 3, &mut rng);
        let h = ops.depth(&zeta);
        let v1 = random_smooth(grid, 8, &mut rng);
        let v2 = random_smooth(grid, 8, &mut rng);
        for d in [Dispersion::Full, Dispersion::Classical] {
            let a = apply_i(&ops, &h, &v1, d);
            let b = apply_i(&ops, &h, &v2, d);
            let gap = (a.dot(&v2) - v1.dot(&b)).abs();
            prop_assert!(gap <= 1e-10 * a.l2_norm() * v2.l2_norm());
        }
    }

    #[test]
    fn dit_operator_dominates_depth(seed in any::<u64>(), mu in 0.01f64..2.0, eps in 0.0f64..0.5) {
        let grid = Grid1D::periodic(32).unwrap();
        let ops = Ops::new(grid, Params::new(mu, eps, 0.1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = ops.depth(&random_smooth(grid, 3, &mut rng));
        let v = random_smooth(grid, 10, &mut rng);
        let q = v.dot(&apply_dit(&ops, &h, &v)) / v.dot(&v);
        prop_assert!(q >= h.min() * (1.0 - 1e-12), "{q} < {}", h.min());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_model_conserves_mass_exactly(seed in any::<u64>(), mu in 0.05f64..1.0, eps in 0.0f64..0.4) {
        let grid = Grid1D::periodic(32).unwrap();
        let p = Params::new(mu, eps, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeta = random_smooth(grid, 4, &mut rng);
        let second = random_smooth(grid, 4, &mut rng);
        let strip = StripSettings { nz: 16, ..StripSettings::default() };
        for kind in ModelKind::ALL {
            let model = Model::new(kind, Ops::new(grid, p), strip).unwrap();
            let dz: RealField = match kind.form() {
                StateForm::Psi => model
                    .rhs_psi(&WaveStatePsi { zeta: zeta.clone(), psi: second.clone() })
                    .unwrap()
                    .zeta,
                StateForm::V => model
                    .rhs_v(&WaveStateV { zeta: zeta.clone(), w: model.w_from_v(&zeta, &second) })
                    .unwrap()
                    .zeta,
            };
            prop_assert!(dz.integrate().abs() <= 1e-12 * (1.0 + dz.l2_norm()), "{kind}: {}", dz.integrate());
        }
    }
}
