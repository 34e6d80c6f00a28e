//! Property tests for the grid operators, the scheme and the fits.

use degencd_core::grid::{
    backward_diff, discrete_laplacian, forward_diff, l1_norm, restrict_average, Boundary, Field, GridSpec,
};
use degencd_core::harness::fit_rate;
use degencd_core::kinetic::{chi, Mollifier, MollifierKernel};
use degencd_core::model::{Model, ScalarFn};
use degencd_core::quadrature::integrate_value;
use degencd_core::scheme::SemiDiscreteOp;
use proptest::prelude::*;

fn field_1d(values: Vec<f64>, boundary: Boundary) -> Field {
    let n = values.len();
    let spec = GridSpec::new(&[n], 1.0 / n as f64, &[0.0], boundary).unwrap();
    Field::new(spec, values, 0.0).unwrap()
}

fn field_2d(values: Vec<f64>, n: usize, boundary: Boundary) -> Field {
    let spec = GridSpec::cube(2, 0.0, 1.0, n, boundary).unwrap();
    Field::new(spec, values, 0.0).unwrap()
}

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Periodic), Just(Boundary::ZeroExtension)]
}

fn model(dim: usize) -> Model {
    let diffusion = ScalarFn::Ramp {
        scale: 0.1,
        threshold: 0.5,
    };
    Model::isotropic_eo(dim, &ScalarFn::HalfSquare, diffusion, 0.0, -2.0, 2.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn backward_difference_is_shifted_forward_difference(v in prop::collection::vec(-5.0f64..5.0, 3..40)) {
        let f = field_1d(v, Boundary::Periodic);
        let lhs = backward_diff(&f, 0).unwrap();
        let rhs = forward_diff(&f, 0).unwrap().shift(0, -1).unwrap();
        prop_assert_eq!(lhs.values(), rhs.values());
    }

    #[test]
    fn periodic_differences_telescope(v in prop::collection::vec(-5.0f64..5.0, 36..=36)) {
        let f = field_2d(v, 6, Boundary::Periodic);
        for axis in 0..2 {
            let s: f64 = forward_diff(&f, axis).unwrap().values().iter().sum();
            let scale: f64 = f.values().iter().map(|x| x.abs()).sum::<f64>() / f.spec().dx();
            prop_assert!(s.abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn laplacian_is_sum_of_second_differences(v in prop::collection::vec(-5.0f64..5.0, 25..=25)) {
        // Under zero extension the ghost of D₊f is 0 rather than f₀/Δx, so
        // the composition only matches on periodic grids.
        let f = field_2d(v, 5, Boundary::Periodic);
        let lap = discrete_laplacian(&f);
        let mut sum = vec![0.0; f.len()];
        for axis in 0..2 {
            let dd = backward_diff(&forward_diff(&f, axis).unwrap(), axis).unwrap();
            for (s, x) in sum.iter_mut().zip(dd.values()) {
                *s += x;
            }
        }
        let dx2 = f.spec().dx().powi(2);
        for (a, b) in lap.values().iter().zip(&sum) {
            prop_assert!((a - b).abs() <= 1e-12 * 40.0 / dx2);
        }
    }

    #[test]
    fn l1_norm_is_a_norm(u in prop::collection::vec(-5.0f64..5.0, 12..=12), v in prop::collection::vec(-5.0f64..5.0, 12..=12), k in -3.0f64..3.0) {
        let f = field_1d(u, Boundary::ZeroExtension);
        let g = field_1d(v, Boundary::ZeroExtension);
        let sum = f.zip_with(&g, |a, b| a + b).unwrap();
        prop_assert!(l1_norm(&sum) <= l1_norm(&f) + l1_norm(&g) + 1e-12);
        let scaled = f.map(|x| k * x);
        prop_assert!((l1_norm(&scaled) - k.abs() * l1_norm(&f)).abs() <= 1e-12 * (1.0 + l1_norm(&scaled)));
    }

    #[test]
    fn restriction_conserves_the_integral(v in prop::collection::vec(-5.0f64..5.0, 64..=64), b in boundary()) {
        let fine = field_2d(v, 8, b);
        let coarse_spec = GridSpec::cube(2, 0.0, 1.0, 4, b).unwrap();
        let coarse = restrict_average(&fine, &coarse_spec).unwrap();
        let total = |f: &Field| f.spec().cell_volume() * f.values().iter().sum::<f64>();
        prop_assert!((total(&fine) - total(&coarse)).abs() <= 1e-13 * (1.0 + l1_norm(&fine)));
    }

    #[test]
    fn fitted_rate_ignores_error_scale(e in prop::collection::vec(1e-6f64..1.0, 4..=4), c in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = e.iter().enumerate().map(|(k, &x)| (0.5f64.powi(k as i32), x)).collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(h, x)| (h, c * x)).collect();
        let (a, b) = (fit_rate(&pts).unwrap(), fit_rate(&scaled).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn periodic_scheme_conserves_mass(v in prop::collection::vec(-1.0f64..1.0, 3..48)) {
        let f = field_1d(v, Boundary::Periodic);
        let op = SemiDiscreteOp::new(model(1), f.spec().clone()).unwrap();
        let r = op.rhs(&f).unwrap();
        let total: f64 = r.values().iter().sum();
        let scale: f64 = r.values().iter().map(|x| x.abs()).sum();
        prop_assert!(total.abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn scheme_operator_is_accretive(u in prop::collection::vec(-1.0f64..1.0, 16..=16), v in prop::collection::vec(-1.0f64..1.0, 16..=16), b in boundary()) {
        let f = field_2d(u, 4, b);
        let g = field_2d(v, 4, b);
        let op = SemiDiscreteOp::new(model(2), f.spec().clone()).unwrap();
        prop_assert!(op.accretivity_probe(&f, &g).unwrap().pass());
    }

    #[test]
    fn chi_integrates_derivatives(u in -3.0f64..3.0) {
        // ∫ Ψ'(ξ) χ(u; ξ) dξ = Ψ(u) − Ψ(0) with Ψ(ξ) = ξ³.
        let lo = u.min(0.0);
        let hi = u.max(0.0);
        if hi > lo {
            let v = integrate_value(|x| 3.0 * x * x * chi(u, x), lo, hi, &[]).unwrap();
            prop_assert!((v - u.powi(3)).abs() <= 1e-11);
        }
    }

    #[test]
    fn mollified_sign_identity(u in -2.0f64..2.0, xi in -2.5f64..2.5, eps in 1e-3f64..0.5) {
        let m = Mollifier::new(MollifierKernel::bump(), eps).unwrap();
        let lhs = m.sign_eps(xi) - 2.0 * m.chi_eps(u, xi);
        prop_assert!((lhs - m.sign_eps(xi - u)).abs() <= 1e-12);
    }

    #[test]
    fn snapshots_round_trip(v in prop::collection::vec(-1e3f64..1e3, 9..=9), t in 0.0f64..10.0) {
        let f = field_2d(v, 3, Boundary::Periodic).with_time(t);
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        let g = Field::read_snapshot(buf.as_slice()).unwrap();
        prop_assert_eq!(f.values(), g.values());
        prop_assert_eq!(f.time(), g.time());
        prop_assert!(f.spec().same_cells(g.spec()));
    }
}
