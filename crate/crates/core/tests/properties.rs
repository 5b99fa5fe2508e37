use std::f64::consts::PI;

use krein_core::grid::{
    antiderivative_multiplier, derivative_multiplier, fractional_derivative_multiplier, identity_defects,
    inverse_fractional_multiplier,
};
use krein_core::{inner_product, make_grid, RealField};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn field() -> impl Strategy<Value = RealField> {
    (prop::sample::select(vec![16usize, 64, 256]), 1.0..50.0f64)
        .prop_flat_map(|(n, ell)| (Just(n), Just(ell), prop::collection::vec(-1.0..1.0f64, n), 0.0..3.0f64))
        .prop_map(|(n, ell, raw, decay)| {
            let grid = make_grid(n, ell).unwrap();
            // Spectral decay varies from flat (rough fields) to smooth.
            let coeffs: Vec<f64> = raw
                .iter()
                .enumerate()
                .map(|(i, c)| c / (1.0 + i as f64).powf(decay))
                .collect();
            RealField::from_coefficients(grid, &coeffs)
        })
}

fn without_mean(f: &RealField) -> RealField {
    let mut c = f.coefficients();
    c[0] = 0.0;
    RealField::from_coefficients(f.grid().clone(), &c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hilbert_factorization(f in field()) {
        prop_assert!(identity_defects(&f).unwrap().hilbert_factorization <= TOL);
    }

    #[test]
    fn j_squared_is_minus_identity(f in field()) {
        prop_assert!(identity_defects(&f).unwrap().j_squared <= TOL);
    }

    #[test]
    fn antiderivative_is_skew(f in field()) {
        prop_assert!(identity_defects(&f).unwrap().skew <= TOL);
    }

    #[test]
    fn parseval(f in field()) {
        prop_assert!(identity_defects(&f).unwrap().parseval <= TOL);
    }

    #[test]
    fn antiderivative_inverts_derivative(f in field()) {
        let g = without_mean(&f);
        let back = derivative_multiplier(g.grid()).apply(&antiderivative_multiplier(g.grid()).apply(&g).unwrap()).unwrap();
        // The Nyquist mode is annihilated by every odd multiplier.
        let mut c = g.coefficients();
        let last = c.len() - 1;
        c[last] = 0.0;
        let target = RealField::from_coefficients(g.grid().clone(), &c);
        let err = back.zip_with(&target, |a, b| a - b).unwrap().norm();
        prop_assert!(err <= TOL * target.norm().max(1e-300));
    }

    #[test]
    fn fractional_powers_compose(f in field(), s in 0.1..2.0f64) {
        let g = without_mean(&f);
        let grid = g.grid();
        let up = fractional_derivative_multiplier(grid, s).unwrap().apply(&g).unwrap();
        let down = inverse_fractional_multiplier(grid, s).unwrap().apply(&up).unwrap();
        let err = down.zip_with(&g, |a, b| a - b).unwrap().norm();
        prop_assert!(err <= 1e-9 * g.norm().max(1e-300));
    }

    #[test]
    fn fractional_derivative_is_symmetric(f in field(), g in field(), s in 0.1..2.0f64) {
        prop_assume!(f.grid().n() == g.grid().n());
        let g = RealField::new(f.grid().clone(), g.values().to_vec()).unwrap();
        let m = fractional_derivative_multiplier(f.grid(), s).unwrap();
        let a = inner_product(&m.apply(&f).unwrap(), &g).unwrap();
        let b = inner_product(&f, &m.apply(&g).unwrap()).unwrap();
        let scale = m.apply(&f).unwrap().norm() * g.norm() + f.norm() * m.apply(&g).unwrap().norm();
        prop_assert!((a - b).abs() <= TOL * scale.max(1e-300));
    }
}

#[test]
fn derivative_of_a_single_mode() {
    let grid = make_grid(64, 10.0).unwrap();
    let w = PI / 10.0 * 3.0;
    let f = RealField::from_fn(grid.clone(), |x| (w * x).sin());
    let df = derivative_multiplier(&grid).apply(&f).unwrap();
    let expect = RealField::from_fn(grid, |x| w * (w * x).cos());
    assert!(df.zip_with(&expect, |a, b| a - b).unwrap().sup_norm() < 1e-12);
}
