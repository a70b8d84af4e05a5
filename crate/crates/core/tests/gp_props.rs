use maternact::data::gen_regression_1d;
use maternact::gp::GpRegressor;
use maternact::kernels::{MaternKernel, MaternParams};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn kernel(nu: f64, ell: f64) -> MaternKernel {
    MaternKernel(MaternParams::new(nu, ell).unwrap())
}

fn points(xs: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((xs.len(), 1), xs.to_vec()).unwrap()
}

/// Posterior mean and variance from an LU solve of the dense system.
fn oracle(nu: f64, ell: f64, xs: &[f64], ys: &[f64], noise: f64, xstar: f64) -> (f64, f64) {
    let p = MaternParams::new(nu, ell).unwrap();
    let n = xs.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        p.covariance((xs[i] - xs[j]).abs()) + if i == j { noise } else { 0.0 }
    });
    let ks = DVector::from_fn(n, |i, _| p.covariance((xs[i] - xstar).abs()));
    let lu = k.lu();
    let a = lu.solve(&DVector::from_column_slice(ys)).unwrap();
    let b = lu.solve(&ks).unwrap();
    (ks.dot(&a), p.covariance(0.0) - ks.dot(&b))
}

#[test]
fn matches_dense_solve() {
    let xs = [-1.3, -0.2, 0.4, 0.45, 1.7, 2.9];
    let ys = [0.3, -1.0, 0.8, 0.7, 0.1, -0.4];
    for nu in [0.5, 1.5, 2.5] {
        let g = GpRegressor::fit(kernel(nu, 0.8), points(&xs).view(), Array1::from(ys.to_vec()).view(), 0.05, 0.0)
            .unwrap();
        for xstar in [-3.0, -0.7, 0.42, 1.0, 5.0] {
            let (m, v) = g.predict(&[xstar]).unwrap();
            let (mo, vo) = oracle(nu, 0.8, &xs, &ys, 0.05, xstar);
            assert!((m - mo).abs() < 1e-10, "nu={nu} x={xstar}: {m} vs {mo}");
            assert!((v - vo).abs() < 1e-10, "nu={nu} x={xstar}: {v} vs {vo}");
        }
    }
}

#[test]
fn interpolates_with_tiny_noise() {
    let xs = [-2.0, -0.5, 0.3, 1.1, 2.6];
    let ys = [1.0, -0.5, 0.25, 2.0, -1.5];
    let g = GpRegressor::fit(kernel(2.5, 1.0), points(&xs).view(), Array1::from(ys.to_vec()).view(), 1e-8, 0.0)
        .unwrap();
    for (x, y) in xs.iter().zip(ys) {
        let (m, _) = g.predict(&[*x]).unwrap();
        assert!((m - y).abs() < 1e-3);
    }
}

#[test]
fn in_between_uncertainty_on_regression_task() {
    let d = gen_regression_1d(0);
    let y = Array1::from(d.y.real().unwrap().to_vec());
    let g = GpRegressor::fit(kernel(2.5, 1.0), d.x.view(), y.view(), 0.02 * 0.02, 0.0).unwrap();
    let v0 = g.predict(&[0.0]).unwrap().1;
    let vm = g.predict(&[-1.0]).unwrap().1;
    let vp = g.predict(&[1.0]).unwrap().1;
    assert!(v0 > vm && v0 > vp, "{v0} {vm} {vp}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variance_nonnegative_and_prior_far_away(
        xs in prop::collection::vec(-3.0f64..3.0, 1..12),
        seed_y in prop::collection::vec(-2.0f64..2.0, 12),
        ell in 0.3f64..2.0,
        nu_i in 0usize..3,
        probe in -10.0f64..10.0,
    ) {
        let nu = [0.5, 1.5, 2.5][nu_i];
        let ys: Vec<f64> = seed_y[..xs.len()].to_vec();
        let g = GpRegressor::fit(kernel(nu, ell), points(&xs).view(), Array1::from(ys).view(), 1e-4, 0.0).unwrap();
        let (_, v) = g.predict(&[probe]).unwrap();
        prop_assert!(v >= 0.0);
        let far = 3.0 + 60.0 * ell;
        let (m, v) = g.predict(&[far]).unwrap();
        prop_assert!(m.abs() < 1e-6);
        prop_assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reflection_symmetry(
        half in prop::collection::vec((0.1f64..3.0, -2.0f64..2.0), 1..6),
        probe in -4.0f64..4.0,
    ) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (x, y) in &half {
            xs.push(*x);
            ys.push(*y);
            xs.push(-*x);
            ys.push(*y);
        }
        let g = GpRegressor::fit(kernel(1.5, 1.0), points(&xs).view(), Array1::from(ys).view(), 1e-3, 0.0).unwrap();
        let (m1, v1) = g.predict(&[probe]).unwrap();
        let (m2, v2) = g.predict(&[-probe]).unwrap();
        prop_assert!((m1 - m2).abs() < 1e-10);
        prop_assert!((v1 - v2).abs() < 1e-10);
    }
}
