mod common;

use common::*;
use cstate_core::calculus::{
    apply_function, chebyshev_approximant, function_transport_check, spectral_interval,
    transport_via_polynomials, DEFAULT_DEGREE_LADDER,
};
use cstate_core::eigenstates::{eigenstate_for, is_eigenstate, orthogonality_witness, residual};
use cstate_core::random;
use cstate_core::{AlgebraElement, AlgebraShape, FunctionSpec, ScalarFunction, C64};
use proptest::prelude::*;
use rand::Rng;

fn shapes() -> impl Strategy<Value = AlgebraShape> {
    prop::collection::vec(1usize..=4, 1..=3).prop_map(|b| AlgebraShape::new(b).unwrap())
}

fn real(v: f64) -> C64 {
    c(v, 0.0)
}

fn sa_tol(x: &AlgebraElement) -> f64 {
    1e-10 * x.operator_norm().unwrap().max(1.0)
}

fn functions(x: &AlgebraElement) -> Vec<ScalarFunction> {
    let ev = element_eigvalsh(x);
    let mut fs = vec![ScalarFunction::square(), ScalarFunction::cube(), ScalarFunction::exp(), ScalarFunction::abs()];
    if ev.len() > 1 && ev[0] < ev[ev.len() - 1] {
        fs.push(ScalarFunction::witness(orthogonality_witness(ev[0], ev[ev.len() - 1]).unwrap()));
    }
    fs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn square_matches_the_product(shape in shapes(), seed: u64) {
        let x = random::hermitian(&mut random::seeded(seed), &shape);
        let fx = apply_function(&x, &ScalarFunction::square(), sa_tol(&x)).unwrap();
        let xx = x.mul(&x).unwrap();
        let scale = xx.operator_norm().unwrap().max(1.0);
        for (got, want) in blocks_of(&fx).iter().zip(blocks_of(&xx)) {
            prop_assert!(max_abs_diff(got, &want) <= 1e-11 * scale);
        }
        let id = apply_function(&x, &ScalarFunction::identity(), sa_tol(&x)).unwrap();
        prop_assert!(id.max_abs_diff(&x).unwrap() <= 1e-12 * x.operator_norm().unwrap().max(1.0));
    }

    #[test]
    fn spectral_mapping(shape in shapes(), seed: u64) {
        let x = random::hermitian(&mut random::seeded(seed), &shape);
        let ev = element_eigvalsh(&x);
        for f in functions(&x) {
            let fx = apply_function(&x, &f, sa_tol(&x)).unwrap();
            let mut want: Vec<f64> = ev.iter().map(|&t| f.eval(t)).collect();
            want.sort_by(f64::total_cmp);
            let got = element_eigvalsh(&fx);
            let scale = want.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() <= 1e-9 * scale, "{}: {} vs {}", f.name(), g, w);
            }
            // f(x) commutes with x.
            let comm = fx.mul(&x).unwrap().sub(&x.mul(&fx).unwrap()).unwrap();
            prop_assert!(comm.frobenius_norm() <= 1e-9 * scale * x.operator_norm().unwrap().max(1.0));
        }
    }

    #[test]
    fn calculus_is_multiplicative(shape in shapes(), seed: u64) {
        let x = random::hermitian(&mut random::seeded(seed), &shape);
        let (f, g) = (ScalarFunction::exp(), ScalarFunction::cube());
        let tol = sa_tol(&x);
        let fg = apply_function(&x, &f.product(&g), tol).unwrap();
        let prod = apply_function(&x, &f, tol).unwrap().mul(&apply_function(&x, &g, tol).unwrap()).unwrap();
        let scale = fg.operator_norm().unwrap().max(1.0);
        prop_assert!(fg.max_abs_diff(&prod).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn polynomial_error_bounds_state_values(shape in shapes(), seed: u64, degree in 2usize..=16) {
        let mut rng = random::seeded(seed);
        let x = random::hermitian(&mut rng, &shape);
        let e = random::state(&mut rng, &shape);
        let f = ScalarFunction::exp();
        let p = chebyshev_approximant(&f, spectral_interval(&x).unwrap(), degree).unwrap();
        let diff = p.apply(&x).unwrap().sub(&apply_function(&x, &f, sa_tol(&x)).unwrap()).unwrap();
        for _ in 0..4 {
            let y = random::unit_element(&mut rng, &shape);
            let v = state_value(&e, &y.mul(&diff).unwrap()).norm();
            prop_assert!(v <= p.sup_error + 1e-10, "{} > {}", v, p.sup_error);
        }
    }
}

#[test]
fn fixture_values() {
    let x = AlgebraElement::diag(&[0.0, 1.0]).unwrap();
    let ex = apply_function(&x, &ScalarFunction::exp(), 1e-10).unwrap();
    assert!(ex.max_abs_diff(&AlgebraElement::diag(&[1.0, std::f64::consts::E]).unwrap()).unwrap() < 1e-15);

    let z = AlgebraElement::diag(&[1.0, -1.0]).unwrap();
    let w: FunctionSpec = "witness:1:-1".parse().unwrap();
    assert!(w.apply(&z, 1e-10).unwrap().max_abs_diff(&z).unwrap() < 1e-15);

    let line = ScalarFunction::new("line", |t| 3.0 * t - 0.5);
    assert!(chebyshev_approximant(&line, (-2.0, 5.0), 1).unwrap().sup_error <= 1e-13);
    let abs = chebyshev_approximant(&ScalarFunction::abs(), (-1.0, 1.0), 64).unwrap();
    assert!(abs.sup_error <= 0.05);
    assert!(abs.sup_error > 1e-4);
    assert!(chebyshev_approximant(&ScalarFunction::exp(), (0.0, 1.0), 16).unwrap().sup_error <= 1e-12);

    let nil = AlgebraElement::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!(apply_function(&nil, &ScalarFunction::exp(), 1e-10).is_err());
    let log = ScalarFunction::new("log", f64::ln);
    assert!(apply_function(&AlgebraElement::diag(&[0.0, 1.0]).unwrap(), &log, 1e-10).is_err());
}

#[test]
fn sup_error_matches_an_independent_grid() {
    let f = ScalarFunction::exp();
    for degree in [2, 4, 8] {
        let p = chebyshev_approximant(&f, (-1.5, 2.0), degree).unwrap();
        // Offset grid, distinct from the measurement grid.
        let err = (0..5000)
            .map(|i| -1.5 + 3.5 * (i as f64 + 0.5) / 5000.0)
            .map(|t| (p.eval(t) - t.exp()).abs())
            .fold(0.0, f64::max);
        assert!((err - p.sup_error).abs() <= 0.05 * p.sup_error, "{err} vs {}", p.sup_error);
    }
}

#[test]
fn eigenstates_transport_through_functions() {
    let mut rng = random::seeded(0xC57A);
    let shape = AlgebraShape::new(vec![2, 3]).unwrap();
    for _ in 0..50 {
        let x = random::hermitian(&mut rng, &shape);
        let points: Vec<f64> = x.spectrum_default().unwrap().points.iter().map(|p| p.value.re).collect();
        let lambda = points[rng.random_range(0..points.len())];
        let e = eigenstate_for(&x, lambda, sa_tol(&x)).unwrap();
        for f in functions(&x) {
            let fx = apply_function(&x, &f, sa_tol(&x)).unwrap();
            let bound = 1e-9 * fx.operator_norm().unwrap().powi(2).max(1.0);
            let r = function_transport_check(&e, &x, lambda, &f).unwrap();
            assert!(r <= bound, "{} {r}", f.name());
            let cert = is_eigenstate(&e, &fx, real(f.eval(lambda)), bound).unwrap();
            assert!(cert.accepted);
        }
    }
}

#[test]
fn polynomial_path_converges() {
    let mut rng = random::seeded(21);
    let shape = AlgebraShape::full(4).unwrap();
    let exp = ScalarFunction::exp();
    for _ in 0..20 {
        let x = random::hermitian(&mut rng, &shape);
        let lambda = x.spectrum_default().unwrap().points[0].value.re;
        let e = eigenstate_for(&x, lambda, sa_tol(&x)).unwrap();
        let seq = transport_via_polynomials(&e, &x, lambda, &exp, &DEFAULT_DEGREE_LADDER).unwrap();
        assert_eq!(seq.len(), DEFAULT_DEGREE_LADDER.len());
        let interval = spectral_interval(&x).unwrap();
        let sup_f = exp.eval(interval.1).max(1.0);
        for (&d, &r) in DEFAULT_DEGREE_LADDER.iter().zip(&seq) {
            let p = chebyshev_approximant(&exp, interval, d).unwrap();
            let bound = (p.sup_error + (p.eval(lambda) - lambda.exp()).abs()) * 4.0 * sup_f;
            assert!(r <= bound.max(1e-12), "degree {d}: {r} > {bound}");
        }
        assert!(seq[3] <= 1e-10, "{seq:?}");
        assert!(*seq.last().unwrap() <= 1e-8);
        let exact = residual(&e, &apply_function(&x, &exp, sa_tol(&x)).unwrap(), real(lambda.exp())).unwrap();
        assert!(exact <= 1e-10);

        // Polynomials of degree ≤ d are reproduced at once.
        let cube = ScalarFunction::cube();
        let seq = transport_via_polynomials(&e, &x, lambda, &cube, &[3, 4]).unwrap();
        let scale = x.operator_norm().unwrap().powi(6).max(1.0);
        assert!(seq.iter().all(|&r| r <= 1e-10 * scale), "{seq:?}");
    }
}
