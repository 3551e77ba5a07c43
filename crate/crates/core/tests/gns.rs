mod common;

use common::*;
use cstate_core::eigenstates::is_eigenstate;
use cstate_core::gns::{gns_construct, gram_matrix, DEFAULT_RANK_TOL};
use cstate_core::random;
use cstate_core::{AlgebraElement, AlgebraShape, Error, State, C64};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn shapes() -> impl Strategy<Value = AlgebraShape> {
    prop::collection::vec(1usize..=3, 1..=3).prop_map(|b| AlgebraShape::new(b).unwrap())
}

fn random_state(shape: &AlgebraShape, seed: u64) -> State {
    let mut rng = random::seeded(seed);
    if seed.is_multiple_of(2) {
        random::state(&mut rng, shape)
    } else {
        let ranks: Vec<usize> = shape.blocks().iter().map(|&n| rng.random_range(0..=n)).collect();
        let ranks = if ranks.iter().all(|&r| r == 0) { vec![1; ranks.len()] } else { ranks };
        random::state_with_ranks(&mut rng, shape, &ranks)
    }
}

fn to_m(m: &DMatrix<C64>) -> M {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Gram matrix built entry by entry from `E(b_i* b_j)`.
fn gram_oracle(e: &State) -> M {
    let units = AlgebraElement::matrix_units(e.shape());
    units
        .iter()
        .map(|bi| units.iter().map(|bj| state_value(e, &bi.adjoint().mul(bj).unwrap())).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn representation_is_a_unital_star_homomorphism(shape in shapes(), seed: u64) {
        let e = random_state(&shape, seed);
        let g = gns_construct(&e, DEFAULT_RANK_TOL).unwrap();
        let mut rng = random::seeded(seed ^ 1);
        let id = g.rep(&AlgebraElement::identity(&shape)).unwrap();
        prop_assert!((id - DMatrix::identity(g.hilbert_dim(), g.hilbert_dim())).camax() <= 1e-10);
        for _ in 0..10 {
            let x = random::element(&mut rng, &shape);
            let y = random::element(&mut rng, &shape);
            let scale = (x.frobenius_norm() * y.frobenius_norm()).max(1.0);
            let lhs = g.rep(&x.mul(&y).unwrap()).unwrap();
            let rhs = g.rep(&x).unwrap() * g.rep(&y).unwrap();
            prop_assert!((lhs - rhs).camax() <= 1e-10 * scale);
            let adj = g.rep(&x.adjoint()).unwrap() - g.rep(&x).unwrap().adjoint();
            prop_assert!(adj.camax() <= 1e-10 * x.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn cyclic_vector_reproduces_the_state(shape in shapes(), seed: u64) {
        let e = random_state(&shape, seed);
        let g = gns_construct(&e, DEFAULT_RANK_TOL).unwrap();
        let v = g.cyclic_vector();
        for x in AlgebraElement::matrix_units(&shape) {
            let got = v.dotc(&(g.rep(&x).unwrap() * v));
            prop_assert!((got - state_value(&e, &x)).norm() <= 1e-10);
        }
        prop_assert!(g.fidelity_defect(&e).unwrap() <= 1e-10);
        prop_assert!(g.cyclicity_margin().unwrap() >= 1e-8);
        // Classes of elements are π(y)v.
        let y = random::element(&mut random::seeded(seed ^ 2), &shape);
        let diff = g.class_of(&y).unwrap() - g.rep(&y).unwrap() * v;
        prop_assert!(diff.camax() <= 1e-10 * y.frobenius_norm().max(1.0));
    }

    #[test]
    fn dimension_equals_the_gram_rank(shape in shapes(), seed: u64) {
        let e = random_state(&shape, seed);
        let g = gns_construct(&e, DEFAULT_RANK_TOL).unwrap();
        let oracle = gram_oracle(&e);
        prop_assert!(max_abs_diff(&to_m(&gram_matrix(&e)), &oracle) <= 1e-15);
        prop_assert_eq!(g.hilbert_dim(), hermitian_rank(&oracle, DEFAULT_RANK_TOL));
        prop_assert!(g.hilbert_dim() <= shape.dimension());
        let faithful = e.density().iter().all(|r| r.clone().symmetric_eigenvalues().min() > 1e-6);
        if faithful {
            prop_assert_eq!(g.hilbert_dim(), shape.dimension());
        }
    }

    #[test]
    fn vector_states_match_direct_evaluation(shape in shapes(), seed: u64) {
        let e = random_state(&shape, seed);
        let g = gns_construct(&e, DEFAULT_RANK_TOL).unwrap();
        let mut rng = random::seeded(seed ^ 3);
        let w = random::vector(&mut rng, g.hilbert_dim());
        let ew = g.vector_state(&w).unwrap();
        for _ in 0..5 {
            let x = random::element(&mut rng, &shape);
            let direct = w.dotc(&(g.rep(&x).unwrap() * &w)) / w.norm_squared();
            prop_assert!((g.vector_state_of(&w, &x).unwrap() - direct).norm() <= 1e-12 * x.frobenius_norm().max(1.0));
            prop_assert!((state_value(&ew, &x) - direct).norm() <= 1e-10 * x.frobenius_norm().max(1.0));
        }
    }
}

#[test]
fn eigenvector_and_eigenstate_flags_agree() {
    let mut rng = random::seeded(0xC57A);
    let mut seen = [0usize; 2];
    for (trial, shape) in [vec![2], vec![3], vec![1, 2], vec![2, 2]].iter().cycle().take(200).enumerate() {
        let shape = AlgebraShape::new(shape.clone()).unwrap();
        let e = random_state(&shape, trial as u64);
        let g = gns_construct(&e, DEFAULT_RANK_TOL).unwrap();
        let x = random::hermitian(&mut rng, &shape);
        let pix = g.rep(&x).unwrap();
        // Independent eigenpairs of π(x) from nalgebra's own solver.
        let eig = pix.clone().symmetric_eigen();
        let j = rng.random_range(0..g.hilbert_dim());
        let (w, lambda): (DVector<C64>, f64) = match trial % 3 {
            0 => (eig.eigenvectors.column(j).into_owned(), eig.eigenvalues[j]),
            1 => (random::vector(&mut rng, g.hilbert_dim()), eig.eigenvalues[j]),
            _ => (eig.eigenvectors.column(j).into_owned(), eig.eigenvalues[j] + 0.5),
        };
        let (vec_flag, state_flag) = g.vector_state_correspondence(&w, &x, c(lambda, 0.0), 1e-8).unwrap();
        assert_eq!(vec_flag, state_flag, "trial {trial}");
        seen[vec_flag as usize] += 1;
        // The induced state is exactly E_w.
        let cert = is_eigenstate(&g.vector_state(&w).unwrap(), &x, c(lambda, 0.0), 1e-8).unwrap();
        assert_eq!(cert.accepted, state_flag);
    }
    assert!(seen[0] > 50 && seen[1] > 50, "{seen:?}");
}

#[test]
fn fixture_values() {
    let m2 = AlgebraShape::full(2).unwrap();
    let e1 = State::pure(&m2, 0, &DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
    let g = gns_construct(&e1, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(g.hilbert_dim(), 2);
    // Unitarily equivalent to the identity representation: π(x) has the spectrum of x.
    let x = AlgebraElement::from_real_rows(2, &[2.0, 1.0, 1.0, -1.0]).unwrap();
    let mut a = jacobi_eigvalsh(&to_m(&g.rep(&x).unwrap()));
    let mut b = element_eigvalsh(&x);
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
    assert!(g.fidelity_defect(&e1).unwrap() < 1e-15);

    assert_eq!(gns_construct(&State::tracial(&m2), DEFAULT_RANK_TOL).unwrap().hilbert_dim(), 4);

    let comm = AlgebraShape::new(vec![1, 1]).unwrap();
    let rho = vec![DMatrix::from_element(1, 1, c(1.0, 0.0)), DMatrix::from_element(1, 1, c(0.0, 0.0))];
    let e = State::new(comm.clone(), rho).unwrap();
    assert_eq!(gns_construct(&e, DEFAULT_RANK_TOL).unwrap().hilbert_dim(), 1);

    // Identity representation of M₂ via the classes of e_11 and e_21.
    let w2 = g.class_of(&AlgebraElement::matrix_unit(&m2, 0, 1, 0)).unwrap();
    let d = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
    assert_eq!(g.vector_state_correspondence(&w2, &d, c(2.0, 0.0), 1e-8).unwrap(), (true, true));
    assert_eq!(g.vector_state_correspondence(&w2, &d, c(1.0, 0.0), 1e-8).unwrap(), (false, false));
    assert!((g.vector_state_of(&g.cyclic_vector().clone(), &AlgebraElement::identity(&m2)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn ambiguous_rank_is_a_numerical_failure() {
    let m3 = AlgebraShape::full(3).unwrap();
    let diag = |v: [f64; 3]| vec![DMatrix::from_diagonal(&DVector::from_vec(v.map(|t| c(t, 0.0)).to_vec()))];
    // A clean cut: kept 1, dropped 1e-14.
    let e = State::new(m3.clone(), diag([1.0 - 1e-14, 1e-14, 0.0])).unwrap();
    assert_eq!(gns_construct(&e, 1e-10).unwrap().hilbert_dim(), 3);
    // Kept 2e-10 and dropped 5e-11 straddle the cut with a gap of only 4.
    let e = State::new(m3, diag([1.0 - 2.5e-10, 2e-10, 5e-11])).unwrap();
    assert!(matches!(gns_construct(&e, 1e-10), Err(Error::NumericalFailure(_))));
}
