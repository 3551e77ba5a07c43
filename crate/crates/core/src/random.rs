//! Seeded random model for elements, states and projections.
//!
//! Entries are standard complex normal (`E|z|² = 1`). Hermitian elements are
//! hermitized draws; states are `AA*/tr(AA*)`, which is positive by
//! construction. Everything is driven by a ChaCha stream so results depend
//! only on the seed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::states::State;
use crate::C64;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    // Row-major fill so the draw order does not depend on storage layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

pub fn vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| complex_normal(rng))
}

pub fn element<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> AlgebraElement {
    let blocks = shape.blocks().iter().map(|&n| matrix(rng, n, n)).collect();
    AlgebraElement::new(shape.clone(), blocks).expect("shape-consistent blocks")
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> AlgebraElement {
    element(rng, shape).hermitian_part()
}

/// Random element rescaled to operator norm 1.
pub fn unit_element<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> AlgebraElement {
    let x = element(rng, shape);
    let norm = x.operator_norm().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    x.scale(C64::new(1.0 / norm, 0.0))
}

/// Faithful random state `AA*/tr(AA*)`.
pub fn state<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> State {
    let ranks = shape.blocks().to_vec();
    state_with_ranks(rng, shape, &ranks)
}

/// Random state whose density has rank `ranks[k]` in block `k` (0 allowed, not all 0).
pub fn state_with_ranks<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    ranks: &[usize],
) -> State {
    assert_eq!(ranks.len(), shape.num_blocks());
    assert!(ranks.iter().any(|&r| r > 0), "state needs a nonzero block");
    let blocks = shape
        .blocks()
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| {
            let a = matrix(rng, n, r.min(n));
            &a * a.adjoint()
        })
        .collect();
    State::from_positive(shape.clone(), blocks).expect("AA* is positive")
}

/// Haar-like unitary from the QR factorization of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let qr = matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Orthogonal projection of rank `ranks[k]` in block `k`, in a random basis.
pub fn projection<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    ranks: &[usize],
) -> AlgebraElement {
    assert_eq!(ranks.len(), shape.num_blocks());
    let blocks = shape
        .blocks()
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| {
            let u = unitary(rng, n);
            let cols = u.columns(0, r.min(n)).into_owned();
            &cols * cols.adjoint()
        })
        .collect();
    AlgebraElement::new(shape.clone(), blocks).expect("shape-consistent blocks")
}
