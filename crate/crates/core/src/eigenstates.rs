//! Eigenstates of algebra elements.
//!
//! A state `E` is an eigenstate of `x` with eigenvalue `λ` when
//! `E(yx) = λE(y)` for every `y`. Two independent criteria are computed:
//!
//! * the residual `E((x−λ)*(x−λ))`, which vanishes exactly for eigenstates;
//! * the definitional defect `max_y |E(yx) − λE(y)|` over a probe set that
//!   contains every matrix unit (a linear basis, so a zero defect there is the
//!   full universally quantified condition) plus seeded random probes.
//!
//! Only the right-multiplication form `E(yx)` is implemented.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{cluster_sorted, default_cluster_tol, AlgebraElement};
use crate::error::{Error, Result};
use crate::linalg;
use crate::random;
use crate::states::State;
use crate::C64;

/// Seed of the random part of the probe set.
pub const PROBE_SEED: u64 = 0xC57A;
/// Number of seeded random probes of unit operator norm.
pub const RANDOM_PROBES: usize = 32;
/// Imaginary part of a residual, relative to `max(1, ‖x − λ‖_F²)`, beyond
/// which evaluation is treated as broken.
const RESIDUAL_IMAG_LIMIT: f64 = 1e-9;

/// Acceptance tolerance `1e-10 · max(1, ‖x‖²)`.
pub fn default_acceptance_tol(norm: f64) -> f64 {
    1e-10 * (norm * norm).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenstateCertificate {
    /// Serialized as `[re, im]`.
    pub lambda: C64,
    /// `E((x−λ)*(x−λ))`.
    pub residual: f64,
    /// `max |E(yx) − λE(y)|` over the probe set.
    pub definition_defect: f64,
    pub probes_used: usize,
    /// `residual ≤ tol`.
    pub accepted: bool,
}

/// `E((x−λ)*(x−λ))` as a real number.
///
/// Evaluated in the cyclic form `Σ_k tr(d_k ρ_k d_k*)`, `d = x − λ`, which keeps
/// the rounding error proportional to the residual itself rather than to `‖d‖²`.
pub fn residual(e: &State, x: &AlgebraElement, lambda: C64) -> Result<f64> {
    if e.shape() != x.shape() {
        return Err(Error::shape_mismatch(e.shape(), x.shape()));
    }
    let d = x.shift(lambda);
    let value: C64 = d
        .blocks()
        .iter()
        .zip(e.density())
        .map(|(dk, rho)| {
            let d_rho = dk * rho;
            d_rho.iter().zip(dk.iter()).map(|(a, b)| a * b.conj()).sum::<C64>()
        })
        .sum();
    let scale = d.frobenius_norm().powi(2).max(1.0);
    if value.im.abs() > RESIDUAL_IMAG_LIMIT * scale {
        return Err(Error::NumericalFailure(format!(
            "residual has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `max_y |E(yx) − λE(y)|` over `probes`.
pub fn definition_defect(
    e: &State,
    x: &AlgebraElement,
    lambda: C64,
    probes: &[AlgebraElement],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for y in probes {
        let lhs = e.evaluate(&y.mul(x)?)?;
        let rhs = lambda * e.evaluate(y)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Definitional defect over the matrix-unit basis only.
pub fn matrix_unit_defect(e: &State, x: &AlgebraElement, lambda: C64) -> Result<f64> {
    definition_defect(e, x, lambda, &AlgebraElement::matrix_units(x.shape()))
}

/// All matrix units followed by [`RANDOM_PROBES`] seeded unit-norm elements.
pub fn probe_set(shape: &crate::AlgebraShape) -> Vec<AlgebraElement> {
    let mut probes = AlgebraElement::matrix_units(shape);
    let mut rng = random::seeded(PROBE_SEED);
    probes.extend((0..RANDOM_PROBES).map(|_| random::unit_element(&mut rng, shape)));
    probes
}

/// Measures both eigenstate criteria; acceptance is `residual ≤ tol`.
pub fn is_eigenstate(
    e: &State,
    x: &AlgebraElement,
    lambda: C64,
    tol: f64,
) -> Result<EigenstateCertificate> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tol must be ≥ 0, got {tol}")));
    }
    if e.shape() != x.shape() {
        return Err(Error::shape_mismatch(e.shape(), x.shape()));
    }
    let res = residual(e, x, lambda)?;
    let probes = probe_set(x.shape());
    let defect = definition_defect(e, x, lambda, &probes)?;
    Ok(EigenstateCertificate {
        lambda,
        residual: res,
        definition_defect: defect,
        probes_used: probes.len(),
        accepted: res <= tol,
    })
}

/// Eigenstate of a self-adjoint `x` at a spectral point `λ`, at the default
/// cluster tolerance.
pub fn eigenstate_for(x: &AlgebraElement, lambda: f64, tol: f64) -> Result<State> {
    let cluster_tol = default_cluster_tol(x.operator_norm()?);
    eigenstate_for_with(x, lambda, tol, cluster_tol)
}

/// Constructs a pure eigenstate supported on `ker(x − λ)`.
///
/// The eigenpairs whose eigenvalues cluster (within `cluster_tol`) with the
/// eigenvalue nearest to `λ` span the kernel. From that orthonormal basis the
/// vector whose largest-magnitude entry sits at the smallest global row index
/// is taken, with its phase rotated so that entry is real and positive.
///
/// `tol` bounds `‖x − x*‖`.
pub fn eigenstate_for_with(
    x: &AlgebraElement,
    lambda: f64,
    tol: f64,
    cluster_tol: f64,
) -> Result<State> {
    let defect = x.self_adjoint_defect()?;
    if defect > tol {
        return Err(Error::NotSelfAdjoint { defect, tol });
    }
    let dec = x.hermitian_part().spectral_decomposition()?;
    let pairs = dec.eigenpairs();
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let (nearest, distance) = values
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - lambda).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::NumericalFailure("empty spectrum".into()))?;
    if !(distance <= cluster_tol) {
        return Err(Error::NotInSpectrum {
            lambda,
            distance,
            cluster_tol,
        });
    }
    let cluster = cluster_sorted(&values, cluster_tol)
        .into_iter()
        .find(|r| r.contains(&nearest))
        .expect("every index lies in a cluster");

    let shape = x.shape();
    // (global row of the dominant entry, −|entry|) ranks the candidates.
    let mut best: Option<((usize, f64), usize)> = None;
    for i in cluster {
        let v = dec.eigenvector(pairs[i]);
        let (row, mag) = v
            .iter()
            .enumerate()
            .map(|(r, z)| (r, z.norm()))
            .fold((0, -1.0), |acc, (r, m)| if m > acc.1 { (r, m) } else { acc });
        let key = (shape.row_offset(pairs[i].block) + row, -mag);
        if best.is_none_or(|(k, _)| key.0 < k.0 || (key.0 == k.0 && key.1 < k.1)) {
            best = Some((key, i));
        }
    }
    let (_, chosen) = best.expect("cluster is nonempty");
    let at = pairs[chosen];
    let mut v = dec.eigenvector(at);
    let dominant = v
        .iter()
        .copied()
        .fold(C64::new(0.0, 0.0), |acc, z| if z.norm() > acc.norm() { z } else { acc });
    v *= dominant.conj() / dominant.norm();

    let state = State::pure(shape, at.block, &v)?;
    let norm = x.operator_norm()?;
    let res = residual(&state, x, C64::new(lambda, 0.0))?;
    if res > default_acceptance_tol(norm) {
        return Err(Error::NumericalFailure(format!(
            "synthesized eigenstate has residual {res:.3e}"
        )));
    }
    Ok(state)
}

/// `max_y |E(y(x−λ))|` over the matrix units and `trials` seeded random
/// probes of unit operator norm, i.e. how far `E` is from annihilating the
/// left ideal `A(x−λ)`.
pub fn ideal_annihilation_defect(
    e: &State,
    x: &AlgebraElement,
    lambda: C64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be ≥ 1".into()));
    }
    if e.shape() != x.shape() {
        return Err(Error::shape_mismatch(e.shape(), x.shape()));
    }
    let d = x.shift(lambda);
    let mut rng = random::seeded(seed);
    let mut probes = AlgebraElement::matrix_units(x.shape());
    probes.extend((0..trials).map(|_| random::unit_element(&mut rng, x.shape())));
    let mut worst: f64 = 0.0;
    for y in &probes {
        worst = worst.max(e.evaluate(&y.mul(&d)?)?.norm());
    }
    Ok(worst)
}

/// `dist(λ, σ(x))` for an accepted eigenstate, at the default cluster tolerance.
pub fn eigenvalue_in_spectrum_check(
    x: &AlgebraElement,
    e: &State,
    lambda: C64,
    tol: f64,
) -> Result<f64> {
    let res = residual(e, x, lambda)?;
    if !(res <= tol) {
        return Err(Error::NotAnEigenstate { residual: res, tol });
    }
    Ok(x.spectrum_default()?.distance(lambda))
}

/// Smallest over largest singular value of the stacked flattened densities.
///
/// A positive margin certifies that the states are linearly independent as
/// functionals.
pub fn independence_margin(states: &[State]) -> Result<f64> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidInput("need at least one state".into()))?;
    let shape = first.shape();
    let n = shape.dimension();
    let mut m = DMatrix::zeros(states.len(), n);
    for (i, s) in states.iter().enumerate() {
        if s.shape() != shape {
            return Err(Error::shape_mismatch(shape, s.shape()));
        }
        for (j, z) in s.density_element().flatten().into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    if states.len() > n {
        return Ok(0.0);
    }
    let sv = linalg::singular_values(&m)?;
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    Ok(if max > 0.0 { min / max } else { 0.0 })
}

/// Continuous function of sup norm 1 taking the values `1` at `λ1` and `−1` at `λ2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityWitness {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl OrthogonalityWitness {
    /// `clamp(2(t − λ2)/(λ1 − λ2) − 1, −1, 1)`.
    pub fn eval(&self, t: f64) -> f64 {
        (2.0 * (t - self.lambda2) / (self.lambda1 - self.lambda2) - 1.0).clamp(-1.0, 1.0)
    }
}

pub fn orthogonality_witness(lambda1: f64, lambda2: f64) -> Result<OrthogonalityWitness> {
    if lambda1 == lambda2 || !lambda1.is_finite() || !lambda2.is_finite() {
        return Err(Error::DegenerateWitness(lambda1, lambda2));
    }
    Ok(OrthogonalityWitness { lambda1, lambda2 })
}

/// `min_E E((x−λ)*(x−λ))` and a pure state attaining it.
///
/// The minimum of `tr(ρh)` over densities is the bottom eigenvalue of `h`,
/// attained at the corresponding eigenvector.
pub fn min_residual_over_states(x: &AlgebraElement, lambda: C64) -> Result<(f64, State)> {
    let d = x.shift(lambda);
    let h = d.adjoint().mul(&d)?;
    let dec = h.spectral_decomposition()?;
    let bottom = *dec
        .eigenpairs()
        .first()
        .ok_or_else(|| Error::NumericalFailure("empty spectrum".into()))?;
    let state = State::pure(x.shape(), bottom.block, &dec.eigenvector(bottom))?;
    Ok((bottom.value, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::AlgebraShape;
    use nalgebra::DVector;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis(i: usize, n: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[i] = c(1.0);
        v
    }

    fn m2() -> AlgebraShape {
        AlgebraShape::full(2).unwrap()
    }

    #[test]
    fn residual_examples() {
        let x = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
        let e2 = State::pure(&m2(), 0, &basis(1, 2)).unwrap();
        assert_eq!(residual(&e2, &x, c(2.0)).unwrap(), 0.0);

        let z = AlgebraElement::diag(&[1.0, -1.0]).unwrap();
        let mixed = State::tracial(&m2());
        assert!((residual(&mixed, &z, c(0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn certificate_examples() {
        let x = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
        let e2 = State::pure(&m2(), 0, &basis(1, 2)).unwrap();
        let cert = is_eigenstate(&e2, &x, c(2.0), 1e-12).unwrap();
        assert_eq!(cert.residual, 0.0);
        assert_eq!(cert.definition_defect, 0.0);
        assert!(cert.accepted);
        assert_eq!(cert.probes_used, 4 + RANDOM_PROBES);

        let cert = is_eigenstate(&State::tracial(&m2()), &x, c(1.5), 1e-12).unwrap();
        assert!((cert.residual - 0.25).abs() < 1e-15);
        assert!(!cert.accepted);
        assert!(is_eigenstate(&e2, &x, c(2.0), -1.0).is_err());
    }

    #[test]
    fn synthesis_simple_and_degenerate() {
        let x = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
        let e = eigenstate_for(&x, 2.0, 1e-10).unwrap();
        assert!(e.max_abs_diff(&State::pure(&m2(), 0, &basis(1, 2)).unwrap()).unwrap() < 1e-15);

        let x = AlgebraElement::diag(&[1.0, 1.0, 3.0]).unwrap();
        let e = eigenstate_for(&x, 1.0, 1e-10).unwrap();
        let rho = &e.density()[0];
        assert!(rho.row(2).iter().all(|z| z.norm() < 1e-15));
        assert!(rho.column(2).iter().all(|z| z.norm() < 1e-15));
        assert!(residual(&e, &x, c(1.0)).unwrap().abs() < 1e-15);
        // Deterministic choice: dominant entry in row 0.
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthesis_errors() {
        let x = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
        assert!(matches!(eigenstate_for(&x, 1.5, 1e-10), Err(Error::NotInSpectrum { .. })));
        let nil = AlgebraElement::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eigenstate_for(&nil, 0.0, 1e-10), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn synthesis_across_blocks() {
        let s = AlgebraShape::new(vec![1, 2]).unwrap();
        let x = AlgebraElement::new(
            s.clone(),
            vec![
                DMatrix::from_element(1, 1, c(5.0)),
                DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            ],
        )
        .unwrap();
        for lam in [-1.0, 1.0, 5.0] {
            let e = eigenstate_for(&x, lam, 1e-10).unwrap();
            assert!(residual(&e, &x, c(lam)).unwrap() < 1e-14);
        }
        let e5 = eigenstate_for(&x, 5.0, 1e-10).unwrap();
        assert!((e5.density()[0][(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ideal_defect_examples() {
        let x = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
        let e2 = State::pure(&m2(), 0, &basis(1, 2)).unwrap();
        assert!(ideal_annihilation_defect(&e2, &x, c(2.0), 16, 1).unwrap() <= 1e-10);

        let z = AlgebraElement::diag(&[1.0, -1.0]).unwrap();
        let d = ideal_annihilation_defect(&State::tracial(&m2()), &z, c(1.0), 8, 1).unwrap();
        // The e₂₂ probe alone gives |E(e₂₂(z − 1))| = |−2/2| = 1.
        assert!(d > 0.4);
        assert!(ideal_annihilation_defect(&e2, &x, c(2.0), 0, 1).is_err());
    }

    #[test]
    fn in_spectrum_check() {
        let x = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
        let e2 = State::pure(&m2(), 0, &basis(1, 2)).unwrap();
        assert_eq!(eigenvalue_in_spectrum_check(&x, &e2, c(2.0), 1e-12).unwrap(), 0.0);
        assert!(matches!(
            eigenvalue_in_spectrum_check(&x, &State::tracial(&m2()), c(2.0), 1e-12),
            Err(Error::NotAnEigenstate { .. })
        ));
    }

    #[test]
    fn margins() {
        let e1 = State::pure(&m2(), 0, &basis(0, 2)).unwrap();
        let e2 = State::pure(&m2(), 0, &basis(1, 2)).unwrap();
        assert!((independence_margin(&[e1.clone(), e2]).unwrap() - 1.0).abs() < 1e-15);
        assert!(independence_margin(&[e1.clone(), e1]).unwrap() < 1e-15);
        assert!(independence_margin(&[]).is_err());
    }

    #[test]
    fn witness_values() {
        let w = orthogonality_witness(1.0, -1.0).unwrap();
        assert_eq!(w.eval(1.0), 1.0);
        assert_eq!(w.eval(-1.0), -1.0);
        assert_eq!(w.eval(0.0), 0.0);
        assert_eq!(w.eval(10.0), 1.0);
        let w = orthogonality_witness(0.0, 1.0).unwrap();
        assert_eq!(w.eval(0.0), 1.0);
        assert_eq!(w.eval(1.0), -1.0);
        assert!(matches!(orthogonality_witness(2.0, 2.0), Err(Error::DegenerateWitness(..))));
    }

    #[test]
    fn variational_minimum() {
        let x = AlgebraElement::diag(&[0.0, 1.0]).unwrap();
        let (min, state) = min_residual_over_states(&x, c(0.5)).unwrap();
        assert!((min - 0.25).abs() < 1e-15);
        assert!((residual(&state, &x, c(0.5)).unwrap() - 0.25).abs() < 1e-15);

        let (min, _) = min_residual_over_states(&x, c(1.0)).unwrap();
        assert!(min.abs() < 1e-15);
    }
}
