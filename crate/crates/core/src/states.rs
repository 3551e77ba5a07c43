//! States on `⊕ M_{n_k}` represented by block density matrices.
//!
//! A state `E` is realized by the unique density `ρ` with
//! `E(x) = Σ_k tr(ρ_k x_k)`. The dual norm of a hermitian functional is the
//! trace norm of its density, which is how functional norms and orthogonality
//! are computed here. This identification is a finite-dimensional choice;
//! abstract functionals without a density are not represented.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::linalg;
use crate::C64;

/// Absolute tolerance for hermiticity, positivity and unit trace of a density.
pub const STATE_TOL: f64 = 1e-12;
/// Trace drift up to this is silently renormalized; beyond it a density is rejected.
pub const RENORMALIZE_LIMIT: f64 = 1e-9;
/// Default threshold below which `E(p)` is treated as zero by [`State::compress`].
pub const ZERO_WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    shape: AlgebraShape,
    rho: Vec<DMatrix<C64>>,
}

impl State {
    /// Validates and normalizes a block density.
    ///
    /// Each block must be hermitian within [`STATE_TOL`] and the joint minimum
    /// eigenvalue must be ≥ `−STATE_TOL`. A total trace within
    /// [`RENORMALIZE_LIMIT`] of 1 is rescaled to exactly 1.
    pub fn new(shape: AlgebraShape, rho: Vec<DMatrix<C64>>) -> Result<Self> {
        let el = AlgebraElement::new(shape.clone(), rho)
            .map_err(|e| Error::InvalidState(e.to_string()))?;
        let mut rho = el.into_blocks();
        for (k, b) in rho.iter_mut().enumerate() {
            let defect = linalg::max_abs(&(&*b - b.adjoint()));
            if defect > STATE_TOL {
                return Err(Error::InvalidState(format!(
                    "block {k} is not hermitian (defect {defect:.3e})"
                )));
            }
            *b = linalg::hermitize(b);
        }
        let mut min_eig = f64::INFINITY;
        for b in &rho {
            if let Some(&v) = linalg::eigvalsh(b)?.first() {
                min_eig = min_eig.min(v);
            }
        }
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "density is not positive (min eigenvalue {min_eig:.3e})"
            )));
        }
        let tr: f64 = rho.iter().map(|b| linalg::trace(b).re).sum();
        if (tr - 1.0).abs() > RENORMALIZE_LIMIT {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        if tr != 1.0 {
            for b in &mut rho {
                *b /= C64::new(tr, 0.0);
            }
        }
        Ok(Self { shape, rho })
    }

    /// Normalizes an arbitrary positive block matrix to unit trace.
    pub fn from_positive(shape: AlgebraShape, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        let tr: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize trace {tr}")));
        }
        let scaled = blocks
            .into_iter()
            .map(|b| linalg::hermitize(&b) / C64::new(tr, 0.0))
            .collect();
        Self::new(shape, scaled)
    }

    /// Vector state `x ↦ ⟨v, x_k v⟩ / ⟨v, v⟩` supported on block `k`.
    pub fn pure(shape: &AlgebraShape, block: usize, v: &DVector<C64>) -> Result<Self> {
        let Some(&n) = shape.blocks().get(block) else {
            return Err(Error::InvalidInput(format!(
                "block index {block} out of range for shape {shape}"
            )));
        };
        if v.len() != n {
            return Err(Error::InvalidInput(format!(
                "vector has length {}, block {block} has dimension {n}",
                v.len()
            )));
        }
        let nsq = v.norm_squared();
        if nsq == 0.0 || !nsq.is_finite() {
            return Err(Error::ZeroVector);
        }
        let rho = shape
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                if k == block {
                    (v * v.adjoint()) / C64::new(nsq, 0.0)
                } else {
                    DMatrix::zeros(m, m)
                }
            })
            .collect();
        Self::new(shape.clone(), rho)
    }

    /// Normalized trace `x ↦ Σ_k tr(x_k) / Σ_k n_k`.
    pub fn tracial(shape: &AlgebraShape) -> Self {
        let size = shape.matrix_size() as f64;
        let rho = shape
            .blocks()
            .iter()
            .map(|&n| DMatrix::identity(n, n) / C64::new(size, 0.0))
            .collect();
        Self {
            shape: shape.clone(),
            rho,
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn density(&self) -> &[DMatrix<C64>] {
        &self.rho
    }

    /// The density as an algebra element.
    pub fn density_element(&self) -> AlgebraElement {
        AlgebraElement::new(self.shape.clone(), self.rho.clone()).expect("validated")
    }

    /// `E(x) = Σ_k tr(ρ_k x_k)`.
    pub fn evaluate(&self, x: &AlgebraElement) -> Result<C64> {
        if x.shape() != &self.shape {
            return Err(Error::shape_mismatch(&self.shape, x.shape()));
        }
        Ok(self
            .rho
            .iter()
            .zip(x.blocks())
            .map(|(r, b)| linalg::trace_of_product(r, b))
            .sum())
    }

    /// `‖E‖`, the trace norm of the density; 1 for every valid state.
    pub fn norm(&self) -> Result<f64> {
        let mut acc = 0.0;
        for b in &self.rho {
            acc += linalg::trace_norm(b)?;
        }
        Ok(acc)
    }

    /// `‖E − F‖ = Σ_k ‖ρ_k − σ_k‖₁`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if other.shape != self.shape {
            return Err(Error::shape_mismatch(&self.shape, &other.shape));
        }
        let mut acc = 0.0;
        for (a, b) in self.rho.iter().zip(&other.rho) {
            acc += linalg::trace_norm(&(a - b))?;
        }
        Ok(acc)
    }

    /// Largest entrywise difference between the densities.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if other.shape != self.shape {
            return Err(Error::shape_mismatch(&self.shape, &other.shape));
        }
        Ok(self
            .rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max))
    }

    /// Compression `pE(x) = E(pxp) / E(p)` by a self-adjoint projection.
    ///
    /// `tol` is used both for the projection test and as the zero-weight
    /// threshold on `E(p)`.
    pub fn compress(&self, p: &AlgebraElement, tol: f64) -> Result<Self> {
        if p.shape() != &self.shape {
            return Err(Error::shape_mismatch(&self.shape, p.shape()));
        }
        if !p.is_projection(tol) {
            return Err(Error::NotAProjection { tol });
        }
        let weight = self.evaluate(p)?;
        if !(weight.re > tol) {
            return Err(Error::ZeroWeight {
                weight: weight.re,
                tol,
            });
        }
        let blocks = self
            .rho
            .iter()
            .zip(p.blocks())
            .map(|(r, pb)| pb * r * pb)
            .collect();
        Self::from_positive(self.shape.clone(), blocks)
    }

    /// `E(y*y)·E(z*z) − |E(y*z)|²`, nonnegative for every state.
    pub fn cauchy_schwarz_gap(&self, y: &AlgebraElement, z: &AlgebraElement) -> Result<f64> {
        let yy = self.evaluate(&y.adjoint().mul(y)?)?.re;
        let zz = self.evaluate(&z.adjoint().mul(z)?)?.re;
        let yz = self.evaluate(&y.adjoint().mul(z)?)?;
        Ok(yy * zz - yz.norm_sqr())
    }
}

/// `‖E1‖` alone, or `‖E1 − E2‖`.
pub fn functional_norm(e1: &State, e2: Option<&State>) -> Result<f64> {
    match e2 {
        None => e1.norm(),
        Some(e2) => e1.distance(e2),
    }
}

/// Orthogonality of states: `‖E1 − E2‖ = ‖E1‖ + ‖E2‖ = 2`.
pub fn are_orthogonal(e1: &State, e2: &State, tol: f64) -> Result<bool> {
    Ok((e1.distance(e2)? - 2.0).abs() <= tol)
}
