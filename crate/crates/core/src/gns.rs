//! GNS construction: the Hilbert space, *-representation and cyclic vector
//! obtained from a state through the form `⟨y, z⟩ = E(y*z)`.
//!
//! Over the matrix units of a block the Gram matrix is `I_n ⊗ ρ_kᵀ`, so its
//! eigenvectors are `e_a ⊗ ū_j` for the eigenpairs `ρ_k u_j = μ_j u_j`. The
//! null space (the left kernel `{y : E(y*y) = 0}`) is quotiented out in that
//! eigenbasis, which orthonormalizes the quotient without pivoting. In the
//! resulting basis `(a, j)` of block `k`, `π(e_ab) = e_ab ⊗ I_{r_k}` exactly,
//! so the representation is stored as the kept block ranks and applied by
//! that formula.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::eigenstates::is_eigenstate;
use crate::error::{Error, Result};
use crate::linalg;
use crate::states::State;
use crate::C64;

/// Default relative cut for the Gram null space.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Required ratio between the last kept and first dropped Gram eigenvalue.
pub const MIN_SPECTRAL_GAP: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct GnsData {
    shape: AlgebraShape,
    hilbert_dim: usize,
    /// Kept Gram rank `r_k` per block; block `k` spans `n_k · r_k` coordinates.
    ranks: Vec<usize>,
    /// First Hilbert coordinate of each block.
    offsets: Vec<usize>,
    cyclic_vector: DVector<C64>,
    /// `hilbert_dim × N`: sends flattened coefficients to their class.
    quotient_map: DMatrix<C64>,
    /// Gram eigenvalues with multiplicity, descending.
    gram_spectrum: Vec<f64>,
}

/// Serializable digest of a construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnsSummary {
    pub hilbert_dim: usize,
    pub fidelity_defect: f64,
    pub cyclicity_margin: f64,
}

/// Gram matrix `G_ij = E(b_i* b_j)` over the matrix units.
///
/// For units of the same block `(e_ab)* e_cd = δ_ac e_bd`, so the entry is
/// `δ_ac ρ_db`; units of different blocks are orthogonal.
pub fn gram_matrix(e: &State) -> DMatrix<C64> {
    let shape = e.shape();
    let n_total = shape.dimension();
    let mut g = DMatrix::zeros(n_total, n_total);
    for (k, &n) in shape.blocks().iter().enumerate() {
        let off = shape.flat_offset(k);
        let rho = &e.density()[k];
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    g[(off + a * n + b, off + a * n + d)] = rho[(d, b)];
                }
            }
        }
    }
    g
}

pub fn gns_construct(e: &State, rank_tol: f64) -> Result<GnsData> {
    if !(rank_tol >= 0.0) {
        return Err(Error::InvalidInput(format!("rank_tol must be ≥ 0, got {rank_tol}")));
    }
    let shape = e.shape().clone();
    let eigs = e
        .density()
        .iter()
        .map(linalg::eigh)
        .collect::<Result<Vec<_>>>()?;

    let mut gram_spectrum: Vec<f64> = eigs
        .iter()
        .zip(shape.blocks())
        .flat_map(|(eig, &n)| eig.values.iter().flat_map(move |&mu| std::iter::repeat_n(mu, n)))
        .collect();
    gram_spectrum.sort_by(|a, b| b.total_cmp(a));
    let top = gram_spectrum[0];
    if !(top > 0.0) {
        return Err(Error::NumericalFailure("Gram matrix vanishes".into()));
    }
    let cut = rank_tol * top;
    let kept_count = gram_spectrum.iter().take_while(|&&mu| mu > cut).count();
    if kept_count < gram_spectrum.len() {
        let kept = gram_spectrum[kept_count - 1];
        let dropped = gram_spectrum[kept_count].abs();
        if dropped > 0.0 && kept / dropped < MIN_SPECTRAL_GAP {
            return Err(Error::NumericalFailure(format!(
                "no spectral gap at the rank cut: kept {kept:.3e}, dropped {dropped:.3e}"
            )));
        }
    }

    let mut ranks = Vec::with_capacity(shape.num_blocks());
    let mut offsets = Vec::with_capacity(shape.num_blocks());
    let mut dim = 0;
    for (eig, &n) in eigs.iter().zip(shape.blocks()) {
        let r = eig.values.iter().filter(|&&mu| mu > cut).count();
        offsets.push(dim);
        ranks.push(r);
        dim += n * r;
    }

    // Q = M^{1/2} W*: the class of e_ac has coordinate √μ_j u_j[c] at (a, j).
    let mut quotient_map = DMatrix::zeros(dim, shape.dimension());
    for (k, eig) in eigs.iter().enumerate() {
        let n = shape.blocks()[k];
        let r = ranks[k];
        let flat = shape.flat_offset(k);
        // Eigenvalues ascend, so the kept ones are the last r, taken largest first.
        for (j, col) in (n - r..n).rev().enumerate() {
            let root = eig.values[col].sqrt();
            for a in 0..n {
                for c in 0..n {
                    quotient_map[(offsets[k] + a * r + j, flat + a * n + c)] =
                        eig.vectors[(c, col)] * root;
                }
            }
        }
    }

    let one = DVector::from_vec(AlgebraElement::identity(&shape).flatten());
    let cyclic_vector = &quotient_map * one;
    Ok(GnsData {
        shape,
        hilbert_dim: dim,
        ranks,
        offsets,
        cyclic_vector,
        quotient_map,
        gram_spectrum,
    })
}

impl GnsData {
    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn cyclic_vector(&self) -> &DVector<C64> {
        &self.cyclic_vector
    }

    pub fn quotient_map(&self) -> &DMatrix<C64> {
        &self.quotient_map
    }

    pub fn gram_spectrum(&self) -> &[f64] {
        &self.gram_spectrum
    }

    /// Kept Gram rank of each block.
    pub fn block_ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Hilbert coordinates carrying block `k`; `π(x)` leaves them invariant.
    pub fn block_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = self.offsets[k];
        start..start + self.shape.blocks()[k] * self.ranks[k]
    }

    /// `π(x) = ⊕_k x_k ⊗ I_{r_k}`.
    pub fn rep(&self, x: &AlgebraElement) -> Result<DMatrix<C64>> {
        if x.shape() != &self.shape {
            return Err(Error::shape_mismatch(&self.shape, x.shape()));
        }
        let mut out = DMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for (k, xk) in x.blocks().iter().enumerate() {
            let (off, r) = (self.offsets[k], self.ranks[k]);
            for a in 0..xk.nrows() {
                for b in 0..xk.ncols() {
                    for j in 0..r {
                        out[(off + a * r + j, off + b * r + j)] = xk[(a, b)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// `π(b_i)` for the `i`-th matrix unit in flattening order.
    pub fn unit_image(&self, i: usize) -> DMatrix<C64> {
        let (k, a, b) = self.shape.unit_position(i);
        let (off, r) = (self.offsets[k], self.ranks[k]);
        let mut out = DMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for j in 0..r {
            out[(off + a * r + j, off + b * r + j)] = C64::new(1.0, 0.0);
        }
        out
    }

    /// `⟨w, π(e_ab) w⟩` for all units of block `k`, as the matrix `W Wᴴ`
    /// indexed `(b, a)` where `W[a, j] = w[(a, j)]`.
    fn unit_pairings(&self, w: &DVector<C64>, k: usize) -> DMatrix<C64> {
        let n = self.shape.blocks()[k];
        let (off, r) = (self.offsets[k], self.ranks[k]);
        let wk = DMatrix::from_fn(n, r, |a, j| w[off + a * r + j]);
        &wk * wk.adjoint()
    }

    /// Class of `y` in the quotient, equal to `π(y)·v`.
    pub fn class_of(&self, y: &AlgebraElement) -> Result<DVector<C64>> {
        if y.shape() != &self.shape {
            return Err(Error::shape_mismatch(&self.shape, y.shape()));
        }
        Ok(&self.quotient_map * DVector::from_vec(y.flatten()))
    }

    fn check_vector(&self, w: &DVector<C64>) -> Result<f64> {
        if w.len() != self.hilbert_dim {
            return Err(Error::InvalidInput(format!(
                "vector has length {}, Hilbert space has dimension {}",
                w.len(),
                self.hilbert_dim
            )));
        }
        let nsq = w.norm_squared();
        if nsq == 0.0 || !nsq.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(nsq)
    }

    /// `⟨w, π(x)w⟩ / ⟨w, w⟩`.
    pub fn vector_state_of(&self, w: &DVector<C64>, x: &AlgebraElement) -> Result<C64> {
        let nsq = self.check_vector(w)?;
        Ok(linalg::inner(w, &(self.rep(x)? * w)) / nsq)
    }

    /// The vector state of `w` as a density on the algebra.
    pub fn vector_state(&self, w: &DVector<C64>) -> Result<State> {
        let nsq = self.check_vector(w)?;
        // E_w(e_ab) = ρ_ba = (W Wᴴ)_ba.
        let blocks = (0..self.shape.num_blocks())
            .map(|k| linalg::hermitize(&(self.unit_pairings(w, k) / C64::new(nsq, 0.0))))
            .collect();
        State::from_positive(self.shape.clone(), blocks)
    }

    /// `(π(x)w = λw, E_w eigenstate of x at λ)`, both within `tol`.
    ///
    /// The eigenvector test is `‖π(x)w − λw‖ ≤ tol·‖w‖`; the eigenstate test
    /// accepts the certificate of `E_w` at residual `≤ tol`.
    pub fn vector_state_correspondence(
        &self,
        w: &DVector<C64>,
        x: &AlgebraElement,
        lambda: C64,
        tol: f64,
    ) -> Result<(bool, bool)> {
        let nsq = self.check_vector(w)?;
        let gap = (self.rep(x)? * w - w * lambda).norm();
        let is_eigenvector = gap <= tol * nsq.sqrt();
        let cert = is_eigenstate(&self.vector_state(w)?, x, lambda, tol)?;
        Ok((is_eigenvector, cert.accepted))
    }

    /// `max_i |⟨v, π(b_i)v⟩ − E(b_i)|` over the matrix units.
    pub fn fidelity_defect(&self, e: &State) -> Result<f64> {
        if e.shape() != &self.shape {
            return Err(Error::shape_mismatch(&self.shape, e.shape()));
        }
        let mut worst: f64 = 0.0;
        for (k, rho) in e.density().iter().enumerate() {
            let pairings = self.unit_pairings(&self.cyclic_vector, k);
            worst = worst.max((pairings - rho).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        Ok(worst)
    }

    /// Smallest singular value of `[π(b_1)v … π(b_N)v]`.
    pub fn cyclicity_margin(&self) -> Result<f64> {
        let mut images = DMatrix::zeros(self.hilbert_dim, self.shape.dimension());
        for i in 0..self.shape.dimension() {
            let (k, a, b) = self.shape.unit_position(i);
            let (off, r) = (self.offsets[k], self.ranks[k]);
            for j in 0..r {
                images[(off + a * r + j, i)] = self.cyclic_vector[off + b * r + j];
            }
        }
        Ok(linalg::singular_values(&images)?.last().copied().unwrap_or(0.0))
    }

    pub fn summary(&self, e: &State) -> Result<GnsSummary> {
        Ok(GnsSummary {
            hilbert_dim: self.hilbert_dim,
            fidelity_defect: self.fidelity_defect(e)?,
            cyclicity_margin: self.cyclicity_margin()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis(i: usize, n: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[i] = c(1.0);
        v
    }

    #[test]
    fn dimensions_of_standard_states() {
        let m2 = AlgebraShape::full(2).unwrap();
        let pure = State::pure(&m2, 0, &basis(0, 2)).unwrap();
        let g = gns_construct(&pure, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(g.hilbert_dim(), 2);
        assert!(g.fidelity_defect(&pure).unwrap() < 1e-15);

        let tr = State::tracial(&m2);
        assert_eq!(gns_construct(&tr, DEFAULT_RANK_TOL).unwrap().hilbert_dim(), 4);

        let comm = AlgebraShape::new(vec![1, 1]).unwrap();
        let rho = vec![DMatrix::from_element(1, 1, c(1.0)), DMatrix::from_element(1, 1, c(0.0))];
        let e = State::new(comm, rho).unwrap();
        let g = gns_construct(&e, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(g.hilbert_dim(), 1);
        assert!((g.cyclicity_margin().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_state_gives_identity_representation() {
        let m2 = AlgebraShape::full(2).unwrap();
        let pure = State::pure(&m2, 0, &basis(0, 2)).unwrap();
        let g = gns_construct(&pure, DEFAULT_RANK_TOL).unwrap();
        // Classes of e_11 and e_21 play the roles of e₁ and e₂.
        let w1 = g.class_of(&AlgebraElement::matrix_unit(&m2, 0, 0, 0)).unwrap();
        let w2 = g.class_of(&AlgebraElement::matrix_unit(&m2, 0, 1, 0)).unwrap();
        assert!((linalg::inner(&w1, &w2)).norm() < 1e-15);
        assert!((w1.norm() - 1.0).abs() < 1e-15);

        let x = AlgebraElement::diag(&[1.0, 2.0]).unwrap();
        assert_eq!(g.vector_state_correspondence(&w2, &x, c(2.0), 1e-8).unwrap(), (true, true));
        assert_eq!(g.vector_state_correspondence(&w2, &x, c(1.0), 1e-8).unwrap(), (false, false));

        let y = AlgebraElement::from_real_rows(2, &[0.3, -1.0, 2.0, 0.7]).unwrap();
        let e2 = State::pure(&m2, 0, &basis(1, 2)).unwrap();
        let via_gns = g.vector_state_of(&w2, &y).unwrap();
        assert!((via_gns - e2.evaluate(&y).unwrap()).norm() < 1e-15);
        assert!((g.vector_state_of(&w2, &AlgebraElement::identity(&m2)).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn errors() {
        let m2 = AlgebraShape::full(2).unwrap();
        let g = gns_construct(&State::tracial(&m2), DEFAULT_RANK_TOL).unwrap();
        assert!(matches!(g.vector_state_of(&DVector::zeros(4), &AlgebraElement::identity(&m2)), Err(Error::ZeroVector)));
        assert!(g.vector_state_of(&DVector::zeros(3), &AlgebraElement::identity(&m2)).is_err());
        assert!(gns_construct(&State::tracial(&m2), -1.0).is_err());
    }
}
