//! Finite-dimensional C*-algebras realized as direct sums of full matrix
//! algebras `M_{n_1} ⊕ … ⊕ M_{n_k}`, and their elements.
//!
//! Every finite-dimensional C*-algebra is *-isomorphic to such a sum, so an
//! element is stored as one dense complex block per summand. The spectrum of
//! an element is computed in the ambient full matrix algebra: spectral
//! permanence for unital C*-subalgebras makes the two spectra coincide.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Eigh};
use crate::C64;

/// Relative factor of the default spectral clustering tolerance.
pub const CLUSTER_TOL_FACTOR: f64 = 1e-8;
/// Relative factor of the default self-adjointness tolerance.
pub const SELF_ADJOINT_TOL_FACTOR: f64 = 1e-10;

/// Default cluster tolerance `1e-8 · max(1, ‖x‖)`.
pub fn default_cluster_tol(norm: f64) -> f64 {
    CLUSTER_TOL_FACTOR * norm.max(1.0)
}

/// Default self-adjointness tolerance `1e-10 · max(1, ‖x‖)`.
pub fn default_self_adjoint_tol(norm: f64) -> f64 {
    SELF_ADJOINT_TOL_FACTOR * norm.max(1.0)
}

/// Block dimensions `[n_1, …, n_k]` of the algebra `⊕ M_{n_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape {
    blocks: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidShape("no blocks".into()));
        }
        if let Some(k) = blocks.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("block {k} has dimension 0")));
        }
        Ok(Self { blocks })
    }

    /// Single full matrix algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Vector-space dimension `Σ n_k²` of the algebra.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Size `Σ n_k` of the block-diagonal matrices realizing the algebra.
    pub fn matrix_size(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Row offset of block `k` inside the block-diagonal matrix.
    pub fn row_offset(&self, k: usize) -> usize {
        self.blocks[..k].iter().sum()
    }

    /// Offset of block `k` in the flattened coefficient vector.
    pub fn flat_offset(&self, k: usize) -> usize {
        self.blocks[..k].iter().map(|n| n * n).sum()
    }

    /// `(block, row, col)` of the `i`-th matrix unit in flattening order.
    pub fn unit_position(&self, mut i: usize) -> (usize, usize, usize) {
        for (k, &n) in self.blocks.iter().enumerate() {
            if i < n * n {
                return (k, i / n, i % n);
            }
            i -= n * n;
        }
        panic!("matrix unit index out of range for shape {self}");
    }
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = Error;
    fn try_from(blocks: Vec<usize>) -> Result<Self> {
        Self::new(blocks)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(shape: AlgebraShape) -> Self {
        shape.blocks
    }
}

impl fmt::Display for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, n) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "]")
    }
}

impl std::str::FromStr for AlgebraShape {
    type Err = Error;

    /// Accepts `4`, `2,3` or `[2, 3]`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        let blocks = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidShape(format!("cannot parse `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }
}

/// An element of `⊕ M_{n_k}`, stored blockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<DMatrix<C64>>,
}

impl AlgebraElement {
    pub fn new(shape: AlgebraShape, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::InvalidInput(format!(
                "shape {shape} has {} blocks, got {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(shape.blocks()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::InvalidInput(format!(
                    "block {k} is {}×{}, expected {n}×{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { shape, blocks })
    }

    /// Infers the shape from square blocks.
    pub fn from_blocks(blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        for (k, b) in blocks.iter().enumerate() {
            if b.nrows() != b.ncols() {
                return Err(Error::InvalidInput(format!("block {k} is not square")));
            }
        }
        let shape = AlgebraShape::new(blocks.iter().map(|b| b.nrows()).collect())?;
        Ok(Self { shape, blocks })
    }

    /// Element of `M_n` from a single square matrix.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        Self::from_blocks(vec![m])
    }

    /// Single-block element from real row-major entries.
    pub fn from_real_rows(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::InvalidInput(format!("expected {} entries", n * n)));
        }
        Self::from_matrix(DMatrix::from_row_iterator(
            n,
            n,
            rows.iter().map(|&r| C64::new(r, 0.0)),
        ))
    }

    /// Single-block real diagonal element.
    pub fn diag(values: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        Self::from_matrix(DMatrix::from_diagonal(&d))
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape.blocks().iter().map(|&n| DMatrix::identity(n, n)).collect();
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape.blocks().iter().map(|&n| DMatrix::zeros(n, n)).collect();
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    /// Scalar multiple of the unit.
    pub fn scalar(shape: &AlgebraShape, c: C64) -> Self {
        Self::identity(shape).scale(c)
    }

    /// Matrix unit `e_{ij}` of block `k`.
    pub fn matrix_unit(shape: &AlgebraShape, k: usize, i: usize, j: usize) -> Self {
        let mut x = Self::zero(shape);
        x.blocks[k][(i, j)] = C64::new(1.0, 0.0);
        x
    }

    /// All matrix units in flattening order; they form a linear basis of the algebra.
    pub fn matrix_units(shape: &AlgebraShape) -> Vec<Self> {
        (0..shape.dimension())
            .map(|idx| {
                let (k, i, j) = shape.unit_position(idx);
                Self::matrix_unit(shape, k, i, j)
            })
            .collect()
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &DMatrix<C64> {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<DMatrix<C64>> {
        self.blocks
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape_mismatch(&self.shape, &other.shape));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>,
    ) -> Result<Self> {
        self.check_shape(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Ok(Self {
            shape: self.shape.clone(),
            blocks,
        })
    }

    fn map_blocks(&self, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    /// Blockwise conjugate transpose `x*`.
    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|b| b * c)
    }

    /// `x − λ·1`.
    pub fn shift(&self, lambda: C64) -> Self {
        let mut out = self.clone();
        for b in &mut out.blocks {
            for i in 0..b.nrows() {
                b[(i, i)] -= lambda;
            }
        }
        out
    }

    /// `xⁿ`, with `x⁰ = 1`.
    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity(&self.shape);
        for _ in 0..n {
            acc = acc.mul(self).expect("same shape");
        }
        acc
    }

    /// `(x + x*)/2`.
    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(linalg::hermitize)
    }

    /// Coefficients in the matrix-unit basis: blocks concatenated, each row-major.
    pub fn flatten(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.shape.dimension());
        for b in &self.blocks {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    out.push(b[(i, j)]);
                }
            }
        }
        out
    }

    pub fn from_flat(shape: &AlgebraShape, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() != shape.dimension() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for shape {shape}, got {}",
                shape.dimension(),
                coeffs.len()
            )));
        }
        let mut offset = 0;
        let blocks = shape
            .blocks()
            .iter()
            .map(|&n| {
                let b = DMatrix::from_row_slice(n, n, &coeffs[offset..offset + n * n]);
                offset += n * n;
                b
            })
            .collect();
        Ok(Self {
            shape: shape.clone(),
            blocks,
        })
    }

    /// The block-diagonal matrix realizing the element.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let size = self.shape.matrix_size();
        let mut out = DMatrix::zeros(size, size);
        for (k, b) in self.blocks.iter().enumerate() {
            let off = self.shape.row_offset(k);
            out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        }
        out
    }

    /// Operator (C*) norm: largest singular value over all blocks.
    pub fn operator_norm(&self) -> Result<f64> {
        let mut norm: f64 = 0.0;
        for b in &self.blocks {
            norm = norm.max(linalg::spectral_norm(b)?);
        }
        Ok(norm)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max))
    }

    /// `‖x − x*‖`.
    pub fn self_adjoint_defect(&self) -> Result<f64> {
        self.sub(&self.adjoint())?.operator_norm()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        matches!(self.self_adjoint_defect(), Ok(d) if d <= tol)
    }

    /// Self-adjoint and `‖x² − x‖ ≤ tol`.
    pub fn is_projection(&self, tol: f64) -> bool {
        if !self.is_self_adjoint(tol) {
            return false;
        }
        let sq = self.mul(self).expect("same shape");
        matches!(sq.sub(self).and_then(|d| d.operator_norm()), Ok(d) if d <= tol)
    }

    /// Self-adjoint and the hermitian part has no eigenvalue below `−tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        if !self.is_self_adjoint(tol) {
            return false;
        }
        self.blocks.iter().all(|b| match linalg::eigvalsh(b) {
            Ok(vals) => vals.first().is_none_or(|&v| v >= -tol),
            Err(_) => false,
        })
    }

    /// Eigendecomposition of the hermitian part, block by block.
    pub fn spectral_decomposition(&self) -> Result<SpectralDecomposition> {
        let blocks = self.blocks.iter().map(linalg::eigh).collect::<Result<Vec<_>>>()?;
        Ok(SpectralDecomposition {
            shape: self.shape.clone(),
            blocks,
        })
    }

    /// Spectrum with eigenvalues closer than `cluster_tol` merged.
    ///
    /// Self-adjointness is detected with [`default_self_adjoint_tol`]; in that
    /// case the hermitian part is diagonalized and the points are real and
    /// ascending. Otherwise the complex Schur form of each block is used.
    pub fn spectrum(&self, cluster_tol: f64) -> Result<SpectrumReport> {
        if !(cluster_tol >= 0.0) {
            return Err(Error::InvalidInput(format!("cluster_tol must be ≥ 0, got {cluster_tol}")));
        }
        let norm = self.operator_norm()?;
        let is_sa = self.self_adjoint_defect()? <= default_self_adjoint_tol(norm);
        let points = if is_sa {
            let mut vals = Vec::with_capacity(self.shape.matrix_size());
            for b in &self.blocks {
                vals.extend(linalg::eigvalsh(b)?);
            }
            vals.sort_by(f64::total_cmp);
            cluster_sorted(&vals, cluster_tol)
                .into_iter()
                .map(|r| SpectralPoint {
                    value: C64::new(mean(&vals[r.clone()]), 0.0),
                    multiplicity: r.len(),
                })
                .collect()
        } else {
            let mut vals = Vec::with_capacity(self.shape.matrix_size());
            for b in &self.blocks {
                vals.extend(linalg::eigvals_general(b)?);
            }
            cluster_complex(&vals, cluster_tol)
        };
        Ok(SpectrumReport {
            points,
            is_self_adjoint: is_sa,
            cluster_tolerance: cluster_tol,
        })
    }

    /// Spectrum at the default cluster tolerance.
    pub fn spectrum_default(&self) -> Result<SpectrumReport> {
        self.spectrum(default_cluster_tol(self.operator_norm()?))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Groups ascending values into maximal runs whose consecutive gaps are ≤ `tol`.
pub(crate) fn cluster_sorted(sorted: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Single-linkage clustering of complex eigenvalues, sorted by (re, im).
fn cluster_complex(vals: &[C64], tol: f64) -> Vec<SpectralPoint> {
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (vals[i] - vals[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<C64>> = Default::default();
    for (i, &v) in vals.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(v);
    }
    let mut points: Vec<SpectralPoint> = groups
        .into_values()
        .map(|g| SpectralPoint {
            value: g.iter().sum::<C64>() / g.len() as f64,
            multiplicity: g.len(),
        })
        .collect();
    points.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    points
}

/// Hermitian eigendecomposition of each block of an element.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub shape: AlgebraShape,
    pub blocks: Vec<Eigh>,
}

/// One eigenpair of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenIndex {
    pub block: usize,
    pub index: usize,
    pub value: f64,
}

impl SpectralDecomposition {
    /// All eigenpairs, sorted by eigenvalue then by (block, index).
    pub fn eigenpairs(&self) -> Vec<EigenIndex> {
        let mut out: Vec<EigenIndex> = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(block, e)| {
                e.values
                    .iter()
                    .enumerate()
                    .map(move |(index, &value)| EigenIndex { block, index, value })
            })
            .collect();
        out.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.block.cmp(&b.block))
                .then(a.index.cmp(&b.index))
        });
        out
    }

    pub fn eigenvector(&self, at: EigenIndex) -> DVector<C64> {
        self.blocks[at.block].vectors.column(at.index).into_owned()
    }

    /// `Σ_j g(λ_j) u_j u_j*` blockwise.
    pub fn recompose(&self, mut g: impl FnMut(f64) -> Result<C64>) -> Result<AlgebraElement> {
        let blocks = self
            .blocks
            .iter()
            .map(|e| {
                let n = e.values.len();
                let mut d = DVector::zeros(n);
                for (j, &v) in e.values.iter().enumerate() {
                    d[j] = g(v)?;
                }
                let scaled = DMatrix::from_fn(n, n, |i, j| e.vectors[(i, j)] * d[j]);
                Ok(scaled * e.vectors.adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        AlgebraElement::new(self.shape.clone(), blocks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    /// Serialized as `[re, im]`.
    pub value: C64,
    pub multiplicity: usize,
}

/// Clustered spectrum `σ(x)` with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub points: Vec<SpectralPoint>,
    pub is_self_adjoint: bool,
    pub cluster_tolerance: f64,
}

impl SpectrumReport {
    /// `dist(λ, σ(x))`; infinite for an empty report.
    pub fn distance(&self, lambda: C64) -> f64 {
        self.points
            .iter()
            .map(|p| (p.value - lambda).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn nearest(&self, lambda: C64) -> Option<&SpectralPoint> {
        self.points
            .iter()
            .min_by(|a, b| (a.value - lambda).norm().total_cmp(&(b.value - lambda).norm()))
    }

    /// Whether `λ` lies within the cluster tolerance of the spectrum.
    pub fn contains(&self, lambda: C64) -> bool {
        self.distance(lambda) <= self.cluster_tolerance
    }

    pub fn values(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Sum of multiplicities.
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }
}
