//! Thin wrappers over the dense nalgebra decompositions used across the crate.
//!
//! Every wrapper converts non-convergence into [`Error::NumericalFailure`]
//! instead of panicking.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::C64;

const MAX_ITERATIONS: usize = 10_000;

/// Eigenpairs of a hermitian matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DMatrix<C64>,
}

/// Hermitian eigendecomposition of `(m + m†)/2`.
pub fn eigh(m: &DMatrix<C64>) -> Result<Eigh> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let h = hermitize(m);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, MAX_ITERATIONS).ok_or_else(|| {
        Error::NumericalFailure(format!("hermitian eigensolver did not converge ({n}×{n})"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    eigh(m).map(|e| e.values)
}

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, MAX_ITERATIONS)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<C64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Sum of singular values.
pub fn trace_norm(m: &DMatrix<C64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Eigenvalues of a general complex square matrix via the complex Schur form.
///
/// Any 2×2 diagonal bump the iteration leaves behind is resolved with the
/// quadratic formula.
pub fn eigvals_general(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_ITERATIONS)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let negligible = 64.0 * f64::EPSILON * scale;
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > negligible {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}

pub fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// tr(a·b) without forming the product.
pub fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// ⟨u, v⟩ antilinear in the first slot.
pub fn inner(u: &DVector<C64>, v: &DVector<C64>) -> C64 {
    u.dotc(v)
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
