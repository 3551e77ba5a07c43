//! Independent oracles: plain nested-vector complex matrices, a cyclic
//! Jacobi eigensolver and helpers that never call into the crate's linear
//! algebra.
#![allow(dead_code, clippy::needless_range_loop)]

use cstate_core::{AlgebraElement, State, C64};

pub type M = Vec<Vec<C64>>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(n: usize, m: usize) -> M {
    vec![vec![c(0.0, 0.0); m]; n]
}

pub fn blocks_of(x: &AlgebraElement) -> Vec<M> {
    x.blocks()
        .iter()
        .map(|b| (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b[(i, j)]).collect()).collect())
        .collect()
}

pub fn densities_of(e: &State) -> Vec<M> {
    blocks_of(&e.density_element())
}

pub fn mat_mul(a: &M, b: &M) -> M {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let a_il = a[i][l];
            for j in 0..m {
                out[i][j] += a_il * b[l][j];
            }
        }
    }
    out
}

pub fn mat_add(a: &M, b: &M, s: C64) -> M {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + s * y).collect())
        .collect()
}

pub fn adjoint(a: &M) -> M {
    let (n, m) = (a.len(), a[0].len());
    (0..m).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn trace(a: &M) -> C64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn identity(n: usize) -> M {
    let mut out = zeros(n, n);
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    out
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `E(x) = Σ_k tr(ρ_k x_k)` entry by entry.
pub fn state_value(e: &State, x: &AlgebraElement) -> C64 {
    densities_of(e)
        .iter()
        .zip(blocks_of(x))
        .map(|(rho, xk)| trace(&mat_mul(rho, &xk)))
        .sum()
}

/// Eigenvalues of a hermitian matrix, ascending, by cyclic Jacobi rotations
/// on the real symmetric embedding `[[A, −B], [B, A]]` of `H = A + iB`.
/// Every eigenvalue of `H` appears twice in the embedding.
pub fn jacobi_eigvalsh(h: &M) -> Vec<f64> {
    let n = h.len();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = (h[i][j] + h[j][i].conj()) * 0.5;
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = a.iter().flatten().map(|v| v * v).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    diag.sort_by(f64::total_cmp);
    diag.into_iter().step_by(2).collect()
}

/// Eigenvalues of every block of a hermitian element, merged and sorted.
pub fn element_eigvalsh(x: &AlgebraElement) -> Vec<f64> {
    let mut all: Vec<f64> = blocks_of(x).iter().flat_map(jacobi_eigvalsh).collect();
    all.sort_by(f64::total_cmp);
    all
}

/// Singular values of a matrix, descending, from the eigenvalues of `A*A`.
pub fn singular_values(a: &M) -> Vec<f64> {
    let mut sv: Vec<f64> = jacobi_eigvalsh(&mat_mul(&adjoint(a), a))
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    sv.reverse();
    sv
}

/// `max_k ‖x_k‖` via singular values.
pub fn operator_norm(x: &AlgebraElement) -> f64 {
    blocks_of(x)
        .iter()
        .map(|b| singular_values(b)[0])
        .fold(0.0, f64::max)
}

/// Sum of `|μ|` over the eigenvalues of the hermitian `ρ1 − ρ2`.
pub fn trace_distance(e1: &State, e2: &State) -> f64 {
    densities_of(e1)
        .iter()
        .zip(densities_of(e2))
        .map(|(a, b)| jacobi_eigvalsh(&mat_add(a, &b, c(-1.0, 0.0))).iter().map(|v| v.abs()).sum::<f64>())
        .sum()
}

/// Numerical rank of a hermitian matrix: count of `|μ|` above `tol` times the largest.
pub fn hermitian_rank(a: &M, tol: f64) -> usize {
    let mags: Vec<f64> = jacobi_eigvalsh(a).iter().map(|v| v.abs()).collect();
    let top = mags.iter().copied().fold(0.0, f64::max);
    mags.iter().filter(|&&s| s > tol * top).count()
}
