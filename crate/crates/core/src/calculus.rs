//! Continuous functional calculus for self-adjoint elements.
//!
//! `f(x)` is computed exactly as `U f(Λ) U*` from the eigendecomposition, and
//! approximately through Chebyshev interpolants `p_d` evaluated on the matrix
//! argument with the Clenshaw recurrence. Transport checks measure how an
//! eigenstate of `x` at `λ` behaves as an eigenstate of `xⁿ`, `p_d(x)` and
//! `f(x)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::algebra::{default_self_adjoint_tol, AlgebraElement};
use crate::eigenstates::{default_acceptance_tol, orthogonality_witness, residual, OrthogonalityWitness};
use crate::error::{Error, Result};
use crate::states::State;
use crate::C64;

/// Number of points in the uniform grid used to measure `sup_error`.
pub const SUP_GRID_POINTS: usize = 1024;
/// Relative padding of the spectral interval.
pub const INTERVAL_PAD_FACTOR: f64 = 1e-6;
/// Degrees reported by default when watching polynomial convergence.
pub const DEFAULT_DEGREE_LADDER: [usize; 6] = [2, 4, 8, 16, 32, 64];

/// A named real function of a real variable.
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn identity() -> Self {
        Self::new("id", |t| t)
    }

    pub fn square() -> Self {
        Self::new("sq", |t| t * t)
    }

    pub fn cube() -> Self {
        Self::new("cube", |t| t * t * t)
    }

    pub fn exp() -> Self {
        Self::new("exp", f64::exp)
    }

    pub fn abs() -> Self {
        Self::new("abs", f64::abs)
    }

    pub fn witness(w: OrthogonalityWitness) -> Self {
        Self::new(format!("witness:{}:{}", w.lambda1, w.lambda2), move |t| w.eval(t))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// Evaluates and rejects non-finite values.
    pub fn eval_checked(&self, t: f64) -> Result<f64> {
        let v = self.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvaluatorDomain {
                name: self.name.clone(),
                at: t,
            })
        }
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Self {
        let (f, g) = (self.f.clone(), other.f.clone());
        Self::new(format!("{}*{}", self.name, other.name), move |t| f(t) * g(t))
    }
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ScalarFunction").field(&self.name).finish()
    }
}

impl FromStr for ScalarFunction {
    type Err = Error;

    /// `sq`, `cube`, `exp`, `abs`, `id` or `witness:λ1:λ2`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sq" => Ok(Self::square()),
            "cube" => Ok(Self::cube()),
            "exp" => Ok(Self::exp()),
            "abs" => Ok(Self::abs()),
            "id" => Ok(Self::identity()),
            _ => {
                let mut parts = s.split(':');
                if parts.next() == Some("witness") {
                    let l1 = parse_real(parts.next(), s)?;
                    let l2 = parse_real(parts.next(), s)?;
                    if parts.next().is_some() {
                        return Err(unknown(s));
                    }
                    Ok(Self::witness(orthogonality_witness(l1, l2)?))
                } else {
                    Err(unknown(s))
                }
            }
        }
    }
}

fn parse_real(part: Option<&str>, whole: &str) -> Result<f64> {
    part.and_then(|p| p.trim().parse::<f64>().ok())
        .ok_or_else(|| unknown(whole))
}

fn unknown(s: &str) -> Error {
    Error::InvalidInput(format!("unknown function `{s}`"))
}

/// A function as named on the command line: exact, or a Chebyshev
/// interpolant of given degree on the padded spectral interval.
#[derive(Debug, Clone)]
pub enum FunctionSpec {
    Exact(ScalarFunction),
    Chebyshev { degree: usize, inner: ScalarFunction },
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("chebyshev:") {
            let (deg, inner) = rest.split_once(':').ok_or_else(|| unknown(s))?;
            let degree = deg.parse::<usize>().map_err(|_| unknown(s))?;
            Ok(Self::Chebyshev {
                degree,
                inner: inner.parse()?,
            })
        } else {
            Ok(Self::Exact(s.parse()?))
        }
    }
}

impl FunctionSpec {
    pub fn apply(&self, x: &AlgebraElement, tol: f64) -> Result<AlgebraElement> {
        match self {
            Self::Exact(f) => apply_function(x, f, tol),
            Self::Chebyshev { degree, inner } => {
                check_self_adjoint(x, tol)?;
                let interval = spectral_interval(x)?;
                chebyshev_approximant(inner, interval, *degree)?.apply(x)
            }
        }
    }
}

fn check_self_adjoint(x: &AlgebraElement, tol: f64) -> Result<()> {
    let defect = x.self_adjoint_defect()?;
    if defect > tol {
        return Err(Error::NotSelfAdjoint { defect, tol });
    }
    Ok(())
}

/// `f(x) = U f(Λ) U*`, blockwise.
pub fn apply_function(x: &AlgebraElement, f: &ScalarFunction, tol: f64) -> Result<AlgebraElement> {
    check_self_adjoint(x, tol)?;
    x.hermitian_part()
        .spectral_decomposition()?
        .recompose(|t| f.eval_checked(t).map(|v| C64::new(v, 0.0)))
}

/// `[min σ(x) − ε, max σ(x) + ε]` with `ε = 1e-6 · max(1, ‖x‖)`.
pub fn spectral_interval(x: &AlgebraElement) -> Result<(f64, f64)> {
    let pairs = x.hermitian_part().spectral_decomposition()?.eigenpairs();
    let (lo, hi) = match (pairs.first(), pairs.last()) {
        (Some(a), Some(b)) => (a.value, b.value),
        _ => return Err(Error::NumericalFailure("empty spectrum".into())),
    };
    let eps = INTERVAL_PAD_FACTOR * x.operator_norm()?.max(1.0);
    Ok((lo - eps, hi + eps))
}

/// Chebyshev interpolant `Σ_j c_j T_j(s)`, `s = (2t − a − b)/(b − a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialApproximant {
    pub coefficients: Vec<f64>,
    pub interval: (f64, f64),
    /// Max deviation from the target on the measurement grid.
    pub sup_error: f64,
}

impl PolynomialApproximant {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    fn to_unit(&self, t: f64) -> f64 {
        let (a, b) = self.interval;
        (2.0 * t - a - b) / (b - a)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = self.to_unit(t);
        let c = &self.coefficients;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = ck + 2.0 * s * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + s * b1 - b2
    }

    /// `p(x)` by the Clenshaw recurrence on the matrix argument.
    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        let (a, b) = self.interval;
        let shape = x.shape();
        let one = AlgebraElement::identity(shape);
        let s = x
            .scale(C64::new(2.0 / (b - a), 0.0))
            .shift(C64::new((a + b) / (b - a), 0.0));
        let two_s = s.scale(C64::new(2.0, 0.0));
        let c = &self.coefficients;
        let mut b1 = AlgebraElement::zero(shape);
        let mut b2 = AlgebraElement::zero(shape);
        for &ck in c.iter().skip(1).rev() {
            let b0 = two_s.mul(&b1)?.sub(&b2)?.add(&one.scale(C64::new(ck, 0.0)))?;
            b2 = b1;
            b1 = b0;
        }
        s.mul(&b1)?.sub(&b2)?.add(&one.scale(C64::new(c[0], 0.0)))
    }
}

/// Interpolates `f` at the `degree + 1` Chebyshev nodes of `[a, b]`.
pub fn chebyshev_approximant(
    f: &ScalarFunction,
    interval: (f64, f64),
    degree: usize,
) -> Result<PolynomialApproximant> {
    let (a, b) = interval;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("invalid interval [{a}, {b}]")));
    }
    let m = degree + 1;
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    let samples = (0..m)
        .map(|k| {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            f.eval_checked(mid + half * theta.cos())
        })
        .collect::<Result<Vec<_>>>()?;
    let coefficients = (0..m)
        .map(|j| {
            let sum: f64 = samples
                .iter()
                .enumerate()
                .map(|(k, fk)| {
                    fk * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / m as f64).cos()
                })
                .sum();
            let c = 2.0 * sum / m as f64;
            if j == 0 {
                c / 2.0
            } else {
                c
            }
        })
        .collect();
    let mut approx = PolynomialApproximant {
        coefficients,
        interval,
        sup_error: 0.0,
    };
    let mut sup: f64 = 0.0;
    for i in 0..SUP_GRID_POINTS {
        let t = a + (b - a) * i as f64 / (SUP_GRID_POINTS - 1) as f64;
        sup = sup.max((approx.eval(t) - f.eval_checked(t)?).abs());
    }
    approx.sup_error = sup;
    Ok(approx)
}

fn require_eigenstate(e: &State, x: &AlgebraElement, lambda: f64) -> Result<()> {
    let tol = default_acceptance_tol(x.operator_norm()?);
    let res = residual(e, x, C64::new(lambda, 0.0))?;
    if !(res <= tol) {
        return Err(Error::NotAnEigenstate { residual: res, tol });
    }
    Ok(())
}

/// `E((xⁿ − λⁿ)*(xⁿ − λⁿ))` for an eigenstate `E` of `x` at `λ`.
pub fn monomial_transport_check(e: &State, x: &AlgebraElement, lambda: f64, n: u32) -> Result<f64> {
    require_eigenstate(e, x, lambda)?;
    residual(e, &x.pow(n), C64::new(lambda.powi(n as i32), 0.0))
}

/// `E((f(x) − f(λ))*(f(x) − f(λ)))` with the exact calculus.
pub fn function_transport_check(
    e: &State,
    x: &AlgebraElement,
    lambda: f64,
    f: &ScalarFunction,
) -> Result<f64> {
    let tol = default_self_adjoint_tol(x.operator_norm()?);
    check_self_adjoint(x, tol)?;
    require_eigenstate(e, x, lambda)?;
    let fx = apply_function(x, f, tol)?;
    residual(e, &fx, C64::new(f.eval_checked(lambda)?, 0.0))
}

/// For each degree `d`, `E((p_d(x) − f(λ))*(p_d(x) − f(λ)))` where `p_d`
/// interpolates `f` on the padded spectral interval of `x`.
pub fn transport_via_polynomials(
    e: &State,
    x: &AlgebraElement,
    lambda: f64,
    f: &ScalarFunction,
    degrees: &[usize],
) -> Result<Vec<f64>> {
    check_self_adjoint(x, default_self_adjoint_tol(x.operator_norm()?))?;
    require_eigenstate(e, x, lambda)?;
    let interval = spectral_interval(x)?;
    let target = C64::new(f.eval_checked(lambda)?, 0.0);
    degrees
        .iter()
        .map(|&d| {
            let p = chebyshev_approximant(f, interval, d)?;
            residual(e, &p.apply(x)?, target)
        })
        .collect()
}
