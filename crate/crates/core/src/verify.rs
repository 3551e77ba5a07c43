//! Seeded verification suite: one record per eigenstate property, each run
//! over `trials` random draws.
//!
//! Every record reduces its checks to a single `max_defect` compared against
//! a fixed `tolerance`; `passed ⇔ max_defect ≤ tolerance`. Composite records
//! report the worst ratio of a measured quantity to its own threshold, so
//! their tolerance is 1. A check that errors out in a non-numerical way (for
//! example a synthesis that rejects a spectral point) counts as
//! [`FAILED_CHECK`]; numerical failures abort the suite.
//!
//! Records run in parallel with independent seeded streams, so the report
//! depends only on the configuration.

use rand::seq::IndexedRandom;
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{default_cluster_tol, AlgebraElement, AlgebraShape};
use crate::calculus::{
    apply_function, chebyshev_approximant, function_transport_check, monomial_transport_check,
    spectral_interval, ScalarFunction,
};
use crate::eigenstates::{
    default_acceptance_tol, eigenstate_for, independence_margin, is_eigenstate,
    matrix_unit_defect, orthogonality_witness, residual,
};
use crate::error::{Error, Result};
use crate::gns::{gns_construct, DEFAULT_RANK_TOL};
use crate::random::{self, SeededRng};
use crate::states::{State, ZERO_WEIGHT_TOL};
use crate::{linalg, C64};

/// Largest block dimension accepted by the suite.
pub const MAX_BLOCK_DIM: usize = 16;
pub const DEFAULT_SEED: u64 = 0xC57A;
pub const DEFAULT_TRIALS: usize = 100;
/// Defect recorded for a check that could not be carried out.
pub const FAILED_CHECK: f64 = f64::MAX;

/// Residual at or below which a state is classified as an eigenstate.
pub const RESIDUAL_ZERO: f64 = 1e-12;
/// Relative matrix-unit defect at or below which a state is classified as an eigenstate.
pub const DEFECT_ZERO_FACTOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub shape: AlgebraShape,
    pub seed: u64,
    pub trials: usize,
    /// Mixes planted eigenstates with a random state at this weight, as a
    /// negative control for the residual criterion.
    pub perturbation: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            shape: AlgebraShape::full(4).expect("valid"),
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordReport {
    pub name: String,
    pub statement: String,
    pub metric: String,
    pub trials: usize,
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub shape: Vec<usize>,
    pub trials: usize,
    pub records: Vec<RecordReport>,
    pub passed: bool,
}

struct Record {
    name: &'static str,
    statement: &'static str,
    metric: &'static str,
    tolerance: f64,
    run: fn(&VerifyConfig, &mut SeededRng) -> Result<f64>,
}

const RECORDS: [Record; 9] = [
    Record {
        name: "spectrum-containment",
        statement: "every eigenvalue of x lies in the spectrum of x",
        metric: "dist(λ, σ(x)) / max(1, ‖x‖) over accepted certificates",
        tolerance: 1e-8,
        run: spectrum_containment,
    },
    Record {
        name: "residual-criterion",
        statement: "E is an eigenstate at λ iff E((x−λ)*(x−λ)) = 0",
        metric: "misclassified scenarios (residual vs matrix-unit defect)",
        tolerance: 0.0,
        run: residual_criterion,
    },
    Record {
        name: "vector-state-correspondence",
        statement: "E_v is an eigenstate at λ iff π(x)v = λv",
        metric: "tuples whose two flags disagree or miss the planted answer",
        tolerance: 0.0,
        run: vector_state_correspondence,
    },
    Record {
        name: "functional-calculus-transport",
        statement: "an eigenstate of x at λ is an eigenstate of f(x) at f(λ)",
        metric: "worst residual / bound over xⁿ, f(x) and Chebyshev p_32(x)",
        tolerance: 1.0,
        run: functional_calculus_transport,
    },
    Record {
        name: "spectral-existence",
        statement: "every spectral point of a self-adjoint x is an eigenvalue",
        metric: "synthesized residual / max(1, ‖x‖²)",
        tolerance: 1e-10,
        run: spectral_existence,
    },
    Record {
        name: "linear-independence",
        statement: "eigenstates with distinct eigenvalues are linearly independent",
        metric: "1e-8 / independence margin",
        tolerance: 1.0,
        run: linear_independence,
    },
    Record {
        name: "orthogonality",
        statement: "eigenstates of self-adjoint x with distinct eigenvalues are orthogonal",
        metric: "worst of |‖E1−E2‖ − 2| / 1e-9 and |(E1−E2)(f(x)) − 2| / 1e-10",
        tolerance: 1.0,
        run: orthogonality,
    },
    Record {
        name: "projection-compression",
        statement: "pE = E ⇔ E eigenstate of p at 1 ⇔ E(p) = 1",
        metric: "worst implication defect / 1e-10; negative-control mismatch fails",
        tolerance: 1.0,
        run: projection_compression,
    },
    Record {
        name: "cauchy-schwarz",
        statement: "|E(y*z)|² ≤ E(y*y) E(z*z)",
        metric: "max(0, −gap) / (E(y*y) E(z*z))",
        tolerance: 1e-10,
        run: cauchy_schwarz,
    },
];

/// Names of the records in report order.
pub fn record_names() -> Vec<&'static str> {
    RECORDS.iter().map(|r| r.name).collect()
}

pub fn run_suite(cfg: &VerifyConfig) -> Result<VerificationReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("trials must be ≥ 1".into()));
    }
    if let Some(&n) = cfg.shape.blocks().iter().find(|&&n| n > MAX_BLOCK_DIM) {
        return Err(Error::InvalidInput(format!(
            "block dimension {n} exceeds the suite cap of {MAX_BLOCK_DIM}"
        )));
    }
    if let Some(eps) = cfg.perturbation {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidInput(format!("perturbation {eps} outside [0, 1]")));
        }
    }
    let records = RECORDS
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let mut rng = random::seeded(record_seed(cfg.seed, i));
            let max_defect = (rec.run)(cfg, &mut rng)?;
            Ok(RecordReport {
                name: rec.name.to_string(),
                statement: rec.statement.to_string(),
                metric: rec.metric.to_string(),
                trials: cfg.trials,
                max_defect,
                tolerance: rec.tolerance,
                passed: max_defect <= rec.tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport {
        seed: cfg.seed,
        shape: cfg.shape.blocks().to_vec(),
        trials: cfg.trials,
        passed: records.iter().all(|r| r.passed),
        records,
    })
}

fn record_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Turns non-numerical errors into a failed check.
fn checked(r: Result<f64>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(e @ Error::NumericalFailure(_)) => Err(e),
        Err(_) => Ok(FAILED_CHECK),
    }
}

/// Distinct real eigenvalues (cluster representatives) of a hermitian element.
fn spectral_points(x: &AlgebraElement) -> Result<Vec<f64>> {
    Ok(x.spectrum_default()?.points.iter().map(|p| p.value.re).collect())
}

fn sa_tol(x: &AlgebraElement) -> Result<f64> {
    Ok(crate::algebra::default_self_adjoint_tol(x.operator_norm()?))
}

fn spectrum_containment(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..cfg.trials {
        let (x, e, lambda) = if trial % 2 == 0 {
            let x = random::hermitian(rng, &cfg.shape);
            let lambda = *spectral_points(&x)?.choose(rng).expect("nonempty spectrum");
            let e = match eigenstate_for(&x, lambda, sa_tol(&x)?) {
                Ok(e) => e,
                Err(e @ Error::NumericalFailure(_)) => return Err(e),
                Err(_) => return Ok(FAILED_CHECK),
            };
            (x, e, C64::new(lambda, 0.0))
        } else {
            planted_non_normal(&cfg.shape, rng)?
        };
        let norm = x.operator_norm()?;
        let cert = is_eigenstate(&e, &x, lambda, default_acceptance_tol(norm))?;
        if !cert.accepted {
            return Ok(FAILED_CHECK);
        }
        let dist = x.spectrum(default_cluster_tol(norm))?.distance(lambda);
        worst = worst.max(dist / norm.max(1.0));
    }
    Ok(worst)
}

/// `x = U T U*` with `T` upper triangular in one block; the vector state of
/// `U e₁` is an eigenstate at `T₁₁` although `x` is not normal.
pub fn planted_non_normal(
    shape: &AlgebraShape,
    rng: &mut SeededRng,
) -> Result<(AlgebraElement, State, C64)> {
    let k = rng.random_range(0..shape.num_blocks());
    let n = shape.blocks()[k];
    let mut t = random::matrix(rng, n, n);
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    let u = random::unitary(rng, n);
    let mut blocks: Vec<_> = random::element(rng, shape).into_blocks();
    blocks[k] = &u * &t * u.adjoint();
    let x = AlgebraElement::new(shape.clone(), blocks)?;
    let v = u.column(0).into_owned();
    Ok((x, State::pure(shape, k, &v)?, t[(0, 0)]))
}

/// `(1 − ε)E + εF` for a random state `F`.
pub fn mix_with_random(e: &State, eps: f64, rng: &mut SeededRng) -> Result<State> {
    let f = random::state(rng, e.shape());
    let blocks = e
        .density()
        .iter()
        .zip(f.density())
        .map(|(a, b)| a * C64::new(1.0 - eps, 0.0) + b * C64::new(eps, 0.0))
        .collect();
    State::new(e.shape().clone(), blocks)
}

fn residual_criterion(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    let mut misclassified = 0usize;
    for trial in 0..cfg.trials {
        let x = random::hermitian(rng, &cfg.shape);
        let norm = x.operator_norm()?;
        let points = spectral_points(&x)?;
        let planted = trial % 2 == 0;
        let (e, lambda) = if planted {
            let lambda = *points.choose(rng).expect("nonempty spectrum");
            let mut e = match eigenstate_for(&x, lambda, sa_tol(&x)?) {
                Ok(e) => e,
                Err(e @ Error::NumericalFailure(_)) => return Err(e),
                Err(_) => {
                    misclassified += 1;
                    continue;
                }
            };
            if let Some(eps) = cfg.perturbation {
                e = mix_with_random(&e, eps, rng)?;
            }
            (e, lambda)
        } else {
            let e = random::state(rng, &cfg.shape);
            let lambda = if trial % 4 == 1 {
                *points.choose(rng).expect("nonempty spectrum")
            } else {
                e.evaluate(&x)?.re
            };
            (e, lambda)
        };
        let lambda = C64::new(lambda, 0.0);
        let by_residual = residual(&e, &x, lambda)? <= RESIDUAL_ZERO;
        let by_definition = matrix_unit_defect(&e, &x, lambda)? <= DEFECT_ZERO_FACTOR * norm.max(1.0);
        if by_residual != by_definition || (planted && !by_residual) {
            misclassified += 1;
        }
    }
    Ok(misclassified as f64)
}

fn vector_state_correspondence(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    const TOL: f64 = 1e-8;
    let mut failures = 0usize;
    for trial in 0..cfg.trials {
        let e = if trial % 3 == 2 {
            let ranks: Vec<usize> = cfg.shape.blocks().iter().map(|&n| rng.random_range(1..=n)).collect();
            random::state_with_ranks(rng, &cfg.shape, &ranks)
        } else {
            random::state(rng, &cfg.shape)
        };
        let g = gns_construct(&e, DEFAULT_RANK_TOL)?;
        let x = random::hermitian(rng, &cfg.shape);
        // π(x) is block diagonal; diagonalize one nonzero block of it.
        let pix = g.rep(&x)?;
        let blocks: Vec<_> = (0..cfg.shape.num_blocks()).map(|k| g.block_range(k)).filter(|r| !r.is_empty()).collect();
        let range = blocks.choose(rng).expect("a state has a nonzero block").clone();
        let sub = pix.view((range.start, range.start), (range.len(), range.len())).into_owned();
        let eig = linalg::eigh(&sub)?;
        let j = rng.random_range(0..eig.values.len());
        let mu = eig.values[j];
        let mut u = DVector::zeros(g.hilbert_dim());
        u.rows_mut(range.start, range.len()).copy_from(&eig.vectors.column(j));
        let (w, lambda, expected) = match trial % 3 {
            0 => (u, mu, true),
            // Every vector of a one-dimensional space is an eigenvector.
            1 => (random::vector(rng, g.hilbert_dim()), mu, g.hilbert_dim() == 1),
            _ => (u, x.operator_norm()? + 1.0 + rng.random::<f64>(), false),
        };
        let (vec_flag, state_flag) = g.vector_state_correspondence(&w, &x, C64::new(lambda, 0.0), TOL)?;
        if vec_flag != state_flag || vec_flag != expected {
            failures += 1;
        }
    }
    Ok(failures as f64)
}

fn functional_calculus_transport(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let x = random::hermitian(rng, &cfg.shape);
        let norm = x.operator_norm()?;
        let points = spectral_points(&x)?;
        let idx = rng.random_range(0..points.len());
        let lambda = points[idx];
        let e = match eigenstate_for(&x, lambda, sa_tol(&x)?) {
            Ok(e) => e,
            Err(e @ Error::NumericalFailure(_)) => return Err(e),
            Err(_) => return Ok(FAILED_CHECK),
        };
        for n in 2..=6u32 {
            let r = checked(monomial_transport_check(&e, &x, lambda, n))?;
            worst = worst.max(r / (1e-9 * norm.powi(2 * n as i32).max(1.0)));
        }
        let mut fs = vec![ScalarFunction::square(), ScalarFunction::cube(), ScalarFunction::exp()];
        if points.len() > 1 {
            let other = points[(idx + 1) % points.len()];
            fs.push(ScalarFunction::witness(orthogonality_witness(lambda, other)?));
        }
        for f in &fs {
            let fx_norm = apply_function(&x, f, sa_tol(&x)?)?.operator_norm()?;
            let r = checked(function_transport_check(&e, &x, lambda, f))?;
            worst = worst.max(r / (1e-9 * (fx_norm * fx_norm).max(1.0)));
        }
        let p = chebyshev_approximant(&ScalarFunction::exp(), spectral_interval(&x)?, 32)?;
        let r = residual(&e, &p.apply(&x)?, C64::new(lambda.exp(), 0.0))?;
        worst = worst.max(r / 1e-8);
    }
    Ok(worst)
}

fn spectral_existence(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let x = random::hermitian(rng, &cfg.shape);
        let scale = x.operator_norm()?.powi(2).max(1.0);
        for lambda in spectral_points(&x)? {
            match eigenstate_for(&x, lambda, sa_tol(&x)?) {
                Ok(e) => {
                    let r = residual(&e, &x, C64::new(lambda, 0.0))?;
                    worst = worst.max(r / scale);
                }
                Err(e @ Error::NumericalFailure(_)) => return Err(e),
                Err(_) => return Ok(FAILED_CHECK),
            }
        }
    }
    Ok(worst)
}

type Family = (AlgebraElement, Vec<f64>, Vec<State>);

/// Eigenstates at every distinct spectral point of a random hermitian element.
fn eigenstate_family(shape: &AlgebraShape, rng: &mut SeededRng) -> Result<Option<Family>> {
    let x = random::hermitian(rng, shape);
    let points = spectral_points(&x)?;
    let tol = sa_tol(&x)?;
    let mut states = Vec::with_capacity(points.len());
    for &lambda in &points {
        match eigenstate_for(&x, lambda, tol) {
            Ok(e) => states.push(e),
            Err(e @ Error::NumericalFailure(_)) => return Err(e),
            Err(_) => return Ok(None),
        }
    }
    Ok(Some((x, points, states)))
}

fn linear_independence(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let Some((_, _, states)) = eigenstate_family(&cfg.shape, rng)? else {
            return Ok(FAILED_CHECK);
        };
        let margin = independence_margin(&states)?;
        worst = worst.max(if margin > 0.0 { 1e-8 / margin } else { FAILED_CHECK });
    }
    Ok(worst)
}

fn orthogonality(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let Some((x, points, states)) = eigenstate_family(&cfg.shape, rng)? else {
            return Ok(FAILED_CHECK);
        };
        let dec = x.spectral_decomposition()?;
        for i in 0..states.len() {
            for j in i + 1..states.len() {
                let dist = states[i].distance(&states[j])?;
                worst = worst.max((dist - 2.0).abs() / 1e-9);
                let f = orthogonality_witness(points[i], points[j])?;
                let fx = dec.recompose(|t| Ok(C64::new(f.eval(t), 0.0)))?;
                let gap = states[i].evaluate(&fx)? - states[j].evaluate(&fx)?;
                worst = worst.max((gap - C64::new(2.0, 0.0)).norm() / 1e-10);
            }
        }
    }
    Ok(worst)
}

/// Projection ranks with at least one nonzero and at least one deficient
/// block; only the identity is available on `M_1`.
fn proper_ranks(shape: &AlgebraShape, rng: &mut SeededRng) -> Vec<usize> {
    if shape.matrix_size() == 1 {
        return vec![1];
    }
    loop {
        let ranks: Vec<usize> = shape.blocks().iter().map(|&n| rng.random_range(0..=n)).collect();
        let nonzero = ranks.iter().any(|&r| r > 0);
        let deficient = ranks.iter().zip(shape.blocks()).any(|(&r, &n)| r < n);
        if nonzero && deficient {
            return ranks;
        }
    }
}

/// Worst defect of the three-way equivalence for one `(E, p)`, relative to
/// `tol`; [`FAILED_CHECK`] if the negative control on `E` itself misbehaves.
pub fn compression_defect(e: &State, p: &AlgebraElement, tol: f64) -> Result<f64> {
    let one = C64::new(1.0, 0.0);
    let pe = match e.compress(p, ZERO_WEIGHT_TOL) {
        Ok(pe) => pe,
        Err(err @ Error::NumericalFailure(_)) => return Err(err),
        Err(_) => return Ok(FAILED_CHECK),
    };
    // (1) ⇒ (2): pE is an eigenstate of p at 1.
    let res = residual(&pe, p, one)?;
    let mut worst = res.abs().max(matrix_unit_defect(&pe, p, one)?);
    // (2) ⇒ (3): pE(p) = 1.
    let weight = pe.evaluate(p)?;
    worst = worst.max((weight - one).norm());
    // (3) ⇒ (2): E((p−1)*(p−1)) = 1 − E(p) for any state.
    worst = worst.max((res - (1.0 - weight.re)).abs());
    // (2) ⇒ (1): compressing again changes nothing.
    worst = worst.max(pe.compress(p, ZERO_WEIGHT_TOL)?.max_abs_diff(&pe)?);

    // Negative control: E with E(p) < 1 must fail (2) and (3) together.
    let fails_2 = residual(e, p, one)? > tol;
    let fails_3 = (e.evaluate(p)? - one).norm() > tol;
    if fails_2 != fails_3 {
        return Ok(FAILED_CHECK);
    }
    Ok(worst / tol)
}

fn projection_compression(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    const TOL: f64 = 1e-10;
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let e = random::state(rng, &cfg.shape);
        let p = loop {
            let ranks = proper_ranks(&cfg.shape, rng);
            let p = random::projection(rng, &cfg.shape, &ranks);
            if e.evaluate(&p)?.re > 1e-6 {
                break p;
            }
        };
        worst = worst.max(compression_defect(&e, &p, TOL)?);
    }
    Ok(worst)
}

fn cauchy_schwarz(cfg: &VerifyConfig, rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..cfg.trials {
        let e = random::state(rng, &cfg.shape);
        let y = random::element(rng, &cfg.shape);
        let z = if trial % 5 == 0 { y.clone() } else { random::element(rng, &cfg.shape) };
        let gap = e.cauchy_schwarz_gap(&y, &z)?;
        let yy = e.evaluate(&y.adjoint().mul(&y)?)?.re;
        let zz = e.evaluate(&z.adjoint().mul(&z)?)?.re;
        let scale = (yy * zz).max(f64::MIN_POSITIVE);
        worst = worst.max((-gap).max(0.0) / scale);
    }
    Ok(worst)
}
