//! Eigenstates of elements of finite-dimensional C*-algebras.
//!
//! An algebra is a direct sum of full matrix blocks `M_{n_1} ⊕ … ⊕ M_{n_r}`.
//! A state is a block density matrix acting by `E(x) = Σ_k tr(ρ_k x_k)`, and
//! `E` is an eigenstate of `x` at `λ` when `E(yx) = λE(y)` for every `y`.
//! The crate decides that relation through the residual `E((x−λ)*(x−λ))`,
//! synthesizes eigenstates at spectral points, builds GNS representations and
//! applies the continuous functional calculus.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod calculus;
pub mod eigenstates;
pub mod error;
pub mod expr;
pub mod gns;
pub mod io;
pub mod linalg;
pub mod random;
pub mod states;
pub mod verify;

pub type C64 = num_complex::Complex64;

pub use algebra::{AlgebraElement, AlgebraShape, SpectralPoint, SpectrumReport};
pub use calculus::{apply_function, FunctionSpec, PolynomialApproximant, ScalarFunction};
pub use eigenstates::{eigenstate_for, is_eigenstate, residual, EigenstateCertificate};
pub use error::{Error, Result};
pub use expr::{parse, parse_scalar, Environment, Expr, SyntaxError};
pub use gns::{gns_construct, GnsData, GnsSummary};
pub use states::State;
pub use verify::{run_suite, VerificationReport, VerifyConfig};
