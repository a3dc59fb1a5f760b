//! Exact-arithmetic kernel for verifying trigonometric R-matrix and quantum
//! vertex algebra identities at finite truncation.
//!
//! Everything works over truncated series rings with exact rational
//! coefficients: a statement "passes" only when every retained coefficient of
//! the defect is exactly zero. There are no floating-point tolerances anywhere.
//!
//! Module map:
//! - [`rat`], [`profile`], [`series`], [`ratfun`]: the series engine
//!   (truncation profiles, multivariate/Laurent series, rational functions,
//!   expansion maps).
//! - [`tensor`]: operator calculus on tensor powers of C^N (leg embeddings,
//!   traces, permutations, anti-symmetrizers, ordered products).
//! - [`rmatrix`]: the trigonometric R-matrix with its normalizing series and
//!   the identity suites attached to it.
//! - [`qva`]: the RTT algebra with its normal form, vertex operator map,
//!   braidings and quantum determinant.
//! - [`phimod`]: finite restricted modules for the quantum current relation
//!   and the module-side verification suites.
//! - [`report`], [`suites`]: machine-readable reports and the named suite
//!   registry used by the command-line driver.

pub mod error;
pub mod phimod;
pub mod profile;
pub mod qva;
pub mod rat;
pub mod ratfun;
pub mod report;
pub mod rmatrix;
pub mod series;
pub mod suites;
pub mod tensor;

pub use error::{Error, Result};
pub use profile::{Ctx, TruncationProfile, VarId};
pub use rat::Rat;
pub use ratfun::RatFun;
pub use report::Report;
pub use series::Series;
pub use tensor::TensorOperator;
