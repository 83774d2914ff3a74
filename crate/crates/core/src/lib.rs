//! Fractional integrals and derivatives taken with respect to a monotone
//! scale function, plus series expansions of the product rule for those
//! operators and a reporting layer that measures how well the expansions
//! close numerically.

pub mod error;
pub mod expr;
pub mod leibniz;
pub mod operators;
pub mod psi;
pub mod quad;
pub mod special;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use expr::{Expr, SmoothFn};
pub use leibniz::{CorpusFn, LeibnizReport, RuleForm, TruncationPolicy};
pub use operators::spectral::PsiPowerSeries;
pub use operators::{OpEval, Operand, OperatorParams};
pub use psi::{Psi, PsiDerivatives};
pub use quad::{QuadEval, QuadratureSpec};
