//! Built-in function corpus the verification tools sweep over.
//!
//! Members are defined relative to the scale and base point, so the same
//! name means the same shape in every geometry: [`CorpusFn::ExpDelta`] is
//! always exp(Ψ(t)-Ψ(a)). The set mixes polynomials in the scale increment
//! (whose expansions terminate exactly) with genuinely infinite series.

use crate::error::Result;
use crate::expr::{self, Expr};
use crate::operators::spectral::PsiPowerSeries;
use crate::operators::Operand;
use crate::psi::Psi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CorpusFn {
    /// 1
    One,
    /// t
    T,
    /// t²
    T2,
    /// Ψ(t) - Ψ(a)
    Delta,
    /// (Ψ(t) - Ψ(a))²
    Delta2,
    /// exp(t)
    ExpT,
    /// sin(t)
    SinT,
    /// exp(Ψ(t) - Ψ(a))
    ExpDelta,
}

impl CorpusFn {
    pub const ALL: [CorpusFn; 8] = [
        CorpusFn::One,
        CorpusFn::T,
        CorpusFn::T2,
        CorpusFn::Delta,
        CorpusFn::Delta2,
        CorpusFn::ExpT,
        CorpusFn::SinT,
        CorpusFn::ExpDelta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorpusFn::One => "one",
            CorpusFn::T => "t",
            CorpusFn::T2 => "t2",
            CorpusFn::Delta => "delta",
            CorpusFn::Delta2 => "delta2",
            CorpusFn::ExpT => "exp_t",
            CorpusFn::SinT => "sin_t",
            CorpusFn::ExpDelta => "exp_delta",
        }
    }

    pub fn from_name(name: &str) -> Option<CorpusFn> {
        CorpusFn::ALL.iter().copied().find(|c| c.name() == name)
    }

    /// Closed-form expression in the underlying variable.
    pub fn expr(self, psi: &Psi, a: f64) -> Result<Expr> {
        let delta = || -> Result<Expr> {
            Ok(expr::sub(psi.expr(), expr::constant(psi.eval(a)?)))
        };
        Ok(match self {
            CorpusFn::One => expr::constant(1.0),
            CorpusFn::T => expr::var(),
            CorpusFn::T2 => expr::pow(expr::var(), 2.0),
            CorpusFn::Delta => delta()?,
            CorpusFn::Delta2 => expr::pow(delta()?, 2.0),
            CorpusFn::ExpT => expr::exp(expr::var()),
            CorpusFn::SinT => expr::sin(expr::var()),
            CorpusFn::ExpDelta => expr::exp(delta()?),
        })
    }

    pub fn operand(self, psi: &Psi, a: f64) -> Result<Operand> {
        Ok(Operand::smooth(psi, self.expr(psi, a)?))
    }

    /// Exact finite representation as powers of the scale increment, where
    /// one exists for the given scale.
    pub fn power_series(self, psi: &Psi, a: f64) -> Result<Option<PsiPowerSeries>> {
        let s = match (self, psi) {
            (CorpusFn::One, _) => PsiPowerSeries::constant(1.0),
            (CorpusFn::Delta, _) => PsiPowerSeries::single(1.0, 1.0)?,
            (CorpusFn::Delta2, _) => PsiPowerSeries::single(2.0, 1.0)?,
            (CorpusFn::T, Psi::Identity) => PsiPowerSeries::new([(0.0, a), (1.0, 1.0)])?,
            (CorpusFn::T2, Psi::Identity) => {
                PsiPowerSeries::new([(0.0, a * a), (1.0, 2.0 * a), (2.0, 1.0)])?
            }
            // t² = Ψ(a) + (Ψ(t) - Ψ(a)) when Ψ = t²
            (CorpusFn::T2, Psi::Power(rho)) if *rho == 2.0 => {
                PsiPowerSeries::new([(0.0, a * a), (1.0, 1.0)])?
            }
            _ => return Ok(None),
        };
        Ok(Some(s))
    }

    /// Whether the member is an entire function of the scale increment on
    /// the working segment, i.e. safe in the series-expanded role.
    pub fn entire_in(self, psi: &Psi) -> bool {
        match psi {
            // t = Ψ⁻¹(Ψ(a) + u) is entire in u for these scales, so every
            // member composes to an entire function
            Psi::Identity | Psi::Log => true,
            Psi::Power(rho) => match self {
                CorpusFn::One | CorpusFn::Delta | CorpusFn::Delta2 | CorpusFn::ExpDelta => true,
                CorpusFn::T2 => *rho == 2.0,
                _ => false,
            },
            Psi::Custom(_) => matches!(
                self,
                CorpusFn::One | CorpusFn::Delta | CorpusFn::Delta2 | CorpusFn::ExpDelta
            ),
        }
    }

    /// Ordered (f, g) pairs with f restricted to the series-safe subset.
    pub fn pairs(psi: &Psi) -> Vec<(CorpusFn, CorpusFn)> {
        let mut out = Vec::new();
        for f in CorpusFn::ALL {
            if !f.entire_in(psi) {
                continue;
            }
            for g in CorpusFn::ALL {
                out.push((f, g));
            }
        }
        out
    }
}
