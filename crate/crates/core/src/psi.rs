//! Monotone scale functions and differentiation taken against them.
//!
//! Every operator in this crate is defined relative to a strictly increasing
//! scale Ψ. Three closed-form scales cover the common cases (identity,
//! logarithm, fixed power), and [`Psi::custom`] accepts any expression whose
//! derivative stays positive on the working interval.

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use std::fmt;
use std::sync::RwLock;

#[derive(Clone, Debug, PartialEq)]
pub enum Psi {
    Identity,
    Log,
    /// t^rho with rho > 0.
    Power(f64),
    Custom(CustomPsi),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CustomPsi {
    expr: Expr,
    deriv: Expr,
}

impl Psi {
    pub fn identity() -> Psi {
        Psi::Identity
    }

    pub fn log() -> Psi {
        Psi::Log
    }

    pub fn power(rho: f64) -> Result<Psi> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::invalid(format!(
                "power scale needs a positive exponent, got {rho}"
            )));
        }
        Ok(Psi::Power(rho))
    }

    pub fn custom(e: Expr) -> Result<Psi> {
        let deriv = e.differentiate().normalize();
        if deriv.is_zero() {
            return Err(Error::invalid(
                "scale function must depend on x".to_string(),
            ));
        }
        Ok(Psi::Custom(CustomPsi { expr: e, deriv }))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Psi::Identity => Ok(t),
            Psi::Log => {
                if t <= 0.0 {
                    Err(Error::domain(format!("log scale needs t > 0, got {t}")))
                } else {
                    Ok(t.ln())
                }
            }
            Psi::Power(rho) => {
                if t < 0.0 {
                    Err(Error::domain(format!("power scale needs t >= 0, got {t}")))
                } else {
                    Ok(t.powf(*rho))
                }
            }
            Psi::Custom(c) => c.expr.eval(t),
        }
    }

    /// First derivative of the scale at `t`.
    pub fn deriv1(&self, t: f64) -> Result<f64> {
        let v = match self {
            Psi::Identity => 1.0,
            Psi::Log => {
                if t <= 0.0 {
                    return Err(Error::domain(format!("log scale needs t > 0, got {t}")));
                }
                1.0 / t
            }
            Psi::Power(rho) => {
                if t < 0.0 {
                    return Err(Error::domain(format!("power scale needs t >= 0, got {t}")));
                }
                rho * t.powf(rho - 1.0)
            }
            Psi::Custom(c) => c.deriv.eval(t)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("scale derivative blows up at t = {t}")))
        }
    }

    /// Solve Ψ(t) = u for t in [lo, hi]. Closed form where available,
    /// bracketed Newton otherwise.
    pub fn invert(&self, u: f64, lo: f64, hi: f64) -> Result<f64> {
        match self {
            Psi::Identity => Ok(u),
            Psi::Log => Ok(u.exp()),
            Psi::Power(rho) => {
                if u < 0.0 {
                    Err(Error::domain(format!(
                        "power scale is non-negative, cannot invert {u}"
                    )))
                } else {
                    Ok(u.powf(1.0 / rho))
                }
            }
            Psi::Custom(_) => self.invert_bracketed(u, lo, hi),
        }
    }

    fn invert_bracketed(&self, u: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
        let tol = 1e-14 * u.abs().max(1.0);
        let flo = self.eval(lo)? - u;
        let fhi = self.eval(hi)? - u;
        if flo > tol || fhi < -tol {
            return Err(Error::domain(format!(
                "inverse target {u} lies outside [Ψ({lo}), Ψ({hi})]"
            )));
        }
        let mut t = lo + (hi - lo) * 0.5;
        for _ in 0..200 {
            let r = self.eval(t)? - u;
            if r.abs() <= tol {
                return Ok(t);
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.deriv1(t)?;
            let step = r / d;
            let next = t - step;
            // fall back to bisection whenever Newton leaves the bracket
            t = if next > lo && next < hi {
                next
            } else {
                lo + (hi - lo) * 0.5
            };
            if hi - lo < 1e-16 * hi.abs().max(1.0) {
                return Ok(t);
            }
        }
        Err(Error::InverseDiverged { u })
    }

    /// Strict monotonicity screen on [lo, hi]: the derivative must be
    /// positive at 64 interior sample points. Closed-form scales only get
    /// their domain validated.
    pub fn check_increasing(&self, lo: f64, hi: f64) -> Result<()> {
        match self {
            Psi::Identity => Ok(()),
            Psi::Log => {
                if lo <= 0.0 {
                    Err(Error::domain(format!("log scale needs t > 0, got {lo}")))
                } else {
                    Ok(())
                }
            }
            Psi::Power(_) => {
                if lo < 0.0 {
                    Err(Error::domain(format!("power scale needs t >= 0, got {lo}")))
                } else {
                    Ok(())
                }
            }
            Psi::Custom(_) => {
                let n = 64;
                for i in 0..n {
                    let t = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                    let d = self.deriv1(t)?;
                    if !(d > 0.0) {
                        return Err(Error::NotMonotone { x: t });
                    }
                }
                Ok(())
            }
        }
    }

    /// The scale as an expression in x.
    pub fn expr(&self) -> Expr {
        match self {
            Psi::Identity => expr::var(),
            Psi::Log => expr::ln(expr::var()),
            Psi::Power(rho) => expr::pow(expr::var(), *rho),
            Psi::Custom(c) => c.expr.clone(),
        }
    }

    /// 1/Ψ'(x) as an expression, the weight in the scale derivative.
    pub fn inv_deriv_expr(&self) -> Expr {
        match self {
            Psi::Identity => expr::constant(1.0),
            Psi::Log => expr::var(),
            Psi::Power(rho) => expr::mul(
                expr::constant(1.0 / rho),
                expr::pow(expr::var(), 1.0 - rho),
            ),
            Psi::Custom(c) => expr::div(expr::constant(1.0), c.deriv.clone()),
        }
    }

    /// Ψ⁻¹ as an expression in x, for the closed-form scales.
    pub fn inverse_expr(&self) -> Option<Expr> {
        match self {
            Psi::Identity => Some(expr::var()),
            Psi::Log => Some(expr::exp(expr::var())),
            Psi::Power(rho) => Some(expr::pow(expr::var(), 1.0 / rho)),
            Psi::Custom(_) => None,
        }
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Identity => write!(f, "x"),
            Psi::Log => write!(f, "ln(x)"),
            Psi::Power(rho) => write!(f, "x^{rho}"),
            Psi::Custom(c) => write!(f, "{}", c.expr),
        }
    }
}

/// Lazily grown cache of iterated scale derivatives (f'/Ψ' applied k times).
///
/// Level 0 is the function itself. Shared by the series code, where the same
/// orders are revisited for every evaluation point.
pub struct PsiDerivatives {
    inv_deriv: Expr,
    levels: RwLock<Vec<Expr>>,
}

impl PsiDerivatives {
    pub fn new(psi: &Psi, f: Expr) -> Self {
        PsiDerivatives {
            inv_deriv: psi.inv_deriv_expr(),
            levels: RwLock::new(vec![f]),
        }
    }

    pub fn expr(&self, k: usize) -> Expr {
        {
            let cache = self.levels.read().unwrap();
            if let Some(e) = cache.get(k) {
                return e.clone();
            }
        }
        let mut cache = self.levels.write().unwrap();
        while cache.len() <= k {
            let prev = cache.last().expect("level 0 present").clone();
            if prev.is_zero() {
                cache.push(prev);
                continue;
            }
            let next = expr::mul(self.inv_deriv.clone(), prev.differentiate()).normalize();
            cache.push(next);
        }
        cache[k].clone()
    }

    pub fn eval(&self, k: usize, x: f64) -> Result<f64> {
        self.expr(k).eval(x)
    }

    /// True once the chain has reached an identically zero level at or below
    /// `k`, so every later term vanishes too.
    pub fn vanishes_from(&self, k: usize) -> bool {
        self.expr(k).is_zero()
    }
}

impl Clone for PsiDerivatives {
    fn clone(&self) -> Self {
        PsiDerivatives {
            inv_deriv: self.inv_deriv.clone(),
            levels: RwLock::new(self.levels.read().unwrap().clone()),
        }
    }
}

impl fmt::Debug for PsiDerivatives {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PsiDerivatives(levels = {})", self.levels.read().unwrap().len())
    }
}
