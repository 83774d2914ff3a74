//! Fractional integral and the three derivative types against a scale.
//!
//! All operators act from a base point `a` and are taken with respect to a
//! strictly increasing scale Ψ:
//!
//! * integral of order µ > 0:   1/Γ(µ) ∫_a^x Ψ'(t) (Ψ(x)-Ψ(t))^(µ-1) f(t) dt
//! * derivative of order α ∈ (0,1), classic form: scale-derivative after an
//!   order-(1-α) integral
//! * derivative of order α, regularized form: order-(1-α) integral of the
//!   scale derivative (kills constants)
//! * two-parameter derivative of order α and type β ∈ [0,1], which
//!   interpolates between those two compositions
//!
//! Functions enter as an [`Operand`]: either a closed-form expression
//! (evaluated by quadrature, scale derivatives taken symbolically) or a
//! finite scale-power series (mapped exactly, no quadrature). The two
//! backends are independent, which the test suite leans on heavily.

pub mod spectral;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::psi::{Psi, PsiDerivatives};
use crate::quad::{frac_integral_quad, weighted_frac_integral_quad, QuadratureSpec};
use crate::special::rgamma;
use spectral::PsiPowerSeries;
use std::cell::Cell;
use std::sync::Arc;

/// Order, type, scale, and base point shared by the derivative operators.
#[derive(Clone, Debug)]
pub struct OperatorParams {
    /// Order, strictly between 0 and 1.
    pub alpha: f64,
    /// Type, between 0 (classic) and 1 (regularized).
    pub beta: f64,
    pub psi: Psi,
    /// Base point of the integrals.
    pub a: f64,
}

impl OperatorParams {
    pub fn new(alpha: f64, beta: f64, psi: Psi, a: f64) -> Result<Self> {
        if !alpha.is_finite() || !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!(
                "derivative order must lie in (0, 1), got {alpha}"
            )));
        }
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid(format!(
                "type parameter must lie in [0, 1], got {beta}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::invalid(format!("base point must be finite, got {a}")));
        }
        psi.eval(a)?;
        Ok(OperatorParams { alpha, beta, psi, a })
    }

    /// The hidden integral order (1-β)(1-α) of the two-parameter composition.
    pub fn xi(&self) -> f64 {
        (1.0 - self.beta) * (1.0 - self.alpha)
    }
}

/// A function the operators can act on.
#[derive(Clone, Debug)]
pub enum Operand {
    /// Closed-form expression; scale derivatives are taken symbolically and
    /// integrals by quadrature. Must be built against the same scale the
    /// operators use.
    Smooth(Arc<PsiDerivatives>),
    /// Finite sum of powers of (Ψ(x)-Ψ(a)); everything is exact.
    Series(PsiPowerSeries),
}

impl Operand {
    pub fn smooth(psi: &Psi, f: Expr) -> Operand {
        Operand::Smooth(Arc::new(PsiDerivatives::new(psi, f)))
    }

    pub fn series(s: PsiPowerSeries) -> Operand {
        Operand::Series(s)
    }

    pub fn eval(&self, psi: &Psi, a: f64, x: f64) -> Result<f64> {
        match self {
            Operand::Smooth(chain) => chain.eval(0, x),
            Operand::Series(s) => {
                let delta = psi.eval(x)? - psi.eval(a)?;
                Ok(s.eval(delta))
            }
        }
    }

    /// k-fold scale derivative evaluated at x.
    pub fn scale_derivative_eval(&self, psi: &Psi, a: f64, k: usize, x: f64) -> Result<f64> {
        match self {
            Operand::Smooth(chain) => chain.eval(k, x),
            Operand::Series(s) => {
                let delta = psi.eval(x)? - psi.eval(a)?;
                Ok(s.scale_derivative(k).eval(delta))
            }
        }
    }

    /// True when the k-fold scale derivative is identically zero, which lets
    /// series truncation terminate exactly.
    pub fn scale_derivative_vanishes(&self, k: usize) -> bool {
        match self {
            Operand::Smooth(chain) => chain.vanishes_from(k),
            Operand::Series(s) => s.scale_derivative(k).is_zero(),
        }
    }

    /// Closed-form expression for this operand in the underlying variable.
    pub fn expr(&self, psi: &Psi, a: f64) -> Result<Expr> {
        match self {
            Operand::Smooth(chain) => Ok(chain.expr(0)),
            Operand::Series(s) => {
                let psi_a = psi.eval(a)?;
                let base = crate::expr::sub(psi.expr(), crate::expr::constant(psi_a));
                let mut acc = crate::expr::constant(0.0);
                for &(d, c) in s.terms() {
                    let term = if d == 0.0 {
                        crate::expr::constant(c)
                    } else {
                        crate::expr::mul(
                            crate::expr::constant(c),
                            crate::expr::pow(base.clone(), d),
                        )
                    };
                    acc = crate::expr::add(acc, term);
                }
                Ok(acc)
            }
        }
    }

    /// Pointwise product f·g as an operand, staying exact when both factors
    /// are series.
    pub fn product(&self, psi: &Psi, a: f64, other: &Operand) -> Result<Operand> {
        match (self, other) {
            (Operand::Series(s1), Operand::Series(s2)) => Ok(Operand::Series(s1.mul(s2)?)),
            _ => {
                let product = crate::expr::mul(self.expr(psi, a)?, other.expr(psi, a)?);
                Ok(Operand::smooth(psi, product))
            }
        }
    }
}

/// Value of one operator application plus whether quadrature met tolerance.
/// Series-backed evaluations are exact and always converged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpEval {
    pub value: f64,
    pub converged: bool,
}

pub(crate) fn derivative_point(p: &OperatorParams, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("evaluation point {x} is not finite")));
    }
    if x <= p.a {
        return Err(Error::domain(format!(
            "derivatives need x > a, got x = {x} with a = {}",
            p.a
        )));
    }
    p.psi.check_increasing(p.a, x)?;
    let delta = p.psi.eval(x)? - p.psi.eval(p.a)?;
    if !(delta > 0.0) {
        return Err(Error::NotMonotone { x });
    }
    Ok(delta)
}

/// Fractional integral of order `order` > 0 from `a`, evaluated at `x`.
pub fn frac_integral(
    psi: &Psi,
    a: f64,
    x: f64,
    order: f64,
    f: &Operand,
    spec: &QuadratureSpec,
) -> Result<OpEval> {
    weighted_frac_integral(psi, a, x, order, 0.0, f, spec)
}

/// Integral of order `order` of (Ψ(t)-Ψ(a))^`left_exponent` · f(t). The
/// endpoint factor is handled by the quadrature weight (or exactly on the
/// series backend), so it never degrades convergence.
pub fn weighted_frac_integral(
    psi: &Psi,
    a: f64,
    x: f64,
    order: f64,
    left_exponent: f64,
    f: &Operand,
    spec: &QuadratureSpec,
) -> Result<OpEval> {
    match f {
        Operand::Smooth(chain) => {
            let q = weighted_frac_integral_quad(
                psi,
                a,
                x,
                order,
                left_exponent,
                &|t| chain.eval(0, t),
                spec,
            )?;
            Ok(OpEval {
                value: q.value,
                converged: q.converged,
            })
        }
        Operand::Series(s) => {
            if x < a {
                return Err(Error::domain(format!(
                    "evaluation point {x} lies left of the base point {a}"
                )));
            }
            psi.check_increasing(a, x)?;
            let delta = psi.eval(x)? - psi.eval(a)?;
            let weighted = if left_exponent == 0.0 {
                s.clone()
            } else {
                s.mul(&PsiPowerSeries::single(left_exponent, 1.0)?)?
            };
            Ok(OpEval {
                value: weighted.integral(order)?.eval(delta),
                converged: true,
            })
        }
    }
}

/// Regularized derivative: order-(1-α) integral of the scale derivative.
pub fn caputo_derivative(
    p: &OperatorParams,
    f: &Operand,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<OpEval> {
    let delta = derivative_point(p, x)?;
    match f {
        Operand::Smooth(chain) => {
            let q = frac_integral_quad(
                &p.psi,
                p.a,
                x,
                1.0 - p.alpha,
                &|t| chain.eval(1, t),
                spec,
            )?;
            Ok(OpEval {
                value: q.value,
                converged: q.converged,
            })
        }
        Operand::Series(s) => Ok(OpEval {
            value: s.caputo_derivative(p.alpha)?.eval(delta),
            converged: true,
        }),
    }
}

/// Classic derivative. On expressions it uses the regularized form plus the
/// exact boundary term f(a) Δ^(-α)/Γ(1-α), which is the same composition with
/// the differentiation pushed inside.
pub fn rl_derivative(
    p: &OperatorParams,
    f: &Operand,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<OpEval> {
    let delta = derivative_point(p, x)?;
    match f {
        Operand::Smooth(chain) => {
            let q = frac_integral_quad(
                &p.psi,
                p.a,
                x,
                1.0 - p.alpha,
                &|t| chain.eval(1, t),
                spec,
            )?;
            let boundary = chain.eval(0, p.a)? * delta.powf(-p.alpha) * rgamma(1.0 - p.alpha);
            Ok(OpEval {
                value: q.value + boundary,
                converged: q.converged,
            })
        }
        Operand::Series(s) => Ok(OpEval {
            value: s.rl_derivative(p.alpha)?.eval(delta),
            converged: true,
        }),
    }
}

/// Two-parameter derivative of order α and type β: an order-β(1-α) integral,
/// a scale derivative, and an order-(1-β)(1-α) integral, composed outside in.
///
/// On expressions the scale derivative is commuted into the inner integral,
/// which splits the operator into a smooth double integral plus the same
/// boundary term the classic derivative carries. The outer integrand then has
/// a declared (Ψ(t)-Ψ(a))^ξ factor that the weighted quadrature absorbs.
pub fn hilfer_derivative(
    p: &OperatorParams,
    f: &Operand,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<OpEval> {
    let delta = derivative_point(p, x)?;
    let chain = match f {
        Operand::Series(s) => {
            return Ok(OpEval {
                value: s.hilfer_derivative(p.alpha, p.beta)?.eval(delta),
                converged: true,
            });
        }
        Operand::Smooth(chain) => chain,
    };
    let xi = p.xi();
    let outer = p.beta * (1.0 - p.alpha);
    if xi == 0.0 {
        // type 1: the composition is exactly the regularized derivative
        let q = frac_integral_quad(&p.psi, p.a, x, outer, &|t| chain.eval(1, t), spec)?;
        return Ok(OpEval {
            value: q.value,
            converged: q.converged,
        });
    }
    let boundary = chain.eval(0, p.a)? * delta.powf(-p.alpha) * rgamma(1.0 - p.alpha);
    if outer == 0.0 {
        // type 0: classic derivative, xi = 1 - α
        let q = frac_integral_quad(&p.psi, p.a, x, xi, &|t| chain.eval(1, t), spec)?;
        return Ok(OpEval {
            value: q.value + boundary,
            converged: q.converged,
        });
    }
    let psi_a = p.psi.eval(p.a)?;
    let inner_ok = Cell::new(true);
    let smooth_part = |t: f64| -> Result<f64> {
        let inner = frac_integral_quad(&p.psi, p.a, t, xi, &|s| chain.eval(1, s), spec)?;
        if !inner.converged {
            inner_ok.set(false);
        }
        let dt = p.psi.eval(t)? - psi_a;
        Ok(inner.value / dt.powf(xi))
    };
    // the outer refinement differences sit on the inner tolerance's noise
    // floor, so the outer loop gets a 10x looser target
    let outer_spec = QuadratureSpec {
        tolerance: spec.tolerance * 10.0,
        ..*spec
    };
    let q = weighted_frac_integral_quad(&p.psi, p.a, x, outer, xi, &smooth_part, &outer_spec)?;
    Ok(OpEval {
        value: q.value + boundary,
        converged: q.converged && inner_ok.get(),
    })
}

/// The order-(α-m) classic derivative for m >= 1, which collapses to the
/// plain integral of order m-α.
pub fn rl_neg_order(
    p: &OperatorParams,
    f: &Operand,
    m: u32,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<OpEval> {
    if m == 0 {
        return Err(Error::invalid(
            "negative-order form needs a shift m >= 1".to_string(),
        ));
    }
    frac_integral(&p.psi, p.a, x, m as f64 - p.alpha, f, spec)
}

/// The order-(α-m) two-parameter derivative for m >= 1. For every type the
/// composition collapses to the same order-(m-α) integral: the boundary
/// pieces that distinguish the types vanish at negative orders.
pub fn hilfer_neg_order(
    p: &OperatorParams,
    f: &Operand,
    m: u32,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<OpEval> {
    rl_neg_order(p, f, m, x, spec)
}

/// Limit of the order-`order` integral of g at the base point, for g bounded
/// near a: zero for positive order, g(a) at order zero.
pub fn boundary_limit_integral(psi: &Psi, a: f64, g: &Operand, order: f64) -> Result<f64> {
    if order < 0.0 {
        return Err(Error::domain(format!(
            "boundary limit needs a non-negative order, got {order}"
        )));
    }
    if order > 0.0 {
        Ok(0.0)
    } else {
        g.eval(psi, a, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::special::gamma;
    use proptest::prelude::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn params(alpha: f64, beta: f64, psi: Psi, a: f64) -> OperatorParams {
        OperatorParams::new(alpha, beta, psi, a).unwrap()
    }

    // reference: derivative of exp(t) from 0 in the identity scale is
    // t^(-α) E_{1,1-α}(t); partial sums of the defining series converge fast
    fn exp_reference(alpha: f64, x: f64, drop_constant: bool) -> f64 {
        let mut acc = 0.0;
        let start = if drop_constant { 1 } else { 0 };
        for k in start..90 {
            acc += x.powf(k as f64 - alpha) * rgamma(k as f64 + 1.0 - alpha);
        }
        acc
    }

    #[test]
    fn classic_derivative_of_exp_matches_series_reference() {
        let p = params(0.6, 0.0, Psi::identity(), 0.0);
        let f = Operand::smooth(&p.psi, parse("exp(x)").unwrap());
        let x = 1.3;
        let got = rl_derivative(&p, &f, x, &spec()).unwrap();
        let want = exp_reference(0.6, x, false);
        assert!(got.converged);
        assert!(
            ((got.value - want) / want).abs() < 1e-10,
            "{} vs {want}",
            got.value
        );
    }

    #[test]
    fn regularized_derivative_of_exp_matches_series_reference() {
        let p = params(0.6, 1.0, Psi::identity(), 0.0);
        let f = Operand::smooth(&p.psi, parse("exp(x)").unwrap());
        let x = 1.3;
        let got = caputo_derivative(&p, &f, x, &spec()).unwrap();
        let want = exp_reference(0.6, x, true);
        assert!(got.converged);
        assert!(
            ((got.value - want) / want).abs() < 1e-10,
            "{} vs {want}",
            got.value
        );
    }

    #[test]
    fn two_parameter_derivative_interpolates_on_exp() {
        // f(a) != 0, yet for every type below 1 the value must match the
        // classic derivative, and at type 1 the regularized one
        let x = 1.3;
        let classic = exp_reference(0.6, x, false);
        let regularized = exp_reference(0.6, x, true);
        for beta in [0.0, 0.3, 0.7] {
            let p = params(0.6, beta, Psi::identity(), 0.0);
            let f = Operand::smooth(&p.psi, parse("exp(x)").unwrap());
            let got = hilfer_derivative(&p, &f, x, &spec()).unwrap();
            assert!(got.converged, "beta = {beta}");
            assert!(
                ((got.value - classic) / classic).abs() < 1e-8,
                "beta = {beta}: {} vs {classic}",
                got.value
            );
        }
        let p = params(0.6, 1.0, Psi::identity(), 0.0);
        let f = Operand::smooth(&p.psi, parse("exp(x)").unwrap());
        let got = hilfer_derivative(&p, &f, x, &spec()).unwrap();
        assert!(((got.value - regularized) / regularized).abs() < 1e-10);
    }

    #[test]
    fn power_rule_on_expressions() {
        // D^α x^δ from 0 = Γ(δ+1)/Γ(δ+1-α) x^(δ-α); f(0) = 0 makes the
        // classic and regularized forms coincide
        let alpha = 0.6;
        let x: f64 = 1.3;
        for (d, tol) in [(1.0, 1e-11), (1.7, 1e-9), (2.0, 1e-11), (3.0, 1e-11)] {
            let p = params(alpha, 0.0, Psi::identity(), 0.0);
            let f = Operand::smooth(&p.psi, parse(&format!("x^{d}")).unwrap());
            let want = gamma(d + 1.0).unwrap() * rgamma(d + 1.0 - alpha) * x.powf(d - alpha);
            let rl = rl_derivative(&p, &f, x, &spec()).unwrap();
            let cap = caputo_derivative(&p, &f, x, &spec()).unwrap();
            assert!(
                ((rl.value - want) / want).abs() < tol,
                "classic, d = {d}: {} vs {want}",
                rl.value
            );
            assert!(
                ((cap.value - want) / want).abs() < tol,
                "regularized, d = {d}: {} vs {want}",
                cap.value
            );
        }
        for d in [1.0, 2.0, 3.0] {
            let p = params(alpha, 0.5, Psi::identity(), 0.0);
            let f = Operand::smooth(&p.psi, parse(&format!("x^{d}")).unwrap());
            let want = gamma(d + 1.0).unwrap() * rgamma(d + 1.0 - alpha) * x.powf(d - alpha);
            let h = hilfer_derivative(&p, &f, x, &spec()).unwrap();
            assert!(
                ((h.value - want) / want).abs() < 1e-8,
                "two-parameter, d = {d}: {} vs {want}",
                h.value
            );
        }
    }

    #[test]
    fn constants_distinguish_the_types() {
        let alpha = 0.45;
        let x: f64 = 2.0;
        let p0 = params(alpha, 0.0, Psi::log(), 1.0);
        let f = Operand::smooth(&p0.psi, parse("4").unwrap());
        let delta: f64 = x.ln();
        let want = 4.0 * delta.powf(-alpha) * rgamma(1.0 - alpha);
        let cap = caputo_derivative(&params(alpha, 1.0, Psi::log(), 1.0), &f, x, &spec()).unwrap();
        assert_eq!(cap.value, 0.0);
        let rl = rl_derivative(&p0, &f, x, &spec()).unwrap();
        assert!(((rl.value - want) / want).abs() < 1e-12);
        let h_mid = hilfer_derivative(&params(alpha, 0.7, Psi::log(), 1.0), &f, x, &spec()).unwrap();
        assert!(
            ((h_mid.value - want) / want).abs() < 1e-9,
            "{} vs {want}",
            h_mid.value
        );
        let h_one = hilfer_derivative(&params(alpha, 1.0, Psi::log(), 1.0), &f, x, &spec()).unwrap();
        assert_eq!(h_one.value, 0.0);
    }

    #[test]
    fn backends_agree_on_scale_polynomials() {
        // (Ψ(x)-Ψ(a))² through both backends, log scale from a = 1
        let psi = Psi::log();
        let smooth = Operand::smooth(&psi, parse("ln(x)^2").unwrap());
        let series = Operand::series(PsiPowerSeries::single(2.0, 1.0).unwrap());
        let x = 2.0;
        for (alpha, beta) in [(0.55, 0.0), (0.55, 0.35), (0.55, 1.0), (0.2, 0.8)] {
            let p = params(alpha, beta, psi.clone(), 1.0);
            let hs = hilfer_derivative(&p, &smooth, x, &spec()).unwrap();
            let hz = hilfer_derivative(&p, &series, x, &spec()).unwrap();
            assert!(hs.converged);
            assert!(
                ((hs.value - hz.value) / hz.value).abs() < 1e-9,
                "alpha={alpha} beta={beta}: {} vs {}",
                hs.value,
                hz.value
            );
        }
        let p = params(0.55, 0.0, psi.clone(), 1.0);
        let rs = rl_derivative(&p, &smooth, x, &spec()).unwrap();
        let rz = rl_derivative(&p, &series, x, &spec()).unwrap();
        assert!(((rs.value - rz.value) / rz.value).abs() < 1e-10);
        let cs = caputo_derivative(&p, &smooth, x, &spec()).unwrap();
        let cz = caputo_derivative(&p, &series, x, &spec()).unwrap();
        assert!(((cs.value - cz.value) / cz.value).abs() < 1e-10);
    }

    #[test]
    fn integral_backends_agree_and_compose() {
        let psi = Psi::power(2.0).unwrap();
        let a = 0.8;
        let x = 1.2;
        let series = PsiPowerSeries::new([(0.0, 1.0), (1.0, -0.5), (2.0, 2.0)]).unwrap();
        let pa = psi.eval(a).unwrap();
        let smooth_expr = parse(&format!("1 - 0.5 * (x^2 - {pa}) + 2 * (x^2 - {pa})^2")).unwrap();
        let smooth = Operand::smooth(&psi, smooth_expr);
        let sop = Operand::series(series.clone());
        for order in [0.4, 1.0, 2.3] {
            let qs = frac_integral(&psi, a, x, order, &smooth, &spec()).unwrap();
            let qz = frac_integral(&psi, a, x, order, &sop, &spec()).unwrap();
            assert!(qs.converged);
            assert!(
                ((qs.value - qz.value) / qz.value).abs() < 1e-10,
                "order {order}: {} vs {}",
                qs.value,
                qz.value
            );
        }
        // exact semigroup on the series backend
        let twice = series.integral(0.4).unwrap().integral(0.7).unwrap();
        let once = series.integral(1.1).unwrap();
        assert_eq!(twice.terms().len(), once.terms().len());
        for (got, want) in twice.terms().iter().zip(once.terms()) {
            assert!((got.0 - want.0).abs() < 1e-12);
            assert!((got.1 - want.1).abs() < 1e-13 * want.1.abs());
        }
    }

    #[test]
    fn negative_order_forms_collapse_to_integrals() {
        let p = params(0.35, 0.6, Psi::identity(), 0.0);
        let f = Operand::series(PsiPowerSeries::single(2.0, 1.0).unwrap());
        let x: f64 = 1.4;
        for m in [1u32, 2, 3] {
            let want = gamma(3.0).unwrap()
                * rgamma(3.0 + m as f64 - p.alpha)
                * x.powf(2.0 + m as f64 - p.alpha);
            let rl = rl_neg_order(&p, &f, m, x, &spec()).unwrap();
            let hl = hilfer_neg_order(&p, &f, m, x, &spec()).unwrap();
            assert_eq!(rl.value, hl.value);
            assert!(((rl.value - want) / want).abs() < 1e-12);
        }
        assert!(rl_neg_order(&p, &f, 0, x, &spec()).is_err());
    }

    #[test]
    fn weighted_integral_backends_agree() {
        let psi = Psi::log();
        let (a, x) = (1.0, 2.4);
        let smooth = Operand::smooth(&psi, parse("1 + ln(x)^2").unwrap());
        let series =
            Operand::series(PsiPowerSeries::new([(0.0, 1.0), (2.0, 1.0)]).unwrap());
        for (order, eta) in [(0.6, -0.5), (0.6, 0.75), (1.3, 1.0)] {
            let ws = weighted_frac_integral(&psi, a, x, order, eta, &smooth, &spec()).unwrap();
            let wz = weighted_frac_integral(&psi, a, x, order, eta, &series, &spec()).unwrap();
            assert!(ws.converged);
            assert!(
                ((ws.value - wz.value) / wz.value).abs() < 1e-10,
                "order {order} eta {eta}: {} vs {}",
                ws.value,
                wz.value
            );
        }
    }

    #[test]
    fn boundary_limit_conventions() {
        let psi = Psi::identity();
        let g = Operand::smooth(&psi, parse("exp(x)").unwrap());
        assert_eq!(boundary_limit_integral(&psi, 0.5, &g, 0.3).unwrap(), 0.0);
        let at_zero = boundary_limit_integral(&psi, 0.5, &g, 0.0).unwrap();
        assert!((at_zero - 0.5f64.exp()).abs() < 1e-15);
        assert!(boundary_limit_integral(&psi, 0.5, &g, -0.1).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(OperatorParams::new(0.0, 0.5, Psi::identity(), 0.0).is_err());
        assert!(OperatorParams::new(1.0, 0.5, Psi::identity(), 0.0).is_err());
        assert!(OperatorParams::new(0.5, -0.1, Psi::identity(), 0.0).is_err());
        assert!(OperatorParams::new(0.5, 1.1, Psi::identity(), 0.0).is_err());
        assert!(OperatorParams::new(0.5, 0.5, Psi::log(), 0.0).is_err());
        let p = params(0.5, 0.5, Psi::identity(), 1.0);
        let f = Operand::smooth(&p.psi, parse("x").unwrap());
        assert!(hilfer_derivative(&p, &f, 1.0, &spec()).is_err());
        assert!(rl_derivative(&p, &f, 0.5, &spec()).is_err());
        assert!(caputo_derivative(&p, &f, f64::NAN, &spec()).is_err());
    }

    #[test]
    fn integral_at_base_point_is_zero() {
        let psi = Psi::identity();
        let f = Operand::smooth(&psi, parse("exp(x)").unwrap());
        let got = frac_integral(&psi, 1.0, 1.0, 0.7, &f, &spec()).unwrap();
        assert_eq!(got.value, 0.0);
        assert!(got.converged);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn two_parameter_derivative_backends_agree_on_exp(
            alpha in 0.1..0.9f64,
            beta in 0.0..0.95f64,
            x in 1.05..2.2f64,
        ) {
            // exp(Ψ(x)-Ψ(a)) through quadrature vs a 40-term series map
            let psi = Psi::identity();
            let p = params(alpha, beta, psi.clone(), 1.0);
            let smooth = Operand::smooth(&psi, parse("exp(x - 1)").unwrap());
            let series = Operand::series(spectral::exp_series(40));
            let hs = hilfer_derivative(&p, &smooth, x, &spec()).unwrap();
            let hz = hilfer_derivative(&p, &series, x, &spec()).unwrap();
            prop_assert!(hs.converged);
            prop_assert!(
                ((hs.value - hz.value) / hz.value).abs() < 1e-7,
                "alpha={} beta={} x={}: {} vs {}",
                alpha, beta, x, hs.value, hz.value
            );
        }
    }
}
