//! Product-rule expansions for the scale-relative fractional operators.
//!
//! A fractional derivative of a product f·g is not (D f)·g + f·(D g); it is
//! an infinite series over the scale derivatives of one factor against
//! shifted operators of the other, plus a boundary correction Ω that vanishes
//! for type β < 1 and survives at β = 1. Two independent derivations of the
//! same expansion are implemented, one factored through the classic
//! derivative and one through the two-parameter derivative itself, so they
//! can cross-check each other. Everything here returns diagnostics: how many
//! terms each truncated sum used, the last term magnitude, and whether every
//! quadrature inside converged.

pub mod corpus;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::operators::{
    boundary_limit_integral, caputo_derivative, derivative_point, frac_integral,
    hilfer_derivative, hilfer_neg_order, rl_derivative, rl_neg_order, OpEval, Operand,
    OperatorParams,
};
use crate::psi::Psi;
use crate::quad::QuadratureSpec;
use crate::special::{gbinom, rgamma};
use serde::Serialize;
use std::cell::Cell;

pub use corpus::CorpusFn;

/// Stopping rule for the truncated series.
#[derive(Clone, Copy, Debug)]
pub struct TruncationPolicy {
    /// Largest summation index attempted; the sum runs m = 0..=max_terms.
    pub max_terms: usize,
    /// Relative tail tolerance against max(1, |partial sum|).
    pub tail_tol: f64,
    /// Consecutive below-tolerance terms required before stopping.
    /// Alternating binomial series can have accidental near-zero terms, so a
    /// single small term is not proof of convergence.
    pub streak: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            max_terms: 40,
            tail_tol: 1e-12,
            streak: 3,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 {
            return Err(Error::invalid("term budget must be at least 1".to_string()));
        }
        if !self.tail_tol.is_finite() || self.tail_tol <= 0.0 {
            return Err(Error::invalid(format!(
                "tail tolerance must be positive and finite, got {}",
                self.tail_tol
            )));
        }
        if self.streak < 1 {
            return Err(Error::invalid("stopping streak must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// One truncated sum: its value and how the truncation went.
#[derive(Clone, Copy, Debug)]
pub struct SeriesEval {
    pub value: f64,
    /// Terms actually added.
    pub terms_used: usize,
    /// |last added term|; 0 when the series terminated exactly.
    pub last_term_magnitude: f64,
    pub converged: bool,
}

/// Sum term(0), term(1), ... under the policy. `Ok(None)` from the term
/// function means every remaining term is exactly zero, which counts as
/// convergence.
pub fn truncated_sum(
    policy: &TruncationPolicy,
    mut term: impl FnMut(usize) -> Result<Option<f64>>,
) -> Result<SeriesEval> {
    policy.validate()?;
    let mut total = 0.0;
    let mut streak = 0usize;
    let mut last = 0.0f64;
    let mut used = 0usize;
    for m in 0..=policy.max_terms {
        let t = match term(m)? {
            Some(t) => t,
            None => {
                return Ok(SeriesEval {
                    value: total,
                    terms_used: used,
                    last_term_magnitude: 0.0,
                    converged: true,
                });
            }
        };
        if !t.is_finite() {
            return Err(Error::domain(format!("series term {m} is not finite")));
        }
        total += t;
        used = m + 1;
        last = t.abs();
        if last <= policy.tail_tol * total.abs().max(1.0) {
            streak += 1;
            if streak >= policy.streak {
                return Ok(SeriesEval {
                    value: total,
                    terms_used: used,
                    last_term_magnitude: last,
                    converged: true,
                });
            }
        } else {
            streak = 0;
        }
    }
    Ok(SeriesEval {
        value: total,
        terms_used: used,
        last_term_magnitude: last,
        converged: false,
    })
}

/// Expansion of the order-`order` integral of f at x in scale derivatives:
/// Σ_n C(-order, n) f^[n](x) Δ^(order+n) / Γ(order+n+1).
///
/// Valid when f is entire in the scale increment on the segment; the corpus
/// filter [`CorpusFn::entire_in`] guarantees that.
pub fn integral_series(
    psi: &Psi,
    a: f64,
    f: &Operand,
    order: f64,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesEval> {
    if !order.is_finite() || order <= 0.0 {
        return Err(Error::invalid(format!(
            "series expansion needs a positive order, got {order}"
        )));
    }
    if x < a {
        return Err(Error::domain(format!(
            "evaluation point {x} lies left of the base point {a}"
        )));
    }
    psi.check_increasing(a, x)?;
    let delta = psi.eval(x)? - psi.eval(a)?;
    truncated_sum(policy, |n| {
        if f.scale_derivative_vanishes(n) {
            return Ok(None);
        }
        Ok(Some(
            gbinom(-order, n as i64)
                * f.scale_derivative_eval(psi, a, n, x)?
                * delta.powf(order + n as f64)
                * rgamma(order + n as f64 + 1.0),
        ))
    })
}

/// Expansion of the order-`order` integral of f·g, with f carrying the scale
/// derivatives and g staying under the integral:
/// Σ_k C(-order, k) f^[k](x) I^(order+k)g(x).
pub fn product_integral_series(
    psi: &Psi,
    a: f64,
    f: &Operand,
    g: &Operand,
    order: f64,
    x: f64,
    spec: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<SeriesEval> {
    if !order.is_finite() || order <= 0.0 {
        return Err(Error::invalid(format!(
            "series expansion needs a positive order, got {order}"
        )));
    }
    let quad_ok = Cell::new(true);
    let mut out = truncated_sum(policy, |k| {
        if f.scale_derivative_vanishes(k) {
            return Ok(None);
        }
        let inner = frac_integral(psi, a, x, order + k as f64, g, spec)?;
        if !inner.converged {
            quad_ok.set(false);
        }
        Ok(Some(
            gbinom(-order, k as i64) * f.scale_derivative_eval(psi, a, k, x)? * inner.value,
        ))
    })?;
    out.converged &= quad_ok.get();
    Ok(out)
}

/// Boundary correction of the direct product rule:
/// Σ_k C(-ξ, k) · lim I^(ξ+k)g · (f^[k](x) - f^[k](a)) · Δ^(ξ-α)/Γ(β(1-α)).
///
/// Under the base-point limit convention every term vanishes for β < 1; at
/// β = 1 only k = 0 survives, leaving g(a)(f(x)-f(a))Δ^(-α)/Γ(1-α).
pub fn omega(
    p: &OperatorParams,
    f: &Operand,
    g: &Operand,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesEval> {
    let delta = derivative_point(p, x)?;
    let xi = p.xi();
    let pref = delta.powf(xi - p.alpha) * rgamma(p.beta * (1.0 - p.alpha));
    truncated_sum(policy, |k| {
        let bl = boundary_limit_integral(&p.psi, p.a, g, xi + k as f64)?;
        let df = f.scale_derivative_eval(&p.psi, p.a, k, x)?
            - f.scale_derivative_eval(&p.psi, p.a, k, p.a)?;
        Ok(Some(gbinom(-xi, k as i64) * bl * df * pref))
    })
}

// Boundary sum of the classic-split rule: same shape as omega but with the
// factor chain evaluated at the base point alone, and subtracted from the
// series rather than added.
fn correction(
    p: &OperatorParams,
    f: &Operand,
    g: &Operand,
    delta: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesEval> {
    let xi = p.xi();
    let pref = delta.powf(xi - p.alpha) * rgamma(p.beta * (1.0 - p.alpha));
    truncated_sum(policy, |k| {
        let bl = boundary_limit_integral(&p.psi, p.a, g, xi + k as f64)?;
        let fa = f.scale_derivative_eval(&p.psi, p.a, k, p.a)?;
        Ok(Some(gbinom(-xi, k as i64) * bl * fa * pref))
    })
}

/// Terms consumed by each truncated sum in a report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TermsUsed {
    pub series: usize,
    pub omega: usize,
}

/// Both sides of one product-rule check plus truncation diagnostics.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LeibnizReport {
    /// Direct operator value on f·g.
    pub lhs: f64,
    /// Truncated series plus the boundary contribution.
    pub rhs: f64,
    /// Signed boundary contribution included in rhs.
    pub omega: f64,
    pub abs_residual: f64,
    /// abs_residual / max(1, |lhs|).
    pub rel_residual: f64,
    pub terms_used: TermsUsed,
    pub last_term_magnitude: f64,
    /// True only if every truncation and every quadrature on both sides met
    /// its target.
    pub converged: bool,
}

fn finish_report(lhs: OpEval, series: SeriesEval, boundary: SeriesEval, signed: f64) -> LeibnizReport {
    let rhs = series.value + signed;
    let abs_residual = (lhs.value - rhs).abs();
    LeibnizReport {
        lhs: lhs.value,
        rhs,
        omega: signed,
        abs_residual,
        rel_residual: abs_residual / lhs.value.abs().max(1.0),
        terms_used: TermsUsed {
            series: series.terms_used,
            omega: boundary.terms_used,
        },
        last_term_magnitude: series.last_term_magnitude,
        converged: lhs.converged && series.converged && boundary.converged,
    }
}

/// Which derivation of the product rule to evaluate. Both compute the same
/// quantity: [`RuleForm::ClassicSplit`] factors the operator through the
/// classic derivative and convolves two binomial streams, [`RuleForm::Direct`]
/// expands against the two-parameter derivative itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleForm {
    ClassicSplit,
    Direct,
}

pub fn product_rule(
    form: RuleForm,
    p: &OperatorParams,
    f: &Operand,
    g: &Operand,
    x: f64,
    spec: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<LeibnizReport> {
    match form {
        RuleForm::ClassicSplit => product_rule_classic_split(p, f, g, x, spec, policy),
        RuleForm::Direct => product_rule_direct(p, f, g, x, spec, policy),
    }
}

/// Product rule expanded against the two-parameter derivative itself:
/// Σ_m C(α, m) f^[m](x) · D^(α-m)g(x) + Ω, where the m = 0 factor is the
/// full derivative of g and every m ≥ 1 factor collapses to an integral.
pub fn product_rule_direct(
    p: &OperatorParams,
    f: &Operand,
    g: &Operand,
    x: f64,
    spec: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<LeibnizReport> {
    derivative_point(p, x)?;
    let quad_ok = Cell::new(true);
    let mut series = truncated_sum(policy, |m| {
        if f.scale_derivative_vanishes(m) {
            return Ok(None);
        }
        let op = if m == 0 {
            hilfer_derivative(p, g, x, spec)?
        } else {
            hilfer_neg_order(p, g, m as u32, x, spec)?
        };
        if !op.converged {
            quad_ok.set(false);
        }
        Ok(Some(
            gbinom(p.alpha, m as i64) * f.scale_derivative_eval(&p.psi, p.a, m, x)? * op.value,
        ))
    })?;
    series.converged &= quad_ok.get();
    let boundary = omega(p, f, g, x, policy)?;
    let product = f.product(&p.psi, p.a, g)?;
    let lhs = hilfer_derivative(p, &product, x, spec)?;
    Ok(finish_report(lhs, series, boundary, boundary.value))
}

/// Product rule factored through the classic derivative. The operator order
/// is split as α = -ξ + (α+ξ) and the two binomial streams convolve into the
/// m-th coefficient; splitting at α+ξ is what makes the convolution close
/// back to C(α, m), so the result is mathematically identical to
/// [`product_rule_direct`]. The boundary sum enters with the opposite sign
/// and the base-point factor chain.
pub fn product_rule_classic_split(
    p: &OperatorParams,
    f: &Operand,
    g: &Operand,
    x: f64,
    spec: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<LeibnizReport> {
    let delta = derivative_point(p, x)?;
    let xi = p.xi();
    let quad_ok = Cell::new(true);
    let mut series = truncated_sum(policy, |m| {
        if f.scale_derivative_vanishes(m) {
            return Ok(None);
        }
        let coef: f64 = (0..=m)
            .map(|l| gbinom(-xi, (m - l) as i64) * gbinom(p.alpha + xi, l as i64))
            .sum();
        let op = if m == 0 {
            rl_derivative(p, g, x, spec)?
        } else {
            rl_neg_order(p, g, m as u32, x, spec)?
        };
        if !op.converged {
            quad_ok.set(false);
        }
        Ok(Some(
            coef * f.scale_derivative_eval(&p.psi, p.a, m, x)? * op.value,
        ))
    })?;
    series.converged &= quad_ok.get();
    let boundary = correction(p, f, g, delta, policy)?;
    let product = f.product(&p.psi, p.a, g)?;
    let lhs = hilfer_derivative(p, &product, x, spec)?;
    Ok(finish_report(lhs, series, boundary, -boundary.value))
}

/// One verification tuple for the sweep helper.
#[derive(Clone, Debug)]
pub struct RuleTuple {
    pub params: OperatorParams,
    pub f: Operand,
    pub g: Operand,
    pub x: f64,
}

/// Evaluate the chosen rule form for every tuple in parallel. Results come
/// back in input order, so output is deterministic regardless of scheduling.
pub fn sweep(
    tuples: &[RuleTuple],
    form: RuleForm,
    spec: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Vec<Result<LeibnizReport>> {
    use rayon::prelude::*;
    tuples
        .par_iter()
        .map(|t| product_rule(form, &t.params, &t.f, &t.g, t.x, spec, policy))
        .collect()
}

/// Scale a named case pins (or leaves to the caller).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseScale {
    Free,
    Identity,
    Log,
    /// Requires the caller's scale to be a power scale, which supplies ρ.
    PowerRequired,
}

/// Type parameter a named case pins (or leaves to the caller).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseBeta {
    Free,
    Zero,
    One,
}

/// One named instantiation of the product rule: a scale/type choice under
/// which the two-parameter derivative collapses to a classical operator.
#[derive(Clone, Copy, Debug)]
pub struct CaseInfo {
    pub id: u32,
    pub name: &'static str,
    pub scale: CaseScale,
    pub beta: CaseBeta,
}

impl CaseInfo {
    pub fn scale_label(&self) -> &'static str {
        match self.scale {
            CaseScale::Free => "free",
            CaseScale::Identity => "x",
            CaseScale::Log => "ln x",
            CaseScale::PowerRequired => "x^rho",
        }
    }

    pub fn beta_label(&self) -> &'static str {
        match self.beta {
            CaseBeta::Free => "free",
            CaseBeta::Zero => "0",
            CaseBeta::One => "1",
        }
    }
}

/// The ten named collapses, in their conventional order. Case 10 (chen) is
/// the classic derivative taken from an arbitrary terminal point, which the
/// base-point parameter already expresses.
pub const CASES: [CaseInfo; 10] = [
    CaseInfo { id: 1, name: "psi-riemann-liouville", scale: CaseScale::Free, beta: CaseBeta::Zero },
    CaseInfo { id: 2, name: "riemann-liouville", scale: CaseScale::Identity, beta: CaseBeta::Zero },
    CaseInfo { id: 3, name: "psi-caputo", scale: CaseScale::Free, beta: CaseBeta::One },
    CaseInfo { id: 4, name: "caputo", scale: CaseScale::Identity, beta: CaseBeta::One },
    CaseInfo { id: 5, name: "hilfer", scale: CaseScale::Identity, beta: CaseBeta::Free },
    CaseInfo { id: 6, name: "hadamard", scale: CaseScale::Log, beta: CaseBeta::One },
    CaseInfo { id: 7, name: "katugampola", scale: CaseScale::PowerRequired, beta: CaseBeta::Zero },
    CaseInfo { id: 8, name: "caputo-hadamard", scale: CaseScale::Log, beta: CaseBeta::One },
    CaseInfo { id: 9, name: "caputo-katugampola", scale: CaseScale::PowerRequired, beta: CaseBeta::One },
    CaseInfo { id: 10, name: "chen", scale: CaseScale::Identity, beta: CaseBeta::Zero },
];

/// A named-case run: the rule report under the case's effective parameters
/// plus the matching classical operator applied directly to f·g.
#[derive(Clone, Debug)]
pub struct SpecialCaseReport {
    pub id: u32,
    pub name: &'static str,
    /// Parameters after the case's scale/type overrides.
    pub params: OperatorParams,
    pub report: LeibnizReport,
    /// Reference operator value on f·g (classic for β = 0, regularized for
    /// β = 1, two-parameter otherwise).
    pub reference: OpEval,
}

/// Run one named case: pin the scale/type it dictates, evaluate the direct
/// product rule, and evaluate the collapsed reference operator on f·g.
/// `p` supplies α, the base point, the free scale and type where the case
/// leaves them open, and ρ (through a power scale) where required.
pub fn special_case(
    id: u32,
    f: &Expr,
    g: &Expr,
    p: &OperatorParams,
    x: f64,
    spec: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<SpecialCaseReport> {
    let info = CASES
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::invalid(format!("unknown case id {id}; valid ids are 1..=10")))?;
    let psi = match info.scale {
        CaseScale::Free => p.psi.clone(),
        CaseScale::Identity => Psi::identity(),
        CaseScale::Log => Psi::log(),
        CaseScale::PowerRequired => match p.psi {
            Psi::Power(_) => p.psi.clone(),
            _ => {
                return Err(Error::invalid(format!(
                    "case {id} ({}) needs a power scale to supply rho",
                    info.name
                )));
            }
        },
    };
    let beta = match info.beta {
        CaseBeta::Free => p.beta,
        CaseBeta::Zero => 0.0,
        CaseBeta::One => 1.0,
    };
    let eff = OperatorParams::new(p.alpha, beta, psi, p.a)?;
    let f_op = Operand::smooth(&eff.psi, f.clone());
    let g_op = Operand::smooth(&eff.psi, g.clone());
    let report = product_rule_direct(&eff, &f_op, &g_op, x, spec, policy)?;
    let product = f_op.product(&eff.psi, eff.a, &g_op)?;
    let reference = if beta == 0.0 {
        rl_derivative(&eff, &product, x, spec)?
    } else if beta == 1.0 {
        caputo_derivative(&eff, &product, x, spec)?
    } else {
        hilfer_derivative(&eff, &product, x, spec)?
    };
    Ok(SpecialCaseReport {
        id,
        name: info.name,
        params: eff,
        report,
        reference,
    })
}
