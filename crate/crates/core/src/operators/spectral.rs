//! Exact operator action on finite sums of scale powers.
//!
//! A [`PsiPowerSeries`] is Σ cᵢ (Ψ(x)-Ψ(a))^δᵢ. Every operator in this crate
//! maps such a sum to another such sum with gamma-ratio coefficients, term by
//! term and with no quadrature, which makes the series form an independent
//! backend for cross-checking the quadrature path.

use crate::error::{Error, Result};
use crate::special::gamma_ratio;

#[derive(Clone, Debug, PartialEq)]
pub struct PsiPowerSeries {
    /// (exponent, coefficient), exponents strictly increasing.
    terms: Vec<(f64, f64)>,
}

fn from_raw(mut terms: Vec<(f64, f64)>) -> PsiPowerSeries {
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
    for (d, c) in terms {
        match merged.last_mut() {
            Some(prev) if prev.0 == d => prev.1 += c,
            _ => merged.push((d, c)),
        }
    }
    merged.retain(|&(_, c)| c != 0.0);
    PsiPowerSeries { terms: merged }
}

impl PsiPowerSeries {
    /// Exponents must be finite and > -1 (integrability at the base point).
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let terms: Vec<(f64, f64)> = terms.into_iter().collect();
        for &(d, c) in &terms {
            if !d.is_finite() || !c.is_finite() {
                return Err(Error::invalid(format!(
                    "series term ({d}, {c}) is not finite"
                )));
            }
            if d <= -1.0 {
                return Err(Error::invalid(format!(
                    "series exponent {d} must exceed -1"
                )));
            }
        }
        Ok(from_raw(terms))
    }

    pub fn constant(c: f64) -> Self {
        from_raw(vec![(0.0, c)])
    }

    pub fn single(exponent: f64, coeff: f64) -> Result<Self> {
        Self::new([(exponent, coeff)])
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate at Δ = Ψ(x)-Ψ(a) >= 0, with 0^0 = 1 for the constant term.
    pub fn eval(&self, delta: f64) -> f64 {
        let mut acc = 0.0;
        for &(d, c) in &self.terms {
            if delta == 0.0 {
                if d == 0.0 {
                    acc += c;
                } else if d < 0.0 {
                    acc += c * f64::INFINITY;
                }
            } else {
                acc += c * delta.powf(d);
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        from_raw(terms)
    }

    pub fn scale(&self, k: f64) -> Self {
        from_raw(self.terms.iter().map(|&(d, c)| (d, k * c)).collect())
    }

    /// Product of two sums; fails if an exponent sum drops to -1 or below.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(d1, c1) in &self.terms {
            for &(d2, c2) in &other.terms {
                out.push((d1 + d2, c1 * c2));
            }
        }
        Self::new(out)
    }

    /// Fractional integral of positive `order`:
    /// Δ^δ ↦ Γ(δ+1)/Γ(δ+1+order) Δ^(δ+order).
    pub fn integral(&self, order: f64) -> Result<Self> {
        if !(order > 0.0) || !order.is_finite() {
            return Err(Error::invalid(format!(
                "integral order must be positive, got {order}"
            )));
        }
        Ok(from_raw(
            self.terms
                .iter()
                .map(|&(d, c)| (d + order, c * gamma_ratio(d + 1.0, d + 1.0 + order)))
                .collect(),
        ))
    }

    /// k-fold scale derivative: Δ^δ ↦ δ(δ-1)…(δ-k+1) Δ^(δ-k).
    pub fn scale_derivative(&self, k: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..k {
            out = from_raw(
                out.terms
                    .iter()
                    .filter(|&&(d, _)| d != 0.0)
                    .map(|&(d, c)| (d - 1.0, c * d))
                    .collect(),
            );
        }
        out
    }

    /// Δ^δ ↦ Γ(δ+1)/Γ(δ+1-α) Δ^(δ-α). The ratio is an exact zero where
    /// Γ(δ+1-α) has a pole, e.g. the constant term under a whole-order map.
    pub fn rl_derivative(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(from_raw(
            self.terms
                .iter()
                .map(|&(d, c)| (d - alpha, c * gamma_ratio(d + 1.0, d + 1.0 - alpha)))
                .collect(),
        ))
    }

    /// Same map with the constant term removed; negative exponents have no
    /// integrable scale derivative, so they are rejected.
    pub fn caputo_derivative(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let mut out = Vec::with_capacity(self.terms.len());
        for &(d, c) in &self.terms {
            if d == 0.0 {
                continue;
            }
            if d < 0.0 {
                return Err(Error::domain(format!(
                    "exponent {d} has no integrable scale derivative at the base point"
                )));
            }
            out.push((d - alpha, c * gamma_ratio(d + 1.0, d + 1.0 - alpha)));
        }
        Ok(from_raw(out))
    }

    /// Two-parameter interpolation: at type 1 the constant term drops
    /// (Caputo); at every type below 1 the map agrees with `rl_derivative`.
    pub fn hilfer_derivative(&self, alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid(format!(
                "type parameter must lie in [0, 1], got {beta}"
            )));
        }
        let xi = (1.0 - beta) * (1.0 - alpha);
        if xi == 0.0 {
            return self.caputo_derivative(alpha);
        }
        for &(d, _) in &self.terms {
            // the inner integral of order xi must leave a differentiable power
            if d <= -xi {
                return Err(Error::domain(format!(
                    "exponent {d} is too singular for type {beta} of order {alpha}"
                )));
            }
        }
        self.rl_derivative(alpha)
    }

    /// Limit of the order-`order` integral at the base point: the constant
    /// coefficient survives at order 0, everything else tends to 0.
    pub fn boundary_limit(&self, order: f64) -> f64 {
        if order > 0.0 {
            0.0
        } else {
            self.eval(0.0)
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "derivative order must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Partial sum of exp(Δ) = Σ Δ^k / k!, exact on the series backend.
pub fn exp_series(terms: usize) -> PsiPowerSeries {
    let mut fact = 1.0;
    let mut out = Vec::with_capacity(terms);
    for k in 0..terms {
        if k > 0 {
            fact *= k as f64;
        }
        out.push((k as f64, 1.0 / fact));
    }
    from_raw(out)
}
