//! Gauss-Jacobi quadrature on [0,1] for weights (1-s)^p s^q, p, q > -1.
//!
//! Rules come from the Golub-Welsch construction: eigenvalues of the
//! three-term-recurrence Jacobi matrix give the nodes, squared first
//! eigenvector components scaled by the weight's total mass give the weights.
//! The symmetric tridiagonal eigenproblem is solved directly with QL
//! iterations carrying only the first-row components, which is all the
//! weights need.
//!
//! [`frac_integral_quad`] uses these rules for integrals of the form
//!   1/Γ(α) ∫_a^x Ψ'(t) (Ψ(x)-Ψ(t))^(α-1) (Ψ(t)-Ψ(a))^η f(t) dt,
//! where the substitution u = Ψ(t) turns both endpoint singularities into
//! the Jacobi weight exactly, so only the smooth part of f is sampled.

use crate::error::{Error, Result};
use crate::psi::Psi;
use crate::special::{gamma, rgamma};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Controls for the refinement loop around a base rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Node count of the first rule; each refinement doubles it.
    pub base_nodes: usize,
    /// Relative tolerance on the difference of successive refinements.
    pub tolerance: f64,
    /// How many doublings to try before giving up.
    pub max_refinements: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            base_nodes: 32,
            tolerance: 1e-11,
            max_refinements: 4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.base_nodes == 0 || self.base_nodes > (1 << 14) {
            return Err(Error::invalid(format!(
                "base node count {} out of range 1..=16384",
                self.base_nodes
            )));
        }
        if self.max_refinements > 12 {
            return Err(Error::invalid(format!(
                "refinement limit {} out of range 0..=12",
                self.max_refinements
            )));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::invalid(format!(
                "tolerance {} must be positive and finite",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// One converged (or abandoned) quadrature evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadEval {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

/// Gauss-Jacobi rule on [0,1] for the weight (1-s)^exp_at_one * s^exp_at_zero.
#[derive(Clone, Debug)]
pub struct JacobiRule {
    pub exp_at_one: f64,
    pub exp_at_zero: f64,
    /// Strictly increasing, all interior.
    pub nodes: Vec<f64>,
    /// All positive; they sum to Beta(exp_at_one + 1, exp_at_zero + 1).
    pub weights: Vec<f64>,
}

impl JacobiRule {
    /// Σ w_i f(s_i); errors from `f` abort the sum.
    pub fn apply(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (&s, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(s)?;
        }
        Ok(acc)
    }
}

fn beta_mass(p: f64, q: f64) -> f64 {
    // p, q > 0 by construction, so gamma cannot hit a pole
    gamma(p).expect("positive argument") * gamma(q).expect("positive argument") * rgamma(p + q)
}

/// QL with implicit shifts on a symmetric tridiagonal matrix, rotating a
/// single row vector `z` along; `e[n-1]` is workspace.
fn tridiag_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::domain(
                    "tridiagonal eigenvalue iteration stalled".to_string(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // deflate and restart this eigenvalue
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn build_rule(n: usize, exp_at_one: f64, exp_at_zero: f64) -> Result<JacobiRule> {
    // recurrence coefficients for Jacobi polynomials on [-1,1] with
    // weight (1-x)^A (1+x)^B
    let a = exp_at_one;
    let b = exp_at_zero;
    let apb = a + b;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    d[0] = (b - a) / (apb + 2.0);
    for k in 1..n {
        let den = 2.0 * k as f64 + apb;
        d[k] = (b * b - a * a) / (den * (den + 2.0));
        let e2 = if k == 1 {
            // the generic expression carries (1 + A + B) in numerator and
            // denominator; cancelled so A + B <= -1 stays finite
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + apb).powi(2) * (3.0 + apb))
        } else {
            let kf = k as f64;
            4.0 * kf * (kf + a) * (kf + b) * (kf + apb)
                / (den.powi(2) * (den + 1.0) * (den - 1.0))
        };
        e[k - 1] = e2.sqrt();
    }
    tridiag_ql(&mut d, &mut e, &mut z)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let mass = beta_mass(a + 1.0, b + 1.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &i in &order {
        nodes.push(0.5 * (1.0 + d[i]));
        weights.push(mass * z[i] * z[i]);
    }
    Ok(JacobiRule {
        exp_at_one,
        exp_at_zero,
        nodes,
        weights,
    })
}

type RuleKey = (usize, u64, u64);

fn rule_cache() -> &'static RwLock<HashMap<RuleKey, Arc<JacobiRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<RuleKey, Arc<JacobiRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached rule lookup. Exponents must be finite and > -1.
pub fn jacobi_rule(n: usize, exp_at_one: f64, exp_at_zero: f64) -> Result<Arc<JacobiRule>> {
    if n == 0 {
        return Err(Error::invalid("rule needs at least one node".to_string()));
    }
    if !(exp_at_one > -1.0) || !exp_at_one.is_finite() {
        return Err(Error::invalid(format!(
            "weight exponent at 1 must exceed -1, got {exp_at_one}"
        )));
    }
    if !(exp_at_zero > -1.0) || !exp_at_zero.is_finite() {
        return Err(Error::invalid(format!(
            "weight exponent at 0 must exceed -1, got {exp_at_zero}"
        )));
    }
    let key = (n, exp_at_one.to_bits(), exp_at_zero.to_bits());
    if let Some(rule) = rule_cache().read().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_rule(n, exp_at_one, exp_at_zero)?);
    let mut cache = rule_cache().write().unwrap();
    Ok(cache.entry(key).or_insert(rule).clone())
}

/// Fractional integral of order `order` of f against the scale `psi`, with an
/// extra declared factor (Ψ(t)-Ψ(a))^`left_exponent` absorbed into the rule's
/// weight so `f` itself can stay smooth at the left endpoint.
pub fn weighted_frac_integral_quad(
    psi: &Psi,
    a: f64,
    x: f64,
    order: f64,
    left_exponent: f64,
    f: &dyn Fn(f64) -> Result<f64>,
    spec: &QuadratureSpec,
) -> Result<QuadEval> {
    spec.validate()?;
    if !(order > 0.0) || !order.is_finite() {
        return Err(Error::invalid(format!(
            "integral order must be positive, got {order}"
        )));
    }
    if x < a {
        return Err(Error::domain(format!(
            "evaluation point {x} lies left of the base point {a}"
        )));
    }
    if x == a {
        return Ok(QuadEval {
            value: 0.0,
            error_estimate: 0.0,
            nodes_used: 0,
            converged: true,
        });
    }
    psi.check_increasing(a, x)?;
    let psi_a = psi.eval(a)?;
    let delta = psi.eval(x)? - psi_a;
    if !(delta > 0.0) {
        return Err(Error::NotMonotone { x });
    }
    let prefactor = rgamma(order) * delta.powf(order + left_exponent);
    let sample = |rule: &JacobiRule| -> Result<f64> {
        let acc = rule.apply(|s| {
            let t = psi.invert(psi_a + s * delta, a, x)?;
            f(t)
        })?;
        Ok(prefactor * acc)
    };
    let mut nodes = spec.base_nodes;
    let mut value = sample(&*jacobi_rule(nodes, order - 1.0, left_exponent)?)?;
    let mut error_estimate = f64::INFINITY;
    for _ in 0..spec.max_refinements {
        nodes *= 2;
        let next = sample(&*jacobi_rule(nodes, order - 1.0, left_exponent)?)?;
        error_estimate = (next - value).abs();
        value = next;
        if error_estimate <= spec.tolerance * value.abs().max(1.0) {
            return Ok(QuadEval {
                value,
                error_estimate,
                nodes_used: nodes,
                converged: true,
            });
        }
    }
    Ok(QuadEval {
        value,
        error_estimate,
        nodes_used: nodes,
        converged: false,
    })
}

/// Fractional integral without a declared endpoint factor.
pub fn frac_integral_quad(
    psi: &Psi,
    a: f64,
    x: f64,
    order: f64,
    f: &dyn Fn(f64) -> Result<f64>,
    spec: &QuadratureSpec,
) -> Result<QuadEval> {
    weighted_frac_integral_quad(psi, a, x, order, 0.0, f, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use proptest::prelude::*;

    #[test]
    fn rule_mass_matches_beta() {
        let cases = [
            (-0.7, 0.0),
            (-0.5, 0.25),
            (-0.9, -0.75),
            (0.0, 0.0),
            (2.3, 0.7),
            (-0.25, -0.55),
            (-0.85, 1.6),
        ];
        for (a, b) in cases {
            for n in [1usize, 2, 5, 16, 64, 256] {
                let rule = jacobi_rule(n, a, b).unwrap();
                let mass: f64 = rule.weights.iter().sum();
                let want = beta_mass(a + 1.0, b + 1.0);
                assert!(
                    ((mass - want) / want).abs() < 1e-11,
                    "A={a} B={b} n={n}: {mass} vs {want}"
                );
            }
        }
    }

    #[test]
    fn single_node_rule_closed_form() {
        for (a, b) in [(-0.7, 0.0), (-0.4, 0.6), (1.2, -0.3)] {
            let rule = jacobi_rule(1, a, b).unwrap();
            let want = (b + 1.0) / (a + b + 2.0);
            assert!((rule.nodes[0] - want).abs() < 1e-14);
            let mass = beta_mass(a + 1.0, b + 1.0);
            assert!((rule.weights[0] - mass).abs() < 1e-14 * mass);
        }
    }

    #[test]
    fn rule_is_exact_on_polynomials() {
        // n nodes integrate s^p exactly for p <= 2n - 1
        for (a, b) in [(-0.55, 0.0), (-0.5, -0.4)] {
            let n = 6;
            let rule = jacobi_rule(n, a, b).unwrap();
            for p in 0..=(2 * n - 1) {
                let got = rule.apply(|s| Ok(s.powi(p as i32))).unwrap();
                let want = beta_mass(a + 1.0, b + p as f64 + 1.0);
                assert!(
                    ((got - want) / want).abs() < 1e-12,
                    "A={a} B={b} p={p}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn rule_matches_reference_integrals() {
        // ∫ (1-s)^(-1/2) e^s ds over [0,1]
        let rule = jacobi_rule(24, -0.5, 0.0).unwrap();
        let got = rule.apply(|s| Ok(s.exp())).unwrap();
        assert!((got - 4.060_156_938_557_409_951_1) / got < 1e-13);
        // ∫ (1-s)^(-0.7) s^(-0.4) sin(s) ds over [0,1]
        let rule = jacobi_rule(24, -0.7, -0.4).unwrap();
        let got = rule.apply(|s| Ok(s.sin())).unwrap();
        assert!(((got - 2.444_384_153_304_225_738_2) / got).abs() < 1e-13);
    }

    #[test]
    fn nodes_are_interior_and_sorted() {
        let rule = jacobi_rule(128, -0.97, -0.9).unwrap();
        for pair in rule.nodes.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert!(rule.nodes[0] > 0.0 && *rule.nodes.last().unwrap() < 1.0);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn cache_shares_rules() {
        let r1 = jacobi_rule(17, -0.3, 0.4).unwrap();
        let r2 = jacobi_rule(17, -0.3, 0.4).unwrap();
        assert!(Arc::ptr_eq(&r1, &r2));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(jacobi_rule(0, 0.0, 0.0).is_err());
        assert!(jacobi_rule(4, -1.0, 0.0).is_err());
        assert!(jacobi_rule(4, 0.0, -1.5).is_err());
        assert!(jacobi_rule(4, f64::NAN, 0.0).is_err());
        let psi = Psi::identity();
        let one = |_: f64| Ok(1.0);
        let spec = QuadratureSpec::default();
        assert!(frac_integral_quad(&psi, 0.0, 1.0, 0.0, &one, &spec).is_err());
        assert!(frac_integral_quad(&psi, 1.0, 0.5, 0.7, &one, &spec).is_err());
        let bad = QuadratureSpec {
            base_nodes: 0,
            ..QuadratureSpec::default()
        };
        assert!(frac_integral_quad(&psi, 0.0, 1.0, 0.7, &one, &bad).is_err());
    }

    #[test]
    fn empty_interval_integrates_to_zero() {
        let spec = QuadratureSpec::default();
        let got = frac_integral_quad(&Psi::log(), 2.0, 2.0, 0.4, &|_| Ok(3.0), &spec).unwrap();
        assert_eq!(got.value, 0.0);
        assert!(got.converged);
    }

    #[test]
    fn integral_of_scale_powers_has_closed_form() {
        // I^α (Ψ(t)-Ψ(a))^δ = Γ(δ+1)/Γ(δ+1+α) (Ψ(x)-Ψ(a))^(δ+α)
        let spec = QuadratureSpec::default();
        let cases: [(Psi, f64, f64); 3] = [
            (Psi::identity(), 0.0, 1.3),
            (Psi::log(), 1.0, 2.0),
            (Psi::power(2.0).unwrap(), 0.8, 1.2),
        ];
        for (psi, a, x) in cases {
            let delta = psi.eval(x).unwrap() - psi.eval(a).unwrap();
            for (alpha, d) in [(0.6, 0.0), (0.3, 2.0), (1.4, 1.0)] {
                let psi2 = psi.clone();
                let pa = psi.eval(a).unwrap();
                let f = move |t: f64| Ok((psi2.eval(t)? - pa).powf(d));
                let got = frac_integral_quad(&psi, a, x, alpha, &f, &spec).unwrap();
                let want = gamma(d + 1.0).unwrap() * rgamma(d + 1.0 + alpha)
                    * delta.powf(d + alpha);
                assert!(got.converged);
                assert!(
                    ((got.value - want) / want).abs() < 1e-11,
                    "psi={psi} alpha={alpha} delta-power={d}: {} vs {want}",
                    got.value
                );
            }
        }
    }

    #[test]
    fn declared_endpoint_factor_matches_plain_integration() {
        let spec = QuadratureSpec::default();
        let psi = Psi::log();
        let (a, x, alpha) = (1.0, 2.5, 0.45);
        let pa = psi.eval(a).unwrap();
        let plain_f = {
            let psi = psi.clone();
            move |t: f64| Ok((psi.eval(t)? - pa) * t.exp())
        };
        let plain = frac_integral_quad(&psi, a, x, alpha, &plain_f, &spec).unwrap();
        let weighted =
            weighted_frac_integral_quad(&psi, a, x, alpha, 1.0, &|t| Ok(t.exp()), &spec)
                .unwrap();
        assert!(plain.converged && weighted.converged);
        assert!(
            ((plain.value - weighted.value) / plain.value).abs() < 1e-11,
            "{} vs {}",
            plain.value,
            weighted.value
        );
    }

    #[test]
    fn refinement_reports_failure_honestly() {
        let spec = QuadratureSpec {
            base_nodes: 2,
            tolerance: 1e-15,
            max_refinements: 1,
        };
        let got = frac_integral_quad(
            &Psi::identity(),
            0.0,
            1.0,
            0.5,
            &|t| Ok((12.0 * t).exp()),
            &spec,
        )
        .unwrap();
        assert!(!got.converged);
        assert!(got.error_estimate > 0.0);
        assert_eq!(got.nodes_used, 4);
    }

    #[test]
    fn non_monotone_scale_is_rejected() {
        let psi = Psi::custom(parse("sin(x)").unwrap()).unwrap();
        let spec = QuadratureSpec::default();
        let got = frac_integral_quad(&psi, 0.0, 3.0, 0.5, &|_| Ok(1.0), &spec);
        assert!(matches!(got, Err(Error::NotMonotone { .. })));
    }

    proptest! {
        #[test]
        fn weighted_constant_integral_matches_beta_identity(
            order in 0.1..2.5f64,
            eta in -0.9..2.0f64,
        ) {
            // I^order [(Ψ-Ψa)^eta] = Γ(eta+1)/Γ(eta+1+order) Δ^(eta+order)
            let spec = QuadratureSpec::default();
            let psi = Psi::identity();
            let got = weighted_frac_integral_quad(
                &psi, 0.0, 1.7, order, eta, &|_| Ok(1.0), &spec,
            ).unwrap();
            let want = gamma(eta + 1.0).unwrap() * rgamma(eta + 1.0 + order)
                * 1.7f64.powf(eta + order);
            prop_assert!(got.converged);
            prop_assert!(((got.value - want) / want).abs() < 1e-9,
                "order={} eta={}: {} vs {}", order, eta, got.value, want);
        }
    }
}
