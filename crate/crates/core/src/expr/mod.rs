//! Small closed expression language over one variable `x`.
//!
//! The grammar covers constants, `x`, the four arithmetic operations, powers
//! with a constant real exponent, and `exp`, `ln`, `sin`, `cos`, `sqrt`.
//! Differentiation is exact and closed under the grammar. [`SmoothFn`] wraps
//! an expression with a lazily grown cache of its derivatives.

mod collect;
mod parse;

pub use parse::parse;

use crate::error::{Error, Result};
use std::fmt;
use std::sync::RwLock;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Base raised to a constant real exponent.
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sqrt(Box<Expr>),
}

pub fn constant(c: f64) -> Expr {
    Expr::Const(c)
}

pub fn var() -> Expr {
    Expr::Var
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(z), _) if *z == 0.0 => b,
        (_, Expr::Const(z)) if *z == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (_, Expr::Const(z)) if *z == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(z), _) if *z == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(z)) if *z == 0.0 => Expr::Const(0.0),
        (Expr::Const(o), _) if *o == 1.0 => b,
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(z), _) if *z == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(o)) if *o == 1.0 => a,
        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => Expr::Const(x / y),
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn pow(base: Expr, exponent: f64) -> Expr {
    if exponent == 0.0 {
        return Expr::Const(1.0);
    }
    if exponent == 1.0 {
        return base;
    }
    if let Expr::Const(c) = base {
        let v = c.powf(exponent);
        if v.is_finite() {
            return Expr::Const(v);
        }
    }
    Expr::Pow(Box::new(base), exponent)
}

pub fn exp(a: Expr) -> Expr {
    Expr::Exp(Box::new(a))
}

pub fn ln(a: Expr) -> Expr {
    Expr::Ln(Box::new(a))
}

pub fn sin(a: Expr) -> Expr {
    Expr::Sin(Box::new(a))
}

pub fn cos(a: Expr) -> Expr {
    Expr::Cos(Box::new(a))
}

pub fn sqrt(a: Expr) -> Expr {
    Expr::Sqrt(Box::new(a))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        other => mul(constant(-1.0), other),
    }
}

impl Expr {
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(Error::domain(format!("division by zero at x = {x}")));
                }
                a.eval(x)? / d
            }
            Expr::Pow(u, p) => {
                let base = u.eval(x)?;
                if base == 0.0 && *p < 0.0 {
                    return Err(Error::domain(format!("zero base with exponent {p}")));
                }
                if base < 0.0 && p.fract() != 0.0 {
                    return Err(Error::domain(format!(
                        "negative base {base} with non-integer exponent {p}"
                    )));
                }
                base.powf(*p)
            }
            Expr::Exp(u) => u.eval(x)?.exp(),
            Expr::Ln(u) => {
                let v = u.eval(x)?;
                if v <= 0.0 {
                    return Err(Error::domain(format!("ln of non-positive value {v}")));
                }
                v.ln()
            }
            Expr::Sin(u) => u.eval(x)?.sin(),
            Expr::Cos(u) => u.eval(x)?.cos(),
            Expr::Sqrt(u) => {
                let v = u.eval(x)?;
                if v < 0.0 {
                    return Err(Error::domain(format!("sqrt of negative value {v}")));
                }
                v.sqrt()
            }
        })
    }

    /// Exact derivative with respect to x.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Const(_) => constant(0.0),
            Expr::Var => constant(1.0),
            Expr::Add(a, b) => add(a.differentiate(), b.differentiate()),
            Expr::Sub(a, b) => sub(a.differentiate(), b.differentiate()),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(), (**b).clone()),
                mul((**a).clone(), b.differentiate()),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.differentiate(), (**b).clone()),
                    mul((**a).clone(), b.differentiate()),
                ),
                pow((**b).clone(), 2.0),
            ),
            Expr::Pow(u, p) => mul(
                mul(constant(*p), pow((**u).clone(), p - 1.0)),
                u.differentiate(),
            ),
            Expr::Exp(u) => mul(exp((**u).clone()), u.differentiate()),
            Expr::Ln(u) => div(u.differentiate(), (**u).clone()),
            Expr::Sin(u) => mul(cos((**u).clone()), u.differentiate()),
            Expr::Cos(u) => mul(neg(sin((**u).clone())), u.differentiate()),
            Expr::Sqrt(u) => div(
                u.differentiate(),
                mul(constant(2.0), sqrt((**u).clone())),
            ),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Replace every occurrence of the variable by `replacement`.
    pub fn substitute(&self, replacement: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => replacement.clone(),
            Expr::Add(a, b) => add(a.substitute(replacement), b.substitute(replacement)),
            Expr::Sub(a, b) => sub(a.substitute(replacement), b.substitute(replacement)),
            Expr::Mul(a, b) => mul(a.substitute(replacement), b.substitute(replacement)),
            Expr::Div(a, b) => div(a.substitute(replacement), b.substitute(replacement)),
            Expr::Pow(u, p) => pow(u.substitute(replacement), *p),
            Expr::Exp(u) => exp(u.substitute(replacement)),
            Expr::Ln(u) => ln(u.substitute(replacement)),
            Expr::Sin(u) => sin(u.substitute(replacement)),
            Expr::Cos(u) => cos(u.substitute(replacement)),
            Expr::Sqrt(u) => sqrt(u.substitute(replacement)),
        }
    }

    /// Sum-of-products normal form; merges structurally identical terms.
    pub fn normalize(&self) -> Expr {
        collect::collect(self)
    }
}

// precedence classes for printing: sums 1, products 2, powers 3, atoms 4
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Const(c) if *c < 0.0 => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 3,
        _ => 4,
    }
}

fn fmt_child(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "x"),
            Expr::Add(a, b) => {
                fmt_child(a, 1, f)?;
                write!(f, " + ")?;
                fmt_child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                fmt_child(a, 1, f)?;
                write!(f, " - ")?;
                fmt_child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                fmt_child(a, 2, f)?;
                write!(f, " * ")?;
                fmt_child(b, 3, f)
            }
            Expr::Div(a, b) => {
                fmt_child(a, 2, f)?;
                write!(f, " / ")?;
                fmt_child(b, 3, f)
            }
            Expr::Pow(u, p) => {
                fmt_child(u, 4, f)?;
                if *p < 0.0 {
                    write!(f, "^({p})")
                } else {
                    write!(f, "^{p}")
                }
            }
            Expr::Exp(u) => write!(f, "exp({u})"),
            Expr::Ln(u) => write!(f, "ln({u})"),
            Expr::Sin(u) => write!(f, "sin({u})"),
            Expr::Cos(u) => write!(f, "cos({u})"),
            Expr::Sqrt(u) => write!(f, "sqrt({u})"),
        }
    }
}

/// An expression together with a lazily grown cache of symbolic derivatives.
///
/// Immutable after construction; the cache fill is idempotent, so shared
/// references across threads observe the same entries.
pub struct SmoothFn {
    base: Expr,
    derivs: RwLock<Vec<Expr>>,
}

impl SmoothFn {
    pub fn new(base: Expr) -> Self {
        SmoothFn {
            base,
            derivs: RwLock::new(Vec::new()),
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Ok(SmoothFn::new(parse(src)?))
    }

    pub fn base(&self) -> &Expr {
        &self.base
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.base.eval(x)
    }

    /// k-fold symbolic derivative, cached. Order 0 is the base expression.
    pub fn derivative_expr(&self, k: usize) -> Expr {
        if k == 0 {
            return self.base.clone();
        }
        {
            let cache = self.derivs.read().unwrap();
            if let Some(e) = cache.get(k - 1) {
                return e.clone();
            }
        }
        let mut cache = self.derivs.write().unwrap();
        while cache.len() < k {
            let prev = match cache.last() {
                Some(e) => e.clone(),
                None => self.base.clone(),
            };
            cache.push(prev.differentiate().normalize());
        }
        cache[k - 1].clone()
    }

    pub fn eval_derivative(&self, k: usize, x: f64) -> Result<f64> {
        self.derivative_expr(k).eval(x)
    }
}

impl Clone for SmoothFn {
    fn clone(&self) -> Self {
        SmoothFn {
            base: self.base.clone(),
            derivs: RwLock::new(self.derivs.read().unwrap().clone()),
        }
    }
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothFn({})", self.base)
    }
}

impl fmt::Display for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)
    }
}
