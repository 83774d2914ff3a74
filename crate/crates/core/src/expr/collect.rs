//! Sum-of-products normalization.
//!
//! Flattens an expression into terms `coeff * Π base_i^exp_i` with the factor
//! bases held in a canonical structural order, merges identical factor
//! products, and rebuilds. Repeated differentiation stays compact because the
//! textbook product rule's exponential blowup collapses term by term.
//!
//! Exponents distribute over a product only when that is an identity: integer
//! exponents always, fractional ones only onto a bare single factor. Anything
//! else is kept whole as an opaque factor.

use super::{Expr, add, mul, pow};
use std::cmp::Ordering;

// beyond this many terms the subexpression is kept opaque instead of expanded
const TERM_CAP: usize = 2000;

#[derive(Clone, Debug)]
struct Term {
    coeff: f64,
    factors: Vec<(Expr, f64)>,
}

impl Term {
    fn constant(c: f64) -> Term {
        Term {
            coeff: c,
            factors: Vec::new(),
        }
    }

    fn single(base: Expr, exponent: f64) -> Term {
        Term {
            coeff: 1.0,
            factors: vec![(base, exponent)],
        }
    }
}

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) => 0,
        Expr::Var => 1,
        Expr::Add(..) => 2,
        Expr::Sub(..) => 3,
        Expr::Mul(..) => 4,
        Expr::Div(..) => 5,
        Expr::Pow(..) => 6,
        Expr::Exp(_) => 7,
        Expr::Ln(_) => 8,
        Expr::Sin(_) => 9,
        Expr::Cos(_) => 10,
        Expr::Sqrt(_) => 11,
    }
}

// total structural order, used both for factor sorting and term keys
pub(super) fn cmp_expr(a: &Expr, b: &Expr) -> Ordering {
    let r = rank(a).cmp(&rank(b));
    if r != Ordering::Equal {
        return r;
    }
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x.total_cmp(y),
        (Expr::Var, Expr::Var) => Ordering::Equal,
        (Expr::Add(a1, a2), Expr::Add(b1, b2))
        | (Expr::Sub(a1, a2), Expr::Sub(b1, b2))
        | (Expr::Mul(a1, a2), Expr::Mul(b1, b2))
        | (Expr::Div(a1, a2), Expr::Div(b1, b2)) => {
            cmp_expr(a1, b1).then_with(|| cmp_expr(a2, b2))
        }
        (Expr::Pow(u, p), Expr::Pow(v, q)) => cmp_expr(u, v).then_with(|| p.total_cmp(q)),
        (Expr::Exp(u), Expr::Exp(v))
        | (Expr::Ln(u), Expr::Ln(v))
        | (Expr::Sin(u), Expr::Sin(v))
        | (Expr::Cos(u), Expr::Cos(v))
        | (Expr::Sqrt(u), Expr::Sqrt(v)) => cmp_expr(u, v),
        _ => unreachable!("rank matched distinct variants"),
    }
}

fn cmp_factors(a: &[(Expr, f64)], b: &[(Expr, f64)]) -> Ordering {
    for ((ea, pa), (eb, pb)) in a.iter().zip(b.iter()) {
        let c = cmp_expr(ea, eb).then_with(|| pa.total_cmp(pb));
        if c != Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

// merge two sorted factor lists, summing exponents of equal bases
fn mul_factors(a: &[(Expr, f64)], b: &[(Expr, f64)]) -> Vec<(Expr, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match cmp_expr(&a[i].0, &b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                let p = a[i].1 + b[j].1;
                if p != 0.0 {
                    out.push((a[i].0.clone(), p));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().cloned());
    out
}

fn mul_terms(a: &Term, b: &Term) -> Term {
    Term {
        coeff: a.coeff * b.coeff,
        factors: mul_factors(&a.factors, &b.factors),
    }
}

fn product(a: &[Term], b: &[Term]) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for ta in a {
        for tb in b {
            out.push(mul_terms(ta, tb));
        }
    }
    merge(out)
}

fn negate(mut ts: Vec<Term>) -> Vec<Term> {
    for t in &mut ts {
        t.coeff = -t.coeff;
    }
    ts
}

fn merge(mut ts: Vec<Term>) -> Vec<Term> {
    ts.sort_by(|a, b| cmp_factors(&a.factors, &b.factors));
    let mut out: Vec<Term> = Vec::with_capacity(ts.len());
    for t in ts {
        match out.last_mut() {
            Some(prev) if cmp_factors(&prev.factors, &t.factors) == Ordering::Equal => {
                prev.coeff += t.coeff;
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

fn opaque(e: &Expr) -> Vec<Term> {
    vec![Term::single(e.clone(), 1.0)]
}

fn terms_pow(u: &Expr, p: f64, original: &Expr) -> Vec<Term> {
    if p == 0.0 {
        return vec![Term::constant(1.0)];
    }
    let tu = terms(u);
    if p == 1.0 {
        return tu;
    }
    if tu.len() == 1 {
        let t = &tu[0];
        if t.factors.is_empty() {
            let v = t.coeff.powf(p);
            if v.is_finite() {
                return vec![Term::constant(v)];
            }
            return opaque(original);
        }
        if p.fract() == 0.0 {
            let c = t.coeff.powi(p as i32);
            if c.is_finite() {
                let factors = t
                    .factors
                    .iter()
                    .map(|(b, q)| (b.clone(), q * p))
                    .filter(|(_, q)| *q != 0.0)
                    .collect();
                return vec![Term {
                    coeff: c,
                    factors,
                }];
            }
        } else if t.coeff == 1.0 && t.factors.len() == 1 {
            // (b^q)^p with fractional p only when q = 1, so no sign is lost
            let (b, q) = &t.factors[0];
            if *q == 1.0 {
                return vec![Term::single(b.clone(), p)];
            }
        }
        return vec![Term::single(rebuild(&tu).0, p)];
    }
    // multi-term base: expand small integer powers, keep the rest whole
    if p.fract() == 0.0 && (2.0..=4.0).contains(&p) {
        let n = p as usize;
        if tu.len().pow(n as u32) <= TERM_CAP {
            let mut acc = tu.clone();
            for _ in 1..n {
                acc = product(&acc, &tu);
            }
            return acc;
        }
    }
    vec![Term::single(rebuild(&tu).0, p)]
}

fn terms(e: &Expr) -> Vec<Term> {
    match e {
        Expr::Const(c) => {
            if *c == 0.0 {
                Vec::new()
            } else {
                vec![Term::constant(*c)]
            }
        }
        Expr::Var => vec![Term::single(Expr::Var, 1.0)],
        Expr::Add(a, b) => {
            let mut ts = terms(a);
            ts.extend(terms(b));
            merge(ts)
        }
        Expr::Sub(a, b) => {
            let mut ts = terms(a);
            ts.extend(negate(terms(b)));
            merge(ts)
        }
        Expr::Mul(a, b) => {
            let ta = terms(a);
            let tb = terms(b);
            if ta.len().saturating_mul(tb.len()) > TERM_CAP {
                return opaque(e);
            }
            product(&ta, &tb)
        }
        Expr::Div(a, b) => {
            let ta = terms(a);
            let tb = terms(b);
            if ta.is_empty() {
                return Vec::new();
            }
            let inv = match tb.len() {
                1 if tb[0].coeff != 0.0 => {
                    let t = &tb[0];
                    Term {
                        coeff: 1.0 / t.coeff,
                        factors: t
                            .factors
                            .iter()
                            .map(|(b, q)| (b.clone(), -q))
                            .collect(),
                    }
                }
                _ => Term::single(rebuild(&tb).0, -1.0),
            };
            product(&ta, std::slice::from_ref(&inv))
        }
        Expr::Pow(u, p) => terms_pow(u, *p, e),
        Expr::Sqrt(u) => terms_pow(u, 0.5, e),
        Expr::Exp(u) => vec![Term::single(Expr::Exp(Box::new(collect(u))), 1.0)],
        Expr::Ln(u) => vec![Term::single(Expr::Ln(Box::new(collect(u))), 1.0)],
        Expr::Sin(u) => vec![Term::single(Expr::Sin(Box::new(collect(u))), 1.0)],
        Expr::Cos(u) => vec![Term::single(Expr::Cos(Box::new(collect(u))), 1.0)],
    }
}

// rebuild a merged term list; bool reports whether the result is a plain sum
fn rebuild(ts: &[Term]) -> (Expr, bool) {
    if ts.is_empty() {
        return (Expr::Const(0.0), false);
    }
    let mut parts = ts.iter().map(rebuild_term);
    let first = parts.next().unwrap();
    let e = parts.fold(first, add);
    (e, ts.len() > 1)
}

fn rebuild_term(t: &Term) -> Expr {
    if t.factors.is_empty() {
        return Expr::Const(t.coeff);
    }
    let mut it = t.factors.iter().map(|(b, p)| pow(b.clone(), *p));
    let first = it.next().unwrap();
    let prod = it.fold(first, mul);
    if t.coeff == 1.0 {
        prod
    } else {
        mul(Expr::Const(t.coeff), prod)
    }
}

pub(super) fn collect(e: &Expr) -> Expr {
    rebuild(&merge(terms(e))).0
}
