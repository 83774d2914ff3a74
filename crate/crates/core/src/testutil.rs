//! Finite-difference oracle shared by the unit tests.
//!
//! Central differences with Richardson extrapolation on a ratio-1.5 step
//! ladder. The tableau's own convergence diagnostic decides whether an
//! estimate is trustworthy, so callers can skip assertions at orders where
//! f64 cancellation makes the stencil meaningless.

pub(crate) fn central_diff(f: &dyn Fn(f64) -> f64, k: u32, x: f64, h: f64) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        let w = if j % 2 == 0 { binom } else { -binom };
        sum += w * f(x + (k as f64 / 2.0 - j as f64) * h);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    sum / h.powi(k as i32)
}

pub(crate) struct FdEstimate {
    pub value: f64,
    pub error: f64,
}

/// Richardson tableau over shrinking steps; returns the entry with the
/// smallest successive-difference error estimate.
pub(crate) fn fd_derivative(f: &dyn Fn(f64) -> f64, k: u32, x: f64, h0: f64) -> FdEstimate {
    const RATIO: f64 = 1.5;
    const LEVELS: usize = 10;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut best = FdEstimate {
        value: f64::NAN,
        error: f64::INFINITY,
    };
    for i in 0..LEVELS {
        let h = h0 / RATIO.powi(i as i32);
        let mut row = vec![central_diff(f, k, x, h)];
        for j in 1..=i {
            let gain = RATIO.powi(2 * j as i32);
            let extrapolated = (row[j - 1] * gain - rows[i - 1][j - 1]) / (gain - 1.0);
            row.push(extrapolated);
        }
        if i > 0 {
            for j in 1..row.len() {
                let err = (row[j] - rows[i - 1][j - 1])
                    .abs()
                    .max((row[j] - row[j - 1]).abs());
                if err < best.error {
                    best = FdEstimate {
                        value: row[j],
                        error: err,
                    };
                }
            }
        }
        rows.push(row);
    }
    best
}

/// Assert `expected` against the finite-difference estimate when the tableau
/// certifies itself at this order; returns whether the check actually ran.
pub(crate) fn assert_fd_if_certified(
    f: &dyn Fn(f64) -> f64,
    k: u32,
    x: f64,
    h0: f64,
    expected: f64,
    label: &str,
) -> bool {
    let est = fd_derivative(f, k, x, h0);
    let scale = expected.abs().max(1.0);
    if est.error > 1e-7 * scale {
        return false;
    }
    // successive-difference estimates correlate at the noise plateau and can
    // undershoot the true error, so the floor is deliberately looser
    let tol = (30.0 * est.error).max(1e-7 * scale);
    assert!(
        (est.value - expected).abs() <= tol,
        "{label}: order {k} at x = {x}: fd {} vs symbolic {expected} (fd error estimate {:e})",
        est.value,
        est.error
    );
    true
}
