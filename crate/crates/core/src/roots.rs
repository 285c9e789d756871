//! Safeguarded Newton iteration for increasing scalar functions.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("bisection budget exhausted with residual {residual}")]
    NoConvergence { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds the root of a continuous nondecreasing `f` on `[lo, hi]`.
///
/// `f` returns the value and derivative. Newton steps are taken from `start`
/// while they stay strictly inside the current bracket and at least halve the
/// residual; otherwise the bracket is bisected. Terminates when
/// `|f(x)| ≤ tol` or when the bracket has shrunk to adjacent floats.
pub fn solve_increasing<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    tol: f64,
    max_bisections: usize,
) -> Result<Root, RootError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    if f_lo.abs() <= tol {
        return Ok(Root { x: lo, residual: f_lo.abs(), iterations: 0 });
    }
    let (f_hi, _) = f(hi);
    if f_hi.abs() <= tol {
        return Ok(Root { x: hi, residual: f_hi.abs(), iterations: 0 });
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(RootError::NotBracketed { lo, hi, f_lo, f_hi });
    }

    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    let mut best = (x, f64::INFINITY);
    let mut bisections = 0;
    let mut last_residual = f64::INFINITY;
    let mut last_was_newton = false;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (fx, dfx) = f(x);
        let residual = fx.abs();
        if residual < best.1 {
            best = (x, residual);
        }
        if residual <= tol {
            return Ok(Root { x, residual, iterations });
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket is down to neighbouring floats.
            return Ok(Root { x: best.0, residual: best.1, iterations });
        }
        let newton = x - fx / dfx;
        let newton_ok = dfx > 0.0
            && newton.is_finite()
            && newton > lo
            && newton < hi
            && (!last_was_newton || residual <= 0.5 * last_residual);
        last_residual = residual;
        last_was_newton = newton_ok;
        x = if newton_ok {
            newton
        } else {
            bisections += 1;
            if bisections > max_bisections {
                return Err(RootError::NoConvergence { residual: best.1 });
            }
            mid
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root_at_one_half() {
        // r + 4 r³ = 1 has the root r = 1/2.
        let root = solve_increasing(
            |r| (r + 4.0 * r * r * r - 1.0, 1.0 + 12.0 * r * r),
            0.0,
            1.0,
            1.0,
            1e-15,
            200,
        )
        .unwrap();
        assert!((root.x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bisection_alone_reaches_root_when_derivative_is_useless() {
        let root = solve_increasing(|x| (x - 0.3, 0.0), 0.0, 1.0, 0.9, 1e-14, 200).unwrap();
        assert!((root.x - 0.3).abs() < 1e-14);
    }

    #[test]
    fn reports_missing_bracket() {
        let err = solve_increasing(|x| (x + 1.0, 1.0), 0.0, 1.0, 0.5, 1e-12, 50).unwrap_err();
        assert!(matches!(err, RootError::NotBracketed { .. }));
    }

    #[test]
    fn endpoint_root() {
        let root = solve_increasing(|x| (x, 1.0), 0.0, 2.0, 1.0, 1e-12, 50).unwrap();
        assert_eq!(root.x, 0.0);
    }

    #[test]
    fn steep_power_map() {
        // r + c r^7 = t with large c.
        let (c, t) = (8.0e3, 100.0_f64);
        let root = solve_increasing(
            |r| (r + c * r.powi(7) - t, 1.0 + 7.0 * c * r.powi(6)),
            0.0,
            t,
            t,
            1e-14 * (1.0 + t),
            200,
        )
        .unwrap();
        let r = root.x;
        assert!((r + c * r.powi(7) - t).abs() <= 1e-12 * (1.0 + t));
    }
}
