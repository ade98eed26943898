//! Safeguarded Newton iteration for a scalar equation on a sign-changing
//! bracket. A Newton step is taken whenever it stays strictly inside the
//! current bracket and shrinks the previous step fast enough; otherwise the
//! bracket is bisected.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveError {
    /// f(lo) and f(hi) have the same sign.
    NoSignChange { f_lo: f64, f_hi: f64 },
    /// Iteration budget exhausted; holds the best iterate.
    MaxIter(Root),
}

/// Finds x in [lo, hi] with |f(x)| ≤ `tol`, starting from `x0`.
///
/// `f` returns the value and the derivative. `f_lo`/`f_hi` are the values
/// at the bracket ends, supplied by the caller since they are usually known.
pub fn newton_bracketed<F>(
    mut f: F,
    (mut lo, f_lo): (f64, f64),
    (mut hi, f_hi): (f64, f64),
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Root, SolveError>
where
    F: FnMut(f64) -> (f64, f64),
{
    if f_lo.abs() <= tol {
        return Ok(Root {
            x: lo,
            fx: f_lo,
            iterations: 0,
        });
    }
    if f_hi.abs() <= tol {
        return Ok(Root {
            x: hi,
            fx: f_hi,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(SolveError::NoSignChange { f_lo, f_hi });
    }
    // orient so that f(lo) < 0 < f(hi) in the bookkeeping below
    let increasing = f_lo < 0.0;

    let mut x = x0.clamp(lo.min(hi), lo.max(hi));
    let (mut fx, mut dfx) = f(x);
    let mut best = Root { x, fx, iterations: 0 };
    if fx.abs() <= tol {
        return Ok(best);
    }
    let mut dx_old = f64::INFINITY;
    let mut dx = (hi - lo).abs();

    for iter in 1..=max_iter {
        // shrink the bracket with the latest sample
        if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let inside = dfx != 0.0 && newton.is_finite() && (newton - lo) * (newton - hi) < 0.0;
        let fast = (2.0 * fx).abs() <= (dx_old * dfx).abs();
        dx_old = dx;
        if inside && fast {
            dx = newton - x;
            x = newton;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        (fx, dfx) = f(x);
        if fx.abs() < best.fx.abs() {
            best = Root {
                x,
                fx,
                iterations: iter,
            };
        }
        if fx.abs() <= tol {
            return Ok(Root {
                x,
                fx,
                iterations: iter,
            });
        }
        if lo == hi || (hi - lo).abs() <= f64::EPSILON * x.abs() {
            best.iterations = iter;
            return Err(SolveError::MaxIter(best));
        }
    }
    best.iterations = max_iter;
    Err(SolveError::MaxIter(best))
}
