//! Safeguarded Newton iteration on a bracketing interval.

use crate::error::{Error, Result};
use crate::real::Real;

/// Finds a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` have opposite
/// signs. `f` returns the value and derivative. Newton steps that leave the
/// current bracket, or fail to halve it, are replaced by bisection.
pub fn newton_bracketed<T, F>(mut f: F, lo: T, hi: T, guess: T, rel_tol: T, max_iter: usize) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> (T, T),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::numerical(format!(
            "root not bracketed: f({lo:e})={flo:e}, f({hi:e})={fhi:e}"
        )));
    }
    // orient so that f(neg) < 0 < f(pos)
    let (mut neg, mut pos) = if flo < T::zero() { (lo, hi) } else { (hi, lo) };
    let two = T::lit(2.0);
    let mut x = if guess > lo.min(hi) && guess < lo.max(hi) {
        guess
    } else {
        (lo + hi) / two
    };
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..max_iter {
        if fx == T::zero() {
            return Ok(x);
        }
        if fx < T::zero() {
            neg = x;
        } else {
            pos = x;
        }
        let newton = x - fx / dfx;
        let inside = dfx != T::zero()
            && newton.is_finite()
            && (newton - neg) * (newton - pos) < T::zero();
        if inside && (two * fx).abs() <= (dx_old * dfx).abs() {
            dx_old = dx;
            dx = newton - x;
            x = newton;
        } else {
            dx_old = dx;
            let mid = (neg + pos) / two;
            dx = mid - x;
            x = mid;
        }
        let scale = x.abs().max(T::min_positive_value());
        if dx.abs() <= rel_tol * scale || (neg - pos).abs() <= rel_tol * scale {
            return Ok(x);
        }
        let (a, b) = f(x);
        fx = a;
        dfx = b;
    }
    Err(Error::numerical(format!(
        "no convergence after {max_iter} iterations (last x={x:e}, f={fx:e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = newton_bracketed(|x: f64| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_derivative_falls_back_to_bisection() {
        // derivative deliberately wrong
        let r = newton_bracketed(|x: f64| (x.powi(3) - 0.5, 1e-9), -3.0, 4.0, 0.0, 1e-14, 400).unwrap();
        assert!((r - 0.5f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn unbracketed() {
        assert!(newton_bracketed(|x: f64| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 0.0, 1e-12, 50).is_err());
    }

    #[test]
    fn works_in_f32() {
        let r = newton_bracketed(|x: f32| (x.exp() - 3.0, x.exp()), 0.0f32, 3.0, 1.0, 1e-6, 60).unwrap();
        assert!((r - 3f32.ln()).abs() < 1e-5);
    }
}
