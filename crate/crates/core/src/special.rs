//! `xi`, `I`, the Laplace transform of rho at negative arguments, and the
//! normal distribution function.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::roots::newton_bracketed;

/// `xi(t)` with its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiValue<T> {
    pub t: T,
    pub xi: T,
    pub xi_prime: T,
}

/// Below this distance from `t = 1` the third-order expansion is used.
const NEAR_ONE: f64 = 1e-6;

/// The positive root of `e^xi = 1 + t xi` for `t > 1`, with `xi(1) = 0`.
pub fn xi<T: Real>(t: T) -> Result<XiValue<T>> {
    if !(t >= T::one()) {
        return Err(Error::domain(format!("xi(t) requires t >= 1, got {t}")));
    }
    let x = xi_extended(t)?;
    Ok(XiValue { t, xi: x, xi_prime: xi_prime_at(t, x) })
}

/// `xi'(t) = xi / (e^xi - t)`, with `xi'(1) = 2`.
pub fn xi_prime<T: Real>(t: T) -> Result<T> {
    Ok(xi(t)?.xi_prime)
}

/// The nonzero real root of `(e^xi - 1)/xi = t` for any `t > 0`.
///
/// Agrees with [`xi`] for `t >= 1`; for `0 < t < 1` it is the analytic
/// continuation through `t = 1`, which is negative.
pub fn xi_extended<T: Real>(t: T) -> Result<T> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::domain(format!("xi requires finite t > 0, got {t}")));
    }
    let delta = t - T::one();
    if delta.abs() < T::lit(NEAR_ONE) {
        // xi = 2d - 4d^2/3 + 10d^3/9
        let d = delta;
        return Ok(d * (T::lit(2.0) + d * (T::lit(-4.0 / 3.0) + d * T::lit(10.0 / 9.0))));
    }
    let g = |x: T| -> (T, T) {
        if x.abs() < T::lit(1e-4) {
            // (e^x - 1)/x and its derivative by series
            let v = T::one() + x * (T::lit(0.5) + x * (T::lit(1.0 / 6.0) + x * T::lit(1.0 / 24.0)));
            let d = T::lit(0.5) + x * (T::lit(1.0 / 3.0) + x * (T::lit(0.125) + x * T::lit(1.0 / 30.0)));
            (v - t, d)
        } else {
            let em1 = x.exp_m1();
            ((em1 / x) - t, (x * x.exp() - em1) / (x * x))
        }
    };
    let (lo, hi, guess) = if t > T::one() {
        let hi = T::lit(2.0) * (T::lit(2.0) * t).ln() + T::lit(2.0);
        let guess = if t > T::lit(std::f64::consts::E) {
            t.ln() + t.ln().ln()
        } else {
            T::lit(2.0) * delta
        };
        (T::zero(), hi, guess)
    } else {
        (-(T::one() / t) - T::lit(2.0), T::zero(), T::lit(2.0) * delta)
    };
    let tol = (T::epsilon() * T::lit(4.0)).max(T::lit(1e-16));
    newton_bracketed(g, lo, hi, guess, tol, 200)
}

/// `xi'(t)` given `xi(t)`.
pub fn xi_prime_at<T: Real>(t: T, x: T) -> T {
    let delta = t - T::one();
    if delta.abs() < T::lit(NEAR_ONE) {
        return T::lit(2.0) + delta * (T::lit(-8.0 / 3.0) + delta * T::lit(10.0 / 3.0));
    }
    // e^xi - t = 1 + t xi - t
    x / (x.exp_m1() - delta)
}

/// `I(s) = int_0^s (e^v - 1) dv / v = sum_{k>=1} s^k / (k k!)`.
pub fn i_fn<T: Real>(s: T) -> T {
    if s == T::zero() {
        return T::zero();
    }
    let mut term = T::one();
    let mut sum = T::zero();
    let mut k = T::zero();
    loop {
        k += T::one();
        term *= s / k;
        let add = term / k;
        sum += add;
        if (add.abs() <= T::lit(1e-17) * sum.abs() && k > s.abs()) || k > T::lit(100_000.0) {
            break;
        }
    }
    sum
}

/// `ln rho_hat(-s) = gamma + I(s)`.
pub fn ln_rho_hat_neg<T: Real>(s: T) -> Result<T> {
    if !(s >= T::zero()) {
        return Err(Error::domain(format!("rho_hat(-s) requires s >= 0, got {s}")));
    }
    Ok(T::euler_gamma() + i_fn(s))
}

/// `rho_hat(-s) = int_0^inf rho(v) e^{vs} dv = e^{gamma + I(s)}`.
pub fn rho_hat_neg<T: Real>(s: T) -> Result<T> {
    Ok(ln_rho_hat_neg(s)?.exp())
}

/// Complementary error function.
///
/// Power series for `erf` when `|x| < 1/sqrt(2)` (that is `|h| < 1` for the
/// normal CDF), Lentz-evaluated continued fraction beyond.
pub fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x < T::FRAC_1_SQRT_2() {
        return T::one() - erf_series(x);
    }
    // erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = T::lit(1e-300).max(T::min_positive_value());
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    let half = T::lit(0.5);
    let mut n = T::zero();
    for _ in 0..20_000 {
        n += T::one();
        let a = n * half;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

fn erf_series<T: Real>(x: T) -> T {
    // erf(x) = 2/sqrt(pi) sum (-1)^n x^{2n+1} / (n! (2n+1))
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = T::zero();
    loop {
        n += T::one();
        term = -term * x2 / n;
        let add = term / (T::lit(2.0) * n + T::one());
        sum += add;
        if add.abs() <= T::epsilon() * sum.abs() * T::lit(0.1) || n > T::lit(200.0) {
            break;
        }
    }
    sum * T::lit(2.0) / T::PI().sqrt()
}

/// Standard normal distribution function `Phi(h)`.
pub fn normal_cdf<T: Real>(h: T) -> T {
    if h.is_nan() {
        return h;
    }
    if h == T::infinity() {
        return T::one();
    }
    if h == T::neg_infinity() {
        return T::zero();
    }
    T::lit(0.5) * erfc(-h * T::FRAC_1_SQRT_2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    #[test]
    fn xi_at_one_and_two() {
        let v = xi(1.0f64).unwrap();
        assert_eq!(v.xi, 0.0);
        assert_eq!(v.xi_prime, 2.0);
        let bis = oracle::bisect(|x| x.exp() - 1.0 - 2.0 * x, 0.5, 3.0, 200);
        let v = xi(2.0f64).unwrap();
        assert!((v.xi - bis).abs() < 1e-14);
        assert!((v.xi - 1.2564312086261697).abs() < 1e-13);
    }

    #[test]
    fn xi_residual_and_monotone() {
        let mut prev = -1.0;
        for i in 0..400 {
            let t = 1.0 + (i as f64).powf(2.5) * 0.01;
            let x = xi(t).unwrap().xi;
            let resid = (x.exp() - 1.0 - t * x).abs();
            assert!(resid <= 1e-12 * (1.0 + t * x), "t={t} resid={resid}");
            assert!(x > prev);
            prev = x;
        }
    }

    #[test]
    fn xi_large_t_asymptotic() {
        let t = 1e6f64;
        let x = xi(t).unwrap().xi;
        let l = t.ln();
        let ll = l.ln();
        assert!((x - l - ll).abs() <= 2.0 * ll / l);
    }

    #[test]
    fn xi_near_one_is_continuous() {
        for d in [1e-9f64, 5e-7, 9.99e-7, 1.01e-6, 1e-5] {
            let t = 1.0 + d;
            let x = xi(t).unwrap().xi;
            assert!((x - 2.0 * d).abs() < 2.0 * d * d + 1e-15, "d={d}");
            let xp = xi_prime(t).unwrap();
            assert!((xp - 2.0).abs() < 4.0 * d, "d={d} xp={xp}");
        }
    }

    #[test]
    fn xi_extended_below_one() {
        for t in [0.1f64, 0.5, 0.75, 0.999] {
            let x = xi_extended(t).unwrap();
            assert!(x < 0.0);
            assert!((x.exp_m1() / x - t).abs() < 1e-14);
        }
        assert!(xi(0.5f64).is_err());
        assert!(xi_extended(0.0f64).is_err());
    }

    #[test]
    fn xi_prime_gradient_check() {
        for t in [1.01f64, 1.5, 3.0, 7.0, 20.0, 50.0, 1e4] {
            let h = 1e-5 * t;
            let fd = oracle::central_difference(|s| xi(s).unwrap().xi, t, h);
            let xp = xi_prime(t).unwrap();
            assert!((fd / xp - 1.0).abs() < 1e-6, "t={t}");
        }
        let tp = 1e4 * xi_prime(1e4f64).unwrap();
        assert!((1.0..=1.5).contains(&tp));
    }

    #[test]
    fn i_fn_values() {
        assert_eq!(i_fn(0.0f64), 0.0);
        assert!((i_fn(1.0f64) - 1.3179021514544038).abs() < 1e-15);
        for s in [0.5, 2.0, 5.0] {
            let q = oracle::adaptive_simpson(&|v: f64| if v == 0.0 { 1.0 } else { v.exp_m1() / v }, 0.0, s, 1e-15);
            assert!((i_fn(s) - q).abs() < 1e-12 * q.max(1.0), "s={s}");
        }
    }

    #[test]
    fn rho_hat_at_zero_and_monotone() {
        assert!((rho_hat_neg(0.0f64).unwrap() - 1.781_072_417_990_198).abs() < 1e-15);
        let mut prev = 0.0;
        // overflows f64 past s ~ 8.5; ln_rho_hat_neg covers larger s
        for i in 0..40 {
            let v = rho_hat_neg(i as f64 * 0.2).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(rho_hat_neg(-1.0f64).is_err());
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0f64), 0.5);
        let q = oracle::normal_cdf_quadrature(1.96);
        assert!((normal_cdf(1.96f64) - q).abs() < 1e-12);
        assert!((normal_cdf(1.96f64) - 0.9750021048517795).abs() < 1e-12);
        assert!(normal_cdf(-40.0f64) < 1e-300);
        for i in -80..=80 {
            let h = i as f64 * 0.1;
            let a = normal_cdf(h);
            assert!((a + normal_cdf(-h) - 1.0).abs() < 1e-12);
            assert!((a - oracle::normal_cdf_quadrature(h)).abs() < 1e-12, "h={h}");
        }
    }

    #[test]
    fn f32_instances() {
        let v = xi(2.0f32).unwrap();
        assert!((v.xi - 1.2564312).abs() < 1e-5);
        assert!((normal_cdf(1.0f32) - 0.8413447).abs() < 1e-5);
    }
}
