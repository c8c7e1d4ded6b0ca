//! Independent reference computations.
//!
//! Nothing here shares code paths with the production routines: the routines
//! are brute force, generic quadrature or bisection, and exist so the exact and
//! asymptotic layers can be checked against something they were not built from.

/// Primes up to `n` by trial division.
pub fn primes_by_trial_division(n: u64) -> Vec<u64> {
    (2..=n)
        .filter(|&m| (2..).take_while(|d| d * d <= m).all(|d| m % d != 0))
        .collect()
}

/// `lpf[n]` = largest prime factor of `n` (`lpf[1] = 1`, `lpf[0] = 0`).
pub fn largest_prime_factor_sieve(n: usize) -> Vec<u32> {
    let mut lpf = vec![0u32; n + 1];
    if n >= 1 {
        lpf[1] = 1;
    }
    for p in 2..=n {
        if lpf[p] == 0 {
            let mut m = p;
            while m <= n {
                lpf[m] = p as u32;
                m += p;
            }
        }
    }
    lpf
}

/// Number of divisors by trial division.
pub fn tau_naive(n: u64) -> u64 {
    let mut count = 0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    count
}

/// `sum_{n <= x} tau(n)` by the Dirichlet hyperbola method.
pub fn divisor_summatory(x: u64) -> u64 {
    let r = (x as f64).sqrt() as u64;
    let r = (r.saturating_sub(2)..=r + 2).filter(|k| k * k <= x).max().unwrap_or(0);
    let s: u64 = (1..=r).map(|k| x / k).sum();
    2 * s - r * r
}

/// Plain bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let mut flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Dickman's rho on a uniform grid of step `1/n` over `[0, t_max]`, from the
/// integral form `t rho(t) = int_{t-1}^t rho`, solved by the implicit
/// trapezoid rule and one Richardson extrapolation (`n` and `2n`).
///
/// Returns `(step, values)` for the coarse grid.
pub fn rho_integral_recurrence(t_max: f64, n: usize) -> (f64, Vec<f64>) {
    fn run(t_max: f64, n: usize, mult: f64) -> Vec<f64> {
        let h = 1.0 / n as f64;
        let total = (t_max * n as f64).round() as usize;
        let mut r = vec![1.0f64; total + 1];
        // running trapezoid integral over the last unit window
        for i in (n + 1)..=total {
            let t = i as f64 * h;
            let lo = i - n;
            let mut s = 0.5 * r[lo];
            for v in &r[lo + 1..i] {
                s += v;
            }
            // t r_i = mult * h * (s + r_i/2)
            r[i] = mult * h * s / (t - 0.5 * mult * h);
        }
        r
    }
    let coarse = run(t_max, n, 1.0);
    let fine = run(t_max, 2 * n, 1.0);
    let vals = coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (4.0 * fine[2 * i] - c) / 3.0)
        .collect();
    (1.0 / n as f64, vals)
}

/// Gauss-Legendre free check of `int_0^t rho(v) rho(t - v) dv`: composite
/// Simpson split at every kink of either factor.
pub fn convolution<F: Fn(f64) -> f64>(rho: F, t: f64) -> f64 {
    let mut cuts: Vec<f64> = vec![0.0, t];
    let mut k = 1.0;
    while k < t {
        cuts.push(k);
        cuts.push(t - k);
        k += 1.0;
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let f = |v: f64| rho(v) * rho(t - v);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-14))
        .sum()
}

/// `phi_y^{(k)}(s)` by the double series `sum_p sum_m (-m log p)^k log p p^{-ms}`,
/// truncated when a term drops below `1e-18` of the running sum.
pub fn phi_series(s: f64, primes: &[u64], k: u32) -> f64 {
    let mut total = 0.0f64;
    for &p in primes {
        let lp = (p as f64).ln();
        let mut m = 1.0f64;
        loop {
            let term = (-m * lp).powi(k as i32) * lp * (-m * s * lp).exp();
            total += term;
            if term.abs() < 1e-18 * total.abs() || m > 1e7 {
                break;
            }
            m += 1.0;
        }
    }
    total
}

/// Central difference.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Standard normal CDF by adaptive Simpson on the density.
pub fn normal_cdf_quadrature(h: f64) -> f64 {
    let dens = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if h >= 0.0 {
        0.5 + adaptive_simpson(&dens, 0.0, h, 1e-15)
    } else {
        0.5 - adaptive_simpson(&dens, h, 0.0, 1e-15)
    }
}
