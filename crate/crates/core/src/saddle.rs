//! The saddle point of `x^s zeta(s, y)`: partial Euler products, `phi_y` and
//! its derivatives, the solver for `phi_y(alpha) = log x`, and the
//! saddle-point approximation of `Psi(x, y)`.
//!
//! `x` is carried as `log x` throughout.

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::real::{NeumaierSum, Real};
use crate::roots::newton_bracketed;

/// Highest derivative of `phi_y` available.
pub const MAX_PHI_ORDER: usize = 4;

/// `log zeta(s, y)` together with `phi_y^{(k)}(s)` for `k <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaEval<T> {
    pub s: T,
    pub y: u64,
    pub log_value: T,
    /// `phi[k]` is the k-th derivative of `phi_y` at `s`.
    pub phi: Vec<T>,
}

/// Evaluates `log zeta(s, y)` and `phi_y^{(k)}(s)`, `k = 0..=order`, in one
/// pass over the primes.
///
/// With `q = p^{-s}`, `phi_y^{(k)}(s) = sum_p (-1)^k (log p)^{k+1} Li_{-k}(q)`,
/// and `Li_{-k}(q)` is a rational function of `q` with denominator
/// `(1-q)^{k+1}`. `1-q` is formed with `expm1`, so small `s log p` keeps full
/// relative accuracy.
pub fn zeta_eval<T: Real>(s: T, table: &PrimeTable, order: usize) -> Result<ZetaEval<T>> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::domain(format!("zeta(s, y) needs finite s > 0, got s={s}")));
    }
    if order > MAX_PHI_ORDER {
        return Err(Error::domain(format!("phi_y derivatives above order {MAX_PHI_ORDER} are not provided")));
    }
    let one = T::one();
    let mut log_value = NeumaierSum::new();
    let mut phi: Vec<NeumaierSum<T>> = (0..=order).map(|_| NeumaierSum::new()).collect();
    for &lp in table.logs() {
        let lp = T::lit(lp);
        let e = -(-s * lp).exp_m1(); // 1 - q
        let q = one - e;
        log_value.add(-e.ln());
        // r = q / (1 - q), and successive powers of (log p)/(1 - q)
        let r = q / e;
        phi[0].add(lp * r);
        if order == 0 {
            continue;
        }
        let w = lp / e;
        let lp_r = lp * r;
        phi[1].add(-lp_r * w);
        if order >= 2 {
            phi[2].add(lp_r * w * w * (one + q));
        }
        if order >= 3 {
            let poly = one + q * (T::lit(4.0) + q);
            phi[3].add(-lp_r * w * w * w * poly);
        }
        if order >= 4 {
            let poly = one + q * (T::lit(11.0) + q * (T::lit(11.0) + q));
            phi[4].add(lp_r * w * w * w * w * poly);
        }
    }
    Ok(ZetaEval {
        s,
        y: table.bound(),
        log_value: log_value.value(),
        phi: phi.iter().map(NeumaierSum::value).collect(),
    })
}

/// `log zeta(s, y) = sum_{p <= y} -log(1 - p^{-s})`.
pub fn log_zeta_y<T: Real>(s: T, table: &PrimeTable) -> Result<T> {
    Ok(zeta_eval(s, table, 0)?.log_value)
}

/// The k-th derivative of `phi_y(s) = sum_{p <= y} log p / (p^s - 1)`.
pub fn phi_y_k<T: Real>(s: T, table: &PrimeTable, k: usize) -> Result<T> {
    Ok(zeta_eval(s, table, k)?.phi[k])
}

/// The saddle point `alpha(x, y)` and the local data around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePoint<T> {
    pub log_x: T,
    pub y: u64,
    pub u: T,
    pub ubar: T,
    pub alpha: T,
    pub log_zeta: T,
    /// `sigma_j = (-1)^j f^{(j)}(alpha)` with `f(s) = s log x + log zeta(s, y)`.
    pub sigma2: T,
    pub sigma3: T,
    pub sigma4: T,
    pub theta: T,
    /// `sigma_1 = log x - phi_y(alpha)`, zero up to solver tolerance.
    pub sigma1: T,
}

impl<T: Real> SaddlePoint<T> {
    pub fn solve(log_x: T, table: &PrimeTable) -> Result<Self> {
        solve_alpha(log_x, table)
    }

    pub fn log_y(&self) -> T {
        T::lit(self.y as f64).ln()
    }
}

/// Accepted residual `|phi_y(alpha) - log x| / log x`.
fn residual_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::lit(1e3) * T::epsilon())
}

/// Solves `phi_y(alpha) = log x` by safeguarded Newton from the seed
/// `log(1 + y / log x) / log y`.
pub fn solve_alpha<T: Real>(log_x: T, table: &PrimeTable) -> Result<SaddlePoint<T>> {
    if !(log_x > T::zero()) || !log_x.is_finite() {
        return Err(Error::domain(format!("log x must be finite and > 0, got {log_x}")));
    }
    let y = table.bound();
    let log_y = T::lit(y as f64).ln();
    let g = |s: T| -> (T, T) {
        match zeta_eval(s, table, 1) {
            Ok(z) => (z.phi[0] - log_x, z.phi[1]),
            Err(_) => (T::nan(), T::nan()),
        }
    };
    let lo = T::lit(1e-9) / log_x;
    let mut hi = T::lit(2.0);
    while g(hi).0 > T::zero() {
        hi = hi + hi;
        if hi > T::lit(1e6) {
            return Err(Error::numerical(format!("cannot bracket alpha for log x={log_x}, y={y}")));
        }
    }
    let seed = (T::one() + T::lit(y as f64) / log_x).ln() / log_y;
    let alpha = newton_bracketed(g, lo, hi, seed, T::lit(4.0) * T::epsilon(), 400)?;
    let z = zeta_eval(alpha, table, 3)?;
    let sigma1 = log_x - z.phi[0];
    if !(sigma1.abs() <= residual_tolerance::<T>() * log_x) {
        return Err(Error::numerical(format!(
            "saddle residual {sigma1:e} exceeds tolerance at log x={log_x}, y={y}"
        )));
    }
    let sigma2 = -z.phi[1];
    let u = log_x / log_y;
    Ok(SaddlePoint {
        log_x,
        y,
        u,
        ubar: T::lit(y as f64).min(log_x) / log_y,
        alpha,
        log_zeta: z.log_value,
        sigma2,
        sigma3: z.phi[2],
        sigma4: -z.phi[3],
        theta: sigma2.sqrt() / log_y,
        sigma1,
    })
}

/// A positive quantity held by its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled<T> {
    pub ln: T,
}

impl<T: Real> LogScaled<T> {
    /// `None` when `e^ln` overflows.
    pub fn value(&self) -> Option<T> {
        let v = self.ln.exp();
        v.is_finite().then_some(v)
    }

    pub fn overflows(&self) -> bool {
        self.value().is_none()
    }
}

/// `x^alpha zeta(alpha, y) / (alpha sqrt(2 pi sigma_2))`.
pub fn psi_saddle<T: Real>(sp: &SaddlePoint<T>) -> LogScaled<T> {
    let two_pi = T::lit(2.0) * T::PI();
    LogScaled {
        ln: sp.alpha * sp.log_x + sp.log_zeta - sp.alpha.ln() - T::lit(0.5) * (two_pi * sp.sigma2).ln(),
    }
}

/// `Theta = sqrt(sigma_2) / log y`.
pub fn theta_of<T: Real>(sp: &SaddlePoint<T>) -> T {
    sp.theta
}

/// `d alpha(y^v, y) / dv = -log y / sigma_2(y^v, y)`.
pub fn alpha_v_derivative<T: Real>(v: T, table: &PrimeTable) -> Result<T> {
    if !(v >= T::one()) {
        return Err(Error::domain(format!("alpha_v derivative needs v >= 1, got {v}")));
    }
    let log_y = T::lit(table.bound() as f64).ln();
    let sp = solve_alpha(v * log_y, table)?;
    Ok(-log_y / sp.sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::friable::{psi_exact, Budget};
    use crate::oracle;
    use crate::special::xi;

    fn table(y: u64) -> PrimeTable {
        PrimeTable::new(y).unwrap()
    }

    fn alpha_two(log_x: f64) -> f64 {
        (1.0 + 2f64.ln() / log_x).ln() / 2f64.ln()
    }

    #[test]
    fn log_zeta_small_tables() {
        let t2 = table(2);
        for s in [0.1, 1.0, 3.0] {
            let want = -(1.0 - 2f64.powf(-s)).ln();
            assert!((log_zeta_y(s, &t2).unwrap() - want).abs() < 1e-15);
        }
        assert!((log_zeta_y(1.0, &table(3)).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(log_zeta_y(0.0, &t2).is_err());
        assert!(log_zeta_y(-1.0, &t2).is_err());
        let t = table(1000);
        let mut prev = f64::INFINITY;
        for i in 1..60 {
            let v = log_zeta_y(i as f64 * 0.5, &t).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn phi_matches_series() {
        assert!((phi_y_k(1.0, &table(2), 0).unwrap() - 2f64.ln()).abs() < 1e-15);
        for y in [2, 30, 1000] {
            let t = table(y);
            for s in [0.05, 0.3, 0.9, 1.7] {
                let z: ZetaEval<f64> = zeta_eval(s, &t, 4).unwrap();
                for k in 0..=4 {
                    let want = oracle::phi_series(s, t.primes(), k as u32);
                    assert!((z.phi[k] / want - 1.0).abs() < 1e-11, "y={y} s={s} k={k}");
                }
                assert!(z.phi[1] < 0.0 && z.phi[2] > 0.0 && z.phi[3] < 0.0 && z.phi[4] > 0.0);
            }
        }
    }

    #[test]
    fn phi_derivative_gradient_check() {
        let t = table(100);
        let fd = oracle::central_difference(|s| phi_y_k(s, &t, 0).unwrap(), 1.0, 1e-5);
        let d = phi_y_k(1.0, &t, 1).unwrap();
        assert!((d / fd - 1.0).abs() < 1e-6);
        for k in 1..=4 {
            let fd = oracle::central_difference(|s| phi_y_k(s, &t, k - 1).unwrap(), 0.7, 1e-5);
            assert!((phi_y_k(0.7, &t, k).unwrap() / fd - 1.0).abs() < 1e-6, "k={k}");
        }
        assert!(phi_y_k(1.0, &t, 5).is_err());
    }

    #[test]
    fn two_closed_form() {
        let t = table(2);
        for log_x in [1.0, 10.0, 100.0, 4096.0 * 2f64.ln(), 1e6] {
            let sp = solve_alpha(log_x, &t).unwrap();
            assert!((sp.alpha - alpha_two(log_x)).abs() <= 1e-10 * alpha_two(log_x).max(1.0), "log_x={log_x}");
        }
    }

    #[test]
    fn matches_bisection() {
        let t = table(100);
        let log_x = 1e6f64.ln();
        let sp = solve_alpha(log_x, &t).unwrap();
        let b = oracle::bisect(|s| oracle::phi_series(s, t.primes(), 0) - log_x, 1e-6, 2.0, 200);
        assert!((sp.alpha - b).abs() <= 1e-10);
        assert!(sp.sigma1.abs() <= 1e-10 * log_x);
        assert_eq!(sp.sigma1, log_x - phi_y_k(sp.alpha, &t, 0).unwrap());
        assert!((sp.theta * sp.theta * 100f64.ln().powi(2) / sp.sigma2 - 1.0).abs() < 1e-15);
        assert!(sp.alpha > 0.0 && sp.alpha <= 1.0 + 10.0 / log_x);
    }

    #[test]
    fn moments_match_finite_differences() {
        let points = [(1e4f64, 30u64), (1e6, 100), (1e8, 1000), (1e5, 2), (1e6, 10_000)];
        for (x, y) in points {
            let t = table(y);
            let sp = solve_alpha(x.ln(), &t).unwrap();
            let f = |s: f64| s * sp.log_x + log_zeta_y(s, &t).unwrap();
            let h = 1e-3 * sp.alpha;
            let f0 = f(sp.alpha);
            let (fm, fp) = (f(sp.alpha - h), f(sp.alpha + h));
            let (fm2, fp2) = (f(sp.alpha - 2.0 * h), f(sp.alpha + 2.0 * h));
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            let d3 = (fp2 - 2.0 * fp + 2.0 * fm - fm2) / (2.0 * h * h * h);
            assert!((d2 / sp.sigma2 - 1.0).abs() < 1e-4, "x={x} y={y}");
            assert!((-d3 / sp.sigma3 - 1.0).abs() < 1e-4, "x={x} y={y}");
            assert!(sp.sigma4 > 0.0);
        }
    }

    #[test]
    fn alpha_at_x_equals_y_tends_to_one() {
        let mut prev = f64::INFINITY;
        for y in [1_000u64, 10_000, 100_000, 1_000_000] {
            let sp = solve_alpha((y as f64).ln(), &table(y)).unwrap();
            let err = (sp.alpha - 1.0).abs();
            assert!(err * sp.log_x.powi(2) < 10.0);
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn alpha_estimate_band() {
        for y in [16u64, 100, 1000, 10_000] {
            let t = table(y);
            for log_x in [1e4f64.ln(), 1e6f64.ln(), 1e8f64.ln(), 100.0, 1000.0] {
                if log_x < (y as f64).ln() {
                    continue;
                }
                let sp = solve_alpha(log_x, &t).unwrap();
                let r = sp.alpha * (y as f64).ln() / (1.0 + y as f64 / log_x).ln();
                assert!((0.5..=2.0).contains(&r), "y={y} log_x={log_x} r={r}");
            }
        }
    }

    #[test]
    fn alpha_against_xi() {
        for (log_x, y) in [(16.0f64, 100_000u64), (16.0, 1_000_000), (20.0, 1_000_000)] {
            let sp = solve_alpha(log_x, &table(y)).unwrap();
            let ly = (y as f64).ln();
            let dev = (sp.alpha - 1.0 + xi(sp.u).unwrap().xi / ly).abs();
            assert!(dev <= 10.0 / (ly * ly), "log_x={log_x} y={y} dev={dev}");
        }
    }

    #[test]
    fn theta_bands() {
        for x in [1e4f64, 1e6, 1e8] {
            for y in [16u64, 100, 1000, 10_000, 100_000, 1_000_000] {
                if y as f64 > x {
                    continue;
                }
                let sp = solve_alpha(x.ln(), &table(y)).unwrap();
                let r = theta_of(&sp) * sp.ubar.sqrt() / sp.u;
                assert!((0.1..=10.0).contains(&r), "x={x} y={y} r={r}");
            }
        }
        // y = (log x)^{3/2}: Theta sqrt(xi'(u)) approaches 1
        let mut prev = f64::INFINITY;
        for log_x in [100.0f64, 400.0, 1600.0] {
            let y = log_x.powf(1.5).round() as u64;
            let sp = solve_alpha(log_x, &table(y)).unwrap();
            let dev = (sp.theta * xi(sp.u).unwrap().xi_prime.sqrt() - 1.0).abs();
            assert!(dev < prev, "log_x={log_x} dev={dev}");
            prev = dev;
        }
    }

    #[test]
    fn alpha_v_derivative_gradient_check() {
        let t = table(100);
        let ly = 100f64.ln();
        let d = alpha_v_derivative(3.0, &t).unwrap();
        let fd = oracle::central_difference(|v| solve_alpha(v * ly, &t).unwrap().alpha, 3.0, 1e-4);
        assert!(d < 0.0);
        assert!((d / fd - 1.0).abs() < 1e-5);
        for y in [16u64, 100, 1000] {
            let t = table(y);
            let ly = (y as f64).ln();
            for v in [1.0f64, 2.0, 5.0, 20.0, 100.0] {
                let d = alpha_v_derivative(v, &t).unwrap();
                let ubar = (y as f64).min(v * ly) / ly;
                let r = -d / (ubar / (v * v * ly));
                assert!((0.1..=10.0).contains(&r), "y={y} v={v} r={r}");
            }
        }
        assert!(alpha_v_derivative(0.5, &t).is_err());
    }

    #[test]
    fn psi_saddle_quality() {
        let t = table(100);
        let sp = solve_alpha(1e6f64.ln(), &t).unwrap();
        let exact = psi_exact(1_000_000, &t, Budget::default()).unwrap() as f64;
        let approx = psi_saddle(&sp).value().unwrap();
        let bound = 5.0 * (1.0 / sp.u + 100f64.ln() / 100.0);
        assert!((approx / exact - 1.0).abs() <= bound);
        for x in [1e4f64, 1e5, 1e6] {
            let y = x as u64;
            let sp = solve_alpha(x.ln(), &table(y)).unwrap();
            let r = psi_saddle(&sp).value().unwrap() / x;
            assert!((0.5..=2.0).contains(&r), "x={x} r={r}");
        }
        let mut prev = 0.0;
        for i in 0..40 {
            let sp = solve_alpha(10.0 + i as f64, &t).unwrap();
            let v = psi_saddle(&sp).ln;
            assert!(v > prev);
            prev = v;
        }
        let huge = solve_alpha(1e5, &table(2)).unwrap();
        assert!(psi_saddle(&huge).value().is_some());
        let huge = solve_alpha(1e5, &table(1000)).unwrap();
        assert!(psi_saddle(&huge).overflows());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_alpha(0.0, &table(10)).is_err());
        assert!(solve_alpha(f64::NAN, &table(10)).is_err());
    }

    #[test]
    fn f32_smoke() {
        let t = table(100);
        let sp: SaddlePoint<f32> = solve_alpha(1e6f32.ln(), &t).unwrap();
        let sp64: SaddlePoint<f64> = solve_alpha(1e6f64.ln(), &t).unwrap();
        assert!((sp.alpha as f64 - sp64.alpha).abs() < 1e-5);
    }
}
