//! Gauss-Legendre rules.

use std::sync::OnceLock;

use crate::real::Real;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The shared 32-point rule.
    pub fn g32() -> &'static Self {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| Self::new(32))
    }

    /// The shared 64-point rule.
    pub fn g64() -> &'static Self {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| Self::new(64))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn on<T: Real>(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * T::lit(x), half * T::lit(w)))
    }

    pub fn integrate<T: Real, F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let mut s = T::zero();
        for (x, w) in self.on(a, b) {
            s += w * f(x);
        }
        s
    }

    /// Composite rule over unit-length subintervals of `[a, b]`.
    pub fn integrate_unit_panels<T: Real, F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        if b <= a {
            return -self.integrate_unit_panels(b, a, f);
        }
        let mut s = T::zero();
        let mut lo = a;
        while lo < b {
            let hi = (lo.floor() + T::one()).min(b);
            let hi = if hi <= lo { (lo + T::one()).min(b) } else { hi };
            s += self.integrate(lo, hi, &mut f);
            lo = hi;
        }
        s
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}
