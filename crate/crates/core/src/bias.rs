//! The bias `P(x, y, z)` of the saddle-point law, and the defect
//! `Delta(x, y)` of the division model `Psi(x/d, y) ~ Psi(x, y) / d^alpha`.
//!
//! Exact values come from enumeration; the asymptotic forms come from the
//! saddle and Dickman layers. Reports always say which of the two is present.

use serde::Serialize;

use crate::dickman::{integral_xi, xi_prime_extended, DickmanGrid};
use crate::error::{Error, Result};
use crate::friable::{d_exact, d_two_log, for_each_friable, psi_exact, psi_prefix, psi_tau_exact, Budget, PREFIX_TABLE_LIMIT};
use crate::primes::PrimeTable;
use crate::quad::GaussLegendre;
use crate::real::NeumaierSum;
use crate::saddle::{psi_saddle, solve_alpha, SaddlePoint};
use crate::special::{normal_cdf, xi, xi_extended};

/// Default `epsilon` of the domain `H_eps`.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// A positive integer argument given either exactly or by its natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Magnitude {
    Int(u64),
    Log(f64),
}

impl Magnitude {
    pub fn ln(&self) -> f64 {
        match *self {
            Magnitude::Int(n) => (n as f64).ln(),
            Magnitude::Log(l) => l,
        }
    }

    /// `floor` of the value, when it fits in a `u64`.
    pub fn floor(&self) -> Option<u64> {
        match *self {
            Magnitude::Int(n) => Some(n),
            Magnitude::Log(l) if l < 43.0 => Some(l.exp().floor() as u64),
            Magnitude::Log(_) => None,
        }
    }
}

/// Settings shared by the bias and defect computations.
#[derive(Debug, Clone, Copy)]
pub struct BiasConfig {
    pub epsilon: f64,
    pub budget: Budget,
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, budget: Budget::default() }
    }
}

/// `x >= 3` and `exp((log log x)^{5/3 + eps}) <= y <= x`.
pub fn in_h_eps(log_x: f64, y: u64, eps: f64) -> bool {
    if log_x < 3f64.ln() {
        return false;
    }
    let ly = (y as f64).ln();
    let lower = log_x.ln().powf(5.0 / 3.0 + eps);
    lower <= ly && ly <= log_x
}

/// Exact `P(x, y, z) = D(x, y, z) / zeta(alpha, y)`.
///
/// For `y = 2` the geometric closed form is used and `z` may be given by its
/// logarithm; otherwise `S(z, y)` is enumerated.
pub fn p_exact(sp: &SaddlePoint<f64>, z: Magnitude, table: &PrimeTable, budget: Budget) -> Result<f64> {
    let d = if table.len() == 1 {
        d_two_log(z.ln(), sp.alpha)
    } else {
        let zi = z.floor().ok_or_else(|| Error::Resource {
            what: format!("enumeration of S(z, y) with log z={}", z.ln()),
            budget: budget.terms,
            progress: 0,
        })?;
        if zi == 0 {
            return Ok(0.0);
        }
        d_exact(zi, table, sp.alpha, budget)?
    };
    Ok(d * (-sp.log_zeta).exp())
}

/// `h` defined by `z = x y^{Theta h}`.
pub fn h_of(sp: &SaddlePoint<f64>, log_z: f64) -> f64 {
    (log_z - sp.log_x) / (sp.theta * sp.log_y())
}

/// `log z` for a given `h`.
pub fn log_z_of(sp: &SaddlePoint<f64>, h: f64) -> f64 {
    sp.log_x + sp.theta * h * sp.log_y()
}

/// Gaussian approximation `Phi(h)`.
pub fn p_gaussian(sp: &SaddlePoint<f64>, log_z: f64) -> f64 {
    normal_cdf(h_of(sp, log_z))
}

/// Dickman-side approximation `kappa(u, w)`, `w = log z / log y`; only
/// offered inside `H_eps`.
pub fn p_kappa(sp: &SaddlePoint<f64>, log_z: f64, grid: &DickmanGrid<f64>, eps: f64) -> Result<f64> {
    if !in_h_eps(sp.log_x, sp.y, eps) {
        return Err(Error::domain(format!(
            "(log x={}, y={}) lies outside H_eps with eps={eps}",
            sp.log_x, sp.y
        )));
    }
    let w = log_z / sp.log_y();
    if w < 0.0 {
        return Ok(0.0);
    }
    grid.kappa(sp.u.max(1.0), w)
}

#[derive(Debug, Clone, Serialize)]
pub struct BiasReport {
    pub log_x: f64,
    pub y: u64,
    pub log_z: f64,
    pub u: f64,
    pub ubar: f64,
    pub w: f64,
    pub alpha: f64,
    pub theta: f64,
    pub h: f64,
    pub p_exact: Option<f64>,
    pub p_gaussian: f64,
    pub p_kappa: Option<f64>,
    pub gaussian_minus_exact: Option<f64>,
    pub kappa_minus_exact: Option<f64>,
}

/// Everything known about `P(x, y, z)` at one point. Exact and `kappa`
/// values are dropped (left `None`) when over budget or out of domain.
pub fn bias_report(
    log_x: f64,
    z: Magnitude,
    table: &PrimeTable,
    grid: &DickmanGrid<f64>,
    cfg: BiasConfig,
) -> Result<BiasReport> {
    let sp = solve_alpha(log_x, table)?;
    let log_z = z.ln();
    let p_exact = optional(p_exact(&sp, z, table, cfg.budget))?;
    let p_kappa = optional(p_kappa(&sp, log_z, grid, cfg.epsilon))?;
    let p_gaussian = p_gaussian(&sp, log_z);
    Ok(BiasReport {
        log_x,
        y: sp.y,
        log_z,
        u: sp.u,
        ubar: sp.ubar,
        w: log_z / sp.log_y(),
        alpha: sp.alpha,
        theta: sp.theta,
        h: h_of(&sp, log_z),
        p_exact,
        p_gaussian,
        p_kappa,
        gaussian_minus_exact: p_exact.map(|p| p_gaussian - p),
        kappa_minus_exact: p_exact.zip(p_kappa).map(|(p, k)| k - p),
    })
}

/// Turns resource and domain errors into `None`, keeping numerical failures.
fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Resource { .. }) | Err(Error::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `R_d(x, y) = Psi(x, y) / d^alpha - Psi(x/d, y)`.
pub fn r_d(x: u64, d: u64, table: &PrimeTable, budget: Budget) -> Result<f64> {
    if d == 0 || d > x {
        return Err(Error::domain(format!("divisor d={d} must lie in [1, x={x}]")));
    }
    if !table.is_friable(d) {
        return Err(Error::domain(format!("d={d} is not {}-friable", table.bound())));
    }
    let sp = solve_alpha((x as f64).ln(), table)?;
    let psi = psi_exact(x, table, budget)? as f64;
    let psi_d = psi_exact(x / d, table, budget)? as f64;
    Ok(psi * (-sp.alpha * (d as f64).ln()).exp() - psi_d)
}

/// Exact ingredients of `Delta(x, y)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaExact {
    pub psi: u64,
    pub psi_tau: u64,
    pub d: f64,
    pub delta: f64,
    /// `sum_d R_d` accumulated term by term.
    pub sum_r: f64,
    /// `|sum_d R_d - Psi D (1 - Delta)| / |Psi D (1 - Delta)|`.
    pub identity_residual: f64,
}

/// `Delta = Psi_tau / (Psi D(x, y, x))`, with the defining identity
/// `sum_d R_d = Psi D (1 - Delta)` re-evaluated independently.
pub fn delta_exact(x: u64, table: &PrimeTable, budget: Budget) -> Result<DeltaExact> {
    if x < 1 {
        return Err(Error::domain("x must be >= 1"));
    }
    if x > PREFIX_TABLE_LIMIT {
        return Err(Error::Resource {
            what: format!("exact Delta at x={x}"),
            budget: PREFIX_TABLE_LIMIT,
            progress: 0,
        });
    }
    let sp = solve_alpha((x as f64).ln(), table)?;
    let psi = psi_exact(x, table, budget)?;
    let psi_tau = psi_tau_exact(x, table, budget)?;
    let d = d_exact(x, table, sp.alpha, budget)?;
    let delta = psi_tau as f64 / (psi as f64 * d);

    let prefix = psi_prefix(x, table, budget)?;
    let mut sum = NeumaierSum::new();
    let psi_f = psi as f64;
    for_each_friable(x, table, budget, |n, _| {
        sum.add(psi_f * (-sp.alpha * (n as f64).ln()).exp());
        sum.add(-(prefix[(x / n) as usize] as f64));
    })?;
    let sum_r = sum.value();
    let model = psi_f * d * (1.0 - delta);
    Ok(DeltaExact {
        psi,
        psi_tau,
        d,
        delta,
        sum_r,
        identity_residual: ((sum_r - model) / model).abs(),
    })
}

/// `g(v) = v log 4 - (1 + 2v) log((1 + 2v) / (1 + v))`.
pub fn g_fn(v: f64) -> f64 {
    v * 4f64.ln() - (1.0 + 2.0 * v) * (v / (1.0 + v)).ln_1p()
}

/// The decay rates `theta`, `theta_1`, `theta_2`, `theta_0 = theta_2 - u theta_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaFamily {
    pub g: f64,
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta0: f64,
    pub in_h_eps: bool,
    /// `y > log x (log log 2x)^3`, the branch condition of `theta_2`.
    pub large_y: bool,
}

/// `int_a^b xi(t) dt`, extending `xi` below 1 by the negative root of
/// `e^xi = 1 + t xi`.
fn int_xi(a: f64, b: f64) -> Result<f64> {
    integral_xi(a, b)
}

/// `int_a^b t xi'(t) dt`.
fn int_t_xi_prime(a: f64, b: f64) -> Result<f64> {
    let mut err = None;
    let v = GaussLegendre::g64().integrate_unit_panels(a, b, |t: f64| match xi_prime_extended(t) {
        Ok(d) => t * d,
        Err(e) => {
            err = Some(e);
            0.0
        }
    });
    err.map_or(Ok(v), Err)
}

pub fn theta_family(log_x: f64, y: u64, eps: f64) -> Result<ThetaFamily> {
    let ly = (y as f64).ln();
    if !(log_x >= ly) || y < 2 {
        return Err(Error::domain(format!("theta family needs x >= y >= 2 (log x={log_x}, y={y})")));
    }
    let u = log_x / ly;
    let yf = y as f64;
    let v = yf / log_x;
    let g = g_fn(v);
    let h = in_h_eps(log_x, y, eps);
    let xi_u = xi(u)?.xi;
    let theta = if h {
        2.0 * (0.5 * u * xi_u - int_xi(u / 2.0, u)?)
    } else {
        u * g
    };
    let theta1 = if h {
        xi_u - xi_extended(u / 2.0)?
    } else {
        (yf / (yf + log_x)).ln_1p()
    };
    let large_y = yf > log_x * (std::f64::consts::LN_2 + log_x).ln().powi(3);
    let theta2 = if large_y {
        2.0 * int_t_xi_prime(u / 2.0, u)?
    } else {
        2.0 * yf / ly * (log_x / (2.0 * yf + log_x)).ln_1p()
    };
    Ok(ThetaFamily { g, theta, theta1, theta2, theta0: theta2 - u * theta1, in_h_eps: h, large_y })
}

/// Central estimate `e^{-theta}` and the log-scale half-width `eps_y ubar`.
pub fn delta_theta(log_x: f64, y: u64, eps: f64) -> Result<(f64, f64)> {
    let fam = theta_family(log_x, y, eps)?;
    let ly = (y as f64).ln();
    let ubar = (y as f64).min(log_x) / ly;
    Ok(((-fam.theta).exp(), ubar / ly.sqrt()))
}

/// `nu(u)`, offered inside `H_eps` only.
pub fn delta_nu(log_x: f64, y: u64, grid: &DickmanGrid<f64>, eps: f64) -> Result<f64> {
    if !in_h_eps(log_x, y, eps) {
        return Err(Error::domain(format!(
            "(log x={log_x}, y={y}) lies outside H_eps with eps={eps}"
        )));
    }
    grid.nu(log_x / (y as f64).ln())
}

/// `(beta, s_2, Z)` with `beta = alpha(sqrt x, y)`, `s_2 = |phi_y'(beta)|`
/// and `Z = log(zeta(alpha, y) / zeta(beta, y))`.
pub fn z_ratio(sp: &SaddlePoint<f64>, table: &PrimeTable) -> Result<(SaddlePoint<f64>, f64)> {
    let half = solve_alpha(sp.log_x / 2.0, table)?;
    Ok((half, sp.log_zeta - half.log_zeta))
}

/// `Delta` from the saddle-point estimate of `Psi_tau`:
/// `x^{beta - alpha} (zeta(beta)/zeta(alpha))^2 (alpha/beta) sqrt(2 sigma_2 / s_2)`,
/// which is what the saddle-point forms of `Psi(x)`, `Psi(sqrt x)` and
/// `D(x, y, x) ~ zeta(alpha, y) / 2` give.
pub fn delta_drappeau(sp: &SaddlePoint<f64>, half: &SaddlePoint<f64>) -> f64 {
    let z = sp.log_zeta - half.log_zeta;
    let ln = (half.alpha - sp.alpha) * sp.log_x - 2.0 * z + (sp.alpha / half.alpha).ln()
        + 0.5 * (2.0 * sp.sigma2 / half.sigma2).ln();
    ln.exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub log_x: f64,
    pub y: u64,
    pub u: f64,
    pub ubar: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s2: f64,
    pub z_ratio: f64,
    pub eps_y: f64,
    pub in_h_eps: bool,
    pub theta: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub delta_theta: f64,
    pub nu_u: Option<f64>,
    pub delta_drappeau: f64,
    pub psi_saddle_ln: f64,
    /// No exact value was computed (budget or size); every `*_exact` field is empty.
    pub no_oracle: bool,
    pub delta_exact: Option<f64>,
    pub identity_residual: Option<f64>,
    pub log_ratio_theta: Option<f64>,
    pub ratio_nu: Option<f64>,
}

pub fn delta_report(x: Magnitude, table: &PrimeTable, grid: &DickmanGrid<f64>, cfg: BiasConfig) -> Result<DeltaReport> {
    let log_x = x.ln();
    let y = table.bound();
    let sp = solve_alpha(log_x, table)?;
    let (half, z) = z_ratio(&sp, table)?;
    let fam = theta_family(log_x, y, cfg.epsilon)?;
    let nu_u = if sp.u >= 1.0 && sp.u <= grid.t_max() { Some(grid.nu(sp.u)?) } else { None };
    let exact = match x {
        Magnitude::Int(n) => optional(delta_exact(n, table, cfg.budget))?,
        Magnitude::Log(_) => None,
    };
    let delta = exact.map(|e| e.delta);
    Ok(DeltaReport {
        log_x,
        y,
        u: sp.u,
        ubar: sp.ubar,
        alpha: sp.alpha,
        beta: half.alpha,
        s2: half.sigma2,
        z_ratio: z,
        eps_y: 1.0 / sp.log_y().sqrt(),
        in_h_eps: fam.in_h_eps,
        theta: fam.theta,
        theta0: fam.theta0,
        theta1: fam.theta1,
        theta2: fam.theta2,
        delta_theta: (-fam.theta).exp(),
        nu_u,
        delta_drappeau: delta_drappeau(&sp, &half),
        psi_saddle_ln: psi_saddle(&sp).ln,
        no_oracle: exact.is_none(),
        delta_exact: delta,
        identity_residual: exact.map(|e| e.identity_residual),
        log_ratio_theta: delta.map(|d| d.ln() + fam.theta),
        ratio_nu: delta.zip(nu_u).map(|(d, n)| d / n),
    })
}
