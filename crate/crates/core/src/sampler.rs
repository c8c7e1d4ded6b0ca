//! Draws from the law `P_{x,y}(n) = n^{-alpha} / zeta(alpha, y)` on
//! y-friable integers.
//!
//! The law is multiplicative, so the exponents `v_p` are independent with
//! `P(v_p = k) = (1 - p^{-alpha}) p^{-k alpha}`. Each exponent is drawn by
//! inversion from one uniform. Draw `i` reads ChaCha20 stream `i` under the
//! given seed, so a sample depends only on `(seed, draw index, prime index)`
//! and never on how draws are scheduled across threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::saddle::SaddlePoint;

/// One draw: exponents aligned with the prime table, and `log n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FriableSample {
    pub exponents: Vec<u32>,
    pub log_n: f64,
}

impl FriableSample {
    pub fn exponent(&self, table: &PrimeTable, p: u64) -> Option<u32> {
        table.primes().binary_search(&p).ok().map(|i| self.exponents[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub n_draws: u64,
    pub mean_log_n: f64,
    pub var_log_n: f64,
    pub frac_le_z: f64,
    /// Half-width of the 95% normal-approximation interval for `frac_le_z`.
    pub ci_halfwidth: f64,
}

fn draw_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `(0, 1]` with 53 random bits.
#[inline]
fn uniform_open0(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `floor(log U / (-alpha log p))`, a geometric variate with ratio `p^{-alpha}`.
#[inline]
fn geometric(rng: &mut ChaCha20Rng, rate: f64) -> u32 {
    let k = (uniform_open0(rng).ln() / -rate).floor();
    if k >= u32::MAX as f64 {
        u32::MAX
    } else {
        k as u32
    }
}

fn draw(sp: &SaddlePoint<f64>, table: &PrimeTable, seed: u64, index: u64) -> FriableSample {
    let mut rng = draw_rng(seed, index);
    let mut exponents = Vec::with_capacity(table.len());
    let mut log_n = 0.0;
    for &lp in table.logs() {
        let k = geometric(&mut rng, sp.alpha * lp);
        log_n += k as f64 * lp;
        exponents.push(k);
    }
    FriableSample { exponents, log_n }
}

/// `log n` of draw `index`, without keeping the exponents.
fn draw_log(sp: &SaddlePoint<f64>, table: &PrimeTable, seed: u64, index: u64) -> f64 {
    let mut rng = draw_rng(seed, index);
    let mut log_n = 0.0;
    for &lp in table.logs() {
        log_n += geometric(&mut rng, sp.alpha * lp) as f64 * lp;
    }
    log_n
}

fn check_table(sp: &SaddlePoint<f64>, table: &PrimeTable) -> Result<()> {
    if table.bound() != sp.y {
        return Err(Error::domain(format!(
            "prime table bound {} does not match saddle point y={}",
            table.bound(),
            sp.y
        )));
    }
    Ok(())
}

/// The first draw for `seed`.
pub fn sample_friable(sp: &SaddlePoint<f64>, table: &PrimeTable, seed: u64) -> Result<FriableSample> {
    check_table(sp, table)?;
    Ok(draw(sp, table, seed, 0))
}

/// Draws `0..n` for `seed`, in draw order.
pub fn sample_many(sp: &SaddlePoint<f64>, table: &PrimeTable, n: u64, seed: u64) -> Result<Vec<FriableSample>> {
    check_table(sp, table)?;
    Ok((0..n).into_par_iter().map(|i| draw(sp, table, seed, i)).collect())
}

/// Monte Carlo estimate of `P(x, y, z)` and of the first two moments of `log n`.
///
/// `n <= z` is decided as `log n <= log z (1 + 1e-12)`, which absorbs rounding
/// in the sum of logarithms when `n = z`.
pub fn estimate_p(sp: &SaddlePoint<f64>, table: &PrimeTable, log_z: f64, n_draws: u64, seed: u64) -> Result<SampleStats> {
    check_table(sp, table)?;
    if n_draws < 100 {
        return Err(Error::domain(format!("need at least 100 draws, got {n_draws}")));
    }
    let logs: Vec<f64> = (0..n_draws).into_par_iter().map(|i| draw_log(sp, table, seed, i)).collect();
    let cut = log_z + 1e-12 * log_z.abs();
    let n = n_draws as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (n - 1.0);
    let hits = logs.iter().filter(|&&l| l <= cut).count();
    let frac = hits as f64 / n;
    Ok(SampleStats {
        n_draws,
        mean_log_n: mean,
        var_log_n: var,
        frac_le_z: frac,
        ci_halfwidth: 1.96 * (frac * (1.0 - frac) / n).sqrt(),
    })
}

/// Observed exponent counts of one prime against its geometric law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentHistogram {
    pub p: u64,
    pub ratio: f64,
    /// `counts[k]` draws with `v_p = k`.
    pub counts: Vec<u64>,
    pub mean: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Histogram of `v_p` over draws `0..n_draws`, with a chi-square test
/// against `P(v_p = k) = (1 - r) r^k`, `r = p^{-alpha}`. Cells are merged from
/// the tail until each expected count is at least 5.
pub fn exponent_histogram(
    sp: &SaddlePoint<f64>,
    table: &PrimeTable,
    p: u64,
    n_draws: u64,
    seed: u64,
) -> Result<ExponentHistogram> {
    check_table(sp, table)?;
    let idx = table
        .primes()
        .binary_search(&p)
        .map_err(|_| Error::domain(format!("{p} is not a prime <= {}", table.bound())))?;
    if n_draws == 0 {
        return Err(Error::domain("need at least one draw"));
    }
    let logs = table.logs();
    let exps: Vec<u32> = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i);
            let mut k = 0;
            for &lp in &logs[..=idx] {
                k = geometric(&mut rng, sp.alpha * lp);
            }
            k
        })
        .collect();
    let kmax = exps.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; kmax + 1];
    for &k in &exps {
        counts[k as usize] += 1;
    }
    let n = n_draws as f64;
    let ratio = (-sp.alpha * logs[idx]).exp();
    let mean = exps.iter().map(|&k| k as f64).sum::<f64>() / n;

    // cells 0..m-1 exact, cell m collects k >= m
    let mut m = 0;
    while n * (1.0 - ratio) * ratio.powi(m as i32 + 1) >= 5.0 && m < kmax {
        m += 1;
    }
    let mut chi = 0.0;
    for k in 0..=m {
        let (obs, exp) = if k < m {
            (counts[k] as f64, n * (1.0 - ratio) * ratio.powi(k as i32))
        } else {
            (counts[k..].iter().sum::<u64>() as f64, n * ratio.powi(k as i32))
        };
        chi += (obs - exp) * (obs - exp) / exp;
    }
    let dof = m.max(1);
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::numerical(e.to_string()))?
        .sf(chi);
    Ok(ExponentHistogram { p, ratio, counts, mean, chi_square: chi, dof, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::{phi_y_k, solve_alpha};

    fn setup(x: f64, y: u64) -> (SaddlePoint<f64>, PrimeTable) {
        let t = PrimeTable::new(y).unwrap();
        (solve_alpha(x.ln(), &t).unwrap(), t)
    }

    #[test]
    fn single_prime_law() {
        let (sp, t) = setup(1e6, 2);
        let h = exponent_histogram(&sp, &t, 2, 50_000, 7).unwrap();
        let r = 2f64.powf(-sp.alpha);
        assert!((h.mean / (r / (1.0 - r)) - 1.0).abs() < 0.05);
        assert!(h.p_value > 0.001);
    }

    #[test]
    fn histogram_rejects_bad_primes() {
        let (sp, t) = setup(1e6, 100);
        assert!(exponent_histogram(&sp, &t, 4, 100, 1).is_err());
        assert!(exponent_histogram(&sp, &t, 101, 100, 1).is_err());
    }

    #[test]
    fn histogram_p3() {
        let (sp, t) = setup(1e6, 100);
        let h = exponent_histogram(&sp, &t, 3, 100_000, 11).unwrap();
        assert!(h.p_value > 0.001, "{h:?}");
        let r = 3f64.powf(-sp.alpha);
        assert!((h.mean - r / (1.0 - r)).abs() < 0.02);
        // counts agree with the exponents of the full draws
        let draws = sample_many(&sp, &t, 50, 11).unwrap();
        let small = exponent_histogram(&sp, &t, 3, 50, 11).unwrap();
        for (k, &c) in small.counts.iter().enumerate() {
            let n = draws.iter().filter(|s| s.exponent(&t, 3) == Some(k as u32)).count();
            assert_eq!(n as u64, c);
        }
    }

    #[test]
    fn log_n_consistent() {
        let (sp, t) = setup(1e6, 100);
        let s = sample_friable(&sp, &t, 3).unwrap();
        let want: f64 = s.exponents.iter().zip(t.logs()).map(|(&k, &l)| k as f64 * l).sum();
        assert!((s.log_n - want).abs() <= 1e-12 * want.max(1.0));
        assert_eq!(s.exponents.len(), t.len());
    }

    #[test]
    fn moments_and_reproducibility() {
        let (sp, t) = setup(1e6, 100);
        let n = 20_000u64;
        let a = estimate_p(&sp, &t, sp.log_x, n, 5).unwrap();
        let b = estimate_p(&sp, &t, sp.log_x, n, 5).unwrap();
        assert_eq!(a, b);
        assert!((a.mean_log_n - sp.log_x).abs() <= 4.0 * (sp.sigma2 / n as f64).sqrt());
        let want_var = -phi_y_k(sp.alpha, &t, 1).unwrap();
        assert!((a.var_log_n / want_var - 1.0).abs() < 0.1);
        let c = estimate_p(&sp, &t, -1.0, 100, 5).unwrap();
        assert_eq!(c.frac_le_z, 0.0);
        assert!(estimate_p(&sp, &t, 1.0, 99, 5).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let (sp, t) = setup(1e5, 30);
        let par = sample_many(&sp, &t, 200, 9).unwrap();
        for (i, s) in par.iter().enumerate() {
            assert_eq!(*s, draw(&sp, &t, 9, i as u64));
            assert_eq!(s.log_n, draw_log(&sp, &t, 9, i as u64));
        }
    }
}
