//! Exact arithmetic on `S(x, y)`, the y-friable integers up to `x`.
//!
//! Everything here is an exact count or an exactly-enumerated sum; these are
//! the reference values the asymptotic layer is checked against.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::real::NeumaierSum;

/// Default cap on enumerated terms / recursion nodes.
pub const DEFAULT_TERM_BUDGET: u64 = 100_000_000;

/// Largest `x` for which tables of `Psi(t, y)`, `t <= x`, are materialized.
pub const PREFIX_TABLE_LIMIT: u64 = 50_000_000;

/// Work limit shared by the exact routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub terms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { terms: DEFAULT_TERM_BUDGET }
    }
}

impl Budget {
    pub fn new(terms: u64) -> Self {
        Self { terms }
    }
}

struct Meter<'a> {
    what: &'a str,
    budget: u64,
    used: u64,
}

impl<'a> Meter<'a> {
    fn new(what: &'a str, budget: Budget) -> Self {
        Self { what, budget: budget.terms, used: 0 }
    }

    #[inline]
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.budget {
            Err(Error::Resource {
                what: self.what.to_string(),
                budget: self.budget,
                progress: self.used - 1,
            })
        } else {
            Ok(())
        }
    }
}

/// One element of `S(x, y)` with its factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriableInteger {
    pub n: u64,
    /// `(p, v_p(n))` for each prime dividing `n`, largest prime first.
    pub factors: Vec<(u64, u32)>,
}

impl FriableInteger {
    /// Number of divisors.
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }
}

#[derive(Debug, Clone, Copy)]
struct Level {
    prefix: u64,
    idx: usize,
    pow: u64,
    exp: u32,
}

/// Depth-first stream over `S(x, y)`: primes descending, exponents ascending.
///
/// `1` is always emitted first. The stream is deterministic and emits each
/// element exactly once.
pub struct FriableEnumeration<'a> {
    table: &'a PrimeTable,
    x: u64,
    stack: Vec<Level>,
    started: bool,
    done: bool,
    meter: Meter<'static>,
}

impl<'a> FriableEnumeration<'a> {
    pub fn new(x: u64, table: &'a PrimeTable, budget: Budget) -> Result<Self> {
        if x == 0 {
            return Err(Error::domain("enumeration bound must be >= 1"));
        }
        Ok(Self {
            table,
            x,
            stack: Vec::new(),
            started: false,
            done: false,
            meter: Meter::new("friable enumeration", budget),
        })
    }

    fn current(&self) -> FriableInteger {
        let primes = self.table.primes();
        match self.stack.last() {
            None => FriableInteger { n: 1, factors: Vec::new() },
            Some(top) => FriableInteger {
                n: top.prefix * top.pow,
                factors: self.stack.iter().map(|l| (primes[l.idx], l.exp)).collect(),
            },
        }
    }

    /// Moves to the successor of the current element; false when exhausted.
    fn advance(&mut self) -> bool {
        let primes = self.table.primes();
        let (n, bound) = match self.stack.last() {
            None => (1, self.table.len()),
            Some(top) => (top.prefix * top.pow, top.idx),
        };
        // first child: largest prime below the current one with n*p <= x
        let limit = self.x / n;
        let k = primes[..bound].partition_point(|&p| p <= limit);
        if k > 0 {
            let p = primes[k - 1];
            self.stack.push(Level { prefix: n, idx: k - 1, pow: p, exp: 1 });
            return true;
        }
        while let Some(top) = self.stack.last_mut() {
            let p = primes[top.idx];
            if top.prefix * top.pow <= self.x / p {
                top.pow *= p;
                top.exp += 1;
                return true;
            }
            if top.idx > 0 {
                top.idx -= 1;
                top.pow = primes[top.idx];
                top.exp = 1;
                return true;
            }
            self.stack.pop();
        }
        false
    }
}

impl Iterator for FriableEnumeration<'_> {
    type Item = Result<FriableInteger>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        if let Err(e) = self.meter.tick() {
            self.done = true;
            return Some(Err(e));
        }
        Some(Ok(self.current()))
    }
}

/// Streams `S(x, y)` for the primes of `table`.
pub fn enumerate_friable(x: u64, table: &PrimeTable, budget: Budget) -> Result<FriableEnumeration<'_>> {
    FriableEnumeration::new(x, table, budget)
}

/// Visits every `n` of `S(x, y)` together with `tau(n)`, in enumeration order.
pub fn for_each_friable<F: FnMut(u64, u64)>(
    x: u64,
    table: &PrimeTable,
    budget: Budget,
    mut f: F,
) -> Result<u64> {
    fn rec<F: FnMut(u64, u64)>(
        n: u64,
        tau: u64,
        bound: usize,
        x: u64,
        primes: &[u64],
        meter: &mut Meter<'_>,
        f: &mut F,
    ) -> Result<()> {
        meter.tick()?;
        f(n, tau);
        let limit = x / n;
        let k = primes[..bound].partition_point(|&p| p <= limit);
        for i in (0..k).rev() {
            let p = primes[i];
            let mut m = n * p;
            let mut e = 1;
            loop {
                rec(m, tau * (e + 1), i, x, primes, meter, f)?;
                if m > x / p {
                    break;
                }
                m *= p;
                e += 1;
            }
        }
        Ok(())
    }
    if x == 0 {
        return Ok(0);
    }
    let mut meter = Meter::new("friable enumeration", budget);
    rec(1, 1, table.len(), x, table.primes(), &mut meter, &mut f)?;
    Ok(meter.used)
}

/// Exact `Psi(x, y)` where `y` is the bound of `table`.
///
/// Unrolled Buchstab recurrence `Psi(x, p_k) = 1 + sum_{j<=k} Psi(x/p_j, p_j)`
/// with the closed form `Psi(N, p_j) = N` once `N < p_{j+1}`, memoized for
/// small arguments.
pub fn psi_exact(x: u64, table: &PrimeTable, budget: Budget) -> Result<u64> {
    let mut ctx = PsiCtx {
        primes: table.primes(),
        bound: table.bound(),
        memo: HashMap::new(),
        meter: Meter::new("psi recursion", budget),
    };
    ctx.psi(x, table.len())
}

const MEMO_X: u64 = 1 << 22;

struct PsiCtx<'a> {
    primes: &'a [u64],
    bound: u64,
    memo: HashMap<(u64, u32), u64>,
    meter: Meter<'static>,
}

impl PsiCtx<'_> {
    /// Psi(x, primes[..k]).
    fn psi(&mut self, x: u64, k: usize) -> Result<u64> {
        if x == 0 {
            return Ok(0);
        }
        let k = k.min(self.primes.partition_point(|&p| p <= x));
        if k == 0 {
            return Ok(1);
        }
        if k == self.primes.len() {
            if x <= self.bound {
                return Ok(x);
            }
        } else if x < self.primes[k] {
            return Ok(x);
        }
        if k == 1 {
            return Ok(64 - x.leading_zeros() as u64);
        }
        let key = (x, k as u32);
        if x <= MEMO_X {
            if let Some(&v) = self.memo.get(&key) {
                return Ok(v);
            }
        }
        self.meter.tick()?;
        let mut total = 1u64;
        for j in 0..k {
            let q = x / self.primes[j];
            // once q < p_{j+1} every integer up to q is p_j-friable
            let small = j + 1 < self.primes.len() && q < self.primes[j + 1];
            total += if small { q } else { self.psi(q, j + 1)? };
        }
        if x <= MEMO_X {
            self.memo.insert(key, total);
        }
        Ok(total)
    }
}

/// `Psi(t, y)` for every `0 <= t <= x_max`, from one enumeration of `S(x_max, y)`.
pub fn psi_prefix(x_max: u64, table: &PrimeTable, budget: Budget) -> Result<Vec<u32>> {
    if x_max > PREFIX_TABLE_LIMIT {
        return Err(Error::Resource {
            what: format!("prefix table up to {x_max}"),
            budget: PREFIX_TABLE_LIMIT,
            progress: 0,
        });
    }
    let mut counts = vec![0u32; x_max as usize + 1];
    if x_max >= 1 {
        for_each_friable(x_max, table, budget, |n, _| counts[n as usize] = 1)?;
    }
    let mut acc = 0u32;
    for c in counts.iter_mut() {
        acc += *c;
        *c = acc;
    }
    Ok(counts)
}

/// `Psi_tau(x, y) = sum_{n in S(x,y)} tau(n)`, by direct enumeration.
pub fn psi_tau_exact(x: u64, table: &PrimeTable, budget: Budget) -> Result<u64> {
    let mut total = 0u64;
    for_each_friable(x, table, budget, |_, tau| total += tau)?;
    Ok(total)
}

/// `Psi_tau(x, y)` through the divisor form `sum_{d in S(x,y)} Psi(x/d, y)`.
pub fn psi_tau_hyperbola(x: u64, table: &PrimeTable, budget: Budget) -> Result<u64> {
    if x == 0 {
        return Ok(0);
    }
    let prefix = psi_prefix(x, table, budget)?;
    let mut total = 0u64;
    for_each_friable(x, table, budget, |d, _| total += prefix[(x / d) as usize] as u64)?;
    Ok(total)
}

/// Number of base primes tabulated by the hybrid power sum.
const BASE_PRIMES: usize = 9;

/// `sum_{n in S(z, y)} n^{-alpha}` for `alpha >= 0` (alpha = 0 counts).
///
/// Integers are split as `n = b*m` with `b` composed of the first few primes
/// and `m` of the remaining ones; the `b` part is a sorted table with
/// compensated prefix sums so only the `m` part is enumerated.
pub(crate) fn friable_power_sum(z: u64, table: &PrimeTable, alpha: f64, budget: Budget) -> Result<f64> {
    if z == 0 {
        return Ok(0.0);
    }
    let primes = table.primes();
    let logs = table.logs();
    let nb = BASE_PRIMES.min(primes.len());
    let mut meter = Meter::new("friable power sum", budget);

    // base table: every integer <= z built from primes[..nb]
    let mut base: Vec<u64> = vec![1];
    for &p in &primes[..nb] {
        let len = base.len();
        for i in 0..len {
            let mut m = base[i];
            while m <= z / p {
                m *= p;
                meter.tick()?;
                base.push(m);
            }
        }
    }
    base.sort_unstable();
    let mut prefix = Vec::with_capacity(base.len());
    let mut acc = NeumaierSum::new();
    for &b in &base {
        acc.add(power_neg(b, alpha));
        prefix.push(acc.value());
    }
    let base_sum = |n: u64| -> f64 {
        let k = base.partition_point(|&b| b <= n);
        if k == 0 {
            0.0
        } else {
            prefix[k - 1]
        }
    };

    let large = &primes[nb..];
    let large_logs = &logs[nb..];
    let mut total = NeumaierSum::new();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        m: u64,
        log_m: f64,
        bound: usize,
        z: u64,
        alpha: f64,
        large: &[u64],
        large_logs: &[f64],
        base_sum: &dyn Fn(u64) -> f64,
        total: &mut NeumaierSum<f64>,
        meter: &mut Meter<'_>,
    ) -> Result<()> {
        meter.tick()?;
        total.add((-alpha * log_m).exp() * base_sum(z / m));
        let limit = z / m;
        let k = large[..bound].partition_point(|&p| p <= limit);
        for i in (0..k).rev() {
            let p = large[i];
            let mut mm = m * p;
            let mut lm = log_m + large_logs[i];
            loop {
                rec(mm, lm, i, z, alpha, large, large_logs, base_sum, total, meter)?;
                if mm > z / p {
                    break;
                }
                mm *= p;
                lm += large_logs[i];
            }
        }
        Ok(())
    }
    rec(1, 0.0, large.len(), z, alpha, large, large_logs, &base_sum, &mut total, &mut meter)?;
    Ok(total.value())
}

#[inline]
fn power_neg(n: u64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else {
        (-alpha * (n as f64).ln()).exp()
    }
}

/// `D(x, y, z) = sum_{n in S(z, y)} n^{-alpha}` with `alpha = alpha(x, y)`.
///
/// For `y < 3` the geometric closed form is used, so `z` may be arbitrarily
/// large; see [`d_two_log`] for `z` given through its logarithm.
pub fn d_exact(z: u64, table: &PrimeTable, alpha: f64, budget: Budget) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("exponent alpha={alpha} must be > 0")));
    }
    if z == 0 {
        return Err(Error::domain("truncation point z must be >= 1"));
    }
    if table.len() == 1 {
        return Ok(d_two_log((z as f64).ln(), alpha));
    }
    friable_power_sum(z, table, alpha, budget)
}

/// `sum_{k : 2^k <= z} 2^{-k alpha}` with `z` given as `log z`.
///
/// A relative slack of 1e-12 absorbs rounding in `log z / log 2` when `z` is an
/// exact power of two.
pub fn d_two_log(log_z: f64, alpha: f64) -> f64 {
    if log_z < 0.0 {
        return 0.0;
    }
    let kmax = (log_z / std::f64::consts::LN_2 * (1.0 + 1e-12)).floor();
    let r = alpha * std::f64::consts::LN_2;
    // (1 - 2^{-(K+1) alpha}) / (1 - 2^{-alpha})
    -(-(kmax + 1.0) * r).exp_m1() / -(-r).exp_m1()
}
