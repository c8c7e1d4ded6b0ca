//! Prime tables for sums and products over `p <= y`.

use crate::error::{Error, Result};

/// Largest sieve bound accepted by default.
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// The primes up to `bound`, ascending, with their natural logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
    logs: Vec<f64>,
}

impl PrimeTable {
    /// Sieves the primes in `[2, y]` with the default cap.
    pub fn new(y: u64) -> Result<Self> {
        sieve_primes(y, DEFAULT_SIEVE_CAP)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Largest prime `<= bound`.
    pub fn largest(&self) -> u64 {
        *self.primes.last().expect("table holds at least the prime 2")
    }

    /// Number of tabulated primes `<= x`.
    #[inline]
    pub fn count_le(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    /// Restriction of the table to the primes `<= y`.
    pub fn truncated(&self, y: u64) -> Result<Self> {
        if y < 2 {
            return Err(Error::domain(format!("prime bound y={y} must be >= 2")));
        }
        if y > self.bound {
            return Err(Error::domain(format!(
                "cannot truncate a table of bound {} to {y}",
                self.bound
            )));
        }
        let k = self.count_le(y);
        Ok(Self {
            bound: y,
            primes: self.primes[..k].to_vec(),
            logs: self.logs[..k].to_vec(),
        })
    }

    /// True when every prime factor of `n` is tabulated.
    pub fn is_friable(&self, mut n: u64) -> bool {
        if n == 0 {
            return false;
        }
        for &p in &self.primes {
            if p.saturating_mul(p) > n {
                break;
            }
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        n == 1 || n <= self.bound
    }
}

/// Sieve of Eratosthenes over the odd integers up to `y`.
pub fn sieve_primes(y: u64, cap: u64) -> Result<PrimeTable> {
    if y < 2 {
        return Err(Error::domain(format!("prime bound y={y} must be >= 2")));
    }
    if y > cap {
        return Err(Error::Resource {
            what: format!("sieve up to {y}"),
            budget: cap,
            progress: 0,
        });
    }
    // composite[i] describes the odd number 2i+1
    let half = (y as usize - 1) / 2 + 1;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= y as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_pi(y));
    primes.push(2u64);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 1),
    );
    let logs = primes.iter().map(|&p| (p as f64).ln()).collect();
    Ok(PrimeTable { bound: y, primes, logs })
}

fn estimate_pi(y: u64) -> usize {
    let yf = y as f64;
    (1.3 * yf / yf.ln().max(1.0)) as usize + 8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        assert_eq!(PrimeTable::new(2).unwrap().primes(), &[2]);
        assert_eq!(PrimeTable::new(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(PrimeTable::new(11).unwrap().primes(), &[2, 3, 5, 7, 11]);
    }

    #[test]
    fn thousand_matches_trial_division() {
        let t = PrimeTable::new(1000).unwrap();
        let oracle = crate::oracle::primes_by_trial_division(1000);
        assert_eq!(t.len(), 168);
        assert_eq!(t.primes(), &oracle[..]);
        for (p, l) in t.primes().iter().zip(t.logs()) {
            assert_eq!(*l, (*p as f64).ln());
        }
    }

    #[test]
    fn bad_bounds() {
        assert!(matches!(PrimeTable::new(1), Err(Error::Domain(_))));
        assert!(matches!(sieve_primes(1000, 100), Err(Error::Resource { .. })));
    }

    #[test]
    fn friability() {
        let t = PrimeTable::new(5).unwrap();
        assert!(t.is_friable(1));
        assert!(t.is_friable(2 * 2 * 3 * 5 * 5));
        assert!(!t.is_friable(7));
        assert!(!t.is_friable(14));
        assert!(!t.is_friable(0));
        assert_eq!(t.count_le(4), 2);
        assert_eq!(t.truncated(3).unwrap().primes(), &[2, 3]);
    }
}
