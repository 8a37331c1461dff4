//! Prime machinery and the multiplicity potential.
//!
//! The potential of `n = p_1^a_1 ... p_r^a_r` is `2 (log2 n - (a_1 + ... + a_r))`.
//! It is additive, vanishes exactly on powers of two, and drops by at least one
//! on every subdivision step of the 2-power phase, which is what bounds the
//! number of label generations.

use crate::error::{Error, Result};

/// Constant in the prime counting bound `pi(x) < TAU * x / ln x`.
pub const TAU: f64 = 1.25506;

/// Prime decomposition of a positive integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of prime factors counted with multiplicity.
    pub fn eta(&self) -> u32 {
        self.factors.iter().map(|&(_, a)| a).sum()
    }

    pub fn phi(&self) -> f64 {
        2.0 * ((self.n as f64).log2() - f64::from(self.eta()))
    }

    pub fn p_max(&self) -> Result<u64> {
        self.factors
            .last()
            .map(|&(p, _)| p)
            .ok_or(Error::NoPrimeDivisor(self.n))
    }

    pub fn is_power_of_two(&self) -> bool {
        self.factors.iter().all(|&(p, _)| p == 2)
    }
}

/// Factorizes `n` by trial division.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Domain("cannot factorize 0".into()));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    let mut push = |p: u64, rest: &mut u64| {
        let mut a = 0;
        while *rest % p == 0 {
            *rest /= p;
            a += 1;
        }
        if a > 0 {
            factors.push((p, a));
        }
    };
    push(2, &mut rest);
    push(3, &mut rest);
    // 6k +- 1 wheel
    let mut p = 5u64;
    while p.saturating_mul(p) <= rest {
        push(p, &mut rest);
        push(p + 2, &mut rest);
        p += 6;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { n, factors })
}

pub fn eta(n: u64) -> Result<u32> {
    Ok(factorize(n)?.eta())
}

pub fn phi(n: u64) -> Result<f64> {
    Ok(factorize(n)?.phi())
}

pub fn p_max(n: u64) -> Result<u64> {
    factorize(n)?.p_max()
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut p = 5u64;
    while p * p <= n {
        if n % p == 0 || n % (p + 2) == 0 {
            return false;
        }
        p += 6;
    }
    true
}

/// Sieve of Eratosthenes: `flags[k]` is true iff `k` is prime, for `k < limit`.
pub fn sieve(limit: usize) -> Vec<bool> {
    let mut flags = vec![true; limit.max(2)];
    flags[0] = false;
    flags[1] = false;
    let mut i = 2;
    while i * i < flags.len() {
        if flags[i] {
            for k in (i * i..flags.len()).step_by(i) {
                flags[k] = false;
            }
        }
        i += 1;
    }
    flags.truncate(limit);
    flags
}

/// Number of primes strictly below `x`.
pub fn prime_pi(x: f64) -> usize {
    if x <= 2.0 {
        return 0;
    }
    let limit = x.ceil() as usize;
    sieve(limit).into_iter().filter(|&b| b).count()
}

/// `TAU * x / ln x`, an upper bound for `prime_pi(x)` on `x > 1`.
pub fn rosser_bound(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::Domain(format!("prime counting bound needs x > 1, got {x}")));
    }
    Ok(TAU * x / x.ln())
}

/// Output of [`odd_adjust`]: `2^s * t = k * p + m` with `k = 2^(s-1) - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OddAdjust {
    pub s: u32,
    pub t: u64,
    pub k: u64,
}

/// For odd `m`, `p` with `p/2 < m < p`, writes `p - m = 2^(s-1) q` with `q`
/// odd and returns `s`, `t = (p - q)/2` and `k = 2^(s-1) - 1`.
pub fn odd_adjust(m: u64, p: u64) -> Result<OddAdjust> {
    if m % 2 == 0 || p % 2 == 0 || 2 * m <= p || m >= p {
        return Err(Error::Domain(format!(
            "odd adjustment needs odd m, p with p/2 < m < p, got m={m}, p={p}"
        )));
    }
    let diff = p - m;
    let s = diff.trailing_zeros() + 1;
    let q = diff >> (s - 1);
    Ok(OddAdjust {
        s,
        t: (p - q) / 2,
        k: (1u64 << (s - 1)) - 1,
    })
}
