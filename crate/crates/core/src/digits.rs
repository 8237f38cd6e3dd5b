//! phi-adic digit expansions and Lucas-type digit congruences.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::exact::{binomial, ensure_prime, modulo};
use crate::error::Result;

/// Digits of `n = a0 + sum_{i>=1} a_i phi(p^i)` with `a0 in [0, p-2]` and
/// `a_i in [0, p-1]`.
///
/// `higher` is little-endian (`a_1` first) with trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhiDigits {
    pub p: u64,
    pub a0: u64,
    pub higher: Vec<u64>,
}

impl PhiDigits {
    /// Digit `a_i` for any `i >= 0` (zero beyond the support).
    pub fn digit(&self, i: usize) -> u64 {
        if i == 0 {
            self.a0
        } else {
            self.higher.get(i - 1).copied().unwrap_or(0)
        }
    }

    /// Reconstructs `a0 + sum a_i phi(p^i)`.
    pub fn value(&self) -> u128 {
        let p = self.p as u128;
        let mut phi = p - 1;
        let mut acc = self.a0 as u128;
        for &a in &self.higher {
            acc += a as u128 * phi;
            phi *= p;
        }
        acc
    }

    /// Number of digit positions in use, counting `a0`.
    pub fn len(&self) -> usize {
        self.higher.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        self.a0 == 0 && self.higher.is_empty()
    }
}

pub fn phi_expand(n: u64, p: u64) -> Result<PhiDigits> {
    ensure_prime(p)?;
    let a0 = n % (p - 1);
    let mut rest = (n - a0) / (p - 1);
    let mut higher = Vec::new();
    while rest > 0 {
        higher.push(rest % p);
        rest /= p;
    }
    Ok(PhiDigits { p, a0, higher })
}

/// `binom(n, p^j) mod p`, which is the j-th base-p digit of n.
pub fn binom_digit_mod_p(n: u64, j: u32, p: u64) -> Result<u64> {
    ensure_prime(p)?;
    let Some(pj) = p.checked_pow(j) else {
        return Ok(0);
    };
    let b = binomial(n, pj);
    Ok(modulo(&b, &BigInt::from(p)).to_u64().expect("residue fits"))
}

/// Checks `binom(pn'+n0, pm'+m0) = binom(n0, m0) binom(n', m') mod p` for
/// the canonical digit split of `n` and `m`.
pub fn lucas_check(n: u64, m: u64, p: u64) -> Result<bool> {
    ensure_prime(p)?;
    let pb = BigInt::from(p);
    let lhs = modulo(&binomial(n, m), &pb);
    let rhs = modulo(&(binomial(n % p, m % p) * binomial(n / p, m / p)), &pb);
    Ok(lhs == rhs)
}
