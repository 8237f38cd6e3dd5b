//! Arithmetic substrate: rationals, p-adic valuations and residues, Bernoulli
//! numbers, prime sets and the Chinese remainder theorem.
//!
//! Integers and rationals are `num-bigint` / `num-rational` values; everything
//! here is exact.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced fraction with positive denominator.
pub type Rational = BigRational;

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

/// `p^e` as a big integer.
pub fn pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// Least non-negative residue of `a` modulo `m` (m > 0).
pub fn modulo(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let ext = modulo(a, m).extended_gcd(m);
    if ext.gcd.is_one() {
        Some(modulo(&ext.x, m))
    } else {
        None
    }
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// A p-adic valuation. The valuation of zero is `Infinite`, never a sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_at_least(self, r: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= r,
            Valuation::Infinite => true,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Valuation of a nonzero integer; `Infinite` for zero.
pub fn int_valuation(x: &BigInt, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            break;
        }
        y = q;
        v += 1;
    }
    Valuation::Finite(v)
}

/// nu_p(x) for a rational x.
pub fn padic_valuation(x: &Rational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let num = int_valuation(x.numer(), p).finite().unwrap_or(0);
    let den = int_valuation(x.denom(), p).finite().unwrap_or(0);
    Valuation::Finite(num - den)
}

pub fn is_p_integral(x: &Rational, p: u64) -> bool {
    padic_valuation(x, p).is_at_least(0)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn ensure_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Primes `<= n`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64))
        .collect()
}

/// The prime set `S_k = { p : p - 1 <= 2k }`.
pub fn primes_s(k: u64) -> Vec<u64> {
    primes_up_to(2 * k + 1)
}

static BERNOULLI: LazyLock<RwLock<Vec<Rational>>> = LazyLock::new(|| RwLock::new(Vec::new()));

/// The Bernoulli number `B_k` (with `B_1 = +1/2`; only even indices are used downstream).
///
/// Computed by the Akiyama-Tanigawa transform, which yields `B_0..B_k` in one
/// pass; the table is cached and extended on demand.
pub fn bernoulli(k: usize) -> Rational {
    if let Some(b) = BERNOULLI.read().expect("bernoulli cache poisoned").get(k) {
        return b.clone();
    }
    let table = akiyama_tanigawa(k.max(64));
    let mut cache = BERNOULLI.write().expect("bernoulli cache poisoned");
    if cache.len() < table.len() {
        *cache = table;
    }
    cache[k].clone()
}

fn akiyama_tanigawa(n: usize) -> Vec<Rational> {
    let mut row: Vec<Rational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        row.push(rat(1, m as i64 + 1));
        for j in (1..=m).rev() {
            let diff = &row[j - 1] - &row[j];
            row[j - 1] = diff * rat_int(BigInt::from(j));
        }
        out.push(row[0].clone());
    }
    out
}

/// Whether `B_n + sum_{(p-1) | n} 1/p` is an integer (von Staudt-Clausen).
pub fn von_staudt_check(n: u64) -> Result<bool> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "von Staudt-Clausen needs an even n >= 2, got {n}"
        )));
    }
    let mut acc = bernoulli(n as usize);
    for p in primes_up_to(n + 1) {
        if n % (p - 1) == 0 {
            acc += rat(1, p as i64);
        }
    }
    Ok(acc.is_integer())
}

/// Solves `x = v_i mod m_i` for pairwise coprime moduli; returns the least
/// non-negative solution in `[0, prod m_i)`.
pub fn crt_solve(residues: &[(BigInt, BigInt)]) -> Result<BigInt> {
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for (m, v) in residues {
        if !m.is_positive() {
            return Err(Error::InvalidArgument(format!("modulus {m} must be positive")));
        }
        let inv = mod_inverse(&modulus, m)
            .ok_or_else(|| Error::ModuliNotCoprime(modulus.to_string(), m.to_string()))?;
        // x' = x + modulus * t with t = (v - x) / modulus mod m
        let t = modulo(&((v - &x) * inv), m);
        x += &modulus * t;
        modulus *= m;
        x = modulo(&x, &modulus);
    }
    Ok(x)
}

/// An element of Z_p known modulo p^precision: the coset `value + p^N Z_p`.
///
/// `value` is always the least non-negative representative. A precision of 0
/// carries no information (it arises after dividing by p-powers).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicResidue {
    p: u64,
    precision: u32,
    value: BigInt,
}

impl PadicResidue {
    pub fn new(p: u64, precision: u32, value: BigInt) -> Self {
        let value = modulo(&value, &pow(p, precision));
        Self { p, precision, value }
    }

    pub fn zero(p: u64, precision: u32) -> Self {
        Self::new(p, precision, BigInt::zero())
    }

    pub fn one(p: u64, precision: u32) -> Self {
        Self::new(p, precision, BigInt::one())
    }

    /// Embeds a p-integral rational by inverting its denominator mod p^N.
    pub fn from_rational(x: &Rational, p: u64, precision: u32) -> Result<Self> {
        if !is_p_integral(x, p) {
            return Err(Error::NotPIntegral { p, value: x.to_string() });
        }
        let m = pow(p, precision);
        let inv = mod_inverse(x.denom(), &m).expect("denominator prime to p");
        Ok(Self::new(p, precision, x.numer() * inv))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> BigInt {
        pow(self.p, self.precision)
    }

    /// Valuation of the residue if it is visible at this precision, `None`
    /// when the residue is zero mod p^N (valuation `>= N`).
    pub fn known_valuation(&self) -> Option<u32> {
        int_valuation(&self.value, self.p).finite().map(|v| v as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.precision > 0 && self.known_valuation() == Some(0)
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        Self::new(self.p, precision.min(self.precision), self.value.clone())
    }

    fn combine(&self, other: &Self, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        assert_eq!(self.p, other.p, "residues at different primes");
        Self::new(self.p, self.precision.min(other.precision), f(&self.value, &other.value))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a * b)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, self.precision, -&self.value)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.p, self.precision, &self.value * k)
    }

    pub fn pow(&self, e: u64) -> Self {
        let m = self.modulus();
        Self::new(self.p, self.precision, self.value.modpow(&BigInt::from(e), &m))
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        mod_inverse(&self.value, &self.modulus()).map(|v| Self::new(self.p, self.precision, v))
    }

    /// Congruence of two residues at their common precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let n = self.precision.min(other.precision);
        self.p == other.p && self.with_precision(n) == other.with_precision(n)
    }
}

impl fmt::Display for PadicResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.p, self.precision)
    }
}

/// An element of the profinite integers known at finitely many primes.
/// Primes absent from the map carry no constraint.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProfiniteResidue {
    entries: BTreeMap<u64, PadicResidue>,
}

impl ProfiniteResidue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Image of an ordinary integer at each `(prime, precision)` pair.
    pub fn from_integer(v: &BigInt, precisions: &[(u64, u32)]) -> Self {
        let entries = precisions
            .iter()
            .map(|&(p, n)| (p, PadicResidue::new(p, n, v.clone())))
            .collect();
        Self { entries }
    }

    pub fn insert(&mut self, r: PadicResidue) {
        self.entries.insert(r.prime(), r);
    }

    pub fn get(&self, p: u64) -> Option<&PadicResidue> {
        self.entries.get(&p)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = &PadicResidue> {
        self.entries.values()
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.entries
            .iter()
            .all(|(p, r)| other.get(*p).map_or(true, |o| r.agrees_with(o)))
    }
}
