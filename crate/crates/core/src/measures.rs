//! Finite-level measures on `Z_p^*/{+-1}`, their moments and convolution, the
//! (B)_p congruence checks, regularization and the zeta measure.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{
    bernoulli, ensure_prime, is_p_integral, modulo, padic_valuation, pow, rat_int,
    PadicResidue, Rational, Valuation,
};
use crate::momgroups::{euler_factor, tail_congruence_check};
use crate::report::CheckReport;
use crate::seq::EvenSeq;

/// A measure on `(Z/p^n)^*/{+-1}` with values mod `p^N`, keyed by the coset
/// representative `x <= p^n / 2`. Cosets without an entry carry zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetMeasure {
    p: u64,
    level: u32,
    precision: u32,
    values: BTreeMap<u64, BigInt>,
}

/// Canonical representative `min(x, p^n - x)` of `+-x` in `(Z/p^n)^*`.
pub fn coset_rep(x: &BigInt, p: u64, level: u32) -> u64 {
    let pn = p.pow(level);
    let r = modulo(x, &BigInt::from(pn)).to_u64().expect("residue fits");
    r.min(pn - r)
}

/// All coset representatives at level `n`, ascending.
pub fn coset_reps(p: u64, level: u32) -> Vec<u64> {
    let pn = p.pow(level);
    (1..pn).filter(|x| x % p != 0 && *x <= pn - x).collect()
}

impl CosetMeasure {
    pub fn zero(p: u64, level: u32, precision: u32) -> Result<Self> {
        ensure_prime(p)?;
        if level == 0 {
            return Err(Error::InvalidArgument("level must be >= 1".into()));
        }
        Ok(Self { p, level, precision, values: BTreeMap::new() })
    }

    /// `delta_x` for a unit `x`.
    pub fn dirac(p: u64, level: u32, precision: u32, x: &BigInt) -> Result<Self> {
        let mut mu = Self::zero(p, level, precision)?;
        mu.add_at(x, &BigInt::one())?;
        Ok(mu)
    }

    pub fn from_values(
        p: u64,
        level: u32,
        precision: u32,
        values: impl IntoIterator<Item = (BigInt, BigInt)>,
    ) -> Result<Self> {
        let mut mu = Self::zero(p, level, precision)?;
        for (x, v) in values {
            mu.add_at(&x, &v)?;
        }
        Ok(mu)
    }

    /// Adds `v` to the value at the coset of `x`.
    pub fn add_at(&mut self, x: &BigInt, v: &BigInt) -> Result<()> {
        if (x % self.p).is_zero() {
            return Err(Error::InvalidArgument(format!("{x} is not a unit mod {}", self.p)));
        }
        let rep = coset_rep(x, self.p, self.level);
        let modulus = self.modulus();
        let entry = self.values.entry(rep).or_insert_with(BigInt::zero);
        *entry = modulo(&(&*entry + v), &modulus);
        if entry.is_zero() {
            self.values.remove(&rep);
        }
        Ok(())
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    fn modulus(&self) -> BigInt {
        pow(self.p, self.precision)
    }

    /// Value on the coset of `x`.
    pub fn value(&self, x: &BigInt) -> BigInt {
        self.values.get(&coset_rep(x, self.p, self.level)).cloned().unwrap_or_default()
    }

    /// Nonzero values keyed by representative.
    pub fn values(&self) -> &BTreeMap<u64, BigInt> {
        &self.values
    }

    pub fn total_mass(&self) -> PadicResidue {
        PadicResidue::new(self.p, self.precision, self.values.values().sum())
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if (self.p, self.level, self.precision) != (other.p, other.level, other.precision) {
            return Err(Error::MeasureMismatch(format!(
                "(p, level, precision) = ({}, {}, {}) vs ({}, {}, {})",
                self.p, self.level, self.precision, other.p, other.level, other.precision
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (x, v) in &other.values {
            out.add_at(&BigInt::from(*x), v)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-BigInt::one()))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut out = Self { values: BTreeMap::new(), ..self.clone() };
        for (x, v) in &self.values {
            out.add_at(&BigInt::from(*x), &(v * k)).expect("representatives are units");
        }
        out
    }

    /// Image under `x -> c x`.
    pub fn push_forward_mul(&self, c: &BigInt) -> Result<Self> {
        if (c % self.p).is_zero() {
            return Err(Error::InvalidArgument(format!("{c} is not a unit mod {}", self.p)));
        }
        let mut out = Self { values: BTreeMap::new(), ..self.clone() };
        for (x, v) in &self.values {
            out.add_at(&(BigInt::from(*x) * c), v)?;
        }
        Ok(out)
    }

    /// Push-forward to level `n - 1` (sum over fibres).
    pub fn push_down(&self) -> Result<Self> {
        if self.level <= 1 {
            return Err(Error::InvalidArgument("cannot push below level 1".into()));
        }
        let mut out = Self::zero(self.p, self.level - 1, self.precision)?;
        for (x, v) in &self.values {
            out.add_at(&BigInt::from(*x), v)?;
        }
        Ok(out)
    }

    /// Moments at the given even weights, each known mod `p^{min(N, n)}`.
    pub fn moments_of(&self, weights: &[u64]) -> Result<Vec<PadicResidue>> {
        let precision = self.precision.min(self.level);
        let modulus = pow(self.p, precision);
        weights
            .iter()
            .map(|&w| {
                if w % 2 == 1 {
                    return Err(Error::InvalidArgument(format!("weight {w} is odd")));
                }
                let e = BigInt::from(w);
                let s: BigInt = self
                    .values
                    .iter()
                    .map(|(x, v)| v * BigInt::from(*x).modpow(&e, &modulus))
                    .sum();
                Ok(PadicResidue::new(self.p, precision, s))
            })
            .collect()
    }

    /// Convolution in the group `(Z/p^n)^*/{+-1}`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = Self { values: BTreeMap::new(), ..self.clone() };
        for (x, a) in &self.values {
            for (y, b) in &other.values {
                out.add_at(&(BigInt::from(*x) * BigInt::from(*y)), &(a * b))?;
            }
        }
        Ok(out)
    }

    /// `(id - c_*) mu`.
    pub fn minus_push(&self, c: &BigInt) -> Result<Self> {
        self.sub(&self.push_forward_mul(c)?)
    }
}

/// Default topological generator: 3 for `p = 2`, otherwise the least positive
/// integer generating `(Z/p^2)^*/{+-1}`.
pub fn default_generator(p: u64) -> Result<u64> {
    ensure_prime(p)?;
    if p == 2 {
        return Ok(3);
    }
    let order = p * (p - 1) / 2;
    (2..p * p)
        .find(|&c| c % p != 0 && quotient_order(c, p, 2) == order)
        .ok_or_else(|| Error::Invariant(format!("no generator found for p = {p}")))
}

/// Order of `c` in `(Z/p^n)^*/{+-1}`.
fn quotient_order(c: u64, p: u64, level: u32) -> u64 {
    let pn = BigInt::from(p.pow(level));
    let c = BigInt::from(c);
    let mut x = modulo(&c, &pn);
    let mut order = 1;
    while !(x.is_one() || x == &pn - 1u32) {
        x = modulo(&(x * &c), &pn);
        order += 1;
    }
    order
}

/// Solves `(id - c_*) mu = mu_c` at the level of `mu_c`.
///
/// The kernel of `id - c_*` is the constant measures, so the solution is
/// unique only up to a constant; the representative returned has its most
/// frequent value equal to zero (ties broken by the smallest value).
pub fn regularize(mu_c: &CosetMeasure, c: &BigInt) -> Result<CosetMeasure> {
    let (p, level) = (mu_c.prime(), mu_c.level());
    let mass = mu_c.total_mass();
    if !mass.is_zero() {
        return Err(Error::NonzeroMass(mass.to_string()));
    }
    let reps = coset_reps(p, level);
    let c_red = modulo(c, &BigInt::from(p.pow(level))).to_u64().expect("fits");
    if c_red % p == 0 || quotient_order(c_red, p, level) != reps.len() as u64 {
        return Err(Error::NotGenerator { c: c.to_string(), p, level });
    }
    // mu(c^i) = mu(c^{i-1}) + mu_c(c^i), starting from mu(1) = 0
    let modulus = pow(p, mu_c.precision());
    let mut values: Vec<(BigInt, BigInt)> = Vec::with_capacity(reps.len());
    let mut g = BigInt::one();
    let mut acc = BigInt::zero();
    values.push((g.clone(), acc.clone()));
    for _ in 1..reps.len() {
        g = &g * c;
        acc = modulo(&(acc + mu_c.value(&g)), &modulus);
        values.push((g.clone(), acc.clone()));
    }
    let mut freq: BTreeMap<BigInt, usize> = BTreeMap::new();
    for (_, v) in &values {
        *freq.entry(v.clone()).or_default() += 1;
    }
    let shift = freq
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(v, _)| v.clone())
        .unwrap_or_default();
    let mu = CosetMeasure::from_values(
        p,
        level,
        mu_c.precision(),
        values.into_iter().map(|(x, v)| (x, v - &shift)),
    )?;
    if mu.minus_push(c)? != *mu_c {
        return Err(Error::Invariant("regularization does not invert id - c_*".into()));
    }
    Ok(mu)
}

/// Condition (B)_p up to half-weight `k_max`: the tail `b_{2m}, b_{2m+2}, ...`
/// is the moment sequence of a measure on `Z_p^*/{+-1}`.
pub fn check_bp(seq: &EvenSeq<Rational>, p: u64, k_max: u64) -> Result<CheckReport> {
    ensure_prime(p)?;
    tail_congruence_check("B_p", seq, k_max, false, Some(&[p]))
}

/// Condition (B~)_p for the given `c`: for each `c`, `((1 - c^{2k}) b_{2k})`
/// must be p-integral and satisfy (B)_p.
pub fn check_bp_tilde(
    seq: &EvenSeq<Rational>,
    p: u64,
    k_max: u64,
    c_values: &[BigInt],
) -> Result<CheckReport> {
    ensure_prime(p)?;
    for c in c_values {
        if (c % p).is_zero() {
            return Err(Error::InvalidArgument(format!("{c} is not a {p}-adic unit")));
        }
        let twisted = seq.map_indexed(|k, b| {
            rat_int(BigInt::one() - num_traits::pow(c.clone(), 2 * k as usize)) * b
        });
        let report = tail_congruence_check("B~_p", &twisted, k_max, false, Some(&[p]))?;
        if !report.passed() {
            let detail = format!("c = {c}: {}", report.detail);
            return Ok(CheckReport { detail, ..report });
        }
    }
    let top = seq.k_max().map_or(seq.m(), |k| k.min(k_max));
    Ok(CheckReport::pass("B~_p", top))
}

/// `-(1 - p^{2k-1})(1 - c^{2k}) B_{2k} / 4k`, exactly.
pub fn zeta_moment(p: u64, c: &BigInt, k: u64) -> Rational {
    let twist = BigInt::one() - num_traits::pow(c.clone(), 2 * k as usize);
    -rat_int(euler_factor(p, k) * twist) * bernoulli(2 * k as usize)
        / rat_int(BigInt::from(4 * k))
}

/// Moments of the regularized zeta measure for `max(m, 1) <= k <= K`.
pub fn zeta_moments(p: u64, c: &BigInt, m: u64, k_max: u64, precision: u32) -> Result<EvenSeq<PadicResidue>> {
    ensure_prime(p)?;
    if (c % p).is_zero() {
        return Err(Error::InvalidArgument(format!("{c} is not a {p}-adic unit")));
    }
    let start = m.max(1);
    let entries = (start..=k_max)
        .map(|k| {
            let z = zeta_moment(p, c, k);
            if !is_p_integral(&z, p) {
                return Err(Error::Invariant(format!("zeta moment {z} at weight {} not integral", 2 * k)));
            }
            PadicResidue::from_rational(&z, p, precision)
        })
        .collect::<Result<_>>()?;
    Ok(EvenSeq::new(start, entries))
}

/// Entrywise quotient by the zeta moments; succeeds iff the measure lies in
/// the zeta ideal, as far as the truncation and precision can tell.
pub fn divide_by_zeta(
    seq: &EvenSeq<PadicResidue>,
    p: u64,
    c: &BigInt,
    k_max: u64,
) -> Result<EvenSeq<PadicResidue>> {
    ensure_prime(p)?;
    if (c % p).is_zero() {
        return Err(Error::InvalidArgument(format!("{c} is not a {p}-adic unit")));
    }
    let top = seq.k_max().map_or(0, |k| k.min(k_max));
    let seq = seq.truncate(top);
    seq.try_map_indexed(|k, s| {
        let z = zeta_moment(p, c, k);
        let Valuation::Finite(v) = padic_valuation(&z, p) else {
            return Err(Error::InvalidArgument(format!("zeta moment vanishes at weight {}", 2 * k)));
        };
        let v = v as u32;
        match s.known_valuation() {
            Some(vs) if vs < v => Err(Error::NotInZetaIdeal {
                p,
                weight: 2 * k,
                deficit: (v - vs) as i64,
            }),
            None if s.precision() < v => Err(Error::InsufficientPrecision {
                p,
                needed: v,
                have: s.precision(),
            }),
            _ => {
                let precision = s.precision() - v;
                let pv = pow(p, v);
                let unit = z / rat_int(pv.clone());
                let unit_inv = PadicResidue::from_rational(&unit.recip(), p, precision)?;
                let q = PadicResidue::new(p, precision, s.value().div_floor(&pv));
                Ok(q.mul(&unit_inv))
            }
        }
    })
}
