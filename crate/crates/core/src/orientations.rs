//! Characteristic sequences of KO (spin/string) and tmf orientations, the
//! cusp map, the lifting obstruction and the p-local spin extension.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::basis::{basis_data, c_valuation};
use crate::error::{Error, Result};
use crate::exact::{
    bernoulli, ensure_prime, mod_inverse, modulo, padic_valuation, pow, primes_up_to, rat_int,
    PadicResidue, Rational, Valuation,
};
use crate::measures::check_bp_tilde;
use crate::momgroups::{
    euler_factor, mom0_check, mom_euler_check, mom_euler_check_local, phi_apply, PrecisionBudget,
};
use crate::report::{ser_display, ser_display_seq, CheckReport};
use crate::seq::EvenSeq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Spin,
    String,
}

impl Variant {
    /// Start half-weight: 1 for spin, 2 for string.
    pub fn m(self) -> u64 {
        match self {
            Variant::Spin => 1,
            Variant::String => 2,
        }
    }
}

/// `-B_{2k} / 4k`, the constant term of `G_{2k}`.
pub fn eisenstein_constant(k: u64) -> Rational {
    -bernoulli(2 * k as usize) / rat_int(BigInt::from(4 * k))
}

/// Characteristic sequence of a multiplicative KO orientation, by half-weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KOSeq {
    pub variant: Variant,
    pub seq: EvenSeq<Rational>,
}

impl KOSeq {
    pub fn new(variant: Variant, entries: Vec<Rational>) -> Self {
        Self { variant, seq: EvenSeq::new(variant.m(), entries) }
    }

    /// The Atiyah-Bott-Shapiro point `b_{2k} = -B_{2k}/4k`.
    pub fn abs_point(variant: Variant, k_max: u64) -> Self {
        Self::new(variant, (variant.m()..=k_max).map(eisenstein_constant).collect())
    }

    /// Torsor coordinate `t_{2k} = b_{2k} + B_{2k}/4k`.
    pub fn torsor_coordinate(&self) -> EvenSeq<Rational> {
        self.seq.map_indexed(|k, b| b - eisenstein_constant(k))
    }
}

/// A tmf characteristic sequence `(r_k G_k)_{k >= 4}`, stored as multipliers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmfSeq {
    pub multipliers: EvenSeq<Rational>,
}

impl TmfSeq {
    pub fn new(multipliers: Vec<Rational>) -> Self {
        Self { multipliers: EvenSeq::new(2, multipliers) }
    }

    /// The Witten-genus point `r = 1`.
    pub fn witten_point(k_max: u64) -> Self {
        Self::new(vec![Rational::one(); (k_max + 1).saturating_sub(2) as usize])
    }
}

/// Truncated q-expansion `a0 + sum_{n=1}^T a_n q^n` of a weight-`k` form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QExpansion {
    pub weight: u64,
    #[serde(serialize_with = "ser_display")]
    pub a0: Rational,
    /// `a_1, ..., a_T`.
    #[serde(serialize_with = "ser_display_seq")]
    pub coeffs: Vec<Rational>,
}

impl QExpansion {
    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient `a_n` (with `a_0` the constant term).
    pub fn coeff(&self, n: usize) -> Option<&Rational> {
        if n == 0 {
            Some(&self.a0)
        } else {
            self.coeffs.get(n - 1)
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self {
            weight: self.weight,
            a0: &self.a0 * r,
            coeffs: self.coeffs.iter().map(|a| a * r).collect(),
        }
    }

    pub fn truncate(&self, terms: usize) -> Self {
        Self { coeffs: self.coeffs.iter().take(terms).cloned().collect(), ..self.clone() }
    }
}

fn sigma(exp: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += num_traits::pow(BigInt::from(d), exp as usize);
            let e = n / d;
            if e != d {
                s += num_traits::pow(BigInt::from(e), exp as usize);
            }
        }
        d += 1;
    }
    s
}

/// `G_k = -B_k/2k + sum_{n >= 1} sigma_{k-1}(n) q^n` for even `k >= 4`.
pub fn eisenstein(k: u64, terms: usize) -> Result<QExpansion> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("weight must be even and >= 4, got {k}")));
    }
    Ok(QExpansion {
        weight: k,
        a0: eisenstein_constant(k / 2),
        coeffs: (1..=terms as u64).map(|n| rat_int(sigma(k as u32 - 1, n))).collect(),
    })
}

/// `(f|T(p))_n = a_{np} + p^{k-1} a_{n/p}` for `n <= terms`.
pub fn hecke_tp(f: &QExpansion, p: u64, terms: usize) -> Result<QExpansion> {
    ensure_prime(p)?;
    if f.terms() < p as usize * terms {
        return Err(Error::InvalidArgument(format!(
            "T({p}) on {terms} terms needs {} input coefficients, have {}",
            p as usize * terms,
            f.terms()
        )));
    }
    let pk = rat_int(pow(p, f.weight as u32 - 1));
    let coeffs = (1..=terms)
        .map(|n| {
            let mut a = f.coeff(n * p as usize).expect("enough terms").clone();
            if n % p as usize == 0 {
                a += &pk * f.coeff(n / p as usize).expect("enough terms");
            }
            a
        })
        .collect();
    Ok(QExpansion { weight: f.weight, a0: &f.a0 * (Rational::one() + &pk), coeffs })
}

/// Conditions of the KO characteristic-sequence theorem up to half-weight `k_max`.
///
/// `c_samples` lists `(p, c)` pairs for the optional direct cross-check of
/// condition (c) on `((1 - p^{2k-1}) b_{2k})`.
pub fn ko_check(seq: &KOSeq, k_max: u64, c_samples: &[(u64, BigInt)]) -> Result<CheckReport> {
    let check = match seq.variant {
        Variant::Spin => "ko-spin",
        Variant::String => "ko-string",
    };
    if seq.seq.m() != seq.variant.m() {
        return Err(Error::InvalidArgument(format!(
            "{check} sequence must start at weight {}",
            2 * seq.variant.m()
        )));
    }
    let t = seq.torsor_coordinate();
    let top = t.k_max().map_or(t.m(), |k| k.min(k_max));
    let mut ints = Vec::new();
    for (k, x) in t.iter().take_while(|(k, _)| *k <= top) {
        if !x.is_integer() {
            let mut r = CheckReport::fail(
                check,
                top,
                format!("b_{0} + B_{0}/{0} = {x} is not an integer", 2 * k),
            );
            r.first_failure_weight = Some(2 * k);
            return Ok(r);
        }
        ints.push(x.to_integer());
    }
    let report = mom_euler_check(&EvenSeq::new(t.m(), ints), top)?.with_check(check);
    if !report.passed() {
        return Ok(report);
    }
    for (p, c) in c_samples {
        let stripped = seq.seq.truncate(top).map_indexed(|k, b| rat_int(euler_factor(*p, k)) * b);
        let r = check_bp_tilde(&stripped, *p, top, std::slice::from_ref(c))?;
        if !r.passed() {
            return Ok(r.with_check(check));
        }
    }
    Ok(CheckReport::pass(check, top))
}

/// `b_{2k} = (Phi_m l)_{2k} - B_{2k}/4k`.
pub fn ko_from_lattice(variant: Variant, l: &[BigInt], k_max: u64) -> Result<KOSeq> {
    let t = phi_apply(variant.m(), l, k_max)?;
    Ok(KOSeq { variant, seq: t.map_indexed(|k, x| rat_int(x.clone()) + eisenstein_constant(k)) })
}

/// Conditions of the tmf characteristic-sequence theorem for `r_k G_k`.
pub fn tmf_check(seq: &TmfSeq, k_max: u64, q_terms: usize, budget: &PrecisionBudget) -> Result<CheckReport> {
    const CHECK: &str = "tmf";
    let r = &seq.multipliers;
    if r.m() != 2 {
        return Err(Error::InvalidArgument("tmf multipliers start at weight 4".into()));
    }
    let top = r.k_max().map_or(1, |k| k.min(k_max));
    let mut q = Vec::new();
    for (k, rk) in r.iter().take_while(|(k, _)| *k <= top) {
        let qk = rk - Rational::one();
        if !qk.is_integer() {
            let mut rep = CheckReport::fail(
                CHECK,
                top,
                format!("weight {}: q = {qk} is not an integer (q^1 coefficient of r G_k)", 2 * k),
            );
            rep.first_failure_weight = Some(2 * k);
            return Ok(rep);
        }
        let constant = eisenstein_constant(k) * &qk;
        if !constant.is_integer() {
            let p = primes_up_to(2 * k + 1)
                .into_iter()
                .find(|&p| padic_valuation(&constant, p) < Valuation::Finite(0))
                .expect("denominator has a prime factor");
            let mut rep = CheckReport::fail(
                CHECK,
                top,
                format!("weight {}: -B_k/2k * q = {constant} is not an integer", 2 * k),
            );
            rep.prime = Some(p);
            rep.first_failure_weight = Some(2 * k);
            rep.required_valuation = Some(0);
            rep.observed_valuation = Some(padic_valuation(&constant, p));
            return Ok(rep);
        }
        q.push(qk.to_integer());
    }
    let (report, _) = mom0_check(&EvenSeq::new(2, q), top, budget)?;
    if !report.passed() {
        return Ok(report.with_check(CHECK));
    }
    for (k, rk) in r.iter().take_while(|(k, _)| *k <= top.min(7)) {
        let f = eisenstein(2 * k, 5 * q_terms)?.scale(rk);
        for p in [2u64, 3, 5] {
            let lhs = hecke_tp(&f, p, q_terms)?;
            let rhs = f.truncate(q_terms).scale(&(Rational::one() + rat_int(pow(p, 2 * k as u32 - 1))));
            if lhs != rhs {
                let mut rep = CheckReport::fail(CHECK, top, format!("weight {}: T({p}) eigenvalue mismatch", 2 * k));
                rep.prime = Some(p);
                rep.first_failure_weight = Some(2 * k);
                return Ok(rep);
            }
        }
    }
    Ok(CheckReport::pass(CHECK, top))
}

/// `r_k = 1 + q_k` for `q in Mom^(0)_{>=4}`.
pub fn psi2_apply(q: &EvenSeq<BigInt>, k_max: u64, budget: &PrecisionBudget) -> Result<TmfSeq> {
    if q.m() != 2 {
        return Err(Error::InvalidArgument("q must start at weight 4".into()));
    }
    let (report, _) = mom0_check(q, k_max, budget)?;
    if !report.passed() {
        return Err(Error::NotInMom0(report.detail));
    }
    let top = report.truncation;
    Ok(TmfSeq {
        multipliers: q.truncate(top).map(|x| rat_int(x + BigInt::one())),
    })
}

/// Constant terms `r_k (-B_k/2k)`: evaluation at the cusp.
pub fn cusp_evaluate(seq: &TmfSeq) -> KOSeq {
    KOSeq {
        variant: Variant::String,
        seq: seq.multipliers.map_indexed(|k, r| r * eisenstein_constant(k)),
    }
}

/// Why a KO string sequence does not come from tmf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub prime: u64,
    pub weight: u64,
    pub deficit: i64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftOutcome {
    Lifted(TmfSeq),
    Obstructed(ObstructionReport),
}

/// Decides whether a KO string characteristic sequence lifts to tmf.
pub fn lift_to_tmf(seq: &KOSeq, k_max: u64, budget: &PrecisionBudget) -> Result<LiftOutcome> {
    if seq.variant != Variant::String {
        return Err(Error::InvalidArgument("lifting applies to string sequences".into()));
    }
    let top = seq.seq.k_max().map_or(1, |k| k.min(k_max));
    let beta = seq.seq.truncate(top).map_indexed(|k, b| b / eisenstein_constant(k));
    for (k, bk) in beta.iter() {
        if !bk.is_integer() {
            let den = bk.denom();
            let p = primes_dividing(den).into_iter().next().expect("nontrivial denominator");
            let deficit = -padic_valuation(bk, p).finite().expect("nonzero");
            return Ok(LiftOutcome::Obstructed(ObstructionReport {
                prime: p,
                weight: 2 * k,
                deficit,
                detail: format!(
                    "b_{0} / (-B_{0}/{0}) = {bk} has {p}-adic valuation {1}",
                    2 * k,
                    -deficit
                ),
            }));
        }
    }
    let q = beta.map(|b| b.to_integer() - BigInt::one());
    let (report, _) = mom0_check(&q, top, budget)?;
    if !report.passed() {
        let deficit = match (report.required_valuation, report.observed_valuation) {
            (Some(req), Some(Valuation::Finite(obs))) => req - obs,
            (Some(req), _) => req,
            _ => 1,
        };
        return Ok(LiftOutcome::Obstructed(ObstructionReport {
            prime: report.prime.unwrap_or(0),
            weight: report.first_failure_weight.unwrap_or(0),
            deficit,
            detail: format!("q = beta - 1 is not in Mom^(0): {}", report.detail),
        }));
    }
    Ok(LiftOutcome::Lifted(TmfSeq { multipliers: q.map(|x| rat_int(x + BigInt::one())) }))
}

/// Prime factors of `n`, ascending (trial division; denominators here are small
/// apart from Bernoulli numerators, whose factors are found in order).
fn primes_dividing(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while n > BigInt::one() {
        let db = BigInt::from(d);
        if &db * &db > n {
            out.push(n.to_u64().expect("prime factor fits"));
            break;
        }
        if (&n % &db).is_zero() {
            out.push(d);
            while (&n % &db).is_zero() {
                n /= &db;
            }
        }
        d += 1;
    }
    out
}

/// Builds a spin-type sequence `b_2, b_4, ..., b_{2K}` at `p` with
/// `b_2 = b2_target mod p^N` satisfying the p-local Euler congruences.
///
/// `l_string[k-2]` is the lattice offset at half-weight `k >= 2`: the entry is
/// `base + l * p^{nu_p(C_p(k-1))}` with `base` the least non-negative solution
/// of the weight-`2k` congruence. Missing offsets are zero.
pub fn spin_extend(
    p: u64,
    b2_target: &PadicResidue,
    l_string: &[BigInt],
    k_max: u64,
) -> Result<EvenSeq<Rational>> {
    ensure_prime(p)?;
    if b2_target.prime() != p || b2_target.precision() == 0 {
        return Err(Error::InvalidArgument(format!(
            "b_2 target must be a {p}-adic residue of positive precision"
        )));
    }
    let mut b: Vec<BigInt> = vec![b2_target.value().clone()];
    for k in 2..=k_max {
        let e = c_valuation(p, k - 1);
        let modulus = pow(p, e);
        let data = basis_data(p, 1, k - 1)?;
        let rhs: BigInt = (1..k)
            .map(|i| &data.c_coeffs[(i - 1) as usize] * euler_factor(p, i) * &b[(i - 1) as usize])
            .sum();
        let inv = mod_inverse(&euler_factor(p, k), &modulus).expect("unit Euler factor");
        let base = modulo(&(rhs * inv), &modulus);
        let l = l_string.get((k - 2) as usize).cloned().unwrap_or_default();
        b.push(base + l * modulus);
    }
    Ok(EvenSeq::new(1, b.into_iter().map(rat_int).collect()))
}

/// Whether `spin` and `string` both satisfy their p-local congruences up to
/// `k_max` and `spin` restricts to `string` on weights `>= 4`.
pub fn pullback_check(
    spin: &EvenSeq<Rational>,
    string: &EvenSeq<Rational>,
    p: u64,
    k_max: u64,
) -> Result<bool> {
    ensure_prime(p)?;
    if spin.m() != 1 || string.m() != 2 {
        return Err(Error::InvalidArgument("expected spin from weight 2 and string from weight 4".into()));
    }
    if !mom_euler_check_local(spin, k_max, &[p])?.passed()
        || !mom_euler_check_local(string, k_max, &[p])?.passed()
    {
        return Ok(false);
    }
    let top = k_max.min(spin.k_max().unwrap_or(0)).min(string.k_max().unwrap_or(0));
    if top < 2 {
        return Ok(true);
    }
    Ok(spin.window(2, top)? == string.truncate(top))
}
