//! The groups `Mom^Euler_{>=2m}` and `Mom^(0)_{>=2m}` as truncated membership
//! tests, with the bijections `Phi_m` and `Psi^(0)_m`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::basis::{basis_data, c_valuation, lattice_modulus};
use crate::error::{Error, Result};
use crate::exact::{
    crt_solve, int_valuation, mod_inverse, modulo, padic_valuation, pow, primes_s, rat_int, PadicResidue,
    ProfiniteResidue, Rational, Valuation,
};
use crate::report::{ser_display_seq, CheckReport};
use crate::seq::EvenSeq;
use crate::zp_linear::{solve, Congruence, Solution};

/// `1 - p^{2i-1}` for `i >= 1`.
pub(crate) fn euler_factor(p: u64, i: u64) -> BigInt {
    BigInt::one() - pow(p, (2 * i - 1) as u32)
}

/// First violation of the tail congruences
/// `f(k) b_{2k} = sum_{i=m}^{k-1} c^(k-m,p)_{2(i-m)} f(i) b_{2i} mod p^{nu_p(C_p(k-m))}`
/// with `f = 1 - p^{2i-1}` when `euler` is set and `f = 1` otherwise.
///
/// Entries may be any p-integral rationals. `primes` restricts the primes
/// examined; otherwise every `p in S_{k-m}` is used.
pub(crate) fn tail_congruence_check(
    check: &str,
    seq: &EvenSeq<Rational>,
    k_max: u64,
    euler: bool,
    primes: Option<&[u64]>,
) -> Result<CheckReport> {
    let m = seq.m();
    if m == 0 {
        return Err(Error::InvalidArgument("start half-weight must be >= 1".into()));
    }
    let top = seq.k_max().map_or(m, |k| k.min(k_max));
    for (k, b) in seq.iter().take_while(|(k, _)| *k <= top) {
        let bad = match primes {
            Some(ps) => ps.iter().copied().find(|&p| padic_valuation(b, p) < Valuation::Finite(0)),
            None => primes_s(top.saturating_sub(m).max(1))
                .into_iter()
                .find(|&p| padic_valuation(b, p) < Valuation::Finite(0)),
        };
        if let Some(p) = bad {
            let mut r = CheckReport::fail(
                check,
                top,
                format!("entry at weight {} is {b}, not {p}-integral", 2 * k),
            );
            r.prime = Some(p);
            r.first_failure_weight = Some(2 * k);
            r.required_valuation = Some(0);
            r.observed_valuation = Some(padic_valuation(b, p));
            return Ok(r);
        }
    }
    for k in m + 1..=top {
        let candidates = match primes {
            Some(ps) => ps.to_vec(),
            None => primes_s(k - m),
        };
        for p in candidates {
            let need = c_valuation(p, k - m) as i64;
            if need == 0 {
                continue;
            }
            let data = basis_data(p, m, k - m)?;
            let f = |i: u64| if euler { rat_int(euler_factor(p, i)) } else { Rational::one() };
            let mut residual = f(k) * seq.at(k).expect("within range");
            for i in m..k {
                residual -= rat_int(data.c_coeffs[(i - m) as usize].clone())
                    * f(i)
                    * seq.at(i).expect("within range");
            }
            let observed = padic_valuation(&residual, p);
            if !observed.is_at_least(need) {
                return Ok(CheckReport::congruence_failure(check, top, p, 2 * k, need, observed));
            }
        }
    }
    Ok(CheckReport::pass(check, top))
}

fn to_rational_seq(seq: &EvenSeq<BigInt>) -> EvenSeq<Rational> {
    seq.map(|b| rat_int(b.clone()))
}

/// Membership in `Mom^Euler_{>=2m}` up to half-weight `k_max`, where `m` is the
/// sequence's start.
pub fn mom_euler_check(seq: &EvenSeq<BigInt>, k_max: u64) -> Result<CheckReport> {
    tail_congruence_check("mom-euler", &to_rational_seq(seq), k_max, true, None)
}

/// The same congruences for `Z_(p)`-valued entries, at the given primes only.
pub fn mom_euler_check_local(
    seq: &EvenSeq<Rational>,
    k_max: u64,
    primes: &[u64],
) -> Result<CheckReport> {
    tail_congruence_check("mom-euler", seq, k_max, true, Some(primes))
}

/// Lower-triangular matrix of `Phi_m`; row `k` gives the weight `2(k+m)` entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhiMatrix {
    pub m: u64,
    #[serde(serialize_with = "ser_rows")]
    pub rows: Vec<Vec<BigInt>>,
    /// Diagonal entries `M_k`.
    #[serde(serialize_with = "ser_display_seq")]
    pub moduli: Vec<BigInt>,
    /// `S_k` for each row (empty for row 0).
    pub prime_sets: Vec<Vec<u64>>,
}

fn ser_rows<S: serde::Serializer>(rows: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(rows.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()))
}

impl PhiMatrix {
    pub fn entry(&self, k: usize, j: usize) -> BigInt {
        self.rows[k].get(j).cloned().unwrap_or_default()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Builds rows `0..=r` of `Phi_m`.
pub fn phi_matrix(m: u64, r: u64) -> Result<PhiMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    let mut moduli = vec![BigInt::one()];
    let mut prime_sets = vec![Vec::new()];
    for k in 1..=r {
        let primes = primes_s(k);
        let mut row = Vec::with_capacity(k as usize + 1);
        for j in 0..k as usize {
            let mut system = Vec::with_capacity(primes.len());
            for &p in &primes {
                let modulus = pow(p, c_valuation(p, k));
                let data = basis_data(p, m, k)?;
                let mut rhs = BigInt::zero();
                for i in 0..k as usize {
                    if let Some(phi) = rows[i].get(j) {
                        rhs += &data.c_coeffs[i] * euler_factor(p, i as u64 + m) * phi;
                    }
                }
                let inv = mod_inverse(&euler_factor(p, k + m), &modulus)
                    .expect("Euler factor is a unit");
                system.push((modulus.clone(), modulo(&(rhs * inv), &modulus)));
            }
            row.push(crt_solve(&system)?);
        }
        let diag = lattice_modulus(k);
        row.push(diag.clone());
        rows.push(row);
        moduli.push(diag);
        prime_sets.push(primes);
    }
    let matrix = PhiMatrix { m, rows, moduli, prime_sets };
    verify_phi_matrix(&matrix)?;
    Ok(matrix)
}

fn verify_phi_matrix(matrix: &PhiMatrix) -> Result<()> {
    let r = matrix.num_rows() as u64 - 1;
    for j in 0..=r as usize {
        let column: Vec<BigInt> = (0..=r as usize).map(|k| matrix.entry(k, j)).collect();
        let seq = EvenSeq::new(matrix.m, column);
        let report = mom_euler_check(&seq, matrix.m + r)?;
        if !report.passed() {
            return Err(Error::Invariant(format!("Phi column {j} fails: {}", report.detail)));
        }
    }
    for (k, row) in matrix.rows.iter().enumerate() {
        let diag = &row[k];
        if row[..k].iter().any(|x| x.is_negative() || x >= diag) {
            return Err(Error::Invariant(format!("Phi row {k} not reduced")));
        }
    }
    Ok(())
}

/// `b_{2k} = sum_j Phi_{2(k-m), j} l_j` for `m <= k <= k_max`; missing `l_j` are zero.
pub fn phi_apply(m: u64, l: &[BigInt], k_max: u64) -> Result<EvenSeq<BigInt>> {
    if k_max < m {
        return Ok(EvenSeq::new(m, Vec::new()));
    }
    let matrix = phi_matrix(m, k_max - m)?;
    Ok(phi_apply_with(&matrix, l))
}

pub fn phi_apply_with(matrix: &PhiMatrix, l: &[BigInt]) -> EvenSeq<BigInt> {
    let entries = matrix
        .rows
        .iter()
        .map(|row| row.iter().zip(l).map(|(phi, lj)| phi * lj).sum())
        .collect();
    EvenSeq::new(matrix.m, entries)
}

/// Recovers `l_0, ..., l_{K-m}` from a `Mom^Euler` sequence.
pub fn phi_invert(seq: &EvenSeq<BigInt>, k_max: u64) -> Result<Vec<BigInt>> {
    let m = seq.m();
    let top = seq.k_max().map_or(0, |k| k.min(k_max));
    if top < m {
        return Ok(Vec::new());
    }
    let matrix = phi_matrix(m, top - m)?;
    phi_invert_with(&matrix, seq)
}

pub fn phi_invert_with(matrix: &PhiMatrix, seq: &EvenSeq<BigInt>) -> Result<Vec<BigInt>> {
    let mut l: Vec<BigInt> = Vec::with_capacity(matrix.num_rows());
    for (n, row) in matrix.rows.iter().enumerate() {
        let Some(b) = seq.at(matrix.m + n as u64) else { break };
        let partial: BigInt = row.iter().zip(&l).map(|(phi, lj)| phi * lj).sum();
        let (q, rem) = (b - partial).div_rem(&row[n]);
        if !rem.is_zero() {
            return Err(Error::NotInMomEuler { index: n });
        }
        l.push(q);
    }
    Ok(l)
}

/// Low-weight moments `b_0, b_2, ..., b_{2m-2}` reconstructed at each prime.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Mom0Witness {
    pub residues: BTreeMap<u64, Vec<PadicResidue>>,
}

impl Mom0Witness {
    /// `b_{2i}` at `p`.
    pub fn at(&self, p: u64, i: u64) -> Option<&PadicResidue> {
        self.residues.get(&p).and_then(|v| v.get(i as usize))
    }
}

/// Per-prime precision caps; primes not listed are uncapped.
pub type PrecisionBudget = BTreeMap<u64, u32>;

enum LocalMom0 {
    Ok(Vec<PadicResidue>),
    /// Solvable only with nonzero mass; carries the reconstructed `b_0`.
    Mass(PadicResidue),
    /// Unsolvable already at this half-weight.
    Fails(u64),
}

/// Builds the congruences of `Mom^(0)` at `p` in the unknowns
/// `b_0, b_2, ..., b_{2m-2}` (with `b_0` pinned to zero unless `free_mass`).
fn mom0_rows(p: u64, seq: &EvenSeq<BigInt>, top: u64, free_mass: bool) -> Result<Vec<Congruence>> {
    let m = seq.m();
    let n = m as usize;
    let mut rows = Vec::new();
    for k in 1..=top {
        let e = c_valuation(p, k);
        if e == 0 {
            continue;
        }
        let data = basis_data(p, 0, k)?;
        let mut coeffs = vec![BigInt::zero(); n];
        let mut rhs = BigInt::zero();
        if k < m {
            coeffs[k as usize] = BigInt::one();
        } else {
            rhs -= seq.at(k).expect("within range");
        }
        for i in 0..k {
            let c = &data.c_coeffs[i as usize];
            if i < m {
                coeffs[i as usize] -= c;
            } else {
                rhs += c * seq.at(i).expect("within range");
            }
        }
        if !free_mass {
            coeffs[0] = BigInt::zero();
        }
        rows.push(Congruence { coeffs, rhs, exponent: e });
    }
    Ok(rows)
}

fn cap(sol: Vec<PadicResidue>, budget: Option<u32>) -> Vec<PadicResidue> {
    match budget {
        Some(b) => sol.into_iter().map(|r| r.with_precision(b)).collect(),
        None => sol,
    }
}

fn mom0_local(p: u64, seq: &EvenSeq<BigInt>, top: u64, budget: Option<u32>) -> Result<LocalMom0> {
    let m = seq.m() as usize;
    if let Solution::Solved(mut sol) = solve(p, m, &mom0_rows(p, seq, top, false)?) {
        let e = sol.iter().map(|r| r.precision()).max().unwrap_or(0);
        sol[0] = PadicResidue::zero(p, budget.map_or(e, |b| b.min(e)));
        return Ok(LocalMom0::Ok(cap(sol, budget)));
    }
    if let Solution::Solved(sol) = solve(p, m, &mom0_rows(p, seq, top, true)?) {
        return Ok(LocalMom0::Mass(sol[0].clone()));
    }
    for k in seq.m()..=top {
        if solve(p, m, &mom0_rows(p, seq, k, false)?) == Solution::Inconsistent {
            return Ok(LocalMom0::Fails(k));
        }
    }
    Err(Error::Invariant("inconsistent system with no failing prefix".into()))
}

/// Membership in `Mom^(0)_{>=2m}` up to half-weight `k_max`.
///
/// At each prime `p in S_K` the missing moments `b_0 = 0, b_2, ..., b_{2m-2}`
/// are reconstructed by solving the congruences over `Z_p`; the witness records
/// them at the precision the truncated system determines (capped by `budget`).
pub fn mom0_check(
    seq: &EvenSeq<BigInt>,
    k_max: u64,
    budget: &PrecisionBudget,
) -> Result<(CheckReport, Mom0Witness)> {
    const CHECK: &str = "mom0";
    let m = seq.m();
    if m == 0 {
        return Err(Error::InvalidArgument("start half-weight must be >= 1".into()));
    }
    let top = seq.k_max().map_or(m.saturating_sub(1), |k| k.min(k_max));
    let mut witness = Mom0Witness::default();
    for p in primes_s(top.max(1)) {
        match mom0_local(p, seq, top, budget.get(&p).copied())? {
            LocalMom0::Ok(sol) => {
                witness.residues.insert(p, sol);
            }
            LocalMom0::Mass(b0) => {
                let mut r = CheckReport::fail(
                    CHECK,
                    top,
                    format!("tail is a moment sequence at {p} only with total mass b_0 = {b0}, not 0"),
                );
                r.prime = Some(p);
                r.first_failure_weight = Some(0);
                r.required_valuation = Some(b0.precision() as i64);
                r.observed_valuation = Some(Valuation::Finite(b0.known_valuation().unwrap_or(0) as i64));
                return Ok((r, witness));
            }
            LocalMom0::Fails(k) => {
                let mut r = CheckReport::fail(
                    CHECK,
                    top,
                    format!(
                        "no measure at {p} matches the moments up to weight {}",
                        2 * k
                    ),
                );
                r.prime = Some(p);
                r.first_failure_weight = Some(2 * k);
                r.required_valuation = Some(c_valuation(p, k) as i64);
                return Ok((r, witness));
            }
        }
    }
    Ok((CheckReport::pass(CHECK, top), witness))
}

/// Parameters of `Psi^(0)_m`: profinite `l_1..l_{m-1}`, integer `l_m..l_K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Psi0Params {
    pub m: u64,
    pub profinite: Vec<ProfiniteResidue>,
    #[serde(serialize_with = "ser_display_seq")]
    pub integers: Vec<BigInt>,
}

impl Psi0Params {
    pub fn zero(m: u64, k_max: u64) -> Self {
        Self::from_integers(m, &[], &[], k_max)
    }

    /// Parameters with ordinary integers in the profinite slots, embedded at
    /// the precision `psi0_apply` needs up to `k_max`. Missing entries are zero.
    pub fn from_integers(m: u64, low: &[BigInt], integers: &[BigInt], k_max: u64) -> Self {
        let precisions: Vec<(u64, u32)> =
            primes_s(k_max.max(1)).into_iter().map(|p| (p, c_valuation(p, k_max))).collect();
        let profinite = (0..m.saturating_sub(1) as usize)
            .map(|i| ProfiniteResidue::from_integer(&low.get(i).cloned().unwrap_or_default(), &precisions))
            .collect();
        let integers = (0..(k_max + 1).saturating_sub(m) as usize)
            .map(|i| integers.get(i).cloned().unwrap_or_default())
            .collect();
        Self { m, profinite, integers }
    }

    /// Agreement at common precision for the profinite part, equality otherwise.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.m == other.m
            && self.integers == other.integers
            && self.profinite.len() == other.profinite.len()
            && self.profinite.iter().zip(&other.profinite).all(|(a, b)| a.agrees_with(b))
    }
}

/// The base point: least `b in [0, M_k)` with
/// `b = sum_{i<k} c^(k,p)_{2i} b_{2i} mod p^{nu_p(C_p(k))}` for all `p in S_k`.
fn base_point(k: u64, low: &dyn Fn(u64, u64) -> BigInt) -> Result<BigInt> {
    let mut system = Vec::new();
    for p in primes_s(k) {
        let modulus = pow(p, c_valuation(p, k));
        let data = basis_data(p, 0, k)?;
        let s: BigInt = (0..k).map(|i| &data.c_coeffs[i as usize] * low(p, i)).sum();
        system.push((modulus.clone(), modulo(&s, &modulus)));
    }
    crt_solve(&system)
}

fn low_value(low: &[BTreeMap<u64, (BigInt, u32)>], p: u64, i: u64) -> BigInt {
    low[i as usize].get(&p).map_or_else(BigInt::zero, |(v, _)| v.clone())
}

/// The weight-`2k` congruence at `p` involves the partly known `b_{2i}`
/// (`0 < i < low.len()`) only through `c^(k,p)_{2i} b_{2i}`; that sum must be
/// determined modulo `p^{nu_p(C_p(k))}`.
fn check_low_precision(k: u64, low: &[BTreeMap<u64, (BigInt, u32)>]) -> Result<()> {
    for p in primes_s(k) {
        let needed = c_valuation(p, k);
        let data = basis_data(p, 0, k)?;
        for i in 1..(low.len() as u64).min(k) {
            let Some(v) = int_valuation(&data.c_coeffs[i as usize], p).finite() else {
                continue;
            };
            let have = low[i as usize].get(&p).map_or(0, |(_, d)| *d) + v as u32;
            if have < needed {
                return Err(Error::InsufficientPrecision { p, needed, have });
            }
        }
    }
    Ok(())
}

/// Builds `b_{2m}, ..., b_{2K}` from the parameters.
pub fn psi0_apply(params: &Psi0Params, k_max: u64) -> Result<EvenSeq<BigInt>> {
    let m = params.m;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    if params.profinite.len() as u64 != m - 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} profinite parameters, got {}",
            m - 1,
            params.profinite.len()
        )));
    }
    let primes = primes_s(k_max.max(1));
    // low[i][p] = (b_{2i} at p, digits known) for 0 < i < m; b_0 = 0 exactly
    let mut low: Vec<BTreeMap<u64, (BigInt, u32)>> = vec![BTreeMap::new()];
    for k in 1..m.min(k_max + 1) {
        check_low_precision(k, &low)?;
        let get = |p: u64, i: u64| low_value(&low, p, i);
        let base = base_point(k, &get)?;
        let mk = lattice_modulus(k);
        let param = &params.profinite[(k - 1) as usize];
        let mut at_k = BTreeMap::new();
        for &p in &primes {
            let (l, digits) = param.get(p).map_or((BigInt::zero(), 0), |r| (r.value().clone(), r.precision()));
            at_k.insert(p, (&base + l * &mk, c_valuation(p, k) + digits));
        }
        low.push(at_k);
    }
    let mut out: Vec<BigInt> = Vec::new();
    for k in m..=k_max {
        check_low_precision(k, &low)?;
        let get = |p: u64, i: u64| {
            if i < m {
                low_value(&low, p, i)
            } else {
                out[(i - m) as usize].clone()
            }
        };
        let base = base_point(k, &get)?;
        let l = params.integers.get((k - m) as usize).cloned().unwrap_or_default();
        out.push(base + l * lattice_modulus(k));
    }
    Ok(EvenSeq::new(m, out))
}

/// Inverse of [`psi0_apply`]; profinite parameters come back at the precision
/// the truncated sequence determines.
pub fn psi0_invert(seq: &EvenSeq<BigInt>, k_max: u64, budget: &PrecisionBudget) -> Result<Psi0Params> {
    let m = seq.m();
    let (report, witness) = mom0_check(seq, k_max, budget)?;
    if !report.passed() {
        return Err(Error::NotInMom0(report.detail));
    }
    let top = report.truncation;
    let mut profinite = Vec::new();
    for k in 1..m.min(top + 1) {
        let mk = lattice_modulus(k);
        let mut system = Vec::new();
        for p in primes_s(k) {
            let nu = c_valuation(p, k);
            let b = witness.at(p, k).expect("witness covers S_K");
            if b.precision() < nu {
                return Err(Error::InsufficientPrecision { p, needed: nu, have: b.precision() });
            }
            system.push((pow(p, nu), b.value().clone()));
        }
        let base = crt_solve(&system)?;
        let mut l = ProfiniteResidue::new();
        for (&p, _) in witness.residues.iter() {
            let b = witness.at(p, k).expect("witness covers S_K");
            let nu = c_valuation(p, k);
            let diff = b.value() - &base;
            let precision = b.precision().saturating_sub(nu);
            let pn = pow(p, nu);
            let unit = &mk / &pn;
            let q = &diff / &pn;
            let modulus = pow(p, precision);
            let inv = mod_inverse(&unit, &modulus).expect("unit part of M_k");
            l.insert(PadicResidue::new(p, precision, q * inv));
        }
        profinite.push(l);
    }
    let integers = seq
        .iter()
        .take_while(|(k, _)| *k <= top)
        .map(|(k, b)| b.div_floor(&lattice_modulus(k)))
        .collect();
    Ok(Psi0Params { m, profinite, integers })
}
