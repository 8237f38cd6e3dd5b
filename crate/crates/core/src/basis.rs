//! The polynomials `e_j^(p)`, their phi-digit extension `E_n^(p)`, the moduli
//! `C_p(k)` with the congruence coefficients `c^(k,p)_{2i}`, and finite-level
//! rank checks showing the reductions form bases.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::digits::phi_expand;
use crate::error::{Error, Result};
use crate::exact::{
    ensure_prime, factorial, int_valuation, modulo, pow, rat_int, Rational, Valuation,
};
use crate::poly::PolyQ;

type PolyCache = LazyLock<Mutex<HashMap<(u64, u64), Arc<PolyQ>>>>;

static E_SMALL: PolyCache = LazyLock::new(Default::default);
static E_BIG: PolyCache = LazyLock::new(Default::default);
static BASIS: LazyLock<Mutex<HashMap<(u64, u64), Arc<BasisData>>>> =
    LazyLock::new(Default::default);

/// Residues `a` entering the product for `e_j^(p)`, `j >= 1`.
fn e_roots(p: u64, j: u32) -> Vec<u64> {
    if j == 1 {
        (1..=(p - 1) / 2).collect()
    } else {
        let pj = p.pow(j);
        (0..=pj / 2).filter(|a| a % p != 0).collect()
    }
}

fn e_denominator(p: u64, j: u32) -> BigInt {
    if j == 1 {
        factorial(p)
    } else {
        factorial(p.pow(j))
    }
}

/// The polynomial `e_j^(p)`.
pub fn e_poly(p: u64, j: u64) -> Result<Arc<PolyQ>> {
    ensure_prime(p)?;
    if let Some(e) = E_SMALL.lock().unwrap().get(&(p, j)) {
        return Ok(e.clone());
    }
    let poly = match j {
        0 => PolyQ::x(),
        1 if p == 2 => PolyQ::new(vec![Rational::new(1.into(), 2.into()); 2]),
        _ => {
            let j = j as u32;
            let mut acc = PolyQ::one();
            for a in e_roots(p, j) {
                let factor = PolyQ::new(vec![
                    rat_int(-BigInt::from(a * a)),
                    Rational::zero(),
                    Rational::one(),
                ]);
                acc = &acc * &factor;
            }
            acc.scale(&Rational::new(BigInt::one(), e_denominator(p, j)))
        }
    };
    let poly = Arc::new(poly);
    E_SMALL.lock().unwrap().insert((p, j), poly.clone());
    Ok(poly)
}

/// `E_n^(p) = prod_j (e_j^(p))^{a_j}` over the phi-adic digits of `n`.
pub fn big_e_poly(p: u64, n: u64) -> Result<Arc<PolyQ>> {
    ensure_prime(p)?;
    if let Some(e) = E_BIG.lock().unwrap().get(&(p, n)) {
        return Ok(e.clone());
    }
    let digits = phi_expand(n, p)?;
    let mut acc = PolyQ::one();
    for j in 0..digits.len() {
        let a = digits.digit(j);
        if a > 0 {
            acc = &acc * &e_poly(p, j as u64)?.pow(a);
        }
    }
    let poly = Arc::new(acc);
    E_BIG.lock().unwrap().insert((p, n), poly.clone());
    Ok(poly)
}

/// `e_j^(p)(x)` evaluated from the product form, without expanding.
pub fn e_value(p: u64, j: u64, x: &BigInt) -> Rational {
    match j {
        0 => rat_int(x.clone()),
        1 if p == 2 => Rational::new(x + 1, BigInt::from(2)),
        _ => {
            let j = j as u32;
            let x2 = x * x;
            let num = e_roots(p, j)
                .into_iter()
                .fold(BigInt::one(), |acc, a| acc * (&x2 - BigInt::from(a * a)));
            Rational::new(num, e_denominator(p, j))
        }
    }
}

/// `C_p(k) = prod_i ((p^i)!)^{a_i}` over the phi-adic digits of `2k`.
pub fn c_modulus(p: u64, k: u64) -> Result<BigInt> {
    let digits = phi_expand(2 * k, p)?;
    let mut acc = BigInt::one();
    for (i, &a) in digits.higher.iter().enumerate() {
        if a > 0 {
            acc *= num_traits::pow(factorial(p.pow(i as u32 + 1)), a as usize);
        }
    }
    Ok(acc)
}

/// `nu_p(C_p(k))`, computed from the digits by Legendre's formula.
pub fn c_valuation(p: u64, k: u64) -> u32 {
    let digits = phi_expand(2 * k, p).expect("prime checked by caller");
    digits
        .higher
        .iter()
        .enumerate()
        .map(|(i, &a)| a * (p.pow(i as u32 + 1) - 1) / (p - 1))
        .sum::<u64>() as u32
}

/// `M_k = prod_{p in S_k} p^{nu_p(C_p(k))}`.
pub fn lattice_modulus(k: u64) -> BigInt {
    crate::exact::primes_s(k)
        .into_iter()
        .map(|p| pow(p, c_valuation(p, k)))
        .product()
}

/// The data read off `C_p(k) E_{2k}^(p)(X) X^{2m} = X^{2(k+m)} - sum_i c_{2(i-m)} X^{2i}`.
///
/// The coefficients do not depend on the shift `m`; it is kept for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisData {
    pub p: u64,
    pub m: u64,
    pub k: u64,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub modulus: BigInt,
    /// `c^(k,p)_{2j}` for `j = 0..k`.
    #[serde(serialize_with = "crate::report::ser_display_seq")]
    pub c_coeffs: Vec<BigInt>,
}

impl BasisData {
    /// `nu_p(C_p(k))`, the exponent of the congruence modulus.
    pub fn valuation(&self) -> u32 {
        int_valuation(&self.modulus, self.p).finite().unwrap_or(0) as u32
    }

    /// `p^{nu_p(C_p(k))}`.
    pub fn p_modulus(&self) -> BigInt {
        pow(self.p, self.valuation())
    }
}

pub fn basis_data(p: u64, m: u64, k: u64) -> Result<BasisData> {
    ensure_prime(p)?;
    let cached = BASIS.lock().unwrap().get(&(p, k)).cloned();
    let data = match cached {
        Some(d) => d,
        None => {
            let d = Arc::new(compute_basis_data(p, k)?);
            BASIS.lock().unwrap().insert((p, k), d.clone());
            d
        }
    };
    Ok(BasisData { m, ..(*data).clone() })
}

fn compute_basis_data(p: u64, k: u64) -> Result<BasisData> {
    let modulus = c_modulus(p, k)?;
    let scaled = big_e_poly(p, 2 * k)?.scale(&rat_int(modulus.clone()));
    if scaled.degree() != Some(2 * k as usize) || !scaled.leading().is_one() {
        return Err(Error::Invariant(format!(
            "C_{p}({k}) E_{} is not monic of degree {}",
            2 * k,
            2 * k
        )));
    }
    if !scaled.is_even() {
        return Err(Error::Invariant(format!("E_{} at p = {p} is not even", 2 * k)));
    }
    let mut c_coeffs = Vec::with_capacity(k as usize);
    for j in 0..k as usize {
        let c = -scaled.coeff(2 * j);
        if !c.is_integer() {
            return Err(Error::Invariant(format!(
                "c^({k},{p})_{} = {c} is not an integer",
                2 * j
            )));
        }
        c_coeffs.push(c.to_integer());
    }
    Ok(BasisData { p, m: 0, k, modulus, c_coeffs })
}

/// Verifies at level `n` that the reductions mod p of `x^{k_shift} E_j^(p)(x)`
/// span all maps `(Z/p^n)^* -> F_p` (`j < phi(p^n)`), or, with `even_only`,
/// that the even-index ones span the maps on `(Z/p^n)^*/{+-1}`.
pub fn basis_rank_check(p: u64, n: u32, k_shift: u64, even_only: bool) -> Result<bool> {
    ensure_prime(p)?;
    if n == 0 {
        return Err(Error::InvalidArgument("level must be >= 1".into()));
    }
    if even_only && k_shift % 2 == 1 {
        return Err(Error::InvalidArgument("even variant needs an even shift".into()));
    }
    let pn = p.pow(n);
    let phi = pn / p * (p - 1);
    let points: Vec<u64> = (1..pn)
        .filter(|x| x % p != 0)
        .filter(|&x| !even_only || x <= pn - x || pn == 2)
        .collect();
    let indices: Vec<u64> = (0..phi).filter(|j| !even_only || j % 2 == 0).collect();

    let mut e_cache: HashMap<(u64, u64), u64> = HashMap::new();
    let mut rows = Vec::with_capacity(indices.len());
    for &j in &indices {
        let digits = phi_expand(j, p)?;
        let mut row = Vec::with_capacity(points.len());
        for &x in &points {
            let mut v = mod_p_pow(x % p, k_shift, p);
            for i in 0..digits.len() {
                let a = digits.digit(i);
                if a == 0 {
                    continue;
                }
                let ev = match e_cache.get(&(i as u64, x)) {
                    Some(&ev) => ev,
                    None => {
                        let ev = reduce_mod_p(&e_value(p, i as u64, &BigInt::from(x)), p)?;
                        e_cache.insert((i as u64, x), ev);
                        ev
                    }
                };
                v = v * mod_p_pow(ev, a, p) % p;
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(rank_mod_p(rows, p) == points.len() && indices.len() == points.len())
}

fn mod_p_pow(base: u64, e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    let mut b = base % p;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Reduction mod p of a p-integral rational.
pub(crate) fn reduce_mod_p(x: &Rational, p: u64) -> Result<u64> {
    if let Valuation::Finite(v) = crate::exact::padic_valuation(x, p) {
        if v < 0 {
            return Err(Error::NotPIntegral { p, value: x.to_string() });
        }
    }
    let pb = BigInt::from(p);
    let inv = crate::exact::mod_inverse(x.denom(), &pb).expect("unit denominator");
    Ok(modulo(&(x.numer() * inv), &pb).to_u64().expect("small residue"))
}

/// Rank over F_p by Gaussian elimination.
pub(crate) fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = mod_p_pow(rows[rank][col], p - 2, p);
        for c in col..ncols {
            rows[rank][c] = rows[rank][c] * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in col..ncols {
                    rows[r][c] = (rows[r][c] + p * p - f * rows[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
fn exponent_of(x: &BigInt, p: u64) -> u32 {
    int_valuation(x, p).finite().and_then(|v| v.to_u32()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn e_examples() {
        let e = e_poly(3, 1).unwrap();
        assert_eq!(*e, PolyQ::new(vec![rat(-1, 6), rat(0, 1), rat(1, 6)]));
        let e = e_poly(2, 3).unwrap();
        let expected = PolyQ::new(vec![rat(9, 1), rat(0, 1), rat(-10, 1), rat(0, 1), rat(1, 1)])
            .scale(&rat_int(factorial(8)).recip());
        assert_eq!(*e, expected);
        for p in [2, 3, 5, 7] {
            assert_eq!(*e_poly(p, 0).unwrap(), PolyQ::x());
        }
        assert_eq!(*e_poly(2, 1).unwrap(), PolyQ::new(vec![rat(1, 2), rat(1, 2)]));
    }

    #[test]
    fn big_e_examples() {
        let e31 = e_poly(3, 1).unwrap();
        assert_eq!(*big_e_poly(3, 4).unwrap(), e31.pow(2));
        assert_eq!(*big_e_poly(5, 2).unwrap(), PolyQ::monomial(2));
        assert_eq!(*big_e_poly(7, 0).unwrap(), PolyQ::one());
        assert_eq!(*big_e_poly(2, 4).unwrap(), *e_poly(2, 3).unwrap());
    }

    #[test]
    fn basis_data_examples() {
        let d = basis_data(2, 1, 2).unwrap();
        assert_eq!(d.modulus, factorial(8));
        assert_eq!(d.c_coeffs, vec![int(-9), int(10)]);
        let d = basis_data(5, 1, 2).unwrap();
        assert_eq!(d.modulus, int(120));
        assert_eq!(d.c_coeffs, vec![int(-4), int(5)]);
        let d = basis_data(3, 1, 1).unwrap();
        assert_eq!(d.modulus, int(6));
        assert_eq!(d.c_coeffs, vec![int(1)]);
        assert_eq!(d.valuation(), 1);
    }

    #[test]
    fn valuation_formula_matches_factorials() {
        for p in [2, 3, 5, 7, 11] {
            for k in 1..20 {
                let c = c_modulus(p, k).unwrap();
                assert_eq!(exponent_of(&c, p), c_valuation(p, k), "p={p} k={k}");
            }
        }
        assert_eq!(lattice_modulus(1), int(24));
        assert_eq!(lattice_modulus(2), int(5760));
    }

    #[test]
    fn e_value_matches_polynomial() {
        for p in [2, 3, 5] {
            for j in 0..3 {
                let e = e_poly(p, j).unwrap();
                for x in [-7i64, 1, 2, 13] {
                    assert_eq!(e.eval_int(x), e_value(p, j, &int(x)));
                }
            }
        }
    }

    #[test]
    fn rank_examples() {
        assert!(basis_rank_check(3, 2, 0, false).unwrap());
        assert!(basis_rank_check(2, 3, 2, true).unwrap());
        for p in [2, 3, 5, 7] {
            assert!(basis_rank_check(p, 1, 0, false).unwrap());
        }
    }

    #[test]
    fn rank_detects_degenerate_family() {
        // x^{p-1} = 1 on F_p^*, so the shifted family with a repeated power loses rank
        let rows = vec![vec![1, 1, 1, 1], vec![1, 1, 1, 1]];
        assert_eq!(rank_mod_p(rows, 5), 1);
    }
}
