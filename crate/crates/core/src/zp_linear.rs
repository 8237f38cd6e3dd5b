//! Linear congruence systems over Z_p, solved by a Smith normal form over
//! Z/p^E that keeps track of how much of each unknown the system pins down.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exact::{int_valuation, mod_inverse, modulo, pow, PadicResidue};

/// One congruence `sum_j coeffs[j] * u_j = rhs mod p^exponent`.
#[derive(Debug, Clone)]
pub struct Congruence {
    pub coeffs: Vec<BigInt>,
    pub rhs: BigInt,
    pub exponent: u32,
}

/// Outcome of [`solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    /// One solution; each unknown is reported at the precision to which every
    /// solution agrees with it.
    Solved(Vec<PadicResidue>),
    Inconsistent,
}

fn val(x: &BigInt, p: u64, cap: u32) -> u32 {
    int_valuation(x, p).finite().map_or(cap, |v| (v as u32).min(cap))
}

/// Solves a system in `n` unknowns at the prime `p`.
pub fn solve(p: u64, n: usize, rows: &[Congruence]) -> Solution {
    let e = rows.iter().map(|r| r.exponent).max().unwrap_or(0);
    if e == 0 {
        return Solution::Solved(vec![PadicResidue::zero(p, 0); n]);
    }
    let modulus = pow(p, e);
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let s = pow(p, e - r.exponent);
            (0..n)
                .map(|j| modulo(&(r.coeffs.get(j).cloned().unwrap_or_default() * &s), &modulus))
                .collect()
        })
        .collect();
    let mut b: Vec<BigInt> = rows
        .iter()
        .map(|r| modulo(&(&r.rhs * pow(p, e - r.exponent)), &modulus))
        .collect();
    // column transform: u = V w
    let mut v: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let nrows = a.len();
    let mut pivots = Vec::new();

    for s in 0..n.min(nrows) {
        let mut best: Option<(usize, usize, u32)> = None;
        for (r, row) in a.iter().enumerate().skip(s) {
            for (c, x) in row.iter().enumerate().skip(s) {
                let d = val(x, p, e);
                if d < e && best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((r, c, d));
                }
            }
        }
        let Some((r, c, d)) = best else { break };
        a.swap(s, r);
        b.swap(s, r);
        for row in a.iter_mut() {
            row.swap(s, c);
        }
        for row in v.iter_mut() {
            row.swap(s, c);
        }
        // normalize the pivot to p^d
        let pd = pow(p, d);
        let unit = &a[s][s] / &pd;
        let uinv = mod_inverse(&unit, &modulus).expect("pivot unit");
        for x in a[s].iter_mut() {
            *x = modulo(&(&*x * &uinv), &modulus);
        }
        b[s] = modulo(&(&b[s] * &uinv), &modulus);
        // clear the column
        for t in 0..nrows {
            if t == s || a[t][s].is_zero() {
                continue;
            }
            let f = &a[t][s] / &pd;
            for j in s..n {
                let sub = &f * &a[s][j];
                a[t][j] = modulo(&(&a[t][j] - sub), &modulus);
            }
            b[t] = modulo(&(&b[t] - &f * &b[s]), &modulus);
        }
        // clear the row by column operations
        for j in s + 1..n {
            if a[s][j].is_zero() {
                continue;
            }
            let g = &a[s][j] / &pd;
            for row in a.iter_mut() {
                let sub = &g * &row[s];
                row[j] = modulo(&(&row[j] - sub), &modulus);
            }
            for row in v.iter_mut() {
                let sub = &g * &row[s];
                row[j] = modulo(&(&row[j] - sub), &modulus);
            }
        }
        pivots.push(d);
    }

    let rank = pivots.len();
    for (s, &d) in pivots.iter().enumerate() {
        if val(&b[s], p, e) < d {
            return Solution::Inconsistent;
        }
    }
    if b.iter().skip(rank).any(|x| !x.is_zero()) {
        return Solution::Inconsistent;
    }

    let w: Vec<BigInt> = (0..n)
        .map(|s| if s < rank { &b[s] / pow(p, pivots[s]) } else { BigInt::zero() })
        .collect();
    let solution = (0..n)
        .map(|j| {
            let value = (0..n).fold(BigInt::zero(), |acc, t| acc + &v[j][t] * &w[t]);
            let precision = (0..n)
                .map(|t| {
                    let d = if t < rank { pivots[t] } else { e };
                    (val(&v[j][t], p, e) + e - d).min(e)
                })
                .min()
                .unwrap_or(e);
            PadicResidue::new(p, precision, value)
        })
        .collect();
    Solution::Solved(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn row(coeffs: &[i64], rhs: i64, exponent: u32) -> Congruence {
        Congruence { coeffs: coeffs.iter().map(|&c| int(c)).collect(), rhs: int(rhs), exponent }
    }

    #[test]
    fn unit_pivot_determines_fully() {
        // 3u = 6 mod 2^5
        let Solution::Solved(u) = solve(2, 1, &[row(&[3], 6, 5)]) else { panic!() };
        assert_eq!(u[0], PadicResidue::new(2, 5, int(2)));
    }

    #[test]
    fn non_unit_pivot_loses_precision() {
        // 4u = 8 mod 2^5: u = 2 mod 2^3
        let Solution::Solved(u) = solve(2, 1, &[row(&[4], 8, 5)]) else { panic!() };
        assert_eq!(u[0].precision(), 3);
        assert_eq!(u[0].value(), &int(2));
        assert_eq!(solve(2, 1, &[row(&[4], 2, 5)]), Solution::Inconsistent);
    }

    #[test]
    fn coupled_system() {
        // u + v = 1 mod 3^2, u - v = 3 mod 3^2  ->  u = 2, v = -1
        let Solution::Solved(u) = solve(3, 2, &[row(&[1, 1], 1, 2), row(&[1, -1], 3, 2)]) else {
            panic!()
        };
        assert_eq!(u[0], PadicResidue::new(3, 2, int(2)));
        assert_eq!(u[1], PadicResidue::new(3, 2, int(-1)));
    }

    #[test]
    fn zero_rows_and_free_unknowns() {
        let Solution::Solved(u) = solve(5, 2, &[row(&[1, 0], 4, 3), row(&[0, 0], 0, 1)]) else {
            panic!()
        };
        assert_eq!(u[0], PadicResidue::new(5, 3, int(4)));
        assert_eq!(u[1].precision(), 0);
        assert_eq!(solve(5, 1, &[row(&[0], 1, 1)]), Solution::Inconsistent);
        assert_eq!(solve(5, 0, &[row(&[], 25, 2)]), Solution::Solved(vec![]));
        assert_eq!(solve(5, 0, &[row(&[], 5, 2)]), Solution::Inconsistent);
    }
}
