use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::exact::{rat_int, Rational};

/// Dense polynomial over Q, constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyQ {
    coeffs: Vec<Rational>,
}

impl PolyQ {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `X^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        Self { coeffs }
    }

    pub fn x() -> Self {
        Self::monomial(1)
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiplication by `X^n`.
    pub fn shift(&self, n: usize) -> Self {
        if self.coeffs.is_empty() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); n];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    pub fn pow(&self, e: u64) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_int(&self, x: i64) -> Rational {
        self.eval(&rat_int(x.into()))
    }
}

impl Add for &PolyQ {
    type Output = PolyQ;
    fn add(self, rhs: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &PolyQ {
    type Output = PolyQ;
    fn sub(self, rhs: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &PolyQ {
    type Output = PolyQ;
    fn mul(self, rhs: &PolyQ) -> PolyQ {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return PolyQ::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyQ::new(out)
    }
}

impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*X")?,
                _ => write!(f, "({c})*X^{i}")?,
            }
        }
        Ok(())
    }
}

/// Serialized as the coefficient list, constant term first, each as "p/q".
impl Serialize for PolyQ {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|c| c.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn arithmetic_and_eval() {
        let p = PolyQ::new(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]);
        let q = &p * &p;
        assert_eq!(q.degree(), Some(4));
        assert_eq!(q.eval_int(3), rat(64, 1));
        assert!(q.is_even());
        assert_eq!((&q - &q).degree(), None);
        assert_eq!(p.shift(2).coeff(4), rat(1, 1));
        assert_eq!(PolyQ::x().pow(3), PolyQ::monomial(3));
    }
}
