//! Fixtures shared by the benchmarks.

use num_bigint::BigInt;

use kummer_core::momgroups::{psi0_apply, Psi0Params};
use kummer_core::seq::EvenSeq;

/// A `Mom^(0)_{>=4}` sequence up to half-weight `k_max` with small parameters.
pub fn sample_mom0(k_max: u64) -> EvenSeq<BigInt> {
    let high: Vec<BigInt> = (2..=k_max).map(|k| BigInt::from(3 * k as i64 - 11)).collect();
    let params = Psi0Params::from_integers(2, &[BigInt::from(17)], &high, k_max);
    psi0_apply(&params, k_max).expect("parameters embedded at full precision")
}
