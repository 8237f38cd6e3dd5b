//! Exact computations with p-adic measures on `Z_p^*/{+-1}`: phi-adic digit
//! bases, the moment groups `Mom^Euler` and `Mom^(0)` with their explicit
//! parametrizations, and the characteristic sequences of multiplicative KO
//! and tmf orientations.

pub mod basis;
pub mod digits;
pub mod error;
pub mod exact;
pub mod measures;
pub mod momgroups;
pub mod orientations;
pub mod poly;
pub mod report;
pub mod seq;
pub mod zp_linear;

pub use basis::{basis_data, basis_rank_check, big_e_poly, c_modulus, e_poly, BasisData};
pub use digits::{phi_expand, PhiDigits};
pub use error::{Error, Result};
pub use exact::{
    bernoulli, crt_solve, padic_valuation, PadicResidue, ProfiniteResidue, Rational, Valuation,
};
pub use measures::{check_bp, check_bp_tilde, regularize, CosetMeasure};
pub use momgroups::{
    mom0_check, mom_euler_check, phi_apply, phi_invert, phi_matrix, psi0_apply, psi0_invert,
    Mom0Witness, PhiMatrix, PrecisionBudget, Psi0Params,
};
pub use orientations::{
    cusp_evaluate, eisenstein, hecke_tp, ko_check, ko_from_lattice, lift_to_tmf, psi2_apply,
    spin_extend, tmf_check, KOSeq, LiftOutcome, ObstructionReport, QExpansion, TmfSeq, Variant,
};
pub use poly::PolyQ;
pub use report::{CheckReport, Status, SCHEMA_VERSION};
pub use seq::EvenSeq;
