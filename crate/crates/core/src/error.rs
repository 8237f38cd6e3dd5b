use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{value} is not {p}-integral")]
    NotPIntegral { p: u64, value: String },

    #[error("moduli {0} and {1} are not coprime")]
    ModuliNotCoprime(String, String),

    #[error("measures are incompatible: {0}")]
    MeasureMismatch(String),

    /// The total mass obstructs solving `(id - c_*) mu = mu_c`.
    #[error("not in the image of id - c_*: total mass {0} is nonzero")]
    NonzeroMass(String),

    #[error("{c} does not generate (Z/{p}^{level})^*/{{+-1}}")]
    NotGenerator { c: String, p: u64, level: u32 },

    #[error("insufficient precision at p = {p}: need {needed} digits, have {have}")]
    InsufficientPrecision { p: u64, needed: u32, have: u32 },

    /// Exact division failed in the recursive inversion of Phi_m at lattice index `index`.
    #[error("sequence is not in Mom^Euler: division fails at lattice index {index}")]
    NotInMomEuler { index: usize },

    #[error("sequence is not in Mom^(0): {0}")]
    NotInMom0(String),

    #[error("not in the zeta ideal at p = {p}: weight {weight} has valuation deficit {deficit}")]
    NotInZetaIdeal { p: u64, weight: u64, deficit: i64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
