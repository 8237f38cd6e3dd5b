mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kummer", version, about = "Moment congruences, Mom groups and KO/tmf orientation sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Truncation half-weight.
    #[arg(long = "K", global = true, default_value_t = 12)]
    pub k_max: u64,

    /// p-adic precision budget (digits).
    #[arg(long, global = true, default_value_t = 12)]
    pub precision: u32,

    /// Number of q-expansion terms.
    #[arg(long, global = true, default_value_t = 100)]
    pub terms: usize,

    /// Primes for precision budgets and sampled cross-checks (comma-separated).
    #[arg(long, global = true, value_delimiter = ',')]
    pub primes: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Checker {
    MomEuler,
    Mom0,
    KoSpin,
    KoString,
    Tmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Spin,
    String,
}

/// A sequence given inline or through a file.
#[derive(Debug, Clone, Args)]
pub struct SeqInput {
    /// Entries from the lowest weight up, e.g. "1,7,511" or "1/240,-1/504".
    #[arg(long)]
    pub seq: Option<String>,

    /// File with a JSON array, a JSON report holding the sequence, or plain text.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rows of the matrix Phi_m with diagonal moduli and prime sets.
    PhiMatrix {
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 4)]
        rows: u64,
    },
    /// Run one membership checker on a sequence.
    Verify {
        #[arg(value_enum)]
        checker: Checker,
        #[command(flatten)]
        input: SeqInput,
        /// Start half-weight (mom-euler, mom0).
        #[arg(long, default_value_t = 1)]
        m: u64,
    },
    /// Build a Mom^(0) sequence from Psi^(0) parameters.
    Psi0 {
        #[arg(long, default_value_t = 2)]
        m: u64,
        /// `lK=INT` or `lK@P=RESIDUE:PRECISION`; unset parameters are zero.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// tmf multipliers r = 1 + q from q in Mom^(0) (weights >= 4).
    Psi2 {
        #[command(flatten)]
        input: SeqInput,
        /// Build q by Psi^(0) (m = 2) from these parameters instead.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// q-expansion of the Eisenstein series G_k.
    Eisenstein {
        #[arg(long)]
        k: u64,
    },
    /// Check a KO characteristic sequence.
    CheckKo {
        #[arg(long, value_enum, default_value_t = VariantArg::String)]
        variant: VariantArg,
        #[command(flatten)]
        input: SeqInput,
    },
    /// Check tmf multipliers r_k (weights >= 4).
    CheckTmf {
        #[command(flatten)]
        input: SeqInput,
    },
    /// Decide whether a KO string sequence lifts to tmf.
    Lift {
        #[command(flatten)]
        input: SeqInput,
        /// Build the KO string sequence from lattice coordinates instead.
        #[arg(long)]
        lattice: Option<String>,
    },
    /// Extend string data to a p-local spin sequence with prescribed b_2.
    SpinExtend {
        #[arg(long)]
        p: u64,
        /// Target for b_2 as RESIDUE:PRECISION.
        #[arg(long)]
        b2: String,
        /// Lattice offsets for weights 4, 6, ...
        #[arg(long)]
        lattice: Option<String>,
    },
    /// Dump e_j, E_n and the congruence data C_p(k), c^(k,p).
    BasisDump {
        #[arg(long)]
        p: u64,
        /// Index of E_n to expand.
        #[arg(long)]
        n: Option<u64>,
        /// Half-weight for the congruence data.
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value_t = 1)]
        m: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(commands::run(&cli))
}
