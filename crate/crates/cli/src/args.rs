use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gapcert", version, about = "Spectral gap certificates for frustration-free Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Model file checks.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Spectral gap sweep over system sizes.
    Gap(GapArgs),
    /// Overlap quantity δ(A,B), the δ_k table or the overlap curve.
    Delta(DeltaArgs),
    /// Numerical checks of the operator inequalities.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Recursion lower bound on the gap.
    Certify(CertifyArgs),
    /// Closed forms for product vacua with boundary states.
    Pvbs {
        #[command(subcommand)]
        action: PvbsAction,
    },
    /// Finite-size thresholds and comparison with measured gaps.
    Threshold(ThresholdArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Builtin name (product, heisenberg_fm, aklt) or path to a model JSON file.
    #[arg(long)]
    pub model: String,
    /// Lattice dimension for builtin models.
    #[arg(long = "lattice-dim", default_value_t = 1)]
    pub lattice_dim: usize,
    /// Largest Hilbert space dimension allowed; defaults to $GAPCERT_MAX_DIM or 2^20.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct RegionArgs {
    /// Box `[0, n)` per axis.
    #[arg(long, conflicts_with = "region")]
    pub sites: Option<i64>,
    /// Box as `lo..hi` per axis, comma separated, bounds inclusive.
    #[arg(long)]
    pub region: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    #[arg(long = "A")]
    pub a: String,
    #[arg(long = "B")]
    pub b: String,
}

#[derive(Subcommand, Debug)]
pub enum ModelAction {
    /// Projector and frustration-freeness checks on a region.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        region: RegionArgs,
        /// Kernel tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
pub struct GapArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sizes as `a..b` (inclusive) or a comma separated list.
    #[arg(long)]
    pub sizes: String,
    /// Kernel tolerance; the solver default when absent.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "A", requires = "b")]
    pub a: Option<String>,
    #[arg(long = "B", requires = "a")]
    pub b: Option<String>,
    /// Compute the δ_k table up to this level.
    #[arg(long, conflicts_with_all = ["a", "curve"])]
    pub k_max: Option<usize>,
    /// Schedule for the table: k2, cbrt or power:ε.
    #[arg(long, default_value = "k2")]
    pub schedule: String,
    /// Maximize over every fitting frame instead of the canonical one.
    #[arg(long)]
    pub frames: bool,
    /// Compute the restricted overlap curve δ(d) for d = 1..d_max.
    #[arg(long, conflicts_with = "a")]
    pub curve: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub max_sites: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// E(Lφ) <= g² DL(φ) and the ‖LP^⊥‖ corollary.
    Dl(SampledArgs),
    /// DL(φ) <= 4 E(φ).
    Converse(SampledArgs),
    /// DL <= Var <= DL/(1 − ‖LP^⊥‖²) and its tightness.
    Sandwich(SampledArgs),
    /// The γ pencil and the gap bound (1 − γ)/4.
    Gamma {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        region: RegionArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quasi-factorization of P_{A∪B}^⊥.
    Qf {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Projector inequality on random projector pairs.
    Projineq {
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// δ(A,B) <= (1 + λ/g²)^{−l/2}.
    Gapdelta {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// L^q = M_A M_B and the norm bounds of the splitting.
    Split {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
pub struct SampledArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// δ model: exponential:c=..,alpha=.., polynomial:c=..,alpha=.., const:v, pvbs:λ1,.. or table:δ1,..
    #[arg(long)]
    pub delta: String,
    #[arg(long, default_value = "k2")]
    pub schedule: String,
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    /// Starting level; the smallest level after which every δ_j < 1/2 when absent.
    #[arg(long)]
    pub k0: Option<usize>,
    /// Lattice dimension.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Levels multiplied out explicitly before the tail bound.
    #[arg(long, default_value_t = gapcert::certify::DEFAULT_EXPLICIT_LEVELS)]
    pub levels: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum PvbsAction {
    /// Closed-form δ(A,B) for boxes.
    Delta {
        /// λ_j per axis, comma separated.
        #[arg(long)]
        lambda: String,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Case bound from coordinate lengths of A∩B, A and B along the cut axis.
    Bound {
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        la: usize,
        #[arg(long)]
        lb: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recursion bound with δ(l) = λ_*^l/(1 − λ_*²).
    Certify {
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value = "k2")]
        schedule: String,
        #[arg(long, default_value_t = 1.0)]
        lambda0: f64,
        #[arg(long)]
        k0: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// Lattice kind: chain, hexagonal, square or other.
    #[arg(long, default_value = "chain")]
    pub lattice: String,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Measured gaps as `n:gap` pairs, comma separated.
    #[arg(long, conflicts_with = "model")]
    pub gaps: Option<String>,
    /// Compute the gaps from a model instead.
    #[arg(long, requires = "sizes")]
    pub model: Option<String>,
    #[arg(long = "lattice-dim", default_value_t = 1)]
    pub lattice_dim: usize,
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Report only the reference table at this size.
    #[arg(long, conflicts_with_all = ["gaps", "model"])]
    pub n: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
