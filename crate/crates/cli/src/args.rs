use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "polyprod",
    version,
    about = "Exact and Monte Carlo experiments on products of polynomial values"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Degree, root multiplicity, kernel, discriminant and thresholds of P.
    Analyze(AnalyzeArgs),
    /// Exact counts A = #{prod P(x_i) = prod P(y_i)} over a grid of N.
    Count(CountArgs),
    /// Root-count, divisibility, recursion and large-gcd bound batteries.
    Bounds(BoundsArgs),
    /// Points on a P(y) = b P(x), linear factor search and the averaged gcd count.
    Curves(CurvesArgs),
    /// Monte Carlo moments of sum f(P(n)) for a Steinhaus f.
    Rmf(RmfArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Polynomial, either `c0,c1,...` or an expression in x such as `x*(x+1)`.
    #[arg(long)]
    pub poly: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Comma-separated, strictly increasing.
    #[arg(long = "N-grid", value_delimiter = ',')]
    pub n_grid: Vec<u64>,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "N-grid", value_delimiter = ',', default_values_t = [100, 1000])]
    pub n_grid: Vec<u64>,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Defaults to floor(N^(1/6)).
    #[arg(long)]
    pub lambda: Option<u64>,
    /// Smallest y sampled for z = P(y); defaults to floor(M(P) N^(1/4)).
    #[arg(long = "M")]
    pub m: Option<u64>,
    /// Stand-in for the implicit constant, an integer or fraction.
    #[arg(long = "C", default_value = "1")]
    pub c: String,
    #[arg(long = "l-max", default_value_t = 5000)]
    pub l_max: u64,
    #[arg(long = "z-max", default_value_t = 2000)]
    pub z_max: u64,
    /// Largest N for the enumerated recursion check.
    #[arg(long = "recursion-max", default_value_t = 20)]
    pub recursion_max: u64,
    /// Number of y values sampled per N for the large-gcd report.
    #[arg(long, default_value_t = 3)]
    pub samples: u64,
    /// Largest b in the linear factor search over 1 <= a < b.
    #[arg(long = "ab-max", default_value_t = 10)]
    pub ab_max: u64,
}

#[derive(Args, Debug)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "N", default_value_t = 100)]
    pub n: u64,
    #[arg(long = "ab-max", default_value_t = 10)]
    pub ab_max: u64,
    /// Defaults to floor(N^(1/6)) per grid point.
    #[arg(long)]
    pub lambda: Option<u64>,
    /// Grid for the averaged gcd count; defaults to the single value N.
    #[arg(long = "N-grid", value_delimiter = ',')]
    pub n_grid: Vec<u64>,
}

#[derive(Args, Debug)]
pub struct RmfArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "N", default_value_t = 100)]
    pub n: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub k: Vec<u32>,
    #[arg(long, default_value_t = 20000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Exact mixed moments `a:b`, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = ["1:2".to_string()])]
    pub mixed: Vec<String>,
    #[arg(long = "mixed-N", default_value_t = 10)]
    pub mixed_n: u64,
}
