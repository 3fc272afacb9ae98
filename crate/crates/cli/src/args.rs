use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "extint", version, about = "Extremes of interpoint distances and pair-indexed random walks")]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that shape where and how results are written. None of them enter
/// the manifest, so reports do not depend on them.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Omit wall-clock fields so identical runs give identical bytes.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Worker cap; 0 uses all cores.
    #[arg(long, global = true, env = "EXTINT_THREADS")]
    pub threads: Option<usize>,
    /// Embed per-replication samples in the JSON report.
    #[arg(long, global = true)]
    pub samples: bool,
    /// Also write per-replication samples as CSV.
    #[arg(long, global = true)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Centering and scaling constants for the maximum squared distance.
    Normalize(NormalizeArgs),
    /// Extremes of the pairwise distances of a data matrix.
    Maxdist(MaxdistArgs),
    /// Max-distance test for equality of means.
    TestMeans(TestMeansArgs),
    /// Largest off-diagonal sample covariance entry.
    CovMax(CovMaxArgs),
    /// Chen-Stein Poisson approximation bounds.
    Chenstein(ChensteinArgs),
    /// Closed-form and numerical reference values.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    /// Preset entry law: gaussian, rademacher, uniform, threepoint5.
    #[arg(long, conflicts_with_all = ["m4", "m3", "m6", "tail"])]
    pub profile: Option<String>,
    /// Fourth moment of the entries.
    #[arg(long)]
    pub m4: Option<f64>,
    /// Third moment of the entries.
    #[arg(long, requires = "m4")]
    pub m3: Option<f64>,
    /// Sixth moment of the entries.
    #[arg(long, requires = "m4")]
    pub m6: Option<f64>,
    /// Tail class: `poly:S`, `subexp:R[:ETA]` or `bounded:K`.
    #[arg(long, requires = "m4")]
    pub tail: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Each row holds one of the p pair-indexed vectors.
    Rows,
    /// Each column holds one of the p pair-indexed vectors.
    Cols,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// CSV file of numbers.
    #[arg(long)]
    pub input: PathBuf,
    /// Skip the first line.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct NormalizeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct MaxdistArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Layout::Rows)]
    pub layout: Layout,
    /// Exponent of the distance sum; 2 gives squared Euclidean distances.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Report extremes on the root scale instead of the sum scale.
    #[arg(long)]
    pub root: bool,
    /// Number of largest pairs to list.
    #[arg(long, default_value_t = 0)]
    pub top: usize,
    /// Entry law for normalizing when q != 2.
    #[arg(long)]
    pub dist: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TestMeansArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Layout::Rows)]
    pub layout: Layout,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Use the pooled fourth-moment estimate from the data.
    #[arg(long, conflicts_with_all = ["profile", "m4"])]
    pub estimate_m4: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CovMaxArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Layout::Cols)]
    pub layout: Layout,
    /// Equicorrelation; enables the normalized statistic.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Limit of rho sqrt(log p): 0, a positive value, or inf.
    #[arg(long, requires = "rho")]
    pub lambda_hint: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ChensteinArgs {
    #[arg(long)]
    pub p: usize,
    /// Exceedance probability of one pair.
    #[arg(long, required_unless_present = "rho", requires = "joint", conflicts_with_all = ["rho", "x"])]
    pub marginal: Option<f64>,
    /// Joint exceedance probability of two pairs sharing an index.
    #[arg(long, requires = "marginal")]
    pub joint: Option<f64>,
    /// Gaussian pair field correlation; computes the probabilities at threshold x.
    #[arg(long, requires = "x")]
    pub rho: Option<f64>,
    /// Threshold on the normalized scale.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub b3: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCommand {
    /// P(Z1 > t, Z2 > t) for a standard bivariate normal with correlation rho.
    Orthant {
        #[arg(long)]
        rho: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Large-t asymptote of the equicorrelated minimum tail.
    Asymptote {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        t: f64,
    },
    /// Exact and limiting first two moments of the exceedance count.
    Vmoments {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
    },
    /// Terms of the Gumbel convergence-rate bound.
    Rate {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: f64,
    },
    /// The d-sequences for p points.
    Dseq {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true, requires = "n")]
        y: Option<f64>,
    },
    /// Upper-alpha quantile of the standard Gumbel law.
    GumbelQuantile {
        #[arg(long)]
        alpha: f64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Run even when p^2 n reps exceeds the desk-scale cap.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct WalkSimArgs {
    /// Entry law: gaussian, rademacher, uniform, threepoint5.
    #[arg(long, default_value = "gaussian")]
    pub dist: String,
    /// interpoint, sqdiff, product or absq:Q.
    #[arg(long, default_value = "interpoint")]
    pub stat: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulateCommand {
    /// Normalized maximum against the Gumbel law.
    Gumbel(WalkSimArgs),
    /// Joint law of the normalized maximum and minimum of a walk.
    Joint(WalkSimArgs),
    /// max / sqrt(log p) for walks or the Gaussian pair field.
    FirstOrder(FirstOrderArgs),
    /// Exceedance counts above thresholds.
    Pointprocess {
        #[command(flatten)]
        #[serde(flatten)]
        walk: WalkSimArgs,
        /// Thresholds x; counts are taken in (x, inf).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        x: Vec<f64>,
    },
    /// The k largest normalized values.
    Orderstats {
        #[command(flatten)]
        #[serde(flatten)]
        walk: WalkSimArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Exceedance count moments of the Gaussian pair field.
    Vmoment {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[command(flatten)]
        #[serde(flatten)]
        sim: SimArgs,
    },
    /// Largest off-diagonal covariance entry under equicorrelation.
    CovRegime {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        lambda_hint: Option<f64>,
        #[command(flatten)]
        #[serde(flatten)]
        sim: SimArgs,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct FirstOrderArgs {
    /// Simulate the Gaussian pair field with this correlation instead of a walk.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value = "gaussian")]
    pub dist: String,
    #[arg(long, default_value = "interpoint")]
    pub stat: String,
    #[arg(long, required_unless_present = "rho")]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}
