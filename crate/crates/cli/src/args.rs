use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phinet::interaction::RelationKind;
use phinet::models::{NegativePolicy, PredictorKind};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "phinet", version, about = "Infer weighted signed networks from interaction counts")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on standard error; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an edge list and write it back in normalized form.
    Ingest(IngestArgs),
    /// Per-dyad tail probabilities under the hypergeometric null model.
    Marginals(MarginalsArgs),
    /// Calibrate a predictor against surveyed relations.
    Fit(FitArgs),
    /// Write the signed network for given coefficients.
    Infer(InferArgs),
    /// Cross-validate one predictor.
    Evaluate(EvaluateArgs),
    /// Evaluate phi, threshold and modularity on identical splits.
    Compare(EvaluateArgs),
    /// Binomial homophily test on a signed network.
    Homophily(HomophilyArgs),
    /// Triad importance within a group.
    Triads(TriadsArgs),
    /// Generate a synthetic community.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Marginals(_) => "marginals",
            Command::Fit(_) => "fit",
            Command::Infer(_) => "infer",
            Command::Evaluate(_) => "evaluate",
            Command::Compare(_) => "compare",
            Command::Homophily(_) => "homophily",
            Command::Triads(_) => "triads",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    /// Edge list with columns source,target[,timestamp][,weight].
    #[arg(long)]
    pub graph: PathBuf,

    /// Treat rows as directed interactions.
    #[arg(long)]
    pub directed: bool,

    /// Keep only events with timestamp >= this (epoch seconds).
    #[arg(long, requires = "window_end")]
    pub window_start: Option<i64>,

    /// Keep only events with timestamp < this.
    #[arg(long, requires = "window_start")]
    pub window_end: Option<i64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Let dyads (v, v) hold balls in the urn.
    #[arg(long)]
    pub include_diagonal: bool,

    /// Keep directed input directed instead of using A + A^T.
    #[arg(long)]
    pub directed_phi: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MarginalsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_relation(s: &str) -> Result<RelationKind, String> {
    match s {
        "binary" => Ok(RelationKind::Binary),
        "continuous" => Ok(RelationKind::Continuous),
        _ => {
            let levels = s
                .strip_prefix("ordered:")
                .and_then(|k| k.parse::<u32>().ok())
                .ok_or_else(|| format!("expected binary, continuous or ordered:K, got `{s}`"))?;
            if levels < 3 {
                return Err(format!("ordered relations need K >= 3, got {levels}"));
            }
            Ok(RelationKind::Ordered { levels })
        }
    }
}

fn parse_coeffs(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c] = parts[..] else {
        return Err(format!("expected a,b,c, got `{s}`"));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok([num(a)?, num(b)?, num(c)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Negatives {
    /// Unlabeled pairs of surveyed nodes are negatives.
    Unlabeled,
    /// Only rows of the label file are used.
    Labeled,
}

impl From<Negatives> for NegativePolicy {
    fn from(n: Negatives) -> Self {
        match n {
            Negatives::Unlabeled => NegativePolicy::UnlabeledPairs,
            Negatives::Labeled => NegativePolicy::LabeledOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Phi,
    Threshold,
    Modularity,
}

impl From<Predictor> for PredictorKind {
    fn from(p: Predictor) -> Self {
        match p {
            Predictor::Phi => PredictorKind::Phi,
            Predictor::Threshold => PredictorKind::Threshold,
            Predictor::Modularity => PredictorKind::Modularity,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LabelArgs {
    /// Relation file with columns source,target,relation.
    #[arg(long)]
    pub labels: PathBuf,

    /// binary, continuous or ordered:K.
    #[arg(long, default_value = "binary", value_parser = parse_relation)]
    pub relation: RelationKind,

    #[arg(long, value_enum, default_value_t = Negatives::Unlabeled)]
    pub negatives: Negatives,

    /// Use r[v][w] and r[w][v] as reported instead of merging them.
    #[arg(long)]
    pub no_symmetrize_labels: bool,

    /// Ridge penalty on the slopes.
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,

    /// Probability cutoff for binary predictions.
    #[arg(long, default_value_t = 0.5)]
    pub cutoff: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub labels: LabelArgs,

    #[arg(long, value_enum, default_value_t = Predictor::Phi)]
    pub predictor: Predictor,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct InferArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Use a = 1, b = -1, c = 0 (the default when no coefficients are given).
    #[arg(long, conflicts_with_all = ["fit", "coeffs"])]
    pub default_coeffs: bool,

    /// Coefficients from a `fit --predictor phi` result.
    #[arg(long, conflicts_with = "coeffs")]
    pub fit: Option<PathBuf>,

    /// Explicit coefficients as a,b,c.
    #[arg(long, value_parser = parse_coeffs, allow_hyphen_values = true)]
    pub coeffs: Option<[f64; 3]>,

    /// Signed network CSV; a `.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub labels: LabelArgs,

    /// Ignored by `compare`, which runs every predictor.
    #[arg(long, value_enum, default_value_t = Predictor::Phi)]
    pub predictor: Predictor,

    #[arg(long, default_value_t = 5, conflicts_with_all = ["holdout", "in_sample"])]
    pub folds: usize,

    /// Single train/test split with this test fraction.
    #[arg(long, conflicts_with = "in_sample")]
    pub holdout: Option<f64>,

    /// Train and test on all rows.
    #[arg(long)]
    pub in_sample: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub no_stratify: bool,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SignedArgs {
    /// Signed network written by `infer`.
    #[arg(long)]
    pub signed: PathBuf,

    /// Node attribute file with columns node,attr1,attr2,...
    #[arg(long)]
    pub attributes: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct HomophilyArgs {
    #[command(flatten)]
    pub input: SignedArgs,

    #[arg(long)]
    pub attribute: String,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TriadsArgs {
    #[command(flatten)]
    pub input: SignedArgs,

    /// Attribute that defines groups.
    #[arg(long)]
    pub group_by: String,

    /// Group value; all groups are reported when omitted.
    #[arg(long)]
    pub group: Option<String>,

    /// Only triples containing this node.
    #[arg(long, conflicts_with = "excluding")]
    pub involving: Option<String>,

    /// Only triples without this node.
    #[arg(long)]
    pub excluding: Option<String>,

    /// Only count triples whose dyads all interacted in this edge list.
    #[arg(long)]
    pub interacting: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Generator settings as JSON; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Overrides the seed of the configuration.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Use beta_positive = beta_negative = 1.
    #[arg(long)]
    pub null: bool,

    /// Receives edges.csv, relations.csv, groups.csv, planted.csv and config.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}
