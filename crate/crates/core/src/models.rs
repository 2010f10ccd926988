//! Calibrating the weighted sign against surveyed relations, and the two
//! baselines it is compared with.
//!
//! Three predictors are available per dyad:
//!
//! * [`PredictorKind::Phi`]: the two tails `P(X < A)` and `P(X > A)`. A linear
//!   model `r ~ a * P(X < A) + b * P(X > A) + c` recovers the weights of the
//!   signed network directly.
//! * [`PredictorKind::Threshold`]: the raw count `A`, i.e. one global
//!   interaction threshold.
//! * [`PredictorKind::Modularity`]: `A - k_out(v) * k_in(w) / m`, the observed
//!   count minus its configuration-model expectation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::digest::RowDigest;
use crate::ensemble::{dyad_marginals, PossibilityMatrix};
use crate::error::{Error, Result};
use crate::interaction::{InteractionGraph, RelationKind, RelationLabels};
use crate::phi::PhiCoefficients;
use crate::regression::{fit_linear, fit_logistic, fit_ordinal, sigmoid, LogisticOptions, OrdinalOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    Phi,
    Threshold,
    Modularity,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 3] = [
        PredictorKind::Phi,
        PredictorKind::Threshold,
        PredictorKind::Modularity,
    ];

    pub fn width(&self) -> usize {
        match self {
            PredictorKind::Phi => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PredictorKind::Phi => "phi",
            PredictorKind::Threshold => "threshold",
            PredictorKind::Modularity => "modularity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseKind {
    BinaryLogistic,
    ContinuousLinear,
    OrderedLogit { levels: u32 },
}

impl ResponseKind {
    pub fn for_relations(kind: RelationKind) -> Self {
        match kind {
            RelationKind::Binary => ResponseKind::BinaryLogistic,
            RelationKind::Continuous => ResponseKind::ContinuousLinear,
            RelationKind::Ordered { levels } => ResponseKind::OrderedLogit { levels },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub predictor: PredictorKind,
    pub response: ResponseKind,
    pub ridge: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Probability above which a binary prediction is positive.
    pub cutoff: f64,
}

impl FitSpec {
    pub fn new(predictor: PredictorKind, response: ResponseKind) -> Self {
        let (max_iterations, tolerance) = match response {
            ResponseKind::OrderedLogit { .. } => (2000, 1e-7),
            _ => (100, 1e-8),
        };
        Self {
            predictor,
            response,
            ridge: 0.0,
            max_iterations,
            tolerance,
            cutoff: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Error::InvalidConfig(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        if let ResponseKind::OrderedLogit { levels } = self.response {
            if levels < 3 {
                return Err(Error::InvalidConfig(format!(
                    "ordered responses need at least 3 levels, got {levels}"
                )));
            }
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(Error::InvalidConfig(format!("cutoff must be in (0, 1), got {}", self.cutoff)));
        }
        Ok(())
    }
}

/// Where negative examples for binary relations come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativePolicy {
    /// Every unlabeled pair of surveyed nodes is a negative.
    #[default]
    UnlabeledPairs,
    /// Only rows present in the relation file, with explicit zeros.
    LabeledOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingOptions {
    pub negatives: NegativePolicy,
    /// Merge `r[v][w]` and `r[w][v]`: binary by logical or, ordered by the
    /// higher level, continuous by the mean.
    pub symmetrize_labels: bool,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self {
            negatives: NegativePolicy::UnlabeledPairs,
            symmetrize_labels: true,
        }
    }
}

/// All predictors for one dyad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadFeatures {
    pub p_under: f64,
    pub p_over: f64,
    pub count: f64,
    pub modularity: f64,
}

impl DyadFeatures {
    pub fn select(&self, kind: PredictorKind) -> Vec<f64> {
        match kind {
            PredictorKind::Phi => vec![self.p_under, self.p_over],
            PredictorKind::Threshold => vec![self.count],
            PredictorKind::Modularity => vec![self.modularity],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub source: String,
    pub target: String,
    pub features: DyadFeatures,
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub kind: RelationKind,
    pub rows: Vec<TrainingRow>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn responses(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.response).collect()
    }

    pub fn features(&self, kind: PredictorKind) -> Features {
        Features {
            kind,
            rows: self.rows.iter().map(|r| r.features.select(kind)).collect(),
        }
    }

    pub fn subset(&self, indices: &[usize]) -> TrainingSet {
        TrainingSet {
            kind: self.kind,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn digest(&self) -> String {
        let mut d = RowDigest::new();
        for r in &self.rows {
            d.push_str(&r.source);
            d.push_str(&r.target);
            for x in [r.features.p_under, r.features.p_over, r.features.count, r.features.modularity, r.response] {
                d.push_f64(x);
            }
        }
        d.finish()
    }

    fn check_non_degenerate(&self) -> Result<()> {
        let distinct: BTreeSet<u64> = self.rows.iter().map(|r| r.response.to_bits()).collect();
        if distinct.len() < 2 {
            return Err(Error::DegenerateTraining(format!(
                "{} rows with {} distinct response value(s)",
                self.rows.len(),
                distinct.len()
            )));
        }
        Ok(())
    }
}

/// `mu[v][w] = A[v][w] - k_out(v) * k_in(w) / m` for all dyads of a graph.
///
/// On a symmetrically expanded graph `k_out = k_in` is the total degree and
/// `m` is twice the number of undirected interactions, so this is the usual
/// undirected modularity term `A - k_v * k_w / (2 m_u)`.
#[derive(Debug, Clone)]
pub struct ModularityScorer<'a> {
    graph: &'a InteractionGraph,
    k_out: Vec<u64>,
    k_in: Vec<u64>,
}

impl<'a> ModularityScorer<'a> {
    pub fn new(graph: &'a InteractionGraph) -> Result<Self> {
        if graph.edge_count() == 0 {
            return Err(Error::Undefined("modularity score needs m > 0".into()));
        }
        let d = graph.degrees();
        Ok(Self {
            graph,
            k_out: d.out,
            k_in: d.inc,
        })
    }

    pub fn score(&self, v: usize, w: usize) -> f64 {
        let m = self.graph.edge_count() as f64;
        self.graph.count(v, w) as f64 - (self.k_out[v] as f64 * self.k_in[w] as f64) / m
    }
}

pub fn modularity_score(g: &InteractionGraph, v: usize, w: usize) -> Result<f64> {
    Ok(ModularityScorer::new(g)?.score(v, w))
}

/// Features of a dyad on the analysis graph.
pub fn dyad_features(
    g: &InteractionGraph,
    xi: &PossibilityMatrix,
    scorer: &ModularityScorer<'_>,
    v: usize,
    w: usize,
) -> Result<DyadFeatures> {
    let d = dyad_marginals(xi, g, v, w)?;
    Ok(DyadFeatures {
        p_under: d.p_under,
        p_over: d.p_over,
        count: d.observed as f64,
        modularity: scorer.score(v, w),
    })
}

/// Pairs labeled relations with their dyad features.
///
/// Undirected graphs yield one row per unordered pair. Labels on nodes
/// outside the graph are skipped.
pub fn assemble_training_set(
    labels: &RelationLabels,
    g: &InteractionGraph,
    xi: &PossibilityMatrix,
    options: &TrainingOptions,
) -> Result<TrainingSet> {
    let surveyed: Vec<usize> = labels
        .surveyed()
        .iter()
        .filter_map(|id| g.index_of(id))
        .collect();
    if surveyed.is_empty() {
        return Err(Error::DegenerateTraining("no surveyed node is in the graph".into()));
    }
    let directed = g.is_directed();
    let kind = labels.kind();

    // (v, w) -> collected values, merged below.
    let mut values: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for (s, t, r) in labels.iter() {
        let (Some(v), Some(w)) = (g.index_of(s), g.index_of(t)) else {
            continue;
        };
        let key = if directed || v < w { (v, w) } else { (w, v) };
        values.entry(key).or_default().push(r);
        if directed && options.symmetrize_labels {
            values.entry((w, v)).or_default().push(r);
        }
    }
    let merge = |vals: &[f64]| -> f64 {
        match kind {
            RelationKind::Continuous => vals.iter().sum::<f64>() / vals.len() as f64,
            _ => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    };
    let mut responses: BTreeMap<(usize, usize), f64> = values
        .iter()
        .map(|(&k, vals)| {
            let r = if options.symmetrize_labels || vals.len() == 1 {
                merge(vals)
            } else {
                vals[0]
            };
            (k, r)
        })
        .collect();

    if kind == RelationKind::Binary && options.negatives == NegativePolicy::UnlabeledPairs {
        for &v in &surveyed {
            for &w in &surveyed {
                if v == w || (!directed && v > w) {
                    continue;
                }
                responses.entry((v, w)).or_insert(0.0);
            }
        }
    }

    let scorer = ModularityScorer::new(g)?;
    let rows = responses
        .into_iter()
        .map(|((v, w), response)| {
            Ok(TrainingRow {
                source: g.node_id(v).to_owned(),
                target: g.node_id(w).to_owned(),
                features: dyad_features(g, xi, &scorer, v, w)?,
                response,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let set = TrainingSet { kind, rows };
    set.check_non_degenerate()?;
    Ok(set)
}

/// Feature rows tagged with the predictor they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub kind: PredictorKind,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    pub separation: bool,
    pub ridge: f64,
}

/// Estimated model. For the `phi` predictor `slopes = [a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: FitSpec,
    pub intercept: Option<f64>,
    pub slopes: Vec<f64>,
    /// Ordered models only, strictly increasing.
    pub cutpoints: Vec<f64>,
    /// Intercept first when present, then slopes.
    pub std_errors: Vec<f64>,
    pub diagnostics: Diagnostics,
    pub training_rows: usize,
    pub training_digest: String,
}

impl FitResult {
    /// `(a, b, c)` when the model was fit on the two tails.
    pub fn phi_coefficients(&self) -> Option<PhiCoefficients> {
        if self.spec.predictor != PredictorKind::Phi {
            return None;
        }
        Some(PhiCoefficients {
            a: self.slopes[0],
            b: self.slopes[1],
            c: self.intercept.unwrap_or(0.0),
        })
    }

    fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.intercept.unwrap_or(0.0) + row.iter().zip(&self.slopes).map(|(x, b)| x * b).sum::<f64>()
    }
}

pub fn fit(spec: &FitSpec, training: &TrainingSet) -> Result<FitResult> {
    spec.validate()?;
    let compatible = matches!(
        (spec.response, training.kind),
        (ResponseKind::BinaryLogistic, RelationKind::Binary)
            | (ResponseKind::ContinuousLinear, RelationKind::Continuous)
    ) || matches!(
        (spec.response, training.kind),
        (ResponseKind::OrderedLogit { levels: a }, RelationKind::Ordered { levels: b }) if a == b
    ) || matches!(
        (spec.response, training.kind),
        (ResponseKind::BinaryLogistic, RelationKind::Ordered { .. })
    );
    if !compatible {
        return Err(Error::InvalidConfig(format!(
            "response {:?} cannot be fit on {:?} relations",
            spec.response, training.kind
        )));
    }
    training.check_non_degenerate()?;
    let x = training.features(spec.predictor).rows;
    let y = training.responses();
    let result = match spec.response {
        ResponseKind::BinaryLogistic => {
            if y.iter().any(|&r| r != 0.0 && r != 1.0) {
                return Err(Error::InvalidConfig("logistic response must be 0/1".into()));
            }
            let opts = LogisticOptions {
                ridge: spec.ridge,
                max_iterations: spec.max_iterations,
                tolerance: spec.tolerance,
                ..LogisticOptions::default()
            };
            let f = fit_logistic(&x, &y, &opts);
            FitResult {
                spec: *spec,
                intercept: Some(f.coefficients[0]),
                slopes: f.coefficients[1..].to_vec(),
                cutpoints: Vec::new(),
                std_errors: f.std_errors,
                diagnostics: Diagnostics {
                    iterations: f.iterations,
                    gradient_norm: f.gradient_norm,
                    converged: f.converged,
                    separation: f.separation,
                    ridge: f.ridge,
                },
                training_rows: training.len(),
                training_digest: training.digest(),
            }
        }
        ResponseKind::ContinuousLinear => {
            let f = fit_linear(&x, &y, spec.ridge);
            FitResult {
                spec: *spec,
                intercept: Some(f.coefficients[0]),
                slopes: f.coefficients[1..].to_vec(),
                cutpoints: Vec::new(),
                std_errors: f.std_errors,
                diagnostics: Diagnostics {
                    iterations: 1,
                    gradient_norm: 0.0,
                    converged: true,
                    separation: false,
                    ridge: spec.ridge,
                },
                training_rows: training.len(),
                training_digest: training.digest(),
            }
        }
        ResponseKind::OrderedLogit { levels } => {
            let classes: Vec<u32> = y.iter().map(|&r| r as u32).collect();
            let opts = OrdinalOptions {
                ridge: spec.ridge,
                max_iterations: spec.max_iterations,
                tolerance: spec.tolerance,
            };
            let f = fit_ordinal(&x, &classes, levels, &opts);
            FitResult {
                spec: *spec,
                intercept: None,
                slopes: f.slopes,
                cutpoints: f.cutpoints,
                std_errors: Vec::new(),
                diagnostics: Diagnostics {
                    iterations: f.iterations,
                    gradient_norm: f.gradient_norm,
                    converged: f.converged,
                    separation: false,
                    ridge: spec.ridge,
                },
                training_rows: training.len(),
                training_digest: training.digest(),
            }
        }
    };
    if !result.diagnostics.converged {
        log::warn!(
            "{} fit did not converge after {} iterations (gradient norm {:.3e})",
            spec.predictor.name(),
            result.diagnostics.iterations,
            result.diagnostics.gradient_norm
        );
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Prediction {
    Probability { p: f64, class: u32 },
    Ordered { eta: f64, class: u32 },
    Value { value: f64 },
}

impl Prediction {
    pub fn class(&self) -> Option<u32> {
        match *self {
            Prediction::Probability { class, .. } | Prediction::Ordered { class, .. } => Some(class),
            Prediction::Value { .. } => None,
        }
    }

    /// Probability, linear predictor or fitted value.
    pub fn score(&self) -> f64 {
        match *self {
            Prediction::Probability { p, .. } => p,
            Prediction::Ordered { eta, .. } => eta,
            Prediction::Value { value } => value,
        }
    }
}

pub fn predict(fit: &FitResult, features: &Features) -> Result<Vec<Prediction>> {
    if features.kind != fit.spec.predictor {
        return Err(Error::FeatureMismatch {
            expected: fit.spec.predictor.name().into(),
            found: features.kind.name().into(),
        });
    }
    let width = fit.spec.predictor.width();
    features
        .rows
        .iter()
        .map(|row| {
            if row.len() != width {
                return Err(Error::FeatureMismatch {
                    expected: format!("{width} columns"),
                    found: format!("{} columns", row.len()),
                });
            }
            let eta = fit.linear_predictor(row);
            Ok(match fit.spec.response {
                ResponseKind::BinaryLogistic => {
                    let p = sigmoid(eta);
                    Prediction::Probability {
                        p,
                        class: u32::from(p > fit.spec.cutoff),
                    }
                }
                ResponseKind::ContinuousLinear => Prediction::Value { value: eta },
                ResponseKind::OrderedLogit { .. } => Prediction::Ordered {
                    eta,
                    class: 1 + fit.cutpoints.iter().filter(|&&t| t < eta).count() as u32,
                },
            })
        })
        .collect()
}
