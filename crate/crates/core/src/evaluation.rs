//! Splits, cross-validation and the metrics used to compare predictors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::RelationKind;
use crate::models::{fit, predict, FitSpec, PredictorKind, ResponseKind, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SplitPolicy {
    InSample,
    Holdout { fraction: f64, seed: u64 },
    KFold { folds: usize, seed: u64 },
}

impl SplitPolicy {
    pub fn kfold(folds: usize, seed: u64) -> Self {
        SplitPolicy::KFold { folds, seed }
    }
}

impl Default for SplitPolicy {
    fn default() -> Self {
        SplitPolicy::KFold { folds: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_key(r: f64) -> String {
    format!("{r}")
}

/// Train/test index sets. Stratification groups rows by exact response
/// value, so it only makes sense for binary and ordered responses.
pub fn split(responses: &[f64], policy: &SplitPolicy, stratify: bool) -> Result<Vec<Fold>> {
    let n = responses.len();
    if n == 0 {
        return Err(Error::InvalidConfig("cannot split an empty set".into()));
    }
    let groups: Vec<Vec<usize>> = if stratify {
        let mut by_class: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, r) in responses.iter().enumerate() {
            by_class.entry(r.to_bits()).or_default().push(i);
        }
        by_class.into_values().collect()
    } else {
        vec![(0..n).collect()]
    };

    match *policy {
        SplitPolicy::InSample => Ok(vec![Fold {
            train: (0..n).collect(),
            test: (0..n).collect(),
        }]),
        SplitPolicy::Holdout { fraction, seed } => {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::InvalidConfig(format!("holdout fraction must be in (0, 1), got {fraction}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut test = Vec::new();
            let mut train = Vec::new();
            for mut g in groups {
                if stratify && g.len() < 2 {
                    return Err(Error::TooFewForStratification {
                        class: class_key(responses[g[0]]),
                        count: g.len(),
                        folds: 2,
                    });
                }
                g.shuffle(&mut rng);
                let k = ((g.len() as f64 * fraction).round() as usize).clamp(1, g.len() - 1);
                test.extend_from_slice(&g[..k]);
                train.extend_from_slice(&g[k..]);
            }
            test.sort_unstable();
            train.sort_unstable();
            Ok(vec![Fold { train, test }])
        }
        SplitPolicy::KFold { folds, seed } => {
            if folds < 2 || folds > n {
                return Err(Error::InvalidConfig(format!("need 2 <= folds <= {n}, got {folds}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); folds];
            // Dealing continues across classes so fold sizes differ by at most one.
            let mut next = 0;
            for mut g in groups {
                if stratify && g.len() < folds {
                    return Err(Error::TooFewForStratification {
                        class: class_key(responses[g[0]]),
                        count: g.len(),
                        folds,
                    });
                }
                g.shuffle(&mut rng);
                for i in g {
                    assigned[next].push(i);
                    next = (next + 1) % folds;
                }
            }
            Ok((0..folds)
                .map(|f| {
                    let mut test = assigned[f].clone();
                    test.sort_unstable();
                    let mut train: Vec<usize> = (0..folds)
                        .filter(|&o| o != f)
                        .flat_map(|o| assigned[o].iter().copied())
                        .collect();
                    train.sort_unstable();
                    Fold { train, test }
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn sensitivity(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    pub fn specificity(&self) -> Option<f64> {
        let n = self.tn + self.fp;
        (n > 0).then(|| self.tn as f64 / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub test_rows: usize,
    pub balanced_accuracy: Option<f64>,
    pub rmse: Option<f64>,
    pub converged: bool,
    /// Intercept (when present) followed by slopes.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split: SplitPolicy,
    pub stratified: bool,
    pub rows: usize,
    pub confusion: Option<Confusion>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub r_squared: Option<f64>,
    /// Set when the truth has zero variance.
    pub r_squared_undefined: bool,
    pub rmse: Option<f64>,
    pub folds: Vec<FoldSummary>,
}

impl EvalReport {
    fn empty(rows: usize) -> Self {
        EvalReport {
            split: SplitPolicy::InSample,
            stratified: false,
            rows,
            confusion: None,
            sensitivity: None,
            specificity: None,
            balanced_accuracy: None,
            r_squared: None,
            r_squared_undefined: false,
            rmse: None,
            folds: Vec::new(),
        }
    }

    /// Standard deviation of the per-fold balanced accuracies.
    pub fn fold_spread(&self) -> Option<f64> {
        let v: Vec<f64> = self.folds.iter().filter_map(|f| f.balanced_accuracy).collect();
        if v.len() < 2 {
            return None;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        Some((v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt())
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b || a == 0 {
        return Err(Error::InvalidConfig(format!(
            "metrics need equal non-empty inputs, got {a} predictions and {b} truths"
        )));
    }
    Ok(())
}

pub fn classification_metrics(predicted: &[bool], truth: &[bool]) -> Result<EvalReport> {
    check_lengths(predicted.len(), truth.len())?;
    let mut c = Confusion::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let sens = c.sensitivity();
    let spec = c.specificity();
    let mut report = EvalReport::empty(truth.len());
    report.confusion = Some(c);
    report.sensitivity = sens;
    report.specificity = spec;
    report.balanced_accuracy = sens.zip(spec).map(|(a, b)| (a + b) / 2.0);
    Ok(report)
}

pub fn regression_metrics(predicted: &[f64], truth: &[f64]) -> Result<EvalReport> {
    check_lengths(predicted.len(), truth.len())?;
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = predicted.iter().zip(truth).map(|(p, t)| (t - p).powi(2)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let mut report = EvalReport::empty(truth.len());
    report.rmse = Some((ss_res / n).sqrt());
    if ss_tot > 0.0 {
        report.r_squared = Some(1.0 - ss_res / ss_tot);
    } else {
        report.r_squared_undefined = true;
    }
    Ok(report)
}

/// Ordered classes: balanced accuracy is the mean recall over the levels
/// present in the truth; R² and RMSE are taken on the level numbers.
pub fn ordinal_metrics(predicted: &[u32], truth: &[u32]) -> Result<EvalReport> {
    check_lengths(predicted.len(), truth.len())?;
    let mut per_level: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        let e = per_level.entry(t).or_default();
        e.1 += 1;
        if p == t {
            e.0 += 1;
        }
    }
    let pf: Vec<f64> = predicted.iter().map(|&x| x as f64).collect();
    let tf: Vec<f64> = truth.iter().map(|&x| x as f64).collect();
    let mut report = regression_metrics(&pf, &tf)?;
    if per_level.len() >= 2 {
        let recall: f64 = per_level.values().map(|&(hit, n)| hit as f64 / n as f64).sum();
        report.balanced_accuracy = Some(recall / per_level.len() as f64);
    }
    Ok(report)
}

struct FoldOutcome {
    test: Vec<usize>,
    predictions: Vec<crate::models::Prediction>,
    converged: bool,
    coefficients: Vec<f64>,
}

fn metrics_for(spec: &FitSpec, predictions: &[crate::models::Prediction], truth: &[f64]) -> Result<EvalReport> {
    match spec.response {
        ResponseKind::BinaryLogistic => {
            let p: Vec<bool> = predictions.iter().map(|x| x.class() == Some(1)).collect();
            let t: Vec<bool> = truth.iter().map(|&r| r > 0.0).collect();
            classification_metrics(&p, &t)
        }
        ResponseKind::ContinuousLinear => {
            let p: Vec<f64> = predictions.iter().map(|x| x.score()).collect();
            regression_metrics(&p, truth)
        }
        ResponseKind::OrderedLogit { .. } => {
            let p: Vec<u32> = predictions.iter().map(|x| x.class().unwrap_or(0)).collect();
            let t: Vec<u32> = truth.iter().map(|&r| r as u32).collect();
            ordinal_metrics(&p, &t)
        }
    }
}

/// Fits `spec` on each training fold and scores the held-out rows.
///
/// Metrics are pooled over all test rows; per-fold numbers are kept in
/// [`EvalReport::folds`].
pub fn evaluate(
    training: &TrainingSet,
    spec: &FitSpec,
    policy: &SplitPolicy,
    stratify: bool,
) -> Result<EvalReport> {
    let responses = training.responses();
    let stratify = stratify && training.kind != RelationKind::Continuous;
    let folds = split(&responses, policy, stratify)?;
    let outcomes = folds
        .par_iter()
        .map(|fold| {
            let model = fit(spec, &training.subset(&fold.train))?;
            let test = training.subset(&fold.test);
            let predictions = predict(&model, &test.features(spec.predictor))?;
            let mut coefficients: Vec<f64> = model.intercept.into_iter().collect();
            coefficients.extend(&model.slopes);
            Ok(FoldOutcome {
                test: fold.test.clone(),
                predictions,
                converged: model.diagnostics.converged,
                coefficients,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pooled_pred = Vec::new();
    let mut pooled_truth = Vec::new();
    let mut summaries = Vec::new();
    for o in &outcomes {
        let truth: Vec<f64> = o.test.iter().map(|&i| responses[i]).collect();
        let fold_report = metrics_for(spec, &o.predictions, &truth)?;
        summaries.push(FoldSummary {
            test_rows: o.test.len(),
            balanced_accuracy: fold_report.balanced_accuracy,
            rmse: fold_report.rmse,
            converged: o.converged,
            coefficients: o.coefficients.clone(),
        });
        pooled_pred.extend_from_slice(&o.predictions);
        pooled_truth.extend(truth);
    }
    let mut report = metrics_for(spec, &pooled_pred, &pooled_truth)?;
    report.split = *policy;
    report.stratified = stratify;
    report.folds = summaries;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: PredictorKind,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub split: SplitPolicy,
    pub methods: Vec<MethodReport>,
}

impl Comparison {
    pub fn get(&self, method: PredictorKind) -> Option<&EvalReport> {
        self.methods.iter().find(|m| m.method == method).map(|m| &m.report)
    }
}

/// Evaluates every method on identical splits.
pub fn compare_methods(
    training: &TrainingSet,
    base: &FitSpec,
    methods: &[PredictorKind],
    policy: &SplitPolicy,
    stratify: bool,
) -> Result<Comparison> {
    let methods = methods
        .iter()
        .map(|&method| {
            let spec = FitSpec {
                predictor: method,
                ..*base
            };
            Ok(MethodReport {
                method,
                report: evaluate(training, &spec, policy, stratify)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison { split: *policy, methods })
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

/// Aligned text table, one row per method.
pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
    let header = ["method", "sensitivity", "specificity", "balanced_acc", "r2", "rmse"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|(name, r)| {
            [
                name.to_string(),
                cell(r.sensitivity),
                cell(r.specificity),
                cell(r.balanced_accuracy),
                cell(r.r_squared),
                cell(r.rmse),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{c:<w$}");
            } else {
                let _ = write!(out, "  {c:>w$}");
            }
        }
        out.push('\n');
    };
    line(&mut out, &header);
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &cells);
    }
    out
}

impl Comparison {
    pub fn table(&self) -> String {
        let rows: Vec<(&str, &EvalReport)> = self.methods.iter().map(|m| (m.method.name(), &m.report)).collect();
        render_table(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn holdout_is_reproducible() {
        let y: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let p = SplitPolicy::Holdout { fraction: 0.2, seed: 7 };
        let a = split(&y, &p, false).unwrap();
        let b = split(&y, &p, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].test.len(), 20);
        assert_eq!(a[0].train.len(), 80);
        assert!(a[0].test.iter().all(|i| !a[0].train.contains(i)));
    }

    #[test]
    fn kfold_sizes() {
        let y = vec![0.0; 10];
        let folds = split(&y, &SplitPolicy::kfold(5, 1), false).unwrap();
        assert_eq!(folds.len(), 5);
        assert!(folds.iter().all(|f| f.test.len() == 2 && f.train.len() == 8));
    }

    #[test]
    fn stratified_holdout_keeps_proportion() {
        let y: Vec<f64> = (0..100).map(|i| if i < 10 { 1.0 } else { 0.0 }).collect();
        let f = &split(&y, &SplitPolicy::Holdout { fraction: 0.2, seed: 3 }, true).unwrap()[0];
        let pos = f.test.iter().filter(|&&i| y[i] == 1.0).count();
        assert_eq!(pos, 2);
        assert_eq!(f.test.len(), 20);
    }

    #[test]
    fn too_few_for_folds() {
        let y = vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let err = split(&y, &SplitPolicy::kfold(3, 0), true).unwrap_err();
        assert!(matches!(err, Error::TooFewForStratification { count: 2, folds: 3, .. }));
    }

    #[test]
    fn confusion_arithmetic() {
        let mut p = Vec::new();
        let mut t = Vec::new();
        p.extend([true; 5]);
        t.extend([true; 5]);
        p.extend([false; 5]);
        t.extend([true; 5]);
        p.extend([false; 9]);
        t.extend([false; 9]);
        p.push(true);
        t.push(false);
        let r = classification_metrics(&p, &t).unwrap();
        assert_eq!(r.confusion, Some(Confusion { tp: 5, fp: 1, tn: 9, fn_: 5 }));
        assert!((r.sensitivity.unwrap() - 0.5).abs() < 1e-15);
        assert!((r.specificity.unwrap() - 0.9).abs() < 1e-15);
        assert!((r.balanced_accuracy.unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_constant() {
        let t = [true, false, true, false, false];
        let r = classification_metrics(&t, &t).unwrap();
        assert_eq!(r.balanced_accuracy, Some(1.0));
        let r = classification_metrics(&[true; 5], &t).unwrap();
        assert_eq!(r.balanced_accuracy, Some(0.5));
    }

    #[test]
    fn r_squared_flags() {
        let r = regression_metrics(&[1.0, 2.0], &[3.0, 3.0]).unwrap();
        assert!(r.r_squared_undefined && r.r_squared.is_none());
        let r = regression_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.r_squared, Some(1.0));
        assert_eq!(r.rmse, Some(0.0));
        assert!(regression_metrics(&[], &[]).is_err());
    }

    #[test]
    fn table_is_aligned() {
        let r = classification_metrics(&[true, false], &[true, false]).unwrap();
        let t = render_table(&[("phi", &r), ("modularity", &r)]);
        let widths: Vec<usize> = t.lines().map(str::len).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]));
    }

    proptest! {
        #[test]
        fn kfold_partitions(n in 15usize..80, k in 2usize..6, seed in any::<u64>(), strat in any::<bool>()) {
            let y: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
            let folds = split(&y, &SplitPolicy::kfold(k, seed), strat).unwrap();
            let mut seen = vec![0; n];
            for f in &folds {
                for &i in &f.test { seen[i] += 1; }
                prop_assert_eq!(f.test.len() + f.train.len(), n);
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            if strat {
                let pos: Vec<usize> = folds.iter().map(|f| f.test.iter().filter(|&&i| y[i] == 1.0).count()).collect();
                prop_assert!(pos.iter().max().unwrap() - pos.iter().min().unwrap() <= 1);
            }
        }

        #[test]
        fn metrics_permutation_invariant(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40), seed in any::<u64>()) {
            let (p, t): (Vec<bool>, Vec<bool>) = pairs.iter().copied().unzip();
            let mut idx: Vec<usize> = (0..p.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let p2: Vec<bool> = idx.iter().map(|&i| p[i]).collect();
            let t2: Vec<bool> = idx.iter().map(|&i| t[i]).collect();
            let a = classification_metrics(&p, &t).unwrap();
            let b = classification_metrics(&p2, &t2).unwrap();
            prop_assert_eq!(a.confusion, b.confusion);
            if let Some(ba) = a.balanced_accuracy {
                prop_assert!((0.0..=1.0).contains(&ba));
            }
        }
    }
}
