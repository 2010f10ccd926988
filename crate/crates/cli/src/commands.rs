use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phinet::ensemble::{all_marginals, fmt_prob, write_marginals, PossibilityMatrix};
use phinet::evaluation::{
    compare_methods, evaluate, render_table, Comparison, EvalReport, SplitPolicy,
};
use phinet::interaction::{
    ingest_interactions, load_attributes, load_relations, read_edge_list, write_edge_list,
    write_relations, IngestOptions, InteractionGraph, NodeAttributes, TimeWindow,
};
use phinet::models::{
    assemble_training_set, fit, FitResult, FitSpec, PredictorKind, ResponseKind, TrainingOptions,
    TrainingSet,
};
use phinet::phi::{
    analysis_graph, build_signed_network, read_signed_csv, write_signed_csv, InferOptions,
    PhiCoefficients, SignedNetwork, SignedNetworkMeta,
};
use phinet::social::{homophily, triad_importance, TriadFilter, TriadOptions, TriadReport, TriadType};
use phinet::synth::{generate, write_groups, write_planted, SynthConfig};
use phinet::{Error, Result};

use crate::args::*;
use crate::output::{emit, json_bytes, Run};

fn load_graph(args: &GraphArgs, run: &mut Run) -> Result<InteractionGraph> {
    run.input(&args.graph)?;
    let mut opts = if args.directed {
        IngestOptions::directed()
    } else {
        IngestOptions::undirected()
    };
    if let (Some(start), Some(end)) = (args.window_start, args.window_end) {
        opts = opts.with_window(TimeWindow::new(start, end)?);
    }
    let g = ingest_interactions(read_edge_list(&args.graph)?, &opts)?;
    let r = g.report();
    log::info!(
        "{}: {} nodes, {} events ({} self-loops dropped, {} outside window)",
        args.graph.display(),
        g.node_count(),
        r.events,
        r.self_loops_dropped,
        r.outside_window
    );
    Ok(g)
}

fn infer_options(m: &ModelArgs) -> InferOptions {
    InferOptions {
        include_diagonal: m.include_diagonal,
        directed_phi: m.directed_phi,
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let mut run = Run::new("ingest", args, None)?;
    let g = load_graph(&args.graph, &mut run)?;
    let bytes = csv_bytes(|b| write_edge_list(&g, b))?;
    emit(run, args.out.as_deref(), &bytes)
}

pub fn marginals(args: &MarginalsArgs) -> Result<()> {
    let mut run = Run::new("marginals", args, None)?;
    let g = analysis_graph(&load_graph(&args.graph, &mut run)?, &infer_options(&args.model));
    let xi = PossibilityMatrix::new(&g, args.model.include_diagonal)?;
    let m = all_marginals(&xi, &g)?;
    let bytes = csv_bytes(|b| write_marginals(&g, &m, b))?;
    emit(run, args.out.as_deref(), &bytes)
}

struct Prepared {
    training: TrainingSet,
    spec: FitSpec,
}

fn prepare(
    graph: &GraphArgs,
    model: &ModelArgs,
    labels: &LabelArgs,
    predictor: Predictor,
    run: &mut Run,
) -> Result<Prepared> {
    let g = analysis_graph(&load_graph(graph, run)?, &infer_options(model));
    let xi = PossibilityMatrix::new(&g, model.include_diagonal)?;
    run.input(&labels.labels)?;
    let rel = load_relations(&labels.labels, labels.relation, Some(&g))?.value;
    let opts = TrainingOptions {
        negatives: labels.negatives.into(),
        symmetrize_labels: !labels.no_symmetrize_labels,
    };
    let training = assemble_training_set(&rel, &g, &xi, &opts)?;
    log::info!("{} training rows", training.len());
    let mut spec = FitSpec::new(predictor.into(), ResponseKind::for_relations(labels.relation));
    spec.ridge = labels.ridge;
    spec.cutoff = labels.cutoff;
    spec.validate()?;
    Ok(Prepared { training, spec })
}

pub fn fit_cmd(args: &FitArgs) -> Result<()> {
    let mut run = Run::new("fit", args, None)?;
    let p = prepare(&args.graph, &args.model, &args.labels, args.predictor, &mut run)?;
    let result = fit(&p.spec, &p.training)?;
    emit(run, args.out.as_deref(), &json_bytes(&result)?)
}

fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn infer(args: &InferArgs) -> Result<()> {
    let mut run = Run::new("infer", args, None)?;
    let coeff = if let Some(path) = &args.fit {
        run.input(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let result: FitResult = serde_json::from_str(&text)?;
        result.phi_coefficients().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{} was fit with the {} predictor; infer needs phi",
                path.display(),
                result.spec.predictor.name()
            ))
        })?
    } else if let Some(c) = &args.coeffs {
        PhiCoefficients::new(c[0], c[1], c[2])?
    } else {
        PhiCoefficients::default()
    };
    let g = analysis_graph(&load_graph(&args.graph, &mut run)?, &infer_options(&args.model));
    let xi = PossibilityMatrix::new(&g, args.model.include_diagonal)?;
    let net = build_signed_network(&g, &xi, coeff)?;
    let bytes = csv_bytes(|b| write_signed_csv(&net, b))?;
    match &args.out {
        Some(out) => {
            let manifest = Run::manifest_name(out);
            let mut meta = net.meta();
            meta.manifest = manifest.file_name().map(|n| n.to_string_lossy().into_owned());
            run.write(out, &bytes)?;
            run.write(&meta_path(out), &json_bytes(&meta)?)?;
            run.finish(&manifest)
        }
        None => emit(run, None, &bytes),
    }
}

fn split_policy(args: &EvaluateArgs) -> SplitPolicy {
    if args.in_sample {
        SplitPolicy::InSample
    } else if let Some(fraction) = args.holdout {
        SplitPolicy::Holdout {
            fraction,
            seed: args.seed,
        }
    } else {
        SplitPolicy::KFold {
            folds: args.folds,
            seed: args.seed,
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_prob).unwrap_or_default()
}

fn reports_csv(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = String::from("method,sensitivity,specificity,balanced_accuracy,r2,rmse,tp,fp,tn,fn\n");
    for (name, r) in rows {
        let c = r.confusion.map(|c| format!("{},{},{},{}", c.tp, c.fp, c.tn, c.fn_));
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{}",
            opt(r.sensitivity),
            opt(r.specificity),
            opt(r.balanced_accuracy),
            opt(r.r_squared),
            opt(r.rmse),
            c.unwrap_or_else(|| ",,,".into())
        );
    }
    out
}

fn reports_table(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = render_table(rows);
    for (name, r) in rows {
        let folds: Vec<String> = r
            .folds
            .iter()
            .map(|f| f.balanced_accuracy.map_or("-".into(), |b| format!("{b:.3}")))
            .collect();
        if folds.len() > 1 {
            let _ = writeln!(out, "{name} per-fold balanced accuracy: {}", folds.join(" "));
        }
    }
    out
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    let mut run = Run::new("evaluate", args, Some(args.seed))?;
    let p = prepare(&args.graph, &args.model, &args.labels, args.predictor, &mut run)?;
    let report = evaluate(&p.training, &p.spec, &split_policy(args), !args.no_stratify)?;
    let rows = [(p.spec.predictor.name(), &report)];
    let bytes = match args.format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => reports_csv(&rows).into_bytes(),
        Format::Table => reports_table(&rows).into_bytes(),
    };
    emit(run, args.out.as_deref(), &bytes)
}

pub fn compare_cmd(args: &EvaluateArgs) -> Result<()> {
    let mut run = Run::new("compare", args, Some(args.seed))?;
    let p = prepare(&args.graph, &args.model, &args.labels, Predictor::Phi, &mut run)?;
    let cmp: Comparison = compare_methods(
        &p.training,
        &p.spec,
        &PredictorKind::ALL,
        &split_policy(args),
        !args.no_stratify,
    )?;
    let rows: Vec<(&str, &EvalReport)> = cmp.methods.iter().map(|m| (m.method.name(), &m.report)).collect();
    let bytes = match args.format {
        Format::Json => json_bytes(&cmp)?,
        Format::Csv => reports_csv(&rows).into_bytes(),
        Format::Table => reports_table(&rows).into_bytes(),
    };
    emit(run, args.out.as_deref(), &bytes)
}

fn load_signed(input: &SignedArgs, run: &mut Run) -> Result<(SignedNetwork, NodeAttributes)> {
    run.input(&input.signed)?;
    let meta_file = meta_path(&input.signed);
    let meta: Option<SignedNetworkMeta> = if meta_file.exists() {
        run.input(&meta_file)?;
        let text = std::fs::read_to_string(&meta_file).map_err(|e| Error::io(&meta_file, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        log::warn!("no {} found, reading the network as undirected", meta_file.display());
        None
    };
    let file = std::fs::File::open(&input.signed).map_err(|e| Error::io(&input.signed, e))?;
    let net = read_signed_csv(std::io::BufReader::new(file), meta.as_ref())?;
    run.input(&input.attributes)?;
    let attrs = load_attributes(&input.attributes, &BTreeMap::new(), None)?.value;
    Ok((net, attrs))
}

pub fn homophily_cmd(args: &HomophilyArgs) -> Result<()> {
    let mut run = Run::new("homophily", args, None)?;
    let (net, attrs) = load_signed(&args.input, &mut run)?;
    let report = homophily(&net, &attrs, &args.attribute, None)?;
    let bytes = match args.format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => format!(
            "attribute,p_positive,p_random,n,l,p_value,m_same,m_diff,excluded_nodes\n{},{},{},{},{},{},{},{},{}\n",
            report.attribute,
            fmt_prob(report.p_positive),
            fmt_prob(report.p_random),
            report.n,
            report.l,
            fmt_prob(report.p_value),
            report.m_same,
            report.m_diff,
            report.excluded_nodes
        )
        .into_bytes(),
        Format::Table => format!("{report}\n").into_bytes(),
    };
    emit(run, args.out.as_deref(), &bytes)
}

fn triads_text(reports: &[TriadReport], csv: bool) -> String {
    let mut out = String::new();
    if csv {
        out.push_str("group,type,count,importance,relative\n");
        for r in reports {
            for t in TriadType::ALL {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.group,
                    t.symbol(),
                    r.counted[t as usize],
                    fmt_prob(r.importance_of(t)),
                    fmt_prob(r.relative_of(t))
                );
            }
        }
        return out;
    }
    let _ = writeln!(out, "{:<12} {:>8} {:>8} {:>8} {:>8} {:>12}", "group", "+++", "++-", "+--", "---", "total");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<12} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>12.4e}",
            r.group, r.relative[0], r.relative[1], r.relative[2], r.relative[3], r.total
        );
    }
    out
}

pub fn triads_cmd(args: &TriadsArgs) -> Result<()> {
    let mut run = Run::new("triads", args, None)?;
    let (net, attrs) = load_signed(&args.input, &mut run)?;
    let interacting = match &args.interacting {
        Some(path) => {
            let ga = GraphArgs {
                graph: path.clone(),
                directed: net.is_directed(),
                window_start: None,
                window_end: None,
            };
            Some(load_graph(&ga, &mut run)?)
        }
        None => None,
    };
    let filter = match (&args.involving, &args.excluding) {
        (Some(x), _) => TriadFilter::Involving(x.clone()),
        (_, Some(x)) => TriadFilter::Excluding(x.clone()),
        _ => TriadFilter::All,
    };
    let categories = attrs
        .categories(&args.group_by)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown attribute '{}'", args.group_by)))?;
    let values: Vec<String> = match &args.group {
        Some(g) => vec![g.clone()],
        None => categories.iter().cloned().collect(),
    };
    let options = TriadOptions {
        interacting: interacting.as_ref(),
    };
    let mut reports = Vec::new();
    for value in &values {
        let members = attrs.nodes_with(&args.group_by, value);
        match triad_importance(&net, value, &members, &filter, &options) {
            Ok(r) => reports.push(r),
            Err(e) if args.group.is_none() => log::warn!("group {value} skipped: {e}"),
            Err(e) => return Err(e),
        }
    }
    let bytes = match args.format {
        Format::Json => json_bytes(&reports)?,
        Format::Csv => triads_text(&reports, true).into_bytes(),
        Format::Table => triads_text(&reports, false).into_bytes(),
    };
    emit(run, args.out.as_deref(), &bytes)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.null {
        config = config.null();
    }
    let mut run = Run::new("simulate", args, Some(config.seed))?;
    if let Some(path) = &args.config {
        run.input(path)?;
    }
    let data = generate(&config)?;
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    run.write(&dir.join("edges.csv"), &csv_bytes(|b| write_edge_list(&data.graph, b))?)?;
    run.write(&dir.join("relations.csv"), &csv_bytes(|b| write_relations(&data.labels, b))?)?;
    run.write(&dir.join("groups.csv"), &csv_bytes(|b| write_groups(&data, b))?)?;
    run.write(&dir.join("planted.csv"), &csv_bytes(|b| write_planted(&data, b))?)?;
    run.write(&dir.join("config.json"), &json_bytes(&config)?)?;
    run.finish(&dir.join("manifest.json"))
}
