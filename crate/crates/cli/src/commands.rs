use std::path::{Path, PathBuf};
use std::time::Instant;

use ltrepair::classifier::checkpoint::{load_checkpoint, load_checkpoint_meta, save_checkpoint, CheckpointMeta};
use ltrepair::classifier::{predict, train as fit, CategoricalDistribution, TrainConfig};
use ltrepair::eval::{
    evaluate_scenario, run_pipeline, summarize, to_jsonl, unit_runtime, write_confusion, PipelineConfig, ReportRow,
    Scenario, REPORT_FILE,
};
use ltrepair::graph::io::{
    import_linqs, load_bundle, read_edges, read_json, read_labels, read_split, save_bundle, write_json, write_text,
    NOISY_LABELS_FILE, SPLIT_FILE,
};
use ltrepair::lt::io::{write_inference, InferManifest, INFERRED_LABELS_FILE, INFER_MANIFEST_FILE};
use ltrepair::lt::{run_inference, warmup_transition, DirichletPrior, InferenceConfig, PhiMode};
use ltrepair::perturb::{
    inject_label_noise, simulate_perturbators, write_noise, write_perturbation, NoiseManifest, NoiseSpec, PerturbSpec,
    NOISE_MANIFEST_FILE, PERTURBED_EDGES_FILE,
};
use ltrepair::{split_nodes, synth_sbm, ClassId, Error, GraphBundle, NodeSplit, Result, SbmConfig};
use serde_json::{json, Value};

use crate::{EvalArgs, Global, ImportArgs, InferArgs, NoiseArgs, PerturbArgs, PipelineArgs, SynthArgs, TrainArgs};

pub const PIPELINE_MANIFEST_FILE: &str = "pipeline.json";

fn bundle_dir(g: &Global) -> Result<&Path> {
    g.bundle
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("--bundle is required".into()))
}

fn out_dir(g: &Global) -> Result<PathBuf> {
    let dir = match &g.out {
        Some(o) => o.clone(),
        None => bundle_dir(g)?.to_path_buf(),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Path of an artifact an earlier subcommand should have written.
fn artifact(dir: &Path, file: &str, name: &'static str) -> Result<PathBuf> {
    let path = dir.join(file);
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::MissingArtifact { name, path })
    }
}

fn load_split(dir: &Path, n: usize) -> Result<NodeSplit> {
    read_split(&artifact(dir, SPLIT_FILE, "split")?, n)
}

fn load_noisy(dir: &Path) -> Result<Vec<ClassId>> {
    read_labels(&artifact(dir, NOISY_LABELS_FILE, "noisy labels")?)
}

/// The graph the defender observes: perturbed when `perturb` has run.
fn observed_graph(bundle: &GraphBundle, dir: &Path) -> Result<Option<GraphBundle>> {
    let path = dir.join(PERTURBED_EDGES_FILE);
    if !path.exists() {
        return Ok(None);
    }
    bundle.with_edges(read_edges(&path)?).map(Some)
}

fn pick(ids: &[usize], values: &[ClassId]) -> Vec<ClassId> {
    ids.iter().map(|&n| values[n]).collect()
}

fn test_argmax(dist: &CategoricalDistribution, test: &[usize]) -> Vec<ClassId> {
    dist.select_rows(test).argmax_labels()
}

/// Prints `fields` as `key: value` lines, or as one JSON object.
fn emit(g: &Global, fields: Value) {
    if g.json {
        println!("{fields}");
        return;
    }
    if let Value::Object(map) = fields {
        for (k, v) in map {
            match v {
                Value::String(s) => println!("{k}: {s}"),
                other => println!("{k}: {other}"),
            }
        }
    }
}

pub fn synth(g: &Global, a: &SynthArgs) -> Result<()> {
    let cfg = SbmConfig {
        blocks: a.blocks,
        nodes_per_block: a.nodes_per_block,
        p_in: a.p_in,
        p_out: a.p_out,
        feature_noise: a.feature_noise,
        seed: g.seed,
    };
    let bundle = synth_sbm(&cfg)?;
    let dir = bundle_dir(g)?;
    save_bundle(&bundle, dir)?;
    write_json(&dir.join("synth.json"), &cfg)?;
    emit(
        g,
        json!({
            "bundle": dir.display().to_string(),
            "nodes": bundle.num_nodes(),
            "edges": bundle.edges().len(),
            "classes": bundle.num_classes(),
        }),
    );
    Ok(())
}

pub fn import(g: &Global, a: &ImportArgs) -> Result<()> {
    let bundle = import_linqs(&a.content, &a.cites)?;
    let dir = bundle_dir(g)?;
    save_bundle(&bundle, dir)?;
    emit(
        g,
        json!({
            "bundle": dir.display().to_string(),
            "nodes": bundle.num_nodes(),
            "edges": bundle.edges().len(),
            "features": bundle.num_features(),
            "classes": bundle.num_classes(),
        }),
    );
    Ok(())
}

pub fn split(g: &Global) -> Result<()> {
    let bundle = load_bundle(bundle_dir(g)?)?;
    let split = split_nodes(bundle.num_nodes(), g.seed)?;
    let out = out_dir(g)?;
    write_json(&out.join(SPLIT_FILE), &split)?;
    emit(
        g,
        json!({ "train": split.train.len(), "val": split.val.len(), "test": split.test.len() }),
    );
    Ok(())
}

pub fn noise(g: &Global, a: &NoiseArgs) -> Result<()> {
    let bundle = load_bundle(bundle_dir(g)?)?;
    let spec = NoiseSpec { nr: a.nr, seed: g.seed };
    let noisy = inject_label_noise(bundle.latent_labels(), bundle.num_classes(), &spec)?;
    let flipped = noisy.iter().zip(bundle.latent_labels()).filter(|(a, b)| a != b).count();
    let manifest = NoiseManifest {
        spec,
        num_classes: bundle.num_classes(),
        flipped,
    };
    write_noise(&out_dir(g)?, &noisy, &manifest)?;
    emit(g, json!({ "nr": a.nr, "flipped": flipped, "nodes": noisy.len() }));
    Ok(())
}

fn train_config(a: &TrainArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        hidden: a.hidden,
        hops: a.hops,
        seed,
        ..TrainConfig::default()
    }
}

pub fn train(g: &Global, a: &TrainArgs) -> Result<()> {
    let bundle = load_bundle(bundle_dir(g)?)?;
    let out = out_dir(g)?;
    let split = load_split(&out, bundle.num_nodes())?;
    let noisy = load_noisy(&out)?;
    let cfg = train_config(a, g.seed);
    let outcome = fit(&bundle, &split, &noisy, a.model.into(), &cfg)?;
    let meta = CheckpointMeta {
        variant: a.model.into(),
        config: cfg,
        train_accuracy: outcome.train_accuracy,
        val_accuracy: outcome.val_accuracy,
    };
    save_checkpoint(&out, &outcome.params, &meta)?;
    emit(
        g,
        json!({
            "model": meta.variant.name(),
            "final_loss": outcome.loss_history.last().copied().unwrap_or(f64::NAN),
            "train_accuracy": outcome.train_accuracy,
            "val_accuracy": outcome.val_accuracy,
        }),
    );
    Ok(())
}

fn perturb_spec(a: &PerturbArgs, seed: u64) -> PerturbSpec {
    PerturbSpec {
        perturbator_fraction: a.fraction,
        budget: a.budget,
        seed,
    }
}

pub fn perturb(g: &Global, a: &PerturbArgs) -> Result<()> {
    let bundle = load_bundle(bundle_dir(g)?)?;
    let out = out_dir(g)?;
    let split = load_split(&out, bundle.num_nodes())?;
    let spec = perturb_spec(a, g.seed);
    let perturbation = simulate_perturbators(&bundle, &split, &spec)?;
    write_perturbation(&out, &perturbation, &spec)?;
    emit(
        g,
        json!({
            "perturbators": perturbation.perturbators.len(),
            "added_edges": perturbation.added_edges.len(),
        }),
    );
    Ok(())
}

fn inference_config(a: &InferArgs, seed: u64) -> InferenceConfig {
    InferenceConfig {
        warmup_steps: a.ws,
        epochs: a.epochs_infer,
        update_mode: a.update_mode.into(),
        phi_mode: if a.fixed_phi { PhiMode::Fixed } else { PhiMode::Dynamic },
        seed,
    }
}

pub fn infer(g: &Global, a: &InferArgs) -> Result<()> {
    let out = out_dir(g)?;
    let params = load_checkpoint(&out)?;
    let bundle = load_bundle(bundle_dir(g)?)?;
    let split = load_split(&out, bundle.num_nodes())?;
    let noisy = load_noisy(&out)?;
    let k = bundle.num_classes();

    // φ′ always comes from the clean train graph
    let clean = predict(&params, &bundle)?;
    let prior = DirichletPrior::symmetric(k, a.alpha)?;
    let phi_warm = warmup_transition(&clean.select_rows(&split.train), &pick(&split.train, &noisy), &prior)?;
    let observed = match observed_graph(&bundle, &out)? {
        Some(perturbed) => predict(&params, &perturbed)?,
        None => clean,
    };

    let test = &split.test;
    let cfg = inference_config(a, g.seed);
    let latent = pick(test, bundle.latent_labels());
    let start = Instant::now();
    let result = run_inference(
        &observed.select_rows(test),
        &pick(test, &noisy),
        &phi_warm,
        &prior,
        &cfg,
        Some(&latent),
    )?;
    let seconds = start.elapsed().as_secs_f64();
    let manifest = InferManifest {
        config: cfg,
        alpha: prior.alpha().to_vec(),
        num_test: test.len(),
        seconds,
        unit_seconds: unit_runtime(seconds, test.len()),
        trace: result.trace.clone(),
    };
    write_inference(&out, &result, &manifest)?;
    emit(
        g,
        json!({
            "test_nodes": test.len(),
            "seconds": seconds,
            "unit_seconds": manifest.unit_seconds,
            "final_accuracy": result.trace.last().copied(),
        }),
    );
    Ok(())
}

fn dataset_name(explicit: Option<&String>, bundle: &Path) -> String {
    explicit.cloned().unwrap_or_else(|| {
        bundle
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "graph".into())
    })
}

pub fn eval(g: &Global, a: &EvalArgs) -> Result<()> {
    let bundle_path = bundle_dir(g)?;
    let out = out_dir(g)?;
    let meta = load_checkpoint_meta(&out)?;
    let params = load_checkpoint(&out)?;
    let noise: NoiseManifest = read_json(&artifact(&out, NOISE_MANIFEST_FILE, "noise")?)?;
    let inferred = read_labels(&artifact(&out, INFERRED_LABELS_FILE, "inferred labels")?)?;
    let bundle = load_bundle(bundle_path)?;
    let split = load_split(&out, bundle.num_nodes())?;
    let k = bundle.num_classes();
    let test = &split.test;
    let latent = pick(test, bundle.latent_labels());

    let mut reports = vec![evaluate_scenario(
        Scenario::BeforePerturbation,
        &test_argmax(&predict(&params, &bundle)?, test),
        &latent,
        k,
        None,
    )?];
    if let Some(perturbed) = observed_graph(&bundle, &out)? {
        let pred = test_argmax(&predict(&params, &perturbed)?, test);
        reports.push(evaluate_scenario(Scenario::AfterPerturbation, &pred, &latent, k, None)?);
    }
    let seconds = if a.timings {
        let manifest: InferManifest = read_json(&artifact(&out, INFER_MANIFEST_FILE, "inference manifest")?)?;
        Some(manifest.seconds)
    } else {
        None
    };
    reports.push(evaluate_scenario(Scenario::AfterLt, &inferred, &latent, k, seconds)?);

    let dataset = dataset_name(a.dataset.as_ref(), bundle_path);
    let nr = noise.spec.nr;
    let rows: Vec<ReportRow> = reports
        .iter()
        .map(|r| ReportRow::new(&dataset, meta.variant, nr, g.seed, r))
        .collect();
    write_text(&out.join(REPORT_FILE), &to_jsonl(&rows))?;
    for r in &reports {
        write_confusion(&out, &dataset, r.scenario, nr, &r.confusion)?;
    }
    print_rows(g, &rows);
    Ok(())
}

fn print_rows(g: &Global, rows: &[ReportRow]) {
    let summary = summarize(rows);
    if g.json {
        println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
        return;
    }
    println!("{:<12} {:<5} {:>5} {:<22} {:>8} {:>7} {:>4}", "dataset", "model", "nr", "scenario", "accuracy", "std", "runs");
    for s in summary {
        println!(
            "{:<12} {:<5} {:>5.2} {:<22} {:>7.2}% {:>7.4} {:>4}",
            s.dataset,
            s.classifier.name(),
            s.nr,
            s.scenario.name(),
            100.0 * s.mean,
            s.std,
            s.runs
        );
    }
}

fn pipeline_bundle(g: &Global, dataset: Option<&String>) -> Result<PathBuf> {
    if let Some(b) = &g.bundle {
        return Ok(b.clone());
    }
    let name = dataset.ok_or_else(|| Error::InvalidConfig("pipeline needs --bundle or --dataset".into()))?;
    let root = std::env::var_os("LT_DATA_DIR").map(PathBuf::from).unwrap_or_else(|| "data".into());
    Ok(root.join(name))
}

pub fn pipeline(g: &Global, a: &PipelineArgs) -> Result<()> {
    let bundle_path = pipeline_bundle(g, a.dataset.as_ref())?;
    let bundle = load_bundle(&bundle_path)?;
    let out = g.out.clone().unwrap_or_else(|| bundle_path.clone());
    let seeds = if a.seeds.is_empty() { vec![g.seed] } else { a.seeds.clone() };
    let cfg = PipelineConfig {
        dataset: dataset_name(a.dataset.as_ref(), &bundle_path),
        variant: a.train.model.into(),
        seeds,
        noise_ratios: a.nr.clone(),
        perturb: a.perturb.then(|| perturb_spec(&a.perturbation, 0)),
        ablation: a.ablation,
        train: train_config(&a.train, 0),
        inference: inference_config(&a.infer, 0),
        alpha: a.infer.alpha,
        timings: a.timings,
        threads: g.threads,
    };
    let report = run_pipeline(&bundle, &cfg)?;
    report.write(&out)?;
    write_json(&out.join(PIPELINE_MANIFEST_FILE), &cfg)?;
    print_rows(g, &report.rows());
    Ok(())
}
