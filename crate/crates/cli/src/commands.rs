use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};

use coopwatch_core::codec;
use coopwatch_core::dataset::{
    apply_augmentations, load_labeled_images, list_images, serialize_label_file, split_ids,
    validate_dataset, AugmentationSpec, ClassMap,
};
use coopwatch_core::evaluation::{
    confusion_matrix, evaluate, ground_truths_from_images, load_detections_jsonl, report,
    EvalConfig,
};
use coopwatch_core::inference::{postprocess, DetectorBackend, InferenceRequest, PostprocessConfig, ReplayBackend};
use coopwatch_service::types::PredictionResponse;
use coopwatch_service::{ServiceConfig, start_replay};

use crate::{AugmentArgs, EvalRunArgs, PredictArgs, ServeArgs, SplitArgs, ValidateArgs};

fn load_class_map(explicit: Option<&Path>, root: Option<&Path>) -> Result<ClassMap> {
    match (explicit, root) {
        (Some(path), _) => ClassMap::from_file(path)
            .with_context(|| format!("cannot load class map {}", path.display())),
        (None, Some(root)) => {
            let default = root.join("classes.txt");
            ClassMap::from_file(&default)
                .with_context(|| format!("cannot load class map {}", default.display()))
        }
        (None, None) => Ok(ClassMap::poultry_default()),
    }
}

pub fn dataset_validate(args: ValidateArgs) -> Result<ExitCode> {
    let class_map = load_class_map(args.classes.as_deref(), Some(&args.root))?;
    let report = validate_dataset(&args.root, &class_map, args.strict)?;

    println!("images checked: {}", report.images_checked);
    println!("class instance counts:");
    for (id, count) in report.class_counts.iter().enumerate() {
        println!("  {:<20} {count}", class_map.name(id).unwrap_or("?"));
    }
    for stem in &report.images_without_labels {
        println!("warning: image without label: {stem}");
    }
    for stem in &report.labels_without_images {
        println!("warning: label without image: {stem}");
    }
    for v in &report.violations {
        println!("violation [{}]: {}", v.image_id, v.message);
    }
    if report.ok {
        println!("ok");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAILED");
        Ok(ExitCode::from(1))
    }
}

pub fn dataset_split(args: SplitArgs) -> Result<ExitCode> {
    let parts: Vec<f64> = args
        .ratios
        .split(',')
        .map(|p| p.trim().parse::<f64>().context("ratios must be three numbers"))
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        bail!("--ratios wants exactly three comma-separated fractions, got {}", parts.len());
    }
    let ids: Vec<String> = list_images(&args.root.join("images"))?
        .into_iter()
        .map(|(stem, _)| stem)
        .collect();
    let manifest = split_ids(ids, (parts[0], parts[1], parts[2]), args.seed)?;
    let out = args.out.unwrap_or_else(|| args.root.join("split.json"));
    std::fs::write(&out, manifest.to_json())
        .with_context(|| format!("cannot write {}", out.display()))?;
    let (train, test, val) = manifest.counts();
    println!("split written to {}: train={train} test={test} val={val}", out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn dataset_augment(args: AugmentArgs) -> Result<ExitCode> {
    let class_map = load_class_map(args.classes.as_deref(), Some(&args.root))?;
    let spec_text = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("cannot read {}", args.spec.display()))?;
    let spec = AugmentationSpec::from_json(&spec_text)?;
    let images = load_labeled_images(&args.root, &class_map)?;
    if images.is_empty() {
        bail!("no images under {}", args.root.display());
    }

    std::fs::create_dir_all(args.out.join("images"))?;
    std::fs::create_dir_all(args.out.join("labels"))?;
    let mut class_lines = String::new();
    for name in class_map.names() {
        class_lines.push_str(name);
        class_lines.push('\n');
    }
    std::fs::write(args.out.join("classes.txt"), class_lines)?;

    let image_paths: std::collections::BTreeMap<String, PathBuf> =
        list_images(&args.root.join("images"))?.into_iter().collect();
    for img in &images {
        let src = &image_paths[&img.image_id];
        let pixels = codec::load(src)?;
        let (buffer, labeled) = apply_augmentations(img, &pixels, &spec)?;
        codec::save_png(&buffer, &args.out.join("images").join(format!("{}.png", img.image_id)))?;
        std::fs::write(
            args.out.join("labels").join(format!("{}.txt", img.image_id)),
            serialize_label_file(&labeled.annotations),
        )?;
    }
    println!("augmented {} images into {}", images.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn eval_run(args: EvalRunArgs) -> Result<ExitCode> {
    let class_map = load_class_map(args.classes.as_deref(), Some(&args.gt))?;
    if !args.dets.exists() {
        bail!("detections file not found: {}", args.dets.display());
    }
    let images = load_labeled_images(&args.gt, &class_map)?;
    let ground_truths = ground_truths_from_images(&images)?;
    let detections = load_detections_jsonl(&args.dets, &class_map)?;

    let config = EvalConfig { reporting_confidence: args.conf, ..Default::default() };
    let result = evaluate(&detections, &ground_truths, &class_map, &config)?;
    let matrix = confusion_matrix(
        &detections,
        &ground_truths,
        &class_map,
        args.confusion_conf,
        args.confusion_iou,
    )?;

    let per_class_table = report::render_per_class_table(&result.per_class, &class_map);
    let overall_table = report::render_overall_table(&result.overall);
    let best = result.sweep.best_f1;

    print!("{per_class_table}\n{overall_table}");
    println!("\nbest F1 {:.4} at confidence {:.3}", best.f1, best.confidence);

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    std::fs::write(
        args.out.join("metrics.txt"),
        format!("{per_class_table}\n{overall_table}"),
    )?;
    std::fs::write(
        args.out.join("precision_confidence.csv"),
        report::confidence_curve_csv(&result.sweep.precision, &class_map),
    )?;
    std::fs::write(
        args.out.join("recall_confidence.csv"),
        report::confidence_curve_csv(&result.sweep.recall, &class_map),
    )?;
    std::fs::write(
        args.out.join("f1_confidence.csv"),
        report::confidence_curve_csv(&result.sweep.f1, &class_map),
    )?;
    std::fs::write(
        args.out.join("pr_curves.csv"),
        report::pr_curves_csv(&result.pr_curves, &class_map),
    )?;
    std::fs::write(
        args.out.join("confusion_matrix.csv"),
        report::confusion_csv(&matrix, &class_map),
    )?;
    let summary = report::build_summary(&result, &matrix, &class_map);
    std::fs::write(
        args.out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!("report written to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn predict(args: PredictArgs) -> Result<ExitCode> {
    let class_map = load_class_map(args.classes.as_deref(), None)?;
    let backend = ReplayBackend::from_fixture(&args.fixture)?;
    let raw = backend.infer(&InferenceRequest::by_id(&args.image_id))?;
    let cfg = PostprocessConfig {
        conf_threshold: args.conf_threshold,
        nms_iou_threshold: args.nms_iou,
        max_detections: args.max_detections,
    };
    let detections = postprocess(&raw, &cfg)?;
    let response = PredictionResponse::build(
        raw.image_id.clone(),
        raw.model_tag.clone(),
        &detections,
        &class_map,
        class_map.id_of("Healthy"),
        args.alert_floor,
        Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
    );
    println!("{}", serde_json::to_string_pretty(&response)?);
    Ok(ExitCode::SUCCESS)
}

pub fn serve(args: ServeArgs) -> Result<ExitCode> {
    let config = ServiceConfig::load(&args.config)?;
    let handle = start_replay(&config)?;
    println!("listening on {}", handle.addr);
    handle.wait();
    Ok(ExitCode::SUCCESS)
}
