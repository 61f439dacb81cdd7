//! Subcommand implementations.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use twister_core::catalog::{apply_negative_rule, parse_event_catalog, serialize_catalog};
use twister_core::classifiers::{
    default_specs, deserialize_model, fit, serialize_model, ModelKind, ModelSpec, TrainedModel,
    DEFAULT_THRESHOLD,
};
use twister_core::dataset::{
    assemble_dataset, parse_snapshot_file, serialize_snapshot, snapshot_file_name, Dataset,
    DirectorySource,
};
use twister_core::eval::{
    evaluate_model, far, pod, render_table, run_ablation, split_by_year, truncate_dataset,
    EvalReport, ReportCell, REPORT_FORMAT_VERSION,
};
use twister_core::featurize::{export_features_csv, featurize_dataset, FEATURES_PER_DAY};
use twister_core::synth::{default_regions, generate_catalog, generate_dataset, SynthSpec};
use twister_core::window::MAX_WINDOW_DAYS;

use crate::config::Config;
use crate::monitor::MonitorState;
use crate::{
    AblateArgs, BuildDatasetArgs, CliError, EvaluateArgs, MonitorArgs, SynthArgs, TrainArgs,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_window_days(days: usize) -> Result<(), CliError> {
    if days == 0 || days > MAX_WINDOW_DAYS {
        return Err(usage(format!("window_days {days} outside 1..={MAX_WINDOW_DAYS}")));
    }
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Dataset<f64>, CliError> {
    if !path.exists() {
        return Err(usage(format!("dataset {} does not exist", path.display())));
    }
    Ok(Dataset::load(path)?)
}

pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    let cfg = Config::load(args.config.as_deref())?;
    let seed = cfg.resolve(args.seed, "seed", 0)?;
    let n_tornado = cfg.resolve(args.tornado, "tornado", 50)?;
    let n_null = cfg.resolve(args.null, "null", 50)?;
    let separation = cfg.resolve(args.separation, "separation", 1.0)?;
    let window_days = cfg.resolve(args.window_days, "window_days", MAX_WINDOW_DAYS)?;
    let start_date = cfg.resolve(
        args.start_date,
        "start_date",
        chrono::NaiveDate::from_ymd_opt(2016, 1, 15).unwrap(),
    )?;
    let all_regions = default_regions();
    let region_count = cfg.resolve(args.regions, "regions", all_regions.len())?;

    if separation.is_nan() || separation < 0.0 {
        return Err(usage(format!("separation {separation} must be >= 0")));
    }
    check_window_days(window_days)?;
    if region_count == 0 || region_count > all_regions.len() {
        return Err(usage(format!(
            "regions {region_count} outside 1..={}",
            all_regions.len()
        )));
    }
    if n_tornado + n_null == 0 {
        return Err(usage("need at least one event"));
    }

    let spec = SynthSpec {
        seed,
        n_tornado,
        n_null,
        separation,
        window_days,
        start_date,
        regions: all_regions[..region_count].to_vec(),
    };
    let catalog = generate_catalog(&spec)?;
    let (dataset, _oracle) = generate_dataset(&spec)?;

    let snap_dir = args.out.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| CliError::Data(e.to_string()))?;
    dataset.save(args.out.join("dataset.json"))?;
    fs::write(args.out.join("catalog.csv"), serialize_catalog(&catalog))
        .map_err(twister_core::Error::from)?;
    let mut snapshot_count = 0usize;
    for window in dataset.windows() {
        for snap in window.snapshots() {
            let name = snapshot_file_name(&snap.region_id, snap.date);
            fs::write(snap_dir.join(name), serialize_snapshot(snap)?)
                .map_err(twister_core::Error::from)?;
            snapshot_count += 1;
        }
    }
    println!(
        "wrote {} windows ({} tornado, {} null), {} catalog entries, {} snapshots to {}",
        dataset.len(),
        n_tornado,
        n_null,
        catalog.len(),
        snapshot_count,
        args.out.display()
    );
    Ok(())
}

pub fn build_dataset(args: BuildDatasetArgs) -> Result<(), CliError> {
    let cfg = Config::load(args.config.as_deref())?;
    let window_days = cfg.resolve(args.window_days, "window_days", MAX_WINDOW_DAYS)?;
    let min_gap_days = cfg.resolve(args.min_gap_days, "min_gap_days", 10)?;
    check_window_days(window_days)?;
    if !args.catalog.exists() {
        return Err(usage(format!("catalog {} does not exist", args.catalog.display())));
    }
    if !args.snapshots.is_dir() {
        return Err(usage(format!(
            "snapshot directory {} does not exist",
            args.snapshots.display()
        )));
    }

    let bytes = fs::read(&args.catalog).map_err(twister_core::Error::from)?;
    let entries = parse_event_catalog(&bytes)?;
    let (kept, filtered) = apply_negative_rule(&entries, min_gap_days);

    let source = DirectorySource::new(&args.snapshots);
    let mut provenance = std::collections::BTreeMap::new();
    provenance.insert("catalog".into(), args.catalog.display().to_string());
    provenance.insert("min_gap_days".into(), min_gap_days.to_string());
    provenance.insert("filtered_negatives".into(), filtered.to_string());
    let dataset: Dataset<f64> = assemble_dataset(&kept, &source, window_days, provenance)?;
    dataset.save(&args.out)?;
    println!(
        "catalog entries: {}; filtered {} null events inside the {}-day gap; \
         skipped {} incomplete; wrote {} windows to {}",
        entries.len(),
        filtered,
        min_gap_days,
        dataset.provenance["skipped_incomplete"],
        dataset.len(),
        args.out.display()
    );
    Ok(())
}

fn spec_from_flags(args: &TrainArgs, cfg: &Config) -> Result<ModelSpec, CliError> {
    let kind_name = cfg.resolve(args.kind.clone(), "kind", "random_forest".to_string())?;
    let kind: ModelKind = kind_name.parse().map_err(usage)?;
    let mut spec = ModelSpec::new(kind, cfg.resolve(args.seed, "seed", 0)?);
    spec.hyper.n_trees = cfg.resolve(args.trees, "trees", spec.hyper.n_trees)?;
    spec.hyper.max_depth = cfg.resolve_opt(args.max_depth, "max_depth")?;
    spec.hyper.min_samples_split = cfg.resolve(
        args.min_samples_split,
        "min_samples_split",
        spec.hyper.min_samples_split,
    )?;
    spec.hyper.max_features = cfg.resolve_opt(args.max_features, "max_features")?;
    let bootstrap_flag = if args.no_bootstrap { Some(false) } else { None };
    spec.hyper.bootstrap = cfg.resolve(bootstrap_flag, "bootstrap", true)?;
    spec.hyper.k = cfg.resolve(args.k, "k", spec.hyper.k)?;
    spec.hyper.rounds = cfg.resolve(args.rounds, "rounds", spec.hyper.rounds)?;
    spec.hyper.lambda = cfg.resolve(args.lambda, "lambda", spec.hyper.lambda)?;
    spec.hyper.epochs = cfg.resolve(args.epochs, "epochs", spec.hyper.epochs)?;
    spec.validate().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let cfg = Config::load(args.config.as_deref())?;
    let spec = spec_from_flags(&args, &cfg)?;
    let test_year = cfg.resolve_opt(args.test_year, "test_year")?;

    let mut dataset = load_dataset(&args.dataset)?;
    if let Some(year) = test_year {
        let (train_side, _) = split_by_year(&dataset, year)?;
        dataset = train_side;
    }
    if let Some(days) = cfg.resolve_opt(args.window_days, "window_days")? {
        check_window_days(days)?;
        dataset = truncate_dataset(&dataset, days)?;
    }
    if dataset.is_empty() {
        return Err(CliError::Data("no training windows after filtering".into()));
    }

    let x = featurize_dataset(&dataset)?;
    let y = dataset.labels();
    let model = fit(&spec, &x, &y)?;
    fs::write(&args.out, serialize_model(&model)).map_err(twister_core::Error::from)?;
    if let Some(csv_path) = &args.features_csv {
        let mut out = Vec::new();
        export_features_csv(&dataset, &mut out)?;
        fs::write(csv_path, out).map_err(twister_core::Error::from)?;
    }
    println!(
        "trained {} on {} windows x {} features; model written to {}",
        spec.kind,
        x.len(),
        model.feature_length,
        args.out.display()
    );
    Ok(())
}

fn load_model(path: &Path) -> Result<(TrainedModel<f64>, String), CliError> {
    if !path.exists() {
        return Err(usage(format!("model {} does not exist", path.display())));
    }
    let bytes = fs::read(path).map_err(twister_core::Error::from)?;
    let model = deserialize_model(&bytes)?;
    let digest = Sha256::digest(&bytes);
    let id = format!("{}:{:012x}", model.spec.kind, {
        let mut prefix = 0u64;
        for &b in &digest[..6] {
            prefix = prefix << 8 | u64::from(b);
        }
        prefix
    });
    Ok((model, id))
}

/// Window count a model consumes, from its feature length.
fn model_window_days(model: &TrainedModel<f64>) -> Result<usize, CliError> {
    if !model.feature_length.is_multiple_of(FEATURES_PER_DAY) {
        return Err(CliError::Data(format!(
            "model feature length {} is not a multiple of {FEATURES_PER_DAY}",
            model.feature_length
        )));
    }
    Ok(model.feature_length / FEATURES_PER_DAY)
}

fn resolve_test_set(
    dataset: Option<&PathBuf>,
    test_year: Option<i32>,
    test_dataset: Option<&PathBuf>,
) -> Result<Dataset<f64>, CliError> {
    match (dataset, test_year, test_dataset) {
        (None, None, Some(path)) => load_dataset(path),
        (Some(path), Some(year), None) => {
            let ds = load_dataset(path)?;
            let (_, test) = split_by_year(&ds, year)?;
            Ok(test)
        }
        _ => Err(usage(
            "pass either --dataset with --test-year, or --test-dataset",
        )),
    }
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let cfg = Config::load(args.config.as_deref())?;
    let threshold = cfg.resolve(args.threshold, "threshold", DEFAULT_THRESHOLD)?;
    let test_year = cfg.resolve_opt(args.test_year, "test_year")?;
    let (model, _) = load_model(&args.model)?;
    let days = model_window_days(&model)?;

    let test = resolve_test_set(args.dataset.as_ref(), test_year, args.test_dataset.as_ref())?;
    if test.is_empty() {
        return Err(CliError::Data("test split is empty".into()));
    }
    let test = truncate_dataset(&test, days)?;
    let x = featurize_dataset(&test)?;
    let counts = evaluate_model(&model, &x, &test.labels(), threshold)?;

    let report = EvalReport::<f64> {
        format_version: REPORT_FORMAT_VERSION,
        threshold,
        train_size: 0,
        test_size: test.len(),
        provenance: test.provenance.clone(),
        specs: vec![model.spec.clone()],
        cells: vec![ReportCell {
            kind: model.spec.kind,
            rng_seed: model.spec.rng_seed,
            window_days: days,
            counts,
            pod: pod(&counts),
            far: far(&counts),
        }],
    };
    if let Some(path) = &args.out_json {
        fs::write(path, report.to_bytes()).map_err(twister_core::Error::from)?;
    }
    if let Some(path) = &args.out_table {
        fs::write(path, render_table(&report).as_bytes()).map_err(twister_core::Error::from)?;
    }
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    println!(
        "kind={} window_days={days} tp={} fp={} tn={} fn={} POD={} FAR={}",
        model.spec.kind,
        counts.tp,
        counts.fp,
        counts.tn,
        counts.fn_,
        show(pod(&counts)),
        show(far(&counts)),
    );
    Ok(())
}

pub fn ablate(args: AblateArgs) -> Result<(), CliError> {
    let cfg = Config::load(args.config.as_deref())?;
    let threshold = cfg.resolve(args.threshold, "threshold", DEFAULT_THRESHOLD)?;
    let seed = cfg.resolve(args.seed, "seed", 0)?;
    let test_year = cfg.resolve_opt(args.test_year, "test_year")?;

    let (train, test) = match (&args.dataset, test_year, &args.train_dataset, &args.test_dataset) {
        (Some(path), Some(year), None, None) => {
            let ds = load_dataset(path)?;
            split_by_year(&ds, year)?
        }
        (None, None, Some(train_path), Some(test_path)) => {
            (load_dataset(train_path)?, load_dataset(test_path)?)
        }
        _ => {
            return Err(usage(
                "pass either --dataset with --test-year, or --train-dataset with --test-dataset",
            ))
        }
    };
    if train.is_empty() || test.is_empty() {
        return Err(CliError::Data("a split side is empty".into()));
    }

    let specs: Vec<ModelSpec> = match &args.kinds {
        None => default_specs(seed),
        Some(list) => list
            .split(',')
            .map(|name| {
                name.trim()
                    .parse::<ModelKind>()
                    .map(|kind| ModelSpec::new(kind, seed))
                    .map_err(usage)
            })
            .collect::<Result<_, _>>()?,
    };
    let windows: Vec<usize> = match &args.windows {
        None => (1..=MAX_WINDOW_DAYS).collect(),
        Some(list) => list
            .split(',')
            .map(|n| {
                n.trim()
                    .parse::<usize>()
                    .map_err(|e| usage(format!("bad window size `{n}`: {e}")))
            })
            .collect::<Result<_, _>>()?,
    };
    for &w in &windows {
        check_window_days(w)?;
    }

    let report = run_ablation(&train, &test, &specs, &windows, threshold)?;
    let table = render_table(&report);
    if let Some(path) = &args.out_json {
        fs::write(path, report.to_bytes()).map_err(twister_core::Error::from)?;
    }
    if let Some(path) = &args.out_table {
        fs::write(path, table.as_bytes()).map_err(twister_core::Error::from)?;
    }
    print!("{table}");
    Ok(())
}

pub fn monitor(args: MonitorArgs) -> Result<(), CliError> {
    let cfg = Config::load(args.config.as_deref())?;
    let threshold = cfg.resolve(args.threshold, "threshold", DEFAULT_THRESHOLD)?;
    let (model, model_id) = load_model(&args.model)?;
    let derived = model_window_days(&model)?;
    let window_days = cfg.resolve(args.window_days, "window_days", derived)?;
    if window_days != derived {
        return Err(CliError::Data(format!(
            "window_days {window_days} does not match the model's feature length \
             ({} features = {derived} days)",
            model.feature_length
        )));
    }

    let mut state = MonitorState::new(model, model_id, window_days, threshold);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    let mut feed = |path: &Path| {
        let snapshot = fs::read(path)
            .map_err(twister_core::Error::from)
            .and_then(|bytes| parse_snapshot_file::<f64>(&bytes));
        match snapshot {
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
            }
            Ok(snap) => match state.ingest(snap) {
                Err(e) => eprintln!("skipping {}: {}", path.display(), e.0),
                Ok(None) => {}
                Ok(Some(record)) => {
                    let line = serde_json::to_string(&record).expect("record serializes");
                    writeln!(out, "{line}").expect("stdout writable");
                }
            },
        }
    };

    if args.paths.is_empty() {
        let stdin = std::io::stdin();
        for line in stdin.lock().lines() {
            let line = line.map_err(twister_core::Error::from)?;
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                feed(Path::new(trimmed));
            }
        }
    } else {
        for path in &args.paths {
            feed(path);
        }
    }
    out.flush().map_err(twister_core::Error::from)?;
    Ok(())
}
