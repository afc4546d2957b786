use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use tmkd::ckd::{apply_projection, clause_transform, fit_pcd_projection, PcdProjection};
use tmkd::data::Dataset;
use tmkd::distill::{class_sums_unclamped, fit_enhanced_epoch, get_soft_labels, intelligent_transfer};
use tmkd::experiment::{
    activation_map, emit_report, read_report_dir, run_experiment, summary_text, write_model_csv,
    write_summary, DatasetSpec, EpochRecord, ExperimentConfig, Mode, ModelCurve, ModelKind, Timing,
    STUDENT_ROLE, TEACHER_ROLE,
};
use tmkd::machine::{encode_all, BitSample, LiteralVector, NegativeSampling, TsetlinMachine};
use tmkd::persist::{load_model, save_model};
use tmkd::rng::{role_seed, run_seed};
use tmkd::Error;

use crate::{Cli, Command, Common, ModeArg, Role};

const DEFAULT_OUT: &str = "tmkd-out";

pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) if e.is_config_error() => 2,
        Some(e) if e.is_data_error() => 3,
        _ => 1,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(&cli.common)?;
    let out = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    match &cli.command {
        Command::Train { role, soft_labels } => train(&cfg, &out, *role, *soft_labels),
        Command::Distill { teacher: None } => {
            let report = run_experiment(&cfg)?;
            let summaries = emit_report(&report, &out)?;
            print!("{}", summary_text(&summaries));
            println!("report written to {}", out.display());
            Ok(())
        }
        Command::Distill {
            teacher: Some(path),
        } => distill_from(&cfg, &out, path),
        Command::Evaluate {
            model,
            teacher,
            projection,
        } => evaluate(&cfg, model, teacher.as_deref(), projection.as_deref()),
        Command::ActivationMap { model, shape } => activation(&out, model, shape),
        Command::Report => {
            let curves = read_report_dir(&out)?;
            let summaries = write_summary(&curves, &out)?;
            print!("{}", summary_text(&summaries));
            Ok(())
        }
    }
}

fn resolve_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(mode) = common.mode {
        cfg.mode = match mode {
            ModeArg::Dkd => Mode::Dkd,
            ModeArg::Ckd => Mode::Ckd,
            ModeArg::BaselinesOnly => Mode::BaselinesOnly,
        };
    }
    match (&common.dataset, &common.data_dir) {
        (Some(name), dir) => cfg.dataset = DatasetSpec::from_name(name, dir.as_deref())?,
        (None, Some(new_dir)) => match &mut cfg.dataset {
            DatasetSpec::Idx { dir, .. } | DatasetSpec::Text { dir, .. } => *dir = new_dir.clone(),
            DatasetSpec::NoisyXor { .. } => {
                return Err(Error::Config("--data-dir needs --dataset or a file-backed config".into()).into())
            }
        },
        (None, None) => {}
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    if let Some(det) = common.deterministic {
        cfg.deterministic = det;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Split {
    lits: Vec<LiteralVector>,
    labels: Vec<usize>,
}

impl Split {
    fn new(xs: &[BitSample], labels: &[usize], width: usize) -> Result<Self> {
        Ok(Self {
            lits: encode_all(xs, width)?,
            labels: labels.to_vec(),
        })
    }
}

fn seconds(timing: Timing, start: Instant) -> f64 {
    match timing {
        Timing::Wall => start.elapsed().as_secs_f64(),
        Timing::Off => 0.0,
    }
}

fn accuracy(pred: &[usize], labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    pred.iter().zip(labels).filter(|(p, y)| p == y).count() as f64 / labels.len() as f64
}

/// Runs `epochs` epochs of `step`, recording accuracies and timings.
fn train_loop(
    tm: &mut TsetlinMachine,
    train: &Split,
    test: &Split,
    epochs: std::ops::RangeInclusive<usize>,
    timing: Timing,
    mut step: impl FnMut(&mut TsetlinMachine) -> tmkd::Result<()>,
    mut after: impl FnMut(usize, &TsetlinMachine) -> Result<()>,
) -> Result<Vec<EpochRecord>> {
    let mut records = Vec::new();
    for epoch in epochs {
        let start = Instant::now();
        step(tm)?;
        let train_seconds = seconds(timing, start);
        let start = Instant::now();
        let pred = tm.predict_encoded(&test.lits).labels;
        let test_seconds = seconds(timing, start);
        records.push(EpochRecord {
            epoch,
            train_accuracy: tm.accuracy(&train.lits, &train.labels),
            test_accuracy: accuracy(&pred, &test.labels),
            train_seconds: Some(train_seconds),
            test_seconds: Some(test_seconds),
        });
        after(epoch, tm)?;
    }
    Ok(records)
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    cfg.dataset
        .load()
        .with_context(|| format!("loading dataset {}", cfg.dataset.name()))
}

fn write_curve(out: &Path, model: ModelKind, epochs: Vec<EpochRecord>) -> Result<()> {
    let curve = ModelCurve {
        model,
        run: 0,
        epochs,
    };
    write_model_csv(&[&curve], &out.join(model.file_name()))?;
    Ok(())
}

fn train(cfg: &ExperimentConfig, out: &Path, role: Role, soft_labels: bool) -> Result<()> {
    let ds = load_dataset(cfg)?;
    fs::create_dir_all(out)?;
    let seed = run_seed(cfg.seed, 0);
    let (params, name, kind) = match role {
        Role::Teacher => (
            cfg.teacher_params(ds.n_features, ds.n_classes, role_seed(seed, TEACHER_ROLE)),
            "teacher",
            ModelKind::Teacher,
        ),
        Role::Student => (
            cfg.student_params(ds.n_features, ds.n_classes, role_seed(seed, STUDENT_ROLE)),
            "student",
            ModelKind::Student,
        ),
    };
    let train = Split::new(&ds.train_x, &ds.train_y, ds.n_features)?;
    let test = Split::new(&ds.test_x, &ds.test_y, ds.n_features)?;
    let mut tm = TsetlinMachine::new(params)?;
    let checkpoint = out.join(format!("{name}_e{}.tmkd", cfg.teacher_epochs));
    let records = train_loop(
        &mut tm,
        &train,
        &test,
        1..=cfg.total_epochs(),
        cfg.timing,
        |tm| tm.fit_epoch(&train.lits, &train.labels, NegativeSampling::Enabled),
        |epoch, tm| {
            if epoch == cfg.teacher_epochs {
                save_model(tm, &checkpoint)?;
                if soft_labels {
                    let soft = get_soft_labels(&class_sums_unclamped(tm, &ds.train_x)?)?;
                    soft.write_csv(fs::File::create(out.join("soft_labels.csv"))?)?;
                }
            }
            Ok(())
        },
    )?;
    let last = records.last().cloned();
    write_curve(out, kind, records)?;
    save_model(&tm, out.join(format!("{name}.tmkd")))?;
    if let Some(e) = last {
        println!(
            "{name}: {} epochs, train {:.4}, test {:.4}; checkpoint {}",
            e.epoch,
            e.train_accuracy,
            e.test_accuracy,
            checkpoint.display()
        );
    }
    Ok(())
}

fn check_width(tm: &TsetlinMachine, width: usize, what: &'static str) -> Result<()> {
    if tm.n_features() != width {
        return Err(Error::Dimension {
            context: what,
            expected: tm.n_features(),
            actual: width,
        }
        .into());
    }
    Ok(())
}

fn distill_from(cfg: &ExperimentConfig, out: &Path, teacher_path: &Path) -> Result<()> {
    let teacher = load_model(teacher_path)
        .with_context(|| format!("loading teacher {}", teacher_path.display()))?;
    let ds = load_dataset(cfg)?;
    check_width(&teacher, ds.n_features, "teacher features vs dataset")?;
    fs::create_dir_all(out)?;
    let student_seed = role_seed(run_seed(cfg.seed, 0), STUDENT_ROLE);
    let epochs = cfg.teacher_epochs + 1..=cfg.total_epochs();
    match cfg.mode {
        Mode::BaselinesOnly => {
            return Err(Error::Config("distill with --teacher needs --mode dkd or ckd".into()).into())
        }
        Mode::Dkd => {
            let train = Split::new(&ds.train_x, &ds.train_y, ds.n_features)?;
            let test = Split::new(&ds.test_x, &ds.test_y, ds.n_features)?;
            let mut tm = TsetlinMachine::new(cfg.student_params(ds.n_features, ds.n_classes, student_seed))?;
            intelligent_transfer(&teacher, &mut tm, cfg.distill.weight_transfer_z)?;
            let soft = get_soft_labels(&class_sums_unclamped(&teacher, &ds.train_x)?)?;
            let records = train_loop(
                &mut tm,
                &train,
                &test,
                epochs,
                cfg.timing,
                |tm| fit_enhanced_epoch(tm, &train.lits, &train.labels, &soft, &cfg.distill),
                |_, _| Ok(()),
            )?;
            report_final("distilled", &records);
            write_curve(out, ModelKind::Distilled, records)?;
            save_model(&tm, out.join("distilled.tmkd"))?;
        }
        Mode::Ckd => {
            let train_m = clause_transform(&teacher, &ds.train_x)?;
            let test_m = clause_transform(&teacher, &ds.test_x)?;
            let mut variants = vec![(ModelKind::Distilled, train_m.clone(), test_m.clone())];
            if let Some(delta) = cfg.pcd_delta {
                let proj = fit_pcd_projection(&train_m, delta)?;
                if proj.retained.is_empty() {
                    return Err(Error::InvalidParams(format!(
                        "downsampling with delta {delta} retained no clause columns"
                    ))
                    .into());
                }
                proj.write_csv(fs::File::create(out.join("projection.csv"))?)?;
                variants.push((
                    ModelKind::DistilledPcd,
                    apply_projection(&train_m, &proj)?,
                    apply_projection(&test_m, &proj)?,
                ));
            }
            for (kind, tr, te) in variants {
                let width = tr.width();
                let train = Split::new(tr.rows(), &ds.train_y, width)?;
                let test = Split::new(te.rows(), &ds.test_y, width)?;
                let mut tm = TsetlinMachine::new(cfg.student_params(width, ds.n_classes, student_seed))?;
                let records = train_loop(
                    &mut tm,
                    &train,
                    &test,
                    epochs.clone(),
                    cfg.timing,
                    |tm| tm.fit_epoch(&train.lits, &train.labels, NegativeSampling::Enabled),
                    |_, _| Ok(()),
                )?;
                report_final(kind.name(), &records);
                write_curve(out, kind, records)?;
                save_model(&tm, out.join(format!("{}.tmkd", kind.name())))?;
            }
        }
    }
    Ok(())
}

fn report_final(name: &str, records: &[EpochRecord]) {
    if let Some(e) = records.last() {
        println!(
            "{name}: epoch {}, train {:.4}, test {:.4}",
            e.epoch, e.train_accuracy, e.test_accuracy
        );
    }
}

fn evaluate(
    cfg: &ExperimentConfig,
    model: &Path,
    teacher: Option<&Path>,
    projection: Option<&Path>,
) -> Result<()> {
    let tm = load_model(model).with_context(|| format!("loading model {}", model.display()))?;
    let ds = load_dataset(cfg)?;
    let features = |xs: &[BitSample]| -> Result<(Vec<BitSample>, usize)> {
        let Some(teacher) = teacher else {
            return Ok((xs.to_vec(), ds.n_features));
        };
        let teacher = load_model(teacher)?;
        let mut m = clause_transform(&teacher, xs)?;
        if let Some(path) = projection {
            let proj = PcdProjection::read_csv(fs::File::open(path)?)?;
            m = apply_projection(&m, &proj)?;
        }
        let width = m.width();
        Ok((m.into_rows(), width))
    };
    let (train_x, width) = features(&ds.train_x)?;
    let (test_x, _) = features(&ds.test_x)?;
    check_width(&tm, width, "model features vs evaluation data")?;
    let train = Split::new(&train_x, &ds.train_y, width)?;
    let test = Split::new(&test_x, &ds.test_y, width)?;
    let pred = tm.predict_encoded(&test.lits);
    let summary = serde_json::json!({
        "model": model.display().to_string(),
        "dataset": ds.name,
        "train_accuracy": tm.accuracy(&train.lits, &train.labels),
        "test_accuracy": accuracy(&pred.labels, &test.labels),
        "test_seconds": pred.elapsed.as_secs_f64(),
    });
    println!("{summary}");
    Ok(())
}

fn parse_shape(shape: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("shape must look like 28x28, got {shape:?}"));
    let (h, w) = shape.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        h.trim().parse().map_err(|_| bad())?,
        w.trim().parse().map_err(|_| bad())?,
    ))
}

fn activation(out: &Path, model: &Path, shape: &str) -> Result<()> {
    let shape = parse_shape(shape)?;
    let tm = load_model(model).with_context(|| format!("loading model {}", model.display()))?;
    let map = activation_map(&tm, shape)?;
    fs::create_dir_all(out)?;
    let stem = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    let ppm = out.join(format!("{stem}_activation.ppm"));
    map.write_ppm(&ppm)?;
    map.write_pgm(out.join(format!("{stem}_activation.pgm")))?;
    println!(
        "{} nonzero of {} features; wrote {}",
        map.nonzero_count(),
        map.values.len(),
        ppm.display()
    );
    Ok(())
}
