//! The teacher/student/distilled protocol repeated over `K` seeds.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Mode, Timing};
use super::report::{EpochRecord, ModelCurve, ModelKind, RunReport, RunResult};
use crate::ckd::{apply_projection, clause_transform_literals, fit_pcd_projection, ClauseOutputMatrix};
use crate::data::Dataset;
use crate::distill::{class_sums_unclamped, fit_enhanced_epoch, get_soft_labels, intelligent_transfer};
use crate::error::{Error, Result};
use crate::machine::{encode_all, LiteralVector, NegativeSampling, TsetlinMachine};
use crate::persist;
use crate::rng::{role_seed, run_seed};

pub const STUDENT_ROLE: u64 = 1;
pub const TEACHER_ROLE: u64 = 2;

#[derive(Clone, Copy)]
struct Clock(Timing);

impl Clock {
    fn time<T>(self, f: impl FnOnce() -> T) -> (T, f64) {
        let start = Instant::now();
        let out = f();
        let secs = match self.0 {
            Timing::Wall => start.elapsed().as_secs_f64(),
            Timing::Off => 0.0,
        };
        (out, secs)
    }
}

/// A split expanded to literals once, outside any timed region.
pub struct EncodedSplit {
    pub lits: Vec<LiteralVector>,
    pub labels: Vec<usize>,
}

impl EncodedSplit {
    fn from_matrix(m: &ClauseOutputMatrix, labels: &[usize]) -> Result<Self> {
        Ok(Self {
            lits: encode_all(m.rows(), m.width())?,
            labels: labels.to_vec(),
        })
    }
}

fn accuracy_of(pred: &[usize], labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    pred.iter().zip(labels).filter(|(p, y)| p == y).count() as f64 / labels.len() as f64
}

/// Evaluates on both splits; only the test prediction is timed. `extra_test`
/// is added to the test time (feature transforms that inference needs).
fn evaluate(
    tm: &TsetlinMachine,
    train: &EncodedSplit,
    test: &EncodedSplit,
    clock: Clock,
    extra_test: f64,
) -> (f64, f64, f64) {
    let train_acc = tm.accuracy(&train.lits, &train.labels);
    let (pred, secs) = clock.time(|| tm.predict_encoded(&test.lits).labels);
    (train_acc, accuracy_of(&pred, &test.labels), secs + extra_test)
}

/// Standard training with per-epoch evaluation. Returns the curve and, when
/// `checkpoint_at` is reached, the model file bytes at that epoch.
fn train_baseline(
    tm: &mut TsetlinMachine,
    train: &EncodedSplit,
    test: &EncodedSplit,
    epochs: usize,
    clock: Clock,
    checkpoint_at: Option<usize>,
) -> Result<(Vec<EpochRecord>, Option<Vec<u8>>)> {
    let mut records = Vec::with_capacity(epochs);
    let mut checkpoint = None;
    for epoch in 1..=epochs {
        let (res, train_secs) =
            clock.time(|| tm.fit_epoch(&train.lits, &train.labels, NegativeSampling::Enabled));
        res?;
        let (train_accuracy, test_accuracy, test_secs) = evaluate(tm, train, test, clock, 0.0);
        records.push(EpochRecord {
            epoch,
            train_accuracy,
            test_accuracy,
            train_seconds: Some(train_secs),
            test_seconds: Some(test_secs),
        });
        if checkpoint_at == Some(epoch) {
            checkpoint = Some(persist::to_bytes(tm)?);
        }
    }
    Ok((records, checkpoint))
}

/// Teacher epochs `1..=E_T` as seen by a model distilled at the checkpoint.
fn inherited(teacher: &[EpochRecord], upto: usize) -> Vec<EpochRecord> {
    teacher[..upto]
        .iter()
        .map(|e| EpochRecord {
            train_seconds: None,
            test_seconds: None,
            ..e.clone()
        })
        .collect()
}

struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    ds: &'a Dataset,
    train: EncodedSplit,
    test: EncodedSplit,
    clock: Clock,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let ds = cfg.dataset.load()?;
    run_experiment_on(cfg, &ds)
}

/// Runs the protocol on an already loaded dataset.
pub fn run_experiment_on(cfg: &ExperimentConfig, ds: &Dataset) -> Result<RunReport> {
    cfg.validate()?;
    let shared = Shared {
        cfg,
        ds,
        train: EncodedSplit {
            lits: encode_all(&ds.train_x, ds.n_features)?,
            labels: ds.train_y.clone(),
        },
        test: EncodedSplit {
            lits: encode_all(&ds.test_x, ds.n_features)?,
            labels: ds.test_y.clone(),
        },
        clock: Clock(cfg.timing),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    let runs = pool.install(|| {
        (0..cfg.effective_runs())
            .into_par_iter()
            .map(|r| run_once(&shared, r))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(RunReport {
        config: cfg.clone(),
        dataset: ds.name.clone(),
        n_train: ds.train_x.len(),
        n_test: ds.test_x.len(),
        runs,
    })
}

fn run_once(sh: &Shared<'_>, run: usize) -> Result<RunResult> {
    let cfg = sh.cfg;
    let (n_features, n_classes) = (sh.ds.n_features, sh.ds.n_classes);
    let seed = run_seed(cfg.seed, run);
    let student_seed = role_seed(seed, STUDENT_ROLE);
    let total = cfg.total_epochs();

    let mut student = TsetlinMachine::new(cfg.student_params(n_features, n_classes, student_seed))?;
    let (student_curve, _) = train_baseline(&mut student, &sh.train, &sh.test, total, sh.clock, None)?;

    let mut teacher = TsetlinMachine::new(cfg.teacher_params(
        n_features,
        n_classes,
        role_seed(seed, TEACHER_ROLE),
    ))?;
    let (teacher_curve, checkpoint) = train_baseline(
        &mut teacher,
        &sh.train,
        &sh.test,
        total,
        sh.clock,
        Some(cfg.teacher_epochs),
    )?;
    let checkpoint = checkpoint.expect("teacher_epochs <= total epochs");

    let mut result = RunResult {
        run,
        seed,
        curves: Vec::new(),
        transfer_test_accuracy: None,
        ckd_width: None,
        pcd_retained: None,
    };
    match cfg.mode {
        Mode::BaselinesOnly => {}
        Mode::Dkd => {
            let teacher_at = persist::from_bytes(&checkpoint)?;
            let curve = run_dkd(sh, &teacher_at, &teacher_curve, student_seed, &mut result)?;
            result.curves.push(curve);
        }
        Mode::Ckd => {
            let teacher_at = persist::from_bytes(&checkpoint)?;
            let curves = run_ckd(sh, &teacher_at, &teacher_curve, student_seed, &mut result)?;
            result.curves.extend(curves);
        }
    }
    result.curves.insert(
        0,
        ModelCurve {
            model: ModelKind::Student,
            run,
            epochs: student_curve,
        },
    );
    result.curves.insert(
        0,
        ModelCurve {
            model: ModelKind::Teacher,
            run,
            epochs: teacher_curve,
        },
    );
    Ok(result)
}

fn run_dkd(
    sh: &Shared<'_>,
    teacher: &TsetlinMachine,
    teacher_curve: &[EpochRecord],
    student_seed: u64,
    result: &mut RunResult,
) -> Result<ModelCurve> {
    let cfg = sh.cfg;
    let mut distilled = TsetlinMachine::new(cfg.student_params(
        sh.ds.n_features,
        sh.ds.n_classes,
        student_seed,
    ))?;
    intelligent_transfer(teacher, &mut distilled, cfg.distill.weight_transfer_z)?;
    result.transfer_test_accuracy = Some(distilled.accuracy(&sh.test.lits, &sh.test.labels));
    let soft = get_soft_labels(&class_sums_unclamped(teacher, &sh.ds.train_x)?)?;

    let mut epochs = inherited(teacher_curve, cfg.teacher_epochs);
    for e in 1..=cfg.student_epochs {
        let (res, train_secs) = sh.clock.time(|| {
            fit_enhanced_epoch(&mut distilled, &sh.train.lits, &sh.train.labels, &soft, &cfg.distill)
        });
        res?;
        let (train_accuracy, test_accuracy, test_secs) =
            evaluate(&distilled, &sh.train, &sh.test, sh.clock, 0.0);
        epochs.push(EpochRecord {
            epoch: cfg.teacher_epochs + e,
            train_accuracy,
            test_accuracy,
            train_seconds: Some(train_secs),
            test_seconds: Some(test_secs),
        });
    }
    Ok(ModelCurve {
        model: ModelKind::Distilled,
        run: result.run,
        epochs,
    })
}

/// Trains a fresh student-shaped machine on derived features. Test time
/// includes `transform_secs`, the cost of deriving the test features.
#[allow(clippy::too_many_arguments)]
fn train_on_features(
    sh: &Shared<'_>,
    model: ModelKind,
    train: &EncodedSplit,
    test: &EncodedSplit,
    width: usize,
    transform_secs: f64,
    teacher_curve: &[EpochRecord],
    student_seed: u64,
    run: usize,
) -> Result<ModelCurve> {
    let cfg = sh.cfg;
    let mut tm = TsetlinMachine::new(cfg.student_params(width, sh.ds.n_classes, student_seed))?;
    let mut epochs = inherited(teacher_curve, cfg.teacher_epochs);
    for e in 1..=cfg.student_epochs {
        let (res, train_secs) = sh
            .clock
            .time(|| tm.fit_epoch(&train.lits, &train.labels, NegativeSampling::Enabled));
        res?;
        let (train_accuracy, test_accuracy, test_secs) =
            evaluate(&tm, train, test, sh.clock, transform_secs);
        epochs.push(EpochRecord {
            epoch: cfg.teacher_epochs + e,
            train_accuracy,
            test_accuracy,
            train_seconds: Some(train_secs),
            test_seconds: Some(test_secs),
        });
    }
    Ok(ModelCurve { model, run, epochs })
}

fn run_ckd(
    sh: &Shared<'_>,
    teacher: &TsetlinMachine,
    teacher_curve: &[EpochRecord],
    student_seed: u64,
    result: &mut RunResult,
) -> Result<Vec<ModelCurve>> {
    let train_m = clause_transform_literals(teacher, &sh.train.lits)?;
    let train = EncodedSplit::from_matrix(&train_m, &sh.train.labels)?;
    let (test, transform_secs) = sh.clock.time(|| {
        let m = clause_transform_literals(teacher, &sh.test.lits)?;
        EncodedSplit::from_matrix(&m, &sh.test.labels)
    });
    let test = test?;
    let width = train_m.width();
    result.ckd_width = Some(width);

    let mut curves = vec![train_on_features(
        sh,
        ModelKind::Distilled,
        &train,
        &test,
        width,
        transform_secs,
        teacher_curve,
        student_seed,
        result.run,
    )?];

    if let Some(delta) = sh.cfg.pcd_delta {
        let projection = fit_pcd_projection(&train_m, delta)?;
        if projection.retained.is_empty() {
            return Err(Error::InvalidParams(format!(
                "downsampling with delta {delta} retained no clause columns"
            )));
        }
        result.pcd_retained = Some(projection.retained.len());
        let train_p = EncodedSplit::from_matrix(&apply_projection(&train_m, &projection)?, &sh.train.labels)?;
        let (test_p, pcd_transform_secs) = sh.clock.time(|| {
            let m = clause_transform_literals(teacher, &sh.test.lits)?;
            EncodedSplit::from_matrix(&apply_projection(&m, &projection)?, &sh.test.labels)
        });
        curves.push(train_on_features(
            sh,
            ModelKind::DistilledPcd,
            &train_p,
            &test_p?,
            projection.retained.len(),
            pcd_transform_secs,
            teacher_curve,
            student_seed,
            result.run,
        )?);
    }
    Ok(curves)
}
