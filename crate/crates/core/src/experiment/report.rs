//! Per-epoch curves, K-run aggregates and their CSV/text renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Teacher,
    Student,
    Distilled,
    DistilledPcd,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Teacher,
        ModelKind::Student,
        ModelKind::Distilled,
        ModelKind::DistilledPcd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Teacher => "teacher",
            ModelKind::Student => "student",
            ModelKind::Distilled => "distilled",
            ModelKind::DistilledPcd => "distilled_pcd",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

/// One epoch of one model. Seconds are `None` for epochs a distilled
/// model inherits from its teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_seconds: Option<f64>,
    pub test_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCurve {
    pub model: ModelKind,
    pub run: usize,
    pub epochs: Vec<EpochRecord>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl ModelCurve {
    pub fn final_train_accuracy(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.train_accuracy)
    }

    pub fn final_test_accuracy(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.test_accuracy)
    }

    /// Mean update-pass seconds over the epochs this model trained itself.
    pub fn mean_train_seconds(&self) -> Option<f64> {
        mean(self.epochs.iter().filter_map(|e| e.train_seconds))
    }

    pub fn mean_test_seconds(&self) -> Option<f64> {
        mean(self.epochs.iter().filter_map(|e| e.test_seconds))
    }

    pub fn timed_epochs(&self) -> usize {
        self.epochs.iter().filter(|e| e.train_seconds.is_some()).count()
    }

    pub fn test_accuracies(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.test_accuracy).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub curves: Vec<ModelCurve>,
    /// Test accuracy of the distilled model right after clause transfer.
    pub transfer_test_accuracy: Option<f64>,
    /// Width of the clause-output feature space.
    pub ckd_width: Option<usize>,
    pub pcd_retained: Option<usize>,
}

impl RunResult {
    pub fn curve(&self, model: ModelKind) -> Option<&ModelCurve> {
        self.curves.iter().find(|c| c.model == model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub dataset: String,
    pub n_train: usize,
    pub n_test: usize,
    pub runs: Vec<RunResult>,
}

impl RunReport {
    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn curves(&self, model: ModelKind) -> impl Iterator<Item = &ModelCurve> {
        self.runs.iter().filter_map(move |r| r.curve(model))
    }

    pub fn all_curves(&self) -> Vec<ModelCurve> {
        self.runs.iter().flat_map(|r| r.curves.iter().cloned()).collect()
    }

    pub fn summary(&self) -> Vec<ModelSummary> {
        summarize(&self.all_curves())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (zero for a single run).
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub runs: usize,
    pub train_accuracy: MeanStd,
    pub test_accuracy: MeanStd,
    /// Per-run mean epoch time, aggregated over runs.
    pub train_seconds: MeanStd,
    pub test_seconds: MeanStd,
    pub normalized_train_time: Option<f64>,
    pub normalized_test_time: Option<f64>,
}

/// Aggregates curves per model: final-epoch accuracies and per-run mean
/// epoch times, each as mean and sample deviation over the runs. Times are
/// normalized by the teacher's when a timed teacher is present.
pub fn summarize(curves: &[ModelCurve]) -> Vec<ModelSummary> {
    let mut out: Vec<ModelSummary> = ModelKind::ALL
        .iter()
        .filter_map(|&model| {
            let mine: Vec<&ModelCurve> = curves.iter().filter(|c| c.model == model).collect();
            if mine.is_empty() {
                return None;
            }
            let collect = |f: &dyn Fn(&ModelCurve) -> Option<f64>| -> Vec<f64> {
                mine.iter().filter_map(|c| f(c)).collect()
            };
            Some(ModelSummary {
                model,
                runs: mine.len(),
                train_accuracy: MeanStd::of(&collect(&|c| Some(c.final_train_accuracy()))),
                test_accuracy: MeanStd::of(&collect(&|c| Some(c.final_test_accuracy()))),
                train_seconds: MeanStd::of(&collect(&ModelCurve::mean_train_seconds)),
                test_seconds: MeanStd::of(&collect(&ModelCurve::mean_test_seconds)),
                normalized_train_time: None,
                normalized_test_time: None,
            })
        })
        .collect();
    let teacher = out
        .iter()
        .find(|s| s.model == ModelKind::Teacher)
        .map(|s| (s.train_seconds.mean, s.test_seconds.mean));
    if let Some((train_ref, test_ref)) = teacher {
        let ratio = |x: f64, r: f64| (r > 0.0 && x.is_finite()).then(|| x / r);
        for s in &mut out {
            s.normalized_train_time = ratio(s.train_seconds.mean, train_ref);
            s.normalized_test_time = ratio(s.test_seconds.mean, test_ref);
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9}")).unwrap_or_default()
}

pub fn write_model_csv(curves: &[&ModelCurve], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "epoch", "split", "accuracy", "seconds"])?;
    for c in curves {
        for e in &c.epochs {
            for (split, acc, secs) in [
                ("train", e.train_accuracy, e.train_seconds),
                ("test", e.test_accuracy, e.test_seconds),
            ] {
                w.write_record([
                    c.run.to_string(),
                    e.epoch.to_string(),
                    split.to_string(),
                    format!("{acc:.6}"),
                    fmt_opt(secs),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_model_csv(model: ModelKind, path: &Path) -> Result<Vec<ModelCurve>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut curves: Vec<ModelCurve> = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default().trim();
        let bad = |what: &str| Error::Corrupt(format!("{}: bad {what} in {:?}", path.display(), record));
        let run: usize = field(0).parse().map_err(|_| bad("run"))?;
        let epoch: usize = field(1).parse().map_err(|_| bad("epoch"))?;
        let split = field(2);
        let accuracy: f64 = field(3).parse().map_err(|_| bad("accuracy"))?;
        let seconds = match field(4) {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("seconds"))?),
        };
        if curves.last().is_none_or(|c| c.run != run) {
            curves.push(ModelCurve {
                model,
                run,
                epochs: Vec::new(),
            });
        }
        let curve = curves.last_mut().expect("pushed above");
        if curve.epochs.last().is_none_or(|e| e.epoch != epoch) {
            curve.epochs.push(EpochRecord {
                epoch,
                train_accuracy: f64::NAN,
                test_accuracy: f64::NAN,
                train_seconds: None,
                test_seconds: None,
            });
        }
        let rec = curve.epochs.last_mut().expect("pushed above");
        match split {
            "train" => {
                rec.train_accuracy = accuracy;
                rec.train_seconds = seconds;
            }
            "test" => {
                rec.test_accuracy = accuracy;
                rec.test_seconds = seconds;
            }
            _ => return Err(bad("split")),
        }
    }
    Ok(curves)
}

/// Reads every per-model CSV present in `dir`.
pub fn read_report_dir(dir: impl AsRef<Path>) -> Result<Vec<ModelCurve>> {
    let dir = dir.as_ref();
    let mut curves = Vec::new();
    for model in ModelKind::ALL {
        let path = dir.join(model.file_name());
        if path.exists() {
            curves.extend(read_model_csv(model, &path)?);
        }
    }
    if curves.is_empty() {
        return Err(Error::EmptyInput("report directory has no model csv files"));
    }
    Ok(curves)
}

pub fn write_summary_csv(summaries: &[ModelSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "model",
        "runs",
        "train_accuracy_mean",
        "train_accuracy_std",
        "test_accuracy_mean",
        "test_accuracy_std",
        "train_epoch_seconds_mean",
        "train_epoch_seconds_std",
        "test_seconds_mean",
        "test_seconds_std",
        "normalized_train_time",
        "normalized_test_time",
    ])?;
    let num = |x: f64| if x.is_finite() { format!("{x:.9}") } else { String::new() };
    for s in summaries {
        w.write_record([
            s.model.name().to_string(),
            s.runs.to_string(),
            num(s.train_accuracy.mean),
            num(s.train_accuracy.std),
            num(s.test_accuracy.mean),
            num(s.test_accuracy.std),
            num(s.train_seconds.mean),
            num(s.train_seconds.std),
            num(s.test_seconds.mean),
            num(s.test_seconds.std),
            fmt_opt(s.normalized_train_time),
            fmt_opt(s.normalized_test_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_text(summaries: &[ModelSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Accuracy is the final epoch's, as mean ± sample std over runs. Epoch times\n\
         average only the epochs a model trained itself. Normalized times divide\n\
         by the teacher's, which equals a per-sample normalization on one dataset.\n"
    );
    let _ = writeln!(
        out,
        "{:<14} {:>4}  {:>17}  {:>17}  {:>21}  {:>21}  {:>8}  {:>8}",
        "model", "runs", "train acc", "test acc", "train s/epoch", "test s", "norm trn", "norm tst"
    );
    let pct = |m: MeanStd| format!("{:.2} ± {:.2}", 100.0 * m.mean, 100.0 * m.std);
    let secs = |m: MeanStd| format!("{:.6} ± {:.6}", m.mean, m.std);
    let ratio = |r: Option<f64>| r.map_or("-".to_string(), |x| format!("{x:.3}"));
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<14} {:>4}  {:>17}  {:>17}  {:>21}  {:>21}  {:>8}  {:>8}",
            s.model.name(),
            s.runs,
            pct(s.train_accuracy),
            pct(s.test_accuracy),
            secs(s.train_seconds),
            secs(s.test_seconds),
            ratio(s.normalized_train_time),
            ratio(s.normalized_test_time),
        );
    }
    out
}

/// Writes `summary.csv` and `summary.txt` for the given curves.
pub fn write_summary(curves: &[ModelCurve], dir: impl AsRef<Path>) -> Result<Vec<ModelSummary>> {
    let dir = dir.as_ref();
    let summaries = summarize(curves);
    write_summary_csv(&summaries, &dir.join("summary.csv"))?;
    fs::write(dir.join("summary.txt"), summary_text(&summaries))?;
    Ok(summaries)
}

/// One CSV per model (`run,epoch,split,accuracy,seconds`), the summary
/// files, and the configuration that produced them.
pub fn emit_report(report: &RunReport, dir: impl AsRef<Path>) -> Result<Vec<ModelSummary>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for model in ModelKind::ALL {
        let curves: Vec<&ModelCurve> = report.curves(model).collect();
        if !curves.is_empty() {
            write_model_csv(&curves, &dir.join(model.file_name()))?;
        }
    }
    fs::write(dir.join("config.json"), report.config.to_json())?;
    write_summary(&report.all_curves(), dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(model: ModelKind, run: usize, accs: &[f64], secs: &[Option<f64>]) -> ModelCurve {
        ModelCurve {
            model,
            run,
            epochs: accs
                .iter()
                .zip(secs)
                .enumerate()
                .map(|(i, (&a, &s))| EpochRecord {
                    epoch: i + 1,
                    train_accuracy: a,
                    test_accuracy: a / 2.0,
                    train_seconds: s,
                    test_seconds: s.map(|x| x / 10.0),
                })
                .collect(),
        }
    }

    #[test]
    fn mean_std_sample_deviation() {
        let m = MeanStd::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[7.0]).std, 0.0);
    }

    #[test]
    fn inherited_epochs_excluded_from_timing() {
        let c = curve(
            ModelKind::Distilled,
            0,
            &[0.5, 0.6, 0.7, 0.8],
            &[None, None, Some(1.0), Some(3.0)],
        );
        assert_eq!(c.mean_train_seconds(), Some(2.0));
        assert_eq!(c.timed_epochs(), 2);
    }

    #[test]
    fn normalization_relative_to_teacher() {
        let curves = vec![
            curve(ModelKind::Teacher, 0, &[0.9, 0.9], &[Some(4.0), Some(4.0)]),
            curve(ModelKind::Student, 0, &[0.8, 0.8], &[Some(1.0), Some(1.0)]),
        ];
        let s = summarize(&curves);
        assert_eq!(s[0].normalized_train_time, Some(1.0));
        assert_eq!(s[1].normalized_train_time, Some(0.25));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("distilled.csv");
        let a = curve(ModelKind::Distilled, 0, &[0.5, 0.75], &[None, Some(0.125)]);
        let b = curve(ModelKind::Distilled, 1, &[0.25, 0.5], &[None, Some(0.5)]);
        write_model_csv(&[&a, &b], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("run,epoch,split,accuracy,seconds\n0,1,train,0.500000,\n"));
        let back = read_model_csv(ModelKind::Distilled, &path).unwrap();
        assert_eq!(back, vec![a, b]);
    }
}
