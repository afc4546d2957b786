use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{load_mnist_dir, load_text_dir, synth_noisy_xor, BinarizeConfig, Dataset, NoisyXorConfig};
use crate::distill::DistillParams;
use crate::error::{Error, Result};
use crate::machine::{TMParams, DEFAULT_S_MAX, DEFAULT_WEIGHT_LR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dkd,
    Ckd,
    BaselinesOnly,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dkd" => Ok(Mode::Dkd),
            "ckd" => Ok(Mode::Ckd),
            "baselines_only" | "baselines-only" => Ok(Mode::BaselinesOnly),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// `wall` records monotonic-clock seconds; `off` writes zero seconds so
/// reports are byte-for-byte reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    #[default]
    Wall,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    NoisyXor {
        #[serde(default = "default_xor_samples")]
        n_samples: usize,
        #[serde(default = "default_xor_features")]
        n_features: usize,
        #[serde(default = "default_xor_noise")]
        noise_rate: f64,
        #[serde(default)]
        seed: u64,
    },
    /// MNIST-family IDX files in `dir`.
    Idx {
        name: String,
        dir: PathBuf,
        #[serde(default = "default_threshold")]
        threshold: u8,
        #[serde(default)]
        train_limit: Option<usize>,
        #[serde(default)]
        test_limit: Option<usize>,
    },
    /// `train.txt`, `train_labels.txt`, `test.txt`, `test_labels.txt` in `dir`.
    Text {
        name: String,
        dir: PathBuf,
        #[serde(default = "default_max_features")]
        max_features: usize,
        #[serde(default)]
        train_limit: Option<usize>,
        #[serde(default)]
        test_limit: Option<usize>,
    },
}

fn default_xor_samples() -> usize {
    6250
}
fn default_xor_features() -> usize {
    12
}
fn default_xor_noise() -> f64 {
    0.1
}
fn default_threshold() -> u8 {
    BinarizeConfig::default().threshold
}
fn default_max_features() -> usize {
    5000
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::NoisyXor {
            n_samples: default_xor_samples(),
            n_features: default_xor_features(),
            noise_rate: default_xor_noise(),
            seed: 0,
        }
    }
}

impl DatasetSpec {
    /// Resolves a dataset name as used on the command line.
    pub fn from_name(name: &str, dir: Option<&Path>) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        if matches!(lower.as_str(), "noisy-xor" | "noisy_xor" | "xor") {
            return Ok(Self::default());
        }
        let dir = dir
            .ok_or_else(|| Error::Config(format!("dataset {name:?} needs --data-dir")))?
            .to_path_buf();
        if matches!(lower.as_str(), "imdb" | "text") || dir.join("train.txt").exists() {
            Ok(DatasetSpec::Text {
                name: name.to_string(),
                dir,
                max_features: default_max_features(),
                train_limit: None,
                test_limit: None,
            })
        } else {
            Ok(DatasetSpec::Idx {
                name: name.to_string(),
                dir,
                threshold: default_threshold(),
                train_limit: None,
                test_limit: None,
            })
        }
    }

    pub fn name(&self) -> &str {
        match self {
            DatasetSpec::NoisyXor { .. } => "noisy-xor",
            DatasetSpec::Idx { name, .. } | DatasetSpec::Text { name, .. } => name,
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::NoisyXor {
                n_samples,
                n_features,
                noise_rate,
                seed,
            } => synth_noisy_xor(&NoisyXorConfig {
                n_samples: *n_samples,
                n_features: *n_features,
                noise_rate: *noise_rate,
                seed: *seed,
            }),
            DatasetSpec::Idx {
                name,
                dir,
                threshold,
                train_limit,
                test_limit,
            } => Ok(load_mnist_dir(name, dir, BinarizeConfig { threshold: *threshold })?
                .truncated(*train_limit, *test_limit)),
            DatasetSpec::Text {
                name,
                dir,
                max_features,
                train_limit,
                test_limit,
            } => Ok(load_text_dir(name, dir, *max_features)?.truncated(*train_limit, *test_limit)),
        }
    }
}

/// Clause count, threshold and specificity of one machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub teacher: ModelSpec,
    pub student: ModelSpec,
    pub weight_lr: f64,
    pub s_max: u16,
    /// `E_T`: teacher epochs before the checkpoint.
    pub teacher_epochs: usize,
    /// `E_S`: epochs trained after the checkpoint.
    pub student_epochs: usize,
    /// `K`: independent repetitions. Unset means 10, or 1 in ckd mode.
    pub runs: Option<usize>,
    pub mode: Mode,
    pub distill: DistillParams,
    /// Downsampling threshold for the CKD variant; `null` skips it.
    pub pcd_delta: Option<f64>,
    pub seed: u64,
    /// Worker threads for the repetitions.
    pub jobs: usize,
    pub deterministic: bool,
    pub timing: Timing,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            teacher: ModelSpec {
                clauses: 100,
                threshold: 15,
                specificity: 3.9,
            },
            student: ModelSpec {
                clauses: 10,
                threshold: 15,
                specificity: 3.9,
            },
            weight_lr: DEFAULT_WEIGHT_LR,
            s_max: DEFAULT_S_MAX,
            teacher_epochs: 50,
            student_epochs: 100,
            runs: None,
            mode: Mode::Dkd,
            distill: DistillParams::default(),
            pcd_delta: Some(0.15),
            seed: 42,
            jobs: 1,
            deterministic: true,
            timing: Timing::Wall,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn total_epochs(&self) -> usize {
        self.teacher_epochs + self.student_epochs
    }

    fn params(&self, spec: &ModelSpec, n_features: usize, n_classes: usize, seed: u64) -> TMParams {
        TMParams {
            deterministic: self.deterministic,
            ..TMParams::new(n_features, n_classes, spec.clauses, spec.threshold, spec.specificity)
                .with_seed(seed)
                .with_weight_lr(self.weight_lr)
                .with_s_max(self.s_max)
        }
    }

    pub fn teacher_params(&self, n_features: usize, n_classes: usize, seed: u64) -> TMParams {
        self.params(&self.teacher, n_features, n_classes, seed)
    }

    pub fn student_params(&self, n_features: usize, n_classes: usize, seed: u64) -> TMParams {
        self.params(&self.student, n_features, n_classes, seed)
    }

    pub fn effective_runs(&self) -> usize {
        self.runs.unwrap_or(match self.mode {
            Mode::Ckd => 1,
            _ => 10,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.teacher_epochs == 0 || self.student_epochs == 0 {
            return bad("teacher_epochs and student_epochs must be >= 1".into());
        }
        if self.runs == Some(0) {
            return bad("runs must be >= 1".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be >= 1".into());
        }
        for (role, spec) in [("teacher", &self.teacher), ("student", &self.student)] {
            self.params(spec, 2, 2, 0)
                .validate()
                .map_err(|e| Error::Config(format!("{role}: {e}")))?;
        }
        if self.mode == Mode::Dkd && self.student.clauses > self.teacher.clauses {
            return bad("student must not have more clauses than the teacher".into());
        }
        self.distill
            .validate()
            .map_err(|e| Error::Config(format!("distill: {e}")))?;
        if let Some(delta) = self.pcd_delta {
            if !(0.0..0.5).contains(&delta) {
                return bad(format!("pcd_delta must be in [0, 0.5), got {delta}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(cfg.distill.alpha, 0.5);
    }

    #[test]
    fn ckd_defaults_to_one_run() {
        let ckd = ExperimentConfig::from_json(r#"{"mode": "ckd"}"#).unwrap();
        assert_eq!(ckd.effective_runs(), 1);
        assert_eq!(ExperimentConfig::default().effective_runs(), 10);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"mode": "ckd", "runs": 2, "dataset": {"kind": "noisy_xor", "n_samples": 100}}"#,
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Ckd);
        assert_eq!(cfg.runs, Some(2));
        assert_eq!(cfg.effective_runs(), 2);
        assert_eq!(
            cfg.dataset,
            DatasetSpec::NoisyXor {
                n_samples: 100,
                n_features: 12,
                noise_rate: 0.1,
                seed: 0
            }
        );
    }

    #[test]
    fn invalid_configs() {
        for text in [
            r#"{"runs": 0}"#,
            r#"{"teacher_epochs": 0}"#,
            r#"{"student": {"clauses": 200, "threshold": 5, "specificity": 3.0}}"#,
            r#"{"student": {"clauses": 3, "threshold": 5, "specificity": 3.0}}"#,
            r#"{"distill": {"alpha": 2.0}}"#,
            r#"{"mode": "both"}"#,
            r#"{"unknown_key": 1}"#,
        ] {
            let err = ExperimentConfig::from_json(text).unwrap_err();
            assert!(err.is_config_error(), "{text}: {err}");
        }
    }

    #[test]
    fn dataset_names() {
        assert_eq!(DatasetSpec::from_name("noisy-xor", None).unwrap(), DatasetSpec::default());
        assert!(DatasetSpec::from_name("mnist", None).is_err());
        let spec = DatasetSpec::from_name("mnist", Some(Path::new("/data/mnist"))).unwrap();
        assert!(matches!(spec, DatasetSpec::Idx { threshold: 75, .. }));
        let spec = DatasetSpec::from_name("imdb", Some(Path::new("/data/imdb"))).unwrap();
        assert!(matches!(spec, DatasetSpec::Text { max_features: 5000, .. }));
    }
}
