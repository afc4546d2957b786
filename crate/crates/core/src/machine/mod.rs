//! The weighted multi-class Tsetlin Machine.
//!
//! One [`ClauseBank`] per class; classification is the argmax of the
//! unclamped weighted class sums. Training follows the standard
//! multi-class scheme: the true class is updated toward output 1 and one
//! uniformly drawn other class toward output 0.

mod bank;
mod clause;
mod feedback;
mod literals;

use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use bank::{polarity_of, ClauseBank};
pub use clause::{Clause, EvalMode, Polarity, Specificity, MIN_WEIGHT};
pub use feedback::{feedback_probability, Target};
pub use literals::{build_literals, encode_all, BitSample, LiteralVector};

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Default automaton depth: a state fits in one byte.
pub const DEFAULT_S_MAX: u16 = 127;
/// Default multiplicative weight learning rate.
pub const DEFAULT_WEIGHT_LR: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct TMParams {
    /// Clauses per class (`|C|`); even.
    pub n_clauses: usize,
    /// Vote margin `T`.
    pub threshold: u32,
    /// Specificity `s >= 1`.
    pub specificity: f64,
    /// Weight learning rate `gamma >= 0`.
    pub weight_lr: f64,
    pub n_features: usize,
    pub n_classes: usize,
    /// States per automaton action; states live in `[1, 2 * s_max]`.
    pub s_max: u16,
    pub rng_seed: u64,
    /// Sequential clause feedback. When false, clauses of one class update in
    /// parallel from per-clause streams; still reproducible, but a different
    /// trajectory than the sequential order.
    pub deterministic: bool,
}

impl TMParams {
    pub fn new(
        n_features: usize,
        n_classes: usize,
        n_clauses: usize,
        threshold: u32,
        specificity: f64,
    ) -> Self {
        Self {
            n_clauses,
            threshold,
            specificity,
            weight_lr: DEFAULT_WEIGHT_LR,
            n_features,
            n_classes,
            s_max: DEFAULT_S_MAX,
            rng_seed: 0,
            deterministic: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_weight_lr(mut self, weight_lr: f64) -> Self {
        self.weight_lr = weight_lr;
        self
    }

    pub fn with_s_max(mut self, s_max: u16) -> Self {
        self.s_max = s_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_clauses == 0 || self.n_clauses % 2 != 0 {
            return bad(format!("clause count must be even and positive, got {}", self.n_clauses));
        }
        if self.threshold == 0 {
            return bad("threshold must be >= 1".into());
        }
        if !(self.specificity.is_finite() && self.specificity >= 1.0) {
            return bad(format!("specificity must be >= 1, got {}", self.specificity));
        }
        if !(self.weight_lr.is_finite() && self.weight_lr >= 0.0) {
            return bad(format!("weight learning rate must be >= 0, got {}", self.weight_lr));
        }
        if self.n_features == 0 {
            return bad("feature count must be positive".into());
        }
        if self.n_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.n_classes));
        }
        if self.s_max == 0 || self.s_max > u16::MAX / 2 {
            return bad(format!("automaton depth {} out of range", self.s_max));
        }
        Ok(())
    }
}

/// Whether [`TsetlinMachine::fit_epoch`] also trains a random negative class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeSampling {
    Enabled,
    /// Only the true class is updated (no negative draw either).
    Disabled,
}

/// Per-epoch accuracy on the training data and wall time of the update pass.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingReport {
    pub epochs: Vec<EpochStats>,
}

/// Labels from a batch prediction plus the wall time of the whole batch.
#[derive(Debug, Clone)]
pub struct BatchPrediction {
    pub labels: Vec<usize>,
    pub elapsed: Duration,
}

/// Complete machine state: parameters, RNG position, and per class the
/// clause weights `W^k` and automaton state matrix `A^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot {
    pub params: TMParams,
    pub rng: RngState,
    pub classes: Vec<ClassState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassState {
    pub weights: Vec<f64>,
    /// One row of `2 * n_features` automaton states per clause.
    pub states: Vec<Vec<u16>>,
}

#[derive(Debug, Clone)]
pub struct TsetlinMachine {
    params: TMParams,
    banks: Vec<ClauseBank>,
    specificity: Specificity,
    rng: ChaCha8Rng,
}

impl TsetlinMachine {
    pub fn new(params: TMParams) -> Result<Self> {
        params.validate()?;
        let n_literals = 2 * params.n_features;
        let banks = (0..params.n_classes)
            .map(|k| ClauseBank::new(k, params.n_clauses, n_literals, params.s_max))
            .collect();
        let specificity = Specificity::new(params.specificity)?;
        let rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        Ok(Self {
            params,
            banks,
            specificity,
            rng,
        })
    }

    pub fn params(&self) -> &TMParams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.params.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.params.n_classes
    }

    pub fn n_clauses(&self) -> usize {
        self.params.n_clauses
    }

    pub fn banks(&self) -> &[ClauseBank] {
        &self.banks
    }

    pub fn bank(&self, class: usize) -> &ClauseBank {
        &self.banks[class]
    }

    pub(crate) fn bank_mut(&mut self, class: usize) -> &mut ClauseBank {
        &mut self.banks[class]
    }

    pub fn literals(&self, x: &BitSample) -> Result<LiteralVector> {
        build_literals(x, self.params.n_features)
    }

    fn check_literals(&self, lits: &LiteralVector) -> Result<()> {
        if lits.n_features() != self.params.n_features {
            return Err(Error::Dimension {
                context: "literal vector",
                expected: self.params.n_features,
                actual: lits.n_features(),
            });
        }
        Ok(())
    }

    /// Class sums for every class, clamped to `[-T, T]` when asked.
    pub fn class_sums(&self, lits: &LiteralVector, clamp_to: Option<u32>) -> Vec<f64> {
        self.banks.iter().map(|b| b.class_sum(lits, clamp_to)).collect()
    }

    /// Argmax of the unclamped class sums; ties go to the lowest class index.
    pub fn predict_literals(&self, lits: &LiteralVector) -> usize {
        let mut best = 0;
        let mut best_sum = f64::NEG_INFINITY;
        for (k, bank) in self.banks.iter().enumerate() {
            let s = bank.class_sum(lits, None);
            if s > best_sum {
                best = k;
                best_sum = s;
            }
        }
        best
    }

    pub fn predict(&self, x: &BitSample) -> Result<usize> {
        Ok(self.predict_literals(&self.literals(x)?))
    }

    /// Predicts every sample; the elapsed time covers the whole batch
    /// including literal expansion.
    pub fn predict_batch(&self, xs: &[BitSample]) -> Result<BatchPrediction> {
        let start = Instant::now();
        let labels = xs
            .iter()
            .map(|x| self.predict(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(BatchPrediction {
            labels,
            elapsed: start.elapsed(),
        })
    }

    /// Sequential batch prediction over pre-expanded literals.
    pub fn predict_encoded(&self, lits: &[LiteralVector]) -> BatchPrediction {
        let start = Instant::now();
        let labels = lits.iter().map(|l| self.predict_literals(l)).collect();
        BatchPrediction {
            labels,
            elapsed: start.elapsed(),
        }
    }

    /// Parallel prediction; inference never mutates the machine.
    pub fn predict_encoded_par(&self, lits: &[LiteralVector]) -> Vec<usize> {
        lits.par_iter().map(|l| self.predict_literals(l)).collect()
    }

    pub fn accuracy(&self, lits: &[LiteralVector], y: &[usize]) -> f64 {
        if lits.is_empty() {
            return 0.0;
        }
        let correct = lits
            .iter()
            .zip(y)
            .filter(|(l, &label)| self.predict_literals(l) == label)
            .count();
        correct as f64 / lits.len() as f64
    }

    /// One update of a single class bank toward `target`.
    ///
    /// The feedback probability is computed once from the pre-update class
    /// sum (train-mode clause outputs, clipped to `[-T, T]`); each clause is
    /// then selected independently. Selected clauses receive Type I feedback
    /// when their polarity agrees with the target and Type II otherwise.
    pub fn update_class(&mut self, class: usize, lits: &LiteralVector, target: Target) {
        let threshold = self.params.threshold;
        let weight_lr = self.params.weight_lr;
        let specificity = self.specificity;
        let sum = self.banks[class].vote(lits, EvalMode::Train);
        let p = feedback_probability(sum, target, threshold);
        if p <= 0.0 {
            return;
        }
        let apply = |clause: &mut Clause, rng: &mut ChaCha8Rng| {
            let agrees = matches!(
                (clause.polarity(), target),
                (Polarity::Positive, Target::One) | (Polarity::Negative, Target::Zero)
            );
            if agrees {
                clause.type_i_feedback(lits, &specificity, weight_lr, rng);
            } else {
                clause.type_ii_feedback(lits, weight_lr);
            }
        };
        if self.params.deterministic {
            let rng = &mut self.rng;
            for clause in self.banks[class].clauses_mut() {
                if rng.random::<f64>() < p {
                    apply(clause, rng);
                }
            }
        } else {
            let base = self.rng.next_u64();
            self.banks[class]
                .clauses_mut()
                .par_iter_mut()
                .enumerate()
                .for_each(|(j, clause)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(base);
                    rng.set_stream(j as u64);
                    if rng.random::<f64>() < p {
                        apply(clause, &mut rng);
                    }
                });
        }
    }

    fn check_training_data(&self, lits: &[LiteralVector], y: &[usize]) -> Result<()> {
        if lits.len() != y.len() {
            return Err(Error::Dimension {
                context: "training labels",
                expected: lits.len(),
                actual: y.len(),
            });
        }
        if let Some(&label) = y.iter().find(|&&c| c >= self.params.n_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                n_classes: self.params.n_classes,
            });
        }
        lits.iter().try_for_each(|l| self.check_literals(l))
    }

    /// One pass over the data in order. Validates everything before the
    /// first update so a bad label leaves the machine untouched.
    pub fn fit_epoch(
        &mut self,
        lits: &[LiteralVector],
        y: &[usize],
        negatives: NegativeSampling,
    ) -> Result<()> {
        self.check_training_data(lits, y)?;
        let n_classes = self.params.n_classes;
        for (l, &c) in lits.iter().zip(y) {
            let negative = match negatives {
                NegativeSampling::Enabled => {
                    let r = self.rng.random_range(0..n_classes - 1);
                    Some(if r >= c { r + 1 } else { r })
                }
                NegativeSampling::Disabled => None,
            };
            self.update_class(c, l, Target::One);
            if let Some(q) = negative {
                self.update_class(q, l, Target::Zero);
            }
        }
        Ok(())
    }

    /// Standard training for `epochs` passes, reporting the training
    /// accuracy after each pass and the wall time of the update pass alone.
    pub fn fit_standard(
        &mut self,
        xs: &[BitSample],
        y: &[usize],
        epochs: usize,
    ) -> Result<TrainingReport> {
        let lits = encode_all(xs, self.params.n_features)?;
        self.check_training_data(&lits, y)?;
        let mut report = TrainingReport::default();
        for epoch in 1..=epochs {
            let start = Instant::now();
            self.fit_epoch(&lits, y, NegativeSampling::Enabled)?;
            let seconds = start.elapsed().as_secs_f64();
            report.epochs.push(EpochStats {
                epoch,
                train_accuracy: self.accuracy(&lits, y),
                seconds,
            });
        }
        Ok(report)
    }

    pub(crate) fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn rng_state(&self) -> RngState {
        RngState::capture(&self.rng)
    }

    pub fn export_state(&self) -> StateSnapshot {
        let classes = self
            .banks
            .iter()
            .map(|bank| ClassState {
                weights: bank.weights(),
                states: bank.clauses().iter().map(|c| c.states().to_vec()).collect(),
            })
            .collect();
        StateSnapshot {
            params: self.params.clone(),
            rng: self.rng_state(),
            classes,
        }
    }

    pub fn import_state(snapshot: StateSnapshot) -> Result<Self> {
        let StateSnapshot {
            params,
            rng,
            classes,
        } = snapshot;
        let mut tm = Self::new(params)?;
        if classes.len() != tm.params.n_classes {
            return Err(Error::Dimension {
                context: "snapshot classes",
                expected: tm.params.n_classes,
                actual: classes.len(),
            });
        }
        let n_clauses = tm.params.n_clauses;
        let n_literals = 2 * tm.params.n_features;
        for (k, class) in classes.into_iter().enumerate() {
            if class.weights.len() != n_clauses || class.states.len() != n_clauses {
                return Err(Error::Dimension {
                    context: "snapshot clauses",
                    expected: n_clauses,
                    actual: class.weights.len().min(class.states.len()),
                });
            }
            let clauses = class
                .states
                .into_iter()
                .zip(class.weights)
                .enumerate()
                .map(|(j, (states, w))| {
                    if states.len() != n_literals {
                        return Err(Error::Dimension {
                            context: "snapshot automata",
                            expected: n_literals,
                            actual: states.len(),
                        });
                    }
                    Clause::from_parts(states, w, polarity_of(j, n_clauses), tm.params.s_max)
                })
                .collect::<Result<Vec<_>>>()?;
            tm.banks[k] = ClauseBank::from_clauses(k, clauses);
        }
        tm.rng = rng.restore();
        Ok(tm)
    }
}
