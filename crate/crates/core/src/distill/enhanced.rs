//! Training a student on hard labels mixed with teacher distributions.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::soft_labels::{temperature_scale, SoftLabelMatrix};
use crate::error::{Error, Result};
use crate::machine::{
    encode_all, BitSample, EpochStats, LiteralVector, Target, TrainingReport, TsetlinMachine,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistillParams {
    /// Balance: probability of a hard-label update of the true class.
    pub alpha: f64,
    /// Temperature; distributions are raised to `1/tau^2`.
    pub tau: f64,
    /// Fraction of transferred clauses chosen by weight alone.
    pub weight_transfer_z: f64,
    /// Soft updates with base probability below this are skipped.
    pub phi_floor: f64,
    /// Never give the true class soft feedback, even at `alpha = 0`.
    pub guard_true_class: bool,
}

impl Default for DistillParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            tau: 3.0,
            weight_transfer_z: 0.2,
            phi_floor: 0.001,
            guard_true_class: false,
        }
    }
}

impl DistillParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must be in [0,1], got {}", self.alpha));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if !(0.0..=1.0).contains(&self.weight_transfer_z) {
            return bad(format!("z must be in [0,1], got {}", self.weight_transfer_z));
        }
        if !(self.phi_floor.is_finite() && self.phi_floor >= 0.0) {
            return bad(format!("phi floor must be >= 0, got {}", self.phi_floor));
        }
        Ok(())
    }
}

/// A soft-label update planned for one class of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftUpdate {
    pub class: usize,
    pub target: Target,
    /// Boosted probability; may exceed 1 and is capped at the draw.
    pub probability: f64,
}

/// Soft updates for one temperature-scaled row, in ascending class order.
pub fn soft_updates(p: &[f64], true_class: usize, params: &DistillParams) -> Vec<SoftUpdate> {
    let skip_true = params.alpha > 0.0 || params.guard_true_class;
    let mut plan = Vec::new();
    for (k, &pk) in p.iter().enumerate() {
        if k == true_class && skip_true {
            continue;
        }
        let phi = (1.0 - params.alpha) * pk;
        if phi < params.phi_floor {
            continue;
        }
        let (target, probability) = if pk > 0.5 {
            (Target::One, phi * (1.0 + pk * params.tau))
        } else {
            (Target::Zero, phi * (1.0 + (1.0 - pk) * params.tau))
        };
        plan.push(SoftUpdate {
            class: k,
            target,
            probability,
        });
    }
    plan
}

/// Draw `true` with probability `p`, consuming no randomness when the
/// outcome is certain.
fn draw<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}

/// One epoch of soft-label fitting.
///
/// Per sample, from the machine's own stream: the balance draw, the
/// true-class update, then for each class in ascending order its feedback
/// draw followed by that class update.
pub fn fit_enhanced_epoch(
    student: &mut TsetlinMachine,
    lits: &[LiteralVector],
    y: &[usize],
    soft: &SoftLabelMatrix,
    params: &DistillParams,
) -> Result<()> {
    check_inputs(student, lits, y, soft)?;
    for (i, (l, &c)) in lits.iter().zip(y).enumerate() {
        let p = temperature_scale(soft.row(i), params.tau);
        if draw(student.rng_mut(), params.alpha) {
            student.update_class(c, l, Target::One);
        }
        for update in soft_updates(&p, c, params) {
            if draw(student.rng_mut(), update.probability.min(1.0)) {
                student.update_class(update.class, l, update.target);
            }
        }
    }
    Ok(())
}

fn check_inputs(
    student: &TsetlinMachine,
    lits: &[LiteralVector],
    y: &[usize],
    soft: &SoftLabelMatrix,
) -> Result<()> {
    if lits.len() != y.len() || soft.len() != y.len() {
        return Err(Error::Dimension {
            context: "fit_enhanced rows",
            expected: y.len(),
            actual: if lits.len() != y.len() { lits.len() } else { soft.len() },
        });
    }
    if soft.n_classes() != student.n_classes() {
        return Err(Error::Dimension {
            context: "soft label classes",
            expected: student.n_classes(),
            actual: soft.n_classes(),
        });
    }
    if let Some(&label) = y.iter().find(|&&c| c >= student.n_classes()) {
        return Err(Error::LabelOutOfRange {
            label,
            n_classes: student.n_classes(),
        });
    }
    if let Some(l) = lits.iter().find(|l| l.n_features() != student.n_features()) {
        return Err(Error::Dimension {
            context: "fit_enhanced features",
            expected: student.n_features(),
            actual: l.n_features(),
        });
    }
    Ok(())
}

pub fn fit_enhanced(
    student: &mut TsetlinMachine,
    xs: &[BitSample],
    y: &[usize],
    soft: &SoftLabelMatrix,
    epochs: usize,
    params: &DistillParams,
) -> Result<TrainingReport> {
    params.validate()?;
    let lits = encode_all(xs, student.n_features())?;
    check_inputs(student, &lits, y, soft)?;
    let mut report = TrainingReport::default();
    for epoch in 1..=epochs {
        let start = Instant::now();
        fit_enhanced_epoch(student, &lits, y, soft, params)?;
        let seconds = start.elapsed().as_secs_f64();
        report.epochs.push(EpochStats {
            epoch,
            train_accuracy: student.accuracy(&lits, y),
            seconds,
        });
    }
    Ok(report)
}
