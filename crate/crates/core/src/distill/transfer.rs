//! Initialising a student with the most influential teacher clauses.
//!
//! Per class, a fraction `z` of the student's slots is filled by teacher
//! clauses in descending weight order; the rest by descending
//! `(w / max w) * inclusion_fraction`. Selection runs separately inside
//! each polarity half so the student keeps its positive/negative layout.
//! All sorts break ties toward the lower teacher index.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::machine::{polarity_of, Clause, Polarity, TsetlinMachine};

/// Which teacher clauses filled the student for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSelection {
    /// Teacher clause index copied into each student slot.
    pub slots: Vec<usize>,
    /// Teacher indices chosen purely by weight (positive half first).
    pub by_weight: Vec<usize>,
    /// Teacher indices chosen by weight-scaled inclusion fraction.
    pub by_diversity: Vec<usize>,
    /// Score of every clause that competed in the diversity phase.
    pub diversity_scores: Vec<(usize, f64)>,
}

impl ClassSelection {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_weight.iter().chain(&self.by_diversity).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferSelection {
    pub classes: Vec<ClassSelection>,
    /// Slots filled by weight per class.
    pub n_direct: usize,
}

/// Number of student slots per class filled by weight alone.
pub fn direct_count(z: f64, student_clauses: usize) -> usize {
    ((z * student_clauses as f64).floor() as usize).max(1)
}

/// Diversity score `(w / max_w) * a` of a clause.
pub fn diversity_score(clause: &Clause, max_weight: f64) -> f64 {
    (clause.weight() / max_weight) * clause.inclusion_fraction()
}

fn descending(a: (usize, f64), b: (usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

pub fn intelligent_transfer(
    teacher: &TsetlinMachine,
    student: &mut TsetlinMachine,
    z: f64,
) -> Result<TransferSelection> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::InvalidParams(format!("weight transfer z must be in [0,1], got {z}")));
    }
    let (tp, sp) = (teacher.params(), student.params());
    if tp.n_features != sp.n_features {
        return Err(Error::Dimension {
            context: "transfer features",
            expected: tp.n_features,
            actual: sp.n_features,
        });
    }
    if tp.n_classes != sp.n_classes {
        return Err(Error::Dimension {
            context: "transfer classes",
            expected: tp.n_classes,
            actual: sp.n_classes,
        });
    }
    if tp.s_max != sp.s_max {
        return Err(Error::InvalidParams(format!(
            "teacher automaton depth {} differs from student {}",
            tp.s_max, sp.s_max
        )));
    }
    let (n_teacher, n_student) = (tp.n_clauses, sp.n_clauses);
    if n_student > n_teacher {
        return Err(Error::InvalidParams(format!(
            "student has more clauses ({n_student}) than teacher ({n_teacher})"
        )));
    }

    let n_direct = direct_count(z, n_student);
    // odd direct counts favour the positive half
    let direct_split = [n_direct.div_ceil(2), n_direct / 2];
    let half_student = n_student / 2;
    let half_teacher = n_teacher / 2;

    let mut classes = Vec::with_capacity(tp.n_classes);
    for k in 0..tp.n_classes {
        let bank = teacher.bank(k);
        let max_weight = bank
            .clauses()
            .iter()
            .map(Clause::weight)
            .fold(f64::MIN_POSITIVE, f64::max);

        let mut selection = ClassSelection {
            slots: Vec::with_capacity(n_student),
            by_weight: Vec::new(),
            by_diversity: Vec::new(),
            diversity_scores: Vec::new(),
        };
        for (half, &direct) in direct_split.iter().enumerate() {
            let candidates = half * half_teacher..(half + 1) * half_teacher;

            let mut by_weight: Vec<(usize, f64)> = candidates
                .clone()
                .map(|j| (j, bank.clause(j).weight()))
                .collect();
            by_weight.sort_by(|a, b| descending(*a, *b));
            let chosen: Vec<usize> = by_weight.iter().take(direct).map(|&(j, _)| j).collect();

            let mut scored: Vec<(usize, f64)> = candidates
                .filter(|j| !chosen.contains(j))
                .map(|j| (j, diversity_score(bank.clause(j), max_weight)))
                .collect();
            scored.sort_by(|a, b| descending(*a, *b));
            let diverse: Vec<usize> = scored
                .iter()
                .take(half_student - direct)
                .map(|&(j, _)| j)
                .collect();

            selection.slots.extend(chosen.iter().chain(&diverse));
            selection.by_weight.extend(chosen);
            selection.by_diversity.extend(diverse);
            selection.diversity_scores.extend(scored);
        }

        let target = student.bank_mut(k).clauses_mut();
        for (slot, &j) in selection.slots.iter().enumerate() {
            let src = bank.clause(j);
            debug_assert_eq!(src.polarity(), polarity_of(slot, n_student));
            target[slot] = src.clone();
        }
        classes.push(selection);
    }
    debug_assert!(classes.iter().all(|c| c
        .slots
        .iter()
        .enumerate()
        .all(|(s, &j)| (polarity_of(s, n_student) == Polarity::Positive) == (j < half_teacher))));

    Ok(TransferSelection { classes, n_direct })
}
