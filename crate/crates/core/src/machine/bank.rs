use super::clause::{Clause, EvalMode, Polarity};
use super::literals::LiteralVector;

/// The clauses voting for one class. Clauses `0..n/2` are positive and
/// `n/2..n` negative; transfer and persistence rely on this layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseBank {
    class_id: usize,
    clauses: Vec<Clause>,
}

/// Polarity of slot `j` in a bank of `n_clauses`.
pub fn polarity_of(j: usize, n_clauses: usize) -> Polarity {
    if j < n_clauses / 2 {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

impl ClauseBank {
    pub fn new(class_id: usize, n_clauses: usize, n_literals: usize, s_max: u16) -> Self {
        assert!(n_clauses >= 2 && n_clauses % 2 == 0, "clause count must be even");
        let clauses = (0..n_clauses)
            .map(|j| Clause::new(n_literals, s_max, polarity_of(j, n_clauses)))
            .collect();
        Self { class_id, clauses }
    }

    /// Wraps clauses that already follow the positive-then-negative layout.
    pub(crate) fn from_clauses(class_id: usize, clauses: Vec<Clause>) -> Self {
        debug_assert!(clauses
            .iter()
            .enumerate()
            .all(|(j, c)| c.polarity() == polarity_of(j, clauses.len())));
        Self { class_id, clauses }
    }

    pub fn class_id(&self) -> usize {
        self.class_id
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, j: usize) -> &Clause {
        &self.clauses[j]
    }

    pub(crate) fn clauses_mut(&mut self) -> &mut [Clause] {
        &mut self.clauses
    }

    pub fn weights(&self) -> Vec<f64> {
        self.clauses.iter().map(Clause::weight).collect()
    }

    /// Weighted vote `sum(w+ C+) - sum(w- C-)` with infer-mode clause outputs,
    /// optionally clipped to `[-T, T]`.
    pub fn class_sum(&self, lits: &LiteralVector, clamp_to: Option<u32>) -> f64 {
        let raw = self.vote(lits, EvalMode::Infer);
        match clamp_to {
            Some(t) => raw.clamp(-f64::from(t), f64::from(t)),
            None => raw,
        }
    }

    pub(crate) fn vote(&self, lits: &LiteralVector, mode: EvalMode) -> f64 {
        self.clauses
            .iter()
            .filter(|c| c.evaluate(lits, mode))
            .map(|c| c.polarity().sign() * c.weight())
            .sum()
    }
}
