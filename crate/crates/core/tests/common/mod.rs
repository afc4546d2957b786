//! Test-only oracles: random machines and a literal-by-literal evaluator
//! written directly from the clause definition.

#![allow(dead_code)]

use rand::Rng;
use tmkd::machine::{BitSample, Clause, ClauseBank, EvalMode, Polarity, TMParams, TsetlinMachine};

pub fn to_bits(v: usize, n: usize) -> BitSample {
    BitSample::from_bools(&(0..n).map(|i| v >> i & 1 == 1).collect::<Vec<_>>())
}

pub fn random_machine<R: Rng>(rng: &mut R, n_features: usize, n_classes: usize, n_clauses: usize) -> TsetlinMachine {
    random_machine_with(rng, n_features, n_classes, n_clauses, 0.3)
}

/// Random states (each automaton includes with probability `include_rate`)
/// and random weights in `[0.05, 5)`.
pub fn random_machine_with<R: Rng>(
    rng: &mut R,
    n_features: usize,
    n_classes: usize,
    n_clauses: usize,
    include_rate: f64,
) -> TsetlinMachine {
    let threshold = rng.random_range(1..=20);
    let params = TMParams::new(n_features, n_classes, n_clauses, threshold, 3.0).with_seed(rng.random());
    let s_max = params.s_max;
    let mut snap = TsetlinMachine::new(params).unwrap().export_state();
    for class in &mut snap.classes {
        for w in &mut class.weights {
            *w = rng.random_range(0.05..5.0);
        }
        for row in &mut class.states {
            for s in row.iter_mut() {
                *s = if rng.random::<f64>() < include_rate {
                    rng.random_range(s_max + 1..=2 * s_max)
                } else {
                    rng.random_range(1..=s_max)
                };
            }
        }
    }
    TsetlinMachine::import_state(snap).unwrap()
}

/// Literal `k` of `x`: `x_k` for `k < n`, otherwise `not x_(k-n)`.
pub fn naive_literal(x: &[bool], k: usize) -> bool {
    let n = x.len();
    if k < n { x[k] } else { !x[k - n] }
}

pub fn naive_clause_output(clause: &Clause, x: &[bool], mode: EvalMode) -> bool {
    let included: Vec<usize> = (0..2 * x.len())
        .filter(|&k| clause.states()[k] > clause.s_max())
        .collect();
    if included.is_empty() {
        return mode == EvalMode::Train;
    }
    included.iter().all(|&k| naive_literal(x, k))
}

pub fn naive_class_sum(bank: &ClauseBank, x: &[bool], clamp: Option<u32>) -> f64 {
    let mut sum = 0.0;
    for clause in bank.clauses() {
        if naive_clause_output(clause, x, EvalMode::Infer) {
            match clause.polarity() {
                Polarity::Positive => sum += clause.weight(),
                Polarity::Negative => sum -= clause.weight(),
            }
        }
    }
    match clamp {
        Some(t) => sum.max(-f64::from(t)).min(f64::from(t)),
        None => sum,
    }
}
