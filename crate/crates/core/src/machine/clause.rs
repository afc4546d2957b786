//! A single conjunctive clause: one two-action automaton per literal plus a
//! weight and a voting polarity.

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use super::literals::{words_for, LiteralVector};
use crate::error::{Error, Result};

/// Weights never shrink below this value under Type II feedback.
pub const MIN_WEIGHT: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

/// Clause evaluation convention for clauses with no included literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Empty clauses output 1 so Type I feedback can recruit literals.
    Train,
    /// Empty clauses output 0; they carry no evidence.
    Infer,
}

/// Type I sub-feedback probabilities derived from specificity `s`.
#[derive(Debug, Clone, Copy)]
pub struct Specificity {
    s: f64,
    include: Bernoulli,
    exclude: Bernoulli,
}

impl Specificity {
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "specificity must be >= 1, got {s}"
            )));
        }
        let include = Bernoulli::new((s - 1.0) / s).expect("probability in [0, 1]");
        let exclude = Bernoulli::new(1.0 / s).expect("probability in [0, 1]");
        Ok(Self {
            s,
            include,
            exclude,
        })
    }

    pub fn value(&self) -> f64 {
        self.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    states: Vec<u16>,
    include: Vec<u64>,
    n_included: usize,
    weight: f64,
    polarity: Polarity,
    s_max: u16,
}

impl Clause {
    /// A fresh clause: every automaton on the last exclude state, weight 1.
    pub fn new(n_literals: usize, s_max: u16, polarity: Polarity) -> Self {
        assert!(s_max >= 1, "automaton depth must be positive");
        Self {
            states: vec![s_max; n_literals],
            include: vec![0; words_for(n_literals)],
            n_included: 0,
            weight: 1.0,
            polarity,
            s_max,
        }
    }

    /// Rebuilds a clause from raw automaton states, validating every invariant.
    pub fn from_parts(states: Vec<u16>, weight: f64, polarity: Polarity, s_max: u16) -> Result<Self> {
        if s_max == 0 {
            return Err(Error::InvalidParams("automaton depth must be positive".into()));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Corrupt(format!("clause weight {weight} is not positive")));
        }
        let top = 2 * u32::from(s_max);
        if let Some(bad) = states.iter().find(|&&a| a == 0 || u32::from(a) > top) {
            return Err(Error::Corrupt(format!(
                "automaton state {bad} outside [1, {top}]"
            )));
        }
        let mut clause = Self::new(states.len(), s_max, polarity);
        clause.weight = weight;
        for (k, a) in states.into_iter().enumerate() {
            clause.set_state(k, a);
        }
        Ok(clause)
    }

    pub fn n_literals(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u16] {
        &self.states
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn s_max(&self) -> u16 {
        self.s_max
    }

    #[inline]
    pub fn is_included(&self, k: usize) -> bool {
        self.states[k] > self.s_max
    }

    pub fn included_count(&self) -> usize {
        self.n_included
    }

    pub fn is_empty(&self) -> bool {
        self.n_included == 0
    }

    /// Fraction of automata currently in an include state.
    pub fn inclusion_fraction(&self) -> f64 {
        if self.states.is_empty() {
            0.0
        } else {
            self.n_included as f64 / self.states.len() as f64
        }
    }

    pub fn set_weight(&mut self, weight: f64) {
        assert!(weight.is_finite() && weight > 0.0, "weight must be positive");
        self.weight = weight;
    }

    /// Sets automaton `k`, keeping the packed include mask in sync.
    pub fn set_state(&mut self, k: usize, state: u16) {
        let top = 2 * self.s_max;
        assert!((1..=top).contains(&state), "state {state} outside [1, {top}]");
        let was = self.is_included(k);
        self.states[k] = state;
        let now = self.is_included(k);
        if was != now {
            let mask = 1u64 << (k % 64);
            if now {
                self.include[k / 64] |= mask;
                self.n_included += 1;
            } else {
                self.include[k / 64] &= !mask;
                self.n_included -= 1;
            }
        }
    }

    #[inline]
    fn increment(&mut self, k: usize) {
        if self.states[k] < 2 * self.s_max {
            self.set_state(k, self.states[k] + 1);
        }
    }

    #[inline]
    fn decrement(&mut self, k: usize) {
        if self.states[k] > 1 {
            self.set_state(k, self.states[k] - 1);
        }
    }

    /// Packed evaluation: one AND-NOT per 64 literals.
    #[inline]
    pub fn evaluate(&self, lits: &LiteralVector, mode: EvalMode) -> bool {
        debug_assert_eq!(lits.len(), self.states.len());
        if self.n_included == 0 {
            return mode == EvalMode::Train;
        }
        self.include
            .iter()
            .zip(lits.words())
            .all(|(&inc, &lit)| inc & !lit == 0)
    }

    /// Literal-at-a-time evaluation straight from the automaton states.
    pub fn evaluate_naive(&self, lits: &LiteralVector, mode: EvalMode) -> bool {
        let mut any = false;
        for k in 0..self.states.len() {
            if self.states[k] > self.s_max {
                any = true;
                if !lits.get(k) {
                    return false;
                }
            }
        }
        any || mode == EvalMode::Train
    }

    /// Type I feedback (recognise frequent patterns).
    ///
    /// With a firing clause, true literals move toward inclusion with
    /// probability `(s-1)/s` and false literals toward exclusion with
    /// probability `1/s`; a silent clause only receives the exclusion pass.
    /// At most one random draw is consumed per literal.
    pub fn type_i_feedback<R: Rng + ?Sized>(
        &mut self,
        lits: &LiteralVector,
        specificity: &Specificity,
        weight_lr: f64,
        rng: &mut R,
    ) {
        let fired = self.evaluate(lits, EvalMode::Train);
        if fired {
            for k in 0..self.states.len() {
                if lits.get(k) {
                    if specificity.include.sample(rng) {
                        self.increment(k);
                    }
                } else if specificity.exclude.sample(rng) {
                    self.decrement(k);
                }
            }
            self.weight *= 1.0 + weight_lr;
        } else {
            for k in 0..self.states.len() {
                if specificity.exclude.sample(rng) {
                    self.decrement(k);
                }
            }
        }
    }

    /// Type II feedback (discriminate false positives). Deterministic: a
    /// firing clause pushes every excluded false literal one step toward
    /// inclusion and has its weight divided by `1 + weight_lr`.
    pub fn type_ii_feedback(&mut self, lits: &LiteralVector, weight_lr: f64) {
        if !self.evaluate(lits, EvalMode::Train) {
            return;
        }
        for k in 0..self.states.len() {
            if !lits.get(k) && !self.is_included(k) {
                self.increment(k);
            }
        }
        self.weight = (self.weight / (1.0 + weight_lr)).max(MIN_WEIGHT);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::literals::{build_literals, BitSample};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const S_MAX: u16 = 127;

    fn lits(bits: &[bool]) -> LiteralVector {
        build_literals(&BitSample::from_bools(bits), bits.len()).unwrap()
    }

    /// Clause over two features including the given literal indices.
    fn clause_with(included: &[usize], n_literals: usize) -> Clause {
        let mut c = Clause::new(n_literals, S_MAX, Polarity::Positive);
        for &k in included {
            c.set_state(k, S_MAX + 1);
        }
        c
    }

    #[test]
    fn conjunction_of_included_literals() {
        // x1 AND NOT x2: literal 0 and literal 3 of a 2-feature machine
        let c = clause_with(&[0, 3], 4);
        assert!(!c.evaluate(&lits(&[false, true]), EvalMode::Infer));
        assert!(c.evaluate(&lits(&[true, false]), EvalMode::Infer));
    }

    #[test]
    fn empty_clause_convention() {
        let c = Clause::new(4, S_MAX, Polarity::Positive);
        let l = lits(&[true, false]);
        assert!(!c.evaluate(&l, EvalMode::Infer));
        assert!(c.evaluate(&l, EvalMode::Train));
        assert!(!c.evaluate_naive(&l, EvalMode::Infer));
        assert!(c.evaluate_naive(&l, EvalMode::Train));
    }

    #[test]
    fn specificity_one_is_pure_exclusion() {
        // s = 1: IA never fires, IB always fires
        let spec = Specificity::new(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // include NOT x1 (literal 2); input x1 = 1 makes that literal false
        let mut c = clause_with(&[2], 4);
        let before = c.states().to_vec();
        c.type_i_feedback(&lits(&[true, true]), &spec, 0.0, &mut rng);
        // clause is silent, so every automaton decrements by exactly one
        for (k, (&a, &b)) in before.iter().zip(c.states()).enumerate() {
            assert_eq!(b, a - 1, "literal {k}");
        }
    }

    #[test]
    fn include_saturates_at_top_state() {
        let spec = Specificity::new(1e12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = Clause::new(2, S_MAX, Polarity::Positive);
        c.set_state(0, 2 * S_MAX);
        // one feature, value 1: literal 0 true, literal 1 false
        let l = lits(&[true]);
        for _ in 0..20 {
            c.type_i_feedback(&l, &spec, 0.0, &mut rng);
        }
        assert_eq!(c.states()[0], 2 * S_MAX);
    }

    #[test]
    fn weight_multiplies_then_divides() {
        let spec = Specificity::new(3.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut c = clause_with(&[0], 4);
        let l = lits(&[true, false]);
        c.type_i_feedback(&l, &spec, 0.1, &mut rng);
        assert!((c.weight() - 1.1).abs() < 1e-12);
        // restore the include so the clause still fires for the Type II pass
        c.set_state(0, S_MAX + 1);
        c.type_ii_feedback(&l, 0.1);
        assert!((c.weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn type_ii_silent_clause_is_untouched() {
        let mut c = clause_with(&[1], 4);
        let before = c.clone();
        c.type_ii_feedback(&lits(&[true, false]), 0.5);
        assert_eq!(c, before);
    }

    #[test]
    fn type_ii_pushes_false_excluded_literals() {
        let mut c = clause_with(&[0], 4);
        let l = lits(&[true, false]); // literals: 1,0,0,1
        c.type_ii_feedback(&l, 0.0);
        assert_eq!(c.states(), &[S_MAX + 1, S_MAX + 1, S_MAX + 1, S_MAX]);
        // the clause now includes false literals and stops firing
        assert!(!c.evaluate(&l, EvalMode::Train));
    }

    #[test]
    fn weight_floor_holds() {
        let mut c = Clause::new(2, S_MAX, Polarity::Negative);
        let l = lits(&[true]);
        for _ in 0..200 {
            // keep it empty so it fires in train mode
            c.set_state(0, S_MAX);
            c.set_state(1, S_MAX);
            c.type_ii_feedback(&l, 1.0);
        }
        assert_eq!(c.weight(), MIN_WEIGHT);
    }

    #[test]
    fn from_parts_rejects_out_of_range_states() {
        assert!(Clause::from_parts(vec![0, 5], 1.0, Polarity::Positive, 3).is_err());
        assert!(Clause::from_parts(vec![7, 5], 1.0, Polarity::Positive, 3).is_err());
        assert!(Clause::from_parts(vec![1, 6], 0.0, Polarity::Positive, 3).is_err());
        let c = Clause::from_parts(vec![1, 6], 2.0, Polarity::Positive, 3).unwrap();
        assert_eq!(c.included_count(), 1);
    }
}
