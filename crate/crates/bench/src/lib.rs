//! Shared fixtures for the criterion benchmarks.

use tmkd::data::{synth_noisy_xor, Dataset, NoisyXorConfig};
use tmkd::machine::{encode_all, LiteralVector, TMParams, TsetlinMachine};

pub fn xor_dataset() -> Dataset {
    synth_noisy_xor(&NoisyXorConfig::default()).expect("default noisy xor is valid")
}

pub fn encoded(ds: &Dataset) -> (Vec<LiteralVector>, Vec<LiteralVector>) {
    (
        encode_all(&ds.train_x, ds.n_features).expect("train width"),
        encode_all(&ds.test_x, ds.n_features).expect("test width"),
    )
}

/// A machine with `clauses` per class after a few standard epochs.
pub fn trained(ds: &Dataset, clauses: usize, epochs: usize) -> TsetlinMachine {
    let params = TMParams::new(ds.n_features, ds.n_classes, clauses, 15, 3.9).with_seed(7);
    let mut tm = TsetlinMachine::new(params).expect("bench params are valid");
    tm.fit_standard(&ds.train_x, &ds.train_y, epochs).expect("training data is valid");
    tm
}
