mod common;

use common::{naive_class_sum, naive_clause_output, random_machine, random_machine_with, to_bits};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tmkd::ckd::clause_transform;
use tmkd::data::{synth_noisy_xor, NoisyXorConfig};
use tmkd::distill::{class_sums_unclamped, fit_enhanced_epoch, get_soft_labels, DistillParams};
use tmkd::experiment::activation_map;
use tmkd::machine::{encode_all, EvalMode, NegativeSampling, TMParams, TsetlinMachine};

fn xor_params(clauses: usize, seed: u64) -> TMParams {
    TMParams::new(12, 2, clauses, 15, 3.9).with_seed(seed)
}

#[test]
fn forty_clauses_learn_xor_on_training_data() {
    let ds = synth_noisy_xor(&NoisyXorConfig {
        noise_rate: 0.0,
        ..NoisyXorConfig::default()
    })
    .unwrap();
    let mut tm = TsetlinMachine::new(xor_params(40, 11)).unwrap();
    let report = tm.fit_standard(&ds.train_x, &ds.train_y, 100).unwrap();
    let last = report.epochs.last().unwrap().train_accuracy;
    assert!(last > 0.95, "train accuracy {last}");
}

#[test]
fn forty_clauses_recover_clean_rule_under_label_noise() {
    let ds = synth_noisy_xor(&NoisyXorConfig::default()).unwrap();
    let mut tm = TsetlinMachine::new(xor_params(40, 11)).unwrap();
    tm.fit_standard(&ds.train_x, &ds.train_y, 100).unwrap();
    let agree = ds
        .train_x
        .iter()
        .filter(|x| tm.predict(x).unwrap() == usize::from(x.get(0) ^ x.get(1)))
        .count();
    let rate = agree as f64 / ds.train_x.len() as f64;
    assert!(rate > 0.95, "agreement with the noise-free rule {rate}");
}

#[test]
fn balance_one_matches_training_without_negative_sampling() {
    let ds = synth_noisy_xor(&NoisyXorConfig {
        n_samples: 600,
        ..NoisyXorConfig::default()
    })
    .unwrap();
    let lits = encode_all(&ds.train_x, 12).unwrap();
    let mut teacher = TsetlinMachine::new(xor_params(20, 5)).unwrap();
    teacher.fit_epoch(&lits, &ds.train_y, NegativeSampling::Enabled).unwrap();
    let soft = get_soft_labels(&class_sums_unclamped(&teacher, &ds.train_x).unwrap()).unwrap();
    let params = DistillParams {
        alpha: 1.0,
        ..DistillParams::default()
    };

    let mut enhanced = TsetlinMachine::new(xor_params(6, 77)).unwrap();
    let mut plain = TsetlinMachine::new(xor_params(6, 77)).unwrap();
    for _ in 0..5 {
        fit_enhanced_epoch(&mut enhanced, &lits, &ds.train_y, &soft, &params).unwrap();
        plain.fit_epoch(&lits, &ds.train_y, NegativeSampling::Disabled).unwrap();
        assert_eq!(enhanced.export_state(), plain.export_state());
    }
}

#[test]
fn transform_shape_is_samples_by_classes_times_clauses() {
    // Clause counts are even, so the odd three-clause teacher is covered by
    // the general rule (N, classes * clauses).
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<_> = (0..5).map(|v| to_bits(v, 4)).collect();
    for clauses in [2, 4, 6] {
        let teacher = random_machine(&mut rng, 4, 2, clauses);
        assert_eq!(clause_transform(&teacher, &xs).unwrap().shape(), (5, 2 * clauses));
    }
}

#[test]
fn one_sample_transform_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let teacher = random_machine_with(&mut rng, 6, 3, 4, 0.15);
        for v in [0usize, 13, 42, 63] {
            let x = to_bits(v, 6);
            let row = clause_transform(&teacher, std::slice::from_ref(&x)).unwrap();
            for k in 0..3 {
                for j in 0..4 {
                    let clause = teacher.bank(k).clause(j);
                    assert_eq!(row.get(0, 4 * k + j), naive_clause_output(clause, &x.to_bools(), EvalMode::Infer));
                }
            }
        }
    }
}

#[test]
fn unclamped_sums_match_brute_force_on_eight_clauses() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let tm = random_machine(&mut rng, 7, 4, 8);
        let xs: Vec<_> = (0..128).map(|v| to_bits(v, 7)).collect();
        let sums = class_sums_unclamped(&tm, &xs).unwrap();
        for (x, row) in xs.iter().zip(&sums) {
            for (k, &s) in row.iter().enumerate() {
                let oracle = naive_class_sum(tm.bank(k), &x.to_bools(), None);
                assert!((s - oracle).abs() < 1e-9, "{s} vs {oracle}");
            }
        }
    }
}

#[test]
fn teacher_activation_maps_are_denser() {
    let ds = synth_noisy_xor(&NoisyXorConfig::default()).unwrap();
    let mut denser = 0;
    for seed in 0..10 {
        let mut teacher = TsetlinMachine::new(xor_params(100, seed)).unwrap();
        let mut student = TsetlinMachine::new(xor_params(10, seed)).unwrap();
        teacher.fit_standard(&ds.train_x, &ds.train_y, 20).unwrap();
        student.fit_standard(&ds.train_x, &ds.train_y, 20).unwrap();
        let t = activation_map(&teacher, (3, 4)).unwrap().nonzero_count();
        let s = activation_map(&student, (3, 4)).unwrap().nonzero_count();
        println!("seed {seed}: teacher {t} nonzero, student {s}");
        if t >= s {
            denser += 1;
        }
    }
    assert!(denser >= 8, "teacher at least as dense in {denser}/10 seeds");
}
