//! Cross-module flows: state files feeding recovery, recovery feeding the
//! entropy bounds, and ladders consuming optimized channels. The per-module
//! unit suites live next to their implementations.

#![forbid(unsafe_code)]

use markov_recovery::entropies::{cmi, relative_entropy, trace_distance};
use markov_recovery::recovery::{
    apply_channel, optimize_recovery, petz_map, recovery_fidelity, RecoveryBudget,
};
use markov_recovery::squashed::{build_extension_ladder, symmetrized_extension};
use markov_recovery::states::{
    qcq_markov_reconstruction, random_qcq_spec, random_state, read_state, split_seed, write_state,
};

const LN2: f64 = std::f64::consts::LN_2;

#[test]
fn markov_chain_survives_a_file_round_trip_and_recovers_exactly() {
    let spec = random_qcq_spec(3, 2, 2, 4401).unwrap();
    let markov = qcq_markov_reconstruction(&spec).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("markov.json");
    write_state(&markov, &path).unwrap();
    let loaded = read_state(&path).unwrap();
    assert_eq!(loaded.dims().dims(), markov.dims().dims());
    assert!(
        trace_distance(loaded.matrix(), markov.matrix()).unwrap() < 1e-12,
        "state changed across serialization"
    );

    // zero conditional mutual information and a perfect reconstruction
    let report = cmi(&loaded).unwrap();
    assert!(report.cmi_bits.abs() < 1e-9, "CMI {}", report.cmi_bits);
    let rho_bc = loaded.marginal(&["B", "C"]).unwrap();
    let channel = petz_map(&rho_bc).unwrap();
    let f = recovery_fidelity(&loaded, &channel).unwrap();
    assert!(f > 1.0 - 1e-9, "fidelity {f}");
    // and the relative entropy to the product-block reconstruction vanishes
    let d = relative_entropy(loaded.matrix(), markov.matrix()).unwrap();
    assert!(d.abs() < 1e-9);
}

#[test]
fn optimized_recovery_feeds_the_distance_and_entropy_bounds() {
    let rho = random_state(&[2, 2, 2], &["A", "B", "C"], 4402).unwrap();
    let budget = RecoveryBudget {
        restarts: 4,
        iterations: 150,
    };
    let optimum = optimize_recovery(&rho, budget, 4403).unwrap();
    assert!(optimum.certificate.slack >= -1e-6);

    let rho_ab = rho.marginal(&["A", "B"]).unwrap();
    let sigma = apply_channel(&optimum.channel, &rho_ab, "B", &["B", "C"]).unwrap();
    assert!((sigma.trace() - 1.0).abs() < 1e-9);
    let delta = trace_distance(rho.matrix(), sigma.matrix()).unwrap();
    let report = cmi(&rho).unwrap();
    assert!(
        delta * delta / LN2 <= report.cmi_bits + 1e-6,
        "distance {delta} incompatible with CMI {}",
        report.cmi_bits
    );
}

#[test]
fn an_optimized_channel_drives_the_extension_ladder() {
    let rho = random_state(&[2, 2, 2], &["A", "C", "E"], 4404).unwrap();
    let rotated = rho.permuted(&[0, 2, 1]).unwrap();
    let budget = RecoveryBudget {
        restarts: 4,
        iterations: 150,
    };
    let optimum = optimize_recovery(&rotated, budget, split_seed(4405, 0)).unwrap();
    let ladder = build_extension_ladder(&rho, 3, &optimum.channel).unwrap();
    assert!(ladder.max_step_distance() <= ladder.delta() + 1e-7);
    let (omega, _witness) = symmetrized_extension(&ladder).unwrap();
    let rho_ac = rho.marginal(&["A", "C"]).unwrap();
    let distance = trace_distance(rho_ac.matrix(), omega.matrix()).unwrap();
    assert!(distance <= ladder.delta() + 1e-6, "distance {distance}");
}
