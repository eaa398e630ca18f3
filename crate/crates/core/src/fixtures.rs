//! Instance documents bundled with the crate.

use crate::model::{load_instance, GuessInstance, Instance, JointGuessInstance};

/// Seven symbols, four overlapping balls at `D = 0`: the greedy two-ball
/// prefix covers 0.65 while `B2 ∪ B3` covers 0.75.
pub const OVERLAP_STRESS: &str = include_str!("../fixtures/overlap-stress.json");

/// Uniform source on four symbols, Hamming distortion, `D = 0`.
pub const UNIFORM4_HAMMING: &str = include_str!("../fixtures/uniform4-hamming.json");

/// Bernoulli(0.3) source, Hamming distortion, per-letter `D = 0.1`.
pub const BERNOULLI03_HAMMING: &str = include_str!("../fixtures/bernoulli03-hamming.json");

/// Binary symmetric joint `[[0.4, 0.1], [0.1, 0.4]]`, Hamming, `D = 0`.
pub const JOINT_SYMMETRIC: &str = include_str!("../fixtures/joint-symmetric.json");

fn single(text: &str) -> GuessInstance {
    match load_instance(text).expect("bundled fixture is valid") {
        Instance::Single(i) => i,
        Instance::Joint(_) => unreachable!("fixture is single-source"),
    }
}

pub fn overlap_stress() -> GuessInstance {
    single(OVERLAP_STRESS)
}

pub fn uniform4_hamming() -> GuessInstance {
    single(UNIFORM4_HAMMING)
}

pub fn bernoulli03_hamming() -> GuessInstance {
    single(BERNOULLI03_HAMMING)
}

pub fn joint_symmetric() -> JointGuessInstance {
    match load_instance(JOINT_SYMMETRIC).expect("bundled fixture is valid") {
        Instance::Joint(j) => j,
        Instance::Single(_) => unreachable!("fixture is joint"),
    }
}
