//! # distguess
//!
//! Guessing subject to distortion on finite alphabets.
//!
//! A guesser holds an ordered list of reproduction codewords and asks, one at a
//! time, whether the source outcome lies within distortion `D` of the next
//! codeword. This crate builds greedy guessing lists, evaluates their exact
//! guessing moments, and computes the distortion-ball Rényi functionals that
//! bracket those moments from above and below.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |---|---|
//! | [`model`] | alphabets, pmfs, distortion matrices, instances, JSON ingestion, product extension |
//! | [`entropy`] | Rényi, Arimoto–Rényi, Shannon entropy and relative entropy (bits) |
//! | [`strategy`] | distortion balls, greedy covers, guess indices, moments, Monte Carlo |
//! | [`limits`] | ball functionals (greedy and exhaustive), bound reports, index codes, majorization |
//! | [`oracle`] | exhaustive strategy and coverage searches, moment inequality checks |
//! | [`asymptotic`] | Blahut–Arimoto, guessing exponent, blocklength sweeps |
//!
//! All logarithms are base 2.

pub mod asymptotic;
pub mod entropy;
mod error;
pub mod fixtures;
pub mod limits;
pub mod model;
pub mod num;
pub mod oracle;
pub mod strategy;

pub use error::{Error, Result};

pub use asymptotic::{
    blahut_arimoto, blocklength_sweep, guessing_exponent, ExponentResult, RdOptions, RdResult,
    SweepRow, SweepTable,
};
pub use entropy::{arimoto_conditional_entropy, kl_divergence, renyi_entropy, EntropyValue};
pub use limits::{
    bounds_report, conditional_functional, guess_functional, index_code, majorizes,
    schur_weight_sum, strategy_to_code, BoundReport, CodeTable, MassVector, Method,
};
pub use model::{
    conditional_slice, load_instance, product_extend, Alphabet, DistortionMeasure, GuessInstance,
    Instance, JointGuessInstance, JointPmf, Pmf, ProductInstance,
};
pub use oracle::{
    lemma3_check, max_coverage_search, optimal_strategy_search, run_suite, SearchResult, Suite,
    SuiteReport,
};
pub use strategy::{
    distortion_ball, error_probability, greedy_cover, guess_index, moment, monte_carlo_moment,
    side_info_cover, side_info_moment, CoverPartition, GuessReport, GuessingStrategy,
    SideInfoStrategy,
};
