//! Flag fault-tolerant error correction for self-orthogonal CSS codes.
//!
//! The crate is organized around a pipeline:
//!
//! 1. [`gf2`] — dense bit-packed vectors and matrices over GF(2).
//! 2. [`codes`] — self-orthogonal CSS codes and the hexagonal color-code
//!    family generator for distances 3, 5, 7, 9.
//! 3. [`faultcode`] — the fault check matrix built from single-flag syndrome
//!    extraction circuits via propagator/aggregator matrices.
//! 4. [`lookup`] — compact lookup-table space decoder with distinguishability
//!    verification and the Meet-in-the-Middle runtime search.
//! 5. [`timedec`] — Shor, one-tailed, and two-tailed adaptive time decoders
//!    plus separated X/Z fault counting.
//! 6. [`flagproc`] — classical processing of remaining cumulative flag
//!    vectors across logical Clifford gates.
//! 7. [`sim`] — circuit-level depolarizing Pauli-frame simulation of the full
//!    FTQEC protocol.
//! 8. [`harness`] — experiment configuration, Monte Carlo orchestration,
//!    statistics, pseudothreshold estimation, and memory-footprint formulas.

pub mod codes;
pub mod faultcode;
pub mod flagproc;
pub mod gf2;
pub mod harness;
pub mod lookup;
pub mod sim;
pub mod timedec;

pub use codes::{build_hex_color_code, CodeError, CssCode, PlaquetteLayout};
pub use faultcode::{
    build_aggregator, build_fault_check_matrix, build_propagator, CnotOrdering, FaultCheckMatrix,
    FaultOrigin,
};
pub use flagproc::{transform_flags, FlagState, LogicalClifford};
pub use gf2::{BitMatrix, BitVec};
pub use harness::{
    estimate_pseudothreshold, footprint_bits, run_experiment, verify_distance, ExperimentConfig,
    FootprintCounts, FootprintMode, PseudothresholdEstimate, ResultPoint, VerifyReport,
};
pub use lookup::{
    build_cache, decode, mim_decode, BuildError, CacheEntry, DistinguishabilityReport,
    FullSyndrome, LookupTable,
};
pub use sim::{
    DecoderConfig, DecoderKind, Injection, NoiseParams, PauliFrame, Protocol, SampleOutcome,
    Strategy,
};
pub use timedec::{
    count_n11, difference_vector, one_tailed_decision, select_correction_inputs,
    separated_budget, shor_decision, two_tailed_decision, DifferenceVector, StopDecision,
    StopReason, SyndromeHistory,
};
