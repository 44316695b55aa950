//! Classical processing of remaining cumulative flag vectors across logical
//! Clifford gates.
//!
//! When a logical Clifford acts between two FTQEC routines, the output error
//! of the first routine is transformed, so the flag information describing
//! it must be transformed the same way before it is threaded into the next
//! routine as an initial flag state. For a self-orthogonal CSS code the
//! required processing is linear over the (X, Z) flag pairs.

use crate::gf2::BitVec;

/// Per-block pair of cumulative flag vectors: flags from X-type circuits
/// (heralding X-type hook errors) and from Z-type circuits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagState {
    pub f_x: BitVec,
    pub f_z: BitVec,
}

impl FlagState {
    pub fn zeros(r: usize) -> Self {
        Self {
            f_x: BitVec::zeros(r),
            f_z: BitVec::zeros(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.f_x.is_zero() && self.f_z.is_zero()
    }
}

/// A logical Clifford acting on one or two code blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalClifford {
    Hadamard,
    Phase,
    /// Logical CNOT from `control` block to `target` block (indices into the
    /// state slice).
    Cnot { control: usize, target: usize },
}

/// Hadamard swaps the roles of X- and Z-type errors: `(F_x, F_z) ->
/// (F_z, F_x)`.
pub fn apply_hadamard(state: &mut FlagState) {
    std::mem::swap(&mut state.f_x, &mut state.f_z);
}

/// Phase gate: `(F_x, F_z) -> (F_x, F_x xor F_z)`.
pub fn apply_phase(state: &mut FlagState) {
    state.f_z.xor_assign(&state.f_x);
}

/// CNOT between blocks: `(F_x1, F_z1 | F_x2, F_z2) ->
/// (F_x1, F_z1 xor F_z2 | F_x1 xor F_x2, F_z2)`.
pub fn apply_cnot(control: &mut FlagState, target: &mut FlagState) {
    assert_eq!(
        control.f_x.len(),
        target.f_x.len(),
        "blocks must use the same code"
    );
    control.f_z.xor_assign(&target.f_z);
    target.f_x.xor_assign(&control.f_x);
}

/// Apply a logical Clifford to a slice of per-block flag states.
pub fn transform_flags(gate: LogicalClifford, blocks: &mut [FlagState]) {
    match gate {
        LogicalClifford::Hadamard => apply_hadamard(&mut blocks[0]),
        LogicalClifford::Phase => apply_phase(&mut blocks[0]),
        LogicalClifford::Cnot { control, target } => {
            assert_ne!(control, target, "CNOT needs distinct blocks");
            let (c, t) = if control < target {
                let (lo, hi) = blocks.split_at_mut(target);
                (&mut lo[control], &mut hi[0])
            } else {
                let (lo, hi) = blocks.split_at_mut(control);
                (&mut hi[0], &mut lo[target])
            };
            apply_cnot(c, t);
        }
    }
}
