//! Time decoders: decide when repeated syndrome measurement may stop and
//! which round's syndrome to trust.
//!
//! All decisions work on the difference vector of the syndrome history plus
//! per-round flag counts. The decision functions are pure: they evaluate the
//! stream as given, and the simulator re-evaluates after every round to get
//! the online behavior. Budgets below `t` arise in separated X/Z counting;
//! a zero budget trusts the first available round.
//!
//! Worst-case round counts (enforced as hard caps so the decoders are total
//! even on streams no `t`-fault history could produce):
//!
//! * Shor: `(t+1)^2`
//! * one-tailed: `t(t+3)/2 + 2`
//! * two-tailed: `(t+3)^2/4 - 1` for odd `t`, `(t+2)(t+4)/4 - 1` for even.

use crate::flagproc::FlagState;
use crate::gf2::BitVec;

/// Syndrome and flag record of one full round (X-type generator
/// measurements, then Z-type).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub s_x: BitVec,
    pub f_x: BitVec,
    pub s_z: BitVec,
    pub f_z: BitVec,
}

/// A joint measurement history plus the initial (threaded) cumulative flag
/// state. Cumulative flag vectors start from the initial state:
/// `F_i = F_init xor f_1 xor ... xor f_i`.
#[derive(Debug, Clone)]
pub struct SyndromeHistory {
    pub rounds: Vec<RoundRecord>,
    pub initial: FlagState,
}

impl SyndromeHistory {
    pub fn new(initial: FlagState) -> Self {
        Self {
            rounds: Vec::new(),
            initial,
        }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Cumulative X-circuit flag vector through round `upto` (1-based;
    /// 0 gives the initial state).
    pub fn cumulative_f_x(&self, upto: usize) -> BitVec {
        let mut acc = self.initial.f_x.clone();
        for record in &self.rounds[..upto] {
            acc.xor_assign(&record.f_x);
        }
        acc
    }

    pub fn cumulative_f_z(&self, upto: usize) -> BitVec {
        let mut acc = self.initial.f_z.clone();
        for record in &self.rounds[..upto] {
            acc.xor_assign(&record.f_z);
        }
        acc
    }

    /// Per-round total flag counts across both circuit types.
    pub fn flag_counts(&self) -> Vec<usize> {
        self.rounds
            .iter()
            .map(|rec| rec.f_x.weight() + rec.f_z.weight())
            .collect()
    }
}

/// The (m-1)-bit indicator of consecutive-round syndrome changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceVector {
    bits: Vec<bool>,
}

impl DifferenceVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit comparing rounds `i` and `i+1` (1-based `i`).
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Rounds represented by this difference vector.
    pub fn rounds(&self) -> usize {
        self.bits.len() + 1
    }
}

/// Difference vector of any equatable per-round syndrome representation.
/// Requires at least two rounds.
pub fn difference_vector<T: PartialEq>(rounds: &[T]) -> DifferenceVector {
    assert!(rounds.len() >= 2, "difference vector needs at least 2 rounds");
    DifferenceVector {
        bits: rounds.windows(2).map(|w| w[0] != w[1]).collect(),
    }
}

/// Greedy left-to-right count of non-overlapping `11` substrings.
pub fn count_n11(delta: &DifferenceVector) -> usize {
    let bits = &delta.bits;
    let mut count = 0;
    let mut i = 0;
    while i + 1 < bits.len() {
        if bits[i] && bits[i + 1] {
            count += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    count
}

/// Non-overlapping `11` pairs plus remaining single ones: the minimum number
/// of faults that can cause the bit pattern.
fn pairs_plus_singles(bits: &[bool]) -> usize {
    let mut total = 0;
    let mut run = 0;
    for &b in bits {
        if b {
            run += 1;
        } else {
            total += run / 2 + run % 2;
            run = 0;
        }
    }
    total + run / 2 + run % 2
}

/// Why a time decoder stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// A zero substring's context bounded the remaining faults below its
    /// round count.
    ZeroSubstring,
    /// The non-overlapping `11` count reached the fault budget.
    NonOverlapping11,
    /// The worst-case round cap was reached.
    RoundCap,
}

/// A stop verdict: the round whose syndrome is used for error correction and
/// the condition that fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopDecision {
    pub chosen_round: usize,
    pub reason: StopReason,
}

pub fn shor_round_cap(t: usize) -> usize {
    (t + 1) * (t + 1)
}

pub fn one_tailed_round_cap(t: usize) -> usize {
    t * (t + 3) / 2 + 2
}

pub fn two_tailed_round_cap(t: usize) -> usize {
    if t % 2 == 1 {
        (t + 3) * (t + 3) / 4 - 1
    } else {
        (t + 2) * (t + 4) / 4 - 1
    }
}

/// Shor time decoder: stop once the last `t` difference bits are zero, with
/// a hard cap of `(t+1)^2` rounds. The chosen round is always the latest.
pub fn shor_decision(delta: &DifferenceVector, t: usize) -> Option<StopDecision> {
    let m = delta.rounds();
    let bits = delta.bits();
    if bits.len() >= t && bits[bits.len() - t..].iter().all(|&b| !b) {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::ZeroSubstring,
        });
    }
    if m >= shor_round_cap(t) {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::RoundCap,
        });
    }
    None
}

/// A maximal zero substring of the difference vector: positions `a..=b`
/// (1-based) with `gamma = b - a + 1 >= 1`, corresponding to rounds
/// `a..=b+1` sharing one syndrome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ZeroBlock {
    a: usize,
    b: usize,
}

fn zero_blocks(delta: &DifferenceVector) -> Vec<ZeroBlock> {
    let bits = delta.bits();
    let mut blocks = Vec::new();
    let mut start = None;
    for (idx, &bit) in bits.iter().enumerate() {
        match (bit, start) {
            (false, None) => start = Some(idx + 1),
            (true, Some(a)) => {
                blocks.push(ZeroBlock { a, b: idx });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        blocks.push(ZeroBlock { a, b: bits.len() });
    }
    blocks
}

/// Fault-count context of one zero substring. `alpha`/`beta` come from the
/// difference bits strictly outside `1 eta 1`; `mu`/`nu` count flag bits in
/// the rounds before/after that window; `omega` counts per-round flag bits
/// in excess of one inside the window; the tilded values take the maximum of
/// the correlated estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroSubstringContext {
    pub gamma: usize,
    pub alpha: usize,
    pub beta: usize,
    pub mu: usize,
    pub nu: usize,
    pub omega: usize,
    pub alpha_tilde: usize,
    pub beta_tilde: usize,
}

fn block_context(
    delta: &DifferenceVector,
    flag_counts: &[usize],
    block: ZeroBlock,
) -> ZeroSubstringContext {
    let bits = delta.bits();
    let m = delta.rounds();
    debug_assert_eq!(flag_counts.len(), m);
    let ZeroBlock { a, b } = block;
    let gamma = b - a + 1;
    // difference bits strictly before the bounding one at position a-1
    let alpha = if a >= 2 { pairs_plus_singles(&bits[..a - 2]) } else { 0 };
    // and strictly after the bounding one at position b+1
    let beta = if b < bits.len() {
        pairs_plus_singles(&bits[b + 1..])
    } else {
        0
    };
    // flags in rounds 1..=a-1, i.e. up to the left bounding one
    let mu = if a >= 2 {
        flag_counts[..a - 1].iter().sum()
    } else {
        0
    };
    // flags in rounds b+2..=m, i.e. after the right bounding one
    let nu = if b < bits.len() {
        flag_counts[b + 1..].iter().sum()
    } else {
        0
    };
    // flags exceeding one per round inside rounds a..=b+1
    let omega = flag_counts[a - 1..=b]
        .iter()
        .map(|&c| c.saturating_sub(1))
        .sum();
    ZeroSubstringContext {
        gamma,
        alpha,
        beta,
        mu,
        nu,
        omega,
        alpha_tilde: alpha.max(mu),
        beta_tilde: beta.max(nu),
    }
}

/// Contexts of all zero substrings, paired with the last round of each
/// substring's equal-syndrome window.
pub fn zero_substring_contexts(
    delta: &DifferenceVector,
    flag_counts: &[usize],
) -> Vec<(usize, ZeroSubstringContext)> {
    zero_blocks(delta)
        .into_iter()
        .map(|blk| (blk.b + 1, block_context(delta, flag_counts, blk)))
        .collect()
}

/// Two-tailed adaptive time decoder. Condition 1: some zero substring
/// satisfies `alpha~ + beta~ + gamma + omega >= t` (the chosen round is the
/// last round of its window; the earliest satisfying substring wins).
/// Condition 2: `N11 >= t` (latest round). A hard round cap totalizes the
/// decision.
pub fn two_tailed_decision(
    delta: &DifferenceVector,
    flag_counts: &[usize],
    t: usize,
) -> Option<StopDecision> {
    let m = delta.rounds();
    assert_eq!(flag_counts.len(), m, "one flag count per round required");
    if t == 0 {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::ZeroSubstring,
        });
    }
    for (last_round, ctx) in zero_substring_contexts(delta, flag_counts) {
        if ctx.alpha_tilde + ctx.beta_tilde + ctx.gamma + ctx.omega >= t {
            return Some(StopDecision {
                chosen_round: last_round,
                reason: StopReason::ZeroSubstring,
            });
        }
    }
    if count_n11(delta) >= t {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::NonOverlapping11,
        });
    }
    if m >= two_tailed_round_cap(t) {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::RoundCap,
        });
    }
    None
}

/// One-tailed adaptive time decoder: only the final zero substring is
/// eligible (so the output error keeps a zero cumulative flag vector), with
/// condition `alpha~ + gamma + omega >= t` or `N11 >= t`. The chosen round
/// is always the latest.
pub fn one_tailed_decision(
    delta: &DifferenceVector,
    flag_counts: &[usize],
    t: usize,
) -> Option<StopDecision> {
    let m = delta.rounds();
    assert_eq!(flag_counts.len(), m, "one flag count per round required");
    if t == 0 {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::ZeroSubstring,
        });
    }
    let bits = delta.bits();
    if !bits.is_empty() && !bits[bits.len() - 1] {
        // trailing zero substring exists
        let block = *zero_blocks(delta).last().expect("trailing zeros form a block");
        debug_assert_eq!(block.b, bits.len());
        let ctx = block_context(delta, flag_counts, block);
        if ctx.alpha_tilde + ctx.gamma + ctx.omega >= t {
            return Some(StopDecision {
                chosen_round: m,
                reason: StopReason::ZeroSubstring,
            });
        }
    }
    if count_n11(delta) >= t {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::NonOverlapping11,
        });
    }
    if m >= one_tailed_round_cap(t) {
        return Some(StopDecision {
            chosen_round: m,
            reason: StopReason::RoundCap,
        });
    }
    None
}

/// Remaining fault budget for the second phase of separated X/Z counting:
/// `t - max(alpha_all, mu_all)`, floored at zero. `alpha_all` is the
/// pairs-plus-singles estimate over the whole first-phase difference vector
/// and `mu_all` the total number of nonzero flag bits seen in the first
/// phase.
pub fn separated_budget(delta: &DifferenceVector, flag_counts: &[usize], t: usize) -> usize {
    let alpha_all = pairs_plus_singles(delta.bits());
    let mu_all: usize = flag_counts.iter().sum();
    t.saturating_sub(alpha_all.max(mu_all))
}

/// Inputs for the two space-decoder calls of a joint-measurement routine.
#[derive(Debug, Clone)]
pub struct CorrectionInputs {
    /// `(syndrome, cumulative flags)` for Z-type error correction.
    pub z_ec: (BitVec, BitVec),
    /// `(syndrome, cumulative flags)` for X-type error correction.
    pub x_ec: (BitVec, BitVec),
    /// Cumulative flag vectors not consumed by this routine; the next
    /// routine (or the final ideal correction) uses them as its initial
    /// flag state.
    pub remaining: FlagState,
}

/// Joint-mode pairing: Z-type EC uses `(s_{l,x}, F_{l-1,z})` and X-type EC
/// uses `(s_{l,z}, F_{l,x})`. Flags measured at or after the consumed prefix
/// are returned as the remaining state.
pub fn select_correction_inputs(history: &SyndromeHistory, l: usize) -> CorrectionInputs {
    assert!(l >= 1 && l <= history.len(), "invalid chosen round {l}");
    let m = history.len();
    let f_z_used = history.cumulative_f_z(l - 1);
    let f_x_used = history.cumulative_f_x(l);
    let z_ec = (history.rounds[l - 1].s_x.clone(), f_z_used.clone());
    let x_ec = (history.rounds[l - 1].s_z.clone(), f_x_used.clone());
    let remaining = FlagState {
        f_x: history.cumulative_f_x(m).xor(&f_x_used),
        f_z: history.cumulative_f_z(m).xor(&f_z_used),
    };
    CorrectionInputs { z_ec, x_ec, remaining }
}

/// Syndrome and flag records of one single-type measurement phase.
#[derive(Debug, Clone)]
pub struct PhaseRecords {
    pub syndromes: Vec<BitVec>,
    pub flags: Vec<BitVec>,
}

impl PhaseRecords {
    pub fn new() -> Self {
        Self {
            syndromes: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn rounds(&self) -> usize {
        self.syndromes.len()
    }

    pub fn flag_counts(&self) -> Vec<usize> {
        self.flags.iter().map(BitVec::weight).collect()
    }

    fn cumulative_flags(&self, r: usize) -> BitVec {
        self.flags.iter().fold(BitVec::zeros(r), |mut acc, f| {
            acc.xor_assign(f);
            acc
        })
    }
}

impl Default for PhaseRecords {
    fn default() -> Self {
        Self::new()
    }
}

/// Separated-counting pairing. With Z-type measured first (ZX): X-type EC
/// uses the first phase's accepted syndrome with the threaded X flags (any
/// X hooks it could see predate this routine), Z-type EC uses the second
/// phase's accepted syndrome with every first-phase Z flag (all those hooks
/// precede the second phase), and the second phase's flags become the
/// remaining state. XZ mirrors the roles.
pub fn select_correction_inputs_separated(
    z_measured_first: bool,
    first: &PhaseRecords,
    second: &PhaseRecords,
    l_first: usize,
    l_second: usize,
    initial: &FlagState,
) -> CorrectionInputs {
    assert!(l_first >= 1 && l_first <= first.rounds(), "invalid first-phase round");
    assert!(
        l_second >= 1 && l_second <= second.rounds(),
        "invalid second-phase round"
    );
    let r = initial.f_x.len();
    let first_all = first.cumulative_flags(r);
    let second_all = second.cumulative_flags(r);
    let s_first = first.syndromes[l_first - 1].clone();
    let s_second = second.syndromes[l_second - 1].clone();
    if z_measured_first {
        CorrectionInputs {
            x_ec: (s_first, initial.f_x.clone()),
            z_ec: (s_second, initial.f_z.xor(&first_all)),
            remaining: FlagState {
                f_x: second_all,
                f_z: BitVec::zeros(r),
            },
        }
    } else {
        CorrectionInputs {
            z_ec: (s_first, initial.f_z.clone()),
            x_ec: (s_second, initial.f_x.xor(&first_all)),
            remaining: FlagState {
                f_x: BitVec::zeros(r),
                f_z: second_all,
            },
        }
    }
}
