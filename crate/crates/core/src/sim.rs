//! Circuit-level depolarizing Pauli-frame simulation of flag FTQEC.
//!
//! The simulator runs the storage experiment: perfect preparation of the
//! logical zero state, noisy rounds of flag syndrome extraction driven by a
//! time decoder, space decoding of the accepted full syndromes, recovery,
//! and a final ideal error correction that adjudicates the logical outcome.
//!
//! Noise model: every one-qubit gate is followed by X, Y, or Z with
//! probability `p/3` each, every two-qubit gate by one of the fifteen
//! nontrivial Pauli pairs with probability `p/15` each, and preparations and
//! measurements suffer bit flips with probability `p`. Idling noise is off
//! by default and applies uniform depolarizing noise of strength `p_idle` to
//! uninvolved qubits at every gate step of the sequential schedule.
//!
//! Randomness is counter-based: every fault site draws from a hash of
//! `(seed, shot, site counter, stream)`, so shots are reproducible under
//! parallel sharding and paired experiments stay aligned site by site. The
//! X-type extraction circuit is the transversal-H dual of the Z-type one;
//! depolarizing noise is symmetric under that duality, so faults are sampled
//! directly in the dual frame.

use thiserror::Error;

use crate::codes::CssCode;
use crate::faultcode::{CnotOrdering, FaultCheckMatrix};
use crate::flagproc::FlagState;
use crate::gf2::BitVec;
use crate::lookup::{decode, mim_decode, mix64, FullSyndrome, LookupTable};
use crate::timedec::{
    difference_vector, one_tailed_decision, select_correction_inputs, separated_budget,
    shor_decision, two_tailed_decision, RoundRecord, StopDecision, SyndromeHistory,
};

/// Physical error rates of the circuit-level depolarizing model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub p: f64,
    pub p_idle: f64,
}

impl NoiseParams {
    pub fn new(p: f64, p_idle: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "p out of range");
        assert!((0.0..=1.0).contains(&p_idle), "p_idle out of range");
        Self { p, p_idle }
    }

    pub fn gate_only(p: f64) -> Self {
        Self::new(p, 0.0)
    }

    pub fn noiseless() -> Self {
        Self::new(0.0, 0.0)
    }
}

/// Accumulated Pauli error on the data qubits, tracked as X and Z parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFrame {
    pub x: BitVec,
    pub z: BitVec,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Transversal logical Hadamard: exchange the X and Z parts.
    pub fn swap_xz(&mut self) {
        std::mem::swap(&mut self.x, &mut self.z);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Shor,
    OneTailed,
    TwoTailed,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Shor => "shor",
            DecoderKind::OneTailed => "one_tailed",
            DecoderKind::TwoTailed => "two_tailed",
        }
    }
}

/// Measurement scheduling strategy: joint rounds, or separated X/Z counting
/// with the named type measured first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Joint,
    Xz,
    Zx,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Joint => "joint",
            Strategy::Xz => "xz",
            Strategy::Zx => "zx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderConfig {
    pub kind: DecoderKind,
    pub strategy: Strategy,
    pub mim: bool,
    /// Meet-in-the-Middle search radius; used only when `mim` is set.
    pub rho: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("lookup table radius {table} does not match code t = {code}")]
    RadiusMismatch { table: usize, code: usize },
    #[error("separated X/Z counting requires the two-tailed time decoder")]
    SeparatedNeedsTwoTailed,
    #[error("MIM radius must satisfy 1 <= rho <= t, got {rho} with t = {t}")]
    BadMimRadius { rho: usize, t: usize },
}

/// Kinds of noise sites, in circuit order. Each kind has a fixed number of
/// fault variants for exhaustive injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Prep,
    Meas,
    OneQubit,
    TwoQubit,
}

impl SiteKind {
    pub fn variants(self) -> u8 {
        match self {
            SiteKind::Prep | SiteKind::Meas => 1,
            SiteKind::OneQubit => 3,
            SiteKind::TwoQubit => 15,
        }
    }
}

/// Force a specific fault variant at one site counter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub site: u64,
    pub variant: u8,
}

/// Outcome of one Monte Carlo shot.
#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub logical_x_error: bool,
    pub logical_z_error: bool,
    /// Rounds in units of half rounds: a joint round counts 2, a single-type
    /// round counts 1.
    pub half_rounds: u32,
    pub history: SyndromeHistory,
}

impl SampleOutcome {
    pub fn rounds_used(&self) -> f64 {
        f64::from(self.half_rounds) / 2.0
    }
}

/// Result of one FTQEC routine: recoveries already applied to the frame.
#[derive(Debug, Clone)]
pub struct RoutineResult {
    pub history: SyndromeHistory,
    pub half_rounds: u32,
    pub stop: StopDecision,
    /// Flag information not consumed by this routine, to be threaded into
    /// the next routine or the final ideal correction.
    pub remaining: FlagState,
}

const STREAM_GATE: u64 = 0;
const STREAM_VARIANT: u64 = 1;
const STREAM_IDLE: u64 = 2;

fn site_draw(seed: u64, shot: u64, site: u64, stream: u64, sub: u64) -> u64 {
    let mut h = mix64(seed ^ 0x6A09_E667_F3BC_C909);
    h = mix64(h ^ shot.wrapping_mul(0xA54F_F53A_5F1D_36F1));
    h = mix64(
        h ^ site.wrapping_mul(0x510E_527F_ADE6_82D1)
            ^ stream.wrapping_mul(0x9B05_688C_2B3E_6C1F)
            ^ sub.wrapping_mul(0x3C6E_F372_FE94_F82B),
    );
    h
}

fn unit_f64(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Single-draw depolarizing sample: `Some(variant)` with probability `p`,
/// with the variant uniform over `0..variants`.
fn depolarize(u: u64, p: f64, variants: u8) -> Option<u8> {
    let x = unit_f64(u);
    if x < p {
        let v = (x / p * f64::from(variants)) as u8;
        Some(v.min(variants - 1))
    } else {
        None
    }
}

/// Apply depolarizing noise to each idle qubit independently, consuming one
/// raw 64-bit draw per qubit. Pauli codes carry the X component in bit 0 and
/// the Z component in bit 1, so variants 0/1/2 map to X/Z/Y.
pub fn apply_idling_noise(
    frame: &mut PauliFrame,
    idle: &[usize],
    p_idle: f64,
    draw: &mut impl FnMut(usize) -> u64,
) {
    if p_idle == 0.0 {
        return;
    }
    for &q in idle {
        if let Some(v) = depolarize(draw(q), p_idle, 3) {
            let pauli = v + 1; // 1 = X, 2 = Z, 3 = Y
            if pauli & 1 == 1 {
                frame.x.flip(q);
            }
            if pauli & 2 == 2 {
                frame.z.flip(q);
            }
        }
    }
}

/// Which generator type a circuit measures. The detection component of the
/// frame is the part that flips this type's outcomes (X errors for Z-type
/// generators and vice versa); the propagation component is the part hook
/// errors land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    XType,
    ZType,
}

struct ShotCtx<'r> {
    seed: u64,
    shot: u64,
    site: u64,
    p: f64,
    p_idle: f64,
    injection: Option<Injection>,
    record: Option<&'r mut Vec<SiteKind>>,
}

impl<'r> ShotCtx<'r> {
    fn new(seed: u64, shot: u64, noise: NoiseParams, injection: Option<Injection>) -> Self {
        Self {
            seed,
            shot,
            site: 0,
            p: noise.p,
            p_idle: noise.p_idle,
            injection,
            record: None,
        }
    }

    /// Advance the site counter and sample (or inject) this site's fault.
    /// Returns the 0-based variant when a fault fires.
    fn next_site(&mut self, kind: SiteKind) -> Option<u8> {
        let site = self.site;
        self.site += 1;
        if let Some(rec) = self.record.as_deref_mut() {
            rec.push(kind);
        }
        if let Some(inj) = self.injection {
            if inj.site == site {
                debug_assert!(inj.variant < kind.variants());
                return Some(inj.variant);
            }
        }
        if self.p > 0.0 {
            let u = site_draw(self.seed, self.shot, site, STREAM_GATE, 0);
            if let Some(v) = depolarize(u, self.p, kind.variants()) {
                // variant drawn from an independent stream to stay unbiased
                if kind.variants() == 1 {
                    return Some(0);
                }
                let uv = site_draw(self.seed, self.shot, site, STREAM_VARIANT, 0);
                let _ = v;
                return Some((uv % u64::from(kind.variants())) as u8);
            }
        }
        None
    }

    fn idle_draw(&self, gate_site: u64, qubit: u64) -> u64 {
        site_draw(self.seed, self.shot, gate_site, STREAM_IDLE, qubit)
    }
}

/// A two-bit view of one ancilla in circuit-local coordinates:
/// `det` flips the measurement outcome, `prop` is the hook component.
#[derive(Clone, Copy, Default)]
struct Anc {
    det: bool,
    prop: bool,
}

fn apply_view_pauli(det: &mut bool, prop: &mut bool, pauli: u8) {
    if pauli & 1 == 1 {
        *det = !*det;
    }
    if pauli & 2 == 2 {
        *prop = !*prop;
    }
}

/// The full protocol configuration: code, circuits, decoders, and noise.
#[derive(Clone)]
pub struct Protocol<'a> {
    code: &'a CssCode,
    hf: &'a FaultCheckMatrix,
    table: &'a LookupTable,
    ordering: &'a CnotOrdering,
    decoder: DecoderConfig,
    noise: NoiseParams,
    seed: u64,
}

impl<'a> Protocol<'a> {
    pub fn new(
        code: &'a CssCode,
        hf: &'a FaultCheckMatrix,
        table: &'a LookupTable,
        ordering: &'a CnotOrdering,
        decoder: DecoderConfig,
        noise: NoiseParams,
        seed: u64,
    ) -> Result<Self, ProtocolError> {
        if table.radius() != code.t() {
            return Err(ProtocolError::RadiusMismatch {
                table: table.radius(),
                code: code.t(),
            });
        }
        if decoder.strategy != Strategy::Joint && decoder.kind != DecoderKind::TwoTailed {
            return Err(ProtocolError::SeparatedNeedsTwoTailed);
        }
        if decoder.mim && (decoder.rho == 0 || decoder.rho > code.t()) {
            return Err(ProtocolError::BadMimRadius {
                rho: decoder.rho,
                t: code.t(),
            });
        }
        Ok(Self {
            code,
            hf,
            table,
            ordering,
            decoder,
            noise,
            seed,
        })
    }

    pub fn code(&self) -> &CssCode {
        self.code
    }

    pub fn decoder(&self) -> DecoderConfig {
        self.decoder
    }

    /// Frame components in circuit-local (det, prop) order for a basis.
    fn frame_parts(frame: &mut PauliFrame, basis: Basis) -> (&mut BitVec, &mut BitVec) {
        match basis {
            Basis::ZType => (&mut frame.x, &mut frame.z),
            Basis::XType => (&mut frame.z, &mut frame.x),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn idle_after_gate(
        &self,
        frame: &mut PauliFrame,
        basis: Basis,
        anc: &mut Anc,
        flag: &mut Anc,
        gate_site: u64,
        data_involved: Option<usize>,
        anc_involved: bool,
        flag_involved: bool,
        ctx: &ShotCtx,
    ) {
        if ctx.p_idle == 0.0 {
            return;
        }
        let n = self.code.n();
        for q in 0..n {
            if Some(q) == data_involved {
                continue;
            }
            if let Some(v) = depolarize(ctx.idle_draw(gate_site, q as u64), ctx.p_idle, 3) {
                let (det, prop) = Self::frame_parts(frame, basis);
                let pauli = v + 1;
                // view coordinates; depolarizing is symmetric under the dual
                if pauli & 1 == 1 {
                    det.flip(q);
                }
                if pauli & 2 == 2 {
                    prop.flip(q);
                }
            }
        }
        if !anc_involved {
            if let Some(v) = depolarize(ctx.idle_draw(gate_site, n as u64), ctx.p_idle, 3) {
                apply_view_pauli(&mut anc.det, &mut anc.prop, v + 1);
            }
        }
        if !flag_involved {
            if let Some(v) = depolarize(ctx.idle_draw(gate_site, n as u64 + 1), ctx.p_idle, 3) {
                apply_view_pauli(&mut flag.det, &mut flag.prop, v + 1);
            }
        }
    }

    /// Simulate one flag syndrome-extraction circuit and return the
    /// (syndrome bit, flag bit) pair. The generator's couplings run in slot
    /// order with the two flag CNOTs second from either end.
    fn extract_generator(
        &self,
        frame: &mut PauliFrame,
        basis: Basis,
        generator: usize,
        ctx: &mut ShotCtx,
    ) -> (bool, bool) {
        let slots = self.ordering.slots(generator);
        let w = slots.len();
        let mut anc = Anc::default();
        let mut flag = Anc::default();

        // ancilla preparations; a preparation bit flip lands in det
        if ctx.next_site(SiteKind::Prep).is_some() {
            anc.det = !anc.det;
        }
        if ctx.next_site(SiteKind::Prep).is_some() {
            flag.det = !flag.det;
        }
        // flag Hadamard
        std::mem::swap(&mut flag.det, &mut flag.prop);
        let gate_site = ctx.site;
        if let Some(v) = ctx.next_site(SiteKind::OneQubit) {
            apply_view_pauli(&mut flag.det, &mut flag.prop, v + 1);
        }
        self.idle_after_gate(frame, basis, &mut anc, &mut flag, gate_site, None, true, false, ctx);

        // couplings: data slot 0, flag, data slots 1..w-1, flag, data slot w-1
        enum Coupling {
            Data(usize),
            Flag,
        }
        let mut sequence = Vec::with_capacity(w + 2);
        sequence.push(Coupling::Data(slots[0]));
        sequence.push(Coupling::Flag);
        for &q in &slots[1..w - 1] {
            sequence.push(Coupling::Data(q));
        }
        sequence.push(Coupling::Flag);
        sequence.push(Coupling::Data(slots[w - 1]));

        for coupling in sequence {
            let gate_site = ctx.site;
            match coupling {
                Coupling::Data(q) => {
                    {
                        let (det, prop) = Self::frame_parts(frame, basis);
                        // CNOT(control = data, target = ancilla) in the view
                        if det.get(q) {
                            anc.det = !anc.det;
                        }
                        if anc.prop {
                            prop.flip(q);
                        }
                    }
                    if let Some(v) = ctx.next_site(SiteKind::TwoQubit) {
                        let pair = v + 1;
                        let on_data = pair >> 2;
                        let on_anc = pair & 3;
                        let (det, prop) = Self::frame_parts(frame, basis);
                        if on_data & 1 == 1 {
                            det.flip(q);
                        }
                        if on_data & 2 == 2 {
                            prop.flip(q);
                        }
                        apply_view_pauli(&mut anc.det, &mut anc.prop, on_anc);
                    }
                    self.idle_after_gate(
                        frame, basis, &mut anc, &mut flag, gate_site, Some(q), true, false, ctx,
                    );
                }
                Coupling::Flag => {
                    // CNOT(control = flag, target = ancilla) in the view
                    if flag.det {
                        anc.det = !anc.det;
                    }
                    if anc.prop {
                        flag.prop = !flag.prop;
                    }
                    if let Some(v) = ctx.next_site(SiteKind::TwoQubit) {
                        let pair = v + 1;
                        apply_view_pauli(&mut flag.det, &mut flag.prop, pair >> 2);
                        apply_view_pauli(&mut anc.det, &mut anc.prop, pair & 3);
                    }
                    self.idle_after_gate(
                        frame, basis, &mut anc, &mut flag, gate_site, None, true, true, ctx,
                    );
                }
            }
        }

        // closing flag Hadamard, then measurements
        std::mem::swap(&mut flag.det, &mut flag.prop);
        let gate_site = ctx.site;
        if let Some(v) = ctx.next_site(SiteKind::OneQubit) {
            apply_view_pauli(&mut flag.det, &mut flag.prop, v + 1);
        }
        self.idle_after_gate(frame, basis, &mut anc, &mut flag, gate_site, None, true, false, ctx);
        if ctx.next_site(SiteKind::Meas).is_some() {
            flag.det = !flag.det;
        }
        let flag_bit = flag.det;
        if ctx.next_site(SiteKind::Meas).is_some() {
            anc.det = !anc.det;
        }
        (anc.det, flag_bit)
    }

    /// Measure all generators of one type, returning the syndrome and flag
    /// vectors of this half round.
    fn extract_round(
        &self,
        frame: &mut PauliFrame,
        basis: Basis,
        ctx: &mut ShotCtx,
    ) -> (BitVec, BitVec) {
        let r = self.code.generators();
        let mut s = BitVec::zeros(r);
        let mut f = BitVec::zeros(r);
        for gen in 0..r {
            let (sb, fb) = self.extract_generator(frame, basis, gen, ctx);
            if sb {
                s.set(gen, true);
            }
            if fb {
                f.set(gen, true);
            }
        }
        (s, f)
    }

    fn decide(&self, delta: &crate::timedec::DifferenceVector, counts: &[usize], t: usize) -> Option<StopDecision> {
        match self.decoder.kind {
            DecoderKind::Shor => shor_decision(delta, t),
            DecoderKind::OneTailed => one_tailed_decision(delta, counts, t),
            DecoderKind::TwoTailed => two_tailed_decision(delta, counts, t),
        }
    }

    fn decode_side(&self, syndrome: &BitVec, flags: &BitVec) -> BitVec {
        let sigma = FullSyndrome::new(syndrome.clone(), flags.clone());
        if self.decoder.mim {
            mim_decode(self.table, self.hf, self.code, &sigma, self.decoder.rho)
        } else {
            decode(self.table, self.code, &sigma)
        }
    }

    fn run_joint_routine(
        &self,
        frame: &mut PauliFrame,
        initial: &FlagState,
        ctx: &mut ShotCtx,
    ) -> RoutineResult {
        let t = self.code.t();
        let mut history = SyndromeHistory::new(initial.clone());
        let mut joint_syndromes: Vec<(BitVec, BitVec)> = Vec::new();
        let stop = loop {
            let (s_x, f_x) = self.extract_round(frame, Basis::XType, ctx);
            let (s_z, f_z) = self.extract_round(frame, Basis::ZType, ctx);
            joint_syndromes.push((s_x.clone(), s_z.clone()));
            history.rounds.push(RoundRecord { s_x, f_x, s_z, f_z });
            if history.len() >= 2 {
                let delta = difference_vector(&joint_syndromes);
                let counts = history.flag_counts();
                if let Some(stop) = self.decide(&delta, &counts, t) {
                    break stop;
                }
            }
        };
        let inputs = select_correction_inputs(&history, stop.chosen_round);
        let rec_z = self.decode_side(&inputs.z_ec.0, &inputs.z_ec.1);
        frame.z.xor_assign(&rec_z);
        let rec_x = self.decode_side(&inputs.x_ec.0, &inputs.x_ec.1);
        frame.x.xor_assign(&rec_x);
        RoutineResult {
            half_rounds: 2 * history.len() as u32,
            stop,
            remaining: inputs.remaining,
            history,
        }
    }

    /// One single-type measurement phase of a separated routine. A zero
    /// budget trusts the first round outright.
    fn run_phase(
        &self,
        frame: &mut PauliFrame,
        basis: Basis,
        budget: usize,
        ctx: &mut ShotCtx,
    ) -> (Vec<BitVec>, Vec<BitVec>, StopDecision) {
        let mut syndromes: Vec<BitVec> = Vec::new();
        let mut flags: Vec<BitVec> = Vec::new();
        let stop = loop {
            let (s, f) = self.extract_round(frame, basis, ctx);
            syndromes.push(s);
            flags.push(f);
            if budget == 0 {
                break StopDecision {
                    chosen_round: 1,
                    reason: crate::timedec::StopReason::ZeroSubstring,
                };
            }
            if syndromes.len() >= 2 {
                let delta = difference_vector(&syndromes);
                let counts: Vec<usize> = flags.iter().map(BitVec::weight).collect();
                if let Some(stop) = two_tailed_decision(&delta, &counts, budget) {
                    break stop;
                }
            }
        };
        (syndromes, flags, stop)
    }

    fn run_separated_routine(
        &self,
        frame: &mut PauliFrame,
        initial: &FlagState,
        ctx: &mut ShotCtx,
    ) -> RoutineResult {
        let t = self.code.t();
        let r = self.code.generators();
        let first = match self.decoder.strategy {
            Strategy::Zx => Basis::ZType,
            Strategy::Xz => Basis::XType,
            Strategy::Joint => unreachable!("joint handled separately"),
        };
        let (s1, f1, stop1) = self.run_phase(frame, first, t, ctx);
        let delta1_counts: Vec<usize> = f1.iter().map(BitVec::weight).collect();
        let budget2 = if s1.len() >= 2 {
            separated_budget(&difference_vector(&s1), &delta1_counts, t)
        } else {
            separated_budget(
                &crate::timedec::DifferenceVector::from_bits(Vec::new()),
                &delta1_counts,
                t,
            )
        };
        let second = match first {
            Basis::ZType => Basis::XType,
            Basis::XType => Basis::ZType,
        };
        let (s2, f2, stop2) = self.run_phase(frame, second, budget2, ctx);

        let phase1 = crate::timedec::PhaseRecords {
            syndromes: s1.clone(),
            flags: f1.clone(),
        };
        let phase2 = crate::timedec::PhaseRecords {
            syndromes: s2.clone(),
            flags: f2.clone(),
        };
        let inputs = crate::timedec::select_correction_inputs_separated(
            first == Basis::ZType,
            &phase1,
            &phase2,
            stop1.chosen_round,
            stop2.chosen_round,
            initial,
        );
        let rec_z = self.decode_side(&inputs.z_ec.0, &inputs.z_ec.1);
        frame.z.xor_assign(&rec_z);
        let rec_x = self.decode_side(&inputs.x_ec.0, &inputs.x_ec.1);
        frame.x.xor_assign(&rec_x);
        let remaining = inputs.remaining;

        // Record the single-type rounds with the unmeasured side zeroed.
        let mut history = SyndromeHistory::new(initial.clone());
        let zero = BitVec::zeros(r);
        for (s, f) in s1.iter().zip(&f1) {
            let rec = match first {
                Basis::ZType => RoundRecord {
                    s_x: zero.clone(),
                    f_x: zero.clone(),
                    s_z: s.clone(),
                    f_z: f.clone(),
                },
                Basis::XType => RoundRecord {
                    s_x: s.clone(),
                    f_x: f.clone(),
                    s_z: zero.clone(),
                    f_z: zero.clone(),
                },
            };
            history.rounds.push(rec);
        }
        for (s, f) in s2.iter().zip(&f2) {
            let rec = match second {
                Basis::ZType => RoundRecord {
                    s_x: zero.clone(),
                    f_x: zero.clone(),
                    s_z: s.clone(),
                    f_z: f.clone(),
                },
                Basis::XType => RoundRecord {
                    s_x: s.clone(),
                    f_x: f.clone(),
                    s_z: zero.clone(),
                    f_z: zero.clone(),
                },
            };
            history.rounds.push(rec);
        }
        RoutineResult {
            half_rounds: (s1.len() + s2.len()) as u32,
            stop: stop2,
            remaining,
            history,
        }
    }

    /// Run one FTQEC routine against the frame, applying the recoveries.
    /// Exposed so multi-routine experiments can thread flag states through
    /// logical gates between routines.
    pub fn run_routine(
        &self,
        frame: &mut PauliFrame,
        initial: &FlagState,
        shot: u64,
        injection: Option<Injection>,
    ) -> RoutineResult {
        let mut ctx = ShotCtx::new(self.seed, shot, self.noise, injection);
        self.run_routine_ctx(frame, initial, &mut ctx)
    }

    fn run_routine_ctx(
        &self,
        frame: &mut PauliFrame,
        initial: &FlagState,
        ctx: &mut ShotCtx,
    ) -> RoutineResult {
        match self.decoder.strategy {
            Strategy::Joint => self.run_joint_routine(frame, initial, ctx),
            Strategy::Xz | Strategy::Zx => self.run_separated_routine(frame, initial, ctx),
        }
    }

    /// Noiseless error correction round: the configured space decoder run on
    /// the exact syndromes, keyed with the threaded remaining flag state.
    pub fn ideal_ec(&self, frame: &mut PauliFrame, remaining: &FlagState) {
        let s_x = self.code.syndrome(&frame.z);
        let rec_z = self.decode_side(&s_x, &remaining.f_z);
        frame.z.xor_assign(&rec_z);
        let s_z = self.code.syndrome(&frame.x);
        let rec_x = self.decode_side(&s_z, &remaining.f_x);
        frame.x.xor_assign(&rec_x);
    }

    pub fn run_shot(&self, shot: u64) -> SampleOutcome {
        self.run_shot_injected(shot, None)
    }

    pub fn run_shot_injected(&self, shot: u64, injection: Option<Injection>) -> SampleOutcome {
        let mut frame = PauliFrame::new(self.code.n());
        let initial = FlagState::zeros(self.code.generators());
        let mut ctx = ShotCtx::new(self.seed, shot, self.noise, injection);
        let routine = self.run_routine_ctx(&mut frame, &initial, &mut ctx);
        self.ideal_ec(&mut frame, &routine.remaining);
        SampleOutcome {
            logical_x_error: self.code.logical_class(&frame.x),
            logical_z_error: self.code.logical_class(&frame.z),
            half_rounds: routine.half_rounds,
            history: routine.history,
        }
    }

    /// Site kinds touched by a noiseless shot, in counter order. A single
    /// injected fault can only land on one of these sites: anything later
    /// would require an earlier deviation.
    pub fn enumerate_sites(&self) -> Vec<SiteKind> {
        let mut sites = Vec::new();
        let mut frame = PauliFrame::new(self.code.n());
        let initial = FlagState::zeros(self.code.generators());
        let mut ctx = ShotCtx::new(self.seed, 0, NoiseParams::noiseless(), None);
        ctx.record = Some(&mut sites);
        let _ = self.run_routine_ctx(&mut frame, &initial, &mut ctx);
        sites
    }
}

/// Exhaustively inject every fault variant at every reachable site of a
/// noiseless shot and verify that no single fault causes a logical error.
/// Returns the first offending injection on failure.
pub fn exhaustive_single_fault_check(protocol: &Protocol) -> Result<usize, Injection> {
    assert_eq!(protocol.noise, NoiseParams::noiseless(), "sweep requires p = 0");
    let sites = protocol.enumerate_sites();
    let mut cases = 0;
    for (site, kind) in sites.iter().enumerate() {
        for variant in 0..kind.variants() {
            let injection = Injection {
                site: site as u64,
                variant,
            };
            let outcome = protocol.run_shot_injected(0, Some(injection));
            if outcome.logical_x_error || outcome.logical_z_error {
                return Err(injection);
            }
            cases += 1;
        }
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_hex_color_code;
    use crate::faultcode::{build_aggregator, build_fault_check_matrix, build_propagator};
    use crate::lookup::build_cache;

    struct Fixture {
        code: CssCode,
        hf: FaultCheckMatrix,
        table: LookupTable,
        ordering: CnotOrdering,
    }

    fn fixture(d: usize) -> Fixture {
        let (code, _) = build_hex_color_code(d).unwrap();
        let ordering = CnotOrdering::ascending(&code);
        let hf = build_fault_check_matrix(&code, &ordering);
        let table = build_cache(&hf, code.t()).unwrap();
        Fixture {
            code,
            hf,
            table,
            ordering,
        }
    }

    fn protocol<'a>(fx: &'a Fixture, decoder: DecoderConfig, noise: NoiseParams, seed: u64) -> Protocol<'a> {
        Protocol::new(&fx.code, &fx.hf, &fx.table, &fx.ordering, decoder, noise, seed).unwrap()
    }

    const SHOR_JOINT: DecoderConfig = DecoderConfig {
        kind: DecoderKind::Shor,
        strategy: Strategy::Joint,
        mim: false,
        rho: 0,
    };

    #[test]
    fn clean_shot_reaches_floor_rounds() {
        for d in [3, 5] {
            let fx = fixture(d);
            let t = fx.code.t();
            for decoder in [
                SHOR_JOINT,
                DecoderConfig {
                    kind: DecoderKind::OneTailed,
                    strategy: Strategy::Joint,
                    mim: false,
                    rho: 0,
                },
                DecoderConfig {
                    kind: DecoderKind::TwoTailed,
                    strategy: Strategy::Joint,
                    mim: false,
                    rho: 0,
                },
                DecoderConfig {
                    kind: DecoderKind::TwoTailed,
                    strategy: Strategy::Zx,
                    mim: false,
                    rho: 0,
                },
            ] {
                let p = protocol(&fx, decoder, NoiseParams::noiseless(), 7);
                let outcome = p.run_shot(0);
                assert!(!outcome.logical_x_error);
                assert!(!outcome.logical_z_error);
                assert_eq!(outcome.rounds_used(), (t + 1) as f64, "{decoder:?}");
            }
        }
    }

    #[test]
    fn shots_are_deterministic() {
        let fx = fixture(3);
        let p = protocol(&fx, SHOR_JOINT, NoiseParams::gate_only(0.02), 42);
        for shot in 0..50 {
            let a = p.run_shot(shot);
            let b = p.run_shot(shot);
            assert_eq!(a.logical_x_error, b.logical_x_error);
            assert_eq!(a.half_rounds, b.half_rounds);
            assert_eq!(a.history.rounds, b.history.rounds);
        }
    }

    #[test]
    fn config_validation() {
        let fx = fixture(3);
        let bad = DecoderConfig {
            kind: DecoderKind::Shor,
            strategy: Strategy::Zx,
            mim: false,
            rho: 0,
        };
        let err = match Protocol::new(
            &fx.code,
            &fx.hf,
            &fx.table,
            &fx.ordering,
            bad,
            NoiseParams::noiseless(),
            0,
        ) {
            Err(e) => e,
            Ok(_) => panic!("separated shor accepted"),
        };
        assert_eq!(err, ProtocolError::SeparatedNeedsTwoTailed);
        let bad_rho = DecoderConfig {
            kind: DecoderKind::Shor,
            strategy: Strategy::Joint,
            mim: true,
            rho: 5,
        };
        assert!(matches!(
            Protocol::new(
                &fx.code,
                &fx.hf,
                &fx.table,
                &fx.ordering,
                bad_rho,
                NoiseParams::noiseless(),
                0
            ),
            Err(ProtocolError::BadMimRadius { .. })
        ));
    }

    #[test]
    fn data_error_detected_by_dual_type_generator() {
        // a Z error on a support qubit flips the X-type generator's outcome
        let fx = fixture(3);
        let p = protocol(&fx, SHOR_JOINT, NoiseParams::noiseless(), 0);
        let mut frame = PauliFrame::new(fx.code.n());
        let q = fx.code.generator_support(0)[0];
        frame.z.set(q, true);
        let mut ctx = ShotCtx::new(0, 0, NoiseParams::noiseless(), None);
        let (sb, fb) = p.extract_generator(&mut frame, Basis::XType, 0, &mut ctx);
        assert!(sb);
        assert!(!fb);
        // the same error commutes with the Z-type generator
        let (sb, _) = p.extract_generator(&mut frame, Basis::ZType, 0, &mut ctx);
        assert!(!sb);
    }

    #[test]
    fn forced_ancilla_faults_reproduce_gate_columns() {
        // A view-Z on the syndrome ancilla after coupling j equals the gate
        // column for slot j+1; the slot-0 column is the trivial stabilizer
        // case covered by preparation physics.
        for d in [3, 5] {
            let fx = fixture(d);
            let p = protocol(&fx, SHOR_JOINT, NoiseParams::noiseless(), 0);
            let prop = build_propagator(&fx.code, &fx.ordering);
            let agg = build_aggregator(&fx.ordering);
            let pa = prop.mul(&agg);
            let n = fx.code.n();
            for gen in 0..fx.code.generators() {
                let w = fx.ordering.slots(gen).len();
                let base: usize = (0..gen).map(|g| fx.ordering.slots(g).len() + 2).sum();
                // site layout inside extract_generator: 2 preps, 1 flag H,
                // then couplings at sites 3..3+w+2, in slot order
                for j in 1..=w + 1 {
                    let mut frame = PauliFrame::new(n);
                    let mut ctx = ShotCtx::new(0, 0, NoiseParams::noiseless(), None);
                    // I (x) Z on (data, ancilla): pair code 0b10, variant 1
                    ctx.injection = Some(Injection {
                        site: 3 + (j as u64) - 1,
                        variant: 1,
                    });
                    let (sb, fb) = p.extract_generator(&mut frame, Basis::ZType, gen, &mut ctx);
                    // propagated data error lands in the Z part
                    let pa_col = base + j;
                    let mut expected = BitVec::zeros(n);
                    for q in 0..n {
                        if pa.get(q, pa_col) {
                            expected.set(q, true);
                        }
                    }
                    assert_eq!(frame.z, expected, "d={d} gen={gen} slot={j}");
                    assert!(frame.x.is_zero());
                    assert_eq!(fb, pa.get(n + gen, pa_col), "flag d={d} gen={gen} slot={j}");
                    // own-circuit syndrome bit: hook Z errors commute with
                    // this Z-type generator, so the outcome stays 0
                    assert!(!sb);
                }
            }
        }
    }

    #[test]
    fn single_fault_sweep_d3_all_decoders() {
        let fx = fixture(3);
        for decoder in [
            SHOR_JOINT,
            DecoderConfig {
                kind: DecoderKind::Shor,
                strategy: Strategy::Joint,
                mim: true,
                rho: 1,
            },
            DecoderConfig {
                kind: DecoderKind::OneTailed,
                strategy: Strategy::Joint,
                mim: false,
                rho: 0,
            },
            DecoderConfig {
                kind: DecoderKind::TwoTailed,
                strategy: Strategy::Joint,
                mim: true,
                rho: 1,
            },
            DecoderConfig {
                kind: DecoderKind::TwoTailed,
                strategy: Strategy::Zx,
                mim: true,
                rho: 1,
            },
            DecoderConfig {
                kind: DecoderKind::TwoTailed,
                strategy: Strategy::Xz,
                mim: true,
                rho: 1,
            },
        ] {
            let p = protocol(&fx, decoder, NoiseParams::noiseless(), 0);
            let cases = exhaustive_single_fault_check(&p)
                .unwrap_or_else(|inj| panic!("{decoder:?} fails at {inj:?}"));
            assert!(cases > 100);
        }
    }

    #[test]
    fn idling_noise_bounds() {
        let mut frame = PauliFrame::new(5);
        let mut draws = |q: usize| mix64(q as u64 + 1);
        apply_idling_noise(&mut frame, &[0, 1, 2, 3, 4], 0.0, &mut draws);
        assert!(frame.is_clean());
        apply_idling_noise(&mut frame, &[0, 1, 2, 3, 4], 1.0, &mut draws);
        for q in 0..5 {
            assert!(frame.x.get(q) || frame.z.get(q), "qubit {q} untouched");
        }
    }

    #[test]
    fn idling_noise_is_separately_streamed() {
        // matched seeds: gate faults are identical with and without idling
        let fx = fixture(3);
        let quiet = protocol(&fx, SHOR_JOINT, NoiseParams::gate_only(0.01), 9);
        let idle = protocol(&fx, SHOR_JOINT, NoiseParams::new(0.01, 0.01), 9);
        let mut diverged = false;
        for shot in 0..200 {
            let a = quiet.run_shot(shot);
            let b = idle.run_shot(shot);
            if a.history.rounds != b.history.rounds {
                diverged = true;
            }
        }
        assert!(diverged, "idling noise never fired at p_idle = 0.01");
    }

    #[test]
    fn idling_noise_strictly_degrades_matched_runs() {
        // paired comparison at matched seeds: the idle stream adds faults on
        // top of identical gate faults, so the failure count can only grow
        // meaningfully at this rate
        let fx = fixture(3);
        let p = 2e-3;
        let quiet = protocol(&fx, SHOR_JOINT, NoiseParams::gate_only(p), 77);
        let noisy = Protocol::new(
            &fx.code,
            &fx.hf,
            &fx.table,
            &fx.ordering,
            SHOR_JOINT,
            NoiseParams::new(p, p),
            77,
        )
        .unwrap();
        let shots = 20_000;
        let mut fails_quiet = 0;
        let mut fails_noisy = 0;
        for shot in 0..shots {
            fails_quiet += u32::from(quiet.run_shot(shot).logical_x_error);
            fails_noisy += u32::from(noisy.run_shot(shot).logical_x_error);
        }
        assert!(
            fails_noisy > 2 * fails_quiet,
            "idling noise too weak: {fails_noisy} vs {fails_quiet}"
        );
    }

    #[test]
    fn separated_budget_zero_gives_single_second_phase_round() {
        let fx = fixture(5);
        let cfg = DecoderConfig {
            kind: DecoderKind::TwoTailed,
            strategy: Strategy::Zx,
            mim: false,
            rho: 0,
        };
        let p = protocol(&fx, cfg, NoiseParams::gate_only(0.3), 3);
        // at very high p the first phase exhausts the budget and the second
        // phase runs half a round
        let mut saw_floor = false;
        for shot in 0..50 {
            let outcome = p.run_shot(shot);
            if outcome.rounds_used() == (fx.code.t() + 1) as f64 {
                saw_floor = true;
            }
        }
        assert!(saw_floor);
    }
}
