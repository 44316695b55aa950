//! Fault check matrix construction for single-flag syndrome extraction.
//!
//! Each column of the fault check matrix describes one possible single fault
//! in one round of syndrome measurements: its error syndrome, its flag bits,
//! and its logical class relative to the canonical recovery operators. Three
//! column groups:
//!
//! * pure data errors — syndrome rows are `H`, no flags, logical row
//!   `J^T (I xor H^{-1} H)`;
//! * flag ancilla preparation/measurement errors — identity on the flag
//!   rows, trivial everywhere else;
//! * gate faults — errors on the syndrome ancilla that propagate to data and
//!   flag qubits, captured by the propagator and aggregator matrices.
//!
//! Syndrome-ancilla measurement and reset faults are excluded; repetition of
//! syndrome measurements removes their effect.

use thiserror::Error;

use crate::codes::CssCode;
use crate::gf2::{BitMatrix, BitVec};
use crate::lookup::FullSyndrome;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderingError {
    #[error("ordering has {got} entries, code has {expected} generators")]
    WrongGeneratorCount { expected: usize, got: usize },
    #[error("ordering for generator {index} is not a bijection onto its support")]
    NotABijection { index: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Per-generator CNOT ordering: slot `j` of generator `i` couples data qubit
/// `slots[i][j]` to the syndrome ancilla.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnotOrdering {
    slots: Vec<Vec<usize>>,
}

impl CnotOrdering {
    /// The default ordering: ascending data-qubit index within each
    /// generator.
    pub fn ascending(code: &CssCode) -> Self {
        let slots = (0..code.generators())
            .map(|i| code.generator_support(i))
            .collect();
        Self { slots }
    }

    /// Validate an explicit per-generator permutation of each support.
    pub fn from_lists(code: &CssCode, lists: Vec<Vec<usize>>) -> Result<Self, OrderingError> {
        if lists.len() != code.generators() {
            return Err(OrderingError::WrongGeneratorCount {
                expected: code.generators(),
                got: lists.len(),
            });
        }
        for (i, list) in lists.iter().enumerate() {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if sorted != code.generator_support(i) {
                return Err(OrderingError::NotABijection { index: i });
            }
        }
        Ok(Self { slots: lists })
    }

    /// Parse one line per generator: space-separated data-qubit indices in
    /// CNOT order. `#` starts a comment.
    pub fn parse(code: &CssCode, text: &str) -> Result<Self, OrderingError> {
        let mut lists = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let list: Result<Vec<usize>, _> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| OrderingError::Parse {
                        line: lineno + 1,
                        message: format!("invalid qubit index {tok:?}"),
                    })
                })
                .collect();
            lists.push(list?);
        }
        Self::from_lists(code, lists)
    }

    pub fn generators(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self, generator: usize) -> &[usize] {
        &self.slots[generator]
    }

    /// Total gate-fault column count over all generators.
    pub fn gate_columns(&self) -> usize {
        self.slots.iter().map(|s| s.len() + 2).sum()
    }
}

/// Where a fault-check-matrix column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultOrigin {
    /// A pure data error on the given qubit.
    Data(usize),
    /// A flag ancilla preparation or measurement error in the given
    /// generator's circuit.
    Flag(usize),
    /// A syndrome-ancilla error entering before coupling `slot` (0-based
    /// within the generator's `w + 2` couplings).
    Gate { generator: usize, slot: usize },
}

impl std::fmt::Display for FaultOrigin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FaultOrigin::Data(q) => write!(f, "data({q})"),
            FaultOrigin::Flag(i) => write!(f, "flag({i})"),
            FaultOrigin::Gate { generator, slot } => write!(f, "gate({generator},{slot})"),
        }
    }
}

/// Deduplicated view of the fault-check-matrix columns.
#[derive(Debug, Clone)]
pub struct UniqueColumns {
    /// Index of the representative original column for each unique column,
    /// in first-occurrence order.
    pub representatives: Vec<usize>,
    /// Map from original column index to unique column index.
    pub of_column: Vec<usize>,
    /// Packed full syndrome of each unique column: syndrome bits 0..r-1,
    /// flag bits r..2r-1.
    pub keys: Vec<u128>,
    /// Logical class of each unique column.
    pub classes: Vec<bool>,
}

impl UniqueColumns {
    pub fn count(&self) -> usize {
        self.representatives.len()
    }
}

/// The fault check matrix: one column per possible single fault, rows split
/// into generator bits, flag bits, and the logical class.
#[derive(Debug)]
pub struct FaultCheckMatrix {
    n: usize,
    r: usize,
    syndrome_rows: BitMatrix,
    flag_rows: BitMatrix,
    logical_row: BitVec,
    provenance: Vec<FaultOrigin>,
    unique: UniqueColumns,
    /// Lazily built Meet-in-the-Middle level tables (combination keys of
    /// weight 1..=3 in first-hit order).
    pub(crate) mim_levels: [std::sync::OnceLock<Vec<u64>>; 3],
}

/// Assemble the propagator matrix `P = (P_1 P_2 ... P_r)`. Block `P_i` has
/// one column per coupling of generator `i`'s flag circuit in time order:
/// the data columns carry a single 1 at the data qubit's row, and the two
/// flag-CNOT columns (second from the left, second from the right) carry a
/// single 1 at row `n + i`.
pub fn build_propagator(code: &CssCode, ordering: &CnotOrdering) -> BitMatrix {
    let n = code.n();
    let r = code.generators();
    let mut p = BitMatrix::zeros(n + r, ordering.gate_columns());
    let mut col = 0;
    for i in 0..r {
        let slots = ordering.slots(i);
        let w = slots.len();
        for (k, row) in coupling_rows(slots, n + i).into_iter().enumerate() {
            p.set(row, col + k, true);
        }
        col += w + 2;
    }
    p
}

/// Row indices touched by each coupling of one circuit, in time order:
/// `[d_1, flag, d_2, ..., d_{w-1}, flag, d_w]`.
fn coupling_rows(slots: &[usize], flag_row: usize) -> Vec<usize> {
    let w = slots.len();
    let mut rows = Vec::with_capacity(w + 2);
    rows.push(slots[0]);
    rows.push(flag_row);
    rows.extend_from_slice(&slots[1..w - 1]);
    rows.push(flag_row);
    rows.push(slots[w - 1]);
    rows
}

/// The aggregator matrix `A = direct sum of A_i`, each block a
/// `(w_i+2) x (w_i+2)` lower-triangular all-ones matrix. Multiplying `P A`
/// propagates an ancilla error at one coupling through all later couplings.
pub fn build_aggregator(ordering: &CnotOrdering) -> BitMatrix {
    let total = ordering.gate_columns();
    let mut a = BitMatrix::zeros(total, total);
    let mut base = 0;
    for i in 0..ordering.generators() {
        let size = ordering.slots(i).len() + 2;
        for row in 0..size {
            for col in 0..=row {
                a.set(base + row, base + col, true);
            }
        }
        base += size;
    }
    a
}

/// Build the full fault check matrix for a code and CNOT ordering.
pub fn build_fault_check_matrix(code: &CssCode, ordering: &CnotOrdering) -> FaultCheckMatrix {
    assert_eq!(
        ordering.generators(),
        code.generators(),
        "ordering does not match code"
    );
    let n = code.n();
    let r = code.generators();
    let gate_cols = ordering.gate_columns();
    let total = n + r + gate_cols;

    let mut syndrome_rows = BitMatrix::zeros(r, total);
    let mut flag_rows = BitMatrix::zeros(r, total);
    let mut logical_row = BitVec::zeros(total);
    let mut provenance = Vec::with_capacity(total);

    // Pure data errors: syndrome rows H, logical row J^T (I xor H^{-1} H).
    for q in 0..n {
        for gen in 0..r {
            if code.h().get(gen, q) {
                syndrome_rows.set(gen, q, true);
            }
        }
        let e = BitVec::from_support(n, &[q]);
        if code.logical_class(&e) {
            logical_row.set(q, true);
        }
        provenance.push(FaultOrigin::Data(q));
    }
    // Flag preparation/measurement errors: identity on the flag rows.
    for i in 0..r {
        flag_rows.set(i, n + i, true);
        provenance.push(FaultOrigin::Flag(i));
    }
    // Gate faults: PA split into Omega (data rows) and Phi (flag rows), then
    // S = H Omega, Theta = H^{-1} S, L = J^T (Omega xor Theta).
    let p = build_propagator(code, ordering);
    let a = build_aggregator(ordering);
    let pa = p.mul(&a);
    let mut col = n + r;
    for i in 0..r {
        let w = ordering.slots(i).len();
        for slot in 0..w + 2 {
            let pa_col = gate_column_offset(ordering, i) + slot;
            let mut omega = BitVec::zeros(n);
            for q in 0..n {
                if pa.get(q, pa_col) {
                    omega.set(q, true);
                }
            }
            let s = code.syndrome(&omega);
            for gen in 0..r {
                if s.get(gen) {
                    syndrome_rows.set(gen, col, true);
                }
            }
            if pa.get(n + i, pa_col) {
                flag_rows.set(i, col, true);
            }
            if code.logical_class(&omega) {
                logical_row.set(col, true);
            }
            provenance.push(FaultOrigin::Gate { generator: i, slot });
            col += 1;
        }
    }
    debug_assert_eq!(col, total);

    let unique = dedup_columns(r, &syndrome_rows, &flag_rows, &logical_row);
    FaultCheckMatrix {
        n,
        r,
        syndrome_rows,
        flag_rows,
        logical_row,
        provenance,
        unique,
        mim_levels: [
            std::sync::OnceLock::new(),
            std::sync::OnceLock::new(),
            std::sync::OnceLock::new(),
        ],
    }
}

fn gate_column_offset(ordering: &CnotOrdering, generator: usize) -> usize {
    (0..generator).map(|i| ordering.slots(i).len() + 2).sum()
}

fn dedup_columns(
    r: usize,
    syndrome_rows: &BitMatrix,
    flag_rows: &BitMatrix,
    logical_row: &BitVec,
) -> UniqueColumns {
    assert!(2 * r < 128, "flag codes beyond 63 generators are unsupported");
    let total = logical_row.len();
    let mut seen = std::collections::HashMap::new();
    let mut representatives = Vec::new();
    let mut of_column = Vec::with_capacity(total);
    let mut keys = Vec::new();
    let mut classes = Vec::new();
    for col in 0..total {
        let mut key = 0u128;
        for gen in 0..r {
            if syndrome_rows.get(gen, col) {
                key |= 1 << gen;
            }
            if flag_rows.get(gen, col) {
                key |= 1 << (r + gen);
            }
        }
        let class = logical_row.get(col);
        let tagged = key | (u128::from(class) << (2 * r));
        let idx = *seen.entry(tagged).or_insert_with(|| {
            representatives.push(col);
            keys.push(key);
            classes.push(class);
            representatives.len() - 1
        });
        of_column.push(idx);
    }
    UniqueColumns {
        representatives,
        of_column,
        keys,
        classes,
    }
}

impl FaultCheckMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generator (and flag) rows.
    pub fn generator_rows(&self) -> usize {
        self.r
    }

    /// Total column count: `n + (n-1)/2 + sum_i (w(g_i) + 2)`.
    pub fn columns(&self) -> usize {
        self.provenance.len()
    }

    pub fn provenance(&self, col: usize) -> FaultOrigin {
        self.provenance[col]
    }

    pub fn unique(&self) -> &UniqueColumns {
        &self.unique
    }

    /// The full syndrome and logical class of a single column.
    pub fn column(&self, col: usize) -> (FullSyndrome, bool) {
        let mut s = BitVec::zeros(self.r);
        let mut f = BitVec::zeros(self.r);
        for gen in 0..self.r {
            if self.syndrome_rows.get(gen, col) {
                s.set(gen, true);
            }
            if self.flag_rows.get(gen, col) {
                f.set(gen, true);
            }
        }
        (FullSyndrome::new(s, f), self.logical_row.get(col))
    }

    /// Apply the fault code to a fault indicator vector: XOR of the selected
    /// columns, split into full syndrome and logical class.
    pub fn fault_vector_outcome(&self, v: &BitVec) -> (FullSyndrome, bool) {
        assert_eq!(v.len(), self.columns(), "fault vector length mismatch");
        let mut sigma = FullSyndrome::trivial(self.r);
        let mut class = false;
        for col in v.iter_ones() {
            let (col_sigma, c) = self.column(col);
            sigma.xor_assign(&col_sigma);
            class ^= c;
        }
        (sigma, class)
    }

    /// Text dump: one provenance header line, then the generator rows, the
    /// flag rows, and the logical row as 0/1 strings.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let provenance: Vec<String> = self.provenance.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "# columns: {}", provenance.join(" "));
        let row_string = |bits: &dyn Fn(usize) -> bool| {
            let mut line = String::with_capacity(self.columns());
            for col in 0..self.columns() {
                line.push(if bits(col) { '1' } else { '0' });
            }
            line
        };
        for gen in 0..self.r {
            let line = row_string(&|col| self.syndrome_rows.get(gen, col));
            let _ = writeln!(out, "{line}");
        }
        for gen in 0..self.r {
            let line = row_string(&|col| self.flag_rows.get(gen, col));
            let _ = writeln!(out, "{line}");
        }
        let line = row_string(&|col| self.logical_row.get(col));
        let _ = writeln!(out, "{line}");
        out
    }

    /// Combined data error of a single gate-fault column (the Omega column),
    /// reconstructed from the recorded syndrome and class. Pure data and
    /// flag columns are handled directly.
    pub fn data_error(&self, code: &CssCode, col: usize) -> BitVec {
        match self.provenance[col] {
            FaultOrigin::Data(q) => BitVec::from_support(self.n, &[q]),
            FaultOrigin::Flag(_) => BitVec::zeros(self.n),
            FaultOrigin::Gate { .. } => {
                let (sigma, class) = self.column(col);
                let mut e = code.canonical_recovery(sigma.s());
                if class {
                    e.xor_assign(code.logical_j());
                }
                e
            }
        }
    }
}
