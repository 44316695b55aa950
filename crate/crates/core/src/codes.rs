//! Self-orthogonal CSS codes and the hexagonal color-code family.
//!
//! A self-orthogonal CSS code here is one where the X- and Z-type stabilizer
//! generators share a single check matrix `H` of shape `(n-1)/2 x n` with `n`
//! odd, one logical qubit, and the all-ones string as the transversal logical
//! operator. The hexagonal (6.6.6) color codes of distance 3, 5, 7, 9 are the
//! validated family: `n = (3d^2+1)/4` qubits on the vertices of a triangular
//! patch of the honeycomb lattice, generators on the plaquettes.

use std::fmt;

use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("distance must be an odd integer >= 3, got {0}")]
    InvalidDistance(usize),
    #[error("qubit count must be odd, got {0}")]
    EvenQubitCount(usize),
    #[error("expected {expected} generators for n={n} (k=1), got {got}")]
    WrongGeneratorCount { n: usize, expected: usize, got: usize },
    #[error("generator {index} has odd weight {weight}; all-ones would not be a logical")]
    OddGeneratorWeight { index: usize, weight: usize },
    #[error("generators {a} and {b} overlap on an odd number of qubits")]
    NotSelfOrthogonal { a: usize, b: usize },
    #[error("generator {index} references qubit {qubit} outside 0..{n}")]
    QubitOutOfRange { index: usize, qubit: usize, n: usize },
    #[error("generator {index} repeats qubit {qubit}")]
    RepeatedQubit { index: usize, qubit: usize },
    #[error("check matrix does not have full row rank")]
    RankDeficient,
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Geometric layout of a hexagonal color-code patch: vertex coordinates on
/// the triangular grid and the vertex sets of each plaquette.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaquetteLayout {
    /// `(row, col)` grid coordinates of each qubit, row-major from the top
    /// corner of the triangle.
    pub vertices: Vec<(usize, usize)>,
    /// Vertex-index support of each generator, in generator order.
    pub plaquettes: Vec<Vec<usize>>,
}

/// A self-orthogonal CSS code with `k = 1` and transversal all-ones logicals.
#[derive(Clone)]
pub struct CssCode {
    n: usize,
    d: usize,
    h: BitMatrix,
    h_inv: BitMatrix,
    logical_j: BitVec,
    validated: bool,
}

impl CssCode {
    /// Validate generator supports and assemble the code object. `d` is the
    /// declared design distance; it is taken on trust for codes not produced
    /// by [`build_hex_color_code`].
    pub fn from_generators(n: usize, supports: &[Vec<usize>], d: usize) -> Result<Self, CodeError> {
        if d < 3 || d.is_multiple_of(2) {
            return Err(CodeError::InvalidDistance(d));
        }
        if n.is_multiple_of(2) {
            return Err(CodeError::EvenQubitCount(n));
        }
        let expected = (n - 1) / 2;
        if supports.len() != expected {
            return Err(CodeError::WrongGeneratorCount {
                n,
                expected,
                got: supports.len(),
            });
        }
        for (i, sup) in supports.iter().enumerate() {
            let mut seen = vec![false; n];
            for &q in sup {
                if q >= n {
                    return Err(CodeError::QubitOutOfRange { index: i, qubit: q, n });
                }
                if seen[q] {
                    return Err(CodeError::RepeatedQubit { index: i, qubit: q });
                }
                seen[q] = true;
            }
            if sup.len() % 2 != 0 {
                return Err(CodeError::OddGeneratorWeight {
                    index: i,
                    weight: sup.len(),
                });
            }
        }
        let h = BitMatrix::from_row_supports(expected, n, supports);
        for a in 0..expected {
            for b in (a + 1)..expected {
                let overlap = h
                    .row(a)
                    .iter_ones()
                    .filter(|&q| h.get(b, q))
                    .count();
                if overlap % 2 != 0 {
                    return Err(CodeError::NotSelfOrthogonal { a, b });
                }
            }
        }
        let h_inv = h.right_inverse().map_err(|_| CodeError::RankDeficient)?;
        Ok(Self {
            n,
            d,
            h,
            h_inv,
            logical_j: BitVec::ones(n),
            validated: false,
        })
    }

    /// Parse the external text format: first non-comment line is `n`, then
    /// one generator support per line as space-separated 0-based qubit
    /// indices. `#` starts a comment.
    pub fn from_text(text: &str, d: usize) -> Result<Self, CodeError> {
        let mut n: Option<usize> = None;
        let mut supports = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if n.is_none() {
                n = Some(line.parse().map_err(|_| CodeError::Parse {
                    line: lineno + 1,
                    message: format!("expected qubit count, got {line:?}"),
                })?);
                continue;
            }
            let sup: Result<Vec<usize>, _> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| CodeError::Parse {
                        line: lineno + 1,
                        message: format!("invalid qubit index {tok:?}"),
                    })
                })
                .collect();
            supports.push(sup?);
        }
        let n = n.ok_or(CodeError::Parse {
            line: 0,
            message: "empty code file".into(),
        })?;
        Self::from_generators(n, &supports, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of logical qubits; always 1 for this code family.
    pub fn k(&self) -> usize {
        1
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Correctable fault count `t = (d-1)/2`.
    pub fn t(&self) -> usize {
        (self.d - 1) / 2
    }

    /// Number of generators, `(n-1)/2`.
    pub fn generators(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn h(&self) -> &BitMatrix {
        &self.h
    }

    pub fn h_inv(&self) -> &BitMatrix {
        &self.h_inv
    }

    /// The all-ones column representing the transversal logical operator.
    pub fn logical_j(&self) -> &BitVec {
        &self.logical_j
    }

    pub fn generator_support(&self, i: usize) -> Vec<usize> {
        self.h.row_support(i)
    }

    /// True for members of the hexagonal family with d in {3,5,7,9}, whose
    /// lookup-table metrics are pinned by tests.
    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Error syndrome `s = H e`.
    pub fn syndrome(&self, e: &BitVec) -> BitVec {
        assert_eq!(e.len(), self.n, "error length mismatch");
        self.h.mul_vec(e)
    }

    /// Canonical recovery operator `R(s) = H^{-1} s`.
    pub fn canonical_recovery(&self, s: &BitVec) -> BitVec {
        assert_eq!(s.len(), self.generators(), "syndrome length mismatch");
        self.h_inv.mul_vec(s)
    }

    /// Logical class of an error: parity of `e xor R(s(e))`. Class 0 means
    /// the error equals its canonical recovery up to a stabilizer; class 1
    /// means they differ by the transversal logical.
    pub fn logical_class(&self, e: &BitVec) -> bool {
        let mut residual = e.clone();
        residual.xor_assign(&self.canonical_recovery(&self.syndrome(e)));
        residual.parity()
    }
}

impl fmt::Debug for CssCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CssCode {{ n: {}, k: 1, d: {}, generators: {} }}",
            self.n,
            self.d,
            self.generators()
        )
    }
}

/// Build the distance-`d` hexagonal (6.6.6) color code on a triangular patch.
///
/// The patch is a triangular cut of the triangular grid with rows
/// `0..=3(d-1)/2`; cell `(r, c)` with `c <= r` is a plaquette center when
/// `(r + c) % 3 == 1` and a qubit otherwise. A plaquette's support is its
/// in-patch neighbors along the six triangular-grid directions, which gives
/// hexagons in the bulk and weight-4 plaquettes on the boundary. Qubits are
/// indexed row-major from the top corner; generators are ordered row-major by
/// plaquette cell.
pub fn build_hex_color_code(d: usize) -> Result<(CssCode, PlaquetteLayout), CodeError> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(CodeError::InvalidDistance(d));
    }
    let rows = 3 * (d - 1) / 2 + 1;
    let mut vertices = Vec::new();
    let mut plaquette_cells = Vec::new();
    let mut vertex_index = vec![vec![usize::MAX; rows]; rows];
    #[allow(clippy::needless_range_loop)] // (r, c) are grid coordinates
    for r in 0..rows {
        for c in 0..=r {
            if (r + c) % 3 == 1 {
                plaquette_cells.push((r, c));
            } else {
                vertex_index[r][c] = vertices.len();
                vertices.push((r, c));
            }
        }
    }
    let n = vertices.len();
    debug_assert_eq!(n, (3 * d * d + 1) / 4);
    let neighbors = |r: usize, c: usize| {
        let r = r as isize;
        let c = c as isize;
        [
            (r - 1, c - 1),
            (r - 1, c),
            (r, c - 1),
            (r, c + 1),
            (r + 1, c),
            (r + 1, c + 1),
        ]
    };
    let mut plaquettes = Vec::with_capacity(plaquette_cells.len());
    for &(r, c) in &plaquette_cells {
        let mut sup = Vec::with_capacity(6);
        for (nr, nc) in neighbors(r, c) {
            if nr >= 0 && nc >= 0 && (nc as usize) <= (nr as usize) && (nr as usize) < rows {
                let idx = vertex_index[nr as usize][nc as usize];
                debug_assert_ne!(idx, usize::MAX, "plaquette neighbor must be a vertex");
                sup.push(idx);
            }
        }
        sup.sort_unstable();
        plaquettes.push(sup);
    }
    let mut code = CssCode::from_generators(n, &plaquettes, d)?;
    code.validated = matches!(d, 3 | 5 | 7 | 9);
    Ok((code, PlaquetteLayout { vertices, plaquettes }))
}
