//! The K3 intersection lattice `U + U + U + E8(-1) + E8(-1)`.
//!
//! The fixed integral basis is, in order: three hyperbolic pairs
//! `e1,f1,e2,f2,e3,f3` (each block has Gram `[[0,1],[1,0]]`), then the eight
//! simple roots of each of two `E8(-1)` blocks (negated E8 Cartan matrix).
//! The resulting bilinear form is even, unimodular, of signature `(3, 19)`.
//!
//! Alongside the intersection form the lattice carries a canonical
//! positive-definite *reference* form: the matrix absolute value of the
//! Gram matrix.  Blockwise this replaces each hyperbolic Gram by the
//! identity and negates the `E8(-1)` blocks, and it bounds the intersection
//! pairing: `|<x,y>| <= |x|_E |y|_E`.  All enumeration radii are measured
//! in this reference norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Rank of the lattice.
pub const DIM: usize = 22;

/// Symmetric E8 Cartan matrix (simple-root Gram matrix), nodes numbered so
/// that node 2 attaches to node 4 and the remaining nodes form the chain
/// 1-3-4-5-6-7-8.
pub const E8_CARTAN: [[i64; 8]; 8] = [
    [2, 0, -1, 0, 0, 0, 0, 0],
    [0, 2, 0, -1, 0, 0, 0, 0],
    [-1, 0, 2, -1, 0, 0, 0, 0],
    [0, -1, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, 0],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, -1],
    [0, 0, 0, 0, 0, 0, -1, 2],
];

/// Names of the 22 basis classes, in coordinate order.
pub const BASIS_LABELS: [&str; DIM] = [
    "e1", "f1", "e2", "f2", "e3", "f3", //
    "E8a1", "E8a2", "E8a3", "E8a4", "E8a5", "E8a6", "E8a7", "E8a8", //
    "E8b1", "E8b2", "E8b3", "E8b4", "E8b5", "E8b6", "E8b7", "E8b8",
];

/// The five orthogonal blocks of the fixed basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Block {
    U1,
    U2,
    U3,
    E8A,
    E8B,
}

impl Block {
    pub const ALL: [Block; 5] = [Block::U1, Block::U2, Block::U3, Block::E8A, Block::E8B];

    /// Coordinate range of this block inside a 22-vector.
    pub fn range(self) -> std::ops::Range<usize> {
        match self {
            Block::U1 => 0..2,
            Block::U2 => 2..4,
            Block::U3 => 4..6,
            Block::E8A => 6..14,
            Block::E8B => 14..22,
        }
    }

    pub fn is_hyperbolic(self) -> bool {
        matches!(self, Block::U1 | Block::U2 | Block::U3)
    }

    pub fn name(self) -> &'static str {
        match self {
            Block::U1 => "u1",
            Block::U2 => "u2",
            Block::U3 => "u3",
            Block::E8A => "e8a",
            Block::E8B => "e8b",
        }
    }

    pub fn parse(s: &str) -> Option<Block> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Some(Block::U1),
            "u2" => Some(Block::U2),
            "u3" => Some(Block::U3),
            "e8a" => Some(Block::E8A),
            "e8b" => Some(Block::E8B),
            _ => None,
        }
    }
}

/// An integral lattice class in the fixed basis.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(pub [i64; DIM]);

impl std::fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Compact block-aware rendering: only nonzero coordinates.
        let nonzero: Vec<String> = (0..DIM)
            .filter(|&i| self.0[i] != 0)
            .map(|i| format!("{}{}", signed(self.0[i]), BASIS_LABELS[i]))
            .collect();
        if nonzero.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", nonzero.join(""))
        }
    }
}

fn signed(c: i64) -> String {
    match c {
        1 => "+".to_string(),
        -1 => "-".to_string(),
        c if c >= 0 => format!("+{c}"),
        c => format!("{c}"),
    }
}

impl LatticeVector {
    pub const fn zero() -> Self {
        LatticeVector([0; DIM])
    }

    /// The `i`-th basis class.
    pub fn basis(i: usize) -> Self {
        let mut v = [0; DIM];
        v[i] = 1;
        LatticeVector(v)
    }

    /// Embed block coordinates into the full lattice (zero elsewhere).
    pub fn from_block(block: Block, coords: &[i64]) -> Self {
        let range = block.range();
        assert_eq!(coords.len(), range.len(), "block coordinate count");
        let mut v = [0; DIM];
        v[range].copy_from_slice(coords);
        LatticeVector(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Self {
        let mut v = self.0;
        for c in &mut v {
            *c = -*c;
        }
        LatticeVector(v)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut v = self.0;
        for i in 0..DIM {
            v[i] += other.0[i];
        }
        LatticeVector(v)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut v = self.0;
        for i in 0..DIM {
            v[i] -= other.0[i];
        }
        LatticeVector(v)
    }

    pub fn scale(&self, c: i64) -> Self {
        let mut v = self.0;
        for x in &mut v {
            *x *= c;
        }
        LatticeVector(v)
    }

    /// Blocks on which this vector has a nonzero coordinate.
    pub fn support(&self) -> Vec<Block> {
        Block::ALL
            .into_iter()
            .filter(|b| b.range().any(|i| self.0[i] != 0))
            .collect()
    }
}

/// A vector in the real span of the lattice, in the same fixed basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(pub [f64; DIM]);

impl RealVector {
    pub const fn zero() -> Self {
        RealVector([0.0; DIM])
    }

    pub fn from_int(v: &LatticeVector) -> Self {
        let mut r = [0.0; DIM];
        for i in 0..DIM {
            r[i] = v.0[i] as f64;
        }
        RealVector(r)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.0;
        for i in 0..DIM {
            r[i] += other.0[i];
        }
        RealVector(r)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.0;
        for i in 0..DIM {
            r[i] -= other.0[i];
        }
        RealVector(r)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut r = self.0;
        for x in &mut r {
            *x *= c;
        }
        RealVector(r)
    }

    /// `self + c * other`, the workhorse of frame arithmetic.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        let mut r = self.0;
        for i in 0..DIM {
            r[i] += c * other.0[i];
        }
        RealVector(r)
    }
}

/// The fixed K3 lattice: Gram matrix, reference form and basis bookkeeping.
#[derive(Clone)]
pub struct K3Lattice {
    gram: [[i64; DIM]; DIM],
    euclid: [[i64; DIM]; DIM],
}

impl Default for K3Lattice {
    fn default() -> Self {
        Self::new()
    }
}

impl K3Lattice {
    pub fn new() -> Self {
        let mut gram = [[0i64; DIM]; DIM];
        let mut euclid = [[0i64; DIM]; DIM];
        for block in Block::ALL {
            let r = block.range();
            if block.is_hyperbolic() {
                gram[r.start][r.start + 1] = 1;
                gram[r.start + 1][r.start] = 1;
                euclid[r.start][r.start] = 1;
                euclid[r.start + 1][r.start + 1] = 1;
            } else {
                for i in 0..8 {
                    for j in 0..8 {
                        gram[r.start + i][r.start + j] = -E8_CARTAN[i][j];
                        euclid[r.start + i][r.start + j] = E8_CARTAN[i][j];
                    }
                }
            }
        }
        K3Lattice { gram, euclid }
    }

    pub fn gram(&self) -> &[[i64; DIM]; DIM] {
        &self.gram
    }

    /// The canonical positive-definite reference form (matrix absolute value
    /// of the Gram matrix).
    pub fn euclid_gram(&self) -> &[[i64; DIM]; DIM] {
        &self.euclid
    }

    pub fn labels(&self) -> &'static [&'static str; DIM] {
        &BASIS_LABELS
    }

    /// Exact intersection pairing.
    pub fn pairing(&self, x: &LatticeVector, y: &LatticeVector) -> i64 {
        let mut acc: i128 = 0;
        for i in 0..DIM {
            if x.0[i] == 0 {
                continue;
            }
            let mut row: i128 = 0;
            for j in 0..DIM {
                row += self.gram[i][j] as i128 * y.0[j] as i128;
            }
            acc += x.0[i] as i128 * row;
        }
        i64::try_from(acc).expect("pairing magnitude fits i64")
    }

    /// `<x, x>` under the intersection form.
    pub fn norm_sq(&self, x: &LatticeVector) -> i64 {
        self.pairing(x, x)
    }

    /// Exact value of the reference form.
    pub fn euclid_norm_sq(&self, x: &LatticeVector) -> i64 {
        let mut acc: i128 = 0;
        for i in 0..DIM {
            if x.0[i] == 0 {
                continue;
            }
            let mut row: i128 = 0;
            for j in 0..DIM {
                row += self.euclid[i][j] as i128 * x.0[j] as i128;
            }
            acc += x.0[i] as i128 * row;
        }
        i64::try_from(acc).expect("reference norm fits i64")
    }

    /// Gram matrix applied to an integral class (the pairing functional of
    /// `x` expressed in dual coordinates).
    pub fn gram_apply(&self, x: &LatticeVector) -> [i64; DIM] {
        let mut out = [0i64; DIM];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0i64;
            for j in 0..DIM {
                acc += self.gram[i][j] * x.0[j];
            }
            *slot = acc;
        }
        out
    }

    /// Gram matrix applied to a real vector.
    pub fn gram_apply_real(&self, x: &RealVector) -> RealVector {
        let mut out = [0.0; DIM];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..DIM {
                if self.gram[i][j] != 0 {
                    acc += self.gram[i][j] as f64 * x.0[j];
                }
            }
            *slot = acc;
        }
        RealVector(out)
    }

    /// Pairing of two real-span vectors.
    pub fn pairing_real(&self, x: &RealVector, y: &RealVector) -> f64 {
        let gy = self.gram_apply_real(y);
        let mut acc = 0.0;
        for i in 0..DIM {
            acc += x.0[i] * gy.0[i];
        }
        acc
    }

    /// Pairing of an integral class with a real-span vector.
    pub fn pairing_int_real(&self, x: &LatticeVector, y: &RealVector) -> f64 {
        let gx = self.gram_apply(x);
        let mut acc = 0.0;
        for i in 0..DIM {
            if gx[i] != 0 {
                acc += gx[i] as f64 * y.0[i];
            }
        }
        acc
    }

    /// Exact determinant of the Gram matrix (`-1` for this lattice).
    pub fn determinant(&self) -> i128 {
        let rows: Vec<Vec<i128>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        linalg::bareiss_det(rows)
    }

    /// Signature `(positive, negative)` of the real quadratic form, from the
    /// numeric spectrum.
    pub fn signature(&self) -> (usize, usize) {
        let rows: Vec<Vec<f64>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect();
        let eigs = linalg::symmetric_eigenvalues(&rows);
        let pos = eigs.iter().filter(|&&e| e > 0.0).count();
        let neg = eigs.iter().filter(|&&e| e < 0.0).count();
        (pos, neg)
    }

    /// An even form has even diagonal, which forces `<x,x>` even for every
    /// integral `x`.
    pub fn is_even(&self) -> bool {
        (0..DIM).all(|i| self.gram[i][i] % 2 == 0)
    }

    /// Exact integer inverse of the Gram matrix (exists because the lattice
    /// is unimodular).  Blockwise: each hyperbolic Gram is its own inverse
    /// and the `E8(-1)` blocks invert to the negated inverse Cartan matrix.
    pub fn gram_inverse(&self) -> [[i64; DIM]; DIM] {
        let mut inv = [[0i64; DIM]; DIM];
        let e8_inv = e8_inverse_cartan();
        for block in Block::ALL {
            let r = block.range();
            if block.is_hyperbolic() {
                inv[r.start][r.start + 1] = 1;
                inv[r.start + 1][r.start] = 1;
            } else {
                for i in 0..8 {
                    for j in 0..8 {
                        inv[r.start + i][r.start + j] = -e8_inv[i][j];
                    }
                }
            }
        }
        inv
    }

    /// Check that an integer matrix preserves the intersection form exactly:
    /// `M^T G M = G`.
    pub fn is_isometry(&self, m: &[[i64; DIM]; DIM]) -> bool {
        // (M^T G M)_{ij} = sum_{k,l} M_{ki} G_{kl} M_{lj}
        for i in 0..DIM {
            // column i of M, paired through G with column j of M
            let mut gm_col_i = [0i128; DIM];
            for (k, slot) in gm_col_i.iter_mut().enumerate() {
                let mut acc = 0i128;
                for l in 0..DIM {
                    acc += self.gram[k][l] as i128 * m[l][i] as i128;
                }
                *slot = acc;
            }
            for j in 0..DIM {
                let mut acc = 0i128;
                for k in 0..DIM {
                    acc += m[k][j] as i128 * gm_col_i[k];
                }
                if acc != self.gram[i][j] as i128 {
                    return false;
                }
            }
        }
        true
    }

    /// Apply an integer matrix to an integral class.
    pub fn apply_matrix(&self, m: &[[i64; DIM]; DIM], x: &LatticeVector) -> LatticeVector {
        let mut out = [0i64; DIM];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0i64;
            for j in 0..DIM {
                acc += m[i][j] * x.0[j];
            }
            *slot = acc;
        }
        LatticeVector(out)
    }

    /// Apply an integer matrix to a real-span vector.
    pub fn apply_matrix_real(&self, m: &[[i64; DIM]; DIM], x: &RealVector) -> RealVector {
        let mut out = [0.0; DIM];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..DIM {
                if m[i][j] != 0 {
                    acc += m[i][j] as f64 * x.0[j];
                }
            }
            *slot = acc;
        }
        RealVector(out)
    }
}

/// Exact inverse of the E8 Cartan matrix (an integer matrix, because the
/// Cartan determinant is 1).  Verified against the Cartan matrix on
/// construction.
pub fn e8_inverse_cartan() -> [[i64; 8]; 8] {
    let rows: Vec<Vec<i64>> = E8_CARTAN.iter().map(|r| r.to_vec()).collect();
    let inv = linalg::unimodular_inverse(&rows).expect("E8 Cartan matrix is unimodular");
    let mut out = [[0i64; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[i][j] = inv[i][j];
        }
        // spot-check the inverse row against the Cartan matrix
        for j in 0..8 {
            let mut acc = 0i64;
            for k in 0..8 {
                acc += E8_CARTAN[i][k] * inv[k][j];
            }
            assert_eq!(acc, i64::from(i == j), "E8 inverse verification");
        }
    }
    out
}

/// Convenience: the standard hyperbolic root `e_k - f_k` of the `k`-th
/// hyperbolic block (`k` in `1..=3`).
pub fn hyperbolic_root(k: usize) -> LatticeVector {
    assert!((1..=3).contains(&k));
    let mut v = [0i64; DIM];
    v[2 * (k - 1)] = 1;
    v[2 * (k - 1) + 1] = -1;
    LatticeVector(v)
}

/// Parse a comma-separated list of 22 integers into a lattice class.
pub fn parse_vector(s: &str) -> Result<LatticeVector> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != DIM {
        return Err(Error::Input(format!(
            "expected {DIM} comma-separated coordinates, got {}",
            parts.len()
        )));
    }
    let mut v = [0i64; DIM];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p
            .parse::<i64>()
            .map_err(|e| Error::Input(format!("coordinate {i} ({p:?}): {e}")))?;
    }
    Ok(LatticeVector(v))
}
