//! Exact linear algebra over F2: packed bit vectors, dense bit matrices,
//! Gaussian elimination and subspaces in reduced row-echelon form.
//!
//! Everything downstream (codes, quadratic spaces, glue arithmetic) runs on
//! these primitives, so all results are canonical: subspaces are stored as
//! the unique rref basis and compare by equality of that basis.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Hard cap on vector length / ambient dimension.
pub const MAX_DIM: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension {dim} exceeds maximum {MAX_DIM}")]
    DimensionTooLarge { dim: usize },
    #[error("row count {rows} does not match right-hand side length {rhs}")]
    ShapeMismatch { rows: usize, rhs: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

/// A dense vector over F2, bit-packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "vector length {len} exceeds {MAX_DIM}");
        BitVector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    /// All-one vector of the given length.
    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            v.set(i, *b);
        }
        v
    }

    /// Vector with ones exactly at `support`.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.set(i, true);
        }
        v
    }

    /// Standard basis vector e_i (0-indexed).
    pub fn unit(len: usize, i: usize) -> Self {
        Self::from_support(len, &[i])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.words[i / 64] |= 1u64 << (i % 64);
        } else {
            self.words[i / 64] &= !(1u64 << (i % 64));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    fn check_len(&self, other: &Self) -> Result<(), Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Coordinatewise product (a·b)_i = a_i b_i.
    pub fn coordinatewise_product(&self, other: &Self) -> Result<Self, Gf2Error> {
        self.check_len(other)?;
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
        Ok(out)
    }

    /// Standard inner product over F2 (parity of the intersection size).
    pub fn dot(&self, other: &Self) -> Result<bool, Gf2Error> {
        self.check_len(other)?;
        let mut acc = 0u64;
        for (w, o) in self.words.iter().zip(&other.words) {
            acc ^= w & o;
        }
        Ok(acc.count_ones() % 2 == 1)
    }

    /// Intersection size |supp(a) ∩ supp(b)| as an integer.
    pub fn intersection_size(&self, other: &Self) -> Result<usize, Gf2Error> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(w, o)| (w & o).count_ones() as usize)
            .sum())
    }

    /// Concatenation (self, other).
    pub fn concat(&self, other: &Self) -> Self {
        let mut bits = Vec::with_capacity(self.len + other.len);
        bits.extend((0..self.len).map(|i| self.get(i)));
        bits.extend((0..other.len).map(|i| other.get(i)));
        Self::from_bits(bits)
    }

    /// The sub-vector on coordinate range [start, start+len).
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len);
        Self::from_bits((start..start + len).map(|i| self.get(i)))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Gf2Error::Parse(format!("invalid bit character {c:?}"))),
            }
        }
        Ok(Self::from_bits(bits))
    }
}

/// A dense row-major matrix over F2.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        assert!(cols <= MAX_DIM);
        BitMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Self {
        assert!(cols <= MAX_DIM);
        for r in &rows {
            assert_eq!(r.len(), cols, "row length does not match column count");
        }
        BitMatrix { cols, rows }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| BitVector::unit(n, i)).collect();
        Self::from_rows(n, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BitVector> {
        self.rows.iter()
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    /// Matrix-vector product m·x.
    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector, Gf2Error> {
        if x.len() != self.cols {
            return Err(Gf2Error::LengthMismatch {
                left: self.cols,
                right: x.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            out.set(i, row.dot(x)?);
        }
        Ok(out)
    }

    /// Unique reduced row-echelon form; zero rows are dropped, so the row
    /// count of the result equals the rank. The row space is preserved.
    pub fn rref(&self) -> BitMatrix {
        let (m, _) = self.rref_with_pivots();
        m
    }

    /// Reduced row-echelon form together with the pivot column of each row.
    pub fn rref_with_pivots(&self) -> (BitMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut next = 0usize;
        for col in 0..self.cols {
            let Some(pr) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(next, pr);
            let pivot_row = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivots.push(col);
            next += 1;
            if next == rows.len() {
                break;
            }
        }
        rows.truncate(next);
        (BitMatrix::from_rows(self.cols, rows), pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().rows()
    }

    /// Basis of the null space {x : m·x = 0}.
    pub fn kernel(&self) -> Subspace {
        let (rref, pivots) = self.rref_with_pivots();
        let pivot_set: Vec<bool> = {
            let mut s = vec![false; self.cols];
            for &p in &pivots {
                s[p] = true;
            }
            s
        };
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !pivot_set[c]) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (r, &p) in pivots.iter().enumerate() {
                if rref.get(r, free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        Subspace::from_generators(self.cols, basis)
    }

    /// Solve m·x = rhs. Returns `None` when the system is inconsistent,
    /// otherwise one particular solution together with the solution kernel.
    pub fn solve(&self, rhs: &BitVector) -> Result<Option<Solution>, Gf2Error> {
        if rhs.len() != self.rows() {
            return Err(Gf2Error::ShapeMismatch {
                rows: self.rows(),
                rhs: rhs.len(),
            });
        }
        // Eliminate on the augmented matrix [m | rhs].
        let mut aug: Vec<BitVector> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row = row.concat(&BitVector::from_bits([rhs.get(i)]));
                row
            })
            .collect();
        let n = self.cols;
        let mut pivots = Vec::new();
        let mut next = 0usize;
        for col in 0..n {
            let Some(pr) = (next..aug.len()).find(|&r| aug[r].get(col)) else {
                continue;
            };
            aug.swap(next, pr);
            let pivot_row = aug[next].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != next && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivots.push(col);
            next += 1;
            if next == aug.len() {
                break;
            }
        }
        // A leftover row 0 = 1 signals inconsistency.
        for row in aug.iter().skip(next) {
            if row.get(n) {
                return Ok(None);
            }
        }
        let mut particular = BitVector::zeros(n);
        for (r, &p) in pivots.iter().enumerate() {
            if aug[r].get(n) {
                particular.set(p, true);
            }
        }
        Ok(Some(Solution {
            particular,
            kernel: self.kernel(),
        }))
    }

    /// Plain-text interchange format: first line "rows cols", then one line
    /// of '0'/'1' characters per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows(), self.cols);
        for r in &self.rows {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, Gf2Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Gf2Error::Parse("empty matrix text".into()))?;
        let mut it = header.split_whitespace();
        let rows: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Gf2Error::Parse("bad row count".into()))?;
        let cols: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Gf2Error::Parse("bad column count".into()))?;
        if cols > MAX_DIM {
            return Err(Gf2Error::DimensionTooLarge { dim: cols });
        }
        let mut data = Vec::with_capacity(rows);
        for _ in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Gf2Error::Parse("missing matrix row".into()))?;
            let v: BitVector = line.trim().parse()?;
            if v.len() != cols {
                return Err(Gf2Error::Parse(format!(
                    "row has {} columns, expected {cols}",
                    v.len()
                )));
            }
            data.push(v);
        }
        Ok(Self::from_rows(cols, data))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}:", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

/// One particular solution of a linear system plus the kernel of the matrix.
#[derive(Debug, Clone)]
pub struct Solution {
    pub particular: BitVector,
    pub kernel: Subspace,
}

/// A subspace of F2^n, stored as the canonical rref basis. Two subspaces are
/// equal iff their rref bases are identical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: BitMatrix,
}

impl Subspace {
    pub fn from_generators(ambient_dim: usize, generators: Vec<BitVector>) -> Self {
        assert!(ambient_dim <= MAX_DIM);
        for g in &generators {
            assert_eq!(g.len(), ambient_dim, "generator length mismatch");
        }
        let basis = BitMatrix::from_rows(ambient_dim, generators).rref();
        Subspace { ambient_dim, basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self::from_generators(ambient_dim, Vec::new())
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self::from_generators(
            ambient_dim,
            (0..ambient_dim).map(|i| BitVector::unit(ambient_dim, i)).collect(),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<BitVector> {
        self.basis.row_iter().cloned().collect()
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        let mut rem = v.clone();
        for row in self.basis.row_iter() {
            let pivot = (0..self.ambient_dim).find(|&c| row.get(c)).expect("basis row is zero");
            if rem.get(pivot) {
                rem.xor_assign(row);
            }
        }
        rem.is_zero()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.row_iter().all(|r| other.contains(r))
    }

    /// Orthogonal complement with respect to the standard inner product.
    pub fn perp(&self) -> Subspace {
        self.basis.kernel()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let mut gens = self.basis_vectors();
        gens.extend(other.basis_vectors());
        Subspace::from_generators(self.ambient_dim, gens)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        self.perp().sum(&other.perp()).perp()
    }

    /// Iterate over all 2^dim elements, in Gray-code order starting at 0.
    /// Panics above 2^24 elements.
    pub fn iter_elements(&self) -> SubspaceIter<'_> {
        assert!(self.dim() <= 24, "refusing to enumerate 2^{} elements", self.dim());
        SubspaceIter {
            sub: self,
            index: 0,
            current: BitVector::zeros(self.ambient_dim),
        }
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in F2^{})", self.dim(), self.ambient_dim)
    }
}

pub struct SubspaceIter<'a> {
    sub: &'a Subspace,
    index: u64,
    current: BitVector,
}

impl Iterator for SubspaceIter<'_> {
    type Item = BitVector;

    fn next(&mut self) -> Option<BitVector> {
        let total = 1u64 << self.sub.dim();
        if self.index == total {
            return None;
        }
        if self.index > 0 {
            // Gray code: flip the basis vector at the lowest set bit of the index.
            let flip = self.index.trailing_zeros() as usize;
            self.current.xor_assign(self.sub.basis.row(flip));
        }
        self.index += 1;
        Some(self.current.clone())
    }
}
