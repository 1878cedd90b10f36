//! Bit-packed linear algebra over GF(2).
//!
//! Vectors and matrices store bits in `u64` words, row-major for matrices.
//! Row reduction always takes the lowest available row index as pivot, so
//! echelon forms and kernel bases are canonical for a given input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    /// Vector with ones exactly at `indices`.
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in indices {
            assert!(i < len, "index {i} out of range for length {len}");
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// The `i`-th unit vector of length `len`.
    pub fn unit(len: usize, i: usize) -> Self {
        Self::from_indices(len, &[i])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Indices of set bits in increasing order.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn support(&self) -> Vec<usize> {
        self.ones_iter().collect()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones_iter().next()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Concatenation `[self | other]`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.ones_iter() {
            out.set(i, true);
        }
        for i in other.ones_iter() {
            out.set(self.len + i, true);
        }
        out
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => return Err(Error::Parse(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(v)
    }
}

/// A dense matrix over GF(2) with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: BinaryMatrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the pivot rows in place. The result is zero iff
    /// `v` lies in the row space.
    pub fn reduce(&self, v: &mut BitVector) {
        assert_eq!(v.len(), self.matrix.cols, "length mismatch");
        for (r, &p) in self.pivots.iter().enumerate() {
            if v.get(p) {
                for (a, b) in v.words.iter_mut().zip(self.matrix.row_words(r)) {
                    *a ^= b;
                }
            }
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Coefficients `c` such that `v = Σ c_r · row_r` of the echelon matrix.
    pub fn coordinates(&self, v: &BitVector) -> Option<BitVector> {
        let mut w = v.clone();
        let mut coeffs = BitVector::zeros(self.rank());
        for (r, &p) in self.pivots.iter().enumerate() {
            if w.get(p) {
                coeffs.set(r, true);
                for (a, b) in w.words.iter_mut().zip(self.matrix.row_words(r)) {
                    *a ^= b;
                }
            }
        }
        w.is_zero().then_some(coeffs)
    }

    /// Nonzero rows only.
    pub fn basis(&self) -> BinaryMatrix {
        self.matrix.select_rows(&(0..self.rank()).collect::<Vec<_>>())
    }
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from row vectors that all share length `cols`.
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has wrong length");
            m.row_words_mut(i).copy_from_slice(&r.words);
        }
        m
    }

    /// Builds a matrix from 0/1 row literals, e.g. `["110", "011"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed: Vec<BitVector> = rows.iter().map(|r| r.parse()).collect::<Result<_>>()?;
        let cols = parsed.first().map_or(0, |r| r.len());
        if parsed.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(Self::from_rows(cols, &parsed))
    }

    /// Builds a `rows × cols` matrix from per-row column supports.
    pub fn from_supports(cols: usize, supports: &[Vec<usize>]) -> Self {
        let mut m = Self::zeros(supports.len(), cols);
        for (i, s) in supports.iter().enumerate() {
            for &j in s {
                assert!(j < cols, "column {j} out of range");
                m.set(i, j, true);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn row_iter(&self) -> impl Iterator<Item = BitVector> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    /// Column indices of the ones in row `r`.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row(r).support()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of ones, written |M|.
    pub fn weight(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.data.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (src_start, dst_start) = (src * s, dst * s);
        for k in 0..s {
            let v = self.data[src_start + k];
            self.data[dst_start + k] ^= v;
        }
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).ones_iter() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for l in self.row(r).ones_iter() {
                let src = other.row_words(l);
                for (a, b) in out.data[r * out.stride..(r + 1) * out.stride]
                    .iter_mut()
                    .zip(src)
                {
                    *a ^= b;
                }
            }
        }
        out
    }

    /// `self · otherᵀ`, computed row-against-row without forming the transpose.
    pub fn mul_transpose(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.cols, other.cols, "column counts differ");
        let mut out = BinaryMatrix::zeros(self.rows, other.rows);
        for r in 0..self.rows {
            let a = self.row_words(r);
            for s in 0..other.rows {
                let ones: u32 = a
                    .iter()
                    .zip(other.row_words(s))
                    .map(|(x, y)| (x & y).count_ones())
                    .sum();
                if ones & 1 == 1 {
                    out.set(r, s, true);
                }
            }
        }
        out
    }

    /// `M · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.cols, v.len(), "length mismatch");
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let ones: u32 = self
                .row_words(r)
                .iter()
                .zip(&v.words)
                .map(|(x, y)| (x & y).count_ones())
                .sum();
            if ones & 1 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// `vᵀ · M` for a row vector `v`.
    pub fn vec_mul(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.rows, v.len(), "length mismatch");
        let mut out = BitVector::zeros(self.cols);
        for r in v.ones_iter() {
            for (a, b) in out.words.iter_mut().zip(self.row_words(r)) {
                *a ^= b;
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &BinaryMatrix) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in self.row(i).ones_iter() {
                for k in 0..other.rows {
                    for l in other.row(k).ones_iter() {
                        out.set(i * other.rows + k, j * other.cols + l, true);
                    }
                }
            }
        }
        out
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.cols, other.cols, "column counts differ");
        let mut out = self.clone();
        out.rows += other.rows;
        out.data.extend_from_slice(&other.data);
        out
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.rows, other.rows, "row counts differ");
        let mut out = BinaryMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in self.row(r).ones_iter() {
                out.set(r, c, true);
            }
            for c in other.row(r).ones_iter() {
                out.set(r, self.cols + c, true);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            let src = self.row_words(r).to_vec();
            out.row_words_mut(i).copy_from_slice(&src);
        }
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    pub fn push_row(&mut self, v: &BitVector) {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        self.rows += 1;
        self.data.extend_from_slice(&v.words);
    }

    /// Row-reduced echelon form. Pivots are chosen column by column, taking the
    /// lowest-index row that has a one in the current column.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            let start = c / WORD;
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    let s = m.stride;
                    for k in start..s {
                        let v = m.data[rank * s + k];
                        m.data[r * s + k] ^= v;
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Basis of the right null space `{v : M·vᵀ = 0}`, one vector per row,
    /// ordered by free column.
    pub fn kernel_basis(&self) -> BinaryMatrix {
        let rref = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &rref.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = BinaryMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.set(i, f, true);
            for (r, &p) in rref.pivots.iter().enumerate() {
                if rref.matrix.get(r, f) {
                    out.set(i, p, true);
                }
            }
        }
        out
    }

    /// Some `x` with `M·x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &BitVector) -> Option<BitVector> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let mut aug = BinaryMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in self.row(r).ones_iter() {
                aug.set(r, c, true);
            }
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let rref = aug.rref();
        if rref.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &p) in rref.pivots.iter().enumerate() {
            if rref.matrix.get(r, self.cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    pub fn row_space_contains(&self, v: &BitVector) -> bool {
        self.rref().contains(v)
    }

    /// True iff every row of `other` lies in the row space of `self`.
    pub fn row_space_includes(&self, other: &BinaryMatrix) -> bool {
        let rref = self.rref();
        other.row_iter().all(|r| rref.contains(&r))
    }

    pub fn same_row_space(&self, other: &BinaryMatrix) -> bool {
        self.cols == other.cols && self.row_space_includes(other) && other.row_space_includes(self)
    }

    /// Plain-text dense form: a `rows cols` header, then one line of 0/1
    /// characters per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            s.push_str(&self.row(r).to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("bad header {header:?}: {e}")))?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse(format!("header must be `rows cols`, got {header:?}")));
        };
        let mut m = BinaryMatrix::zeros(rows, cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {r}")))?
                .trim();
            let v: BitVector = line.parse()?;
            if v.len() != cols {
                return Err(Error::Parse(format!(
                    "row {r} has {} entries, expected {cols}",
                    v.len()
                )));
            }
            m.row_words_mut(r).copy_from_slice(&v.words);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing rows after matrix".into()));
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<String>,
}

/// Serialized as `{rows, cols, data: ["0110", ...]}`.
impl Serialize for BinaryMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.row_iter().map(|r| r.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BinaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatrixRepr::deserialize(d)?;
        if repr.data.len() != repr.rows {
            return Err(D::Error::custom(format!("expected {} rows, found {}", repr.rows, repr.data.len())));
        }
        let mut m = BinaryMatrix::zeros(repr.rows, repr.cols);
        for (r, line) in repr.data.iter().enumerate() {
            let v: BitVector = line.parse().map_err(D::Error::custom)?;
            if v.len() != repr.cols {
                return Err(D::Error::custom(format!("row {r} has {} entries, expected {}", v.len(), repr.cols)));
            }
            m.row_words_mut(r).copy_from_slice(&v.words);
        }
        Ok(m)
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hamming_g() -> BinaryMatrix {
        BinaryMatrix::from_strs(&["1000110", "0100101", "0010011", "0001111"]).unwrap()
    }

    fn hamming_h() -> BinaryMatrix {
        BinaryMatrix::from_strs(&["1101100", "1011010", "0111001"]).unwrap()
    }

    fn bbs_a() -> BinaryMatrix {
        BinaryMatrix::from_strs(&[
            "0010011", "0101010", "1000110", "0100101", "0011100", "1110000", "1001001",
        ])
        .unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(hamming_g().rank(), 4);
        assert_eq!(BinaryMatrix::zeros(5, 5).rank(), 0);
        assert_eq!(bbs_a().rank(), 4);
    }

    #[test]
    fn rref_identity_and_hamming() {
        let id = BinaryMatrix::identity(5);
        let r = id.rref();
        assert_eq!(r.matrix, id);
        assert_eq!(r.pivots, vec![0, 1, 2, 3, 4]);

        let r = hamming_g().rref();
        assert_eq!(r.pivots, vec![0, 1, 2, 3]);
        assert_eq!(r.matrix.select_cols(&[0, 1, 2, 3]), BinaryMatrix::identity(4));
    }

    #[test]
    fn rref_zeroes_duplicate_rows() {
        let m = BinaryMatrix::from_strs(&["1101", "1101", "0110"]).unwrap();
        let r = m.rref();
        assert_eq!(r.rank(), 2);
        assert!(r.matrix.row(2).is_zero());
    }

    #[test]
    fn kernel_of_hamming_parity_check() {
        let h = hamming_h();
        let k = h.kernel_basis();
        assert_eq!(k.rows(), 4);
        assert_eq!(k.rank(), 4);
        for v in k.row_iter() {
            assert!(h.mul_vec(&v).is_zero());
        }
        // The kernel is exactly the set of vectors annihilated by H.
        let mut annihilated = 0;
        for bits in 0u32..128 {
            let v = BitVector::from_bools(&(0..7).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>());
            if h.mul_vec(&v).is_zero() {
                annihilated += 1;
                assert!(k.row_space_contains(&v));
            }
        }
        assert_eq!(annihilated, 16);
    }

    #[test]
    fn kernel_of_invertible_and_all_ones() {
        let inv = BinaryMatrix::from_strs(&["110", "011", "001"]).unwrap();
        assert_eq!(inv.kernel_basis().rows(), 0);

        let ones = BinaryMatrix::from_strs(&["111"]).unwrap();
        let k = ones.kernel_basis();
        assert_eq!(k.rows(), 2);
        let even: Vec<u32> = (0u32..8).filter(|b| b.count_ones() % 2 == 0).collect();
        assert_eq!(even.len(), 4);
        for b in even {
            let v = BitVector::from_bools(&[b & 1 == 1, b & 2 == 2, b & 4 == 4]);
            assert!(k.row_space_contains(&v));
        }
    }

    #[test]
    fn solve_examples() {
        let b: BitVector = "101".parse().unwrap();
        assert_eq!(BinaryMatrix::identity(3).solve(&b), Some(b.clone()));

        let h = hamming_h();
        let syndrome = h.column(0);
        let x = h.solve(&syndrome).unwrap();
        assert_eq!(h.mul_vec(&x), syndrome);
        // Column 0 of H is not repeated, so some weight-1 vector maps to it.
        assert!((0..7).any(|i| h.column(i) == syndrome));

        assert_eq!(BinaryMatrix::zeros(3, 3).solve(&b), None);
    }

    #[test]
    fn row_space_membership() {
        let g = hamming_g();
        for r in g.row_iter() {
            assert!(g.row_space_contains(&r));
        }
        for i in 0..7 {
            assert!(!g.row_space_contains(&BitVector::unit(7, i)));
        }
        assert!(g.row_space_contains(&BitVector::zeros(7)));
    }

    #[test]
    fn text_format_round_trip_is_bit_exact() {
        let a = bbs_a();
        let text = a.to_text();
        assert!(text.starts_with("7 7\n0010011\n"));
        let back = BinaryMatrix::from_text(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_format_rejects_malformed_input() {
        assert!(BinaryMatrix::from_text("").is_err());
        assert!(BinaryMatrix::from_text("2 3\n101\n").is_err());
        assert!(BinaryMatrix::from_text("1 3\n10\n").is_err());
        assert!(BinaryMatrix::from_text("1 3\n102\n").is_err());
        assert!(BinaryMatrix::from_text("1 3\n101\n111\n").is_err());
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let a = BinaryMatrix::from_strs(&["10", "11"]).unwrap();
        let b = BinaryMatrix::from_strs(&["011"]).unwrap();
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (2, 6));
        assert_eq!(k.row(0).to_string(), "011000");
        assert_eq!(k.row(1).to_string(), "011011");
    }

    fn arb_matrix(max_r: usize, max_c: usize) -> impl Strategy<Value = BinaryMatrix> {
        (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
                let mut m = BinaryMatrix::zeros(r, c);
                for (i, b) in bits.into_iter().enumerate() {
                    m.set(i / c, i % c, b);
                }
                m
            })
        })
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(m in arb_matrix(8, 8)) {
            let once = m.rref();
            let twice = once.matrix.rref();
            prop_assert_eq!(&once.matrix, &twice.matrix);
            prop_assert_eq!(once.pivots, twice.pivots);
        }

        #[test]
        fn rank_nullity_and_transpose(m in arb_matrix(8, 8)) {
            let rank = m.rank();
            prop_assert!(rank <= m.rows().min(m.cols()));
            prop_assert_eq!(rank, m.transpose().rank());
            prop_assert_eq!(m.cols(), rank + m.kernel_basis().rows());
        }

        #[test]
        fn kernel_matches_enumeration(m in arb_matrix(8, 8)) {
            let k = m.kernel_basis();
            let c = m.cols();
            let mut count = 0usize;
            for bits in 0u32..(1 << c) {
                let v = BitVector::from_bools(&(0..c).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>());
                let in_kernel = m.mul_vec(&v).is_zero();
                prop_assert_eq!(in_kernel, k.row_space_contains(&v));
                count += usize::from(in_kernel);
            }
            prop_assert_eq!(count, 1usize << k.rows());
        }

        #[test]
        fn solve_is_exact(m in arb_matrix(8, 8), seed in any::<u64>()) {
            let x0 = BitVector::from_bools(&(0..m.cols()).map(|i| (seed >> (i % 64)) & 1 == 1).collect::<Vec<_>>());
            let b = m.mul_vec(&x0);
            let x = m.solve(&b).expect("consistent by construction");
            prop_assert_eq!(m.mul_vec(&x), b);
        }
    }
}
