//! Truncated multimode Fock spaces and exact sparse complex operator algebra.
//!
//! Basis states are ordered row-major over the occupation multi-index: for
//! cutoffs `[N_1, .., N_k]` the state `|n_1, .., n_k⟩` has index
//! `Σ n_i · Π_{j>i} N_j`. Raising operators drop the top level (the entry that
//! would leave the cutoff is absent), so canonical commutators only hold on
//! states away from the truncation edge.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Entries with modulus below this are treated as structural zeros.
pub const ZERO_CUTOFF: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Truncated bosonic Hilbert space, one cutoff per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    /// Default bound on the single-copy dimension.
    pub const DEFAULT_MAX_DIM: usize = 1 << 20;

    pub fn new(cutoffs: &[usize]) -> Result<Self> {
        Self::with_max_dim(cutoffs, Self::DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(cutoffs: &[usize], max_dim: usize) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::NoModes);
        }
        let mut dim = 1usize;
        for (mode, &cutoff) in cutoffs.iter().enumerate() {
            if cutoff < 2 {
                return Err(Error::CutoffTooSmall { mode, cutoff });
            }
            dim = dim
                .checked_mul(cutoff)
                .filter(|&d| d <= max_dim)
                .ok_or(Error::DimensionOverflow { limit: max_dim })?;
        }
        let mut strides = vec![1usize; cutoffs.len()];
        for k in (0..cutoffs.len() - 1).rev() {
            strides[k] = strides[k + 1] * cutoffs[k + 1];
        }
        Ok(Self {
            cutoffs: cutoffs.to_vec(),
            strides,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of `H ⊗ H*`.
    pub fn doubled_dim(&self) -> usize {
        self.dim * self.dim
    }

    pub fn mode_count(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoffs[mode]
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    /// Occupation of `mode` in basis state `index`.
    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.cutoffs[mode]
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.mode_count())
            .map(|m| self.occupation(index, m))
            .collect()
    }

    /// Row-major index of `|n_1, .., n_k⟩`, or `None` if any occupation is
    /// outside its cutoff.
    pub fn index_of(&self, occupations: &[usize]) -> Option<usize> {
        if occupations.len() != self.mode_count() {
            return None;
        }
        let mut index = 0;
        for (k, &n) in occupations.iter().enumerate() {
            if n >= self.cutoffs[k] {
                return None;
            }
            index += n * self.strides[k];
        }
        Some(index)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.mode_count() {
            Ok(())
        } else {
            Err(Error::InvalidMode {
                mode,
                modes: self.mode_count(),
            })
        }
    }

    pub fn basis_state(&self, occupations: &[usize]) -> Result<StateVector> {
        let index = self.index_of(occupations).ok_or(Error::DimensionMismatch {
            expected: self.mode_count(),
            found: occupations.len(),
        })?;
        Ok(StateVector::basis(self.dim, index))
    }

    pub fn vacuum(&self) -> StateVector {
        StateVector::basis(self.dim, 0)
    }

    /// True when every occupation is at most `cutoff - 1 - margin`.
    pub fn is_interior(&self, index: usize, margin: usize) -> bool {
        (0..self.mode_count()).all(|m| self.occupation(index, m) + margin < self.cutoffs[m])
    }

    /// Diagonal operator with entries `f(occupations)`.
    pub fn diagonal<F>(&self, mut f: F) -> SparseOperator
    where
        F: FnMut(&[usize]) -> Complex64,
    {
        let mut occ = vec![0usize; self.mode_count()];
        let values = (0..self.dim)
            .map(|i| {
                for (m, slot) in occ.iter_mut().enumerate() {
                    *slot = self.occupation(i, m);
                }
                f(&occ)
            })
            .collect();
        SparseOperator::diagonal(values)
    }

    pub fn identity(&self) -> SparseOperator {
        SparseOperator::identity(self.dim)
    }

    /// Ladder operator for `mode`: `a|n⟩ = √n|n-1⟩`, `a†` its adjoint with the
    /// top level mapped to zero.
    pub fn ladder(&self, mode: usize, kind: LadderKind) -> Result<SparseOperator> {
        ladder_op(self, mode, kind)
    }

    pub fn lower(&self, mode: usize) -> Result<SparseOperator> {
        ladder_op(self, mode, LadderKind::Lower)
    }

    pub fn raise(&self, mode: usize) -> Result<SparseOperator> {
        ladder_op(self, mode, LadderKind::Raise)
    }

    /// `n = a†a` for `mode`.
    pub fn number(&self, mode: usize) -> Result<SparseOperator> {
        self.check_mode(mode)?;
        Ok(self.diagonal(|occ| Complex64::new(occ[mode] as f64, 0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Lower,
    Raise,
}

pub fn make_space(cutoffs: &[usize]) -> Result<FockSpace> {
    FockSpace::new(cutoffs)
}

pub fn ladder_op(space: &FockSpace, mode: usize, kind: LadderKind) -> Result<SparseOperator> {
    space.check_mode(mode)?;
    let stride = space.stride(mode);
    let triplets = (0..space.dim()).filter_map(|col| {
        let n = space.occupation(col, mode);
        (n >= 1).then(|| (col - stride, col, Complex64::new(math::sqrt(n as f64), 0.0)))
    });
    let lower = SparseOperator::from_triplets(space.dim(), space.dim(), triplets)?;
    Ok(match kind {
        LadderKind::Lower => lower,
        LadderKind::Raise => lower.adjoint(),
    })
}

/// Complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_vec(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![ZERO; dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amplitudes[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.amplitudes.iter_mut().for_each(|x| *x *= s);
        self
    }

    /// Returns the normalized state, or `ZeroState` when the norm vanishes.
    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// `‖self - other‖₂`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        distance(&self.amplitudes, &other.amplitudes)
    }
}

impl Index<usize> for StateVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.amplitudes[i]
    }
}

impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.amplitudes[i]
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    math::sqrt(v.iter().map(|x| x.norm_sqr()).sum())
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraKind {
    Product,
    Sum,
    Commutator,
}

/// `kind(A, s·B)`: `A·sB`, `A + sB` or `[A, sB]`, with `s = 1` when omitted.
pub fn op_algebra(
    a: &SparseOperator,
    b: &SparseOperator,
    kind: AlgebraKind,
    scalar: Option<Complex64>,
) -> Result<SparseOperator> {
    let scaled;
    let b = match scalar {
        Some(s) => {
            scaled = b.scaled(s);
            &scaled
        }
        None => b,
    };
    match kind {
        AlgebraKind::Product => a.product(b),
        AlgebraKind::Sum => a.add(b),
        AlgebraKind::Commutator => a.commutator(b),
    }
}

/// Complex sparse matrix in canonical compressed-row form: columns sorted
/// within each row, no duplicates, no entries with modulus below
/// [`ZERO_CUTOFF`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(vec![ONE; dim])
    }

    pub fn diagonal(values: Vec<Complex64>) -> Self {
        let dim = values.len();
        let mut op = Self::zeros(dim, dim);
        op.row_ptr.clear();
        op.row_ptr.push(0);
        for (i, v) in values.into_iter().enumerate() {
            if v.norm() >= ZERO_CUTOFF {
                op.col_idx.push(i);
                op.values.push(v);
            }
            op.row_ptr.push(op.col_idx.len());
        }
        op
    }

    /// Builds a canonical operator from coordinate entries; duplicates are
    /// summed.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: r + 1,
                });
            }
            if c >= cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: c + 1,
                });
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        let mut current_row = 0;
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v.norm() < ZERO_CUTOFF {
                continue;
            }
            while current_row < r {
                current_row += 1;
                row_ptr[current_row] = col_idx.len();
            }
            col_idx.push(c);
            values.push(v);
        }
        while current_row < rows {
            current_row += 1;
            row_ptr[current_row] = col_idx.len();
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Dense matrix to canonical sparse form.
    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let triplets = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, m[(i, j)]));
        Self::from_triplets(m.nrows(), m.ncols(), triplets).expect("indices within bounds")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonzero entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        if s.norm() < ZERO_CUTOFF {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.drop_tiny();
        out
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.scaled(Complex64::new(s, 0.0))
    }

    fn drop_tiny(&mut self) {
        if self.values.iter().all(|v| v.norm() >= ZERO_CUTOFF) {
            return;
        }
        let triplets: Vec<_> = self.triplets().collect();
        *self = Self::from_triplets(self.rows, self.cols, triplets).expect("same bounds");
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn transpose(&self) -> Self {
        self.transpose_map(|v| v)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.transpose_map(|v| v.conj())
    }

    fn transpose_map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for k in 0..self.cols {
            counts[k + 1] += counts[k];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![ZERO; self.nnz()];
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                let slot = next[j];
                next[j] += 1;
                col_idx[slot] = i;
                values[slot] = f(v);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        Ok(())
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for i in 0..self.rows {
            let mut push = |c: usize, v: Complex64| {
                if v.norm() >= ZERO_CUTOFF {
                    col_idx.push(c);
                    values.push(v);
                }
            };
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ca, va)), Some((cb, vb))) => {
                        if ca == cb {
                            push(ca, va + vb);
                            a.next();
                            b.next();
                        } else if ca < cb {
                            push(ca, va);
                            a.next();
                        } else {
                            push(cb, vb);
                            b.next();
                        }
                    }
                    (Some((ca, va)), None) => {
                        push(ca, va);
                        a.next();
                    }
                    (None, Some((cb, vb))) => {
                        push(cb, vb);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled_re(-1.0))
    }

    /// Matrix product `self · other` (row-wise accumulation).
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut acc = vec![ZERO; other.cols];
        let mut touched = vec![false; other.cols];
        let mut pattern: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.rows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                let v = acc[j];
                if v.norm() >= ZERO_CUTOFF {
                    col_idx.push(j);
                    values.push(v);
                }
                acc[j] = ZERO;
                touched[j] = false;
            }
            pattern.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// `[self, other] = self·other - other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.product(other)?.sub(&other.product(self)?)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        row_ptr.push(0);
        for i1 in 0..self.rows {
            for i2 in 0..other.rows {
                for (j1, a) in self.row(i1) {
                    for (j2, b) in other.row(i2) {
                        let v = a * b;
                        if v.norm() >= ZERO_CUTOFF {
                            col_idx.push(j1 * other.cols + j2);
                            values.push(v);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `out = self · x`.
    pub fn matvec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, slot) in out.iter_mut().enumerate() {
            let mut s = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *slot = s;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut out = vec![ZERO; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.matvec(psi.amplitudes()).map(StateVector::from_vec)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.rows, self.cols, ZERO);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        norm(&self.values)
    }

    /// Rows and columns restricted to the sorted index list `keep`.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &i in keep {
            for (j, v) in self.row(i) {
                if let Ok(local) = keep.binary_search(&j) {
                    col_idx.push(local);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: keep.len(),
            cols: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sorted set of indices reachable from `seeds` by repeated application
    /// (the smallest coordinate subspace containing the seeds that the
    /// operator maps into itself).
    pub fn reachable_from(&self, seeds: &[usize]) -> Vec<usize> {
        let t = self.transpose();
        let mut seen = vec![false; self.cols];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(j) = stack.pop() {
            for (i, _) in t.row(j) {
                if !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }

    /// Largest absolute row sum (the induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn space_dimensions_and_row_major_index() {
        assert_eq!(FockSpace::new(&[4]).unwrap().dim(), 4);
        let s = FockSpace::new(&[3, 3]).unwrap();
        assert_eq!(s.dim(), 9);
        assert_eq!(s.index_of(&[2, 1]), Some(7));
        assert_eq!(s.occupations(7), vec![2, 1]);
        assert_eq!(FockSpace::new(&[30, 30]).unwrap().dim(), 900);
    }

    #[test]
    fn space_rejects_bad_cutoffs() {
        assert_eq!(
            FockSpace::new(&[3, 1]),
            Err(Error::CutoffTooSmall { mode: 1, cutoff: 1 })
        );
        assert_eq!(FockSpace::new(&[]), Err(Error::NoModes));
        assert!(matches!(
            FockSpace::with_max_dim(&[100, 100], 5000),
            Err(Error::DimensionOverflow { .. })
        ));
        assert!(matches!(
            FockSpace::new(&[usize::MAX, 4]),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn index_roundtrip_is_a_bijection() {
        let s = FockSpace::new(&[3, 4, 2]).unwrap();
        for i in 0..s.dim() {
            assert_eq!(s.index_of(&s.occupations(i)), Some(i));
        }
    }

    #[test]
    fn lowering_entries() {
        let s = FockSpace::new(&[3]).unwrap();
        let a = s.lower(0).unwrap();
        assert_eq!(a.get(1, 2), c(2f64.sqrt()));
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn raising_drops_top_level() {
        let s = FockSpace::new(&[3]).unwrap();
        let ad = s.raise(0).unwrap();
        let out = ad.apply(&s.basis_state(&[2]).unwrap()).unwrap();
        assert_eq!(out.norm(), 0.0);
        assert_eq!(ad, s.lower(0).unwrap().adjoint());
    }

    #[test]
    fn second_mode_acts_on_second_factor() {
        let s = FockSpace::new(&[2, 2]).unwrap();
        let b = s.lower(1).unwrap();
        let out = b.apply(&s.basis_state(&[0, 1]).unwrap()).unwrap();
        assert_eq!(out, s.basis_state(&[0, 0]).unwrap());
        let i_kron_a =
            SparseOperator::identity(2).kron(&FockSpace::new(&[2]).unwrap().lower(0).unwrap());
        assert_eq!(b, i_kron_a);
    }

    #[test]
    fn invalid_mode_is_rejected() {
        let s = FockSpace::new(&[3]).unwrap();
        assert_eq!(s.lower(1), Err(Error::InvalidMode { mode: 1, modes: 1 }));
    }

    #[test]
    fn ladder_matrix_elements_exhaustive() {
        let s = FockSpace::new(&[5, 4]).unwrap();
        for mode in 0..2 {
            let a = s.lower(mode).unwrap();
            for col in 0..s.dim() {
                for row in 0..s.dim() {
                    let mut occ = s.occupations(col);
                    let n = occ[mode];
                    let expected = if n >= 1 {
                        occ[mode] -= 1;
                        if s.index_of(&occ) == Some(row) {
                            (n as f64).sqrt()
                        } else {
                            0.0
                        }
                    } else {
                        0.0
                    };
                    assert_eq!(a.get(row, col), c(expected));
                }
            }
        }
    }

    #[test]
    fn canonical_commutator_on_interior() {
        let s = FockSpace::new(&[10]).unwrap();
        let a = s.lower(0).unwrap();
        let comm = a.commutator(&s.raise(0).unwrap()).unwrap();
        for n in 0..9 {
            for m in 0..10 {
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((comm.get(m, n) - c(expected)).norm() < 1e-14);
            }
        }
        // top level picks up the truncation defect 1 - N
        assert!((comm.get(9, 9) - c(-9.0)).norm() < 1e-12);
    }

    #[test]
    fn mixed_mode_commutators_vanish() {
        let s = FockSpace::new(&[4, 4]).unwrap();
        let comm = s
            .lower(0)
            .unwrap()
            .commutator(&s.raise(1).unwrap())
            .unwrap();
        assert!(comm.is_zero());
    }

    #[test]
    fn square_of_lowering() {
        let s = FockSpace::new(&[4]).unwrap();
        let a = s.lower(0).unwrap();
        let a2 = op_algebra(&a, &a, AlgebraKind::Product, None).unwrap();
        let out = a2.apply(&s.basis_state(&[3]).unwrap()).unwrap();
        assert!((out[1] - c(6f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn pair_commutator_on_one_one() {
        // [ab, a†b†]|1,1⟩ = (n_a + n_b + 1)|1,1⟩ = 3|1,1⟩
        let s = FockSpace::new(&[5, 5]).unwrap();
        let ab = s.lower(0).unwrap().product(&s.lower(1).unwrap()).unwrap();
        let abd = ab.adjoint();
        let comm = op_algebra(&ab, &abd, AlgebraKind::Commutator, None).unwrap();
        let psi = s.basis_state(&[1, 1]).unwrap();
        let out = comm.apply(&psi).unwrap();
        assert!(out.distance(&psi.clone().scaled(c(3.0))) < 1e-13);

        // dense brute force of the same commutator
        let d = ab.to_dense();
        let dd = d.adjoint();
        let dense = &d * &dd - &dd * &d;
        let idx = s.index_of(&[1, 1]).unwrap();
        assert!((dense[(idx, idx)] - c(3.0)).norm() < 1e-13);
    }

    #[test]
    fn scalar_argument_scales_second_operand() {
        let s = FockSpace::new(&[3]).unwrap();
        let a = s.lower(0).unwrap();
        let i = s.identity();
        let sum = op_algebra(&a, &i, AlgebraKind::Sum, Some(Complex64::new(0.0, 2.0))).unwrap();
        assert_eq!(sum.get(0, 0), Complex64::new(0.0, 2.0));
        assert_eq!(sum.get(0, 1), c(1.0));
    }

    #[test]
    fn apply_basics() {
        let s = FockSpace::new(&[3, 6]).unwrap();
        let psi = StateVector::from_vec(
            (0..s.dim())
                .map(|i| Complex64::new(i as f64, -(i as f64) / 2.0))
                .collect(),
        );
        assert_eq!(s.identity().apply(&psi).unwrap(), psi);
        let vac = s.vacuum();
        assert_eq!(s.lower(0).unwrap().apply(&vac).unwrap().norm(), 0.0);
        let st = s.basis_state(&[2, 5]).unwrap();
        let out = s.number(0).unwrap().apply(&st).unwrap();
        assert_eq!(out, st.clone().scaled(c(2.0)));
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = SparseOperator::identity(3);
        let b = SparseOperator::identity(4);
        assert!(matches!(
            a.product(&b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            a.apply(&StateVector::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn triplets_merge_and_drop() {
        let op = SparseOperator::from_triplets(
            2,
            2,
            [
                (0, 1, c(1.0)),
                (0, 1, c(-1.0)),
                (1, 0, c(2.0)),
                (1, 0, c(0.5)),
                (0, 0, c(1e-301)),
            ],
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(1, 0), c(2.5));
    }

    #[test]
    fn reachable_subspace_of_pair_operator() {
        let s = FockSpace::new(&[4, 4]).unwrap();
        let ab = s.lower(0).unwrap().product(&s.lower(1).unwrap()).unwrap();
        let h = ab.add(&ab.adjoint()).unwrap();
        let reach = h.reachable_from(&[0]);
        let expected: Vec<usize> = (0..4).map(|n| s.index_of(&[n, n]).unwrap()).collect();
        assert_eq!(reach, expected);
    }
}
