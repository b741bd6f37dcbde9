// Sparse LU by reverse Cuthill-McKee reordering followed by a banded LU with
// partial pivoting (LAPACK gbtrf layout: each row keeps `kl` extra columns
// for pivoting fill).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reverse Cuthill-McKee ordering of the symmetrized pattern; returns
/// `perm[new] = old`.
pub(crate) fn reverse_cuthill_mckee(a: &SparseOperator) -> Vec<usize> {
    let n = a.rows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let mut queue = VecDeque::new();
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
}

impl BandLu {
    /// Factors `a + shift·I` after reordering. Fails when the band storage
    /// would exceed `max_entries`.
    pub(crate) fn factor(a: &SparseOperator, shift: Complex64, max_entries: usize) -> Result<Self> {
        let n = a.rows();
        let perm = reverse_cuthill_mckee(a);
        let mut pos = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (pos[i], pos[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
        let width = 2 * kl + ku + 1;
        let needed = n.saturating_mul(width);
        if needed > max_entries {
            return Err(Error::BandTooWide {
                needed,
                limit: max_entries,
            });
        }
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data: vec![ZERO; needed],
            pivots: vec![0; n],
            perm,
        };
        for (i, j, v) in a.triplets() {
            let k = lu.slot(pos[i], pos[j]);
            lu.data[k] += v;
        }
        for i in 0..n {
            let k = lu.slot(i, i);
            lu.data[k] += shift;
        }
        lu.eliminate();
        Ok(lu)
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        debug_assert!(col + self.kl >= row && col <= row + self.kl + self.ku);
        row * self.width + (col + self.kl - row)
    }

    fn eliminate(&mut self) {
        let n = self.n;
        let scale = self
            .data
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].norm();
            for j in k + 1..=last_row {
                let v = self.data[self.slot(j, k)].norm();
                if v > best {
                    best = v;
                    p = j;
                }
            }
            self.pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (s1, s2) = (self.slot(k, c), self.slot(p, c));
                    self.data.swap(s1, s2);
                }
            }
            let kk = self.slot(k, k);
            if self.data[kk].norm() == 0.0 {
                // exactly singular: perturb so inverse iteration can proceed
                self.data[kk] = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            let pivot = self.data[kk];
            for j in k + 1..=last_row {
                let jk = self.slot(j, k);
                let l = self.data[jk] / pivot;
                self.data[jk] = l;
                if l == ZERO {
                    continue;
                }
                for c in k + 1..=last_col {
                    let (sj, sk) = (self.slot(j, c), self.slot(k, c));
                    let upd = l * self.data[sk];
                    self.data[sj] -= upd;
                }
            }
        }
    }

    #[allow(clippy::needless_range_loop)]
    pub(crate) fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            for j in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                y[j] -= self.data[self.slot(j, k)] * yk;
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                s -= self.data[self.slot(k, c)] * y[c];
            }
            y[k] = s / self.data[self.slot(k, k)];
        }
        let mut x = vec![ZERO; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    #[cfg(test)]
    pub(crate) fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_matrix(n: usize) -> SparseOperator {
        // nonsymmetric, needs pivoting (zero diagonal in places), scattered pattern
        let mut t = Vec::new();
        for i in 0..n {
            if i % 3 != 0 {
                t.push((i, i, c(0.5 + i as f64 * 0.1, 0.2)));
            }
            t.push((i, (i * 7 + 3) % n, c(1.0, -0.3)));
            t.push(((i * 5 + 1) % n, i, c(-0.7, 0.1 * i as f64)));
        }
        SparseOperator::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn solves_against_dense_lu() {
        let n = 40;
        let a = test_matrix(n);
        let shift = c(0.3, 0.0);
        let lu = BandLu::factor(&a, shift, usize::MAX).unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| c(i as f64, 1.0 - i as f64 * 0.5)).collect();
        let x = lu.solve(&b);
        let shifted = a.add(&SparseOperator::identity(n).scaled(shift)).unwrap();
        let r = shifted.matvec(&x).unwrap();
        let err: f64 = r
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        let dense_x = shifted
            .to_dense()
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&b))
            .unwrap();
        let diff: f64 = x
            .iter()
            .zip(dense_x.iter())
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn rcm_narrows_grid_laplacian_band() {
        // 2D grid numbered in a scrambled order
        let side = 8;
        let n = side * side;
        let scramble = |k: usize| (k * 37) % n;
        let mut t = Vec::new();
        for i in 0..side {
            for j in 0..side {
                let k = scramble(i * side + j);
                t.push((k, k, c(4.0, 0.0)));
                if i + 1 < side {
                    let k2 = scramble((i + 1) * side + j);
                    t.push((k, k2, c(-1.0, 0.0)));
                    t.push((k2, k, c(-1.0, 0.0)));
                }
                if j + 1 < side {
                    let k2 = scramble(i * side + j + 1);
                    t.push((k, k2, c(-1.0, 0.0)));
                    t.push((k2, k, c(-1.0, 0.0)));
                }
            }
        }
        let a = SparseOperator::from_triplets(n, n, t).unwrap();
        let lu = BandLu::factor(&a, c(0.0, 0.0), usize::MAX).unwrap();
        let (kl, ku) = lu.bandwidths();
        assert!(kl <= 2 * side && ku <= 2 * side, "{kl} {ku}");
    }

    #[test]
    fn band_limit_is_enforced() {
        let s = FockSpace::new(&[6, 6]).unwrap();
        let a = s.lower(0).unwrap().add(&s.raise(1).unwrap()).unwrap();
        assert!(matches!(
            BandLu::factor(&a, c(1.0, 0.0), 10),
            Err(Error::BandTooWide { .. })
        ));
    }
}
