//! Dense square matrices and a cyclic Jacobi eigen-solver for the symmetric case.
//!
//! The solver is the numeric side of every closed-form spectrum check, so it
//! is kept deliberately plain: row-major storage, classical threshold Jacobi
//! sweeps, no blocking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest matrix the eigen-solver accepts.
pub const MAX_EIGEN_DIM: usize = 512;

/// Square, row-major, real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from rows; every row must have the same length as the row count.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Largest |a_ij - a_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `D - M` where `D` is the diagonal of row sums of `M`.
    pub fn laplacian(&self) -> Self {
        let mut l = self.scaled(-1.0);
        for i in 0..self.n {
            let degree: f64 = self.row(i).iter().sum();
            l.set(i, i, degree - self.get(i, i));
        }
        l
    }

    /// True if every row equals row 0 cyclically shifted by the row index.
    pub fn is_circulant(&self, tol: f64) -> bool {
        let n = self.n;
        (0..n).all(|r| (0..n).all(|j| (self.get(r, (r + j) % n) - self.get(0, j)).abs() <= tol))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
///
/// Rejects inputs whose asymmetry exceeds `1e-12 * max(1, ‖A‖)`.
pub fn symmetric_eigenvalues(matrix: &SquareMatrix) -> Result<Vec<f64>> {
    let n = matrix.dim();
    if n > MAX_EIGEN_DIM {
        return Err(Error::invalid(
            "matrix",
            format!("dimension {n} exceeds {MAX_EIGEN_DIM}"),
        ));
    }
    let scale = matrix.norm().max(1.0);
    let asym = matrix.max_asymmetry();
    if asym > 1e-12 * scale {
        return Err(Error::Asymmetric(asym));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    // symmetrize from the upper triangle so tiny asymmetries do not leak in
    let mut a = SquareMatrix::from_fn(n, |i, j| {
        if i <= j {
            matrix.get(i, j)
        } else {
            matrix.get(j, i)
        }
    });

    let off = |a: &SquareMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };

    let eps = f64::EPSILON * scale;
    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let off_norm = off(&a);
        if off_norm <= eps {
            converged = true;
            break;
        }
        // larger threshold on the first sweeps, as in the classical variant
        let threshold = if sweep < 3 {
            0.2 * off_norm / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a.get(r, p);
                    let arq = a.get(r, q);
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    a.set(r, p, new_rp);
                    a.set(p, r, new_rp);
                    a.set(r, q, new_rq);
                    a.set(q, r, new_rq);
                }
            }
        }
    }
    if !converged && off(&a) > eps {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut values: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Max absolute difference between two multisets of reals, compared sorted.
///
/// Returns `f64::INFINITY` when the sizes differ.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let v = symmetric_eigenvalues(&SquareMatrix::identity(3)).unwrap();
        assert_eq!(v, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum() {
        let m = SquareMatrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        assert_eq!(symmetric_eigenvalues(&m).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn swap_matrix_spectrum() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let v = symmetric_eigenvalues(&m).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            symmetric_eigenvalues(&m),
            Err(Error::Asymmetric(_))
        ));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let m = SquareMatrix::from_fn(5, |i, j| (i as f64 - 2.0 * j as f64).sin());
        let l = m.laplacian();
        for row in l.rows() {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn path_graph_laplacian_matches_cosine_formula() {
        // eigenvalues of the path-graph Laplacian are 2 - 2cos(pi k / n)
        let n = 9;
        let adj = SquareMatrix::from_fn(n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let got = symmetric_eigenvalues(&adj.laplacian()).unwrap();
        let want: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        assert!(multiset_distance(&got, &want) < 1e-13);
    }

    #[test]
    fn multiset_distance_is_order_free() {
        assert_eq!(multiset_distance(&[3.0, 1.0, 2.0], &[1.0, 2.0, 3.0]), 0.0);
        assert!(multiset_distance(&[1.0], &[1.0, 2.0]).is_infinite());
    }
}
