//! Minimal dense linear algebra: column-ordered matrices and a Cholesky
//! factorization with triangular solves.
//!
//! System sizes in this crate stay in the low hundreds, so an unblocked
//! factorization is entirely adequate and keeps everything generic over the
//! scalar type.

use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a symmetric matrix by evaluating the upper triangle and
    /// mirroring it, so symmetry holds exactly.
    pub fn symmetric_from_upper(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn add_to_diagonal(&mut self, v: S) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self.data[i * self.cols + i] += v;
        }
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum::<S>()
            })
            .collect()
    }

    /// Frobenius inner product `sum_ij A_ij B_ij`.
    pub fn frobenius_dot(&self, other: &Self) -> S {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor<S> {
    dim: usize,
    lower: Vec<S>,
}

/// Attempts `A = L L^T`; returns `None` when a pivot is not strictly positive.
pub fn cholesky<S: Scalar>(a: &Matrix<S>) -> Option<CholeskyFactor<S>> {
    debug_assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut l = vec![S::zero(); n * n];
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            let v = l[j * n + k];
            diag -= v * v;
        }
        if !(diag > S::zero()) || !diag.is_finite() {
            return None;
        }
        let pivot = diag.sqrt();
        l[j * n + j] = pivot;
        let inv_pivot = pivot.recip();
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            let (ri, rj) = (i * n, j * n);
            for k in 0..j {
                v -= l[ri + k] * l[rj + k];
            }
            l[ri + j] = v * inv_pivot;
        }
    }
    Some(CholeskyFactor { dim: n, lower: l })
}

impl<S: Scalar> CholeskyFactor<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `log det A = 2 sum_i log L_ii`.
    pub fn log_det(&self) -> S {
        let n = self.dim;
        let mut acc = S::zero();
        for i in 0..n {
            acc += self.lower[i * n + i].ln();
        }
        acc + acc
    }

    /// Solves `L y = b` in place.
    pub fn forward_solve(&self, b: &mut [S]) {
        let n = self.dim;
        for i in 0..n {
            let mut v = b[i];
            let row = &self.lower[i * n..i * n + i];
            for (k, &l) in row.iter().enumerate() {
                v -= l * b[k];
            }
            b[i] = v / self.lower[i * n + i];
        }
    }

    /// Solves `L^T x = y` in place.
    pub fn backward_solve(&self, b: &mut [S]) {
        let n = self.dim;
        for i in (0..n).rev() {
            let mut v = b[i];
            for k in (i + 1)..n {
                v -= self.lower[k * n + i] * b[k];
            }
            b[i] = v / self.lower[i * n + i];
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let mut x = b.to_vec();
        self.forward_solve(&mut x);
        self.backward_solve(&mut x);
        x
    }

    /// Solves `L Y = B` column-wise for a row-major `B` (n x m).
    pub fn forward_solve_matrix(&self, b: &Matrix<S>) -> Matrix<S> {
        debug_assert_eq!(b.rows(), self.dim);
        let n = self.dim;
        let m = b.cols();
        let mut y = b.clone();
        for i in 0..n {
            let inv_pivot = self.lower[i * n + i].recip();
            // y_row_i -= sum_k L_ik y_row_k  (k < i), then scale.
            for k in 0..i {
                let l = self.lower[i * n + k];
                if l != S::zero() {
                    let (head, tail) = y.data.split_at_mut(i * m);
                    let row_k = &head[k * m..(k + 1) * m];
                    let row_i = &mut tail[..m];
                    for (yi, &yk) in row_i.iter_mut().zip(row_k) {
                        *yi -= l * yk;
                    }
                }
            }
            for v in y.row_mut(i) {
                *v *= inv_pivot;
            }
        }
        y
    }

    /// Dense inverse `A^{-1}`, symmetric by construction.
    pub fn inverse(&self) -> Matrix<S> {
        let n = self.dim;
        let mut inv = Matrix::zeros(n, n);
        let mut col = vec![S::zero(); n];
        for j in 0..n {
            col.fill(S::zero());
            col[j] = S::one();
            self.forward_solve(&mut col);
            self.backward_solve(&mut col);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        // Symmetrize to remove round-off skew.
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (inv.get(i, j) + inv.get(j, i)) / S::real(2.0);
                inv.set(i, j, v);
                inv.set(j, i, v);
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_spd(n: usize, rng: &mut StdRng) -> Matrix<f64> {
        // A = B B^T + n I is SPD.
        let b = Matrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        Matrix::symmetric_from_upper(n, |i, j| {
            let mut acc = 0.0;
            for k in 0..n {
                acc += b.get(i, k) * b.get(j, k);
            }
            if i == j {
                acc += n as f64;
            }
            acc
        })
    }

    #[test]
    fn solves_random_spd_systems() {
        let mut rng = StdRng::seed_from_u64(1);
        for n in [1, 2, 5, 20, 60] {
            let a = random_spd(n, &mut rng);
            let x_true: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let b = a.matvec(&x_true);
            let chol = cholesky(&a).expect("SPD");
            let x = chol.solve(&b);
            for (xs, xt) in x.iter().zip(&x_true) {
                assert!((xs - xt).abs() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn log_det_matches_diagonal_product() {
        let a = Matrix::symmetric_from_upper(2, |i, j| if i == j { 4.0 } else { 1.0 });
        let chol = cholesky(&a).unwrap();
        // det = 4*4 - 1 = 15
        assert!((chol.log_det() - 15.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let a = Matrix::symmetric_from_upper(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(cholesky(&a).is_none());
    }

    #[test]
    fn inverse_matches_solve() {
        let mut rng = StdRng::seed_from_u64(2);
        let a = random_spd(15, &mut rng);
        let chol = cholesky(&a).unwrap();
        let inv = chol.inverse();
        // A * A^{-1} ~ I
        for i in 0..15 {
            let col: Vec<f64> = (0..15).map(|k| inv.get(k, i)).collect();
            let e = a.matvec(&col);
            for (k, v) in e.iter().enumerate() {
                let expect = if k == i { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn forward_solve_matrix_matches_vector_solves() {
        let mut rng = StdRng::seed_from_u64(3);
        let a = random_spd(12, &mut rng);
        let chol = cholesky(&a).unwrap();
        let b = Matrix::from_fn(12, 4, |_, _| rng.gen::<f64>());
        let y = chol.forward_solve_matrix(&b);
        for j in 0..4 {
            let mut col: Vec<f64> = (0..12).map(|i| b.get(i, j)).collect();
            chol.forward_solve(&mut col);
            for i in 0..12 {
                assert!((y.get(i, j) - col[i]).abs() < 1e-12);
            }
        }
    }
}
