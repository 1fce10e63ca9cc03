//! Small row-major dense matrix with the handful of kernels the solvers need.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Power iteration stopped at its iteration cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationStall {
    pub best_estimate: f64,
    pub iterations: usize,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    /// Spectral norm `‖G‖₂` by power iteration on `GᵀG`.
    ///
    /// Stops when the Rayleigh quotient changes by at most `rel_tol` relative
    /// to its value. The start vector comes from a fixed-seed generator, so
    /// the result is deterministic.
    pub fn spectral_norm(&self, rel_tol: f64, max_iter: usize) -> Result<f64, PowerIterationStall> {
        if self.data.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_90e3);
        let mut v: Vec<f64> = (0..self.cols).map(|_| rng.random_range(0.5..1.5)).collect();
        normalize(&mut v);
        let mut rayleigh = 0.0;
        for it in 1..=max_iter {
            let gv = self.matvec(&v);
            let next_rayleigh: f64 = gv.iter().map(|a| a * a).sum();
            let mut w = self.matvec_transpose(&gv);
            if normalize(&mut w) == 0.0 {
                return Ok(next_rayleigh.sqrt());
            }
            v = w;
            if it > 1 && (next_rayleigh - rayleigh).abs() <= rel_tol * next_rayleigh {
                return Ok(next_rayleigh.sqrt());
            }
            rayleigh = next_rayleigh;
        }
        Err(PowerIterationStall {
            best_estimate: rayleigh.sqrt(),
            iterations: max_iter,
        })
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    n
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_simple_matrices() {
        assert!((DenseMatrix::identity(2).spectral_norm(1e-10, 10_000).unwrap() - 1.0).abs() < 1e-12);
        let d = DenseMatrix::from_diag(&[3.0, 1.0]);
        assert!((d.spectral_norm(1e-10, 10_000).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(DenseMatrix::zeros(3, 3).spectral_norm(1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn spectral_norm_of_rotation_scaled() {
        // 2 * rotation has both singular values equal to 2.
        let (s, c) = (0.3_f64.sin(), 0.3_f64.cos());
        let m = DenseMatrix::from_row_major(2, 2, vec![2.0 * c, -2.0 * s, 2.0 * s, 2.0 * c]);
        assert!((m.spectral_norm(1e-12, 10_000).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn stall_reports_best_estimate() {
        // Nearly equal top singular values converge slowly.
        let d = DenseMatrix::from_diag(&[1.0, 1.0 - 1e-9, 0.5]);
        match d.spectral_norm(1e-30, 3) {
            Err(stall) => {
                assert_eq!(stall.iterations, 3);
                assert!(stall.best_estimate > 0.5 && stall.best_estimate <= 1.0 + 1e-12);
            }
            Ok(v) => panic!("expected a stall, got {v}"),
        }
    }

    #[test]
    fn matvec_and_transpose_agree() {
        let m = DenseMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64);
        let x = [1.0, 2.0];
        assert_eq!(m.matvec_transpose(&x), m.transpose().matvec(&x));
        assert_eq!(m.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        let mm = m.matmul(&m.transpose());
        assert_eq!(mm.as_slice(), &[5.0, 14.0, 14.0, 50.0]);
    }
}
