//! Symmetric positive-definite band matrices and their Cholesky factors.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix; row `i` stores columns `i-bw ..= i`.
#[derive(Debug, Clone)]
pub(crate) struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub(crate) fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Sets entry `(i, j)` with `j ≤ i`.
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    #[cfg(test)]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)]
    }

    pub(crate) fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = self.row(i);
            let mut acc = 0.0;
            for j in lo..i {
                let a = row[j + self.bw - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc + row[self.bw] * x[i];
        }
        y
    }

    /// In-place Cholesky factorization `A = L Lᵀ`.
    pub(crate) fn cholesky(mut self) -> Result<BandCholesky> {
        let bw = self.bw;
        let w = bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let (head, tail) = self.data.split_at_mut(i * w);
                let row_i = &tail[..w];
                let row_j: &[f64] = if j == i { row_i } else { &head[j * w..(j + 1) * w] };
                let mut sum = row_i[j + bw - i];
                let a = &row_i[klo + bw - i..j + bw - i];
                let b = &row_j[klo + bw - j..bw];
                sum -= a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                let v = if j == i {
                    if !(sum > 0.0) {
                        return Err(Error::Domain(format!(
                            "matrix is not positive definite (pivot {sum:e} at row {i})"
                        )));
                    }
                    sum.sqrt()
                } else {
                    sum / head[j * w + bw]
                };
                tail[j + bw - i] = v;
            }
        }
        Ok(BandCholesky { factor: self })
    }
}

pub(crate) struct BandCholesky {
    factor: SymBand,
}

impl BandCholesky {
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let (n, bw) = (l.n, l.bw);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = l.row(i);
            let mut s = y[i];
            for j in lo..i {
                s -= row[j + bw - i] * y[j];
            }
            y[i] = s / row[bw];
        }
        for i in (0..n).rev() {
            y[i] /= l.row(i)[bw];
            let lo = i.saturating_sub(bw);
            let row = l.row(i);
            let yi = y[i];
            for j in lo..i {
                y[j] -= row[j + bw - i] * yi;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x);
        let chol = a.clone().cholesky().unwrap();
        let got = chol.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn wider_band_against_dense_product() {
        let n = 30;
        let bw = 4;
        let mut a = SymBand::zeros(n, bw);
        for i in 0..n {
            a.set(i, i, 10.0 + i as f64 * 0.1);
            for j in i.saturating_sub(bw)..i {
                a.set(
                    i,
                    j,
                    0.5 / (1.0 + (i - j) as f64) * if (i + j) % 3 == 0 { -1.0 } else { 1.0 },
                );
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let dense_b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j) * x[j]).sum()).collect();
        let b = a.matvec(&x);
        for (p, q) in b.iter().zip(&dense_b) {
            assert!((p - q).abs() < 1e-12);
        }
        let got = a.cholesky().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = SymBand::zeros(2, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 1.0);
        a.set(1, 0, 2.0);
        assert!(a.cholesky().is_err());
    }
}
