//! Shape-preserving piecewise-cubic Hermite interpolation (Fritsch–Carlson).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Domain(format!(
                "interpolation needs matching samples (got {} abscissae, {} values)",
                x.len(),
                y.len()
            )));
        }
        if !x.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                let (d0, d1) = (delta[i - 1], delta[i]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, slopes })
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Value at `t`; clamps to the end intervals outside the sample range.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.y[i] + d10 * self.slopes[i] + d01 * self.y[i + 1] + d11 * self.slopes[i + 1]
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }
}

/// Three-point end slope, limited so the end interval stays monotone.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_linear_data() {
        let x: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t + 1.0).collect();
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((p.eval(*xi) - yi).abs() < 1e-14);
        }
        assert!((p.eval(0.437) - 2.311).abs() < 1e-13);
        assert!((p.derivative(0.437) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn preserves_monotonicity() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.1, 5.0, 5.1, 10.0];
        let p = Pchip::new(x, y).unwrap();
        let mut prev = p.eval(0.0);
        for k in 1..=400 {
            let v = p.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Pchip::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
    }
}
