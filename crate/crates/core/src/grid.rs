//! Uniform radial grids and the fourth-order quadrature built on them.
//!
//! Every interval `[t_i, t_{i+1}]` is integrated with the cubic through four
//! neighbouring nodes, so cumulative integrals are available at every node
//! with O(h^4) error. Interior intervals use the centered stencil
//! `h/24 (-f_{i-1} + 13 f_i + 13 f_{i+1} - f_{i+2})`; the two end intervals
//! use the one-sided stencil `h/24 (9 f_0 + 19 f_1 - 5 f_2 + f_3)` and its
//! mirror image. The rule is exact for cubics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest admissible number of grid intervals.
pub const MIN_INTERVALS: usize = 16;

/// Ordered nodes `0 = t_0 < ... < t_N = R` with composite quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Uniform grid with `intervals` sub-intervals on `[0, radius]`.
    pub fn uniform(radius: f64, intervals: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if intervals < MIN_INTERVALS {
            return Err(Error::InvalidGrid(format!(
                "at least {MIN_INTERVALS} intervals required, got {intervals}"
            )));
        }
        let h = radius / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        nodes[intervals] = radius;

        let mut weights = vec![0.0; intervals + 1];
        for i in 0..intervals {
            for (node, c) in interval_stencil(i, intervals) {
                weights[node] += c * h;
            }
        }
        Ok(Self { radius, nodes, weights })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of intervals `N`; there are `N + 1` nodes.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.intervals() as f64
    }

    /// Grid with half the spacing on the same interval.
    pub fn refined(&self) -> Self {
        Self::uniform(self.radius, 2 * self.intervals()).expect("refinement of a valid grid")
    }

    /// `∫_0^R f` for node values `f`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, f)| w * f).sum()
    }

    /// Per-interval integrals `∫_{t_i}^{t_{i+1}} f`.
    pub fn interval_integrals(&self, values: &[f64]) -> Vec<f64> {
        let n = self.intervals();
        let h = self.spacing();
        (0..n)
            .map(|i| {
                interval_stencil(i, n)
                    .iter()
                    .map(|&(node, c)| c * values[node])
                    .sum::<f64>()
                    * h
            })
            .collect()
    }

    /// Prefix integrals `F_i = ∫_0^{t_i} f`.
    pub fn cumulative_from_start(&self, values: &[f64]) -> Vec<f64> {
        let pieces = self.interval_integrals(values);
        let mut out = Vec::with_capacity(pieces.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for p in pieces {
            acc += p;
            out.push(acc);
        }
        out
    }

    /// Suffix integrals `G_i = ∫_{t_i}^R f`.
    pub fn cumulative_to_end(&self, values: &[f64]) -> Vec<f64> {
        let pieces = self.interval_integrals(values);
        let mut out = vec![0.0; pieces.len() + 1];
        let mut acc = 0.0;
        for i in (0..pieces.len()).rev() {
            acc += pieces[i];
            out[i] = acc;
        }
        out
    }

    /// Derivative at every node by five-point differences, one-sided at the ends.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let h = self.spacing();
        (0..n)
            .map(|i| {
                if i < 2 {
                    let f = |k: usize| values[i + k];
                    forward_five(f(0), f(1), f(2), f(3), f(4), h)
                } else if i + 2 >= n {
                    let f = |k: usize| values[i - k];
                    -forward_five(f(0), f(1), f(2), f(3), f(4), h)
                } else {
                    centered_five(values[i - 2], values[i - 1], values[i + 1], values[i + 2], h)
                }
            })
            .collect()
    }
}

/// Stencil (node, coefficient / h) for the integral over interval `i` of `n`.
fn interval_stencil(i: usize, n: usize) -> [(usize, f64); 4] {
    const C: f64 = 1.0 / 24.0;
    if i == 0 {
        [(0, 9.0 * C), (1, 19.0 * C), (2, -5.0 * C), (3, C)]
    } else if i == n - 1 {
        [(n - 3, C), (n - 2, -5.0 * C), (n - 1, 19.0 * C), (n, 9.0 * C)]
    } else {
        [(i - 1, -C), (i, 13.0 * C), (i + 1, 13.0 * C), (i + 2, -C)]
    }
}

pub(crate) fn centered_five(fm2: f64, fm1: f64, fp1: f64, fp2: f64, h: f64) -> f64 {
    (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
}

pub(crate) fn forward_five(f0: f64, f1: f64, f2: f64, f3: f64, f4: f64, h: f64) -> f64 {
    (-25.0 * f0 + 48.0 * f1 - 36.0 * f2 + 16.0 * f3 - 3.0 * f4) / (12.0 * h)
}

/// Five-point derivative of `f` at `x` within `[lo, hi]`, switching to a
/// one-sided stencil when the centered one would leave the interval.
pub(crate) fn five_point<F>(f: F, x: f64, h: f64, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if x - 2.0 * h >= lo && x + 2.0 * h <= hi {
        Ok(centered_five(f(x - 2.0 * h)?, f(x - h)?, f(x + h)?, f(x + 2.0 * h)?, h))
    } else if x - 2.0 * h < lo {
        Ok(forward_five(
            f(x)?,
            f(x + h)?,
            f(x + 2.0 * h)?,
            f(x + 3.0 * h)?,
            f(x + 4.0 * h)?,
            h,
        ))
    } else {
        Ok(-forward_five(
            f(x)?,
            f(x - h)?,
            f(x - 2.0 * h)?,
            f(x - 3.0 * h)?,
            f(x - 4.0 * h)?,
            h,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(RadialGrid::uniform(1.0, 15).is_err());
        assert!(RadialGrid::uniform(0.0, 64).is_err());
        assert!(RadialGrid::uniform(-1.0, 64).is_err());
        assert!(RadialGrid::uniform(f64::NAN, 64).is_err());
    }

    #[test]
    fn nodes_and_weights_invariants() {
        for &(r, n) in &[(1.0, 16), (3.0, 100), (std::f64::consts::FRAC_PI_2, 4096)] {
            let g = RadialGrid::uniform(r, n).unwrap();
            assert_eq!(g.nodes()[0], 0.0);
            assert_eq!(*g.nodes().last().unwrap(), r);
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(g.weights().iter().all(|&w| w > 0.0));
            let total: f64 = g.weights().iter().sum();
            assert!((total - r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn exact_for_cubics() {
        let g = RadialGrid::uniform(2.0, 20).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|t| 1.0 - 3.0 * t + t * t * t).collect();
        let prefix = g.cumulative_from_start(&f);
        for (t, p) in g.nodes().iter().zip(&prefix) {
            let exact = t - 1.5 * t * t + t.powi(4) / 4.0;
            assert_relative_eq!(*p, exact, epsilon = 1e-13);
        }
        let suffix = g.cumulative_to_end(&f);
        assert_relative_eq!(suffix[0], g.integrate(&f), epsilon = 1e-13);
        assert_relative_eq!(suffix[20], 0.0);
    }

    #[test]
    fn fourth_order_on_smooth_integrand() {
        let err = |n: usize| {
            let g = RadialGrid::uniform(1.0, n).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|t| t.exp()).collect();
            (g.integrate(&f) - (1f64.exp() - 1.0)).abs()
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn derivative_is_accurate() {
        let g = RadialGrid::uniform(1.0, 64).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|t| t.sin()).collect();
        for (t, d) in g.nodes().iter().zip(g.derivative(&f)) {
            assert!((d - t.cos()).abs() < 1e-7);
        }
    }
}
