#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

/// Empirical second moments `Ê[u_i v_j]` with standard errors from the
/// sample variance of the products.
pub struct Moments {
    pub n: usize,
    pub points: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    pub fn new(points: usize) -> Self {
        Moments { n: 0, points, sum: vec![0.0; points * points], sum_sq: vec![0.0; points * points] }
    }

    pub fn add(&mut self, u: &[f64], v: &[f64]) {
        self.n += 1;
        for i in 0..self.points {
            for j in 0..self.points {
                let p = u[i] * v[j];
                self.sum[i * self.points + j] += p;
                self.sum_sq[i * self.points + j] += p * p;
            }
        }
    }

    pub fn mean(&self, i: usize, j: usize) -> f64 {
        self.sum[i * self.points + j] / self.n as f64
    }

    pub fn se(&self, i: usize, j: usize) -> f64 {
        let n = self.n as f64;
        let m = self.mean(i, j);
        ((self.sum_sq[i * self.points + j] / n - m * m).max(0.0) / (n - 1.0)).sqrt()
    }

    /// Largest `|Ê - target| / SE` over pairs with nonzero SE; pairs with zero
    /// SE must match exactly.
    pub fn max_z(&self, target: impl Fn(usize, usize) -> f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.points {
            for j in 0..self.points {
                let dev = (self.mean(i, j) - target(i, j)).abs();
                let se = self.se(i, j);
                if se > 0.0 {
                    worst = worst.max(dev / se);
                } else {
                    assert!(dev == 0.0, "zero-variance pair ({i},{j}) deviates by {dev}");
                }
            }
        }
        worst
    }
}

pub fn fbm_covariance(h: f64, x: f64, y: f64) -> f64 {
    0.5 * (x.abs().powf(2.0 * h) + y.abs().powf(2.0 * h) - (x - y).abs().powf(2.0 * h))
}

/// `P(max_{k ≤ steps} |B(k/steps)| ≤ r)` for Brownian motion on `[0,1]`
/// observed at `steps + 1` equally spaced times, by propagating the
/// sub-density on `[-r, r]` with the Gaussian transition kernel and the
/// trapezoid rule on `mesh` nodes.
pub fn discrete_brownian_ball(r: f64, steps: usize, mesh: usize) -> f64 {
    let dx = 2.0 * r / (mesh - 1) as f64;
    let xs: Vec<f64> = (0..mesh).map(|i| -r + i as f64 * dx).collect();
    let var = 1.0 / steps as f64;
    let kernel = |d: f64| (-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    let trap = |i: usize| if i == 0 || i == mesh - 1 { 0.5 * dx } else { dx };
    let table: Vec<f64> = (0..mesh).map(|k| kernel(k as f64 * dx)).collect();
    // First step starts from the point mass at 0.
    let mut p: Vec<f64> = xs.iter().map(|x| kernel(*x)).collect();
    for _ in 1..steps {
        let weighted: Vec<f64> = (0..mesh).map(|i| p[i] * trap(i)).collect();
        p = (0..mesh)
            .map(|j| (0..mesh).map(|i| weighted[i] * table[i.abs_diff(j)]).sum())
            .collect();
    }
    (0..mesh).map(|i| p[i] * trap(i)).sum()
}
