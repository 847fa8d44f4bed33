//! Discrete norms on sampled paths: sup and Hölder.
//!
//! The Hölder norm is `sup|g| + max |g(x) - g(y)| / |x - y|^α` over a pair
//! set. When `points² ≤ budget` every pair is used; otherwise, on a lattice,
//! the pairs `(x, x + 2^s h e_a)` for every axis `a` and every dyadic step
//! `2^s h` that fits in `[0,1]`.

use std::fmt;

use crate::error::{Error, Result};
use crate::synthesis::{FieldSample, SpatialGrid};

pub const DEFAULT_PAIR_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormFunctional {
    Sup,
    Holder { alpha: f64, budget: usize },
}

impl NormFunctional {
    pub fn holder(alpha: f64) -> Result<Self> {
        Self::holder_with_budget(alpha, DEFAULT_PAIR_BUDGET)
    }

    pub fn holder_with_budget(alpha: f64, budget: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0,1], got {alpha}")));
        }
        Ok(NormFunctional::Holder { alpha, budget })
    }

    pub fn evaluate(&self, grid: &SpatialGrid, values: &[f64]) -> f64 {
        assert_eq!(grid.len(), values.len());
        match *self {
            NormFunctional::Sup => sup(values),
            NormFunctional::Holder { alpha, budget } => sup(values) + holder_seminorm(grid, values, alpha, budget),
        }
    }

    pub fn of(&self, sample: &FieldSample) -> f64 {
        self.evaluate(&sample.grid, &sample.values)
    }
}

impl fmt::Display for NormFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormFunctional::Sup => f.write_str("sup"),
            NormFunctional::Holder { alpha, budget } => write!(f, "holder(alpha={alpha},budget={budget})"),
        }
    }
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn sup_norm(g: &FieldSample) -> f64 {
    sup(&g.values)
}

pub fn holder_norm(g: &FieldSample, alpha: f64, budget: usize) -> Result<f64> {
    Ok(NormFunctional::holder_with_budget(alpha, budget)?.of(g))
}

fn holder_seminorm(grid: &SpatialGrid, values: &[f64], alpha: f64, budget: usize) -> f64 {
    let n = values.len();
    let uses_all_pairs = n.checked_mul(n).is_some_and(|sq| sq <= budget);
    match grid.per_axis() {
        Some(per_axis) if !uses_all_pairs => dyadic_seminorm(grid.dim(), per_axis, values, alpha),
        _ => {
            let mut best = 0.0f64;
            for i in 0..n {
                let x = grid.point(i);
                for j in i + 1..n {
                    let dist: f64 = x.iter().zip(grid.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    if dist > 0.0 {
                        best = best.max((values[i] - values[j]).abs() / dist.powf(alpha));
                    }
                }
            }
            best
        }
    }
}

fn dyadic_seminorm(dim: usize, per_axis: usize, values: &[f64], alpha: f64) -> f64 {
    let h = 1.0 / (per_axis - 1) as f64;
    let mut best = 0.0f64;
    let mut step = 1;
    while step < per_axis {
        let scale = (step as f64 * h).powf(alpha);
        for axis in 0..dim {
            let stride = per_axis.pow((dim - 1 - axis) as u32);
            for i in 0..values.len() {
                let coord = (i / stride) % per_axis;
                if coord + step < per_axis {
                    best = best.max((values[i + step * stride] - values[i]).abs() / scale);
                }
            }
        }
        step *= 2;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(n: usize) -> SpatialGrid {
        SpatialGrid::uniform(1, n).unwrap()
    }

    fn identity_values(grid: &SpatialGrid) -> Vec<f64> {
        (0..grid.len()).map(|i| grid.point(i)[0]).collect()
    }

    #[test]
    fn stated_examples() {
        let g = line(101);
        let x = identity_values(&g);
        assert_eq!(NormFunctional::Sup.evaluate(&g, &vec![0.0; 101]), 0.0);
        assert_eq!(NormFunctional::Sup.evaluate(&g, &x), 1.0);
        let h1 = NormFunctional::holder(1.0).unwrap().evaluate(&g, &x);
        assert!((h1 - 2.0).abs() < 1e-12, "{h1}");
        let h05 = NormFunctional::holder(0.5).unwrap().evaluate(&g, &x);
        assert!((h05 - 2.0).abs() < 1e-12, "{h05}");
        assert_eq!(NormFunctional::holder(0.3).unwrap().evaluate(&g, &vec![0.0; 101]), 0.0);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(NormFunctional::holder(0.0).is_err());
        assert!(NormFunctional::holder(1.5).is_err());
        assert!(NormFunctional::holder(f64::NAN).is_err());
    }

    #[test]
    fn dyadic_pairs_see_linear_slope() {
        // 2^k + 1 points: the step 2^k pair spans [0,1].
        let g = line(129);
        let x = identity_values(&g);
        let norm = NormFunctional::holder_with_budget(0.5, 10).unwrap();
        assert!((norm.evaluate(&g, &x) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dyadic_pairs_in_two_dimensions() {
        let g = SpatialGrid::uniform(2, 9).unwrap();
        // g(x, y) = y: only increments along the second axis are nonzero.
        let v: Vec<f64> = (0..g.len()).map(|i| g.point(i)[1]).collect();
        let dyadic = NormFunctional::holder_with_budget(1.0, 1).unwrap().evaluate(&g, &v);
        let full = NormFunctional::holder(1.0).unwrap().evaluate(&g, &v);
        assert!((dyadic - 2.0).abs() < 1e-12 && (full - 2.0).abs() < 1e-12);
    }

    fn kinds() -> Vec<NormFunctional> {
        vec![
            NormFunctional::Sup,
            NormFunctional::holder(0.4).unwrap(),
            NormFunctional::holder_with_budget(0.7, 16).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn norm_axioms(
            a in proptest::collection::vec(-5.0f64..5.0, 17),
            b in proptest::collection::vec(-5.0f64..5.0, 17),
            lambda in -4.0f64..4.0,
            t in 0.0f64..1.0,
        ) {
            let g = line(17);
            for norm in kinds() {
                let na = norm.evaluate(&g, &a);
                let nb = norm.evaluate(&g, &b);
                let scaled: Vec<f64> = a.iter().map(|v| lambda * v).collect();
                prop_assert!((norm.evaluate(&g, &scaled) - lambda.abs() * na).abs() <= 1e-12 * na.max(1.0));
                let neg: Vec<f64> = a.iter().map(|v| -v).collect();
                prop_assert_eq!(norm.evaluate(&g, &neg), na);
                let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                prop_assert!(norm.evaluate(&g, &sum) <= na + nb + 1e-12);
                let r = na.max(nb);
                let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
                prop_assert!(norm.evaluate(&g, &mix) <= r + 1e-12);
                prop_assert!(NormFunctional::Sup.evaluate(&g, &a) <= norm.evaluate(&g, &a));
            }
        }

        #[test]
        fn coarsening_never_increases(values in proptest::collection::vec(-3.0f64..3.0, 33)) {
            let fine = line(33);
            let coarse = fine.coarsened().unwrap();
            let sub: Vec<f64> = fine.coarse_indices().unwrap().iter().map(|&i| values[i]).collect();
            // Both grids stay in the same pair mode for each norm.
            for norm in [NormFunctional::Sup, NormFunctional::holder(0.5).unwrap(), NormFunctional::holder_with_budget(0.5, 4).unwrap()] {
                prop_assert!(norm.evaluate(&coarse, &sub) <= norm.evaluate(&fine, &values));
            }
        }
    }
}
