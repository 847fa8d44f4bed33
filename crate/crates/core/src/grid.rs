//! Dyadic-annulus quadrature over ℝ^d.
//!
//! Frequencies are split into annuli `2^j ≤ |ξ| < 2^{j+1}` for
//! `j = j_lo..=j_hi`. Inside each annulus the radius is cut into `nodes`
//! cells and, for `d ≥ 2`, the sphere into `nodes` cells per angular
//! coordinate; one node sits at the midpoint of every cell. Cell weights are
//! exact cell volumes, so each annulus's weights sum to its band volume.
//!
//! Only half of the nodes are stored. Each stored node `ξ` stands for the
//! pair `{ξ, -ξ}` which shares its weight, so the node set is symmetric by
//! construction.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

pub const DEFAULT_J_LO: i32 = -20;
pub const DEFAULT_J_HI: i32 = 20;
pub const DEFAULT_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    dim: usize,
    j_lo: i32,
    j_hi: i32,
    nodes: usize,
    /// Flat `half_len × dim` coordinates of the stored half of the nodes.
    coords: Vec<f64>,
    radii: Vec<f64>,
    /// Weight carried by each of `ξ` and `-ξ`.
    weights: Vec<f64>,
    annuli: Vec<Range<usize>>,
}

impl FrequencyGrid {
    /// Grid with the default range `2^-20 .. 2^21` and 64 nodes per annulus
    /// per dimension.
    pub fn with_defaults(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_J_LO, DEFAULT_J_HI, DEFAULT_NODES)
    }

    pub fn new(dim: usize, j_lo: i32, j_hi: i32, nodes: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if j_lo > 0 || j_hi < 0 {
            return Err(Error::invalid("j_lo/j_hi", format!("need j_lo ≤ 0 ≤ j_hi, got {j_lo}..{j_hi}")));
        }
        if nodes < 2 || !nodes.is_multiple_of(2) {
            return Err(Error::invalid("nodes", format!("must be even and ≥ 2, got {nodes}")));
        }
        let mut grid = FrequencyGrid {
            dim,
            j_lo,
            j_hi,
            nodes,
            coords: Vec::new(),
            radii: Vec::new(),
            weights: Vec::new(),
            annuli: Vec::new(),
        };
        for j in j_lo..=j_hi {
            let start = grid.radii.len();
            let lo = 2f64.powi(j);
            let hi = 2f64.powi(j + 1);
            match dim {
                1 => grid.push_line_band(lo, hi),
                2 => grid.push_disc_band(lo, hi),
                _ => grid.push_shell_band(lo, hi),
            }
            grid.annuli.push(start..grid.radii.len());
        }
        Ok(grid)
    }

    // d = 1: the annulus is [lo, hi) ∪ (-hi, -lo]; `nodes` nodes in total,
    // half of them stored on the positive side.
    fn push_line_band(&mut self, lo: f64, hi: f64) {
        let half = self.nodes / 2;
        let h = (hi - lo) / half as f64;
        for k in 0..half {
            let r = lo + (k as f64 + 0.5) * h;
            self.coords.push(r);
            self.radii.push(r);
            self.weights.push(h);
        }
    }

    fn push_disc_band(&mut self, lo: f64, hi: f64) {
        let n = self.nodes;
        let dr = (hi - lo) / n as f64;
        let dtheta = 2.0 * PI / n as f64;
        for k in 0..n {
            let r0 = lo + k as f64 * dr;
            let r1 = lo + (k + 1) as f64 * dr;
            let r = 0.5 * (r0 + r1);
            let radial = 0.5 * (r1 * r1 - r0 * r0);
            for l in 0..n / 2 {
                let theta = (l as f64 + 0.5) * dtheta;
                self.coords.push(r * theta.cos());
                self.coords.push(r * theta.sin());
                self.radii.push(r);
                self.weights.push(radial * dtheta);
            }
        }
    }

    fn push_shell_band(&mut self, lo: f64, hi: f64) {
        let n = self.nodes;
        let dr = (hi - lo) / n as f64;
        let dtheta = PI / n as f64;
        let dphi = 2.0 * PI / n as f64;
        for k in 0..n {
            let r0 = lo + k as f64 * dr;
            let r1 = lo + (k + 1) as f64 * dr;
            let r = 0.5 * (r0 + r1);
            let radial = (r1 * r1 * r1 - r0 * r0 * r0) / 3.0;
            for m in 0..n {
                let t0 = m as f64 * dtheta;
                let t1 = (m + 1) as f64 * dtheta;
                let theta = 0.5 * (t0 + t1);
                let polar = t0.cos() - t1.cos();
                for l in 0..n / 2 {
                    let phi = (l as f64 + 0.5) * dphi;
                    self.coords.push(r * theta.sin() * phi.cos());
                    self.coords.push(r * theta.sin() * phi.sin());
                    self.coords.push(r * theta.cos());
                    self.radii.push(r);
                    self.weights.push(radial * polar * dphi);
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn j_lo(&self) -> i32 {
        self.j_lo
    }

    pub fn j_hi(&self) -> i32 {
        self.j_hi
    }

    pub fn nodes_per_annulus(&self) -> usize {
        self.nodes
    }

    /// Number of stored nodes, i.e. half the symmetric node set.
    pub fn half_len(&self) -> usize {
        self.radii.len()
    }

    pub fn len(&self) -> usize {
        2 * self.half_len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn radius(&self, k: usize) -> f64 {
        self.radii[k]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Ranges of stored-node indices, one per annulus, innermost first.
    pub fn annuli(&self) -> &[Range<usize>] {
        &self.annuli
    }

    /// Exponent `j` of annulus `a`.
    pub fn annulus_exponent(&self, a: usize) -> i32 {
        self.j_lo + a as i32
    }

    /// Every node of the symmetric set with its weight: `ξ_k` then `-ξ_k`.
    pub fn full_nodes(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        (0..self.half_len()).flat_map(move |k| {
            let xi = self.node(k).to_vec();
            let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
            let w = self.weights[k];
            [(xi, w), (neg, w)]
        })
    }

    /// Same layout with twice the nodes per annulus and one more annulus at
    /// each end.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, self.j_lo - 1, self.j_hi + 1, 2 * self.nodes)
    }

    /// Volume of the annulus `2^j ≤ |ξ| < 2^{j+1}` in ℝ^d.
    pub fn band_volume(dim: usize, j: i32) -> f64 {
        let lo = 2f64.powi(j);
        let hi = 2f64.powi(j + 1);
        match dim {
            1 => 2.0 * (hi - lo),
            2 => PI * (hi * hi - lo * lo),
            _ => 4.0 / 3.0 * PI * (hi.powi(3) - lo.powi(3)),
        }
    }
}

impl fmt::Display for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dyadic(d={},j={}..{},nodes={})",
            self.dim, self.j_lo, self.j_hi, self.nodes
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_weights_match_volume() {
        for dim in 1..=3 {
            let nodes = if dim == 3 { 8 } else { 16 };
            let g = FrequencyGrid::new(dim, -3, 3, nodes).unwrap();
            for (a, range) in g.annuli().iter().enumerate() {
                let sum: f64 = g.weights()[range.clone()].iter().map(|w| 2.0 * w).sum();
                let vol = FrequencyGrid::band_volume(dim, g.annulus_exponent(a));
                assert!(((sum - vol) / vol).abs() < 1e-10, "d={dim} a={a}: {sum} vs {vol}");
            }
        }
    }

    #[test]
    fn nodes_lie_in_their_band_and_are_positive_weight() {
        let g = FrequencyGrid::new(2, -2, 2, 8).unwrap();
        for (a, range) in g.annuli().iter().enumerate() {
            let j = g.annulus_exponent(a);
            for k in range.clone() {
                let r: f64 = g.node(k).iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(r >= 2f64.powi(j) && r < 2f64.powi(j + 1));
                assert!((r - g.radius(k)).abs() < 1e-12 * r);
                assert!(g.weight(k) > 0.0);
            }
        }
    }

    #[test]
    fn full_node_set_is_symmetric() {
        let g = FrequencyGrid::new(3, -1, 1, 4).unwrap();
        let full: Vec<_> = g.full_nodes().collect();
        assert_eq!(full.len(), g.len());
        for (xi, w) in &full {
            let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
            assert!(full.iter().any(|(other, w2)| *other == neg && w2 == w));
        }
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(FrequencyGrid::new(4, -1, 1, 4).is_err());
        assert!(FrequencyGrid::new(1, 1, 3, 4).is_err());
        assert!(FrequencyGrid::new(1, -1, 1, 3).is_err());
    }

    #[test]
    fn default_layout_size() {
        let g = FrequencyGrid::with_defaults(1).unwrap();
        assert_eq!(g.annuli().len(), 41);
        assert_eq!(g.len(), 41 * 64);
    }
}
