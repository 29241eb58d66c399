//! Angular discretization: Gauss-Legendre grids in the direction cosine and
//! the two orthonormal Legendre families used by the solvers.
//!
//! Conventions. Angular averages are written with the half-weighted bracket
//! `<f> = (1/2) Int_{-1}^{1} f dmu`. The full-range basis `p_n` is normalized
//! against that bracket, `<p_n p_m> = delta_nm`, so `p_n(mu) =
//! sqrt(2n+1) P_n(mu)`. The half-range basis `phi_k` is orthonormal with the
//! plain measure on [0, 1]: `Int_0^1 phi_j phi_k dmu = delta_jk`, so
//! `phi_k(mu) = sqrt(2k+1) P_k(2mu - 1)`.

use crate::error::{Error, Result};
use crate::quadrature::{legendre, GaussRule};

/// Normalized Legendre polynomial on [-1, 1]: `p_n = sqrt(2n+1) P_n`.
pub fn normalized_legendre(n: usize, mu: f64) -> f64 {
    ((2 * n + 1) as f64).sqrt() * legendre(n, mu)
}

/// Half-range orthonormal basis on [0, 1]: `phi_k(mu) = sqrt(2k+1) P_k(2mu-1)`.
pub fn half_range_phi(k: usize, mu: f64) -> f64 {
    ((2 * k + 1) as f64).sqrt() * legendre(k, 2.0 * mu - 1.0)
}

/// Gauss-Legendre grid in the direction cosine mu on (-1, 1).
#[derive(Debug, Clone)]
pub struct AngularGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Builds an n-node Gauss-Legendre angular grid.
pub fn build_angular_grid(n_nodes: usize) -> Result<AngularGrid> {
    if n_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "angular grid needs at least 2 nodes, got {n_nodes}"
        )));
    }
    let rule = GaussRule::legendre(n_nodes)?;
    Ok(AngularGrid {
        nodes: rule.nodes,
        weights: rule.weights,
    })
}

impl AngularGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Angular average `<f> = (1/2) sum w_j f_j` of nodal values.
    pub fn mean(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.len(), "nodal value count mismatch");
        0.5 * self
            .weights
            .iter()
            .zip(f)
            .map(|(&w, &v)| w * v)
            .sum::<f64>()
    }

    /// Indices of the strictly positive nodes, in grid (ascending) order.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.nodes[j] > 0.0).collect()
    }

    /// Indices of the strictly negative nodes, in grid (ascending) order.
    pub fn negative_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.nodes[j] < 0.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_moments_are_exact() {
        let grid = build_angular_grid(32).unwrap();
        let w_sum: f64 = grid.weights.iter().sum();
        assert!((w_sum - 2.0).abs() < 1e-14);
        let second: f64 = grid
            .weights
            .iter()
            .zip(&grid.nodes)
            .map(|(w, x)| w * x * x)
            .sum();
        assert!((second - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn mean_of_simple_profiles() {
        let grid = build_angular_grid(16).unwrap();
        let ones = vec![1.0; grid.len()];
        assert!((grid.mean(&ones) - 1.0).abs() < 1e-15);
        let mu: Vec<f64> = grid.nodes.clone();
        assert!(grid.mean(&mu).abs() < 1e-16);
        let mu2: Vec<f64> = grid.nodes.iter().map(|x| x * x).collect();
        assert!((grid.mean(&mu2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tiny_grid_rejected() {
        assert!(build_angular_grid(1).is_err());
        assert!(build_angular_grid(0).is_err());
    }

    #[test]
    fn normalized_legendre_is_orthonormal_under_bracket() {
        let grid = build_angular_grid(24).unwrap();
        for n in 0..6 {
            for m in 0..6 {
                let prod: f64 = grid
                    .weights
                    .iter()
                    .zip(&grid.nodes)
                    .map(|(&w, &x)| 0.5 * w * normalized_legendre(n, x) * normalized_legendre(m, x))
                    .sum();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((prod - want).abs() < 1e-13, "n = {n}, m = {m}");
            }
        }
    }

    #[test]
    fn half_range_phi_is_orthonormal_on_unit_interval() {
        let rule = GaussRule::legendre_01(32).unwrap();
        for j in 0..8 {
            for k in 0..8 {
                let prod: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| w * half_range_phi(j, x) * half_range_phi(k, x))
                    .sum();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((prod - want).abs() < 1e-13, "j = {j}, k = {k}");
            }
        }
    }

    #[test]
    fn positive_and_negative_split_covers_grid() {
        let grid = build_angular_grid(32).unwrap();
        let pos = grid.positive_indices();
        let neg = grid.negative_indices();
        assert_eq!(pos.len(), 16);
        assert_eq!(neg.len(), 16);
        assert!(pos.iter().all(|&j| grid.nodes[j] > 0.0));
        assert!(neg.iter().all(|&j| grid.nodes[j] < 0.0));
    }
}
