//! Gauss-Legendre quadrature rules and Legendre polynomial evaluation.

use crate::error::{Error, Result};

/// Evaluates the Legendre polynomial P_n(x) by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Evaluates P_n(x) together with its derivative.
///
/// Valid for |x| < 1, which is where Gauss-Legendre nodes live.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    let dp = n as f64 * (prev - x * cur) / (1.0 - x * x);
    (cur, dp)
}

/// A quadrature rule: nodes and matching positive weights.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// n-point Gauss-Legendre rule on [-1, 1].
    ///
    /// Nodes are strictly increasing and exactly symmetric about zero;
    /// weights sum to 2 and integrate polynomials of degree 2n-1 exactly.
    pub fn legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "quadrature rule needs at least one node".into(),
            ));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n / 2;
        for i in 0..half {
            // Newton iteration from the classical cosine initial guess for
            // the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Mirror the root so symmetry holds to the last bit.
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            let (_, dp) = legendre_with_derivative(n, 0.0);
            nodes[half] = 0.0;
            weights[half] = 2.0 / (dp * dp);
        }
        Ok(Self { nodes, weights })
    }

    /// n-point Gauss-Legendre rule mapped affinely to [0, 1].
    pub fn legendre_01(n: usize) -> Result<Self> {
        let base = Self::legendre(n)?;
        Ok(Self {
            nodes: base.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: base.weights.iter().map(|w| 0.5 * w).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature sum of f over the rule's interval.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_is_exact() {
        let rule = GaussRule::legendre(2).unwrap();
        let r = 1.0 / 3.0f64.sqrt();
        assert!((rule.nodes[0] + r).abs() < 1e-15);
        assert!((rule.nodes[1] - r).abs() < 1e-15);
        assert!((rule.weights[0] - 1.0).abs() < 1e-15);
        assert!((rule.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 3, 7, 16, 32, 33, 64] {
            let rule = GaussRule::legendre(n).unwrap();
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n = {n}: sum = {sum}");
            let rule01 = GaussRule::legendre_01(n).unwrap();
            let sum01: f64 = rule01.weights.iter().sum();
            assert!((sum01 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn monomials_integrate_exactly_up_to_degree_2n_minus_1() {
        for n in [2, 5, 12, 32] {
            let rule = GaussRule::legendre(n).unwrap();
            for k in 0..2 * n {
                let got = rule.integrate(|x| x.powi(k as i32));
                let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!(
                    (got - want).abs() < 1e-13,
                    "n = {n}, k = {k}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn mapped_rule_matches_unit_interval_moments() {
        let rule = GaussRule::legendre_01(16).unwrap();
        for k in 0..20 {
            let got = rule.integrate(|x| x.powi(k));
            let want = 1.0 / (k as f64 + 1.0);
            assert!((got - want).abs() < 1e-14, "k = {k}");
        }
        assert!(rule.nodes.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn nodes_are_symmetric_and_increasing() {
        for n in [8, 15, 32] {
            let rule = GaussRule::legendre(n).unwrap();
            for i in 0..n {
                assert_eq!(rule.nodes[i], -rule.nodes[n - 1 - i]);
                assert_eq!(rule.weights[i], rule.weights[n - 1 - i]);
                if i > 0 {
                    assert!(rule.nodes[i] > rule.nodes[i - 1]);
                }
            }
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(GaussRule::legendre(0).is_err());
    }

    #[test]
    fn legendre_values_match_closed_forms() {
        for &x in &[-0.9, -0.3, 0.0, 0.4, 0.77] {
            assert!((legendre(0, x) - 1.0).abs() < 1e-15);
            assert!((legendre(1, x) - x).abs() < 1e-15);
            assert!((legendre(2, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-14);
            assert!(
                (legendre(3, x) - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-14
            );
        }
    }
}
