//! Scattering kernels and the discrete collision operator
//! `L f = f - Int kappa(mu, mu') f(mu') dmu'`.
//!
//! Every supported kernel is a finite Legendre series
//! `kappa(mu, mu') = 1/2 + sum_{n>=1} a_n P_n(mu) P_n(mu')`,
//! which keeps the operator diagonal in the normalized Legendre basis:
//! `L p_n = lambda_n p_n` with `lambda_0 = 0` and
//! `lambda_n = 1 - 2 a_n / (2n+1)` for `n >= 1`.

use nalgebra::{DMatrix, DVector};

use crate::angular::{normalized_legendre, AngularGrid};
use crate::error::{Error, Result};
use crate::quadrature::legendre;

/// Scattering kernel `kappa(mu, mu')`.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `kappa = 1/2`.
    Isotropic,
    /// `kappa = 1/2 + mu mu' / 4`, the anisotropic test kernel.
    Anisotropic,
    /// `kappa = 1/2 + sum_n a_n P_n(mu) P_n(mu')` with the given `a_n`
    /// (the list starts at n = 1).
    LegendreSeries(Vec<f64>),
}

impl Kernel {
    /// Series coefficients `a_n` for n = 1, 2, ... (empty means isotropic).
    pub fn series(&self) -> Vec<f64> {
        match self {
            Kernel::Isotropic => vec![],
            Kernel::Anisotropic => vec![0.25],
            Kernel::LegendreSeries(a) => a.clone(),
        }
    }

    /// Descriptive name used in reports and configuration echoes.
    pub fn name(&self) -> String {
        match self {
            Kernel::Isotropic => "isotropic".into(),
            Kernel::Anisotropic => "anisotropic".into(),
            Kernel::LegendreSeries(a) => format!("legendre-series({} terms)", a.len()),
        }
    }

    /// Pointwise kernel value.
    pub fn kappa(&self, mu: f64, mu_p: f64) -> f64 {
        match self {
            Kernel::Isotropic => 0.5,
            Kernel::Anisotropic => 0.5 + mu * mu_p / 4.0,
            Kernel::LegendreSeries(a) => {
                let mut val = 0.5;
                for (i, &an) in a.iter().enumerate() {
                    let n = i + 1;
                    val += an * legendre(n, mu) * legendre(n, mu_p);
                }
                val
            }
        }
    }

    /// Eigenvalue `lambda_n` of the collision operator on `p_n`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let series = self.series();
        let a_n = series.get(n - 1).copied().unwrap_or(0.0);
        1.0 - 2.0 * a_n / (2 * n + 1) as f64
    }

    /// Checks symmetry is structural, the spectral gap is positive, and the
    /// kernel stays nonnegative on a sample grid.
    pub fn validate(&self) -> Result<()> {
        let series = self.series();
        if series.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidKernel(
                "series coefficients must be finite".into(),
            ));
        }
        for n in 1..=series.len() {
            let lam = self.eigenvalue(n);
            if lam <= 0.0 {
                return Err(Error::InvalidKernel(format!(
                    "eigenvalue lambda_{n} = {lam} violates the spectral gap"
                )));
            }
        }
        let samples = 65;
        for i in 0..samples {
            let mu = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            for j in 0..samples {
                let mu_p = -1.0 + 2.0 * j as f64 / (samples - 1) as f64;
                if self.kappa(mu, mu_p) < -1e-12 {
                    return Err(Error::InvalidKernel(format!(
                        "kernel negative at ({mu}, {mu_p})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Discrete collision operator on an angular grid, carried in the
/// normalized Legendre coefficient space of degree at most `degree`.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    pub grid: AngularGrid,
    pub kernel: Kernel,
    /// Truncation degree M of the coefficient space (modes 0..=M).
    pub degree: usize,
    /// Eigenvalues `lambda_0 = 0, lambda_1, ..., lambda_M` read off the
    /// coefficient-space matrix diagonal.
    pub eigenvalues: Vec<f64>,
    /// Coefficient-space matrix of L (kept for inspection; diagonal for
    /// finite-series kernels).
    pub coeff_matrix: DMatrix<f64>,
    /// Nodal values -> coefficients, `c_n = (1/2) sum_j w_j p_n(mu_j) f_j`.
    to_coeff: DMatrix<f64>,
    /// Coefficients -> nodal values, `f_j = sum_n c_n p_n(mu_j)`.
    from_coeff: DMatrix<f64>,
    /// Spectral gap `sigma_0 = min_{1<=n<=M} lambda_n`.
    pub sigma_0: f64,
}

/// Assembles the collision operator for `kernel` at truncation degree `m` on
/// `grid`, validating the kernel and the quadrature resolution.
pub fn build_collision_operator(
    kernel: &Kernel,
    m: usize,
    grid: &AngularGrid,
) -> Result<CollisionOperator> {
    kernel.validate()?;
    if m < 3 {
        return Err(Error::InvalidArgument(format!(
            "truncation degree must be at least 3, got {m}"
        )));
    }
    let n_mu = grid.len();
    if n_mu < m + 1 {
        return Err(Error::IllPosedDiscretization(format!(
            "{n_mu} angular nodes cannot resolve degree {m} (need at least {})",
            m + 1
        )));
    }
    if kernel.series().len() > m {
        return Err(Error::IllPosedDiscretization(format!(
            "kernel series degree {} exceeds the truncation degree {m}",
            kernel.series().len()
        )));
    }

    // Normalization sum_j w_j kappa(mu_i, mu_j) = 1 at every node, and
    // symmetry at node pairs.
    for i in 0..n_mu {
        let mut row = 0.0;
        for j in 0..n_mu {
            let kij = kernel.kappa(grid.nodes[i], grid.nodes[j]);
            let kji = kernel.kappa(grid.nodes[j], grid.nodes[i]);
            if (kij - kji).abs() > 1e-13 {
                return Err(Error::InvalidKernel(format!(
                    "kernel asymmetric at node pair ({i}, {j})"
                )));
            }
            row += grid.weights[j] * kij;
        }
        if (row - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidKernel(format!(
                "kernel row sum {row} at node {i} is not 1"
            )));
        }
    }

    // Basis value tables.
    let p = DMatrix::from_fn(m + 1, n_mu, |n, j| normalized_legendre(n, grid.nodes[j]));
    let mut to_coeff = p.clone();
    for n in 0..=m {
        for j in 0..n_mu {
            to_coeff[(n, j)] *= 0.5 * grid.weights[j];
        }
    }
    let from_coeff = p.transpose();

    // Coefficient-space matrix of L = I - K by double quadrature.
    let mut k_coeff = DMatrix::zeros(m + 1, m + 1);
    for row in 0..=m {
        for col in 0..=m {
            let mut acc = 0.0;
            for i in 0..n_mu {
                let mut inner = 0.0;
                for j in 0..n_mu {
                    inner += grid.weights[j]
                        * kernel.kappa(grid.nodes[i], grid.nodes[j])
                        * p[(col, j)];
                }
                acc += 0.5 * grid.weights[i] * p[(row, i)] * inner;
            }
            k_coeff[(row, col)] = acc;
        }
    }
    let mut coeff_matrix = DMatrix::identity(m + 1, m + 1) - &k_coeff;

    // The matrix must be symmetric and, for series kernels, diagonal.
    for row in 0..=m {
        for col in 0..=m {
            if (coeff_matrix[(row, col)] - coeff_matrix[(col, row)]).abs() > 1e-12 {
                return Err(Error::DegenerateSystem(
                    "coefficient-space collision matrix lost symmetry".into(),
                ));
            }
            if row != col && coeff_matrix[(row, col)].abs() > 1e-10 {
                return Err(Error::DegenerateSystem(format!(
                    "off-diagonal coupling {} at ({row}, {col})",
                    coeff_matrix[(row, col)]
                )));
            }
        }
    }
    if coeff_matrix[(0, 0)].abs() > 1e-13 {
        return Err(Error::DegenerateSystem(format!(
            "constant mode eigenvalue {} is not zero",
            coeff_matrix[(0, 0)]
        )));
    }
    // The constant mode is in the null space exactly.
    coeff_matrix[(0, 0)] = 0.0;

    let eigenvalues: Vec<f64> = (0..=m).map(|n| coeff_matrix[(n, n)]).collect();
    let sigma_0 = eigenvalues[1..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(sigma_0 > 0.0) {
        return Err(Error::InvalidKernel(format!(
            "discrete spectral gap {sigma_0} is not positive"
        )));
    }

    Ok(CollisionOperator {
        grid: grid.clone(),
        kernel: kernel.clone(),
        degree: m,
        eigenvalues,
        coeff_matrix,
        to_coeff,
        from_coeff,
        sigma_0,
    })
}

impl CollisionOperator {
    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                self.grid.len(),
                f.len()
            )));
        }
        Ok(())
    }

    /// Coefficients of the nodal vector in the p_n basis.
    pub fn coefficients(&self, f: &[f64]) -> Result<DVector<f64>> {
        self.check_len(f)?;
        Ok(&self.to_coeff * DVector::from_column_slice(f))
    }

    /// Applies L to nodal values.
    ///
    /// The scattering part of L has finite Legendre rank, so
    /// `L f = f - sum_n (1 - lambda_n) c_n p_n` is exact on the grid.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let c = self.coefficients(f)?;
        let scaled = DVector::from_fn(c.len(), |n, _| (1.0 - self.eigenvalues[n]) * c[n]);
        let scatter = &self.from_coeff * scaled;
        Ok(f.iter().zip(scatter.iter()).map(|(v, s)| v - s).collect())
    }

    /// Applies the pseudo-inverse of L to a mean-zero nodal vector.
    pub fn apply_inverse(&self, g: &[f64]) -> Result<Vec<f64>> {
        let tol_mean = 1e-10;
        let c = self.coefficients(g)?;
        if c[0].abs() > tol_mean {
            return Err(Error::NotInRange(format!(
                "mean {} exceeds the pseudo-inverse tolerance {tol_mean}",
                c[0]
            )));
        }
        // h = g - c_0 p_0 + sum_{n>=1} (1/lambda_n - 1) c_n p_n; the part of g
        // outside the represented modes has eigenvalue 1 and passes through.
        let adjust = DVector::from_fn(c.len(), |n, _| {
            if n == 0 {
                -c[0]
            } else {
                (1.0 / self.eigenvalues[n] - 1.0) * c[n]
            }
        });
        let corr = &self.from_coeff * adjust;
        Ok(g.iter().zip(corr.iter()).map(|(v, s)| v + s).collect())
    }

    /// Diffusion coefficient `<mu L^{-1} mu>`.
    pub fn diffusion_coefficient(&self) -> f64 {
        let mu = self.grid.nodes.clone();
        let h = self
            .apply_inverse(&mu)
            .expect("mu is mean-zero on a symmetric grid");
        0.5 * self
            .grid
            .weights
            .iter()
            .zip(self.grid.nodes.iter().zip(&h))
            .map(|(&w, (&m, &v))| w * m * v)
            .sum::<f64>()
    }

    /// Nodal matrix of `exp(-rate * L)`.
    ///
    /// Modes beyond the truncation degree relax at unit eigenvalue, so the
    /// matrix is `e^{-rate} I + V diag(e^{-lambda_n rate} - e^{-rate}) T`.
    pub fn relaxation_matrix(&self, rate: f64) -> Result<DMatrix<f64>> {
        if !(rate >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "relaxation rate must be nonnegative, got {rate}"
            )));
        }
        let tail = (-rate).exp();
        let mut scaled = self.from_coeff.clone();
        for n in 0..=self.degree {
            let factor = (-self.eigenvalues[n] * rate).exp() - tail;
            for j in 0..self.grid.len() {
                scaled[(j, n)] *= factor;
            }
        }
        let mut e = &scaled * &self.to_coeff;
        for j in 0..self.grid.len() {
            e[(j, j)] += tail;
        }
        Ok(e)
    }
}
