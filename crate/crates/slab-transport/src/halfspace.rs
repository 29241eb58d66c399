//! Spectral solver for the kinetic half-space problem
//! `mu d/dy f + L f = 0` on `y in [0, inf)`, `f(0, mu) = f0(mu)` for `mu > 0`,
//! with `f` bounded at infinity.
//!
//! The solver works on a damped reformulation. The damped operator
//! `L^d f = L f + alpha mu <mu, f> + alpha d <d, f>` with `d = mu (L^-1 mu)`
//! removes the flux and diffusion invariants that make the plain operator's
//! end state implicit, at the price of solving for a modified field. The
//! bounded damped solution decays to zero, so expanding in half-range
//! Legendre polynomials (even and odd in `mu`) turns the problem into a
//! generalized eigenvalue pencil plus a square constraint system for the
//! boundary coefficients. The physical solution is recovered afterwards:
//! `f = f_damped - theta_inf (g0_damped - 1)`, where `g0` is the damped
//! solution for incoming data identically one and
//! `theta_inf = <mu, f_damped(0)> / <mu, g0_damped(0)>` is the end state.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Schur, LU};

use crate::angular::half_range_phi;
use crate::collision::{CollisionOperator, Kernel};
use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// Half-range Legendre basis `phi_k(nu) = sqrt(2k+1) P_k(2 nu - 1)` on
/// `[0, 1]`, with its even/odd extensions to `[-1, 1]` and the Gauss rule
/// used for all half-range integrals.
#[derive(Debug, Clone)]
pub struct HalfSpaceBasis {
    /// Number of even modes N; odd modes number N + 1.
    pub order: usize,
    /// Gauss rule on [0, 1] with N_q = max(2N + 8, 32) nodes.
    pub rule: GaussRule,
    /// Table phi[(k, q)] = phi_k(nu_q), k = 0..=N.
    phi: DMatrix<f64>,
}

impl HalfSpaceBasis {
    fn new(order: usize) -> Result<Self> {
        let n_q = (2 * order + 8).max(32);
        let rule = GaussRule::legendre_01(n_q)?;
        let phi = DMatrix::from_fn(order + 1, n_q, |k, q| half_range_phi(k, rule.nodes[q]));
        Ok(HalfSpaceBasis { order, rule, phi })
    }

    /// Even extension `phi^E_k(mu) = phi_k(|mu|)`.
    pub fn even(&self, k: usize, mu: f64) -> f64 {
        half_range_phi(k, mu.abs())
    }

    /// Odd extension `phi^O_k(mu) = sign(mu) phi_k(|mu|)`.
    pub fn odd(&self, k: usize, mu: f64) -> f64 {
        let sign = if mu >= 0.0 { 1.0 } else { -1.0 };
        sign * half_range_phi(k, mu.abs())
    }
}

/// Assembled and factorized half-space solver for one (kernel, N, alpha).
///
/// Building is the expensive part; each solve afterwards is one triangular
/// pair of substitutions, so a system can be cached and reused across time
/// steps and albedo columns.
#[derive(Debug, Clone)]
pub struct HalfSpaceSystem {
    pub basis: HalfSpaceBasis,
    pub alpha: f64,
    pub kernel: Kernel,
    /// Eigenvalue of the collision operator on the first Legendre mode,
    /// entering the damping direction d = mu^2 / lambda_1.
    pub lambda1: f64,
    /// Flux pairing matrix `A^mu_{ij} = 2 int_0^1 nu phi_i phi_j dnu`.
    pub a_mu: DMatrix<f64>,
    /// Pencil eigenvalues, in Schur order.
    pub eigenvalues: Vec<f64>,
    pub positive: Vec<usize>,
    pub zero: Vec<usize>,
    pub negative: Vec<usize>,
    /// 1-norm condition number of the constraint matrix.
    pub constraint_condition: f64,
    dim: usize,
    /// Upper factor C^T with A = C C^T.
    chol_lt: DMatrix<f64>,
    /// Columns: eigenvectors of M = C^-1 B^T C^-T.
    w_mat: DMatrix<f64>,
    /// Columns: eigenvectors of M^T, paired with `w_mat` by index.
    u_mat: DMatrix<f64>,
    /// Columns: pencil mode shapes C^-T u_m for profile reconstruction.
    mode_vectors: DMatrix<f64>,
    /// Assembled constraint matrix (incoming rows, then exclusion rows).
    pub s_matrix: DMatrix<f64>,
    constraints: LU<f64, Dyn, Dyn>,
    /// Flux covector on the odd coefficients: <mu, f(0)> = t . c^O.
    t_vec: DVector<f64>,
    c_g0: DVector<f64>,
    g0_amplitudes: DVector<f64>,
    flux_g0: f64,
}

/// Damped boundary solve for one incoming datum, with the recovery applied.
#[derive(Debug, Clone)]
pub struct HalfSpaceSolution {
    /// Damped boundary coefficients, odd block then even block.
    pub c0: DVector<f64>,
    /// End state of the recovered solution at y -> infinity.
    pub theta_inf: f64,
    /// Outgoing directions mu < 0 where the trace was evaluated.
    pub outgoing_mu: Vec<f64>,
    /// Recovered outgoing trace f(0, mu) at those directions.
    pub outgoing_trace: Vec<f64>,
    /// Amplitudes of the decaying modes, aligned with `negative`.
    pub amplitudes: DVector<f64>,
}

/// Discrete albedo operator: outgoing nodal values and the end state as
/// linear functions of incoming nodal values.
#[derive(Debug, Clone)]
pub struct AlbedoMap {
    /// Outgoing values = R . incoming values.
    pub r: DMatrix<f64>,
    /// End state = w_inf . incoming values.
    pub w_inf: DVector<f64>,
    pub incoming_mu: Vec<f64>,
    pub outgoing_mu: Vec<f64>,
}

impl AlbedoMap {
    pub fn apply(&self, incoming: &[f64]) -> DVector<f64> {
        &self.r * DVector::from_column_slice(incoming)
    }

    pub fn theta(&self, incoming: &[f64]) -> f64 {
        self.w_inf.dot(&DVector::from_column_slice(incoming))
    }
}

fn norm_1(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Right null vector of (T - lam I) for upper quasi-triangular T, seeded on
/// the eigenvalue's own diagonal block and back-substituted upwards. 2x2
/// blocks above are solved jointly; near-singular pivots are floored so a
/// clustered eigenvalue degrades gracefully instead of overflowing.
fn schur_right_vector(
    t: &DMatrix<f64>,
    lam: f64,
    lead: usize,
    seed: &[f64],
    blk_tol: f64,
    guard: f64,
) -> DVector<f64> {
    let n = t.nrows();
    let mut y = DVector::zeros(n);
    for (i, &s) in seed.iter().enumerate() {
        y[lead + i] = s;
    }
    let mut j = lead as isize - 1;
    while j >= 0 {
        let jj = j as usize;
        let paired = jj > 0 && t[(jj, jj - 1)].abs() > blk_tol;
        if paired {
            let (i0, i1) = (jj - 1, jj);
            let mut r0 = 0.0;
            let mut r1 = 0.0;
            for l in (i1 + 1)..n {
                r0 += t[(i0, l)] * y[l];
                r1 += t[(i1, l)] * y[l];
            }
            let a00 = t[(i0, i0)] - lam;
            let a01 = t[(i0, i1)];
            let a10 = t[(i1, i0)];
            let a11 = t[(i1, i1)] - lam;
            let mut det = a00 * a11 - a01 * a10;
            let floor = guard * guard;
            if det.abs() < floor {
                det = if det < 0.0 { -floor } else { floor };
            }
            y[i0] = (-r0 * a11 + r1 * a01) / det;
            y[i1] = (-r1 * a00 + r0 * a10) / det;
            j -= 2;
        } else {
            let mut r = 0.0;
            for l in (jj + 1)..n {
                r += t[(jj, l)] * y[l];
            }
            let mut piv = t[(jj, jj)] - lam;
            if piv.abs() < guard {
                piv = if piv < 0.0 { -guard } else { guard };
            }
            y[jj] = -r / piv;
            j -= 1;
        }
    }
    y
}

/// Right null vector of (T^T - lam I), i.e. the forward-substitution mirror
/// of `schur_right_vector` on the transposed (lower quasi-triangular) factor.
fn schur_left_vector(
    t: &DMatrix<f64>,
    lam: f64,
    lead: usize,
    trail: usize,
    seed: &[f64],
    blk_tol: f64,
    guard: f64,
) -> DVector<f64> {
    let n = t.nrows();
    let mut z = DVector::zeros(n);
    for (i, &s) in seed.iter().enumerate() {
        z[lead + i] = s;
    }
    let mut j = trail + 1;
    while j < n {
        let paired = j + 1 < n && t[(j + 1, j)].abs() > blk_tol;
        if paired {
            let (i0, i1) = (j, j + 1);
            let mut r0 = 0.0;
            let mut r1 = 0.0;
            for l in 0..i0 {
                r0 += t[(l, i0)] * z[l];
                r1 += t[(l, i1)] * z[l];
            }
            let a00 = t[(i0, i0)] - lam;
            let a01 = t[(i1, i0)];
            let a10 = t[(i0, i1)];
            let a11 = t[(i1, i1)] - lam;
            let mut det = a00 * a11 - a01 * a10;
            let floor = guard * guard;
            if det.abs() < floor {
                det = if det < 0.0 { -floor } else { floor };
            }
            z[i0] = (-r0 * a11 + r1 * a01) / det;
            z[i1] = (-r1 * a00 + r0 * a10) / det;
            j += 2;
        } else {
            let mut r = 0.0;
            for l in 0..j {
                r += t[(l, j)] * z[l];
            }
            let mut piv = t[(j, j)] - lam;
            if piv.abs() < guard {
                piv = if piv < 0.0 { -guard } else { guard };
            }
            z[j] = -r / piv;
            j += 1;
        }
    }
    z
}

/// Full real eigensystem of a small matrix with real spectrum: eigenvalues
/// plus paired right eigenvectors of M and of M^T, all from one real Schur
/// decomposition so the pairing is by construction.
fn real_schur_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        Error::DegenerateSystem("real Schur iteration failed to converge".into())
    })?;
    let (q, t) = schur.unpack();
    let tnorm = t.amax().max(1e-300);
    let blk_tol = 1e-14 * tnorm;
    let guard = 1e-12 * tnorm;

    let mut values = Vec::with_capacity(n);
    let mut w_mat = DMatrix::zeros(n, n);
    let mut u_mat = DMatrix::zeros(n, n);
    let mut col = 0usize;
    let push = |lam: f64,
                    lead: usize,
                    trail: usize,
                    y_seed: &[f64],
                    z_seed: &[f64],
                    col: &mut usize,
                    values: &mut Vec<f64>,
                    w_mat: &mut DMatrix<f64>,
                    u_mat: &mut DMatrix<f64>| {
        let y = schur_right_vector(&t, lam, lead, y_seed, blk_tol, guard);
        let z = schur_left_vector(&t, lam, lead, trail, z_seed, blk_tol, guard);
        let mut w = &q * y;
        let mut u = &q * z;
        w /= w.norm();
        u /= u.norm();
        w_mat.set_column(*col, &w);
        u_mat.set_column(*col, &u);
        values.push(lam);
        *col += 1;
    };

    let mut k = 0usize;
    while k < n {
        let paired = k + 1 < n && t[(k + 1, k)].abs() > blk_tol;
        if !paired {
            let lam = t[(k, k)];
            push(lam, k, k, &[1.0], &[1.0], &mut col, &mut values, &mut w_mat, &mut u_mat);
            k += 1;
        } else {
            let a = t[(k, k)];
            let b = t[(k, k + 1)];
            let c = t[(k + 1, k)];
            let d = t[(k + 1, k + 1)];
            let mid = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc < 0.0 {
                let imag = (-disc).sqrt();
                if imag > 1e-10 * mid.abs().max(1.0) {
                    return Err(Error::DegenerateSystem(format!(
                        "complex eigenvalue pair {mid} +/- {imag}i in the half-space pencil"
                    )));
                }
            }
            let root = disc.max(0.0).sqrt();
            for lam in [mid + root, mid - root] {
                let y_seed = if b.abs() + (lam - a).abs() >= (lam - d).abs() + c.abs() {
                    [b, lam - a]
                } else {
                    [lam - d, c]
                };
                let z_seed = if c.abs() + (lam - a).abs() >= (lam - d).abs() + b.abs() {
                    [c, lam - a]
                } else {
                    [lam - d, b]
                };
                push(lam, k, k + 1, &y_seed, &z_seed, &mut col, &mut values, &mut w_mat, &mut u_mat);
            }
            k += 2;
        }
    }

    let m_t = m.transpose();
    for (i, &lam) in values.iter().enumerate() {
        let w = w_mat.column(i);
        let u = u_mat.column(i);
        let res_w = (m * w - lam * w).amax();
        let res_u = (&m_t * u - lam * u).amax();
        if res_w > 1e-6 * tnorm || res_u > 1e-6 * tnorm {
            return Err(Error::DegenerateSystem(format!(
                "eigenvector residual {:.3e} at eigenvalue {lam}",
                res_w.max(res_u)
            )));
        }
    }
    Ok((values, w_mat, u_mat))
}

/// Assembles and factorizes the half-space system for the collision
/// operator's kernel at basis order `n` with damping `alpha`.
pub fn build_halfspace_system(
    op: &CollisionOperator,
    n: usize,
    alpha: f64,
) -> Result<HalfSpaceSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "basis order must be at least 2, got {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1), got {alpha}"
        )));
    }
    let kernel = op.kernel.clone();
    let lambda1 = op.eigenvalues[1];
    let basis = HalfSpaceBasis::new(n)?;
    let rule = &basis.rule;
    let n_q = rule.len();
    let phi = &basis.phi;

    let mut a_mu = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            let mut acc = 0.0;
            for q in 0..n_q {
                acc += rule.weights[q] * rule.nodes[q] * phi[(i, q)] * phi[(j, q)];
            }
            a_mu[(i, j)] = 2.0 * acc;
        }
    }

    // Galerkin pairings of the damped scattering terms against the basis,
    // folded over both half-ranges: even/odd reflections of the kernel.
    let k_even = DMatrix::from_fn(n_q, n_q, |qa, qb| {
        let (x, y) = (rule.nodes[qa], rule.nodes[qb]);
        kernel.kappa(x, y) + kernel.kappa(x, -y) + kernel.kappa(-x, y) + kernel.kappa(-x, -y)
    });
    let k_odd = DMatrix::from_fn(n_q, n_q, |qa, qb| {
        let (x, y) = (rule.nodes[qa], rule.nodes[qb]);
        kernel.kappa(x, y) - kernel.kappa(x, -y) - kernel.kappa(-x, y) + kernel.kappa(-x, -y)
    });
    let phi_w = DMatrix::from_fn(n + 1, n_q, |k, q| phi[(k, q)] * rule.weights[q]);
    let g_even = &phi_w * &k_even * phi_w.transpose();
    let g_odd = &phi_w * &k_odd * phi_w.transpose();

    let t_vec = DVector::from_fn(n + 1, |k, _| {
        (0..n_q)
            .map(|q| rule.weights[q] * rule.nodes[q] * phi[(k, q)])
            .sum()
    });
    let s_vec = DVector::from_fn(n + 1, |k, _| {
        (0..n_q)
            .map(|q| rule.weights[q] * rule.nodes[q] * rule.nodes[q] / lambda1 * phi[(k, q)])
            .sum()
    });

    let s_even =
        DMatrix::identity(n + 1, n + 1) * 2.0 - &g_even + 2.0 * alpha * &s_vec * s_vec.transpose();
    let s_odd =
        DMatrix::identity(n + 1, n + 1) * 2.0 - &g_odd + 2.0 * alpha * &t_vec * t_vec.transpose();

    // Unknown layout: c = [c^O (N+1) ; c^E (N)]. Row layout: even-parity
    // tests (N+1) then odd-parity tests (N). The transport term pairs like
    // parities through A^mu; the collision term couples across.
    let dim = 2 * n + 1;
    let mut a = DMatrix::zeros(dim, dim);
    a.view_mut((0, 0), (n + 1, n + 1)).copy_from(&a_mu);
    a.view_mut((n + 1, n + 1), (n, n))
        .copy_from(&a_mu.view((0, 0), (n, n)));
    let mut b = DMatrix::zeros(dim, dim);
    for i in 0..=n {
        for j in 0..n {
            b[(i, n + 1 + j)] = -s_even[(i, j)];
        }
    }
    for i in 0..n {
        for j in 0..=n {
            b[(n + 1 + i, j)] = -s_odd[(i, j)];
        }
    }

    // Pencil B^T v = lambda A v reduced with A = C C^T to the standard
    // problem M w = lambda w, M = C^-1 B^T C^-T, w = C^T v.
    let chol = Cholesky::new(a.clone()).ok_or_else(|| {
        Error::DegenerateSystem("flux pairing matrix is not positive definite".into())
    })?;
    let c_l = chol.l();
    let x = c_l
        .solve_lower_triangular(&b.transpose())
        .ok_or_else(|| Error::DegenerateSystem("singular Cholesky factor".into()))?;
    let y = c_l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::DegenerateSystem("singular Cholesky factor".into()))?;
    let m_mat = y.transpose();

    let (eigenvalues, w_mat, u_mat) = real_schur_eigen(&m_mat)?;

    let scale = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol_zero = 1e-9 * scale;
    let mut positive = Vec::new();
    let mut zero = Vec::new();
    let mut negative = Vec::new();
    for (i, &lam) in eigenvalues.iter().enumerate() {
        if lam.abs() <= tol_zero {
            zero.push(i);
        } else if lam > 0.0 {
            positive.push(i);
        } else {
            negative.push(i);
        }
    }
    if positive.len() != n || zero.len() != 1 || negative.len() != n {
        return Err(Error::DegenerateSystem(format!(
            "eigenvalue counts (+{}, 0x{}, -{}) at order {n}, expected ({n}, 1, {n}); spectrum: {:?}",
            positive.len(),
            zero.len(),
            negative.len(),
            eigenvalues
        )));
    }

    let chol_lt = c_l.transpose();
    let mode_vectors = chol_lt
        .solve_upper_triangular(&u_mat)
        .ok_or_else(|| Error::DegenerateSystem("singular Cholesky factor".into()))?;

    // Constraint rows: N incoming-data pairings, then exclusion of every
    // nonnegative mode. The exclusion row for mode m is v_m^T A = (C w_m)^T.
    let mut s_matrix = DMatrix::zeros(dim, dim);
    for j in 0..n {
        for k in 0..=n {
            s_matrix[(j, k)] = a_mu[(j, k)];
        }
        for k in 0..n {
            s_matrix[(j, n + 1 + k)] = a_mu[(j, k)];
        }
    }
    for (offset, &m_idx) in positive.iter().chain(zero.iter()).enumerate() {
        let cw = &c_l * w_mat.column(m_idx);
        for k in 0..dim {
            s_matrix[(n + offset, k)] = cw[k];
        }
    }
    let constraints = LU::new(s_matrix.clone());
    let inv = constraints.solve(&DMatrix::identity(dim, dim)).ok_or_else(|| {
        Error::IllPosedDiscretization("constraint matrix is singular".into())
    })?;
    let constraint_condition = norm_1(&s_matrix) * norm_1(&inv);

    let mut system = HalfSpaceSystem {
        basis,
        alpha,
        kernel,
        lambda1,
        a_mu,
        eigenvalues,
        positive,
        zero,
        negative,
        constraint_condition,
        dim,
        chol_lt,
        w_mat,
        u_mat,
        mode_vectors,
        s_matrix,
        constraints,
        t_vec,
        c_g0: DVector::zeros(dim),
        g0_amplitudes: DVector::zeros(0),
        flux_g0: 1.0,
    };

    let ones = vec![1.0; n_q];
    let c_g0 = system.solve_damped(&ones)?;
    let flux_g0 = system.flux(&c_g0);
    if flux_g0.abs() < 1e-12 {
        return Err(Error::DivisionDegenerate(format!(
            "reference boundary flux {flux_g0} vanishes"
        )));
    }
    system.flux_g0 = flux_g0;
    system.g0_amplitudes = system.amplitudes(&c_g0)?;
    system.c_g0 = c_g0;
    Ok(system)
}

impl HalfSpaceSystem {
    /// Evaluates incoming data at the half-range quadrature nodes.
    pub fn incoming_samples<F: Fn(f64) -> f64>(&self, f0: F) -> Vec<f64> {
        self.basis.rule.nodes.iter().map(|&nu| f0(nu)).collect()
    }

    fn incoming_rhs(&self, f0: &[f64]) -> Result<DVector<f64>> {
        let rule = &self.basis.rule;
        if f0.len() != rule.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} incoming samples, got {}",
                rule.len(),
                f0.len()
            )));
        }
        let n = self.basis.order;
        let mut rhs = DVector::zeros(self.dim);
        for j in 0..n {
            let mut acc = 0.0;
            for (q, &v) in f0.iter().enumerate() {
                acc += rule.weights[q] * rule.nodes[q] * v * self.basis.phi[(j, q)];
            }
            rhs[j] = 2.0 * acc;
        }
        Ok(rhs)
    }

    /// Solves for the damped boundary coefficients given incoming samples at
    /// the system's half-range quadrature nodes.
    pub fn solve_damped(&self, f0: &[f64]) -> Result<DVector<f64>> {
        let rhs = self.incoming_rhs(f0)?;
        self.constraints
            .solve(&rhs)
            .ok_or_else(|| Error::IllPosedDiscretization("constraint matrix is singular".into()))
    }

    /// Boundary flux `<mu, f_damped(0, .)>` of a coefficient vector.
    pub fn flux(&self, c: &DVector<f64>) -> f64 {
        let n = self.basis.order;
        (0..=n).map(|k| self.t_vec[k] * c[k]).sum()
    }

    /// Damped field value at the boundary from coefficients, any `mu`.
    fn damped_value(&self, c: &DVector<f64>, mu: f64) -> f64 {
        let n = self.basis.order;
        let a = mu.abs();
        let sign = if mu >= 0.0 { 1.0 } else { -1.0 };
        let mut even = 0.0;
        for k in 0..n {
            even += c[n + 1 + k] * half_range_phi(k, a);
        }
        let mut odd = 0.0;
        for k in 0..=n {
            odd += c[k] * half_range_phi(k, a);
        }
        even + sign * odd
    }

    /// Amplitudes of the decaying modes in a boundary coefficient vector,
    /// via the biorthogonal pairing from the shared Schur factorization.
    fn amplitudes(&self, c0: &DVector<f64>) -> Result<DVector<f64>> {
        let d0 = &self.chol_lt * c0;
        let mut amps = DVector::zeros(self.negative.len());
        for (i, &m_idx) in self.negative.iter().enumerate() {
            let w = self.w_mat.column(m_idx);
            let u = self.u_mat.column(m_idx);
            let denom = w.dot(&u);
            if denom.abs() < 1e-12 {
                return Err(Error::DegenerateSystem(
                    "degenerate eigenvector pairing in amplitude extraction".into(),
                ));
            }
            amps[i] = w.dot(&d0) / denom;
        }
        Ok(amps)
    }

    fn profile_coefficients(&self, amps: &DVector<f64>, y: f64) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for (i, &m_idx) in self.negative.iter().enumerate() {
            let decay = (self.eigenvalues[m_idx] * y).exp();
            c.axpy(amps[i] * decay, &self.mode_vectors.column(m_idx), 1.0);
        }
        c
    }

    /// Solves the half-space problem and evaluates the recovered trace
    /// `f(0, mu) = f_damped(0, mu) - theta_inf (g0_damped(0, mu) - 1)` at the
    /// given outgoing directions (all `mu < 0`).
    pub fn recover_solution(&self, f0: &[f64], outgoing_mu: &[f64]) -> Result<HalfSpaceSolution> {
        if outgoing_mu.iter().any(|&mu| mu >= 0.0) {
            return Err(Error::InvalidArgument(
                "outgoing directions must be negative".into(),
            ));
        }
        let c0 = self.solve_damped(f0)?;
        let theta_inf = self.flux(&c0) / self.flux_g0;
        let outgoing_trace = outgoing_mu
            .iter()
            .map(|&mu| {
                self.damped_value(&c0, mu) - theta_inf * (self.damped_value(&self.c_g0, mu) - 1.0)
            })
            .collect();
        let amplitudes = self.amplitudes(&c0)?;
        Ok(HalfSpaceSolution {
            c0,
            theta_inf,
            outgoing_mu: outgoing_mu.to_vec(),
            outgoing_trace,
            amplitudes,
        })
    }

    /// Recovered solution value at depth `y >= 0` and direction `mu`,
    /// reconstructed from the decaying modes.
    pub fn evaluate_profile(&self, sol: &HalfSpaceSolution, y: f64, mu: f64) -> f64 {
        debug_assert!(y >= 0.0);
        let c_f = self.profile_coefficients(&sol.amplitudes, y);
        let c_g = self.profile_coefficients(&self.g0_amplitudes, y);
        self.damped_value(&c_f, mu) - sol.theta_inf * (self.damped_value(&c_g, mu) - 1.0)
    }

    /// Builds the albedo operator between nodal grids: `incoming` holds the
    /// positive directions (ascending), `outgoing` the negative ones
    /// (ascending). Incoming nodal data is lifted to the quadrature nodes by
    /// local cubic Lagrange interpolation, so the map is exact for nodal
    /// samples of cubics.
    pub fn albedo_map(&self, incoming: &[f64], outgoing: &[f64]) -> Result<AlbedoMap> {
        let h = incoming.len();
        if h < 4 {
            return Err(Error::InvalidArgument(
                "albedo map needs at least 4 incoming directions".into(),
            ));
        }
        if incoming.windows(2).any(|w| w[1] <= w[0])
            || incoming.iter().any(|&mu| mu <= 0.0 || mu > 1.0)
        {
            return Err(Error::InvalidArgument(
                "incoming directions must be ascending in (0, 1]".into(),
            ));
        }
        if outgoing.windows(2).any(|w| w[1] <= w[0])
            || outgoing.iter().any(|&mu| !(-1.0..0.0).contains(&mu))
        {
            return Err(Error::InvalidArgument(
                "outgoing directions must be ascending in [-1, 0)".into(),
            ));
        }
        let rule = &self.basis.rule;
        let n_q = rule.len();
        let mut lift = DMatrix::zeros(n_q, h);
        for q in 0..n_q {
            let nu = rule.nodes[q];
            let pos = incoming.partition_point(|&x| x < nu);
            let lo = pos.saturating_sub(2).min(h - 4);
            let window = &incoming[lo..lo + 4];
            for i in 0..4 {
                let mut ell = 1.0;
                for j in 0..4 {
                    if j != i {
                        ell *= (nu - window[j]) / (window[i] - window[j]);
                    }
                }
                lift[(q, lo + i)] = ell;
            }
        }

        let mut r = DMatrix::zeros(outgoing.len(), h);
        let mut w_inf = DVector::zeros(h);
        let mut data = vec![0.0; n_q];
        for i in 0..h {
            for q in 0..n_q {
                data[q] = lift[(q, i)];
            }
            let c0 = self.solve_damped(&data)?;
            let theta = self.flux(&c0) / self.flux_g0;
            w_inf[i] = theta;
            for (o, &mu) in outgoing.iter().enumerate() {
                r[(o, i)] =
                    self.damped_value(&c0, mu) - theta * (self.damped_value(&self.c_g0, mu) - 1.0);
            }
        }
        Ok(AlbedoMap {
            r,
            w_inf,
            incoming_mu: incoming.to_vec(),
            outgoing_mu: outgoing.to_vec(),
        })
    }

    /// Covector giving the end state directly from incoming samples at the
    /// quadrature nodes: `theta_inf = W . f0(nodes)`.
    pub fn end_state_covector(&self) -> Result<DVector<f64>> {
        let n_q = self.basis.rule.len();
        let mut w = DVector::zeros(n_q);
        let mut data = vec![0.0; n_q];
        for q in 0..n_q {
            data[q] = 1.0;
            let c0 = self.solve_damped(&data)?;
            w[q] = self.flux(&c0) / self.flux_g0;
            data[q] = 0.0;
        }
        Ok(w)
    }
}

/// End state of the half-space problem with incoming data `f0(mu) = mu`.
pub fn end_state_eta(op: &CollisionOperator, n: usize, alpha: f64) -> Result<f64> {
    let system = build_halfspace_system(op, n, alpha)?;
    let samples = system.incoming_samples(|mu| mu);
    let c0 = system.solve_damped(&samples)?;
    Ok(system.flux(&c0) / system.flux_g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::build_angular_grid;
    use crate::collision::build_collision_operator;

    fn operator(kernel: Kernel) -> CollisionOperator {
        let grid = build_angular_grid(32).unwrap();
        build_collision_operator(&kernel, 31, &grid).unwrap()
    }

    fn system(kernel: Kernel, n: usize, alpha: f64) -> HalfSpaceSystem {
        build_halfspace_system(&operator(kernel), n, alpha).unwrap()
    }

    fn pseudo_random(len: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).max(1);
        (0..len)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 + 0.5
            })
            .collect()
    }

    #[test]
    fn flux_pairing_first_entry_is_one() {
        let sys = system(Kernel::Anisotropic, 8, 0.1);
        assert!((sys.a_mu[(0, 0)] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn basis_extensions_are_orthonormal() {
        let sys = system(Kernel::Anisotropic, 6, 0.1);
        let rule = &sys.basis.rule;
        for i in 0..=6usize {
            for j in 0..=6usize {
                // <phi^E_i phi^E_j> and <phi^O_i phi^O_j> reduce to the
                // unit-interval pairing; the cross pairing vanishes by parity.
                let mut acc = 0.0;
                for q in 0..rule.len() {
                    acc += rule.weights[q]
                        * half_range_phi(i, rule.nodes[q])
                        * half_range_phi(j, rule.nodes[q]);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-12);
                let mu = 0.37;
                let cross = sys.basis.even(i, mu) * sys.basis.odd(j, mu)
                    + sys.basis.even(i, -mu) * sys.basis.odd(j, -mu);
                assert!(cross.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigenvalue_counts_hold() {
        for kernel in [Kernel::Anisotropic, Kernel::Isotropic] {
            for n in [4usize, 8, 12] {
                let sys = system(kernel.clone(), n, 0.1);
                assert_eq!(sys.positive.len(), n);
                assert_eq!(sys.zero.len(), 1);
                assert_eq!(sys.negative.len(), n);
            }
        }
        for alpha in [0.05, 0.2] {
            let sys = system(Kernel::Anisotropic, 8, alpha);
            assert_eq!((sys.positive.len(), sys.zero.len(), sys.negative.len()), (8, 1, 8));
        }
    }

    #[test]
    fn constant_data_is_reproduced() {
        let sys = system(Kernel::Anisotropic, 12, 0.1);
        let c = 2.3;
        let samples = sys.incoming_samples(|_| c);
        let sol = sys
            .recover_solution(&samples, &[-1.0, -0.77, -0.3, -0.05])
            .unwrap();
        assert!((sol.theta_inf - c).abs() < 1e-8);
        for v in &sol.outgoing_trace {
            assert!((v - c).abs() < 1e-8);
        }
    }

    #[test]
    fn solve_is_linear_and_zero_on_zero() {
        let sys = system(Kernel::Anisotropic, 8, 0.1);
        let zeros = vec![0.0; sys.basis.rule.len()];
        let c0 = sys.solve_damped(&zeros).unwrap();
        assert!(c0.amax() < 1e-14);

        let f = sys.incoming_samples(|mu| mu);
        let g = sys.incoming_samples(|mu| mu * mu);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let sol_f = sys.recover_solution(&f, &[-0.5]).unwrap();
        let sol_g = sys.recover_solution(&g, &[-0.5]).unwrap();
        let sol_c = sys.recover_solution(&combo, &[-0.5]).unwrap();
        assert!((sol_c.theta_inf - (2.0 * sol_f.theta_inf - 3.0 * sol_g.theta_inf)).abs() < 1e-12);
        let doubled: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        let c_single = sys.solve_damped(&f).unwrap();
        let c_double = sys.solve_damped(&doubled).unwrap();
        assert!((&c_double - 2.0 * &c_single).amax() < 1e-12);
    }

    #[test]
    fn constraint_residual_is_tiny() {
        let sys = system(Kernel::Anisotropic, 10, 0.1);
        let f0 = pseudo_random(sys.basis.rule.len(), 42);
        let c0 = sys.solve_damped(&f0).unwrap();
        let rhs = sys.incoming_rhs(&f0).unwrap();
        let residual = &sys.s_matrix * &c0 - rhs;
        assert!(residual.amax() < 1e-10);
    }

    #[test]
    fn end_state_matches_frozen_values() {
        let op = operator(Kernel::Anisotropic);
        let eta24 = end_state_eta(&op, 24, 0.1).unwrap();
        assert!((eta24 - 0.7104460904).abs() < 5e-9);
        let eta16 = end_state_eta(&op, 16, 0.1).unwrap();
        assert!((eta16 - eta24).abs() < 1e-7);

        let iso = operator(Kernel::Isotropic);
        let eta_iso = end_state_eta(&iso, 24, 0.1).unwrap();
        assert!((eta_iso - 0.7104460904).abs() < 5e-9);
    }

    #[test]
    fn quadratic_end_state_is_stable_in_order() {
        let op = operator(Kernel::Anisotropic);
        let mut values = Vec::new();
        for n in [12usize, 24] {
            let sys = build_halfspace_system(&op, n, 0.1).unwrap();
            let samples = sys.incoming_samples(|mu| mu * mu);
            let sol = sys.recover_solution(&samples, &[-0.5]).unwrap();
            values.push(sol.theta_inf);
        }
        assert!((values[0] - values[1]).abs() < 1e-6);
        assert!((values[1] - 0.55236682).abs() < 5e-8);
    }

    #[test]
    fn albedo_reproduces_constants_and_direct_solve() {
        let sys = system(Kernel::Anisotropic, 12, 0.1);
        let grid = build_angular_grid(32).unwrap();
        let incoming: Vec<f64> = grid
            .positive_indices()
            .into_iter()
            .map(|i| grid.nodes[i])
            .collect();
        let outgoing: Vec<f64> = grid
            .negative_indices()
            .into_iter()
            .map(|i| grid.nodes[i])
            .collect();
        let map = sys.albedo_map(&incoming, &outgoing).unwrap();

        let ones = vec![1.0; incoming.len()];
        let out = map.apply(&ones);
        assert!((map.theta(&ones) - 1.0).abs() < 1e-8);
        for v in out.iter() {
            assert!((v - 1.0).abs() < 1e-8);
        }

        // The lift is exact on cubics, so nodal cubic data must match the
        // direct spectral solve.
        let cubic = |mu: f64| 0.3 + mu * (0.2 + mu * (0.4 - 0.1 * mu));
        let nodal: Vec<f64> = incoming.iter().map(|&mu| cubic(mu)).collect();
        let via_map = map.apply(&nodal);
        let samples = sys.incoming_samples(cubic);
        let direct = sys.recover_solution(&samples, &outgoing).unwrap();
        for (a, b) in via_map.iter().zip(&direct.outgoing_trace) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((map.theta(&nodal) - direct.theta_inf).abs() < 1e-10);
    }

    #[test]
    fn recovery_is_damping_independent() {
        let op = operator(Kernel::Anisotropic);
        let outgoing = [-0.9, -0.5, -0.1];
        let mut traces = Vec::new();
        for alpha in [0.05, 0.2] {
            let sys = build_halfspace_system(&op, 16, alpha).unwrap();
            let samples = sys.incoming_samples(|mu| mu);
            let sol = sys.recover_solution(&samples, &outgoing).unwrap();
            traces.push((sol.theta_inf, sol.outgoing_trace));
        }
        assert!((traces[0].0 - traces[1].0).abs() < 1e-6);
        for (a, b) in traces[0].1.iter().zip(&traces[1].1) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn profile_matches_trace_and_decays_at_modal_rate() {
        let sys = system(Kernel::Anisotropic, 12, 0.1);
        let samples = sys.incoming_samples(|mu| mu);
        let outgoing = [-0.5, -0.3];
        let sol = sys.recover_solution(&samples, &outgoing).unwrap();
        for (i, &mu) in outgoing.iter().enumerate() {
            assert!((sys.evaluate_profile(&sol, 0.0, mu) - sol.outgoing_trace[i]).abs() < 1e-8);
        }
        assert!((sys.evaluate_profile(&sol, 60.0, -0.5) - sol.theta_inf).abs() < 1e-8);

        let dominant = sys
            .negative
            .iter()
            .map(|&i| sys.eigenvalues[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let (y1, y2) = (10.0, 14.0);

        // The damped field decays at the least-negative pencil eigenvalue.
        let damped = |y: f64, mu: f64| {
            let c = sys.profile_coefficients(&sol.amplitudes, y);
            sys.damped_value(&c, mu).abs()
        };
        let slope = (damped(y1, -0.5) / damped(y2, -0.5)).ln() / (y2 - y1);
        assert!((slope - dominant.abs()).abs() < 1e-3 * dominant.abs());

        // That slowest mode is a damping artifact; the recovery cancels it,
        // so the recovered field must decay strictly faster.
        let v = |y: f64| (sys.evaluate_profile(&sol, y, -0.5) - sol.theta_inf).abs();
        let recovered_slope = (v(y1) / v(y2)).ln() / (y2 - y1);
        assert!(recovered_slope > 4.0 * dominant.abs());
    }

    #[test]
    fn net_flux_of_recovery_shrinks_with_order() {
        let op = operator(Kernel::Anisotropic);
        let grid = build_angular_grid(64).unwrap();
        let outgoing: Vec<f64> = grid
            .negative_indices()
            .into_iter()
            .map(|i| grid.nodes[i])
            .collect();
        let mut fluxes = Vec::new();
        for n in [8usize, 16] {
            let sys = build_halfspace_system(&op, n, 0.1).unwrap();
            let samples = sys.incoming_samples(|mu| mu);
            let sol = sys.recover_solution(&samples, &outgoing).unwrap();
            let mut net = 0.0;
            for i in grid.positive_indices() {
                net += 0.5 * grid.weights[i] * grid.nodes[i] * grid.nodes[i];
            }
            for (k, i) in grid.negative_indices().into_iter().enumerate() {
                net += 0.5 * grid.weights[i] * grid.nodes[i] * sol.outgoing_trace[k];
            }
            fluxes.push(net.abs());
        }
        assert!(fluxes[1] < fluxes[0]);
    }

    #[test]
    fn covector_reproduces_end_states() {
        let sys = system(Kernel::Anisotropic, 12, 0.1);
        let w = sys.end_state_covector().unwrap();
        let nodes = DVector::from_column_slice(&sys.basis.rule.nodes);
        let samples = sys.incoming_samples(|mu| mu);
        let sol = sys.recover_solution(&samples, &[-0.5]).unwrap();
        assert!((w.dot(&nodes) - sol.theta_inf).abs() < 1e-10);
        let ones = DVector::from_element(w.len(), 1.0);
        assert!((w.dot(&ones) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let op = operator(Kernel::Anisotropic);
        assert!(matches!(
            build_halfspace_system(&op, 1, 0.1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_halfspace_system(&op, 8, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_halfspace_system(&op, 8, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        let sys = system(Kernel::Anisotropic, 8, 0.1);
        assert!(sys.solve_damped(&[1.0, 2.0]).is_err());
        assert!(sys
            .recover_solution(&vec![1.0; sys.basis.rule.len()], &[0.5])
            .is_err());
    }
}
