//! Resolved finite-volume reference solver for the scaled transport equation
//! `eps df/dt + mu df/dx + (sigma(x)/eps) L f = 0`.
//!
//! One step splits into advection and collision, in that order. Advection
//! treats each direction independently with a flux-limited Lax-Wendroff
//! scheme (van Leer limiter, two transparent ghost cells per side) and then
//! overwrites incoming boundary values with the Dirichlet data. Collision
//! applies the exact relaxation exponential cell by cell, so the stiff rate
//! `sigma dt / eps^2` costs nothing in stability; the `dt <= eps^2` cap is
//! kept only to control the splitting error of the reference runs.

use nalgebra::DMatrix;

use crate::angular::AngularGrid;
use crate::collision::CollisionOperator;
use crate::error::{Error, Result};

/// Scattering strength profile `sigma(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaProfile {
    /// `sigma = 1` everywhere.
    Uniform,
    /// `sigma = left` on `[a, interface)`, `sigma = right` on `[interface, b]`,
    /// evaluated at cell centers.
    TwoZone {
        interface: f64,
        left: f64,
        right: f64,
    },
}

impl SigmaProfile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            SigmaProfile::Uniform => 1.0,
            SigmaProfile::TwoZone {
                interface,
                left,
                right,
            } => {
                if x < *interface {
                    *left
                } else {
                    *right
                }
            }
        }
    }

    fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        if let SigmaProfile::TwoZone {
            interface,
            left,
            right,
        } = self
        {
            if !(*left > 0.0 && *right > 0.0) {
                return Err(Error::InvalidArgument(
                    "scattering strengths must be positive".into(),
                ));
            }
            if !(*interface > lo && *interface < hi) {
                return Err(Error::InvalidArgument(format!(
                    "interface {interface} outside ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

/// Uniform cell-centered spatial mesh paired with an angular grid.
#[derive(Debug, Clone)]
pub struct KineticGrid {
    pub lo: f64,
    pub hi: f64,
    pub n_x: usize,
    pub dx: f64,
    pub centers: Vec<f64>,
    pub angular: AngularGrid,
}

impl KineticGrid {
    pub fn new(lo: f64, hi: f64, n_x: usize, angular: AngularGrid) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "empty interval [{lo}, {hi}]"
            )));
        }
        if n_x < 4 {
            return Err(Error::InvalidArgument(format!(
                "need at least 4 cells, got {n_x}"
            )));
        }
        let dx = (hi - lo) / n_x as f64;
        let centers = (0..n_x).map(|i| lo + (i as f64 + 0.5) * dx).collect();
        Ok(KineticGrid {
            lo,
            hi,
            n_x,
            dx,
            centers,
            angular,
        })
    }
}

/// Kinetic density at one time level; `f[(i, j)] = f(t, x_i, mu_j)`.
#[derive(Debug, Clone)]
pub struct KineticState {
    pub t: f64,
    pub f: DMatrix<f64>,
}

impl KineticState {
    /// Angular means `<f>(x_i) = (1/2) sum_j w_j f_{ij}`.
    pub fn cell_means(&self, angular: &AngularGrid) -> Vec<f64> {
        (0..self.f.nrows())
            .map(|i| {
                0.5 * angular
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(j, &w)| w * self.f[(i, j)])
                    .sum::<f64>()
            })
            .collect()
    }
}

/// van Leer harmonic-mean limiter of two consecutive jumps.
fn limited(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        (a * b.abs() + a.abs() * b) / (a.abs() + b.abs())
    } else {
        0.0
    }
}

/// Advances every direction by one flux-limited Lax-Wendroff sweep at speed
/// `mu_j / eps`, then overwrites the incoming boundary entries: `f_{0,j}` for
/// `mu_j > 0` with `left_incoming`, `f_{N-1,j}` for `mu_j < 0` with
/// `right_incoming` (both in the angular grid's index order).
pub fn advect_step(
    state: &mut KineticState,
    grid: &KineticGrid,
    eps: f64,
    dt: f64,
    left_incoming: &[f64],
    right_incoming: &[f64],
) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale parameter must be positive, got {eps}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidTimestep(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let n = grid.n_x;
    let n_mu = grid.angular.len();
    if state.f.nrows() != n || state.f.ncols() != n_mu {
        return Err(Error::InvalidArgument(format!(
            "state is {}x{}, grid is {n}x{n_mu}",
            state.f.nrows(),
            state.f.ncols()
        )));
    }
    let mu_max = grid
        .angular
        .nodes
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let courant = dt * mu_max / (eps * grid.dx);
    if courant > 0.5 + 1e-12 {
        return Err(Error::InvalidTimestep(format!(
            "CFL number {courant} exceeds 0.5"
        )));
    }
    let positive = grid.angular.positive_indices();
    let negative = grid.angular.negative_indices();
    if left_incoming.len() != positive.len() || right_incoming.len() != negative.len() {
        return Err(Error::InvalidArgument(format!(
            "boundary data lengths ({}, {}) do not match direction counts ({}, {})",
            left_incoming.len(),
            right_incoming.len(),
            positive.len(),
            negative.len()
        )));
    }

    let mut buf = vec![0.0; n + 4];
    let mut jump = vec![0.0; n + 3];
    let mut flux = vec![0.0; n + 1];
    let scale = dt / grid.dx;
    for j in 0..n_mu {
        let v = grid.angular.nodes[j] / eps;
        let cou = v * dt / grid.dx;
        let h = 0.5 * v.abs() * (1.0 - cou.abs());
        let mut col = state.f.column_mut(j);
        let col = col.as_mut_slice();

        // Two transparent ghost cells per side.
        buf[0] = col[0];
        buf[1] = col[0];
        buf[2..n + 2].copy_from_slice(col);
        buf[n + 2] = col[n - 1];
        buf[n + 3] = col[n - 1];
        for k in 0..n + 3 {
            jump[k] = buf[k + 1] - buf[k];
        }
        if v >= 0.0 {
            for (m, fl) in flux.iter_mut().enumerate() {
                *fl = v * buf[m + 1] + h * limited(jump[m], jump[m + 1]);
            }
        } else {
            for (m, fl) in flux.iter_mut().enumerate() {
                *fl = v * buf[m + 2] + h * limited(jump[m + 2], jump[m + 1]);
            }
        }
        for (i, c) in col.iter_mut().enumerate() {
            *c -= scale * (flux[i + 1] - flux[i]);
        }
    }

    for (k, &j) in positive.iter().enumerate() {
        state.f[(0, j)] = left_incoming[k];
    }
    for (k, &j) in negative.iter().enumerate() {
        state.f[(n - 1, j)] = right_incoming[k];
    }
    state.t += dt;
    Ok(())
}

/// Per-row-block relaxation matrices, transposed for right multiplication.
/// Caching one of these amortizes the matrix-exponential assembly over the
/// many steps of a fixed-step run.
pub(crate) struct CollisionCache {
    blocks: Vec<(usize, usize, DMatrix<f64>)>,
}

impl CollisionCache {
    /// Blocks of `(first row, row count, rate)` covering `0..n_x`.
    pub(crate) fn from_rates(
        op: &CollisionOperator,
        rates: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut blocks = Vec::with_capacity(rates.len());
        for &(start, len, rate) in rates {
            if len == 0 {
                continue;
            }
            blocks.push((start, len, op.relaxation_matrix(rate)?.transpose()));
        }
        Ok(CollisionCache { blocks })
    }

    pub(crate) fn for_profile(
        grid: &KineticGrid,
        eps: f64,
        dt: f64,
        sigma: &SigmaProfile,
        op: &CollisionOperator,
    ) -> Result<Self> {
        let scale = dt / (eps * eps);
        let rates = match sigma {
            SigmaProfile::Uniform => vec![(0, grid.n_x, scale)],
            SigmaProfile::TwoZone {
                interface,
                left,
                right,
            } => {
                let split = grid.centers.partition_point(|&x| x < *interface);
                vec![
                    (0, split, left * scale),
                    (split, grid.n_x - split, right * scale),
                ]
            }
        };
        CollisionCache::from_rates(op, &rates)
    }

    pub(crate) fn apply(&self, f: &mut DMatrix<f64>) {
        for (start, len, e_t) in &self.blocks {
            let prod = f.rows(*start, *len) * e_t;
            f.rows_mut(*start, *len).copy_from(&prod);
        }
    }
}

/// Applies the exact collision relaxation `exp(-(sigma(x_i) dt / eps^2) L)`
/// to every cell. The per-cell angular mean is conserved to round-off.
pub fn collide_step(
    state: &mut KineticState,
    grid: &KineticGrid,
    eps: f64,
    dt: f64,
    sigma: &SigmaProfile,
    op: &CollisionOperator,
) -> Result<()> {
    if op.grid.len() != grid.angular.len() {
        return Err(Error::InvalidArgument(format!(
            "collision operator has {} nodes, grid has {}",
            op.grid.len(),
            grid.angular.len()
        )));
    }
    if state.f.nrows() != grid.n_x || state.f.ncols() != grid.angular.len() {
        return Err(Error::InvalidArgument(format!(
            "state is {}x{}, grid is {}x{}",
            state.f.nrows(),
            state.f.ncols(),
            grid.n_x,
            grid.angular.len()
        )));
    }
    CollisionCache::for_profile(grid, eps, dt, sigma, op)?.apply(&mut state.f);
    Ok(())
}

/// A finished reference run: the final state plus snapshots at the requested
/// times, in ascending order.
#[derive(Debug, Clone)]
pub struct KineticRun {
    pub final_state: KineticState,
    pub snapshots: Vec<KineticState>,
}

/// Runs the reference solver on `grid` from data `phi_0` with boundary data
/// `phi_a` (left, incoming `mu > 0`) and `phi_b` (right, incoming `mu < 0`).
///
/// The step is `dt = cfl * eps * dx`, capped at `eps^2` when `cap_dt` is set
/// (the uniform-sigma default; the cap controls splitting error, not
/// stability). Between consecutive snapshot marks the step is shrunk
/// uniformly so every mark is hit exactly. Boundary rows are re-pinned to
/// the Dirichlet data after each collision so stored states carry exact
/// incoming values.
#[allow(clippy::too_many_arguments)]
pub fn run_reference<Fa, Fb, F0>(
    grid: &KineticGrid,
    op: &CollisionOperator,
    sigma: &SigmaProfile,
    eps: f64,
    phi_a: Fa,
    phi_b: Fb,
    phi_0: F0,
    t_end: f64,
    cfl: f64,
    cap_dt: bool,
    snapshot_times: &[f64],
) -> Result<KineticRun>
where
    Fa: Fn(f64, f64) -> f64,
    Fb: Fn(f64, f64) -> f64,
    F0: Fn(f64, f64) -> f64,
{
    if !(eps > 0.0) || !(t_end > 0.0) || !(cfl > 0.0) {
        return Err(Error::InvalidArgument(
            "scale, final time, and CFL number must be positive".into(),
        ));
    }
    sigma.validate(grid.lo, grid.hi)?;
    let mut marks: Vec<f64> = snapshot_times.to_vec();
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if marks.windows(2).any(|w| w[1] - w[0] < 1e-12) {
        return Err(Error::InvalidArgument(
            "snapshot times must be distinct".into(),
        ));
    }
    if marks.iter().any(|&t| t <= 0.0 || t > t_end + 1e-12) {
        return Err(Error::InvalidArgument(
            "snapshot times must lie in (0, T]".into(),
        ));
    }

    let dt_base = cfl * eps * grid.dx;
    let dt = if cap_dt { dt_base.min(eps * eps) } else { dt_base };

    let positive = grid.angular.positive_indices();
    let negative = grid.angular.negative_indices();
    let left_at = |t: f64| -> Vec<f64> {
        positive
            .iter()
            .map(|&j| phi_a(t, grid.angular.nodes[j]))
            .collect()
    };
    let right_at = |t: f64| -> Vec<f64> {
        negative
            .iter()
            .map(|&j| phi_b(t, grid.angular.nodes[j]))
            .collect()
    };

    let f = DMatrix::from_fn(grid.n_x, grid.angular.len(), |i, j| {
        phi_0(grid.centers[i], grid.angular.nodes[j])
    });
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "initial data is not finite".into(),
        ));
    }
    let mut state = KineticState { t: 0.0, f };
    let mut snapshots = Vec::with_capacity(marks.len());

    let mut segment_ends = marks.clone();
    if segment_ends.last().copied().unwrap_or(0.0) < t_end - 1e-12 {
        segment_ends.push(t_end);
    }

    let mut t_prev = 0.0;
    for &t_next in &segment_ends {
        let span = t_next - t_prev;
        let n_steps = ((span / dt - 1e-9).ceil() as usize).max(1);
        let h = span / n_steps as f64;
        let cache = CollisionCache::for_profile(grid, eps, h, sigma, op)?;
        for k in 1..=n_steps {
            let t_new = t_prev + k as f64 * h;
            let left = left_at(t_new);
            let right = right_at(t_new);
            advect_step(&mut state, grid, eps, h, &left, &right)?;
            cache.apply(&mut state.f);
            for (idx, &j) in positive.iter().enumerate() {
                state.f[(0, j)] = left[idx];
            }
            for (idx, &j) in negative.iter().enumerate() {
                state.f[(grid.n_x - 1, j)] = right[idx];
            }
            state.t = t_new;
        }
        state.t = t_next;
        if marks.iter().any(|&m| (m - t_next).abs() < 1e-12) {
            snapshots.push(state.clone());
        }
        t_prev = t_next;
    }
    Ok(KineticRun {
        final_state: state,
        snapshots,
    })
}
