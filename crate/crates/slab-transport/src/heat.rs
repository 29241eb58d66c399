//! Implicit finite-difference solver for the interior diffusion equation
//! `d/dt theta = lambda d2/dx2 theta` with time-dependent Dirichlet data.
//!
//! The grid is cell-centered; Dirichlet values are imposed at the first and
//! last cell centers through identity rows of the tridiagonal system, so
//! boundary data enters at `t^{n+1}` of each step.

use crate::error::{Error, Result};

/// Uniform cell-centered grid on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct HeatGrid {
    pub lo: f64,
    pub hi: f64,
    pub n_x: usize,
    pub dx: f64,
    /// Cell centers `x_i = lo + (i + 1/2) dx`.
    pub centers: Vec<f64>,
}

impl HeatGrid {
    pub fn new(lo: f64, hi: f64, n_x: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "empty interval [{lo}, {hi}]"
            )));
        }
        if n_x < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 cells, got {n_x}"
            )));
        }
        let dx = (hi - lo) / n_x as f64;
        let centers = (0..n_x).map(|i| lo + (i as f64 + 0.5) * dx).collect();
        Ok(HeatGrid {
            lo,
            hi,
            n_x,
            dx,
            centers,
        })
    }
}

/// Temperature field at one time level.
#[derive(Debug, Clone)]
pub struct HeatState {
    pub t: f64,
    pub values: Vec<f64>,
}

/// One backward-Euler step: interior cells satisfy the implicit central
/// difference `theta^{n+1}_i - theta^n_i = r (theta^{n+1}_{i+1} -
/// 2 theta^{n+1}_i + theta^{n+1}_{i-1})` with `r = lambda dt / dx^2`;
/// boundary cells are pinned to `theta_a`, `theta_b` at the new time.
///
/// The tridiagonal matrix is strictly diagonally dominant, so Thomas
/// elimination without pivoting is stable for every `dt`.
pub fn heat_step(
    state: &HeatState,
    grid: &HeatGrid,
    lambda: f64,
    dt: f64,
    theta_a: f64,
    theta_b: f64,
) -> Result<HeatState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTimestep(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "diffusion coefficient must be positive, got {lambda}"
        )));
    }
    let n = grid.n_x;
    if state.values.len() != n {
        return Err(Error::InvalidArgument(format!(
            "state has {} cells, grid has {n}",
            state.values.len()
        )));
    }
    let r = lambda * dt / (grid.dx * grid.dx);

    let mut diag = vec![1.0 + 2.0 * r; n];
    let mut upper = vec![-r; n];
    let mut rhs = state.values.clone();
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = theta_a;
    diag[n - 1] = 1.0;
    rhs[n - 1] = theta_b;

    // Thomas elimination; sub-diagonal is -r on interior rows, 0 on the
    // identity row n-1.
    for i in 1..n {
        let sub = if i == n - 1 { 0.0 } else { -r };
        let m = sub / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut values = vec![0.0; n];
    values[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        values[i] = (rhs[i] - upper[i] * values[i + 1]) / diag[i];
    }
    Ok(HeatState {
        t: state.t + dt,
        values,
    })
}

/// Runs the diffusion solver from `theta_0` to time `t_end`, returning the
/// state at every time level including the initial one.
///
/// Initial values come from `theta_0` at every cell center, boundary cells
/// included; incompatible boundary data first acts at the end of step one.
/// If `t_end` is not a multiple of `dt` the final step is shortened.
pub fn run_heat<Fa, Fb, F0>(
    grid: &HeatGrid,
    lambda: f64,
    theta_a: Fa,
    theta_b: Fb,
    theta_0: F0,
    t_end: f64,
    dt: f64,
) -> Result<Vec<HeatState>>
where
    Fa: Fn(f64) -> f64,
    Fb: Fn(f64) -> f64,
    F0: Fn(f64) -> f64,
{
    if !(dt > 0.0) {
        return Err(Error::InvalidTimestep(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "final time must be nonnegative, got {t_end}"
        )));
    }
    let values: Vec<f64> = grid.centers.iter().map(|&x| theta_0(x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "initial data is not finite".into(),
        ));
    }
    let mut states = vec![HeatState { t: 0.0, values }];
    let n_full = (t_end / dt + 1e-9).floor() as usize;
    for k in 1..=n_full {
        let t_new = k as f64 * dt;
        let mut next = heat_step(
            states.last().unwrap(),
            grid,
            lambda,
            dt,
            theta_a(t_new),
            theta_b(t_new),
        )?;
        next.t = t_new;
        states.push(next);
    }
    let t_done = n_full as f64 * dt;
    if t_end - t_done > 1e-12 {
        let mut next = heat_step(
            states.last().unwrap(),
            grid,
            lambda,
            t_end - t_done,
            theta_a(t_end),
            theta_b(t_end),
        )?;
        next.t = t_end;
        states.push(next);
    }
    Ok(states)
}
