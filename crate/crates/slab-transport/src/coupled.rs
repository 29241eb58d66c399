//! Domain-decomposition solver: kinetic transport on the left subdomain
//! `(a, x_m)`, implicit diffusion on the right subdomain `(x_m, b)`, glued at
//! `x_m` by the half-space albedo closure.
//!
//! Each step advances the kinetic field with the previous step's reflected
//! interface data, feeds the new outgoing values `f(x_m, mu > 0)` through the
//! cached [`AlbedoMap`] to produce the interface temperature `theta_m` and
//! the reflected back-flow `f(x_m, mu < 0)`, then advances the heat field
//! with Dirichlet values `theta_m` at `x_m` and the end-state functional of
//! the right boundary data at `b`. Information flows strictly from kinetic
//! to heat; the kinetic trajectory never sees the heat state.

use nalgebra::DVector;

use crate::angular::build_angular_grid;
use crate::collision::{build_collision_operator, CollisionOperator, Kernel};
use crate::error::{Error, Result};
use crate::halfspace::{build_halfspace_system, AlbedoMap};
use crate::heat::{heat_step, HeatGrid, HeatState};
use crate::kinetic::{advect_step, CollisionCache, KineticGrid, KineticState};

/// Discretization and closure parameters shared by all coupled runs.
#[derive(Debug, Clone)]
pub struct CoupledSetup {
    /// Left edge of the kinetic subdomain.
    pub lo: f64,
    /// Right edge of the heat subdomain.
    pub hi: f64,
    /// Interface position.
    pub x_m: f64,
    /// Kinetic cell width (the interface solve tolerates a coarse mesh).
    pub kinetic_dx: f64,
    /// Heat cell width.
    pub heat_dx: f64,
    /// CFL number for the kinetic step.
    pub cfl: f64,
    pub n_mu: usize,
    /// Half-space Galerkin order backing the albedo closure.
    pub halfspace_order: usize,
    /// Damping parameter of the half-space solver.
    pub alpha: f64,
    pub kernel: Kernel,
}

impl Default for CoupledSetup {
    fn default() -> Self {
        CoupledSetup {
            lo: -1.0,
            hi: 1.0,
            x_m: 0.0,
            kinetic_dx: 5e-3,
            heat_dx: 1e-3,
            cfl: 0.5,
            n_mu: 32,
            halfspace_order: 16,
            alpha: 0.1,
            kernel: Kernel::Anisotropic,
        }
    }
}

/// Evolving state of the coupled solver plus its immutable per-run caches.
#[derive(Debug, Clone)]
pub struct CoupledState {
    pub kinetic: KineticState,
    pub heat: HeatState,
    /// Interface temperature fed to the heat solve this step.
    pub theta_m: f64,
    /// Reflected interface values for `mu < 0`, in the angular grid's
    /// negative-index order; next step's right incoming data.
    pub backflow: Vec<f64>,
    pub kinetic_grid: KineticGrid,
    pub heat_grid: HeatGrid,
    pub op: CollisionOperator,
    pub albedo: AlbedoMap,
    /// End-state covector on the half-space quadrature nodes; pairing
    /// boundary data samples with it yields the matched heat boundary value.
    pub end_state: DVector<f64>,
    /// Half-space quadrature nodes on (0, 1) matching `end_state`.
    pub end_state_nodes: Vec<f64>,
    /// Diffusion coefficient of the kernel.
    pub lambda: f64,
}

impl CoupledState {
    pub fn time(&self) -> f64 {
        self.kinetic.t
    }

    /// Heat boundary value at `b`: the end state of the incoming right
    /// boundary data `phi_b(t, mu)`, `mu < 0`.
    pub fn boundary_theta<F: Fn(f64, f64) -> f64>(&self, t: f64, phi_b: &F) -> f64 {
        self.end_state_nodes
            .iter()
            .zip(self.end_state.iter())
            .map(|(&nu, &w)| w * phi_b(t, -nu))
            .sum()
    }

    /// Outgoing interface samples `f(x_m, mu_j)`, `mu_j > 0`.
    fn outgoing(&self) -> Vec<f64> {
        let last = self.kinetic_grid.n_x - 1;
        self.kinetic_grid
            .angular
            .positive_indices()
            .iter()
            .map(|&j| self.kinetic.f[(last, j)])
            .collect()
    }

    fn inject_backflow(&mut self) {
        let last = self.kinetic_grid.n_x - 1;
        for (k, &j) in self
            .kinetic_grid
            .angular
            .negative_indices()
            .iter()
            .enumerate()
        {
            self.kinetic.f[(last, j)] = self.backflow[k];
        }
    }
}

/// Builds the coupled state at `t = 0`: kinetic data `phi_0` on the left,
/// heat data `theta_i` on the right, and the initial interface back-flow
/// obtained by reflecting the initial outgoing samples through the albedo
/// map (the transient this hides lives in the discarded initial layer).
pub fn build_coupled_state<F0, Fi>(
    setup: &CoupledSetup,
    phi_0: F0,
    theta_i: Fi,
) -> Result<CoupledState>
where
    F0: Fn(f64, f64) -> f64,
    Fi: Fn(f64) -> f64,
{
    if !(setup.x_m > setup.lo && setup.x_m < setup.hi) {
        return Err(Error::InvalidArgument(format!(
            "interface {} outside ({}, {})",
            setup.x_m, setup.lo, setup.hi
        )));
    }
    let angular = build_angular_grid(setup.n_mu)?;
    let op = build_collision_operator(&setup.kernel, setup.n_mu - 1, &angular)?;
    let n_kin = ((setup.x_m - setup.lo) / setup.kinetic_dx).round().max(4.0) as usize;
    let kinetic_grid = KineticGrid::new(setup.lo, setup.x_m, n_kin, angular)?;
    let n_heat = ((setup.hi - setup.x_m) / setup.heat_dx).round().max(3.0) as usize;
    let heat_grid = HeatGrid::new(setup.x_m, setup.hi, n_heat)?;

    let sys = build_halfspace_system(&op, setup.halfspace_order, setup.alpha)?;
    let incoming: Vec<f64> = kinetic_grid
        .angular
        .positive_indices()
        .iter()
        .map(|&j| kinetic_grid.angular.nodes[j])
        .collect();
    let outgoing: Vec<f64> = kinetic_grid
        .angular
        .negative_indices()
        .iter()
        .map(|&j| kinetic_grid.angular.nodes[j])
        .collect();
    let albedo = sys.albedo_map(&incoming, &outgoing)?;
    let end_state = sys.end_state_covector()?;
    let end_state_nodes = sys.basis.rule.nodes.clone();
    let lambda = op.diffusion_coefficient();

    let f = nalgebra::DMatrix::from_fn(kinetic_grid.n_x, kinetic_grid.angular.len(), |i, j| {
        phi_0(kinetic_grid.centers[i], kinetic_grid.angular.nodes[j])
    });
    let kinetic = KineticState { t: 0.0, f };
    let values: Vec<f64> = heat_grid.centers.iter().map(|&x| theta_i(x)).collect();
    if kinetic.f.iter().any(|v| !v.is_finite()) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "initial data is not finite".into(),
        ));
    }
    let heat = HeatState { t: 0.0, values };

    let mut state = CoupledState {
        kinetic,
        heat,
        theta_m: 0.0,
        backflow: vec![0.0; outgoing.len()],
        kinetic_grid,
        heat_grid,
        op,
        albedo,
        end_state,
        end_state_nodes,
        lambda,
    };
    let g0 = state.outgoing();
    state.theta_m = state.albedo.theta(&g0);
    state.backflow = state.albedo.apply(&g0).iter().copied().collect();
    state.inject_backflow();
    Ok(state)
}

/// One synchronized step of size `dt`: kinetic advance (advection at speed
/// `mu/eps`, collision at rate `dt/eps` for the scaled left-domain equation),
/// interface closure, then the implicit heat advance with the same `dt`.
pub fn coupled_step<Fa, Fb>(
    state: &mut CoupledState,
    eps: f64,
    dt: f64,
    phi_a: &Fa,
    phi_b: &Fb,
) -> Result<()>
where
    Fa: Fn(f64, f64) -> f64,
    Fb: Fn(f64, f64) -> f64,
{
    let t_new = state.kinetic.t + dt;
    let grid = state.kinetic_grid.clone();
    let left: Vec<f64> = grid
        .angular
        .positive_indices()
        .iter()
        .map(|&j| phi_a(t_new, grid.angular.nodes[j]))
        .collect();
    let right = state.backflow.clone();

    advect_step(&mut state.kinetic, &grid, eps, dt, &left, &right)?;
    CollisionCache::from_rates(&state.op, &[(0, grid.n_x, dt / eps)])?
        .apply(&mut state.kinetic.f);
    for (k, &j) in grid.angular.positive_indices().iter().enumerate() {
        state.kinetic.f[(0, j)] = left[k];
    }
    state.backflow = right;
    state.inject_backflow();

    let g = state.outgoing();
    state.theta_m = state.albedo.theta(&g);
    state.backflow = state.albedo.apply(&g).iter().copied().collect();
    state.inject_backflow();

    let theta_b = state.boundary_theta(t_new, phi_b);
    state.heat = heat_step(
        &state.heat,
        &state.heat_grid,
        state.lambda,
        dt,
        state.theta_m,
        theta_b,
    )?;
    debug_assert!((state.heat.t - state.kinetic.t).abs() < 1e-9);
    Ok(())
}

/// A finished coupled run with snapshots at the requested times.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub final_state: CoupledState,
    pub theta_snapshots: Vec<HeatState>,
    pub kinetic_snapshots: Vec<KineticState>,
    /// `(t, theta_m)` at every step, starting from `t = 0`.
    pub theta_m_history: Vec<(f64, f64)>,
}

/// Runs the coupled solver to `t_end` with `dt = cfl * eps * dx` (CFL only;
/// the implicit heat step needs no parabolic restriction). Snapshot marks
/// are hit exactly by shrinking the step uniformly within each segment.
#[allow(clippy::too_many_arguments)]
pub fn run_coupled<Fa, Fb, F0, Fi>(
    setup: &CoupledSetup,
    eps: f64,
    phi_a: Fa,
    phi_b: Fb,
    phi_0: F0,
    theta_i: Fi,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<CoupledRun>
where
    Fa: Fn(f64, f64) -> f64,
    Fb: Fn(f64, f64) -> f64,
    F0: Fn(f64, f64) -> f64,
    Fi: Fn(f64) -> f64,
{
    if !(eps > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidArgument(
            "scale parameter and final time must be positive".into(),
        ));
    }
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

    let mut state = build_coupled_state(setup, phi_0, theta_i)?;
    let dt = setup.cfl * eps * state.kinetic_grid.dx;
    let mut theta_m_history = vec![(0.0, state.theta_m)];
    let mut theta_snapshots = Vec::new();
    let mut kinetic_snapshots = Vec::new();

    let mut segment_ends = marks.clone();
    if segment_ends.last().copied().unwrap_or(0.0) < t_end - 1e-12 {
        segment_ends.push(t_end);
    }
    let mut t_prev = 0.0;
    for &t_next in &segment_ends {
        let span = t_next - t_prev;
        let n_steps = ((span / dt - 1e-9).ceil() as usize).max(1);
        let h = span / n_steps as f64;
        for _ in 0..n_steps {
            coupled_step(&mut state, eps, h, &phi_a, &phi_b)?;
            theta_m_history.push((state.time(), state.theta_m));
        }
        state.kinetic.t = t_next;
        state.heat.t = t_next;
        if marks.iter().any(|&m| (m - t_next).abs() < 1e-12) {
            theta_snapshots.push(state.heat.clone());
            kinetic_snapshots.push(state.kinetic.clone());
        }
        t_prev = t_next;
    }
    Ok(CoupledRun {
        final_state: state,
        theta_snapshots,
        kinetic_snapshots,
        theta_m_history,
    })
}

/// A stability run's deviation history and final kinetic state.
#[derive(Debug, Clone)]
pub struct StabilityRun {
    /// `(t, L2 deviation)` after every step.
    pub history: Vec<(f64, f64)>,
    pub final_state: KineticState,
}

/// Stability probe of the interface closure: kinetic subdomain only, zero
/// left data and zero initial data, right boundary fed the reflected values
/// plus the perturbation `p(t / eps^2)` in every incoming direction. Records
/// the L2 deviation from zero after each step.
pub fn run_stability<P>(
    setup: &CoupledSetup,
    eps: f64,
    t_end: f64,
    perturbation: P,
) -> Result<StabilityRun>
where
    P: Fn(f64) -> f64,
{
    if !(eps > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidArgument(
            "scale parameter and final time must be positive".into(),
        ));
    }
    let mut state = build_coupled_state(setup, |_, _| 0.0, |_| 0.0)?;
    state.theta_m = 0.0;
    state.backflow = vec![0.0; state.backflow.len()];
    state.inject_backflow();

    let grid = state.kinetic_grid.clone();
    let positive = grid.angular.positive_indices();
    let zeros = vec![0.0; positive.len()];
    let dt = setup.cfl * eps * grid.dx;
    let n_steps = ((t_end / dt - 1e-9).ceil() as usize).max(1);
    let h = t_end / n_steps as f64;
    let cache = CollisionCache::from_rates(&state.op, &[(0, grid.n_x, h / eps)])?;

    let weights = &grid.angular.weights;
    let mut history = Vec::with_capacity(n_steps);
    for k in 1..=n_steps {
        let t_new = if k == n_steps { t_end } else { k as f64 * h };
        advect_step(&mut state.kinetic, &grid, eps, h, &zeros, &state.backflow.clone())?;
        cache.apply(&mut state.kinetic.f);
        for &j in &positive {
            state.kinetic.f[(0, j)] = 0.0;
        }
        let g = state.outgoing();
        let p = perturbation(t_new / (eps * eps));
        let reflected = state.albedo.apply(&g);
        state.backflow = reflected.iter().map(|&r| r + p).collect();
        state.inject_backflow();
        state.kinetic.t = t_new;

        let mut dev2 = 0.0;
        for i in 0..grid.n_x {
            for (j, &w) in weights.iter().enumerate() {
                let v = state.kinetic.f[(i, j)];
                dev2 += v * v * (0.5 * w) * grid.dx;
            }
        }
        history.push((t_new, dev2.sqrt()));
    }
    Ok(StabilityRun {
        history,
        final_state: state.kinetic,
    })
}
