//! Experiment drivers: resolved-reference versus heat runs for the uniform
//! benchmark cases, reference versus coupled runs for the interface cases,
//! and the interface stability probe. Independent (case, eps) jobs can fan
//! out over worker threads; results are merged by job index, so the output
//! never depends on scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use nalgebra::DVector;

use crate::angular::AngularGrid;
use crate::cases::{make_case, stability_perturbation, CaseId, CaseSigma, CaseSpec};
use crate::collision::{build_collision_operator, CollisionOperator, Kernel};
use crate::coupled::{run_coupled, run_stability, CoupledSetup, StabilityRun};
use crate::error::{Error, Result};
use crate::halfspace::build_halfspace_system;
use crate::heat::{run_heat, HeatGrid};
use crate::kinetic::{run_reference, KineticGrid, SigmaProfile};
use crate::metrics::{error_norms, ErrorEntry, ErrorReport, ErrorRow};

/// Resolution and closure parameters for a whole experiment batch.
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub n_mu: usize,
    pub halfspace_order: usize,
    pub alpha: f64,
    pub kernel: Kernel,
    /// Reference cell width; None selects `min(5e-4, eps/25)` per run.
    pub kinetic_dx: Option<f64>,
    pub cfl: f64,
    /// Cap the reference step at `eps^2` (splitting accuracy).
    pub cap_dt: bool,
    pub heat_dx: f64,
    pub heat_dt: f64,
    /// Interface position for the coupled cases.
    pub x_m: f64,
    /// Kinetic cell width of the coupled solver.
    pub coupled_dx: f64,
    /// Window for the inner error norms.
    pub inner: (f64, f64),
    pub threads: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            n_mu: 32,
            halfspace_order: 16,
            alpha: 0.1,
            kernel: Kernel::Anisotropic,
            kinetic_dx: None,
            cfl: 0.5,
            cap_dt: true,
            heat_dx: 1e-3,
            heat_dt: 2.5e-4,
            x_m: 0.0,
            coupled_dx: 5e-3,
            inner: (-0.9, 0.9),
            threads: 1,
        }
    }
}

/// Reference cell width rule for scale `eps`.
pub fn reference_dx(eps: f64) -> f64 {
    (5e-4f64).min(eps / 25.0)
}

/// Shared immutable pieces: the collision operator, the end-state covector
/// used to derive heat boundary data from kinetic boundary data, and the
/// constants the cases need.
pub struct SuiteContext {
    pub params: SuiteParams,
    pub angular: AngularGrid,
    pub op: CollisionOperator,
    /// End-state covector on the half-space quadrature nodes.
    pub end_state: DVector<f64>,
    pub end_state_nodes: Vec<f64>,
    /// End state of incoming data `|mu|`; feeds the derived case data.
    pub eta: f64,
    /// Diffusion coefficient of the kernel.
    pub lambda: f64,
}

impl SuiteContext {
    /// Left heat boundary value matched to `phi_a` at time `t`.
    pub fn theta_a_of<F: Fn(f64, f64) -> f64>(&self, t: f64, phi_a: &F) -> f64 {
        self.end_state_nodes
            .iter()
            .zip(self.end_state.iter())
            .map(|(&nu, &w)| w * phi_a(t, nu))
            .sum()
    }

    /// Right heat boundary value matched to `phi_b` at time `t`.
    pub fn theta_b_of<F: Fn(f64, f64) -> f64>(&self, t: f64, phi_b: &F) -> f64 {
        self.end_state_nodes
            .iter()
            .zip(self.end_state.iter())
            .map(|(&nu, &w)| w * phi_b(t, -nu))
            .sum()
    }

    fn coupled_setup(&self) -> CoupledSetup {
        CoupledSetup {
            lo: -1.0,
            hi: 1.0,
            x_m: self.params.x_m,
            kinetic_dx: self.params.coupled_dx,
            heat_dx: self.params.heat_dx,
            cfl: self.params.cfl,
            n_mu: self.params.n_mu,
            halfspace_order: self.params.halfspace_order,
            alpha: self.params.alpha,
            kernel: self.params.kernel.clone(),
        }
    }
}

pub fn build_suite_context(params: SuiteParams) -> Result<SuiteContext> {
    let angular = crate::angular::build_angular_grid(params.n_mu)?;
    let op = build_collision_operator(&params.kernel, params.n_mu - 1, &angular)?;
    let sys = build_halfspace_system(&op, params.halfspace_order, params.alpha)?;
    let end_state = sys.end_state_covector()?;
    let end_state_nodes = sys.basis.rule.nodes.clone();
    let eta = end_state_nodes
        .iter()
        .zip(end_state.iter())
        .map(|(&nu, &w)| w * nu)
        .sum();
    let lambda = op.diffusion_coefficient();
    Ok(SuiteContext {
        params,
        angular,
        op,
        end_state,
        end_state_nodes,
        eta,
        lambda,
    })
}

fn sigma_profile(sigma: CaseSigma, eps: f64, x_m: f64) -> SigmaProfile {
    match sigma {
        CaseSigma::Uniform => SigmaProfile::Uniform,
        CaseSigma::TwoZoneEps => SigmaProfile::TwoZone {
            interface: x_m,
            left: eps,
            right: 1.0,
        },
    }
}

/// Runs `f(0..n_jobs)`, fanning out over `threads` workers when asked; the
/// result order is by job index regardless of scheduling, so callers get
/// deterministic output and per-job failure reporting.
pub fn parallel_map<T, F>(n_jobs: usize, threads: usize, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = threads.min(n_jobs).max(1);
    if workers == 1 {
        return (0..n_jobs).map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<T>)>();
    thread::scope(|s| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let f = &f;
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n_jobs {
                    break;
                }
                let out = f(i);
                if tx.send((i, out)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut slots: Vec<Option<Result<T>>> = (0..n_jobs).map(|_| None).collect();
        for (i, r) in rx {
            slots[i] = Some(r);
        }
        slots
            .into_iter()
            .map(|s| s.expect("worker reported every claimed job"))
            .collect()
    })
}

/// One comparison point of the final-time profiles: the heat-type value and
/// the reference's angular mean at a shared abscissa.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub x: f64,
    pub theta: f64,
    pub mean_f: f64,
}

/// A pure run's error row together with the final-time profile pair.
#[derive(Debug, Clone)]
pub struct PureCaseData {
    pub row: ErrorRow,
    pub profile: Vec<ProfilePoint>,
}

/// One uniform-sigma comparison: resolved reference against the matched heat
/// solve, errors and profiles at the case's final time.
pub fn pure_case_data(ctx: &SuiteContext, case: &CaseSpec, eps: f64) -> Result<PureCaseData> {
    let dx = ctx.params.kinetic_dx.unwrap_or_else(|| reference_dx(eps));
    let n_x = (2.0 / dx).round().max(4.0) as usize;
    let grid = KineticGrid::new(-1.0, 1.0, n_x, ctx.angular.clone())?;
    let sigma = sigma_profile(case.sigma, eps, ctx.params.x_m);
    let run = run_reference(
        &grid,
        &ctx.op,
        &sigma,
        eps,
        |t, mu| (case.phi_a)(t, mu),
        |t, mu| (case.phi_b)(t, mu),
        |x, mu| (case.phi_0)(x, mu),
        case.t_end,
        ctx.params.cfl,
        ctx.params.cap_dt,
        &[],
    )?;
    let n_heat = (2.0 / ctx.params.heat_dx).round().max(3.0) as usize;
    let heat_grid = HeatGrid::new(-1.0, 1.0, n_heat)?;
    let states = run_heat(
        &heat_grid,
        ctx.lambda,
        |t| ctx.theta_a_of(t, &case.phi_a),
        |t| ctx.theta_b_of(t, &case.phi_b),
        |x| (case.theta_i)(x),
        case.t_end,
        ctx.params.heat_dt,
    )?;
    let last = states.last().expect("trajectory includes the final state");
    let errors = error_norms(&run.final_state, &grid, last, &heat_grid, ctx.params.inner)?;
    let profile = profile_points(&run.final_state, &grid, &heat_grid.centers, &last.values)?;
    Ok(PureCaseData {
        row: ErrorRow {
            eps,
            errors,
            ref_dx: grid.dx,
            heat_dx: heat_grid.dx,
        },
        profile,
    })
}

/// One uniform-sigma comparison: resolved reference against the matched heat
/// solve, errors at the case's final time.
pub fn pure_error_row(ctx: &SuiteContext, case: &CaseSpec, eps: f64) -> Result<ErrorRow> {
    Ok(pure_case_data(ctx, case, eps)?.row)
}

fn profile_points(
    reference: &crate::kinetic::KineticState,
    ref_grid: &KineticGrid,
    xs: &[f64],
    theta: &[f64],
) -> Result<Vec<ProfilePoint>> {
    let means = crate::metrics::interpolated_means(reference, ref_grid, xs)?;
    Ok(xs
        .iter()
        .zip(theta)
        .zip(&means)
        .map(|((&x, &th), &m)| ProfilePoint {
            x,
            theta: th,
            mean_f: m,
        })
        .collect())
}

/// Convergence study of the uniform-sigma cases in `ids` over `eps_list`,
/// one resolved reference and one heat solve per (case, eps).
pub fn run_pure_suite(
    ctx: &SuiteContext,
    ids: &[CaseId],
    eps_list: &[f64],
) -> Result<Vec<ErrorReport>> {
    for id in ids {
        if !id.is_pure() {
            return Err(Error::InvalidArgument(format!(
                "case '{}' is not a uniform-sigma case",
                id.name()
            )));
        }
    }
    let jobs: Vec<(usize, f64)> = ids
        .iter()
        .enumerate()
        .flat_map(|(k, _)| eps_list.iter().map(move |&e| (k, e)))
        .collect();
    let rows = parallel_map(jobs.len(), ctx.params.threads, |j| {
        let (k, eps) = jobs[j];
        let case = make_case(ids[k], ctx.eta);
        pure_error_row(ctx, &case, eps)
    });
    let mut per_case: Vec<Vec<ErrorRow>> = vec![Vec::new(); ids.len()];
    for (j, row) in rows.into_iter().enumerate() {
        per_case[jobs[j].0].push(row?);
    }
    Ok(ids
        .iter()
        .zip(per_case)
        .map(|(&id, rows)| ErrorReport::new(id, rows))
        .collect())
}

/// Errors of one coupled case at one scale, measured at each requested time.
#[derive(Debug, Clone)]
pub struct CoupledCaseRow {
    pub eps: f64,
    pub at_times: Vec<(f64, ErrorEntry)>,
    pub ref_dx: f64,
    pub coupled_dx: f64,
}

/// A coupled case compared against its resolved reference over `eps_list`.
#[derive(Debug, Clone)]
pub struct CoupledCaseReport {
    pub case: CaseId,
    /// Rows sorted by descending `eps`.
    pub rows: Vec<CoupledCaseRow>,
}

/// A coupled run's error row together with the final-time profile pair on
/// the heat subdomain.
#[derive(Debug, Clone)]
pub struct CoupledCaseData {
    pub row: CoupledCaseRow,
    pub profile: Vec<ProfilePoint>,
}

/// One coupled comparison: two-zone resolved reference against the
/// domain-decomposition solver, heat-subdomain errors at `times` (the final
/// time is appended when absent) and profiles at the final time.
pub fn coupled_case_data(
    ctx: &SuiteContext,
    case: &CaseSpec,
    eps: f64,
    times: &[f64],
) -> Result<CoupledCaseData> {
    let mut marks: Vec<f64> = times.to_vec();
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if marks.last().is_none_or(|&t| t < case.t_end - 1e-12) {
        marks.push(case.t_end);
    }

    let dx = ctx.params.kinetic_dx.unwrap_or_else(|| reference_dx(eps));
    let n_x = (2.0 / dx).round().max(4.0) as usize;
    let grid = KineticGrid::new(-1.0, 1.0, n_x, ctx.angular.clone())?;
    let sigma = sigma_profile(case.sigma, eps, ctx.params.x_m);
    let reference = run_reference(
        &grid,
        &ctx.op,
        &sigma,
        eps,
        |t, mu| (case.phi_a)(t, mu),
        |t, mu| (case.phi_b)(t, mu),
        |x, mu| (case.phi_0)(x, mu),
        case.t_end,
        ctx.params.cfl,
        ctx.params.cap_dt,
        &marks,
    )?;

    let setup = ctx.coupled_setup();
    let coupled = run_coupled(
        &setup,
        eps,
        |t, mu| (case.phi_a)(t, mu),
        |t, mu| (case.phi_b)(t, mu),
        |x, mu| (case.phi_0)(x, mu),
        |x| (case.theta_i)(x),
        case.t_end,
        &marks,
    )?;

    let heat_grid = &coupled.final_state.heat_grid;
    let mut at_times = Vec::with_capacity(marks.len());
    for (ref_snap, heat_snap) in reference
        .snapshots
        .iter()
        .zip(coupled.theta_snapshots.iter())
    {
        let errors = error_norms(ref_snap, &grid, heat_snap, heat_grid, ctx.params.inner)?;
        at_times.push((heat_snap.t, errors));
    }
    let profile = profile_points(
        &reference.final_state,
        &grid,
        &heat_grid.centers,
        &coupled.final_state.heat.values,
    )?;
    Ok(CoupledCaseData {
        row: CoupledCaseRow {
            eps,
            at_times,
            ref_dx: grid.dx,
            coupled_dx: setup.kinetic_dx,
        },
        profile,
    })
}

/// One coupled comparison: two-zone resolved reference against the
/// domain-decomposition solver, heat-subdomain errors at `times`.
pub fn coupled_error_row(
    ctx: &SuiteContext,
    case: &CaseSpec,
    eps: f64,
    times: &[f64],
) -> Result<CoupledCaseRow> {
    Ok(coupled_case_data(ctx, case, eps, times)?.row)
}

/// Coupled-case study over `eps_list`, errors at `times` per run.
pub fn run_coupled_suite(
    ctx: &SuiteContext,
    ids: &[CaseId],
    eps_list: &[f64],
    times: &[f64],
) -> Result<Vec<CoupledCaseReport>> {
    for id in ids {
        if !id.is_coupled() {
            return Err(Error::InvalidArgument(format!(
                "case '{}' is not a coupled case",
                id.name()
            )));
        }
    }
    let jobs: Vec<(usize, f64)> = ids
        .iter()
        .enumerate()
        .flat_map(|(k, _)| eps_list.iter().map(move |&e| (k, e)))
        .collect();
    let rows = parallel_map(jobs.len(), ctx.params.threads, |j| {
        let (k, eps) = jobs[j];
        let case = make_case(ids[k], ctx.eta);
        coupled_error_row(ctx, &case, eps, times)
    });
    let mut per_case: Vec<Vec<CoupledCaseRow>> = vec![Vec::new(); ids.len()];
    for (j, row) in rows.into_iter().enumerate() {
        per_case[jobs[j].0].push(row?);
    }
    Ok(ids
        .iter()
        .zip(per_case)
        .map(|(&id, mut rows)| {
            rows.sort_by(|a, b| b.eps.partial_cmp(&a.eps).unwrap());
            CoupledCaseReport { case: id, rows }
        })
        .collect())
}

/// Interface stability probe at scale `eps` up to `t_end`, with the
/// benchmark perturbation.
pub fn run_stability_probe(ctx: &SuiteContext, eps: f64, t_end: f64) -> Result<StabilityRun> {
    run_stability(&ctx.coupled_setup(), eps, t_end, stability_perturbation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse_params() -> SuiteParams {
        SuiteParams {
            n_mu: 8,
            halfspace_order: 6,
            kinetic_dx: Some(2e-2),
            heat_dx: 1e-2,
            heat_dt: 1e-3,
            coupled_dx: 2.5e-2,
            ..SuiteParams::default()
        }
    }

    #[test]
    fn pure_suite_reports_ordered_finite_errors() {
        let ctx = build_suite_context(coarse_params()).unwrap();
        let reports =
            run_pure_suite(&ctx, &[CaseId::Pure1], &[1.0 / 8.0, 1.0 / 4.0]).unwrap();
        assert_eq!(reports.len(), 1);
        let report = &reports[0];
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows[0].eps > report.rows[1].eps);
        for row in &report.rows {
            let e = &row.errors;
            for v in [e.e_theta, e.e_f, e.e_theta_inner, e.e_f_inner] {
                assert!(v.is_finite() && (0.0..1.0).contains(&v));
            }
            assert!(e.e_theta <= e.e_f + 1e-15);
            assert!(e.e_theta_inner <= e.e_f_inner + 1e-15);
        }
        assert!(report.slopes.is_some());
    }

    #[test]
    fn suite_results_do_not_depend_on_thread_count() {
        let mut p1 = coarse_params();
        p1.threads = 1;
        let mut p3 = coarse_params();
        p3.threads = 3;
        let eps = [1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0];
        let r1 = run_pure_suite(&build_suite_context(p1).unwrap(), &[CaseId::Pure2], &eps)
            .unwrap();
        let r3 = run_pure_suite(&build_suite_context(p3).unwrap(), &[CaseId::Pure2], &eps)
            .unwrap();
        for (a, b) in r1[0].rows.iter().zip(&r3[0].rows) {
            assert_eq!(a.eps, b.eps);
            assert_eq!(a.errors, b.errors);
        }
    }

    #[test]
    fn coupled_suite_collects_errors_at_requested_times() {
        let ctx = build_suite_context(coarse_params()).unwrap();
        let reports = run_coupled_suite(
            &ctx,
            &[CaseId::Coupled1],
            &[1.0 / 8.0],
            &[0.05],
        )
        .unwrap();
        let row = &reports[0].rows[0];
        assert_eq!(row.at_times.len(), 2);
        assert!((row.at_times[0].0 - 0.05).abs() < 1e-12);
        assert!((row.at_times[1].0 - 0.1).abs() < 1e-12);
        for (_, e) in &row.at_times {
            assert!(e.e_theta.is_finite() && e.e_theta >= 0.0 && e.e_theta < 1.0);
            assert!(e.e_theta <= e.e_f + 1e-15);
        }
    }

    #[test]
    fn suite_rejects_misfiled_cases() {
        let ctx = build_suite_context(coarse_params()).unwrap();
        assert!(run_pure_suite(&ctx, &[CaseId::Coupled1], &[0.25]).is_err());
        assert!(run_coupled_suite(&ctx, &[CaseId::Pure1], &[0.25], &[]).is_err());
    }

    #[test]
    fn zero_perturbation_keeps_the_probe_silent() {
        let ctx = build_suite_context(coarse_params()).unwrap();
        let run = run_stability(&ctx.coupled_setup(), 0.25, 0.02, |_| 0.0).unwrap();
        assert!(run.history.iter().all(|&(_, d)| d == 0.0));
        assert!(run.final_state.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eta_matches_the_covector_pairing() {
        let ctx = build_suite_context(SuiteParams {
            n_mu: 16,
            halfspace_order: 8,
            ..coarse_params()
        })
        .unwrap();
        let direct =
            crate::halfspace::end_state_eta(&ctx.op, ctx.params.halfspace_order, ctx.params.alpha)
                .unwrap();
        assert!((ctx.eta - direct).abs() < 1e-12, "{} vs {direct}", ctx.eta);
    }
}
