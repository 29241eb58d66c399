//! Error norms between a resolved kinetic reference and a heat-type field,
//! and the log-log slope fit used by the convergence studies.
//!
//! All norms are discrete L2 norms over heat-grid cells (midpoint rule). The
//! angular measure carries the mean convention: direction j contributes with
//! weight `w_j / 2`, so a mu-independent mismatch gives `E_f = E_theta`. The
//! reference is moved onto the heat grid by clamped linear interpolation in
//! the cell centers.

use crate::cases::CaseId;
use crate::error::{Error, Result};
use crate::heat::{HeatGrid, HeatState};
use crate::kinetic::{KineticGrid, KineticState};

/// The four norms of one comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEntry {
    /// `|| theta - <f> ||` over the whole heat grid.
    pub e_theta: f64,
    /// `|| theta - f ||` in space and angle over the whole heat grid.
    pub e_f: f64,
    /// `e_theta` restricted to cells inside the inner window.
    pub e_theta_inner: f64,
    /// `e_f` restricted to cells inside the inner window.
    pub e_f_inner: f64,
}

/// Linear interpolation weights of `x` in the sorted abscissas `xs`,
/// clamped to the end values outside their span.
fn interp_weights(xs: &[f64], x: f64) -> (usize, usize, f64) {
    let n = xs.len();
    if x <= xs[0] {
        return (0, 0, 0.0);
    }
    if x >= xs[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let hi = xs.partition_point(|&v| v < x).min(n - 1);
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    (lo, hi, w)
}

/// Compares the heat field `theta` with the kinetic reference at the same
/// time: `E_theta` against the reference's angular mean and `E_f` against
/// the full density, each over the whole heat grid and over the cells whose
/// centers lie in `inner`.
pub fn error_norms(
    reference: &KineticState,
    ref_grid: &KineticGrid,
    theta: &HeatState,
    heat_grid: &HeatGrid,
    inner: (f64, f64),
) -> Result<ErrorEntry> {
    if (reference.t - theta.t).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "comparison times differ: {} vs {}",
            reference.t, theta.t
        )));
    }
    if reference.f.nrows() != ref_grid.n_x || theta.values.len() != heat_grid.n_x {
        return Err(Error::InvalidArgument(
            "state shapes do not match their grids".into(),
        ));
    }
    let means = reference.cell_means(&ref_grid.angular);
    let weights = &ref_grid.angular.weights;
    let n_mu = ref_grid.angular.len();

    let mut e_theta2 = 0.0;
    let mut e_f2 = 0.0;
    let mut e_theta2_in = 0.0;
    let mut e_f2_in = 0.0;
    for (i, &x) in heat_grid.centers.iter().enumerate() {
        let (lo, hi, w) = interp_weights(&ref_grid.centers, x);
        let th = theta.values[i];
        let dm = th - ((1.0 - w) * means[lo] + w * means[hi]);
        let cell_theta = dm * dm * heat_grid.dx;
        let mut cell_f = 0.0;
        for (j, &wj) in weights.iter().enumerate().take(n_mu) {
            let fx = (1.0 - w) * reference.f[(lo, j)] + w * reference.f[(hi, j)];
            let df = th - fx;
            cell_f += df * df * (0.5 * wj);
        }
        cell_f *= heat_grid.dx;
        e_theta2 += cell_theta;
        e_f2 += cell_f;
        if x >= inner.0 - 1e-12 && x <= inner.1 + 1e-12 {
            e_theta2_in += cell_theta;
            e_f2_in += cell_f;
        }
    }
    Ok(ErrorEntry {
        e_theta: e_theta2.sqrt(),
        e_f: e_f2.sqrt(),
        e_theta_inner: e_theta2_in.sqrt(),
        e_f_inner: e_f2_in.sqrt(),
    })
}

/// Angular means of the reference, clamped-linearly interpolated onto the
/// abscissas `xs`; the transfer matches the one inside [`error_norms`].
pub fn interpolated_means(
    reference: &KineticState,
    ref_grid: &KineticGrid,
    xs: &[f64],
) -> Result<Vec<f64>> {
    if reference.f.nrows() != ref_grid.n_x {
        return Err(Error::InvalidArgument(
            "state shape does not match its grid".into(),
        ));
    }
    let means = reference.cell_means(&ref_grid.angular);
    Ok(xs
        .iter()
        .map(|&x| {
            let (lo, hi, w) = interp_weights(&ref_grid.centers, x);
            (1.0 - w) * means[lo] + w * means[hi]
        })
        .collect())
}

/// Least-squares fit of `log E` against `log eps`; returns `(slope, intercept)`.
pub fn convergence_slope(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(e, v)| !(e > 0.0) || !(v > 0.0)) {
        return Err(Error::InvalidArgument(
            "slope fit requires positive abscissas and values".into(),
        ));
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(eps, val) in pairs {
        let x = eps.ln();
        let y = val.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-14 {
        return Err(Error::InvalidArgument(
            "slope fit needs at least two distinct abscissas".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept))
}

/// Errors of one case at one scale parameter.
#[derive(Debug, Clone, Copy)]
pub struct ErrorRow {
    pub eps: f64,
    pub errors: ErrorEntry,
    /// Reference cell width used for this row.
    pub ref_dx: f64,
    pub heat_dx: f64,
}

/// Fitted `(slope, intercept)` per metric.
#[derive(Debug, Clone, Copy)]
pub struct SlopeSet {
    pub theta: (f64, f64),
    pub f: (f64, f64),
    pub theta_inner: (f64, f64),
    pub f_inner: (f64, f64),
}

/// Convergence study of one case over a list of scale parameters.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub case: CaseId,
    /// Rows sorted by descending `eps`.
    pub rows: Vec<ErrorRow>,
    /// Present when every metric is positive at two or more scales.
    pub slopes: Option<SlopeSet>,
}

impl ErrorReport {
    pub fn new(case: CaseId, mut rows: Vec<ErrorRow>) -> Self {
        rows.sort_by(|a, b| b.eps.partial_cmp(&a.eps).unwrap());
        let fit = |pick: fn(&ErrorEntry) -> f64| -> Result<(f64, f64)> {
            let pairs: Vec<(f64, f64)> =
                rows.iter().map(|r| (r.eps, pick(&r.errors))).collect();
            convergence_slope(&pairs)
        };
        let slopes = match (
            fit(|e| e.e_theta),
            fit(|e| e.e_f),
            fit(|e| e.e_theta_inner),
            fit(|e| e.e_f_inner),
        ) {
            (Ok(theta), Ok(f), Ok(theta_inner), Ok(f_inner)) => Some(SlopeSet {
                theta,
                f,
                theta_inner,
                f_inner,
            }),
            _ => None,
        };
        ErrorReport { case, rows, slopes }
    }
}
