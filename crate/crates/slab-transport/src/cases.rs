//! Benchmark problem definitions.
//!
//! Each case packages the kinetic data (boundary data `phi_a`, `phi_b` and
//! initial data `phi_0`) together with the matched heat data derived from
//! them: the end states of the boundary data and the angular mean of the
//! initial data. Data involving the end-state constant `eta = theta_inf(|mu|)`
//! take it as a constructor argument so the number always comes from the
//! half-space solver at run time, never from a literal.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type TimeAngleFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceAngleFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scattering layout a case runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseSigma {
    /// `sigma = 1` on the whole slab.
    Uniform,
    /// `sigma = eps` left of the interface, `1` right of it.
    TwoZoneEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseId {
    Pure1,
    Pure2,
    Pure3,
    Pure4,
    Pure5,
    Pure6,
    Coupled1,
    Coupled2,
    Coupled3,
    Stability,
}

impl CaseId {
    pub fn parse(s: &str) -> Result<CaseId> {
        match s {
            "pure1" => Ok(CaseId::Pure1),
            "pure2" => Ok(CaseId::Pure2),
            "pure3" => Ok(CaseId::Pure3),
            "pure4" => Ok(CaseId::Pure4),
            "pure5" => Ok(CaseId::Pure5),
            "pure6" => Ok(CaseId::Pure6),
            "coupled1" => Ok(CaseId::Coupled1),
            "coupled2" => Ok(CaseId::Coupled2),
            "coupled3" => Ok(CaseId::Coupled3),
            "stability" => Ok(CaseId::Stability),
            other => Err(Error::InvalidArgument(format!("unknown case '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseId::Pure1 => "pure1",
            CaseId::Pure2 => "pure2",
            CaseId::Pure3 => "pure3",
            CaseId::Pure4 => "pure4",
            CaseId::Pure5 => "pure5",
            CaseId::Pure6 => "pure6",
            CaseId::Coupled1 => "coupled1",
            CaseId::Coupled2 => "coupled2",
            CaseId::Coupled3 => "coupled3",
            CaseId::Stability => "stability",
        }
    }

    pub fn all() -> Vec<CaseId> {
        vec![
            CaseId::Pure1,
            CaseId::Pure2,
            CaseId::Pure3,
            CaseId::Pure4,
            CaseId::Pure5,
            CaseId::Pure6,
            CaseId::Coupled1,
            CaseId::Coupled2,
            CaseId::Coupled3,
            CaseId::Stability,
        ]
    }

    pub fn is_pure(&self) -> bool {
        matches!(
            self,
            CaseId::Pure1
                | CaseId::Pure2
                | CaseId::Pure3
                | CaseId::Pure4
                | CaseId::Pure5
                | CaseId::Pure6
        )
    }

    pub fn is_coupled(&self) -> bool {
        matches!(self, CaseId::Coupled1 | CaseId::Coupled2 | CaseId::Coupled3)
    }
}

/// One benchmark problem: kinetic data plus the derived heat data.
pub struct CaseSpec {
    pub id: CaseId,
    pub t_end: f64,
    pub sigma: CaseSigma,
    /// Left boundary data `phi_a(t, mu)`, used for `mu > 0`.
    pub phi_a: TimeAngleFn,
    /// Right boundary data `phi_b(t, mu)`, used for `mu < 0`.
    pub phi_b: TimeAngleFn,
    /// Initial data `phi_0(x, mu)`.
    pub phi_0: SpaceAngleFn,
    /// Derived left heat boundary value; None when the interface rule
    /// supplies it (coupled cases).
    pub theta_a: Option<TimeFn>,
    /// Derived right heat boundary value.
    pub theta_b: TimeFn,
    /// Derived heat initial data, the angular mean of `phi_0`.
    pub theta_i: SpaceFn,
}

/// The interface perturbation driving the stability probe, `p(s) = 1/(1+sqrt(s))`.
pub fn stability_perturbation(s: f64) -> f64 {
    1.0 / (1.0 + s.sqrt())
}

/// Builds the data for `id`. `eta` is the end state of the half-space
/// problem with incoming data `|mu|`, supplied by the caller from
/// `end_state_eta` so the derived heat data match the solver's own closure.
pub fn make_case(id: CaseId, eta: f64) -> CaseSpec {
    match id {
        CaseId::Pure1 => CaseSpec {
            id,
            t_end: 0.03,
            sigma: CaseSigma::Uniform,
            phi_a: Box::new(|_, _| 0.0),
            phi_b: Box::new(|_, _| 0.0),
            phi_0: Box::new(|x, _| (PI * x).sin()),
            theta_a: Some(Box::new(|_| 0.0)),
            theta_b: Box::new(|_| 0.0),
            theta_i: Box::new(|x| (PI * x).sin()),
        },
        CaseId::Pure2 => CaseSpec {
            id,
            t_end: 0.03,
            sigma: CaseSigma::Uniform,
            phi_a: Box::new(|_, _| 0.0),
            phi_b: Box::new(|_, _| 0.0),
            phi_0: Box::new(|x, mu: f64| (PI * x).sin() * (1.0 + 0.5 * mu.abs())),
            theta_a: Some(Box::new(|_| 0.0)),
            theta_b: Box::new(|_| 0.0),
            theta_i: Box::new(|x| 1.25 * (PI * x).sin()),
        },
        CaseId::Pure3 => CaseSpec {
            id,
            t_end: 0.03,
            sigma: CaseSigma::Uniform,
            phi_a: Box::new(|t, mu: f64| 1.5 + 100.0 * t * mu.abs()),
            phi_b: Box::new(|t, mu: f64| 1.5 + 100.0 * t * mu.abs()),
            phi_0: Box::new(|x, _| (PI * x).sin() + 1.5),
            theta_a: Some(Box::new(move |t| 1.5 + 100.0 * t * eta)),
            theta_b: Box::new(move |t| 1.5 + 100.0 * t * eta),
            theta_i: Box::new(|x| (PI * x).sin() + 1.5),
        },
        CaseId::Pure4 => CaseSpec {
            id,
            t_end: 0.03,
            sigma: CaseSigma::Uniform,
            phi_a: Box::new(|t, mu: f64| mu.abs() * (1.0 + 100.0 * t)),
            phi_b: Box::new(|t, mu: f64| mu.abs() * (1.0 + 100.0 * t)),
            phi_0: Box::new(move |_, mu: f64| eta * mu.abs() + 0.5 * eta),
            theta_a: Some(Box::new(move |t| eta * (1.0 + 100.0 * t))),
            theta_b: Box::new(move |t| eta * (1.0 + 100.0 * t)),
            theta_i: Box::new(move |_| eta),
        },
        CaseId::Pure5 => CaseSpec {
            id,
            t_end: 0.03,
            sigma: CaseSigma::Uniform,
            phi_a: Box::new(|_, _| 1.0),
            phi_b: Box::new(|_, _| 1.0),
            phi_0: Box::new(|_, _| 0.0),
            theta_a: Some(Box::new(|_| 1.0)),
            theta_b: Box::new(|_| 1.0),
            theta_i: Box::new(|_| 0.0),
        },
        CaseId::Pure6 => CaseSpec {
            id,
            t_end: 0.03,
            sigma: CaseSigma::Uniform,
            phi_a: Box::new(|_, mu: f64| mu.abs()),
            phi_b: Box::new(|_, mu: f64| mu.abs()),
            phi_0: Box::new(|_, mu: f64| mu.abs()),
            theta_a: Some(Box::new(move |_| eta)),
            theta_b: Box::new(move |_| eta),
            theta_i: Box::new(|_| 0.5),
        },
        CaseId::Coupled1 => CaseSpec {
            id,
            t_end: 0.1,
            sigma: CaseSigma::TwoZoneEps,
            phi_a: Box::new(|_, _| 0.0),
            phi_b: Box::new(|_, _| 0.0),
            phi_0: Box::new(|x, mu: f64| mu.abs() * (PI * x).sin()),
            theta_a: None,
            theta_b: Box::new(|_| 0.0),
            theta_i: Box::new(|x| 0.5 * (PI * x).sin()),
        },
        CaseId::Coupled2 => CaseSpec {
            id,
            t_end: 0.5,
            sigma: CaseSigma::TwoZoneEps,
            phi_a: Box::new(|t, mu: f64| mu.abs() * t + 1.0),
            phi_b: Box::new(|t, mu: f64| mu.abs() * t + 0.5),
            phi_0: Box::new(|x, _| 0.25 * (PI * x).cos() + 0.75),
            theta_a: None,
            theta_b: Box::new(move |t| eta * t + 0.5),
            theta_i: Box::new(|x| 0.25 * (PI * x).cos() + 0.75),
        },
        CaseId::Coupled3 => CaseSpec {
            id,
            t_end: 0.5,
            sigma: CaseSigma::TwoZoneEps,
            phi_a: Box::new(|t, mu: f64| mu.abs() * (t + 1.0)),
            phi_b: Box::new(|t, mu: f64| mu.abs() * (t + 1.0)),
            phi_0: Box::new(|_, mu: f64| mu.abs()),
            theta_a: None,
            theta_b: Box::new(move |t| eta * (t + 1.0)),
            theta_i: Box::new(|_| 0.5),
        },
        CaseId::Stability => CaseSpec {
            id,
            t_end: 0.1,
            sigma: CaseSigma::TwoZoneEps,
            phi_a: Box::new(|_, _| 0.0),
            phi_b: Box::new(|_, _| 0.0),
            phi_0: Box::new(|_, _| 0.0),
            theta_a: None,
            theta_b: Box::new(|_| 0.0),
            theta_i: Box::new(|_| 0.0),
        },
    }
}
