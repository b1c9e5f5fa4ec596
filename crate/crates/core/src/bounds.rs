//! Analytic lower bound on the Earliest Breach capture fraction.
//!
//! The defender is assumed to sit on the capture circle after each capture.
//! From there, intruders that arrived in the last few periods lie on orbits
//! of known radius, and only an arc of each orbit is capturable. The bound
//! combines the chance of finding such an intruder with the expected wait
//! when it does not.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::engagement::max_angular_separation;
use crate::error::{Error, Result};
use crate::geometry::GameParams;

/// How the capture-setup time is charged after `j` failed looks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupTime {
    /// The value at the capture circle, for every `j`.
    #[default]
    Fixed,
    /// Re-evaluated at the defender radius reached after `j` periods.
    Shrinking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub period: f64,
    pub k: usize,
    pub phi: Vec<f64>,
    pub q: Vec<f64>,
    pub p_omega: f64,
    pub ell: usize,
    pub p: Vec<f64>,
    pub t_star: f64,
    pub tau_avg: f64,
    pub t_1: f64,
    pub c_infinity: f64,
    /// Set when the raw formula exceeded 1.
    pub clamped: bool,
    pub setup_time: SetupTime,
}

impl BoundReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitArcs {
    pub k: usize,
    pub phi: Vec<f64>,
    pub q: Vec<f64>,
    pub p_omega: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureSequence {
    pub ell: usize,
    pub p: Vec<f64>,
    pub t_star: f64,
    /// Setup time after `j` failures, `j = 1..=ell`.
    pub t_star_after: Vec<f64>,
}

/// Largest capturable separation, or 0 when nothing on the surface is
/// reachable or the intruder is already below it.
fn separation_or_zero(r: f64, r_a: f64, params: &GameParams) -> Result<f64> {
    match max_angular_separation(r, r_a, params) {
        Ok(s) if s.reachable => Ok(s.theta_max.clamp(0.0, PI)),
        Ok(_) | Err(Error::IntruderTooDeep { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn ceil_count(x: f64) -> usize {
    // guard against 2.0000000000000004 style round-off
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// Number of orbits still inside the sensing region when the defender
/// finishes a capture.
pub fn orbit_count(params: &GameParams) -> usize {
    ceil_count(params.tsr_width() / (params.period() * params.speed_ratio()))
}

pub fn failure_count(params: &GameParams) -> usize {
    let gamma = params.coefficients().gamma;
    let span = 2.0 * params.target_radius() + 2.0 * gamma * params.sensing_radius()
        - params.tsr_width() / params.speed_ratio();
    ceil_count(span / params.period())
}

pub fn orbit_arcs(params: &GameParams) -> Result<OrbitArcs> {
    let k = orbit_count(params);
    let step = params.period() * params.speed_ratio();
    let phi = (0..k)
        .map(|i| separation_or_zero(params.capture_radius(), params.tsr_outer() - i as f64 * step, params))
        .collect::<Result<Vec<_>>>()?;
    let q: Vec<f64> = phi.iter().map(|a| (a / (2.0 * PI)).clamp(0.0, 1.0)).collect();
    let p_omega = 1.0 - q.iter().map(|q| 1.0 - q).product::<f64>();
    Ok(OrbitArcs { k, phi, q, p_omega })
}

pub fn failure_sequence(params: &GameParams) -> Result<FailureSequence> {
    let ell = failure_count(params);
    let guarantee = params.guarantee_radius();
    let outer = params.tsr_outer();
    let t_star_at = |r: f64| -> Result<f64> { Ok(max_angular_separation(r, outer, params)?.t_star) };
    let t_star = t_star_at(params.capture_radius())?;

    let mut p = Vec::with_capacity(ell);
    let mut t_star_after = Vec::with_capacity(ell);
    for i in 1..=ell {
        let mut r = params.capture_radius() - i as f64 * params.period();
        if r < 0.0 {
            log::debug!("defender radius after {i} periods is negative ({r}); clamping to 0");
            r = 0.0;
        }
        if r <= guarantee {
            p.push(1.0);
        } else {
            p.push((separation_or_zero(r, outer, params)? / (2.0 * PI)).clamp(0.0, 1.0));
        }
        t_star_after.push(t_star_at(r)?);
    }
    Ok(FailureSequence {
        ell,
        p,
        t_star,
        t_star_after,
    })
}

/// Expected time from one capture to the start of the next full-information
/// phase, under the bound's assumptions.
pub fn expected_setup(p_omega: f64, t_star: f64, p: &[f64], t_star_after: &[f64], period: f64) -> f64 {
    let mut miss_all = 1.0;
    let mut tail = 0.0;
    for (j, (&pj, &tj)) in p.iter().zip(t_star_after).enumerate() {
        tail += miss_all * pj * (tj + (j + 1) as f64 * period);
        miss_all *= 1.0 - pj;
    }
    p_omega * t_star + (1.0 - p_omega) * tail
}

pub fn tau_avg(params: &GameParams) -> Result<f64> {
    Ok(tau_avg_with(params, SetupTime::Fixed)?.0)
}

fn tau_avg_with(params: &GameParams, rule: SetupTime) -> Result<(f64, OrbitArcs, FailureSequence)> {
    let arcs = orbit_arcs(params)?;
    let fail = failure_sequence(params)?;
    let per_step = match rule {
        SetupTime::Fixed => vec![fail.t_star; fail.ell],
        SetupTime::Shrinking => fail.t_star_after.clone(),
    };
    let tau = expected_setup(arcs.p_omega, fail.t_star, &fail.p, &per_step, params.period());
    Ok((tau, arcs, fail))
}

/// Raw bound `T(1-nu) / (rho_A + (1-nu) tau)` before clamping.
pub fn bound_formula(period: f64, speed_ratio: f64, sensing_radius: f64, tau: f64) -> f64 {
    period * (1.0 - speed_ratio) / (sensing_radius + (1.0 - speed_ratio) * tau)
}

/// Time to capture the first intruder from the target center.
pub fn first_capture_time(params: &GameParams) -> f64 {
    params.tsr_width() / params.speed_ratio() - params.sensing_radius() / (1.0 + params.speed_ratio())
}

pub fn c_infinity(params: &GameParams) -> Result<(f64, BoundReport)> {
    c_infinity_with(params, SetupTime::Fixed)
}

pub fn c_infinity_with(params: &GameParams, rule: SetupTime) -> Result<(f64, BoundReport)> {
    let (tau, arcs, fail) = tau_avg_with(params, rule)?;
    let raw = bound_formula(params.period(), params.speed_ratio(), params.sensing_radius(), tau);
    let clamped = raw > 1.0;
    if clamped {
        log::info!("bound {raw} exceeds 1 at T = {}; clamping", params.period());
    }
    let c = raw.clamp(0.0, 1.0);
    let report = BoundReport {
        period: params.period(),
        k: arcs.k,
        phi: arcs.phi,
        q: arcs.q,
        p_omega: arcs.p_omega,
        ell: fail.ell,
        p: fail.p,
        t_star: fail.t_star,
        tau_avg: tau,
        t_1: first_capture_time(params),
        c_infinity: c,
        clamped,
        setup_time: rule,
    };
    Ok((c, report))
}
