//! Partial-information phase: the engagement surface, the maximum angular
//! separation that still allows capture, the capturable set, and the
//! earliest-engagement search.
//!
//! Most of the work happens in the intruder-aligned frame, where the intruder
//! sits on the positive x-axis and moves toward the origin. An engagement
//! point at time `t` is then `(r_a + rho_A cos d, rho_A sin d)` with
//! `r_a = r_A - nu t` and `d` the signed offset solving the surface equation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{apollonius, farthest_point, wrap_angle, GameParams, PolarPoint, Vec2};

/// Grid resolution (per branch) for the angular-separation maximization.
pub const SEPARATION_GRID: usize = 512;
/// Grid resolution (per branch) for the earliest-engagement search.
pub const ENGAGEMENT_GRID: usize = 2048;
/// Absolute slack on the reachability constraint `|x_eng - x_D| <= t_eng`.
pub const REACH_SLACK: f64 = 1e-9;
/// Slack on the arccos argument before a point is declared unreachable.
pub const ARCCOS_SLACK: f64 = 1e-9;

const GOLDEN_TOL: f64 = 1e-10;
const BISECT_TOL: f64 = 1e-13;
const INFEASIBLE_PENALTY: f64 = 1e3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Earliest reachable engagement time.
    #[default]
    MinTime,
    /// Engagement point closest to the defender.
    MinDistance,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MinTime => "min_time",
            Objective::MinDistance => "min_distance",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "min_time" | "min-time" => Ok(Objective::MinTime),
            "min_distance" | "min-distance" => Ok(Objective::MinDistance),
            other => Err(Error::config("objective", other, "expected min_time or min_distance")),
        }
    }
}

/// How the defender gets to the engagement point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    /// Only `|x_eng - x_D| <= t_eng` is required.
    #[default]
    Direct,
    /// Additionally, the straight run to `x_eng` followed by waiting there
    /// keeps the defender outside the intruder's sensing disk until `t_eng`.
    Unseen,
}

/// Interval of engagement times for which the surface equation has a solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDomain {
    pub t_min: f64,
    pub t_max: f64,
    /// Intruder radius at `t_max`.
    pub r_a_min: f64,
    /// Intruder radius at `t_min`.
    pub r_a_max: f64,
}

impl SurfaceDomain {
    fn grid(&self, n: usize) -> Vec<f64> {
        if self.t_max - self.t_min <= 0.0 {
            return vec![self.t_min];
        }
        let step = (self.t_max - self.t_min) / n as f64;
        (0..=n)
            .map(|i| if i == n { self.t_max } else { self.t_min + step * i as f64 })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngagementSolution {
    pub t_eng: f64,
    /// Absolute angle of the defender's offset on the intruder's sensing boundary.
    pub theta_eng: f64,
    pub x_eng: Vec2,
    /// Predicted capture point.
    pub x_p: Vec2,
    pub t_cap: f64,
    pub total_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationSolution {
    pub theta_max: f64,
    pub t_star: f64,
    /// Offset angle relative to the intruder's radial direction.
    pub theta_star: f64,
    pub r_eng: f64,
    pub phi_eng: f64,
    /// False when no point of the surface can be reached; `theta_max` is 0 then.
    pub reachable: bool,
}

/// Smallest intruder radius at which the engagement surface is non-empty.
pub fn surface_floor(params: &GameParams) -> f64 {
    let c = params.coefficients();
    params.target_radius() + (c.gamma - c.beta) * params.sensing_radius()
}

/// Intruder radius at which the surface starts (offset zero).
pub fn surface_ceiling(params: &GameParams) -> f64 {
    let c = params.coefficients();
    params.target_radius() + (c.gamma + c.beta) * params.sensing_radius()
}

/// Right-hand side of the surface equation, `sin^2((theta_eng - theta_A)/2)`,
/// as a function of the intruder's radius at the engagement instant.
pub fn surface_rhs(radius_at_engagement: f64, params: &GameParams) -> f64 {
    let c = params.coefficients();
    let rho = params.sensing_radius();
    let outer = params.target_radius() + c.gamma * rho;
    let inner = radius_at_engagement - c.beta * rho;
    (outer * outer - inner * inner) / (4.0 * c.beta * rho * radius_at_engagement)
}

/// Unsigned offset `|theta_eng - theta_A|` in `[0, pi]` on the surface.
pub fn surface_offset(radius_at_engagement: f64, params: &GameParams) -> f64 {
    let s = surface_rhs(radius_at_engagement, params).clamp(0.0, 1.0);
    2.0 * s.sqrt().asin()
}

pub fn surface_domain(r_a: f64, params: &GameParams) -> Result<SurfaceDomain> {
    let floor = surface_floor(params);
    if r_a < floor {
        return Err(Error::IntruderTooDeep { radius: r_a, floor });
    }
    let nu = params.speed_ratio();
    let r_a_max = r_a.min(surface_ceiling(params));
    Ok(SurfaceDomain {
        t_min: (r_a - r_a_max) / nu,
        t_max: (r_a - floor) / nu,
        r_a_min: floor,
        r_a_max,
    })
}

/// The two engagement angles (absolute, `theta_A + d` then `theta_A - d`) that
/// put the defender on the surface at time `t_eng`.
pub fn theta_on_surface(t_eng: f64, intruder: PolarPoint, params: &GameParams) -> Result<(f64, f64)> {
    let dom = surface_domain(intruder.r, params)?;
    if t_eng < dom.t_min - 1e-9 || t_eng > dom.t_max + 1e-9 {
        return Err(Error::OutOfDomain {
            t: t_eng,
            t_min: dom.t_min,
            t_max: dom.t_max,
        });
    }
    let d = surface_offset(intruder.r - t_eng * params.speed_ratio(), params);
    Ok((wrap_angle(intruder.theta + d), wrap_angle(intruder.theta - d)))
}

/// Engagement point in the intruder-aligned frame for a signed offset.
fn aligned_engagement_point(r_a: f64, t: f64, offset: f64, params: &GameParams) -> (Vec2, Vec2) {
    let radius = r_a - t * params.speed_ratio();
    let x_a = Vec2::new(radius, 0.0);
    (x_a, x_a + Vec2::unit(offset) * params.sensing_radius())
}

fn surface_point(r_a: f64, t: f64, sign: f64, params: &GameParams) -> (Vec2, Vec2) {
    let d = surface_offset(r_a - t * params.speed_ratio(), params);
    aligned_engagement_point(r_a, t, sign * d, params)
}

/// Maximum angular separation for one engagement point `(t_eng, offset)`.
///
/// `theta_eng_rel` is measured from the intruder's radial direction. The
/// result is clamped to `[0, pi]`.
pub fn theta_max(
    t_eng: f64,
    theta_eng_rel: f64,
    r: f64,
    r_a: f64,
    params: &GameParams,
) -> Result<SeparationSolution> {
    let (_, x_eng) = aligned_engagement_point(r_a, t_eng, theta_eng_rel, params);
    let r_eng = x_eng.norm();
    let phi_eng = x_eng.angle();
    let reach = if r <= 1e-12 {
        if r_eng <= t_eng + REACH_SLACK {
            PI
        } else {
            return Err(Error::Unreachable {
                argument: f64::INFINITY,
            });
        }
    } else {
        let arg = (r_eng * r_eng + r * r - t_eng * t_eng) / (2.0 * r_eng * r);
        if arg > 1.0 + ARCCOS_SLACK {
            return Err(Error::Unreachable { argument: arg });
        }
        arg.clamp(-1.0, 1.0).acos()
    };
    Ok(SeparationSolution {
        theta_max: (reach + phi_eng).clamp(0.0, PI),
        t_star: t_eng,
        theta_star: theta_eng_rel,
        r_eng,
        phi_eng,
        reachable: true,
    })
}

/// Penalized separation score along the positive branch of the surface.
/// Equals the clamped `theta_max` wherever the point is reachable.
struct SeparationProfile<'a> {
    params: &'a GameParams,
    r: f64,
    r_a: f64,
}

impl SeparationProfile<'_> {
    fn eval(&self, t: f64) -> (f64, bool) {
        let (_, x_eng) = surface_point(self.r_a, t, 1.0, self.params);
        let r_eng = x_eng.norm();
        let phi = x_eng.angle();
        if self.r <= 1e-12 {
            let excess = r_eng - t;
            return if excess <= REACH_SLACK {
                (PI, true)
            } else {
                (-INFEASIBLE_PENALTY * excess, false)
            };
        }
        let arg = (r_eng * r_eng + self.r * self.r - t * t) / (2.0 * r_eng * self.r);
        if arg > 1.0 + ARCCOS_SLACK {
            (phi - INFEASIBLE_PENALTY * (arg - 1.0), false)
        } else {
            ((arg.clamp(-1.0, 1.0).acos() + phi).clamp(0.0, PI), true)
        }
    }
}

/// Maximizes `theta_max` over the engagement surface of an intruder at radius
/// `r_a` for a defender at radius `r`.
///
/// Only the positive-offset branch is scanned: the negative branch mirrors the
/// engagement point, which flips the sign of `phi_eng` and leaves the arccos
/// term unchanged, so it never attains a larger value.
pub fn max_angular_separation(r: f64, r_a: f64, params: &GameParams) -> Result<SeparationSolution> {
    let dom = surface_domain(r_a, params)?;
    let profile = SeparationProfile { params, r, r_a };
    let ts = dom.grid(SEPARATION_GRID);
    let values: Vec<(f64, bool)> = ts.iter().map(|&t| profile.eval(t)).collect();

    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.1)
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i);

    let (mut t_best, mut v_best) = match best {
        Some(i) => (ts[i], values[i].0),
        None => {
            // A thin reachable sliver may sit between grid points; climb the
            // penalized score and accept the result only if it is reachable.
            let i = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let (lo, hi) = bracket(&ts, i);
            let t = golden_max(|t| profile.eval(t).0, lo, hi);
            match profile.eval(t) {
                (v, true) => (t, v),
                _ => return Ok(unreachable_solution(&dom, r, r_a, params)),
            }
        }
    };

    if let Some(i) = best {
        let (lo, hi) = bracket(&ts, i);
        if hi > lo {
            let t = golden_max(|t| profile.eval(t).0, lo, hi);
            if let (v, true) = profile.eval(t) {
                if v > v_best {
                    t_best = t;
                    v_best = v;
                }
            }
        }
    }

    let offset = surface_offset(r_a - t_best * params.speed_ratio(), params);
    let (_, x_eng) = aligned_engagement_point(r_a, t_best, offset, params);
    Ok(SeparationSolution {
        theta_max: v_best,
        t_star: t_best,
        theta_star: offset,
        r_eng: x_eng.norm(),
        phi_eng: x_eng.angle(),
        reachable: true,
    })
}

fn unreachable_solution(dom: &SurfaceDomain, _r: f64, r_a: f64, params: &GameParams) -> SeparationSolution {
    let offset = surface_offset(r_a - dom.t_max * params.speed_ratio(), params);
    let (_, x_eng) = aligned_engagement_point(r_a, dom.t_max, offset, params);
    SeparationSolution {
        theta_max: 0.0,
        t_star: dom.t_max,
        theta_star: offset,
        r_eng: x_eng.norm(),
        phi_eng: x_eng.angle(),
        reachable: false,
    }
}

fn bracket(ts: &[f64], i: usize) -> (f64, f64) {
    let lo = ts[i.saturating_sub(1)];
    let hi = ts[(i + 1).min(ts.len() - 1)];
    (lo, hi)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > GOLDEN_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Bisects for the boundary between `good` (predicate true) and `bad`.
/// Returns a point on the `good` side.
fn bisect(pred: impl Fn(f64) -> bool, mut good: f64, mut bad: f64) -> f64 {
    while (good - bad).abs() > BISECT_TOL {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Memo table for [`max_angular_separation`], keyed on the exact bit
/// patterns of `(r, r_a)`, so cached and uncached answers are identical.
#[derive(Debug)]
pub struct SeparationCache {
    params: GameParams,
    table: Mutex<HashMap<(u64, u64), SeparationSolution>>,
}

impl SeparationCache {
    pub fn new(params: GameParams) -> Self {
        Self {
            params,
            table: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, r: f64, r_a: f64) -> Result<SeparationSolution> {
        let key = (r.to_bits(), r_a.to_bits());
        if let Some(hit) = self.table.lock().expect("cache poisoned").get(&key) {
            return Ok(*hit);
        }
        let sol = max_angular_separation(r, r_a, &self.params)?;
        self.table.lock().expect("cache poisoned").insert(key, sol);
        Ok(sol)
    }

    pub fn len(&self) -> usize {
        self.table.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Whether the intruder lies in the defender's capturable set.
pub fn is_capturable(defender: PolarPoint, intruder: PolarPoint, params: &GameParams) -> bool {
    capturable_with(defender, intruder, params, None)
}

pub fn capturable_with(
    defender: PolarPoint,
    intruder: PolarPoint,
    params: &GameParams,
    cache: Option<&SeparationCache>,
) -> bool {
    let separation = wrap_angle(intruder.theta - defender.theta).abs();
    let sol = match cache {
        Some(c) => c.get(defender.r, intruder.r),
        None => max_angular_separation(defender.r, intruder.r, params),
    };
    match sol {
        Ok(s) => s.reachable && separation <= s.theta_max,
        Err(Error::IntruderTooDeep { radius, floor }) => {
            log::debug!("intruder at radius {radius} is below the surface floor {floor}; not capturable");
            false
        }
        Err(e) => {
            log::warn!("capturability check failed: {e}");
            false
        }
    }
}

/// Reachability search along one branch of the surface, in the aligned frame.
struct BranchSearch<'a> {
    params: &'a GameParams,
    r_a: f64,
    sign: f64,
    defender: Vec2,
}

/// Tolerance on leg endpoints when checking the transit leg.
const UNSEEN_SLACK: f64 = 1e-9;
/// Clearance kept from the sensing disk on the transit leg, so a planned
/// path never grazes it.
const UNSEEN_CLEARANCE: f64 = 1e-6;

impl BranchSearch<'_> {
    fn point(&self, t: f64) -> Vec2 {
        surface_point(self.r_a, t, self.sign, self.params).1
    }

    fn distance(&self, t: f64) -> f64 {
        self.point(t).distance(self.defender)
    }

    /// `|x_eng - x_D| - t`; reachable when `<= 0`.
    fn gap(&self, t: f64) -> f64 {
        self.distance(t) - t
    }

    /// Whether running straight to `x_eng(t)` and waiting there keeps the
    /// defender out of the sensing disk before `t`.
    fn unseen(&self, t: f64) -> bool {
        let rho = self.params.sensing_radius();
        let nu = self.params.speed_ratio();
        let x_eng = self.point(t);
        let d = x_eng.distance(self.defender);
        if d > 0.0 {
            // relative position q0 + s w on the transit leg s in [0, d]
            let w = (x_eng - self.defender) * (1.0 / d) + Vec2::new(nu, 0.0);
            let q0 = self.defender - Vec2::new(self.r_a, 0.0);
            let s = if w.norm_sq() > 0.0 {
                (-q0.dot(w) / w.norm_sq()).clamp(0.0, d)
            } else {
                0.0
            };
            if s < d - UNSEEN_SLACK && (q0 + w * s).norm() < rho + UNSEEN_CLEARANCE {
                return false;
            }
        }
        // while waiting, the intruder has to be closing in at t
        d >= t || x_eng.x - (self.r_a - nu * t) <= UNSEEN_SLACK
    }

    fn admissible(&self, t: f64) -> bool {
        self.gap(t) <= 0.0 && self.unseen(t)
    }

    fn earliest_unseen(&self, ts: &[f64]) -> Option<f64> {
        match ts.iter().position(|&t| self.admissible(t)) {
            Some(0) => Some(ts[0]),
            Some(i) => Some(bisect(|t| self.admissible(t), ts[i], ts[i - 1])),
            None => self.earliest(ts).filter(|&t| self.unseen(t)),
        }
    }

    fn closest_unseen(&self, ts: &[f64]) -> Option<f64> {
        let i = ts
            .iter()
            .enumerate()
            .filter(|(_, &t)| self.admissible(t))
            .min_by(|a, b| self.distance(*a.1).total_cmp(&self.distance(*b.1)))
            .map(|(i, _)| i);
        let Some(i) = i else {
            return self.earliest_unseen(ts);
        };
        let ok = |t: f64| self.admissible(t);
        let (mut lo, mut hi) = bracket(ts, i);
        if !ok(lo) {
            lo = bisect(ok, ts[i], lo);
        }
        if !ok(hi) {
            hi = bisect(ok, ts[i], hi);
        }
        let mut best = ts[i];
        if hi > lo {
            let t = golden_max(|t| -self.distance(t), lo, hi);
            if ok(t) && self.distance(t) < self.distance(best) {
                best = t;
            }
        }
        Some(best)
    }

    fn earliest(&self, ts: &[f64]) -> Option<f64> {
        let gaps: Vec<f64> = ts.iter().map(|&t| self.gap(t)).collect();
        match gaps.iter().position(|&g| g <= REACH_SLACK) {
            Some(0) => Some(ts[0]),
            Some(i) if gaps[i] <= 0.0 => Some(bisect(|t| self.gap(t) <= 0.0, ts[i], ts[i - 1])),
            Some(i) => Some(ts[i]),
            None => {
                let i = argmin(&gaps);
                let (lo, hi) = bracket(ts, i);
                let t = golden_max(|t| -self.gap(t), lo, hi);
                if self.gap(t) > REACH_SLACK {
                    return None;
                }
                if self.gap(lo) > 0.0 && self.gap(t) <= 0.0 {
                    Some(bisect(|s| self.gap(s) <= 0.0, t, lo))
                } else {
                    Some(t)
                }
            }
        }
    }

    fn closest(&self, ts: &[f64]) -> Option<f64> {
        let feasible = |t: f64| self.gap(t) <= REACH_SLACK;
        let i = ts
            .iter()
            .enumerate()
            .filter(|(_, &t)| feasible(t))
            .min_by(|a, b| self.distance(*a.1).total_cmp(&self.distance(*b.1)))
            .map(|(i, _)| i);
        let i = match i {
            Some(i) => i,
            // no reachable grid point; fall back on the most reachable one
            None => return self.earliest(ts),
        };
        let (mut lo, mut hi) = bracket(ts, i);
        if !feasible(lo) {
            lo = bisect(feasible, ts[i], lo);
        }
        if !feasible(hi) {
            hi = bisect(feasible, ts[i], hi);
        }
        let mut best = ts[i];
        if hi > lo {
            let t = golden_max(|t| -self.distance(t), lo, hi);
            if feasible(t) && self.distance(t) < self.distance(best) {
                best = t;
            }
        }
        Some(best)
    }
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Picks the engagement point for a capturable intruder.
///
/// The surface is scanned on both offset branches, then the best cell is
/// refined: by bisection on the reachability boundary for
/// [`Objective::MinTime`], by golden-section search for
/// [`Objective::MinDistance`]. Exact ties go to the non-negative offset.
pub fn earliest_engagement(
    x_d: Vec2,
    intruder: PolarPoint,
    params: &GameParams,
    objective: Objective,
) -> Result<EngagementSolution> {
    engagement_with(x_d, intruder, params, objective, Approach::Direct)
}

/// [`earliest_engagement`] with a choice of approach constraint.
pub fn engagement_with(
    x_d: Vec2,
    intruder: PolarPoint,
    params: &GameParams,
    objective: Objective,
    approach: Approach,
) -> Result<EngagementSolution> {
    let dom = surface_domain(intruder.r, params)?;
    let ts = dom.grid(ENGAGEMENT_GRID);
    let defender = x_d.rotate(-intruder.theta);

    let mut best: Option<(f64, f64, f64)> = None; // (key, t, sign)
    for sign in [1.0, -1.0] {
        let search = BranchSearch {
            params,
            r_a: intruder.r,
            sign,
            defender,
        };
        let found = match (objective, approach) {
            (Objective::MinTime, Approach::Direct) => search.earliest(&ts).map(|t| (t, t)),
            (Objective::MinTime, Approach::Unseen) => search.earliest_unseen(&ts).map(|t| (t, t)),
            (Objective::MinDistance, Approach::Direct) => search.closest(&ts).map(|t| (search.distance(t), t)),
            (Objective::MinDistance, Approach::Unseen) => {
                search.closest_unseen(&ts).map(|t| (search.distance(t), t))
            }
        };
        if let Some((key, t)) = found {
            let better = match best {
                None => true,
                Some((k, _, _)) => key < k - 1e-12,
            };
            if better {
                best = Some((key, t, sign));
            }
        }
    }

    let (_, t_eng, sign) = best.ok_or(Error::Infeasible { radius: intruder.r })?;
    let offset = sign * surface_offset(intruder.r - t_eng * params.speed_ratio(), params);
    let (x_a, x_eng) = aligned_engagement_point(intruder.r, t_eng, offset, params);
    let circle = apollonius(x_a, x_eng, params);
    let x_p = farthest_point(&circle)?;
    let t_cap = x_p.distance(x_a) / params.speed_ratio();
    Ok(EngagementSolution {
        t_eng,
        theta_eng: wrap_angle(intruder.theta + offset),
        x_eng: x_eng.rotate(intruder.theta),
        x_p: x_p.rotate(intruder.theta),
        t_cap,
        total_time: t_eng + t_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{breach_possible, escape_possible};
    use approx::assert_abs_diff_eq;

    fn defaults() -> GameParams {
        GameParams::defaults_with_period(2.0).unwrap()
    }

    const CAPTURE_RADIUS: f64 = 7.428_571_428_571_429;

    #[test]
    fn domain_for_boundary_arrival() {
        let d = surface_domain(9.0, &defaults()).unwrap();
        assert_abs_diff_eq!(d.t_min, 2.666_666_666_666_667, epsilon = 1e-12);
        assert_abs_diff_eq!(d.t_max, 6.095_238_095_238_095, epsilon = 1e-12);
        assert_abs_diff_eq!(d.r_a_min, 4.428_571_428_571_429, epsilon = 1e-12);
        assert_abs_diff_eq!(d.r_a_max, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn domain_starts_immediately_inside_ceiling() {
        let d = surface_domain(7.0, &defaults()).unwrap();
        assert_abs_diff_eq!(d.t_min, 0.0, epsilon = 1e-12);
        assert!(matches!(surface_domain(4.0, &defaults()), Err(Error::IntruderTooDeep { .. })));
    }

    #[test]
    fn domain_endpoints_match_bisection_on_rhs() {
        let p = defaults();
        for r_a in [9.0, 8.3, 7.5, 7.0, 6.0, 5.0, 4.5] {
            let d = surface_domain(r_a, &p).unwrap();
            let rhs = |t: f64| surface_rhs(r_a - t * 0.75, &p);
            // rhs increases with t on the domain
            let root = |target: f64| {
                let (mut lo, mut hi) = (0.0, r_a / 0.75 - 1e-9);
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if rhs(m) < target {
                        lo = m
                    } else {
                        hi = m
                    }
                }
                0.5 * (lo + hi)
            };
            assert_abs_diff_eq!(d.t_max, root(1.0), epsilon = 1e-9);
            if r_a > 7.0 {
                assert_abs_diff_eq!(d.t_min, root(0.0), epsilon = 1e-9);
            }
            for t in [d.t_min, 0.5 * (d.t_min + d.t_max), d.t_max] {
                let s = rhs(t);
                assert!((-1e-12..=1.0 + 1e-12).contains(&s));
            }
        }
    }

    #[test]
    fn theta_on_surface_endpoints() {
        let p = defaults();
        let (a, b) = theta_on_surface(2.666_666_666_666_667, PolarPoint::new(9.0, 0.0), &p).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-6);
        let (a, b) = theta_on_surface(6.095_238_095_238_095, PolarPoint::new(9.0, 0.0), &p).unwrap();
        assert_abs_diff_eq!(a.abs(), PI, epsilon = 1e-6);
        assert_abs_diff_eq!(b.abs(), PI, epsilon = 1e-6);
        let (a, b) = theta_on_surface(2.666_666_666_666_667, PolarPoint::new(9.0, 1.0), &p).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-6);
        assert!(matches!(
            theta_on_surface(7.0, PolarPoint::new(9.0, 0.0), &p),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn theta_max_at_surface_start() {
        let s = theta_max(2.666_666_666_666_667, 0.0, CAPTURE_RADIUS, 9.0, &defaults()).unwrap();
        assert_abs_diff_eq!(s.r_eng, 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.phi_eng, 0.0);
        assert_abs_diff_eq!(s.theta_max, 0.3390, epsilon = 1e-3);
    }

    #[test]
    fn theta_max_reduces_to_phi_when_exactly_reachable() {
        // pick r so that r_eng - r = t exactly
        let p = defaults();
        let (t, rel, r_a) = (3.0, 0.4, 9.0);
        let (_, x) = aligned_engagement_point(r_a, t, rel, &p);
        let r = x.norm() - t;
        let s = theta_max(t, rel, r, r_a, &p).unwrap();
        assert_abs_diff_eq!(s.theta_max, s.phi_eng, epsilon = 1e-6);
        assert!(s.phi_eng > 0.0);
        assert!(matches!(theta_max(t, rel, r - 0.1, r_a, &p), Err(Error::Unreachable { .. })));
    }

    #[test]
    fn defender_at_center_captures_any_arrival() {
        let s = max_angular_separation(0.0, 9.0, &defaults()).unwrap();
        assert_eq!(s.theta_max, PI);
        assert!(is_capturable(PolarPoint::new(0.0, 0.0), PolarPoint::new(9.0, 2.5), &defaults()));
    }

    /// Exhaustive-grid oracle on the positive and negative branches.
    fn grid_theta_max(r: f64, r_a: f64, p: &GameParams, n: usize) -> f64 {
        let d = surface_domain(r_a, p).unwrap();
        let mut best = 0.0f64;
        for i in 0..=n {
            let t = d.t_min + (d.t_max - d.t_min) * i as f64 / n as f64;
            let off = surface_offset(r_a - t * 0.75, p);
            for rel in [off, -off] {
                if let Ok(s) = theta_max(t, rel, r, r_a, p) {
                    best = best.max(s.theta_max);
                }
            }
        }
        best
    }

    #[test]
    fn max_separation_matches_exhaustive_grid() {
        let p = defaults();
        let oracle = grid_theta_max(CAPTURE_RADIUS, 9.0, &p, 10_000);
        let s = max_angular_separation(CAPTURE_RADIUS, 9.0, &p).unwrap();
        assert!((s.theta_max - oracle).abs() < 1e-4, "{} vs {}", s.theta_max, oracle);
        // frozen from an independent high-resolution scan
        assert_abs_diff_eq!(s.theta_max, 1.044_208, epsilon = 1e-5);
        assert!(s.theta_max < PI);
        for (r, r_a) in [(5.43, 9.0), (3.43, 9.0), (7.43, 8.0), (6.0, 7.2), (2.0, 5.0)] {
            let o = grid_theta_max(r, r_a, &p, 10_000);
            let s = max_angular_separation(r, r_a, &p).unwrap();
            assert!((s.theta_max - o).abs() < 1e-4, "r={r} r_a={r_a}: {} vs {o}", s.theta_max);
        }
    }

    #[test]
    fn maximizer_lies_on_surface() {
        let p = defaults();
        let s = max_angular_separation(CAPTURE_RADIUS, 9.0, &p).unwrap();
        let rhs = surface_rhs(9.0 - 0.75 * s.t_star, &p);
        assert_abs_diff_eq!((s.theta_star / 2.0).sin().powi(2), rhs, epsilon = 1e-9);
    }

    #[test]
    fn unreachable_surface_gives_zero() {
        let p = defaults();
        let s = max_angular_separation(CAPTURE_RADIUS, 6.0, &p).unwrap();
        assert!(!s.reachable);
        assert_eq!(s.theta_max, 0.0);
    }

    #[test]
    fn capturability_examples() {
        let p = defaults();
        assert!(!is_capturable(PolarPoint::new(CAPTURE_RADIUS, 0.0), PolarPoint::new(9.0, PI), &p));
        assert!(is_capturable(PolarPoint::new(CAPTURE_RADIUS, 0.0), PolarPoint::new(9.0, 0.5), &p));
        assert!(!is_capturable(PolarPoint::new(0.0, 0.0), PolarPoint::new(4.0, 0.0), &p));
        for (dth, ath) in [(0.3, 1.0), (-2.0, -1.4), (3.0, -3.0)] {
            assert_eq!(
                is_capturable(PolarPoint::new(CAPTURE_RADIUS, dth), PolarPoint::new(8.5, ath), &p),
                is_capturable(PolarPoint::new(CAPTURE_RADIUS, 0.0), PolarPoint::new(8.5, ath - dth), &p)
            );
        }
    }

    #[test]
    fn cache_returns_identical_solutions() {
        let p = defaults();
        let cache = SeparationCache::new(p);
        for (r, r_a) in [(7.4, 9.0), (3.0, 8.0), (7.4, 9.0)] {
            assert_eq!(cache.get(r, r_a).unwrap(), max_angular_separation(r, r_a, &p).unwrap());
        }
        assert_eq!(cache.len(), 2);
    }

    /// Bisection oracle for the first reachable surface time from the origin.
    fn origin_first_reach(p: &GameParams) -> f64 {
        let g = |t: f64| surface_point(9.0, t, 1.0, p).1.norm() - t;
        let (mut lo, mut hi) = (2.666_666_666_666_667, 6.095_238_095_238_095);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(m) > 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        hi
    }

    #[test]
    fn min_time_from_center() {
        let p = defaults();
        let sol = earliest_engagement(Vec2::ZERO, PolarPoint::new(9.0, 0.0), &p, Objective::MinTime).unwrap();
        let oracle = origin_first_reach(&p);
        assert_abs_diff_eq!(sol.t_eng, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.t_eng, 5.04, epsilon = 0.01);
        // frozen: first-capture time from an independent bisection computation
        assert_abs_diff_eq!(sol.total_time, 8.488_849, epsilon = 1e-5);
        assert_abs_diff_eq!(sol.x_p.norm(), CAPTURE_RADIUS, epsilon = 1e-9);
        assert!(sol.x_eng.norm() <= sol.t_eng + 1e-9);
        assert!(sol.theta_eng >= 0.0);
    }

    #[test]
    fn min_distance_from_center() {
        let p = defaults();
        let sol =
            earliest_engagement(Vec2::ZERO, PolarPoint::new(9.0, 0.0), &p, Objective::MinDistance).unwrap();
        assert_abs_diff_eq!(sol.x_eng.x, 3.428_571_428_571_429, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x_eng.y, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.t_eng, 6.095_238_095_238_095, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.total_time, 10.095_238_095_238_095, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.t_cap, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_travel_engagement() {
        let p = defaults();
        let intruder = PolarPoint::new(9.0, 0.7);
        let t_s = 4.0;
        let (a, _) = theta_on_surface(t_s, intruder, &p).unwrap();
        let x_a = Vec2::from_polar(9.0 - 0.75 * t_s, 0.7);
        let x_d = x_a + Vec2::unit(a);
        let sol = earliest_engagement(x_d, intruder, &p, Objective::MinDistance).unwrap();
        assert_abs_diff_eq!(sol.t_eng, t_s, epsilon = 1e-6);
        assert!(sol.x_eng.distance(x_d) < 1e-6);
        let fast = earliest_engagement(x_d, intruder, &p, Objective::MinTime).unwrap();
        assert!(fast.t_eng <= t_s + 1e-9);
    }

    #[test]
    fn engagement_circle_is_tangent() {
        let p = defaults();
        let x_d = Vec2::from_polar(CAPTURE_RADIUS, 0.9);
        for objective in [Objective::MinTime, Objective::MinDistance] {
            let sol = earliest_engagement(x_d, PolarPoint::new(9.0, 0.4), &p, objective).unwrap();
            let x_a = Vec2::from_polar(9.0 - 0.75 * sol.t_eng, 0.4);
            let c = apollonius(x_a, sol.x_eng, &p);
            assert!(!breach_possible(&c, &p));
            assert!(!escape_possible(&c, &p));
            assert_abs_diff_eq!(sol.x_p.norm(), CAPTURE_RADIUS, epsilon = 1e-8);
        }
    }

    #[test]
    fn infeasible_is_reported() {
        let p = defaults();
        let err = earliest_engagement(Vec2::from_polar(CAPTURE_RADIUS, 0.0), PolarPoint::new(9.0, PI), &p, Objective::MinTime)
            .unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn objective_parses() {
        assert_eq!("min_time".parse::<Objective>().unwrap(), Objective::MinTime);
        assert_eq!("min-distance".parse::<Objective>().unwrap(), Objective::MinDistance);
        assert!("fastest".parse::<Objective>().is_err());
    }
}
