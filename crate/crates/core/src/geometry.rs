//! Closed-form game geometry: parameters, Apollonius circles, capture points
//! and sensing-onset times.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this center norm the polar angle of an Apollonius center is undefined.
pub const DEGENERATE_CENTER_TOL: f64 = 1e-12;

/// Slack used by the breach/escape predicates so that exact tangency (the
/// generic case for engagements started on the engagement surface) is not
/// flipped by rounding.
pub const TANGENCY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `theta`.
    pub fn unit(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x: c, y: s }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::unit(theta) * r
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Direction of `self`, or `None` for (numerically) zero vectors.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 1e-15).then(|| self * (1.0 / n))
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Polar coordinates about the target center; `theta` is kept in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        debug_assert!(r >= 0.0, "negative polar radius {r}");
        Self {
            r,
            theta: wrap_angle(theta),
        }
    }

    pub fn from_cartesian(p: Vec2) -> Self {
        Self::new(p.norm(), p.angle())
    }

    pub fn to_cartesian(self) -> Vec2 {
        Vec2::from_polar(self.r, self.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Apollonius-circle coefficients derived from the speed ratio, plus the two
/// radii every other computation keeps asking for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Radius of the circle on which every capture happens.
    pub capture_radius: f64,
    /// Outer radius of the target sensing region.
    pub tsr_outer: f64,
}

/// The raw game parameters as they appear in config files and logs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub target_radius: f64,
    pub sensing_radius: f64,
    pub tsr_width: f64,
    pub speed_ratio: f64,
    pub period: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            target_radius: 4.0,
            sensing_radius: 1.0,
            tsr_width: 5.0,
            speed_ratio: 0.75,
            period: 2.0,
        }
    }
}

/// Validated game parameters.
///
/// Construction enforces positivity, `speed_ratio < 1`, and the two
/// inequalities that make every capturable intruder capturable inside the
/// sensing region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GameParams {
    raw: RawParams,
    coeffs: Coefficients,
}

impl GameParams {
    pub fn new(
        target_radius: f64,
        sensing_radius: f64,
        tsr_width: f64,
        speed_ratio: f64,
        period: f64,
    ) -> Result<Self> {
        validate_params(RawParams {
            target_radius,
            sensing_radius,
            tsr_width,
            speed_ratio,
            period,
        })
    }

    /// Parameters used throughout the experiments: `r_T = 4, rho_A = 1,
    /// rho_T = 5, nu = 0.75` with the given arrival period.
    pub fn defaults_with_period(period: f64) -> Result<Self> {
        validate_params(RawParams {
            period,
            ..RawParams::default()
        })
    }

    pub fn raw(&self) -> RawParams {
        self.raw
    }

    pub fn target_radius(&self) -> f64 {
        self.raw.target_radius
    }

    pub fn sensing_radius(&self) -> f64 {
        self.raw.sensing_radius
    }

    pub fn tsr_width(&self) -> f64 {
        self.raw.tsr_width
    }

    pub fn speed_ratio(&self) -> f64 {
        self.raw.speed_ratio
    }

    pub fn period(&self) -> f64 {
        self.raw.period
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn capture_radius(&self) -> f64 {
        self.coeffs.capture_radius
    }

    /// Defender radius within which any newly arriving intruder can be captured.
    pub fn guarantee_radius(&self) -> f64 {
        self.tsr_width() / self.speed_ratio() - self.target_radius()
    }

    pub fn tsr_outer(&self) -> f64 {
        self.coeffs.tsr_outer
    }

    /// Returns a copy with a different arrival period.
    pub fn with_period(&self, period: f64) -> Result<Self> {
        validate_params(RawParams { period, ..self.raw })
    }
}

impl TryFrom<RawParams> for GameParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        validate_params(raw)
    }
}

impl From<GameParams> for RawParams {
    fn from(p: GameParams) -> Self {
        p.raw
    }
}

/// Left-hand side of the first parameter condition,
/// `(1 + 2 nu / (1 - nu^2)) rho_A`.
pub fn sensing_condition_lhs(sensing_radius: f64, speed_ratio: f64) -> f64 {
    (1.0 + 2.0 * speed_ratio / (1.0 - speed_ratio * speed_ratio)) * sensing_radius
}

pub fn validate_params(raw: RawParams) -> Result<GameParams> {
    let named = [
        ("target_radius", raw.target_radius),
        ("sensing_radius", raw.sensing_radius),
        ("tsr_width", raw.tsr_width),
        ("speed_ratio", raw.speed_ratio),
        ("period", raw.period),
    ];
    for (name, value) in named {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::NonPositiveParameter { name, value });
        }
    }
    if raw.speed_ratio >= 1.0 {
        return Err(Error::AssumptionViolation {
            condition: "speed_ratio < 1",
            lhs: raw.speed_ratio,
            rhs: 1.0,
        });
    }

    let lhs = sensing_condition_lhs(raw.sensing_radius, raw.speed_ratio);
    if lhs > raw.tsr_width {
        return Err(Error::AssumptionViolation {
            condition: "(1 + 2 nu/(1 - nu^2)) rho_A <= rho_T",
            lhs,
            rhs: raw.tsr_width,
        });
    }
    let lhs = raw.speed_ratio * raw.target_radius;
    if lhs > raw.tsr_width {
        return Err(Error::AssumptionViolation {
            condition: "nu r_T <= rho_T",
            lhs,
            rhs: raw.tsr_width,
        });
    }

    Ok(GameParams {
        raw,
        coeffs: compute_coefficients(&raw),
    })
}

fn compute_coefficients(raw: &RawParams) -> Coefficients {
    let nu = raw.speed_ratio;
    let alpha = 1.0 / (1.0 - nu * nu);
    let gamma = nu * alpha;
    let beta = nu * gamma;
    Coefficients {
        alpha,
        beta,
        gamma,
        capture_radius: raw.target_radius + 2.0 * gamma * raw.sensing_radius,
        tsr_outer: raw.target_radius + raw.tsr_width,
    }
}

pub fn coefficients(params: &GameParams) -> Coefficients {
    params.coeffs
}

/// Set of points the intruder at `x_a` reaches no later than the defender at `x_d`.
pub fn apollonius(x_a: Vec2, x_d: Vec2, params: &GameParams) -> Circle {
    let c = params.coefficients();
    Circle {
        center: x_a * c.alpha - x_d * c.beta,
        radius: c.gamma * x_a.distance(x_d),
    }
}

/// Point of `circle` farthest from the target center.
pub fn farthest_point(circle: &Circle) -> Result<Vec2> {
    let norm = circle.center.norm();
    if norm < DEGENERATE_CENTER_TOL {
        return Err(Error::DegenerateCenter { norm });
    }
    Ok(circle.center + circle.center * (circle.radius / norm))
}

/// The circle reaches inside the target disk.
pub fn breach_possible(circle: &Circle, params: &GameParams) -> bool {
    circle.center.norm() - circle.radius < params.target_radius() - TANGENCY_TOL
}

/// The circle crosses the outer boundary of the sensing region.
pub fn escape_possible(circle: &Circle, params: &GameParams) -> bool {
    circle.center.norm() + circle.radius > params.tsr_outer() + TANGENCY_TOL
}

/// Time for both agents to meet at the farthest point of their Apollonius
/// circle when each runs straight at it.
pub fn capture_time(x_a: Vec2, x_d: Vec2, params: &GameParams) -> Result<f64> {
    let circle = apollonius(x_a, x_d, params);
    if circle.radius == 0.0 {
        return Ok(0.0);
    }
    let x_p = farthest_point(&circle)?;
    Ok(x_p.distance(x_a) / params.speed_ratio())
}

/// A straight-line motion `start + velocity * t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearMotion {
    pub start: Vec2,
    pub velocity: Vec2,
}

impl LinearMotion {
    pub fn new(start: Vec2, velocity: Vec2) -> Self {
        Self { start, velocity }
    }

    pub fn at(&self, t: f64) -> Vec2 {
        self.start + self.velocity * t
    }
}

/// Earliest `t` in `[0, horizon]` at which the two agents come within
/// `sensing_radius` of each other. Returns `Some(0.0)` if they already are.
pub fn sensing_onset(
    defender: LinearMotion,
    intruder: LinearMotion,
    sensing_radius: f64,
    horizon: f64,
) -> Option<f64> {
    let p = intruder.start - defender.start;
    let v = intruder.velocity - defender.velocity;
    let c = p.norm_sq() - sensing_radius * sensing_radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let a = v.norm_sq();
    let b = p.dot(v);
    if a <= 0.0 || b >= 0.0 {
        // static separation, or moving apart
        return None;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    // smaller root of a t^2 + 2 b t + c, in the cancellation-free form
    let t = c / (-b + disc.sqrt());
    (t <= horizon).then_some(t)
}

/// Earliest `s` in `(0, horizon]` at which `motion` reaches the circle of
/// `radius` about the origin, entering it when `inward` is true and leaving it
/// otherwise.
pub fn radius_crossing(motion: LinearMotion, radius: f64, inward: bool, horizon: f64) -> Option<f64> {
    let p = motion.start;
    let v = motion.velocity;
    let a = v.norm_sq();
    if a <= 0.0 {
        return None;
    }
    let b = p.dot(v);
    let c = p.norm_sq() - radius * radius;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let s = if inward {
        if c <= 0.0 || b >= 0.0 {
            return None;
        }
        c / (-b + sq)
    } else {
        if c >= 0.0 && b >= 0.0 {
            // already outside and moving outward
            return Some(0.0);
        }
        (-b + sq) / a
    };
    (s >= 0.0 && s <= horizon).then_some(s)
}
