//! Decision rules for both sides: which intruder the defender goes after, and
//! how an intruder reacts once it senses the defender.

use serde::{Deserialize, Serialize};

use crate::engagement::{capturable_with, Objective};
use crate::engine::IntruderRecord;
use crate::error::{Error, Result};
use crate::geometry::{
    apollonius, breach_possible, escape_possible, farthest_point, Circle, GameParams, PolarPoint, Vec2,
};

/// How long an intruder moves toward its predicted capture point before
/// checking whether the defender follows.
pub const PROBE_INTERVAL: f64 = 1e-3;
/// Angular tolerance for "the defender moved toward x_p".
pub const PROBE_ALIGNMENT: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    /// 0 prioritizes the intruder closest to the target (earliest breach),
    /// 1 the intruder closest to the defender (nearest agent).
    pub weight: f64,
    pub objective: Objective,
}

impl StrategyConfig {
    pub fn new(weight: f64, objective: Objective) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::config("w", &weight.to_string(), "weight must lie in [0, 1]"));
        }
        Ok(Self { weight, objective })
    }

    pub fn earliest_breach() -> Self {
        Self {
            weight: 0.0,
            objective: Objective::MinTime,
        }
    }

    pub fn nearest_agent() -> Self {
        Self {
            weight: 1.0,
            objective: Objective::MinTime,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum IntruderMode {
    /// Has not seen the defender; moving radially inward.
    Incognito,
    /// Testing whether the defender is coming for it.
    Probing {
        x_p: Vec2,
        until: f64,
        defender_at_start: Vec2,
    },
    ConvergingToXp {
        x_p: Vec2,
    },
    /// Saw the defender but concluded it is busy elsewhere.
    ResumedRadial,
    Breaching {
        aim: Vec2,
    },
    Captured,
    Breached,
    Escaped,
}

impl IntruderMode {
    pub fn is_terminal(&self) -> bool {
        matches!(self, IntruderMode::Captured | IntruderMode::Breached | IntruderMode::Escaped)
    }

    /// Moving straight at the target center, hence predictable by the
    /// engagement surface.
    pub fn is_radial(&self) -> bool {
        matches!(self, IntruderMode::Incognito | IntruderMode::ResumedRadial)
    }

    pub fn name(&self) -> &'static str {
        match self {
            IntruderMode::Incognito => "incognito",
            IntruderMode::Probing { .. } => "probing",
            IntruderMode::ConvergingToXp { .. } => "converging_to_xp",
            IntruderMode::ResumedRadial => "resumed_radial",
            IntruderMode::Breaching { .. } => "breaching",
            IntruderMode::Captured => "captured",
            IntruderMode::Breached => "breached",
            IntruderMode::Escaped => "escaped",
        }
    }
}

/// Weighted selection score; lower is more urgent.
pub fn selection_score(x_a: Vec2, x_d: Vec2, weight: f64) -> f64 {
    (1.0 - weight) * x_a.norm() + weight * x_a.distance(x_d)
}

/// Picks the intruder to pursue among `intruders` (id, polar position).
/// Returns `None` when nothing is capturable.
pub fn defender_select(
    intruders: &[(usize, PolarPoint)],
    x_d: Vec2,
    cfg: &StrategyConfig,
    params: &GameParams,
) -> Option<usize> {
    let me = PolarPoint::from_cartesian(x_d);
    select_with(intruders, x_d, cfg, |p| capturable_with(me, p, params, None))
}

/// Same as [`defender_select`] with a caller-supplied capturability test.
pub fn select_with(
    intruders: &[(usize, PolarPoint)],
    x_d: Vec2,
    cfg: &StrategyConfig,
    mut capturable: impl FnMut(PolarPoint) -> bool,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &(id, polar) in intruders {
        let score = selection_score(polar.to_cartesian(), x_d, cfg.weight);
        let improves = match best {
            None => true,
            Some((s, best_id)) => score < s || (score == s && id < best_id),
        };
        if improves && capturable(polar) {
            best = Some((score, id));
        }
    }
    best.map(|(_, id)| id)
}

/// Unit-speed velocity toward the target center, zero once there.
pub fn defender_idle_motion(x_d: Vec2) -> Vec2 {
    if x_d.norm() <= 1e-9 {
        return Vec2::ZERO;
    }
    -x_d.normalized().unwrap_or(Vec2::ZERO)
}

/// Point of a breach-feasible Apollonius circle closest to the target center.
pub fn breach_point(circle: &Circle, _params: &GameParams) -> Vec2 {
    match circle.center.normalized() {
        Some(dir) => circle.center - dir * circle.radius,
        None => circle.center - Vec2::new(circle.radius, 0.0),
    }
}

/// What an intruder can see at a decision instant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Observation {
    /// Defender position, when within sensing range.
    pub defender: Option<Vec2>,
    /// Direction the defender is currently moving in, if it moves.
    pub heading: Option<Vec2>,
    /// The defender just entered sensing range (or just started an
    /// engagement), so the full Apollonius test runs again.
    pub fresh_contact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub mode: IntruderMode,
    pub velocity: Vec2,
}

fn radial_velocity(position: Vec2, speed: f64) -> Vec2 {
    position.normalized().map(|u| -u * speed).unwrap_or(Vec2::ZERO)
}

fn velocity_toward(position: Vec2, aim: Vec2, speed: f64) -> Vec2 {
    (aim - position).normalized().map(|u| u * speed).unwrap_or(Vec2::ZERO)
}

fn aligned(heading: Vec2, wanted: Vec2) -> bool {
    heading.cross(wanted).atan2(heading.dot(wanted)).abs() <= PROBE_ALIGNMENT
}

/// Intruder behavior once it can see the defender (and the radial default
/// when it cannot).
pub fn intruder_transition(
    state: &IntruderRecord,
    obs: &Observation,
    now: f64,
    params: &GameParams,
) -> Transition {
    let nu = params.speed_ratio();
    let pos = state.position;
    let radial = |mode| Transition {
        mode,
        velocity: radial_velocity(pos, nu),
    };
    let toward = |mode, aim| Transition {
        mode,
        velocity: velocity_toward(pos, aim, nu),
    };

    // full Apollonius test against a visible defender
    let assess = |x_d: Vec2| -> Transition {
        let circle = apollonius(pos, x_d, params);
        if breach_possible(&circle, params) {
            let aim = breach_point(&circle, params);
            return toward(IntruderMode::Breaching { aim }, aim);
        }
        if escape_possible(&circle, params) {
            return radial(IntruderMode::ResumedRadial);
        }
        match farthest_point(&circle) {
            Ok(x_p) => toward(
                IntruderMode::Probing {
                    x_p,
                    until: now + PROBE_INTERVAL,
                    defender_at_start: x_d,
                },
                x_p,
            ),
            Err(_) => radial(IntruderMode::ResumedRadial),
        }
    };
    let breach_check = |x_d: Vec2, otherwise: Transition| -> Transition {
        let circle = apollonius(pos, x_d, params);
        if breach_possible(&circle, params) {
            let aim = breach_point(&circle, params);
            toward(IntruderMode::Breaching { aim }, aim)
        } else {
            otherwise
        }
    };

    match (state.mode, obs.defender) {
        (mode, _) if mode.is_terminal() => Transition {
            mode,
            velocity: Vec2::ZERO,
        },
        (IntruderMode::Breaching { aim }, _) => toward(IntruderMode::Breaching { aim }, aim),
        (_, None) => radial(IntruderMode::Incognito),
        (IntruderMode::Incognito, Some(x_d)) => assess(x_d),
        (_, Some(x_d)) if obs.fresh_contact => assess(x_d),
        (
            IntruderMode::Probing {
                x_p,
                until,
                defender_at_start,
            },
            Some(x_d),
        ) => {
            if now < until - 1e-12 {
                return toward(state.mode, x_p);
            }
            let followed = (x_d - defender_at_start)
                .normalized()
                .zip((x_p - defender_at_start).normalized())
                .is_some_and(|(moved, wanted)| aligned(moved, wanted));
            if followed {
                toward(IntruderMode::ConvergingToXp { x_p }, x_p)
            } else {
                breach_check(x_d, radial(IntruderMode::ResumedRadial))
            }
        }
        (IntruderMode::ConvergingToXp { x_p }, Some(x_d)) => {
            let pursued = obs
                .heading
                .zip((x_p - x_d).normalized())
                .is_some_and(|(h, wanted)| aligned(h, wanted));
            if pursued {
                toward(IntruderMode::ConvergingToXp { x_p }, x_p)
            } else {
                breach_check(x_d, radial(IntruderMode::ResumedRadial))
            }
        }
        (IntruderMode::ResumedRadial, Some(x_d)) => breach_check(x_d, radial(IntruderMode::ResumedRadial)),
        // terminal modes handled by the first arm
        (mode, Some(_)) => radial(mode),
    }
}
