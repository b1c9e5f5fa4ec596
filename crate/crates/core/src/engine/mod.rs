//! Event-driven game loop.
//!
//! Between boundaries every agent moves in a straight line, so the next
//! boundary is the earliest of a handful of analytic times: the next arrival,
//! the defender reaching its waypoint or its engagement time, and for each
//! live intruder its target or sensing-region crossings, its sensing onset
//! against the defender, its probe checkpoint and its aim point. At a boundary
//! every condition is re-checked with a small tolerance, decisions are made,
//! and velocities are reset.
//!
//! [`Integration::FixedStep`] replaces the analytic scan by a uniform time
//! step and detects the same conditions as they become true. It exists as a
//! reference for tests.

mod record;
mod replay;
mod rng;

use serde::{Deserialize, Serialize};

pub use record::{
    capture_fraction, resolved_fraction, Agent, Counters, Event, EventKind, Knot, Track, TrialRecord,
    TrialSummary,
};
pub use replay::{verify_record, ReplayReport};
pub use rng::{schedule_arrivals, trial_seed, ArrivalStream};

use crate::engagement::{capturable_with, engagement_with, Approach, EngagementSolution, SeparationCache};
use crate::error::{Error, Result};
use crate::geometry::{
    apollonius, breach_possible, escape_possible, farthest_point, radius_crossing, sensing_onset, GameParams,
    LinearMotion, PolarPoint, Vec2,
};
use crate::policy::{defender_idle_motion, intruder_transition, select_with, IntruderMode, Observation, StrategyConfig};

/// Allowed distance between a capture point and the capture circle.
pub const CAPTURE_CIRCLE_TOL: f64 = 1e-6;
/// Position tolerance for conditions detected at a boundary.
const CONTACT_TOL: f64 = 1e-9;
/// The target may sense the defender this long before the planned engagement
/// time without it counting as premature.
const PREMATURE_MARGIN: f64 = 1e-7;
const SIMULTANEITY: f64 = 1e-12;
const VELOCITY_CHANGE: f64 = 1e-12;
/// Suggested interval for the optional periodic capturability re-test.
pub const IDLE_RECHECK: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integration {
    #[default]
    EventDriven,
    /// Uniform step of the given length.
    FixedStep(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOptions {
    pub integration: Integration,
    /// Constraint used when planning an engagement.
    pub approach: Approach,
    /// Interval between capturability re-tests while idle with intruders in
    /// play. `None` re-tests only when a new intruder arrives.
    pub idle_recheck: Option<f64>,
    pub emit_trajectories: bool,
    pub master_seed: Option<u64>,
    pub trial_index: Option<u64>,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            integration: Integration::EventDriven,
            approach: Approach::Unseen,
            idle_recheck: None,
            emit_trajectories: false,
            master_seed: None,
            trial_index: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntruderRecord {
    pub id: usize,
    pub arrival_time: f64,
    pub theta_arrival: f64,
    pub position: Vec2,
    pub mode: IntruderMode,
    pub outcome_time: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "activity", rename_all = "snake_case")]
pub enum Activity {
    Idle,
    TransitToEngagement {
        target: usize,
        plan: EngagementSolution,
        engage_at: f64,
    },
    Waiting {
        target: usize,
        plan: EngagementSolution,
        engage_at: f64,
    },
    Pursuing {
        target: usize,
        x_p: Vec2,
        engaged_at: f64,
    },
}

impl Activity {
    /// Intruder the defender is heading for but has not engaged yet.
    fn planned(&self) -> Option<(usize, f64)> {
        match *self {
            Activity::TransitToEngagement { target, engage_at, .. } | Activity::Waiting { target, engage_at, .. } => {
                Some((target, engage_at))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenderRecord {
    pub position: Vec2,
    pub activity: Activity,
}

/// Simulates one game from `t = 0` (defender at the target center) to
/// `horizon`.
pub fn run_trial(params: &GameParams, cfg: &StrategyConfig, horizon: f64, seed: u64) -> Result<TrialRecord> {
    run_trial_with(params, cfg, horizon, seed, &TrialOptions::default(), None)
}

pub fn run_trial_with(
    params: &GameParams,
    cfg: &StrategyConfig,
    horizon: f64,
    seed: u64,
    options: &TrialOptions,
    cache: Option<&SeparationCache>,
) -> Result<TrialRecord> {
    if !horizon.is_finite() || horizon < 0.0 {
        return Err(Error::config("horizon", &horizon.to_string(), "must be finite and non-negative"));
    }
    let step = match options.integration {
        Integration::EventDriven => None,
        Integration::FixedStep(dt) if dt > 0.0 && dt.is_finite() => Some(dt),
        Integration::FixedStep(dt) => return Err(Error::config("dt", &dt.to_string(), "must be positive")),
    };
    let arrivals = schedule_arrivals(horizon, params.period(), &mut ArrivalStream::new(seed));
    let mut sim = Sim::new(params, *cfg, horizon, step, arrivals, options, cache);
    sim.run()?;
    Ok(TrialRecord {
        seed,
        master_seed: options.master_seed,
        trial_index: options.trial_index,
        params: *params,
        strategy: *cfg,
        horizon,
        events: sim.events,
        counters: sim.counters,
        segments: sim.tracks.map(TrackLog::finish),
    })
}

struct Tolerances {
    defender_reach: f64,
    intruder_reach: f64,
    contact: f64,
    time: f64,
    capture_offset: f64,
    capture_circle: f64,
    premature: f64,
}

impl Tolerances {
    fn new(step: Option<f64>, speed_ratio: f64) -> Self {
        match step {
            None => Self {
                defender_reach: CONTACT_TOL,
                intruder_reach: CONTACT_TOL,
                contact: CONTACT_TOL,
                time: SIMULTANEITY,
                capture_offset: CAPTURE_CIRCLE_TOL,
                capture_circle: CAPTURE_CIRCLE_TOL,
                premature: PREMATURE_MARGIN,
            },
            Some(dt) => Self {
                defender_reach: dt * (1.0 + 1e-9),
                intruder_reach: speed_ratio * dt * (1.0 + 1e-9),
                contact: 0.0,
                time: 0.0,
                capture_offset: 20.0 * dt,
                capture_circle: 20.0 * dt,
                premature: 20.0 * dt,
            },
        }
    }
}

struct TrackLog {
    tracks: Vec<Track>,
    velocity: Vec<Option<Vec2>>,
}

impl TrackLog {
    fn new() -> Self {
        Self {
            tracks: vec![Track {
                agent: Agent::Defender,
                id: None,
                knots: Vec::new(),
            }],
            velocity: vec![None],
        }
    }

    fn slot(id: Option<usize>) -> usize {
        id.map_or(0, |i| i + 1)
    }

    /// Adds a knot if the agent starts, stops, or changes velocity.
    fn note(&mut self, id: Option<usize>, t: f64, at: Vec2, velocity: Option<Vec2>) {
        let slot = Self::slot(id);
        while self.tracks.len() <= slot {
            self.tracks.push(Track {
                agent: Agent::Intruder,
                id: Some(self.tracks.len() - 1),
                knots: Vec::new(),
            });
            self.velocity.push(None);
        }
        let knot = Knot { t, x: at.x, y: at.y };
        let track = &mut self.tracks[slot];
        let changed = match (self.velocity[slot], velocity) {
            (Some(a), Some(b)) => (a - b).norm() > VELOCITY_CHANGE,
            _ => true,
        };
        if track.knots.is_empty() || changed {
            track.knots.push(knot);
        }
        self.velocity[slot] = velocity;
    }

    fn finish(self) -> Vec<Track> {
        self.tracks
    }
}

struct Sim<'a> {
    params: &'a GameParams,
    cfg: StrategyConfig,
    horizon: f64,
    step: Option<f64>,
    approach: Approach,
    idle_recheck: Option<f64>,
    next_recheck: f64,
    steps_taken: u64,
    tol: Tolerances,
    cache: Option<&'a SeparationCache>,

    t: f64,
    defender: DefenderRecord,
    defender_velocity: Vec2,
    intruders: Vec<IntruderRecord>,
    velocities: Vec<Vec2>,
    in_range: Vec<bool>,
    fresh: Vec<bool>,
    live: Vec<usize>,

    arrivals: Vec<(f64, f64)>,
    next_arrival: usize,

    events: Vec<Event>,
    counters: Counters,
    tracks: Option<TrackLog>,
    /// Something happened at the current boundary (fixed-step mode only
    /// re-runs decisions then).
    dirty: bool,
}

impl<'a> Sim<'a> {
    fn new(
        params: &'a GameParams,
        cfg: StrategyConfig,
        horizon: f64,
        step: Option<f64>,
        arrivals: Vec<(f64, f64)>,
        options: &TrialOptions,
        cache: Option<&'a SeparationCache>,
    ) -> Self {
        Self {
            approach: options.approach,
            idle_recheck: options.idle_recheck.filter(|h| *h > 0.0),
            next_recheck: f64::INFINITY,
            params,
            cfg,
            horizon,
            step,
            steps_taken: 0,
            tol: Tolerances::new(step, params.speed_ratio()),
            cache,
            t: 0.0,
            defender: DefenderRecord {
                position: Vec2::ZERO,
                activity: Activity::Idle,
            },
            defender_velocity: Vec2::ZERO,
            intruders: Vec::with_capacity(arrivals.len()),
            velocities: Vec::with_capacity(arrivals.len()),
            in_range: Vec::with_capacity(arrivals.len()),
            fresh: Vec::with_capacity(arrivals.len()),
            live: Vec::new(),
            arrivals,
            next_arrival: 0,
            events: Vec::new(),
            counters: Counters::default(),
            tracks: options.emit_trajectories.then(TrackLog::new),
            dirty: true,
        }
    }

    fn run(&mut self) -> Result<()> {
        self.boundary()?;
        loop {
            let (next, on_grid) = match self.step {
                None => (self.next_event_time(), false),
                Some(dt) => {
                    // scheduled decision instants are hit exactly; crossings are found by stepping
                    let grid = (self.steps_taken + 1) as f64 * dt;
                    match self.scheduled_time() {
                        Some(at) if at < grid => (Some(at), false),
                        _ => (Some(grid), true),
                    }
                }
            };
            match next {
                Some(t) if t <= self.horizon => {
                    self.advance(t);
                    if on_grid {
                        self.steps_taken += 1;
                    }
                    self.boundary()?;
                }
                _ => {
                    self.advance(self.horizon);
                    break;
                }
            }
        }
        self.close_tracks();
        Ok(())
    }

    fn advance(&mut self, t: f64) {
        let dt = t - self.t;
        if dt > 0.0 {
            self.defender.position += self.defender_velocity * dt;
            for &id in &self.live {
                self.intruders[id].position += self.velocities[id] * dt;
            }
        }
        self.t = t.max(self.t);
    }

    /// Earliest planned decision instant: arrival, engagement start, probe
    /// checkpoint or idle re-test.
    fn scheduled_time(&self) -> Option<f64> {
        let now = self.t;
        let mut best = f64::INFINITY;
        let mut offer = |at: f64| {
            if at > now && at < best {
                best = at;
            }
        };
        if let Some(&(at, _)) = self.arrivals.get(self.next_arrival) {
            offer(at);
        }
        if let Activity::Waiting { engage_at, .. } = self.defender.activity {
            offer(engage_at);
        }
        offer(self.next_recheck);
        for &id in &self.live {
            if let IntruderMode::Probing { until, .. } = self.intruders[id].mode {
                offer(until);
            }
        }
        best.is_finite().then_some(best)
    }

    fn next_event_time(&self) -> Option<f64> {
        let now = self.t;
        let mut best = self.scheduled_time().unwrap_or(f64::INFINITY);
        let mut offer = |at: f64| {
            if at > now && at < best {
                best = at;
            }
        };
        let x_d = self.defender.position;
        match self.defender.activity {
            Activity::Idle => {
                if x_d.norm() > self.tol.defender_reach {
                    offer(now + x_d.norm());
                }
            }
            Activity::TransitToEngagement { plan, .. } => offer(now + x_d.distance(plan.x_eng)),
            Activity::Waiting { .. } => {}
            Activity::Pursuing { x_p, .. } => offer(now + x_d.distance(x_p)),
        }

        let remaining = self.horizon - now;
        let nu = self.params.speed_ratio();
        let me = LinearMotion::new(x_d, self.defender_velocity);
        let planned = self.defender.activity.planned();
        for &id in &self.live {
            let rec = &self.intruders[id];
            let motion = LinearMotion::new(rec.position, self.velocities[id]);
            if let Some(s) = radius_crossing(motion, self.params.target_radius(), true, remaining) {
                offer(now + s);
            }
            if let Some(s) = radius_crossing(motion, self.params.tsr_outer(), false, remaining) {
                offer(now + s);
            }
            if !self.in_range[id] {
                if let Some(s) = sensing_onset(me, motion, self.params.sensing_radius(), remaining) {
                    match planned {
                        // contact with the planned target at the engagement time is the engagement itself
                        Some((target, engage_at)) if target == id => {
                            if now + s < engage_at - self.tol.premature {
                                offer(now + s);
                            }
                        }
                        _ => offer(now + s),
                    }
                }
            }
            match rec.mode {
                IntruderMode::Probing { x_p, .. } => offer(now + rec.position.distance(x_p) / nu),
                IntruderMode::ConvergingToXp { x_p: aim } | IntruderMode::Breaching { aim } => {
                    let d = rec.position.distance(aim);
                    if d > self.tol.intruder_reach {
                        offer(now + d / nu);
                    }
                }
                _ => {}
            }
        }
        best.is_finite().then_some(best)
    }

    fn anomaly(&mut self, id: usize, at: Vec2, note: String) {
        log::debug!("anomaly at t={}: intruder {id}: {note}", self.t);
        let mut e = Event::new(self.t, EventKind::Anomaly, id, at);
        e.note = Some(note);
        self.events.push(e);
        self.dirty = true;
    }

    fn boundary(&mut self) -> Result<()> {
        self.dirty = self.step.is_none();
        let mut reselect = false;

        self.defender_milestones();
        self.intruder_milestones();
        if self.capture()? {
            reselect = true;
        }
        self.outcomes();
        let arrived = self.spawn_arrivals();
        if self.try_engage() {
            reselect = true;
        }
        self.update_contacts();
        if self.check_plan() {
            reselect = true;
        }
        let idle = matches!(self.defender.activity, Activity::Idle);
        let recheck_due = idle && self.t >= self.next_recheck - self.tol.time;
        if idle && (reselect || arrived || recheck_due) {
            self.select();
        }
        self.next_recheck = match (self.defender.activity, self.idle_recheck) {
            (Activity::Idle, Some(h)) if !self.live.is_empty() => {
                if recheck_due || reselect || arrived || !self.next_recheck.is_finite() {
                    self.t + h
                } else {
                    self.next_recheck
                }
            }
            _ => f64::INFINITY,
        };
        if !self.dirty {
            return Ok(());
        }
        self.defender_velocity = match self.defender.activity {
            Activity::Idle => defender_idle_motion(self.defender.position),
            Activity::TransitToEngagement { plan, .. } => {
                (plan.x_eng - self.defender.position).normalized().unwrap_or(Vec2::ZERO)
            }
            Activity::Waiting { .. } => Vec2::ZERO,
            Activity::Pursuing { x_p, .. } => (x_p - self.defender.position).normalized().unwrap_or(Vec2::ZERO),
        };
        self.transitions();

        self.live.retain(|&id| !self.intruders[id].mode.is_terminal());
        if self.counters.live() != Some(self.live.len() as u64) {
            return Err(Error::InternalInconsistency {
                t: self.t,
                detail: format!("counters {:?} disagree with {} live intruders", self.counters, self.live.len()),
            });
        }
        if let Some(log) = self.tracks.as_mut() {
            log.note(None, self.t, self.defender.position, Some(self.defender_velocity));
            for &id in &self.live {
                log.note(Some(id), self.t, self.intruders[id].position, Some(self.velocities[id]));
            }
        }
        Ok(())
    }

    fn defender_milestones(&mut self) {
        let reach = self.tol.defender_reach;
        match self.defender.activity {
            Activity::TransitToEngagement {
                target,
                plan,
                engage_at,
            } if self.defender.position.distance(plan.x_eng) <= reach => {
                self.defender.position = plan.x_eng;
                self.defender.activity = Activity::Waiting {
                    target,
                    plan,
                    engage_at,
                };
                self.dirty = true;
            }
            Activity::Idle if self.defender.position != Vec2::ZERO && self.defender.position.norm() <= reach => {
                self.defender.position = Vec2::ZERO;
                self.dirty = true;
            }
            _ => {}
        }
    }

    fn intruder_milestones(&mut self) {
        for i in 0..self.live.len() {
            let id = self.live[i];
            let rec = &mut self.intruders[id];
            match rec.mode {
                IntruderMode::Probing { x_p: aim, .. } | IntruderMode::ConvergingToXp { x_p: aim }
                    if rec.position != aim && rec.position.distance(aim) <= self.tol.intruder_reach =>
                {
                    rec.position = aim;
                    self.velocities[id] = Vec2::ZERO;
                    self.dirty = true;
                }
                IntruderMode::Breaching { aim } if aim != Vec2::ZERO && rec.position.distance(aim) <= self.tol.intruder_reach => {
                    // grazing breach: keep going for the center
                    rec.mode = IntruderMode::Breaching { aim: Vec2::ZERO };
                    self.dirty = true;
                }
                IntruderMode::Probing { until, .. } if self.t >= until - self.tol.time => {
                    self.dirty = true;
                }
                _ => {}
            }
        }
    }

    /// Returns true when the pursuit ended, successfully or not.
    fn capture(&mut self) -> Result<bool> {
        let Activity::Pursuing {
            target,
            x_p,
            engaged_at,
        } = self.defender.activity
        else {
            return Ok(false);
        };
        if self.defender.position.distance(x_p) > self.tol.defender_reach {
            return Ok(false);
        }
        self.defender.position = x_p;
        self.defender.activity = Activity::Idle;
        self.dirty = true;
        let rec = self.intruders[target];
        if rec.mode.is_terminal() || rec.position.distance(x_p) > self.tol.capture_offset {
            self.anomaly(
                target,
                x_p,
                format!(
                    "defender reached the capture point but the intruder is {} away ({})",
                    rec.position.distance(x_p),
                    rec.mode.name()
                ),
            );
            return Ok(true);
        }
        let off = (x_p.norm() - self.params.capture_radius()).abs();
        if off > self.tol.capture_circle {
            return Err(Error::InternalInconsistency {
                t: self.t,
                detail: format!("capture of intruder {target} lands {off:e} off the capture circle"),
            });
        }
        let rec = &mut self.intruders[target];
        rec.position = x_p;
        rec.mode = IntruderMode::Captured;
        rec.outcome_time = Some(self.t);
        self.velocities[target] = Vec2::ZERO;
        self.counters.captured += 1;
        let mut e = Event::new(self.t, EventKind::Capture, target, x_p);
        e.engaged_at = Some(engaged_at);
        self.events.push(e);
        self.note_terminal(target);
        Ok(true)
    }

    fn outcomes(&mut self) {
        let r_t = self.params.target_radius();
        let outer = self.params.tsr_outer();
        for i in 0..self.live.len() {
            let id = self.live[i];
            let rec = self.intruders[id];
            if rec.mode.is_terminal() {
                continue;
            }
            let r = rec.position.norm();
            let radial_speed = rec.position.dot(self.velocities[id]);
            let kind = if r < r_t || (r <= r_t + self.tol.contact && radial_speed < 0.0) {
                EventKind::Breach
            } else if r > outer + self.tol.contact || (r >= outer - self.tol.contact && radial_speed > 0.0) {
                EventKind::Escape
            } else {
                continue;
            };
            let rec = &mut self.intruders[id];
            if kind == EventKind::Breach {
                rec.mode = IntruderMode::Breached;
                self.counters.breached += 1;
            } else {
                rec.mode = IntruderMode::Escaped;
                self.counters.escaped += 1;
            }
            rec.outcome_time = Some(self.t);
            self.velocities[id] = Vec2::ZERO;
            self.events.push(Event::new(self.t, kind, id, rec.position));
            self.note_terminal(id);
            self.dirty = true;
        }
    }

    fn note_terminal(&mut self, id: usize) {
        if let Some(log) = self.tracks.as_mut() {
            log.note(Some(id), self.t, self.intruders[id].position, None);
        }
    }

    fn spawn_arrivals(&mut self) -> bool {
        let mut any = false;
        while let Some(&(at, theta)) = self.arrivals.get(self.next_arrival) {
            if at > self.t + self.tol.time {
                break;
            }
            let id = self.intruders.len();
            let position = Vec2::from_polar(self.params.tsr_outer(), theta);
            self.intruders.push(IntruderRecord {
                id,
                arrival_time: at,
                theta_arrival: theta,
                position,
                mode: IntruderMode::Incognito,
                outcome_time: None,
            });
            self.velocities.push(-Vec2::unit(theta) * self.params.speed_ratio());
            self.in_range.push(false);
            self.fresh.push(false);
            self.live.push(id);
            self.counters.arrived += 1;
            self.events.push(Event::new(self.t, EventKind::Arrival, id, position));
            self.next_arrival += 1;
            any = true;
        }
        if any {
            self.dirty = true;
        }
        any
    }

    /// Starts the full-information phase when the defender waits at the
    /// engagement point and the time has come. Returns true if the plan had to
    /// be dropped.
    fn try_engage(&mut self) -> bool {
        let Activity::Waiting {
            target, engage_at, ..
        } = self.defender.activity
        else {
            return false;
        };
        if self.t < engage_at - self.tol.time {
            return false;
        }
        self.dirty = true;
        let x_d = self.defender.position;
        let rec = self.intruders[target];
        if rec.mode.is_terminal() {
            self.defender.activity = Activity::Idle;
            self.anomaly(target, x_d, "planned target resolved before engagement".into());
            return true;
        }
        let circle = apollonius(rec.position, x_d, self.params);
        let x_p = match farthest_point(&circle) {
            Ok(x_p) if !breach_possible(&circle, self.params) && !escape_possible(&circle, self.params) => x_p,
            _ => {
                self.defender.activity = Activity::Idle;
                self.anomaly(target, x_d, "engagement circle reaches the target or the sensing-region edge".into());
                return true;
            }
        };
        self.defender.activity = Activity::Pursuing {
            target,
            x_p,
            engaged_at: self.t,
        };
        self.in_range[target] = true;
        self.fresh[target] = true;
        self.events.push(Event::new(self.t, EventKind::EngagementStart, target, x_d));
        false
    }

    fn update_contacts(&mut self) {
        let x_d = self.defender.position;
        let reach = self.params.sensing_radius() + self.tol.contact;
        let planned = self.defender.activity.planned();
        let pursued = match self.defender.activity {
            Activity::Pursuing { target, .. } => Some(target),
            _ => None,
        };
        for i in 0..self.live.len() {
            let id = self.live[i];
            let inside = self.intruders[id].position.distance(x_d) <= reach;
            // the full-information phase lasts until the outcome
            if !inside && pursued != Some(id) {
                self.in_range[id] = false;
                continue;
            }
            if self.in_range[id] {
                continue;
            }
            if let Some((target, engage_at)) = planned {
                if target == id {
                    if self.t >= engage_at - self.tol.premature {
                        // the engagement itself; handled when it starts
                        continue;
                    }
                    self.anomaly(id, x_d, format!("target sensed the defender {} early", engage_at - self.t));
                }
            }
            self.in_range[id] = true;
            self.fresh[id] = true;
            self.dirty = true;
        }
    }

    /// Drops a plan that no longer applies. Returns true if the defender must
    /// pick again.
    fn check_plan(&mut self) -> bool {
        let x_d = self.defender.position;
        match self.defender.activity {
            Activity::TransitToEngagement { target, .. } | Activity::Waiting { target, .. } => {
                let rec = self.intruders[target];
                if rec.mode.is_terminal() || !rec.mode.is_radial() || self.in_range[target] {
                    let mut e = Event::new(self.t, EventKind::Reselect, target, x_d);
                    e.note = Some(format!("planned target is {}", rec.mode.name()));
                    self.events.push(e);
                    self.defender.activity = Activity::Idle;
                    self.dirty = true;
                    return true;
                }
                false
            }
            Activity::Pursuing {
                target, engaged_at, ..
            } if engaged_at < self.t => {
                let mode = self.intruders[target].mode;
                if matches!(mode, IntruderMode::Probing { .. } | IntruderMode::ConvergingToXp { .. }) {
                    return false;
                }
                self.defender.activity = Activity::Idle;
                self.anomaly(target, x_d, format!("pursued intruder switched to {}", mode.name()));
                true
            }
            _ => false,
        }
    }

    fn select(&mut self) {
        self.dirty = true;
        let x_d = self.defender.position;
        let me = PolarPoint::from_cartesian(x_d);
        let mut excluded: Vec<usize> = Vec::new();
        loop {
            let candidates: Vec<(usize, PolarPoint)> = self
                .live
                .iter()
                .copied()
                .filter(|&id| {
                    let rec = &self.intruders[id];
                    rec.mode.is_radial() && !self.in_range[id] && !excluded.contains(&id)
                })
                .map(|id| (id, PolarPoint::from_cartesian(self.intruders[id].position)))
                .collect();
            let params = self.params;
            let cache = self.cache;
            let Some(id) = select_with(&candidates, x_d, &self.cfg, |p| capturable_with(me, p, params, cache)) else {
                self.defender.activity = Activity::Idle;
                return;
            };
            let intruder = PolarPoint::from_cartesian(self.intruders[id].position);
            match engagement_with(x_d, intruder, params, self.cfg.objective, self.approach) {
                Ok(plan) => {
                    self.defender.activity = Activity::TransitToEngagement {
                        target: id,
                        plan,
                        engage_at: self.t + plan.t_eng,
                    };
                    // the plan may start right here
                    self.defender_milestones();
                    self.try_engage();
                    return;
                }
                Err(e) => {
                    self.anomaly(id, x_d, format!("capturable but no engagement point found: {e}"));
                    excluded.push(id);
                }
            }
        }
    }

    fn transitions(&mut self) {
        let x_d = self.defender.position;
        let heading = self.defender_velocity.normalized();
        for i in 0..self.live.len() {
            let id = self.live[i];
            if self.intruders[id].mode.is_terminal() {
                continue;
            }
            let visible = self.in_range[id];
            let obs = Observation {
                defender: visible.then_some(x_d),
                heading: if visible { heading } else { None },
                fresh_contact: self.fresh[id],
            };
            self.fresh[id] = false;
            let tr = intruder_transition(&self.intruders[id], &obs, self.t, self.params);
            self.intruders[id].mode = tr.mode;
            self.velocities[id] = tr.velocity;
        }
    }

    fn close_tracks(&mut self) {
        if let Some(log) = self.tracks.as_mut() {
            let t = self.t;
            log.note(None, t, self.defender.position, None);
            for &id in &self.live {
                log.note(Some(id), t, self.intruders[id].position, None);
            }
        }
    }
}
