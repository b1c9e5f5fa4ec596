//! Trial logs and the quantities read off them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GameParams, Vec2};
use crate::policy::StrategyConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    EngagementStart,
    Capture,
    Breach,
    Escape,
    Reselect,
    Anomaly,
}

/// One logged event. `id` is the intruder concerned and `(x, y)` the
/// relevant position: the intruder for arrivals and outcomes, the defender
/// for engagement starts and reselections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub id: usize,
    pub x: f64,
    pub y: f64,
    /// Start of the full-information phase, on capture events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engaged_at: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Event {
    pub fn new(t: f64, kind: EventKind, id: usize, at: Vec2) -> Self {
        Self {
            t,
            kind,
            id,
            x: at.x,
            y: at.y,
            engaged_at: None,
            note: None,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub arrived: u64,
    pub captured: u64,
    pub breached: u64,
    pub escaped: u64,
}

impl Counters {
    pub fn resolved(&self) -> u64 {
        self.captured + self.breached + self.escaped
    }

    /// Intruders still in play. `None` if more were resolved than arrived.
    pub fn live(&self) -> Option<u64> {
        self.arrived.checked_sub(self.resolved())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agent {
    Defender,
    Intruder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl Knot {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Piecewise-linear path of one agent, as the knots where its velocity changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub agent: Agent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<usize>,
    pub knots: Vec<Knot>,
}

impl Track {
    /// Position at `t`, interpolated between knots and held before the first
    /// and after the last.
    pub fn position_at(&self, t: f64) -> Option<Vec2> {
        let i = self.knots.partition_point(|k| k.t <= t);
        let (first, last) = (self.knots.first()?, self.knots.last()?);
        if i == 0 {
            return Some(first.position());
        }
        if i == self.knots.len() {
            return Some(last.position());
        }
        let (a, b) = (self.knots[i - 1], self.knots[i]);
        let s = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
        Some(a.position() + (b.position() - a.position()) * s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_index: Option<u64>,
    pub params: GameParams,
    pub strategy: StrategyConfig,
    pub horizon: f64,
    pub events: Vec<Event>,
    pub counters: Counters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<Track>>,
}

impl TrialRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn summary(&self) -> TrialSummary {
        TrialSummary::from_record(self)
    }
}

/// Captured-by-`t` over arrived-by-`t`. Before the first arrival the
/// fraction is 1 by convention (see [`TrialSummary::fraction_at`]).
pub fn capture_fraction(record: &TrialRecord, t: f64) -> f64 {
    record.summary().fraction_at(t)
}

/// Captured over resolved intruders; intruders still live at the horizon are
/// left out. 1 when nothing was resolved.
pub fn resolved_fraction(record: &TrialRecord) -> f64 {
    let c = record.counters;
    if c.resolved() == 0 {
        1.0
    } else {
        c.captured as f64 / c.resolved() as f64
    }
}

/// The parts of a record needed for capture-fraction curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub params: GameParams,
    pub strategy: StrategyConfig,
    pub horizon: f64,
    pub counters: Counters,
    pub arrival_times: Vec<f64>,
    pub capture_times: Vec<f64>,
    pub anomalies: usize,
}

impl TrialSummary {
    pub fn from_record(record: &TrialRecord) -> Self {
        let times = |kind| record.events_of(kind).map(|e| e.t).collect::<Vec<_>>();
        Self {
            seed: record.seed,
            params: record.params,
            strategy: record.strategy,
            horizon: record.horizon,
            counters: record.counters,
            arrival_times: times(EventKind::Arrival),
            capture_times: times(EventKind::Capture),
            anomalies: record.events_of(EventKind::Anomaly).count(),
        }
    }

    pub fn fraction_at(&self, t: f64) -> f64 {
        self.fraction_checked(t).unwrap_or_else(|| {
            log::debug!("capture fraction requested at t = {t} before the first arrival; using 1");
            1.0
        })
    }

    /// `None` before the first arrival.
    pub fn fraction_checked(&self, t: f64) -> Option<f64> {
        let arrived = self.arrival_times.partition_point(|&a| a <= t);
        let captured = self.capture_times.partition_point(|&c| c <= t);
        (arrived > 0).then(|| captured as f64 / arrived as f64)
    }

    pub fn final_fraction(&self) -> f64 {
        self.fraction_at(self.horizon)
    }

    pub fn resolved_fraction(&self) -> f64 {
        let c = self.counters;
        if c.resolved() == 0 {
            1.0
        } else {
            c.captured as f64 / c.resolved() as f64
        }
    }
}
