//! Re-checks the engine invariants on a stored trial log without simulating.

use std::collections::HashMap;

use serde::Serialize;

use super::record::{Agent, Counters, EventKind, TrialRecord};
use crate::error::{Error, Result};

const CAPTURE_TOL: f64 = 1e-6;
const RADIUS_TOL: f64 = 1e-9;
const SPEED_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReplayReport {
    pub events: usize,
    pub counters: Counters,
    pub max_capture_offset: f64,
    pub tracks_checked: usize,
    pub anomalies: usize,
}

fn fail<T>(msg: String) -> Result<T> {
    Err(Error::InvariantViolation(msg))
}

pub fn verify_record(record: &TrialRecord) -> Result<ReplayReport> {
    let params = &record.params;
    let capture_radius = params.capture_radius();
    let mut report = ReplayReport {
        events: record.events.len(),
        ..ReplayReport::default()
    };
    let mut running = Counters::default();
    // per-intruder arrival and outcome times
    let mut arrived_at: HashMap<usize, f64> = HashMap::new();
    let mut resolved_at: HashMap<usize, (EventKind, f64)> = HashMap::new();
    let mut last_t = f64::NEG_INFINITY;

    for (i, e) in record.events.iter().enumerate() {
        if e.t.is_nan() || e.t < last_t {
            return fail(format!("event {i} at t={} precedes t={last_t}", e.t));
        }
        if e.t > record.horizon + 1e-9 {
            return fail(format!("event {i} at t={} is past the horizon", e.t));
        }
        last_t = e.t;
        let r = e.position().norm();
        match e.kind {
            EventKind::Arrival => {
                if arrived_at.insert(e.id, e.t).is_some() {
                    return fail(format!("intruder {} arrives twice", e.id));
                }
                if (r - params.tsr_outer()).abs() > RADIUS_TOL {
                    return fail(format!("intruder {} arrives at radius {r}", e.id));
                }
                running.arrived += 1;
            }
            EventKind::Capture | EventKind::Breach | EventKind::Escape => {
                if !arrived_at.contains_key(&e.id) {
                    return fail(format!("intruder {} resolved before arriving", e.id));
                }
                if resolved_at.insert(e.id, (e.kind, e.t)).is_some() {
                    return fail(format!("intruder {} resolved twice", e.id));
                }
                match e.kind {
                    EventKind::Capture => {
                        let off = (r - capture_radius).abs();
                        report.max_capture_offset = report.max_capture_offset.max(off);
                        if off > CAPTURE_TOL {
                            return fail(format!("capture of {} at radius {r}, off the capture circle by {off:e}", e.id));
                        }
                        running.captured += 1;
                    }
                    EventKind::Breach => {
                        if r > params.target_radius() + RADIUS_TOL {
                            return fail(format!("breach of {} at radius {r} outside the target", e.id));
                        }
                        running.breached += 1;
                    }
                    _ => {
                        if r < params.tsr_outer() - RADIUS_TOL {
                            return fail(format!("escape of {} at radius {r} inside the sensing region", e.id));
                        }
                        running.escaped += 1;
                    }
                }
            }
            EventKind::Anomaly => report.anomalies += 1,
            EventKind::EngagementStart | EventKind::Reselect => {}
        }
        if running.live().is_none() {
            return fail(format!("counters {running:?} after event {i} resolve more than arrived"));
        }
    }
    if running != record.counters {
        return fail(format!("event log counts {running:?} disagree with stored counters {:?}", record.counters));
    }
    report.counters = running;

    if let Some(tracks) = &record.segments {
        for tr in tracks {
            let (speed, id) = match (tr.agent, tr.id) {
                (Agent::Defender, _) => (1.0, None),
                (Agent::Intruder, Some(id)) => (params.speed_ratio(), Some(id)),
                (Agent::Intruder, None) => return fail("intruder track without an id".into()),
            };
            for w in tr.knots.windows(2) {
                let dt = w[1].t - w[0].t;
                if dt < 0.0 {
                    return fail(format!("track {id:?} goes back in time at t={}", w[1].t));
                }
                let moved = w[0].position().distance(w[1].position());
                if moved > speed * dt + SPEED_SLACK {
                    return fail(format!("track {id:?} moves {moved} in {dt} between t={} and t={}", w[0].t, w[1].t));
                }
            }
            if let Some(id) = id {
                verify_intruder_track(record, id, &tr.knots, resolved_at.get(&id).copied())?;
            }
            report.tracks_checked += 1;
        }
    }
    Ok(report)
}

fn verify_intruder_track(
    record: &TrialRecord,
    id: usize,
    knots: &[super::record::Knot],
    outcome: Option<(EventKind, f64)>,
) -> Result<()> {
    let params = &record.params;
    let r_t = params.target_radius();
    let breached_at = match outcome {
        Some((EventKind::Breach, t)) => Some(t),
        _ => None,
    };
    for w in knots.windows(2) {
        let (a, b) = (w[0].position(), w[1].position());
        // closest approach to the center along the segment
        let d = b - a;
        let s = if d.norm_sq() > 0.0 {
            (-a.dot(d) / d.norm_sq()).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let nearest = (a + d * s).norm();
        let ends_in_breach = breached_at.is_some_and(|t| (w[1].t - t).abs() <= 1e-9);
        if nearest < r_t - RADIUS_TOL && !ends_in_breach {
            return fail(format!("intruder {id} enters the target near t={} without a breach", w[1].t));
        }
        if a.norm().max(b.norm()) > params.tsr_outer() + RADIUS_TOL && outcome.map(|o| o.0) != Some(EventKind::Escape) {
            return fail(format!("intruder {id} leaves the sensing region near t={}", w[1].t));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_trial, run_trial_with, TrialOptions};
    use crate::geometry::GameParams;
    use crate::policy::StrategyConfig;

    fn sample() -> TrialRecord {
        let opts = TrialOptions {
            emit_trajectories: true,
            ..TrialOptions::default()
        };
        let p = GameParams::defaults_with_period(2.0).unwrap();
        run_trial_with(&p, &StrategyConfig::earliest_breach(), 120.0, 17, &opts, None).unwrap()
    }

    #[test]
    fn clean_record_passes() {
        let r = sample();
        let rep = verify_record(&r).unwrap();
        assert_eq!(rep.counters, r.counters);
        assert!(rep.max_capture_offset <= 1e-6);
        assert_eq!(rep.tracks_checked as u64, r.counters.arrived + 1);
        let bare = run_trial(&r.params, &r.strategy, 50.0, 3).unwrap();
        assert_eq!(verify_record(&bare).unwrap().tracks_checked, 0);
    }

    #[test]
    fn tampering_is_detected() {
        let r = sample();

        let mut moved = r.clone();
        let c = moved.events.iter_mut().find(|e| e.kind == EventKind::Capture).unwrap();
        c.x *= 1.001;
        assert!(matches!(verify_record(&moved), Err(Error::InvariantViolation(_))));

        let mut counts = r.clone();
        counts.counters.captured += 1;
        assert!(verify_record(&counts).is_err());

        let mut order = r.clone();
        order.events.swap(1, 3);
        assert!(verify_record(&order).is_err());

        let mut fast = r.clone();
        let knots = &mut fast.segments.as_mut().unwrap()[0].knots;
        let last = knots.len() - 1;
        knots[last].x += 5.0;
        assert!(verify_record(&fast).is_err());
    }
}
