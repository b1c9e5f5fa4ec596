//! Independent re-derivations of the reference numbers used elsewhere.
//!
//! The engagement surface is found here by bisecting the tangency condition
//! directly on the offset angle, not through the closed form the library
//! uses, and the separation maximum by a fine grid plus ternary refinement.

use std::f64::consts::PI;

use target_defense::bounds::{c_infinity, failure_sequence, orbit_arcs};
use target_defense::engagement::{max_angular_separation, Objective};
use target_defense::engine::{run_trial, EventKind};
use target_defense::geometry::GameParams;
use target_defense::policy::StrategyConfig;

const R_T: f64 = 4.0;
const RHO_A: f64 = 1.0;
const RHO_T: f64 = 5.0;
const NU: f64 = 0.75;

struct Oracle {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl Oracle {
    fn new() -> Self {
        let alpha = 1.0 / (1.0 - NU * NU);
        Self {
            alpha,
            gamma: NU * alpha,
            beta: NU * NU * alpha,
        }
    }

    fn capture_radius(&self) -> f64 {
        R_T + 2.0 * self.gamma * RHO_A
    }

    /// Distance from the target boundary to the Apollonius circle for an
    /// intruder at `(ra, 0)` and a defender at offset angle `d`.
    fn clearance(&self, ra: f64, d: f64) -> f64 {
        let (dx, dy) = (ra + RHO_A * d.cos(), RHO_A * d.sin());
        let (cx, cy) = (self.alpha * ra - self.beta * dx, -self.beta * dy);
        cx.hypot(cy) - self.gamma * RHO_A - R_T
    }

    /// Offset angle in `[0, pi]` at which the Apollonius circle touches the
    /// target; `None` outside the surface.
    fn offset(&self, ra: f64) -> Option<f64> {
        let (mut lo, mut hi) = (0.0, PI);
        let (f_lo, f_hi) = (self.clearance(ra, lo), self.clearance(ra, hi));
        if f_lo > 0.0 || f_hi < 0.0 {
            // the clearance grows as the defender swings inward
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.clearance(ra, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    fn engagement_point(&self, r_a: f64, t: f64) -> Option<(f64, f64)> {
        let ra = r_a - NU * t;
        let d = self.offset(ra)?;
        Some((ra + RHO_A * d.cos(), RHO_A * d.sin()))
    }

    fn separation_at(&self, r: f64, r_a: f64, t: f64) -> Option<f64> {
        let (x, y) = self.engagement_point(r_a, t)?;
        let re = x.hypot(y);
        let arg = (re * re + r * r - t * t) / (2.0 * re * r);
        (arg <= 1.0).then(|| (arg.max(-1.0).acos() + y.atan2(x)).min(PI))
    }

    fn t_range(&self, r_a: f64) -> (f64, f64) {
        let t_min = ((r_a - (R_T + (self.gamma + self.beta) * RHO_A)) / NU).max(0.0);
        let t_max = (r_a - (R_T + (self.gamma - self.beta) * RHO_A)) / NU;
        (t_min, t_max)
    }

    /// `(theta_max, t_star)`; `(0, NaN)` when nothing is reachable.
    fn theta_max(&self, r: f64, r_a: f64) -> (f64, f64) {
        let (t_min, t_max) = self.t_range(r_a);
        if t_max < 0.0 {
            return (0.0, f64::NAN);
        }
        let n = 4000;
        let dt = (t_max - t_min) / n as f64;
        let mut best = (0.0, f64::NAN);
        for i in 0..=n {
            let t = t_min + dt * i as f64;
            if let Some(v) = self.separation_at(r, r_a, t) {
                if best.1.is_nan() || v > best.0 {
                    best = (v, t);
                }
            }
        }
        if best.1.is_nan() || best.0 >= PI {
            return best;
        }
        let score = |t: f64| self.separation_at(r, r_a, t).unwrap_or(-1.0);
        let (mut lo, mut hi) = ((best.1 - dt).max(t_min), (best.1 + dt).min(t_max));
        for _ in 0..200 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if score(m1) < score(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let t = 0.5 * (lo + hi);
        let v = score(t);
        if v > best.0 {
            (v, t)
        } else {
            best
        }
    }

    fn c_infinity(&self, period: f64) -> f64 {
        let cap = self.capture_radius();
        let k = (RHO_T / (period * NU)).ceil() as usize;
        let mut miss = 1.0;
        for i in 0..k {
            miss *= 1.0 - self.theta_max(cap, R_T + RHO_T - i as f64 * period * NU).0 / (2.0 * PI);
        }
        let p_omega = 1.0 - miss;
        let ell = ((2.0 * R_T + 2.0 * self.gamma * RHO_A - RHO_T / NU) / period).ceil() as usize;
        let t_star = self.theta_max(cap, R_T + RHO_T).1;
        let (mut sum, mut run) = (0.0, 1.0);
        for j in 1..=ell {
            let r = cap - j as f64 * period;
            let p = if r <= RHO_T / NU - R_T {
                1.0
            } else {
                self.theta_max(r, R_T + RHO_T).0 / (2.0 * PI)
            };
            sum += run * p * (t_star + j as f64 * period);
            run *= 1.0 - p;
        }
        let tau = p_omega * t_star + (1.0 - p_omega) * sum;
        period * (1.0 - NU) / (RHO_A + (1.0 - NU) * tau)
    }

    /// First capture time from the center against a boundary arrival, taking
    /// the earliest surface point the defender can reach.
    fn first_capture_min_time(&self) -> f64 {
        let (t_min, t_max) = self.t_range(R_T + RHO_T);
        let reach_gap = |t: f64| {
            let (x, y) = self.engagement_point(R_T + RHO_T, t).unwrap();
            x.hypot(y) - t
        };
        let (mut lo, mut hi) = (t_min, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if reach_gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_eng = 0.5 * (lo + hi);
        let (dx, dy) = self.engagement_point(R_T + RHO_T, t_eng).unwrap();
        let ax = R_T + RHO_T - NU * t_eng;
        let (cx, cy) = (self.alpha * ax - self.beta * dx, -self.beta * dy);
        let norm = cx.hypot(cy);
        let radius = self.gamma * RHO_A;
        let (px, py) = (cx + radius * cx / norm, cy + radius * cy / norm);
        t_eng + (px - ax).hypot(py) / NU
    }
}

fn defaults(period: f64) -> GameParams {
    GameParams::defaults_with_period(period).unwrap()
}

// Frozen from the oracle; the library tests compare against the same numbers.
const THETA_MAX_TSR: f64 = 1.044_208_124_6;
const T_STAR_TSR: f64 = 5.846_476_475_1;
const FIRST_CAPTURE_MIN_TIME: f64 = 8.488_849_311_6;
const C_INF: [f64; 12] = [
    0.084_127_613_5,
    0.150_357_540_3,
    0.213_922_690_0,
    0.260_687_473_2,
    0.356_747_325_0,
    0.404_058_602_5,
    0.446_339_181_7,
    0.484_350_942_0,
    0.518_709_311_4,
    0.549_916_841_8,
    0.578_387_953_3,
    0.604_467_441_8,
];

#[test]
fn oracle_reproduces_frozen_separation() {
    let o = Oracle::new();
    let (theta, t) = o.theta_max(o.capture_radius(), 9.0);
    assert!((theta - THETA_MAX_TSR).abs() < 1e-9, "{theta}");
    assert!((t - T_STAR_TSR).abs() < 1e-6, "{t}");
}

#[test]
fn library_separation_matches_oracle() {
    let o = Oracle::new();
    let p = defaults(2.0);
    for &(r, r_a) in &[(7.428_571_428_571_429, 9.0), (7.428_571_428_571_429, 7.5), (5.0, 9.0), (3.5, 8.0), (6.0, 6.5)] {
        let lib = max_angular_separation(r, r_a, &p).unwrap();
        let (want, _) = o.theta_max(r, r_a);
        assert!((lib.theta_max - want).abs() < 1e-8, "r={r} r_a={r_a}: {} vs {want}", lib.theta_max);
    }
}

#[test]
fn oracle_reproduces_frozen_bounds() {
    let o = Oracle::new();
    for (i, want) in C_INF.iter().enumerate() {
        let got = o.c_infinity((i + 1) as f64);
        assert!((got - want).abs() < 1e-9, "T={}: {got} vs {want}", i + 1);
    }
}

#[test]
fn library_bounds_match_oracle() {
    let o = Oracle::new();
    for period in [1.0, 2.0, 5.0, 12.0] {
        let (c, _) = c_infinity(&defaults(period)).unwrap();
        assert!((c - o.c_infinity(period)).abs() < 1e-8, "T={period}");
    }
    let arcs = orbit_arcs(&defaults(2.0)).unwrap();
    assert!((arcs.phi[0] - THETA_MAX_TSR).abs() < 1e-8);
    let fail = failure_sequence(&defaults(2.0)).unwrap();
    assert!((fail.t_star - T_STAR_TSR).abs() < 1e-6);
}

#[test]
fn first_capture_times() {
    let o = Oracle::new();
    let oracle_time = o.first_capture_min_time();
    assert!((oracle_time - FIRST_CAPTURE_MIN_TIME).abs() < 1e-9, "{oracle_time}");

    let min_distance = RHO_T / NU + 2.0 * o.gamma * RHO_A;
    assert!((min_distance - 10.095_238_095_238).abs() < 1e-9);

    for seed in [3, 11, 29] {
        for (objective, want, tol) in [
            (Objective::MinTime, FIRST_CAPTURE_MIN_TIME, 1e-6),
            (Objective::MinDistance, min_distance, 1e-6),
        ] {
            let cfg = StrategyConfig::new(0.0, objective).unwrap();
            let r = run_trial(&defaults(20.0), &cfg, 15.0, seed).unwrap();
            let cap = r.events_of(EventKind::Capture).next().expect("first intruder is captured");
            assert_eq!(cap.id, 0);
            assert!((cap.t - want).abs() < tol, "{objective:?}: {} vs {want}", cap.t);
        }
    }
}
