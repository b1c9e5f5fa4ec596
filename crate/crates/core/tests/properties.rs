use std::f64::consts::PI;

use proptest::prelude::*;
use target_defense::engagement::{max_angular_separation, surface_domain, surface_floor, theta_on_surface};
use target_defense::geometry::{
    apollonius, capture_time, farthest_point, sensing_onset, GameParams, LinearMotion, PolarPoint, Vec2,
};
use target_defense::policy::{select_with, selection_score, StrategyConfig};

fn defaults() -> GameParams {
    GameParams::defaults_with_period(2.0).unwrap()
}

fn point(limit: f64) -> impl Strategy<Value = Vec2> {
    (-limit..limit, -limit..limit).prop_map(|(x, y)| Vec2::new(x, y))
}

fn pair() -> impl Strategy<Value = (Vec2, Vec2)> {
    (point(12.0), point(12.0)).prop_filter("distinct agents", |(a, d)| a.distance(*d) > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn apollonius_points_are_reached_simultaneously((x_a, x_d) in pair(), angle in -PI..PI) {
        let p = defaults();
        let circle = apollonius(x_a, x_d, &p);
        let on = circle.center + Vec2::unit(angle) * circle.radius;
        let intruder = on.distance(x_a) / p.speed_ratio();
        let defender = on.distance(x_d);
        prop_assert!((intruder - defender).abs() <= 1e-9 * defender.max(1.0));
    }

    #[test]
    fn farthest_point_is_on_the_circle_and_outermost((x_a, x_d) in pair(), angle in -PI..PI) {
        let p = defaults();
        let circle = apollonius(x_a, x_d, &p);
        prop_assume!(circle.center.norm() > 1e-6);
        let far = farthest_point(&circle).unwrap();
        prop_assert!((far.distance(circle.center) - circle.radius).abs() <= 1e-9 * circle.radius.max(1.0));
        prop_assert!((far.norm() - circle.center.norm() - circle.radius).abs() <= 1e-9 * far.norm().max(1.0));
        let other = circle.center + Vec2::unit(angle) * circle.radius;
        prop_assert!(other.norm() <= far.norm() + 1e-9);
        let t = capture_time(x_a, x_d, &p).unwrap();
        prop_assert!((t - far.distance(x_d)).abs() <= 1e-9 * t.max(1.0));
    }

    #[test]
    fn sensing_onset_is_the_first_contact(
        d0 in point(8.0), a0 in point(8.0), dv in -PI..PI, av in -PI..PI,
    ) {
        let rho = 1.0;
        prop_assume!(d0.distance(a0) > rho + 1e-6);
        let def = LinearMotion::new(d0, Vec2::unit(dv));
        let intr = LinearMotion::new(a0, Vec2::unit(av) * 0.75);
        let horizon = 30.0;
        match sensing_onset(def, intr, rho, horizon) {
            Some(t) => {
                prop_assert!(t > 0.0 && t <= horizon);
                prop_assert!((def.at(t).distance(intr.at(t)) - rho).abs() <= 1e-9);
                for i in 0..50 {
                    let s = t * i as f64 / 50.0;
                    prop_assert!(def.at(s).distance(intr.at(s)) > rho - 1e-9);
                }
            }
            None => {
                for i in 0..=300 {
                    let s = horizon * i as f64 / 300.0;
                    prop_assert!(def.at(s).distance(intr.at(s)) > rho - 1e-9);
                }
            }
        }
    }

    #[test]
    fn surface_engagements_capture_on_the_capture_circle(
        r_a in 4.5f64..9.0, theta in -PI..PI, frac in 0.0f64..1.0, upper in any::<bool>(),
    ) {
        let p = defaults();
        let dom = surface_domain(r_a, &p).unwrap();
        let t = dom.t_min + frac * (dom.t_max - dom.t_min);
        let intruder = PolarPoint::new(r_a, theta);
        let (plus, minus) = theta_on_surface(t, intruder, &p).unwrap();
        let at = if upper { plus } else { minus };
        let x_a = Vec2::from_polar(r_a - t * p.speed_ratio(), theta);
        let x_d = x_a + Vec2::unit(at) * p.sensing_radius();
        let circle = apollonius(x_a, x_d, &p);
        // tangent to the target
        prop_assert!((circle.center.norm() - circle.radius - p.target_radius()).abs() <= 1e-9);
        let far = farthest_point(&circle).unwrap();
        prop_assert!((far.norm() - p.capture_radius()).abs() <= 1e-9);
    }

    #[test]
    fn capturability_depends_only_on_relative_angle(
        r in 0.0f64..9.0, r_a in 4.43f64..9.0, sep in -PI..PI, spin in -PI..PI,
    ) {
        let p = defaults();
        prop_assume!(r_a >= surface_floor(&p));
        let limit = max_angular_separation(r, r_a, &p).unwrap();
        prop_assume!((sep.abs() - limit.theta_max).abs() > 1e-9);
        let base = target_defense::engagement::is_capturable(
            PolarPoint::new(r, 0.0), PolarPoint::new(r_a, sep), &p);
        let turned = target_defense::engagement::is_capturable(
            PolarPoint::new(r, spin), PolarPoint::new(r_a, spin + sep), &p);
        prop_assert_eq!(base, turned);
        prop_assert_eq!(base, limit.reachable && sep.abs() < limit.theta_max);
    }

    #[test]
    fn weight_extremes_pick_by_one_distance(
        raw in prop::collection::vec((4.5f64..9.0, -PI..PI), 1..8), x_d in point(7.0),
    ) {
        let intruders: Vec<(usize, PolarPoint)> = raw
            .iter()
            .enumerate()
            .map(|(i, &(r, th))| (i, PolarPoint::new(r, th)))
            .collect();
        let pick = |cfg: StrategyConfig| select_with(&intruders, x_d, &cfg, |_| true).unwrap();
        let key = |w: f64, id: usize| selection_score(intruders[id].1.to_cartesian(), x_d, w);

        let eb = pick(StrategyConfig::earliest_breach());
        let na = pick(StrategyConfig::nearest_agent());
        for &(_, polar) in &intruders {
            prop_assert!(key(0.0, eb) <= polar.to_cartesian().norm());
            prop_assert!(key(1.0, na) <= polar.to_cartesian().distance(x_d));
        }
        // nothing capturable, nothing picked
        prop_assert!(select_with(&intruders, x_d, &StrategyConfig::earliest_breach(), |_| false).is_none());
    }
}
