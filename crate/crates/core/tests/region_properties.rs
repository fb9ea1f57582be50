mod common;

use common::{grid_agreement, load, random_scenario, rng, scale_torques};
use feasible_region::constraints::{ConstraintSystem, Contact};
use feasible_region::geometry::{hausdorff_distance, Point2};
use feasible_region::model::RobotModel;
use feasible_region::region::{
    compute_region, membership_oracle, torque_recovery, ConstraintMode, RegionRequest,
};
use nalgebra::Vector3;
use rand::Rng;

fn rectangle_robot_stance(limit_scale: f64) -> ConstraintSystem {
    let mut robot = RobotModel::quadruped();
    scale_torques(&mut robot, limit_scale);
    let com = Vector3::new(0.0, 0.0, 0.55);
    let contacts: Vec<Contact> = [(0.3, 0.2), (0.3, -0.2), (-0.3, 0.2), (-0.3, -0.2)]
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| Contact::flat(Vector3::new(x, y, 0.0), 0.8).with_leg(i))
        .collect();
    ConstraintSystem::for_stance(&robot, contacts, robot.mass, &com).unwrap()
}

#[test]
fn inactive_limits_reproduce_the_friction_region() {
    let sys = rectangle_robot_stance(1e9 / 150.0);
    let f = compute_region(&sys, &RegionRequest::new(ConstraintMode::FrictionOnly)).unwrap();
    let fa = compute_region(&sys, &RegionRequest::new(ConstraintMode::FrictionAndActuation)).unwrap();
    assert!(hausdorff_distance(&f.inner, &fa.inner) < 1e-6);
    let (lo, hi) = f.inner.bounds();
    assert!((lo - Point2::new(-0.3, -0.2)).amax() < 1e-6 && (hi - Point2::new(0.3, 0.2)).amax() < 1e-6);
}

#[test]
fn triple_stance_matches_grid_oracle_at_coarse_tolerance() {
    let sys = load("triple.toml").constraint_system().unwrap();
    let eps: f64 = 1e-4;
    let r = compute_region(&sys, &RegionRequest::new(ConstraintMode::FrictionAndActuation).with_eps(eps)).unwrap();
    let rep = grid_agreement(&sys, &r.inner, ConstraintMode::FrictionAndActuation, 60, 2.0 * eps.sqrt());
    assert_eq!(rep.false_inside + rep.false_outside, 0);
    assert!(rep.checked > 2000, "only {} of {} points checked", rep.checked, rep.checked + rep.skipped);
}

#[test]
fn random_points_agree_with_the_region() {
    let mut r = rng(17);
    for name in ["nominal.toml", "uneven.toml"] {
        let sys = load(name).constraint_system().unwrap();
        let res = compute_region(&sys, &RegionRequest::new(ConstraintMode::FrictionAndActuation)).unwrap();
        let (lo, hi) = res.outer.bounds();
        let mut n = 0;
        while n < 500 {
            let c = Point2::new(r.random_range(lo.x - 0.1..hi.x + 0.1), r.random_range(lo.y - 0.1..hi.y + 0.1));
            let inside = res.inner.contains(&c, 0.0);
            let d = if inside { res.inner.distance_to_boundary(&c) } else { res.inner.distance_to(&c) };
            if d < 2e-3 {
                continue;
            }
            let feasible = membership_oracle(&sys, &c, ConstraintMode::FrictionAndActuation).unwrap().is_feasible();
            assert_eq!(inside, feasible, "{name} at {c:?}");
            n += 1;
        }
    }
}

#[test]
fn points_outside_the_outer_polygon_are_infeasible() {
    let mut r = rng(5);
    let sys = load("uneven.toml").constraint_system().unwrap();
    let res = compute_region(&sys, &RegionRequest::new(ConstraintMode::FrictionAndActuation).with_eps(1e-4)).unwrap();
    let mut n = 0;
    while n < 200 {
        let c = Point2::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        if res.outer.contains(&c, 1e-9) {
            continue;
        }
        assert!(!membership_oracle(&sys, &c, ConstraintMode::FrictionAndActuation).unwrap().is_feasible());
        n += 1;
    }
    for v in res.inner.vertices() {
        assert!(membership_oracle(&sys, v, ConstraintMode::FrictionAndActuation).unwrap().is_feasible());
    }
}

#[test]
fn inner_vertex_witnesses_respect_torque_limits() {
    let sys = load("nominal.toml").constraint_system().unwrap();
    let res = compute_region(&sys, &RegionRequest::new(ConstraintMode::FrictionAndActuation)).unwrap();
    for (v, w) in res.inner.vertices().iter().zip(&res.witnesses) {
        let check = torque_recovery(&sys, v, w).unwrap();
        assert!(!check.beta);
        assert!(check.equilibrium_residual < 1e-6);
        let blown = torque_recovery(&sys, v, &(w * 10.0)).unwrap();
        assert!(blown.beta);
    }
}

#[test]
fn friction_region_ignores_leg_masses_and_limits() {
    let mut r = rng(23);
    for _ in 0..10 {
        let s = random_scenario(&mut r);
        let Ok(a) = s.constraint_system() else { continue };
        let mut heavy = s.clone();
        heavy.robot = s.robot.with_leg_mass_scale(4.0);
        scale_torques(&mut heavy.robot, 0.2);
        let b = heavy.constraint_system().unwrap();
        let req = RegionRequest::new(ConstraintMode::FrictionOnly);
        match (compute_region(&a, &req), compute_region(&b, &req)) {
            (Ok(x), Ok(y)) => assert_eq!(x.inner, y.inner),
            (x, y) => assert_eq!(x.is_err(), y.is_err()),
        }
    }
}

#[test]
fn smaller_tolerance_never_shrinks_the_inner_polygon() {
    let mut r = rng(31);
    let mut seen = 0;
    while seen < 10 {
        let s = random_scenario(&mut r);
        let Ok(sys) = s.constraint_system() else { continue };
        let mut last = 0.0;
        let mut eps = 1e-2;
        let mut ok = true;
        while eps > 1e-7 {
            match compute_region(&sys, &RegionRequest::new(ConstraintMode::FrictionAndActuation).with_eps(eps)) {
                Ok(res) => {
                    assert!(res.inner.area() >= last - 1e-12);
                    assert!(res.area_gap <= eps);
                    last = res.inner.area();
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
            eps /= 2.0;
        }
        if ok {
            seen += 1;
        }
    }
}
