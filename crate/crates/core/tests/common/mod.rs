//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use feasible_region::constraints::{ConstraintSystem, Contact, ContactMode};
use feasible_region::geometry::{point_in_polygon, Point2, PointLocation, Polygon2};
use feasible_region::model::RobotModel;
use feasible_region::region::{membership_oracle, ConstraintMode};
use feasible_region::scenario::Scenario;
use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> Scenario {
    Scenario::load(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scale_torques(robot: &mut RobotModel, k: f64) {
    for l in &mut robot.legs {
        l.leg.torque_limits *= k;
    }
}

/// Quadruped stance with jittered, non-coplanar feet.
///
/// Heights in `[0, 0.3]`, friction in `[0.4, 1.0]`, torque limits scaled
/// by a factor in `[0.3, 3]`, three or four contacts.
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let mut s = Scenario::nominal_quadruped(0.7);
    scale_torques(&mut s.robot, rng.random_range(0.3..3.0));
    let nominal: Vec<Vector3<f64>> = s.contacts.iter().map(|c| c.position).collect();
    let heights: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..0.3)).collect();
    let mean_h = heights.iter().sum::<f64>() / 4.0;
    s.com = Vector3::new(rng.random_range(-0.03..0.03), rng.random_range(-0.03..0.03), 0.55 + mean_h);
    let mut contacts = Vec::new();
    for (i, p) in nominal.iter().enumerate() {
        let pos = Vector3::new(
            p.x + rng.random_range(-0.06..0.06),
            p.y + rng.random_range(-0.04..0.04),
            heights[i],
        );
        let tilt = Vector3::new(rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25), 1.0);
        let mu = rng.random_range(0.4..1.0);
        contacts.push(Contact::new(pos, tilt, mu, ContactMode::Unilateral).unwrap().with_leg(i));
    }
    if rng.random_bool(0.5) {
        let drop = rng.random_range(0..4);
        contacts.remove(drop);
        let centroid = contacts.iter().fold(Vector3::zeros(), |a, c| a + c.position) / 3.0;
        s.com.x = centroid.x;
        s.com.y = centroid.y;
    }
    s.contacts = contacts;
    s
}

/// Grid classification agreement between the LP membership oracle and a polygon.
pub struct GridReport {
    pub checked: usize,
    pub skipped: usize,
    pub false_inside: usize,
    pub false_outside: usize,
}

pub fn grid_agreement(sys: &ConstraintSystem, poly: &Polygon2, mode: ConstraintMode, n: usize, band: f64) -> GridReport {
    let (lo, hi) = poly.bounds();
    let pad = (hi - lo) * 0.15;
    let (lo, hi) = (lo - pad, hi + pad);
    let mut r = GridReport { checked: 0, skipped: 0, false_inside: 0, false_outside: 0 };
    for i in 0..n {
        for j in 0..n {
            let c = Point2::new(
                lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / n as f64,
                lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / n as f64,
            );
            let (loc, _) = point_in_polygon(poly, &c);
            let inside = matches!(loc, PointLocation::Inside | PointLocation::Boundary);
            let near = if inside { poly.distance_to_boundary(&c) } else { poly.distance_to(&c) };
            if near < band {
                r.skipped += 1;
                continue;
            }
            r.checked += 1;
            let feasible = membership_oracle(sys, &c, mode).unwrap().is_feasible();
            match (inside, feasible) {
                (true, false) => r.false_inside += 1,
                (false, true) => r.false_outside += 1,
                _ => {}
            }
        }
    }
    r
}

/// Optimum of `max c'x s.t. A x <= b` by enumerating every basic solution.
///
/// Returns `None` when no vertex is feasible. Only valid for bounded problems
/// with at most a handful of rows.
pub fn enumerate_vertices_lp(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Option<f64> {
    let n = c.len();
    let m = a.nrows();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let sub = DMatrix::from_fn(n, n, |r, k| a[(idx[r], k)]);
        let rhs = DVector::from_fn(n, |r, _| b[idx[r]]);
        if sub.determinant().abs() > 1e-10 {
            if let Some(x) = sub.lu().solve(&rhs) {
                let ok = (0..m).all(|r| (a.row(r) * &x)[0] <= b[r] + 1e-9);
                if ok {
                    let v = c.dot(&x);
                    best = Some(best.map_or(v, |bv: f64| bv.max(v)));
                }
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < m - n + k {
                idx[k] += 1;
                for t in k + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Projection of `c` onto a convex polygon by checking every edge and vertex.
pub fn projection_by_edges(p: &Polygon2, c: &Point2) -> Point2 {
    if p.contains(c, 0.0) {
        return *c;
    }
    let v = p.vertices();
    let mut best = v[0];
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        let d = b - a;
        let t = ((c - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        let q = a + d * t;
        if (q - c).norm() < (best - c).norm() {
            best = q;
        }
    }
    best
}

pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let k = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[k.min(sorted.len() - 1)]
}
