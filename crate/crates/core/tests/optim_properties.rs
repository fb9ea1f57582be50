mod common;

use common::{enumerate_vertices_lp, projection_by_edges};
use feasible_region::geometry::{convex_hull_2d, scale_polygon, Point2, Polygon2, ScalePivot};
use feasible_region::optim::{
    chebyshev_margin, chebyshev_margin_lp, closest_point_in_polygon, is_projection_certified, solve_lp,
    LinearProgram, LpStatus,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() }
}

fn hull() -> impl Strategy<Value = Polygon2> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y)| Point2::new(x, y)), 3..16)
        .prop_filter_map("degenerate", |p| convex_hull_2d(&p).ok().filter(|h| h.area() > 1e-3))
}

/// Random bounded LP `max c'x, A x <= b, |x_i| <= 3` plus its stacked row form.
fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (LinearProgram, DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(m, |_, _| rng.random_range(-0.5..1.0));
    let c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let mut rows = DMatrix::zeros(m + 2 * n, n);
    let mut rhs = DVector::zeros(m + 2 * n);
    rows.view_mut((0, 0), (m, n)).copy_from(&a);
    rhs.rows_mut(0, m).copy_from(&b);
    for k in 0..n {
        rows[(m + 2 * k, k)] = 1.0;
        rows[(m + 2 * k + 1, k)] = -1.0;
        rhs[m + 2 * k] = 3.0;
        rhs[m + 2 * k + 1] = 3.0;
    }
    let lp = LinearProgram::new(c.clone()).with_inequalities(a, b).with_bounds(vec![(-3.0, 3.0); n]);
    (lp, c, rows, rhs)
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0;
    while checked < 50 {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(1..=4);
        let (lp, c, rows, rhs) = random_lp(&mut rng, n, m);
        let Some(best) = enumerate_vertices_lp(&c, &rows, &rhs) else {
            assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
            continue;
        };
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - best).abs() <= 1e-6, "{} vs {best}", sol.objective_value);
        checked += 1;
    }
}

#[test]
fn equality_constrained_lps_match_enumeration() {
    // x + y + z = 1 written as two opposite inequalities for the oracle
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let c = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let lp = LinearProgram::new(c.clone())
            .with_equalities(DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]), DVector::from_element(1, 1.0))
            .with_bounds(vec![(0.0, 1.0); 3]);
        let sol = solve_lp(&lp).unwrap();
        // the simplex with bounds [0, 1] has the unit vectors as vertices
        let best = c.max();
        assert!((sol.objective_value - best).abs() < 1e-9);
    }
}

#[test]
fn solutions_are_bitwise_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (lp, ..) = random_lp(&mut rng, 5, 4);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a.x.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.x.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn optimal_primal_equals_dual_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut seen = 0;
    while seen < 40 {
        let (lp, ..) = random_lp(&mut rng, 4, 4);
        let sol = solve_lp(&lp).unwrap();
        if sol.status != LpStatus::Optimal {
            continue;
        }
        assert!((sol.objective_value - sol.dual_objective(&lp)).abs() <= 1e-6);
        seen += 1;
    }
}

#[test]
fn text_dump_parses_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (lp, ..) = random_lp(&mut rng, 3, 3);
    let back = LinearProgram::from_text(&lp.to_text()).unwrap();
    assert_eq!(solve_lp(&back).unwrap().objective_value, solve_lp(&lp).unwrap().objective_value);
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn closed_form_margin_equals_lp(h in hull(), x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let c = Point2::new(x, y);
        prop_assert!((chebyshev_margin(&h, &c) - chebyshev_margin_lp(&h, &c).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn projection_matches_edge_enumeration(h in hull(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let c = Point2::new(x, y);
        let p = closest_point_in_polygon(&h, &c).unwrap();
        let oracle = projection_by_edges(&h, &c);
        prop_assert!(((p - c).norm() - (oracle - c).norm()).abs() <= 1e-9);
        prop_assert!(is_projection_certified(&h, &c, &p, 1e-7));
    }

    #[test]
    fn projection_is_non_expansive(h in hull(), a in prop::array::uniform2(-2.0..2.0f64), b in prop::array::uniform2(-2.0..2.0f64)) {
        let (ca, cb) = (Point2::from(a), Point2::from(b));
        let pa = closest_point_in_polygon(&h, &ca).unwrap();
        let pb = closest_point_in_polygon(&h, &cb).unwrap();
        prop_assert!((pa - pb).norm() <= (ca - cb).norm() + 1e-12);
    }

    #[test]
    fn margin_scales_with_symmetric_polygons(hw in 0.1..2.0f64, hh in 0.1..2.0f64, s in 0.05..1.0f64) {
        let rect = Polygon2::from_points(&[
            Point2::new(-hw, -hh),
            Point2::new(hw, -hh),
            Point2::new(hw, hh),
            Point2::new(-hw, hh),
        ]).unwrap();
        let centroid = rect.vertex_centroid();
        let scaled = scale_polygon(&rect, s, ScalePivot::Centroid);
        prop_assert!((chebyshev_margin(&scaled, &centroid) - s * chebyshev_margin(&rect, &centroid)).abs() < 1e-12);
    }
}

#[test]
fn margin_of_point_on_edge_is_zero() {
    let sq = Polygon2::from_points(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]).unwrap();
    assert!(chebyshev_margin(&sq, &Point2::new(1.0, 0.3)).abs() < 1e-15);
    let p = closest_point_in_polygon(&sq, &Point2::new(2.0, 0.5)).unwrap();
    assert!((p - Point2::new(1.0, 0.5)).norm() < 1e-15);
}
