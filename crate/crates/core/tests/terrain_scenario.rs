mod common;

use common::{fixture, load};
use feasible_region::scenario::{Scenario, ScenarioError};
use feasible_region::terrain::{self, HeightMap, TerrainError};
use nalgebra::{Vector2, Vector3};

fn surface(x: f64, y: f64) -> f64 {
    0.1 * (2.0 * x).sin() * (1.5 * y).cos()
}

fn surface_normal(x: f64, y: f64) -> Vector3<f64> {
    let dx = 0.2 * (2.0 * x).cos() * (1.5 * y).cos();
    let dy = -0.15 * (2.0 * x).sin() * (1.5 * y).sin();
    Vector3::new(-dx, -dy, 1.0).normalize()
}

fn smooth_map() -> HeightMap {
    let (cell, n) = (0.02, 101);
    let data = (0..n)
        .flat_map(|r| (0..n).map(move |c| surface(c as f64 * cell - 1.0, r as f64 * cell - 1.0)))
        .collect();
    HeightMap::new(Vector2::new(-1.0, -1.0), cell, n, n, data).unwrap()
}

#[test]
fn flat_map_samples_its_elevation() {
    let m = terrain::flat(0.3);
    let (z, n) = m.sample(0.123, -0.456).unwrap();
    assert_eq!(z, 0.3);
    assert_eq!(n, Vector3::z());
    assert_eq!(m.slope_deg(1.0, 0.2).unwrap(), 0.0);
}

#[test]
fn smooth_surface_normals_track_the_analytic_gradient() {
    let m = smooth_map();
    for i in 0..40 {
        for j in 0..40 {
            let (x, y) = (-0.8 + 0.04 * i as f64 + 0.003, -0.8 + 0.04 * j as f64 + 0.007);
            let (z, n) = m.sample(x, y).unwrap();
            assert!((z - surface(x, y)).abs() < 1e-3);
            let angle = n.dot(&surface_normal(x, y)).clamp(-1.0, 1.0).acos().to_degrees();
            assert!(angle < 2.0, "({x}, {y}) off by {angle} deg");
        }
    }
}

#[test]
fn height_is_continuous_across_cell_boundaries() {
    let m = smooth_map();
    for k in 0..50 {
        let y = -0.5 + 0.02 * k as f64 + 0.005;
        let x = 0.2;
        let (a, b) = (m.height(x - 1e-9, y).unwrap(), m.height(x + 1e-9, y).unwrap());
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn generated_terrains_have_the_requested_relief() {
    let p = terrain::pallet(0.22, 0.6, 1.4);
    let (lo, hi) = p.data().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), z| (a.min(*z), b.max(*z)));
    assert!((hi - lo - 0.22).abs() < 1e-15);
    assert_eq!(p.height(1.0, 0.0).unwrap(), 0.22);
    assert_eq!(p.height(0.0, 0.0).unwrap(), 0.0);
    let b = terrain::brick_field(0.1, 3);
    assert!(b.data().iter().all(|z| (0.0..=0.1).contains(z)));
    assert!(b.data().iter().any(|z| *z > 0.0));
}

#[test]
fn height_map_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.hmap");
    let m = terrain::brick_field(0.08, 11);
    m.save(&path).unwrap();
    assert_eq!(HeightMap::load(&path).unwrap(), m);
    assert!(matches!(HeightMap::load(&dir.path().join("missing.hmap")), Err(TerrainError::Io(_))));
}

#[test]
fn every_fixture_loads() {
    for name in ["nominal.toml", "rectangle.toml", "triple.toml", "uneven.toml"] {
        let s = load(name);
        assert!(s.contacts.len() >= 3, "{name}");
        s.constraint_system().unwrap();
    }
}

#[test]
fn schema_errors_name_the_offending_field() {
    let err = Scenario::load(&fixture("bad.toml")).unwrap_err();
    assert!(matches!(err, ScenarioError::Schema { .. }));
    assert_eq!(err.to_string(), "contacts[0].position: invalid length 2, expected an array of length 3");
    let missing = Scenario::load(&fixture("no_such_file.toml")).unwrap_err();
    assert!(matches!(missing, ScenarioError::Io { .. }));
}

#[test]
fn contacts_can_take_their_normal_from_the_terrain() {
    let dir = tempfile::tempdir().unwrap();
    let slope = 20f64.to_radians().tan();
    let data = (0..60).flat_map(|_| (0..60).map(move |c| c as f64 * 0.02 * slope)).collect();
    HeightMap::new(Vector2::new(-0.6, -0.6), 0.02, 60, 60, data).unwrap().save(&dir.path().join("ramp.hmap")).unwrap();
    let text = r#"
com = [0.0, 0.0, 0.55]
terrain = "ramp.hmap"

[robot]
preset = "quadruped"

[[contacts]]
leg = "LF"
position = [0.37, 0.21, 0.0]
normal = "from_heightmap"
mu = 0.7

[[contacts]]
leg = "RF"
position = [0.37, -0.21, 0.0]
normal = "from_heightmap"
mu = 0.7

[[contacts]]
leg = "LH"
position = [-0.37, 0.21, 0.0]
mu = 0.7
"#;
    let s = Scenario::from_toml(text, dir.path()).unwrap();
    let c = &s.contacts[0];
    assert!((c.normal.z.acos().to_degrees() - 20.0).abs() < 1e-6);
    assert!((c.position.z - (0.37 + 0.6) * slope).abs() < 1e-9);
    assert_eq!(s.contacts[2].normal, Vector3::z());
    assert_eq!(s.contacts[2].position.z, 0.0);

    let without = text.replace("terrain = \"ramp.hmap\"\n", "");
    assert!(matches!(Scenario::from_toml(&without, dir.path()), Err(ScenarioError::Schema { .. })));
}
