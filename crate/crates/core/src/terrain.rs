//! Gridded terrain elevation with bilinear sampling and surface normals.
//!
//! Node `(r, c)` sits at `origin + (c * cell, r * cell)`; rows run along +y.
//! Text format: a header `heightmap v1 <rows> <cols> <cell_m> <origin_x> <origin_y>`
//! followed by `rows` lines of `cols` space-separated elevations, row 0 first.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Height difference between neighboring nodes treated as a step, meters.
pub const STEP_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("point ({x}, {y}) outside the height map")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid height map: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    origin: Vector2<f64>,
    cell: f64,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl HeightMap {
    pub fn new(origin: Vector2<f64>, cell: f64, rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, TerrainError> {
        if !(cell > 0.0) || !cell.is_finite() {
            return Err(TerrainError::Invalid(format!("cell size must be positive, got {cell}")));
        }
        if rows < 2 || cols < 2 {
            return Err(TerrainError::Invalid("need at least 2x2 nodes".into()));
        }
        if data.len() != rows * cols {
            return Err(TerrainError::Invalid(format!("{} elevations for a {rows}x{cols} grid", data.len())));
        }
        if data.iter().any(|z| !z.is_finite()) || !origin.x.is_finite() || !origin.y.is_finite() {
            return Err(TerrainError::Invalid("non-finite value".into()));
        }
        Ok(Self { origin, cell, rows, cols, data })
    }

    /// Constant-elevation map.
    pub fn flat(origin: Vector2<f64>, cell: f64, rows: usize, cols: usize, z: f64) -> Self {
        Self::new(origin, cell, rows, cols, vec![z; rows * cols]).expect("valid flat map")
    }

    pub fn origin(&self) -> Vector2<f64> {
        self.origin
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Upper corner of the mapped area.
    pub fn extent_max(&self) -> Vector2<f64> {
        self.origin + Vector2::new((self.cols - 1) as f64, (self.rows - 1) as f64) * self.cell
    }

    #[inline]
    pub fn node(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn node_position(&self, r: usize, c: usize) -> Vector2<f64> {
        self.origin + Vector2::new(c as f64, r as f64) * self.cell
    }

    /// Raises every node inside the axis-aligned rectangle to `z` (or keeps it if higher).
    pub fn raise_rect(&mut self, min: Vector2<f64>, max: Vector2<f64>, z: f64) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let p = self.node_position(r, c);
                if p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y {
                    let v = &mut self.data[r * self.cols + c];
                    *v = v.max(z);
                }
            }
        }
    }

    /// Fractional grid coordinates `(u, v)` = (column, row).
    fn grid_coords(&self, x: f64, y: f64) -> Result<(f64, f64), TerrainError> {
        let u = (x - self.origin.x) / self.cell;
        let v = (y - self.origin.y) / self.cell;
        let tol = 1e-9;
        if !(u >= -tol && v >= -tol && u <= (self.cols - 1) as f64 + tol && v <= (self.rows - 1) as f64 + tol) {
            return Err(TerrainError::OutOfBounds { x, y });
        }
        Ok((u.clamp(0.0, (self.cols - 1) as f64), v.clamp(0.0, (self.rows - 1) as f64)))
    }

    fn cell_of(&self, u: f64, v: f64) -> (usize, usize, f64, f64) {
        let c = (u.floor() as usize).min(self.cols - 2);
        let r = (v.floor() as usize).min(self.rows - 2);
        (r, c, u - c as f64, v - r as f64)
    }

    /// Bilinear elevation at `(x, y)`.
    pub fn height(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        let (u, v) = self.grid_coords(x, y)?;
        let (r, c, fu, fv) = self.cell_of(u, v);
        Ok(bilerp(
            [self.node(r, c), self.node(r, c + 1), self.node(r + 1, c), self.node(r + 1, c + 1)],
            fu,
            fv,
        ))
    }

    /// One-dimensional derivative at a node from its neighbors, preferring the
    /// steeper side when the two one-sided slopes disagree by more than a step.
    fn node_slope(&self, prev: Option<f64>, here: f64, next: Option<f64>) -> f64 {
        let h = self.cell;
        match (prev, next) {
            (Some(p), Some(n)) => {
                let back = (here - p) / h;
                let fwd = (n - here) / h;
                if ((fwd - back) * h).abs() > STEP_THRESHOLD {
                    if fwd.abs() > back.abs() { fwd } else { back }
                } else {
                    (n - p) / (2.0 * h)
                }
            }
            (None, Some(n)) => (n - here) / h,
            (Some(p), None) => (here - p) / h,
            (None, None) => 0.0,
        }
    }

    fn node_gradient(&self, r: usize, c: usize) -> Vector2<f64> {
        let z = self.node(r, c);
        let gx = self.node_slope(
            c.checked_sub(1).map(|cc| self.node(r, cc)),
            z,
            (c + 1 < self.cols).then(|| self.node(r, c + 1)),
        );
        let gy = self.node_slope(
            r.checked_sub(1).map(|rr| self.node(rr, c)),
            z,
            (r + 1 < self.rows).then(|| self.node(r + 1, c)),
        );
        Vector2::new(gx, gy)
    }

    /// Surface gradient `(dz/dx, dz/dy)`, bilinearly blended from node gradients.
    pub fn gradient(&self, x: f64, y: f64) -> Result<Vector2<f64>, TerrainError> {
        let (u, v) = self.grid_coords(x, y)?;
        let (r, c, fu, fv) = self.cell_of(u, v);
        let g = [
            self.node_gradient(r, c),
            self.node_gradient(r, c + 1),
            self.node_gradient(r + 1, c),
            self.node_gradient(r + 1, c + 1),
        ];
        Ok(Vector2::new(
            bilerp(g.map(|v| v.x), fu, fv),
            bilerp(g.map(|v| v.y), fu, fv),
        ))
    }

    /// Elevation and unit upward surface normal at `(x, y)`.
    pub fn sample(&self, x: f64, y: f64) -> Result<(f64, Vector3<f64>), TerrainError> {
        let z = self.height(x, y)?;
        let g = self.gradient(x, y)?;
        Ok((z, Vector3::new(-g.x, -g.y, 1.0).normalize()))
    }

    /// Angle between the surface normal and vertical, degrees.
    pub fn slope_deg(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        let (_, n) = self.sample(x, y)?;
        Ok(n.z.clamp(-1.0, 1.0).acos().to_degrees())
    }

    /// Distance from `(x, y)` to the nearest height step larger than
    /// `threshold` between neighboring nodes, searched within `radius`.
    ///
    /// A step is located at the midpoint of the two nodes it separates.
    pub fn distance_to_step(&self, x: f64, y: f64, threshold: f64, radius: f64) -> Option<f64> {
        let reach = (radius / self.cell).ceil() as isize + 1;
        let cu = ((x - self.origin.x) / self.cell).round() as isize;
        let cv = ((y - self.origin.y) / self.cell).round() as isize;
        let p = Vector2::new(x, y);
        let mut best: Option<f64> = None;
        let r_lo = (cv - reach).max(0) as usize;
        let r_hi = ((cv + reach).max(-1) as usize).min(self.rows - 1);
        let c_lo = (cu - reach).max(0) as usize;
        let c_hi = ((cu + reach).max(-1) as usize).min(self.cols - 1);
        if cv + reach < 0 || cu + reach < 0 {
            return None;
        }
        for r in r_lo..=r_hi {
            for c in c_lo..=c_hi {
                let z = self.node(r, c);
                let here = self.node_position(r, c);
                let mut check = |rr: usize, cc: usize| {
                    if (self.node(rr, cc) - z).abs() > threshold {
                        let mid = 0.5 * (here + self.node_position(rr, cc));
                        let d = (mid - p).norm();
                        if d <= radius && best.is_none_or(|b| d < b) {
                            best = Some(d);
                        }
                    }
                };
                if c + 1 < self.cols {
                    check(r, c + 1);
                }
                if r + 1 < self.rows {
                    check(r + 1, c);
                }
            }
        }
        best
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "heightmap v1 {} {} {} {} {}",
            self.rows, self.cols, self.cell, self.origin.x, self.origin.y
        );
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.node(r, c).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, TerrainError> {
        let perr = |line: usize, column: usize, message: String| TerrainError::Parse { line, column, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| perr(1, 1, "empty file".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 7 || toks[0] != "heightmap" || toks[1] != "v1" {
            return Err(perr(hl + 1, 1, "expected `heightmap v1 <rows> <cols> <cell_m> <origin_x> <origin_y>`".into()));
        }
        let int = |k: usize| toks[k].parse::<usize>().map_err(|_| perr(hl + 1, k + 1, format!("bad integer `{}`", toks[k])));
        let num = |k: usize| toks[k].parse::<f64>().map_err(|_| perr(hl + 1, k + 1, format!("bad number `{}`", toks[k])));
        let (rows, cols) = (int(2)?, int(3)?);
        let cell = num(4)?;
        let origin = Vector2::new(num(5)?, num(6)?);
        let mut data = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (ln, line) in lines {
            if seen == rows {
                return Err(perr(ln + 1, 1, format!("more than {rows} rows")));
            }
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != cols {
                return Err(perr(ln + 1, vals.len().min(cols) + 1, format!("expected {cols} values, found {}", vals.len())));
            }
            for (k, v) in vals.iter().enumerate() {
                data.push(v.parse::<f64>().map_err(|_| perr(ln + 1, k + 1, format!("bad number `{v}`")))?);
            }
            seen += 1;
        }
        if seen != rows {
            return Err(perr(text.lines().count() + 1, 1, format!("expected {rows} rows, found {seen}")));
        }
        Self::new(origin, cell, rows, cols, data)
    }

    pub fn load(path: &Path) -> Result<Self, TerrainError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), TerrainError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn bilerp(z: [f64; 4], fu: f64, fv: f64) -> f64 {
    let bottom = z[0] * (1.0 - fu) + z[1] * fu;
    let top = z[2] * (1.0 - fu) + z[3] * fu;
    bottom * (1.0 - fv) + top * fv
}

/// Grid used by the synthetic generators: x in [-1, 3] m, y in [-1, 1] m, 2 cm cells.
fn walkway() -> HeightMap {
    HeightMap::flat(Vector2::new(-1.0, -1.0), 0.02, 101, 201, 0.0)
}

/// Flat walkway at elevation `z`.
pub fn flat(z: f64) -> HeightMap {
    let mut m = walkway();
    m.data.iter_mut().for_each(|v| *v = z);
    m
}

/// Walkway with a full-width block of `height` between `x_start` and `x_end`.
pub fn pallet(height: f64, x_start: f64, x_end: f64) -> HeightMap {
    let mut m = walkway();
    m.raise_rect(Vector2::new(x_start, -1.0), Vector2::new(x_end, 1.0), height);
    m
}

/// Walkway scattered with 0.2 × 0.1 m bricks of random height in `[0, max_height]`.
pub fn brick_field(max_height: f64, seed: u64) -> HeightMap {
    let mut m = walkway();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..60 {
        let x = rng.random_range(-0.9..2.7);
        let y = rng.random_range(-0.9..0.8);
        let (w, h) = if rng.random_bool(0.5) { (0.2, 0.1) } else { (0.1, 0.2) };
        let z = rng.random_range(0.0..=max_height);
        m.raise_rect(Vector2::new(x, y), Vector2::new(x + w, y + h), z);
    }
    m
}
