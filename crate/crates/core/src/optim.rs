//! Dense two-phase simplex solver plus the small closed-form routines used by
//! the planners (Chebyshev margin, projection onto a polygon).
//!
//! Tolerances are absolute: [`FEAS_TOL`] (1e-7) for constraint residuals and
//! the phase-one infeasibility test, [`OPT_TOL`] (1e-9) for reduced costs.
//! Callers keep their problems well scaled (the region code divides forces
//! by the robot weight), so absolute tolerances are meaningful.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{Point2, Polygon2, MEMBERSHIP_TOL};

/// Constraint residual tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost tolerance.
pub const OPT_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex did not terminate after {iterations} pivots")]
    NumericalBreakdown { iterations: usize },
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("polygon is empty")]
    EmptyPolygon,
    #[error("cannot parse LP dump, line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// `maximize c·x  s.t.  A x = b,  C x <= d,  lo <= x <= hi`.
///
/// Bounds default to free variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: DVector<f64>,
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub ineq_matrix: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(objective: DVector<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            eq_matrix: DMatrix::zeros(0, n),
            eq_rhs: DVector::zeros(0),
            ineq_matrix: DMatrix::zeros(0, n),
            ineq_rhs: DVector::zeros(0),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    /// Zero objective over `n` variables.
    pub fn feasibility(n: usize) -> Self {
        Self::new(DVector::zeros(n))
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        self.eq_matrix = a;
        self.eq_rhs = b;
        self
    }

    pub fn with_inequalities(mut self, c: DMatrix<f64>, d: DVector<f64>) -> Self {
        self.ineq_matrix = c;
        self.ineq_rhs = d;
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let bad = |m: String| Err(LpError::Malformed(m));
        if self.eq_matrix.ncols() != n || self.eq_matrix.nrows() != self.eq_rhs.len() {
            return bad("equality block dimensions".into());
        }
        if self.ineq_matrix.ncols() != n || self.ineq_matrix.nrows() != self.ineq_rhs.len() {
            return bad("inequality block dimensions".into());
        }
        if self.bounds.len() != n {
            return bad(format!("{} bounds for {} variables", self.bounds.len(), n));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(self.objective.as_slice())
            || !finite(self.eq_matrix.as_slice())
            || !finite(self.eq_rhs.as_slice())
            || !finite(self.ineq_matrix.as_slice())
            || !finite(self.ineq_rhs.as_slice())
        {
            return bad("non-finite coefficient".into());
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return bad(format!("invalid bounds on x{j}"));
            }
        }
        Ok(())
    }

    /// Plain-text dump: `max` row, `A ... | b` rows, `C ... | d` rows, `bounds` rows.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let row = |v: &mut String, xs: &mut dyn Iterator<Item = f64>| {
            let parts: Vec<String> = xs.map(|x| format!("{x:?}")).collect();
            v.push_str(&parts.join(" "));
        };
        s.push_str("max ");
        row(&mut s, &mut self.objective.iter().copied());
        s.push('\n');
        for (tag, m, r) in [
            ("A", &self.eq_matrix, &self.eq_rhs),
            ("C", &self.ineq_matrix, &self.ineq_rhs),
        ] {
            for i in 0..m.nrows() {
                s.push_str(tag);
                s.push(' ');
                row(&mut s, &mut m.row(i).iter().copied());
                let _ = writeln!(s, " | {:?}", r[i]);
            }
        }
        for (lo, hi) in &self.bounds {
            let _ = writeln!(s, "bounds {lo:?} {hi:?}");
        }
        s
    }

    /// Parses the output of [`LinearProgram::to_text`].
    pub fn from_text(text: &str) -> Result<Self, LpError> {
        let mut objective: Option<Vec<f64>> = None;
        let mut a_rows: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut c_rows: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut bounds = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let err = |m: &str| LpError::Parse { line: line_no, message: m.to_string() };
            let nums = |s: &str| -> Result<Vec<f64>, LpError> {
                s.split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| err(&format!("bad number `{t}`"))))
                    .collect()
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
            match tag {
                "max" => objective = Some(nums(rest)?),
                "A" | "C" => {
                    let (lhs, rhs) = rest.split_once('|').ok_or_else(|| err("missing `|`"))?;
                    let rhs = nums(rhs)?;
                    if rhs.len() != 1 {
                        return Err(err("expected one right-hand side"));
                    }
                    let entry = (nums(lhs)?, rhs[0]);
                    if tag == "A" { a_rows.push(entry) } else { c_rows.push(entry) }
                }
                "bounds" => {
                    let b = nums(rest)?;
                    if b.len() != 2 {
                        return Err(err("expected `bounds lo hi`"));
                    }
                    bounds.push((b[0], b[1]));
                }
                _ => return Err(err("unknown row tag")),
            }
        }
        let objective = objective.ok_or(LpError::Parse { line: 0, message: "missing `max` row".into() })?;
        let n = objective.len();
        let block = |rows: &[(Vec<f64>, f64)]| -> Result<(DMatrix<f64>, DVector<f64>), LpError> {
            if rows.iter().any(|(r, _)| r.len() != n) {
                return Err(LpError::Parse { line: 0, message: "row length mismatch".into() });
            }
            Ok((
                DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]),
                DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1)),
            ))
        };
        let (a, b) = block(&a_rows)?;
        let (c, d) = block(&c_rows)?;
        let mut lp = LinearProgram::new(DVector::from_vec(objective))
            .with_equalities(a, b)
            .with_inequalities(c, d);
        if !bounds.is_empty() {
            lp.bounds = bounds;
        }
        lp.validate()?;
        Ok(lp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; meaningful only when `status` is `Optimal`.
    pub x: DVector<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    /// Multipliers of `A x = b` (sign free).
    pub duals_eq: DVector<f64>,
    /// Multipliers of `C x <= d` (nonnegative at optimum).
    pub duals_ineq: DVector<f64>,
    /// Phase-one residual: sum of artificial variables at the end of phase one.
    pub infeasibility: f64,
}

impl LpSolution {
    /// Lagrangian dual objective; equals `objective_value` at an optimum.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let r = &lp.objective - lp.eq_matrix.tr_mul(&self.duals_eq) - lp.ineq_matrix.tr_mul(&self.duals_ineq);
        let mut v = lp.eq_rhs.dot(&self.duals_eq) + lp.ineq_rhs.dot(&self.duals_ineq);
        for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
            if r[j] > OPT_TOL && hi.is_finite() {
                v += r[j] * hi;
            } else if r[j] < -OPT_TOL && lo.is_finite() {
                v += r[j] * lo;
            }
        }
        v
    }
}

/// How an original variable is rebuilt from the nonnegative standard-form variables.
#[derive(Clone, Copy)]
enum VarMap {
    /// x = lo + y_k
    Shifted { k: usize, lo: f64 },
    /// x = hi - y_k
    Mirrored { k: usize, hi: f64 },
    /// x = y_k - y_{k+1}
    Split { k: usize },
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        if r < self.basis.len() {
            self.basis[r] = c;
        }
    }
}

/// Solves `lp` with a two-phase dense simplex.
///
/// Dantzig pricing, switching permanently to Bland's rule after 50
/// consecutive degenerate pivots. Fails with [`LpError::NumericalBreakdown`]
/// after `10 · (rows + columns)` pivots of the standard form.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();

    // Standard form over y >= 0.
    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shifted { k: ny, lo });
            if hi.is_finite() {
                bound_rows.push((ny, hi - lo));
            }
            ny += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirrored { k: ny, hi });
            ny += 1;
        } else {
            maps.push(VarMap::Split { k: ny });
            ny += 2;
        }
    }
    let shift = DVector::from_iterator(
        n,
        maps.iter().map(|m| match *m {
            VarMap::Shifted { lo, .. } => lo,
            VarMap::Mirrored { hi, .. } => hi,
            VarMap::Split { .. } => 0.0,
        }),
    );
    // Row of original coefficients a -> coefficients over y.
    let to_y = |a: &[f64], out: &mut [f64]| {
        for (j, m) in maps.iter().enumerate() {
            match *m {
                VarMap::Shifted { k, .. } => out[k] += a[j],
                VarMap::Mirrored { k, .. } => out[k] -= a[j],
                VarMap::Split { k } => {
                    out[k] += a[j];
                    out[k + 1] -= a[j];
                }
            }
        }
    };

    let k_eq = lp.eq_matrix.nrows();
    let k_in = lp.ineq_matrix.nrows();
    let m = k_eq + k_in + bound_rows.len();
    // Row descriptors: (y coefficients, rhs, has slack).
    let mut row_y: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut has_slack: Vec<bool> = Vec::with_capacity(m);
    for i in 0..k_eq {
        let a: Vec<f64> = lp.eq_matrix.row(i).iter().copied().collect();
        let mut y = vec![0.0; ny];
        to_y(&a, &mut y);
        row_y.push(y);
        rhs.push(lp.eq_rhs[i] - lp.eq_matrix.row(i).dot(&shift.transpose()));
        has_slack.push(false);
    }
    for i in 0..k_in {
        let a: Vec<f64> = lp.ineq_matrix.row(i).iter().copied().collect();
        let mut y = vec![0.0; ny];
        to_y(&a, &mut y);
        row_y.push(y);
        rhs.push(lp.ineq_rhs[i] - lp.ineq_matrix.row(i).dot(&shift.transpose()));
        has_slack.push(true);
    }
    for &(k, ub) in &bound_rows {
        let mut y = vec![0.0; ny];
        y[k] = 1.0;
        row_y.push(y);
        rhs.push(ub);
        has_slack.push(true);
    }
    let sign: Vec<f64> = rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let needs_art: Vec<bool> = (0..m).map(|i| !has_slack[i] || sign[i] < 0.0).collect();

    let n_slack = has_slack.iter().filter(|&&s| s).count();
    let n_art = needs_art.iter().filter(|&&a| a).count();
    let ncol = ny + n_slack + n_art;
    let art_start = ny + n_slack;
    let width = ncol + 1;
    let total_rows = m + 2; // constraint rows, phase-2 cost row, phase-1 cost row
    let mut t = Tableau {
        rows: total_rows,
        width,
        data: vec![0.0; total_rows * width],
        basis: vec![0; m],
    };
    // Column of the unit vector initially basic in each row; used for duals.
    let mut unit_col = vec![0usize; m];
    let (mut next_slack, mut next_art) = (ny, art_start);
    for i in 0..m {
        let s = sign[i];
        let base = i * width;
        for (k, v) in row_y[i].iter().enumerate() {
            t.data[base + k] = s * v;
        }
        t.data[base + ncol] = s * rhs[i];
        if has_slack[i] {
            t.data[base + next_slack] = s;
            if s > 0.0 {
                t.basis[i] = next_slack;
                unit_col[i] = next_slack;
            }
            next_slack += 1;
        }
        if needs_art[i] {
            t.data[base + next_art] = 1.0;
            t.basis[i] = next_art;
            unit_col[i] = next_art;
            next_art += 1;
        }
    }

    // Costs for minimization: phase 2 uses -c over y, phase 1 sums artificials.
    let mut cost2 = vec![0.0; ncol];
    to_y(lp.objective.as_slice(), &mut cost2[..ny]);
    for v in &mut cost2[..ny] {
        *v = -*v;
    }
    let obj2 = m;
    let obj1 = m + 1;
    for j in 0..ncol {
        t.data[obj2 * width + j] = cost2[j];
        if j >= art_start {
            t.data[obj1 * width + j] = 1.0;
        }
    }
    for i in 0..m {
        let b = t.basis[i];
        for (obj, cb) in [(obj2, cost2[b]), (obj1, if b >= art_start { 1.0 } else { 0.0 })] {
            if cb != 0.0 {
                for j in 0..width {
                    let v = t.data[i * width + j];
                    t.data[obj * width + j] -= cb * v;
                }
            }
        }
    }

    let cap = 10 * (m + ncol);
    let mut state = PivotState { iterations: 0, degenerate_run: 0, bland: false, cap };

    let phase1 = run_simplex(&mut t, obj1, ncol, &mut state)?;
    debug_assert!(phase1, "phase one is bounded below by zero");
    let infeasibility = (-t.at(obj1, ncol)).max(0.0);

    let build_x = |t: &Tableau| -> DVector<f64> {
        let mut z = vec![0.0; ncol];
        for (i, &b) in t.basis.iter().enumerate() {
            z[b] = t.at(i, ncol);
        }
        DVector::from_iterator(
            n,
            maps.iter().map(|mp| match *mp {
                VarMap::Shifted { k, lo } => lo + z[k],
                VarMap::Mirrored { k, hi } => hi - z[k],
                VarMap::Split { k } => z[k] - z[k + 1],
            }),
        )
    };

    if infeasibility > FEAS_TOL {
        let x = build_x(&t);
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            objective_value: lp.objective.dot(&x),
            x,
            iterations: state.iterations,
            duals_eq: DVector::zeros(k_eq),
            duals_ineq: DVector::zeros(k_in),
            infeasibility,
        });
    }

    // Drive remaining artificials out of the basis; rows with no candidate are redundant.
    for i in 0..m {
        if t.basis[i] >= art_start {
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for j in 0..art_start {
                let v = t.at(i, j).abs();
                if v > best_abs {
                    best_abs = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                t.pivot(i, j);
            }
        }
    }

    let bounded = run_simplex(&mut t, obj2, art_start, &mut state)?;
    let x = build_x(&t);
    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective_value: f64::INFINITY,
            x,
            iterations: state.iterations,
            duals_eq: DVector::zeros(k_eq),
            duals_ineq: DVector::zeros(k_in),
            infeasibility,
        });
    }

    // pi = c_B B^-1; read off from the reduced costs of the initial unit columns.
    let row_dual = |i: usize| -> f64 {
        let k = unit_col[i];
        let pi_min = cost2[k] - t.at(obj2, k);
        -pi_min * sign[i]
    };
    let duals_eq = DVector::from_iterator(k_eq, (0..k_eq).map(row_dual));
    let duals_ineq = DVector::from_iterator(k_in, (k_eq..k_eq + k_in).map(row_dual));
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective.dot(&x),
        x,
        iterations: state.iterations,
        duals_eq,
        duals_ineq,
        infeasibility,
    })
}

struct PivotState {
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
    cap: usize,
}

/// Minimizes the cost row `obj` over columns `0..allowed`. Returns `false` when unbounded.
fn run_simplex(
    t: &mut Tableau,
    obj: usize,
    allowed: usize,
    st: &mut PivotState,
) -> Result<bool, LpError> {
    let m = t.basis.len();
    let rhs_col = t.width - 1;
    debug_assert!(t.rows == m + 2);
    loop {
        let mut enter = None;
        let mut best = -OPT_TOL;
        for j in 0..allowed {
            let d = t.at(obj, j);
            if d < best {
                enter = Some(j);
                if st.bland {
                    break;
                }
                best = d;
            }
        }
        let Some(j) = enter else { return Ok(true) };

        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = t.at(i, j);
            if a > PIVOT_TOL {
                let ratio = t.at(i, rhs_col).max(0.0) / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        if ratio < best_ratio - 1e-12 {
                            true
                        } else if ratio <= best_ratio + 1e-12 {
                            if st.bland {
                                t.basis[i] < t.basis[l]
                            } else {
                                a > t.at(l, j)
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some(i);
                    best_ratio = best_ratio.min(ratio);
                }
            }
        }
        let Some(r) = leave else { return Ok(false) };

        if st.iterations >= st.cap {
            return Err(LpError::NumericalBreakdown { iterations: st.iterations });
        }
        st.iterations += 1;
        if best_ratio <= 1e-12 {
            st.degenerate_run += 1;
            if st.degenerate_run >= DEGENERATE_LIMIT {
                st.bland = true;
            }
        } else {
            st.degenerate_run = 0;
        }
        t.pivot(r, j);
    }
}

/// Signed Chebyshev margin of a fixed point: `min_i (b_i - a_i·c) / |a_i|`.
///
/// Positive strictly inside, zero on the boundary, negative outside (meters).
pub fn chebyshev_margin(p: &Polygon2, c: &Point2) -> f64 {
    p.min_slack(c)
}

/// The same margin as [`chebyshev_margin`], computed as the linear program
/// `max r  s.t.  a_i·c + r |a_i| <= b_i`.
pub fn chebyshev_margin_lp(p: &Polygon2, c: &Point2) -> Result<f64, LpError> {
    let hs = p.halfspaces();
    let cm = DMatrix::from_fn(hs.len(), 1, |i, _| hs[i].normal.norm());
    let d = DVector::from_iterator(hs.len(), hs.iter().map(|h| h.offset - h.normal.dot(c)));
    let lp = LinearProgram::new(DVector::from_element(1, 1.0)).with_inequalities(cm, d);
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.x[0]),
        _ => Err(LpError::EmptyPolygon),
    }
}

/// Center and radius of the largest disk inscribed in `p`.
pub fn chebyshev_center(p: &Polygon2) -> (Point2, f64) {
    let hs = p.halfspaces();
    let cm = DMatrix::from_fn(hs.len(), 3, |i, j| match j {
        0 => hs[i].normal.x,
        1 => hs[i].normal.y,
        _ => 1.0,
    });
    let d = DVector::from_iterator(hs.len(), hs.iter().map(|h| h.offset));
    let lp = LinearProgram::new(DVector::from_vec(vec![0.0, 0.0, 1.0])).with_inequalities(cm, d);
    match solve_lp(&lp) {
        Ok(sol) if sol.status == LpStatus::Optimal => (Point2::new(sol.x[0], sol.x[1]), sol.x[2]),
        _ => {
            let c = p.vertex_centroid();
            (c, p.min_slack(&c))
        }
    }
}

/// Euclidean projection of `c` onto `p`.
///
/// Inside points are returned unchanged. Otherwise every orthogonal
/// projection onto an edge line that lands inside the polygon and every
/// vertex is a candidate; the nearest candidate is the projection.
pub fn closest_point_in_polygon(p: &Polygon2, c: &Point2) -> Result<Point2, LpError> {
    if p.is_empty() {
        return Err(LpError::EmptyPolygon);
    }
    if p.min_slack(c) >= 0.0 {
        return Ok(*c);
    }
    let mut best = p.vertices()[0];
    let mut best_d = (best - c).norm_squared();
    let hs = p.halfspaces();
    let line_proj = hs.iter().map(|h| c + h.normal * h.slack(c));
    for x in line_proj
        .filter(|x| p.min_slack(x) >= -MEMBERSHIP_TOL)
        .chain(p.vertices().iter().copied())
    {
        let d = (x - c).norm_squared();
        if d < best_d {
            best_d = d;
            best = x;
        }
    }
    Ok(best)
}

/// Checks the projection optimality condition: `c - x` is a nonnegative
/// combination of the normals of the halfspaces active at `x`.
pub fn is_projection_certified(p: &Polygon2, c: &Point2, x: &Point2, tol: f64) -> bool {
    if p.min_slack(x) < -tol {
        return false;
    }
    let r = c - x;
    if r.norm() <= tol {
        return true;
    }
    let active: Vec<Point2> = p
        .halfspaces()
        .iter()
        .filter(|h| h.slack(x).abs() <= tol)
        .map(|h| h.normal)
        .collect();
    // In the plane a cone of normals is spanned by at most two of them.
    for (i, a) in active.iter().enumerate() {
        let lam = r.dot(a);
        if lam >= -tol && (r - a * lam).norm() <= tol {
            return true;
        }
        for b in &active[i + 1..] {
            let det = a.x * b.y - a.y * b.x;
            if det.abs() < 1e-12 {
                continue;
            }
            let la = (r.x * b.y - r.y * b.x) / det;
            let lb = (a.x * r.y - a.y * r.x) / det;
            if la >= -tol && lb >= -tol {
                return true;
            }
        }
    }
    false
}
