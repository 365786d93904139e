//! Level-set extraction and the numeric-vs-analytic comparison.
//!
//! Contours are traced with oriented marching squares: every segment keeps
//! values above the level on its left, so closed loops run counter-clockwise
//! around maxima and clockwise around depressions such as the invader-free
//! zone around a colony. A chain that reaches the edge of the square is
//! closed by following the boundary counter-clockwise to the next chain.

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use crate::analytic::{
    delta_c_at, equilibrium_radius, shifted_equilibria, stationary_c, steady_state, AnalyticError,
    AnalyticSteadyState, ShiftOrder,
};
use crate::field::{cross_section, Axis, Field, FieldError, StateSnapshot};
use crate::params::Parameters;

#[derive(Debug, Error)]
pub enum FrontError {
    #[error("level {level} outside the open field range ({min}, {max})")]
    NoContour { level: f64, min: f64, max: f64 },
    #[error("no contour at level {level} encloses ({x}, {y})")]
    NotEnclosed { level: f64, x: f64, y: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

type Result<T> = std::result::Result<T, FrontError>;

/// Contours with fewer distinct points are discarded as grid noise.
pub const MIN_CONTOUR_POINTS: usize = 8;

/// Closed polyline of a level set; the first point is repeated at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontContour {
    pub points: Vec<(f64, f64)>,
    pub level: f64,
    pub center: (f64, f64),
}

impl FrontContour {
    /// Signed shoelace area: positive when counter-clockwise.
    pub fn signed_area(&self) -> f64 {
        0.5 * self
            .points
            .windows(2)
            .map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1)
            .sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Even-odd point-in-polygon test.
    pub fn encloses(&self, p: (f64, f64)) -> bool {
        let mut inside = false;
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if (y0 > p.1) != (y1 > p.1) {
                let x = x0 + (p.1 - y0) * (x1 - x0) / (y1 - y0);
                if x > p.0 {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn with_center(mut self, center: (f64, f64)) -> Self {
        self.center = center;
        self
    }

    pub fn perimeter(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
            .sum()
    }
}

/// Distance statistics of a contour about its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub mean_radius: f64,
    pub std_radius: f64,
    pub n_points: usize,
}

/// Arc-length weighted mean and standard deviation of the distance to the
/// contour's centre, with the distance varying linearly along each segment.
pub fn front_radius(c: &FrontContour) -> RadiusEstimate {
    let dist = |p: (f64, f64)| (p.0 - c.center.0).hypot(p.1 - c.center.1);
    let (mut length, mut first, mut second) = (0.0, 0.0, 0.0);
    for w in c.points.windows(2) {
        let ds = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
        let (ra, rb) = (dist(w[0]), dist(w[1]));
        length += ds;
        first += 0.5 * (ra + rb) * ds;
        second += (ra * ra + ra * rb + rb * rb) / 3.0 * ds;
    }
    let mean = first / length;
    RadiusEstimate {
        mean_radius: mean,
        std_radius: (second / length - mean * mean).max(0.0).sqrt(),
        n_points: c.points.len() - 1,
    }
}

struct Grid<'a> {
    f: &'a Field,
    n: usize,
    level: f64,
}

impl Grid<'_> {
    fn horizontal_edges(&self) -> usize {
        (self.n - 1) * self.n
    }

    fn h(&self, i: usize, j: usize) -> usize {
        j * (self.n - 1) + i
    }

    fn v(&self, i: usize, j: usize) -> usize {
        self.horizontal_edges() + j * self.n + i
    }

    fn edge_count(&self) -> usize {
        2 * self.horizontal_edges()
    }

    fn endpoints(&self, e: usize) -> ((usize, usize), (usize, usize)) {
        let n = self.n;
        if e < self.horizontal_edges() {
            let (i, j) = (e % (n - 1), e / (n - 1));
            ((i, j), (i + 1, j))
        } else {
            let k = e - self.horizontal_edges();
            let (i, j) = (k % n, k / n);
            ((i, j), (i, j + 1))
        }
    }

    /// Crossing point on an edge, always interpolated from the endpoint
    /// with the lower index so both adjacent cells agree.
    fn point(&self, e: usize) -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = self.endpoints(e);
        let (a, b) = (self.f.get(i0, j0), self.f.get(i1, j1));
        let s = (self.level - a) / (b - a);
        let (x0, y0) = (self.f.coord(i0), self.f.coord(j0));
        let (x1, y1) = (self.f.coord(i1), self.f.coord(j1));
        (x0 + s * (x1 - x0), y0 + s * (y1 - y0))
    }

    /// Position along the boundary, counter-clockwise from the origin, in
    /// `[0, 4)`; `None` for interior edges.
    fn boundary_param(&self, e: usize) -> Option<f64> {
        let last = self.n - 1;
        let ((i0, j0), _) = self.endpoints(e);
        let (x, y) = self.point(e);
        if e < self.horizontal_edges() {
            match j0 {
                0 => Some(x),
                j if j == last => Some(2.0 + (1.0 - x)),
                _ => None,
            }
        } else {
            match i0 {
                0 => Some(3.0 + (1.0 - y)),
                i if i == last => Some(1.0 + y),
                _ => None,
            }
        }
    }
}

const NONE: usize = usize::MAX;
const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];

/// Marching-squares level set of `f`. Disjoint contours come back
/// separately, largest enclosed area first; saddle cells are resolved by
/// comparing the cell average with the level. Every contour carries
/// `center` as its reference point.
pub fn extract_contour(f: &Field, level: f64, center: (f64, f64)) -> Result<Vec<FrontContour>> {
    let (min, max) = (f.min(), f.max());
    if !(level > min && level < max) {
        return Err(FrontError::NoContour { level, min, max });
    }
    let n = f.n();
    let g = Grid { f, n, level };
    let mut next = vec![NONE; g.edge_count()];
    let mut incoming = vec![false; g.edge_count()];

    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let vals = [f.get(i, j), f.get(i + 1, j), f.get(i + 1, j + 1), f.get(i, j + 1)];
            let high = vals.map(|x| x > level);
            if high.iter().all(|&h| h) || high.iter().all(|&h| !h) {
                continue;
            }
            let edges = [g.h(i, j), g.v(i + 1, j), g.h(i, j + 1), g.v(i, j)];
            let centre_high = vals.iter().sum::<f64>() / 4.0 > level;
            for k in 0..4 {
                if !(high[k] && !high[(k + 1) % 4]) {
                    continue;
                }
                let rising = |m: usize| !high[m] && high[(m + 1) % 4];
                let partner = if centre_high {
                    (1..4).map(|d| (k + d) % 4).find(|&m| rising(m))
                } else {
                    (1..4).map(|d| (k + 4 - d) % 4).find(|&m| rising(m))
                }
                .expect("a falling crossing always has a rising partner");
                next[edges[k]] = edges[partner];
                incoming[edges[partner]] = true;
            }
        }
    }

    let mut visited = vec![false; g.edge_count()];
    let mut open: Vec<Vec<usize>> = Vec::new();
    for e in 0..g.edge_count() {
        if next[e] != NONE && !incoming[e] {
            let mut chain = vec![e];
            visited[e] = true;
            let mut cur = e;
            while next[cur] != NONE {
                cur = next[cur];
                visited[cur] = true;
                chain.push(cur);
            }
            open.push(chain);
        }
    }
    let mut polylines: Vec<Vec<(f64, f64)>> = Vec::new();
    for e in 0..g.edge_count() {
        if next[e] != NONE && !visited[e] {
            let mut pts = Vec::new();
            let mut cur = e;
            loop {
                visited[cur] = true;
                pts.push(g.point(cur));
                cur = next[cur];
                if cur == e {
                    break;
                }
            }
            pts.push(pts[0]);
            polylines.push(pts);
        }
    }
    polylines.extend(close_along_boundary(&g, &open));

    let mut contours: Vec<FrontContour> = polylines
        .into_iter()
        .filter(|p| p.len() > MIN_CONTOUR_POINTS)
        .map(|points| FrontContour {
            points,
            level,
            center,
        })
        .collect();
    contours.sort_by(|a, b| b.area().total_cmp(&a.area()));
    Ok(contours)
}

/// Joins chains that end on the boundary: from each chain's end, walk the
/// boundary counter-clockwise (keeping the high side on the left) to the
/// nearest chain start, inserting the square's corners on the way.
fn close_along_boundary(g: &Grid, open: &[Vec<usize>]) -> Vec<Vec<(f64, f64)>> {
    let starts: Vec<f64> = open
        .iter()
        .map(|c| g.boundary_param(c[0]).expect("open chains start on the boundary"))
        .collect();
    let ends: Vec<f64> = open
        .iter()
        .map(|c| g.boundary_param(*c.last().unwrap()).expect("open chains end on the boundary"))
        .collect();
    let mut used = vec![false; open.len()];
    let mut out = Vec::new();
    for first in 0..open.len() {
        if used[first] {
            continue;
        }
        used[first] = true;
        let mut pts: Vec<(f64, f64)> = open[first].iter().map(|&e| g.point(e)).collect();
        let mut cur = first;
        loop {
            let from = ends[cur];
            let target = (0..open.len())
                .filter(|&k| k == first || !used[k])
                .min_by(|&a, &b| {
                    let da = (starts[a] - from).rem_euclid(4.0);
                    let db = (starts[b] - from).rem_euclid(4.0);
                    da.total_cmp(&db)
                })
                .expect("the first chain is always a candidate");
            let gap = (starts[target] - from).rem_euclid(4.0);
            let mut corner = from.floor() + 1.0;
            while corner <= from + gap {
                pts.push(CORNERS[(corner as usize) % 4]);
                corner += 1.0;
            }
            if target == first {
                break;
            }
            used[target] = true;
            pts.extend(open[target].iter().map(|&e| g.point(e)));
            cur = target;
        }
        pts.push(pts[0]);
        out.push(pts);
    }
    out
}

/// The smallest contour at `level` that encloses `center`.
pub fn enclosing_contour(f: &Field, level: f64, center: (f64, f64)) -> Result<FrontContour> {
    extract_contour(f, level, center)?
        .into_iter()
        .filter(|c| c.encloses(center))
        .min_by(|a, b| a.area().total_cmp(&b.area()))
        .ok_or(FrontError::NotEnclosed {
            level,
            x: center.0,
            y: center.1,
        })
}

/// Radius of the colony plateau: the `v = v*` contour around `center`.
pub fn plateau_radius_numeric(v: &Field, v_star: f64, center: (f64, f64)) -> Result<RadiusEstimate> {
    Ok(front_radius(&enclosing_contour(v, v_star, center)?))
}

/// Front threshold `u2` (first order) for `Δc` of the stationary profile
/// at radius `r`.
pub fn front_threshold(r: f64, p: &Parameters, s: &AnalyticSteadyState) -> Result<f64> {
    let delta_c = if r >= s.r1 {
        2.0 * stationary_c(r, s)?
    } else {
        delta_c_at(r, s)?
    };
    Ok(shifted_equilibria(delta_c, p.lambda, p.chi0, p.u_star, ShiftOrder::FirstOrder)?.1)
}

/// Numerically measured invader front around one colony.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontMeasurement {
    pub contour: FrontContour,
    pub radius: RadiusEstimate,
    /// Threshold after the fixed-point pass.
    pub level: f64,
    /// Radius of the `u = ½` contour, for threshold sensitivity.
    pub half_level_radius: Option<RadiusEstimate>,
}

/// Extracts the front `u = u2` around `center`. The threshold starts from
/// `Δc = 2c(r_guess)` and is updated once from the measured radius.
pub fn measure_front(
    u: &Field,
    center: (f64, f64),
    p: &Parameters,
    s: &AnalyticSteadyState,
    r_guess: f64,
) -> Result<FrontMeasurement> {
    let first = enclosing_contour(u, front_threshold(r_guess, p, s)?, center)?;
    let level = front_threshold(front_radius(&first).mean_radius, p, s)?;
    let contour = enclosing_contour(u, level, center)?;
    let half_level_radius = enclosing_contour(u, 0.5, center)
        .ok()
        .map(|c| front_radius(&c));
    Ok(FrontMeasurement {
        radius: front_radius(&contour),
        contour,
        level,
        half_level_radius,
    })
}

/// Largest pointwise `|a − b| / |b|` over nodes accepted by `mask(x, y)`.
pub fn field_max_rel_deviation(a: &Field, b: &Field, mask: impl Fn(f64, f64) -> bool) -> Result<f64> {
    if a.n() != b.n() {
        return Err(FieldError::Shape(a.n(), b.n()).into());
    }
    let n = a.n();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            if mask(a.coord(i), a.coord(j)) {
                let (x, y) = (a.get(i, j), b.get(i, j));
                worst = worst.max((x - y).abs() / y.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(worst)
}

/// Cross-sections are compared with the disk solution only within this
/// distance of the colony, away from the corners of the square.
pub const PROFILE_INTERIOR_RADIUS: f64 = 0.4;

/// Largest relative deviation of the horizontal `c` cross-section through
/// `center` from the stationary profile, over `r ≤ radius`.
pub fn c_profile_deviation(
    c: &Field,
    center: (f64, f64),
    s: &AnalyticSteadyState,
    radius: f64,
) -> Result<f64> {
    let profile = cross_section(c, Axis::X, center.1)?;
    let row = (center.1 * (c.n() - 1) as f64).round() / (c.n() - 1) as f64;
    let mut worst: f64 = 0.0;
    for (x, value) in profile {
        let r = (x - center.0).hypot(row - center.1);
        if r <= radius {
            let exact = stationary_c(r, s)?;
            worst = worst.max((value - exact).abs() / exact.abs());
        }
    }
    Ok(worst)
}

pub fn write_contour_csv<W: Write>(mut w: W, c: &FrontContour) -> io::Result<()> {
    writeln!(w, "x,y")?;
    for (x, y) in &c.points {
        writeln!(w, "{x},{y}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: String,
    pub numeric: f64,
    pub analytic: f64,
    pub rel_error: f64,
}

/// Numeric-vs-analytic table, serialized as `metric,numeric,analytic,rel_error`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Front contours that produced the radius rows, one per colony.
    pub contours: Vec<FrontContour>,
}

impl ComparisonReport {
    pub fn push(&mut self, metric: impl Into<String>, numeric: f64, analytic: f64) {
        let rel_error = if analytic == 0.0 {
            numeric.abs()
        } else {
            ((numeric - analytic) / analytic).abs()
        };
        self.rows.push(ComparisonRow {
            metric: metric.into(),
            numeric,
            analytic,
            rel_error,
        });
    }

    pub fn get(&self, metric: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,numeric,analytic,rel_error\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.metric, r.numeric, r.analytic, r.rel_error);
        }
        out
    }

    /// Reads the rows written by [`ComparisonReport::to_csv`].
    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut report = Self::default();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(format!("line {}: expected 4 columns", idx + 1));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("line {}: bad number `{s}`", idx + 1))
            };
            report.rows.push(ComparisonRow {
                metric: parts[0].to_string(),
                numeric: num(parts[1])?,
                analytic: num(parts[2])?,
                rel_error: num(parts[3])?,
            });
        }
        Ok(report)
    }
}

/// Compares a simulated state with the single-colony analytic solution
/// around each colony centre. With one centre the `c` cross-section is
/// also checked; rows for colony `k > 0` carry a `_k` suffix.
pub fn compare_to_analytic(
    snap: &StateSnapshot,
    p: &Parameters,
    centers: &[(f64, f64)],
) -> Result<ComparisonReport> {
    let s = steady_state(p)?;
    let eq = *equilibrium_radius(p, &s)?.primary();
    let mut report = ComparisonReport::default();
    for (k, &center) in centers.iter().enumerate() {
        let tag = |m: &str| if k == 0 { m.to_string() } else { format!("{m}_{k}") };
        let plateau = plateau_radius_numeric(&snap.v, p.v_star, center)?;
        report.push(tag("plateau_radius"), plateau.mean_radius, s.r1);
        let front = measure_front(&snap.u, center, p, &s, eq.r0)?;
        report.push(tag("front_radius"), front.radius.mean_radius, eq.r0);
        report.push(tag("front_radius_std"), front.radius.std_radius, 0.0);
        report.push(tag("front_level"), front.level, eq.u2);
        if let Some(half) = front.half_level_radius {
            report.push(tag("front_radius_half_level"), half.mean_radius, eq.r0);
        }
        report.contours.push(front.contour);
    }
    if let [center] = centers {
        let c_center = snap.c.get(
            (center.0 * (snap.n() - 1) as f64).round() as usize,
            (center.1 * (snap.n() - 1) as f64).round() as usize,
        );
        report.push("c_center", c_center, stationary_c(0.0, &s)?);
        let dev = c_profile_deviation(&snap.c, *center, &s, PROFILE_INTERIOR_RADIUS)?;
        report.push("c_profile_max_rel_dev", dev, 0.0);
    }
    Ok(report)
}
