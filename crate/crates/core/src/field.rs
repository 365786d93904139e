//! Node-centred scalar fields on the unit square and the spatial operators
//! of the scheme.
//!
//! Nodes sit at `(i·Δx, j·Δx)` with `Δx = 1/(n−1)`. No-flux boundaries are
//! imposed with mirror ghost nodes: the ghost beyond node 0 carries the
//! value of node 1. Both operators below see the same ghosts, so for a
//! constant `u` the chemotactic divergence is exactly `u·χ0·Δc`, and both
//! conserve mass under the control-volume (trapezoidal) weights.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid mismatch: {0} vs {1} nodes per side")]
    Shape(usize, usize),
    #[error("grid must have at least 3 nodes per side (got {0})")]
    TooSmall(usize),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("non-finite value {value} at node ({i}, {j})")]
    NonFinite { i: usize, j: usize, value: f64 },
    #[error("offset {0} outside [0, 1]")]
    Offset(f64),
    #[error("negative time {0}")]
    Time(f64),
    #[error("bad snapshot file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Orientation of a cross-section line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Horizontal line: varies in `x` at fixed `y`.
    X,
    /// Vertical line: varies in `y` at fixed `x`.
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            other => Err(format!("unknown axis `{other}`")),
        }
    }
}

/// An `n × n` grid of values, row-major with rows of constant `y`:
/// node `(i, j)` lives at `data[j·n + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    n: usize,
    dx: f64,
    data: Vec<f64>,
}

#[inline]
pub(crate) fn below(i: usize) -> usize {
    if i == 0 {
        1
    } else {
        i - 1
    }
}

#[inline]
pub(crate) fn above(i: usize, n: usize) -> usize {
    if i + 1 == n {
        n - 2
    } else {
        i + 1
    }
}

/// Coordinate of node `i` on an `n`-node grid. Computed as a single
/// division so nested grids agree bitwise at shared nodes.
#[inline]
pub fn node_coord(i: usize, n: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

impl Field {
    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        assert!(n >= 3, "grid must have at least 3 nodes per side");
        Self {
            n,
            dx: 1.0 / (n - 1) as f64,
            data: vec![value; n * n],
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(n);
        for j in 0..n {
            let y = node_coord(j, n);
            for i in 0..n {
                out.data[j * n + i] = f(node_coord(i, n), y);
            }
        }
        out
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self, FieldError> {
        if n < 3 {
            return Err(FieldError::TooSmall(n));
        }
        if data.len() != n * n {
            return Err(FieldError::Length {
                expected: n * n,
                got: data.len(),
            });
        }
        let field = Self {
            n,
            dx: 1.0 / (n - 1) as f64,
            data,
        };
        field.check_finite()?;
        Ok(field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[j * self.n + i] = value;
    }

    pub fn coord(&self, i: usize) -> f64 {
        node_coord(i, self.n)
    }

    pub fn check_finite(&self) -> Result<(), FieldError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(FieldError::NonFinite {
                i: k % self.n,
                j: k / self.n,
                value: self.data[k],
            }),
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Area of the control volume around node `(i, j)`: halved on edges,
    /// quartered at corners.
    pub fn control_volume(&self, i: usize, j: usize) -> f64 {
        let w = |k: usize| if k == 0 || k + 1 == self.n { 0.5 } else { 1.0 };
        w(i) * w(j) * self.dx * self.dx
    }

    /// Node sum with weights ½ on edges and ¼ at corners. This is the
    /// quantity the flux-form operators conserve exactly.
    pub fn boundary_weighted_sum(&self) -> f64 {
        let w = |k: usize| if k == 0 || k + 1 == self.n { 0.5 } else { 1.0 };
        let mut total = 0.0;
        for j in 0..self.n {
            let mut row = 0.0;
            for i in 0..self.n {
                row += w(i) * self.get(i, j);
            }
            total += w(j) * row;
        }
        total
    }

    /// Trapezoidal integral over the unit square.
    pub fn integral(&self) -> f64 {
        self.boundary_weighted_sum() * self.dx * self.dx
    }

    /// Rotates the grid by 90° counter-clockwise about the square's centre.
    pub fn rotate90(&self) -> Field {
        let n = self.n;
        let mut out = Field::zeros(n);
        for j in 0..n {
            for i in 0..n {
                // (x, y) → (1 − y, x)
                out.set(n - 1 - j, i, self.get(i, j));
            }
        }
        out
    }

    fn same_grid(&self, other: &Field) -> Result<(), FieldError> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(FieldError::Shape(self.n, other.n))
        }
    }
}

/// Five-point Laplacian with mirror ghosts at the boundary.
pub fn laplacian_neumann(f: &Field) -> Field {
    let n = f.n;
    let inv_dx2 = 1.0 / (f.dx * f.dx);
    let src = &f.data;
    let mut out = Field::zeros(n);
    out.data.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let (jd, ju) = (below(j), above(j, n));
        for (i, o) in row.iter_mut().enumerate() {
            let (il, ir) = (below(i), above(i, n));
            let c = src[j * n + i];
            *o = ((src[j * n + il] + src[j * n + ir]) + (src[jd * n + i] + src[ju * n + i])
                - 4.0 * c)
                * inv_dx2;
        }
    });
    out
}

/// `χ0 ∇·(u∇c)` in flux form: face fluxes use the arithmetic mean of `u`
/// across the face, and the mirror ghosts make the boundary-face flux
/// vanish.
pub fn chemotactic_divergence(u: &Field, c: &Field, chi0: f64) -> Result<Field, FieldError> {
    u.same_grid(c)?;
    let n = u.n;
    let scale = chi0 / (u.dx * u.dx);
    let (us, cs) = (&u.data, &c.data);
    let mut out = Field::zeros(n);
    out.data.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let (jd, ju) = (below(j), above(j, n));
        for (i, o) in row.iter_mut().enumerate() {
            let (il, ir) = (below(i), above(i, n));
            let k = j * n + i;
            *o = scale
                * flux_balance(
                    us[k],
                    cs[k],
                    [us[j * n + il], us[j * n + ir], us[jd * n + i], us[ju * n + i]],
                    [cs[j * n + il], cs[j * n + ir], cs[jd * n + i], cs[ju * n + i]],
                );
        }
    });
    Ok(out)
}

/// Net face flux `Σ ½(u_c + u_nb)(c_nb − c_c)` grouped as
/// `(F_right − F_left) + (F_up − F_down)`; neighbours are ordered
/// left, right, down, up.
#[inline(always)]
pub(crate) fn flux_balance(uc: f64, cc: f64, un: [f64; 4], cn: [f64; 4]) -> f64 {
    let f_left = 0.5 * (un[0] + uc) * (cc - cn[0]);
    let f_right = 0.5 * (uc + un[1]) * (cn[1] - cc);
    let f_down = 0.5 * (un[2] + uc) * (cc - cn[2]);
    let f_up = 0.5 * (uc + un[3]) * (cn[3] - cc);
    (f_right - f_left) + (f_up - f_down)
}

/// Values along the grid line nearest to `offset`, paired with the
/// coordinate along the line.
pub fn cross_section(f: &Field, axis: Axis, offset: f64) -> Result<Vec<(f64, f64)>, FieldError> {
    if !(0.0..=1.0).contains(&offset) {
        return Err(FieldError::Offset(offset));
    }
    let line = (offset * (f.n - 1) as f64).round() as usize;
    Ok((0..f.n)
        .map(|k| {
            let value = match axis {
                Axis::X => f.get(k, line),
                Axis::Y => f.get(line, k),
            };
            (f.coord(k), value)
        })
        .collect())
}

pub fn write_profile_csv<W: Write>(mut w: W, profile: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "coord,value")?;
    for (x, v) in profile {
        writeln!(w, "{x},{v}")?;
    }
    Ok(())
}

const MAGIC: &[u8; 4] = b"CFLD";
const FORMAT_VERSION: u32 = 1;

/// Writes one field record: `"CFLD"`, version (u32), `n` (u32), `t` (f64),
/// then `n²` values, all little-endian, row-major.
pub fn write_field<W: Write>(mut w: W, f: &Field, t: f64) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(f.n as u32).to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(f.data.len() * 8);
    for v in &f.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_field<R: Read>(mut r: R) -> Result<(Field, f64), FieldError> {
    let mut head = [0u8; 20];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(FieldError::Format("missing CFLD magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(FieldError::Format(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let t = f64::from_le_bytes(head[12..20].try_into().unwrap());
    let mut raw = vec![0u8; n * n * 8];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok((Field::from_vec(n, data)?, t))
}

/// The three species at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub c: Field,
}

impl StateSnapshot {
    pub fn new(t: f64, u: Field, v: Field, c: Field) -> Result<Self, FieldError> {
        u.same_grid(&v)?;
        u.same_grid(&c)?;
        if !(t >= 0.0) {
            return Err(FieldError::Time(t));
        }
        Ok(Self { t, u, v, c })
    }

    pub fn n(&self) -> usize {
        self.u.n
    }

    /// Snapshot file: the `u`, `v`, `c` field records back to back.
    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for f in [&self.u, &self.v, &self.c] {
            write_field(&mut w, f, self.t)?;
        }
        w.flush()
    }

    pub fn read_from(path: &Path) -> Result<Self, FieldError> {
        let mut r = BufReader::new(File::open(path)?);
        let (u, t) = read_field(&mut r)?;
        let (v, tv) = read_field(&mut r)?;
        let (c, tc) = read_field(&mut r)?;
        if tv != t || tc != t {
            return Err(FieldError::Format("field times disagree".into()));
        }
        Self::new(t, u, v, c)
    }
}
