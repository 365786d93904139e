//! Closed-form stationary states on the unit-area disk and the asymptotic
//! dynamics of a circular front.
//!
//! With `Dv = 0` a Gaussian colony `A·exp(-ω r²)` relaxes to the indicator
//! of the disk `r < R1`. The chemical then solves `½Δc + δ v∞ − c = 0`,
//! whose radial solution is a combination of `I0(√2 r)` and `K0(√2 r)` on
//! either side of `R1`. The invader's front sits where the Nagumo speed,
//! the chemotactic drift and curvature balance; the root of
//! [`PolynomialCoefficients`] approximates that radius.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, SQRT_2};
use std::fmt::Write as _;

use thiserror::Error;

use crate::params::{plateau_condition_holds, Parameters};
use crate::specfun::{bessel_i0, bessel_i1, bessel_k0, bessel_k1, BesselError, BesselMode, EULER_GAMMA};
use crate::DISK_RADIUS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateauBound {
    /// `A ≤ v*`: the colony dies everywhere.
    Lower,
    /// `A ≥ v*·exp(ω/π)`: the plateau would not fit in the dish.
    Upper,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("no plateau forms: {0:?} bound of 1 < A/v* < exp(omega/pi) violated")]
    NoPlateau(PlateauBound),
    #[error("{what} = {value} outside its domain")]
    Domain { what: &'static str, value: f64 },
    #[error("r = {r} lies inside the plateau (R1 = {r1}); only the outer branch applies")]
    Branch { r: f64, r1: f64 },
    #[error("shifted equilibria are complex (discriminant {0}); no front can exist")]
    ComplexRoots(f64),
    #[error("equilibrium polynomial has no root in (R1, 1/sqrt(pi))")]
    NoEquilibrium,
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

type Result<T> = std::result::Result<T, AnalyticError>;

/// `R1 = √(ln(A/v*)/ω)`.
pub fn plateau_radius(a: f64, omega: f64, v_star: f64) -> Result<f64> {
    if !plateau_condition_holds(a, omega, v_star) {
        let bound = if a / v_star <= 1.0 {
            PlateauBound::Lower
        } else {
            PlateauBound::Upper
        };
        return Err(AnalyticError::NoPlateau(bound));
    }
    Ok(((a / v_star).ln() / omega).sqrt())
}

/// Stationary bacterial density: 1 on the closed plateau `r ≤ R1`, 0 outside.
pub fn stationary_v(r: f64, r1: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(if r <= r1 { 1.0 } else { 0.0 })
}

fn check_radius(r: f64) -> Result<()> {
    if (0.0..=DISK_RADIUS).contains(&r) {
        Ok(())
    } else {
        Err(AnalyticError::Domain {
            what: "radius",
            value: r,
        })
    }
}

/// Plateau radius and Bessel coefficients of the stationary chemical field
///
/// ```text
/// c(r) = C3·I0(√2 r) + δ            r < R1
/// c(r) = C1·I0(√2 r) + C2·K0(√2 r)  R1 ≤ r ≤ 1/√π
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSteadyState {
    pub r1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta: f64,
}

/// Which piece of the stationary chemical profile to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Inner,
    Outer,
}

/// Solves the Neumann condition at the dish edge and the C¹ matching at
/// `R1` for the three coefficients (exact Bessel values).
pub fn chemical_constants(r1: f64, delta: f64) -> Result<AnalyticSteadyState> {
    if !(r1 > 0.0 && r1 < DISK_RADIUS) {
        return Err(AnalyticError::Domain {
            what: "R1",
            value: r1,
        });
    }
    if !(delta > 0.0) {
        return Err(AnalyticError::Domain {
            what: "delta",
            value: delta,
        });
    }
    let exact = BesselMode::Exact;
    let edge = (2.0 / std::f64::consts::PI).sqrt();
    let i1_edge = bessel_i1(edge, exact)?;
    let k1_edge = bessel_k1(edge, exact)?;
    let i1_r1 = bessel_i1(SQRT_2 * r1, exact)?;
    let k1_r1 = bessel_k1(SQRT_2 * r1, exact)?;
    let scale = SQRT_2 * delta * r1;
    Ok(AnalyticSteadyState {
        r1,
        c1: scale * k1_edge * i1_r1 / i1_edge,
        c2: scale * i1_r1,
        c3: scale / i1_edge * (k1_edge * i1_r1 - i1_edge * k1_r1),
        delta,
    })
}

/// Plateau and chemical coefficients for a parameter set.
pub fn steady_state(p: &Parameters) -> Result<AnalyticSteadyState> {
    chemical_constants(plateau_radius(p.a, p.omega, p.v_star)?, p.delta)
}

impl AnalyticSteadyState {
    pub fn branch_at(&self, r: f64) -> Branch {
        if r < self.r1 {
            Branch::Inner
        } else {
            Branch::Outer
        }
    }
}

/// Value of one branch of the chemical profile, without checking that `r`
/// lies on that branch.
pub fn branch_value(r: f64, branch: Branch, s: &AnalyticSteadyState) -> Result<f64> {
    let x = SQRT_2 * r;
    let exact = BesselMode::Exact;
    Ok(match branch {
        Branch::Inner => s.c3 * bessel_i0(x, exact)? + s.delta,
        Branch::Outer => s.c1 * bessel_i0(x, exact)? + s.c2 * bessel_k0(x, exact)?,
    })
}

/// `(c′, c″)` of one branch, from `I0″(x) = I0 − I1/x` and
/// `K0″(x) = K0 + K1/x` (exact Bessel values).
pub fn branch_derivatives(r: f64, branch: Branch, s: &AnalyticSteadyState) -> Result<(f64, f64)> {
    let x = SQRT_2 * r;
    let exact = BesselMode::Exact;
    let i0 = bessel_i0(x, exact)?;
    let i1 = bessel_i1(x, exact)?;
    // I1(x)/x → ½ as x → 0.
    let i1_over_x = if x > 0.0 { i1 / x } else { 0.5 };
    let i0_pp = i0 - i1_over_x;
    Ok(match branch {
        Branch::Inner => (SQRT_2 * s.c3 * i1, 2.0 * s.c3 * i0_pp),
        Branch::Outer => {
            let k0 = bessel_k0(x, exact)?;
            let k1 = bessel_k1(x, exact)?;
            (
                SQRT_2 * (s.c1 * i1 - s.c2 * k1),
                2.0 * (s.c1 * i0_pp + s.c2 * (k0 + k1 / x)),
            )
        }
    })
}

/// Stationary chemical concentration at radius `r ∈ [0, 1/√π]`.
pub fn stationary_c(r: f64, s: &AnalyticSteadyState) -> Result<f64> {
    check_radius(r)?;
    branch_value(r, s.branch_at(r), s)
}

/// `(c′(r), c″(r))` on the outer branch `R1 ≤ r ≤ 1/√π`, where the front lives.
pub fn stationary_c_derivatives(r: f64, s: &AnalyticSteadyState) -> Result<(f64, f64)> {
    check_radius(r)?;
    if r < s.r1 {
        return Err(AnalyticError::Branch { r, r1: s.r1 });
    }
    branch_derivatives(r, Branch::Outer, s)
}

/// Small-argument estimate `c″(r) ≈ C1(1 + 3r²/4) + C2/r²` of the outer branch.
pub fn stationary_c_second_derivative_approx(r: f64, s: &AnalyticSteadyState) -> f64 {
    s.c1 * (1.0 + 0.75 * r * r) + s.c2 / (r * r)
}

/// Outer-branch `(c, c′)` in the requested Bessel mode.
fn outer_c_and_slope(r: f64, s: &AnalyticSteadyState, mode: BesselMode) -> Result<(f64, f64)> {
    let x = SQRT_2 * r;
    let c = s.c1 * bessel_i0(x, mode)? + s.c2 * bessel_k0(x, mode)?;
    let slope = SQRT_2 * (s.c1 * bessel_i1(x, mode)? - s.c2 * bessel_k1(x, mode)?);
    Ok((c, slope))
}

/// `Δc = 2(c − δ v∞)`, exact by the stationary equation.
pub fn delta_c_at(r: f64, s: &AnalyticSteadyState) -> Result<f64> {
    Ok(2.0 * (stationary_c(r, s)? - s.delta * stationary_v(r, s.r1)?))
}

/// Full roots or their first-order expansion in `χ0Δc/λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftOrder {
    Exact,
    FirstOrder,
}

/// Stable and unstable roots `(u1, u2)` of
/// `λu(1−u)(u−u*) + χ0Δc·u = λu(u1−u)(u−u2)`.
pub fn shifted_equilibria(
    delta_c: f64,
    lambda: f64,
    chi0: f64,
    u_star: f64,
    order: ShiftOrder,
) -> Result<(f64, f64)> {
    let disc = (1.0 - u_star).powi(2) + 4.0 * chi0 * delta_c / lambda;
    if disc < 0.0 {
        return Err(AnalyticError::ComplexRoots(disc));
    }
    Ok(match order {
        ShiftOrder::Exact => {
            let mid = 0.5 * (1.0 + u_star);
            let half = 0.5 * disc.sqrt();
            (mid + half, mid - half)
        }
        ShiftOrder::FirstOrder => {
            let shift = chi0 * delta_c / (lambda * (1.0 - u_star));
            (1.0 + shift, u_star - shift)
        }
    })
}

/// Speed of the planar bistable front from `u1` into 0: `√(2λDu)(u1/2 − u2)`.
/// Positive means the `u1` state invades.
pub fn nagumo_speed(u1: f64, u2: f64, lambda: f64, du: f64) -> f64 {
    (2.0 * lambda * du).sqrt() * (0.5 * u1 - u2)
}

/// `p(x) = a3 x³ + a2 x² + a1 x + a0 + b x ln x`, whose root is the
/// equilibrium front radius. Built from the small-argument Bessel forms and
/// first-order shifted equilibria, so `p(R) = −R·Ṙ` for the front ODE in
/// [`BesselMode::PaperApprox`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialCoefficients {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub b: f64,
}

impl PolynomialCoefficients {
    pub fn new(p: &Parameters, s: &AnalyticSteadyState) -> Self {
        let one_minus = 1.0 - p.u_star;
        let log_term = 0.5 * LN_2 - EULER_GAMMA;
        Self {
            a3: 3.0 * p.chi0 * s.c1 * p.du.sqrt() / ((2.0 * p.lambda).sqrt() * one_minus),
            a2: p.chi0 * s.c1,
            a1: (2.0 * p.lambda * p.du).sqrt()
                * (0.5 - p.u_star
                    + 3.0 * p.chi0 / (p.lambda * one_minus) * (s.c1 + s.c2 * log_term)),
            a0: p.du - p.chi0 * s.c2,
            b: -3.0 * p.chi0 * s.c2 * (2.0 * p.du).sqrt() / (p.lambda.sqrt() * one_minus),
        }
    }

    /// `(p(x), p′(x))`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        if !(x > 0.0) {
            return Err(AnalyticError::Domain {
                what: "polynomial argument",
                value: x,
            });
        }
        let ln = x.ln();
        let value = ((self.a3 * x + self.a2) * x + self.a1) * x + self.a0 + self.b * x * ln;
        let slope = (3.0 * self.a3 * x + 2.0 * self.a2) * x + self.a1 + self.b * (ln + 1.0);
        Ok((value, slope))
    }
}

pub fn equilibrium_polynomial(x: f64, p: &Parameters, s: &AnalyticSteadyState) -> Result<(f64, f64)> {
    PolynomialCoefficients::new(p, s).eval(x)
}

/// A stationary circular front and its linear stability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEquilibrium {
    pub r0: f64,
    /// `Δc` at the front, from the exact stationary profile.
    pub delta_c: f64,
    pub u1: f64,
    pub u2: f64,
    pub s1: f64,
    /// `Du/R0² − χ0 c″(R0)` with the small-argument `c″`.
    pub radial_rate: f64,
    /// Same rate with the exact `c″`.
    pub radial_rate_exact: f64,
    pub stable: bool,
}

impl FrontEquilibrium {
    pub fn at(r0: f64, p: &Parameters, s: &AnalyticSteadyState) -> Result<Self> {
        let delta_c = delta_c_at(r0, s)?;
        let (u1, u2) = shifted_equilibria(delta_c, p.lambda, p.chi0, p.u_star, ShiftOrder::FirstOrder)?;
        let (radial_rate, stable) = radial_stability(r0, p, s)?;
        let (_, cpp) = stationary_c_derivatives(r0, s)?;
        Ok(Self {
            r0,
            delta_c,
            u1,
            u2,
            s1: nagumo_speed(u1, u2, p.lambda, p.du),
            radial_rate,
            radial_rate_exact: p.du / (r0 * r0) - p.chi0 * cpp,
            stable,
        })
    }
}

/// Roots of the equilibrium polynomial outside the plateau.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSearch {
    /// Distinct roots in increasing radius.
    pub roots: Vec<FrontEquilibrium>,
}

impl EquilibriumSearch {
    pub fn is_ambiguous(&self) -> bool {
        self.roots.len() > 1
    }

    /// The smallest root.
    pub fn primary(&self) -> &FrontEquilibrium {
        &self.roots[0]
    }

    pub fn unique(&self) -> Option<&FrontEquilibrium> {
        match self.roots.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }
}

const NEWTON_STARTS: usize = 32;
const NEWTON_MAX_ITER: usize = 100;
const ROOT_TOL: f64 = 1e-12;
const BRACKET_SAMPLES: usize = 2000;

fn newton(poly: &PolynomialCoefficients, mut x: f64) -> Option<f64> {
    for _ in 0..NEWTON_MAX_ITER {
        let (value, slope) = poly.eval(x).ok()?;
        if value.abs() < ROOT_TOL {
            return Some(x);
        }
        if slope == 0.0 || !slope.is_finite() {
            return None;
        }
        let next = x - value / slope;
        if !(next > 0.0 && next <= DISK_RADIUS) {
            return None;
        }
        x = next;
    }
    None
}

fn bisect(poly: &PolynomialCoefficients, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = poly.eval(lo).ok()?.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = poly.eval(mid).ok()?.0;
        if f_mid.abs() < ROOT_TOL || hi - lo < 1e-15 {
            return Some(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Locates the equilibrium front radius: Newton–Raphson from 32 equispaced
/// starts in `(0.01, 1/√π)`, with bisection on any sign-change bracket that
/// Newton missed. Roots inside the plateau are discarded, since the
/// polynomial assumes the front sees the outer branch of `c`.
pub fn equilibrium_radius(p: &Parameters, s: &AnalyticSteadyState) -> Result<EquilibriumSearch> {
    let poly = PolynomialCoefficients::new(p, s);
    let lo = 0.01;
    let mut roots: Vec<f64> = (0..NEWTON_STARTS)
        .map(|k| lo + (k + 1) as f64 * (DISK_RADIUS - lo) / (NEWTON_STARTS + 1) as f64)
        .filter_map(|x0| newton(&poly, x0))
        .collect();

    let grid: Vec<f64> = (0..=BRACKET_SAMPLES)
        .map(|k| DISK_RADIUS * (k.max(1) as f64) / BRACKET_SAMPLES as f64)
        .collect();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (poly.eval(a)?.0, poly.eval(b)?.0);
        let bracketed = (fa < 0.0) != (fb < 0.0);
        let known = roots.iter().any(|&r| r >= a && r <= b);
        if bracketed && !known {
            if let Some(r) = bisect(&poly, a, b) {
                roots.push(r);
            }
        }
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let roots = roots
        .into_iter()
        .filter(|&r| r > s.r1 && r < DISK_RADIUS)
        .map(|r| FrontEquilibrium::at(r, p, s))
        .collect::<Result<Vec<_>>>()?;
    if roots.is_empty() {
        return Err(AnalyticError::NoEquilibrium);
    }
    Ok(EquilibriumSearch { roots })
}

/// Growth rate of a radial perturbation, `Du/R0² − χ0 c″(R0)` with the
/// small-argument `c″`, and whether it decays.
pub fn radial_stability(r0: f64, p: &Parameters, s: &AnalyticSteadyState) -> Result<(f64, bool)> {
    check_radius(r0)?;
    if r0 <= s.r1 {
        return Err(AnalyticError::Branch { r: r0, r1: s.r1 });
    }
    let rate = p.du / (r0 * r0) - p.chi0 * stationary_c_second_derivative_approx(r0, s);
    Ok((rate, rate < 0.0))
}

/// Growth rate of the azimuthal mode `cos(mθ)`:
/// `−(Du/R0²)m² + Du/R0² − χ0 c″(R0)`.
pub fn azimuthal_mode_rate(m: u32, r0: f64, p: &Parameters, s: &AnalyticSteadyState) -> Result<f64> {
    let (radial, _) = radial_stability(r0, p, s)?;
    let m = f64::from(m);
    Ok(-(p.du / (r0 * r0)) * m * m + radial)
}

/// Side through which a front trajectory left `(R1, 1/√π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitSide {
    /// Collapsed onto the plateau.
    Inner,
    /// Reached the dish edge.
    Outer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrajectory {
    /// `(t, R)` samples, one per step, starting at `(0, R_init)`.
    pub points: Vec<(f64, f64)>,
    pub exit: Option<ExitSide>,
}

/// Right-hand side of the circular-front equation
/// `Ṙ = −√(2λDu)(u1/2 − u2) − χ0 c′(R) − Du/R`, with `u1, u2` the
/// first-order shifted equilibria at `Δc = 2c(R)`.
pub fn front_velocity(r: f64, p: &Parameters, s: &AnalyticSteadyState, mode: BesselMode) -> Result<f64> {
    let (c, slope) = outer_c_and_slope(r, s, mode)?;
    let (u1, u2) = shifted_equilibria(2.0 * c, p.lambda, p.chi0, p.u_star, ShiftOrder::FirstOrder)?;
    Ok(-nagumo_speed(u1, u2, p.lambda, p.du) - p.chi0 * slope - p.du / r)
}

/// Explicit Euler integration of the circular-front equation.
///
/// In [`BesselMode::PaperApprox`] the velocity equals `−p(R)/R`, so the
/// root of the equilibrium polynomial is an exact fixed point; in
/// [`BesselMode::Exact`] the fixed point shifts slightly.
pub fn integrate_front_radius(
    r_init: f64,
    t_end: f64,
    dt: f64,
    p: &Parameters,
    s: &AnalyticSteadyState,
    mode: BesselMode,
) -> Result<FrontTrajectory> {
    if !(r_init > s.r1 && r_init < DISK_RADIUS) {
        return Err(AnalyticError::Domain {
            what: "initial front radius",
            value: r_init,
        });
    }
    if !(dt > 0.0) {
        return Err(AnalyticError::Domain {
            what: "dt",
            value: dt,
        });
    }
    let steps = (t_end / dt).ceil() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    points.push((0.0, r_init));
    let mut r = r_init;
    for k in 1..=steps {
        r += dt * front_velocity(r, p, s, mode)?;
        points.push((k as f64 * dt, r));
        if r <= s.r1 {
            return Ok(FrontTrajectory {
                points,
                exit: Some(ExitSide::Inner),
            });
        }
        if r >= DISK_RADIUS {
            return Ok(FrontTrajectory {
                points,
                exit: Some(ExitSide::Outer),
            });
        }
    }
    Ok(FrontTrajectory { points, exit: None })
}

/// Number of azimuthal modes listed in the analytic report.
pub const REPORT_MODES: usize = 9;

/// Every analytic quantity for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub steady: AnalyticSteadyState,
    pub equilibrium: FrontEquilibrium,
    pub root_count: usize,
    /// `χ0 c″(R0)` with the small-argument `c″`.
    pub chi0_cpp_approx: f64,
    pub chi0_cpp_exact: f64,
    pub du_over_r0_sq: f64,
    pub mode_rates: [f64; REPORT_MODES],
}

impl AnalyticReport {
    pub fn compute(p: &Parameters) -> Result<Self> {
        let steady = steady_state(p)?;
        let search = equilibrium_radius(p, &steady)?;
        let equilibrium = *search.primary();
        let r0 = equilibrium.r0;
        let (_, cpp) = stationary_c_derivatives(r0, &steady)?;
        let mut mode_rates = [0.0; REPORT_MODES];
        for (m, rate) in mode_rates.iter_mut().enumerate() {
            *rate = azimuthal_mode_rate(m as u32, r0, p, &steady)?;
        }
        Ok(Self {
            steady,
            equilibrium,
            root_count: search.roots.len(),
            chi0_cpp_approx: p.chi0 * stationary_c_second_derivative_approx(r0, &steady),
            chi0_cpp_exact: p.chi0 * cpp,
            du_over_r0_sq: p.du / (r0 * r0),
            mode_rates,
        })
    }

    fn rows(&self) -> Vec<(String, f64)> {
        let s = &self.steady;
        let e = &self.equilibrium;
        let mut rows: Vec<(String, f64)> = [
            ("R1", s.r1),
            ("C1", s.c1),
            ("C2", s.c2),
            ("C3", s.c3),
            ("delta", s.delta),
            ("R0", e.r0),
            ("delta_c", e.delta_c),
            ("u1", e.u1),
            ("u2", e.u2),
            ("s1", e.s1),
            ("radial_rate", e.radial_rate),
            ("radial_rate_exact", e.radial_rate_exact),
            ("chi0_cpp_approx", self.chi0_cpp_approx),
            ("chi0_cpp_exact", self.chi0_cpp_exact),
            ("Du_over_R0_sq", self.du_over_r0_sq),
            ("stable", if e.stable { 1.0 } else { 0.0 }),
            ("root_count", self.root_count as f64),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        for (m, rate) in self.mode_rates.iter().enumerate() {
            rows.push((format!("rate_m{m}"), *rate));
        }
        rows
    }

    /// CSV with header `quantity,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value\n");
        for (k, v) in self.rows() {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }

    /// Reads back the output of [`AnalyticReport::to_csv`].
    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected `quantity,value`", idx + 1))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad number `{v}`", idx + 1))?;
            map.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| map.get(k).copied().ok_or_else(|| format!("missing quantity `{k}`"));
        let mut mode_rates = [0.0; REPORT_MODES];
        for (m, rate) in mode_rates.iter_mut().enumerate() {
            *rate = get(&format!("rate_m{m}"))?;
        }
        Ok(Self {
            steady: AnalyticSteadyState {
                r1: get("R1")?,
                c1: get("C1")?,
                c2: get("C2")?,
                c3: get("C3")?,
                delta: get("delta")?,
            },
            equilibrium: FrontEquilibrium {
                r0: get("R0")?,
                delta_c: get("delta_c")?,
                u1: get("u1")?,
                u2: get("u2")?,
                s1: get("s1")?,
                radial_rate: get("radial_rate")?,
                radial_rate_exact: get("radial_rate_exact")?,
                stable: get("stable")? != 0.0,
            },
            root_count: get("root_count")? as usize,
            chi0_cpp_approx: get("chi0_cpp_approx")?,
            chi0_cpp_exact: get("chi0_cpp_exact")?,
            du_over_r0_sq: get("Du_over_R0_sq")?,
            mode_rates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent implementation (Cephes-based
    // Bessel routines and Brent's method on the same polynomial).
    const R1_REF: f64 = 0.042_329_179_878_991_93;
    const C1_REF: f64 = 0.035_941_840_311_984_816;
    const C2_REF: f64 = 0.017_925_621_895_748_145;
    const C3_REF: f64 = -9.902_537_919_964_589;
    const R0_REF: f64 = 0.131_999_183_805_473_4;

    fn table1() -> (Parameters, AnalyticSteadyState) {
        let p = Parameters::table1();
        let s = steady_state(&p).unwrap();
        (p, s)
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn plateau_radius_values() {
        let r1 = plateau_radius(3.0, 1000.0, 0.5).unwrap();
        assert!((r1 - 0.0423).abs() < 1e-4);
        assert!(close(r1, R1_REF, 1e-14));
        let v = 0.4;
        let r = plateau_radius(v * std::f64::consts::E, 400.0, v).unwrap();
        assert!((r - 1.0 / 20.0).abs() < 1e-15);
        let r = plateau_radius(6.0, 2000.0, 0.5).unwrap();
        assert!((r - (12f64.ln() / 2000.0).sqrt()).abs() < 1e-16);
        assert!((r - 0.03525).abs() < 1e-5);
    }

    #[test]
    fn plateau_radius_bounds() {
        assert_eq!(
            plateau_radius(0.5, 1000.0, 0.5),
            Err(AnalyticError::NoPlateau(PlateauBound::Lower))
        );
        assert_eq!(
            plateau_radius(100.0, 3.0, 0.5),
            Err(AnalyticError::NoPlateau(PlateauBound::Upper))
        );
    }

    #[test]
    fn stationary_v_indicator() {
        assert_eq!(stationary_v(0.0, 0.0423).unwrap(), 1.0);
        assert_eq!(stationary_v(0.1, 0.0423).unwrap(), 0.0);
        assert_eq!(stationary_v(0.0423, 0.0423).unwrap(), 1.0);
        assert!(stationary_v(0.6, 0.0423).is_err());
        assert!(stationary_v(-0.01, 0.0423).is_err());
    }

    #[test]
    fn chemical_constants_reference() {
        let (_, s) = table1();
        assert!(close(s.c1, C1_REF, 1e-12));
        assert!(close(s.c2, C2_REF, 1e-12));
        assert!(close(s.c3, C3_REF, 1e-12));
        assert!((s.c2 - 0.0179).abs() < 5e-5);
        assert!(s.c1 > 0.0 && s.c2 > 0.0);
    }

    #[test]
    fn chemical_constants_ratio_and_linearity() {
        let edge = (2.0 / std::f64::consts::PI).sqrt();
        let ratio = bessel_k1(edge, BesselMode::Exact).unwrap() / bessel_i1(edge, BesselMode::Exact).unwrap();
        for r1 in [0.01, 0.0423, 0.2, 0.5] {
            let s = chemical_constants(r1, 10.0).unwrap();
            assert!(close(s.c1 / s.c2, ratio, 1e-14));
            let d = chemical_constants(r1, 20.0).unwrap();
            assert!(close(d.c1, 2.0 * s.c1, 1e-15));
            assert!(close(d.c2, 2.0 * s.c2, 1e-15));
            assert!(close(d.c3, 2.0 * s.c3, 1e-15));
        }
        assert!(chemical_constants(0.0, 10.0).is_err());
        assert!(chemical_constants(0.6, 10.0).is_err());
        assert!(chemical_constants(0.1, 0.0).is_err());
    }

    #[test]
    fn c1_matching_at_plateau_edge() {
        let (_, s) = table1();
        let jump = branch_value(s.r1, Branch::Inner, &s).unwrap() - branch_value(s.r1, Branch::Outer, &s).unwrap();
        assert!(jump.abs() < 1e-10, "{jump}");
        let (di, _) = branch_derivatives(s.r1, Branch::Inner, &s).unwrap();
        let (do_, _) = branch_derivatives(s.r1, Branch::Outer, &s).unwrap();
        assert!((di - do_).abs() < 1e-8);
    }

    #[test]
    fn neumann_condition_at_dish_edge() {
        let (_, s) = table1();
        let (slope, _) = stationary_c_derivatives(DISK_RADIUS, &s).unwrap();
        assert!(slope.abs() < 1e-8, "{slope}");
    }

    #[test]
    fn stationary_equation_residual() {
        let (p, s) = table1();
        let check = |r: f64, branch: Branch| {
            let c = branch_value(r, branch, &s).unwrap();
            let (c1, c2) = branch_derivatives(r, branch, &s).unwrap();
            let v = if branch == Branch::Inner { 1.0 } else { 0.0 };
            let residual = 0.5 * (c2 + c1 / r) + p.delta * v - c;
            assert!(residual.abs() < 1e-8, "r = {r}: {residual}");
        };
        for k in 0..50 {
            check(s.r1 * (k as f64 + 0.5) / 50.0, Branch::Inner);
            check(s.r1 + (DISK_RADIUS - s.r1) * k as f64 / 49.0, Branch::Outer);
        }
    }

    #[test]
    fn profile_decreases_outside_plateau() {
        let (_, s) = table1();
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let r = s.r1 + (DISK_RADIUS - s.r1) * (k as f64 + 0.5) / 200.0;
            let c = stationary_c(r, &s).unwrap();
            assert!(c < prev);
            prev = c;
            assert!(stationary_c_derivatives(r, &s).unwrap().0 < 0.0);
        }
        assert!(stationary_c(0.7, &s).is_err());
    }

    #[test]
    fn outer_derivatives_reject_inner_radius() {
        let (_, s) = table1();
        assert!(matches!(
            stationary_c_derivatives(0.01, &s),
            Err(AnalyticError::Branch { .. })
        ));
    }

    #[test]
    fn slope_matches_finite_difference() {
        let (_, s) = table1();
        let h = 1e-6;
        let r = 0.2;
        let fd = (stationary_c(r + h, &s).unwrap() - stationary_c(r - h, &s).unwrap()) / (2.0 * h);
        let (slope, curv) = stationary_c_derivatives(r, &s).unwrap();
        assert!((slope - fd).abs() < 1e-6);
        let h = 1e-4;
        let fd2 = (stationary_c(r + h, &s).unwrap() - 2.0 * stationary_c(r, &s).unwrap()
            + stationary_c(r - h, &s).unwrap())
            / (h * h);
        assert!((curv - fd2).abs() < 1e-5);
    }

    #[test]
    fn curvature_at_reference_radius() {
        let (p, s) = table1();
        let r0 = 0.1315;
        let approx = p.chi0 * stationary_c_second_derivative_approx(r0, &s);
        assert!((approx - 3.4409).abs() < 0.02, "{approx}");
        let (rate, stable) = radial_stability(r0, &p, &s).unwrap();
        assert!((p.du / (r0 * r0) - 0.5783).abs() < 5e-4);
        assert!(stable && rate < 0.0);
    }

    #[test]
    fn delta_c_identities() {
        let (_, s) = table1();
        let r = 0.2;
        assert_eq!(delta_c_at(r, &s).unwrap(), 2.0 * stationary_c(r, &s).unwrap());
        assert!((delta_c_at(0.0, &s).unwrap() - 2.0 * s.c3).abs() < 1e-12);
        for r in [0.0, 0.01, 0.03, 0.05, 0.2, 0.5] {
            let lap = delta_c_at(r, &s).unwrap();
            let v = stationary_v(r, s.r1).unwrap();
            let c = stationary_c(r, &s).unwrap();
            assert_eq!(0.5 * lap + s.delta * v - c, 0.0);
        }
    }

    #[test]
    fn shifted_equilibria_cases() {
        for order in [ShiftOrder::Exact, ShiftOrder::FirstOrder] {
            let (u1, u2) = shifted_equilibria(0.0, 60.0, 3.2, 0.2, order).unwrap();
            assert!((u1 - 1.0).abs() < 1e-15 && (u2 - 0.2).abs() < 1e-15);
            let (u1, u2) = shifted_equilibria(0.1, 60.0, 3.2, 0.2, order).unwrap();
            assert!(u1 > 1.0 && u2 < 0.2);
        }
        assert!(matches!(
            shifted_equilibria(-10.0, 60.0, 3.2, 0.2, ShiftOrder::Exact),
            Err(AnalyticError::ComplexRoots(_))
        ));
    }

    #[test]
    fn first_order_shift_error_is_quadratic() {
        let (lambda, chi0, u_star) = (60.0, 3.2, 0.2);
        let eps = 1e-2;
        let delta_c = eps * lambda / chi0;
        let (e1, e2) = shifted_equilibria(delta_c, lambda, chi0, u_star, ShiftOrder::Exact).unwrap();
        let (f1, f2) = shifted_equilibria(delta_c, lambda, chi0, u_star, ShiftOrder::FirstOrder).unwrap();
        // Second-order term is ε²/(1−u*)³ ≈ 2e-4.
        assert!((e1 - f1).abs() < 3.0 * eps * eps);
        assert!((e2 - f2).abs() < 3.0 * eps * eps);
        assert!((e1 - f1).abs() > 0.1 * eps * eps);
    }

    #[test]
    fn exact_roots_factor_the_reaction() {
        let (lambda, chi0, u_star, delta_c) = (60.0, 3.2, 0.2, 0.14);
        let (u1, u2) = shifted_equilibria(delta_c, lambda, chi0, u_star, ShiftOrder::Exact).unwrap();
        for k in 0..20 {
            let u = -0.2 + 1.5 * k as f64 / 19.0;
            let lhs = lambda * u * (u1 - u) * (u - u2);
            let rhs = lambda * u * (1.0 - u) * (u - u_star) + chi0 * delta_c * u;
            assert!((lhs - rhs).abs() < 1e-10, "u = {u}");
        }
    }

    #[test]
    fn nagumo_speed_cases() {
        let s = nagumo_speed(1.0, 0.2, 60.0, 0.01);
        assert!((s - 1.2f64.sqrt() * 0.3).abs() < 1e-15);
        assert!((s - 0.3286).abs() < 1e-4);
        assert_eq!(nagumo_speed(0.8, 0.4, 60.0, 0.01), 0.0);
        for (u1, u2) in [(1.0, 0.3), (1.0, 0.7), (1.1, 0.5)] {
            assert_eq!(nagumo_speed(u1, u2, 60.0, 0.01).signum(), (u1 - 2.0 * u2).signum());
        }
    }

    #[test]
    fn polynomial_root_and_slope() {
        let (p, s) = table1();
        let poly = PolynomialCoefficients::new(&p, &s);
        assert!(poly.b < 0.0);
        assert!(poly.eval(0.1315 - 0.002).unwrap().0 < 0.0);
        assert!(poly.eval(0.1315 + 0.002).unwrap().0 > 0.0);
        let h = 1e-6;
        let fd = (poly.eval(0.2 + h).unwrap().0 - poly.eval(0.2 - h).unwrap().0) / (2.0 * h);
        assert!((poly.eval(0.2).unwrap().1 - fd).abs() < 1e-8);
        assert!(poly.eval(0.0).is_err());
    }

    #[test]
    fn b_negative_across_parameters() {
        for delta in [1.0, 10.0, 50.0] {
            for chi0 in [0.1, 3.2, 8.0] {
                let p = Parameters {
                    delta,
                    chi0,
                    ..Parameters::table1()
                };
                let s = steady_state(&p).unwrap();
                assert!(PolynomialCoefficients::new(&p, &s).b < 0.0);
            }
        }
    }

    #[test]
    fn equilibrium_radius_table1() {
        let (p, s) = table1();
        let search = equilibrium_radius(&p, &s).unwrap();
        let eq = search.unique().expect("unique root");
        assert!((eq.r0 - 0.1315).abs() < 0.002);
        assert!(close(eq.r0, R0_REF, 1e-9));
        assert!(PolynomialCoefficients::new(&p, &s).eval(eq.r0).unwrap().0.abs() < 1e-12);
        assert!(eq.u2 < eq.u1);
        assert!(eq.stable && eq.radial_rate < 0.0 && eq.radial_rate_exact < 0.0);
    }

    #[test]
    fn weak_chemotaxis_has_no_equilibrium() {
        let p = Parameters {
            chi0: 1e-6,
            ..Parameters::table1()
        };
        let s = steady_state(&p).unwrap();
        let poly = PolynomialCoefficients::new(&p, &s);
        for k in 1..=100 {
            assert!(poly.eval(DISK_RADIUS * k as f64 / 100.0).unwrap().0 > 0.0);
        }
        assert_eq!(equilibrium_radius(&p, &s), Err(AnalyticError::NoEquilibrium));
    }

    #[test]
    fn stronger_production_pushes_front_out() {
        let (p, s) = table1();
        let base = equilibrium_radius(&p, &s).unwrap().primary().r0;
        let p2 = Parameters { delta: 20.0, ..p };
        let s2 = steady_state(&p2).unwrap();
        assert!(close(s2.c1, 2.0 * s.c1, 1e-14));
        assert!(close(s2.c2, 2.0 * s.c2, 1e-14));
        assert!(equilibrium_radius(&p2, &s2).unwrap().primary().r0 > base);
    }

    #[test]
    fn curvature_alone_destabilises() {
        let (p, s) = table1();
        let p0 = Parameters { chi0: 0.0, ..p };
        let r0 = 0.1315;
        let (rate, stable) = radial_stability(r0, &p0, &s).unwrap();
        assert_eq!(rate, p.du / (r0 * r0));
        assert!(!stable);
    }

    #[test]
    fn stability_flips_at_critical_sensitivity() {
        let (p, s) = table1();
        let r0 = 0.1315;
        let cpp = stationary_c_second_derivative_approx(r0, &s);
        let critical = p.du / (r0 * r0 * cpp);
        let rate = |chi0: f64| radial_stability(r0, &Parameters { chi0, ..p }, &s).unwrap().0;
        let (mut lo, mut hi) = (0.0, p.chi0);
        assert!(rate(lo) > 0.0 && rate(hi) < 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if rate(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(close(lo, critical, 1e-12));
    }

    #[test]
    fn azimuthal_modes() {
        let (p, s) = table1();
        let r0 = 0.1315;
        let radial = radial_stability(r0, &p, &s).unwrap().0;
        assert_eq!(azimuthal_mode_rate(0, r0, &p, &s).unwrap(), radial);
        let rates: Vec<f64> = (0..=10).map(|m| azimuthal_mode_rate(m, r0, &p, &s).unwrap()).collect();
        for w in rates.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(rates.iter().all(|&r| r < 0.0));
    }

    #[test]
    fn equilibrium_is_fixed_point_of_front_ode() {
        let (p, s) = table1();
        let r0 = equilibrium_radius(&p, &s).unwrap().primary().r0;
        let traj = integrate_front_radius(r0, 5.0, 1e-3, &p, &s, BesselMode::PaperApprox).unwrap();
        assert!(traj.exit.is_none());
        assert!(traj.points.iter().all(|&(_, r)| (r - r0).abs() < 1e-6));
    }

    #[test]
    fn perturbed_front_relaxes_monotonically() {
        let (p, s) = table1();
        let eq = *equilibrium_radius(&p, &s).unwrap().primary();
        let horizon = 100f64.ln() / eq.radial_rate.abs();
        for offset in [0.02, -0.02] {
            let traj = integrate_front_radius(eq.r0 + offset, horizon, 1e-4, &p, &s, BesselMode::PaperApprox).unwrap();
            let gaps: Vec<f64> = traj.points.iter().map(|&(_, r)| (r - eq.r0) * offset.signum()).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
            // Linear prediction 0.02·e^{rate·t} = 2e-4 at the horizon; the
            // nonlinear terms cost a few percent either way.
            let last = *gaps.last().unwrap();
            assert!(last < 2.6e-4, "offset {offset}: {last}");
        }
    }

    #[test]
    fn front_without_chemotaxis_collapses() {
        let (p, s) = table1();
        let p0 = Parameters { chi0: 0.0, ..p };
        let traj = integrate_front_radius(0.3, 10.0, 1e-3, &p0, &s, BesselMode::Exact).unwrap();
        assert_eq!(traj.exit, Some(ExitSide::Inner));
        assert!(traj.points.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn front_ode_domain() {
        let (p, s) = table1();
        assert!(integrate_front_radius(0.01, 1.0, 1e-3, &p, &s, BesselMode::Exact).is_err());
        assert!(integrate_front_radius(0.7, 1.0, 1e-3, &p, &s, BesselMode::Exact).is_err());
        assert!(integrate_front_radius(0.2, 1.0, 0.0, &p, &s, BesselMode::Exact).is_err());
    }

    #[test]
    fn report_csv_round_trip() {
        let report = AnalyticReport::compute(&Parameters::table1()).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("quantity,value\n"));
        assert!(csv.contains("\nR0,"));
        assert!(csv.contains("\nrate_m8,"));
        assert_eq!(AnalyticReport::from_csv(&csv).unwrap(), report);
        assert_eq!(report.mode_rates[0], report.equilibrium.radial_rate);
    }
}
