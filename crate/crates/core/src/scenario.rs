//! Initial data for the reference experiments.
//!
//! Every builder evaluates a closed form at each node, so grids that share
//! nodes agree on them bitwise. The colony uses the configured `A` and `ω`
//! (3 and 1000 in the reference parameter set); the chemical always starts
//! at zero.

use crate::field::{Field, StateSnapshot};
use crate::params::{Parameters, RunConfig, Scenario, REFERENCE_T_END};

/// Centre of the single colony.
pub const T1_CENTER: (f64, f64) = (0.5, 0.5);
/// Where the invader is seeded in the single-colony experiments.
pub const INVADER_CENTER: (f64, f64) = (0.2, 0.2);
pub const T3_CENTERS: [(f64, f64); 2] = [(0.2, 0.5), (0.8, 0.5)];
/// Uniform invader level of the two-colony experiment, just above `u*`.
pub const T3_INVADER_LEVEL: f64 = 0.21;
/// Horizon of the long slowly-diffusing run.
pub const T2_LONG_T_END: f64 = 170.0;
/// Nodes per side of the high-resolution profile.
pub const PAPER_SCALE_GRID: usize = 256;

fn gaussian(a: f64, omega: f64, center: (f64, f64)) -> impl Fn(f64, f64) -> f64 {
    move |x, y| {
        let (dx, dy) = (x - center.0, y - center.1);
        a * (-omega * (dx * dx + dy * dy)).exp()
    }
}

/// Invader colony `10 / (e^{1000 r²} + e^{−1000 r²})` about (0.2, 0.2),
/// peaking at 5.
fn invader(x: f64, y: f64) -> f64 {
    let (dx, dy) = (x - INVADER_CENTER.0, y - INVADER_CENTER.1);
    let s = 1000.0 * (dx * dx + dy * dy);
    10.0 / (s.exp() + (-s).exp())
}

fn snapshot(u: Field, v: Field) -> StateSnapshot {
    let n = u.n();
    StateSnapshot::new(0.0, u, v, Field::zeros(n)).expect("fields share the grid")
}

/// Single colony at the centre, invader seeded near a corner.
pub fn initial_condition_t1(n: usize, p: &Parameters) -> StateSnapshot {
    snapshot(
        Field::from_fn(n, invader),
        Field::from_fn(n, gaussian(p.a, p.omega, T1_CENTER)),
    )
}

/// Same data as [`initial_condition_t1`]; the experiments differ only in `Dv`.
pub fn initial_condition_t2(n: usize, p: &Parameters) -> StateSnapshot {
    initial_condition_t1(n, p)
}

/// Offset of node `i` from the midline, `(2i − (n−1)) / (2(n−1))`. Exactly
/// antisymmetric under `i → n−1−i`.
fn centered_coord(i: usize, n: usize) -> f64 {
    (2.0 * i as f64 - (n - 1) as f64) / (2.0 * (n - 1) as f64)
}

/// Two colonies on the horizontal midline in a uniform invader at 0.21.
/// Evaluated in centred coordinates so the x-mirror symmetry is exact.
pub fn initial_condition_t3(n: usize, p: &Parameters) -> StateSnapshot {
    let half_gap = T3_CENTERS[1].0 - 0.5;
    let mut v = Vec::with_capacity(n * n);
    for j in 0..n {
        let eta = centered_coord(j, n);
        for i in 0..n {
            let xi = centered_coord(i, n);
            let lump = |d: f64| p.a * (-p.omega * (d * d + eta * eta)).exp();
            v.push(lump(xi + half_gap) + lump(xi - half_gap));
        }
    }
    snapshot(
        Field::constant(n, T3_INVADER_LEVEL),
        Field::from_vec(n, v).expect("n·n values"),
    )
}

/// Centred colony in an invader-free dish.
pub fn initial_condition_custom(n: usize, p: &Parameters) -> StateSnapshot {
    snapshot(Field::zeros(n), Field::from_fn(n, gaussian(p.a, p.omega, T1_CENTER)))
}

pub fn initial_condition(scenario: Scenario, n: usize, p: &Parameters) -> StateSnapshot {
    match scenario {
        Scenario::T1 => initial_condition_t1(n, p),
        Scenario::T2 => initial_condition_t2(n, p),
        Scenario::T3 => initial_condition_t3(n, p),
        Scenario::Custom => initial_condition_custom(n, p),
    }
}

/// Initial colony centres, used as contour references.
pub fn colony_centers(scenario: Scenario) -> Vec<(f64, f64)> {
    match scenario {
        Scenario::T3 => T3_CENTERS.to_vec(),
        _ => vec![T1_CENTER],
    }
}

/// High-resolution configuration: n = 256, and the long horizon for T2.
pub fn paper_scale(scenario: Scenario) -> RunConfig {
    let mut cfg = RunConfig::for_scenario(scenario);
    cfg.grid_n = PAPER_SCALE_GRID;
    cfg.t_end = match scenario {
        Scenario::T2 => T2_LONG_T_END,
        _ => REFERENCE_T_END,
    };
    cfg
}
