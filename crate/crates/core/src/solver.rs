//! Explicit Euler integration of the three-species system.
//!
//! One step evaluates every right-hand side from the pre-step fields and
//! writes all three updates at once. Each output node depends only on its
//! own stencil, so the result is bitwise independent of how rows are split
//! across threads.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{shifted_equilibria, AnalyticError, ShiftOrder};
use crate::field::{above, below, flux_balance, Field, StateSnapshot};
use crate::params::{serialize_config, ConfigError, Parameters, RunConfig, Scenario, COURANT_LIMIT};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("initial state has {got} nodes per side, configuration expects {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("Courant violation: D·Δt/Δx² = {0} exceeds {COURANT_LIMIT}")]
    Courant(f64),
    #[error("blow-up at step {step} (t = {t}): {field} = {value} at node ({i}, {j})")]
    BlowUp {
        step: u64,
        t: f64,
        field: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("measurement window: {0}")]
    Window(String),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

/// Full finiteness scan interval, in steps. In between only one row is
/// checked per step.
pub const BLOWUP_SCAN_INTERVAL: u64 = 1000;

/// Rows per parallel work item.
const BAND: usize = 8;

/// The evolving state plus the scratch buffers of the next step.
#[derive(Debug, Clone)]
pub struct StepperState {
    state: StateSnapshot,
    next: [Field; 3],
    step_count: u64,
    dt: f64,
    params: Parameters,
}

impl StepperState {
    /// Rejects a step size that breaks the diffusive stability bound of the
    /// stiffest species (the chemical, with diffusivity ½).
    pub fn new(state: StateSnapshot, params: Parameters, dt: f64) -> Result<Self, SolverError> {
        let dx = state.u.dx();
        let effective = params.max_diffusivity() * dt / (dx * dx);
        if !(dt > 0.0) || effective > COURANT_LIMIT {
            return Err(SolverError::Courant(effective));
        }
        let n = state.n();
        Ok(Self {
            state,
            next: [Field::zeros(n), Field::zeros(n), Field::zeros(n)],
            step_count: 0,
            dt,
            params,
        })
    }

    pub fn from_config(cfg: &RunConfig, ic: StateSnapshot) -> Result<Self, SolverError> {
        cfg.check()?;
        if ic.n() != cfg.grid_n {
            return Err(SolverError::GridMismatch {
                expected: cfg.grid_n,
                got: ic.n(),
            });
        }
        Self::new(ic, cfg.params, cfg.dt())
    }

    pub fn snapshot(&self) -> &StateSnapshot {
        &self.state
    }

    pub fn into_snapshot(self) -> StateSnapshot {
        self.state
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    /// Advances one explicit Euler step.
    pub fn step(&mut self) -> Result<(), SolverError> {
        let n = self.state.n();
        let dx = self.state.u.dx();
        let kernel = Kernel {
            n,
            u: self.state.u.data(),
            v: self.state.v.data(),
            c: self.state.c.data(),
            inv_dx2: 1.0 / (dx * dx),
            chi_scale: self.params.chi0 / (dx * dx),
            dt: self.dt,
            p: self.params,
        };
        let [nu, nv, nc] = &mut self.next;
        nu.data_mut()
            .par_chunks_mut(BAND * n)
            .zip(nv.data_mut().par_chunks_mut(BAND * n))
            .zip(nc.data_mut().par_chunks_mut(BAND * n))
            .enumerate()
            .for_each(|(b, ((bu, bv), bc))| {
                let rows = bu.chunks_mut(n).zip(bv.chunks_mut(n)).zip(bc.chunks_mut(n));
                for (r, ((ou, ov), oc)) in rows.enumerate() {
                    kernel.row(b * BAND + r, ou, ov, oc);
                }
            });

        std::mem::swap(&mut self.state.u, nu);
        std::mem::swap(&mut self.state.v, nv);
        std::mem::swap(&mut self.state.c, nc);
        self.step_count += 1;
        self.state.t = self.step_count as f64 * self.dt;

        if self.step_count % BLOWUP_SCAN_INTERVAL == 0 {
            self.scan(0..n)
        } else {
            let j = (self.step_count % n as u64) as usize;
            self.scan(j..j + 1)
        }
    }

    pub fn advance(&mut self, steps: u64) -> Result<(), SolverError> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    fn scan(&self, rows: std::ops::Range<usize>) -> Result<(), SolverError> {
        let n = self.state.n();
        let s = &self.state;
        for (name, f) in [("u", &s.u), ("v", &s.v), ("c", &s.c)] {
            let data = &f.data()[rows.start * n..rows.end * n];
            if let Some(k) = data.iter().position(|x| !x.is_finite()) {
                return Err(SolverError::BlowUp {
                    step: self.step_count,
                    t: s.t,
                    field: name,
                    i: k % n,
                    j: rows.start + k / n,
                    value: data[k],
                });
            }
        }
        Ok(())
    }
}

struct Kernel<'a> {
    n: usize,
    u: &'a [f64],
    v: &'a [f64],
    c: &'a [f64],
    inv_dx2: f64,
    chi_scale: f64,
    dt: f64,
    p: Parameters,
}

impl Kernel<'_> {
    fn row(&self, j: usize, ou: &mut [f64], ov: &mut [f64], oc: &mut [f64]) {
        let n = self.n;
        let (row, down, up) = (j * n, below(j) * n, above(j, n) * n);
        let mut put = |i: usize, il: usize, ir: usize| {
            let (u, v, c) = self.node(row + i, row + il, row + ir, down + i, up + i);
            ou[i] = u;
            ov[i] = v;
            oc[i] = c;
        };
        put(0, below(0), 1);
        for i in 1..n - 1 {
            put(i, i - 1, i + 1);
        }
        put(n - 1, n - 2, above(n - 1, n));
    }

    #[inline(always)]
    fn node(&self, k: usize, kl: usize, kr: usize, kd: usize, ku: usize) -> (f64, f64, f64) {
        let p = &self.p;
        let lap = |f: &[f64]| ((f[kl] + f[kr]) + (f[kd] + f[ku]) - 4.0 * f[k]) * self.inv_dx2;
        let (u, v, c) = (self.u[k], self.v[k], self.c[k]);
        let div = self.chi_scale
            * flux_balance(
                u,
                c,
                [self.u[kl], self.u[kr], self.u[kd], self.u[ku]],
                [self.c[kl], self.c[kr], self.c[kd], self.c[ku]],
            );
        let du = p.du * lap(self.u) + p.lambda * u * (1.0 - u) * (u - p.u_star) + div;
        let mut dv = p.beta * v * (1.0 - v) * (v - p.v_star);
        if p.dv != 0.0 {
            dv += p.dv * lap(self.v);
        }
        let dc = 0.5 * lap(self.c) + p.delta * v - c;
        (u + self.dt * du, v + self.dt * dv, c + self.dt * dc)
    }
}

/// Index of the last step not after `t`.
pub fn step_index(t: f64, dt: f64) -> u64 {
    (t / dt + 1e-9).floor() as u64
}

/// Snapshot file name, `{scenario}_t{time:.4f}.cfld`.
pub fn snapshot_file_name(scenario: Scenario, t: f64) -> String {
    format!("{}_t{t:.4}.cfld", scenario.name())
}

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const CONFIG_FILE: &str = "config.ini";

/// Field ranges of one persisted snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    /// Requested time.
    pub target: f64,
    /// Time actually reached (last step not after the target).
    pub t: f64,
    pub step: u64,
    pub file: Option<String>,
    /// `(min, max)` of u, v and c.
    pub ranges: [(f64, f64); 3],
}

impl SnapshotRecord {
    fn of(target: f64, step: u64, s: &StateSnapshot, file: Option<String>) -> Self {
        Self {
            target,
            t: s.t,
            step,
            file,
            ranges: [&s.u, &s.v, &s.c].map(|f| (f.min(), f.max())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Failed(String),
}

/// Everything needed to reproduce a run and audit its snapshots, stored
/// as `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_hash: String,
    pub scenario: Scenario,
    pub params: Parameters,
    pub grid_n: usize,
    pub dt_factor: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub steps: u64,
    pub wall_time_s: f64,
    pub snapshots: Vec<SnapshotRecord>,
    pub status: RunStatus,
}

impl RunManifest {
    fn start(cfg: &RunConfig) -> Self {
        Self {
            config_hash: cfg.hash(),
            scenario: cfg.scenario,
            params: cfg.params,
            grid_n: cfg.grid_n,
            dt_factor: cfg.dt_factor,
            dx: cfg.dx(),
            dt: cfg.dt(),
            t_end: cfg.t_end,
            steps: 0,
            wall_time_s: 0.0,
            snapshots: Vec::new(),
            status: RunStatus::Completed,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = self.deterministic_text();
        let _ = writeln!(out, "wall_time_s={}", self.wall_time_s);
        out
    }

    /// The manifest without wall-clock time: identical for identical runs.
    pub fn deterministic_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("config_hash", &self.config_hash);
        kv("scenario", &self.scenario);
        for (k, v) in [
            ("Du", p.du),
            ("Dv", p.dv),
            ("lambda", p.lambda),
            ("beta", p.beta),
            ("delta", p.delta),
            ("chi0", p.chi0),
            ("u_star", p.u_star),
            ("v_star", p.v_star),
            ("A", p.a),
            ("omega", p.omega),
        ] {
            kv(&format!("param.{k}"), &v);
        }
        kv("grid_n", &self.grid_n);
        kv("dt_factor", &self.dt_factor);
        kv("dx", &self.dx);
        kv("dt", &self.dt);
        kv("t_end", &self.t_end);
        kv("steps", &self.steps);
        for s in &self.snapshots {
            let [(u0, u1), (v0, v1), (c0, c1)] = s.ranges;
            let file = s.file.as_deref().unwrap_or("-");
            kv(
                "snapshot",
                &format!("{},{},{},{file},{u0:?},{u1:?},{v0:?},{v1:?},{c0:?},{c1:?}", s.target, s.t, s.step),
            );
        }
        match &self.status {
            RunStatus::Completed => kv("status", &"completed"),
            RunStatus::Failed(msg) => kv("status", &format!("failed: {msg}")),
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut m = Self::start(&RunConfig::default());
        m.config_hash.clear();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |what: &str| format!("manifest line {}: {what}", idx + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value"))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| err("bad number"));
            let int = |s: &str| s.trim().parse::<u64>().map_err(|_| err("bad integer"));
            let p = &mut m.params;
            match key {
                "config_hash" => m.config_hash = value.to_string(),
                "scenario" => m.scenario = value.parse().map_err(|e: String| err(&e))?,
                "param.Du" => p.du = num(value)?,
                "param.Dv" => p.dv = num(value)?,
                "param.lambda" => p.lambda = num(value)?,
                "param.beta" => p.beta = num(value)?,
                "param.delta" => p.delta = num(value)?,
                "param.chi0" => p.chi0 = num(value)?,
                "param.u_star" => p.u_star = num(value)?,
                "param.v_star" => p.v_star = num(value)?,
                "param.A" => p.a = num(value)?,
                "param.omega" => p.omega = num(value)?,
                "grid_n" => m.grid_n = int(value)? as usize,
                "dt_factor" => m.dt_factor = num(value)?,
                "dx" => m.dx = num(value)?,
                "dt" => m.dt = num(value)?,
                "t_end" => m.t_end = num(value)?,
                "steps" => m.steps = int(value)?,
                "wall_time_s" => m.wall_time_s = num(value)?,
                "status" => {
                    m.status = match value.strip_prefix("failed: ") {
                        Some(msg) => RunStatus::Failed(msg.to_string()),
                        None if value == "completed" => RunStatus::Completed,
                        None => return Err(err("unknown status")),
                    }
                }
                "snapshot" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 10 {
                        return Err(err("snapshot needs 10 fields"));
                    }
                    let f = |k: usize| num(parts[k]);
                    m.snapshots.push(SnapshotRecord {
                        target: f(0)?,
                        t: f(1)?,
                        step: int(parts[2])?,
                        file: (parts[3] != "-").then(|| parts[3].to_string()),
                        ranges: [(f(4)?, f(5)?), (f(6)?, f(7)?), (f(8)?, f(9)?)],
                    });
                }
                _ => return Err(err(&format!("unknown key `{key}`"))),
            }
        }
        Ok(m)
    }

    /// The last persisted snapshot file, normally the one at `t_end`.
    pub fn final_snapshot_file(&self) -> Option<&str> {
        self.snapshots.iter().rev().find_map(|s| s.file.as_deref())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    /// Snapshots in time order; the last one is the state at `t_end`.
    pub snapshots: Vec<StateSnapshot>,
}

impl RunOutput {
    pub fn final_state(&self) -> &StateSnapshot {
        self.snapshots.last().expect("a run always records its final state")
    }
}

/// A failed run. `manifest` is present once stepping started and covers
/// every snapshot completed before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: SolverError,
    pub manifest: Option<RunManifest>,
}

impl From<SolverError> for RunFailure {
    fn from(error: SolverError) -> Self {
        Self {
            error,
            manifest: None,
        }
    }
}

fn io_error(path: &Path, source: io::Error) -> SolverError {
    SolverError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Integrates `ic` to `config.t_end`, capturing a snapshot at every
/// requested time and at `t_end`. With `out_dir`, snapshots go to
/// `{scenario}_t{time:.4f}.cfld` and the run writes `manifest.txt` and
/// `config.ini` alongside them.
pub fn run(config: &RunConfig, ic: StateSnapshot, out_dir: Option<&Path>) -> Result<RunOutput, RunFailure> {
    let started = Instant::now();
    let mut stepper = StepperState::from_config(config, ic)?;
    let dt = stepper.dt();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join(CONFIG_FILE);
        fs::write(&path, serialize_config(config)).map_err(|e| io_error(&path, e))?;
    }

    let mut targets: Vec<(u64, f64)> = config
        .snapshot_times
        .iter()
        .chain(std::iter::once(&config.t_end))
        .map(|&t| (step_index(t, dt), t))
        .collect();
    targets.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    targets.dedup_by_key(|t| t.0);

    let mut manifest = RunManifest::start(config);
    let mut snapshots = Vec::with_capacity(targets.len());
    let finish = |mut manifest: RunManifest, status: RunStatus| -> Result<RunManifest, SolverError> {
        manifest.status = status;
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        if let Some(dir) = out_dir {
            let path = dir.join(MANIFEST_FILE);
            fs::write(&path, manifest.to_text()).map_err(|e| io_error(&path, e))?;
        }
        Ok(manifest)
    };

    for (step, target) in targets {
        let advanced = stepper.advance(step - stepper.step_count());
        manifest.steps = stepper.step_count();
        if let Err(error) = advanced {
            let manifest = finish(manifest, RunStatus::Failed(error.to_string())).ok();
            return Err(RunFailure { error, manifest });
        }
        let snap = stepper.snapshot().clone();
        let mut file = None;
        if let Some(dir) = out_dir {
            let name = snapshot_file_name(config.scenario, target);
            let path = dir.join(&name);
            if let Err(e) = snap.write_to(&path) {
                let error = io_error(&path, e);
                let manifest = finish(manifest, RunStatus::Failed(error.to_string())).ok();
                return Err(RunFailure { error, manifest });
            }
            file = Some(name);
        }
        manifest.snapshots.push(SnapshotRecord::of(target, step, &snap, file));
        snapshots.push(snap);
    }
    let manifest = finish(manifest, RunStatus::Completed)?;
    Ok(RunOutput { manifest, snapshots })
}

/// Result of the one-dimensional front-speed experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedMeasurement {
    /// Fitted velocity of the `(u1+u2)/2` crossing; positive when `u1`
    /// invades.
    pub speed: f64,
    /// Root-mean-square deviation of the crossing positions from the fit.
    pub residual: f64,
    pub samples: usize,
    pub u1: f64,
    pub u2: f64,
}

/// Integrates `u_t = Du u_xx + λu(u1−u)(u−u2)` on `[0, L]` with no-flux
/// ends from a step (`u1` on the left half, 0 on the right) and fits the
/// crossing position of `(u1+u2)/2` over `[t_measure/2, t_measure]`.
/// `u1, u2` are the exact shifted equilibria for a constant `Δc`.
pub fn front_speed_1d(
    p: &Parameters,
    delta_c: f64,
    domain_length: f64,
    n: usize,
    t_measure: f64,
) -> Result<SpeedMeasurement, SolverError> {
    if n < 16 || !(domain_length > 0.0) || !(t_measure > 0.0) {
        return Err(SolverError::Window(format!(
            "need n ≥ 16, L > 0, t > 0 (got n = {n}, L = {domain_length}, t = {t_measure})"
        )));
    }
    let (u1, u2) = shifted_equilibria(delta_c, p.lambda, p.chi0, p.u_star, ShiftOrder::Exact)?;
    let dx = domain_length / (n - 1) as f64;
    let dt = (0.2 * dx * dx / p.du).min(0.05 / p.lambda);
    let steps = (t_measure / dt).ceil() as u64;
    let mid = 0.5 * (u1 + u2);
    let coef = p.du / (dx * dx);

    let mut u: Vec<f64> = (0..n).map(|i| if 2 * i < n { u1 } else { 0.0 }).collect();
    let mut next = vec![0.0; n];
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    for k in 1..=steps {
        for i in 0..n {
            let (l, r) = (u[below(i)], u[above(i, n)]);
            let x = u[i];
            next[i] = x + dt * (coef * (l + r - 2.0 * x) + p.lambda * x * (u1 - x) * (x - u2));
        }
        std::mem::swap(&mut u, &mut next);
        let t = k as f64 * dt;
        if 2 * k < steps {
            continue;
        }
        let pos = u
            .windows(2)
            .position(|w| w[0] >= mid && w[1] < mid)
            .map(|i| (i as f64 + (u[i] - mid) / (u[i] - u[i + 1])) * dx)
            .filter(|&x| x > 0.1 * domain_length && x < 0.9 * domain_length)
            .ok_or_else(|| {
                SolverError::Window(format!("front left the interior before t = {t}"))
            })?;
        ts.push(t);
        xs.push(pos);
    }
    let (speed, residual) = linear_fit(&ts, &xs);
    Ok(SpeedMeasurement {
        speed,
        residual,
        samples: ts.len(),
        u1,
        u2,
    })
}

/// Least-squares slope and RMS residual.
fn linear_fit(t: &[f64], x: &[f64]) -> (f64, f64) {
    let m = t.len() as f64;
    let (tm, xm) = (t.iter().sum::<f64>() / m, x.iter().sum::<f64>() / m);
    let (mut stt, mut stx) = (0.0, 0.0);
    for (&ti, &xi) in t.iter().zip(x) {
        stt += (ti - tm) * (ti - tm);
        stx += (ti - tm) * (xi - xm);
    }
    let slope = if stt > 0.0 { stx / stt } else { 0.0 };
    let sq: f64 = t
        .iter()
        .zip(x)
        .map(|(&ti, &xi)| (xi - xm - slope * (ti - tm)).powi(2))
        .sum();
    (slope, (sq / m).sqrt())
}
