//! Hybrid dead-beat observer.
//!
//! Between resets the estimate flows under the plant's own `x` dynamics. Every
//! `r` seconds the last `r` seconds of measurements are handed to the window
//! reconstruction and the estimate jumps to the reconstructed state. On
//! noiseless data from a strongly observable plant the estimate is exact from
//! the first reset on, up to integration error.
//!
//! Two variants:
//! - `FullOrder` carries an internal output copy `w` and drives the flow with
//!   it; `w` jumps to the measured output at every reset.
//! - `ReducedOrder` drives the flow with the measured output directly.

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{all_finite, rk4_step, steps_in, Vector};
use crate::plant::Trace;
use crate::system::{PlantState, SystemSpec};
use crate::window::{compute_window, gram, observability_certificate, reconstruct_initial, IoWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverMode {
    FullOrder,
    ReducedOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Keep flowing the current estimate and try again at the next reset.
    HoldAndRetry,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverConfig {
    pub r: f64,
    pub h: f64,
    pub mode: ObserverMode,
    pub rel_threshold: f64,
    pub on_degenerate: DegeneratePolicy,
}

impl ObserverConfig {
    pub fn new(r: f64, h: f64, mode: ObserverMode) -> Self {
        Self {
            r,
            h,
            mode,
            rel_threshold: crate::window::DEFAULT_REL_THRESHOLD,
            on_degenerate: DegeneratePolicy::HoldAndRetry,
        }
    }

    /// Steps per window; `r` must be an integer multiple (>= 2) of `h`.
    pub fn window_steps(&self) -> Result<usize> {
        match steps_in(self.r, self.h) {
            Some(m) if m >= 2 => Ok(m),
            _ => Err(Error::InvalidGrid(format!(
                "window r = {} must be an integer multiple (>= 2) of h = {}",
                self.r, self.h
            ))),
        }
    }
}

/// What happened at the most recent step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Flow,
    Reset,
    /// A reset was due but the window Gram was degenerate; the estimate was held.
    DegenerateReset,
}

#[derive(Debug, Clone)]
pub struct ObserverSnapshot {
    pub t: f64,
    pub z: Vector,
    /// Internal output copy; empty in `ReducedOrder` mode.
    pub w: Vector,
    pub next_reset: f64,
    /// `(y, u)` samples spanning the last `min(t - t0, r)` seconds.
    pub history: VecDeque<(Vector, Vector)>,
    pub degenerate_events: usize,
    pub resets: usize,
    /// Resets whose reconstructed state fell outside the domain (kept as is).
    pub out_of_domain_resets: usize,
    pub last_event: StepEvent,
    t0: f64,
    h: f64,
    steps: usize,
    window_steps: usize,
    flow_in_domain: bool,
}

impl ObserverSnapshot {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn history_duration(&self) -> f64 {
        self.history.len().saturating_sub(1) as f64 * self.h
    }
}

/// Start the observer at `t0` from `(z0, w0)` with the first measured sample.
/// `w0` is ignored in `ReducedOrder` mode and may differ from the measurement.
pub fn observer_init(
    spec: &SystemSpec,
    config: &ObserverConfig,
    z0: &Vector,
    w0: &Vector,
    t0: f64,
    y_first: &Vector,
    u_first: &Vector,
) -> Result<ObserverSnapshot> {
    let window_steps = config.window_steps()?;
    spec.check_dims(z0, y_first, u_first)?;
    let w = match config.mode {
        ObserverMode::FullOrder => {
            if w0.len() != spec.k() {
                return Err(Error::DimensionMismatch(format!("w0 has {} components, expected {}", w0.len(), spec.k())));
            }
            if !spec.in_domain(z0, w0) {
                return Err(Error::DomainViolation(format!("initial estimate ({z0}, {w0}) outside O")));
            }
            w0.clone()
        }
        ObserverMode::ReducedOrder => {
            if !spec.in_domain(z0, y_first) {
                return Err(Error::DomainViolation(format!("initial estimate {z0} outside D")));
            }
            DVector::zeros(0)
        }
    };
    if !spec.in_output_domain(y_first) {
        return Err(Error::DomainViolation(format!("measured output {y_first} outside the output domain")));
    }
    let mut history = VecDeque::with_capacity(window_steps + 1);
    history.push_back((y_first.clone(), u_first.clone()));
    Ok(ObserverSnapshot {
        t: t0,
        z: z0.clone(),
        w,
        next_reset: t0 + config.r,
        history,
        degenerate_events: 0,
        resets: 0,
        out_of_domain_resets: 0,
        last_event: StepEvent::Flow,
        t0,
        h: config.h,
        steps: 0,
        window_steps,
        flow_in_domain: true,
    })
}

/// Advance one grid step with the measurement taken at the step's end.
pub fn observer_step(
    spec: &SystemSpec,
    config: &ObserverConfig,
    mut snap: ObserverSnapshot,
    y_meas: &Vector,
    u: &Vector,
) -> Result<ObserverSnapshot> {
    if y_meas.len() != spec.k() || u.len() != spec.m() {
        return Err(Error::DimensionMismatch("measurement dimensions do not match the system".into()));
    }
    if !spec.in_output_domain(y_meas) {
        return Err(Error::DomainViolation(format!("measured output {y_meas} at t = {} outside Ω", snap.t + config.h)));
    }
    let h = config.h;
    let (y_prev, u_prev) = snap.history.back().cloned().expect("history always holds the latest sample");
    let t_left = snap.t;
    let n = spec.n();

    match config.mode {
        ObserverMode::ReducedOrder => {
            let mut field = |t: f64, z: &Vector| {
                let y = &y_prev + (y_meas - &y_prev) * ((t - t_left) / h);
                spec.eval_a(&y, &u_prev) * z + spec.eval_b(&y, &u_prev)
            };
            snap.z = rk4_step(&mut field, t_left, &snap.z, h);
        }
        ObserverMode::FullOrder => {
            let mut field = |_: f64, s: &Vector| {
                let ps = PlantState::unpack(s, n);
                let (zd, wd) = spec.rhs(&ps.x, &ps.y, &u_prev);
                PlantState::new(zd, wd).pack()
            };
            let next = rk4_step(&mut field, t_left, &PlantState::new(snap.z.clone(), snap.w.clone()).pack(), h);
            let ps = PlantState::unpack(&next, n);
            snap.z = ps.x;
            snap.w = ps.y;
        }
    }
    snap.steps += 1;
    snap.t = snap.t0 + snap.steps as f64 * h;
    if !all_finite(&snap.z) || !all_finite(&snap.w) {
        return Err(Error::NonFiniteState { index: snap.steps });
    }
    if snap.flow_in_domain && !estimate_in_domain(spec, config, &snap, y_meas) {
        return Err(Error::DomainViolation(format!("estimate left O during flow at t = {}", snap.t)));
    }

    snap.history.push_back((y_meas.clone(), u.clone()));
    while snap.history.len() > snap.window_steps + 1 {
        snap.history.pop_front();
    }
    snap.last_event = StepEvent::Flow;

    if snap.steps.is_multiple_of(snap.window_steps) {
        let reset_index = snap.steps / snap.window_steps;
        snap.next_reset = snap.t0 + (reset_index + 1) as f64 * config.r;
        let (ys, us): (Vec<Vector>, Vec<Vector>) = snap.history.iter().cloned().unzip();
        let window = IoWindow::new(h, ys, us)?;
        let wc = compute_window(spec, &window)?;
        let gs = gram(&wc);
        let reconstructed = if observability_certificate(&gs, config.rel_threshold).is_observable() {
            match reconstruct_initial(&gs) {
                Ok(x0) => Some(&wc.phi[wc.phi.len() - 1] * x0 + &wc.theta[wc.theta.len() - 1]),
                Err(Error::NotPositiveDefinite { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        match reconstructed {
            Some(z) => {
                snap.z = z;
                if config.mode == ObserverMode::FullOrder {
                    snap.w = y_meas.clone();
                }
                snap.resets += 1;
                snap.last_event = StepEvent::Reset;
                snap.flow_in_domain = estimate_in_domain(spec, config, &snap, y_meas);
                if !snap.flow_in_domain {
                    snap.out_of_domain_resets += 1;
                }
            }
            None => match config.on_degenerate {
                DegeneratePolicy::HoldAndRetry => {
                    snap.degenerate_events += 1;
                    snap.last_event = StepEvent::DegenerateReset;
                }
                DegeneratePolicy::Fail => return Err(Error::GramDegenerate { t: snap.t }),
            },
        }
    }
    Ok(snap)
}

fn estimate_in_domain(spec: &SystemSpec, config: &ObserverConfig, snap: &ObserverSnapshot, y_meas: &Vector) -> bool {
    match config.mode {
        ObserverMode::FullOrder => spec.in_domain(&snap.z, &snap.w),
        ObserverMode::ReducedOrder => spec.in_domain(&snap.z, y_meas),
    }
}

/// Per-node observer output aligned with the input trace.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateTrace {
    pub t: Vec<f64>,
    pub z: Vec<Vector>,
    /// Empty vectors in `ReducedOrder` mode.
    pub w: Vec<Vector>,
    pub reset: Vec<bool>,
    pub degenerate: Vec<bool>,
}

impl EstimateTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn push(&mut self, snap: &ObserverSnapshot) {
        self.t.push(snap.t);
        self.z.push(snap.z.clone());
        self.w.push(snap.w.clone());
        self.reset.push(snap.last_event == StepEvent::Reset);
        self.degenerate.push(snap.last_event == StepEvent::DegenerateReset);
    }
}

/// Replay a recorded trace through the observer, feeding `y_meas` and `u`.
pub fn run_observer(
    spec: &SystemSpec,
    config: &ObserverConfig,
    trace: &Trace,
    z0: &Vector,
    w0: &Vector,
) -> Result<EstimateTrace> {
    let mut out = EstimateTrace::default();
    if trace.is_empty() {
        return Ok(out);
    }
    if (trace.h - config.h).abs() > 1e-12 * config.h {
        return Err(Error::InvalidGrid(format!("trace step {} differs from observer step {}", trace.h, config.h)));
    }
    let mut snap = observer_init(spec, config, z0, w0, trace.t[0], &trace.y_meas[0], &trace.u[0])?;
    out.push(&snap);
    for j in 1..trace.len() {
        snap = observer_step(spec, config, snap, &trace.y_meas[j], &trace.u[j])?;
        out.push(&snap);
    }
    Ok(out)
}
