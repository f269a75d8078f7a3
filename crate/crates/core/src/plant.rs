//! Ground-truth plant traces and the sinusoidal sensor corruption used in the
//! frequency-estimation experiments.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{all_finite, rk4_step, steps_in, Vector};
use crate::system::{InputSignal, PlantState, SystemSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub h: f64,
    pub x0: Vector,
    pub y0: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorModel {
    #[default]
    Clean,
    /// Adds `amplitude * sin(frequency * t)` to every output component.
    SinusoidNoise { amplitude: f64, frequency: f64 },
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SensorModel::Clean => Ok(()),
            SensorModel::SinusoidNoise { amplitude, frequency } => {
                if !(amplitude >= 0.0) || !(frequency > 0.0) {
                    Err(Error::InvalidParams(format!(
                        "sensor noise needs amplitude >= 0 and frequency > 0, got ({amplitude}, {frequency})"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Sampled plant run. The observer only ever sees `y_meas` and `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub h: f64,
    pub t: Vec<f64>,
    pub x_true: Vec<Vector>,
    pub y_true: Vec<Vector>,
    pub y_meas: Vec<Vector>,
    pub u: Vec<Vector>,
}

impl Trace {
    pub fn empty(h: f64) -> Self {
        Self { h, t: vec![], x_true: vec![], y_true: vec![], y_meas: vec![], u: vec![] }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Integrate the coupled `(x, y)` dynamics with RK4, checking the domain at
/// every node.
pub fn simulate_plant(spec: &SystemSpec, input: &InputSignal, cfg: &SimConfig) -> Result<Trace> {
    let steps = steps_in(cfg.t_end, cfg.h).ok_or_else(|| {
        Error::InvalidGrid(format!("t_end = {} is not a positive multiple of h = {}", cfg.t_end, cfg.h))
    })?;
    let u0 = input.at(0.0);
    spec.check_dims(&cfg.x0, &cfg.y0, &u0)?;
    if !spec.in_domain(&cfg.x0, &cfg.y0) {
        return Err(Error::DomainViolation(format!("initial state ({}, {}) outside O", cfg.x0, cfg.y0)));
    }

    let n = spec.n();
    let h = cfg.h;
    let mut trace = Trace::empty(h);
    let mut state = PlantState::new(cfg.x0.clone(), cfg.y0.clone()).pack();
    for j in 0..=steps {
        let t = j as f64 * h;
        let ps = PlantState::unpack(&state, n);
        let u = input.at(t);
        if !spec.in_input_set(&u) {
            return Err(Error::DomainViolation(format!("input at node {j} outside U")));
        }
        trace.t.push(t);
        trace.y_meas.push(ps.y.clone());
        trace.y_true.push(ps.y);
        trace.x_true.push(ps.x);
        trace.u.push(u);
        if j == steps {
            break;
        }
        let mut field = |ts: f64, s: &Vector| {
            let ps = PlantState::unpack(s, n);
            let (xd, yd) = spec.rhs(&ps.x, &ps.y, &input.within_step(j, ts));
            PlantState::new(xd, yd).pack()
        };
        state = rk4_step(&mut field, t, &state, h);
        if !all_finite(&state) {
            return Err(Error::NonFiniteState { index: j + 1 });
        }
        let ps = PlantState::unpack(&state, n);
        if !spec.in_domain(&ps.x, &ps.y) {
            return Err(Error::DomainExit { index: j + 1 });
        }
    }
    Ok(trace)
}

/// Apply the sensor model to `y_meas`; `x_true` and `y_true` are untouched.
pub fn corrupt(trace: &Trace, sensor: &SensorModel) -> Trace {
    let mut out = trace.clone();
    if let SensorModel::SinusoidNoise { amplitude, frequency } = *sensor {
        for (ym, (yt, &t)) in out.y_meas.iter_mut().zip(trace.y_true.iter().zip(&trace.t)) {
            let noise = amplitude * (frequency * t).sin();
            *ym = yt.map(|v| v + noise);
        }
    }
    out
}

/// Initial plant state of the frequency system that produces
/// `y(t) = amplitude * sin(omega * t + phase)`.
pub fn sinusoid_initial_state(amplitude: f64, omega: f64, phase: f64) -> (Vector, Vector) {
    (
        DVector::from_row_slice(&[amplitude * omega * phase.cos(), -omega * omega]),
        DVector::from_row_slice(&[amplitude * phase.sin()]),
    )
}
