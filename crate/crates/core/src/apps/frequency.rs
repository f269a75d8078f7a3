//! Frequency of a sinusoid `y = A sin(ω t + φ)` as the unmeasured state of
//!
//! ```text
//! y'  = x1
//! x1' = x2 y
//! x2' = 0
//! ```
//!
//! with `x2 = -ω²`, so `ω̂ = sqrt(-z2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cumulative_trapezoid, trapezoid_uniform, Matrix};
use crate::plant::{corrupt, simulate_plant, sinusoid_initial_state, SensorModel, SimConfig};
use crate::system::{InputSignal, SystemSpec};
use crate::window::{estimate_window, IoWindow};

/// Phase samples used by the sweeps unless a grid is given.
pub const DEFAULT_PHASE_POINTS: usize = 64;

/// The frequency system. With `relaxed` the domain drops `x2 < 0` and keeps
/// only `y² + x1² > 0`.
pub fn freq_spec(relaxed: bool) -> SystemSpec {
    SystemSpec::new(
        2,
        1,
        0,
        Arc::new(|y, _| Matrix::from_row_slice(2, 2, &[0.0, y[0], 0.0, 0.0])),
        Arc::new(|_, _| DVector::zeros(2)),
        Arc::new(|_| Matrix::from_row_slice(2, 1, &[1.0, 0.0])),
        Arc::new(|_, _| DVector::zeros(1)),
    )
    .with_domain(Arc::new(move |x, y| y[0] * y[0] + x[0] * x[0] > 0.0 && (relaxed || x[1] < 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyScenario {
    pub amplitude: f64,
    /// True frequency (rad/s).
    pub omega: f64,
    /// Phase (rad).
    pub phase: f64,
    #[serde(default)]
    pub noise_amplitude: f64,
    /// Noise frequency (rad/s).
    #[serde(default = "default_noise_frequency")]
    pub noise_frequency: f64,
    /// Window length (s).
    pub window: f64,
}

fn default_noise_frequency() -> f64 {
    1.0
}

impl FrequencyScenario {
    /// `A = 2`, `ω = 3`, `a = 0.2`, `r = 1` with the given noise frequency.
    pub fn noisy_baseline(noise_frequency: f64) -> Self {
        Self { amplitude: 2.0, omega: 3.0, phase: 0.0, noise_amplitude: 0.2, noise_frequency, window: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.omega > 0.0 && self.window > 0.0 && self.noise_amplitude >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "frequency scenario needs A > 0, omega > 0, r > 0, a >= 0, got {self:?}"
            )));
        }
        self.sensor().validate()
    }

    pub fn sensor(&self) -> SensorModel {
        if self.noise_amplitude == 0.0 {
            SensorModel::Clean
        } else {
            SensorModel::SinusoidNoise { amplitude: self.noise_amplitude, frequency: self.noise_frequency }
        }
    }

    /// At least 2000 steps per window and 20 steps per noise period.
    pub fn default_steps(&self) -> usize {
        let per_noise = if self.noise_amplitude > 0.0 {
            (20.0 * self.noise_frequency * self.window / (2.0 * PI)).ceil() as usize
        } else {
            0
        };
        per_noise.max(2000)
    }

    pub fn default_step(&self) -> f64 {
        self.window / self.default_steps() as f64
    }
}

/// `∫∫ y` of the piecewise-linear interpolant of the samples, exact per step.
fn double_integral(y: &[f64], y_int: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    for j in 0..y.len() {
        if j > 0 {
            acc += h * y_int[j - 1] + h * h * (2.0 * y[j - 1] + y[j]) / 6.0;
        }
        out.push(acc);
    }
    out
}

/// Closed-form window estimate `(z1, z2)` at the window end.
pub fn freq_closed_form(window: &IoWindow) -> Result<(f64, f64)> {
    let y = window.y_scalar();
    let h = window.grid().h();
    let times: Vec<f64> = window.grid().times().collect();
    let y_int = cumulative_trapezoid(&y, h);
    let phi = double_integral(&y, &y_int, h);
    let dy: Vec<f64> = y.iter().map(|v| v - y[0]).collect();

    let int = |f: &dyn Fn(usize) -> f64| {
        let s: Vec<f64> = (0..y.len()).map(f).collect();
        trapezoid_uniform(&s, h)
    };
    let i_y = y_int[y.len() - 1];
    let i_tphi = int(&|j| times[j] * phi[j]);
    let i_phi2 = int(&|j| phi[j] * phi[j]);
    let i_yt = int(&|j| dy[j] * times[j]);
    let i_yphi = int(&|j| dy[j] * phi[j]);

    // `r³` as three times the trapezoid `∫ t²`, the same rule as every other moment.
    let r3 = 3.0 * int(&|j| times[j] * times[j]);
    let den = r3 * i_phi2 - 3.0 * i_tphi * i_tphi;
    if !(den > 1e-12 * r3 * i_phi2) {
        return Err(Error::SingularDenominator(den));
    }
    let z2 = (r3 * i_yphi - 3.0 * i_tphi * i_yt) / den;
    let z1 = (3.0 * (i_phi2 - i_y * i_tphi) * i_yt + (r3 * i_y - 3.0 * i_tphi) * i_yphi) / den;
    Ok((z1, z2))
}

pub fn omega_hat(z2: f64) -> Result<f64> {
    if z2 < 0.0 {
        Ok((-z2).sqrt())
    } else {
        Err(Error::NonNegativeZ2(z2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    pub z1: f64,
    pub z2: f64,
    pub omega_hat: f64,
    pub rel_error: f64,
}

/// Simulate one window `[0, r]` of the scenario, corrupt it and reconstruct.
pub fn estimate_frequency(scn: &FrequencyScenario, h: f64) -> Result<FrequencyEstimate> {
    scn.validate()?;
    let (x0, y0) = sinusoid_initial_state(scn.amplitude, scn.omega, scn.phase);
    let spec = freq_spec(false);
    let trace = simulate_plant(&spec, &InputSignal::none(), &SimConfig { t_end: scn.window, h, x0, y0 })?;
    let trace = corrupt(&trace, &scn.sensor());
    let window = IoWindow::new(h, trace.y_meas, trace.u)?;
    let est = estimate_window(&freq_spec(true), &window)?;
    let (z1, z2) = (est.x_end[0], est.x_end[1]);
    let omega_hat = omega_hat(z2)?;
    Ok(FrequencyEstimate { z1, z2, omega_hat, rel_error: (omega_hat - scn.omega).abs() / scn.omega })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub omega_hat: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }

    pub fn row_at(&self, value: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| (r.value - value).abs() <= 1e-12 * value.abs().max(1.0))
    }
}

/// `k 2π / count` for `k = 0..count` (endpoint excluded).
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * 2.0 * PI / count as f64).collect()
}

/// Relative error of `ω̂` for each phase, everything else from `template`.
pub fn phase_sweep(template: &FrequencyScenario, phases: &[f64], h: f64) -> Result<SweepTable> {
    let rows = phases
        .iter()
        .map(|&phase| {
            let est = estimate_frequency(&FrequencyScenario { phase, ..*template }, h)?;
            Ok(SweepRow { value: phase, omega_hat: est.omega_hat, rel_error: est.rel_error })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

/// Relative error of `ω̂` for each window length. Every `r` must be a multiple of `h`.
pub fn horizon_sweep(template: &FrequencyScenario, windows: &[f64], h: f64) -> Result<SweepTable> {
    let rows = windows
        .iter()
        .map(|&window| {
            let est = estimate_frequency(&FrequencyScenario { window, ..*template }, h)?;
            Ok(SweepRow { value: window, omega_hat: est.omega_hat, rel_error: est.rel_error })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}
