//! Batch reactor `A -> B -> C` with first-order Arrhenius kinetics. Only the
//! temperature is measured; the concentrations `(c_A, c_B)` are reconstructed.
//!
//! ```text
//! c_A' = -k1 e^{-E1/T} c_A
//! c_B' =  k1 e^{-E1/T} c_A - k2 e^{-E2/T} c_B
//! T'   =  J1 k1 e^{-E1/T} c_A + J2 k2 e^{-E2/T} c_B + h (Ts - T)
//! ```
//!
//! Activation energies are expressed as temperatures (the gas constant is
//! folded into `E1`, `E2`).

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cumulative_trapezoid, trapezoid_uniform, Matrix, Vector};
use crate::system::SystemSpec;

/// Window used when `E1 = E2`: any positive length works there.
pub const EQUAL_ACTIVATION_WINDOW: f64 = 1.0;

/// Temperature samples used by [`min_window_reactor`] for the hypothesis scan.
pub const HYPOTHESIS_SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactorParams {
    /// Pre-exponential rate of `A -> B` (1/s).
    pub k1: f64,
    /// Pre-exponential rate of `B -> C` (1/s).
    pub k2: f64,
    /// Activation temperature of `A -> B` (K).
    pub e1: f64,
    /// Activation temperature of `B -> C` (K).
    pub e2: f64,
    /// Adiabatic temperature rise per unit of `A` converted (K).
    pub j1: f64,
    /// Adiabatic temperature rise per unit of `B` converted (K).
    pub j2: f64,
    /// Jacket heat-transfer coefficient (1/s).
    pub h_coef: f64,
    /// Jacket temperature (K).
    pub ts: f64,
    /// Upper bound on `c_A`.
    pub c1_bar: f64,
    /// Upper bound on `c_B`.
    pub c2_bar: f64,
    /// Lower temperature bound (K).
    pub t_min: f64,
    /// Upper temperature bound (K).
    pub t_max: f64,
    /// Required temperature-slope margin (K/s).
    pub a_margin: f64,
}

impl ReactorParams {
    /// The documented parameter set used by the examples and regression tests.
    ///
    /// `E1 < E2` and `(J1 + J2) k2 < J1 k1`, so the cooling-slope hypothesis
    /// holds automatically. A scan over `(Tmin, Tmax)` gives a realized margin
    /// of about 81 K/s; `a_margin = 50` K/s leaves headroom and fixes the
    /// minimum window at `(550 - 290) / 50 = 5.2` s.
    pub fn canonical() -> Self {
        Self {
            k1: 10.0,
            k2: 2.5,
            e1: 900.0,
            e2: 1400.0,
            j1: 90.0,
            j2: 140.0,
            h_coef: 40.0,
            ts: 300.0,
            c1_bar: 1.0,
            c2_bar: 25.0,
            t_min: 290.0,
            t_max: 550.0,
            a_margin: 50.0,
        }
    }

    /// Equal activation temperatures with `(J1 + J2) k2 = J1 k1`: the
    /// temperature only sees the lumped quantity `(J1 + J2) c_A + J2 c_B`.
    pub fn lumped() -> Self {
        let mut p = Self::canonical();
        p.e2 = p.e1;
        p.k2 = p.j1 * p.k1 / (p.j1 + p.j2);
        p.t_max = 700.0;
        p
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("e1", self.e1),
            ("e2", self.e2),
            ("j1", self.j1),
            ("j2", self.j2),
            ("h_coef", self.h_coef),
            ("ts", self.ts),
            ("c1_bar", self.c1_bar),
            ("c2_bar", self.c2_bar),
            ("t_min", self.t_min),
            ("t_max", self.t_max),
            ("a_margin", self.a_margin),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if self.t_min > self.ts {
            return Err(Error::InvalidParams(format!("t_min = {} exceeds ts = {}", self.t_min, self.ts)));
        }
        let heat_bound = (self.j1 * self.k1 * self.c1_bar + self.j2 * self.k2 * self.c2_bar) / self.h_coef + self.ts;
        if heat_bound > self.t_max {
            return Err(Error::InvalidParams(format!("t_max = {} below the adiabatic bound {heat_bound}", self.t_max)));
        }
        let ratio_bound = if self.e1 >= self.e2 {
            self.k1 / self.k2 * self.c1_bar
        } else {
            self.k1 / self.k2 * ((self.e2 - self.e1) / self.t_min).exp() * self.c1_bar
        };
        if !(ratio_bound < self.c2_bar) {
            return Err(Error::InvalidParams(format!(
                "c2_bar = {} must exceed {ratio_bound} for D to be invariant",
                self.c2_bar
            )));
        }
        Ok(())
    }

    pub fn rate1(&self, temp: f64) -> f64 {
        self.k1 * (-self.e1 / temp).exp()
    }

    pub fn rate2(&self, temp: f64) -> f64 {
        self.k2 * (-self.e2 / temp).exp()
    }

    /// `(J1 + J2) k2 - J1 k1`; zero marks the unobservable lumping when `E1 = E2`.
    pub fn lumping_gap(&self) -> f64 {
        (self.j1 + self.j2) * self.k2 - self.j1 * self.k1
    }

    fn equal_activation(&self) -> bool {
        (self.e1 - self.e2).abs() <= 1e-12 * self.e1.abs().max(self.e2.abs())
    }
}

/// Reactor as a spec with `x = (c_A, c_B)`, `y = T` and no input.
pub fn reactor_spec(p: &ReactorParams) -> Result<SystemSpec> {
    p.validate()?;
    let p = *p;
    let (pa, pc, pf, pd, po) = (p, p, p, p, p);
    Ok(SystemSpec::new(
        2,
        1,
        0,
        Arc::new(move |y, _| {
            let (r1, r2) = (pa.rate1(y[0]), pa.rate2(y[0]));
            Matrix::from_row_slice(2, 2, &[-r1, 0.0, r1, -r2])
        }),
        Arc::new(|_, _| DVector::zeros(2)),
        Arc::new(move |y| Matrix::from_row_slice(2, 1, &[pc.j1 * pc.rate1(y[0]), pc.j2 * pc.rate2(y[0])])),
        Arc::new(move |y, _| DVector::from_row_slice(&[pf.h_coef * (pf.ts - y[0])])),
    )
    .with_domain(Arc::new(move |x, _| x[0] > 0.0 && x[0] < pd.c1_bar && x[1] > 0.0 && x[1] < pd.c2_bar))
    .with_output_domain(Arc::new(move |y| y[0] > po.t_min && y[0] < po.t_max)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Temperature must fall at rate at least `a` wherever the gate is open.
    A1,
    /// Temperature must rise at rate at least `a` wherever the gate is open.
    A2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypothesisCheck {
    /// `margin` is the realized slope margin over the gated temperatures
    /// (infinite when no temperature opens the gate, or when `E1 = E2`).
    Holds { margin: f64 },
    /// `worst_t` is the gated temperature with the smallest margin; `None` for
    /// the `E1 = E2` lumping case.
    Fails { worst_t: Option<f64> },
}

impl HypothesisCheck {
    pub fn holds(&self) -> bool {
        matches!(self, HypothesisCheck::Holds { .. })
    }
}

/// Left-hand side of the slope condition at temperature `temp`.
pub fn slope_indicator(p: &ReactorParams, temp: f64) -> f64 {
    temp * temp / ((p.e2 - p.e1) * p.j1)
        * (-p.e2 / temp).exp()
        * ((p.j1 + p.j2) * p.k2 - p.j1 * p.k1 * ((p.e2 - p.e1) / temp).exp())
}

/// Evenly spaced interior points of `(t_min, t_max)`.
pub fn temperature_grid(p: &ReactorParams, count: usize) -> Vec<f64> {
    let span = p.t_max - p.t_min;
    (0..count).map(|i| p.t_min + (i as f64 + 0.5) * span / count as f64).collect()
}

/// Which hypothesis holds for some positive margin without scanning.
pub fn automatic_hypothesis(p: &ReactorParams) -> Option<Hypothesis> {
    let gap = p.lumping_gap();
    if p.e1 < p.e2 && gap < 0.0 {
        Some(Hypothesis::A1)
    } else if p.e1 > p.e2 && gap > 0.0 {
        Some(Hypothesis::A2)
    } else {
        None
    }
}

/// Scan `t_grid` for the slope hypothesis against `p.a_margin`.
pub fn check_hypothesis(p: &ReactorParams, which: Hypothesis, t_grid: &[f64]) -> HypothesisCheck {
    if p.equal_activation() {
        let scale = (p.j1 * p.k1).abs().max(((p.j1 + p.j2) * p.k2).abs());
        return if p.lumping_gap().abs() > 1e-12 * scale {
            HypothesisCheck::Holds { margin: f64::INFINITY }
        } else {
            HypothesisCheck::Fails { worst_t: None }
        };
    }
    let mut worst: Option<(f64, f64)> = None;
    for &temp in t_grid {
        let g = slope_indicator(p, temp);
        if g / p.h_coef + temp <= p.ts {
            continue;
        }
        let margin = match which {
            Hypothesis::A1 => -g,
            Hypothesis::A2 => g,
        };
        if worst.is_none_or(|(m, _)| margin < m) {
            worst = Some((margin, temp));
        }
    }
    match worst {
        None => HypothesisCheck::Holds { margin: f64::INFINITY },
        Some((margin, _)) if margin >= p.a_margin => HypothesisCheck::Holds { margin },
        Some((_, temp)) => HypothesisCheck::Fails { worst_t: Some(temp) },
    }
}

/// Shortest window for which every trajectory is distinguishable:
/// `(Tmax - Tmin) / a_margin` when `E1 != E2`.
pub fn min_window_reactor(p: &ReactorParams) -> Result<f64> {
    p.validate()?;
    let grid = temperature_grid(p, HYPOTHESIS_SCAN_POINTS);
    if p.equal_activation() {
        return if check_hypothesis(p, Hypothesis::A1, &grid).holds() {
            Ok(EQUAL_ACTIVATION_WINDOW)
        } else {
            Err(Error::HypothesisFails("E1 = E2 with (J1 + J2) k2 = J1 k1".into()))
        };
    }
    if check_hypothesis(p, Hypothesis::A1, &grid).holds() || check_hypothesis(p, Hypothesis::A2, &grid).holds() {
        Ok((p.t_max - p.t_min) / p.a_margin)
    } else {
        Err(Error::HypothesisFails("A1 and A2".into()))
    }
}

/// Closed-form reduced-order reset for the reactor.
#[derive(Debug, Clone)]
pub struct ReactorGains {
    /// Least-squares estimate of the window-initial concentrations.
    pub g: Vector,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    /// Transition matrix at the window end, from its explicit formula.
    pub transition_end: Matrix,
    pub denominator: f64,
}

impl ReactorGains {
    /// Reset value: the concentrations at the end of the window.
    pub fn reset_value(&self) -> Vector {
        &self.transition_end * &self.g
    }
}

struct RateIntegrals {
    k1_int: Vec<f64>,
    k2_int: Vec<f64>,
    /// `∫_0^t exp(-E1/T(s) - ∫_s^t rate2 - ∫_0^s rate1) ds`
    feed: Vec<f64>,
}

fn rate_integrals(temps: &[f64], h: f64, p: &ReactorParams) -> RateIntegrals {
    let r1: Vec<f64> = temps.iter().map(|&t| p.rate1(t)).collect();
    let r2: Vec<f64> = temps.iter().map(|&t| p.rate2(t)).collect();
    let k1_int = cumulative_trapezoid(&r1, h);
    let k2_int = cumulative_trapezoid(&r2, h);
    let integrand: Vec<f64> =
        temps.iter().enumerate().map(|(j, &t)| (-p.e1 / t + k2_int[j] - k1_int[j]).exp()).collect();
    let feed = cumulative_trapezoid(&integrand, h).iter().zip(&k2_int).map(|(c, k2)| c * (-k2).exp()).collect();
    RateIntegrals { k1_int, k2_int, feed }
}

/// Transition matrix at each sample from its explicit lower-triangular formula.
pub fn reactor_transition(temps: &[f64], h: f64, p: &ReactorParams) -> Vec<Matrix> {
    let ri = rate_integrals(temps, h, p);
    (0..temps.len())
        .map(|j| Matrix::from_row_slice(2, 2, &[(-ri.k1_int[j]).exp(), 0.0, p.k1 * ri.feed[j], (-ri.k2_int[j]).exp()]))
        .collect()
}

/// Evaluate the closed-form reactor reset on a temperature window sampled with step `h`.
pub fn reactor_gains(temps: &[f64], h: f64, p: &ReactorParams) -> Result<ReactorGains> {
    if temps.len() < 2 {
        return Err(Error::LengthMismatch { expected: 2, got: temps.len() });
    }
    if let Some(j) = temps.iter().position(|&t| !(t > p.t_min && t < p.t_max)) {
        return Err(Error::DomainViolation(format!("temperature sample {j} = {} outside (Tmin, Tmax)", temps[j])));
    }
    let ri = rate_integrals(temps, h, p);
    let phi1: Vec<f64> =
        (0..temps.len()).map(|j| (p.j1 + p.j2) * (1.0 - (-ri.k1_int[j]).exp()) - p.j2 * p.k1 * ri.feed[j]).collect();
    let phi2: Vec<f64> = ri.k2_int.iter().map(|k| p.j2 * (1.0 - (-k).exp())).collect();

    let cooling: Vec<f64> = temps.iter().map(|&t| p.h_coef * (p.ts - t)).collect();
    let cooling_int = cumulative_trapezoid(&cooling, h);
    let resid: Vec<f64> = temps.iter().zip(&cooling_int).map(|(t, c)| t - temps[0] - c).collect();

    let integral = |f: &dyn Fn(usize) -> f64| {
        let s: Vec<f64> = (0..temps.len()).map(f).collect();
        trapezoid_uniform(&s, h)
    };
    let s11 = integral(&|j| phi1[j] * phi1[j]);
    let s22 = integral(&|j| phi2[j] * phi2[j]);
    let s12 = integral(&|j| phi1[j] * phi2[j]);
    let v1 = integral(&|j| resid[j] * phi1[j]);
    let v2 = integral(&|j| resid[j] * phi2[j]);
    let denominator = s11 * s22 - s12 * s12;
    if !(denominator > 1e-10 * s11 * s22) {
        return Err(Error::SingularDenominator(denominator));
    }
    let g = DVector::from_row_slice(&[(s22 * v1 - s12 * v2) / denominator, (s11 * v2 - s12 * v1) / denominator]);
    let last = temps.len() - 1;
    let transition_end =
        Matrix::from_row_slice(2, 2, &[(-ri.k1_int[last]).exp(), 0.0, p.k1 * ri.feed[last], (-ri.k2_int[last]).exp()]);
    Ok(ReactorGains { g, phi1, phi2, transition_end, denominator })
}

/// Positive while `c_B` is still rising; the sign change marks the stopping time.
pub fn optimal_stop(z: &Vector, temp: f64, p: &ReactorParams) -> f64 {
    p.rate1(temp) * z[0] - p.rate2(temp) * z[1]
}
