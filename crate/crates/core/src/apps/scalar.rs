//! Scalar systems `x' = a(y,u) x`, `y' = f(y,u) + c(y) x` and their
//! closed-form reduced-order reset.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cumulative_trapezoid, trapezoid_uniform, Matrix};
use crate::system::SystemSpec;
use crate::window::IoWindow;

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ScalarOutputGain = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficient functions of a scalar system. The input is the first
/// component of `u`, or zero when the system has no input.
#[derive(Clone)]
pub struct ScalarSystem {
    pub a: ScalarField,
    pub f: ScalarField,
    pub c: ScalarOutputGain,
    /// Restrict the state to `x > 0` instead of the whole line.
    pub positive_state: bool,
    /// Input dimension, 0 or 1.
    pub m: usize,
}

impl std::fmt::Debug for ScalarSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarSystem").field("positive_state", &self.positive_state).field("m", &self.m).finish()
    }
}

fn first(u: &DVector<f64>) -> f64 {
    u.get(0).copied().unwrap_or(0.0)
}

impl ScalarSystem {
    /// `a ≡ 0`, `f ≡ 0`, `c ≡ 1`: the output is the running integral of a constant state.
    pub fn integrator() -> Self {
        Self { a: Arc::new(|_, _| 0.0), f: Arc::new(|_, _| 0.0), c: Arc::new(|_| 1.0), positive_state: false, m: 0 }
    }

    pub fn spec(&self) -> SystemSpec {
        let (a, f, c) = (self.a.clone(), self.f.clone(), self.c.clone());
        let spec = SystemSpec::new(
            1,
            1,
            self.m,
            Arc::new(move |y, u| Matrix::from_element(1, 1, a(y[0], first(u)))),
            Arc::new(|_, _| DVector::zeros(1)),
            Arc::new(move |y| Matrix::from_element(1, 1, c(y[0]))),
            Arc::new(move |y, u| DVector::from_element(1, f(y[0], first(u)))),
        );
        if self.positive_state {
            spec.with_domain(Arc::new(|x, _| x[0] > 0.0))
        } else {
            spec
        }
    }
}

/// Polynomial coefficients in `y`, lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPolynomials {
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub f: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub positive_state: bool,
}

fn horner(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &k| acc * y + k)
}

impl ScalarPolynomials {
    pub fn system(&self) -> Result<ScalarSystem> {
        if self.a.iter().chain(&self.f).chain(&self.c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("scalar polynomial coefficients must be finite".into()));
        }
        let (a, f, c) = (self.a.clone(), self.f.clone(), self.c.clone());
        Ok(ScalarSystem {
            a: Arc::new(move |y, _| horner(&a, y)),
            f: Arc::new(move |y, _| horner(&f, y)),
            c: Arc::new(move |y| horner(&c, y)),
            positive_state: self.positive_state,
            m: 0,
        })
    }
}

/// Window-end state from the closed-form scalar quotient.
pub fn scalar_observer_p(window: &IoWindow, sys: &ScalarSystem) -> Result<f64> {
    let h = window.grid().h();
    let y = window.y_scalar();
    let u: Vec<f64> = window.u().iter().map(first).collect();
    let a_vals: Vec<f64> = y.iter().zip(&u).map(|(&y, &u)| (sys.a)(y, u)).collect();
    let f_vals: Vec<f64> = y.iter().zip(&u).map(|(&y, &u)| (sys.f)(y, u)).collect();
    let a_int = cumulative_trapezoid(&a_vals, h);
    let f_int = cumulative_trapezoid(&f_vals, h);
    let gain: Vec<f64> = y.iter().zip(&a_int).map(|(&y, ai)| (sys.c)(y) * ai.exp()).collect();
    let inner = cumulative_trapezoid(&gain, h);

    let num: Vec<f64> = (0..y.len()).map(|j| (y[j] - y[0] - f_int[j]) * inner[j]).collect();
    let den: Vec<f64> = inner.iter().map(|v| v * v).collect();
    let (num, den) = (trapezoid_uniform(&num, h), trapezoid_uniform(&den, h));
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::SingularDenominator(den));
    }
    Ok(a_int[y.len() - 1].exp() * num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{simulate_plant, SimConfig};
    use crate::system::InputSignal;
    use crate::window::reconstruct_final_state;

    fn window_from(sys: &ScalarSystem, x0: f64, y0: f64, r: f64, steps: usize) -> IoWindow {
        let h = r / steps as f64;
        let cfg = SimConfig { t_end: r, h, x0: DVector::from_element(1, x0), y0: DVector::from_element(1, y0) };
        let trace = simulate_plant(&sys.spec(), &InputSignal::none(), &cfg).unwrap();
        IoWindow::new(h, trace.y_meas, trace.u).unwrap()
    }

    #[test]
    fn integrator_recovers_state() {
        let sys = ScalarSystem::integrator();
        let p = scalar_observer_p(&window_from(&sys, 2.0, 0.0, 1.0, 1000), &sys).unwrap();
        assert!((p - 2.0).abs() < 1e-6, "P = {p}");
    }

    #[test]
    fn zero_state_gives_zero() {
        let sys =
            ScalarPolynomials { a: vec![-0.5], f: vec![], c: vec![1.0, 0.2], positive_state: false }.system().unwrap();
        let p = scalar_observer_p(&window_from(&sys, 0.0, 0.4, 1.0, 500), &sys).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn vanishing_gain_is_singular() {
        let sys = ScalarPolynomials { a: vec![], f: vec![], c: vec![0.0], positive_state: false }.system().unwrap();
        let w = window_from(&sys, 1.0, 0.0, 1.0, 100);
        assert!(matches!(scalar_observer_p(&w, &sys), Err(Error::SingularDenominator(_))));
    }

    #[test]
    fn polynomial_evaluation() {
        assert_eq!(horner(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert_eq!(horner(&[], 2.0), 0.0);
    }

    #[test]
    fn closed_form_matches_generic_route() {
        let sys =
            ScalarPolynomials { a: vec![-0.4, 0.1], f: vec![0.2, -0.5], c: vec![1.2, 0.1], positive_state: false }
                .system()
                .unwrap();
        let w = window_from(&sys, 1.3, -0.2, 1.0, 2000);
        let p = scalar_observer_p(&w, &sys).unwrap();
        let generic = reconstruct_final_state(&sys.spec(), &w).unwrap()[0];
        assert!((p - generic).abs() <= 1e-6 * p.abs(), "{p} vs {generic}");
    }
}
