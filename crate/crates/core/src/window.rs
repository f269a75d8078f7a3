//! Finite-window reconstruction of the unmeasured state.
//!
//! Along a recorded window `[0, r]` of `(y, u)` samples this module integrates
//!
//! ```text
//! Phi' = A Phi          Phi(0) = I
//! theta' = A theta + b  theta(0) = 0
//! q' = Phi^T C          q(0) = 0
//! xi' = f + C^T theta   xi(0) = 0
//! ```
//!
//! and forms `p = y - y(0) - xi`. For a noiseless window `p(t) = q(t)^T x(0)`,
//! so the initial state is the least-squares solution `Q^{-1} ∫ q p` with
//! `Q = ∫ q q^T`, and the state at the end of the window follows as
//! `Phi(r) x(0) + theta(r)`. `Q` is positive definite exactly when the window
//! distinguishes the initial state from every other one.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_lower, integrate_rk4, rk4_step, spd_solve, symmetric_eigen, Grid, Matrix, Vector, DEFAULT_PIVOT_FLOOR,
};
use crate::system::{InputSignal, SystemSpec};

/// Default relative eigenvalue threshold for [`observability_certificate`].
pub const DEFAULT_REL_THRESHOLD: f64 = 1e-8;

/// Uniformly sampled `(y, u)` history over `[0, r]` in window-local time.
#[derive(Debug, Clone, PartialEq)]
pub struct IoWindow {
    grid: Grid,
    y: Vec<Vector>,
    u: Vec<Vector>,
}

impl IoWindow {
    pub fn new(h: f64, y: Vec<Vector>, u: Vec<Vector>) -> Result<Self> {
        if y.len() != u.len() {
            return Err(Error::LengthMismatch { expected: y.len(), got: u.len() });
        }
        let grid = Grid::new(0.0, h, y.len())?;
        Ok(Self { grid, y, u })
    }

    /// Check every sample against the system's output domain and input set.
    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        for (j, (y, u)) in self.y.iter().zip(&self.u).enumerate() {
            if y.len() != spec.k() || u.len() != spec.m() {
                return Err(Error::DimensionMismatch(format!(
                    "window sample {j}: y has {} components, u has {}; expected {} and {}",
                    y.len(),
                    u.len(),
                    spec.k(),
                    spec.m()
                )));
            }
            if !spec.in_output_domain(y) {
                return Err(Error::DomainViolation(format!("window sample {j}: y = {y} outside output domain")));
            }
            if !spec.in_input_set(u) {
                return Err(Error::DomainViolation(format!("window sample {j}: u = {u} outside input set")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn duration(&self) -> f64 {
        self.grid.duration()
    }

    pub fn y(&self) -> &[Vector] {
        &self.y
    }

    pub fn u(&self) -> &[Vector] {
        &self.u
    }

    /// Scalar output samples (first component).
    pub fn y_scalar(&self) -> Vec<f64> {
        self.y.iter().map(|y| y[0]).collect()
    }
}

/// Sampled transition quantities along a window.
#[derive(Debug, Clone)]
pub struct WindowComputation {
    pub grid: Grid,
    /// Transition matrix, `n x n` per node.
    pub phi: Vec<Matrix>,
    pub theta: Vec<Vector>,
    /// `n x k` per node.
    pub q: Vec<Matrix>,
    pub xi: Vec<Vector>,
    pub p: Vec<Vector>,
    /// Output coupling `C(y(t_j))`, `n x k` per node.
    pub c: Vec<Matrix>,
}

struct Layout {
    n: usize,
    k: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.n * self.n + self.n + self.n * self.k + self.k
    }

    fn phi(&self, s: &Vector) -> Matrix {
        Matrix::from_column_slice(self.n, self.n, &s.as_slice()[..self.n * self.n])
    }

    fn theta(&self, s: &Vector) -> Vector {
        s.rows(self.n * self.n, self.n).into_owned()
    }

    fn q(&self, s: &Vector) -> Matrix {
        let off = self.n * self.n + self.n;
        Matrix::from_column_slice(self.n, self.k, &s.as_slice()[off..off + self.n * self.k])
    }

    fn xi(&self, s: &Vector) -> Vector {
        s.rows(self.n * self.n + self.n + self.n * self.k, self.k).into_owned()
    }

    fn pack(&self, phi: &Matrix, theta: &Vector, q: &Matrix, xi: &Vector) -> Vector {
        let mut s = Vec::with_capacity(self.len());
        s.extend_from_slice(phi.as_slice());
        s.extend_from_slice(theta.as_slice());
        s.extend_from_slice(q.as_slice());
        s.extend_from_slice(xi.as_slice());
        DVector::from_vec(s)
    }
}

/// Integrate the transition quantities along `window`.
///
/// Between samples `y` is interpolated linearly and `u` is held at its value
/// from the left node.
pub fn compute_window(spec: &SystemSpec, window: &IoWindow) -> Result<WindowComputation> {
    window.validate(spec)?;
    let (n, k) = (spec.n(), spec.k());
    let layout = Layout { n, k };
    let grid = window.grid;
    let h = grid.h();

    let init = layout.pack(&Matrix::identity(n, n), &DVector::zeros(n), &Matrix::zeros(n, k), &DVector::zeros(k));
    let mut states = Vec::with_capacity(grid.count());
    states.push(init);
    for j in 0..grid.steps() {
        let (y0, y1, u) = (&window.y[j], &window.y[j + 1], &window.u[j]);
        let t_left = grid.time(j);
        let mut field = |t: f64, s: &Vector| {
            let frac = (t - t_left) / h;
            let y = y0 + (y1 - y0) * frac;
            let a = spec.eval_a(&y, u);
            let c = spec.eval_c(&y);
            let phi = layout.phi(s);
            let theta = layout.theta(s);
            let dphi = &a * &phi;
            let dtheta = &a * &theta + spec.eval_b(&y, u);
            let dq = phi.transpose() * &c;
            let dxi = spec.eval_f(&y, u) + c.transpose() * &theta;
            layout.pack(&dphi, &dtheta, &dq, &dxi)
        };
        let next = rk4_step(&mut field, t_left, &states[j], h);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { index: j + 1 });
        }
        states.push(next);
    }

    let y_start = &window.y[0];
    let mut wc = WindowComputation {
        grid,
        phi: Vec::with_capacity(states.len()),
        theta: Vec::with_capacity(states.len()),
        q: Vec::with_capacity(states.len()),
        xi: Vec::with_capacity(states.len()),
        p: Vec::with_capacity(states.len()),
        c: Vec::with_capacity(states.len()),
    };
    for (j, s) in states.iter().enumerate() {
        let xi = layout.xi(s);
        wc.p.push(&window.y[j] - y_start - &xi);
        wc.phi.push(layout.phi(s));
        wc.theta.push(layout.theta(s));
        wc.q.push(layout.q(s));
        wc.xi.push(xi);
        wc.c.push(spec.eval_c(&window.y[j]));
    }
    Ok(wc)
}

/// Gram matrix `Q = ∫ q q^T`, right-hand side `v = ∫ q p` and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSummary {
    pub q: Matrix,
    pub v: Vector,
    /// Smallest Cholesky pivot of `Q` (may be zero or negative when singular).
    pub smallest_pivot: f64,
    /// Ratio of extreme eigenvalues; infinite when `Q` is singular.
    pub condition_estimate: f64,
}

impl GramSummary {
    /// Assemble from a Gram matrix and right-hand side directly.
    pub fn from_parts(q: Matrix, v: Vector) -> Self {
        let (_, smallest_pivot) = cholesky_lower(&q);
        let (vals, _) = symmetric_eigen(&q);
        let condition_estimate = match (vals.first(), vals.last()) {
            (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        };
        Self { q, v, smallest_pivot, condition_estimate }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigen(&self.q).0
    }

    /// The least-squares residual `∫ |p - q^T xi|^2` expanded through `Q`, `v`
    /// and `∫ |p|^2`.
    pub fn residual(&self, xi: &Vector, p_energy: f64) -> f64 {
        (xi.transpose() * &self.q * xi)[0] - 2.0 * self.v.dot(xi) + p_energy
    }
}

/// Trapezoid quadrature of `q q^T` and `q p` on the window grid.
pub fn gram(wc: &WindowComputation) -> GramSummary {
    let n = wc.q.first().map_or(0, |q| q.nrows());
    let last = wc.q.len().saturating_sub(1);
    let h = wc.grid.h();
    let mut q_acc = Matrix::zeros(n, n);
    let mut v_acc = DVector::zeros(n);
    for (j, (qj, pj)) in wc.q.iter().zip(&wc.p).enumerate() {
        let w = if j == 0 || j == last { 0.5 * h } else { h };
        for a in 0..n {
            for b in a..n {
                q_acc[(a, b)] += w * qj.row(a).dot(&qj.row(b));
            }
        }
        v_acc += qj * pj * w;
    }
    for a in 0..n {
        for b in 0..a {
            q_acc[(a, b)] = q_acc[(b, a)];
        }
    }
    GramSummary::from_parts(q_acc, v_acc)
}

/// `∫ |p|^2` on the window grid; completes [`GramSummary::residual`].
pub fn output_energy(wc: &WindowComputation) -> f64 {
    let samples: Vec<f64> = wc.p.iter().map(|p| p.norm_squared()).collect();
    crate::numerics::trapezoid_uniform(&samples, wc.grid.h())
}

/// Least-squares estimate of the window-initial unmeasured state.
pub fn reconstruct_initial(gs: &GramSummary) -> Result<Vector> {
    spd_solve(&gs.q, &gs.v, DEFAULT_PIVOT_FLOOR).map(|s| s.x)
}

/// Everything produced by one window reconstruction.
#[derive(Debug, Clone)]
pub struct WindowEstimate {
    pub x_start: Vector,
    pub x_end: Vector,
    pub gram: GramSummary,
    /// False when the reconstructed state lies outside the domain at either end
    /// of the window. The estimate is reported unprojected.
    pub in_domain: bool,
}

/// Full reconstruction pipeline on one window.
pub fn estimate_window(spec: &SystemSpec, window: &IoWindow) -> Result<WindowEstimate> {
    let wc = compute_window(spec, window)?;
    let gs = gram(&wc);
    let x_start = reconstruct_initial(&gs)?;
    Ok(finish_estimate(spec, window, &wc, gs, x_start))
}

fn finish_estimate(
    spec: &SystemSpec,
    window: &IoWindow,
    wc: &WindowComputation,
    gram: GramSummary,
    x_start: Vector,
) -> WindowEstimate {
    let last = wc.phi.len() - 1;
    let x_end = &wc.phi[last] * &x_start + &wc.theta[last];
    let in_domain = spec.in_domain(&x_start, &window.y[0]) && spec.in_domain(&x_end, &window.y[window.y.len() - 1]);
    WindowEstimate { x_start, x_end, gram, in_domain }
}

/// State at the end of the window reconstructed from the window alone.
pub fn reconstruct_final_state(spec: &SystemSpec, window: &IoWindow) -> Result<Vector> {
    estimate_window(spec, window).map(|e| e.x_end)
}

/// Outcome of the Gram test at one window.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    StronglyObservableOnWindow {
        min_eigenvalue: f64,
    },
    /// `null_direction` is a unit eigenvector of the smallest eigenvalue:
    /// `q(t)^T null_direction` is (nearly) zero over the whole window.
    Degenerate {
        null_direction: Vector,
        min_eigenvalue: f64,
    },
}

impl Certificate {
    pub fn is_observable(&self) -> bool {
        matches!(self, Certificate::StronglyObservableOnWindow { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            Certificate::StronglyObservableOnWindow { min_eigenvalue }
            | Certificate::Degenerate { min_eigenvalue, .. } => *min_eigenvalue,
        }
    }
}

pub fn observability_certificate(gs: &GramSummary, rel_threshold: f64) -> Certificate {
    let n = gs.q.nrows();
    let (vals, vecs) = symmetric_eigen(&gs.q);
    let min_eigenvalue = vals.first().copied().unwrap_or(0.0);
    let trace = gs.q.trace();
    if n > 0 && min_eigenvalue > rel_threshold * trace / n as f64 {
        Certificate::StronglyObservableOnWindow { min_eigenvalue }
    } else {
        let null_direction = vecs.into_iter().next().unwrap_or_else(|| DVector::zeros(0));
        Certificate::Degenerate { null_direction, min_eigenvalue }
    }
}

/// Determinant of the `n x n` matrix whose row `i` is `C(t_i)^T Phi(t_i)` at
/// the given node indices. Single-output systems only. A nonzero value
/// certifies that the window distinguishes its initial state.
pub fn determinant_condition(wc: &WindowComputation, nodes: &[usize]) -> Result<f64> {
    let (n, k) = match wc.c.first() {
        Some(c) => (c.nrows(), c.ncols()),
        None => return Err(Error::DimensionMismatch("empty window".into())),
    };
    if k != 1 {
        return Err(Error::WrongOutputDimension(k));
    }
    if nodes.len() != n {
        return Err(Error::DimensionMismatch(format!("need {n} node indices, got {}", nodes.len())));
    }
    let mut m = Matrix::zeros(n, n);
    for (row, &j) in nodes.iter().enumerate() {
        if j >= wc.phi.len() {
            return Err(Error::DimensionMismatch(format!("node index {j} outside window")));
        }
        let r = wc.c[j].transpose() * &wc.phi[j];
        m.row_mut(row).copy_from(&r.row(0));
    }
    Ok(m.determinant())
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Two decoupled scalar modes seen through one output:
///
/// ```text
/// x1' = a1(y) x1,  x2' = a2(y) x2,  y' = u + c1(y) x1 + c2(y) x2
/// ```
///
/// with `c1, c2 > 0` and `kappa = d/dy ln(c1 / c2)` supplied explicitly.
#[derive(Clone)]
pub struct IndistinguishableSystem {
    pub a1: ScalarFn,
    pub a2: ScalarFn,
    pub c1: ScalarFn,
    pub c2: ScalarFn,
    pub kappa: ScalarFn,
}

impl std::fmt::Debug for IndistinguishableSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("IndistinguishableSystem { .. }")
    }
}

impl IndistinguishableSystem {
    /// Constant rates, `c1(y) = exp(kappa * y)`, `c2(y) = 1`.
    pub fn exponential_ratio(a1: f64, a2: f64, kappa: f64) -> Self {
        Self {
            a1: Arc::new(move |_| a1),
            a2: Arc::new(move |_| a2),
            c1: Arc::new(move |y| (kappa * y).exp()),
            c2: Arc::new(|_| 1.0),
            kappa: Arc::new(move |_| kappa),
        }
    }

    /// The plant as a general spec with `n = 2`, `k = 1`, `m = 1`.
    pub fn spec(&self) -> SystemSpec {
        let (a1, a2, c1, c2) = (self.a1.clone(), self.a2.clone(), self.c1.clone(), self.c2.clone());
        SystemSpec::new(
            2,
            1,
            1,
            Arc::new(move |y, _| Matrix::from_row_slice(2, 2, &[a1(y[0]), 0.0, 0.0, a2(y[0])])),
            Arc::new(|_, _| DVector::zeros(2)),
            Arc::new(move |y| Matrix::from_row_slice(2, 1, &[c1(y[0]), c2(y[0])])),
            Arc::new(|_, u| DVector::from_row_slice(&[u[0]])),
        )
    }

    /// Second initial state producing the same output as `(x0, y0)` under the
    /// constructed input, parameterised by its first component.
    pub fn partner_state(&self, x0: &Vector, y0: f64, xi1: f64) -> Vector {
        let ratio = (self.c1)(y0) / (self.c2)(y0);
        DVector::from_row_slice(&[xi1, x0[1] + ratio * (x0[0] - xi1)])
    }

    fn output_slope(&self, y: f64) -> f64 {
        ((self.a2)(y) - (self.a1)(y)) / (self.kappa)(y)
    }
}

/// Input under which the initial state cannot be told apart from a family of
/// others, together with the output path it forces.
#[derive(Debug, Clone)]
pub struct IndistinguishingInput {
    system: IndistinguishableSystem,
    grid: Grid,
    /// Per node: `(y, ∫ a2(y))`.
    nodes: Vec<Vector>,
    gain: f64,
}

const KAPPA_FLOOR: f64 = 1e-12;

/// Build the input that keeps the Gram matrix singular along the forced output.
pub fn indistinguishing_input(
    system: &IndistinguishableSystem,
    x0: &Vector,
    y0: f64,
    grid: &Grid,
) -> Result<IndistinguishingInput> {
    if x0.len() != 2 {
        return Err(Error::DimensionMismatch(format!("x0 must have 2 components, got {}", x0.len())));
    }
    let kappa0 = (system.kappa)(y0);
    if !(kappa0.abs() > KAPPA_FLOOR) {
        return Err(Error::KappaVanished { t: grid.t0(), y: y0 });
    }
    let sys = system.clone();
    let field = move |_: f64, s: &Vector| DVector::from_row_slice(&[sys.output_slope(s[0]), (sys.a2)(s[0])]);
    let nodes = integrate_rk4(field, &DVector::from_row_slice(&[y0, 0.0]), grid).map_err(|e| match e {
        Error::NonFiniteState { index } => Error::KappaVanished { t: grid.time(index), y: f64::NAN },
        other => other,
    })?;
    for (j, s) in nodes.iter().enumerate() {
        if !((system.kappa)(s[0]).abs() > KAPPA_FLOOR) {
            return Err(Error::KappaVanished { t: grid.time(j), y: s[0] });
        }
    }
    let gain = x0[1] + x0[0] * (system.c1)(y0) / (system.c2)(y0);
    Ok(IndistinguishingInput { system: system.clone(), grid: *grid, nodes, gain })
}

impl IndistinguishingInput {
    fn input_from(&self, s: &Vector) -> f64 {
        self.system.output_slope(s[0]) - (self.system.c2)(s[0]) * s[1].exp() * self.gain
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn u_samples(&self) -> Vec<f64> {
        self.nodes.iter().map(|s| self.input_from(s)).collect()
    }

    pub fn y_samples(&self) -> Vec<f64> {
        self.nodes.iter().map(|s| s[0]).collect()
    }

    /// Continuous-time input: evaluates between nodes with a partial RK4 step
    /// from the preceding node, so plant simulations see the exact construction.
    pub fn signal(&self) -> InputSignal {
        let this = self.clone();
        InputSignal::Closure(Arc::new(move |t| {
            let s = (t - this.grid.t0()) / this.grid.h();
            let j = (s.floor().max(0.0) as usize).min(this.grid.steps());
            let dt = t - this.grid.time(j);
            let state = if dt.abs() < 1e-15 {
                this.nodes[j].clone()
            } else {
                let sys = this.system.clone();
                let mut field =
                    move |_: f64, s: &Vector| DVector::from_row_slice(&[sys.output_slope(s[0]), (sys.a2)(s[0])]);
                rk4_step(&mut field, this.grid.time(j), &this.nodes[j], dt)
            };
            DVector::from_row_slice(&[this.input_from(&state)])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::make_lti;

    fn v(xs: &[f64]) -> Vector {
        DVector::from_row_slice(xs)
    }

    fn scalar_oracle() -> SystemSpec {
        make_lti(Matrix::zeros(1, 1), v(&[0.0]), Matrix::identity(1, 1), v(&[0.0])).unwrap()
    }

    // y = 2t on [0, 1]: the scalar oracle started from x0 = 2, y0 = 0.
    fn scalar_window() -> IoWindow {
        let h = 1e-3;
        let y = (0..=1000).map(|j| v(&[2.0 * j as f64 * h])).collect();
        IoWindow::new(h, y, vec![v(&[]); 1001]).unwrap()
    }

    #[test]
    fn scalar_oracle_window_quantities() {
        let wc = compute_window(&scalar_oracle(), &scalar_window()).unwrap();
        for (j, t) in wc.grid.times().enumerate() {
            assert!((wc.phi[j][(0, 0)] - 1.0).abs() < 1e-8);
            assert!(wc.theta[j][0].abs() < 1e-8);
            assert!((wc.q[j][(0, 0)] - t).abs() < 1e-8);
            assert!((wc.p[j][0] - 2.0 * t).abs() < 1e-8);
        }
    }

    #[test]
    fn node_zero_is_the_initial_condition() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.3, -0.5]);
        let c = Matrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let spec = make_lti(a, v(&[1.0, 2.0]), c, v(&[0.4])).unwrap();
        let y = (0..50).map(|j| v(&[(j as f64 * 0.1).sin()])).collect();
        let wc = compute_window(&spec, &IoWindow::new(0.02, y, vec![v(&[]); 50]).unwrap()).unwrap();
        assert_eq!(wc.phi[0], Matrix::identity(2, 2));
        assert_eq!(wc.theta[0], v(&[0.0, 0.0]));
        assert_eq!(wc.q[0], Matrix::zeros(2, 1));
        assert_eq!(wc.p[0], v(&[0.0]));
        assert!(wc.phi.iter().all(|p| p.determinant() > 0.0));
    }

    #[test]
    fn scalar_gram_and_reconstruction() {
        let wc = compute_window(&scalar_oracle(), &scalar_window()).unwrap();
        let gs = gram(&wc);
        assert!((gs.q[(0, 0)] - 1.0 / 3.0).abs() < 1e-6);
        assert!((gs.v[0] - 2.0 / 3.0).abs() < 1e-6);
        let x0 = reconstruct_initial(&gs).unwrap();
        assert!((x0[0] - 2.0).abs() < 1e-9);
        let x_end = reconstruct_final_state(&scalar_oracle(), &scalar_window()).unwrap();
        assert!((x_end[0] - 2.0).abs() < 1e-9);
        assert!(observability_certificate(&gs, DEFAULT_REL_THRESHOLD).is_observable());
        assert!((determinant_condition(&wc, &[500]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_gives_zero_gram() {
        let spec = make_lti(Matrix::zeros(2, 2), v(&[0.0, 0.0]), Matrix::zeros(2, 1), v(&[0.0])).unwrap();
        let y = (0..11).map(|j| v(&[j as f64])).collect();
        let window = IoWindow::new(0.1, y, vec![v(&[]); 11]).unwrap();
        let wc = compute_window(&spec, &window).unwrap();
        let gs = gram(&wc);
        assert_eq!(gs.q, Matrix::zeros(2, 2));
        assert_eq!(gs.v, v(&[0.0, 0.0]));
        assert!(matches!(reconstruct_initial(&gs), Err(Error::NotPositiveDefinite { .. })));
        match observability_certificate(&gs, DEFAULT_REL_THRESHOLD) {
            Certificate::Degenerate { null_direction, .. } => assert!((null_direction.norm() - 1.0).abs() < 1e-12),
            other => panic!("expected degenerate, got {other:?}"),
        }
        assert_eq!(determinant_condition(&wc, &[10, 0]).unwrap(), 0.0);
    }

    #[test]
    fn gram_is_exactly_symmetric() {
        let a = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -1.0, -2.0, -0.5]);
        let c = Matrix::from_row_slice(3, 1, &[1.0, 0.3, 0.0]);
        let spec = make_lti(a, v(&[0.0, 0.0, 0.0]), c, v(&[0.0])).unwrap();
        let y = (0..101).map(|j| v(&[(j as f64 * 0.05).cos()])).collect();
        let gs = gram(&compute_window(&spec, &IoWindow::new(0.01, y, vec![v(&[]); 101]).unwrap()).unwrap());
        assert_eq!(&gs.q - gs.q.transpose(), Matrix::zeros(3, 3));
    }

    #[test]
    fn synthetic_gram_summaries() {
        let gs = GramSummary::from_parts(Matrix::identity(2, 2), v(&[4.0, 5.0]));
        assert_eq!(reconstruct_initial(&gs).unwrap(), v(&[4.0, 5.0]));
        let zero = GramSummary::from_parts(Matrix::zeros(2, 2), v(&[0.0, 0.0]));
        assert!(matches!(reconstruct_initial(&zero), Err(Error::NotPositiveDefinite { .. })));
        assert!(!observability_certificate(&zero, DEFAULT_REL_THRESHOLD).is_observable());
    }

    #[test]
    fn zero_window_reconstructs_zero() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let c = Matrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let spec = make_lti(a, v(&[0.0, 0.0]), c, v(&[0.0])).unwrap();
        let window = IoWindow::new(0.01, vec![v(&[0.5]); 101], vec![v(&[]); 101]).unwrap();
        let x = reconstruct_final_state(&spec, &window).unwrap();
        assert!(x.norm() < 1e-12);
    }

    #[test]
    fn determinant_condition_rejects_multi_output() {
        let spec = make_lti(Matrix::zeros(1, 1), v(&[0.0]), Matrix::from_row_slice(1, 2, &[1.0, 1.0]), v(&[0.0, 0.0]))
            .unwrap();
        let y = (0..5).map(|j| v(&[j as f64, 0.0])).collect();
        let wc = compute_window(&spec, &IoWindow::new(0.1, y, vec![v(&[]); 5]).unwrap()).unwrap();
        assert_eq!(determinant_condition(&wc, &[4]).unwrap_err(), Error::WrongOutputDimension(2));
    }

    #[test]
    fn window_length_mismatch() {
        assert!(matches!(IoWindow::new(0.1, vec![v(&[0.0]); 3], vec![v(&[]); 2]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn indistinguishing_input_closed_form() {
        // a1 = -1, a2 = -2, c1 = e^y, c2 = 1: y = y0 - t and
        // u = -1 - e^{-2t} (x20 + x10 e^{y0}).
        let sys = IndistinguishableSystem::exponential_ratio(-1.0, -2.0, 1.0);
        let grid = Grid::spanning(0.0, 1.0, 1e-3).unwrap();
        let (x0, y0) = (v(&[0.7, 0.4]), 0.3);
        let inp = indistinguishing_input(&sys, &x0, y0, &grid).unwrap();
        let gain = 0.4 + 0.7 * y0.exp();
        for (j, t) in grid.times().enumerate() {
            assert!((inp.y_samples()[j] - (y0 - t)).abs() < 1e-12);
            let u = -1.0 - (-2.0 * t).exp() * gain;
            assert!((inp.u_samples()[j] - u).abs() < 1e-10);
        }
        let sig = inp.signal();
        let t = 0.3337;
        assert!((sig.at(t)[0] - (-1.0 - (-2.0 * t).exp() * gain)).abs() < 1e-10);
    }

    #[test]
    fn equal_couplings_have_no_kappa() {
        let sys = IndistinguishableSystem {
            a1: Arc::new(|_| -1.0),
            a2: Arc::new(|_| -2.0),
            c1: Arc::new(|_| 1.0),
            c2: Arc::new(|_| 1.0),
            kappa: Arc::new(|_| 0.0),
        };
        let grid = Grid::spanning(0.0, 1.0, 1e-2).unwrap();
        assert!(matches!(indistinguishing_input(&sys, &v(&[1.0, 1.0]), 0.0, &grid), Err(Error::KappaVanished { .. })));
    }
}
