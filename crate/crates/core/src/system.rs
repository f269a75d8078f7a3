//! Systems linear in the unmeasured state:
//!
//! ```text
//! x' = A(y, u) x + b(y, u)
//! y' = f(y, u) + C(y)^T x
//! ```
//!
//! `x` (dimension `n`) is unmeasured, `y` (dimension `k`) is measured and `u`
//! (dimension `m`) is a known input. `C(y)` is stored as an `n x k` matrix:
//! column `i` holds the coefficients of `x` in the derivative of `y_i`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::{Grid, Matrix, Vector};

pub type MatrixFn = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type OutputMatrixFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;
pub type StatePredicate = Arc<dyn Fn(&Vector, &Vector) -> bool + Send + Sync>;
pub type Predicate = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;

/// One instance of the system class. Cheap to clone; evaluators are shared.
#[derive(Clone)]
pub struct SystemSpec {
    n: usize,
    k: usize,
    m: usize,
    a: MatrixFn,
    b: VectorFn,
    c: OutputMatrixFn,
    f: VectorFn,
    in_domain: StatePredicate,
    in_output_domain: Predicate,
    in_input_set: Predicate,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("SystemSpec")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl SystemSpec {
    /// New spec with unrestricted domains (`O = R^{n+k}`, `U = R^m`).
    pub fn new(n: usize, k: usize, m: usize, a: MatrixFn, b: VectorFn, c: OutputMatrixFn, f: VectorFn) -> Self {
        Self {
            n,
            k,
            m,
            a,
            b,
            c,
            f,
            in_domain: Arc::new(|_, _| true),
            in_output_domain: Arc::new(|_| true),
            in_input_set: Arc::new(|_| true),
        }
    }

    /// Restrict the state domain `O`. The output domain is expected to be its
    /// projection onto `y`; set it with [`Self::with_output_domain`].
    pub fn with_domain(mut self, pred: StatePredicate) -> Self {
        self.in_domain = pred;
        self
    }

    pub fn with_output_domain(mut self, pred: Predicate) -> Self {
        self.in_output_domain = pred;
        self
    }

    pub fn with_input_set(mut self, pred: Predicate) -> Self {
        self.in_input_set = pred;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eval_a(&self, y: &Vector, u: &Vector) -> Matrix {
        (self.a)(y, u)
    }

    pub fn eval_b(&self, y: &Vector, u: &Vector) -> Vector {
        (self.b)(y, u)
    }

    /// `n x k`; the transpose of the output-coupling matrix.
    pub fn eval_c(&self, y: &Vector) -> Matrix {
        (self.c)(y)
    }

    pub fn eval_f(&self, y: &Vector, u: &Vector) -> Vector {
        (self.f)(y, u)
    }

    /// Membership in `O`. Also requires `y` to lie in the output domain.
    pub fn in_domain(&self, x: &Vector, y: &Vector) -> bool {
        (self.in_output_domain)(y) && (self.in_domain)(x, y)
    }

    pub fn in_output_domain(&self, y: &Vector) -> bool {
        (self.in_output_domain)(y)
    }

    pub fn in_input_set(&self, u: &Vector) -> bool {
        (self.in_input_set)(u)
    }

    /// Right-hand side without domain checks.
    pub fn rhs(&self, x: &Vector, y: &Vector, u: &Vector) -> (Vector, Vector) {
        let xdot = self.eval_a(y, u) * x + self.eval_b(y, u);
        let ydot = self.eval_f(y, u) + self.eval_c(y).transpose() * x;
        (xdot, ydot)
    }

    pub(crate) fn check_dims(&self, x: &Vector, y: &Vector, u: &Vector) -> Result<()> {
        if x.len() != self.n || y.len() != self.k || u.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "expected (n, k, m) = ({}, {}, {}), got ({}, {}, {})",
                self.n,
                self.k,
                self.m,
                x.len(),
                y.len(),
                u.len()
            )));
        }
        Ok(())
    }
}

/// Plant state split into the unmeasured and measured parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub x: Vector,
    pub y: Vector,
}

impl PlantState {
    pub fn new(x: Vector, y: Vector) -> Self {
        Self { x, y }
    }

    pub(crate) fn pack(&self) -> Vector {
        let mut s = DVector::zeros(self.x.len() + self.y.len());
        s.rows_mut(0, self.x.len()).copy_from(&self.x);
        s.rows_mut(self.x.len(), self.y.len()).copy_from(&self.y);
        s
    }

    pub(crate) fn unpack(s: &Vector, n: usize) -> Self {
        let k = s.len() - n;
        Self { x: s.rows(0, n).into_owned(), y: s.rows(n, k).into_owned() }
    }
}

/// State derivatives `(x', y')` at `state` under input `u`.
pub fn eval_rhs(spec: &SystemSpec, state: &PlantState, u: &Vector) -> Result<(Vector, Vector)> {
    spec.check_dims(&state.x, &state.y, u)?;
    if !spec.in_domain(&state.x, &state.y) {
        return Err(Error::DomainViolation(format!("state ({}, {}) outside O", state.x, state.y)));
    }
    if !spec.in_input_set(u) {
        return Err(Error::DomainViolation(format!("input {u} outside U")));
    }
    Ok(spec.rhs(&state.x, &state.y, u))
}

/// Time-invariant spec with constant `A`, `b`, `C` (`n x k`) and `f`, no input.
pub fn make_lti(a: Matrix, b: Vector, c: Matrix, f: Vector) -> Result<SystemSpec> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("b has length {}, expected {n}", b.len())));
    }
    if c.nrows() != n {
        return Err(Error::DimensionMismatch(format!("C has {} rows, expected {n}", c.nrows())));
    }
    let k = c.ncols();
    if f.len() != k {
        return Err(Error::DimensionMismatch(format!("f has length {}, expected {k}", f.len())));
    }
    Ok(SystemSpec::new(
        n,
        k,
        0,
        Arc::new(move |_, _| a.clone()),
        Arc::new(move |_, _| b.clone()),
        Arc::new(move |_| c.clone()),
        Arc::new(move |_, _| f.clone()),
    ))
}

/// Admissible input signal.
#[derive(Clone)]
pub enum InputSignal {
    Constant(Vector),
    /// Zero-order hold: `values[j]` applies on `[t_j, t_{j+1})`.
    SampledPiecewiseConstant {
        grid: Grid,
        values: Vec<Vector>,
    },
    Closure(Arc<dyn Fn(f64) -> Vector + Send + Sync>),
}

impl fmt::Debug for InputSignal {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSignal::Constant(u) => fmt.debug_tuple("Constant").field(u).finish(),
            InputSignal::SampledPiecewiseConstant { grid, values } => {
                fmt.debug_struct("SampledPiecewiseConstant").field("grid", grid).field("len", &values.len()).finish()
            }
            InputSignal::Closure(_) => fmt.write_str("Closure(..)"),
        }
    }
}

impl InputSignal {
    /// The empty input for systems with `m = 0`.
    pub fn none() -> Self {
        InputSignal::Constant(DVector::zeros(0))
    }

    pub fn at(&self, t: f64) -> Vector {
        match self {
            InputSignal::Constant(u) => u.clone(),
            InputSignal::SampledPiecewiseConstant { grid, values } => {
                let s = ((t - grid.t0()) / grid.h() + 1e-9).floor();
                let j = if s < 0.0 { 0 } else { (s as usize).min(values.len() - 1) };
                values[j].clone()
            }
            InputSignal::Closure(f) => f(t),
        }
    }

    /// Input used inside integration step `step` (the interval starting at
    /// node `step`). Sampled inputs hold their left value over the whole step.
    pub(crate) fn within_step(&self, step: usize, t: f64) -> Vector {
        match self {
            InputSignal::SampledPiecewiseConstant { values, .. } => values[step.min(values.len() - 1)].clone(),
            _ => self.at(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::frequency::freq_spec;
    use crate::apps::reactor::{reactor_spec, ReactorParams};
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn frequency_rhs() {
        let spec = freq_spec(false);
        let (xd, yd) = eval_rhs(&spec, &PlantState::new(v(&[0.0, -9.0]), v(&[2.0])), &v(&[])).unwrap();
        assert_eq!(xd, v(&[-18.0, 0.0]));
        assert_eq!(yd, v(&[0.0]));
    }

    #[test]
    fn zero_state_of_homogeneous_system() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let c = Matrix::from_row_slice(2, 1, &[1.0, 4.0]);
        let spec = make_lti(a, v(&[0.0, 0.0]), c, v(&[0.0])).unwrap();
        let (xd, yd) = eval_rhs(&spec, &PlantState::new(v(&[0.0, 0.0]), v(&[7.0])), &v(&[])).unwrap();
        assert_eq!(xd, v(&[0.0, 0.0]));
        assert_eq!(yd, v(&[0.0]));
    }

    #[test]
    fn reactor_rhs_at_jacket_temperature() {
        let p = ReactorParams::canonical();
        let spec = reactor_spec(&p).unwrap();
        let r1 = p.k1 * (-p.e1 / p.ts).exp();
        let (xd, yd) = spec.rhs(&v(&[1.0, 0.0]), &v(&[p.ts]), &v(&[]));
        assert!((xd[0] + r1).abs() < 1e-15);
        assert!((xd[1] - r1).abs() < 1e-15);
        assert!((yd[0] - p.j1 * r1).abs() < 1e-12);
    }

    #[test]
    fn make_lti_examples() {
        let scalar = make_lti(Matrix::zeros(1, 1), v(&[0.0]), Matrix::identity(1, 1), v(&[0.0])).unwrap();
        assert_eq!((scalar.n(), scalar.k(), scalar.m()), (1, 1, 0));
        let (xd, yd) = scalar.rhs(&v(&[2.0]), &v(&[0.0]), &v(&[]));
        assert_eq!((xd[0], yd[0]), (0.0, 2.0));

        let chain = make_lti(
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            v(&[0.0, 0.0]),
            Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
            v(&[0.0]),
        )
        .unwrap();
        assert_eq!(chain.eval_c(&v(&[3.0])), Matrix::from_row_slice(2, 1, &[1.0, 0.0]));

        let dead = make_lti(Matrix::zeros(2, 2), v(&[0.0, 0.0]), Matrix::zeros(2, 1), v(&[0.0])).unwrap();
        assert_eq!(dead.eval_c(&v(&[1.0])).norm(), 0.0);

        assert!(matches!(
            make_lti(Matrix::zeros(2, 2), v(&[0.0]), Matrix::zeros(2, 1), v(&[0.0])),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn domain_violations_are_rejected() {
        let spec = freq_spec(false);
        let err = eval_rhs(&spec, &PlantState::new(v(&[1.0, 1.0]), v(&[0.0])), &v(&[])).unwrap_err();
        assert!(matches!(err, Error::DomainViolation(_)));
        let err = eval_rhs(&spec, &PlantState::new(v(&[1.0]), v(&[0.0])), &v(&[])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn sampled_input_holds_previous_node() {
        let grid = Grid::new(0.0, 0.5, 3).unwrap();
        let sig = InputSignal::SampledPiecewiseConstant { grid, values: vec![v(&[1.0]), v(&[2.0]), v(&[3.0])] };
        assert_eq!(sig.at(0.0)[0], 1.0);
        assert_eq!(sig.at(0.49)[0], 1.0);
        assert_eq!(sig.at(0.5)[0], 2.0);
        assert_eq!(sig.at(7.0)[0], 3.0);
        assert_eq!(sig.within_step(0, 0.5)[0], 1.0);
    }

    proptest! {
        #[test]
        fn rhs_is_affine_in_x(
            x1 in proptest::collection::vec(0.01..0.5f64, 2),
            x2 in proptest::collection::vec(0.01..0.5f64, 2),
            temp in 300.0..500.0f64,
        ) {
            let spec = reactor_spec(&ReactorParams::canonical()).unwrap();
            let (x1, x2, y, u) = (DVector::from_vec(x1), DVector::from_vec(x2), v(&[temp]), v(&[]));
            let (a12, b12) = spec.rhs(&(&x1 + &x2), &y, &u);
            let (a1, b1) = spec.rhs(&x1, &y, &u);
            let (a2, b2) = spec.rhs(&x2, &y, &u);
            let (a0, b0) = spec.rhs(&DVector::zeros(2), &y, &u);
            prop_assert!((a12 - a1 - a2 + a0).norm() <= 1e-12);
            prop_assert!((b12 - b1 - b2 + b0).norm() <= 1e-12 * temp);
        }

        #[test]
        fn lti_evaluators_are_constant(y in -10.0..10.0f64, y2 in -10.0..10.0f64) {
            let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -0.3]);
            let c = Matrix::from_row_slice(2, 1, &[1.0, 0.0]);
            let spec = make_lti(a, v(&[0.0, 1.0]), c, v(&[0.2])).unwrap();
            prop_assert_eq!(spec.eval_a(&v(&[y]), &v(&[])), spec.eval_a(&v(&[y2]), &v(&[])));
            prop_assert_eq!(spec.eval_c(&v(&[y])), spec.eval_c(&v(&[y2])));
        }
    }
}
