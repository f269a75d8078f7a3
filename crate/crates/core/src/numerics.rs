//! Fixed-step integration, uniform-grid quadrature and the small dense
//! linear algebra shared by every other module.
//!
//! Everything here is a pure function of its inputs. Vectors and matrices are
//! `nalgebra` dynamic types; dimensions in this crate stay below ~10.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Default relative floor below which a Cholesky pivot is treated as zero.
pub const DEFAULT_PIVOT_FLOOR: f64 = 1e-10;

/// Uniform time grid: sample `j` sits at `t0 + j * h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t0: f64,
    h: f64,
    count: usize,
}

impl Grid {
    pub fn new(t0: f64, h: f64, count: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be positive, got {h}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidGrid("t0 must be finite".into()));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {count}")));
        }
        Ok(Self { t0, h, count })
    }

    /// Grid covering `[t0, t0 + duration]` with step `h`. The duration must be
    /// an integer multiple of `h` to within 1e-9 relative.
    pub fn spanning(t0: f64, duration: f64, h: f64) -> Result<Self> {
        let steps = steps_in(duration, h)
            .ok_or_else(|| Error::InvalidGrid(format!("duration {duration} is not a multiple of step {h}")))?;
        Self::new(t0, h, steps + 1)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn steps(&self) -> usize {
        self.count - 1
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.h
    }

    pub fn duration(&self) -> f64 {
        self.h * (self.count - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.time(j))
    }
}

/// Number of whole steps of size `h` in `duration`, if it divides evenly.
pub fn steps_in(duration: f64, h: f64) -> Option<usize> {
    if !(h > 0.0) || !(duration > 0.0) || !duration.is_finite() {
        return None;
    }
    let ratio = duration / h;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * steps.max(1.0) {
        return None;
    }
    Some(steps as usize)
}

/// One classical RK4 step of size `h` from `(t, x)`.
pub fn rk4_step<F>(field: &mut F, t: f64, x: &Vector, h: f64) -> Vector
where
    F: FnMut(f64, &Vector) -> Vector,
{
    let half = 0.5 * h;
    let k1 = field(t, x);
    let k2 = field(t + half, &(x + &k1 * half));
    let k3 = field(t + half, &(x + &k2 * half));
    let k4 = field(t + h, &(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrate `field` over `grid` with fixed-step RK4. Returns one state per node,
/// with `trajectory[0] == init`.
pub fn integrate_rk4<F>(mut field: F, init: &Vector, grid: &Grid) -> Result<Vec<Vector>>
where
    F: FnMut(f64, &Vector) -> Vector,
{
    if !all_finite(init) {
        return Err(Error::NonFiniteState { index: 0 });
    }
    let mut out = Vec::with_capacity(grid.count());
    out.push(init.clone());
    for j in 0..grid.steps() {
        let next = rk4_step(&mut field, grid.time(j), &out[j], grid.h());
        if !all_finite(&next) {
            return Err(Error::NonFiniteState { index: j + 1 });
        }
        out.push(next);
    }
    Ok(out)
}

/// Composite trapezoidal rule on the grid.
pub fn trapezoid(samples: &[f64], grid: &Grid) -> Result<f64> {
    if samples.len() != grid.count() {
        return Err(Error::LengthMismatch { expected: grid.count(), got: samples.len() });
    }
    Ok(trapezoid_uniform(samples, grid.h()))
}

pub(crate) fn trapezoid_uniform(samples: &[f64], h: f64) -> f64 {
    match samples {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Running trapezoid integral: `out[j] = ∫_{t0}^{t_j}`, with `out[0] = 0`.
pub fn cumulative_trapezoid(samples: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for (j, &s) in samples.iter().enumerate() {
        if j > 0 {
            acc += 0.5 * h * (samples[j - 1] + s);
        }
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdSolution {
    pub x: Vector,
    pub smallest_pivot: f64,
}

/// Solve `q * x = rhs` for symmetric positive definite `q` by Cholesky.
///
/// Fails with `NotPositiveDefinite` when any pivot is at or below
/// `pivot_floor * trace(q) / n`.
pub fn spd_solve(q: &Matrix, rhs: &Vector, pivot_floor: f64) -> Result<SpdSolution> {
    let n = q.nrows();
    if q.ncols() != n {
        return Err(Error::DimensionMismatch(format!("Q is {}x{}", n, q.ncols())));
    }
    if rhs.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: rhs.len() });
    }
    let asym = relative_asymmetry(q);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let floor = pivot_floor * q.trace() / n as f64;
    let (l, smallest_pivot) = cholesky_lower(q);
    if !(smallest_pivot > floor) || l.is_none() {
        return Err(Error::NotPositiveDefinite { smallest_pivot });
    }
    let l = l.unwrap();

    let mut y = DVector::zeros(n);
    for i in 0..n {
        let s: f64 = (0..i).map(|j| l[(i, j)] * y[j]).sum();
        y[i] = (rhs[i] - s) / l[(i, i)];
    }
    let mut x = DVector::zeros(n);
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| l[(j, i)] * x[j]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    if !all_finite(&x) {
        return Err(Error::NotPositiveDefinite { smallest_pivot });
    }
    Ok(SpdSolution { x, smallest_pivot })
}

/// Cholesky factor plus the smallest pivot (`d_jj` before the square root).
/// The factor is `None` once a pivot is non-positive; the pivot scan still
/// reports that pivot.
pub fn cholesky_lower(q: &Matrix) -> (Option<Matrix>, f64) {
    let n = q.nrows();
    let mut l = DMatrix::zeros(n, n);
    let mut smallest = f64::INFINITY;
    for j in 0..n {
        let d = q[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        smallest = smallest.min(d);
        if !(d > 0.0) {
            return (None, smallest);
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            l[(i, j)] = (q[(i, j)] - s) / ljj;
        }
    }
    if n == 0 {
        smallest = 0.0;
    }
    (Some(l), smallest)
}

pub fn relative_asymmetry(q: &Matrix) -> f64 {
    let scale = q.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..q.nrows() {
        for j in i + 1..q.ncols() {
            worst = worst.max((q[(i, j)] - q[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Eigenvalues (ascending) and matching unit eigenvectors of a symmetric matrix.
pub fn symmetric_eigen(q: &Matrix) -> (Vec<f64>, Vec<Vector>) {
    let eig = SymmetricEigen::new(q.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (values, vectors)
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}
