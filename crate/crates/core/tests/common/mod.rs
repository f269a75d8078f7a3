#![allow(dead_code)]

use deadbeat::{make_lti, EstimateTrace, Matrix, SystemSpec, Trace, Vector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn random_vector(rng: &mut StdRng, len: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(len, |_, _| uniform(rng, lo, hi))
}

pub struct LtiInstance {
    pub a: Matrix,
    pub c: Matrix,
    pub x0: Vector,
    pub y0: Vector,
    pub spec: SystemSpec,
}

/// Kalman matrix of `y' = C^T x`, `x' = A x`: rows `C^T A^j`, `j < n`.
pub fn observability_matrix(a: &Matrix, c: &Matrix) -> Matrix {
    let (n, k) = c.shape();
    let mut out = Matrix::zeros(n * k, n);
    let mut block = c.transpose();
    for j in 0..n {
        out.view_mut((j * k, 0), (k, n)).copy_from(&block);
        block = &block * a;
    }
    out
}

/// Random `(A, C)` with a well-conditioned Kalman matrix; `b = 0`, `f = 0`.
pub fn random_observable_lti(rng: &mut StdRng, n: usize, k: usize) -> LtiInstance {
    loop {
        let a = Matrix::from_fn(n, n, |_, _| uniform(rng, -1.0, 1.0));
        let c = Matrix::from_fn(n, k, |_, _| uniform(rng, -1.0, 1.0));
        let sv = observability_matrix(&a, &c).singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if lo > 0.05 * hi {
            let x0 = random_vector(rng, n, -2.0, 2.0);
            let y0 = random_vector(rng, k, -1.0, 1.0);
            let spec = make_lti(a.clone(), Vector::zeros(n), c.clone(), Vector::zeros(k)).unwrap();
            return LtiInstance { a, c, x0, y0, spec };
        }
    }
}

/// `∫_0^t exp(A^T s) ds · C` from one exponential of the augmented matrix
/// `[[A^T, I], [0, 0]] t`.
pub fn lti_regressor(a: &Matrix, c: &Matrix, t: f64) -> Matrix {
    let n = a.nrows();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(a.transpose() * t));
    m.view_mut((0, n), (n, n)).copy_from(&(Matrix::identity(n, n) * t));
    let e = m.exp();
    e.view((0, n), (n, n)).into_owned() * c
}

/// Largest `max_i |z_i - x_i| / (1e-4 (1 + |x|))` over nodes from `from` on.
pub fn deadbeat_ratio(trace: &Trace, est: &EstimateTrace, from: usize) -> f64 {
    (from..est.len())
        .map(|j| (&est.z[j] - &trace.x_true[j]).amax() / (1e-4 * (1.0 + trace.x_true[j].norm())))
        .fold(0.0, f64::max)
}

pub fn rel_diff(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
