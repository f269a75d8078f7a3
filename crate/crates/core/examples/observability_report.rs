//! Gram spectrum, certificate and determinant test for an LTI system with
//! an observable and an unobservable output map.

use deadbeat::window::determinant_condition;
use deadbeat::{
    compute_window, gram, make_lti, observability_certificate, simulate_plant, Certificate, InputSignal, IoWindow,
    Matrix, SimConfig, Vector,
};

fn report(name: &str, c: Matrix) -> deadbeat::Result<()> {
    let a = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -1.0, -2.0, -0.5]);
    let spec = make_lti(a, Vector::zeros(3), c, Vector::zeros(1))?;
    let h = 1e-3;
    let cfg = SimConfig { t_end: 1.0, h, x0: Vector::from_row_slice(&[1.0, 0.0, -1.0]), y0: Vector::zeros(1) };
    let trace = simulate_plant(&spec, &InputSignal::none(), &cfg)?;
    let wc = compute_window(&spec, &IoWindow::new(h, trace.y_meas, trace.u)?)?;
    let gs = gram(&wc);
    println!("{name}");
    println!("  eigenvalues {:?}", gs.eigenvalues());
    println!("  determinant at t = 0, 0.5, 1: {:.6e}", determinant_condition(&wc, &[0, 500, 1000])?);
    match observability_certificate(&gs, 1e-8) {
        Certificate::StronglyObservableOnWindow { min_eigenvalue } => {
            println!("  strongly observable, min eigenvalue {min_eigenvalue:.3e}")
        }
        Certificate::Degenerate { null_direction, .. } => {
            println!("  degenerate along {:?}", null_direction.as_slice())
        }
    }
    Ok(())
}

fn main() -> deadbeat::Result<()> {
    report("output sees x1", Matrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]))?;
    report("output sees nothing", Matrix::zeros(3, 1))
}
