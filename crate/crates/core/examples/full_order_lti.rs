//! Full-order observer on a damped oscillator: the output copy `w` jumps to
//! the measurement at every reset along with the state estimate.

use deadbeat::{
    make_lti, run_observer, simulate_plant, InputSignal, Matrix, ObserverConfig, ObserverMode, SimConfig, Vector,
};

fn main() -> deadbeat::Result<()> {
    let spec = make_lti(
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -0.3]),
        Vector::zeros(2),
        Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
        Vector::zeros(1),
    )?;
    let h = 1e-3;
    let cfg = SimConfig { t_end: 4.0, h, x0: Vector::from_row_slice(&[1.0, -0.5]), y0: Vector::from_element(1, 0.2) };
    let trace = simulate_plant(&spec, &InputSignal::none(), &cfg)?;
    let observer = ObserverConfig::new(1.0, h, ObserverMode::FullOrder);
    let est = run_observer(&spec, &observer, &trace, &Vector::zeros(2), &Vector::zeros(1))?;
    for j in (0..est.len()).step_by(500) {
        let err = (&est.z[j] - &trace.x_true[j]).amax();
        let out_err = (est.w[j][0] - trace.y_true[j][0]).abs();
        println!("t = {:4.2}  |z - x| = {err:.3e}  |w - y| = {out_err:.3e}", est.t[j]);
    }
    Ok(())
}
