//! Two decoupled modes seen through one output: an input that makes a whole
//! line of initial states produce the same output.

use deadbeat::numerics::Grid;
use deadbeat::window::{indistinguishing_input, IndistinguishableSystem};
use deadbeat::{compute_window, gram, observability_certificate, simulate_plant, IoWindow, SimConfig, Vector};

fn main() -> deadbeat::Result<()> {
    let sys = IndistinguishableSystem::exponential_ratio(-1.0, -0.5, 0.5);
    let spec = sys.spec();
    let (x0, y0) = (Vector::from_row_slice(&[1.0, 0.5]), 0.0);
    let h = 1e-3;
    let grid = Grid::spanning(0.0, 1.0, h)?;
    let input = indistinguishing_input(&sys, &x0, y0, &grid)?.signal();

    let run =
        |x: Vector| simulate_plant(&spec, &input, &SimConfig { t_end: 1.0, h, x0: x, y0: Vector::from_element(1, y0) });
    let first = run(x0.clone())?;
    for xi1 in [-1.0, 0.0, 3.0] {
        let partner = sys.partner_state(&x0, y0, xi1);
        let other = run(partner.clone())?;
        let gap = first.y_true.iter().zip(&other.y_true).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        println!("partner {:?}: max output gap {gap:.3e}", partner.as_slice());
    }

    let gs = gram(&compute_window(&spec, &IoWindow::new(h, first.y_meas, first.u)?)?);
    println!("Gram eigenvalues {:?}", gs.eigenvalues());
    let cert = observability_certificate(&gs, 1e-8);
    println!("observable: {}, min eigenvalue {:.3e}", cert.is_observable(), cert.min_eigenvalue());
    Ok(())
}
