//! Reduced-order observer on `x' = 0, y' = x`: the estimate is exact after
//! the first window and stays exact.

use deadbeat::apps::scalar::ScalarSystem;
use deadbeat::{run_observer, simulate_plant, InputSignal, ObserverConfig, ObserverMode, SimConfig, Vector};

fn main() -> deadbeat::Result<()> {
    let spec = ScalarSystem::integrator().spec();
    let h = 1e-3;
    let cfg = SimConfig { t_end: 3.0, h, x0: Vector::from_element(1, 2.0), y0: Vector::zeros(1) };
    let trace = simulate_plant(&spec, &InputSignal::none(), &cfg)?;

    let observer = ObserverConfig::new(1.0, h, ObserverMode::ReducedOrder);
    let est = run_observer(&spec, &observer, &trace, &Vector::zeros(1), &Vector::zeros(0))?;
    for j in (0..est.len()).step_by(250) {
        let mark = if est.reset[j] { "  <- reset" } else { "" };
        println!("t = {:5.3}  z = {:+.12}  x = {:+.12}{mark}", est.t[j], est.z[j][0], trace.x_true[j][0]);
    }
    Ok(())
}
