//! Concentration observer for the batch reactor from temperature alone, and
//! the stopping rule that maximizes the intermediate product.

use deadbeat::apps::reactor::{
    check_hypothesis, min_window_reactor, optimal_stop, reactor_gains, reactor_spec, temperature_grid, Hypothesis,
    HypothesisCheck, ReactorParams,
};
use deadbeat::{run_observer, simulate_plant, InputSignal, ObserverConfig, ObserverMode, SimConfig, Vector};

fn main() -> deadbeat::Result<()> {
    let p = ReactorParams::canonical();
    if let HypothesisCheck::Holds { margin } = check_hypothesis(&p, Hypothesis::A1, &temperature_grid(&p, 10_000)) {
        println!("cooling-slope margin {margin:.3} K/s");
    }
    let r = min_window_reactor(&p)?;
    let steps = 2000;
    let h = r / steps as f64;
    println!("window r = {r} s, h = {h}");

    let spec = reactor_spec(&p)?;
    let x0 = Vector::from_row_slice(&[0.9, 0.1]);
    let cfg = SimConfig { t_end: 3.0 * r, h, x0, y0: Vector::from_element(1, p.ts) };
    let trace = simulate_plant(&spec, &InputSignal::none(), &cfg)?;

    let observer = ObserverConfig::new(r, h, ObserverMode::ReducedOrder);
    let z0 = Vector::from_row_slice(&[0.5, 12.5]);
    let est = run_observer(&spec, &observer, &trace, &z0, &Vector::zeros(0))?;

    let temps: Vec<f64> = trace.y_meas[..=steps].iter().map(|y| y[0]).collect();
    let closed = reactor_gains(&temps, h, &p)?.reset_value();
    println!("closed-form reset  ({:.8}, {:.8})", closed[0], closed[1]);
    println!("observer at t = r  ({:.8}, {:.8})", est.z[steps][0], est.z[steps][1]);
    println!("true state         ({:.8}, {:.8})", trace.x_true[steps][0], trace.x_true[steps][1]);

    let stop = (steps..est.len()).find(|&j| optimal_stop(&est.z[j], trace.y_meas[j][0], &p) <= 0.0);
    let peak = (0..trace.len()).max_by(|&a, &b| trace.x_true[a][1].total_cmp(&trace.x_true[b][1])).unwrap();
    match stop {
        Some(j) => println!("stop signal at t = {:.4} s, true c_B peak at t = {:.4} s", trace.t[j], trace.t[peak]),
        None => println!("no stop signal within the run; c_B peaks at t = {:.4} s", trace.t[peak]),
    }
    Ok(())
}
