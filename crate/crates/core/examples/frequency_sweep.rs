//! Frequency of a noisy sinusoid from a single window, swept over the phase
//! and over the window length.

use deadbeat::apps::frequency::{horizon_sweep, phase_grid, phase_sweep, FrequencyScenario, DEFAULT_PHASE_POINTS};

fn main() -> deadbeat::Result<()> {
    for f in [10.0, 100.0, 1000.0] {
        let scn = FrequencyScenario::noisy_baseline(f);
        let table = phase_sweep(&scn, &phase_grid(DEFAULT_PHASE_POINTS), scn.default_step())?;
        println!("noise f = {f:6}: max relative error {:.4}%", 100.0 * table.max_rel_error());
    }

    let scn = FrequencyScenario { phase: 1.9, ..FrequencyScenario::noisy_baseline(10.0) };
    let windows: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    for row in horizon_sweep(&scn, &windows, 5e-4)?.rows {
        println!("r = {:3.1} s: omega_hat = {:.6}, error {:.4}%", row.value, row.omega_hat, 100.0 * row.rel_error);
    }
    Ok(())
}
