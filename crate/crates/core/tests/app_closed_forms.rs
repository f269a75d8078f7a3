mod common;

use deadbeat::apps::frequency::{estimate_frequency, freq_closed_form, freq_spec, omega_hat, FrequencyScenario};
use deadbeat::apps::reactor::{reactor_gains, reactor_spec, reactor_transition, ReactorParams};
use deadbeat::apps::scalar::{scalar_observer_p, ScalarPolynomials};
use deadbeat::plant::sinusoid_initial_state;
use deadbeat::{compute_window, simulate_plant, InputSignal, IoWindow, SimConfig, Trace, Vector};
use proptest::prelude::*;

use common::rel_diff;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn window_of(trace: &Trace) -> IoWindow {
    IoWindow::new(trace.h, trace.y_meas.clone(), trace.u.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frequency_closed_form_recovers_clean_sinusoid(
        amplitude in 0.5f64..3.0,
        omega in 1.0f64..6.0,
        phase in 0.0f64..std::f64::consts::TAU,
        window in 1.0f64..2.0,
    ) {
        let h = window / 2000.0;
        let (x0, y0) = sinusoid_initial_state(amplitude, omega, phase);
        let trace = simulate_plant(&freq_spec(false), &InputSignal::none(), &SimConfig { t_end: window, h, x0, y0 })
            .unwrap();
        let (z1, z2) = freq_closed_form(&window_of(&trace)).unwrap();
        let truth = trace.x_true.last().unwrap();
        prop_assert!(rel_diff(&v(&[z1, z2]), truth) <= 1e-5);
        prop_assert!((omega_hat(z2).unwrap() - omega).abs() <= 1e-5 * omega);
    }

    #[test]
    fn clean_scenario_estimate_matches_true_frequency(omega in 1.0f64..6.0, phase in 0.0f64..std::f64::consts::TAU) {
        let scn = FrequencyScenario { amplitude: 2.0, omega, phase, noise_amplitude: 0.0, noise_frequency: 1.0, window: 1.0 };
        let est = estimate_frequency(&scn, 5e-4).unwrap();
        prop_assert!(est.rel_error <= 1e-5);
        prop_assert!(((est.omega_hat - omega).abs() - est.rel_error * omega).abs() <= 1e-12 * omega);
    }

    #[test]
    fn scalar_quotient_matches_plant(
        a0 in -1.0f64..0.5,
        a1 in -0.2f64..0.2,
        f0 in -1.0f64..1.0,
        c0 in 0.5f64..2.0,
        c1 in -0.1f64..0.1,
        x0 in -2.0f64..2.0,
        y0 in -1.0f64..1.0,
    ) {
        let sys = ScalarPolynomials { a: vec![a0, a1], f: vec![f0], c: vec![c0, c1], positive_state: false }
            .system()
            .unwrap();
        let trace = simulate_plant(&sys.spec(), &InputSignal::none(), &SimConfig { t_end: 1.0, h: 5e-4, x0: v(&[x0]), y0: v(&[y0]) })
            .unwrap();
        let p = scalar_observer_p(&window_of(&trace), &sys).unwrap();
        let truth = trace.x_true.last().unwrap()[0];
        prop_assert!((p - truth).abs() <= 1e-6 * (1.0 + truth.abs()));
    }

    #[test]
    fn reactor_reset_converges_at_second_order(
        ca in 0.2f64..0.95,
        cb in 0.05f64..2.0,
        temp in 295.0f64..330.0,
    ) {
        let p = ReactorParams::canonical();
        let spec = reactor_spec(&p).unwrap();
        let error = |steps: usize| {
            let h = 5.2 / steps as f64;
            let cfg = SimConfig { t_end: 5.2, h, x0: v(&[ca, cb]), y0: v(&[temp]) };
            let trace = simulate_plant(&spec, &InputSignal::none(), &cfg).unwrap();
            let temps: Vec<f64> = trace.y_meas.iter().map(|y| y[0]).collect();
            let truth = trace.x_true.last().unwrap();
            (reactor_gains(&temps, h, &p).unwrap().reset_value() - truth).amax() / (1.0 + truth.norm())
        };
        let (coarse, fine) = (error(8000), error(16000));
        prop_assert!(fine <= 1e-4);
        prop_assert!((3.0..=5.0).contains(&(coarse / fine)), "ratio {}", coarse / fine);
    }

    #[test]
    fn reactor_transition_formula_matches_integrated_transition(
        ca in 0.2f64..0.95,
        cb in 0.05f64..2.0,
        temp in 295.0f64..330.0,
    ) {
        let p = ReactorParams::canonical();
        let spec = reactor_spec(&p).unwrap();
        let h = 1e-3;
        let trace = simulate_plant(&spec, &InputSignal::none(), &SimConfig { t_end: 2.0, h, x0: v(&[ca, cb]), y0: v(&[temp]) })
            .unwrap();
        let temps: Vec<f64> = trace.y_meas.iter().map(|y| y[0]).collect();
        let explicit = reactor_transition(&temps, h, &p);
        let wc = compute_window(&spec, &window_of(&trace)).unwrap();
        for j in [500, 1000, 2000] {
            prop_assert!((&explicit[j] - &wc.phi[j]).amax() <= 1e-6, "node {}", j);
        }
    }
}
