use biphoton::calibration::{
    chi2_effective, power_fit, pump_params, pump_rates, Crystal, PumpFitResult,
};
use biphoton::simulator::poisson;
use biphoton::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn pump_parameters_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..500 {
        let truth = PumpFitResult {
            d_background: rng.random_range(0.0..2.0),
            n0: rng.random_range(10.0..1000.0),
            theta_p: rng.random_range(5.0..85.0),
            phi_m: rng.random_range(1.0..179.0),
        };
        let [n00, n9090, n4545, n090, n900] = pump_rates(&truth);
        let fit = pump_params(n00, n9090, n4545, n090, n900).unwrap();
        assert!((fit.d_background - truth.d_background).abs() < 1e-9);
        assert!((fit.n0 - truth.n0).abs() < 1e-9 * truth.n0);
        assert!((fit.theta_p - truth.theta_p).abs() < 1e-7);
        assert!((fit.phi_m - truth.phi_m).abs() < 1e-6);
    }
}

#[test]
fn impossible_phase_names_the_relation() {
    match pump_params(40.0, 40.0, 60.0, 0.2, 0.2) {
        Err(Error::Domain(msg)) => assert!(msg.contains("cos phi_m"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn simulated_power_scan_recovers_slope() {
    let (slope, intercept, t) = (2.4, 0.5, 10.0);
    let mut covered = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<(f64, f64)> = (1..=12)
            .map(|i| {
                let p = 5.0 * i as f64;
                (p, poisson(&mut rng, (slope * p + intercept) * t) / t)
            })
            .collect();
        let fit = power_fit(&points).unwrap();
        assert!((fit.slope_alpha - slope).abs() < 3.0 * fit.slope_stderr + 0.05);
        if (fit.slope_alpha - slope).abs() < 3.0 * fit.slope_stderr {
            covered += 1;
        }
    }
    assert!(covered >= 95, "{covered}");
}

#[test]
fn susceptibility_round_trip() {
    let crystal = Crystal {
        length: 1e-3,
        area: 1e-8,
        n_pump: 1.66,
        n_spdc: 1.65,
        omega_pump: 2.0 * std::f64::consts::PI * 299_792_458.0 / 405e-9,
        duty: 1.0,
    };
    for chi in [1e-13, 2e-12, 5e-12] {
        let slope = crystal.predicted_slope(chi).unwrap();
        let back = chi2_effective(slope, &crystal).unwrap();
        assert!((back / chi - 1.0).abs() < 1e-12);
    }
}
