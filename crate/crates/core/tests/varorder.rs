use fractance::mlfit::{model_eval, FitError};
use fractance::network::{make_alternating_ladder, make_nested_ladder};
use fractance::timesim::{simulate_discharge, TimeSeries};
use fractance::varorder::{default_window_schedule, estimate_variable_order, VarOrderError, VarOrderOptions, VarOrderProfile};

fn exponential(rate: f64, t_end: f64, dt: f64) -> TimeSeries<f64> {
    let n = (t_end / dt).round() as usize + 1;
    TimeSeries::new(0.0, dt, (0..n).map(|k| 2.0 * (-rate * k as f64 * dt).exp()).collect()).unwrap()
}

fn dl130_profile() -> VarOrderProfile<f64> {
    let spec = make_alternating_ladder(2000.0, 8200.0, 470e-9, 130).unwrap();
    let ts = simulate_discharge(&spec, 1e6, 1.0, 100.0, 0.01).unwrap();
    estimate_variable_order(&ts, &default_window_schedule(), &VarOrderOptions::default()).unwrap()
}

fn check_sub_unity_and_monotone(p: &VarOrderProfile<f64>) {
    assert!(p.alphas.iter().all(|&a| a > 0.0 && a < 1.0), "{:?}", p.alphas);
    for i in 1..p.len() {
        if p.window_ends[i - 1] >= 10.0 {
            assert!(p.alphas[i] >= p.alphas[i - 1] - 0.01, "drop after {} s", p.window_ends[i - 1]);
        }
    }
}

#[test]
fn default_schedule_matches_table_rows() {
    let s: Vec<f64> = default_window_schedule();
    assert_eq!(&s[..5], &[1.0, 2.0, 3.0, 4.0, 5.0]);
    assert_eq!(s.len(), 24);
    assert_eq!(*s.last().unwrap(), 100.0);
    assert!(s.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn schedule_errors() {
    let ts = exponential(0.5, 10.0, 0.01);
    let opts = VarOrderOptions::default();
    assert_eq!(estimate_variable_order(&ts, &[1.0, 3.0, 2.0], &opts), Err(VarOrderError::Schedule));
    assert_eq!(estimate_variable_order(&ts, &[], &opts), Err(VarOrderError::Schedule));
    assert!(matches!(estimate_variable_order(&ts, &[5.0, 20.0], &opts), Err(VarOrderError::Coverage { .. })));
    assert!(matches!(
        estimate_variable_order(&ts, &[0.05, 1.0], &opts),
        Err(VarOrderError::Fit(FitError::Window { have: 6, .. }))
    ));
}

#[test]
fn exponential_keeps_unit_order() {
    let ts = exponential(0.3, 100.0, 0.01);
    for warm in [true, false] {
        let opts = VarOrderOptions {
            warm_start: warm,
            ..Default::default()
        };
        let p = estimate_variable_order(&ts, &default_window_schedule(), &opts).unwrap();
        assert_eq!(p.len(), 24);
        for (t, a) in p.window_ends.iter().zip(&p.alphas) {
            assert!((a - 1.0).abs() < 0.02, "α({t}) = {a}");
        }
        assert!(p.converged_flags.iter().all(|&c| c));
    }
}

#[test]
fn constant_order_survives_growing_windows() {
    let dt = 0.01;
    let t: Vec<f64> = (0..=3000).map(|k| k as f64 * dt).collect();
    let ts = TimeSeries::new(0.0, dt, model_eval(0.6, -0.4, 1.0, &t).unwrap()).unwrap();
    let p = estimate_variable_order(&ts, &[1.0, 2.0, 5.0, 10.0, 30.0], &VarOrderOptions::default()).unwrap();
    assert!(p.alphas.iter().all(|a| (a - 0.6).abs() < 1e-3), "{:?}", p.alphas);
    assert!(p.rates.iter().all(|a| (a + 0.4).abs() < 1e-3));
}

#[test]
fn runs_are_bit_identical() {
    let spec = make_alternating_ladder(2000.0, 8200.0, 470e-9, 30).unwrap();
    let ts = simulate_discharge(&spec, 1e6, 1.0, 20.0, 0.01).unwrap();
    let schedule = [1.0, 2.0, 5.0, 10.0, 20.0];
    for warm in [true, false] {
        let opts = VarOrderOptions {
            warm_start: warm,
            ..Default::default()
        };
        let a = estimate_variable_order(&ts, &schedule, &opts).unwrap();
        let b = estimate_variable_order(&ts, &schedule, &opts).unwrap();
        assert_eq!(a, b);
        let bits = |p: &VarOrderProfile<f64>| p.alphas.iter().map(|a| a.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}

#[test]
fn profile_json_round_trip() {
    let ts = exponential(1.0, 5.0, 0.01);
    let p = estimate_variable_order(&ts, &[1.0, 5.0], &VarOrderOptions::default()).unwrap();
    let text = serde_json::to_string(&p).unwrap();
    let back: VarOrderProfile<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, p);
    assert_eq!(p.alpha_at(5.0), Some(p.alphas[1]));
    assert_eq!(p.alpha_at(4.0), None);
}

#[test]
fn dl130_discharge_profile() {
    let p = dl130_profile();
    let a1 = p.alpha_at(1.0).unwrap();
    let a100 = p.alpha_at(100.0).unwrap();
    assert!((a1 - 0.5167).abs() <= 0.10, "α(1) = {a1}");
    assert!((a100 - 0.9406).abs() <= 0.05, "α(100) = {a100}");
    check_sub_unity_and_monotone(&p);
}

#[test]
fn dl060_discharge_profile() {
    let spec = make_alternating_ladder(2000.0, 8200.0, 470e-9, 60).unwrap();
    let ts = simulate_discharge(&spec, 1e6, 1.0, 100.0, 0.01).unwrap();
    let p = estimate_variable_order(&ts, &default_window_schedule(), &VarOrderOptions::default()).unwrap();
    check_sub_unity_and_monotone(&p);
}

#[test]
fn nested_discharge_approaches_unit_order() {
    let sub = make_alternating_ladder(2000.0_f64, 8200.0, 470e-9, 14).unwrap();
    let spec = make_nested_ladder(2000.0, 8200.0, &sub, 14).unwrap();
    let ts = simulate_discharge(&spec, 1e6, 1.0, 100.0, 0.01).unwrap();
    let p = estimate_variable_order(&ts, &default_window_schedule(), &VarOrderOptions::default()).unwrap();
    let a100: f64 = p.alpha_at(100.0).unwrap();
    assert!(a100 >= 0.95 && (a100 - 0.9915).abs() <= 0.05, "α(100) = {a100}");
    check_sub_unity_and_monotone(&p);
}
