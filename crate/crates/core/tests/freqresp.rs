use fractance::freqresp::{
    band_decades, bode_sweep, constant_phase_band, continued_fraction, ideal_fractance, impedance,
    infinite_ladder_impedance, log_grid, magnitude_slope, shunt_admittances, sweep, FreqError, FrequencyResponse,
    ResponseKind,
};
use fractance::network::{make_alternating_ladder, make_enhanced_ladder, make_nested_ladder, LadderSpec, ShuntElement};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use proptest::prelude::*;

fn j(w: f64) -> Complex<f64> {
    Complex::new(0.0, w)
}

fn close(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

/// Terminal impedance by solving the complex nodal equations of a plain
/// ladder with a unit current injected at the terminal.
fn nodal_impedance(spec: &LadderSpec<f64>, s: Complex<f64>) -> Complex<f64> {
    let n = spec.steps.len();
    let m = n + 1;
    let mut y = DMatrix::<Complex<f64>>::zeros(m, m);
    for (k, step) in spec.steps.iter().enumerate() {
        let g = Complex::new(1.0 / step.r, 0.0);
        y[(k, k)] += g;
        y[(k + 1, k + 1)] += g;
        y[(k, k + 1)] -= g;
        y[(k + 1, k)] -= g;
        if let ShuntElement::Capacitor(c) = step.shunt {
            y[(k + 1, k + 1)] += s * c;
        }
    }
    let mut rhs = DVector::<Complex<f64>>::zeros(m);
    rhs[0] = Complex::new(1.0, 0.0);
    y.lu().solve(&rhs).unwrap()[0]
}

#[test]
fn one_and_two_step_ladders() {
    let one = make_alternating_ladder(1.0, 1.0, 1.0, 1).unwrap();
    assert!(close(impedance(&one, j(1.0)).unwrap(), Complex::new(1.0, -1.0), 1e-15));
    let two = make_alternating_ladder(1.0, 1.0, 1.0, 2).unwrap();
    let z = impedance(&two, j(1.0)).unwrap();
    assert!(close(z, Complex::new(1.2, -0.6), 1e-15));
    assert!(close(z, nodal_impedance(&two, j(1.0)), 1e-14));
}

#[test]
fn continued_fraction_matches_nodal_solution() {
    let l = make_enhanced_ladder(2320.0, 8200.0, 330e-9, 220e-9, 34).unwrap();
    for &w in &[1.0, 37.0, 1e3, 1e5] {
        let a = impedance(&l, j(w)).unwrap();
        let b = nodal_impedance(&l, j(w));
        assert!(close(a, b, 1e-10), "w={w}: {a} vs {b}");
    }
}

#[test]
fn uniform_ladder_tends_to_semi_infinite_line() {
    // the n-step ladder is the fixed-point iteration of the infinite one
    let l = make_alternating_ladder(1.0, 1.0, 1.0, 200).unwrap();
    for &w in &[0.01, 0.1, 1.0, 10.0] {
        let a = impedance(&l, j(w)).unwrap();
        let b = infinite_ladder_impedance(1.0, 1.0, j(w));
        assert!(close(a, b, 1e-6), "w={w}: {a} vs {b}");
    }
    // Z(j) of the semi-infinite ladder, r/2 + sqrt(r²/4 + r/(jωc))
    let z = infinite_ladder_impedance(1.0, 1.0, j(1.0));
    assert!((z.re - 1.300_242_590_220_12).abs() < 1e-12 && (z.im + 0.624_810_533_843_827).abs() < 1e-12, "{z}");
}

#[test]
fn ideal_fractance_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(close(ideal_fractance(0.5, 1.0, j(1.0)).unwrap(), Complex::new(h, -h), 1e-15));
    let c = 2e-6;
    assert!(close(ideal_fractance(1.0, c, j(50.0)).unwrap(), Complex::new(0.0, -1.0 / (50.0 * c)), 1e-15));
    let q = ideal_fractance(0.25, 1.0, j(1.0)).unwrap();
    assert!(close(q, Complex::new(0.923_879_532_511_286_7, -0.382_683_432_365_089_8), 1e-15));
    assert_eq!(ideal_fractance(1.5, 1.0, j(1.0)), Err(FreqError::IdealParameters));
    assert_eq!(ideal_fractance(0.5, 1.0, Complex::new(0.0, 0.0)), Err(FreqError::ZeroFrequency));
}

#[test]
fn magnitude_slope_of_ideal_element() {
    let omega = log_grid(0.01, 100.0, 10).unwrap();
    let resp = FrequencyResponse {
        value: omega.iter().map(|&w| ideal_fractance(0.5, 1.0, j(w)).unwrap()).collect(),
        omega,
        kind: ResponseKind::Impedance,
    };
    assert!((magnitude_slope(&resp, 0.1, 1.0).unwrap() + 10.0).abs() < 1e-10);
    let band = constant_phase_band(&resp, -45.0, 1.0).unwrap().unwrap();
    assert_eq!(band, (0.01, 100.0));
}

#[test]
fn uniform_ladder_slope_is_near_half_order() {
    let l = make_alternating_ladder(1.0, 1.0, 1.0, 200).unwrap();
    let resp = bode_sweep(&l, 1e-2, 1e2, 20, 1.0).unwrap();
    // the R/2 offset of the discrete ladder flattens the magnitude near ω = 1
    let slope = magnitude_slope(&resp, 1e-2, 1e-1).unwrap();
    assert!((-10.5..=-8.0).contains(&slope), "slope {slope}");
}

#[test]
fn single_point_sweep() {
    let l = make_alternating_ladder(3.0, 12.0, 0.1, 7).unwrap();
    let resp = bode_sweep(&l, 2.0, 2.0, 10, 0.5).unwrap();
    assert_eq!(resp.len(), 1);
    assert_eq!(resp.value[0], impedance(&l, j(2.0)).unwrap() * 0.5);
    assert_eq!(resp.kind, ResponseKind::Gain);
}

#[test]
fn sweep_argument_errors() {
    let l = make_alternating_ladder(1.0, 1.0, 1.0, 1).unwrap();
    assert!(matches!(bode_sweep(&l, 0.0, 1.0, 10, 1.0), Err(FreqError::Range(..))));
    assert!(matches!(bode_sweep(&l, 2.0, 1.0, 10, 1.0), Err(FreqError::Range(..))));
    assert_eq!(bode_sweep(&l, 1.0, 10.0, 3, 1.0).unwrap_err(), FreqError::Density(3));
}

#[test]
fn one_step_band_is_centred_on_corner() {
    let (r, c) = (10.0, 1e-3);
    let l = make_alternating_ladder(r, r, c, 1).unwrap();
    let resp = bode_sweep(&l, 1.0, 1e4, 200, 1.0).unwrap();
    let (lo, hi) = constant_phase_band(&resp, -45.0, 1.0).unwrap().unwrap();
    let corner = 1.0 / (r * c);
    assert!(lo < corner && corner < hi);
    assert!(band_decades(Some((lo, hi))) < 0.1);
}

#[test]
fn empty_response_and_missing_band() {
    let empty = FrequencyResponse::<f64> {
        omega: vec![],
        value: vec![],
        kind: ResponseKind::Impedance,
    };
    assert_eq!(constant_phase_band(&empty, -45.0, 1.0), Err(FreqError::EmptyResponse));
    let l = make_alternating_ladder(1.0, 1.0, 1.0, 1).unwrap();
    let resp = bode_sweep(&l, 1e3, 1e4, 10, 1.0).unwrap();
    assert_eq!(constant_phase_band(&resp, -45.0, 1.0), Ok(None));
    assert_eq!(band_decades::<f64>(None), 0.0);
}

#[test]
fn nested_ladder_two_code_paths() {
    let sub = make_alternating_ladder(2000.0, 8200.0, 470e-9, 14).unwrap();
    let nl = make_nested_ladder(2000.0, 8200.0, &sub, 14).unwrap();
    let r: Vec<f64> = nl.steps.iter().map(|s| s.r).collect();
    for &w in &[0.1, 3.0, 100.0, 1e4, 1e6] {
        let s = j(w);
        let direct = impedance(&nl, s).unwrap();
        let y_sub = impedance(&sub, s).unwrap().inv();
        let substituted = continued_fraction(&r, &vec![y_sub; r.len()]).unwrap();
        assert!(close(direct, substituted, 1e-12), "w={w}");
        let via_admittances = continued_fraction(&r, &shunt_admittances(&nl, s).unwrap()).unwrap();
        assert!(close(direct, via_admittances, 1e-12));
    }
}

#[test]
fn sweep_is_independent_of_evaluation_order() {
    let l = make_enhanced_ladder(2320.0, 8200.0, 330e-9, 220e-9, 34).unwrap();
    let grid = log_grid(0.1, 1e5, 25).unwrap();
    let forward = sweep(&l, &grid, 1.0).unwrap();
    for (w, z) in grid.iter().zip(&forward.value).rev() {
        assert_eq!(*z, impedance(&l, j(*w)).unwrap());
    }
}

#[test]
fn deviation_from_half_order_shrinks_with_length() {
    // an n-step ladder with R = C = 1 spans roughly [1/n², 1]; its log-centre is 1/n
    let mut prev = f64::INFINITY;
    for n in [25, 50, 100, 200, 400, 800] {
        let mid = 1.0 / n as f64;
        let ideal = (1.0f64 / mid).sqrt();
        let l = make_alternating_ladder(1.0, 1.0, 1.0, n).unwrap();
        let dev = (impedance(&l, j(mid)).unwrap().norm() - ideal).abs() / ideal;
        assert!(dev <= prev, "n={n}: {dev} > {prev}");
        prev = dev;
    }
}

/// Terminal resistance with every capacitor replaced by a short.
fn shorted(spec: &LadderSpec<f64>) -> f64 {
    let mut z: Option<f64> = None;
    for step in spec.steps.iter().rev() {
        let shunt = match &step.shunt {
            ShuntElement::Capacitor(_) => 0.0,
            ShuntElement::SubLadder(sub) => shorted(sub),
        };
        let par = match z {
            Some(z) if shunt > 0.0 => shunt * z / (shunt + z),
            Some(_) => 0.0,
            None => shunt,
        };
        z = Some(step.r + par);
    }
    z.unwrap()
}

fn extremes(spec: &LadderSpec<f64>) -> (f64, f64) {
    spec.steps.iter().fold((f64::INFINITY, f64::INFINITY), |(r, c), s| {
        let (rs, cs) = match &s.shunt {
            ShuntElement::Capacitor(c) => (f64::INFINITY, *c),
            ShuntElement::SubLadder(sub) => extremes(sub),
        };
        (r.min(s.r).min(rs), c.min(cs))
    })
}

fn arb_spec() -> impl Strategy<Value = LadderSpec<f64>> {
    let leaf = (1e-2f64..1e5, 1e-2f64..1e5, 1e-9f64..1e-1, 1usize..30)
        .prop_map(|(r1, r2, c, n)| make_alternating_ladder(r1, r2, c, n).unwrap());
    (leaf, 1e-2f64..1e5, 1e-2f64..1e5, 0usize..5).prop_map(|(sub, r1, r2, outer)| {
        if outer == 0 {
            sub
        } else {
            make_nested_ladder(r1, r2, &sub, outer).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passive_with_phase_in_fourth_quadrant(spec in arb_spec(), lw in -6.0f64..8.0) {
        let z = impedance(&spec, j(10f64.powf(lw))).unwrap();
        prop_assert!(z.re > 0.0);
        prop_assert!(z.im < 0.0);
    }

    #[test]
    fn high_frequency_limit_is_first_resistor(spec in arb_spec()) {
        let r1 = spec.first_resistance().unwrap();
        let w = 1e9 / (r1 * spec.total_capacitance());
        let z = impedance(&spec, j(w)).unwrap();
        match spec.steps[0].shunt {
            ShuntElement::Capacitor(_) => prop_assert!((z - r1).norm() <= 0.01 * r1),
            // a sub-ladder shunt tends to its own resistive network instead
            ShuntElement::SubLadder(_) => {
                let (r_min, c_min) = extremes(&spec);
                let z = impedance(&spec, j(1e9 / (r_min * c_min))).unwrap();
                let limit = shorted(&spec);
                prop_assert!((z - limit).norm() <= 0.01 * limit, "{} vs {}", z, limit);
            }
        }
    }

    #[test]
    fn low_frequency_limit_is_total_capacitance(spec in arb_spec()) {
        // far below the slowest time constant the ladder is one big capacitor
        let r_total: f64 = 1e3 * spec.steps.iter().map(|s| s.r).sum::<f64>().max(1e5);
        let w = 1e-3 / (r_total * spec.total_capacitance());
        let z = impedance(&spec, j(w)).unwrap();
        prop_assert!((z.arg().to_degrees() + 90.0).abs() < 1.0);
        let cap = Complex::new(0.0, -1.0 / (w * spec.total_capacitance()));
        prop_assert!((z.im - cap.im).abs() <= 0.01 * cap.im.abs());
    }
}
