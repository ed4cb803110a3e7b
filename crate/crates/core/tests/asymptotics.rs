use std::f64::consts::PI;

use pmcurve::asymptotics::{
    check_convergence_bound, check_expansion_scaling, check_positivity, fg_from_curve, period_diagnostics,
    sample_monotonicity,
};
use pmcurve::cli::{positivity_configs, run_family};
use pmcurve::{EtaAccumulator, HField, SolverConfig, SolverError};

fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn eta_integrates_polynomial_h() {
    let acc = EtaAccumulator::new(HField::polynomial(vec![1.0, 0.0, 1.0]), 4);
    for s in [-2.7, -0.3, 0.0, 0.125, 1.9, 5.0] {
        let want = 3.0 * (s + s * s * s / 3.0);
        assert!((acc.eta(s) - want).abs() < 1e-12 * (1.0 + want.abs()), "s = {s}");
    }
}

#[test]
fn limit_curve_of_constant_h_is_a_circle() {
    for (n, h) in [(3u32, 1.0), (4, 0.5), (6, 2.0)] {
        let w = (n - 1) as f64 * h;
        let acc = EtaAccumulator::new(HField::constant(h), n);
        for s in [-3.0, -0.4, 0.9, 2.2, 7.5] {
            let (x, y) = acc.gamma_infinity(s);
            assert!((x - (w * s).sin() / w).abs() < 1e-12);
            assert!((y - ((w * s).cos() - 1.0) / w).abs() < 1e-12);
            let fg = acc.fg_infinity(s);
            assert!((fg.f * fg.f + fg.g * fg.g - 1.0).abs() < 1e-12);
        }
    }
}

/// `(F_c - partial sum up to k-1) c^k`, Richardson-extrapolated in `c`.
fn observed_coefficient(acc: &EtaAccumulator, h: &HField, n: u32, k: usize, s_points: &[f64], c: f64) -> Vec<(f64, f64)> {
    let family = run_family(h, n, &[c, 2.0 * c], (-2.0, 2.0), 0.05).unwrap();
    s_points
        .iter()
        .map(|&s| {
            let d = |c: f64, curve| {
                let fg = fg_from_curve(curve, c, s).unwrap();
                let base = if k == 0 { pmcurve::FGPair::new(0.0, 0.0) } else { acc.expansion(k - 1, 1.0 / c, s).unwrap() };
                let p = c.powi(k as i32);
                ((fg.f - base.f) * p, (fg.g - base.g) * p)
            };
            let (a, b) = (d(c, &family[0].1), d(2.0 * c, &family[1].1));
            (2.0 * b.0 - a.0, 2.0 * b.1 - a.1)
        })
        .collect()
}

#[test]
fn first_order_coefficient_matches_extrapolated_curves() {
    let s_points = [-1.5, -0.5, 0.75, 1.5];
    for (n, h) in [(4u32, HField::constant(1.0)), (5, HField::polynomial(vec![0.8, 0.1, 0.2]))] {
        let acc = EtaAccumulator::new(h.clone(), n);
        let seen = observed_coefficient(&acc, &h, n, 1, &s_points, 64.0);
        for (s, (f, g)) in s_points.iter().zip(seen) {
            let want = acc.expansion_coeff(1, *s).unwrap();
            assert!((f - want.f).abs() < 2e-3 && (g - want.g).abs() < 2e-3, "n={n} s={s}: ({f}, {g}) vs {want:?}");
        }
    }
}

#[test]
fn second_order_coefficient_matches_extrapolated_curves() {
    let s_points = [-1.5, -0.5, 0.75, 1.5];
    let h = HField::constant(1.0);
    let acc = EtaAccumulator::new(h.clone(), 5);
    let seen = observed_coefficient(&acc, &h, 5, 2, &s_points, 64.0);
    for (s, (f, g)) in s_points.iter().zip(seen) {
        let want = acc.expansion_coeff(2, *s).unwrap();
        let scale = 1.0 + want.f.hypot(want.g);
        assert!((f - want.f).abs() < 2e-2 * scale && (g - want.g).abs() < 2e-2 * scale, "s={s}: ({f}, {g}) vs {want:?}");
    }
}

#[test]
fn second_order_coefficient_vanishes_in_three_dimensions() {
    for h in [HField::constant(1.0), HField::polynomial(vec![0.5, -0.3, 0.7])] {
        let acc = EtaAccumulator::new(h, 3);
        for s in [-2.0, -0.1, 0.6, 3.3] {
            let c = acc.expansion_coeff(2, s).unwrap();
            assert_eq!((c.f, c.g), (0.0, 0.0));
        }
    }
}

#[test]
fn orders_beyond_two_are_unsupported() {
    let acc = EtaAccumulator::new(HField::constant(1.0), 4);
    assert!(matches!(acc.expansion_coeff(3, 0.0), Err(SolverError::UnsupportedOrder(3))));
}

#[test]
fn convergence_bound_holds_for_three_and_four_dimensions() {
    for n in [3u32, 4] {
        let h = HField::constant(1.0);
        let acc = EtaAccumulator::new(h.clone(), n);
        let family = run_family(&h, n, &[4.0, 8.0, 16.0], (-2.0, 2.0), 0.05).unwrap();
        let r = check_convergence_bound(&family, &acc, (-2.0, 2.0), 0.05).unwrap();
        assert!(r.pass, "n = {n}: {}", r.to_json_pretty());
    }
}

#[test]
fn scaling_slopes_track_the_order() {
    let h = HField::constant(1.0);
    let acc = EtaAccumulator::new(h.clone(), 4);
    let family = run_family(&h, 4, &[8.0, 16.0, 32.0, 64.0], (-2.0, 2.0), 0.05).unwrap();
    for (k, lo) in [(0usize, 0.9), (1, 1.9), (2, 2.75)] {
        let r = check_expansion_scaling(&family, &acc, k, (-2.0, 2.0), 0.05).unwrap();
        let slope = r.observed["slope"].as_f64().unwrap();
        assert!(r.pass && slope >= lo, "K = {k}: slope {slope}");
    }
    let short = &family[..3];
    assert!(check_expansion_scaling(short, &acc, 1, (-2.0, 2.0), 0.05).is_err());
}

#[test]
fn reference_positivity_configurations_stay_off_the_axis() {
    let cfg = SolverConfig::default();
    for (h, c, n) in positivity_configs() {
        let r = check_positivity(&h, c, n, (-4.0, 4.0), &cfg).unwrap();
        assert!(r.pass && r.bound_or_expected["predicted_positive"] == true, "{}", r.to_json_pretty());
        assert!(r.observed["min_y"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn positivity_without_hypotheses_makes_no_prediction() {
    // H changes monotonicity on the span
    let h = HField::polynomial(vec![1.0, 0.0, -1.0, 0.0, 0.2]);
    let r = check_positivity(&h, 2.0, 3, (-4.0, 4.0), &SolverConfig::default()).unwrap();
    assert_eq!(r.bound_or_expected["predicted_positive"], false);
    assert!(r.pass);
    let m = sample_monotonicity(&h, (-4.0, 4.0), 800);
    assert!(!m.increasing_away && !m.decreasing_away);
}

#[test]
fn period_integrals_of_the_half_radius_circle() {
    let acc = EtaAccumulator::new(HField::constant(1.0), 3);
    let d = period_diagnostics(&acc, PI);
    assert!(d.int_cos.abs() < 1e-8 && d.int_sin.abs() < 1e-8);
    assert!((d.double_int - PI / 4.0).abs() < 1e-8);
    assert!((d.signed_area - PI / 4.0).abs() < 1e-8);
}

#[test]
fn period_integrals_over_half_a_period_match_brute_force() {
    let acc = EtaAccumulator::new(HField::constant(1.0), 3);
    let l = PI / 2.0;
    let d = period_diagnostics(&acc, l);
    // eta = 2u
    let inner = |u: f64| (2.0 * u).sin() / 2.0;
    assert!((d.int_cos - composite_simpson(|u| (2.0 * u).cos(), 0.0, l, 2000)).abs() < 1e-10);
    assert!((d.int_sin - composite_simpson(|u| (2.0 * u).sin(), 0.0, l, 2000)).abs() < 1e-10);
    assert!((d.double_int - composite_simpson(|u| (2.0 * u).sin() * inner(u), 0.0, l, 2000)).abs() < 1e-10);
}

#[test]
fn flat_limit_curve_does_not_close() {
    let d = period_diagnostics(&EtaAccumulator::new(HField::constant(0.0), 3), 1.0);
    assert!((d.int_cos - 1.0).abs() < 1e-14);
    assert_eq!((d.int_sin, d.double_int), (0.0, 0.0));
}
