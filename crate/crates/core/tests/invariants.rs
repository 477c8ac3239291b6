use bore_lab::config::{ConfigFile, IcKind};
use bore_lab::pde::{Boundary, System};
use bore_lab::profile::{integrate_profile, ProfileOptions};
use bore_lab::shape::{verify_energy_identity, verify_liapunov};
use bore_lab::waveform::*;
use proptest::prelude::*;

fn speed() -> impl Strategy<Value = f64> {
    prop_oneof![1.0001f64..1.1, 1.1f64..3.0, 3.0f64..20.0]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #[test]
    fn equilibria_satisfy_vieta(c in speed()) {
        let e = equilibria_for_speed(c).unwrap();
        prop_assert!(rel(e.u_minus + e.u_plus, 3.0 * c) < 1e-14);
        prop_assert!(rel(e.u_minus * e.u_plus, 2.0 * (c - 1.0) * (c + 1.0)) < 1e-14);
    }

    #[test]
    fn equilibria_are_ordered(c in speed()) {
        let e = equilibria_for_speed(c).unwrap();
        prop_assert!(0.0 < e.u_tail && e.u_tail < c && c < e.u_plus);
        prop_assert!(e.eta_tail > 0.0);
        let s = solitary_amplitude_for_speed(c).unwrap();
        // the crest depth c - u_bar underflows relative to c for fast waves
        prop_assert!(e.u_tail < s.u_bar && s.u_bar <= c);
        prop_assert!(e.eta_tail < s.eta_bar);
    }

    #[test]
    fn alpha_is_positive_and_increasing(c in speed(), dc in 1e-3f64..1.0) {
        prop_assert!(alpha(c) > 0.0);
        prop_assert!(alpha(c + dc) > alpha(c));
    }

    #[test]
    fn alpha_forms_agree(c in 1.05f64..20.0) {
        prop_assert!(rel(alpha(c), alpha_radical_form(c)) < 1e-9);
    }

    #[test]
    fn eigenvalues_solve_their_characteristic_equations(
        c in speed(), delta in 0.01f64..5.0, epsilon in 0.0f64..3.0
    ) {
        let p = WaveParams::new(c, delta, epsilon).unwrap();
        let dc = delta * c;
        let s = tail_eigenvalues(&p);
        for l in [s.lambda_minus, s.lambda_plus] {
            let scale = dc * l * l + epsilon * l.abs() + (c * c - 1.0) / c;
            prop_assert!((dc * l * l - epsilon * l - (c * c - 1.0) / c).abs() <= 1e-12 * scale);
        }
        prop_assert!(s.lambda_minus < 0.0 && s.lambda_plus > 0.0);
        let a = s.alpha;
        match s.tail {
            TailPair::RealPair { minus, plus } => {
                for l in [minus, plus] {
                    let scale = dc * l * l + epsilon * l + a;
                    prop_assert!((dc * l * l - epsilon * l + a).abs() <= 1e-10 * scale);
                }
                prop_assert!(0.0 < minus && minus <= plus);
            }
            TailPair::ComplexConjugate { re, im } => {
                // real and imaginary parts of dc z^2 - eps z + a at z = re + i im
                let r = dc * (re * re - im * im) - epsilon * re + a;
                let i = 2.0 * dc * re * im - epsilon * im;
                let scale = dc * (re * re + im * im) + epsilon * re + a;
                prop_assert!(r.abs() <= 1e-10 * scale && i.abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn regime_flips_at_the_critical_epsilon(c in speed(), delta in 0.01f64..5.0) {
        let eps = critical_epsilon(c, delta);
        let below = WaveParams::new(c, delta, eps * (1.0 - 1e-10)).unwrap();
        let above = WaveParams::new(c, delta, eps * (1.0 + 1e-10)).unwrap();
        let at = WaveParams::new(c, delta, eps).unwrap();
        prop_assert_eq!(classify_regime(&below).kind, RegimeKind::Oscillatory);
        prop_assert_eq!(classify_regime(&above).kind, RegimeKind::Regularized);
        prop_assert_eq!(classify_regime(&at).kind, RegimeKind::Regularized);
        prop_assert_eq!(tail_eigenvalues(&below).tail.is_complex(), true);
        prop_assert_eq!(tail_eigenvalues(&above).tail.is_complex(), false);
    }

    #[test]
    fn dissipation_integral_is_positive(c in speed()) {
        let f = dissipation_integral_rhs(c).unwrap();
        prop_assert!(f > 0.0);
        if c > 1.05 {
            prop_assert!(rel(f, dissipation_integral_rhs_explicit(c)) < 1e-8);
        }
    }

    #[test]
    fn speed_amplitude_round_trip(c in speed()) {
        let s = solitary_amplitude_for_speed(c).unwrap();
        prop_assert!(rel(speed_from_amplitude(s.eta_bar).unwrap(), c) < 1e-12);
        prop_assert!(solitary_residual(&s, c).abs() < 1e-10);
    }

    #[test]
    fn froude_inverts_tail_elevation(c in speed()) {
        prop_assert!(rel(froude_from_tail(tail_elevation(c)).unwrap(), c) < 1e-13);
        prop_assert!(eta_from_bore_froude(c).unwrap() <= tail_elevation(c));
    }
}

fn opt(s: impl Strategy<Value = f64>) -> impl Strategy<Value = Option<f64>> {
    proptest::option::of(s)
}

fn config() -> impl Strategy<Value = ConfigFile> {
    let wave = (
        proptest::option::of(prop_oneof![
            Just(System::PeregrineDissipative),
            Just(System::PeregrineInviscid),
            Just(System::ShallowWater)
        ]),
        opt(1.0f64..5.0),
        opt(0.0f64..3.0),
        opt(0.0f64..3.0),
        opt(1e-12f64..1e-4),
        opt(1e-14f64..1e-6),
        opt(1e-14f64..1e-6),
        opt(1e-12f64..1e-4),
        opt(10.0f64..1e5),
    );
    let grid = (
        opt(-1e3f64..0.0),
        opt(0.0f64..1e3),
        opt(1e-3f64..1.0),
        proptest::option::of(prop_oneof![Just(Boundary::Periodic), Just(Boundary::Reflective)]),
        opt(1e-4f64..0.1),
        opt(0.0f64..500.0),
    );
    let ic = (
        proptest::option::of(prop_oneof![
            Just(IcKind::Riemann),
            Just(IcKind::Gaussian),
            Just(IcKind::Bore)
        ]),
        opt(-0.9f64..2.0),
        opt(-1.0f64..1.0),
        opt(0.1f64..10.0),
        opt(-0.5f64..2.0),
        opt(0.1f64..50.0),
        proptest::option::of(proptest::collection::vec(0.0f64..100.0, 1..6)),
    );
    (wave, grid, ic).prop_map(|(w, g, i)| ConfigFile {
        system: w.0,
        c: w.1,
        delta: w.2,
        epsilon: w.3,
        seed_offset: w.4,
        rtol: w.5,
        atol: w.6,
        tail_tol: w.7,
        max_span: w.8,
        x_min: g.0,
        x_max: g.1,
        dx: g.2,
        boundary: g.3,
        dt: g.4,
        t_end: g.5,
        ic: i.0,
        eta_left: i.1,
        u_left: i.2,
        ramp_width: i.3,
        amplitude: i.4,
        width: i.5,
        snapshot_times: i.6,
    })
}

proptest! {
    #[test]
    fn config_text_round_trips(cfg in config()) {
        let text = cfg.to_text();
        prop_assert_eq!(ConfigFile::parse(&text).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn computed_fronts_dissipate_and_balance_energy(
        c in 1.05f64..2.5, delta in 0.1f64..1.5, ratio in prop_oneof![0.3f64..0.8, 1.2f64..2.5]
    ) {
        let epsilon = ratio * critical_epsilon(c, delta);
        let p = WaveParams::new(c, delta, epsilon).unwrap();
        let profile = integrate_profile(&p, &ProfileOptions::default()).unwrap();
        let (check, v) = verify_liapunov(&profile).unwrap();
        prop_assert!(check.passed, "liapunov margin {} at {}", check.worst_margin, check.worst_xi);
        prop_assert!(v.len() == profile.len());
        prop_assert!(verify_energy_identity(&profile).unwrap() < 1e-7);
    }
}
