//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use bore_lab::pde::*;
use bore_lab::profile::{integrate_profile, Profile, ProfileOptions};
use bore_lab::shape::*;
use bore_lab::waveform::*;

type Outcome = Result<String, String>;

/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn params(c: f64, delta: f64, epsilon: f64) -> WaveParams {
    WaveParams::new(c, delta, epsilon).expect("valid parameters")
}

fn front(p: &WaveParams) -> Result<Profile, String> {
    integrate_profile(p, &ProfileOptions::default()).map_err(|e| e.to_string())
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn speed_grid() -> impl Iterator<Item = f64> {
    (1..=1000).map(|k| 1.0 + 9.0 * k as f64 / 1000.0)
}

fn closed_forms() -> Outcome {
    let a2 = alpha(2.0);
    ensure!((a2 - 3.0).abs() < 1e-12, "alpha(2) = {a2}");
    let u0 = tail_velocity(2.0);
    ensure!((u0 - (3.0 - 3f64.sqrt())).abs() < 1e-12, "u0(2) = {u0}");
    let mut worst = 0.0f64;
    for c in speed_grid() {
        let q = equilibria_for_speed(c).map_err(e)?;
        let sum = (q.u_minus + q.u_plus - 3.0 * c).abs() / (3.0 * c);
        let prod = (q.u_minus * q.u_plus - 2.0 * (c - 1.0) * (c + 1.0)).abs() / (2.0 * (c * c - 1.0));
        worst = worst.max(sum).max(prod);
        let f = dissipation_integral_rhs(c).map_err(e)?;
        ensure!(f > 0.0, "f({c}) = {f}");
    }
    ensure!(worst < 1e-12, "Vieta relative error {worst:e}");
    let f1 = dissipation_integral_rhs_explicit(1.0);
    ensure!(f1 == 0.0, "f(1) = {f1}");
    Ok(format!("alpha(2) = {a2}, worst Vieta error {worst:.1e}"))
}

fn regimes() -> Outcome {
    let p = params(1.3, 0.2, 1.2);
    ensure!(
        classify_regime(&p).kind == RegimeKind::Regularized,
        "(1.3, 0.2, 1.2) not regularized"
    );
    let pr = front(&p)?;
    let r = shape_report(&pr).map_err(e)?;
    ensure!(r.interior_extrema() == 0, "{} interior extrema", r.interior_extrema());
    ensure!(r.inflections.len() == 1, "{} inflections", r.inflections.len());
    let u1 = pr.eval(r.inflections[0]).u;
    let eq = p.equilibria();
    ensure!(
        u1 > p.c - p.c.cbrt() && u1 < eq.u_tail,
        "inflection u = {u1} outside ({}, {})",
        p.c - p.c.cbrt(),
        eq.u_tail
    );

    let q = params(2.0, 0.5, 0.3);
    ensure!(
        classify_regime(&q).kind == RegimeKind::Oscillatory,
        "(2, 0.5, 0.3) not oscillatory"
    );
    let r = shape_report(&front(&q)?).map_err(e)?;
    let mut ext: Vec<(f64, f64, bool)> = r.maxima.iter().map(|m| (m.0, m.1, true)).collect();
    ext.extend(r.minima.iter().map(|m| (m.0, m.1, false)));
    ext.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure!(ext.len() >= 5, "only {} extrema", ext.len());
    ensure!(ext.windows(2).all(|w| w[0].2 != w[1].2), "extrema do not alternate");
    // toward -infinity: maxima shrink and minima rise
    ensure!(
        r.maxima.windows(2).all(|w| w[0].1 < w[1].1),
        "maxima not decreasing toward -inf"
    );
    ensure!(
        r.minima.windows(2).all(|w| w[0].1 > w[1].1),
        "minima not increasing toward -inf"
    );
    Ok(format!(
        "monotone front inflects at u = {u1:.4}; oscillatory front has {} alternating extrema",
        ext.len()
    ))
}

fn tails() -> Outcome {
    let mut notes = Vec::new();
    for p in [params(1.3, 0.2, 1.2), params(2.0, 0.5, 0.3)] {
        let pr = front(&p)?;
        let eq = p.equilibria();
        let i = (0..pr.len()).min_by(|a, b| pr.xi[*a].total_cmp(&pr.xi[*b])).unwrap();
        let gap = (pr.u[i] - eq.u_tail).abs();
        ensure!(gap < 1e-7, "c = {}: |u(min xi) - u0| = {gap:e}", p.c);
        let r = shape_report(&pr).map_err(e)?;
        let s = p.spectrum();
        let err_plus = (r.tail_decay_rate_plus / s.lambda_minus - 1.0).abs();
        ensure!(
            err_plus < 0.05,
            "c = {}: right rate {} vs {}",
            p.c,
            r.tail_decay_rate_plus,
            s.lambda_minus
        );
        let mut note = format!("c = {}: right rate off {:.1e}", p.c, err_plus);
        if s.tail.is_complex() {
            let envelope = p.epsilon / (2.0 * p.delta * p.c);
            let err_env = (r.tail_decay_rate_minus / envelope - 1.0).abs();
            ensure!(
                err_env < 0.05,
                "envelope rate {} vs {envelope}",
                r.tail_decay_rate_minus
            );
            let freq = r.tail_frequency.ok_or("no frequency fitted")?;
            let err_f = (freq / s.tail.frequency() - 1.0).abs();
            ensure!(err_f < 0.05, "frequency {freq} vs {}", s.tail.frequency());
            note.push_str(&format!(", envelope off {err_env:.1e}, frequency off {err_f:.1e}"));
        }
        notes.push(note);
    }
    Ok(notes.join("; "))
}

fn test_orbits() -> Vec<WaveParams> {
    vec![
        params(1.3, 0.2, 1.2),
        params(2.0, 0.5, 0.3),
        params(1.11, 1.0 / 3.0, 0.06),
        params(1.45, 1.0 / 3.0, 0.6),
        params(1.5, 1.0, 3.0),
    ]
}

fn energy_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut kinds = Vec::new();
    for p in test_orbits() {
        let res = verify_energy_identity(&front(&p)?).map_err(e)?;
        ensure!(res < 1e-3, "({}, {}, {}): residual {res:e}", p.c, p.delta, p.epsilon);
        worst = worst.max(res);
        kinds.push(classify_regime(&p).kind);
    }
    ensure!(
        kinds.contains(&RegimeKind::Oscillatory) && kinds.contains(&RegimeKind::Regularized),
        "triples do not span both regimes"
    );
    Ok(format!(
        "worst relative residual {worst:.1e} over {} triples",
        kinds.len()
    ))
}

fn liapunov_and_confinement() -> Outcome {
    let mut triangles = 0;
    for p in test_orbits() {
        let pr = front(&p)?;
        let tag = format!("({}, {}, {})", p.c, p.delta, p.epsilon);
        let (l, _) = verify_liapunov(&pr).map_err(e)?;
        ensure!(
            l.passed,
            "{tag}: V decreases by {:e} at xi = {}",
            l.worst_margin,
            l.worst_xi
        );
        let ceiling = verify_amplitude_ceiling(&pr).map_err(e)?;
        ensure!(
            ceiling.passed,
            "{tag}: amplitude bound fails at xi = {}",
            ceiling.worst_xi
        );
        let vb = verify_v_bounds(&pr).map_err(e)?;
        ensure!(vb.passed, "{tag}: v bound fails at xi = {}", vb.worst_xi);
        if classify_regime(&p).kind == RegimeKind::Regularized {
            let t = verify_triangle_invariant(&pr).map_err(e)?;
            ensure!(t.passed, "{tag}: leaves the triangle at xi = {}", t.worst_xi);
            triangles += 1;
        }
    }
    Ok(format!("{} orbits, {triangles} triangle checks", test_orbits().len()))
}

fn speed_amplitude() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=500 {
        let eb = 0.5 * k as f64 / 500.0;
        let gap = (speed_from_amplitude(eb).map_err(e)? - speed_series(eb)).abs();
        ensure!(gap <= 0.5 * eb.powi(4), "eta_bar = {eb}: gap {gap:e}");
        worst = worst.max(gap / eb.powi(4));
    }
    let mut round = 0.0f64;
    for c in speed_grid() {
        let back = froude_from_tail(tail_elevation(c)).map_err(e)?;
        round = round.max((back - c).abs() / c);
    }
    ensure!(round < 1e-12, "froude round trip {round:e}");
    for k in 1..=400 {
        let c = 1.0 + 0.4 * k as f64 / 400.0;
        let eb = solitary_amplitude_for_speed(c).map_err(e)?.eta_bar;
        ensure!(tail_elevation(c) < eb, "c = {c}: eta0 >= eta_bar");
    }
    Ok(format!("series gap <= {worst:.3} eta^4, round trip {round:.1e}"))
}

/// Evolve the regularized front for one time unit; returns (front shift, misfit).
fn traveling_wave_run(prof: &Profile, dx: f64, dt: f64) -> Result<(f64, f64), String> {
    let p = prof.params;
    let grid = Grid::with_spacing(-60.0, 60.0, dx, Boundary::Periodic).map_err(e)?;
    let cfg = RunConfig {
        system: System::PeregrineDissipative,
        delta: p.delta,
        epsilon: p.epsilon,
        grid,
        dt,
        t_end: 1.0,
        ic: InitialCondition::Gaussian {
            amplitude: 0.0,
            width: 1.0,
        },
        snapshot_times: vec![],
    };
    let start = traveling_wave_state(prof, &grid, 0.0);
    let level = 0.5 * p.equilibria().eta_tail;
    let x_a = front_position(&start.eta, &grid, level).ok_or("no front at t = 0")?;
    let snaps = Solver::new(&cfg).map_err(e)?.run_from(start, |_| Ok(())).map_err(e)?;
    let end = snaps.last().unwrap();
    let x_b = front_position(&end.eta, &grid, level).ok_or("no front at t = 1")?;
    let shift = x_b - x_a;
    let mut sum = 0.0;
    for i in 0..grid.n {
        let x = grid.x(i);
        // away from the periodic seam
        if x.abs() < 30.0 {
            let d = end.eta[i] - prof.eval_eta(x - shift);
            sum += d * d * grid.dx;
        }
    }
    Ok((shift, sum.sqrt()))
}

fn pde_traveling_wave() -> Outcome {
    let p = params(1.3, 0.2, 1.2);
    let prof = front(&p)?;
    let dx = 0.25;
    let (shift, misfit) = traveling_wave_run(&prof, dx, 0.025)?;
    ensure!(
        (shift - p.c).abs() <= 2.0 * dx,
        "front moved {shift}, expected {} +- {}",
        p.c,
        2.0 * dx
    );
    ensure!(misfit < 1e-2, "shape misfit {misfit:e}");
    Ok(format!("front moved {shift:.5}, misfit {misfit:.2e}"))
}

fn error_law() -> Outcome {
    let grid = Grid::with_spacing(-400.0, 400.0, 0.25, Boundary::Reflective).map_err(e)?;
    let base = RunConfig {
        system: System::PeregrineDissipative,
        delta: 1.0,
        epsilon: 0.0,
        grid,
        dt: 0.025,
        t_end: 25.0,
        ic: InitialCondition::SmoothedRiemann {
            eta_left: 0.5,
            ramp_width: 2.0,
        },
        snapshot_times: vec![],
    };
    let study = error_study(&base, &[0.1, 0.05, 0.02, 0.01]).map_err(e)?;
    let cap = 0.1 * study.initial_norm;
    let times: Vec<f64> = (10..=50).map(|k| 0.5 * k as f64).collect();
    let mut spread = 0.0f64;
    let mut checked = 0;
    for &t in &times {
        let ks: Vec<f64> = study
            .series
            .iter()
            .filter_map(|s| s.at(t).filter(|y| *y < cap).map(|y| y / s.epsilon))
            .collect();
        if ks.len() < 2 {
            continue;
        }
        let (lo, hi) = ks.iter().fold((f64::MAX, f64::MIN), |(a, b), k| (a.min(*k), b.max(*k)));
        ensure!(hi / lo <= 2.0, "t = {t}: y/eps spans a factor {}", hi / lo);
        spread = spread.max(hi / lo);
        checked += 1;
    }
    ensure!(checked > 0, "no samples below 10% of the initial norm");
    let mut doubling = (f64::MAX, f64::MIN);
    for s in &study.series {
        for &t in times.iter().filter(|t| 2.0 * **t <= 25.0) {
            let (a, b) = (s.at(t).unwrap(), s.at(2.0 * t).unwrap());
            if b >= cap {
                continue;
            }
            let r = b / a;
            ensure!(
                (1.5..=2.5).contains(&r),
                "eps = {}: y({})/y({t}) = {r}",
                s.epsilon,
                2.0 * t
            );
            doubling = (doubling.0.min(r), doubling.1.max(r));
        }
    }
    let ks: Vec<String> = study.fits.iter().map(|f| format!("{:.4}", f.k)).collect();
    Ok(format!(
        "y/eps within a factor {spread:.3} at {checked} times, y(2t)/y(t) in [{:.3}, {:.3}], K = [{}]",
        doubling.0,
        doubling.1,
        ks.join(", ")
    ))
}

fn conservation_and_convergence() -> Outcome {
    let grid = Grid::with_spacing(-100.0, 100.0, 0.25, Boundary::Periodic).map_err(e)?;
    let mut worst = 0.0f64;
    for system in [
        System::PeregrineDissipative,
        System::PeregrineInviscid,
        System::ShallowWater,
    ] {
        let cfg = RunConfig {
            system,
            delta: 1.0,
            epsilon: 0.1,
            grid,
            dt: 0.025,
            t_end: 10.0,
            ic: InitialCondition::Gaussian {
                amplitude: 1.0,
                width: 10.0,
            },
            snapshot_times: vec![],
        };
        let m0 = make_initial(&cfg.ic, &grid).map_err(e)?.mass(&grid);
        let mut drift = 0.0f64;
        Solver::new(&cfg)
            .map_err(e)?
            .run(|s| {
                drift = drift.max((s.mass(&grid) - m0).abs() / m0);
                Ok(())
            })
            .map_err(e)?;
        ensure!(drift < 1e-10, "{}: mass drift {drift:e}", system.name());
        worst = worst.max(drift);
    }
    let prof = front(&params(1.3, 0.2, 1.2))?;
    let (_, coarse) = traveling_wave_run(&prof, 0.25, 0.025)?;
    let (_, fine) = traveling_wave_run(&prof, 0.125, 0.0125)?;
    let gain = coarse / fine;
    ensure!(gain >= 3.0, "misfit {coarse:e} -> {fine:e} improves only {gain:.2}x");
    Ok(format!("mass drift {worst:.1e}, refinement gain {gain:.2}x"))
}

/// Dam-break height whose shallow-water shock moves at `speed`.
fn dam_break_for_speed(speed: f64) -> Result<f64, String> {
    let (mut lo, mut hi) = (1e-6, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if riemann_shock_state(mid).map_err(e)?.speed < speed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn shallow_water() -> Outcome {
    let c = 1.2;
    let eq = equilibria_for_speed(c).map_err(e)?;
    let eta_left = dam_break_for_speed(c)?;
    let grid = Grid::with_spacing(-200.0, 200.0, 0.25, Boundary::Reflective).map_err(e)?;
    let cfg = RunConfig {
        system: System::ShallowWater,
        delta: 0.0,
        epsilon: 0.0,
        grid,
        dt: 0.025,
        t_end: 40.0,
        ic: InitialCondition::SmoothedRiemann {
            eta_left,
            ramp_width: 2.0,
        },
        snapshot_times: vec![10.0],
    };
    let snaps = evolve(&cfg).map_err(e)?;
    let level = 0.5 * eq.eta_tail;
    let x10 = front_position(&snaps[0].eta, &grid, level).ok_or("no front at t = 10")?;
    let x40 = front_position(&snaps[1].eta, &grid, level).ok_or("no front at t = 40")?;
    let speed = (x40 - x10) / 30.0;
    ensure!((speed - c).abs() <= 0.02, "front speed {speed}");
    let window: Vec<usize> = (0..grid.n)
        .filter(|&i| (x40 - 25.0..x40 - 5.0).contains(&grid.x(i)))
        .collect();
    let mean = |f: &[f64]| window.iter().map(|&i| f[i]).sum::<f64>() / window.len() as f64;
    let (eta, u) = (mean(&snaps[1].eta), mean(&snaps[1].u));
    let (de, du) = ((eta / eq.eta_tail - 1.0).abs(), (u / eq.u_tail - 1.0).abs());
    ensure!(
        de < 0.02 && du < 0.02,
        "jump state ({eta}, {u}) vs ({}, {})",
        eq.eta_tail,
        eq.u_tail
    );
    Ok(format!(
        "dam break eta_left = {eta_left:.5}: speed {speed:.5}, jump state off {de:.1e} / {du:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed forms", closed_forms, 1),
        ("regime reproduction", regimes, 5),
        ("tail and spectrum", tails, 5),
        ("energy identity", energy_identity, 10),
        ("Liapunov and confinement", liapunov_and_confinement, 10),
        ("speed-amplitude", speed_amplitude, 2),
        ("PDE traveling wave", pde_traveling_wave, 30),
        ("error law", error_law, 600),
        ("conservation and convergence", conservation_and_convergence, 300),
        ("shallow-water reference", shallow_water, 120),
    ];
    let mut failed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > Duration::from_secs(*limit) => Err(format!("{msg}; took longer than {limit} s")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!(
                "criterion {:>2} PASS  {name}: {msg} ({:.2} s)",
                k + 1,
                took.as_secs_f64()
            ),
            Err(msg) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {name}: {msg} ({:.2} s)",
                    k + 1,
                    took.as_secs_f64()
                );
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
