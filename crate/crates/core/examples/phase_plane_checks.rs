//! Run the phase-plane consistency checks on a set of fronts: the energy
//! balance, the Liapunov function, the amplitude ceiling, the v bounds and,
//! for monotone fronts, the confining triangle.

use bore_lab::profile::{integrate_profile, ProfileOptions};
use bore_lab::shape::{
    self_intersections, verify_amplitude_ceiling, verify_energy_identity, verify_liapunov, verify_triangle_invariant,
    verify_v_bounds,
};
use bore_lab::waveform::{classify_regime, solitary_amplitude, RegimeKind, WaveParams};

fn main() -> bore_lab::Result<()> {
    let cases = [
        (1.3, 0.2, 1.2),
        (2.0, 0.5, 0.3),
        (1.11, 1.0 / 3.0, 0.06),
        (1.45, 1.0 / 3.0, 0.6),
        (1.5, 1.0, 3.0),
    ];
    for (c, delta, epsilon) in cases {
        let p = WaveParams::new(c, delta, epsilon)?;
        let profile = integrate_profile(&p, &ProfileOptions::default())?;
        let energy = verify_energy_identity(&profile)?;
        let (liapunov, v) = verify_liapunov(&profile)?;
        let ceiling = verify_amplitude_ceiling(&profile)?;
        let vb = verify_v_bounds(&profile)?;
        let umax = profile.u.iter().copied().fold(0.0, f64::max);
        println!("({c}, {delta:.4}, {epsilon})");
        println!("  energy residual      {energy:.2e}");
        println!(
            "  Liapunov             {} (V from {:.3e} to {:.3e})",
            liapunov.passed,
            v[0],
            v[v.len() - 1]
        );
        println!(
            "  max u = {umax:.5} < u_bar = {:.5}: {}",
            solitary_amplitude(&p)?.u_bar,
            ceiling.passed
        );
        println!("  v bounds             {}", vb.passed);
        println!("  self-intersections   {}", self_intersections(&profile).len());
        if classify_regime(&p).kind == RegimeKind::Regularized {
            println!("  triangle             {}", verify_triangle_invariant(&profile)?.passed);
        }
    }
    Ok(())
}
