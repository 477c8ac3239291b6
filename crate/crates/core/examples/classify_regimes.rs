//! Sweep epsilon across the critical value for a few speeds and compare the
//! predicted regime with the shape of the computed front.

use bore_lab::profile::{integrate_profile, ProfileOptions};
use bore_lab::shape::{observed_shape, ObservedShape, RegimeReport};
use bore_lab::waveform::{critical_epsilon, RegimeKind, WaveParams};

fn main() -> bore_lab::Result<()> {
    let delta = 1.0 / 3.0;
    println!(
        "{:>6} {:>8} {:>8} {:>12} {:>12} {:>6}",
        "c", "eps*", "eps", "predicted", "observed", "ok"
    );
    for c in [1.05, 1.2, 1.5, 2.0] {
        let eps_star = critical_epsilon(c, delta);
        // stay clear of eps*, where the tail decays too slowly to resolve
        for ratio in [0.3, 0.6, 1.3, 2.0] {
            let p = WaveParams::new(c, delta, ratio * eps_star)?;
            let report = RegimeReport::new(&p)?;
            let profile = integrate_profile(&p, &ProfileOptions::default())?;
            let seen = observed_shape(&profile);
            let ok = matches!(
                (report.kind, seen),
                (RegimeKind::Oscillatory, ObservedShape::Oscillatory)
                    | (RegimeKind::Regularized, ObservedShape::Monotone)
            );
            println!(
                "{c:>6.2} {eps_star:>8.4} {:>8.4} {:>12} {:>12} {:>6}",
                p.epsilon,
                format!("{:?}", report.kind),
                format!("{seen:?}"),
                ok
            );
        }
    }
    Ok(())
}
