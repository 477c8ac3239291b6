//! Integrate one monotone and one oscillatory front and print their shape
//! diagnostics next to the linear predictions.

use bore_lab::profile::{integrate_profile, ProfileOptions};
use bore_lab::shape::{predicted_tail_rates, shape_report};
use bore_lab::waveform::WaveParams;

fn main() -> bore_lab::Result<()> {
    for (c, delta, epsilon) in [(1.3, 0.2, 1.2), (2.0, 0.5, 0.3)] {
        let p = WaveParams::new(c, delta, epsilon)?;
        let profile = integrate_profile(&p, &ProfileOptions::default())?;
        let report = shape_report(&profile)?;
        let (plus, minus, freq) = predicted_tail_rates(&profile);
        let eq = p.equilibria();

        println!("c = {c}, delta = {delta}, epsilon = {epsilon}");
        println!(
            "  {} samples on xi in [{:.1}, {:.1}], {} steps ({} rejected)",
            profile.len(),
            profile.xi[0],
            profile.xi[profile.len() - 1],
            profile.stats.accepted,
            profile.stats.rejected
        );
        println!(
            "  shape {:?}, tail u0 = {:.6}, eta0 = {:.6}",
            report.regime_observed, eq.u_tail, eq.eta_tail
        );
        println!(
            "  {} maxima, {} minima, {} inflections",
            report.maxima.len(),
            report.minima.len(),
            report.inflections.len()
        );
        for (xi, u) in report.maxima.iter().rev().take(4) {
            println!("    crest at xi = {xi:8.3}, u = {u:.6}");
        }
        println!(
            "  right tail rate {:.6} (linear {plus:.6})",
            report.tail_decay_rate_plus
        );
        println!(
            "  left tail rate  {:.6} (linear {minus:.6})",
            report.tail_decay_rate_minus
        );
        if let (Some(f), Some(g)) = (report.tail_frequency, freq) {
            println!("  undulation frequency {f:.6} (linear {g:.6})");
        }
        println!();
    }
    Ok(())
}
