//! Tail and solitary amplitudes against speed, with the hydraulic-jump
//! estimate, and the small-amplitude series of the solitary branch.

use bore_lab::cli::speed_amplitude_rows;
use bore_lab::waveform::{bore_froude_approx, froude_from_tail, speed_from_amplitude, speed_series};

fn main() -> bore_lab::Result<()> {
    println!("{:>7} {:>10} {:>10} {:>10}", "c", "eta_tail", "eta_sol", "eta_jump");
    for row in speed_amplitude_rows(1.01, 1.4, 14)? {
        println!(
            "{:>7.4} {:>10.6} {:>10.6} {:>10.6}",
            row.c, row.eta_tail, row.eta_solitary, row.eta_t1994_inverse
        );
    }

    println!("\nsolitary speed, closed form vs cubic series");
    for eta in [0.05, 0.1, 0.2, 0.3, 0.5] {
        let exact = speed_from_amplitude(eta)?;
        let series = speed_series(eta);
        println!("  eta {eta:.2}: {exact:.8} {series:.8} diff {:.2e}", exact - series);
    }

    println!("\nbore speed from tail elevation, exact jump vs hydraulic-jump formula");
    for eta in [0.05, 0.2, 0.5, 1.0] {
        println!(
            "  eta0 {eta:.2}: {:.6} {:.6}",
            froude_from_tail(eta)?,
            bore_froude_approx(eta)?
        );
    }
    Ok(())
}
