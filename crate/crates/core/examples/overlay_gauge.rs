//! Align a computed front with a gauge record. The record here is
//! synthetic: the model itself, delayed and with measurement noise.

use bore_lab::overlay::{overlay, OverlayDataset, TimeTrace};
use bore_lab::profile::{integrate_profile, ProfileOptions};
use bore_lab::waveform::WaveParams;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn main() -> bore_lab::Result<()> {
    let p = WaveParams::new(1.11, 1.0 / 3.0, 0.06)?;
    let model = TimeTrace::from_computed(&integrate_profile(&p, &ProfileOptions::default())?)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let noise = Normal::new(0.0, 0.005).unwrap();
    let t: Vec<f64> = (0..800).map(|k| -20.0 + 0.1 * k as f64).collect();
    let eta = t.iter().map(|t| model.at(t - 12.5) + noise.sample(&mut rng)).collect();
    let data = OverlayDataset {
        trace: TimeTrace::new(t, eta)?,
        froude: Some(1.11),
        label: Some("synthetic gauge".into()),
    };

    let r = overlay(&model, p.c, &data)?;
    println!("{}", serde_json::to_string_pretty(&r).unwrap());
    Ok(())
}
