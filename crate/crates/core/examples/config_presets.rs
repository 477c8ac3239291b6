//! List the built-in presets, expand one, and override a few keys.

use bore_lab::config::{horizon_check, preset, ConfigFile, PRESET_NAMES};

fn main() -> bore_lab::Result<()> {
    for name in PRESET_NAMES {
        println!("{name:<14} {}", preset(name).unwrap().note);
    }

    let text = "preset = dam-break\nepsilon = 0.02\nt_end = 60\nsnapshot_times = 0, 30, 60\n";
    let cfg = ConfigFile::parse(text)?;
    println!("\nexpanded:\n{}", cfg.to_text());

    let run = cfg.run_config()?;
    horizon_check(&run)?;
    println!(
        "{} on {} points, {} steps of {}",
        run.system.name(),
        run.grid.n,
        run.steps(),
        run.dt
    );

    match ConfigFile::parse("c = 1.2\ndelta = 1\nepsilonn = 0.1\n") {
        Err(e) => println!("\nrejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
