//! Distance between dissipative and inviscid solutions from the same
//! smoothed dam break, and the fitted slope K of y = K eps t.

use bore_lab::pde::{error_study, Boundary, Grid, InitialCondition, RunConfig, System};

fn main() -> bore_lab::Result<()> {
    let base = RunConfig {
        system: System::PeregrineDissipative,
        delta: 1.0,
        epsilon: 0.0,
        grid: Grid::with_spacing(-400.0, 400.0, 0.25, Boundary::Reflective)?,
        dt: 0.025,
        t_end: 40.0,
        ic: InitialCondition::SmoothedRiemann {
            eta_left: 0.5,
            ramp_width: 2.0,
        },
        snapshot_times: vec![],
    };
    let study = error_study(&base, &[0.1, 0.05, 0.02, 0.01])?;
    println!("initial norm {:.4}", study.initial_norm);
    print!("{:>6}", "t");
    for s in &study.series {
        print!(" {:>12}", format!("eps={}", s.epsilon));
    }
    println!();
    for t in [5.0, 10.0, 20.0, 40.0] {
        print!("{t:>6}");
        for s in &study.series {
            print!(" {:>12.4e}", s.at(t).unwrap());
        }
        println!();
    }
    for f in &study.fits {
        println!(
            "eps {:<5} K = {:.5} from {} samples on [{}, {}]",
            f.epsilon, f.k, f.points, f.window.0, f.window.1
        );
    }
    Ok(())
}
