//! Put a computed front on the PDE grid, evolve it and measure how far the
//! front moved and how much its shape changed.

use bore_lab::pde::{
    front_position, traveling_wave_state, Boundary, Grid, InitialCondition, RunConfig, Solver, System,
};
use bore_lab::profile::{integrate_profile, ProfileOptions};
use bore_lab::waveform::WaveParams;

fn main() -> bore_lab::Result<()> {
    let p = WaveParams::new(1.3, 0.2, 1.2)?;
    let profile = integrate_profile(&p, &ProfileOptions::default())?;
    let level = 0.5 * p.equilibria().eta_tail;

    for dx in [0.5, 0.25, 0.125] {
        let grid = Grid::with_spacing(-60.0, 60.0, dx, Boundary::Periodic)?;
        let cfg = RunConfig {
            system: System::PeregrineDissipative,
            delta: p.delta,
            epsilon: p.epsilon,
            grid,
            dt: 0.1 * dx,
            t_end: 2.0,
            // replaced by the traveling wave below
            ic: InitialCondition::Gaussian {
                amplitude: 0.0,
                width: 1.0,
            },
            snapshot_times: vec![1.0],
        };
        let start = traveling_wave_state(&profile, &grid, 0.0);
        let x0 = front_position(&start.eta, &grid, level).unwrap();
        let snaps = Solver::new(&cfg)?.run_from(start, |_| Ok(()))?;
        for s in snaps.iter().filter(|s| s.t > 0.0) {
            let x = front_position(&s.eta, &grid, level).unwrap();
            let shift = x - x0;
            let misfit: f64 = (0..grid.n)
                .filter(|&i| grid.x(i).abs() < 30.0)
                .map(|i| (s.eta[i] - profile.eval_eta(grid.x(i) - shift)).powi(2) * dx)
                .sum::<f64>()
                .sqrt();
            println!(
                "dx {dx:<5} t {:.1}: front moved {shift:.5} (c t = {:.5}), shape change {misfit:.3e}",
                s.t,
                p.c * s.t
            );
        }
    }
    Ok(())
}
