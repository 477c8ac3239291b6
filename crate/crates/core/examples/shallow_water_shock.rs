//! A dam break under the shallow-water equations: the shock it produces
//! carries the tail state of the traveling wave with the same speed.

use bore_lab::pde::{evolve, front_position, riemann_shock_state, Boundary, Grid, InitialCondition, RunConfig, System};

fn main() -> bore_lab::Result<()> {
    let eta_left = 0.6;
    let shock = riemann_shock_state(eta_left)?;
    println!(
        "predicted shock: speed {:.5}, eta {:.5}, u {:.5}",
        shock.speed, shock.eta_tail, shock.u_tail
    );
    let grid = Grid::with_spacing(-200.0, 200.0, 0.25, Boundary::Reflective)?;
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
        snapshot_times: vec![10.0, 20.0, 30.0],
    };
    let snaps = evolve(&cfg)?;
    let mut last: Option<(f64, f64)> = None;
    for s in &snaps {
        let x = front_position(&s.eta, &grid, 0.5 * shock.eta_tail).unwrap();
        let behind = grid.coordinates().iter().position(|&g| g >= x - 10.0).unwrap();
        let speed = last.map(|(t0, x0)| (x - x0) / (s.t - t0));
        println!(
            "t {:>4}: front {x:8.3}, state behind ({:.5}, {:.5}){}",
            s.t,
            s.eta[behind],
            s.u[behind],
            speed.map(|v| format!(", speed {v:.5}")).unwrap_or_default()
        );
        last = Some((s.t, x));
    }
    Ok(())
}
