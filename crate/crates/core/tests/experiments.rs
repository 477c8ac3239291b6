use bore_lab::config::preset;
use bore_lab::pde::{evolve, Grid};

fn crests(eta: &[f64], grid: &Grid, x_min: f64, floor: f64) -> usize {
    (1..grid.n - 1)
        .filter(|&i| grid.x(i) > x_min && eta[i] > floor && eta[i] > eta[i - 1] && eta[i] >= eta[i + 1])
        .count()
}

#[test]
fn gaussian_hump_without_dissipation_sheds_solitary_waves() {
    let mut cfg = preset("gaussian-hump").unwrap().config;
    cfg.epsilon = Some(0.0);
    cfg.t_end = Some(150.0);
    cfg.snapshot_times = Some(vec![]);
    let run = cfg.run_config().unwrap();
    let snaps = evolve(&run).unwrap();
    let last = snaps.last().unwrap();
    // right-going separated crests
    let n = crests(&last.eta, &run.grid, 20.0, 0.05);
    assert!(n >= 3, "only {n} crests");
}

#[test]
fn dam_break_develops_an_undular_front() {
    let mut cfg = preset("dam-break").unwrap().config;
    cfg.t_end = Some(100.0);
    cfg.snapshot_times = Some(vec![]);
    let run = cfg.run_config().unwrap();
    let last = evolve(&run).unwrap().pop().unwrap();
    let n = crests(&last.eta, &run.grid, 0.0, 0.05);
    assert!(n >= 3, "only {n} crests behind the front");
}
