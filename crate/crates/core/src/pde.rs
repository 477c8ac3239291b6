//! Method-of-lines solvers for the dissipative Peregrine system
//!
//! ```text
//! eta_t + u_x + (eta u)_x = 0
//! u_t + eta_x + u u_x - delta u_xxt - epsilon u_xx = 0
//! ```
//!
//! and a finite-volume solver for the shallow-water equations written in
//! the same variables. Spatial operators are central differences on a
//! uniform grid; the Peregrine systems are advanced with classical RK4 and
//! the elliptic operator `I - delta d_xx` is inverted by a tridiagonal
//! solve that is factorized once per run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::waveform::{equilibria_for_speed, tail_elevation, tail_velocity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Nodes `x_min + i dx`, `i = 0..n`, with `x_max` identified with `x_min`.
    Periodic,
    /// Cell centres `x_min + (i + 1/2) dx` between solid walls: `eta` is
    /// mirrored evenly and `u` oddly across each wall.
    Reflective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!(
                "grid needs x_min < x_max (got [{x_min}, {x_max}])"
            )));
        }
        if n < 16 {
            return Err(Error::InvalidParameter(format!("grid needs n >= 16 (got {n})")));
        }
        Ok(Grid {
            x_min,
            x_max,
            n,
            dx: (x_max - x_min) / n as f64,
            boundary,
        })
    }

    /// Grid with the given spacing; the domain length must be a whole
    /// number of cells.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64, boundary: Boundary) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidParameter(format!("dx must be positive (got {dx})")));
        }
        let cells = (x_max - x_min) / dx;
        let n = cells.round();
        if (cells - n).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "domain length {} is not a multiple of dx = {dx}",
                x_max - x_min
            )));
        }
        Grid::new(x_min, x_max, n as usize, boundary)
    }

    pub fn x(&self, i: usize) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.x_min + i as f64 * self.dx,
            Boundary::Reflective => self.x_min + (i as f64 + 0.5) * self.dx,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// The PDE state on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl FieldPair {
    pub fn zeros(n: usize) -> Self {
        FieldPair {
            eta: vec![0.0; n],
            u: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Error if any value is non-finite or `1 + eta <= 0`.
    pub fn check(&self, grid: &Grid) -> Result<()> {
        for i in 0..self.len() {
            let (e, u) = (self.eta[i], self.u[i]);
            if !e.is_finite() || !u.is_finite() {
                return Err(Error::Instability {
                    t: self.t,
                    detail: format!("non-finite value at x = {}", grid.x(i)),
                });
            }
            if 1.0 + e <= 0.0 {
                return Err(Error::Vacuum {
                    x: grid.x(i),
                    value: 1.0 + e,
                });
            }
        }
        Ok(())
    }

    /// `sum eta dx`.
    pub fn mass(&self, grid: &Grid) -> f64 {
        self.eta.iter().sum::<f64>() * grid.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `eta = (eta_left / 2)(1 - tanh(x / ramp_width))`, `u = 0`.
    SmoothedRiemann { eta_left: f64, ramp_width: f64 },
    /// `eta = amplitude exp(-x^2 / width^2)`, `u = 0`.
    Gaussian { amplitude: f64, width: f64 },
    /// A smoothed jump from `(eta_left, u_left)` to rest, both fields
    /// sharing the tanh ramp.
    SmoothedBore {
        eta_left: f64,
        u_left: f64,
        ramp_width: f64,
    },
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            InitialCondition::SmoothedRiemann { eta_left, ramp_width }
            | InitialCondition::SmoothedBore {
                eta_left, ramp_width, ..
            } => {
                if !(eta_left > -1.0) || !eta_left.is_finite() {
                    return bad(format!("eta_left must exceed -1 (got {eta_left})"));
                }
                if !(ramp_width > 0.0) || !ramp_width.is_finite() {
                    return bad(format!("ramp_width must be positive (got {ramp_width})"));
                }
            }
            InitialCondition::Gaussian { amplitude, width } => {
                if !(amplitude > -1.0) || !amplitude.is_finite() {
                    return bad(format!("amplitude must exceed -1 (got {amplitude})"));
                }
                if !(width > 0.0) || !width.is_finite() {
                    return bad(format!("width must be positive (got {width})"));
                }
            }
        }
        if let InitialCondition::SmoothedBore { u_left, .. } = *self {
            if !u_left.is_finite() {
                return bad(format!("u_left must be finite (got {u_left})"));
            }
        }
        Ok(())
    }
}

pub fn make_initial(ic: &InitialCondition, grid: &Grid) -> Result<FieldPair> {
    ic.validate()?;
    let mut state = FieldPair::zeros(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        match *ic {
            InitialCondition::SmoothedRiemann { eta_left, ramp_width } => {
                state.eta[i] = 0.5 * eta_left * (1.0 - (x / ramp_width).tanh());
            }
            InitialCondition::Gaussian { amplitude, width } => {
                state.eta[i] = amplitude * (-(x / width).powi(2)).exp();
            }
            InitialCondition::SmoothedBore {
                eta_left,
                u_left,
                ramp_width,
            } => {
                let s = 0.5 * (1.0 - (x / ramp_width).tanh());
                state.eta[i] = eta_left * s;
                state.u[i] = u_left * s;
            }
        }
    }
    Ok(state)
}

/// Sample a traveling-wave profile onto the grid with its `xi = 0` at `x0`.
pub fn traveling_wave_state(profile: &Profile, grid: &Grid, x0: f64) -> FieldPair {
    let mut state = FieldPair::zeros(grid.n);
    for i in 0..grid.n {
        let xi = grid.x(i) - x0;
        state.u[i] = profile.eval(xi).u;
        state.eta[i] = profile.eval_eta(xi);
    }
    state
}

const GHOST: usize = 2;

/// Copy `f` into `ext` (length `n + 4`) and fill two ghost values per
/// side. `parity` is `+1` for even and `-1` for odd fields under reflection.
fn extend(f: &[f64], ext: &mut [f64], boundary: Boundary, parity: f64) {
    let n = f.len();
    ext[GHOST..GHOST + n].copy_from_slice(f);
    match boundary {
        Boundary::Periodic => {
            ext[0] = f[n - 2];
            ext[1] = f[n - 1];
            ext[n + 2] = f[0];
            ext[n + 3] = f[1];
        }
        Boundary::Reflective => {
            ext[1] = parity * f[0];
            ext[0] = parity * f[1];
            ext[n + 2] = parity * f[n - 1];
            ext[n + 3] = parity * f[n - 2];
        }
    }
}

/// Fourth-order central first difference of an extended array.
fn d1_ext(ext: &[f64], out: &mut [f64], dx: f64) {
    let s = 1.0 / (12.0 * dx);
    for (i, o) in out.iter_mut().enumerate() {
        let j = i + GHOST;
        *o = s * (ext[j - 2] - 8.0 * ext[j - 1] + 8.0 * ext[j + 1] - ext[j + 2]);
    }
}

/// Second-order central second difference of an extended array.
fn d2_ext(ext: &[f64], out: &mut [f64], dx: f64) {
    let s = 1.0 / (dx * dx);
    for (i, o) in out.iter_mut().enumerate() {
        let j = i + GHOST;
        *o = s * (ext[j - 1] - 2.0 * ext[j] + ext[j + 1]);
    }
}

/// `D1 f` with the grid's closure.
pub fn first_difference(f: &[f64], grid: &Grid, parity: f64) -> Vec<f64> {
    let mut ext = vec![0.0; f.len() + 2 * GHOST];
    extend(f, &mut ext, grid.boundary, parity);
    let mut out = vec![0.0; f.len()];
    d1_ext(&ext, &mut out, grid.dx);
    out
}

/// `D2 f` with the grid's closure.
pub fn second_difference(f: &[f64], grid: &Grid, parity: f64) -> Vec<f64> {
    let mut ext = vec![0.0; f.len() + 2 * GHOST];
    extend(f, &mut ext, grid.boundary, parity);
    let mut out = vec![0.0; f.len()];
    d2_ext(&ext, &mut out, grid.dx);
    out
}

/// Factorized `I - delta D2` for odd fields (the velocity).
#[derive(Debug, Clone)]
pub struct Helmholtz {
    r: f64,
    boundary: Boundary,
    /// Thomas sweep coefficients of the (possibly modified) tridiagonal part.
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
    diag: Vec<f64>,
    /// Sherman-Morrison correction for the periodic corners.
    sm: Option<(Vec<f64>, f64, f64)>,
}

impl Helmholtz {
    pub fn new(delta: f64, grid: &Grid) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta must be >= 0 (got {delta})")));
        }
        let n = grid.n;
        let r = delta / (grid.dx * grid.dx);
        let mut diag = vec![1.0 + 2.0 * r; n];
        let off = -r;
        let mut h = Helmholtz {
            r,
            boundary: grid.boundary,
            c_prime: Vec::new(),
            inv_denom: Vec::new(),
            diag: Vec::new(),
            sm: None,
        };
        match grid.boundary {
            Boundary::Reflective => {
                // odd ghost value z[-1] = -z[0]
                diag[0] += r;
                diag[n - 1] += r;
                h.factor(diag, off)?;
            }
            Boundary::Periodic => {
                let gamma = -diag[0];
                let (alpha, beta) = (off, off);
                diag[0] -= gamma;
                diag[n - 1] -= alpha * beta / gamma;
                h.factor(diag, off)?;
                let mut uvec = vec![0.0; n];
                uvec[0] = gamma;
                uvec[n - 1] = alpha;
                let z = h.thomas(&uvec);
                let vz = z[0] + beta / gamma * z[n - 1];
                h.sm = Some((z, beta / gamma, 1.0 + vz));
            }
        }
        Ok(h)
    }

    fn factor(&mut self, diag: Vec<f64>, off: f64) -> Result<()> {
        let n = diag.len();
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let denom = diag[i] - off * prev;
            if denom.abs() <= f64::EPSILON * diag[i].abs() {
                return Err(Error::SolverBreakdown(format!("zero pivot at row {i}")));
            }
            inv_denom[i] = 1.0 / denom;
            prev = off * inv_denom[i];
            c_prime[i] = prev;
        }
        self.c_prime = c_prime;
        self.inv_denom = inv_denom;
        self.diag = diag;
        Ok(())
    }

    fn thomas(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rhs.len()];
        self.thomas_into(rhs, &mut out);
        out
    }

    fn thomas_into(&self, rhs: &[f64], out: &mut [f64]) {
        let n = rhs.len();
        let off = -self.r;
        let mut prev = 0.0;
        for i in 0..n {
            prev = (rhs[i] - off * prev) * self.inv_denom[i];
            out[i] = prev;
        }
        for i in (0..n - 1).rev() {
            out[i] -= self.c_prime[i] * out[i + 1];
        }
    }

    /// Solve `z - delta D2 z = rhs` into `out`.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        if self.r == 0.0 {
            out.copy_from_slice(rhs);
            return;
        }
        self.thomas_into(rhs, out);
        if let Some((z, v_last, denom)) = &self.sm {
            let n = out.len();
            let vy = out[0] + v_last * out[n - 1];
            let k = vy / denom;
            for (o, zi) in out.iter_mut().zip(z) {
                *o -= k * zi;
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rhs.len()];
        self.solve_into(rhs, &mut out);
        out
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
}

/// `(I - delta D2)^{-1} rhs` for an odd field.
pub fn helmholtz_apply_inverse(rhs: &[f64], delta: f64, grid: &Grid) -> Result<Vec<f64>> {
    if rhs.len() != grid.n {
        return Err(Error::GridMismatch(format!(
            "field has {} values, grid has {}",
            rhs.len(),
            grid.n
        )));
    }
    Ok(Helmholtz::new(delta, grid)?.solve(rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    PeregrineDissipative,
    PeregrineInviscid,
    ShallowWater,
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::PeregrineDissipative => "peregrine-dissipative",
            System::PeregrineInviscid => "peregrine-inviscid",
            System::ShallowWater => "shallow-water",
        }
    }

    pub fn parse(s: &str) -> Option<System> {
        match s {
            "peregrine-dissipative" => Some(System::PeregrineDissipative),
            "peregrine-inviscid" => Some(System::PeregrineInviscid),
            "shallow-water" => Some(System::ShallowWater),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: System,
    pub delta: f64,
    pub epsilon: f64,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub ic: InitialCondition,
    pub snapshot_times: Vec<f64>,
}

impl RunConfig {
    /// Coefficients actually used by the chosen system.
    pub fn effective_coefficients(&self) -> (f64, f64) {
        match self.system {
            System::PeregrineDissipative => (self.delta, self.epsilon),
            System::PeregrineInviscid => (self.delta, 0.0),
            System::ShallowWater => (0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive (got {})",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_end must be non-negative (got {})",
                self.t_end
            )));
        }
        if !(self.delta >= 0.0) || !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta and epsilon must be non-negative (got {}, {})",
                self.delta, self.epsilon
            )));
        }
        if self.system != System::ShallowWater && self.delta <= 0.0 {
            return Err(Error::InvalidParameter("the Peregrine systems need delta > 0".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(format!("bad snapshot time {t}")));
        }
        let init = make_initial(&self.ic, &self.grid)?;
        self.check_cfl(&init)
    }

    pub fn cfl_limit(&self, state: &FieldPair) -> f64 {
        let umax = state.u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        let emax = state.eta.iter().fold(f64::MIN, |m, e| m.max(*e)).max(0.0);
        0.9 * self.grid.dx / (1.0 + umax + (1.0 + emax).sqrt())
    }

    pub fn check_cfl(&self, state: &FieldPair) -> Result<()> {
        let limit = self.cfl_limit(state);
        if self.dt > limit {
            return Err(Error::InvalidParameter(format!(
                "dt = {} violates the CFL bound {limit:.6} for dx = {}",
                self.dt, self.grid.dx
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Rates `(eta_t, u_t)` of the Peregrine system at `state`.
pub fn semidiscrete_rhs_peregrine(state: &FieldPair, delta: f64, epsilon: f64, grid: &Grid) -> Result<FieldPair> {
    if state.len() != grid.n {
        return Err(Error::GridMismatch(format!(
            "state has {} values, grid has {}",
            state.len(),
            grid.n
        )));
    }
    state.check(grid)?;
    let helm = Helmholtz::new(delta, grid)?;
    let mut ws = Workspace::new(grid.n);
    let mut rate = FieldPair::zeros(grid.n);
    ws.peregrine_rhs(&state.eta, &state.u, epsilon, grid, &helm, &mut rate.eta, &mut rate.u);
    rate.t = state.t;
    Ok(rate)
}

/// Scratch buffers for the right-hand side.
#[derive(Debug, Clone)]
struct Workspace {
    ext_a: Vec<f64>,
    ext_b: Vec<f64>,
    tmp_a: Vec<f64>,
    tmp_b: Vec<f64>,
    tmp_c: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            ext_a: vec![0.0; n + 2 * GHOST],
            ext_b: vec![0.0; n + 2 * GHOST],
            tmp_a: vec![0.0; n],
            tmp_b: vec![0.0; n],
            tmp_c: vec![0.0; n],
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn peregrine_rhs(
        &mut self,
        eta: &[f64],
        u: &[f64],
        epsilon: f64,
        grid: &Grid,
        helm: &Helmholtz,
        eta_t: &mut [f64],
        u_t: &mut [f64],
    ) {
        let n = grid.n;
        let dx = grid.dx;
        // mass flux q = u + eta u is odd under reflection
        for i in 0..n {
            self.tmp_a[i] = u[i] * (1.0 + eta[i]);
        }
        extend(&self.tmp_a, &mut self.ext_a, grid.boundary, -1.0);
        d1_ext(&self.ext_a, eta_t, dx);
        for e in eta_t.iter_mut() {
            *e = -*e;
        }

        extend(eta, &mut self.ext_a, grid.boundary, 1.0);
        d1_ext(&self.ext_a, &mut self.tmp_a, dx);
        extend(u, &mut self.ext_b, grid.boundary, -1.0);
        d1_ext(&self.ext_b, &mut self.tmp_b, dx);
        if epsilon != 0.0 {
            d2_ext(&self.ext_b, &mut self.tmp_c, dx);
        } else {
            self.tmp_c.fill(0.0);
        }
        for i in 0..n {
            self.tmp_a[i] = -self.tmp_a[i] - u[i] * self.tmp_b[i] + epsilon * self.tmp_c[i];
        }
        helm.solve_into(&self.tmp_a, u_t);
    }

    /// Rusanov fluxes for `(eta, u)` with flux `(u + eta u, eta + u^2/2)`,
    /// returned as the conservative update rates.
    fn rusanov_rates(&mut self, eta: &[f64], u: &[f64], grid: &Grid, eta_t: &mut [f64], u_t: &mut [f64]) {
        let n = grid.n;
        extend(eta, &mut self.ext_a, grid.boundary, 1.0);
        extend(u, &mut self.ext_b, grid.boundary, -1.0);
        // face k sits between ext[k + 1] and ext[k + 2]; faces 0..=n bound the cells
        let flux = |h_l: f64, u_l: f64, h_r: f64, u_r: f64| -> (f64, f64) {
            let a = (u_l.abs() + (1.0 + h_l).max(0.0).sqrt()).max(u_r.abs() + (1.0 + h_r).max(0.0).sqrt());
            let fl = (u_l * (1.0 + h_l), h_l + 0.5 * u_l * u_l);
            let fr = (u_r * (1.0 + h_r), h_r + 0.5 * u_r * u_r);
            (
                0.5 * (fl.0 + fr.0) - 0.5 * a * (h_r - h_l),
                0.5 * (fl.1 + fr.1) - 0.5 * a * (u_r - u_l),
            )
        };
        let inv_dx = 1.0 / grid.dx;
        let mut left = flux(self.ext_a[1], self.ext_b[1], self.ext_a[2], self.ext_b[2]);
        for i in 0..n {
            let j = i + GHOST;
            let right = flux(self.ext_a[j], self.ext_b[j], self.ext_a[j + 1], self.ext_b[j + 1]);
            eta_t[i] = -(right.0 - left.0) * inv_dx;
            u_t[i] = -(right.1 - left.1) * inv_dx;
            left = right;
        }
    }
}

/// A configured time stepper with its factorized operator and buffers.
#[derive(Debug, Clone)]
pub struct Solver {
    config: RunConfig,
    helm: Helmholtz,
    ws: Workspace,
    stages: Vec<FieldPair>,
    trial: FieldPair,
}

impl Solver {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let (delta, _) = config.effective_coefficients();
        let n = config.grid.n;
        Ok(Solver {
            config: config.clone(),
            helm: Helmholtz::new(delta, &config.grid)?,
            ws: Workspace::new(n),
            stages: vec![FieldPair::zeros(n); 4],
            trial: FieldPair::zeros(n),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn initial_state(&self) -> Result<FieldPair> {
        make_initial(&self.config.ic, &self.config.grid)
    }

    /// Stage rate `k` evaluated at the trial state.
    fn rates(&mut self, k: usize) {
        let (_, eps) = self.config.effective_coefficients();
        let grid = self.config.grid;
        let stage = &mut self.stages[k];
        self.ws.peregrine_rhs(
            &self.trial.eta,
            &self.trial.u,
            eps,
            &grid,
            &self.helm,
            &mut stage.eta,
            &mut stage.u,
        );
    }

    /// Advance `state` by one time step in place.
    pub fn step(&mut self, state: &mut FieldPair) -> Result<()> {
        let grid = self.config.grid;
        let dt = self.config.dt;
        let n = grid.n;
        if state.len() != n {
            return Err(Error::GridMismatch(format!(
                "state has {} values, grid has {n}",
                state.len()
            )));
        }
        match self.config.system {
            System::ShallowWater => {
                let stage = &mut self.stages[0];
                self.ws
                    .rusanov_rates(&state.eta, &state.u, &grid, &mut stage.eta, &mut stage.u);
                for i in 0..n {
                    state.eta[i] += dt * stage.eta[i];
                    state.u[i] += dt * stage.u[i];
                }
            }
            _ => {
                const C: [f64; 3] = [0.5, 0.5, 1.0];
                self.trial.eta.copy_from_slice(&state.eta);
                self.trial.u.copy_from_slice(&state.u);
                for k in 0..4 {
                    self.trial.t = state.t;
                    self.rates(k);
                    if k < 3 {
                        let h = C[k] * dt;
                        for i in 0..n {
                            self.trial.eta[i] = state.eta[i] + h * self.stages[k].eta[i];
                            self.trial.u[i] = state.u[i] + h * self.stages[k].u[i];
                        }
                        self.trial.check(&grid).map_err(|e| stamp(e, state.t))?;
                    }
                }
                let w = dt / 6.0;
                for i in 0..n {
                    state.eta[i] += w
                        * (self.stages[0].eta[i]
                            + 2.0 * (self.stages[1].eta[i] + self.stages[2].eta[i])
                            + self.stages[3].eta[i]);
                    state.u[i] += w
                        * (self.stages[0].u[i]
                            + 2.0 * (self.stages[1].u[i] + self.stages[2].u[i])
                            + self.stages[3].u[i]);
                }
            }
        }
        state.t += dt;
        state.check(&grid).map_err(|e| stamp(e, state.t))
    }

    /// Run to `t_end`, calling `observe` after every step and returning
    /// the states nearest to the requested snapshot times, plus the final
    /// state.
    pub fn run<F>(&mut self, observe: F) -> Result<Vec<FieldPair>>
    where
        F: FnMut(&FieldPair) -> Result<()>,
    {
        let state = self.initial_state()?;
        self.run_from(state, observe)
    }

    /// As [`Solver::run`], starting from an arbitrary state at `t = 0`.
    pub fn run_from<F>(&mut self, mut state: FieldPair, mut observe: F) -> Result<Vec<FieldPair>>
    where
        F: FnMut(&FieldPair) -> Result<()>,
    {
        if state.len() != self.config.grid.n {
            return Err(Error::GridMismatch(format!(
                "state has {} values, grid has {}",
                state.len(),
                self.config.grid.n
            )));
        }
        state.check(&self.config.grid)?;
        self.config.check_cfl(&state)?;
        state.t = 0.0;
        let steps = self.config.steps();
        let dt = self.config.dt;
        let mut wanted: Vec<usize> = self
            .config
            .snapshot_times
            .iter()
            .map(|t| ((t / dt).round() as usize).min(steps))
            .collect();
        wanted.push(steps);
        wanted.sort_unstable();
        wanted.dedup();
        let mut out = Vec::with_capacity(wanted.len());
        let mut next = wanted.iter().peekable();
        observe(&state)?;
        if next.peek() == Some(&&0) {
            out.push(state.clone());
            next.next();
        }
        for k in 1..=steps {
            self.step(&mut state)?;
            // keep t an exact multiple of dt
            state.t = k as f64 * dt;
            observe(&state)?;
            if next.peek() == Some(&&k) {
                out.push(state.clone());
                next.next();
            }
        }
        Ok(out)
    }
}

fn stamp(e: Error, t: f64) -> Error {
    match e {
        Error::Instability { detail, .. } => Error::Instability { t, detail },
        other => other,
    }
}

/// Advance a copy of `state` by one step of `config`.
pub fn step(state: &FieldPair, config: &RunConfig) -> Result<FieldPair> {
    let mut solver = Solver::new(config)?;
    config.check_cfl(state)?;
    let mut next = state.clone();
    solver.step(&mut next)?;
    Ok(next)
}

/// Snapshots at the configured times (nearest step) and at `t_end`.
pub fn evolve(config: &RunConfig) -> Result<Vec<FieldPair>> {
    Solver::new(config)?.run(|_| Ok(()))
}

/// `sqrt(|h|^2 + |w|^2 + |w_x|^2)` with `h = a.eta - b.eta`, `w = a.u - b.u`.
pub fn error_norm(a: &FieldPair, b: &FieldPair, grid: &Grid) -> Result<f64> {
    if a.len() != grid.n || b.len() != grid.n {
        return Err(Error::GridMismatch(format!(
            "states have {} and {} values, grid has {}",
            a.len(),
            b.len(),
            grid.n
        )));
    }
    let w: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
    let wx = first_difference(&w, grid, -1.0);
    let mut sum = 0.0;
    for i in 0..grid.n {
        let h = a.eta[i] - b.eta[i];
        sum += h * h + w[i] * w[i] + wx[i] * wx[i];
    }
    Ok((sum * grid.dx).sqrt())
}

/// `sum (eta^2 + (1 + eta) u^2 + delta u_x^2) dx`, reported as a diagnostic.
pub fn energy(state: &FieldPair, grid: &Grid, delta: f64) -> f64 {
    let ux = first_difference(&state.u, grid, -1.0);
    let mut sum = 0.0;
    for i in 0..grid.n {
        let (e, u) = (state.eta[i], state.u[i]);
        sum += e * e + (1.0 + e) * u * u + delta * ux[i] * ux[i];
    }
    sum * grid.dx
}

/// Largest `x` where `f` crosses `level` going down to the right, by
/// linear interpolation between nodes.
pub fn front_position(f: &[f64], grid: &Grid, level: f64) -> Option<f64> {
    (0..grid.n - 1).rev().find_map(|i| {
        let (a, b) = (f[i] - level, f[i + 1] - level);
        if a >= 0.0 && b < 0.0 {
            Some(grid.x(i) + grid.dx * a / (a - b))
        } else {
            None
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorFit {
    pub epsilon: f64,
    /// Least-squares slope of `y` against `epsilon t`, through the origin.
    pub k: f64,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStudy {
    pub initial_norm: f64,
    pub series: Vec<ErrorSeries>,
    pub fits: Vec<ErrorFit>,
}

impl ErrorSeries {
    /// Linear interpolation of `y` at time `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 || i > self.times.len() {
            return None;
        }
        if i == self.times.len() {
            return (self.times[i - 1] == t).then(|| self.y[i - 1]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let s = (t - t0) / (t1 - t0);
        Some(self.y[i - 1] + s * (self.y[i] - self.y[i - 1]))
    }

    /// Fit `y = K epsilon t` over `t >= 1` while `y < 0.1 * initial_norm`.
    pub fn fit(&self, initial_norm: f64) -> ErrorFit {
        let cap = 0.1 * initial_norm;
        let (mut sxy, mut sxx, mut points) = (0.0, 0.0, 0);
        let mut window = (f64::NAN, f64::NAN);
        for (&t, &y) in self.times.iter().zip(&self.y) {
            if t < 1.0 {
                continue;
            }
            if y >= cap {
                break;
            }
            let x = self.epsilon * t;
            sxy += x * y;
            sxx += x * x;
            points += 1;
            if window.0.is_nan() {
                window.0 = t;
            }
            window.1 = t;
        }
        ErrorFit {
            epsilon: self.epsilon,
            k: if sxx > 0.0 { sxy / sxx } else { f64::NAN },
            window,
            points,
        }
    }
}

fn sample_times(config: &RunConfig) -> Vec<f64> {
    let every = 0.5;
    let n = (config.t_end / every).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * every).collect();
    times.extend(config.snapshot_times.iter().copied().filter(|t| *t <= config.t_end));
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Run `base` at `epsilon = 0` and at each `epsilon`, sampling the error
/// norm against the inviscid run every half time unit and at any snapshot
/// times. Runs execute on the current rayon pool.
pub fn error_study(base: &RunConfig, epsilons: &[f64]) -> Result<ErrorStudy> {
    use rayon::prelude::*;

    if epsilons.is_empty() {
        return Err(Error::InvalidParameter("no epsilon values given".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "epsilon values must be positive (got {e})"
        )));
    }
    let mut cfg = base.clone();
    cfg.snapshot_times = sample_times(base);
    cfg.system = System::PeregrineDissipative;

    let mut runs: Vec<f64> = vec![0.0];
    runs.extend_from_slice(epsilons);
    let results: Vec<Result<Vec<FieldPair>>> = runs
        .par_iter()
        .map(|&eps| {
            let mut c = cfg.clone();
            c.epsilon = eps;
            evolve(&c)
        })
        .collect();
    let mut results = results.into_iter();
    let reference = results.next().expect("reference run")?;
    let initial = make_initial(&cfg.ic, &cfg.grid)?;
    let initial_norm = error_norm(&initial, &FieldPair::zeros(cfg.grid.n), &cfg.grid)?;

    let mut series = Vec::with_capacity(epsilons.len());
    for (eps, run) in epsilons.iter().zip(results) {
        let run = run?;
        let mut s = ErrorSeries {
            epsilon: *eps,
            times: Vec::with_capacity(run.len()),
            y: Vec::with_capacity(run.len()),
        };
        for (a, b) in run.iter().zip(&reference) {
            s.times.push(a.t);
            s.y.push(error_norm(a, b, &cfg.grid)?);
        }
        series.push(s);
    }
    let fits = series.iter().map(|s| s.fit(initial_norm)).collect();
    Ok(ErrorStudy {
        initial_norm,
        series,
        fits,
    })
}

/// A classical shallow-water shock moving right into still water.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockState {
    pub eta_tail: f64,
    pub u_tail: f64,
    pub speed: f64,
}

impl ShockState {
    /// Jump-condition residuals `s [q] - [f(q)]` for the flux
    /// `(u + eta u, eta + u^2/2)` against the rest state.
    pub fn jump_residuals(&self) -> (f64, f64) {
        let (e, u, s) = (self.eta_tail, self.u_tail, self.speed);
        (s * e - (u + e * u), s * u - (e + 0.5 * u * u))
    }
}

/// The shallow-water shock of speed `c` into rest; its left state is the
/// tail of the traveling wave with the same speed.
pub fn shallow_water_shock_reference(c: f64) -> Result<ShockState> {
    if c == 1.0 {
        return Ok(ShockState {
            eta_tail: 0.0,
            u_tail: 0.0,
            speed: 1.0,
        });
    }
    let eq = equilibria_for_speed(c)?;
    Ok(ShockState {
        eta_tail: eq.eta_tail,
        u_tail: eq.u_tail,
        speed: c,
    })
}

/// The right-going shock produced by a dam break from `eta_left` (at
/// rest) onto still water: a left rarefaction keeps `u + 2 sqrt(1 + eta)`
/// constant and joins the shock's left state.
pub fn riemann_shock_state(eta_left: f64) -> Result<ShockState> {
    if !(eta_left > 0.0) || !eta_left.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dam break needs eta_left > 0 (got {eta_left})"
        )));
    }
    let target = 2.0 * (1.0 + eta_left).sqrt();
    let g = |c: f64| tail_velocity(c) + 2.0 * (1.0 + tail_elevation(c)).sqrt() - target;
    let (mut a, mut b) = (1.0, 2.0);
    while g(b) < 0.0 {
        a = b;
        b *= 2.0;
        if b > 1e6 {
            return Err(Error::NonConvergence(format!(
                "no shock speed found for eta_left = {eta_left}"
            )));
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 2.0 * f64::EPSILON * b {
            break;
        }
    }
    shallow_water_shock_reference(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{integrate_profile, ProfileOptions};
    use crate::waveform::WaveParams;
    use approx::assert_relative_eq;

    fn periodic(n: usize) -> Grid {
        Grid::new(-50.0, 50.0, n, Boundary::Periodic).unwrap()
    }

    fn apply_helmholtz(u: &[f64], delta: f64, grid: &Grid) -> Vec<f64> {
        let d2 = second_difference(u, grid, -1.0);
        u.iter().zip(&d2).map(|(a, b)| a - delta * b).collect()
    }

    #[test]
    fn helmholtz_inverts_the_discrete_symbol() {
        let grid = periodic(200);
        let delta = 0.7;
        let k = 2.0 * std::f64::consts::PI * 3.0 / (grid.x_max - grid.x_min);
        let symbol = 1.0 + delta * 4.0 / grid.dx.powi(2) * (0.5 * k * grid.dx).sin().powi(2);
        let rhs: Vec<f64> = grid.coordinates().iter().map(|x| symbol * (k * x).sin()).collect();
        let u = helmholtz_apply_inverse(&rhs, delta, &grid).unwrap();
        for (i, x) in grid.coordinates().iter().enumerate() {
            assert!((u[i] - (k * x).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn helmholtz_residual_both_closures() {
        for boundary in [Boundary::Periodic, Boundary::Reflective] {
            let grid = Grid::new(-10.0, 10.0, 101, boundary).unwrap();
            let rhs: Vec<f64> = (0..grid.n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
            for delta in [0.0, 0.3, 5.0] {
                let u = Helmholtz::new(delta, &grid).unwrap().solve(&rhs);
                let back = apply_helmholtz(&u, delta, &grid);
                for (a, b) in back.iter().zip(&rhs) {
                    assert!((a - b).abs() < 1e-11, "{boundary:?} delta {delta}");
                }
            }
        }
    }

    #[test]
    fn zero_state_is_stationary() {
        let grid = periodic(64);
        let rate = semidiscrete_rhs_peregrine(&FieldPair::zeros(64), 1.0, 0.1, &grid).unwrap();
        assert!(rate.eta.iter().chain(&rate.u).all(|x| *x == 0.0));
    }

    #[test]
    fn gaussian_error_norm() {
        let grid = Grid::with_spacing(-100.0, 100.0, 0.1, Boundary::Periodic).unwrap();
        let ic = InitialCondition::Gaussian {
            amplitude: 1.0,
            width: 10.0,
        };
        let a = make_initial(&ic, &grid).unwrap();
        let y = error_norm(&a, &FieldPair::zeros(grid.n), &grid).unwrap();
        let expect = (10.0 * (std::f64::consts::PI / 2.0).sqrt()).sqrt();
        assert_relative_eq!(y, expect, max_relative = 1e-10);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let grid = periodic(64);
        let err = error_norm(&FieldPair::zeros(64), &FieldPair::zeros(63), &grid).unwrap_err();
        assert!(matches!(err, Error::GridMismatch(_)));
    }

    #[test]
    fn vacuum_is_detected() {
        let grid = periodic(64);
        let mut s = FieldPair::zeros(64);
        s.eta[10] = -1.0;
        assert!(matches!(s.check(&grid), Err(Error::Vacuum { .. })));
        s.eta[10] = f64::NAN;
        assert!(matches!(s.check(&grid), Err(Error::Instability { .. })));
    }

    #[test]
    fn shock_states_satisfy_jump_conditions() {
        for c in [1.0, 1.05, 1.2, 1.5, 3.0] {
            let s = shallow_water_shock_reference(c).unwrap();
            let (r1, r2) = s.jump_residuals();
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12, "c = {c}: {r1:e} {r2:e}");
        }
        let s = riemann_shock_state(0.5).unwrap();
        assert!(s.speed > 1.0 && s.eta_tail > 0.0 && s.eta_tail < 0.5);
        let invariant = s.u_tail + 2.0 * (1.0 + s.eta_tail).sqrt();
        assert_relative_eq!(invariant, 2.0 * 1.5f64.sqrt(), max_relative = 1e-14);
        assert!(riemann_shock_state(0.0).is_err());
    }

    #[test]
    fn traveling_wave_is_nearly_steady_in_the_moving_frame() {
        let p = WaveParams::new(1.3, 0.2, 1.2).unwrap();
        let profile = integrate_profile(&p, &ProfileOptions::default()).unwrap();
        let grid = Grid::with_spacing(-60.0, 60.0, 0.05, Boundary::Periodic).unwrap();
        let state = traveling_wave_state(&profile, &grid, 0.0);
        let rate = semidiscrete_rhs_peregrine(&state, p.delta, p.epsilon, &grid).unwrap();
        let eta_x = first_difference(&state.eta, &grid, 1.0);
        let u_x = first_difference(&state.u, &grid, -1.0);
        // only the window well inside the domain, away from the periodic wrap
        for i in 0..grid.n {
            if grid.x(i).abs() < 30.0 {
                assert!((rate.eta[i] + p.c * eta_x[i]).abs() < 1e-3, "eta at {}", grid.x(i));
                assert!((rate.u[i] + p.c * u_x[i]).abs() < 1e-3, "u at {}", grid.x(i));
            }
        }
    }

    #[test]
    fn mass_is_conserved() {
        for system in [
            System::PeregrineDissipative,
            System::PeregrineInviscid,
            System::ShallowWater,
        ] {
            let cfg = RunConfig {
                system,
                delta: 1.0,
                epsilon: 0.1,
                grid: Grid::with_spacing(-100.0, 100.0, 0.25, Boundary::Periodic).unwrap(),
                dt: 0.025,
                t_end: 5.0,
                ic: InitialCondition::Gaussian {
                    amplitude: 0.5,
                    width: 10.0,
                },
                snapshot_times: vec![],
            };
            let snaps = evolve(&cfg).unwrap();
            let m0 = snaps[0].mass(&cfg.grid);
            let m1 = snaps.last().unwrap().mass(&cfg.grid);
            assert!((m1 - m0).abs() < 1e-11 * m0.abs(), "{system:?}: {m0} -> {m1}");
        }
    }

    #[test]
    fn zero_duration_returns_the_initial_state() {
        let cfg = RunConfig {
            system: System::PeregrineDissipative,
            delta: 1.0,
            epsilon: 0.1,
            grid: periodic(128),
            dt: 0.05,
            t_end: 0.0,
            ic: InitialCondition::Gaussian {
                amplitude: 0.2,
                width: 5.0,
            },
            snapshot_times: vec![],
        };
        let snaps = evolve(&cfg).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0], make_initial(&cfg.ic, &cfg.grid).unwrap());
    }

    #[test]
    fn front_position_interpolates() {
        let grid = Grid::new(0.0, 10.0, 101, Boundary::Reflective).unwrap();
        let f: Vec<f64> = grid.coordinates().iter().map(|x| 5.05 - x).collect();
        assert_relative_eq!(front_position(&f, &grid, 0.0).unwrap(), 5.05, epsilon = 1e-12);
        assert!(front_position(&f, &grid, 100.0).is_none());
    }
}
