//! Heteroclinic traveling-wave profiles.
//!
//! The orbit leaving `(u0, 0)` at `xi = -infinity` and entering the saddle
//! at the origin is computed backwards: the integration starts a small
//! distance `s` from the origin on the stable eigendirection and runs in
//! decreasing `xi` with Radau IIA until the tail equilibrium is reached.
//! A short forward stretch from the same seed resolves the decay to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radau::{OdeSystem, Radau5, RadauOptions, RadauStats};
use crate::waveform::{saddle_eigenvalues, PhasePoint, RegimeKind, WaveParams};

/// Closest approach to the pole `u = c` tolerated along an orbit.
pub const POLE_GUARD: f64 = 1e-9;

/// Right-hand side of the first-order traveling-wave system.
pub fn vector_field(state: PhasePoint, params: &WaveParams) -> Result<PhasePoint> {
    let PhasePoint { u, v } = state;
    let c = params.c;
    if !u.is_finite() || !v.is_finite() || (u - c).abs() <= f64::EPSILON * c {
        return Err(Error::Singularity {
            u,
            c,
            tol: f64::EPSILON * c,
        });
    }
    let inv_dc = 1.0 / params.delta_c();
    Ok(PhasePoint {
        u: inv_dc * v,
        v: c * u + u / (u - c) - 0.5 * u * u + params.epsilon * inv_dc * v,
    })
}

/// Jacobian `[[0, 1/(delta c)], [c - c/(u-c)^2 - u, epsilon/(delta c)]]`.
pub fn vector_field_jacobian(state: PhasePoint, params: &WaveParams) -> Result<[[f64; 2]; 2]> {
    let c = params.c;
    let d = state.u - c;
    if d.abs() <= f64::EPSILON * c {
        return Err(Error::Singularity {
            u: state.u,
            c,
            tol: f64::EPSILON * c,
        });
    }
    let inv_dc = 1.0 / params.delta_c();
    Ok([[0.0, inv_dc], [c - c / (d * d) - state.u, params.epsilon * inv_dc]])
}

struct TravelingWaveOde<'a> {
    params: &'a WaveParams,
}

impl OdeSystem<2> for TravelingWaveOde<'_> {
    fn rhs(&self, y: &[f64; 2]) -> Result<[f64; 2]> {
        let r = vector_field(PhasePoint::new(y[0], y[1]), self.params)?;
        Ok([r.u, r.v])
    }

    fn jacobian(&self, y: &[f64; 2]) -> Result<[[f64; 2]; 2]> {
        vector_field_jacobian(PhasePoint::new(y[0], y[1]), self.params)
    }
}

/// Point at distance `s` (in `u`) from the origin along the stable
/// eigendirection `v = delta c lambda_minus u`, in the fourth quadrant.
pub fn seed_on_stable_manifold(params: &WaveParams, s: f64) -> Result<PhasePoint> {
    let u0 = params.equilibria().u_tail;
    if !(s > 0.0 && s < 0.01 * u0) {
        return Err(Error::InvalidParameter(format!(
            "seed offset must lie in (0, 0.01 u0) = (0, {}) (got {s})",
            0.01 * u0
        )));
    }
    let (lambda_minus, _) = saddle_eigenvalues(params);
    Ok(PhasePoint::new(s, s * params.delta_c() * lambda_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Seed distance from the saddle; `None` selects `1e-8 u0`.
    pub seed_offset: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Largest `|xi|` distance from the seed before giving up.
    pub max_span: f64,
    /// Stopping tolerance for the approach to `(u0, 0)`.
    pub tail_tol: f64,
    /// Largest step in `xi`, which also bounds the sample spacing.
    pub max_step: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            seed_offset: None,
            rtol: 1e-10,
            atol: 1e-12,
            max_span: 1e4,
            tail_tol: 1e-8,
            max_step: 0.05,
        }
    }
}

impl ProfileOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.rtol < 1e-2
            && self.atol > 0.0
            && self.atol < 1e-2
            && self.max_span > 0.0
            && self.tail_tol > 0.0
            && self.tail_tol < 1e-2
            && self.max_step > 0.0
            && self.seed_offset.is_none_or(|s| s > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "profile options out of range: {self:?}"
            )))
        }
    }
}

/// A sampled heteroclinic orbit, sorted by increasing `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eta: Vec<f64>,
    pub params: WaveParams,
    pub seed_offset: f64,
    pub options: ProfileOptions,
    #[serde(skip)]
    pub stats: RadauStats,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn point(&self, i: usize) -> PhasePoint {
        PhasePoint::new(self.u[i], self.v[i])
    }

    /// `u' = v / (delta c)` at sample `i`.
    pub fn du(&self, i: usize) -> f64 {
        self.v[i] / self.params.delta_c()
    }

    /// Interval index `i` with `xi[i] <= x < xi[i+1]`, if `x` is inside the grid.
    fn bracket(&self, x: f64) -> Option<usize> {
        let n = self.xi.len();
        if n < 2 || x < self.xi[0] || x > self.xi[n - 1] {
            return None;
        }
        let i = self.xi.partition_point(|&t| t <= x);
        Some(i.saturating_sub(1).min(n - 2))
    }

    /// Cubic Hermite interpolation of `(u, v)` at `x`, using the vector
    /// field for the derivatives. Outside the sampled range the tails are
    /// continued by their limits: `(u0, 0)` on the left and exponential
    /// decay along the stable direction on the right.
    pub fn eval(&self, x: f64) -> PhasePoint {
        let n = self.xi.len();
        if x < self.xi[0] {
            return PhasePoint::new(self.params.equilibria().u_tail, 0.0);
        }
        if x > self.xi[n - 1] {
            let (lm, _) = saddle_eigenvalues(&self.params);
            let u = self.u[n - 1] * (lm * (x - self.xi[n - 1])).exp();
            return PhasePoint::new(u, self.params.delta_c() * lm * u);
        }
        let i = self.bracket(x).expect("inside range");
        hermite_pair(self, i, x)
    }

    /// Surface elevation at `x` from the interpolated velocity.
    pub fn eval_eta(&self, x: f64) -> f64 {
        let u = self.eval(x).u;
        u / (self.params.c - u)
    }

    /// Shift the abscissa so that `xi = 0` sits at `xi_new_origin`.
    fn translate(&mut self, xi_new_origin: f64) {
        for x in &mut self.xi {
            *x -= xi_new_origin;
        }
    }
}

fn hermite_pair(p: &Profile, i: usize, x: f64) -> PhasePoint {
    let (x0, x1) = (p.xi[i], p.xi[i + 1]);
    let h = x1 - x0;
    let t = (x - x0) / h;
    let f0 = vector_field(p.point(i), &p.params).unwrap_or(PhasePoint::ORIGIN);
    let f1 = vector_field(p.point(i + 1), &p.params).unwrap_or(PhasePoint::ORIGIN);
    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    PhasePoint::new(
        h00 * p.u[i] + h10 * h * f0.u + h01 * p.u[i + 1] + h11 * h * f1.u,
        h00 * p.v[i] + h10 * h * f0.v + h01 * p.v[i + 1] + h11 * h * f1.v,
    )
}

/// Fill `eta = u / (c - u)` from the sampled velocity.
pub fn reconstruct_eta(profile: &mut Profile) -> Result<()> {
    let c = profile.params.c;
    let mut eta = Vec::with_capacity(profile.u.len());
    for &u in &profile.u {
        if !(u < c) {
            return Err(Error::Singularity { u, c, tol: 0.0 });
        }
        eta.push(u / (c - u));
    }
    profile.eta = eta;
    Ok(())
}

/// Stopping logic for the backward leg.
struct TailMonitor {
    u0: f64,
    tail_tol: f64,
    oscillatory: bool,
    prev_v: f64,
    prev_dev: f64,
    peaks: Vec<f64>,
}

impl TailMonitor {
    fn reached(&mut self, y: &[f64; 2]) -> bool {
        let dev = (y[0] - self.u0).abs();
        if dev + y[1].abs() < self.tail_tol {
            return true;
        }
        if self.oscillatory && self.prev_v * y[1] < 0.0 {
            self.peaks.push(dev.max(self.prev_dev));
            let last3 = &self.peaks[self.peaks.len().saturating_sub(3)..];
            if last3.len() == 3 && last3[2] < self.tail_tol && last3[2] < last3[0] {
                return true;
            }
        }
        self.prev_v = y[1];
        self.prev_dev = dev;
        false
    }
}

/// Compute the traveling-wave profile for `params` (requires `epsilon > 0`).
pub fn integrate_profile(params: &WaveParams, opts: &ProfileOptions) -> Result<Profile> {
    params.validate()?;
    opts.validate()?;
    if params.epsilon <= 0.0 {
        return Err(Error::InvalidParameter(
            "a front connecting (u0, 0) to the origin needs epsilon > 0".into(),
        ));
    }
    let eq = params.equilibria();
    let c = params.c;
    let s = opts.seed_offset.unwrap_or(1e-8 * eq.u_tail);
    let seed = seed_on_stable_manifold(params, s)?;
    let (lambda_minus, lambda_plus) = saddle_eigenvalues(params);

    let ode = TravelingWaveOde { params };
    let radau_opts = RadauOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: (0.01 / lambda_plus.max(lambda_minus.abs())).min(opts.max_step),
        h_max: opts.max_step,
        ..RadauOptions::default()
    };
    let guard = |xi: f64, y: &[f64; 2]| -> Result<()> {
        if y[0] > c - POLE_GUARD {
            return Err(Error::Singularity {
                u: y[0],
                c,
                tol: POLE_GUARD,
            });
        }
        if y[0] <= 0.0 {
            return Err(Error::StepFailure {
                xi,
                step: 0.0,
                reason: format!("orbit left the half-plane u > 0 (u = {})", y[0]),
            });
        }
        Ok(())
    };

    let mut monitor = TailMonitor {
        u0: eq.u_tail,
        tail_tol: opts.tail_tol,
        oscillatory: params.regime().kind == RegimeKind::Oscillatory,
        prev_v: seed.v,
        prev_dev: eq.u_tail,
        peaks: Vec::new(),
    };
    let mut solver = Radau5::new(&ode, radau_opts);
    let backward = solver.integrate(0.0, [seed.u, seed.v], -1.0, opts.max_span, guard, |_, y| {
        monitor.reached(y)
    })?;
    let mut stats = solver.stats;

    // Forward leg along the stable manifold. Its length is capped so that
    // rounding errors in the unstable direction grow by at most 1e4.
    let fwd_span = (1e3f64.ln() / lambda_minus.abs()).min(1e4f64.ln() / lambda_plus);
    let mut solver = Radau5::new(&ode, radau_opts);
    let forward = solver.integrate(0.0, [seed.u, seed.v], 1.0, 2.0 * fwd_span, guard, |t, _| t >= fwd_span)?;
    stats.accepted += solver.stats.accepted;
    stats.rejected += solver.stats.rejected;
    stats.newton_failures += solver.stats.newton_failures;
    stats.rhs_evals += solver.stats.rhs_evals;

    let n = backward.len() + forward.len() - 1;
    let (mut xi, mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (t, y) in backward.iter().rev().chain(forward.iter().skip(1)) {
        xi.push(*t);
        u.push(y[0]);
        v.push(y[1]);
    }

    let mut profile = Profile {
        xi,
        u,
        v,
        eta: Vec::new(),
        params: *params,
        seed_offset: s,
        options: *opts,
        stats,
    };
    reconstruct_eta(&mut profile)?;
    if let Some(x_half) = rightmost_crossing(&profile, 0.5 * eq.u_tail) {
        profile.translate(x_half);
    }
    Ok(profile)
}

/// Largest `xi` where `u` crosses `level`, refined on the Hermite interpolant.
pub fn rightmost_crossing(profile: &Profile, level: f64) -> Option<f64> {
    let n = profile.len();
    let i = (0..n.saturating_sub(1))
        .rev()
        .find(|&i| (profile.u[i] - level) * (profile.u[i + 1] - level) <= 0.0)?;
    let f = |x: f64| hermite_pair(profile, i, x).u - level;
    Some(secant_in_bracket(f, profile.xi[i], profile.xi[i + 1], 1e-12))
}

/// Secant iteration safeguarded by the bracket `[a, b]` (regula falsi with
/// the Illinois modification).
pub(crate) fn secant_in_bracket<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..100 {
        let x = (a * fb - b * fa) / (fb - fa);
        let fx = f(x);
        if fx == 0.0 || (b - a).abs() < tol {
            return x;
        }
        if fx * fb < 0.0 {
            a = b;
            fa = fb;
            b = x;
            fb = fx;
            side = 0;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol * (1.0 + b.abs()) {
            return b;
        }
    }
    b
}
