//! Closed-form quantities of the traveling-wave problem.
//!
//! A traveling wave `(eta, u)(x - c t)` of the dissipative Peregrine system
//! reduces to the planar system
//!
//! ```text
//! u' = v / (delta c)
//! v' = c u + u / (u - c) - u^2 / 2 + epsilon v / (delta c)
//! ```
//!
//! with equilibria at the origin (a saddle) and at `(u0, 0)` (an unstable
//! node or spiral). Everything in this module is an explicit formula in
//! `(c, delta, epsilon)`: equilibria, linearized spectra, the regime
//! criterion, the potential `G`, and the solitary-wave speed-amplitude
//! relations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for identities between closed-form quantities.
pub const MACHINE_TOL: f64 = 1e-12;

/// A traveling-wave configuration: phase speed (Froude number), dispersion
/// and dissipation coefficients, all in scaled variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub c: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl WaveParams {
    pub fn new(c: f64, delta: f64, epsilon: f64) -> Result<Self> {
        let p = WaveParams { c, delta, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "phase speed must satisfy c > 1 (got c = {})",
                self.c
            )));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dispersion must satisfy delta > 0 (got delta = {})",
                self.delta
            )));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dissipation must satisfy epsilon >= 0 (got epsilon = {})",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// The product `delta * c` that scales `v = delta c u'`.
    pub fn delta_c(&self) -> f64 {
        self.delta * self.c
    }

    pub fn equilibria(&self) -> Equilibria {
        equilibria_unchecked(self.c)
    }

    pub fn spectrum(&self) -> Spectrum {
        tail_eigenvalues(self)
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }
}

/// A state of the first-order traveling-wave system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: f64,
    pub v: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { u: 0.0, v: 0.0 };

    pub fn new(u: f64, v: f64) -> Self {
        PhasePoint { u, v }
    }
}

/// Equilibria of the traveling-wave system for a given speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibria {
    pub u_zero: f64,
    /// Smaller root of `u^2 - 3 c u + 2 (c^2 - 1) = 0`.
    pub u_minus: f64,
    /// Larger root; always above the pole `u = c` and never connected.
    pub u_plus: f64,
    /// Limit of `u` as `xi -> -infinity` (equal to `u_minus`).
    pub u_tail: f64,
    /// Limit of `eta` as `xi -> -infinity`.
    pub eta_tail: f64,
    /// Inflection point of the potential, `c - c^(1/3)`.
    pub u_inflect: f64,
}

fn check_speed(c: f64) -> Result<()> {
    if !c.is_finite() || c <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "no traveling wave for c <= 1 (got c = {c})"
        )));
    }
    Ok(())
}

/// Equilibria for speed `c > 1`.
pub fn equilibria(params: &WaveParams) -> Result<Equilibria> {
    check_speed(params.c)?;
    Ok(equilibria_unchecked(params.c))
}

/// Equilibria for a bare speed, rejecting `c <= 1`.
pub fn equilibria_for_speed(c: f64) -> Result<Equilibria> {
    check_speed(c)?;
    Ok(equilibria_unchecked(c))
}

fn equilibria_unchecked(c: f64) -> Equilibria {
    let u_plus = 0.5 * (3.0 * c + (c * c + 8.0).sqrt());
    let u_minus = tail_velocity(c);
    Equilibria {
        u_zero: 0.0,
        u_minus,
        u_plus,
        u_tail: u_minus,
        eta_tail: u_minus / (c - u_minus),
        u_inflect: c - c.cbrt(),
    }
}

/// `u0(c) = (3c - sqrt(c^2 + 8)) / 2`, valid for `c >= 1`.
///
/// Evaluated through the product of roots, `u0 = 2 (c^2 - 1) / u_plus`,
/// which keeps full relative accuracy as `c -> 1`.
pub fn tail_velocity(c: f64) -> f64 {
    let u_plus = 0.5 * (3.0 * c + (c * c + 8.0).sqrt());
    2.0 * (c - 1.0) * (c + 1.0) / u_plus
}

/// `eta0(c) = u0 / (c - u0)`, valid for `c >= 1`.
pub fn tail_elevation(c: f64) -> f64 {
    let u0 = tail_velocity(c);
    u0 / (c - u0)
}

/// `alpha(c) = u0 - c + c / (u0 - c)^2`: the restoring coefficient of the
/// linearization at `(u0, 0)`. Zero at `c = 1`, increasing for `c >= 1`.
pub fn alpha(c: f64) -> f64 {
    let d = tail_velocity(c) - c;
    d + c / (d * d)
}

/// The same quantity written directly in `c - sqrt(c^2 + 8)`.
pub fn alpha_radical_form(c: f64) -> f64 {
    let r = c - (c * c + 8.0).sqrt();
    0.5 * r + 4.0 * c / (r * r)
}

/// Eigenvalues of the saddle at the origin, returned as `(lambda_minus, lambda_plus)`.
pub fn saddle_eigenvalues(params: &WaveParams) -> (f64, f64) {
    let WaveParams { c, delta, epsilon } = *params;
    let dc = delta * c;
    let disc = (epsilon * epsilon + 4.0 * delta * (c - 1.0) * (c + 1.0)).sqrt();
    let plus = (epsilon + disc) / (2.0 * dc);
    // product of roots is -(c^2 - 1) / (delta c^2)
    let minus = -(c - 1.0) * (c + 1.0) / (delta * c * c * plus);
    (minus, plus)
}

/// The eigenvalue pair at `(u0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailPair {
    /// Unstable node: `0 < minus <= plus`.
    RealPair { minus: f64, plus: f64 },
    /// Unstable spiral: `re ± i im` with `im > 0`.
    ComplexConjugate { re: f64, im: f64 },
}

impl TailPair {
    /// Real part of `Lambda_plus`.
    pub fn growth_rate(&self) -> f64 {
        match *self {
            TailPair::RealPair { plus, .. } => plus,
            TailPair::ComplexConjugate { re, .. } => re,
        }
    }

    /// `|Im(Lambda_plus)|`; zero for a node.
    pub fn frequency(&self) -> f64 {
        match *self {
            TailPair::RealPair { .. } => 0.0,
            TailPair::ComplexConjugate { im, .. } => im,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, TailPair::ComplexConjugate { .. })
    }
}

/// Linearized spectra at both equilibria together with the regime data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub tail: TailPair,
    pub alpha: f64,
    /// `epsilon^2 - 4 delta c alpha(c)`.
    pub discriminant: f64,
    /// Slope `m = delta c Lambda_minus` of the confining triangle (node case only).
    pub triangle_slope: Option<f64>,
}

pub fn tail_eigenvalues(params: &WaveParams) -> Spectrum {
    let WaveParams { c, delta, epsilon } = *params;
    let dc = delta * c;
    let a = alpha(c);
    let discriminant = epsilon * epsilon - 4.0 * dc * a;
    let (lambda_minus, lambda_plus) = saddle_eigenvalues(params);
    let (tail, triangle_slope) = if discriminant >= 0.0 {
        let plus = (epsilon + discriminant.sqrt()) / (2.0 * dc);
        // Lambda_plus * Lambda_minus = alpha / (delta c)
        let minus = if plus > 0.0 { a / (dc * plus) } else { 0.0 };
        (TailPair::RealPair { minus, plus }, Some(dc * minus))
    } else {
        (
            TailPair::ComplexConjugate {
                re: epsilon / (2.0 * dc),
                im: (-discriminant).sqrt() / (2.0 * dc),
            },
            None,
        )
    };
    Spectrum {
        lambda_minus,
        lambda_plus,
        tail,
        alpha: a,
        discriminant,
        triangle_slope,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    Oscillatory,
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// `epsilon^2`
    pub criterion_lhs: f64,
    /// `4 delta c alpha(c)`
    pub criterion_rhs: f64,
}

pub fn classify_regime(params: &WaveParams) -> Regime {
    let lhs = params.epsilon * params.epsilon;
    let rhs = 4.0 * params.delta * params.c * alpha(params.c);
    let kind = if lhs < rhs {
        RegimeKind::Oscillatory
    } else {
        RegimeKind::Regularized
    };
    Regime {
        kind,
        criterion_lhs: lhs,
        criterion_rhs: rhs,
    }
}

/// Smallest `epsilon` for which the wave is a regularized (monotone) shock.
///
/// Rounded up to the first double whose square reaches `4 delta c alpha(c)`,
/// so that [`classify_regime`] at exactly this value reports `Regularized`.
pub fn critical_epsilon(c: f64, delta: f64) -> f64 {
    let rhs = 4.0 * delta * c * alpha(c);
    if rhs <= 0.0 {
        return 0.0;
    }
    let mut eps = rhs.sqrt();
    while eps * eps < rhs {
        eps = eps.next_up();
    }
    eps
}

/// `-u - c ln(1 - u/c)`, accurate for small `u`.
fn log_pole_part(u: f64, c: f64) -> f64 {
    let x = u / c;
    if x.abs() < 0.05 {
        // sum_{k>=2} c x^k / k
        let mut term = x * x;
        let mut sum = 0.0_f64;
        let mut k = 2.0;
        while term.abs() / k > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term / k;
            term *= x;
            k += 1.0;
        }
        c * sum
    } else {
        -u - c * (-x).ln_1p()
    }
}

fn check_pole(u: f64, c: f64) -> Result<()> {
    if !u.is_finite() || (c - u).abs() <= f64::EPSILON * c {
        return Err(Error::Singularity {
            u,
            c,
            tol: f64::EPSILON * c,
        });
    }
    Ok(())
}

/// Potential `G(u) = delta c [u^3/6 - c u^2/2 - u + c ln(c/|c - u|)]`.
///
/// `G(0) = 0`, `G` has a local maximum at 0, a local minimum at `u0`, an
/// inflection at `c - c^(1/3)` and a pole at `u = c`.
pub fn potential(u: f64, params: &WaveParams) -> Result<f64> {
    let c = params.c;
    check_pole(u, c)?;
    let bracket = if u < c {
        u * u * (u / 6.0 - 0.5 * c) + log_pole_part(u, c)
    } else {
        u * u * (u / 6.0 - 0.5 * c) - u + c * (c / (u - c)).ln()
    };
    Ok(params.delta_c() * bracket)
}

/// `G'(u) = delta c [u^2/2 - c u + u/(c - u)]`.
pub fn potential_derivative(u: f64, params: &WaveParams) -> Result<f64> {
    let c = params.c;
    check_pole(u, c)?;
    Ok(params.delta_c() * (0.5 * u * u - c * u + u / (c - u)))
}

/// Liapunov function `V = v^2/2 + G(u)` of the reversed system.
pub fn liapunov(state: PhasePoint, params: &WaveParams) -> Result<f64> {
    Ok(0.5 * state.v * state.v + potential(state.u, params)?)
}

/// Right-hand side `f(c)` of the energy identity `epsilon * int (u')^2 = f(c)`.
///
/// Evaluated as `-G(u0) / (delta c)`, which is algebraically the same as the
/// explicit expression in `c` but keeps precision near `c = 1`.
pub fn dissipation_integral_rhs(c: f64) -> Result<f64> {
    if !c.is_finite() || c < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "energy identity requires c >= 1 (got c = {c})"
        )));
    }
    let u0 = tail_velocity(c);
    Ok(-(u0 * u0 * (u0 / 6.0 - 0.5 * c) + log_pole_part(u0, c)))
}

/// Explicit form `-(2 + c^2)(sqrt(c^2+8) - 3c)/6 - c ln[c (c + sqrt(c^2+8)) / 4]`.
pub fn dissipation_integral_rhs_explicit(c: f64) -> f64 {
    let r = (c * c + 8.0).sqrt();
    -(2.0 + c * c) * (r - 3.0 * c) / 6.0 - c * (0.25 * c * (c + r)).ln()
}

/// Crest of the solitary wave of the non-dissipative system with speed `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitaryAmplitude {
    pub u_bar: f64,
    pub eta_bar: f64,
    /// `ln(c / (c - u_bar)) = ln(1 + eta_bar)`, the variable the root is solved in.
    pub log_depth: f64,
}

/// `G / (delta c)` written in `y = ln(c / (c - u))`, together with its derivative in `y`.
fn potential_in_log_depth(y: f64, c: f64) -> (f64, f64) {
    let (g, dg, _) = potential_in_log_depth_with_scale(y, c);
    (g, dg)
}

/// As [`potential_in_log_depth`], plus the magnitude of the summed terms.
fn potential_in_log_depth_with_scale(y: f64, c: f64) -> (f64, f64, f64) {
    let u = -c * (-y).exp_m1();
    let cubic = u * u * (u / 6.0 - 0.5 * c);
    // -u + c y, with the small-u series when it matters
    let (linear, linear_scale) = if u / c < 0.05 {
        let l = log_pole_part(u, c);
        (l, l.abs())
    } else {
        (c * y - u, c * y + u)
    };
    let g = cubic + linear;
    let dg = (0.5 * u * u - c * u) * (c - u) + u;
    (g, dg, u * u * (u / 6.0 + 0.5 * c) + linear_scale)
}

/// Solve `G(u_bar) = 0` on `(u0, c)`.
///
/// The root is bracketed in `y = ln(c/(c - u))`: `G(u0) < 0` and
/// `G > 0` once `y > c^2/3 + 1`. A Newton step is taken whenever it stays
/// inside the bracket, otherwise the bracket is bisected.
pub fn solitary_amplitude(params: &WaveParams) -> Result<SolitaryAmplitude> {
    solitary_amplitude_for_speed(params.c)
}

pub fn solitary_amplitude_for_speed(c: f64) -> Result<SolitaryAmplitude> {
    check_speed(c)?;
    let u0 = tail_velocity(c);
    let mut lo = (u0 / (c - u0)).ln_1p();
    let mut hi = c * c / 3.0 + 2.0;
    let (g_lo, _) = potential_in_log_depth(lo, c);
    let (g_hi, _) = potential_in_log_depth(hi, c);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::NonConvergence(format!(
            "speed-amplitude root not bracketed for c = {c}: G(lo) = {g_lo:e}, G(hi) = {g_hi:e}"
        )));
    }
    // start from the cubic-series estimate of the amplitude
    let mut y = {
        let guess = (2.0 * (c - 1.0)).max(1e-300);
        guess.ln_1p().clamp(lo, hi)
    };
    if y <= lo || y >= hi {
        y = 0.5 * (lo + hi);
    }
    let done = |y: f64| SolitaryAmplitude {
        u_bar: -c * (-y).exp_m1(),
        eta_bar: y.exp_m1(),
        log_depth: y,
    };
    let mut last_width = hi - lo;
    for _ in 0..200 {
        let (g, dg, scale) = potential_in_log_depth_with_scale(y, c);
        let noise = 8.0 * f64::EPSILON * scale;
        if g.abs() <= noise {
            return Ok(done(y));
        }
        if g < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let width = hi - lo;
        let newton = y - g / dg;
        let next = if dg > 0.0 && newton > lo && newton < hi && width < 0.5 * last_width {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_width = last_width.min(2.0 * width);
        let step = (next - y).abs();
        y = next;
        if step <= 4.0 * f64::EPSILON * y.abs() || width <= 4.0 * f64::EPSILON * hi {
            return Ok(done(y));
        }
    }
    Err(Error::NonConvergence(format!(
        "speed-amplitude Newton iteration stalled for c = {c}"
    )))
}

/// Residual of `G(u_bar) = 0` divided by `delta c`, evaluated in the
/// log-depth variable.
pub fn solitary_residual(amp: &SolitaryAmplitude, c: f64) -> f64 {
    potential_in_log_depth(amp.log_depth, c).0
}

/// Closed-form solitary-wave speed for crest elevation `eta_bar > 0`.
pub fn speed_from_amplitude(eta_bar: f64) -> Result<f64> {
    if !eta_bar.is_finite() || eta_bar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "solitary amplitude must be positive (got {eta_bar})"
        )));
    }
    let e = eta_bar;
    let inner = log_excess(e);
    Ok(6f64.sqrt() * (1.0 + e) * inner.sqrt() / ((3.0 + 2.0 * e).sqrt() * e))
}

/// `(1 + e) ln(1 + e) - e`, summed as `sum_k>=2 (-e)^k / (k (k - 1))` for small `e`.
fn log_excess(e: f64) -> f64 {
    if e > 0.1 {
        return (1.0 + e) * e.ln_1p() - e;
    }
    let mut sum = 0.0;
    let mut pow = e * e;
    for k in 2..40 {
        let term = pow / (k * (k - 1)) as f64;
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-18 * sum.abs() {
            break;
        }
        pow *= e;
    }
    sum
}

/// Cubic small-amplitude expansion of [`speed_from_amplitude`].
pub fn speed_series(eta_bar: f64) -> f64 {
    let e = eta_bar;
    1.0 + e * (0.5 + e * (-5.0 / 24.0 + e * 79.0 / 720.0))
}

/// Speed of the shallow-water shock whose left state has elevation `eta_tail`.
///
/// Inverts `eta0(c)` exactly: from the jump conditions
/// `c eta0 = (1 + eta0) u0` and `c u0 = eta0 + u0^2 / 2`,
/// `c = (1 + eta0) sqrt(2 / (2 + eta0))`.
pub fn froude_from_tail(eta_tail: f64) -> Result<f64> {
    if !eta_tail.is_finite() || eta_tail < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tail elevation must be non-negative (got {eta_tail})"
        )));
    }
    Ok((1.0 + eta_tail) * (2.0 / (2.0 + eta_tail)).sqrt())
}

/// Classical hydraulic-jump relation `c = sqrt(1 + 3/2 eta0 + 1/2 eta0^2)`,
/// an alternative estimate of the bore speed from its tail elevation.
pub fn bore_froude_approx(eta_tail: f64) -> Result<f64> {
    if !eta_tail.is_finite() || eta_tail < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tail elevation must be non-negative (got {eta_tail})"
        )));
    }
    Ok((1.0 + 1.5 * eta_tail + 0.5 * eta_tail * eta_tail).sqrt())
}

/// Inverse of [`bore_froude_approx`]: `eta0 = (sqrt(1 + 8 c^2) - 3) / 2`.
pub fn eta_from_bore_froude(c: f64) -> Result<f64> {
    if !c.is_finite() || c < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "bore speed must satisfy c >= 1 (got {c})"
        )));
    }
    // (sqrt(1 + 8c^2) - 3)/2 = 4 (c^2 - 1) / (sqrt(1 + 8c^2) + 3)
    Ok(4.0 * (c - 1.0) * (c + 1.0) / ((1.0 + 8.0 * c * c).sqrt() + 3.0))
}
