//! Shape diagnostics of a computed profile and checks of the qualitative
//! theory: extrema and inflections, tail rates, the energy identity,
//! confinement of the orbit and monotonicity of the Liapunov function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{secant_in_bracket, vector_field, Profile};
use crate::waveform::{
    critical_epsilon, dissipation_integral_rhs, liapunov, solitary_amplitude, PhasePoint, RegimeKind, TailPair,
    WaveParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservedShape {
    Monotone,
    Oscillatory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub regime_observed: ObservedShape,
    /// `(xi, u)` of local maxima, in increasing `xi`.
    pub maxima: Vec<(f64, f64)>,
    /// `(xi, u)` of local minima, in increasing `xi`.
    pub minima: Vec<(f64, f64)>,
    pub inflections: Vec<f64>,
    /// Fitted `d ln u / d xi` as `xi -> +infinity` (compare with `lambda_minus`).
    pub tail_decay_rate_plus: f64,
    /// Fitted growth rate of `|u - u0|` away from the left tail.
    pub tail_decay_rate_minus: f64,
    /// Fitted angular frequency of the left-tail undulations.
    pub tail_frequency: Option<f64>,
}

impl ShapeReport {
    pub fn interior_extrema(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Slope of the least-squares line through `(x, y)`.
fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

fn hermite_v(profile: &Profile, x: f64) -> f64 {
    profile.eval(x).v
}

fn fit_checked(what: &str, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 4 {
        return Err(Error::InsufficientSamples(format!(
            "{what}: {} samples in the fit window, need at least 4",
            x.len()
        )));
    }
    Ok(fit_slope(x, y))
}

/// Locate extrema and inflection points and fit the tail asymptotics.
pub fn shape_report(profile: &Profile) -> Result<ShapeReport> {
    let n = profile.len();
    if n < 8 {
        return Err(Error::InsufficientSamples(format!("profile has only {n} samples")));
    }
    let params = &profile.params;
    let u0 = params.equilibria().u_tail;
    let tail_tol = profile.options.tail_tol;

    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 0..n - 1 {
        let (va, vb) = (profile.v[i], profile.v[i + 1]);
        if va == 0.0 || va * vb >= 0.0 {
            continue;
        }
        let x = secant_in_bracket(|x| hermite_v(profile, x), profile.xi[i], profile.xi[i + 1], 1e-12);
        let u = profile.eval(x).u;
        if va > 0.0 {
            maxima.push((x, u));
        } else {
            minima.push((x, u));
        }
    }

    // v' from the vector field; sign changes below the noise floor near
    // the equilibria are ignored
    let vprime: Vec<f64> = (0..n)
        .map(|i| vector_field(profile.point(i), params).map(|r| r.v))
        .collect::<Result<_>>()?;
    let floor = 10.0 * profile.options.atol;
    let mut inflections = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (vprime[i], vprime[i + 1]);
        if a * b < 0.0 && a.abs().max(b.abs()) > floor {
            let f = |x: f64| vector_field(profile.eval(x), params).map(|r| r.v).unwrap_or(0.0);
            inflections.push(secant_in_bracket(f, profile.xi[i], profile.xi[i + 1], 1e-12));
        }
    }

    // right tail: ln u against xi
    let (mut xr, mut yr) = (Vec::new(), Vec::new());
    for i in 0..n {
        let u = profile.u[i];
        if u > 0.0 && u <= 1e-3 * u0 && profile.xi[i] > 0.0 {
            xr.push(profile.xi[i]);
            yr.push(u.ln());
        }
    }
    let tail_decay_rate_plus = fit_checked("right tail", &xr, &yr)?;

    let oscillatory = observed_shape(profile) == ObservedShape::Oscillatory;
    let lo = 100.0 * tail_tol;
    let hi = 1e-3 * u0;
    let (tail_decay_rate_minus, tail_frequency) = if oscillatory {
        let mut peaks: Vec<(f64, f64)> = maxima.iter().chain(minima.iter()).copied().collect();
        peaks.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut xl, mut yl) = (Vec::new(), Vec::new());
        for &(x, u) in &peaks {
            let d = (u - u0).abs();
            if d >= lo && d <= hi {
                xl.push(x);
                yl.push(d.ln());
            }
        }
        let rate = fit_checked("left-tail envelope", &xl, &yl)?;
        let window: Vec<f64> = maxima
            .iter()
            .filter(|(_, u)| (u - u0) >= lo && (u - u0) <= hi)
            .map(|(x, _)| *x)
            .collect();
        if window.len() < 2 {
            return Err(Error::InsufficientSamples(
                "fewer than two maxima in the left-tail window".into(),
            ));
        }
        let spacing = (window[window.len() - 1] - window[0]) / (window.len() - 1) as f64;
        (rate, Some(2.0 * std::f64::consts::PI / spacing))
    } else {
        let (mut xl, mut yl) = (Vec::new(), Vec::new());
        for i in 0..n {
            let d = (profile.u[i] - u0).abs();
            if d >= lo && d <= hi && profile.xi[i] < 0.0 {
                xl.push(profile.xi[i]);
                yl.push(d.ln());
            }
        }
        (fit_checked("left tail", &xl, &yl)?, None)
    };

    Ok(ShapeReport {
        regime_observed: if oscillatory {
            ObservedShape::Oscillatory
        } else {
            ObservedShape::Monotone
        },
        maxima,
        minima,
        inflections,
        tail_decay_rate_plus,
        tail_decay_rate_minus,
        tail_frequency,
    })
}

/// `|eps * int u'^2 - f(c)| / f(c)`.
///
/// The integral uses the trapezoid rule with the endpoint-derivative
/// correction, which is fourth order on the adaptive grid.
pub fn verify_energy_identity(profile: &Profile) -> Result<f64> {
    let p = &profile.params;
    let n = profile.len();
    if n < 2 {
        return Err(Error::InsufficientSamples("empty profile".into()));
    }
    let tol = 1e3 * profile.options.tail_tol;
    let u0 = p.equilibria().u_tail;
    if (profile.u[0] - u0).abs() > tol || profile.u[n - 1] > 1e-3 * u0 {
        return Err(Error::InsufficientSamples("profile does not reach both tails".into()));
    }
    let mut integral = 0.0;
    let mut prev = (profile.v[0] * profile.v[0], 0.0);
    prev.1 = 2.0 * profile.v[0] * vector_field(profile.point(0), p)?.v;
    for i in 1..n {
        let v = profile.v[i];
        let dv = vector_field(profile.point(i), p)?.v;
        let cur = (v * v, 2.0 * v * dv);
        let h = profile.xi[i] - profile.xi[i - 1];
        integral += 0.5 * h * (prev.0 + cur.0) - h * h / 12.0 * (cur.1 - prev.1);
        prev = cur;
    }
    let dc = p.delta_c();
    let lhs = p.epsilon * integral / (dc * dc);
    let rhs = dissipation_integral_rhs(p.c)?;
    Ok((lhs - rhs).abs() / rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Smallest signed margin over all samples; negative on failure.
    pub worst_margin: f64,
    pub worst_xi: f64,
}

struct Worst {
    margin: f64,
    xi: f64,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            xi: f64::NAN,
        }
    }

    fn update(&mut self, margin: f64, xi: f64) {
        if margin < self.margin {
            self.margin = margin;
            self.xi = xi;
        }
    }

    fn outcome(&self) -> CheckOutcome {
        CheckOutcome {
            passed: self.margin >= 0.0,
            worst_margin: self.margin,
            worst_xi: self.xi,
        }
    }
}

fn slack(profile: &Profile, scale: f64) -> f64 {
    10.0 * (profile.options.atol + profile.options.rtol * scale)
}

/// The regularized orbit stays in the triangle bounded by `v = 0`,
/// `u = 0` and `v = m (u - u0)`.
pub fn verify_triangle_invariant(profile: &Profile) -> Result<CheckOutcome> {
    let p = &profile.params;
    let spec = p.spectrum();
    let m = match (p.regime().kind, spec.triangle_slope) {
        (RegimeKind::Regularized, Some(m)) => m,
        _ => {
            return Err(Error::WrongRegime(format!(
                "triangle test needs a regularized front; eps^2 = {} < 4 delta c alpha = {}",
                p.epsilon * p.epsilon,
                p.regime().criterion_rhs
            )))
        }
    };
    let u0 = p.equilibria().u_tail;
    let mut worst = Worst::new();
    for i in 0..profile.len() {
        let (u, v, x) = (profile.u[i], profile.v[i], profile.xi[i]);
        let s = slack(profile, v.abs().max(u.abs()));
        worst.update(s - v, x);
        worst.update(u, x);
        worst.update(u0 * (1.0 + 1e-9) - u, x);
        worst.update(v - m * (u - u0) + s, x);
    }
    Ok(worst.outcome())
}

/// Bounds on `v` valid for every orbit with `epsilon > 0`.
pub fn v_bounds(profile: &Profile) -> Result<(f64, f64)> {
    let p = &profile.params;
    if p.epsilon <= 0.0 {
        return Err(Error::InvalidParameter("v bounds degenerate for epsilon = 0".into()));
    }
    let c = p.c;
    let dc = p.delta_c();
    let lower = -(dc / p.epsilon) * (2.0 - 3.0 * c.powf(2.0 / 3.0) + c * c);
    let u_bar = solitary_amplitude(p)?.u_bar;
    let upper = (c / (c - u_bar) + 0.5 * c * c) * dc / p.epsilon;
    Ok((lower, upper))
}

pub fn verify_v_bounds(profile: &Profile) -> Result<CheckOutcome> {
    let (lower, upper) = v_bounds(profile)?;
    let mut worst = Worst::new();
    for i in 0..profile.len() {
        let v = profile.v[i];
        let s = slack(profile, v.abs());
        worst.update(v - lower + s, profile.xi[i]);
        worst.update(upper - v + s, profile.xi[i]);
    }
    Ok(worst.outcome())
}

/// Positivity and the ceiling `max u < u_bar < c`.
pub fn verify_amplitude_ceiling(profile: &Profile) -> Result<CheckOutcome> {
    let p = &profile.params;
    let u_bar = solitary_amplitude(p)?.u_bar;
    let mut worst = Worst::new();
    for i in 0..profile.len() {
        let u = profile.u[i];
        worst.update(u, profile.xi[i]);
        worst.update(u_bar - u, profile.xi[i]);
    }
    Ok(worst.outcome())
}

/// `V = v^2/2 + G(u)` is non-decreasing in `xi` (non-increasing in the
/// reversed variable). Violations up to ten times the local tolerance are
/// accepted. Returns the outcome and the sampled `V`.
pub fn verify_liapunov(profile: &Profile) -> Result<(CheckOutcome, Vec<f64>)> {
    let p = &profile.params;
    let values: Vec<f64> = (0..profile.len())
        .map(|i| liapunov(profile.point(i), p))
        .collect::<Result<_>>()?;
    let mut worst = Worst::new();
    for i in 1..values.len() {
        let scale = values[i].abs().max(values[i - 1].abs()) + p.delta_c() * profile.u[i].abs();
        let tol = slack(profile, scale);
        worst.update(values[i] - values[i - 1] + tol, profile.xi[i]);
    }
    Ok((worst.outcome(), values))
}

fn orient(a: PhasePoint, b: PhasePoint, c: PhasePoint) -> f64 {
    (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u)
}

fn segments_cross(a: PhasePoint, b: PhasePoint, c: PhasePoint, d: PhasePoint) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Index pairs of non-adjacent polyline segments that cross transversally.
///
/// Segments are binned on a uniform grid over the bounding box, so only
/// segments sharing a cell are tested against each other.
pub fn self_intersections(profile: &Profile) -> Vec<(usize, usize)> {
    let n = profile.len();
    if n < 4 {
        return Vec::new();
    }
    let pts: Vec<PhasePoint> = (0..n).map(|i| profile.point(i)).collect();
    let (mut umin, mut umax, mut vmin, mut vmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for q in &pts {
        umin = umin.min(q.u);
        umax = umax.max(q.u);
        vmin = vmin.min(q.v);
        vmax = vmax.max(q.v);
    }
    let cells = ((n as f64).sqrt().ceil() as usize).max(1);
    let du = (umax - umin).max(f64::MIN_POSITIVE) / cells as f64;
    let dv = (vmax - vmin).max(f64::MIN_POSITIVE) / cells as f64;
    let cell = |x: f64, lo: f64, h: f64| (((x - lo) / h) as usize).min(cells - 1);
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for s in 0..n - 1 {
        let (a, b) = (pts[s], pts[s + 1]);
        let (i0, i1) = (cell(a.u.min(b.u), umin, du), cell(a.u.max(b.u), umin, du));
        let (j0, j1) = (cell(a.v.min(b.v), vmin, dv), cell(a.v.max(b.v), vmin, dv));
        for i in i0..=i1 {
            for j in j0..=j1 {
                bins[i * cells + j].push(s);
            }
        }
    }
    let mut hits = Vec::new();
    for bin in &bins {
        for (k, &s) in bin.iter().enumerate() {
            for &t in &bin[k + 1..] {
                let (s, t) = (s.min(t), s.max(t));
                if t <= s + 1 {
                    continue;
                }
                if segments_cross(pts[s], pts[s + 1], pts[t], pts[t + 1]) {
                    hits.push((s, t));
                }
            }
        }
    }
    hits.sort_unstable();
    hits.dedup();
    hits
}

/// Predicted tail rates from the linearization, for comparison with a
/// [`ShapeReport`]: `(lambda_minus, left rate, frequency)`.
pub fn predicted_tail_rates(profile: &Profile) -> (f64, f64, Option<f64>) {
    let s = profile.params.spectrum();
    match s.tail {
        TailPair::ComplexConjugate { re, im } => (s.lambda_minus, re, Some(im)),
        TailPair::RealPair { minus, .. } => (s.lambda_minus, minus, None),
    }
}

/// Regime classification with the quantities that determine it and,
/// optionally, the shape observed on an integrated profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub params: WaveParams,
    pub kind: RegimeKind,
    pub epsilon_squared: f64,
    pub criterion_rhs: f64,
    pub epsilon_critical: f64,
    pub u_tail: f64,
    pub eta_tail: f64,
    pub u_bar: f64,
    pub eta_bar: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub tail: TailPair,
    pub observed: Option<ObservedShape>,
}

impl RegimeReport {
    pub fn new(params: &WaveParams) -> Result<Self> {
        params.validate()?;
        let regime = params.regime();
        let spectrum = params.spectrum();
        let eq = params.equilibria();
        let amp = solitary_amplitude(params)?;
        Ok(RegimeReport {
            params: *params,
            kind: regime.kind,
            epsilon_squared: regime.criterion_lhs,
            criterion_rhs: regime.criterion_rhs,
            epsilon_critical: critical_epsilon(params.c, params.delta),
            u_tail: eq.u_tail,
            eta_tail: eq.eta_tail,
            u_bar: amp.u_bar,
            eta_bar: amp.eta_bar,
            lambda_minus: spectrum.lambda_minus,
            lambda_plus: spectrum.lambda_plus,
            tail: spectrum.tail,
            observed: None,
        })
    }

    /// Attach the shape seen on `profile`.
    pub fn with_profile(mut self, profile: &Profile) -> Self {
        self.observed = Some(observed_shape(profile));
        self
    }

    pub fn agrees(&self) -> Option<bool> {
        self.observed.map(|o| {
            matches!(
                (self.kind, o),
                (RegimeKind::Oscillatory, ObservedShape::Oscillatory)
                    | (RegimeKind::Regularized, ObservedShape::Monotone)
            )
        })
    }
}

/// Oscillatory if `v` changes sign anywhere along the orbit.
pub fn observed_shape(profile: &Profile) -> ObservedShape {
    let turns = profile.v.windows(2).any(|w| w[0] != 0.0 && w[0] * w[1] < 0.0);
    if turns {
        ObservedShape::Oscillatory
    } else {
        ObservedShape::Monotone
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{integrate_profile, ProfileOptions};

    fn profile(c: f64, delta: f64, epsilon: f64) -> Profile {
        let p = WaveParams::new(c, delta, epsilon).unwrap();
        integrate_profile(&p, &ProfileOptions::default()).unwrap()
    }

    #[test]
    fn regularized_front_diagnostics() {
        let pr = profile(1.3, 0.2, 1.2);
        let r = shape_report(&pr).unwrap();
        assert_eq!(r.regime_observed, ObservedShape::Monotone);
        assert_eq!(r.interior_extrema(), 0);
        assert_eq!(r.inflections.len(), 1);
        let (plus, minus, freq) = predicted_tail_rates(&pr);
        assert!((r.tail_decay_rate_plus - plus).abs() < 1e-3 * plus.abs());
        assert!((r.tail_decay_rate_minus - minus).abs() < 1e-3 * minus.abs());
        assert!(freq.is_none() && r.tail_frequency.is_none());
        assert!(verify_triangle_invariant(&pr).unwrap().passed);
    }

    #[test]
    fn oscillatory_front_diagnostics() {
        let pr = profile(2.0, 0.5, 0.3);
        let r = shape_report(&pr).unwrap();
        assert_eq!(r.regime_observed, ObservedShape::Oscillatory);
        assert!(r.maxima.len() > 10);
        let (_, minus, freq) = predicted_tail_rates(&pr);
        assert!((r.tail_decay_rate_minus - minus).abs() < 1e-3 * minus);
        assert!((r.tail_frequency.unwrap() - freq.unwrap()).abs() < 1e-3 * freq.unwrap());
        assert!(matches!(verify_triangle_invariant(&pr), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn phase_plane_checks_pass() {
        for (c, d, e) in [(1.3, 0.2, 1.2), (2.0, 0.5, 0.3), (1.45, 1.0 / 3.0, 0.6)] {
            let pr = profile(c, d, e);
            assert!(verify_energy_identity(&pr).unwrap() < 1e-8);
            assert!(verify_v_bounds(&pr).unwrap().passed);
            assert!(verify_amplitude_ceiling(&pr).unwrap().passed);
            assert!(verify_liapunov(&pr).unwrap().0.passed);
            assert!(self_intersections(&pr).is_empty());
        }
    }

    #[test]
    fn regime_report_agrees_with_profile() {
        let p = WaveParams::new(1.3, 0.2, 1.2).unwrap();
        let r = RegimeReport::new(&p).unwrap();
        assert_eq!(r.agrees(), None);
        assert!(r.epsilon_squared >= r.criterion_rhs);
        let r = r.with_profile(&profile(1.3, 0.2, 1.2));
        assert_eq!(r.agrees(), Some(true));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["kind"], "Regularized");
    }
}
