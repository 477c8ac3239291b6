//! Comparison of a computed profile with a measured gauge record.
//!
//! A traveling wave passing a fixed gauge is seen as `eta(t) = eta(-c t)`
//! up to a time shift. The shift is estimated from where each record first
//! reaches half its crest and refined by maximizing the correlation of the
//! two records over a window around that front.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::NumericTable;
use crate::profile::Profile;

/// Samples `(t, eta)` with `t` strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    pub t: Vec<f64>,
    pub eta: Vec<f64>,
}

impl TimeTrace {
    pub fn new(t: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if t.len() != eta.len() || t.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "trace needs matching columns of length >= 2 (got {} and {})",
                t.len(),
                eta.len()
            )));
        }
        if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(format!(
                "time must be strictly increasing (row {} to {})",
                i + 1,
                i + 2
            )));
        }
        Ok(TimeTrace { t, eta })
    }

    /// Gauge record of `profile` for a wave of speed `c`: `t = -xi / c`.
    pub fn from_profile(xi: &[f64], eta: &[f64], c: f64) -> Result<Self> {
        let t: Vec<f64> = xi.iter().rev().map(|x| -x / c).collect();
        let e: Vec<f64> = eta.iter().rev().copied().collect();
        TimeTrace::new(t, e)
    }

    pub fn from_computed(profile: &Profile) -> Result<Self> {
        TimeTrace::from_profile(&profile.xi, &profile.eta, profile.params.c)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Linear interpolation, held constant beyond either end.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.eta[0];
        }
        if t >= self.t[n - 1] {
            return self.eta[n - 1];
        }
        let i = self.t.partition_point(|&s| s <= t) - 1;
        let s = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.eta[i] + s * (self.eta[i + 1] - self.eta[i])
    }

    /// Time of the steepest rise and the slope there.
    pub fn steepest_front(&self) -> (f64, f64) {
        let mut best = (self.t[0], f64::MIN);
        for i in 0..self.len() - 1 {
            let slope = (self.eta[i + 1] - self.eta[i]) / (self.t[i + 1] - self.t[i]);
            if slope > best.1 {
                best = (0.5 * (self.t[i] + self.t[i + 1]), slope);
            }
        }
        best
    }

    /// First upward crossing of half the record's maximum.
    pub fn leading_front(&self) -> Option<f64> {
        let level = 0.5 * self.max();
        let i = self.eta.iter().position(|e| *e >= level)?;
        if i == 0 {
            return None;
        }
        let (a, b) = (self.eta[i - 1] - level, self.eta[i] - level);
        Some(self.t[i - 1] + (self.t[i] - self.t[i - 1]) * (-a) / (b - a))
    }

    pub fn max(&self) -> f64 {
        self.eta.iter().copied().fold(f64::MIN, f64::max)
    }
}

/// A measured record read from CSV: columns `t` and `eta`, optional
/// `# froude = ...` and `# label = ...` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayDataset {
    pub trace: TimeTrace,
    pub froude: Option<f64>,
    pub label: Option<String>,
}

impl OverlayDataset {
    pub fn from_table(table: &NumericTable, source: &str) -> Result<Self> {
        let col = |name: &str| {
            table
                .column(name)
                .ok_or_else(|| Error::InvalidParameter(format!("{source}: missing column `{name}`")))
        };
        let t = col("t")?;
        let eta = col("eta")?;
        if t.len() < 10 {
            return Err(Error::InvalidParameter(format!(
                "{source}: need at least 10 data rows, found {}",
                t.len()
            )));
        }
        if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(format!(
                "{source}:{}: time is not strictly increasing",
                table.lines[i + 1]
            )));
        }
        let froude = match table.meta("froude") {
            Some(v) => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("{source}: bad froude metadata {v:?}")))?,
            ),
            None => None,
        };
        Ok(OverlayDataset {
            trace: TimeTrace::new(t, eta)?,
            froude,
            label: table.meta("label").map(str::to_string),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayReport {
    pub froude_model: f64,
    pub froude_data: Option<f64>,
    pub label: Option<String>,
    pub rows: usize,
    /// Model time shift that aligns it with the data.
    pub shift: f64,
    /// Correlation of the two records over the front window at `shift`.
    pub front_correlation: f64,
    pub rms_misfit: f64,
    pub crest_model: f64,
    pub crest_data: f64,
    pub crest_difference: f64,
}

fn correlation(data: &TimeTrace, model: &TimeTrace, shift: f64, window: (f64, f64)) -> f64 {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (t, e) in data.t.iter().zip(&data.eta) {
        if *t >= window.0 && *t <= window.1 {
            xs.push(*e);
            ys.push(model.at(t - shift));
        }
    }
    let n = xs.len() as f64;
    if n < 3.0 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}

/// Align `model` to `data` and report the misfit.
pub fn overlay(model: &TimeTrace, c: f64, data: &OverlayDataset) -> Result<OverlayReport> {
    let d = &data.trace;
    let (_, slope) = model.steepest_front();
    let no_front = |which: &str| Error::InvalidParameter(format!("{which} record has no rising front"));
    if !(slope > 0.0) {
        return Err(no_front("model"));
    }
    let tf_model = model.leading_front().ok_or_else(|| no_front("model"))?;
    let tf_data = d.leading_front().ok_or_else(|| no_front("data"))?;
    let crest_model = model.max();
    // front rise time, used as the search and correlation half-width
    let rise = (crest_model / slope).max(2.0 * (d.t[1] - d.t[0]));
    let window = (tf_data - 2.0 * rise, tf_data + 2.0 * rise);
    let guess = tf_data - tf_model;

    let score = |s: f64| {
        let r = correlation(d, model, s, window);
        if r.is_nan() {
            f64::MIN
        } else {
            r
        }
    };
    let scan = 400;
    let (lo, hi) = (guess - rise, guess + rise);
    let mut best = (guess, score(guess));
    for k in 0..=scan {
        let s = lo + (hi - lo) * k as f64 / scan as f64;
        let v = score(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    // golden-section refinement around the best scan point
    let h = (hi - lo) / scan as f64;
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (score(x1), score(x2));
    for _ in 0..80 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = score(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = score(x2);
        }
    }
    let refined = 0.5 * (a + b);
    let shift = if score(refined) >= best.1 { refined } else { best.0 };

    let mut sse = 0.0;
    for (t, e) in d.t.iter().zip(&d.eta) {
        let r = e - model.at(t - shift);
        sse += r * r;
    }
    let crest_data = d.max();
    Ok(OverlayReport {
        froude_model: c,
        froude_data: data.froude,
        label: data.label.clone(),
        rows: d.len(),
        shift,
        front_correlation: score(shift),
        rms_misfit: (sse / d.len() as f64).sqrt(),
        crest_model,
        crest_data,
        crest_difference: crest_data - crest_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn model() -> TimeTrace {
        // a smooth bore passing the gauge
        let t: Vec<f64> = (0..2001).map(|k| -50.0 + 0.05 * k as f64).collect();
        let eta = t
            .iter()
            .map(|t| 0.15 * (1.0 + (t / 2.0).tanh()) + 0.05 * (-(t - 3.0).powi(2)).exp())
            .collect();
        TimeTrace::new(t, eta).unwrap()
    }

    fn data(shift: f64, sigma: f64) -> OverlayDataset {
        let m = model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        let t: Vec<f64> = (0..400).map(|k| -30.0 + 0.1 * k as f64).collect();
        let eta = t
            .iter()
            .map(|t| m.at(t - shift) + if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 })
            .collect();
        OverlayDataset {
            trace: TimeTrace::new(t, eta).unwrap(),
            froude: Some(1.2),
            label: None,
        }
    }

    #[test]
    fn recovers_a_pure_shift() {
        let r = overlay(&model(), 1.2, &data(1.7, 0.0)).unwrap();
        assert!((r.shift - 1.7).abs() < 1e-3, "{}", r.shift);
        assert!(r.rms_misfit < 1e-4);
        assert!(r.front_correlation > 0.999_999);
        assert_eq!(r.froude_data, Some(1.2));
    }

    #[test]
    fn noise_sets_the_misfit_floor() {
        let sigma = 0.01;
        let r = overlay(&model(), 1.2, &data(-0.8, sigma)).unwrap();
        assert!((r.shift + 0.8).abs() < 0.05, "{}", r.shift);
        assert!((r.rms_misfit / sigma - 1.0).abs() < 0.15, "{}", r.rms_misfit);
    }

    #[test]
    fn profile_trace_runs_forward_in_time() {
        let xi = [-2.0, -1.0, 0.0, 1.0];
        let eta = [0.4, 0.3, 0.1, 0.0];
        let tr = TimeTrace::from_profile(&xi, &eta, 2.0).unwrap();
        assert_eq!(tr.t, vec![-0.5, 0.0, 0.5, 1.0]);
        assert_eq!(tr.eta, vec![0.0, 0.1, 0.3, 0.4]);
    }

    #[test]
    fn rejects_unsorted_and_short_data() {
        assert!(TimeTrace::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        let text = "t,eta\n0,0\n1,0\n";
        let table = crate::io::read_numeric_csv(text.as_bytes(), "d").unwrap();
        assert!(OverlayDataset::from_table(&table, "d").is_err());
        let mut text = String::from("t,eta\n");
        for k in 0..12 {
            text.push_str(&format!("{},0\n", if k == 5 { 3 } else { k }));
        }
        let table = crate::io::read_numeric_csv(text.as_bytes(), "d").unwrap();
        let err = OverlayDataset::from_table(&table, "d").unwrap_err();
        assert!(err.to_string().contains("d:7"), "{err}");
    }
}
