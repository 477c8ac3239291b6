//! Flat `key = value` configuration files and the built-in presets.
//!
//! ```text
//! # riemann run
//! preset = dam-break
//! epsilon = 0.01
//! t_end = 50
//! ```
//!
//! A `preset` line loads the preset's values first; later lines override
//! them. Unknown keys and malformed values are errors naming the line.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{Boundary, Grid, InitialCondition, RunConfig, System};
use crate::profile::ProfileOptions;
use crate::waveform::WaveParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcKind {
    Riemann,
    Gaussian,
    Bore,
}

impl IcKind {
    fn name(&self) -> &'static str {
        match self {
            IcKind::Riemann => "riemann",
            IcKind::Gaussian => "gaussian",
            IcKind::Bore => "bore",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "riemann" => Some(IcKind::Riemann),
            "gaussian" => Some(IcKind::Gaussian),
            "bore" => Some(IcKind::Bore),
            _ => None,
        }
    }
}

/// Every recognised key; all optional until a consumer asks for them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub system: Option<System>,
    pub c: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed_offset: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub tail_tol: Option<f64>,
    pub max_span: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub dx: Option<f64>,
    pub boundary: Option<Boundary>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub ic: Option<IcKind>,
    pub eta_left: Option<f64>,
    pub u_left: Option<f64>,
    pub ramp_width: Option<f64>,
    pub amplitude: Option<f64>,
    pub width: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
}

/// Keys with their defaults, as shown by `--help`.
pub const KEYS: &[(&str, &str)] = &[
    ("preset", "none; one of the built-in preset names"),
    ("system", "peregrine-dissipative | peregrine-inviscid | shallow-water"),
    ("c", "required for traveling waves"),
    ("delta", "1 for PDE runs, required for traveling waves"),
    ("epsilon", "0"),
    ("seed_offset", "1e-8 u0"),
    ("rtol", "1e-10"),
    ("atol", "1e-12"),
    ("tail_tol", "1e-8"),
    ("max_span", "1e4"),
    ("x_min", "-800"),
    ("x_max", "800"),
    ("dx", "0.25"),
    ("boundary", "periodic | reflective (periodic)"),
    ("dt", "0.025"),
    ("t_end", "required for PDE runs"),
    ("ic", "riemann | gaussian | bore"),
    ("eta_left", "riemann and bore height on the left"),
    ("u_left", "bore velocity on the left (traveling-wave tail value)"),
    ("ramp_width", "2"),
    ("amplitude", "1"),
    ("width", "10"),
    ("snapshot_times", "comma-separated list (none)"),
];

fn line_error(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("config line {line}: {msg}"))
}

fn num(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| line_error(line, format!("key `{key}` expects a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(line_error(line, format!("key `{key}` must be finite")));
    }
    Ok(x)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| line_error(line, format!("expected `key = value`, got {content:?}")))?;
            cfg.set(key.trim(), value.trim(), line)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        ConfigFile::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str, line: usize) -> Result<()> {
        match key {
            "preset" => {
                let p = preset(v).ok_or_else(|| line_error(line, format!("unknown preset `{v}`")))?;
                *self = p.config;
            }
            "system" => {
                self.system = Some(System::parse(v).ok_or_else(|| line_error(line, format!("unknown system `{v}`")))?)
            }
            "boundary" => {
                self.boundary = Some(match v {
                    "periodic" => Boundary::Periodic,
                    "reflective" => Boundary::Reflective,
                    _ => return Err(line_error(line, format!("unknown boundary `{v}`"))),
                })
            }
            "ic" => self.ic = Some(IcKind::parse(v).ok_or_else(|| line_error(line, format!("unknown ic `{v}`")))?),
            "snapshot_times" => {
                let mut times = Vec::new();
                for part in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    times.push(num(line, key, part)?);
                }
                self.snapshot_times = Some(times);
            }
            _ => {
                let slot = self
                    .number_slot(key)
                    .ok_or_else(|| line_error(line, format!("unknown key `{key}`")))?;
                *slot = Some(num(line, key, v)?);
            }
        }
        Ok(())
    }

    fn number_slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "c" => &mut self.c,
            "delta" => &mut self.delta,
            "epsilon" => &mut self.epsilon,
            "seed_offset" => &mut self.seed_offset,
            "rtol" => &mut self.rtol,
            "atol" => &mut self.atol,
            "tail_tol" => &mut self.tail_tol,
            "max_span" => &mut self.max_span,
            "x_min" => &mut self.x_min,
            "x_max" => &mut self.x_max,
            "dx" => &mut self.dx,
            "dt" => &mut self.dt,
            "t_end" => &mut self.t_end,
            "eta_left" => &mut self.eta_left,
            "u_left" => &mut self.u_left,
            "ramp_width" => &mut self.ramp_width,
            "amplitude" => &mut self.amplitude,
            "width" => &mut self.width,
            _ => return None,
        })
    }

    /// Serialize every set field; presets are written out expanded.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(v) = self.system {
            put("system", v.name().into());
        }
        let nums = [
            ("c", self.c),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("seed_offset", self.seed_offset),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("tail_tol", self.tail_tol),
            ("max_span", self.max_span),
            ("x_min", self.x_min),
            ("x_max", self.x_max),
            ("dx", self.dx),
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("eta_left", self.eta_left),
            ("u_left", self.u_left),
            ("ramp_width", self.ramp_width),
            ("amplitude", self.amplitude),
            ("width", self.width),
        ];
        for (k, v) in nums {
            if let Some(x) = v {
                put(k, format!("{x:?}"));
            }
        }
        if let Some(b) = self.boundary {
            put(
                "boundary",
                match b {
                    Boundary::Periodic => "periodic",
                    Boundary::Reflective => "reflective",
                }
                .into(),
            );
        }
        if let Some(ic) = self.ic {
            put("ic", ic.name().into());
        }
        if let Some(ts) = &self.snapshot_times {
            put(
                "snapshot_times",
                ts.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(", "),
            );
        }
        s
    }

    fn require(&self, v: Option<f64>, key: &str) -> Result<f64> {
        v.ok_or_else(|| Error::InvalidParameter(format!("config is missing `{key}`")))
    }

    pub fn wave_params(&self) -> Result<WaveParams> {
        WaveParams::new(
            self.require(self.c, "c")?,
            self.require(self.delta, "delta")?,
            self.epsilon.unwrap_or(0.0),
        )
    }

    pub fn profile_options(&self) -> ProfileOptions {
        let d = ProfileOptions::default();
        ProfileOptions {
            seed_offset: self.seed_offset,
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            max_span: self.max_span.unwrap_or(d.max_span),
            tail_tol: self.tail_tol.unwrap_or(d.tail_tol),
            max_step: d.max_step,
        }
    }

    pub fn initial_condition(&self) -> Result<InitialCondition> {
        let ramp_width = self.ramp_width.unwrap_or(2.0);
        let ic = match self.ic {
            Some(IcKind::Riemann) => InitialCondition::SmoothedRiemann {
                eta_left: self.require(self.eta_left, "eta_left")?,
                ramp_width,
            },
            Some(IcKind::Gaussian) => InitialCondition::Gaussian {
                amplitude: self.amplitude.unwrap_or(1.0),
                width: self.width.unwrap_or(10.0),
            },
            Some(IcKind::Bore) => {
                let eta_left = self.require(self.eta_left, "eta_left")?;
                let u_left = match self.u_left {
                    Some(u) => u,
                    None => {
                        let c = crate::waveform::froude_from_tail(eta_left)?;
                        c * eta_left / (1.0 + eta_left)
                    }
                };
                InitialCondition::SmoothedBore {
                    eta_left,
                    u_left,
                    ramp_width,
                }
            }
            None => return Err(Error::InvalidParameter("config is missing `ic`".into())),
        };
        ic.validate()?;
        Ok(ic)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let system = self.system.unwrap_or(System::PeregrineDissipative);
        let grid = Grid::with_spacing(
            self.x_min.unwrap_or(-800.0),
            self.x_max.unwrap_or(800.0),
            self.dx.unwrap_or(0.25),
            self.boundary.unwrap_or(Boundary::Periodic),
        )?;
        let cfg = RunConfig {
            system,
            delta: self
                .delta
                .unwrap_or(if system == System::ShallowWater { 0.0 } else { 1.0 }),
            epsilon: self.epsilon.unwrap_or(0.0),
            grid,
            dt: self.dt.unwrap_or(0.025),
            t_end: self.require(self.t_end, "t_end")?,
            ic: self.initial_condition()?,
            snapshot_times: self.snapshot_times.clone().unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Waves leave the initial feature at `x = 0` at speeds below about 1.5,
/// so runs must end before `t = distance / 3`.
pub fn horizon_check(config: &RunConfig) -> Result<()> {
    let distance = (-config.grid.x_min).min(config.grid.x_max);
    if distance <= 0.0 || config.t_end >= distance / 3.0 {
        return Err(Error::InvalidParameter(format!(
            "t_end = {} exceeds the horizon {:.3} (a third of the distance {distance} to the nearest boundary)",
            config.t_end,
            distance.max(0.0) / 3.0
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub note: &'static str,
    pub config: ConfigFile,
}

pub const PRESET_NAMES: &[&str] = &[
    "oscillatory",
    "monotone",
    "undular-1.11",
    "undular-1.081",
    "undular-1.104",
    "undular-1.192",
    "undular-1.45",
    "dam-break",
    "gaussian-hump",
];

fn wave(c: f64, delta: f64, epsilon: f64) -> ConfigFile {
    ConfigFile {
        c: Some(c),
        delta: Some(delta),
        epsilon: Some(epsilon),
        ..ConfigFile::default()
    }
}

fn pde(ic: IcKind, epsilon: f64) -> ConfigFile {
    ConfigFile {
        system: Some(System::PeregrineDissipative),
        delta: Some(1.0),
        epsilon: Some(epsilon),
        x_min: Some(-800.0),
        x_max: Some(800.0),
        dx: Some(0.25),
        dt: Some(0.025),
        t_end: Some(200.0),
        ic: Some(ic),
        snapshot_times: Some(vec![0.0, 50.0, 100.0, 150.0, 200.0]),
        ..ConfigFile::default()
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    let third = 1.0 / 3.0;
    let (note, config) = match name {
        "oscillatory" => (
            "potential and oscillatory front for c = 2, delta = 1/2; epsilon = 0.3 chosen for the profile",
            wave(2.0, 0.5, 0.3),
        ),
        "monotone" => (
            "regularized front c = 1.3, delta = 0.2, epsilon = 1.2",
            wave(1.3, 0.2, 1.2),
        ),
        "undular-1.11" => (
            "undular bore c = 1.11, epsilon = 0.06; delta = 1/3 assumed (unit depth)",
            wave(1.11, third, 0.06),
        ),
        "undular-1.081" => (
            "undular bore c = 1.081, epsilon = 0.05; delta = 1/3 assumed",
            wave(1.081, third, 0.05),
        ),
        "undular-1.104" => (
            "undular bore c = 1.104, epsilon = 0.05; delta = 1/3 assumed",
            wave(1.104, third, 0.05),
        ),
        "undular-1.192" => (
            "undular bore c = 1.192, epsilon = 0.05; delta = 1/3 assumed",
            wave(1.192, third, 0.05),
        ),
        "undular-1.45" => (
            "undular bore c = 1.45, epsilon = 0.6; delta = 1/3 assumed",
            wave(1.45, third, 0.6),
        ),
        "dam-break" => (
            "smoothed dam break eta_left = 0.5, ramp width 2, delta = 1, epsilon = 0.1, between walls",
            ConfigFile {
                eta_left: Some(0.5),
                ramp_width: Some(2.0),
                boundary: Some(Boundary::Reflective),
                ..pde(IcKind::Riemann, 0.1)
            },
        ),
        "gaussian-hump" => (
            "gaussian hump exp(-x^2/100), delta = 1, epsilon = 0.1",
            ConfigFile {
                amplitude: Some(1.0),
                width: Some(10.0),
                boundary: Some(Boundary::Periodic),
                ..pde(IcKind::Gaussian, 0.1)
            },
        ),
        _ => return None,
    };
    let name = PRESET_NAMES.iter().find(|n| **n == name)?;
    Some(Preset { name, note, config })
}
