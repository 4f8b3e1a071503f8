//! Line-oriented `key = value` configuration documents.
//!
//! ```text
//! # CCS sweep over τ at a generic axis
//! protocol = ccs
//! alpha = 0.7853981633974483
//! tau = sweep(0.05, 3.09, 40)
//! theta = 1.0471975511965976
//! phi = 0.6283185307179586
//! outputs = probabilities, fi_scalar, fi_matrix, certificate
//! ```

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::qlinalg::Axis;
use crate::qstate::{DensityMatrix, Ket, ParamVector};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Domain { key: String, message: String },
}

impl ConfigError {
    fn domain(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Domain {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    Single,
    Hindsight,
    Ccs,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Single => "single",
            Protocol::Hindsight => "hindsight",
            Protocol::Ccs => "ccs",
        }
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            Protocol::Single => &["protocol", "tau", "theta", "phi", "outputs", "beta", "m_axis"],
            Protocol::Hindsight => &[
                "protocol", "tau", "theta", "phi", "outputs", "l_axis", "m_axis", "mprime_axis",
            ],
            Protocol::Ccs => &[
                "protocol", "tau", "theta", "phi", "outputs", "alpha", "f", "probe", "m_axis",
                "mprime_axis", "trials", "batches", "seed",
            ],
        }
    }
}

/// Inclusive grid of `count` evenly spaced points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grid {
    Fixed(f64),
    Sweep(Range),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Fixed(v) => vec![*v],
            Grid::Sweep(r) => r.values(),
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(self, Grid::Sweep(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    Probabilities,
    FiScalar,
    FiMatrix,
    Qfi,
    Certificate,
}

impl Output {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "probabilities" => Output::Probabilities,
            "fi_scalar" => Output::FiScalar,
            "fi_matrix" => Output::FiMatrix,
            "qfi" => Output::Qfi,
            "certificate" => Output::Certificate,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeState {
    Zero,
    One,
    Plus,
    Minus,
    PlusY,
    MinusY,
    Mixed,
}

impl ProbeState {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "zero" => ProbeState::Zero,
            "one" => ProbeState::One,
            "plus" => ProbeState::Plus,
            "minus" => ProbeState::Minus,
            "plus_y" => ProbeState::PlusY,
            "minus_y" => ProbeState::MinusY,
            "mixed" => ProbeState::Mixed,
            _ => return None,
        })
    }

    /// `None` for the maximally mixed probe.
    pub fn ket(self) -> Option<Ket> {
        let axis = match self {
            ProbeState::Zero => Axis::z(),
            ProbeState::One => Axis::z().opposite(),
            ProbeState::Plus => Axis::x(),
            ProbeState::Minus => Axis::x().opposite(),
            ProbeState::PlusY => Axis::y(),
            ProbeState::MinusY => Axis::y().opposite(),
            ProbeState::Mixed => return None,
        };
        Some(Ket::along(&axis))
    }

    pub fn density(self) -> DensityMatrix {
        match self.ket() {
            Some(k) => k.density(),
            None => DensityMatrix::maximally_mixed(2).expect("dimension 2 is supported"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSettings {
    pub trials: u64,
    pub batches: usize,
    pub seed: Option<u64>,
}

/// Validated sweep description.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub protocol: Protocol,
    pub tau: Grid,
    pub theta: Grid,
    pub phi: Grid,
    pub outputs: Vec<Output>,
    /// Whether `outputs` was given explicitly.
    pub outputs_explicit: bool,
    pub beta: f64,
    pub alpha: f64,
    pub f: f64,
    pub probe: ProbeState,
    /// Probe measurement (`M`); `None` observes the ancilla only (CCS).
    pub m_axis: Option<Axis>,
    /// Ancilla measurement (`M′`).
    pub mprime_axis: Axis,
    /// Basis in which the singlet is written.
    pub l_axis: Axis,
    pub mc: Option<McSettings>,
    /// Keys that appeared in the document.
    pub keys: Vec<String>,
}

impl SweepSpec {
    /// Grid points in `τ`-major, then `θ`, then `φ` order.
    pub fn points(&self) -> Vec<ParamVector> {
        let mut out = Vec::new();
        for &tau in &self.tau.values() {
            for &theta in &self.theta.values() {
                for &phi in &self.phi.values() {
                    out.push(ParamVector::new(tau, theta, phi));
                }
            }
        }
        out
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    pub fn has_key(&self, key: &str) -> bool {
        self.keys.iter().any(|k| k == key)
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} protocol, {} grid point(s)",
            self.protocol.name(),
            self.points().len()
        )
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_number(key: &str, line: usize, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = s.trim().parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("{key}: expected a number, found {:?}", s.trim()),
    })?;
    if !v.is_finite() {
        return Err(ConfigError::Parse {
            line,
            message: format!("{key}: value must be finite"),
        });
    }
    Ok(v)
}

fn parse_grid(key: &str, e: &Entry) -> Result<Grid, ConfigError> {
    let v = e.value.trim();
    let Some(rest) = v.strip_prefix("sweep") else {
        return Ok(Grid::Fixed(parse_number(key, e.line, v)?));
    };
    let inner = rest
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| ConfigError::Parse {
            line: e.line,
            message: format!("{key}: expected sweep(start, stop, count)"),
        })?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 {
        return Err(ConfigError::Parse {
            line: e.line,
            message: format!("{key}: sweep takes 3 arguments, found {}", parts.len()),
        });
    }
    let start = parse_number(key, e.line, parts[0])?;
    let stop = parse_number(key, e.line, parts[1])?;
    let count: usize = parts[2].trim().parse().map_err(|_| ConfigError::Parse {
        line: e.line,
        message: format!("{key}: sweep count must be a non-negative integer"),
    })?;
    if count == 0 {
        return Err(ConfigError::domain(key, "sweep count must be at least 1"));
    }
    Ok(Grid::Sweep(Range { start, stop, count }))
}

fn parse_axis(key: &str, e: &Entry, allow_none: bool) -> Result<Option<Axis>, ConfigError> {
    let v = e.value.trim();
    let axis = match v {
        "x" => Axis::x(),
        "y" => Axis::y(),
        "z" => Axis::z(),
        "-x" => Axis::x().opposite(),
        "-y" => Axis::y().opposite(),
        "-z" => Axis::z().opposite(),
        "none" if allow_none => return Ok(None),
        _ => {
            let parts: Vec<&str> = v.split(',').collect();
            if parts.len() != 2 {
                return Err(ConfigError::Parse {
                    line: e.line,
                    message: format!(
                        "{key}: expected x, y, z, -x, -y, -z{} or \"theta, phi\"",
                        if allow_none { ", none" } else { "" }
                    ),
                });
            }
            let theta = parse_number(key, e.line, parts[0])?;
            let phi = parse_number(key, e.line, parts[1])?;
            Axis::new(theta, phi).map_err(|err| ConfigError::domain(key, err.to_string()))?
        }
    };
    Ok(Some(axis))
}

fn check_interval(key: &str, v: f64, lo: f64, hi: f64, label: &str) -> Result<(), ConfigError> {
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(ConfigError::domain(key, format!("{v} is outside {label}")))
    }
}

fn check_grid(key: &str, g: &Grid) -> Result<(), ConfigError> {
    for v in g.values() {
        let ok = match key {
            "tau" => v > -TAU && v <= TAU,
            "theta" => (0.0..=PI).contains(&v),
            _ => (0.0..TAU).contains(&v),
        };
        if !ok {
            let range = match key {
                "tau" => "(-2pi, 2pi]",
                "theta" => "[0, pi]",
                _ => "[0, 2pi)",
            };
            return Err(ConfigError::domain(key, format!("{v} is outside {range}")));
        }
    }
    Ok(())
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, found {content:?}"),
        })?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::Parse {
                line,
                message: format!("invalid key {key:?}"),
            });
        }
        if entries.contains_key(key) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key {key}"),
            });
        }
        order.push(key.to_string());
        entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }

    let protocol = match entries.get("protocol") {
        None => return Err(ConfigError::domain("protocol", "missing required key")),
        Some(e) => match e.value.as_str() {
            "single" => Protocol::Single,
            "hindsight" => Protocol::Hindsight,
            "ccs" => Protocol::Ccs,
            other => {
                return Err(ConfigError::domain(
                    "protocol",
                    format!("unknown protocol {other:?} (expected single, hindsight or ccs)"),
                ))
            }
        },
    };
    const KNOWN: [&str; 15] = [
        "protocol", "tau", "theta", "phi", "outputs", "beta", "alpha", "f", "probe", "m_axis",
        "mprime_axis", "l_axis", "trials", "batches", "seed",
    ];
    for key in &order {
        let e = &entries[key];
        if !KNOWN.contains(&key.as_str()) {
            return Err(ConfigError::Parse {
                line: e.line,
                message: format!("unknown key {key}"),
            });
        }
        if !protocol.allowed_keys().contains(&key.as_str()) {
            return Err(ConfigError::domain(
                key,
                format!("not used by the {} protocol", protocol.name()),
            ));
        }
    }

    let grid = |key: &str| -> Result<Grid, ConfigError> {
        match entries.get(key) {
            Some(e) => {
                let g = parse_grid(key, e)?;
                check_grid(key, &g)?;
                Ok(g)
            }
            None if key == "tau" => Err(ConfigError::domain("tau", "missing required key")),
            None => Ok(Grid::Fixed(0.0)),
        }
    };
    let number = |key: &str, default: f64| -> Result<f64, ConfigError> {
        match entries.get(key) {
            Some(e) => parse_number(key, e.line, &e.value),
            None => Ok(default),
        }
    };
    let tau = grid("tau")?;
    let theta = grid("theta")?;
    let phi = grid("phi")?;

    let (outputs, outputs_explicit) = match entries.get("outputs") {
        None => (vec![Output::Probabilities], false),
        Some(e) => {
            let mut outs = Vec::new();
            for item in e.value.split(',').map(str::trim) {
                let o = Output::parse(item).ok_or_else(|| ConfigError::Parse {
                    line: e.line,
                    message: format!("unknown output {item:?}"),
                })?;
                if !outs.contains(&o) {
                    outs.push(o);
                }
            }
            outs.sort();
            (outs, true)
        }
    };

    let beta = number("beta", 0.0)?;
    check_interval("beta", beta, 0.0, PI, "[0, pi]")?;
    let alpha = number("alpha", PI / 4.0)?;
    check_interval("alpha", alpha, 0.0, PI / 2.0, "[0, pi/2]")?;
    let f = number("f", 1.0)?;
    check_interval("f", f, 0.0, 1.0, "[0, 1]")?;

    let probe = match entries.get("probe") {
        None => ProbeState::Zero,
        Some(e) => ProbeState::parse(&e.value).ok_or_else(|| {
            ConfigError::domain(
                "probe",
                format!(
                    "unknown probe {:?} (expected zero, one, plus, minus, plus_y, minus_y or mixed)",
                    e.value
                ),
            )
        })?,
    };

    let axis_or = |key: &str, default: Option<Axis>, allow_none: bool| match entries.get(key) {
        Some(e) => parse_axis(key, e, allow_none),
        None => Ok(default),
    };
    let m_default = match protocol {
        Protocol::Single => Axis::x(),
        _ => Axis::y(),
    };
    let m_axis = axis_or("m_axis", Some(m_default), protocol == Protocol::Ccs)?;
    let mprime_axis = axis_or("mprime_axis", Some(Axis::x()), false)?.expect("none is rejected");
    let l_axis = axis_or("l_axis", Some(Axis::z()), false)?.expect("none is rejected");

    let mc = if ["trials", "batches", "seed"].iter().any(|k| entries.contains_key(*k)) {
        let int = |key: &str, default: u64| -> Result<u64, ConfigError> {
            match entries.get(key) {
                None => Ok(default),
                Some(e) => e.value.parse().map_err(|_| ConfigError::Parse {
                    line: e.line,
                    message: format!("{key}: expected a non-negative integer"),
                }),
            }
        };
        let trials = int("trials", 100_000)?;
        if trials == 0 {
            return Err(ConfigError::domain("trials", "must be at least 1"));
        }
        let batches = int("batches", 200)?;
        if batches == 0 {
            return Err(ConfigError::domain("batches", "must be at least 1"));
        }
        let seed = match entries.get("seed") {
            None => None,
            Some(_) => Some(int("seed", 0)?),
        };
        Some(McSettings {
            trials,
            batches: batches as usize,
            seed,
        })
    } else {
        None
    };

    Ok(SweepSpec {
        protocol,
        tau,
        theta,
        phi,
        outputs,
        outputs_explicit,
        beta,
        alpha,
        f,
        probe,
        m_axis,
        mprime_axis,
        l_axis,
        mc,
        keys: order,
    })
}
