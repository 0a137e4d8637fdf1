//! Experiment configuration: JSON on disk, figure presets, overrides and
//! validation.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classical::{MapParams, MapSign, ResonanceChain};
use crate::curve::Method;
use crate::error::{Error, Result};
use crate::spectral::{Selection, SweepOptions};
use crate::tunneling::N0Choice;

/// Numerical effort. Taken from `QAM_MODE` (`ci` or `desk`) unless a config sets it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Ci,
    Desk,
}

impl RunMode {
    pub fn from_env() -> Self {
        match std::env::var("QAM_MODE").as_deref() {
            Ok("desk") => RunMode::Desk,
            _ => RunMode::Ci,
        }
    }

    /// Largest truncated basis half-size allowed.
    pub fn nu_cap(self) -> usize {
        match self {
            RunMode::Ci => 2048,
            RunMode::Desk => 4096,
        }
    }

    pub fn numerics(self) -> SweepOptions {
        match self {
            RunMode::Ci => SweepOptions::default(),
            RunMode::Desk => SweepOptions {
                nu_sequence: vec![256, 512, 1024, 2048, 4096],
                wavepacket_log2: 17,
                wavepacket_steps: 16000,
                ..SweepOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `points` evenly spaced values from `start` to `stop` inclusive.
    Range { start: f64, stop: f64, points: usize },
    List { values: Vec<f64> },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Range { start: 4.0, stop: 20.0, points: 60 }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Range { start, stop, points } => match points {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
            GridSpec::List { values } => values.clone(),
        }
    }
}

/// Pendulum parameters of a chain as quoted alongside a figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainValues {
    pub i_rs: f64,
    pub mass: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub r: u32,
    pub s: u32,
    #[serde(default)]
    pub reference: Option<ChainValues>,
    /// Measure the chain in the portrait and fit its parameters.
    #[serde(default = "yes")]
    pub measure: bool,
}

fn yes() -> bool {
    true
}

impl ChainConfig {
    pub fn reference_chain(&self) -> Option<ResonanceChain> {
        self.reference.map(|c| ResonanceChain::from_params(self.r, self.s, c.i_rs, c.mass, c.coupling))
    }
}

/// Which chain parameters feed the ladder theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainSource {
    /// The classical fit, falling back to the reference values if the fit fails.
    #[default]
    Fit,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitConfig {
    pub seeds_per_axis: usize,
    pub steps: usize,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self { seeds_per_axis: 12, steps: 300 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheConfig {
    pub enabled: bool,
    pub dir: PathBuf,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self { enabled: true, dir: PathBuf::from(".qam-cache") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub figure: Option<String>,
    pub kick: f64,
    pub drift: f64,
    pub sign: MapSign,
    pub grid: GridSpec,
    pub methods: Vec<Method>,
    pub selection: Selection,
    pub chains: Vec<ChainConfig>,
    pub chain_source: ChainSource,
    /// Cell size and horizon of the chain measurement.
    pub chain_grid_step: f64,
    pub chain_steps: usize,
    pub n0: N0Choice,
    pub output_dir: PathBuf,
    pub mode: RunMode,
    pub numerics: SweepOptions,
    /// Methods disagreeing by more than this factor are flagged.
    pub agreement_factor: f64,
    pub cache: CacheConfig,
    pub portrait: PortraitConfig,
}

pub const FIGURES: [&str; 9] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"];

fn chain(r: u32, i_rs: f64, mass: f64, coupling: f64) -> ChainConfig {
    ChainConfig { r, s: 1, reference: Some(ChainValues { i_rs, mass, coupling }), measure: true }
}

impl ExperimentConfig {
    /// Plain configuration for the given map, without chains.
    pub fn new(kick: f64, drift: f64, sign: MapSign, mode: RunMode) -> Self {
        Self {
            figure: None,
            kick,
            drift,
            sign,
            grid: GridSpec::default(),
            methods: vec![Method::Truncated],
            selection: Selection::MinimalIsland,
            chains: vec![],
            chain_source: ChainSource::Fit,
            chain_grid_step: 0.02,
            chain_steps: 2000,
            n0: N0Choice::Nearest,
            output_dir: PathBuf::from("out"),
            mode,
            numerics: mode.numerics(),
            agreement_factor: 2.0,
            cache: CacheConfig::default(),
            portrait: PortraitConfig::default(),
        }
    }

    /// Preset reproducing one of the figures.
    pub fn for_figure(name: &str, mode: RunMode) -> Result<Self> {
        use Method::*;
        let fig5 = |m: Vec<Method>| {
            let mut c = Self::new(2.5, 1.0, MapSign::Minus, mode);
            c.chains = vec![chain(4, 0.43, 3.866, 7.275e-4)];
            c.methods = m;
            c
        };
        let mut c = match name {
            "fig3" => {
                let mut c = Self::new(0.8, 0.7, MapSign::Minus, mode);
                c.methods = vec![Truncated, WkbBottom, WkbGround];
                c
            }
            "fig4" => {
                let mut c = Self::new(0.7, 0.5, MapSign::Minus, mode);
                c.chains = vec![chain(11, 0.251, 2.785, 4.376e-8)];
                c.methods = vec![Truncated, WkbBottom, WkbGround, RatUnperturbed];
                c
            }
            "fig5" => fig5(vec![Truncated, ComplexScaling, Wavepacket, RatUnperturbed, RatContinuum]),
            "fig6" => fig5(vec![RatUnperturbed, RatContinuum]),
            "fig7" => {
                let mut c = Self::new(PI, 0.5, MapSign::Minus, mode);
                c.chains = vec![chain(3, 0.13, 1.52, 1.9e-3)];
                c.methods = vec![Truncated, RatUnperturbed];
                c
            }
            "fig8" => {
                let mut c = Self::new(1.329, 0.5336, MapSign::Minus, mode);
                c.chains = vec![chain(6, 0.46, 4.504, 1.8e-4), chain(7, 0.93, 2.626, 3.1e-4)];
                c.methods = vec![Truncated, RatUnperturbed];
                c
            }
            "fig9" | "fig10" => {
                let mut c = fig5(vec![Wavepacket, Truncated]);
                c.grid = GridSpec::List { values: vec![4.0] };
                c.selection = Selection::CenterProbe;
                c
            }
            "fig11" => {
                let mut c = fig5(vec![Truncated, RatUnperturbed, RatPerturbed, RatSemiclassical]);
                c.grid = GridSpec::Range { start: 7.0, stop: 9.0, points: 21 };
                c.n0 = N0Choice::Innermost(1);
                c
            }
            other => return Err(Error::UnknownFigure(other.to_string())),
        };
        c.figure = Some(name.to_string());
        c.output_dir = PathBuf::from("out").join(name);
        Ok(c)
    }

    /// Applies a JSON object of overrides, merging nested objects key by key.
    pub fn with_overrides(&self, overrides: &serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(self)?;
        merge(&mut base, overrides);
        let c: Self = serde_json::from_value(base)?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn params(&self) -> Result<MapParams> {
        MapParams::new(self.kick, self.drift, self.sign)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if let Some(f) = &self.figure {
            if !FIGURES.contains(&f.as_str()) {
                return Err(Error::UnknownFigure(f.clone()));
            }
        }
        self.params()?;
        let grid = self.grid.values();
        if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return bad("the 1/hbar grid must be non-empty and positive".into());
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        let nus = &self.numerics.nu_sequence;
        if nus.len() < 2 || nus.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("basis sizes must increase: {nus:?}"));
        }
        if nus.iter().any(|&n| n > self.mode.nu_cap()) {
            return bad(format!("basis size above the {:?} cap of {}", self.mode, self.mode.nu_cap()));
        }
        if self.numerics.rho_grid.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return bad("scaling parameters must lie in (0, 1]".into());
        }
        if !(self.agreement_factor >= 1.0) {
            return bad("agreement factor must be at least 1".into());
        }
        if self.chains.iter().any(|c| c.r == 0) {
            return bad("chain order must be positive".into());
        }
        let needs_chain = self.methods.iter().any(|m| m.as_str().starts_with("rat_"));
        if needs_chain && self.chains.is_empty() {
            return bad("ladder methods need at least one chain".into());
        }
        Ok(())
    }
}

fn merge(base: &mut serde_json::Value, over: &serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    // tagged variants are replaced whole
                    Some(slot) if slot.is_object() && v.is_object() && v.get("kind").is_none() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}
