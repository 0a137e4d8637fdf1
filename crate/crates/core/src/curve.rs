//! Decay-rate curves over `1/hbar`, as produced by every method.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::PlanckSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Truncated,
    ComplexScaling,
    Wavepacket,
    WkbBottom,
    WkbGround,
    RatUnperturbed,
    RatPerturbed,
    RatSemiclassical,
    RatContinuum,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Truncated,
        Method::ComplexScaling,
        Method::Wavepacket,
        Method::WkbBottom,
        Method::WkbGround,
        Method::RatUnperturbed,
        Method::RatPerturbed,
        Method::RatSemiclassical,
        Method::RatContinuum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Truncated => "truncated",
            Method::ComplexScaling => "complex_scaling",
            Method::Wavepacket => "wavepacket",
            Method::WkbBottom => "wkb_bottom",
            Method::WkbGround => "wkb_ground",
            Method::RatUnperturbed => "rat_unperturbed",
            Method::RatPerturbed => "rat_perturbed",
            Method::RatSemiclassical => "rat_semiclassical",
            Method::RatContinuum => "rat_continuum",
        }
    }

    pub fn is_numerical(self) -> bool {
        matches!(self, Method::Truncated | Method::ComplexScaling | Method::Wavepacket)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

/// One row of a decay curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub inv_hbar_requested: f64,
    pub inv_hbar_snapped: f64,
    pub m: i64,
    pub n: u32,
    pub gamma: f64,
    /// Quasienergy per kick, NaN where the method has none.
    pub w: f64,
    pub method: Method,
    /// Basis size, scaling parameter, grid size or ladder length, depending on
    /// the method.
    pub nu_or_rho: f64,
    /// Island overlap of the selected state, NaN where not applicable.
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub inv_hbar_requested: f64,
    pub method: Method,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub points: Vec<DecayPoint>,
    pub failures: Vec<PointFailure>,
}

impl DecayCurve {
    /// Rows ordered by snapped `1/hbar`, then method, then requested value.
    pub fn sort(&mut self) {
        self.points.sort_by(|a, b| {
            a.inv_hbar_snapped
                .total_cmp(&b.inv_hbar_snapped)
                .then(a.method.cmp(&b.method))
                .then(a.inv_hbar_requested.total_cmp(&b.inv_hbar_requested))
        });
    }

    pub fn merge(&mut self, other: DecayCurve) {
        self.points.extend(other.points);
        self.failures.extend(other.failures);
        self.sort();
    }

    pub fn with_method(&self, method: Method) -> DecayCurve {
        DecayCurve {
            points: self.points.iter().filter(|p| p.method == method).cloned().collect(),
            failures: self.failures.iter().filter(|f| f.method == method).cloned().collect(),
        }
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.points.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for p in &self.points {
            w.serialize(p)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_csv_str(s: &str) -> Result<DecayCurve> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let points = r.deserialize().collect::<std::result::Result<Vec<DecayPoint>, _>>()?;
        Ok(DecayCurve { points, failures: Vec::new() })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<DecayCurve> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// Result of one method at one Planck constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub gamma: f64,
    pub w: f64,
    pub nu_or_rho: f64,
    pub overlap: f64,
}

/// Snaps every grid value, evaluates each distinct Planck constant once (in
/// parallel) and collects rows and failures. Non-positive rates are failures.
pub fn evaluate_grid<S, F>(inv_hbar_grid: &[f64], snap: S, method: Method, eval: F) -> DecayCurve
where
    S: Fn(f64) -> Result<PlanckSpec>,
    F: Fn(&PlanckSpec) -> Result<PointValue> + Sync,
{
    let snapped: Vec<(f64, Result<PlanckSpec>)> = inv_hbar_grid.iter().map(|&x| (x, snap(x))).collect();
    let mut unique: BTreeMap<(i64, u32), PlanckSpec> = BTreeMap::new();
    for p in snapped.iter().filter_map(|(_, p)| p.as_ref().ok()) {
        unique.entry((p.m, p.n)).or_insert(*p);
    }
    let keys: Vec<((i64, u32), PlanckSpec)> = unique.into_iter().collect();
    let results: BTreeMap<(i64, u32), std::result::Result<PointValue, String>> = keys
        .par_iter()
        .map(|(k, p)| {
            let v = eval(p).and_then(|v| {
                if v.gamma > 0.0 && v.gamma.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::InvalidArgument(format!("non-positive rate {}", v.gamma)))
                }
            });
            (*k, v.map_err(|e| e.to_string()))
        })
        .collect();
    let mut curve = DecayCurve::default();
    for (x, p) in snapped {
        let outcome = p.map_err(|e| e.to_string()).and_then(|p| results[&(p.m, p.n)].clone().map(|v| (p, v)));
        match outcome {
            Ok((p, v)) => curve.points.push(DecayPoint {
                inv_hbar_requested: x,
                inv_hbar_snapped: p.inv_hbar(),
                m: p.m,
                n: p.n,
                gamma: v.gamma,
                w: v.w,
                method,
                nu_or_rho: v.nu_or_rho,
                overlap: v.overlap,
            }),
            Err(message) => curve.failures.push(PointFailure { inv_hbar_requested: x, method, message }),
        }
    }
    curve.sort();
    curve
}

pub const CSV_HEADER: [&str; 9] =
    ["inv_hbar_requested", "inv_hbar_snapped", "m", "n", "gamma", "w", "method", "nu_or_rho", "overlap"];

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
