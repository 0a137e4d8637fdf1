//! Agreement between decay curves produced by different methods.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curve::{DecayCurve, Method};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub m: i64,
    pub n: u32,
    pub inv_hbar: f64,
    pub rates: BTreeMap<Method, f64>,
    /// Largest over smallest rate at this point.
    pub spread: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub a: Method,
    pub b: Method,
    pub points: usize,
    /// Geometric mean of `gamma_a / gamma_b`.
    pub mean_ratio: f64,
    pub max_spread: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub tolerance_factor: f64,
    pub rows: Vec<ComparisonRow>,
    pub pairs: Vec<PairSummary>,
    pub flagged: usize,
}

impl Comparison {
    pub fn all_agree(&self) -> bool {
        self.flagged == 0
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let methods: Vec<Method> = self.pairs.iter().flat_map(|p| [p.a, p.b]).fold(vec![], |mut v, m| {
            if !v.contains(&m) {
                v.push(m);
            }
            v
        });
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head = vec!["m".to_string(), "n".into(), "inv_hbar".into()];
        head.extend(methods.iter().map(|m| m.to_string()));
        head.extend(["spread".into(), "flagged".into()]);
        w.write_record(&head)?;
        for r in &self.rows {
            let mut rec = vec![r.m.to_string(), r.n.to_string(), r.inv_hbar.to_string()];
            rec.extend(methods.iter().map(|m| r.rates.get(m).map(|g| g.to_string()).unwrap_or_default()));
            rec.extend([r.spread.to_string(), r.flagged.to_string()]);
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Lines up the curves on their snapped Planck constants and flags points
/// where two methods differ by more than `tolerance_factor`.
pub fn compare_methods(curves: &[DecayCurve], tolerance_factor: f64) -> Result<Comparison> {
    if !(tolerance_factor >= 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance factor {tolerance_factor} is below 1")));
    }
    let mut table: BTreeMap<(i64, u32), (f64, BTreeMap<Method, f64>)> = BTreeMap::new();
    for p in curves.iter().flat_map(|c| &c.points) {
        let e = table.entry((p.m, p.n)).or_insert((p.inv_hbar_snapped, BTreeMap::new()));
        e.1.entry(p.method).or_insert(p.gamma);
    }
    let rows: Vec<ComparisonRow> = table
        .into_iter()
        .filter(|(_, (_, r))| r.len() >= 2)
        .map(|((m, n), (x, rates))| {
            let hi = rates.values().copied().fold(f64::MIN, f64::max);
            let lo = rates.values().copied().fold(f64::MAX, f64::min);
            let spread = hi / lo;
            ComparisonRow { m, n, inv_hbar: x, rates, spread, flagged: spread > tolerance_factor }
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::NoCommonPoints);
    }
    let mut methods: Vec<Method> = rows.iter().flat_map(|r| r.rates.keys().copied()).collect();
    methods.sort();
    methods.dedup();
    let mut pairs = Vec::new();
    for (i, &a) in methods.iter().enumerate() {
        for &b in &methods[i + 1..] {
            let ratios: Vec<f64> = rows
                .iter()
                .filter_map(|r| Some(r.rates.get(&a)? / r.rates.get(&b)?))
                .collect();
            if ratios.is_empty() {
                continue;
            }
            let mean_ratio = (ratios.iter().map(|q| q.ln()).sum::<f64>() / ratios.len() as f64).exp();
            let spreads = ratios.iter().map(|q| q.max(1.0 / q));
            pairs.push(PairSummary {
                a,
                b,
                points: ratios.len(),
                mean_ratio,
                max_spread: spreads.clone().fold(1.0, f64::max),
                flagged: spreads.filter(|s| *s > tolerance_factor).count(),
            });
        }
    }
    let flagged = rows.iter().filter(|r| r.flagged).count();
    Ok(Comparison { tolerance_factor, rows, pairs, flagged })
}
