//! End-to-end figure runs: every run writes its CSV files, `metadata.json`
//! and a `run.log` into the output directory.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::cache::{cache_key, Cache, CacheStats};
use super::compare::{compare_methods, Comparison};
use super::config::{ChainSource, ChainValues, ExperimentConfig, FIGURES};
use super::CODE_HASH;
use crate::classical::{
    find_chain_seeds, fit_resonance_params, measure_chain, monodromy, normal_frame, phase_portrait, ChainMeasurement,
    PhaseState, ResonanceChain,
};
use crate::curve::{evaluate_grid, DecayCurve, DecayPoint, Method, PointValue};
use crate::error::{Error, Result};
use crate::quantum::{
    angle_grid, coherent_state, fit_exponential_tail, husimi, linspace, propagate, HusimiField, MomentumGrid,
    PlanckSpec, PropagateOptions, Propagation, WavepacketState,
};
use crate::classical::MapSign;
use crate::spectral::{
    decay_point, island_states, mean_island_action, minimal_island_state, track_crossing, CrossingMarker,
    CrossingOptions, CrossingSlice, CrossingTrack, SweepSetup, ISLAND_OVERLAP_MIN,
};
use crate::tunneling::{continuum_rate, degeneracy_points, theory_curve, xi0_explicit, build_ladder, N0Choice, TheoryInputs};

/// Chain parameters quoted, fitted and finally used by a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    pub r: u32,
    pub s: u32,
    pub reference: Option<ChainValues>,
    pub measurement: Option<ChainMeasurement>,
    pub fitted: Option<ResonanceChain>,
    pub fit_error: Option<String>,
    pub used: Option<ResonanceChain>,
    pub used_source: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FigureRun {
    pub figure: String,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub curves: Vec<DecayCurve>,
    pub chains: Vec<ChainReport>,
    pub comparison: Option<Comparison>,
    pub markers: Vec<CrossingMarker>,
    /// Per-point or per-step failures; the run still produced output.
    pub failures: Vec<String>,
    pub cache: CacheStats,
}

impl FigureRun {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn curve(&self, method: Method) -> Option<&DecayCurve> {
        self.curves.iter().find(|c| c.points.first().map(|p| p.method) == Some(method))
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    figure: &'a str,
    code_hash: &'a str,
    config: &'a ExperimentConfig,
    island_area: f64,
    center: PhaseState,
    chains: &'a [ChainReport],
    files: &'a [String],
    markers: &'a [CrossingMarker],
    failures: usize,
    cache: CacheStats,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    setup: SweepSetup,
    cache: Cache,
    dir: PathBuf,
    files: Vec<String>,
    failures: Vec<String>,
    log: String,
    start: Instant,
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn unix_time() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl Ctx<'_> {
    fn note(&mut self, msg: impl AsRef<str>) {
        let _ = writeln!(self.log, "{:.3} +{:.3}s {}", unix_time(), self.start.elapsed().as_secs_f64(), msg.as_ref());
    }

    fn fail(&mut self, msg: String) {
        self.note(format!("FAILED {msg}"));
        self.failures.push(msg);
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        self.note(format!("wrote {name}"));
        Ok(())
    }

    fn write_curve(&mut self, name: &str, curve: &DecayCurve) -> Result<()> {
        for f in &curve.failures {
            self.fail(format!("{name}: 1/hbar = {}: {}", f.inv_hbar_requested, f.message));
        }
        self.write(name, &curve.to_csv_string()?)
    }

    fn grid(&self) -> Vec<f64> {
        self.cfg.grid.values()
    }

    fn planck(&self, inv_hbar: f64) -> Result<PlanckSpec> {
        self.setup.planck(inv_hbar)
    }
}

/// Runs one figure preset (or any configuration naming a figure) and writes
/// its outputs. Unknown figure names are rejected before any work is done.
pub fn run_figure(cfg: &ExperimentConfig) -> Result<FigureRun> {
    let figure = cfg.figure.clone().ok_or_else(|| Error::InvalidArgument("configuration names no figure".into()))?;
    if !FIGURES.contains(&figure.as_str()) {
        return Err(Error::UnknownFigure(figure));
    }
    cfg.validate()?;
    let params = cfg.params()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let cache = if cfg.cache.enabled { Cache::new(&cfg.cache.dir) } else { Cache::disabled() };
    let start = Instant::now();
    let setup_key = cache_key("setup", &(&params, &cfg.numerics))?;
    let setup: std::result::Result<SweepSetup, String> =
        cache.get_or_compute(&setup_key, || SweepSetup::new(params, cfg.numerics.clone()).map_err(|e| e.to_string()));
    let setup = setup.map_err(Error::Recorded)?;
    let mut ctx = Ctx {
        cfg,
        setup,
        cache,
        dir: cfg.output_dir.clone(),
        files: vec![],
        failures: vec![],
        log: String::new(),
        start,
    };
    ctx.note(format!("{figure} mode {:?} code {CODE_HASH}", cfg.mode));
    ctx.note(format!("island area {:.4}", ctx.setup.island_area));

    let chains = resolve_chains(&mut ctx);
    write_portrait(&mut ctx)?;
    let mut curves = Vec::new();
    let mut markers = Vec::new();
    match figure.as_str() {
        "fig9" => husimi_snapshots(&mut ctx)?,
        "fig10" => window_decay(&mut ctx)?,
        "fig11" => {
            curves = standard_curves(&mut ctx, &chains)?;
            let (c, m) = excited_state_crossing(&mut ctx, &chains)?;
            curves.push(c);
            markers = m;
        }
        _ => {
            curves = standard_curves(&mut ctx, &chains)?;
            if figure == "fig6" {
                xi_table(&mut ctx, &chains)?;
            }
            if figure == "fig7" {
                lowest_states(&mut ctx, &chains)?;
            }
        }
    }

    let comparison = if curves.len() >= 2 {
        match compare_methods(&curves, cfg.agreement_factor) {
            Ok(c) => {
                ctx.write("comparison.csv", &c.to_csv_string()?)?;
                ctx.note(format!("{} of {} shared points disagree by more than {}", c.flagged, c.rows.len(), c.tolerance_factor));
                Some(c)
            }
            Err(e) => {
                ctx.note(format!("no comparison: {e}"));
                None
            }
        }
    } else {
        None
    };

    let cache_stats = ctx.cache.stats();
    ctx.files.push("metadata.json".into());
    ctx.files.push("run.log".into());
    let meta = Metadata {
        figure: &figure,
        code_hash: CODE_HASH,
        config: cfg,
        island_area: ctx.setup.island_area,
        center: ctx.setup.center,
        chains: &chains,
        files: &ctx.files,
        markers: &markers,
        failures: ctx.failures.len(),
        cache: cache_stats,
    };
    std::fs::write(ctx.dir.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
    ctx.note(format!("done, {} failures, cache {:?}", ctx.failures.len(), cache_stats));
    std::fs::write(ctx.dir.join("run.log"), &ctx.log)?;
    Ok(FigureRun {
        figure,
        output_dir: ctx.dir,
        files: ctx.files,
        curves,
        chains,
        comparison,
        markers,
        failures: ctx.failures,
        cache: cache_stats,
    })
}

fn measured_chain(ctx: &Ctx, r: u32, s: u32) -> Result<ChainMeasurement> {
    let cfg = ctx.cfg;
    let params = ctx.setup.params;
    let center = ctx.setup.center;
    let key = cache_key("chain", &(&params, r, s, cfg.chain_grid_step, cfg.chain_steps))?;
    let m: std::result::Result<ChainMeasurement, String> = ctx.cache.get_or_compute(&key, || {
        let (inner, outer) = find_chain_seeds(&params, center, r, s, 0.05, cfg.chain_steps).map_err(|e| e.to_string())?;
        measure_chain(&params, center, r, s, inner, outer, cfg.chain_grid_step, cfg.chain_steps).map_err(|e| e.to_string())
    });
    m.map_err(Error::Recorded)
}

fn resolve_chains(ctx: &mut Ctx) -> Vec<ChainReport> {
    let mut out = Vec::new();
    for c in ctx.cfg.chains.clone() {
        let mut rep = ChainReport {
            r: c.r,
            s: c.s,
            reference: c.reference,
            measurement: None,
            fitted: None,
            fit_error: None,
            used: None,
            used_source: None,
        };
        if c.measure {
            let fit = measured_chain(ctx, c.r, c.s).and_then(|m| {
                rep.measurement = Some(m.clone());
                fit_resonance_params(m.s_plus, m.s_minus, m.monodromy_trace, c.r, c.s)
            });
            match fit {
                Ok(f) => {
                    ctx.note(format!("{}:{} chain fit I={:.4} M={:.4} v={:.4e}", c.r, c.s, f.i_rs, f.mass, f.coupling));
                    rep.fitted = Some(f);
                }
                Err(e) => {
                    ctx.note(format!("{}:{} chain fit failed: {e}", c.r, c.s));
                    rep.fit_error = Some(e.to_string());
                }
            }
        }
        let reference = c.reference_chain();
        let choice = match ctx.cfg.chain_source {
            ChainSource::Fit => rep.fitted.map(|f| (f, "fit")).or(reference.map(|f| (f, "reference"))),
            ChainSource::Reference => reference.map(|f| (f, "reference")).or(rep.fitted.map(|f| (f, "fit"))),
        };
        if let Some((chain, source)) = choice {
            rep.used = Some(chain);
            rep.used_source = Some(source.into());
        } else {
            ctx.fail(format!("{}:{} chain has neither a fit nor reference values", c.r, c.s));
        }
        out.push(rep);
    }
    out
}

fn write_portrait(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.cfg.portrait.seeds_per_axis.max(1);
    let c = ctx.setup.center;
    let mut seeds: Vec<PhaseState> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                let t = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
                let a = -std::f64::consts::PI + std::f64::consts::TAU * (j as f64 + 0.5) / n as f64;
                PhaseState::new(t, a)
            })
        })
        .collect();
    // a line through the island to resolve its tori and chains
    seeds.extend((1..=n).map(|i| PhaseState::new(c.theta + 1.5 * i as f64 / n as f64, c.action_j)));
    let pts = phase_portrait(&ctx.setup.params, &seeds, ctx.cfg.portrait.steps)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "j", "seed"])?;
    for (t, j, s) in pts {
        w.serialize((t, j, s))?;
    }
    let text = csv_text(w)?;
    ctx.write("portrait.csv", &text)
}

fn to_bits(v: PointValue) -> [u64; 4] {
    [v.gamma, v.w, v.nu_or_rho, v.overlap].map(f64::to_bits)
}

fn from_bits(b: [u64; 4]) -> PointValue {
    let [gamma, w, nu_or_rho, overlap] = b.map(f64::from_bits);
    PointValue { gamma, w, nu_or_rho, overlap }
}

fn numerical_curve(ctx: &Ctx, method: Method, grid: &[f64]) -> DecayCurve {
    let setup = &ctx.setup;
    let base = (&setup.params, &setup.opts, ctx.cfg.selection, method);
    evaluate_grid(grid, |x| setup.planck(x), method, |p| {
        let key = cache_key("point", &(&base, p.m, p.n, p.beta.to_bits()))?;
        let v: std::result::Result<[u64; 4], String> = ctx.cache.get_or_compute(&key, || {
            decay_point(setup, p, method, ctx.cfg.selection).map(to_bits).map_err(|e| e.to_string())
        });
        v.map(from_bits).map_err(Error::Recorded)
    })
}

fn theory_inputs(ctx: &Ctx, chain: Option<ResonanceChain>, n0: N0Choice) -> TheoryInputs {
    TheoryInputs {
        params: ctx.setup.params,
        chain,
        island_area: ctx.setup.island_area,
        n0,
        n_max: ctx.cfg.numerics.n_max,
        snap_bound: ctx.cfg.numerics.snap_bound,
    }
}

/// Every configured method on the grid. Ladder methods are evaluated per
/// chain; with several chains the files carry an `_r_s` suffix and only the
/// first chain enters the returned curves.
fn standard_curves(ctx: &mut Ctx, chains: &[ChainReport]) -> Result<Vec<DecayCurve>> {
    let grid = ctx.grid();
    let mut curves = Vec::new();
    for method in ctx.cfg.methods.clone() {
        // the crossing run produces its own excited-state curve
        if ctx.cfg.figure.as_deref() == Some("fig11") && method == Method::Truncated {
            continue;
        }
        ctx.note(format!("evaluating {method}"));
        if method.is_numerical() {
            let c = numerical_curve(ctx, method, &grid);
            ctx.write_curve(&format!("curve_{method}.csv"), &c)?;
            curves.push(c);
        } else if matches!(method, Method::WkbBottom | Method::WkbGround) {
            let c = theory_curve(&theory_inputs(ctx, None, ctx.cfg.n0), &grid, method);
            ctx.write_curve(&format!("curve_{method}.csv"), &c)?;
            curves.push(c);
        } else {
            let several = chains.len() > 1;
            for (i, rep) in chains.iter().enumerate() {
                let Some(chain) = rep.used else { continue };
                let c = theory_curve(&theory_inputs(ctx, Some(chain), ctx.cfg.n0), &grid, method);
                let name = if several {
                    format!("curve_{method}_{}_{}.csv", rep.r, rep.s)
                } else {
                    format!("curve_{method}.csv")
                };
                ctx.write_curve(&name, &c)?;
                if i == 0 {
                    curves.push(c);
                }
            }
        }
    }
    Ok(curves)
}

fn first_chain(ctx: &mut Ctx, chains: &[ChainReport]) -> Option<ResonanceChain> {
    let c = chains.first().and_then(|c| c.used);
    if c.is_none() {
        ctx.fail("no resonance chain available".into());
    }
    c
}

/// Decay exponents of the explicit ladder sum and of its continuum limit.
fn xi_table(ctx: &mut Ctx, chains: &[ChainReport]) -> Result<()> {
    let Some(chain) = first_chain(ctx, chains) else { return Ok(()) };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["inv_hbar_requested", "inv_hbar_snapped", "length", "xi0_explicit", "xi0_continuum"])?;
    for x in ctx.grid() {
        let row = ctx.planck(x).and_then(|p| {
            let spec = build_ladder(&chain, p.hbar, ctx.setup.island_area, ctx.cfg.n0)?;
            let explicit = if spec.length > 0 { xi0_explicit(&spec)? } else { f64::NAN };
            Ok((p.inv_hbar(), spec.length, explicit, continuum_rate(&spec)?.0))
        });
        match row {
            Ok((xs, l, a, b)) => w.serialize((x, xs, l, a, b))?,
            Err(e) => ctx.fail(format!("xi0 at 1/hbar = {x}: {e}")),
        }
    }
    let text = csv_text(w)?;
    ctx.write("xi0.csv", &text)
}

/// Unperturbed ladder rates of the states `n_i = 0 .. min(r, 3)` and their
/// pointwise minimum.
fn lowest_states(ctx: &mut Ctx, chains: &[ChainReport]) -> Result<()> {
    let Some(chain) = first_chain(ctx, chains) else { return Ok(()) };
    let grid = ctx.grid();
    let mut all: Vec<DecayCurve> = Vec::new();
    for n_i in 0..chain.r.min(3) {
        let c = theory_curve(&theory_inputs(ctx, Some(chain), N0Choice::Innermost(n_i)), &grid, Method::RatUnperturbed);
        ctx.write_curve(&format!("curve_rat_unperturbed_n{n_i}.csv"), &c)?;
        all.push(c);
    }
    let mut min = DecayCurve::default();
    for p in all.iter().flat_map(|c| &c.points) {
        match min.points.iter_mut().find(|q| q.inv_hbar_requested == p.inv_hbar_requested) {
            Some(q) if q.gamma <= p.gamma => {}
            Some(q) => *q = p.clone(),
            None => min.points.push(p.clone()),
        }
    }
    min.sort();
    ctx.write("curve_rat_unperturbed_min.csv", &min.to_csv_string()?)
}

fn wavepacket_run(ctx: &Ctx, p: &PlanckSpec, snapshots: Vec<usize>) -> Result<(Propagation, usize)> {
    let setup = &ctx.setup;
    let size = 1usize << setup.opts.wavepacket_log2;
    let fraction = if setup.params.sign == MapSign::Minus { 0.875 } else { 0.125 };
    let grid = MomentumGrid::around(setup.center.action_j, p.hbar, size, fraction);
    let psi = coherent_state(setup.center, p, grid, setup.opts.squeeze)?;
    let mut opts = PropagateOptions::new(setup.window.j_range, size);
    opts.snapshots = snapshots;
    Ok((propagate(&psi, &setup.params, p, setup.opts.wavepacket_steps, &opts)?, size))
}

fn island_eigenstate(ctx: &Ctx, p: &PlanckSpec) -> Result<WavepacketState> {
    let states = island_states(&ctx.setup, p, ISLAND_OVERLAP_MIN)?;
    let s = minimal_island_state(&states, ISLAND_OVERLAP_MIN).ok_or(Error::EmptyCandidates)?;
    Ok(s.vector.clone())
}

fn husimi_csv(field: &HusimiField) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "j", "q"])?;
    for (row, &j) in field.values.iter().zip(&field.j_grid) {
        for (&q, &t) in row.iter().zip(&field.theta_grid) {
            w.serialize((t, j, q))?;
        }
    }
    csv_text(w)
}

fn husimi_grids(ctx: &Ctx) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = ctx.setup.window.j_range;
    let pad = 0.5 * (hi - lo);
    (angle_grid(128), linspace(lo - pad, hi + pad, 96))
}

fn husimi_snapshots(ctx: &mut Ctx) -> Result<()> {
    let x = ctx.grid()[0];
    let p = ctx.planck(x)?;
    let steps = ctx.setup.opts.wavepacket_steps;
    let mut times: Vec<usize> = [100, 1000, steps].into_iter().filter(|&t| t <= steps).collect();
    times.dedup();
    let (tg, jg) = husimi_grids(ctx);
    let squeeze = ctx.setup.opts.squeeze;
    ctx.note(format!("propagating at hbar = {}", p.hbar));
    match wavepacket_run(ctx, &p, times) {
        Ok((run, _)) => {
            for (t, psi) in &run.snapshots {
                ctx.write(&format!("husimi_t{t}.csv"), &husimi_csv(&husimi(psi, &tg, &jg, squeeze))?)?;
            }
        }
        Err(e) => ctx.fail(format!("wavepacket: {e}")),
    }
    match island_eigenstate(ctx, &p) {
        Ok(psi) => ctx.write("husimi_eigenstate.csv", &husimi_csv(&husimi(&psi, &tg, &jg, squeeze))?)?,
        Err(e) => ctx.fail(format!("eigenstate: {e}")),
    }
    Ok(())
}

#[derive(Serialize)]
struct TailFit {
    inv_hbar: f64,
    grid_size: usize,
    steps: usize,
    t_min: usize,
    rate: f64,
    gamma: f64,
    rms: f64,
}

fn window_decay(ctx: &mut Ctx) -> Result<()> {
    let x = ctx.grid()[0];
    let p = ctx.planck(x)?;
    match wavepacket_run(ctx, &p, vec![]) {
        Ok((run, size)) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "norm", "window_probability"])?;
            for pr in &run.probes {
                w.serialize((pr.t, pr.norm, pr.window_prob))?;
            }
            let text = csv_text(w)?;
            ctx.write("window_probability.csv", &text)?;
            let series: Vec<(usize, f64)> = run.probes.iter().map(|pr| (pr.t, pr.window_prob)).collect();
            let steps = ctx.setup.opts.wavepacket_steps;
            let (rate, rms) = fit_exponential_tail(&series, steps / 2)?;
            let fit = TailFit { inv_hbar: p.inv_hbar(), grid_size: size, steps, t_min: steps / 2, rate, gamma: rate / 4.0, rms };
            ctx.write("fit.json", &serde_json::to_string_pretty(&fit)?)?;
        }
        Err(e) => ctx.fail(format!("wavepacket: {e}")),
    }
    match island_eigenstate(ctx, &p) {
        Ok(psi) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["j", "probability"])?;
            for (i, c) in psi.amplitudes.iter().enumerate() {
                w.serialize((psi.momentum(i), c.norm_sqr()))?;
            }
            let text = csv_text(w)?;
            ctx.write("eigenfunction.csv", &text)?;
        }
        Err(e) => ctx.fail(format!("eigenstate: {e}")),
    }
    Ok(())
}

/// Island states of one truncated spectrum as `(gamma, w, label, overlap)`,
/// sorted by the label `<I>/hbar - 1`, which approximates the torus quantum
/// number (the Husimi smoothing adds `hbar/2` to the mean action).
pub fn labelled_island_states(setup: &SweepSetup, p: &PlanckSpec, min_overlap: f64) -> Result<Vec<[f64; 4]>> {
    let (_, m) = monodromy(&setup.params, setup.center, 1);
    let frame = normal_frame(&m).ok_or(Error::NoIsland { a_eps: f64::NAN, k_eps: f64::NAN })?;
    let mut rows: Vec<[f64; 4]> = island_states(setup, p, min_overlap)?
        .iter()
        .map(|s| [s.gamma, s.w, mean_island_action(&s.vector, &setup.window, &frame) / p.hbar - 1.0, s.island_overlap])
        .collect();
    rows.sort_by(|a, b| a[2].total_cmp(&b[2]));
    Ok(rows)
}

/// Slices of labelled island states over the grid, cached per Planck constant.
pub fn crossing_slices(setup: &SweepSetup, cache: &Cache, grid: &[f64], min_overlap: f64) -> (Vec<(PlanckSpec, Vec<[f64; 4]>)>, Vec<String>) {
    let mut out: Vec<(PlanckSpec, Vec<[f64; 4]>)> = Vec::new();
    let mut failures = Vec::new();
    for &x in grid {
        let p = match setup.planck(x) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("1/hbar = {x}: {e}"));
                continue;
            }
        };
        if out.iter().any(|(q, _)| (q.m, q.n) == (p.m, p.n)) {
            continue;
        }
        let rows = cache_key("slice", &(&setup.params, &setup.opts, min_overlap, p.m, p.n, p.beta.to_bits()))
            .and_then(|key| {
                let r: std::result::Result<Vec<[u64; 4]>, String> = cache.get_or_compute(&key, || {
                    labelled_island_states(setup, &p, min_overlap)
                        .map(|rows| rows.into_iter().map(|r| r.map(f64::to_bits)).collect())
                        .map_err(|e| e.to_string())
                });
                r.map(|v| v.into_iter().map(|b| b.map(f64::from_bits)).collect()).map_err(Error::Recorded)
            });
        match rows {
            Ok(r) => out.push((p, r)),
            Err(e) => failures.push(format!("1/hbar = {x}: {e}")),
        }
    }
    (out, failures)
}

/// Follows the island states `n_i` and `n_i + r` through the sweep. The
/// second coordinate of the tracking is the action label, which stays
/// smooth where the quasienergy wraps.
pub fn track_pair(slices: &[(PlanckSpec, Vec<[f64; 4]>)], n_i: usize, r: usize) -> Result<CrossingTrack> {
    let cs: Vec<CrossingSlice> = slices
        .iter()
        .map(|(p, rows)| CrossingSlice {
            inv_hbar: p.inv_hbar(),
            w_period: f64::INFINITY,
            candidates: rows.iter().map(|r| (r[0], r[2])).collect(),
        })
        .collect();
    track_crossing(&cs, [n_i, n_i + r], &CrossingOptions::default())
}

fn excited_state_crossing(ctx: &mut Ctx, chains: &[ChainReport]) -> Result<(DecayCurve, Vec<CrossingMarker>)> {
    let n_i = match ctx.cfg.n0 {
        N0Choice::Innermost(n) => n,
        _ => 1,
    };
    let r = chains.first().map_or(4, |c| c.r);
    if let Some(chain) = chains.first().and_then(|c| c.used) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n_i", "l", "inv_hbar", "valid"])?;
        for k in 0..chain.r {
            let l_max = ((40.0 * chain.i_rs - 1.0 - 2.0 * f64::from(k)) / f64::from(chain.r)).floor().max(0.0) as u32;
            for d in degeneracy_points(&chain, k, l_max, ctx.setup.island_area) {
                w.serialize((k, d.l, d.inv_hbar, d.valid))?;
            }
        }
        let text = csv_text(w)?;
        ctx.write("degeneracies.csv", &text)?;
    }

    ctx.note("computing labelled island spectra");
    let grid = ctx.grid();
    let (slices, failures) = crossing_slices(&ctx.setup, &ctx.cache, &grid, 0.2);
    for f in failures {
        ctx.fail(format!("island spectrum at {f}"));
    }
    let need = n_i as usize + r as usize + 1;
    let (usable, short): (Vec<_>, Vec<_>) = slices.into_iter().partition(|(_, rows)| rows.len() >= need);
    for (p, rows) in short {
        ctx.fail(format!("only {} island states at 1/hbar = {}", rows.len(), p.inv_hbar()));
    }

    let mut curve = DecayCurve::default();
    for (p, rows) in &usable {
        let row = rows[n_i as usize];
        curve.points.push(DecayPoint {
            inv_hbar_requested: p.inv_hbar(),
            inv_hbar_snapped: p.inv_hbar(),
            m: p.m,
            n: p.n,
            gamma: row[0],
            w: row[1],
            method: Method::Truncated,
            nu_or_rho: ctx.setup.opts.nu_sequence.last().copied().unwrap_or(0) as f64,
            overlap: row[3],
        });
    }
    curve.sort();
    ctx.write_curve("curve_truncated.csv", &curve)?;

    let mut markers = Vec::new();
    match track_pair(&usable, n_i as usize, r as usize) {
        Ok(t) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["inv_hbar", "gamma_a", "w_a", "label_a", "gamma_b", "w_b", "label_b", "distance", "ambiguous"])?;
            for (i, (p, rows)) in usable.iter().enumerate() {
                let (a, b) = (t.branches[0][i], t.branches[1][i]);
                let (ra, rb) = (rows[a.candidate], rows[b.candidate]);
                w.serialize((p.inv_hbar(), ra[0], ra[1], ra[2], rb[0], rb[1], rb[2], t.distance[i], a.ambiguous || b.ambiguous))?;
            }
            let text = csv_text(w)?;
            ctx.write("crossing.csv", &text)?;
            for m in &t.markers {
                ctx.note(format!("closest approach near 1/hbar = {:.4}", m.inv_hbar));
            }
            markers = t.markers;
        }
        Err(e) => ctx.fail(format!("crossing: {e}")),
    }
    Ok((curve, markers))
}
