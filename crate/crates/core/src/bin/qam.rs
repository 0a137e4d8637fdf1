//! Command-line front end. Exit status: 0 on success, 2 when some points
//! failed but output was written, 1 on a fatal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qam_decay::classical::{
    find_chain_seeds, find_fixed_point, fit_resonance_params, fixed_points, island_area, measure_chain, phase_portrait,
    MapParams, MapSign, PhaseState, ResonanceChain, WSPendulum, DEFAULT_ESCAPE_HORIZON,
};
use qam_decay::curve::{DecayCurve, Method};
use qam_decay::harness::{
    compare_methods, labelled_island_states, run_figure, ExperimentConfig, GridSpec, RunMode,
};
use qam_decay::quantum::{build_truncated, coherent_state, fit_exponential_tail, propagate, MomentumGrid, PropagateOptions};
use qam_decay::spectral::{eigenvalues_only, scan_rho, sweep_decay, Selection, SweepOptions, SweepSetup};
use qam_decay::tunneling::{
    build_ladder, continuum_rate, degeneracy_points, ladder_eigensolve, rat_rate, theory_curve, unperturbed_diagonal,
    wkb_energy, wkb_rate, EnergyChoice, N0Choice, TheoryInputs,
};
use qam_decay::{Error, Result};

#[derive(Parser)]
#[command(name = "qam", version, about = "Decay of quantum accelerator modes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct MapArgs {
    #[arg(long)]
    kick: f64,
    #[arg(long)]
    drift: f64,
    /// `plus` or `minus`
    #[arg(long, default_value = "minus", value_parser = parse_sign)]
    sign: MapSign,
}

impl MapArgs {
    fn params(&self) -> Result<MapParams> {
        MapParams::new(self.kick, self.drift, self.sign)
    }
}

#[derive(Args, Clone, Copy)]
struct ChainArgs {
    #[arg(long)]
    r: u32,
    #[arg(long, default_value_t = 1)]
    s: u32,
    #[arg(long)]
    i_rs: f64,
    #[arg(long)]
    mass: f64,
    #[arg(long)]
    coupling: f64,
}

impl ChainArgs {
    fn chain(&self) -> ResonanceChain {
        ResonanceChain::from_params(self.r, self.s, self.i_rs, self.mass, self.coupling)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Orbit points as CSV (theta, J, seed).
    Portrait {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value_t = 500)]
        steps: usize,
    },
    /// Period-1 fixed points and their stability.
    FixedPoint {
        #[command(flatten)]
        map: MapArgs,
    },
    /// Area of the island around the stable fixed point.
    IslandArea {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
    },
    /// Pendulum parameters of an r:s chain, from measured areas or from the map.
    ResonanceFit {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, requires_all = ["s_minus", "trace"])]
        s_plus: Option<f64>,
        #[arg(long)]
        s_minus: Option<f64>,
        #[arg(long)]
        trace: Option<f64>,
        #[arg(long)]
        kick: Option<f64>,
        #[arg(long)]
        drift: Option<f64>,
        #[arg(long, default_value = "minus", value_parser = parse_sign)]
        sign: MapSign,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
    },
    /// Labelled island states of the truncated operator, or complex-scaled resonances.
    Spectrum {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        inv_hbar: f64,
        #[arg(long, value_delimiter = ',', default_value = "256,512")]
        nu: Vec<usize>,
        #[arg(long, default_value_t = 0.2)]
        min_overlap: f64,
        /// Every eigenvalue of the smallest basis instead.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        complex_scaling: bool,
    },
    /// Decay curves of several methods over a grid of 1/hbar.
    DecaySweep {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_delimiter = ',', default_value = "truncated")]
        methods: Vec<Method>,
        /// `start:stop:points` or a comma-separated list
        #[arg(long, default_value = "4:20:60", value_parser = parse_grid)]
        grid: GridSpec,
        #[arg(long, default_value = "minimal-island", value_parser = parse_selection)]
        selection: Selection,
        #[arg(long, value_delimiter = ',')]
        chain: Option<Vec<f64>>,
        #[arg(long, default_value = "nearest", value_parser = parse_n0)]
        n0: N0Choice,
        #[arg(long, default_value = "out/sweep")]
        out: PathBuf,
    },
    /// Window probability of a coherent state started at the island centre.
    Propagate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        inv_hbar: f64,
        #[arg(long, default_value_t = 14)]
        log2: u32,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
    },
    /// Barrier-penetration rate of the Wannier-Stark pendulum.
    Wkb {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        inv_hbar: f64,
    },
    /// Ladder rates of a resonance chain.
    Rat {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        area: f64,
        #[arg(long)]
        inv_hbar: f64,
        #[arg(long, default_value = "nearest", value_parser = parse_n0)]
        n0: N0Choice,
    },
    /// Values of 1/hbar where the unperturbed ladder is degenerate.
    Degeneracies {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        area: f64,
        #[arg(long, default_value_t = 0)]
        n_i: u32,
        #[arg(long, default_value_t = 5)]
        l_max: u32,
    },
    /// Runs a figure preset, optionally adjusted by a config file or overrides.
    Figure {
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// JSON object merged into the configuration.
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_cache: bool,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<RunMode>,
    },
    /// Ratio table of decay curves read from CSV files.
    Compare {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        factor: f64,
    },
}

fn parse_sign(s: &str) -> std::result::Result<MapSign, String> {
    match s {
        "plus" | "+" => Ok(MapSign::Plus),
        "minus" | "-" => Ok(MapSign::Minus),
        _ => Err(format!("expected plus or minus, got `{s}`")),
    }
}

fn parse_selection(s: &str) -> std::result::Result<Selection, String> {
    match s {
        "minimal-island" => Ok(Selection::MinimalIsland),
        "center-probe" => Ok(Selection::CenterProbe),
        _ => Err(format!("expected minimal-island or center-probe, got `{s}`")),
    }
}

fn parse_mode(s: &str) -> std::result::Result<RunMode, String> {
    match s {
        "ci" => Ok(RunMode::Ci),
        "desk" => Ok(RunMode::Desk),
        _ => Err(format!("expected ci or desk, got `{s}`")),
    }
}

fn parse_n0(s: &str) -> std::result::Result<N0Choice, String> {
    let num = |t: &str| t.parse::<i64>().map_err(|e| e.to_string());
    match s.split_once(':') {
        None if s == "nearest" => Ok(N0Choice::Nearest),
        Some(("innermost", n)) => Ok(N0Choice::Innermost(num(n)?.try_into().map_err(|_| "negative state")?)),
        Some(("fixed", n)) => Ok(N0Choice::Fixed(num(n)?)),
        _ => Err(format!("expected nearest, innermost:N or fixed:N, got `{s}`")),
    }
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let nums = |sep: char| -> std::result::Result<Vec<f64>, String> {
        s.split(sep).map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string())).collect()
    };
    if s.contains(':') {
        match nums(':')?.as_slice() {
            &[start, stop, points] if points >= 1.0 && points.fract() == 0.0 => {
                Ok(GridSpec::Range { start, stop, points: points as usize })
            }
            _ => Err(format!("expected start:stop:points, got `{s}`")),
        }
    } else {
        Ok(GridSpec::List { values: nums(',')? })
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialise"));
}

fn print_csv<R: serde::Serialize>(head: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(head)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Exit status for output with `failures` bad points.
fn status(failures: usize) -> u8 {
    if failures == 0 { 0 } else { 2 }
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Portrait { map, seeds, steps } => {
            let params = map.params()?;
            let (c, _, _) = find_fixed_point(&params)?;
            let starts: Vec<PhaseState> =
                (1..=seeds).map(|i| PhaseState::new(c.theta + 1.5 * i as f64 / seeds as f64, c.action_j)).collect();
            print_csv(&["theta", "j", "seed"], phase_portrait(&params, &starts, steps)?)?;
        }
        Cmd::FixedPoint { map } => {
            let pts: Vec<_> = fixed_points(&map.params()?)?
                .into_iter()
                .map(|(p, t)| json!({"theta": p.theta, "j": p.action_j, "trace": t, "stable": t.abs() < 2.0}))
                .collect();
            print_json(&json!(pts));
        }
        Cmd::IslandArea { map, step } => {
            let params = map.params()?;
            let (c, _, _) = find_fixed_point(&params)?;
            let a = island_area(&params, c, step, DEFAULT_ESCAPE_HORIZON)?;
            print_json(&json!({"area": a, "grid_step": step}));
        }
        Cmd::ResonanceFit { r, s, s_plus, s_minus, trace, kick, drift, sign, step, steps } => {
            let (sp, sm, tr) = match (s_plus, s_minus, trace, kick, drift) {
                (Some(a), Some(b), Some(t), _, _) => (a, b, t),
                (None, _, _, Some(k), Some(d)) => {
                    let params = MapParams::new(k, d, sign)?;
                    let (c, _, _) = find_fixed_point(&params)?;
                    let (inner, outer) = find_chain_seeds(&params, c, r, s, 0.05, steps)?;
                    let m = measure_chain(&params, c, r, s, inner, outer, step, steps)?;
                    (m.s_plus, m.s_minus, m.monodromy_trace)
                }
                _ => return Err(Error::InvalidArgument("give --s-plus/--s-minus/--trace or --kick/--drift".into())),
            };
            print_json(&serde_json::to_value(fit_resonance_params(sp, sm, tr, r, s)?)?);
        }
        Cmd::Spectrum { map, inv_hbar, nu, min_overlap, raw, complex_scaling } => {
            let params = map.params()?;
            let opts = SweepOptions { nu_sequence: nu.clone(), ..Default::default() };
            if raw || complex_scaling {
                let setup_p = SweepSetup::new(params, opts.clone())?.planck(inv_hbar)?;
                if complex_scaling {
                    let scan = scan_rho(&params, &setup_p, &opts.rho_grid, opts.rho_nu, opts.rho_tol)?;
                    let rows = scan.resonances.iter().map(|r| (r.z.re, r.z.im, r.gamma, r.w, r.rhos.len()));
                    print_csv(&["re", "im", "gamma", "w", "rho_count"], rows)?;
                } else {
                    let s = eigenvalues_only(&build_truncated(&params, &setup_p, nu[0])?)?;
                    let rows = (0..s.len()).map(|k| (s.eigenvalues[k].re, s.eigenvalues[k].im, s.gamma[k], s.quasienergy[k]));
                    print_csv(&["re", "im", "gamma", "w"], rows)?;
                }
            } else {
                let setup = SweepSetup::new(params, opts)?;
                let p = setup.planck(inv_hbar)?;
                let rows = labelled_island_states(&setup, &p, min_overlap)?;
                print_csv(&["gamma", "w", "label", "overlap"], rows.iter().map(|r| (r[0], r[1], r[2], r[3])))?;
            }
        }
        Cmd::DecaySweep { map, methods, grid, selection, chain, n0, out } => {
            let params = map.params()?;
            let setup = SweepSetup::new(params, SweepOptions::default())?;
            let chain = match chain.as_deref() {
                None => None,
                Some(&[r, s, i, m, v]) => Some(ResonanceChain::from_params(r as u32, s as u32, i, m, v)),
                Some(_) => return Err(Error::InvalidArgument("--chain takes r,s,I,M,v".into())),
            };
            let mut inputs = TheoryInputs::new(params, chain, setup.island_area);
            inputs.n0 = n0;
            std::fs::create_dir_all(&out)?;
            let xs = grid.values();
            let mut failures = 0;
            for method in methods {
                let c = if method.is_numerical() {
                    sweep_decay(&setup, &xs, method, selection)
                } else {
                    theory_curve(&inputs, &xs, method)
                };
                for f in &c.failures {
                    eprintln!("{method} at 1/hbar = {}: {}", f.inv_hbar_requested, f.message);
                }
                failures += c.failures.len();
                let path = out.join(format!("curve_{method}.csv"));
                c.write_csv(&path)?;
                eprintln!("wrote {} ({} points)", path.display(), c.points.len());
            }
            return Ok(status(failures));
        }
        Cmd::Propagate { map, inv_hbar, log2, steps } => {
            let params = map.params()?;
            let setup = SweepSetup::new(params, SweepOptions::default())?;
            let p = setup.planck(inv_hbar)?;
            let size = 1usize << log2;
            let fraction = if map.sign == MapSign::Minus { 0.875 } else { 0.125 };
            let grid = MomentumGrid::around(setup.center.action_j, p.hbar, size, fraction);
            let psi = coherent_state(setup.center, &p, grid, 1.0)?;
            let run = propagate(&psi, &params, &p, steps, &PropagateOptions::new(setup.window.j_range, size))?;
            let series: Vec<(usize, f64)> = run.probes.iter().map(|pr| (pr.t, pr.window_prob)).collect();
            let (rate, rms) = fit_exponential_tail(&series, steps / 2)?;
            eprintln!("tail rate {rate:.6e}, gamma per kick {:.6e}, rms {rms:.2e}", rate / 4.0);
            print_csv(&["t", "norm", "window_probability"], run.probes.iter().map(|pr| (pr.t, pr.norm, pr.window_prob)))?;
        }
        Cmd::Wkb { map, inv_hbar } => {
            let pend = WSPendulum::from_map(&map.params()?);
            if !(inv_hbar > 0.0 && inv_hbar.is_finite()) {
                return Err(Error::InvalidArgument(format!("1/hbar must be positive, got {inv_hbar}")));
            }
            let hbar = 1.0 / inv_hbar;
            let mut out = serde_json::Map::new();
            let mut failed = false;
            for (name, choice) in [("bottom", EnergyChoice::WellBottom), ("ground", EnergyChoice::HarmonicGround)] {
                let v = match (wkb_energy(&pend, hbar, choice), wkb_rate(&pend, hbar, choice)) {
                    (Ok(e), Ok(g)) => json!({"energy": e, "gamma": g}),
                    (Err(e), _) | (_, Err(e)) => {
                        failed = true;
                        json!({"error": e.to_string()})
                    }
                };
                out.insert(name.into(), v);
            }
            print_json(&serde_json::Value::Object(out));
            if failed {
                return Ok(2);
            }
        }
        Cmd::Rat { chain, area, inv_hbar, n0 } => {
            let c = chain.chain();
            let spec = build_ladder(&c, 1.0 / inv_hbar, area, n0)?;
            let d = unperturbed_diagonal(&spec);
            let unpert = rat_rate(&ladder_eigensolve(&d, 0.0)?, &spec, 0);
            let pert = rat_rate(&ladder_eigensolve(&d, c.coupling)?, &spec, 0);
            let (xi, cont) = continuum_rate(&spec)?;
            let show = |r: Result<f64>| r.map_or_else(|e| json!({"error": e.to_string()}), |g| json!(g));
            print_json(&json!({
                "length": spec.length,
                "n0": spec.n0,
                "unperturbed": show(unpert),
                "perturbed": show(pert),
                "continuum": cont,
                "xi0_continuum": xi,
            }));
        }
        Cmd::Degeneracies { chain, area, n_i, l_max } => {
            let pts = degeneracy_points(&chain.chain(), n_i, l_max, area);
            print_csv(&["l", "inv_hbar", "valid"], pts.iter().map(|d| (d.l, d.inv_hbar, d.valid)))?;
        }
        Cmd::Figure { name, config, set, out, no_cache, mode } => {
            let mode = mode.unwrap_or_else(RunMode::from_env);
            let mut cfg = match &config {
                Some(path) => {
                    let base = ExperimentConfig::for_figure(&name, mode)?;
                    let over: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    base.with_overrides(&over)?
                }
                None => ExperimentConfig::for_figure(&name, mode)?,
            };
            if let Some(s) = &set {
                cfg = cfg.with_overrides(&serde_json::from_str(s)?)?;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if no_cache {
                cfg.cache.enabled = false;
            }
            let run = run_figure(&cfg)?;
            for f in &run.failures {
                eprintln!("failed: {f}");
            }
            for m in &run.markers {
                eprintln!("closest approach near 1/hbar = {:.4}", m.inv_hbar);
            }
            if let Some(c) = &run.comparison {
                for p in &c.pairs {
                    eprintln!("{} / {}: {} points, mean ratio {:.3}, {} flagged", p.a, p.b, p.points, p.mean_ratio, p.flagged);
                }
            }
            eprintln!("wrote {} files to {}", run.files.len(), run.output_dir.display());
            return Ok(status(run.failures.len()));
        }
        Cmd::Compare { files, factor } => {
            let curves = files.iter().map(|f| DecayCurve::read_csv(f)).collect::<Result<Vec<_>>>()?;
            let c = compare_methods(&curves, factor)?;
            print!("{}", c.to_csv_string()?);
            for p in &c.pairs {
                eprintln!("{} / {}: mean ratio {:.4}, max spread {:.3}, {} flagged", p.a, p.b, p.mean_ratio, p.max_spread, p.flagged);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exit_code(args: &[&str]) -> u8 {
        let cli = Cli::try_parse_from(std::iter::once("qam").chain(args.iter().copied())).unwrap();
        run(cli.cmd).unwrap_or(1)
    }

    #[test]
    fn quick_subcommands_succeed() {
        assert_eq!(exit_code(&["fixed-point", "--kick", "2.5", "--drift", "1", "--sign", "minus"]), 0);
        assert_eq!(exit_code(&["wkb", "--kick", "0.8", "--drift", "0.7", "--inv-hbar", "9"]), 0);
        let chain = ["--r", "4", "--s", "1", "--i-rs", "0.43", "--mass", "3.866", "--coupling", "7.275e-4", "--area", "5.757"];
        let mut args = vec!["degeneracies", "--n-i", "1"];
        args.extend(chain);
        assert_eq!(exit_code(&args), 0);
    }

    #[test]
    fn unknown_figure_is_fatal_and_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("fig");
        assert_eq!(exit_code(&["figure", "fig12", "--out", out.to_str().unwrap()]), 1);
        assert!(!out.exists());
    }

    #[test]
    fn invalid_input_is_fatal() {
        assert_eq!(exit_code(&["wkb", "--kick=-1", "--drift", "0.7", "--inv-hbar", "9"]), 1);
        assert_eq!(exit_code(&["wkb", "--kick", "0.8", "--drift", "0.7", "--inv-hbar=-9"]), 1);
        assert!(Cli::try_parse_from(["qam", "fixed-point", "--kick", "1", "--drift", "1", "--sign", "sideways"]).is_err());
    }
}
