//! Runs a figure preset through the harness into a temporary directory. The
//! ladder figure is used because it needs no large diagonalisations.

use qam_decay::harness::{run_figure, ExperimentConfig, RunMode};

fn main() -> qam_decay::Result<()> {
    let dir = std::env::temp_dir().join("qam-figure-example");
    let mut cfg = ExperimentConfig::for_figure("fig6", RunMode::from_env())?;
    cfg.output_dir = dir.join("fig6");
    cfg.cache.dir = dir.join("cache");
    let run = run_figure(&cfg)?;
    for c in &run.chains {
        if let (Some(f), Some(q)) = (c.fitted, c.reference) {
            println!("{}:{} chain  fit I={:.3} M={:.3} v={:.3e}  quoted I={} M={} v={:e}", c.r, c.s, f.i_rs, f.mass, f.coupling, q.i_rs, q.mass, q.coupling);
        }
    }
    println!("{} files in {}, {} failures, cache {:?}", run.files.len(), run.output_dir.display(), run.failures.len(), run.cache);
    Ok(())
}
