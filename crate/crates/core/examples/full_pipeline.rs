//! Plan, route, simulate and evaluate from a config file, writing every
//! artifact under the output directory.
//!
//!     cargo run --release --example full_pipeline -- configs/spl.toml [out_dir]

use std::path::PathBuf;

use tls_planner::{pipeline, RunConfig};

fn main() -> tls_planner::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "configs/spl.toml".into()));
    let mut cfg = RunConfig::load(&path)?;
    if let Some(out) = args.next() {
        cfg.output_dir = out.into();
    }

    let plan = pipeline::run_plan(&cfg)?;
    print!("{}", plan.summary());
    let route = pipeline::run_route(&cfg)?;
    print!("{}", route.summary());
    let sim = pipeline::run_simulate(&cfg)?;
    print!("{}", sim.summary());
    let eval = pipeline::run_evaluate(&cfg)?;
    print!("{}", eval.summary());
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(())
}
