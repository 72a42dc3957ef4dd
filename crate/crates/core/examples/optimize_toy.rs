//! Launch-power optimization of the ten-channel toy link.
//!
//!     cargo run --release --example optimize_toy [out-dir]

use std::path::{Path, PathBuf};

use isrs_link::config::SimulationConfig;
use isrs_link::fiber::PowerVector;
use isrs_link::run::{run_optimize, Scenario};

fn main() -> isrs_link::Result<()> {
    let here = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or(std::env::temp_dir().join("isrs-toy"));
    let cfg = SimulationConfig::load(&here.join("toy-10ch.cfg"))?;
    let flat = Scenario::new(&cfg)?.evaluate(&PowerVector::uniform_dbm(10, -1.0), cfg.rates.k)?;
    let r = run_optimize(&cfg, &out, false)?;
    let ev = &r.simulation.evaluation;
    println!("flat -1 dBm: {:.3} Tb/s", flat.total() / 1e12);
    println!("optimized:   {:.3} Tb/s (bound {:.3})", ev.total() / 1e12, ev.bound / 1e12);
    for (p, s) in ev.launch.to_dbm().iter().zip(&ev.snr.snr_db) {
        println!("  {p:+6.2} dBm  {s:6.2} dB");
    }
    println!("outputs in {}", out.display());
    Ok(())
}
