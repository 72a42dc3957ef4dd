//! Optimizes the three shipped full-scale scenarios and prints the
//! throughput summary. Takes tens of minutes on one core.
//!
//!     cargo run --release --example reproduce [out-dir]

use std::path::{Path, PathBuf};
use std::time::Instant;

use isrs_link::config::SimulationConfig;
use isrs_link::run::run_optimize;

fn main() -> isrs_link::Result<()> {
    let here = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or(std::env::temp_dir().join("isrs-reproduce"));
    for name in ["cl-ideal", "scl-ideal", "scl-partial"] {
        let cfg = SimulationConfig::load(&here.join(format!("{name}.cfg")))?;
        let t = Instant::now();
        let r = run_optimize(&cfg, &out.join(name), false)?;
        let ev = &r.simulation.evaluation;
        println!(
            "{name}: bound {:.2} Tb/s, K = {} {:.2} Tb/s, SNR {:.2}..{:.2} dB ({:.0?})",
            ev.bound / 1e12,
            r.simulation.k,
            ev.total() / 1e12,
            ev.snr.snr_db.iter().cloned().fold(f64::INFINITY, f64::min),
            ev.snr.snr_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            t.elapsed()
        );
    }
    Ok(())
}
