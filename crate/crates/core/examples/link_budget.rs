//! Per-band SNR of the default S+C+L link under ideal and partial gain
//! equalization at a flat launch power.
//!
//!     cargo run --release --example link_budget [launch-dbm]

use isrs_link::config::{EqualizationKind, SimulationConfig};
use isrs_link::fiber::PowerVector;
use isrs_link::plan::Band;
use isrs_link::run::Scenario;

fn main() -> isrs_link::Result<()> {
    let dbm: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(-1.0);
    for kind in [EqualizationKind::Ideal, EqualizationKind::Partial] {
        let mut cfg = SimulationConfig::default();
        cfg.amplifier.equalization = kind;
        let sc = Scenario::new(&cfg)?;
        let plan = sc.plan();
        let ev = sc.evaluate(&PowerVector::uniform_dbm(plan.len(), dbm), cfg.rates.k)?;
        println!("{}", sc.scenario_id());
        for band in [Band::S, Band::C, Band::L] {
            let idx = plan.band_indices(band);
            let snr: Vec<f64> = idx.iter().map(|&i| ev.snr.snr_db[i]).collect();
            let lo = snr.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = snr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!(
                "  {}: SNR {lo:.2}..{hi:.2} dB, {:.2} Tb/s",
                band.name(),
                ev.band_total(plan, band) / 1e12
            );
        }
        println!("  total {:.2} Tb/s (GMI bound {:.2})", ev.total() / 1e12, ev.bound / 1e12);
    }
    Ok(())
}
