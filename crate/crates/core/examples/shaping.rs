//! Geometric shaping of 16- and 64-point formats for their target SNR.
//!
//!     cargo run --release --example shaping [iterations] [save-dir]
//!
//! With a directory, the shaped points are written there as
//! `gs16_7db.txt` and `gs64_11db.txt`.

use std::time::Instant;

use isrs_link::modem::{excess_kurtosis, gmi, shape_constellation, Constellation, GmiMethod};
use isrs_link::units::db_to_linear;

fn main() -> isrs_link::Result<()> {
    let iters: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(400);
    let save = std::env::args().nth(2).map(std::path::PathBuf::from);
    for (bits, snr_db) in [(4u32, 7.0), (6, 11.0)] {
        let snr = db_to_linear(snr_db);
        let t = Instant::now();
        let shaped = shape_constellation(bits, snr, 1, iters)?;
        let qam = Constellation::square_qam(bits)?;
        let g_qam = gmi(&qam, snr, GmiMethod::default())?.gmi;
        let g_gs = gmi(&shaped, snr, GmiMethod::default())?.gmi;
        println!(
            "{:>2} points @ {snr_db} dB: QAM GMI {g_qam:.4} (Φ {:.3}), shaped GMI {g_gs:.4} (Φ {:.3}) in {:.1?}",
            1 << bits,
            excess_kurtosis(&qam),
            excess_kurtosis(&shaped),
            t.elapsed()
        );
        if let Some(dir) = &save {
            shaped.save(&dir.join(format!("gs{}_{}db.txt", 1 << bits, snr_db)))?;
        }
    }
    Ok(())
}
