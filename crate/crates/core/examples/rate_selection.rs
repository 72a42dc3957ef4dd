//! Choosing K code rates for a set of channel NGMIs.
//!
//!     cargo run --release --example rate_selection

use isrs_link::modem::{gmi_bound, select_code_rates};

fn main() -> isrs_link::Result<()> {
    let ngmi: Vec<f64> = (0..40).map(|i| 0.55 + 0.4 * ((i as f64) * 0.37).sin().abs()).collect();
    let bits = vec![6u32; ngmi.len()];
    let bound = gmi_bound(&ngmi, &bits, 50e9);
    println!("GMI bound {:.3} Tb/s", bound / 1e12);
    for k in 1..=8 {
        let a = select_code_rates(&ngmi, &bits, 50e9, k)?;
        let rates: Vec<String> = a.rate_set.iter().map(|r| format!("{r:.3}")).collect();
        println!(
            "K = {k}: {:.3} Tb/s ({:.2}% below), rates [{}]",
            a.total_throughput() / 1e12,
            100.0 * (1.0 - a.total_throughput() / bound),
            rates.join(", ")
        );
    }
    Ok(())
}
