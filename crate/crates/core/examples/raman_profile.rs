//! Power evolution of a fully loaded S+C+L span and its effective Raman fit.
//!
//!     cargo run --release --example raman_profile [launch-dbm]

use isrs_link::config::SimulationConfig;
use isrs_link::fiber::PowerVector;
use isrs_link::raman::{fit_effective_cr, net_gain_db, solve_raman_ode};
use isrs_link::units::raman_slope_from_si;

fn main() -> isrs_link::Result<()> {
    let dbm: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let cfg = SimulationConfig::default();
    let plan = cfg.channel_plan()?;
    let fiber = cfg.fiber_spec();
    let launch = PowerVector::uniform_dbm(plan.len(), dbm);
    let prof = solve_raman_ode(&plan, &launch, &fiber, 15)?;
    let gain = net_gain_db(&prof);
    let fit = fit_effective_cr(&prof, &plan, &launch, &fiber)?;

    println!("{} channels at {dbm} dBm, total {:.1} mW", plan.len(), launch.total() * 1e3);
    println!("{:>8} {:>12}", "z [km]", "total [mW]");
    for k in 0..prof.z.len() {
        println!("{:>8.1} {:>12.4}", prof.z[k] / 1e3, prof.total_at(k) * 1e3);
    }
    let last = plan.len() - 1;
    println!(
        "net span gain: {:.2} dB at {:.2} THz, {:.2} dB at {:.2} THz",
        gain[0],
        plan.channels()[0].abs_frequency / 1e12,
        gain[last],
        plan.channels()[last].abs_frequency / 1e12
    );
    println!(
        "fitted Cr {:.4} 1/W/km/THz (fiber {:.4}), residual {:.3} dB",
        raman_slope_from_si(fit.global_cr_hat),
        raman_slope_from_si(fiber.raman_slope),
        fit.fit_residual_db
    );
    Ok(())
}
