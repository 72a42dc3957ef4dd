//! Closed-form NLI coefficients against a Monte-Carlo evaluation of the
//! GN integral over the numerical span profile.
//!
//!     cargo run --release --example nli_oracle [channels] [samples]

use isrs_link::fiber::{FiberSpec, PowerVector};
use isrs_link::nli::{eta_closed_form, eta_oracle, OracleQuadrature};
use isrs_link::plan::{build_channel_plan, Band, BandAllocation, BandEdges};
use isrs_link::raman::{fit_effective_cr, solve_raman_ode};
use isrs_link::units::linear_to_db;

fn main() -> isrs_link::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let n = args.next().flatten().unwrap_or(5);
    let n_mc = args.next().flatten().unwrap_or(200_000);
    let alloc = [BandAllocation { band: Band::C, count: n, modulation_id: "gauss".into() }];
    let plan = build_channel_plan(&BandEdges::default(), &alloc, &[], 50e9, 1550e-9)?;
    let fiber = FiberSpec::default();
    let launch = PowerVector::uniform_dbm(n, 0.0);
    let prof = solve_raman_ode(&plan, &launch, &fiber, 701)?;
    let fit = fit_effective_cr(&prof, &plan, &launch, &fiber)?;
    let closed = eta_closed_form(&plan, &launch, &fiber, &fit, &vec![0.0; n])?.eta_total();

    println!("{:>4} {:>14} {:>14} {:>10} {:>8}", "ch", "closed [1/W²]", "oracle [1/W²]", "gap [dB]", "se [%]");
    for (i, eta) in closed.iter().enumerate() {
        let o = eta_oracle(&plan, &launch, &fiber, &prof, i, OracleQuadrature { n_mc, seed: 7 })?;
        println!(
            "{i:>4} {eta:>14.4e} {:>14.4e} {:>+10.3} {:>8.2}",
            o.eta,
            linear_to_db(eta / o.eta),
            100.0 * o.std_error / o.eta
        );
    }
    Ok(())
}
