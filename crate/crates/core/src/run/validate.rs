//! Self-checks of the numerical core, run by the `validate` subcommand.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{prepare_out, write_file};
use crate::config::SimulationConfig;
use crate::error::Result;
use crate::fiber::{FiberSpec, PowerVector};
use crate::modem::{gmi, select_code_rates, Constellation, GmiMethod};
use crate::nli::{eta_closed_form_with, eta_oracle, OracleQuadrature};
use crate::plan::{build_channel_plan, Band, BandAllocation, BandEdges, Channel, ChannelPlan};
use crate::raman::{first_order_profile, fit_effective_cr, solve_raman_ode_with_step};
use crate::units::{db_to_linear, linear_to_db};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation.
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidateReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, value: f64, limit: f64, detail: String) -> Check {
    Check {
        name: name.into(),
        passed: value <= limit,
        value,
        limit,
        detail,
    }
}

/// Total power along a lossless span with 20 channels over 10 THz.
pub fn raman_conservation(fiber: &FiberSpec, step: f64, seed: u64) -> Result<Check> {
    let mut fiber = fiber.clone();
    fiber.attenuation = 0.0;
    fiber.attenuation_table = None;
    let center = 193.4e12;
    let channels: Vec<Channel> = (0..20)
        .map(|i| {
            let off = (i as f64 - 9.5) * 0.5e12;
            Channel {
                index: i,
                abs_frequency: center + off,
                offset_frequency: off,
                bandwidth: 50e9,
                band: Band::C,
                modulation_id: "x".into(),
            }
        })
        .collect();
    let plan = ChannelPlan::from_channels(channels, center)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dbm: Vec<f64> = (0..20).map(|_| rng.random_range(-5.0..5.0)).collect();
    let launch = PowerVector::from_dbm(&dbm)?;
    let n_z = (fiber.span_length / step).round() as usize + 1;
    let prof = solve_raman_ode_with_step(&plan, &launch, &fiber, n_z.max(2), step)?;
    let p0 = prof.total_at(0);
    let worst = (0..prof.z.len())
        .map(|k| ((prof.total_at(k) - p0) / p0).abs())
        .fold(0.0, f64::max);
    Ok(check(
        "raman_conservation",
        worst,
        1e-6,
        format!("20 channels over 10 THz, alpha = 0, {} steps", prof.z.len() - 1),
    ))
}

/// First-order profile against the ODE for a 5-THz C-band load at 0 dBm.
pub fn first_order_validity(fiber: &FiberSpec, step: f64) -> Result<Check> {
    let alloc = [BandAllocation { band: Band::C, count: 100, modulation_id: "x".into() }];
    let plan = build_channel_plan(&BandEdges::default(), &alloc, &[], 50e9, 1550e-9)?;
    let launch = PowerVector::uniform_dbm(plan.len(), 0.0);
    let prof = solve_raman_ode_with_step(&plan, &launch, fiber, 2, step)?;
    let approx = first_order_profile(&plan, &launch, fiber, fiber.raman_slope, fiber.span_length)?;
    let worst = prof
        .end()
        .iter()
        .zip(&approx)
        .map(|(a, b)| linear_to_db(a / b).abs())
        .fold(0.0, f64::max);
    Ok(check("first_order_validity", worst, 0.1, "100 x 50 GBd C-band, 0 dBm, one span".into()))
}

/// Closed-form NLI against the Monte-Carlo GN integral on a small Gaussian
/// instance; `value` is the worst |dB| gap.
pub fn closed_form_vs_oracle(
    fiber: &FiberSpec,
    step: f64,
    channels: usize,
    quad: OracleQuadrature,
    tolerance_db: f64,
) -> Result<Check> {
    let alloc = [BandAllocation { band: Band::C, count: channels, modulation_id: "x".into() }];
    let plan = build_channel_plan(&BandEdges::default(), &alloc, &[], 50e9, 1550e-9)?;
    let launch = PowerVector::uniform_dbm(plan.len(), 0.0);
    // 100 m grid for the oracle's z integral
    let n_z = (fiber.span_length / 100.0).round() as usize + 1;
    let prof = solve_raman_ode_with_step(&plan, &launch, fiber, n_z, step)?;
    let fit = fit_effective_cr(&prof, &plan, &launch, fiber)?;
    let closed = eta_closed_form_with(
        &plan,
        &launch,
        fiber,
        &fit,
        &vec![0.0; plan.len()],
        &Default::default(),
    )?
    .eta_total();
    let mut worst: f64 = 0.0;
    let mut gaps = Vec::new();
    for (i, eta) in closed.iter().enumerate() {
        let o = eta_oracle(&plan, &launch, fiber, &prof, i, quad)?;
        let gap = linear_to_db(eta / o.eta);
        worst = worst.max(gap.abs());
        gaps.push(format!("{gap:+.3}"));
    }
    Ok(check(
        "closed_form_vs_oracle",
        worst,
        tolerance_db,
        format!("{channels} channels, n_mc = {}, gaps dB [{}]", quad.n_mc, gaps.join(", ")),
    ))
}

/// Exhaustive best throughput over all rate sets of at most `k` observed values.
pub fn exhaustive_rates(ngmi: &[f64], bits: &[u32], symbol_rate: f64, k: usize) -> f64 {
    let mut values: Vec<f64> = ngmi.iter().copied().filter(|&v| v > 0.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let d = values.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let set: Vec<f64> = (0..d).filter(|j| mask >> j & 1 == 1).map(|j| values[j]).collect();
        let t: f64 = ngmi
            .iter()
            .zip(bits)
            .map(|(&n, &m)| {
                let r = set.iter().copied().filter(|&r| r <= n).fold(0.0, f64::max);
                2.0 * symbol_rate * m as f64 * r
            })
            .sum();
        best = best.max(t);
    }
    best
}

/// Rate-set dynamic program against exhaustive search on seeded instances.
pub fn dp_vs_brute_force(seed: u64, instances: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(1..=12);
        let k = rng.random_range(1..=3);
        // coarse grid so that ties occur
        let ngmi: Vec<f64> = (0..n).map(|_| rng.random_range(0..=20) as f64 / 20.0).collect();
        let bits: Vec<u32> = (0..n).map(|_| if rng.random_bool(0.5) { 4 } else { 6 }).collect();
        let dp = select_code_rates(&ngmi, &bits, 50e9, k)?.total_throughput();
        let brute = exhaustive_rates(&ngmi, &bits, 50e9, k);
        worst = worst.max((dp - brute).abs() / brute.max(1.0));
    }
    Ok(check(
        "dp_vs_brute_force",
        worst,
        1e-12,
        format!("{instances} instances, N <= 12, K <= 3"),
    ))
}

/// `GMI(40 dB) = m` and `GMI(−30 dB) ≈ 0` for a constellation.
pub fn gmi_asymptotes(c: &Constellation, label: &str) -> Result<Check> {
    let m = c.bits() as f64;
    let high = gmi(c, db_to_linear(40.0), GmiMethod::default())?.gmi;
    let low = gmi(c, db_to_linear(-30.0), GmiMethod::default())?.gmi;
    let worst = ((high - m).abs() / 1e-3).max(low / 0.01);
    Ok(check(
        &format!("gmi_asymptotes_{label}"),
        worst,
        1.0,
        format!("m = {m}, GMI(40 dB) = {high:.6}, GMI(-30 dB) = {low:.6}; value is the worst error over its limit"),
    ))
}

/// Runs every check and writes `validate.json`.
pub fn run_validate(cfg: &SimulationConfig, out: &Path) -> Result<ValidateReport> {
    cfg.validate()?;
    prepare_out(cfg, out)?;
    let fiber = cfg.fiber_spec();
    let step = cfg.fiber.raman_step_m;
    let quad = OracleQuadrature {
        n_mc: cfg.oracle.n_mc,
        seed: cfg.oracle.seed,
    };
    let mut checks = vec![
        raman_conservation(&fiber, step, cfg.oracle.seed)?,
        first_order_validity(&fiber, step)?,
        closed_form_vs_oracle(&fiber, step, cfg.oracle.channels, quad, cfg.oracle.tolerance_db)?,
        dp_vs_brute_force(cfg.oracle.seed, 100)?,
    ];
    let plan = cfg.channel_plan()?;
    let (formats, _) = cfg.constellations(&plan)?;
    for (k, c) in formats.iter().enumerate() {
        checks.push(gmi_asymptotes(c, &format!("{k}_{}pt", c.len()))?);
    }
    let report = ValidateReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    write_file(&out.join("validate.json"), &(json + "\n"))?;
    Ok(report)
}
