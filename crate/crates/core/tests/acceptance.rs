//! Acceptance criteria 1-9. Each prints one PASS/FAIL line; the process
//! fails if any criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isrs_link::config::SimulationConfig;
use isrs_link::fiber::{FiberSpec, PowerVector};
use isrs_link::modem::{excess_kurtosis, gmi, select_code_rates, shape_constellation, Constellation, GmiMethod};
use isrs_link::nli::{eta_closed_form, eta_oracle, OracleQuadrature};
use isrs_link::plan::{build_channel_plan, Band, BandAllocation, BandEdges, Channel, ChannelPlan};
use isrs_link::raman::{first_order_profile, fit_effective_cr, solve_raman_ode};
use isrs_link::run::{run_optimize, run_rate_sweep, run_simulate, OptimizeReport, Scenario};
use isrs_link::units::{db_to_linear, linear_to_db};

// Tolerances and targets.
const CONSERVATION_REL: f64 = 1e-6;
const CONSERVATION_TIME: Duration = Duration::from_secs(1);
const FIRST_ORDER_DB: f64 = 0.1;
const ORACLE_DB: f64 = 0.5;
const ORACLE_SAMPLES: usize = 1_000_000;
const ORACLE_SEED: u64 = 2024;
const ORACLE_TIME: Duration = Duration::from_secs(120);
const PHI_QPSK: f64 = -1.0;
const PHI_16QAM: f64 = -0.68;
const PHI_16_BAND: (f64, f64) = (-0.60, -0.40);
const PHI_64_BAND: (f64, f64) = (-0.45, -0.20);
const GMI_HIGH_TOL: f64 = 1e-3;
const GMI_LOW_MAX: f64 = 0.01;
const MC_SAMPLES: usize = 1_000_000;
const MC_SIGMAS: f64 = 3.0;
const DP_INSTANCES: usize = 100;
const HEADLINE_REL: f64 = 0.10;
const TARGET_CL_TBPS: f64 = 74.59;
const TARGET_SCL_TBPS: f64 = 119.5;
const TARGET_SCL_K6_TBPS: f64 = 119.2;
const TARGET_PARTIAL_TBPS: f64 = 112.3;
const GAIN_RATIO: (f64, f64) = (1.45, 1.75);
const PARTIAL_RATIO: (f64, f64) = (0.90, 0.98);
const EVAL_TIME: Duration = Duration::from_secs(1);
const OPTIMIZE_TIME: Duration = Duration::from_secs(30 * 60);
const K6_TO_BOUND: f64 = 0.01;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn c_band_plan(n: usize) -> ChannelPlan {
    let alloc = [BandAllocation { band: Band::C, count: n, modulation_id: "g".into() }];
    build_channel_plan(&BandEdges::default(), &alloc, &[], 50e9, 1550e-9).unwrap()
}

fn criterion_1() -> Verdict {
    let mut fiber = FiberSpec::default();
    fiber.attenuation = 0.0;
    let center = 193.4e12;
    let channels = (0..20)
        .map(|i| {
            let off = -5e12 + 10e12 * i as f64 / 19.0;
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
    let plan = ChannelPlan::from_channels(channels, center).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let watts: Vec<f64> = (0..20).map(|_| rng.random_range(0.1e-3..5e-3)).collect();
    let launch = PowerVector::new(watts).unwrap();
    let t = Instant::now();
    let prof = solve_raman_ode(&plan, &launch, &fiber, 71).unwrap();
    let elapsed = t.elapsed();
    let p0: f64 = launch.total();
    let worst = (0..prof.z.len())
        .map(|k| (prof.powers[k].iter().sum::<f64>() - p0).abs() / p0)
        .fold(0.0, f64::max);
    verdict(
        worst <= CONSERVATION_REL && elapsed < CONSERVATION_TIME,
        format!("max relative drift {worst:.2e} (limit {CONSERVATION_REL:e}), {elapsed:.2?}"),
    )
}

fn criterion_2() -> Verdict {
    let plan = c_band_plan(100);
    let fiber = FiberSpec::default();
    let launch = PowerVector::uniform_dbm(100, 0.0);
    let prof = solve_raman_ode(&plan, &launch, &fiber, 2).unwrap();
    let approx = first_order_profile(&plan, &launch, &fiber, fiber.raman_slope, fiber.span_length).unwrap();
    let worst = prof
        .end()
        .iter()
        .zip(&approx)
        .map(|(a, b)| linear_to_db(a / b).abs())
        .fold(0.0, f64::max);
    let bw = plan.total_bandwidth();
    verdict(
        worst <= FIRST_ORDER_DB,
        format!("max gap {worst:.2e} dB over {:.2} THz (limit {FIRST_ORDER_DB} dB)", bw / 1e12),
    )
}

fn criterion_3() -> Verdict {
    let plan = c_band_plan(5);
    let fiber = FiberSpec::default();
    let launch = PowerVector::uniform_dbm(5, 0.0);
    let t = Instant::now();
    let prof = solve_raman_ode(&plan, &launch, &fiber, 701).unwrap();
    let fit = fit_effective_cr(&prof, &plan, &launch, &fiber).unwrap();
    let closed = eta_closed_form(&plan, &launch, &fiber, &fit, &[0.0; 5]).unwrap().eta_total();
    let quad = OracleQuadrature { n_mc: ORACLE_SAMPLES, seed: ORACLE_SEED };
    let gaps: Vec<f64> = (0..5)
        .map(|i| {
            let o = eta_oracle(&plan, &launch, &fiber, &prof, i, quad).unwrap();
            linear_to_db(closed[i] / o.eta)
        })
        .collect();
    let elapsed = t.elapsed();
    let worst = gaps.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    verdict(
        worst <= ORACLE_DB && elapsed < ORACLE_TIME,
        format!(
            "gaps [{}] dB (limit {ORACLE_DB} dB), {elapsed:.1?}",
            gaps.iter().map(|g| format!("{g:+.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_4() -> Verdict {
    let qpsk = excess_kurtosis(&Constellation::square_qam(2).unwrap());
    let qam16 = excess_kurtosis(&Constellation::square_qam(4).unwrap());
    let gs16 = excess_kurtosis(&shape_constellation(4, db_to_linear(7.0), 1, 400).unwrap());
    let gs64 = excess_kurtosis(&shape_constellation(6, db_to_linear(11.0), 1, 400).unwrap());
    let inside = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
    let exact = (qpsk - PHI_QPSK).abs() < 1e-12 && (qam16 - PHI_16QAM).abs() < 1e-12;
    verdict(
        exact && inside(gs16, PHI_16_BAND) && inside(gs64, PHI_64_BAND),
        format!("QPSK {qpsk:.6}, 16-QAM {qam16:.6}, shaped-16 {gs16:.3} in {PHI_16_BAND:?}, shaped-64 {gs64:.3} in {PHI_64_BAND:?}"),
    )
}

fn criterion_5() -> Verdict {
    let mut formats = vec![
        ("QPSK", Constellation::square_qam(2).unwrap()),
        ("16-QAM", Constellation::square_qam(4).unwrap()),
    ];
    for (name, file) in [("shaped-16", "gs16_7db.txt"), ("shaped-64", "gs64_11db.txt")] {
        formats.push((name, Constellation::load(&examples_dir().join(file)).unwrap()));
    }
    let gh = GmiMethod::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, c) in &formats {
        let m = c.bits() as f64;
        let high = gmi(c, db_to_linear(40.0), gh).unwrap().gmi;
        let low = gmi(c, db_to_linear(-30.0), gh).unwrap().gmi;
        ok &= (high - m).abs() <= GMI_HIGH_TOL && low <= GMI_LOW_MAX;
        let mut worst_z: f64 = 0.0;
        for snr_db in [0.0, 7.0, 11.0] {
            let s = db_to_linear(snr_db);
            let a = gmi(c, s, gh).unwrap().gmi;
            let mc = gmi(c, s, GmiMethod::MonteCarlo { samples: MC_SAMPLES, seed: 5 }).unwrap();
            worst_z = worst_z.max((a - mc.gmi).abs() / mc.std_error.unwrap());
        }
        ok &= worst_z <= MC_SIGMAS;
        notes.push(format!("{name}: 40 dB {high:.5}, -30 dB {low:.5}, GH-MC {worst_z:.2} sigma"));
    }
    verdict(ok, notes.join("; "))
}

fn exhaustive(ngmi: &[f64], bits: &[u32], k: usize) -> f64 {
    let values: Vec<f64> = ngmi
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|v| v.to_bits())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(f64::from_bits)
        .collect();
    let mut best = 0.0f64;
    let mut stack: Vec<(usize, Vec<f64>)> = vec![(0, Vec::new())];
    while let Some((start, set)) = stack.pop() {
        let t: f64 = ngmi
            .iter()
            .zip(bits)
            .map(|(&n, &m)| 2.0 * 50e9 * m as f64 * set.iter().copied().filter(|&r| r <= n).fold(0.0, f64::max))
            .sum();
        best = best.max(t);
        if set.len() < k {
            for j in start..values.len() {
                let mut next = set.clone();
                next.push(values[j]);
                stack.push((j + 1, next));
            }
        }
    }
    best
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for _ in 0..DP_INSTANCES {
        let n = rng.random_range(2..=12);
        let k = rng.random_range(1..=3);
        let ngmi: Vec<f64> = (0..n).map(|_| (rng.random_range(0.0..1.0f64) * 40.0).round() / 40.0).collect();
        let bits: Vec<u32> = (0..n).map(|_| [4, 6][rng.random_range(0..2)]).collect();
        let dp = select_code_rates(&ngmi, &bits, 50e9, k).unwrap().total_throughput();
        let brute = exhaustive(&ngmi, &bits, k);
        if (dp - brute).abs() > 1e-9 * brute.max(1.0) {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{mismatches} of {DP_INSTANCES} instances differ from exhaustive search"))
}

struct Headline {
    cl: OptimizeReport,
    scl: OptimizeReport,
    partial: OptimizeReport,
    scl_config: SimulationConfig,
    times: [Duration; 3],
    eval_time: Duration,
}

fn optimize_file(name: &str, out: &Path) -> (OptimizeReport, SimulationConfig, Duration) {
    let cfg = SimulationConfig::load(&examples_dir().join(name)).unwrap();
    let t = Instant::now();
    let report = run_optimize(&cfg, out, false).unwrap();
    (report, cfg, t.elapsed())
}

fn headline(dir: &Path) -> Headline {
    let (cl, _, t_cl) = optimize_file("cl-ideal.cfg", &dir.join("cl"));
    let (scl, scl_config, t_scl) = optimize_file("scl-ideal.cfg", &dir.join("scl"));
    let (partial, partial_config, t_partial) = optimize_file("scl-partial.cfg", &dir.join("partial"));
    // slower of the two scenarios, one evaluation at flat launch
    let mut eval_time = Duration::ZERO;
    for cfg in [&scl_config, &partial_config] {
        let sc = Scenario::new(cfg).unwrap();
        let launch = PowerVector::uniform_dbm(sc.plan().len(), -1.0);
        let t = Instant::now();
        sc.objective.model().snr(&launch).unwrap();
        eval_time = eval_time.max(t.elapsed());
    }
    Headline {
        cl,
        scl,
        partial,
        scl_config,
        times: [t_cl, t_scl, t_partial],
        eval_time,
    }
}

fn within(value: f64, target: f64) -> bool {
    (value - target).abs() <= HEADLINE_REL * target
}

fn criterion_7(h: &Headline) -> Verdict {
    let tb = |r: &OptimizeReport| r.simulation.evaluation.bound / 1e12;
    let k6 = |r: &OptimizeReport| r.simulation.evaluation.total() / 1e12;
    let (cl, scl, scl6, partial) = (tb(&h.cl), tb(&h.scl), k6(&h.scl), tb(&h.partial));
    let gain = scl / cl;
    let ratio = partial / scl;
    let checks = [
        (within(cl, TARGET_CL_TBPS), format!("C+L {cl:.2} Tb/s vs {TARGET_CL_TBPS}")),
        (within(scl, TARGET_SCL_TBPS), format!("S+C+L {scl:.2} vs {TARGET_SCL_TBPS}")),
        (within(scl6, TARGET_SCL_K6_TBPS), format!("K=6 {scl6:.2} vs {TARGET_SCL_K6_TBPS}")),
        (within(partial, TARGET_PARTIAL_TBPS), format!("partial {partial:.2} vs {TARGET_PARTIAL_TBPS}")),
        ((GAIN_RATIO.0..=GAIN_RATIO.1).contains(&gain), format!("S+C+L/C+L {gain:.3} in {GAIN_RATIO:?}")),
        ((PARTIAL_RATIO.0..=PARTIAL_RATIO.1).contains(&ratio), format!("partial/ideal {ratio:.3} in {PARTIAL_RATIO:?}")),
        (h.eval_time < EVAL_TIME, format!("evaluation {:.0?}", h.eval_time)),
        (
            h.times.iter().all(|t| *t < OPTIMIZE_TIME),
            format!("optimizations {:.0?}/{:.0?}/{:.0?}", h.times[0], h.times[1], h.times[2]),
        ),
    ];
    let passed = checks.iter().all(|c| c.0);
    let detail = checks
        .iter()
        .map(|(ok, s)| format!("{}{s}", if *ok { "" } else { "[x] " }))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(passed, detail)
}

fn criterion_8(h: &Headline, dir: &Path) -> Verdict {
    let launch = &h.scl.optimum.launch;
    let sweep = run_rate_sweep(&h.scl_config, Some(launch), &dir.join("sweep"), false).unwrap();
    let monotone = sweep.rows.windows(2).all(|w| w[1].1 >= w[0].1);
    let bounded = sweep.rows.iter().all(|r| r.1 <= sweep.bound * (1.0 + 1e-12));
    let k6 = sweep.rows.iter().find(|r| r.0 == 6).map_or(0.0, |r| r.1);
    let shortfall = 1.0 - k6 / sweep.bound;
    // saturation: the last step gains less than the first
    let first = sweep.rows[1].1 - sweep.rows[0].1;
    let last = sweep.rows[sweep.rows.len() - 1].1 - sweep.rows[sweep.rows.len() - 2].1;
    verdict(
        monotone && bounded && last <= first && shortfall <= K6_TO_BOUND,
        format!(
            "K=1..8 [{}] Tb/s, bound {:.2}, K=6 short by {:.2}% (limit {:.0}%)",
            sweep.rows.iter().map(|r| format!("{:.2}", r.1 / 1e12)).collect::<Vec<_>>().join(", "),
            sweep.bound / 1e12,
            100.0 * shortfall,
            100.0 * K6_TO_BOUND
        ),
    )
}

fn read_csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_9(dir: &Path) -> Verdict {
    let cfg = SimulationConfig::load(&examples_dir().join("toy-10ch.cfg")).unwrap();
    let (a, b, c) = (dir.join("det_a"), dir.join("det_b"), dir.join("det_c"));
    run_optimize(&cfg, &a, false).unwrap();
    // second run from the resolved echo of the first
    let echo = SimulationConfig::load(&a.join("resolved_config.toml")).unwrap();
    run_optimize(&echo, &b, false).unwrap();
    let full = SimulationConfig::load(&examples_dir().join("scl-ideal.cfg")).unwrap();
    run_simulate(&full, None, &c, false).unwrap();
    run_simulate(&full, None, &dir.join("det_d"), false).unwrap();
    let (fa, fb) = (read_csvs(&a), read_csvs(&b));
    let (fc, fd) = (read_csvs(&c), read_csvs(&dir.join("det_d")));
    let names: Vec<&str> = fa.iter().chain(&fc).map(|f| f.0.as_str()).collect();
    verdict(
        !fa.is_empty() && fa == fb && fc == fd,
        format!("{} files compared ({})", fa.len() + fc.len(), names.join(", ")),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut failed = 0;
    let mut emit = |n: usize, name: &str, v: Verdict| {
        if !v.passed {
            failed += 1;
        }
        println!("criterion {n} {}: {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    };
    emit(1, "Raman power conservation", criterion_1());
    emit(2, "first-order profile validity", criterion_2());
    emit(3, "closed-form NLI vs GN-integral oracle", criterion_3());
    emit(4, "excess kurtosis", criterion_4());
    emit(5, "GMI asymptotes and quadrature cross-check", criterion_5());
    emit(6, "rate-set DP exactness", criterion_6());
    let h = headline(dir.path());
    emit(7, "headline throughput", criterion_7(&h));
    emit(8, "rate-sweep shape", criterion_8(&h, dir.path()));
    emit(9, "determinism", criterion_9(dir.path()));
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
