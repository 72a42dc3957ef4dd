//! Scenario orchestration behind the command-line subcommands: each run
//! reads a [`SimulationConfig`], writes its CSV/JSON reports into an output
//! directory and returns the same data in memory.

mod plot;
mod validate;

pub use validate::{run_validate, Check, ValidateReport};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::fiber::PowerVector;
use crate::link::{LinkModel, SnrReport};
use crate::modem::{excess_kurtosis, gmi_bound, ngmi, select_code_rates, Constellation, GmiTable, RateAssignment};
use crate::optimizer::{optimize_launch, write_trace_csv, Objective, Optimum};
use crate::plan::{Band, ChannelPlan};

/// Everything derived from a config that the runs share.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: SimulationConfig,
    pub formats: Vec<Constellation>,
    /// Objective on the reporting ODE step (`fiber.raman_step_m`).
    pub objective: Objective,
}

impl Scenario {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let plan = config.channel_plan()?;
        let link = config.link_spec()?;
        let (formats, format_of) = config.constellations(&plan)?;
        let kurtosis: Vec<f64> = format_of.iter().map(|&k| excess_kurtosis(&formats[k])).collect();
        let tables = formats.iter().map(GmiTable::with_defaults).collect::<Result<Vec<_>>>()?;
        let model = LinkModel::new(plan, link, kurtosis, config.nli_options())?
            .with_ode_step(config.fiber.raman_step_m)?;
        let objective = Objective::new(model, tables, format_of)?;
        Ok(Scenario {
            config: config.clone(),
            formats,
            objective,
        })
    }

    pub fn plan(&self) -> &ChannelPlan {
        self.objective.model().plan()
    }

    pub fn scenario_id(&self) -> String {
        self.config.equalization().id()
    }

    /// Launch powers named by the `[launch]` section.
    pub fn configured_launch(&self) -> Result<PowerVector> {
        let n = self.plan().len();
        if let Some(dbm) = self.config.launch.flat_dbm {
            return Ok(PowerVector::uniform_dbm(n, dbm));
        }
        let path = self.config.launch.file.as_ref().expect("validated");
        let dbm = read_launch_csv(path)?;
        if dbm.len() != n {
            return Err(Error::validation(
                "launch.file",
                format!("{} rows for {n} channels", dbm.len()),
            ));
        }
        PowerVector::from_dbm(&dbm)
    }

    /// SNR, GMI and the quantized rate assignment for `launch`.
    pub fn evaluate(&self, launch: &PowerVector, k: usize) -> Result<Evaluation> {
        let snr = self.objective.model().snr(launch)?;
        let gmi = self.objective.gmi(&snr);
        let bits = self.objective.bits();
        let ngmi: Vec<f64> = gmi.iter().zip(&bits).map(|(&g, &m)| ngmi(g, m).clamp(0.0, 1.0)).collect();
        let penalized = self.penalized(&ngmi);
        let symbol_rate = self.config.plan.symbol_rate_gbd * 1e9;
        let assignment = select_code_rates(&penalized, &bits, symbol_rate, k)?;
        let bound = gmi_bound(&penalized, &bits, symbol_rate);
        Ok(Evaluation {
            launch: launch.clone(),
            snr,
            gmi,
            ngmi,
            assignment,
            bound,
        })
    }

    fn penalized(&self, ngmi: &[f64]) -> Vec<f64> {
        let pen = self.config.rates.ngmi_penalty;
        ngmi.iter().map(|&n| (n - pen).max(0.0)).collect()
    }
}

/// Per-channel link quality at one launch vector.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub launch: PowerVector,
    pub snr: SnrReport,
    pub gmi: Vec<f64>,
    pub ngmi: Vec<f64>,
    pub assignment: RateAssignment,
    /// `Σ 2·R_s·m·ngmi` after the NGMI penalty, bit/s.
    pub bound: f64,
}

impl Evaluation {
    pub fn total(&self) -> f64 {
        self.assignment.total_throughput()
    }

    /// Quantized throughput of the channels in `band`, bit/s.
    pub fn band_total(&self, plan: &ChannelPlan, band: Band) -> f64 {
        plan.band_indices(band)
            .into_iter()
            .map(|i| self.assignment.channel_throughput(i))
            .fold(0.0, |a, b| a + b)
    }
}

#[derive(Clone, Debug)]
pub struct SimulationReport {
    pub scenario: String,
    pub k: usize,
    pub evaluation: Evaluation,
}

#[derive(Clone, Debug)]
pub struct OptimizeReport {
    pub optimum: Optimum,
    pub simulation: SimulationReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateSweep {
    /// `(K, throughput in bit/s)`
    pub rows: Vec<(usize, f64)>,
    pub bound: f64,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn prepare_out(cfg: &SimulationConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    write_file(&out.join("resolved_config.toml"), &cfg.to_toml())
}

/// Reads the `launch_dbm` column of a CSV file.
pub fn read_launch_csv(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == "launch_dbm")
        .ok_or_else(|| Error::validation("launch.file", "no launch_dbm column"))?;
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let v: f64 = rec
            .get(col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::validation("launch.file", format!("row {}: bad launch_dbm", row + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn channels_csv(plan: &ChannelPlan, ev: &Evaluation) -> String {
    let mut s = String::from("index,freq_thz,wavelength_nm,band,launch_dbm,snr_db,gmi_bits,ngmi,rate,throughput_gbps\n");
    let dbm = ev.launch.to_dbm();
    for (i, ch) in plan.channels().iter().enumerate() {
        writeln!(
            s,
            "{},{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            i,
            ch.abs_frequency / 1e12,
            ch.wavelength() * 1e9,
            ch.band,
            dbm[i],
            ev.snr.snr_db[i],
            ev.gmi[i],
            ev.ngmi[i],
            ev.assignment.rates[i].unwrap_or(0.0),
            ev.assignment.channel_throughput(i) / 1e9,
        )
        .unwrap();
    }
    s
}

pub fn summary_csv(plan: &ChannelPlan, report: &SimulationReport) -> String {
    let ev = &report.evaluation;
    let mut s = String::from("scenario,k,total_tbps,gmi_bound_tbps,s_tbps,c_tbps,l_tbps,min_snr_db,max_snr_db\n");
    let (lo, hi) = ev
        .snr
        .snr_db
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    write!(s, "{},{},{:.6},{:.6}", report.scenario, report.k, ev.total() / 1e12, ev.bound / 1e12).unwrap();
    for band in Band::ALL {
        write!(s, ",{:.6}", ev.band_total(plan, band) / 1e12).unwrap();
    }
    writeln!(s, ",{lo:.6},{hi:.6}").unwrap();
    s
}

fn optimum_csv(plan: &ChannelPlan, launch: &PowerVector) -> String {
    let mut s = String::from("index,freq_thz,band,launch_dbm\n");
    for (ch, dbm) in plan.channels().iter().zip(launch.to_dbm()) {
        writeln!(s, "{},{:.6},{},{:.9}", ch.index, ch.abs_frequency / 1e12, ch.band, dbm).unwrap();
    }
    s
}

fn simulate_at(sc: &Scenario, launch: &PowerVector, out: &Path, plot: bool) -> Result<SimulationReport> {
    let k = sc.config.rates.k;
    let evaluation = sc.evaluate(launch, k)?;
    let report = SimulationReport {
        scenario: sc.scenario_id(),
        k,
        evaluation,
    };
    write_file(&out.join("channels.csv"), &channels_csv(sc.plan(), &report.evaluation))?;
    write_file(&out.join("summary.csv"), &summary_csv(sc.plan(), &report))?;
    if plot {
        plot::write_channel_plots(sc.plan(), &report.evaluation, out)?;
    }
    Ok(report)
}

/// Evaluates the configured launch (or `powers`) and writes `channels.csv`
/// and `summary.csv`.
pub fn run_simulate(cfg: &SimulationConfig, powers: Option<&PowerVector>, out: &Path, plot: bool) -> Result<SimulationReport> {
    let sc = Scenario::new(cfg)?;
    prepare_out(cfg, out)?;
    let launch = match powers {
        Some(p) => p.clone(),
        None => sc.configured_launch()?,
    };
    simulate_at(&sc, &launch, out, plot)
}

/// Swarm search and refinement on the coarse ODE step, then a full report at
/// the optimum. Also writes `optimum_powers.csv`, `pso_trace.csv` and
/// `refine_trace.csv`.
pub fn run_optimize(cfg: &SimulationConfig, out: &Path, plot: bool) -> Result<OptimizeReport> {
    let sc = Scenario::new(cfg)?;
    prepare_out(cfg, out)?;
    let coarse = sc
        .objective
        .with_model(sc.objective.model().clone().with_ode_step(cfg.optimizer.raman_step_m)?)?;
    let opt = &cfg.optimizer;
    let optimum = optimize_launch(&coarse, &opt.bounds(), &opt.pso(), &opt.refine())?;

    write_file(&out.join("optimum_powers.csv"), &optimum_csv(sc.plan(), &optimum.launch))?;
    let mut trace = Vec::new();
    write_trace_csv(&optimum.pso.trace, &mut trace)?;
    write_file(&out.join("pso_trace.csv"), &String::from_utf8(trace).expect("ascii"))?;
    let mut refine = String::from("iter,objective_tbps\n");
    for (i, v) in optimum.refine.trace.iter().enumerate() {
        writeln!(refine, "{i},{:.6}", v / 1e12).unwrap();
    }
    write_file(&out.join("refine_trace.csv"), &refine)?;

    let simulation = simulate_at(&sc, &optimum.launch, out, plot)?;
    Ok(OptimizeReport { optimum, simulation })
}

/// Quantized throughput for every `K` in `rates.k_sweep` at the configured
/// launch, plus the GMI bound; writes `rate_sweep.csv`.
pub fn run_rate_sweep(cfg: &SimulationConfig, powers: Option<&PowerVector>, out: &Path, plot: bool) -> Result<RateSweep> {
    let sc = Scenario::new(cfg)?;
    prepare_out(cfg, out)?;
    let launch = match powers {
        Some(p) => p.clone(),
        None => sc.configured_launch()?,
    };
    let base = sc.evaluate(&launch, 1)?;
    let bits = sc.objective.bits();
    let penalized = sc.penalized(&base.ngmi);
    let symbol_rate = cfg.plan.symbol_rate_gbd * 1e9;
    let mut ks = cfg.rates.k_sweep.clone();
    ks.sort_unstable();
    ks.dedup();
    let rows = ks
        .iter()
        .map(|&k| select_code_rates(&penalized, &bits, symbol_rate, k).map(|a| (k, a.total_throughput())))
        .collect::<Result<Vec<_>>>()?;
    let sweep = RateSweep { rows, bound: base.bound };

    let mut s = String::from("k,throughput_tbps\n");
    for (k, t) in &sweep.rows {
        writeln!(s, "{k},{:.6}", t / 1e12).unwrap();
    }
    writeln!(s, "bound,{:.6}", sweep.bound / 1e12).unwrap();
    write_file(&out.join("rate_sweep.csv"), &s)?;
    if plot {
        plot::write_rate_sweep_plot(&sweep, out)?;
    }
    Ok(sweep)
}
