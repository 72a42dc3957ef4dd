//! Span-by-span power evolution, amplifier gains, ASE and SNR.
//!
//! All noise powers are referred to the launch point: noise added where a
//! channel carries `P` is scaled by `launch/P`, so `launch/(p_ase + p_nli)` is
//! the end-to-end SNR even when span inputs drift away from the launch profile.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fiber::{AseModel, Equalization, LinkSpec, PowerVector};
use crate::nli::{accumulate_nli, AccumulationMode, NliKernel, NliOptions, NliReport};
use crate::plan::ChannelPlan;
use crate::raman::{fit_effective_cr, net_gain_db, solve_raman_ode_with_step, DEFAULT_RK4_STEP};
use crate::units::{db_to_linear, linear_to_db, PLANCK};

/// Smallest per-channel power tolerated anywhere along the link, W.
pub const POWER_FLOOR: f64 = 1e-12;

/// Span inputs are matched to cached solutions after rounding to this many dB.
pub const CACHE_QUANTUM_DB: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct SpanState {
    pub span_index: usize,
    pub input_powers: Vec<f64>,
    /// Fiber end, before the amplifier.
    pub output_powers: Vec<f64>,
    /// Linear amplifier gain per channel.
    pub gains: Vec<f64>,
    pub post_amp_powers: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnrReport {
    pub launch: Vec<f64>,
    pub p_ase: Vec<f64>,
    pub p_nli: Vec<f64>,
    pub snr_linear: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub scenario: String,
}

impl SnrReport {
    pub fn len(&self) -> usize {
        self.launch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.launch.is_empty()
    }
}

/// `launch/(p_ase + p_nli)` per channel; a zero denominator gives `+∞`.
pub fn assemble_snr(launch: &[f64], p_ase: &[f64], p_nli: &[f64], scenario: &str) -> Result<SnrReport> {
    if p_ase.len() != launch.len() || p_nli.len() != launch.len() {
        return Err(Error::validation("snr", "per-channel vectors differ in length"));
    }
    let snr_linear: Vec<f64> = (0..launch.len())
        .map(|i| {
            let noise = p_ase[i] + p_nli[i];
            if noise > 0.0 {
                launch[i] / noise
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let snr_db = snr_linear
        .iter()
        .map(|&s| if s.is_infinite() { f64::INFINITY } else { linear_to_db(s) })
        .collect();
    Ok(SnrReport {
        launch: launch.to_vec(),
        p_ase: p_ase.to_vec(),
        p_nli: p_nli.to_vec(),
        snr_linear,
        snr_db,
        scenario: scenario.to_string(),
    })
}

fn ase_seed(plan: &ChannelPlan, link: &LinkSpec) -> Vec<f64> {
    plan.channels()
        .iter()
        .map(|ch| PLANCK * ch.abs_frequency * link.amplifier.ase_factor(ch.band) * ch.bandwidth)
        .collect()
}

/// Gain below which an amplifier adds no ASE: 1 in the high-gain model,
/// `1/NF` with the exact `NF = 1/G + 2·n_sp·(G−1)/G`.
fn ase_gain_offset(plan: &ChannelPlan, link: &LinkSpec) -> Vec<f64> {
    plan.channels()
        .iter()
        .map(|ch| match link.amplifier.ase_model {
            AseModel::HighGain => 1.0,
            AseModel::Exact => 1.0 / db_to_linear(link.amplifier.noise_figure(ch.band)),
        })
        .collect()
}

/// ASE of every amplifier, `h·f·(NF/2)·(G−1)·B` per polarization, referred
/// to the launch powers of the first span. Gains below one add nothing.
pub fn ase_accumulate(plan: &ChannelPlan, link: &LinkSpec, spans: &[SpanState]) -> Vec<f64> {
    let mut p_ase = vec![0.0; plan.len()];
    let Some(first) = spans.first() else {
        return p_ase;
    };
    let seed = ase_seed(plan, link);
    let offset = ase_gain_offset(plan, link);
    for s in spans {
        for i in 0..plan.len() {
            let g = (s.gains[i] - offset[i]).max(0.0);
            p_ase[i] += seed[i] * g * first.input_powers[i] / s.post_amp_powers[i];
        }
    }
    p_ase
}

/// Everything `propagate` computes for one launch vector.
#[derive(Clone, Debug)]
pub struct LinkResult {
    pub spans: Vec<SpanState>,
    pub nli: NliReport,
    pub snr: SnrReport,
}

/// A plan and link with the power-independent NLI factors precomputed, for
/// repeated evaluation at different launch powers.
#[derive(Clone, Debug)]
pub struct LinkModel {
    plan: ChannelPlan,
    link: LinkSpec,
    kurtosis: Vec<f64>,
    options: NliOptions,
    kernel: NliKernel,
    ase_seed: Vec<f64>,
    ase_offset: Vec<f64>,
    ode_step: f64,
}

struct CachedSpan {
    net_db: Vec<f64>,
    report: NliReport,
}

impl LinkModel {
    pub fn new(plan: ChannelPlan, link: LinkSpec, kurtosis: Vec<f64>, options: NliOptions) -> Result<Self> {
        link.validate()?;
        if kurtosis.len() != plan.len() {
            return Err(Error::validation("kurtosis", "one value per channel required"));
        }
        let kernel = NliKernel::new(&plan, &link.fiber, options.epsilon)?;
        let ase_seed = ase_seed(&plan, &link);
        let ase_offset = ase_gain_offset(&plan, &link);
        Ok(LinkModel {
            plan,
            link,
            kurtosis,
            options,
            kernel,
            ase_seed,
            ase_offset,
            ode_step: DEFAULT_RK4_STEP,
        })
    }

    /// Same model with a different Raman integrator step, m.
    pub fn with_ode_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::validation("fiber.raman_step_m", "must be positive"));
        }
        self.ode_step = step;
        Ok(self)
    }

    pub fn ode_step(&self) -> f64 {
        self.ode_step
    }

    pub fn plan(&self) -> &ChannelPlan {
        &self.plan
    }

    pub fn link(&self) -> &LinkSpec {
        &self.link
    }

    pub fn kurtosis(&self) -> &[f64] {
        &self.kurtosis
    }

    /// Full result including every span state.
    pub fn propagate(&self, launch: &PowerVector) -> Result<LinkResult> {
        self.run(launch, true)
    }

    /// SNR only; skips materializing span states.
    pub fn snr(&self, launch: &PowerVector) -> Result<SnrReport> {
        self.run(launch, false).map(|r| r.snr)
    }

    /// One span: numerical profile, Raman fit and NLI coefficients.
    fn solve_span(&self, input: &[f64]) -> Result<CachedSpan> {
        let p = PowerVector::new(input.to_vec())?;
        let fiber = &self.link.fiber;
        let profile = solve_raman_ode_with_step(&self.plan, &p, fiber, 2, self.ode_step)?;
        let fit = fit_effective_cr(&profile, &self.plan, &p, fiber)?;
        let report = self
            .kernel
            .evaluate(input, &fit, &self.kurtosis, self.options.format_correction)?;
        Ok(CachedSpan {
            net_db: net_gain_db(&profile),
            report,
        })
    }

    fn run(&self, launch: &PowerVector, record: bool) -> Result<LinkResult> {
        launch.check_plan(&self.plan)?;
        let n = self.plan.len();
        let n_spans = self.link.n_spans;
        let p0 = launch.as_slice();
        let scenario = self.link.amplifier.equalization.id();
        let mut spans = Vec::new();
        let mut p_ase = vec![0.0; n];

        let nli = match self.link.amplifier.equalization {
            Equalization::Ideal => {
                let span = self.solve_span(p0)?;
                let output: Vec<f64> = (0..n).map(|i| p0[i] * 10f64.powf(span.net_db[i] / 10.0)).collect();
                check_floor(&output, 0)?;
                let gains: Vec<f64> = (0..n).map(|i| p0[i] / output[i]).collect();
                for i in 0..n {
                    p_ase[i] = n_spans as f64 * self.ase_seed[i] * (gains[i] - self.ase_offset[i]).max(0.0);
                }
                if record {
                    spans = (0..n_spans)
                        .map(|s| SpanState {
                            span_index: s,
                            input_powers: p0.to_vec(),
                            output_powers: output.clone(),
                            gains: gains.clone(),
                            post_amp_powers: p0.to_vec(),
                        })
                        .collect();
                }
                span.report.scaled_to_spans(n_spans)
            }
            Equalization::Partial {
                compensation,
                reset_period,
            } => {
                let mut cache: HashMap<Vec<i64>, CachedSpan> = HashMap::new();
                let mut reports = Vec::with_capacity(n_spans);
                let mut input = p0.to_vec();
                let db_loss: Vec<f64> = (0..n)
                    .map(|i| 10.0 * std::f64::consts::LOG10_E * self.link.fiber.alpha(i) * self.link.fiber.span_length)
                    .collect();
                for s in 0..n_spans {
                    let key: Vec<i64> = input
                        .iter()
                        .map(|&p| (linear_to_db(p * 1e3) / CACHE_QUANTUM_DB).round() as i64)
                        .collect();
                    if !cache.contains_key(&key) {
                        let solved = self.solve_span(&input)?;
                        cache.insert(key.clone(), solved);
                    }
                    let span = &cache[&key];
                    let output: Vec<f64> = (0..n).map(|i| input[i] * 10f64.powf(span.net_db[i] / 10.0)).collect();
                    check_floor(&output, s)?;
                    let reset = (s + 1) % reset_period == 0;
                    let (gains, post): (Vec<f64>, Vec<f64>) = if reset {
                        ((0..n).map(|i| p0[i] / output[i]).collect(), p0.to_vec())
                    } else {
                        (0..n)
                            .map(|i| {
                                let isrs_db = span.net_db[i] + db_loss[i];
                                let g_db = -span.net_db[i] + (1.0 - compensation) * isrs_db;
                                let g = 10f64.powf(g_db / 10.0);
                                (g, output[i] * g)
                            })
                            .unzip()
                    };
                    check_floor(&post, s)?;
                    for i in 0..n {
                        p_ase[i] += self.ase_seed[i] * (gains[i] - self.ase_offset[i]).max(0.0) * p0[i] / post[i];
                    }
                    let mut report = span.report.clone();
                    report.input_powers.clone_from(&input);
                    reports.push(report);
                    if record {
                        spans.push(SpanState {
                            span_index: s,
                            input_powers: input.clone(),
                            output_powers: output,
                            gains,
                            post_amp_powers: post.clone(),
                        });
                    }
                    input = post;
                }
                accumulate_nli(&reports, AccumulationMode::PerSpan)?
            }
        };
        let snr = assemble_snr(p0, &p_ase, &nli.p_nli, &scenario)?;
        Ok(LinkResult { spans, nli, snr })
    }
}

fn check_floor(powers: &[f64], span: usize) -> Result<()> {
    match powers.iter().position(|&p| !(p >= POWER_FLOOR)) {
        Some(channel) => Err(Error::PowerFloor {
            channel,
            span,
            floor: POWER_FLOOR,
        }),
        None => Ok(()),
    }
}

/// Propagates `launch` over `link` and returns the span states and SNR.
pub fn propagate_link(
    plan: &ChannelPlan,
    launch: &PowerVector,
    link: &LinkSpec,
    kurtosis: &[f64],
    options: NliOptions,
) -> Result<(Vec<SpanState>, SnrReport)> {
    let model = LinkModel::new(plan.clone(), link.clone(), kurtosis.to_vec(), options)?;
    let r = model.propagate(launch)?;
    Ok((r.spans, r.snr))
}
