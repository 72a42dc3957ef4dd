//! Nonlinear interference: closed-form ISRS GN evaluation, multi-span
//! accumulation and a Monte-Carlo GN-integral reference.

mod closed_form;
mod oracle;

pub use closed_form::{eta_closed_form, eta_closed_form_with, epsilon_coherence, NliKernel};
pub use oracle::{eta_oracle, OracleEstimate, OracleQuadrature};

use crate::error::{Error, Result};

/// Default weight of the kurtosis-dependent XPM correction.
pub const DEFAULT_FORMAT_CORRECTION: f64 = 5.0 / 6.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonRule {
    /// Coherence exponent from [`epsilon_coherence`].
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NliOptions {
    pub format_correction: f64,
    pub epsilon: EpsilonRule,
}

impl Default for NliOptions {
    fn default() -> Self {
        NliOptions {
            format_correction: DEFAULT_FORMAT_CORRECTION,
            epsilon: EpsilonRule::Auto,
        }
    }
}

/// Per-channel NLI coefficients. For a single span the `eta_*` fields are
/// that span's values; after [`accumulate_nli`] they hold link totals.
#[derive(Clone, Debug, PartialEq)]
pub struct NliReport {
    pub eta_spm: Vec<f64>,
    pub eta_xpm: Vec<f64>,
    /// Signed modulation-format correction.
    pub eta_corr: Vec<f64>,
    pub p_nli: Vec<f64>,
    pub epsilon: f64,
    pub span_length: f64,
    /// Powers launched into the span the coefficients were computed for.
    pub input_powers: Vec<f64>,
}

impl NliReport {
    pub fn len(&self) -> usize {
        self.eta_spm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta_spm.is_empty()
    }

    /// Link totals for `n` identical spans; same as `Homogeneous`
    /// accumulation without copying the report.
    pub fn scaled_to_spans(&self, n: usize) -> NliReport {
        let nf = n as f64;
        let coherent = nf.powf(1.0 + self.epsilon);
        let eta_spm: Vec<f64> = self.eta_spm.iter().map(|v| coherent * v).collect();
        let eta_xpm: Vec<f64> = self.eta_xpm.iter().map(|v| nf * v).collect();
        let eta_corr: Vec<f64> = self.eta_corr.iter().map(|v| nf * v).collect();
        let p_nli = (0..self.len())
            .map(|i| ((eta_spm[i] + eta_xpm[i] + eta_corr[i]) * self.input_powers[i].powi(3)).max(0.0))
            .collect();
        NliReport {
            eta_spm,
            eta_xpm,
            eta_corr,
            p_nli,
            epsilon: self.epsilon,
            span_length: self.span_length,
            input_powers: self.input_powers.clone(),
        }
    }

    pub fn eta_total(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.eta_spm[i] + self.eta_xpm[i] + self.eta_corr[i])
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccumulationMode {
    /// Identical spans: SPM adds with exponent `1 + ε`, XPM incoherently.
    Homogeneous,
    /// Spans with different input profiles: sum of each span's contribution
    /// referred to the first span's launch powers, with the SPM sum scaled by
    /// `n^ε` so identical spans reproduce `Homogeneous`.
    PerSpan,
}

/// Sums per-span reports into link totals.
///
/// `p_nli` of the result is `eta_total · P_i³` with `P_i` the launch power of
/// the first span. In `PerSpan` mode span `s` enters weighted by
/// `(P_s,i / P_1,i)²`, which makes its noise-to-signal contribution
/// `η_s·P_s,i²` independent of the reference.
pub fn accumulate_nli(reports: &[NliReport], mode: AccumulationMode) -> Result<NliReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Mode("no span reports to accumulate".into()))?;
    let n_ch = first.len();
    if reports.iter().any(|r| r.len() != n_ch) {
        return Err(Error::Mode("span reports differ in channel count".into()));
    }
    let launch = &first.input_powers;
    let mut spm = vec![0.0; n_ch];
    let mut xpm = vec![0.0; n_ch];
    let mut corr = vec![0.0; n_ch];

    match mode {
        AccumulationMode::Homogeneous => {
            let same = reports.iter().all(|r| {
                (r.span_length - first.span_length).abs() <= 1e-9 * first.span_length
                    && r.input_powers == first.input_powers
            });
            if !same {
                return Err(Error::Mode(
                    "homogeneous accumulation needs identical spans".into(),
                ));
            }
            let n = reports.len() as f64;
            let coherent = n.powf(1.0 + first.epsilon);
            for i in 0..n_ch {
                spm[i] = coherent * first.eta_spm[i];
                xpm[i] = n * first.eta_xpm[i];
                corr[i] = n * first.eta_corr[i];
            }
        }
        AccumulationMode::PerSpan => {
            for r in reports {
                for i in 0..n_ch {
                    let w = (r.input_powers[i] / launch[i]).powi(2);
                    spm[i] += w * r.eta_spm[i];
                    xpm[i] += w * r.eta_xpm[i];
                    corr[i] += w * r.eta_corr[i];
                }
            }
            let coherent = (reports.len() as f64).powf(first.epsilon);
            spm.iter_mut().for_each(|v| *v *= coherent);
        }
    }

    let p_nli = (0..n_ch)
        .map(|i| ((spm[i] + xpm[i] + corr[i]) * launch[i].powi(3)).max(0.0))
        .collect();
    Ok(NliReport {
        eta_spm: spm,
        eta_xpm: xpm,
        eta_corr: corr,
        p_nli,
        epsilon: first.epsilon,
        span_length: first.span_length,
        input_powers: launch.clone(),
    })
}
