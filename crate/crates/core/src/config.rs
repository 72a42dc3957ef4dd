//! TOML run configuration. Every section is optional and falls back to the
//! defaults of the corresponding library type; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{AmplifierSpec, AseModel, Equalization, FiberSpec, LinkSpec};
use crate::modem::{shape_constellation, Constellation};
use crate::nli::{EpsilonRule, NliOptions, DEFAULT_FORMAT_CORRECTION};
use crate::optimizer::{ParamBounds, PsoConfig, RefineConfig};
use crate::plan::{build_channel_plan, Band, BandAllocation, BandEdges, ChannelPlan, PerBand};
use crate::raman::DEFAULT_RK4_STEP;
use crate::units::{
    db_per_km_to_np_per_m, db_to_linear, per_w_km_to_si, ps_nm2_km_to_si, ps_nm_km_to_si, raman_slope_to_si,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub plan: PlanSection,
    pub fiber: FiberSection,
    pub amplifier: AmplifierSection,
    pub link: LinkSection,
    pub nli: NliSection,
    pub modulation: ModulationSection,
    pub launch: LaunchSection,
    pub optimizer: OptimizerSection,
    pub rates: RatesSection,
    pub oracle: OracleSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub s_channels: usize,
    pub c_channels: usize,
    pub l_channels: usize,
    pub gap_sc_nm: f64,
    pub gap_cl_nm: f64,
    pub symbol_rate_gbd: f64,
    pub center_wavelength_nm: f64,
}

impl Default for PlanSection {
    fn default() -> Self {
        PlanSection {
            s_channels: 164,
            c_channels: 100,
            l_channels: 100,
            gap_sc_nm: 10.0,
            gap_cl_nm: 5.0,
            symbol_rate_gbd: 50.0,
            center_wavelength_nm: 1540.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberSection {
    pub attenuation_db_km: f64,
    /// Per-channel attenuation, lowest frequency first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attenuation_table_db_km: Option<Vec<f64>>,
    pub dispersion_ps_nm_km: f64,
    pub slope_ps_nm2_km: f64,
    pub gamma_per_w_km: f64,
    /// 1/(W·km·THz)
    pub raman_slope_per_w_km_thz: f64,
    pub span_length_km: f64,
    pub ref_wavelength_nm: f64,
    pub raman_step_m: f64,
}

impl Default for FiberSection {
    fn default() -> Self {
        FiberSection {
            attenuation_db_km: 0.16,
            attenuation_table_db_km: None,
            dispersion_ps_nm_km: 18.0,
            slope_ps_nm2_km: 0.067,
            gamma_per_w_km: 1.2,
            raman_slope_per_w_km_thz: 0.028,
            span_length_km: 70.0,
            ref_wavelength_nm: 1550.0,
            raman_step_m: DEFAULT_RK4_STEP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EqualizationKind {
    Ideal,
    Partial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AseModelKind {
    HighGain,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplifierSection {
    pub nf_s_db: f64,
    pub nf_c_db: f64,
    pub nf_l_db: f64,
    pub equalization: EqualizationKind,
    pub compensation: f64,
    pub reset_period: usize,
    pub ase_polarizations: u32,
    pub ase_model: AseModelKind,
}

impl Default for AmplifierSection {
    fn default() -> Self {
        AmplifierSection {
            nf_s_db: 7.0,
            nf_c_db: 4.0,
            nf_l_db: 6.0,
            equalization: EqualizationKind::Ideal,
            compensation: 0.5,
            reset_period: 5,
            ase_polarizations: 2,
            ase_model: AseModelKind::HighGain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub n_spans: usize,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection { n_spans: 100 }
    }
}

/// `"auto"` or a fixed coherence exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSetting {
    Fixed(f64),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NliSection {
    pub format_correction: f64,
    pub epsilon: EpsilonSetting,
}

impl Default for NliSection {
    fn default() -> Self {
        NliSection {
            format_correction: DEFAULT_FORMAT_CORRECTION,
            epsilon: EpsilonSetting::Named("auto".into()),
        }
    }
}

/// Constellation for one band: a file, a square QAM, or a shaping run.
/// Exactly one of `file`, `qam_bits`, `shape_bits` must be given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormatSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qam_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FormatSection {
    fn shaped(bits: u32, snr_db: f64) -> Self {
        FormatSection {
            shape_bits: Some(bits),
            snr_db: Some(snr_db),
            iterations: Some(400),
            seed: Some(1),
            ..Default::default()
        }
    }

    /// Stable key: bands with equal sections share one constellation.
    fn key(&self) -> String {
        format!("{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationSection {
    pub s: FormatSection,
    pub c: FormatSection,
    pub l: FormatSection,
}

impl Default for ModulationSection {
    fn default() -> Self {
        ModulationSection {
            s: FormatSection::shaped(4, 7.0),
            c: FormatSection::shaped(6, 11.0),
            l: FormatSection::shaped(6, 11.0),
        }
    }
}

impl ModulationSection {
    pub fn get(&self, band: Band) -> &FormatSection {
        match band {
            Band::S => &self.s,
            Band::C => &self.c,
            Band::L => &self.l,
        }
    }
}

/// Exactly one of `flat_dbm` and `file`. A missing `[launch]` section means
/// a flat −1 dBm per channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaunchSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_dbm: Option<f64>,
    /// CSV with a `launch_dbm` column (e.g. `optimum_powers.csv`), one row per
    /// channel in index order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for LaunchSection {
    fn default() -> Self {
        LaunchSection {
            flat_dbm: Some(-1.0),
            file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    pub offset_bounds_dbm: [f64; 2],
    pub tilt_bounds_db: [f64; 2],
    pub refine_iterations: usize,
    pub refine_step_db: f64,
    pub refine_tol_tbps: f64,
    pub refine_move_db: f64,
    pub refine_bounds_dbm: [f64; 2],
    /// ODE step used inside the search; the final report uses `fiber.raman_step_m`.
    pub raman_step_m: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let pso = PsoConfig::default();
        let refine = RefineConfig::default();
        let bounds = ParamBounds::default();
        OptimizerSection {
            swarm_size: pso.swarm_size,
            iterations: pso.iterations,
            inertia: pso.inertia,
            cognitive: pso.cognitive,
            social: pso.social,
            seed: pso.seed,
            offset_bounds_dbm: bounds.offset_dbm.into(),
            tilt_bounds_db: bounds.tilt_db.into(),
            refine_iterations: refine.max_iters,
            refine_step_db: refine.step_db,
            refine_tol_tbps: refine.tol / 1e12,
            refine_move_db: refine.initial_move_db,
            refine_bounds_dbm: refine.bounds_dbm.into(),
            raman_step_m: 500.0,
        }
    }
}

impl OptimizerSection {
    pub fn pso(&self) -> PsoConfig {
        PsoConfig {
            swarm_size: self.swarm_size,
            iterations: self.iterations,
            inertia: self.inertia,
            cognitive: self.cognitive,
            social: self.social,
            seed: self.seed,
        }
    }

    pub fn refine(&self) -> RefineConfig {
        RefineConfig {
            step_db: self.refine_step_db,
            tol: self.refine_tol_tbps * 1e12,
            max_iters: self.refine_iterations,
            initial_move_db: self.refine_move_db,
            bounds_dbm: self.refine_bounds_dbm.into(),
        }
    }

    pub fn bounds(&self) -> ParamBounds {
        ParamBounds {
            offset_dbm: self.offset_bounds_dbm.into(),
            tilt_db: self.tilt_bounds_db.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSection {
    pub k: usize,
    pub k_sweep: Vec<usize>,
    /// Subtracted from every NGMI before rate selection.
    pub ngmi_penalty: f64,
}

impl Default for RatesSection {
    fn default() -> Self {
        RatesSection {
            k: 6,
            k_sweep: (1..=8).collect(),
            ngmi_penalty: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub n_mc: usize,
    pub seed: u64,
    /// Allowed |closed form − oracle| in dB for the validate check.
    pub tolerance_db: f64,
    /// Channels of the C-band validation instance.
    pub channels: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            n_mc: 200_000,
            seed: 7,
            tolerance_db: 0.5,
            channels: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimulationConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `path` and makes its relative file references absolute with
    /// respect to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: SimulationConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path
            .canonicalize()
            .ok()
            .and_then(|p| p.parent().map(Path::to_path_buf))
            .unwrap_or_default();
        cfg.resolve_paths(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for f in [&mut self.modulation.s, &mut self.modulation.c, &mut self.modulation.l] {
            if let Some(p) = f.file.as_mut() {
                fix(p);
            }
        }
        if let Some(p) = self.launch.file.as_mut() {
            fix(p);
        }
        fix(&mut self.output.dir);
    }

    /// Replaces every seed in the file (optimizer, oracle, shaping).
    pub fn override_seed(&mut self, seed: u64) {
        self.optimizer.seed = seed;
        self.oracle.seed = seed;
        for f in [&mut self.modulation.s, &mut self.modulation.c, &mut self.modulation.l] {
            if f.shape_bits.is_some() {
                f.seed = Some(seed);
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.plan;
        for (name, v) in [
            ("plan.gap_sc_nm", p.gap_sc_nm),
            ("plan.gap_cl_nm", p.gap_cl_nm),
        ] {
            if !(v >= 0.0) {
                return Err(Error::validation(name, "must be non-negative"));
            }
        }
        for (name, v) in [
            ("plan.symbol_rate_gbd", p.symbol_rate_gbd),
            ("plan.center_wavelength_nm", p.center_wavelength_nm),
            ("fiber.raman_step_m", self.fiber.raman_step_m),
            ("optimizer.raman_step_m", self.optimizer.raman_step_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(name, "must be positive"));
            }
        }
        if !(self.fiber.raman_slope_per_w_km_thz >= 0.0) {
            return Err(Error::validation("fiber.raman_slope_per_w_km_thz", "must be non-negative"));
        }
        if let EpsilonSetting::Named(s) = &self.nli.epsilon {
            if s != "auto" {
                return Err(Error::validation("nli.epsilon", "expected \"auto\" or a number"));
            }
        }
        match (self.launch.flat_dbm, &self.launch.file) {
            (Some(_), Some(_)) => {
                return Err(Error::validation("launch", "give either flat_dbm or file, not both"));
            }
            (None, None) => return Err(Error::validation("launch", "need flat_dbm or file")),
            _ => {}
        }
        for band in Band::ALL {
            let f = self.modulation.get(band);
            let given = [f.file.is_some(), f.qam_bits.is_some(), f.shape_bits.is_some()]
                .iter()
                .filter(|&&b| b)
                .count();
            let name = format!("modulation.{}", band.name().to_lowercase());
            if given != 1 {
                return Err(Error::validation(name, "need exactly one of file, qam_bits, shape_bits"));
            }
            if f.shape_bits.is_some() && f.snr_db.is_none() {
                return Err(Error::validation(name, "shaping needs snr_db"));
            }
        }
        if self.rates.k == 0 || self.rates.k_sweep.iter().any(|&k| k == 0) {
            return Err(Error::validation("rates.k", "must be positive"));
        }
        if self.rates.k_sweep.is_empty() {
            return Err(Error::validation("rates.k_sweep", "must not be empty"));
        }
        if !(0.0..1.0).contains(&self.rates.ngmi_penalty) {
            return Err(Error::validation("rates.ngmi_penalty", "must lie in [0, 1)"));
        }
        if self.oracle.channels == 0 || self.oracle.channels > 10 {
            return Err(Error::validation("oracle.channels", "must lie in 1..=10"));
        }
        if !(self.oracle.tolerance_db > 0.0) {
            return Err(Error::validation("oracle.tolerance_db", "must be positive"));
        }
        self.optimizer.pso().validate()?;
        self.optimizer.bounds().validate()?;
        self.link_spec()?.validate()?;
        Ok(())
    }

    pub fn fiber_spec(&self) -> FiberSpec {
        let f = &self.fiber;
        FiberSpec {
            attenuation: db_per_km_to_np_per_m(f.attenuation_db_km),
            attenuation_table: f
                .attenuation_table_db_km
                .as_ref()
                .map(|t| t.iter().map(|&a| db_per_km_to_np_per_m(a)).collect()),
            attenuation_bar: None,
            dispersion: ps_nm_km_to_si(f.dispersion_ps_nm_km),
            dispersion_slope: ps_nm2_km_to_si(f.slope_ps_nm2_km),
            gamma: per_w_km_to_si(f.gamma_per_w_km),
            raman_slope: raman_slope_to_si(f.raman_slope_per_w_km_thz),
            span_length: f.span_length_km * 1e3,
            ref_wavelength: f.ref_wavelength_nm * 1e-9,
        }
    }

    pub fn equalization(&self) -> Equalization {
        match self.amplifier.equalization {
            EqualizationKind::Ideal => Equalization::Ideal,
            EqualizationKind::Partial => Equalization::Partial {
                compensation: self.amplifier.compensation,
                reset_period: self.amplifier.reset_period,
            },
        }
    }

    pub fn link_spec(&self) -> Result<LinkSpec> {
        let a = &self.amplifier;
        let spec = LinkSpec {
            n_spans: self.link.n_spans,
            fiber: self.fiber_spec(),
            amplifier: AmplifierSpec {
                noise_figure_db: PerBand {
                    s: a.nf_s_db,
                    c: a.nf_c_db,
                    l: a.nf_l_db,
                },
                equalization: self.equalization(),
                ase_polarizations: a.ase_polarizations,
                ase_model: match a.ase_model {
                    AseModelKind::HighGain => AseModel::HighGain,
                    AseModelKind::Exact => AseModel::Exact,
                },
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn nli_options(&self) -> NliOptions {
        NliOptions {
            format_correction: self.nli.format_correction,
            epsilon: match self.nli.epsilon {
                EpsilonSetting::Fixed(e) => EpsilonRule::Fixed(e),
                EpsilonSetting::Named(_) => EpsilonRule::Auto,
            },
        }
    }

    /// Channel plan; each channel's `modulation_id` is the format key of its band.
    pub fn channel_plan(&self) -> Result<ChannelPlan> {
        let p = &self.plan;
        let counts = [(Band::S, p.s_channels), (Band::C, p.c_channels), (Band::L, p.l_channels)];
        let alloc: Vec<BandAllocation> = counts
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|&(band, count)| BandAllocation {
                band,
                count,
                modulation_id: self.modulation.get(band).key(),
            })
            .collect();
        // gaps between consecutive present bands
        let present: Vec<Band> = alloc.iter().map(|a| a.band).collect();
        let gaps: Vec<f64> = present
            .windows(2)
            .map(|w| match (w[0], w[1]) {
                (Band::S, Band::C) => p.gap_sc_nm,
                (Band::C, Band::L) => p.gap_cl_nm,
                _ => p.gap_sc_nm + p.gap_cl_nm,
            } * 1e-9)
            .collect();
        build_channel_plan(
            &BandEdges::default(),
            &alloc,
            &gaps,
            p.symbol_rate_gbd * 1e9,
            p.center_wavelength_nm * 1e-9,
        )
    }

    /// Constellations used by `plan`, one per distinct format key, and the
    /// index of each channel's constellation.
    pub fn constellations(&self, plan: &ChannelPlan) -> Result<(Vec<Constellation>, Vec<usize>)> {
        let mut keys: Vec<String> = Vec::new();
        let mut formats = Vec::new();
        for band in plan.bands() {
            let section = self.modulation.get(band);
            let key = section.key();
            if !keys.contains(&key) {
                formats.push(build_format(section)?);
                keys.push(key);
            }
        }
        let index = plan
            .channels()
            .iter()
            .map(|ch| keys.iter().position(|k| *k == ch.modulation_id).expect("key registered"))
            .collect();
        Ok((formats, index))
    }
}

fn build_format(f: &FormatSection) -> Result<Constellation> {
    if let Some(path) = &f.file {
        return Constellation::load(path);
    }
    if let Some(bits) = f.qam_bits {
        return Constellation::square_qam(bits);
    }
    let bits = f.shape_bits.expect("validated");
    let snr = db_to_linear(f.snr_db.expect("validated"));
    shape_constellation(bits, snr, f.seed.unwrap_or(1), f.iterations.unwrap_or(400))
}
