//! Launch-power optimization: a particle swarm over per-band offset and tilt,
//! then per-channel gradient refinement of the GMI-bound throughput.

mod param;
mod pso;
mod refine;

pub use param::{ParamBounds, PowerParam};
pub use pso::{pso, write_trace_csv, PsoConfig, PsoResult, TraceRow};
pub use refine::{refine_gradient, RefineConfig, RefineResult};

use crate::error::{Error, Result};
use crate::fiber::PowerVector;
use crate::link::{LinkModel, SnrReport};
use crate::modem::GmiTable;

/// Throughput of a link as a function of launch powers, using the continuous
/// GMI bound `Σ 2·R_s,i·GMI_i` so the surface has no rate plateaus.
#[derive(Clone, Debug)]
pub struct Objective {
    model: LinkModel,
    tables: Vec<GmiTable>,
    /// Index into `tables` for every channel.
    format_of: Vec<usize>,
}

impl Objective {
    pub fn new(model: LinkModel, tables: Vec<GmiTable>, format_of: Vec<usize>) -> Result<Self> {
        if format_of.len() != model.plan().len() {
            return Err(Error::validation("formats", "one format per channel required"));
        }
        if format_of.iter().any(|&k| k >= tables.len()) {
            return Err(Error::validation("formats", "format index out of range"));
        }
        Ok(Objective {
            model,
            tables,
            format_of,
        })
    }

    pub fn model(&self) -> &LinkModel {
        &self.model
    }

    pub fn tables(&self) -> &[GmiTable] {
        &self.tables
    }

    pub fn format_of(&self) -> &[usize] {
        &self.format_of
    }

    /// Same objective over a different link model (e.g. another ODE step).
    pub fn with_model(&self, model: LinkModel) -> Result<Self> {
        Objective::new(model, self.tables.clone(), self.format_of.clone())
    }

    /// Per-channel GMI, bit per 2D symbol.
    pub fn gmi(&self, snr: &SnrReport) -> Vec<f64> {
        snr.snr_linear
            .iter()
            .zip(&self.format_of)
            .map(|(&s, &k)| self.tables[k].gmi(s))
            .collect()
    }

    /// bits per 2D symbol of each channel's format.
    pub fn bits(&self) -> Vec<u32> {
        self.format_of.iter().map(|&k| self.tables[k].bits()).collect()
    }

    pub fn throughput_of(&self, snr: &SnrReport) -> f64 {
        self.gmi(snr)
            .iter()
            .zip(self.model.plan().channels())
            .map(|(g, ch)| 2.0 * ch.bandwidth * g)
            .sum()
    }

    /// bit/s; propagation failures score `−∞`.
    pub fn evaluate(&self, launch: &PowerVector) -> f64 {
        match self.model.snr(launch) {
            Ok(snr) => self.throughput_of(&snr),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    pub fn evaluate_dbm(&self, dbm: &[f64]) -> f64 {
        match PowerVector::from_dbm(dbm) {
            Ok(p) => self.evaluate(&p),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    pub fn evaluate_param(&self, values: &[f64]) -> f64 {
        match PowerParam::new(self.model.plan(), values.to_vec()) {
            Ok(p) => self.evaluate_dbm(&p.expand_dbm(self.model.plan())),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Optimum {
    pub param: PowerParam,
    pub pso: PsoResult,
    pub refine: RefineResult,
    pub launch: PowerVector,
}

/// Particle swarm over [`PowerParam`], then per-channel refinement from its
/// expansion.
pub fn optimize_launch(
    objective: &Objective,
    bounds: &ParamBounds,
    pso_cfg: &PsoConfig,
    refine_cfg: &RefineConfig,
) -> Result<Optimum> {
    bounds.validate()?;
    let plan = objective.model().plan();
    let swarm = pso(|v| objective.evaluate_param(v), &bounds.for_plan(plan), pso_cfg)?;
    let param = PowerParam::new(plan, swarm.best_position.clone())?;
    let start = param.expand_dbm(plan);
    let refine = if refine_cfg.max_iters > 0 {
        refine_gradient(|x| objective.evaluate_dbm(x), &start, refine_cfg)?
    } else {
        RefineResult {
            value: swarm.best_value,
            start_value: swarm.best_value,
            powers_dbm: start,
            iterations: 0,
            trace: vec![swarm.best_value],
        }
    };
    let launch = PowerVector::from_dbm(&refine.powers_dbm)?;
    Ok(Optimum {
        param,
        pso: swarm,
        refine,
        launch,
    })
}
