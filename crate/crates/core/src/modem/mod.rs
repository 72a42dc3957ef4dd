//! Modulation formats, GMI, geometric shaping and code-rate selection.

mod constellation;
mod gmi;
mod rates;
mod shaping;

pub use constellation::{excess_kurtosis, Constellation};
pub use gmi::{gauss_hermite, gmi, ngmi, GmiEstimate, GmiMethod, GmiTable, DEFAULT_GH_ORDER};
pub use rates::{gmi_bound, select_code_rates, throughput, RateAssignment};
pub use shaping::{shape_constellation, shape_constellation_with, ShapingConfig, SHAPING_GH_ORDER};
