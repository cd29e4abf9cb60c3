//! The inverse pipeline: background correction, resonance fitting,
//! flux-arch fitting, thermal fits, Kerr extraction and the associated
//! uncertainty bookkeeping.

pub mod background;
pub mod kappa_e;
pub mod kerr;
pub mod lm;
pub mod resonance;
pub mod thermal;
pub mod tuning;

pub use background::{correct_trace, BackgroundModel, CorrectedTrace, CorrectionPolicy};
pub use kappa_e::{kappa_e_profile, KappaEBounds, KappaEProfile};
pub use kerr::{fit_kerr, KerrFit, KerrFitConfig};
pub use lm::{levenberg_marquardt, LmConfig, LmOutcome};
pub use resonance::{analyze_trace, fit_resonance, notch_model, ResonanceFit, SeedPolicy};
pub use thermal::{fit_thermal, DomainPolicy, ThermalFit, ThermalFitParams, ThermalSeries};
pub use tuning::{fit_tuning_curve, fit_tuning_curve_seeded, FluxAxis, FluxFit};
