//! Stress integration for the Menétrey-Willam concrete plasticity model
//! with non-associated flow, volumetric hardening/softening and an
//! explicit return-to-apex corrector for tensile states beyond the
//! vertex of the yield surface.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: symmetric tensors, invariants, Haigh-Westergaard
//!   coordinates and isotropic elasticity;
//! * [`surface`]: yield function, hardening laws, plastic potential and
//!   the apex coordinate;
//! * [`return_map`]: elastic predictor, smooth and apex correctors and
//!   consistent tangents;
//! * [`driver`]: single material point under mixed strain/stress control
//!   and the built-in validation scenarios;
//! * [`config`] and [`output`]: run configuration and record serialisation.

pub mod config;
pub mod driver;
pub mod error;
pub mod output;
pub mod return_map;
pub mod solver;
pub mod surface;
pub mod tensor;

pub use config::{parse_config, RunConfig};
pub use driver::{run_program, Control, ControlStep, LoadingProgram, Scenario, StepRecord};
pub use error::{Error, Result};
pub use output::{write_records, Format, Summary};
pub use return_map::{integrate_step, InternalState, Material, Mode, StepResult, Tolerances};
pub use surface::MaterialParams;
pub use tensor::{ElasticModuli, HwCoords, SymTensor, Tangent};
