//! Quantized zero-dynamics attacks against sampled-data SISO LTI plants.
//!
//! The crate covers the whole pipeline: zero-order-hold discretization,
//! transmission zeros and serial decomposition of nonminimum-phase plants,
//! static and dynamic input quantizers, the attack generators built on top of
//! them, and a harness that runs attacked and attack-free plants side by side
//! and checks stealth and disruption.

pub mod attack;
pub mod error;
pub mod linalg;
pub mod lti;
pub mod poly;
pub mod quantizer;
pub mod sim;
pub mod zeros;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;
pub use lti::{discretize, ContinuousPlant, DiscretePlant, Trace};
pub use quantizer::{DynQuantizerState, UniformQuantizer};
pub use sim::{benchmark, run_scenario, AttackConfig, Scenario, ScenarioResult};
pub use zeros::{BoundSet, SerialDecomposition, ZeroReport};
