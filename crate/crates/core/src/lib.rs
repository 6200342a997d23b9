//! Bregman divergences, duality mappings and moduli of convexity and
//! smoothness on finite-dimensional weighted `l_r` spaces.

pub mod conjugate;
pub mod error;
pub mod functional;
pub mod moduli;
pub mod space;
pub mod verifier;

pub use conjugate::{biconjugate, legendre_transform, GridFunction};
pub use error::{Error, Result};
pub use functional::{Form, Functional, PowerScale, ScalarFn};
pub use moduli::{EstimatorConfig, ModulusCurve, ModulusKind, Sense};
pub use space::{duality_map, norm, pairing, sphere_sample, GaugeExponent, Point, SpaceSpec};
pub use verifier::{run_all, BoundReport, Report, RunOptions, SweepSpec, Verdict};
