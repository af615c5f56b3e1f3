//! Cox point processes built on random lines in the plane and random great
//! circles on the sphere, together with the machinery to measure how far they
//! are from Poisson: exact samplers and couplings, Glauber dynamics, explicit
//! Stein-type distance bounds, Monte Carlo identity checks and distance
//! estimators.

pub mod coxmodels;
pub mod diagnostics;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod glauber;
pub mod harness;
pub mod pointprocess;
pub mod rng;
pub mod steinbound;

pub use coxmodels::{Calibration, Coupling, CoxLineCoupling, SatelliteCoupling, TargetIntensity};
pub use diagnostics::{DistanceEstimate, RateFit};
pub use error::{Error, Result};
pub use functional::Functional;
pub use geometry::{LineParams, Point2, PointS2, Rotation3, Window};
pub use pointprocess::{AnyConfiguration, Configuration, ModelParams, SpacePoint};
pub use rng::RngStream;
pub use steinbound::{BoundReport, QuadratureSpec};
