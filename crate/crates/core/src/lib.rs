//! Coverage and rate of a terrestrial downlink that shares spectrum with a
//! LEO satellite network, from stochastic geometry and from simulation.

pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod interference;
pub mod metrics;
pub mod montecarlo;
pub mod quadrature;

pub use config::{Case, RawScenario, Scenario};
pub use error::{Error, Result};
pub use metrics::{coverage, rate, Metric, MetricResult};
