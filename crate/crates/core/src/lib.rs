//! Channel model for diffusive molecular communication between a point
//! transmitter and a Poisson field of fully-absorbing spherical receivers.
//!
//! The crate has two halves that check each other:
//!
//! * [`analytics`] holds the closed forms: mean Wiener-sausage volume,
//!   hitting probability with and without molecule degradation, hitting
//!   rate, time constants and event-detection probabilities, plus quadrature
//!   routes to the same quantities.
//! * [`sim`] is a particle-based Monte Carlo simulator that samples receiver
//!   deployments ([`geometry`]) and Brownian paths, and estimates the same
//!   probabilities with confidence intervals.
//!
//! [`harness`] wires both into sweeps and figure-reproduction pipelines that
//! emit CSV. Units are fixed throughout: µm, s, µm²/s, receivers/µm³.

pub mod analytics;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod sim;
pub mod specfun;

pub use analytics::{AlphaBeta, ChannelParams, DetectionSpec};
pub use error::{Error, Result};
pub use geometry::{Point3, ReceiverField, RngStream};
pub use sim::{AbsorptionMode, Fate, HittingCurve, ParticleOutcome, SimConfig};
