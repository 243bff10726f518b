//! One-dimensional time-dependent Schrödinger solver for Gaussian wave packets
//! scattering off a rectangular barrier whose height can be switched off
//! mid-flight, plus the analysis toolchain for the transient reflection
//! enhancement ("superarrivals") that the switch-off produces.
//!
//! Units are ħ = 1 and m = 1/2 unless configured otherwise, so a plane wave
//! of momentum p has energy p² and group velocity 2p.

pub mod analysis;
pub mod config;
pub mod error;
pub mod io;
pub mod observables;
pub mod planewave;
pub mod potential;
pub mod propagator;
pub mod wavepacket;

pub use config::{default_config, packet_energy, Grid, SimulationConfig, UnitsNote};
pub use error::{Error, Result};
pub use observables::ReflectionTrace;
pub use potential::{BarrierSchedule, RampMode};
pub use propagator::SimulationResult;
pub use wavepacket::{MomentumSpectrum, WaveFunction};
