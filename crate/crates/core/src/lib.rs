//! Capacity sizing and deterministic simulation for solar-powered data
//! centers.
//!
//! The crate models a data center whose servers draw power in proportion to
//! utilization, sizes a PV array from an hourly irradiance profile, sizes a
//! battery bank for the night backup window, and simulates day/night cycles
//! hour by hour — including an ON/OFF consolidation policy that switches
//! servers off when the stored energy cannot carry the full fleet through
//! the night.
//!
//! Modules follow the pipeline: [`power`] for facility draw, [`solar`] for
//! irradiance and array sizing, [`storage`] for battery arithmetic and state
//! of charge, [`consolidation`] for the active-server policy, [`sim`] for
//! the time-stepped engine, and [`scenario`] for files, reports, and the
//! bundled reference scenario data.

pub mod consolidation;
pub mod power;
pub mod scenario;
pub mod sim;
pub mod solar;
pub mod storage;

pub use scenario::{load_irradiance_csv, load_scenario, Scenario};
pub use sim::{run, summarize, SimulationConfig, SimulationTrace};
