//! Quasi-static time-series simulation of smart-inverter grid-support modes
//! on radial low-voltage feeders.
//!
//! The crate models a benchmark residential feeder, solves its power flow by
//! backward/forward sweep, steps groups of inverters through constant power
//! factor, volt-var and volt-watt control, and drives the whole system over
//! an event timeline (irradiance steps, grid-voltage steps). The point of the
//! exercise is cross-aggregator coupling: how the control mode chosen at one
//! PV aggregator changes voltage and power at another, in resistive versus
//! inductive line regimes.
//!
//! Start with the runnable examples (`cargo run --example experiment_matrix`)
//! or the `invergrid` binary for file-based workflows.

pub mod config;
pub mod inverter;
pub mod network;
pub mod powerflow;
pub mod report;
pub mod scenario;

pub use config::{parse_config, serialize_config, AggregatorConfig, ConfigError, ModeKind, ScenarioSpec};
pub use inverter::{Aggregator, ControlMode, InverterUnit, VoltVarCurve, VoltWattCurve};
pub use network::{build_cigre_lv_residential, to_inductive_variant, NetworkModel};
pub use powerflow::{
    classify_regime, solve, ComplexPower, PowerFlowSolution, RegimeClass, SolverOptions,
    VoltagePhasor,
};
pub use report::{emit_csv, emit_summary, MatrixRun};
pub use scenario::{
    ambient_at, default_timeline, experiment_matrix, run, run_scenario, summarize_window,
    NetworkVariant, ScenarioTimeline, TimeSeriesRecord,
};
