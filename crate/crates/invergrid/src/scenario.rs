//! Quasi-static time-series engine: an event timeline drives irradiance and
//! the slack voltage, aggregators update their commands once per step from
//! the previous step's solved terminal voltage, and each step ends in a
//! radial power-flow solve.

use crate::config::ScenarioSpec;
pub use crate::config::ModeKind;
use crate::inverter::{Aggregator, InverterError};
use crate::network::{to_inductive_variant, NetworkModel};
use crate::powerflow::{self, ComplexPower, PowerFlowError, SolverOptions};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("timeline: {0}")]
    Timeline(String),
    #[error("time {t} s outside the timeline range [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("expected exactly two aggregators, got {0}")]
    TwoAggregatorsRequired(usize),
    #[error("aggregator {id} references bus {bus} which is not in the network")]
    UnknownAggregatorBus { id: String, bus: String },
    #[error("window [{t_start}, {t_end}) contains no records")]
    EmptyWindow { t_start: f64, t_end: f64 },
    #[error(transparent)]
    PowerFlow(#[from] PowerFlowError),
    #[error(transparent)]
    Inverter(#[from] InverterError),
    #[error("network override: {0}")]
    Network(String),
}

/// What a timeline event does when its time arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventAction {
    SetIrradiance(f64),
    SetSlackVoltage(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time_s: f64,
    pub action: EventAction,
}

/// Time-ordered events over a fixed horizon. Events are piecewise-constant
/// and left-closed: an event applies from its own timestamp onwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTimeline {
    pub events: Vec<Event>,
    pub duration_s: f64,
    pub dt_s: f64,
}

impl ScenarioTimeline {
    pub fn new(mut events: Vec<Event>, duration_s: f64, dt_s: f64) -> Result<Self, ScenarioError> {
        if dt_s <= 0.0 {
            return Err(ScenarioError::Timeline(format!(
                "dt must be positive (got {dt_s})"
            )));
        }
        if duration_s < 0.0 {
            return Err(ScenarioError::Timeline(format!(
                "duration must be non-negative (got {duration_s})"
            )));
        }
        if duration_s > 0.0 && dt_s > duration_s {
            return Err(ScenarioError::Timeline(format!(
                "dt ({dt_s} s) exceeds duration ({duration_s} s)"
            )));
        }
        for event in &events {
            if event.time_s < 0.0 || event.time_s > duration_s {
                return Err(ScenarioError::Timeline(format!(
                    "event at t={} s outside [0, {duration_s}]",
                    event.time_s
                )));
            }
            match event.action {
                EventAction::SetIrradiance(frac) if !(0.0..=1.0).contains(&frac) => {
                    return Err(ScenarioError::Timeline(format!(
                        "irradiance {frac} outside [0, 1]"
                    )));
                }
                EventAction::SetSlackVoltage(v) if v <= 0.5 || v >= 1.5 => {
                    return Err(ScenarioError::Timeline(format!(
                        "slack voltage {v} pu outside sanity bound (0.5, 1.5)"
                    )));
                }
                _ => {}
            }
        }
        // stable: ties keep file order, the later row wins at lookup time
        events.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        Ok(Self {
            events,
            duration_s,
            dt_s,
        })
    }
}

/// The benchmark 20 s timeline: irradiance halves at 5 s and recovers at
/// 10 s; the grid voltage steps to 1.2 pu at 13 s and back to nominal at 17 s.
pub fn default_timeline() -> ScenarioTimeline {
    ScenarioTimeline::new(
        vec![
            Event {
                time_s: 5.0,
                action: EventAction::SetIrradiance(0.5),
            },
            Event {
                time_s: 10.0,
                action: EventAction::SetIrradiance(1.0),
            },
            Event {
                time_s: 13.0,
                action: EventAction::SetSlackVoltage(1.2),
            },
            Event {
                time_s: 17.0,
                action: EventAction::SetSlackVoltage(1.0),
            },
        ],
        20.0,
        0.01,
    )
    .expect("default timeline is valid")
}

/// Ambient boundary conditions at time `t`: the values of the last events at
/// or before `t`, starting from (1.0, 1.0).
pub fn ambient_at(timeline: &ScenarioTimeline, t: f64) -> Result<(f64, f64), ScenarioError> {
    if t < 0.0 || t > timeline.duration_s {
        return Err(ScenarioError::TimeOutOfRange {
            t,
            duration: timeline.duration_s,
        });
    }
    let mut irradiance = 1.0;
    let mut slack_v = 1.0;
    for event in &timeline.events {
        if event.time_s > t {
            break;
        }
        match event.action {
            EventAction::SetIrradiance(frac) => irradiance = frac,
            EventAction::SetSlackVoltage(v) => slack_v = v,
        }
    }
    Ok((irradiance, slack_v))
}

/// Which line-parameter variant of the feeder a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkVariant {
    Resistive,
    Inductive,
}

impl NetworkVariant {
    pub fn label(&self) -> &'static str {
        match self {
            NetworkVariant::Resistive => "resistive",
            NetworkVariant::Inductive => "inductive",
        }
    }
}

/// Per-aggregator measurement at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PccMeasurement {
    pub p_kw: f64,
    pub q_kvar: f64,
    /// `p / sqrt(p^2 + q^2)`, recorded as 1.0 when the apparent power is zero.
    pub pf: f64,
    pub v_pu: f64,
}

impl PccMeasurement {
    fn from_command(cmd: ComplexPower, v_pu: f64) -> Self {
        let apparent = cmd.apparent();
        let pf = if apparent > 0.0 { cmd.p / apparent } else { 1.0 };
        Self {
            p_kw: cmd.p,
            q_kvar: cmd.q,
            pf,
            v_pu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub time_s: f64,
    pub slack_v_pu: f64,
    pub irradiance_frac: f64,
    pub a1: PccMeasurement,
    pub a2: PccMeasurement,
    pub solver_iterations: usize,
    pub converged: bool,
}

/// Runs the time series: for each step the ambient conditions are read, each
/// aggregator computes its injection from the previous step's solved PCC
/// voltage (the slack setpoint on the first step), and the power flow is
/// solved with loads plus those injections. Returns `floor(duration/dt) + 1`
/// records. Solver divergence is recorded and the run continues; topology
/// errors abort.
pub fn run(
    spec: &ScenarioSpec,
    net: &NetworkModel,
    mut aggs: Vec<Aggregator>,
) -> Result<Vec<TimeSeriesRecord>, ScenarioError> {
    if aggs.len() != 2 {
        return Err(ScenarioError::TwoAggregatorsRequired(aggs.len()));
    }
    let mut net = match spec.variant {
        NetworkVariant::Resistive => net.clone(),
        NetworkVariant::Inductive => to_inductive_variant(net),
    };
    for agg in &aggs {
        if !net.has_bus(&agg.bus) {
            return Err(ScenarioError::UnknownAggregatorBus {
                id: agg.id.clone(),
                bus: agg.bus.clone(),
            });
        }
    }

    let timeline = &spec.timeline;
    let steps = ((timeline.duration_s / timeline.dt_s) + 1e-9).floor() as usize;
    let opts = SolverOptions::default();

    let (irradiance0, slack0) = ambient_at(timeline, 0.0)?;
    for agg in &mut aggs {
        agg.warm_start(slack0, irradiance0)?;
    }
    let mut pcc_voltage = vec![slack0; aggs.len()];

    let mut records = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = (k as f64 * timeline.dt_s).min(timeline.duration_s);
        let (irradiance, slack_v) = ambient_at(timeline, t)?;
        net.slack.voltage_setpoint_pu = slack_v;

        let mut injections: BTreeMap<String, ComplexPower> = BTreeMap::new();
        let mut commands = Vec::with_capacity(aggs.len());
        for (i, agg) in aggs.iter_mut().enumerate() {
            let cmd_kw = agg.step(pcc_voltage[i], irradiance, timeline.dt_s)?;
            let pu = ComplexPower::new(cmd_kw.p / net.base_power_kva, cmd_kw.q / net.base_power_kva);
            *injections.entry(agg.bus.clone()).or_default() += pu;
            commands.push(cmd_kw);
        }

        let solution = powerflow::solve(&net, &injections, &opts)?;
        for (i, agg) in aggs.iter().enumerate() {
            pcc_voltage[i] = solution.voltages[&agg.bus].magnitude;
        }

        records.push(TimeSeriesRecord {
            time_s: t,
            slack_v_pu: slack_v,
            irradiance_frac: irradiance,
            a1: PccMeasurement::from_command(commands[0], pcc_voltage[0]),
            a2: PccMeasurement::from_command(commands[1], pcc_voltage[1]),
            solver_iterations: solution.iterations,
            converged: solution.converged,
        });
    }
    Ok(records)
}

/// Convenience wrapper: builds the network (benchmark feeder or the
/// scenario's topology override) and both aggregators, then runs.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<Vec<TimeSeriesRecord>, ScenarioError> {
    let net = spec.network().map_err(ScenarioError::Network)?;
    let aggs = vec![spec.a1.build()?, spec.a2.build()?];
    run(spec, &net, aggs)
}

/// The six-run experiment grid: both feeder variants crossed with the three
/// control modes at A2, with A1 pinned to constant power factor 0.95.
pub fn experiment_matrix(base: &ScenarioSpec) -> Vec<ScenarioSpec> {
    let mut specs = Vec::with_capacity(6);
    for variant in [NetworkVariant::Resistive, NetworkVariant::Inductive] {
        for mode in [ModeKind::Cpf, ModeKind::VoltVar, ModeKind::VoltWatt] {
            let mut spec = base.clone();
            spec.variant = variant;
            spec.a1.mode = ModeKind::Cpf;
            spec.a1.cpf_pf = 0.95;
            spec.a2.mode = mode;
            specs.push(spec);
        }
    }
    specs
}

/// Mean / min / max of one recorded signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

fn signal_stats(values: impl Iterator<Item = f64>) -> SignalStats {
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut n = 0usize;
    for v in values {
        sum += v;
        min = min.min(v);
        max = max.max(v);
        n += 1;
    }
    SignalStats {
        mean: sum / n as f64,
        min,
        max,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatorWindowStats {
    pub p_kw: SignalStats,
    pub q_kvar: SignalStats,
    pub v_pu: SignalStats,
    pub pf: SignalStats,
    /// Largest per-step |dp/dt| seen inside the window, kW/s.
    pub max_abs_dp_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSummary {
    pub t_start: f64,
    pub t_end: f64,
    pub records: usize,
    pub a1: AggregatorWindowStats,
    pub a2: AggregatorWindowStats,
}

/// Statistics over records with `t_start <= t < t_end`.
pub fn summarize_window(
    records: &[TimeSeriesRecord],
    t_start: f64,
    t_end: f64,
) -> Result<WindowSummary, ScenarioError> {
    let window: Vec<&TimeSeriesRecord> = records
        .iter()
        .filter(|r| r.time_s >= t_start && r.time_s < t_end)
        .collect();
    if window.is_empty() || t_start >= t_end {
        return Err(ScenarioError::EmptyWindow { t_start, t_end });
    }

    let stats_for = |select: &dyn Fn(&TimeSeriesRecord) -> PccMeasurement| {
        let meas =
            |f: &dyn Fn(PccMeasurement) -> f64| signal_stats(window.iter().map(|r| f(select(r))));
        let mut max_slew = 0.0f64;
        for pair in window.windows(2) {
            let dt = pair[1].time_s - pair[0].time_s;
            if dt > 0.0 {
                let dp = (select(pair[1]).p_kw - select(pair[0]).p_kw).abs();
                max_slew = max_slew.max(dp / dt);
            }
        }
        AggregatorWindowStats {
            p_kw: meas(&|m| m.p_kw),
            q_kvar: meas(&|m| m.q_kvar),
            v_pu: meas(&|m| m.v_pu),
            pf: meas(&|m| m.pf),
            max_abs_dp_dt: max_slew,
        }
    };

    Ok(WindowSummary {
        t_start,
        t_end,
        records: window.len(),
        a1: stats_for(&|r| r.a1),
        a2: stats_for(&|r| r.a2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioSpec;
    use crate::network::build_cigre_lv_residential;

    fn default_spec() -> ScenarioSpec {
        ScenarioSpec::paper_default()
    }

    #[test]
    fn default_timeline_phases() {
        let tl = default_timeline();
        assert_eq!(tl.duration_s, 20.0);
        assert_eq!(tl.dt_s, 0.01);
        assert_eq!(ambient_at(&tl, 0.0).unwrap(), (1.0, 1.0));
        assert_eq!(ambient_at(&tl, 2.0).unwrap(), (1.0, 1.0));
        assert_eq!(ambient_at(&tl, 7.0).unwrap(), (0.5, 1.0));
        assert_eq!(ambient_at(&tl, 11.0).unwrap(), (1.0, 1.0));
        assert_eq!(ambient_at(&tl, 15.0).unwrap(), (1.0, 1.2));
        assert_eq!(ambient_at(&tl, 19.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn ambient_is_left_closed_and_range_checked() {
        let tl = default_timeline();
        // the event's own timestamp already carries the new value
        assert_eq!(ambient_at(&tl, 5.0).unwrap(), (0.5, 1.0));
        assert_eq!(ambient_at(&tl, 13.0).unwrap(), (1.0, 1.2));
        assert!(ambient_at(&tl, -0.1).is_err());
        assert!(ambient_at(&tl, 20.5).is_err());
    }

    #[test]
    fn timeline_validation() {
        assert!(ScenarioTimeline::new(vec![], 10.0, 0.0).is_err());
        assert!(ScenarioTimeline::new(vec![], 10.0, 11.0).is_err());
        assert!(ScenarioTimeline::new(
            vec![Event {
                time_s: 30.0,
                action: EventAction::SetIrradiance(0.5)
            }],
            20.0,
            0.01
        )
        .is_err());
        assert!(ScenarioTimeline::new(
            vec![Event {
                time_s: 5.0,
                action: EventAction::SetIrradiance(1.5)
            }],
            20.0,
            0.01
        )
        .is_err());
    }

    #[test]
    fn record_count_and_monotone_time() {
        let records = run_scenario(&default_spec()).unwrap();
        assert_eq!(records.len(), 2001);
        for pair in records.windows(2) {
            assert!(pair[1].time_s > pair[0].time_s);
        }
        assert_eq!(records[0].time_s, 0.0);
        assert!((records.last().unwrap().time_s - 20.0).abs() < 1e-9);
    }

    #[test]
    fn zero_duration_gives_single_record() {
        let mut spec = default_spec();
        spec.timeline = ScenarioTimeline::new(vec![], 0.0, 0.01).unwrap();
        let records = run_scenario(&spec).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].time_s, 0.0);
    }

    #[test]
    fn flat_timeline_without_inverters_is_static() {
        let mut spec = default_spec();
        // aggregators inject nothing when irradiance is held at zero from t = 0
        spec.timeline = ScenarioTimeline::new(
            vec![Event {
                time_s: 0.0,
                action: EventAction::SetIrradiance(0.0),
            }],
            1.0,
            0.1,
        )
        .unwrap();
        let records = run_scenario(&spec).unwrap();
        let first = &records[0];
        for r in &records {
            assert_eq!(r.a1.p_kw, 0.0);
            assert_eq!(r.a1.v_pu.to_bits(), first.a1.v_pu.to_bits());
            assert_eq!(r.a2.v_pu.to_bits(), first.a2.v_pu.to_bits());
        }
        // matches a direct static solve of the same boundary conditions
        let net = build_cigre_lv_residential();
        let sol = powerflow::solve(&net, &BTreeMap::new(), &SolverOptions::default()).unwrap();
        assert!((first.a2.v_pu - sol.voltages["R18"].magnitude).abs() < 1e-12);
    }

    #[test]
    fn cpf_run_holds_rated_output_in_phase_one() {
        let records = run_scenario(&default_spec()).unwrap();
        for r in records.iter().filter(|r| r.time_s < 5.0) {
            assert!(
                (r.a1.p_kw - 47.5).abs() < 1e-9,
                "t={} p={}",
                r.time_s,
                r.a1.p_kw
            );
            assert!((r.a1.pf - 0.95).abs() < 1e-9);
            assert!(r.converged);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let spec = default_spec();
        let a = run_scenario(&spec).unwrap();
        let b = run_scenario(&spec).unwrap();
        assert_eq!(a.len(), b.len());
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.a1.p_kw.to_bits(), rb.a1.p_kw.to_bits());
            assert_eq!(ra.a2.q_kvar.to_bits(), rb.a2.q_kvar.to_bits());
            assert_eq!(ra.a1.v_pu.to_bits(), rb.a1.v_pu.to_bits());
            assert_eq!(ra.a2.v_pu.to_bits(), rb.a2.v_pu.to_bits());
        }
    }

    #[test]
    fn steady_phase_is_settled_for_every_a2_mode() {
        // flat conditions after warm start: outputs stay put within ramp noise
        for mode in [ModeKind::Cpf, ModeKind::VoltVar, ModeKind::VoltWatt] {
            let mut spec = default_spec();
            spec.a2.mode = mode;
            let records = run_scenario(&spec).unwrap();
            let window: Vec<_> = records
                .iter()
                .filter(|r| r.time_s >= 2.0 && r.time_s < 5.0)
                .collect();
            let p0 = window[0].a2.p_kw;
            let q0 = window[0].a2.q_kvar;
            for r in &window {
                assert!(
                    (r.a2.p_kw - p0).abs() < 1e-6 && (r.a2.q_kvar - q0).abs() < 1e-6,
                    "mode {mode:?} drifts during flat phase"
                );
            }
        }
    }

    #[test]
    fn experiment_matrix_layout() {
        let specs = experiment_matrix(&default_spec());
        assert_eq!(specs.len(), 6);
        assert_eq!(
            specs
                .iter()
                .filter(|s| s.variant == NetworkVariant::Resistive)
                .count(),
            3
        );
        for spec in &specs {
            assert_eq!(spec.a1.mode, ModeKind::Cpf);
            assert_eq!(spec.a1.cpf_pf, 0.95);
        }
    }

    #[test]
    fn window_summary_statistics() {
        let records = run_scenario(&default_spec()).unwrap();

        // constant phase: mean = min = max
        let flat = summarize_window(&records, 2.0, 4.0).unwrap();
        assert!((flat.a1.p_kw.mean - flat.a1.p_kw.min).abs() < 1e-9);
        assert!((flat.a1.p_kw.mean - flat.a1.p_kw.max).abs() < 1e-9);

        // the 1.2 pu phase pushes the PCC above 1.1 pu in the cpf/cpf run
        let surge = summarize_window(&records, 13.0, 17.0).unwrap();
        assert!(surge.a2.v_pu.max > 1.1, "max v = {}", surge.a2.v_pu.max);

        // slew bounded by the aggregate ramp limit (5 units x 2 pu/s x 10 kVA)
        let whole = summarize_window(&records, 0.0, 20.0).unwrap();
        assert!(whole.a2.max_abs_dp_dt <= 100.0 * (1.0 + 1e-9));

        assert!(summarize_window(&records, 30.0, 31.0).is_err());
        assert!(summarize_window(&records, 5.0, 5.0).is_err());
    }
}
