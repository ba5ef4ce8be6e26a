//! Electrical graph of a radial low-voltage feeder: buses, line segments,
//! constant-power loads and the slack source, plus the benchmark feeder
//! constructor used by the default scenarios.

use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::TAU;
use thiserror::Error;

/// UG1 underground cable, trunk sections.
pub const UG1_RESISTANCE_OHM_PER_KM: f64 = 0.287;
/// UG1 underground cable inductance.
pub const UG1_INDUCTANCE_MH_PER_KM: f64 = 0.5316;
/// UG3 underground cable, lateral sections.
pub const UG3_RESISTANCE_OHM_PER_KM: f64 = 1.152;
/// UG3 underground cable inductance.
pub const UG3_INDUCTANCE_MH_PER_KM: f64 = 1.4579;

/// System frequency of the benchmark feeder.
pub const DEFAULT_FREQUENCY_HZ: f64 = 50.0;
/// Per-unit base power for the whole model.
pub const DEFAULT_BASE_POWER_KVA: f64 = 100.0;
/// Per-unit base voltage (line-to-line).
pub const DEFAULT_BASE_VOLTAGE_V: f64 = 400.0;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("base power and base voltage must be positive (got {base_power_kva} kVA, {base_voltage_v} V)")]
    InvalidBase {
        base_power_kva: f64,
        base_voltage_v: f64,
    },
}

/// A network node, identified by a string label such as `"R17"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    /// Nominal line-to-line voltage in volts.
    pub nominal_voltage_v: f64,
}

impl Bus {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            nominal_voltage_v: DEFAULT_BASE_VOLTAGE_V,
        }
    }
}

/// Cable catalogue entry for a line segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CableType {
    Ug1,
    Ug3,
    Custom,
}

/// A series line segment between two buses. Reactance is derived from the
/// per-km inductance at the model frequency: `x = 2*pi*f*l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSegment {
    pub from_bus: String,
    pub to_bus: String,
    pub resistance_ohm_per_km: f64,
    pub inductance_mh_per_km: f64,
    pub length_km: f64,
    pub cable_type: CableType,
}

impl LineSegment {
    pub fn ug1(from: impl Into<String>, to: impl Into<String>, length_km: f64) -> Self {
        Self {
            from_bus: from.into(),
            to_bus: to.into(),
            resistance_ohm_per_km: UG1_RESISTANCE_OHM_PER_KM,
            inductance_mh_per_km: UG1_INDUCTANCE_MH_PER_KM,
            length_km,
            cable_type: CableType::Ug1,
        }
    }

    pub fn ug3(from: impl Into<String>, to: impl Into<String>, length_km: f64) -> Self {
        Self {
            from_bus: from.into(),
            to_bus: to.into(),
            resistance_ohm_per_km: UG3_RESISTANCE_OHM_PER_KM,
            inductance_mh_per_km: UG3_INDUCTANCE_MH_PER_KM,
            length_km,
            cable_type: CableType::Ug3,
        }
    }

    pub fn custom(
        from: impl Into<String>,
        to: impl Into<String>,
        resistance_ohm_per_km: f64,
        inductance_mh_per_km: f64,
        length_km: f64,
    ) -> Self {
        Self {
            from_bus: from.into(),
            to_bus: to.into(),
            resistance_ohm_per_km,
            inductance_mh_per_km,
            length_km,
            cable_type: CableType::Custom,
        }
    }

    /// Per-km series reactance in ohm at the given frequency.
    pub fn reactance_ohm_per_km(&self, frequency_hz: f64) -> f64 {
        TAU * frequency_hz * self.inductance_mh_per_km * 1e-3
    }

    /// Total series impedance of the segment in ohm.
    pub fn impedance_ohm(&self, frequency_hz: f64) -> Complex64 {
        Complex64::new(
            self.resistance_ohm_per_km,
            self.reactance_ohm_per_km(frequency_hz),
        ) * self.length_km
    }
}

/// Constant-power load attached to a bus (three-phase totals).
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub bus: String,
    pub active_power_kw: f64,
    pub reactive_power_kvar: f64,
}

impl Load {
    pub fn new(bus: impl Into<String>, active_power_kw: f64, reactive_power_kvar: f64) -> Self {
        Self {
            bus: bus.into(),
            active_power_kw,
            reactive_power_kvar,
        }
    }
}

/// Upstream grid boundary: a bus held at a settable per-unit voltage.
/// `source_impedance_ohm` models an optional stiffness limit and defaults
/// to zero (ideal source).
#[derive(Debug, Clone, PartialEq)]
pub struct SlackSource {
    pub bus: String,
    pub voltage_setpoint_pu: f64,
    pub source_impedance_ohm: Complex64,
}

impl SlackSource {
    pub fn new(bus: impl Into<String>, voltage_setpoint_pu: f64) -> Self {
        Self {
            bus: bus.into(),
            voltage_setpoint_pu,
            source_impedance_ohm: Complex64::new(0.0, 0.0),
        }
    }
}

/// The full electrical model. Immutable after construction; scenario runs
/// mutate their own copy (slack setpoint only).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub buses: Vec<Bus>,
    pub lines: Vec<LineSegment>,
    pub loads: Vec<Load>,
    pub slack: SlackSource,
    pub frequency_hz: f64,
    pub base_power_kva: f64,
    pub base_voltage_v: f64,
}

impl NetworkModel {
    pub fn bus_ids(&self) -> impl Iterator<Item = &str> {
        self.buses.iter().map(|b| b.id.as_str())
    }

    pub fn has_bus(&self, id: &str) -> bool {
        self.buses.iter().any(|b| b.id == id)
    }

    /// Base impedance in ohm, `v_base^2 / s_base`.
    pub fn base_impedance_ohm(&self) -> f64 {
        self.base_voltage_v * self.base_voltage_v / (self.base_power_kva * 1e3)
    }
}

/// One invariant violation found by [`validate`]. Violations are data,
/// not failures: an invalid model can still be inspected and reported.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("duplicate id: bus {bus} appears more than once")]
    DuplicateBusId { bus: String },
    #[error("bus {bus}: nominal voltage must be positive (got {value})")]
    NonPositiveNominalVoltage { bus: String, value: f64 },
    #[error("{element} references unknown bus {bus}")]
    UnknownBusRef { element: String, bus: String },
    #[error("line {from}->{to}: negative cable parameter")]
    NegativeCableParameter { from: String, to: String },
    #[error("line {from}->{to}: length must be positive")]
    NonPositiveLength { from: String, to: String },
    #[error("line {from}->{to}: self loop")]
    SelfLoop { from: String, to: String },
    #[error("load at {bus}: active power must be non-negative (got {value} kW)")]
    NegativeLoad { bus: String, value: f64 },
    #[error("slack setpoint {value} pu outside sanity bound (0.5, 1.5)")]
    SlackSetpointOutOfRange { value: f64 },
    #[error("not radial: {lines} lines for {buses} buses (expected {})", buses - 1)]
    NotRadial { lines: usize, buses: usize },
    #[error("bus {bus} is not connected to the slack bus")]
    Disconnected { bus: String },
}

/// Checks every model invariant and returns the violations found.
/// An empty list means the model is valid.
pub fn validate(net: &NetworkModel) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut seen = BTreeSet::new();
    for bus in &net.buses {
        if !seen.insert(bus.id.as_str()) {
            violations.push(Violation::DuplicateBusId {
                bus: bus.id.clone(),
            });
        }
        if bus.nominal_voltage_v <= 0.0 {
            violations.push(Violation::NonPositiveNominalVoltage {
                bus: bus.id.clone(),
                value: bus.nominal_voltage_v,
            });
        }
    }

    for line in &net.lines {
        for end in [&line.from_bus, &line.to_bus] {
            if !seen.contains(end.as_str()) {
                violations.push(Violation::UnknownBusRef {
                    element: format!("line {}->{}", line.from_bus, line.to_bus),
                    bus: end.clone(),
                });
            }
        }
        if line.from_bus == line.to_bus {
            violations.push(Violation::SelfLoop {
                from: line.from_bus.clone(),
                to: line.to_bus.clone(),
            });
        }
        if line.resistance_ohm_per_km < 0.0 || line.inductance_mh_per_km < 0.0 {
            violations.push(Violation::NegativeCableParameter {
                from: line.from_bus.clone(),
                to: line.to_bus.clone(),
            });
        }
        if line.length_km <= 0.0 {
            violations.push(Violation::NonPositiveLength {
                from: line.from_bus.clone(),
                to: line.to_bus.clone(),
            });
        }
    }

    for load in &net.loads {
        if !seen.contains(load.bus.as_str()) {
            violations.push(Violation::UnknownBusRef {
                element: format!("load ({} kW)", load.active_power_kw),
                bus: load.bus.clone(),
            });
        }
        if load.active_power_kw < 0.0 {
            violations.push(Violation::NegativeLoad {
                bus: load.bus.clone(),
                value: load.active_power_kw,
            });
        }
    }

    if !seen.contains(net.slack.bus.as_str()) {
        violations.push(Violation::UnknownBusRef {
            element: "slack source".into(),
            bus: net.slack.bus.clone(),
        });
    }
    if net.slack.voltage_setpoint_pu <= 0.5 || net.slack.voltage_setpoint_pu >= 1.5 {
        violations.push(Violation::SlackSetpointOutOfRange {
            value: net.slack.voltage_setpoint_pu,
        });
    }

    // Radiality: |lines| = |buses| - 1 plus connectivity from the slack bus.
    if !net.buses.is_empty() {
        if net.lines.len() != net.buses.len() - 1 {
            violations.push(Violation::NotRadial {
                lines: net.lines.len(),
                buses: net.buses.len(),
            });
        }
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for line in &net.lines {
            adjacency
                .entry(line.from_bus.as_str())
                .or_default()
                .push(line.to_bus.as_str());
            adjacency
                .entry(line.to_bus.as_str())
                .or_default()
                .push(line.from_bus.as_str());
        }
        let mut reached = BTreeSet::new();
        let mut queue = VecDeque::new();
        if seen.contains(net.slack.bus.as_str()) {
            reached.insert(net.slack.bus.as_str());
            queue.push_back(net.slack.bus.as_str());
        }
        while let Some(bus) = queue.pop_front() {
            for &next in adjacency.get(bus).into_iter().flatten() {
                if reached.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        for bus in &net.buses {
            if !reached.contains(bus.id.as_str()) {
                violations.push(Violation::Disconnected {
                    bus: bus.id.clone(),
                });
            }
        }
    }

    violations
}

/// Builds the benchmark residential feeder: a 0.4 kV, 50 Hz radial network
/// with a UG1 trunk R1..R10 (35 m segments), UG3 laterals to R11, R15, R16,
/// R17 and R18 (30 m each), the six catalogue loads, and the slack source at
/// R0, the feeder-head terminal directly upstream of R1 (zero-impedance tie).
pub fn build_cigre_lv_residential() -> NetworkModel {
    let bus_names = [
        "R0", "R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R10", "R11", "R15", "R16",
        "R17", "R18",
    ];
    let buses = bus_names.iter().map(|&id| Bus::new(id)).collect();

    let trunk_len = 0.035;
    let lateral_len = 0.030;
    let mut lines = vec![LineSegment::custom("R0", "R1", 0.0, 0.0, 0.001)];
    for i in 1..10 {
        lines.push(LineSegment::ug1(
            format!("R{i}"),
            format!("R{}", i + 1),
            trunk_len,
        ));
    }
    lines.push(LineSegment::ug3("R3", "R11", lateral_len));
    lines.push(LineSegment::ug3("R4", "R15", lateral_len));
    lines.push(LineSegment::ug3("R6", "R16", lateral_len));
    lines.push(LineSegment::ug3("R9", "R17", lateral_len));
    lines.push(LineSegment::ug3("R10", "R18", lateral_len));

    let loads = vec![
        Load::new("R1", 190.0, 62.45),
        Load::new("R11", 14.25, 4.68),
        Load::new("R15", 49.4, 16.24),
        Load::new("R16", 52.25, 17.17),
        Load::new("R17", 33.25, 10.93),
        Load::new("R18", 44.65, 14.68),
    ];

    let net = NetworkModel {
        buses,
        lines,
        loads,
        slack: SlackSource::new("R0", 1.0),
        frequency_hz: DEFAULT_FREQUENCY_HZ,
        base_power_kva: DEFAULT_BASE_POWER_KVA,
        base_voltage_v: DEFAULT_BASE_VOLTAGE_V,
    };
    debug_assert!(validate(&net).is_empty());
    net
}

/// Returns a copy of the network with every line's per-km reactance set to
/// five times its per-km resistance (inductance recomputed accordingly).
/// The input is left untouched; applying the transform twice is a no-op.
pub fn to_inductive_variant(net: &NetworkModel) -> NetworkModel {
    let mut out = net.clone();
    for line in &mut out.lines {
        line.inductance_mh_per_km =
            5.0 * line.resistance_ohm_per_km / (TAU * out.frequency_hz) * 1e3;
    }
    out
}

/// Series impedance of a segment in per-unit on the given bases.
pub fn line_impedance_pu(
    seg: &LineSegment,
    base_power_kva: f64,
    base_voltage_v: f64,
    frequency_hz: f64,
) -> Result<Complex64, NetworkError> {
    if base_power_kva <= 0.0 || base_voltage_v <= 0.0 {
        return Err(NetworkError::InvalidBase {
            base_power_kva,
            base_voltage_v,
        });
    }
    let z_base = base_voltage_v * base_voltage_v / (base_power_kva * 1e3);
    Ok(seg.impedance_ohm(frequency_hz) / z_base)
}
