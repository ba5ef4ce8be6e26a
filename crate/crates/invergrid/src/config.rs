//! Scenario configuration: a line-oriented `section.key = value` text format
//! with `#` comments and repeated keys for list rows.
//!
//! Sections and keys:
//!
//! ```text
//! network.variant    = resistive | inductive
//! network.bus        = <id> [nominal_v]          # repeated; topology override
//! network.line       = <from> <to> ug1|ug3 <length_m>
//! network.line       = <from> <to> custom <r_ohm_per_km> <l_mh_per_km> <length_m>
//! network.load       = <bus> <kw> <kvar>
//! network.slack_bus  = <id>
//!
//! a1.bus / a2.bus    = <bus id>
//! aN.units           = <count>
//! aN.s_rated_kva     = <kVA per unit>
//! aN.p_stc_kw        = <kW per unit at full irradiance>
//! aN.mode            = cpf | volt_var | volt_watt
//! aN.cpf_pf          = <0..1>
//! aN.cpf_absorbs     = true | false
//! aN.v1 / aN.v_ref / aN.v2 = <pu>                # curve breakpoints
//! aN.q_max_kvar      = <kVAR per unit>
//! aN.ramp_pu_per_s   = <per-unit of rating per second>
//! aN.filter_tau_s    = <s>  (0 disables the measurement filter)
//!
//! timeline.dt        = <s>
//! timeline.duration  = <s>
//! timeline.event     = t=<s> irradiance=<0..1>
//! timeline.event     = t=<s> slack_v=<pu>
//! ```
//!
//! An empty file yields the default scenario: the resistive benchmark feeder,
//! both aggregators in constant power factor 0.95, and the standard 20 s
//! timeline.

use crate::inverter::{Aggregator, ControlMode, InverterError, InverterUnit, VoltVarCurve, VoltWattCurve};
use crate::network::{
    build_cigre_lv_residential, validate, Bus, LineSegment, Load, NetworkModel, SlackSource,
    DEFAULT_BASE_POWER_KVA, DEFAULT_BASE_VOLTAGE_V, DEFAULT_FREQUENCY_HZ,
};
use crate::scenario::{
    default_timeline, Event, EventAction, NetworkVariant, ScenarioTimeline,
};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("config error at line {line}, key {key}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.into(),
            message: message.into(),
        }
    }
}

/// Control-mode selector before curve parameters are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Cpf,
    VoltVar,
    VoltWatt,
}

impl ModeKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModeKind::Cpf => "cpf",
            ModeKind::VoltVar => "volt_var",
            ModeKind::VoltWatt => "volt_watt",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "cpf" => Some(ModeKind::Cpf),
            "volt_var" => Some(ModeKind::VoltVar),
            "volt_watt" => Some(ModeKind::VoltWatt),
            _ => None,
        }
    }
}

/// Everything needed to build one aggregator. Curve breakpoints are optional;
/// unset keys fall back to the per-mode defaults at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatorConfig {
    pub id: String,
    pub bus: String,
    pub units: usize,
    pub s_rated_kva: f64,
    pub p_stc_kw: f64,
    pub mode: ModeKind,
    pub cpf_pf: f64,
    pub cpf_absorbs: bool,
    pub v1: Option<f64>,
    pub v_ref: Option<f64>,
    pub v2: Option<f64>,
    pub q_max_kvar: Option<f64>,
    pub ramp_pu_per_s: f64,
    pub filter_tau_s: f64,
}

impl AggregatorConfig {
    pub fn default_a1() -> Self {
        Self {
            id: "A1".into(),
            bus: "R17".into(),
            units: 5,
            s_rated_kva: 10.0,
            p_stc_kw: 9.5,
            mode: ModeKind::Cpf,
            cpf_pf: 0.95,
            cpf_absorbs: false,
            v1: None,
            v_ref: None,
            v2: None,
            q_max_kvar: None,
            ramp_pu_per_s: 2.0,
            filter_tau_s: 0.1,
        }
    }

    pub fn default_a2() -> Self {
        Self {
            id: "A2".into(),
            bus: "R18".into(),
            ..Self::default_a1()
        }
    }

    /// Resolves the control mode with per-mode curve defaults.
    pub fn control_mode(&self) -> Result<ControlMode, InverterError> {
        Ok(match self.mode {
            ModeKind::Cpf => ControlMode::ConstantPowerFactor {
                pf: self.cpf_pf,
                lagging: true,
                absorbs: self.cpf_absorbs,
            },
            ModeKind::VoltVar => ControlMode::VoltVar(VoltVarCurve::new(
                self.v1.unwrap_or(0.95),
                self.v_ref.unwrap_or(1.0),
                self.v2.unwrap_or(1.05),
                self.q_max_kvar.unwrap_or(0.44 * self.s_rated_kva),
            )?),
            ModeKind::VoltWatt => ControlMode::VoltWatt(VoltWattCurve::new(
                self.v_ref.unwrap_or(1.05),
                self.v2.unwrap_or(1.10),
                self.p_stc_kw,
            )?),
        })
    }

    pub fn build(&self) -> Result<Aggregator, InverterError> {
        let mode = self.control_mode()?;
        let unit = InverterUnit::new(
            self.s_rated_kva,
            self.p_stc_kw,
            mode,
            self.ramp_pu_per_s,
            self.filter_tau_s,
        )?;
        Aggregator::new(self.id.clone(), self.bus.clone(), vec![unit; self.units])
    }
}

/// Raw topology override rows from the `[network]` section.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkOverride {
    pub buses: Vec<Bus>,
    pub lines: Vec<LineSegment>,
    pub loads: Vec<Load>,
    pub slack_bus: Option<String>,
}

impl NetworkOverride {
    fn is_empty(&self) -> bool {
        self.buses.is_empty()
            && self.lines.is_empty()
            && self.loads.is_empty()
            && self.slack_bus.is_none()
    }

    pub fn build(&self) -> Result<NetworkModel, String> {
        let slack_bus = self
            .slack_bus
            .clone()
            .ok_or("network.slack_bus is required when overriding the topology")?;
        let net = NetworkModel {
            buses: self.buses.clone(),
            lines: self.lines.clone(),
            loads: self.loads.clone(),
            slack: SlackSource::new(slack_bus, 1.0),
            frequency_hz: DEFAULT_FREQUENCY_HZ,
            base_power_kva: DEFAULT_BASE_POWER_KVA,
            base_voltage_v: DEFAULT_BASE_VOLTAGE_V,
        };
        let violations = validate(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "))
        }
    }
}

/// A fully resolved scenario: feeder variant, both aggregator configurations
/// and the event timeline, with an optional topology override.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub variant: NetworkVariant,
    pub a1: AggregatorConfig,
    pub a2: AggregatorConfig,
    pub timeline: ScenarioTimeline,
    pub network_override: Option<NetworkOverride>,
}

impl ScenarioSpec {
    /// The default experiment: resistive feeder, both aggregators at constant
    /// power factor 0.95 lagging, standard 20 s timeline.
    pub fn paper_default() -> Self {
        Self {
            variant: NetworkVariant::Resistive,
            a1: AggregatorConfig::default_a1(),
            a2: AggregatorConfig::default_a2(),
            timeline: default_timeline(),
            network_override: None,
        }
    }

    /// The network this spec runs on, before the variant transform.
    pub fn network(&self) -> Result<NetworkModel, String> {
        match &self.network_override {
            Some(over) => over.build(),
            None => Ok(build_cigre_lv_residential()),
        }
    }
}

struct RawEntry {
    line: usize,
    key: String,
    value: String,
}

fn parse_f64(entry: &RawEntry, token: &str) -> Result<f64, ConfigError> {
    token.parse::<f64>().map_err(|_| {
        ConfigError::new(
            entry.line,
            &entry.key,
            format!("malformed number {token:?}"),
        )
    })
}

fn parse_usize(entry: &RawEntry, token: &str) -> Result<usize, ConfigError> {
    token.parse::<usize>().map_err(|_| {
        ConfigError::new(entry.line, &entry.key, format!("malformed count {token:?}"))
    })
}

fn parse_bool(entry: &RawEntry) -> Result<bool, ConfigError> {
    match entry.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ConfigError::new(
            entry.line,
            &entry.key,
            format!("expected true or false, got {other:?}"),
        )),
    }
}

fn apply_aggregator_key(
    agg: &mut AggregatorConfig,
    field: &str,
    entry: &RawEntry,
) -> Result<(), ConfigError> {
    let positive = |value: f64, what: &str| {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(ConfigError::new(
                entry.line,
                &entry.key,
                format!("{what} must be positive (got {value})"),
            ))
        }
    };
    match field {
        "bus" => agg.bus = entry.value.clone(),
        "units" => {
            let n = parse_usize(entry, &entry.value)?;
            if n == 0 {
                return Err(ConfigError::new(
                    entry.line,
                    &entry.key,
                    "unit count must be at least 1",
                ));
            }
            agg.units = n;
        }
        "s_rated_kva" => agg.s_rated_kva = positive(parse_f64(entry, &entry.value)?, "rating")?,
        "p_stc_kw" => agg.p_stc_kw = positive(parse_f64(entry, &entry.value)?, "p_stc")?,
        "mode" => {
            agg.mode = ModeKind::parse(&entry.value).ok_or_else(|| {
                ConfigError::new(
                    entry.line,
                    &entry.key,
                    format!("unknown mode {:?} (cpf | volt_var | volt_watt)", entry.value),
                )
            })?;
        }
        "cpf_pf" => {
            let pf = parse_f64(entry, &entry.value)?;
            if !(pf > 0.0 && pf <= 1.0) {
                return Err(ConfigError::new(
                    entry.line,
                    &entry.key,
                    format!("power factor must be in (0, 1] (got {pf})"),
                ));
            }
            agg.cpf_pf = pf;
        }
        "cpf_absorbs" => agg.cpf_absorbs = parse_bool(entry)?,
        "v1" => agg.v1 = Some(parse_f64(entry, &entry.value)?),
        "v_ref" => agg.v_ref = Some(parse_f64(entry, &entry.value)?),
        "v2" => agg.v2 = Some(parse_f64(entry, &entry.value)?),
        "q_max_kvar" => agg.q_max_kvar = Some(positive(parse_f64(entry, &entry.value)?, "q_max")?),
        "ramp_pu_per_s" => {
            agg.ramp_pu_per_s = positive(parse_f64(entry, &entry.value)?, "ramp limit")?
        }
        "filter_tau_s" => {
            let tau = parse_f64(entry, &entry.value)?;
            if tau < 0.0 {
                return Err(ConfigError::new(
                    entry.line,
                    &entry.key,
                    format!("filter time constant must be non-negative (got {tau})"),
                ));
            }
            agg.filter_tau_s = tau;
        }
        _ => {
            return Err(ConfigError::new(
                entry.line,
                &entry.key,
                "unknown key".to_string(),
            ))
        }
    }
    Ok(())
}

fn parse_line_row(entry: &RawEntry) -> Result<LineSegment, ConfigError> {
    let tokens: Vec<&str> = entry.value.split_whitespace().collect();
    let bad = |msg: &str| ConfigError::new(entry.line, &entry.key, msg.to_string());
    match tokens.as_slice() {
        [from, to, "ug1", length] => {
            Ok(LineSegment::ug1(*from, *to, parse_f64(entry, length)? / 1e3))
        }
        [from, to, "ug3", length] => {
            Ok(LineSegment::ug3(*from, *to, parse_f64(entry, length)? / 1e3))
        }
        [from, to, "custom", r, l, length] => Ok(LineSegment::custom(
            *from,
            *to,
            parse_f64(entry, r)?,
            parse_f64(entry, l)?,
            parse_f64(entry, length)? / 1e3,
        )),
        _ => Err(bad(
            "expected `<from> <to> ug1|ug3 <length_m>` or `<from> <to> custom <r> <l> <length_m>`",
        )),
    }
}

fn parse_event_row(entry: &RawEntry) -> Result<Event, ConfigError> {
    let tokens: Vec<&str> = entry.value.split_whitespace().collect();
    let bad = |msg: String| ConfigError::new(entry.line, &entry.key, msg);
    if tokens.len() != 2 {
        return Err(bad(format!(
            "expected `t=<s> irradiance=<f>` or `t=<s> slack_v=<pu>`, got {:?}",
            entry.value
        )));
    }
    let time_tok = tokens[0]
        .strip_prefix("t=")
        .ok_or_else(|| bad(format!("event must start with t=, got {:?}", tokens[0])))?;
    let time_s = parse_f64(entry, time_tok)?;
    let action = if let Some(v) = tokens[1].strip_prefix("irradiance=") {
        EventAction::SetIrradiance(parse_f64(entry, v)?)
    } else if let Some(v) = tokens[1].strip_prefix("slack_v=") {
        EventAction::SetSlackVoltage(parse_f64(entry, v)?)
    } else {
        return Err(bad(format!("unknown event field {:?}", tokens[1])));
    };
    Ok(Event { time_s, action })
}

/// Parses a scenario configuration. Missing keys take their documented
/// defaults; any unknown key, malformed number or violated invariant is an
/// error naming the line and key.
pub fn parse_config(text: &str) -> Result<ScenarioSpec, ConfigError> {
    let mut variant = NetworkVariant::Resistive;
    let mut a1 = AggregatorConfig::default_a1();
    let mut a2 = AggregatorConfig::default_a2();
    let mut over = NetworkOverride::default();
    let mut dt = (0.01, 0usize);
    let mut duration = (20.0, 0usize);
    let mut events: Vec<(Event, usize)> = Vec::new();
    let mut timeline_touched = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            ConfigError::new(line_no, content, "expected `key = value`".to_string())
        })?;
        let entry = RawEntry {
            line: line_no,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        };
        let (section, field) = entry.key.split_once('.').ok_or_else(|| {
            ConfigError::new(
                entry.line,
                &entry.key,
                "expected a section.key name".to_string(),
            )
        })?;

        match (section, field) {
            ("network", "variant") => {
                variant = match entry.value.as_str() {
                    "resistive" => NetworkVariant::Resistive,
                    "inductive" => NetworkVariant::Inductive,
                    other => {
                        return Err(ConfigError::new(
                            entry.line,
                            &entry.key,
                            format!("unknown variant {other:?} (resistive | inductive)"),
                        ))
                    }
                };
            }
            ("network", "bus") => {
                let tokens: Vec<&str> = entry.value.split_whitespace().collect();
                match tokens.as_slice() {
                    [id] => over.buses.push(Bus::new(*id)),
                    [id, nominal] => {
                        let mut bus = Bus::new(*id);
                        bus.nominal_voltage_v = parse_f64(&entry, nominal)?;
                        over.buses.push(bus);
                    }
                    _ => {
                        return Err(ConfigError::new(
                            entry.line,
                            &entry.key,
                            "expected `<id> [nominal_v]`".to_string(),
                        ))
                    }
                }
            }
            ("network", "line") => over.lines.push(parse_line_row(&entry)?),
            ("network", "load") => {
                let tokens: Vec<&str> = entry.value.split_whitespace().collect();
                if let [bus, kw, kvar] = tokens.as_slice() {
                    over.loads.push(Load::new(
                        *bus,
                        parse_f64(&entry, kw)?,
                        parse_f64(&entry, kvar)?,
                    ));
                } else {
                    return Err(ConfigError::new(
                        entry.line,
                        &entry.key,
                        "expected `<bus> <kw> <kvar>`".to_string(),
                    ));
                }
            }
            ("network", "slack_bus") => over.slack_bus = Some(entry.value.clone()),
            ("a1", f) => apply_aggregator_key(&mut a1, f, &entry)?,
            ("a2", f) => apply_aggregator_key(&mut a2, f, &entry)?,
            ("timeline", "dt") => {
                let value = parse_f64(&entry, &entry.value)?;
                if value <= 0.0 {
                    return Err(ConfigError::new(
                        entry.line,
                        &entry.key,
                        format!("dt must be positive (got {value})"),
                    ));
                }
                dt = (value, entry.line);
                timeline_touched = true;
            }
            ("timeline", "duration") => {
                let value = parse_f64(&entry, &entry.value)?;
                if value < 0.0 {
                    return Err(ConfigError::new(
                        entry.line,
                        &entry.key,
                        format!("duration must be non-negative (got {value})"),
                    ));
                }
                duration = (value, entry.line);
                timeline_touched = true;
            }
            ("timeline", "event") => {
                events.push((parse_event_row(&entry)?, entry.line));
                timeline_touched = true;
            }
            _ => {
                return Err(ConfigError::new(
                    entry.line,
                    &entry.key,
                    "unknown key".to_string(),
                ))
            }
        }
    }

    let timeline = if timeline_touched {
        let event_line = events.first().map(|(_, l)| *l).unwrap_or(dt.1.max(duration.1));
        ScenarioTimeline::new(
            events.into_iter().map(|(e, _)| e).collect(),
            duration.0,
            dt.0,
        )
        .map_err(|e| ConfigError::new(event_line.max(1), "timeline", e.to_string()))?
    } else {
        default_timeline()
    };

    // curve invariants surface now rather than at run time
    for agg in [&a1, &a2] {
        agg.control_mode().map_err(|e| {
            ConfigError::new(0, format!("{}.mode", agg.id.to_lowercase()), e.to_string())
        })?;
    }
    if !over.is_empty() {
        over.build()
            .map_err(|e| ConfigError::new(0, "network", e))?;
    }

    Ok(ScenarioSpec {
        variant,
        a1,
        a2,
        timeline,
        network_override: (!over.is_empty()).then_some(over),
    })
}

/// Canonical text form of a spec; parsing it back yields an equal spec.
pub fn serialize_config(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "network.variant = {}", spec.variant.label());
    if let Some(over) = &spec.network_override {
        for bus in &over.buses {
            let _ = writeln!(out, "network.bus = {} {}", bus.id, bus.nominal_voltage_v);
        }
        for line in &over.lines {
            match line.cable_type {
                crate::network::CableType::Ug1 => {
                    let _ = writeln!(
                        out,
                        "network.line = {} {} ug1 {}",
                        line.from_bus,
                        line.to_bus,
                        line.length_km * 1e3
                    );
                }
                crate::network::CableType::Ug3 => {
                    let _ = writeln!(
                        out,
                        "network.line = {} {} ug3 {}",
                        line.from_bus,
                        line.to_bus,
                        line.length_km * 1e3
                    );
                }
                crate::network::CableType::Custom => {
                    let _ = writeln!(
                        out,
                        "network.line = {} {} custom {} {} {}",
                        line.from_bus,
                        line.to_bus,
                        line.resistance_ohm_per_km,
                        line.inductance_mh_per_km,
                        line.length_km * 1e3
                    );
                }
            }
        }
        for load in &over.loads {
            let _ = writeln!(
                out,
                "network.load = {} {} {}",
                load.bus, load.active_power_kw, load.reactive_power_kvar
            );
        }
        if let Some(slack) = &over.slack_bus {
            let _ = writeln!(out, "network.slack_bus = {slack}");
        }
    }
    for agg in [&spec.a1, &spec.a2] {
        let section = agg.id.to_lowercase();
        let _ = writeln!(out, "{section}.bus = {}", agg.bus);
        let _ = writeln!(out, "{section}.units = {}", agg.units);
        let _ = writeln!(out, "{section}.s_rated_kva = {}", agg.s_rated_kva);
        let _ = writeln!(out, "{section}.p_stc_kw = {}", agg.p_stc_kw);
        let _ = writeln!(out, "{section}.mode = {}", agg.mode.label());
        let _ = writeln!(out, "{section}.cpf_pf = {}", agg.cpf_pf);
        let _ = writeln!(out, "{section}.cpf_absorbs = {}", agg.cpf_absorbs);
        for (key, value) in [
            ("v1", agg.v1),
            ("v_ref", agg.v_ref),
            ("v2", agg.v2),
            ("q_max_kvar", agg.q_max_kvar),
        ] {
            if let Some(v) = value {
                let _ = writeln!(out, "{section}.{key} = {v}");
            }
        }
        let _ = writeln!(out, "{section}.ramp_pu_per_s = {}", agg.ramp_pu_per_s);
        let _ = writeln!(out, "{section}.filter_tau_s = {}", agg.filter_tau_s);
    }
    let _ = writeln!(out, "timeline.dt = {}", spec.timeline.dt_s);
    let _ = writeln!(out, "timeline.duration = {}", spec.timeline.duration_s);
    for event in &spec.timeline.events {
        match event.action {
            EventAction::SetIrradiance(f) => {
                let _ = writeln!(out, "timeline.event = t={} irradiance={}", event.time_s, f);
            }
            EventAction::SetSlackVoltage(v) => {
                let _ = writeln!(out, "timeline.event = t={} slack_v={}", event.time_s, v);
            }
        }
    }
    out
}
