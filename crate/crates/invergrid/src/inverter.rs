//! Smart-inverter unit model: PV availability, the three grid-support modes
//! (constant power factor, volt-var, volt-watt), ramp-rate limiting,
//! apparent-power clamping and a first-order measurement filter. Units are
//! grouped into aggregators that share one host bus and one control mode.
//!
//! Sign convention is injection-positive throughout: positive `q` means the
//! inverter feeds reactive power into the grid.

use crate::powerflow::ComplexPower;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InverterError {
    #[error("irradiance fraction {0} outside [0, 1]")]
    IrradianceOutOfRange(f64),
    #[error("power factor {0} outside (0, 1]")]
    PowerFactorOutOfRange(f64),
    #[error("invalid control curve: {0}")]
    InvalidCurve(String),
    #[error("invalid inverter parameter: {0}")]
    InvalidParameter(String),
    #[error("aggregator {0} has no units")]
    EmptyAggregator(String),
}

/// Reactive-power droop curve. Monotone non-increasing: full injection
/// `q_max` at and below `v1`, full absorption `-q_max` at and above `v2`,
/// linear in between and zero at `v_ref`. Breakpoints must be symmetric
/// about `v_ref` so the saturation branches meet the slope continuously;
/// the droop gain is derived as `-q_max / (v2 - v_ref)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltVarCurve {
    pub v1: f64,
    pub v_ref: f64,
    pub v2: f64,
    pub q_max_kvar: f64,
    /// kVAR per pu voltage, negative.
    pub droop: f64,
}

impl VoltVarCurve {
    pub fn new(v1: f64, v_ref: f64, v2: f64, q_max_kvar: f64) -> Result<Self, InverterError> {
        if !(v1 < v_ref && v_ref < v2) {
            return Err(InverterError::InvalidCurve(format!(
                "volt-var breakpoints must satisfy v1 < v_ref < v2 (got {v1}, {v_ref}, {v2})"
            )));
        }
        if q_max_kvar <= 0.0 {
            return Err(InverterError::InvalidCurve(format!(
                "q_max must be positive (got {q_max_kvar})"
            )));
        }
        if ((v_ref - v1) - (v2 - v_ref)).abs() > 1e-9 {
            return Err(InverterError::InvalidCurve(format!(
                "volt-var breakpoints must be symmetric about v_ref \
                 (v_ref - v1 = {}, v2 - v_ref = {})",
                v_ref - v1,
                v2 - v_ref
            )));
        }
        Ok(Self {
            v1,
            v_ref,
            v2,
            q_max_kvar,
            droop: -q_max_kvar / (v2 - v_ref),
        })
    }

    /// 0.95 / 1.00 / 1.05 pu breakpoints with q_max at 44 % of the rating.
    pub fn default_for(s_rated_kva: f64) -> Self {
        Self::new(0.95, 1.0, 1.05, 0.44 * s_rated_kva).expect("default curve is valid")
    }
}

/// Active-power curtailment curve: full output at and below `v_ref`, zero at
/// and above `v2`, linear in between. The droop gain `p_rated / (v2 - v_ref)`
/// makes all three branches continuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltWattCurve {
    pub v_ref: f64,
    pub v2: f64,
    pub p_rated_kw: f64,
    /// kW per pu voltage, positive.
    pub droop: f64,
}

impl VoltWattCurve {
    pub fn new(v_ref: f64, v2: f64, p_rated_kw: f64) -> Result<Self, InverterError> {
        if v_ref >= v2 {
            return Err(InverterError::InvalidCurve(format!(
                "volt-watt breakpoints must satisfy v_ref < v2 (got {v_ref}, {v2})"
            )));
        }
        if p_rated_kw <= 0.0 {
            return Err(InverterError::InvalidCurve(format!(
                "p_rated must be positive (got {p_rated_kw})"
            )));
        }
        Ok(Self {
            v_ref,
            v2,
            p_rated_kw,
            droop: p_rated_kw / (v2 - v_ref),
        })
    }

    /// 1.05 / 1.10 pu breakpoints at the unit's full-sun rating.
    pub fn default_for(p_rated_kw: f64) -> Self {
        Self::new(1.05, 1.10, p_rated_kw).expect("default curve is valid")
    }
}

/// Grid-support mode of one inverter unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlMode {
    /// Fixed ratio of active to apparent power. `lagging` selects the
    /// nominal reactive direction; `absorbs` flips the convention for
    /// installations where "lagging" is wired as var absorption.
    ConstantPowerFactor {
        pf: f64,
        lagging: bool,
        absorbs: bool,
    },
    VoltVar(VoltVarCurve),
    VoltWatt(VoltWattCurve),
}

impl ControlMode {
    pub fn cpf(pf: f64) -> Self {
        ControlMode::ConstantPowerFactor {
            pf,
            lagging: true,
            absorbs: false,
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            ControlMode::ConstantPowerFactor { .. } => "cpf",
            ControlMode::VoltVar(_) => "volt_var",
            ControlMode::VoltWatt(_) => "volt_watt",
        }
    }
}

/// DC-side power available at the given irradiance fraction.
pub fn pv_available_power(p_stc_kw: f64, irradiance_frac: f64) -> Result<f64, InverterError> {
    if !(0.0..=1.0).contains(&irradiance_frac) {
        return Err(InverterError::IrradianceOutOfRange(irradiance_frac));
    }
    Ok(irradiance_frac * p_stc_kw)
}

/// Constant-power-factor setpoint: `p = p_avail`, `|q| = p * tan(acos(pf))`.
/// Under the injection-positive generator convention, lagging operation
/// injects reactive power unless `absorbs` flips the sign.
pub fn cpf_setpoint(
    p_avail_kw: f64,
    pf: f64,
    lagging: bool,
    absorbs: bool,
) -> Result<ComplexPower, InverterError> {
    if !(pf > 0.0 && pf <= 1.0) {
        return Err(InverterError::PowerFactorOutOfRange(pf));
    }
    let q_mag = p_avail_kw * (pf.acos()).tan();
    let mut sign = if lagging { 1.0 } else { -1.0 };
    if absorbs {
        sign = -sign;
    }
    Ok(ComplexPower::new(p_avail_kw, sign * q_mag))
}

/// Reactive command of the volt-var curve at the given voltage.
pub fn volt_var_q(curve: &VoltVarCurve, v_pu: f64) -> f64 {
    if v_pu <= curve.v1 {
        curve.q_max_kvar
    } else if v_pu >= curve.v2 {
        -curve.q_max_kvar
    } else {
        curve.droop * (v_pu - curve.v_ref)
    }
}

/// Active command of the volt-watt curve at the given voltage, capped by the
/// currently available PV power.
pub fn volt_watt_p(curve: &VoltWattCurve, v_pu: f64, p_avail_kw: f64) -> f64 {
    let curve_value = if v_pu <= curve.v_ref {
        curve.p_rated_kw
    } else if v_pu >= curve.v2 {
        0.0
    } else {
        (curve.p_rated_kw - curve.droop * (v_pu - curve.v_ref)).max(0.0)
    };
    curve_value.min(p_avail_kw)
}

/// Moves each axis of `prev` toward `target` by at most
/// `ramp * s_rated * dt`, reaching the target exactly once within budget.
pub fn ramp_limit(
    prev: ComplexPower,
    target: ComplexPower,
    ramp_pu_per_s: f64,
    s_rated_kva: f64,
    dt_s: f64,
) -> ComplexPower {
    let budget = ramp_pu_per_s * s_rated_kva * dt_s;
    let step = |from: f64, to: f64| from + (to - from).clamp(-budget, budget);
    ComplexPower::new(step(prev.p, target.p), step(prev.q, target.q))
}

/// Shrinks a setpoint onto the apparent-power circle `p^2 + q^2 <= s^2`.
/// Volt-var mode keeps its reactive command and gives up active power; the
/// other modes keep active power and give up vars.
pub fn capability_clamp(
    setpoint: ComplexPower,
    s_rated_kva: f64,
    mode: &ControlMode,
) -> ComplexPower {
    let s2 = s_rated_kva * s_rated_kva;
    if setpoint.p * setpoint.p + setpoint.q * setpoint.q <= s2 {
        return setpoint;
    }
    let q_priority = matches!(mode, ControlMode::VoltVar(_));
    if q_priority {
        let q = setpoint.q.clamp(-s_rated_kva, s_rated_kva);
        let p_room = (s2 - q * q).max(0.0).sqrt();
        ComplexPower::new(setpoint.p.clamp(-p_room, p_room), q)
    } else {
        let p = setpoint.p.clamp(-s_rated_kva, s_rated_kva);
        let q_room = (s2 - p * p).max(0.0).sqrt();
        ComplexPower::new(p, setpoint.q.clamp(-q_room, q_room))
    }
}

/// One inverter with its control mode and discrete-time state (last command
/// and filtered terminal voltage). A unit belongs to exactly one simulation
/// run; stepping it mutates that state.
#[derive(Debug, Clone, PartialEq)]
pub struct InverterUnit {
    pub s_rated_kva: f64,
    pub p_stc_kw: f64,
    pub mode: ControlMode,
    pub ramp_pu_per_s: f64,
    /// Measurement low-pass time constant; zero disables the filter.
    pub filter_tau_s: f64,
    state: ComplexPower,
    filtered_v: Option<f64>,
}

impl InverterUnit {
    pub fn new(
        s_rated_kva: f64,
        p_stc_kw: f64,
        mode: ControlMode,
        ramp_pu_per_s: f64,
        filter_tau_s: f64,
    ) -> Result<Self, InverterError> {
        if s_rated_kva <= 0.0 {
            return Err(InverterError::InvalidParameter(format!(
                "s_rated must be positive (got {s_rated_kva})"
            )));
        }
        if !(p_stc_kw > 0.0 && p_stc_kw <= s_rated_kva) {
            return Err(InverterError::InvalidParameter(format!(
                "p_stc must be in (0, s_rated] (got {p_stc_kw} of {s_rated_kva})"
            )));
        }
        if ramp_pu_per_s <= 0.0 {
            return Err(InverterError::InvalidParameter(format!(
                "ramp limit must be positive (got {ramp_pu_per_s})"
            )));
        }
        if filter_tau_s < 0.0 {
            return Err(InverterError::InvalidParameter(format!(
                "filter time constant must be non-negative (got {filter_tau_s})"
            )));
        }
        Ok(Self {
            s_rated_kva,
            p_stc_kw,
            mode,
            ramp_pu_per_s,
            filter_tau_s,
            state: ComplexPower::default(),
            filtered_v: None,
        })
    }

    /// Default 10 kVA unit: 9.5 kW at full sun so that 0.95-pf operation
    /// exactly fills the rating circle.
    pub fn default_unit(mode: ControlMode) -> Self {
        Self::new(10.0, 9.5, mode, 2.0, 0.1).expect("default unit is valid")
    }

    pub fn last_command(&self) -> ComplexPower {
        self.state
    }

    /// Exact discretisation of the first-order lag for a piecewise-constant
    /// input, so trajectories agree at common sample times across step sizes.
    fn filter_voltage(&mut self, v_pu: f64, dt_s: f64) -> f64 {
        if self.filter_tau_s <= 0.0 {
            return v_pu;
        }
        let vf = self.filtered_v.get_or_insert(v_pu);
        let alpha = 1.0 - (-dt_s / self.filter_tau_s).exp();
        *vf += alpha * (v_pu - *vf);
        *vf
    }

    fn mode_target(&self, v_pu: f64, p_avail_kw: f64) -> Result<ComplexPower, InverterError> {
        Ok(match &self.mode {
            ControlMode::ConstantPowerFactor {
                pf,
                lagging,
                absorbs,
            } => cpf_setpoint(p_avail_kw, *pf, *lagging, *absorbs)?,
            ControlMode::VoltVar(curve) => {
                ComplexPower::new(p_avail_kw, volt_var_q(curve, v_pu))
            }
            ControlMode::VoltWatt(curve) => {
                ComplexPower::new(volt_watt_p(curve, v_pu, p_avail_kw), 0.0)
            }
        })
    }

    /// Seeds the ramp and filter state with the settled command for the given
    /// ambient conditions, as if the unit had been running steadily.
    pub fn warm_start(&mut self, v_pu: f64, irradiance_frac: f64) -> Result<(), InverterError> {
        let p_avail = pv_available_power(self.p_stc_kw, irradiance_frac)?;
        let target = self.mode_target(v_pu, p_avail)?;
        self.state = capability_clamp(target, self.s_rated_kva, &self.mode);
        self.filtered_v = Some(v_pu);
        Ok(())
    }

    /// One control update: filter the measurement, evaluate the mode target,
    /// ramp from the stored command, clamp to the rating, store and return.
    pub fn step(
        &mut self,
        v_pcc_pu: f64,
        irradiance_frac: f64,
        dt_s: f64,
    ) -> Result<ComplexPower, InverterError> {
        let p_avail = pv_available_power(self.p_stc_kw, irradiance_frac)?;
        let v_meas = self.filter_voltage(v_pcc_pu, dt_s);
        let target = self.mode_target(v_meas, p_avail)?;
        let ramped = ramp_limit(self.state, target, self.ramp_pu_per_s, self.s_rated_kva, dt_s);
        let command = capability_clamp(ramped, self.s_rated_kva, &self.mode);
        self.state = command;
        Ok(command)
    }
}

/// A group of co-located inverters operated under one control mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregator {
    pub id: String,
    pub bus: String,
    pub units: Vec<InverterUnit>,
}

impl Aggregator {
    pub fn new(
        id: impl Into<String>,
        bus: impl Into<String>,
        units: Vec<InverterUnit>,
    ) -> Result<Self, InverterError> {
        let id = id.into();
        if units.is_empty() {
            return Err(InverterError::EmptyAggregator(id));
        }
        Ok(Self {
            id,
            bus: bus.into(),
            units,
        })
    }

    pub fn warm_start(&mut self, v_pu: f64, irradiance_frac: f64) -> Result<(), InverterError> {
        for unit in &mut self.units {
            unit.warm_start(v_pu, irradiance_frac)?;
        }
        Ok(())
    }

    /// Total injection of the group for this step (kW / kVAR).
    pub fn step(
        &mut self,
        v_pcc_pu: f64,
        irradiance_frac: f64,
        dt_s: f64,
    ) -> Result<ComplexPower, InverterError> {
        let mut total = ComplexPower::default();
        for unit in &mut self.units {
            total += unit.step(v_pcc_pu, irradiance_frac, dt_s)?;
        }
        Ok(total)
    }
}
