//! Radial AC power flow by backward/forward sweep, plus the closed-form
//! two-bus voltage-drop and sensitivity diagnostics that explain why active
//! power dominates voltage in resistive feeders and reactive power in
//! inductive ones.

use crate::network::{line_impedance_pu, NetworkModel};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PowerFlowError {
    #[error("voltage magnitude is zero; constant-power current is singular")]
    SingularVoltage,
    #[error("network is not radial or not connected: {0}")]
    Topology(String),
    #[error("injection references unknown bus {0}")]
    UnknownBus(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Net complex power at a bus, injection positive. Unit-agnostic: the solver
/// works in per-unit, the inverter layer in kW/kVAR.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexPower {
    pub p: f64,
    pub q: f64,
}

impl ComplexPower {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.p, self.q)
    }

    pub fn apparent(self) -> f64 {
        self.p.hypot(self.q)
    }
}

impl std::ops::Add for ComplexPower {
    type Output = ComplexPower;
    fn add(self, rhs: ComplexPower) -> ComplexPower {
        ComplexPower::new(self.p + rhs.p, self.q + rhs.q)
    }
}

impl std::ops::AddAssign for ComplexPower {
    fn add_assign(&mut self, rhs: ComplexPower) {
        self.p += rhs.p;
        self.q += rhs.q;
    }
}

impl std::ops::Sub for ComplexPower {
    type Output = ComplexPower;
    fn sub(self, rhs: ComplexPower) -> ComplexPower {
        ComplexPower::new(self.p - rhs.p, self.q - rhs.q)
    }
}

impl std::ops::Neg for ComplexPower {
    type Output = ComplexPower;
    fn neg(self) -> ComplexPower {
        ComplexPower::new(-self.p, -self.q)
    }
}

/// Bus voltage as magnitude (pu) and angle (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltagePhasor {
    pub magnitude: f64,
    pub angle_rad: f64,
}

impl VoltagePhasor {
    pub fn new(magnitude: f64, angle_rad: f64) -> Self {
        Self {
            magnitude,
            angle_rad,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.angle_rad)
    }

    pub fn from_complex(v: Complex64) -> Self {
        Self {
            magnitude: v.norm(),
            angle_rad: v.arg(),
        }
    }
}

/// Line current drawn by a constant-power injection: `i = conj(s / v)`,
/// evaluated with the full complex phasor.
pub fn branch_current(s: ComplexPower, v: VoltagePhasor) -> Result<Complex64, PowerFlowError> {
    if v.magnitude <= 0.0 {
        return Err(PowerFlowError::SingularVoltage);
    }
    Ok((s.to_complex() / v.to_complex()).conj())
}

/// Complex series voltage drop split into its magnitude-driving real part
/// `(p*r + q*x)/|v|` and angle-driving imaginary part `(p*x - q*r)/|v|`.
pub fn voltage_drop_complex(
    s: ComplexPower,
    v: VoltagePhasor,
    z: Complex64,
) -> Result<Complex64, PowerFlowError> {
    if v.magnitude <= 0.0 {
        return Err(PowerFlowError::SingularVoltage);
    }
    let (r, x) = (z.re, z.im);
    Ok(Complex64::new(
        (s.p * r + s.q * x) / v.magnitude,
        (s.p * x - s.q * r) / v.magnitude,
    ))
}

/// Scalar drop approximation `(p*r + q*x)/|v|`, valid when the angle part is
/// negligible (r >> x feeders with small drops).
pub fn voltage_drop_magnitude(
    s: ComplexPower,
    v: VoltagePhasor,
    z: Complex64,
) -> Result<f64, PowerFlowError> {
    if v.magnitude <= 0.0 {
        return Err(PowerFlowError::SingularVoltage);
    }
    Ok((s.p * z.re + s.q * z.im) / v.magnitude)
}

/// Small-signal sensitivities of the drop magnitude to active and reactive
/// injections: `(r/|v|, x/|v|)`.
pub fn sensitivity(z: Complex64, v: VoltagePhasor) -> Result<(f64, f64), PowerFlowError> {
    if v.magnitude <= 0.0 {
        return Err(PowerFlowError::SingularVoltage);
    }
    Ok((z.re / v.magnitude, z.im / v.magnitude))
}

/// Which of active or reactive power dominates the voltage response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeClass {
    ResistiveDominant,
    InductiveDominant,
    Mixed,
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 2.0;

/// Classifies the feeder by the mean per-line R/X ratio (zero-impedance ties
/// are skipped). Resistive wins when both conditions hold.
pub fn classify_regime_with(net: &NetworkModel, threshold: f64) -> RegimeClass {
    let mut r_over_x_sum = 0.0;
    let mut x_over_r_sum = 0.0;
    let mut count = 0usize;
    for line in &net.lines {
        let r = line.resistance_ohm_per_km;
        let x = line.reactance_ohm_per_km(net.frequency_hz);
        if r == 0.0 && x == 0.0 {
            continue;
        }
        r_over_x_sum += r / x;
        x_over_r_sum += x / r;
        count += 1;
    }
    if count == 0 {
        return RegimeClass::Mixed;
    }
    let n = count as f64;
    if r_over_x_sum / n > threshold {
        RegimeClass::ResistiveDominant
    } else if x_over_r_sum / n > threshold {
        RegimeClass::InductiveDominant
    } else {
        RegimeClass::Mixed
    }
}

pub fn classify_regime(net: &NetworkModel) -> RegimeClass {
    classify_regime_with(net, DEFAULT_REGIME_THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on the max per-bus voltage change (pu).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Any bus voltage below this is treated as collapse, not an error.
    pub collapse_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 50,
            collapse_threshold: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    pub voltages: BTreeMap<String, VoltagePhasor>,
    /// Power injected by the slack source at the slack bus (pu).
    pub slack_injection: ComplexPower,
    /// Total series losses (pu); the reactive part is line var absorption.
    pub losses: ComplexPower,
    pub iterations: usize,
    pub converged: bool,
    /// Max per-bus voltage change of the last sweep (pu).
    pub max_mismatch: f64,
}

struct RadialTree {
    ids: Vec<String>,
    /// Parent index and impedance of the line to the parent, per bus.
    parent: Vec<Option<usize>>,
    branch_z: Vec<Complex64>,
    /// Breadth-first order starting at the slack bus.
    order: Vec<usize>,
    slack: usize,
}

fn build_tree(net: &NetworkModel) -> Result<RadialTree, PowerFlowError> {
    let n = net.buses.len();
    if net.lines.len() != n.saturating_sub(1) {
        return Err(PowerFlowError::Topology(format!(
            "{} lines for {} buses",
            net.lines.len(),
            n
        )));
    }
    let ids: Vec<String> = net.buses.iter().map(|b| b.id.clone()).collect();
    let mut index = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(PowerFlowError::Topology(format!("duplicate bus id {id}")));
        }
    }
    let slack = *index
        .get(&net.slack.bus)
        .ok_or_else(|| PowerFlowError::Topology(format!("unknown slack bus {}", net.slack.bus)))?;

    let mut adjacency: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for line in &net.lines {
        let a = *index
            .get(&line.from_bus)
            .ok_or_else(|| PowerFlowError::Topology(format!("unknown bus {}", line.from_bus)))?;
        let b = *index
            .get(&line.to_bus)
            .ok_or_else(|| PowerFlowError::Topology(format!("unknown bus {}", line.to_bus)))?;
        let z = line_impedance_pu(line, net.base_power_kva, net.base_voltage_v, net.frequency_hz)
            .map_err(|e| PowerFlowError::InvalidArgument(e.to_string()))?;
        adjacency[a].push((b, z));
        adjacency[b].push((a, z));
    }

    let mut parent = vec![None; n];
    let mut branch_z = vec![Complex64::new(0.0, 0.0); n];
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    visited[slack] = true;
    order.push(slack);
    let mut head = 0;
    while head < order.len() {
        let bus = order[head];
        head += 1;
        for &(next, z) in &adjacency[bus] {
            if !visited[next] {
                visited[next] = true;
                parent[next] = Some(bus);
                branch_z[next] = z;
                order.push(next);
            }
        }
    }
    if order.len() != n {
        let missing = ids[(0..n).find(|&i| !visited[i]).unwrap()].clone();
        return Err(PowerFlowError::Topology(format!(
            "bus {missing} unreachable from slack"
        )));
    }
    Ok(RadialTree {
        ids,
        parent,
        branch_z,
        order,
        slack,
    })
}

/// Solves the radial power flow for the given net injections (pu, keyed by
/// bus id, on top of the model's own loads).
///
/// Each sweep accumulates constant-power branch currents from the leaves at
/// the current voltage iterate, then reapplies series drops from the slack.
/// Iteration stops when the max voltage change falls under the tolerance.
/// Divergence (voltage collapse or iteration cap) is reported through the
/// `converged` flag, never as an error.
pub fn solve(
    net: &NetworkModel,
    injections: &BTreeMap<String, ComplexPower>,
    opts: &SolverOptions,
) -> Result<PowerFlowSolution, PowerFlowError> {
    for bus in injections.keys() {
        if !net.has_bus(bus) {
            return Err(PowerFlowError::UnknownBus(bus.clone()));
        }
    }
    let tree = build_tree(net)?;
    let n = tree.ids.len();

    // Net injection per bus in pu: injections minus catalogue loads.
    let mut s_net = vec![Complex64::new(0.0, 0.0); n];
    for (bus, s) in injections {
        let i = tree.ids.iter().position(|id| id == bus).unwrap();
        s_net[i] += s.to_complex();
    }
    for load in &net.loads {
        if let Some(i) = tree.ids.iter().position(|id| *id == load.bus) {
            s_net[i] -= Complex64::new(load.active_power_kw, load.reactive_power_kvar)
                / net.base_power_kva;
        }
    }

    let v_set = Complex64::new(net.slack.voltage_setpoint_pu, 0.0);
    let z_src = net.slack.source_impedance_ohm / net.base_impedance_ohm();
    let mut v = vec![v_set; n];
    // Current flowing from the parent into each bus's subtree.
    let mut down = vec![Complex64::new(0.0, 0.0); n];

    let mut converged = false;
    let mut iterations = 0;
    let mut max_change = f64::INFINITY;
    while iterations < opts.max_iterations {
        iterations += 1;

        // Backward sweep: injection currents at the present voltages, summed
        // leaf-to-root.
        for i in 0..n {
            if v[i].norm() == 0.0 {
                return Err(PowerFlowError::SingularVoltage);
            }
            down[i] = -(s_net[i] / v[i]).conj();
        }
        for &bus in tree.order.iter().rev() {
            if let Some(p) = tree.parent[bus] {
                let flow = down[bus];
                down[p] += flow;
            }
        }

        // Forward sweep: slack terminal first (exact when z_src = 0), then
        // series drops in breadth-first order.
        max_change = 0.0;
        let slack_current = down[tree.slack];
        let v_new_slack = v_set - z_src * slack_current;
        max_change = max_change.max((v_new_slack - v[tree.slack]).norm());
        v[tree.slack] = v_new_slack;
        for &bus in &tree.order {
            if let Some(p) = tree.parent[bus] {
                let v_new = v[p] - tree.branch_z[bus] * down[bus];
                max_change = max_change.max((v_new - v[bus]).norm());
                v[bus] = v_new;
            }
        }

        let collapsed = v.iter().any(|vi| vi.norm() < opts.collapse_threshold);
        if collapsed {
            break;
        }
        if max_change <= opts.tolerance {
            converged = true;
            break;
        }
    }

    let mut losses = Complex64::new(0.0, 0.0);
    for (bus, flow) in down.iter().enumerate() {
        if tree.parent[bus].is_some() {
            losses += tree.branch_z[bus] * flow.norm_sqr();
        }
    }
    // What the source feeds into the slack bus: downstream flows plus the
    // local net extraction there.
    let slack_power = v[tree.slack] * down[tree.slack].conj() - s_net[tree.slack];

    let voltages = tree
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), VoltagePhasor::from_complex(v[i])))
        .collect();

    Ok(PowerFlowSolution {
        voltages,
        slack_injection: ComplexPower::new(slack_power.re, slack_power.im),
        losses: ComplexPower::new(losses.re, losses.im),
        iterations,
        converged,
        max_mismatch: max_change,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{
        build_cigre_lv_residential, to_inductive_variant, Bus, LineSegment, NetworkModel,
        SlackSource,
    };
    use proptest::prelude::*;

    fn phasor(mag: f64, ang: f64) -> VoltagePhasor {
        VoltagePhasor::new(mag, ang)
    }

    /// Two-bus test network with the line impedance given directly in pu.
    fn two_bus_net(v_slack: f64, r_pu: f64, x_pu: f64) -> NetworkModel {
        let z_base = 1.6; // 400 V, 100 kVA
        let l_mh = x_pu * z_base / (std::f64::consts::TAU * 50.0) * 1e3;
        NetworkModel {
            buses: vec![Bus::new("A"), Bus::new("B")],
            lines: vec![LineSegment::custom("A", "B", r_pu * z_base, l_mh, 1.0)],
            loads: vec![],
            slack: SlackSource::new("A", v_slack),
            frequency_hz: 50.0,
            base_power_kva: 100.0,
            base_voltage_v: 400.0,
        }
    }

    fn solve_two_bus(v_slack: f64, r_pu: f64, x_pu: f64, p_load: f64, q_load: f64) -> f64 {
        let net = two_bus_net(v_slack, r_pu, x_pu);
        let mut inj = BTreeMap::new();
        inj.insert("B".to_string(), ComplexPower::new(-p_load, -q_load));
        let sol = solve(&net, &inj, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        sol.voltages["B"].magnitude
    }

    #[test]
    fn branch_current_basics() {
        let zero = branch_current(ComplexPower::new(0.0, 0.0), phasor(1.0, 0.0)).unwrap();
        assert_eq!(zero, Complex64::new(0.0, 0.0));

        let unit = branch_current(ComplexPower::new(1.0, 0.0), phasor(1.0, 0.0)).unwrap();
        assert!((unit - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        // direct complex-arithmetic oracle
        let s = ComplexPower::new(0.5, 0.2);
        let v = phasor(0.98, -0.01);
        let got = branch_current(s, v).unwrap();
        let expect = (Complex64::new(0.5, 0.2) / Complex64::from_polar(0.98, -0.01)).conj();
        assert!((got - expect).norm() < 1e-12);

        assert!(matches!(
            branch_current(s, phasor(0.0, 0.0)),
            Err(PowerFlowError::SingularVoltage)
        ));
    }

    #[test]
    fn drop_complex_closed_form() {
        let z = Complex64::new(0.1, 0.0);
        assert_eq!(
            voltage_drop_complex(ComplexPower::new(0.0, 0.0), phasor(1.0, 0.0), z).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let d = voltage_drop_complex(ComplexPower::new(1.0, 0.0), phasor(1.0, 0.0), z).unwrap();
        assert!((d - Complex64::new(0.1, 0.0)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn drop_complex_matches_reevaluation(
            p in -1.0f64..1.0, q in -1.0f64..1.0,
            r in 0.0f64..0.5, x in 0.0f64..0.5,
            vm in 0.8f64..1.2, ang in -0.3f64..0.3,
        ) {
            let d = voltage_drop_complex(
                ComplexPower::new(p, q), phasor(vm, ang), Complex64::new(r, x)).unwrap();
            prop_assert!((d.re - (p * r + q * x) / vm).abs() < 1e-12);
            prop_assert!((d.im - (p * x - q * r) / vm).abs() < 1e-12);
        }
    }

    #[test]
    fn drop_magnitude_basics() {
        let z = Complex64::new(0.1, 0.1);
        assert_eq!(
            voltage_drop_magnitude(ComplexPower::new(0.0, 0.0), phasor(1.0, 0.0), z).unwrap(),
            0.0
        );
        let d = voltage_drop_magnitude(ComplexPower::new(1.0, 1.0), phasor(1.0, 0.0), z).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
    }

    #[test]
    fn drop_magnitude_approximates_complex_drop_for_resistive_lines() {
        // sweep the r-dominant regime (x <= 0.15 r, near-unity lagging
        // loads): the scalar form stays within 2 % of the complex magnitude
        // for drops under 0.05 pu
        let v = phasor(1.0, 0.0);
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..4 {
                    let p = 0.05 + 0.05 * i as f64;
                    let q = p * 0.15 * (j as f64 / 7.0);
                    let r = 0.02 + 0.01 * k as f64;
                    let x = r * 0.15 * (j as f64 / 7.0 + 0.1).min(1.0);
                    let s = ComplexPower::new(p, q);
                    let z = Complex64::new(r, x);
                    let approx = voltage_drop_magnitude(s, v, z).unwrap();
                    let full = voltage_drop_complex(s, v, z).unwrap().norm();
                    if full < 0.05 {
                        assert!(
                            (approx - full).abs() / full < 0.02,
                            "p={p} q={q} r={r} x={x}: approx {approx} vs {full}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sensitivity_pair() {
        let (dp, dq) = sensitivity(Complex64::new(0.1, 0.02), phasor(1.0, 0.0)).unwrap();
        assert_eq!(dp, 0.1);
        assert_eq!(dq, 0.02);

        // inductive rule x = 5r makes dq five times dp
        let (dp, dq) = sensitivity(Complex64::new(0.04, 0.2), phasor(0.97, 0.0)).unwrap();
        assert!((dq - 5.0 * dp).abs() < 1e-15);
    }

    #[test]
    fn sensitivity_matches_finite_difference_of_drop_magnitude() {
        let z = Complex64::new(0.08, 0.03);
        let v = phasor(0.99, 0.0);
        let (dp, dq) = sensitivity(z, v).unwrap();
        let h = 1e-4;
        let f = |p: f64, q: f64| {
            voltage_drop_magnitude(ComplexPower::new(p, q), v, z).unwrap()
        };
        let fd_p = (f(0.5 + h, 0.2) - f(0.5 - h, 0.2)) / (2.0 * h);
        let fd_q = (f(0.5, 0.2 + h) - f(0.5, 0.2 - h)) / (2.0 * h);
        assert!((fd_p - dp).abs() < 1e-6);
        assert!((fd_q - dq).abs() < 1e-6);
    }

    #[test]
    fn regime_classification() {
        let net = build_cigre_lv_residential();
        // independent arithmetic from the cable catalogue
        let x_ug1 = std::f64::consts::TAU * 50.0 * 0.5316e-3;
        let x_ug3 = std::f64::consts::TAU * 50.0 * 1.4579e-3;
        let mean = (9.0 * (0.287 / x_ug1) + 5.0 * (1.152 / x_ug3)) / 14.0;
        assert!(mean > 2.0, "expected mean R/X above threshold, got {mean}");
        assert_eq!(classify_regime(&net), RegimeClass::ResistiveDominant);

        assert_eq!(
            classify_regime(&to_inductive_variant(&net)),
            RegimeClass::InductiveDominant
        );

        // r = x everywhere -> mixed
        let mut equal = two_bus_net(1.0, 0.1, 0.1);
        equal.lines[0].cable_type = crate::network::CableType::Custom;
        assert_eq!(classify_regime(&equal), RegimeClass::Mixed);
    }

    #[test]
    fn solve_flat_network_is_trivial() {
        let net = two_bus_net(1.03, 0.01, 0.005);
        let sol = solve(&net, &BTreeMap::new(), &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        for v in sol.voltages.values() {
            assert_eq!(v.magnitude, 1.03);
        }
        assert_eq!(sol.losses.p, 0.0);
        assert_eq!(sol.losses.q, 0.0);
    }

    #[test]
    fn solve_two_bus_matches_analytic() {
        let got = solve_two_bus(1.0, 0.01, 0.005, 0.5, 0.2);
        let expect = two_bus::load_voltage(1.0, 0.01, 0.005, 0.5, 0.2).unwrap();
        assert!(
            (got - expect).abs() <= 1e-8,
            "solver {got} vs analytic {expect}"
        );
    }

    #[test]
    fn solve_benchmark_feeder_balances_power() {
        let net = build_cigre_lv_residential();
        let sol = solve(&net, &BTreeMap::new(), &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        let total_load_p: f64 = net.loads.iter().map(|l| l.active_power_kw).sum::<f64>() / 100.0;
        let total_load_q: f64 =
            net.loads.iter().map(|l| l.reactive_power_kvar).sum::<f64>() / 100.0;
        assert!((sol.slack_injection.p - (total_load_p + sol.losses.p)).abs() <= 1e-6);
        assert!((sol.slack_injection.q - (total_load_q + sol.losses.q)).abs() <= 1e-6);
        assert!(sol.losses.p >= 0.0);
    }

    #[test]
    fn solve_rejects_non_radial_and_unknown_bus() {
        let mut net = build_cigre_lv_residential();
        net.lines.push(LineSegment::ug1("R2", "R11", 0.035));
        assert!(matches!(
            solve(&net, &BTreeMap::new(), &SolverOptions::default()),
            Err(PowerFlowError::Topology(_))
        ));

        let net = build_cigre_lv_residential();
        let mut inj = BTreeMap::new();
        inj.insert("NOPE".to_string(), ComplexPower::new(0.1, 0.0));
        assert!(matches!(
            solve(&net, &inj, &SolverOptions::default()),
            Err(PowerFlowError::UnknownBus(_))
        ));
    }

    #[test]
    fn divergence_is_reported_not_thrown() {
        // absurd load far beyond the feeder's transfer limit
        let net = two_bus_net(1.0, 0.05, 0.02);
        let mut inj = BTreeMap::new();
        inj.insert("B".to_string(), ComplexPower::new(-40.0, -15.0));
        let sol = solve(&net, &inj, &SolverOptions::default()).unwrap();
        assert!(!sol.converged);
    }

    #[test]
    fn identical_inputs_solve_bit_identically() {
        let net = build_cigre_lv_residential();
        let mut inj = BTreeMap::new();
        inj.insert("R17".to_string(), ComplexPower::new(0.475, 0.15));
        inj.insert("R18".to_string(), ComplexPower::new(0.475, 0.15));
        let a = solve(&net, &inj, &SolverOptions::default()).unwrap();
        let b = solve(&net, &inj, &SolverOptions::default()).unwrap();
        for (bus, va) in &a.voltages {
            let vb = &b.voltages[bus];
            assert_eq!(va.magnitude.to_bits(), vb.magnitude.to_bits());
            assert_eq!(va.angle_rad.to_bits(), vb.angle_rad.to_bits());
        }
        assert_eq!(a.slack_injection.p.to_bits(), b.slack_injection.p.to_bits());
    }

    proptest! {
        #[test]
        fn two_bus_oracle_equivalence(
            va in 0.95f64..1.1,
            r in 0.002f64..0.06,
            ratio in 0.2f64..5.0,
            p in 0.0f64..1.0,
            q in -0.2f64..0.5,
        ) {
            let x = r * ratio;
            if let Some(expect) = two_bus::load_voltage(va, r, x, p, q) {
                let drop = va - expect;
                prop_assume!(drop.abs() < 0.2 && expect > 0.5);
                let got = solve_two_bus(va, r, x, p, q);
                prop_assert!((got - expect).abs() <= 1e-8);
            }
        }

        #[test]
        fn voltage_monotone_along_passive_feeders(
            net in crate::network::tests::arb_radial_network()
        ) {
            let sol = solve(&net, &BTreeMap::new(), &SolverOptions::default()).unwrap();
            prop_assume!(sol.converged);
            // |v| never increases from parent to child when only loads draw
            let tree = build_tree(&net).unwrap();
            for (bus, parent) in tree.parent.iter().enumerate() {
                if let Some(p) = parent {
                    let vc = sol.voltages[&tree.ids[bus]].magnitude;
                    let vp = sol.voltages[&tree.ids[*p]].magnitude;
                    prop_assert!(vc <= vp + 1e-12, "{} above parent", tree.ids[bus]);
                }
            }
            // power balance
            let load: ComplexPower = net.loads.iter().fold(
                ComplexPower::default(),
                |acc, l| acc + ComplexPower::new(
                    l.active_power_kw / 100.0, l.reactive_power_kvar / 100.0),
            );
            prop_assert!((sol.slack_injection.p - (load.p + sol.losses.p)).abs() <= 1e-6);
            prop_assert!((sol.slack_injection.q - (load.q + sol.losses.q)).abs() <= 1e-6);
        }
    }
}
