//! Builds the benchmark residential feeder, validates it, and prints its
//! topology, load set and voltage-sensitivity regime for both line variants.

use invergrid::network::validate;
use invergrid::{build_cigre_lv_residential, classify_regime, to_inductive_variant};

fn main() {
    let net = build_cigre_lv_residential();
    let violations = validate(&net);
    println!(
        "benchmark feeder: {} buses, {} lines, {} loads (violations: {})",
        net.buses.len(),
        net.lines.len(),
        net.loads.len(),
        violations.len()
    );

    println!("\nlines (from -> to, cable, length, impedance at {} Hz):", net.frequency_hz);
    for line in &net.lines {
        let z = line.impedance_ohm(net.frequency_hz);
        println!(
            "  {:>4} -> {:<4} {:?}  {:>5.0} m   {:.4} + j{:.4} ohm",
            line.from_bus,
            line.to_bus,
            line.cable_type,
            line.length_km * 1e3,
            z.re,
            z.im
        );
    }

    println!("\nloads:");
    for load in &net.loads {
        println!(
            "  {:>4}  {:>7.2} kW  {:>6.2} kVAR",
            load.bus, load.active_power_kw, load.reactive_power_kvar
        );
    }

    println!("\nslack at {} ({} pu)", net.slack.bus, net.slack.voltage_setpoint_pu);
    println!("regime, as built:        {:?}", classify_regime(&net));
    let inductive = to_inductive_variant(&net);
    println!("regime, x = 5r variant:  {:?}", classify_regime(&inductive));
}
