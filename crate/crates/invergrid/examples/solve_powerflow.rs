//! Solves the feeder power flow with and without PV injections and prints
//! the voltage profile and the power balance.

use invergrid::{
    build_cigre_lv_residential, solve, ComplexPower, SolverOptions,
};
use std::collections::BTreeMap;

fn main() {
    let net = build_cigre_lv_residential();
    let opts = SolverOptions::default();

    let base = solve(&net, &BTreeMap::new(), &opts).expect("radial feeder");
    println!(
        "loads only: converged in {} sweeps, losses {:.4} + j{:.4} pu",
        base.iterations, base.losses.p, base.losses.q
    );

    // both aggregators at full output, 0.95 lagging
    let mut injections = BTreeMap::new();
    let q = 47.5 * (0.95f64.acos()).tan();
    injections.insert("R17".to_string(), ComplexPower::new(0.475, q / 100.0));
    injections.insert("R18".to_string(), ComplexPower::new(0.475, q / 100.0));
    let with_pv = solve(&net, &injections, &opts).expect("radial feeder");

    println!("\nbus     |v| loads-only   |v| with-pv");
    for (bus, phasor) in &base.voltages {
        println!(
            "{:>4}     {:.5}          {:.5}",
            bus,
            phasor.magnitude,
            with_pv.voltages[bus].magnitude
        );
    }

    let load_p: f64 = net.loads.iter().map(|l| l.active_power_kw).sum::<f64>() / 100.0;
    println!(
        "\npower balance (loads only): slack {:.6} pu vs load + losses {:.6} pu",
        base.slack_injection.p,
        load_p + base.losses.p
    );
}
