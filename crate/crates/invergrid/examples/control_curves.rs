//! Prints the volt-var and volt-watt control characteristics over a voltage
//! sweep, plus the constant-power-factor operating point.

use invergrid::inverter::{cpf_setpoint, volt_var_q, volt_watt_p};
use invergrid::{VoltVarCurve, VoltWattCurve};

fn main() {
    let vv = VoltVarCurve::default_for(10.0);
    let vw = VoltWattCurve::default_for(9.5);

    println!(
        "volt-var:  v1={} v_ref={} v2={}  q_max={} kVAR  droop={:.1} kVAR/pu",
        vv.v1, vv.v_ref, vv.v2, vv.q_max_kvar, vv.droop
    );
    println!(
        "volt-watt: v_ref={} v2={}  p_rated={} kW  droop={:.1} kW/pu",
        vw.v_ref, vw.v2, vw.p_rated_kw, vw.droop
    );

    println!("\n   v_pu    vv_q_kvar    vw_p_kw");
    let mut v = 0.90;
    while v <= 1.1501 {
        println!(
            "  {:.3}    {:>9.3}    {:>7.3}",
            v,
            volt_var_q(&vv, v),
            volt_watt_p(&vw, v, 9.5)
        );
        v += 0.01;
    }

    let cpf = cpf_setpoint(9.5, 0.95, true, false).unwrap();
    println!(
        "\ncpf 0.95 lagging at full sun: p = {:.3} kW, q = {:.4} kVAR (|s| = {:.3} kVA)",
        cpf.p,
        cpf.q,
        cpf.apparent()
    );
}
