//! Deterministic text artifacts: the per-run CSV and the six-run matrix
//! summary report.

use crate::config::{ModeKind, ScenarioSpec};
use crate::scenario::{summarize_window, NetworkVariant, TimeSeriesRecord};
use std::fmt::Write as _;
use thiserror::Error;

/// Window over which the grid-voltage-rise phase is compared across modes.
pub const SUMMARY_WINDOW: (f64, f64) = (13.5, 16.5);

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot emit CSV for an empty record list")]
    EmptyRecordList,
    #[error("incomplete matrix: {0}")]
    IncompleteMatrix(String),
}

pub const CSV_HEADER: &str = "time_s,slack_v_pu,irradiance_frac,a1_p_kw,a1_q_kvar,a1_pf,\
a1_v_pu,a2_p_kw,a2_q_kvar,a2_pf,a2_v_pu,solver_iters,converged";

/// Shortest decimal form that parses back within 1e-9 relative, preferring at
/// most nine significant digits. Output is a pure function of the input bits.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    for digits in 1..=9usize {
        let s = format_significant(v, digits);
        if let Ok(back) = s.parse::<f64>() {
            if (back - v).abs() <= 1e-9 * v.abs() {
                return s;
            }
        }
    }
    format!("{v}")
}

fn format_significant(v: f64, digits: usize) -> String {
    let exponent = v.abs().log10().floor() as i32;
    if !(-4..=11).contains(&exponent) {
        format!("{:.*e}", digits.saturating_sub(1), v)
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

/// Renders records as CSV with the fixed column order. Byte-deterministic.
pub fn emit_csv(records: &[TimeSeriesRecord]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::EmptyRecordList);
    }
    let mut out = String::with_capacity(records.len() * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            format_number(r.time_s),
            format_number(r.slack_v_pu),
            format_number(r.irradiance_frac),
            format_number(r.a1.p_kw),
            format_number(r.a1.q_kvar),
            format_number(r.a1.pf),
            format_number(r.a1.v_pu),
            format_number(r.a2.p_kw),
            format_number(r.a2.q_kvar),
            format_number(r.a2.pf),
            format_number(r.a2.v_pu),
            r.solver_iterations,
            r.converged,
        );
    }
    Ok(out)
}

/// One completed run of the experiment matrix.
#[derive(Debug, Clone)]
pub struct MatrixRun {
    pub spec: ScenarioSpec,
    pub records: Vec<TimeSeriesRecord>,
}

impl MatrixRun {
    pub fn label(&self) -> String {
        format!("{}_{}", self.spec.variant.label(), self.spec.a2.mode.label())
    }
}

/// Per-variant table of voltage-rise-window statistics plus the ranking of
/// A2 modes by their peak PCC voltage (ties shown as ties).
pub fn emit_summary(runs: &[MatrixRun]) -> Result<String, ReportError> {
    if runs.len() != 6 {
        return Err(ReportError::IncompleteMatrix(format!(
            "expected 6 runs, got {}",
            runs.len()
        )));
    }
    for variant in [NetworkVariant::Resistive, NetworkVariant::Inductive] {
        let count = runs.iter().filter(|r| r.spec.variant == variant).count();
        if count != 3 {
            return Err(ReportError::IncompleteMatrix(format!(
                "expected 3 {} runs, got {count}",
                variant.label()
            )));
        }
    }

    let (t0, t1) = SUMMARY_WINDOW;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "experiment matrix summary (grid-rise window {t0}..{t1} s)"
    );
    for variant in [NetworkVariant::Resistive, NetworkVariant::Inductive] {
        let _ = writeln!(out, "\n== {} grid ==", variant.label());
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "a2_mode", "a2_mean_v", "a2_max_v", "a2_mean_p", "a2_mean_q", "a1_mean_p", "a1_mean_q"
        );
        let mut ranked: Vec<(ModeKind, f64)> = Vec::new();
        for run in runs.iter().filter(|r| r.spec.variant == variant) {
            let summary = summarize_window(&run.records, t0, t1).map_err(|e| {
                ReportError::IncompleteMatrix(format!("run {}: {e}", run.label()))
            })?;
            let _ = writeln!(
                out,
                "{:<10} {:>10.6} {:>10.6} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
                run.spec.a2.mode.label(),
                summary.a2.v_pu.mean,
                summary.a2.v_pu.max,
                summary.a2.p_kw.mean,
                summary.a2.q_kvar.mean,
                summary.a1.p_kw.mean,
                summary.a1.q_kvar.mean,
            );
            ranked.push((run.spec.a2.mode, summary.a2.v_pu.max));
        }
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut ordering = String::new();
        for (i, (mode, v)) in ranked.iter().enumerate() {
            if i > 0 {
                let prev = ranked[i - 1].1;
                ordering.push_str(if *v == prev { " = " } else { " > " });
            }
            ordering.push_str(mode.label());
        }
        let _ = writeln!(out, "a2 max-voltage ordering: {ordering}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{PccMeasurement, TimeSeriesRecord};

    fn record(t: f64, v2: f64) -> TimeSeriesRecord {
        let meas = |v| PccMeasurement {
            p_kw: 47.5,
            q_kvar: 15.6,
            pf: 0.95,
            v_pu: v,
        };
        TimeSeriesRecord {
            time_s: t,
            slack_v_pu: 1.0,
            irradiance_frac: 1.0,
            a1: meas(0.98),
            a2: meas(v2),
            solver_iterations: 7,
            converged: true,
        }
    }

    #[test]
    fn csv_shape_and_header() {
        let csv = emit_csv(&[record(0.0, 1.0)]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(emit_csv(&[]).is_err());
    }

    #[test]
    fn csv_round_trips_values() {
        let mut rows = Vec::new();
        for k in 0..50 {
            let t = k as f64 * 0.01;
            rows.push(record(t, 1.0 + (t * 37.123).sin() * 0.08371));
        }
        let csv = emit_csv(&rows).unwrap();
        for (line, original) in csv.lines().skip(1).zip(&rows) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 13);
            let back: f64 = cols[10].parse().unwrap();
            let v = original.a2.v_pu;
            assert!(
                (back - v).abs() <= 1e-9 * v.abs(),
                "{back} vs {v}"
            );
            let t_back: f64 = cols[0].parse().unwrap();
            assert!((t_back - original.time_s).abs() <= 1e-9 * original.time_s.abs().max(1e-300));
        }
    }

    #[test]
    fn csv_bytes_are_deterministic() {
        let rows = vec![record(0.0, 1.01), record(0.01, 1.0123456789)];
        assert_eq!(emit_csv(&rows).unwrap(), emit_csv(&rows).unwrap());
    }

    #[test]
    fn number_format_is_compact() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(47.5), "47.5");
        assert_eq!(format_number(0.01), "0.01");
        assert_eq!(format_number(13.950000000000001), "13.95");
        // full-entropy values still round trip
        let v = 1.0423456789123456;
        let back: f64 = format_number(v).parse().unwrap();
        assert!((back - v).abs() <= 1e-9 * v);
    }

    fn synthetic_run(variant: &str, mode: &str, v_level: f64) -> MatrixRun {
        let mut spec = ScenarioSpec::paper_default();
        spec.variant = match variant {
            "resistive" => crate::scenario::NetworkVariant::Resistive,
            _ => crate::scenario::NetworkVariant::Inductive,
        };
        spec.a2.mode = match mode {
            "cpf" => ModeKind::Cpf,
            "volt_var" => ModeKind::VoltVar,
            _ => ModeKind::VoltWatt,
        };
        let records = (0..2001)
            .map(|k| record(k as f64 * 0.01, v_level))
            .collect();
        MatrixRun { spec, records }
    }

    #[test]
    fn summary_orders_modes_by_peak_voltage() {
        let runs = vec![
            synthetic_run("resistive", "cpf", 1.17),
            synthetic_run("resistive", "volt_var", 1.15),
            synthetic_run("resistive", "volt_watt", 1.13),
            synthetic_run("inductive", "cpf", 1.18),
            synthetic_run("inductive", "volt_var", 1.05),
            synthetic_run("inductive", "volt_watt", 1.09),
        ];
        let report = emit_summary(&runs).unwrap();
        assert!(report.contains("cpf > volt_var > volt_watt"));
        assert!(report.contains("cpf > volt_watt > volt_var"));
    }

    #[test]
    fn summary_reports_ties_and_rejects_incomplete() {
        let runs = vec![
            synthetic_run("resistive", "cpf", 1.1),
            synthetic_run("resistive", "volt_var", 1.1),
            synthetic_run("resistive", "volt_watt", 1.1),
            synthetic_run("inductive", "cpf", 1.1),
            synthetic_run("inductive", "volt_var", 1.1),
            synthetic_run("inductive", "volt_watt", 1.1),
        ];
        let report = emit_summary(&runs).unwrap();
        assert!(report.contains("cpf = volt_var = volt_watt"));

        assert!(emit_summary(&runs[..4]).is_err());
    }
}
