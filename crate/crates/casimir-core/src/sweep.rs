//! Plot-ready sweep output formats shared by the CLI and tests.
//!
//! All numeric columns use fixed scientific notation with 12 significant
//! digits so identical runs produce byte-identical files.

use std::fmt::Write as _;

/// 12-significant-digit scientific formatting used across all sweeps.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.11e}")
}

pub const SWEEP_HEADER: &str = "d_nm,F_te,F_tm,F_total,P_pa_or_F_newton,n_max,err_estimate";

/// One separation of a pressure or force sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub d_nm: f64,
    pub f_te: f64,
    pub f_tm: f64,
    pub f_total: f64,
    /// Pressure in Pa (plate-plate) or force in N (sphere-plate).
    pub observable: f64,
    pub n_max: u32,
    pub err_estimate: f64,
}

pub fn write_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_sci(r.d_nm),
            fmt_sci(r.f_te),
            fmt_sci(r.f_tm),
            fmt_sci(r.f_total),
            fmt_sci(r.observable),
            r.n_max,
            fmt_sci(r.err_estimate),
        );
    }
    out
}

pub const ENTROPY_HEADER: &str = "T_K,S,method,err";

/// One temperature of an entropy sweep.
#[derive(Debug, Clone)]
pub struct EntropyRow {
    pub t_k: f64,
    pub entropy: f64,
    pub method: &'static str,
    pub err: f64,
}

pub fn write_entropy_sweep(rows: &[EntropyRow]) -> String {
    let mut out = String::from(ENTROPY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sci(r.t_k),
            fmt_sci(r.entropy),
            r.method,
            fmt_sci(r.err),
        );
    }
    out
}

/// The single-line Nernst verdict record.
pub fn write_nernst_record(report: &crate::thermo::NernstReport) -> String {
    format!(
        "verdict={},S0_extrapolated={},S0_closed_form={},discrepancy={}\n",
        report.verdict,
        fmt_sci(report.s0_extrapolated),
        fmt_sci(report.s0_closed_form),
        fmt_sci(report.discrepancy),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sci(-2.4762795e-9), "-2.47627950000e-9");
        assert_eq!(fmt_sci(1.0), "1.00000000000e0");
    }

    #[test]
    fn sweep_format_shape() {
        let rows = vec![SweepRow {
            d_nm: 200.0,
            f_te: -1.0e-9,
            f_tm: -2.0e-9,
            f_total: -3.0e-9,
            observable: -5.0,
            n_max: 42,
            err_estimate: 1e-15,
        }];
        let text = write_sweep(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 7);
        assert!(row.contains(",42,"));
    }
}
