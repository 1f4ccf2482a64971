//! CSV output.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::TrialRecord;

pub const CSV_HEADER: &str =
    "snr_db,scheme,filter,K,M,T,R,ser,errors,symbols,cm_sqrd,cm_sic,cm_sd_avg,sd_nodes_avg,total_cm_avg";

/// Formats `x` with six significant digits in the style of C's `%g`:
/// trailing zeros dropped, exponent notation below `1e-4` and from `1e6` on.
///
/// ```
/// use gfdm_mimo::sim::format_sig;
///
/// assert_eq!(format_sig(0.75), "0.75");
/// assert_eq!(format_sig(1234567.0), "1.23457e+06");
/// assert_eq!(format_sig(0.0000123), "1.23e-05");
/// assert_eq!(format_sig(20.0), "20");
/// ```
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // rounding to 6 digits first fixes the exponent (999999.5 → 1e+06)
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row_order(a: &TrialRecord, b: &TrialRecord) -> Ordering {
    a.snr_db
        .total_cmp(&b.snr_db)
        .then_with(|| a.scheme.to_string().cmp(&b.scheme.to_string()))
}

/// Renders the report, rows ordered by SNR then scheme name.
pub fn render_csv(records: &[TrialRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| row_order(a, b));
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            format_sig(r.snr_db),
            r.scheme,
            r.filter,
            r.subcarriers,
            r.subsymbols,
            r.tx,
            r.rx,
            format_sig(r.ser()),
            r.errors,
            r.symbols,
            r.cm_sqrd,
            r.cm_sic,
            format_sig(r.cm_sd_avg()),
            format_sig(r.sd_nodes_avg()),
            format_sig(r.total_cm_avg()),
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// Writes the report to `path`; nothing is created when `records` is empty.
pub fn write_report(records: &[TrialRecord], path: &Path) -> Result<()> {
    let text = render_csv(records)?;
    std::fs::write(path, text)?;
    Ok(())
}
