//! CSV and JSON input/output.

use std::fs;
use std::io::Write;
use std::path::Path;

use fractance::freqresp::FrequencyResponse;
use fractance::network::validate;
use fractance::timesim::TimeSeries;
use fractance::varorder::VarOrderProfile;
use fractance::{LadderSpec64, TimeSeries64};

use crate::{CliError, Result};

/// 17 significant digits: enough to read back the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a circuit given inline (text starting with `{`) or as a file path,
/// and rejects invalid circuits.
pub fn load_spec(arg: &str) -> Result<LadderSpec64> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Config(format!("cannot read spec {arg}: {e}")))?
    };
    let spec: LadderSpec64 = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad spec JSON: {e}")))?;
    let violations = validate(&spec);
    if !violations.is_empty() {
        let all: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Config(format!("invalid spec: {}", all.join("; "))));
    }
    Ok(spec)
}

/// Canonical JSON of a circuit.
pub fn spec_json(spec: &LadderSpec64) -> String {
    serde_json::to_string(spec).expect("ladder specs serialize")
}

fn parse_field(field: &str, decimal_comma: bool) -> Option<f64> {
    let field = field.trim();
    if decimal_comma {
        field.replace(',', ".").parse().ok()
    } else {
        field.parse().ok()
    }
}

/// Reads a two-column `t,u` series. The header line is optional and the
/// delimiter may be a comma or a semicolon (then a decimal comma is accepted).
/// Samples must be uniformly spaced in time.
pub fn parse_series(text: &str) -> Result<TimeSeries64> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let semicolon = first.contains(';');
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(if semicolon { b';' } else { b',' })
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut t = Vec::new();
    let mut u = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("CSV: {e}")))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != 2 {
            return Err(CliError::Config(format!("CSV line {}: expected 2 columns, got {}", line + 1, record.len())));
        }
        match (parse_field(&record[0], semicolon), parse_field(&record[1], semicolon)) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
                t.push(a);
                u.push(b);
            }
            _ if line == 0 => {}
            _ => return Err(CliError::Config(format!("CSV line {}: not a pair of numbers", line + 1))),
        }
    }
    if t.len() < 2 {
        return Err(CliError::Config("CSV needs at least two samples".into()));
    }
    let n = t.len();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(CliError::Config("CSV time column must increase".into()));
    }
    for (k, &tk) in t.iter().enumerate() {
        let expect = t[0] + dt * k as f64;
        if (tk - expect).abs() > 1e-6 * dt + 1e-12 * tk.abs() {
            return Err(CliError::Config(format!("CSV line {}: samples are not uniformly spaced", k + 1)));
        }
    }
    TimeSeries::new(t[0], dt, u).ok_or_else(|| CliError::Config("CSV: empty series".into()))
}

pub fn read_series(path: &Path) -> Result<TimeSeries64> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_series(&text)
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(CliError::output)
}

pub fn write_series<W: Write>(out: W, ts: &TimeSeries64) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["t", "u"]).map_err(CliError::output)?;
    for (k, &u) in ts.samples.iter().enumerate() {
        w.write_record([fmt_num(ts.time(k)), fmt_num(u)]).map_err(CliError::output)?;
    }
    finish(w)
}

pub fn write_bode<W: Write>(out: W, resp: &FrequencyResponse<f64>) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["omega", "mag_db", "phase_deg"]).map_err(CliError::output)?;
    for ((omega, mag), phase) in resp.omega.iter().zip(resp.magnitude_db()).zip(resp.phase_deg()) {
        w.write_record([fmt_num(*omega), fmt_num(mag), fmt_num(phase)]).map_err(CliError::output)?;
    }
    finish(w)
}

pub fn write_profile<W: Write>(out: W, p: &VarOrderProfile<f64>) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["t", "alpha", "a", "y0", "converged"]).map_err(CliError::output)?;
    for i in 0..p.len() {
        w.write_record([
            fmt_num(p.window_ends[i]),
            fmt_num(p.alphas[i]),
            fmt_num(p.rates[i]),
            fmt_num(p.amplitudes[i]),
            p.converged_flags[i].to_string(),
        ])
        .map_err(CliError::output)?;
    }
    finish(w)
}

/// Comma-separated window ends, e.g. `1,2,5,10`.
pub fn parse_schedule(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad schedule entry {s:?}")))
        })
        .collect()
}

/// Subtracts the last sample from every sample.
pub fn subtract_final_value(ts: &mut TimeSeries64) {
    let last = *ts.samples.last().expect("series are non-empty");
    ts.samples.iter_mut().for_each(|u| *u -= last);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -123456.789e12, 5e-324] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_variants() {
        let plain = parse_series("0,1\n0.5,0.8\n1.0,0.7\n").unwrap();
        assert_eq!(plain.samples, vec![1.0, 0.8, 0.7]);
        assert_eq!(plain.dt, 0.5);
        let headed = parse_series("t,u\n0,1\n0.5,0.8\n1.0,0.7\n").unwrap();
        assert_eq!(headed, plain);
        let semi = parse_series("time;volts\n0;1\n0,5;0,8\n1;0,7\n").unwrap();
        assert_eq!(semi, plain);
        let offset = parse_series("2.0, 3\n2.1, 2\n2.2, 1\n").unwrap();
        assert_eq!(offset.t0, 2.0);
    }

    #[test]
    fn csv_errors() {
        assert!(parse_series("t,u\n0,1\n").is_err());
        assert!(parse_series("0,1\n1,2\nx,3\n").is_err());
        assert!(parse_series("0,1\n1,2\n3,3\n").is_err());
        assert!(parse_series("0,1,2\n1,2,3\n").is_err());
        assert!(parse_series("1,1\n0,2\n").is_err());
    }

    #[test]
    fn specs_inline_and_invalid() {
        let s = load_spec(r#"{"steps":[{"r":1,"shunt":{"c":2}}]}"#).unwrap();
        assert_eq!(s.steps.len(), 1);
        assert!(matches!(load_spec(r#"{"steps":[{"r":-1,"shunt":{"c":2}}]}"#), Err(CliError::Config(_))));
        assert!(matches!(load_spec(r#"{"steps":[]}"#), Err(CliError::Config(_))));
        assert!(matches!(load_spec("/nonexistent/spec.json"), Err(CliError::Config(_))));
    }

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("1, 2,5").unwrap(), vec![1.0, 2.0, 5.0]);
        assert!(parse_schedule("1,,2").is_err());
    }
}
