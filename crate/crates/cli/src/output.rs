//! Artifact writers: `trajectory.csv` and JSON reports, numbers with 17
//! significant digits.

use std::io::{self, Write};
use std::path::Path;

use janus_core::Trajectory;
use serde::Serialize;

use crate::error::CliError;

pub const TRAJECTORY_HEADER: [&str; 11] = [
    "t",
    "trace_re",
    "trace_im",
    "herm_dev",
    "min_eig",
    "n_a",
    "n_b",
    "leak",
    "fidelity_ref",
    "resid_F",
    "resid_Ftilde",
];

/// `x` in scientific notation with 17 significant digits.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

pub fn write_trajectory<W: Write>(out: W, trajectory: &Trajectory) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for o in &trajectory.observables {
        w.write_record([
            number(o.t),
            number(o.trace.re),
            number(o.trace.im),
            number(o.herm_dev),
            optional(o.min_eig),
            optional(o.mean_n.first().copied()),
            optional(o.mean_n.get(1).copied()),
            number(o.leak),
            optional(o.fidelity_ref),
            optional(o.resid_f),
            optional(o.resid_ftilde),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes finite floats as `{:.16e}`; everything else as serde_json does.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(number(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = to_json(value).map_err(|e| CliError::write(path, e))?;
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))
}

pub fn write_trajectory_file(path: &Path, trajectory: &Trajectory) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::write(path, e))?;
    write_trajectory(io::BufWriter::new(file), trajectory).map_err(|e| CliError::write(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(number(1.0), "1.0000000000000000e0");
        assert_eq!(number(-0.1), "-1.0000000000000001e-1");
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_round_trips_numbers() {
        let v = json!({ "a": [0.0, -1.0], "b": 1.0 / 3.0, "n": 3, "s": "x", "z": null });
        let text = to_json(&v).unwrap();
        assert!(text.contains("-1.0000000000000000e0"));
        assert!(text.contains("\"n\":3"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn non_finite_becomes_null() {
        let text = to_json(&vec![f64::NAN, 1.0]).unwrap();
        assert_eq!(text.trim(), "[null,1.0000000000000000e0]");
    }
}
