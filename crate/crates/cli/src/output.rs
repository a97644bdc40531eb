use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// C-style `%.10e`: ten mantissa digits, signed exponent of at least two
/// digits.
pub fn sci(v: f64) -> String {
    let s = format!("{v:.10e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Abort on the first non-finite value.
pub fn ensure_finite<'a>(
    module: &'static str,
    params: &str,
    values: impl IntoIterator<Item = &'a f64>,
) -> Result<(), CliError> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::NonFinite {
            module,
            params: params.to_string(),
        })
    }
}

/// Render a CSV table with one header line.
pub fn csv_bytes<const W: usize>(header: [&str; W], rows: &[[f64; W]]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::runtime("output", "csv encoding", e);
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row.iter().map(|v| sci(*v))).map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| CliError::runtime("output", "csv encoding", e))
}

pub fn json_bytes(value: &impl serde::Serialize) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::runtime("output", "json encoding", e))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Where a command writes its primary output.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    Stderr,
    File(PathBuf),
}

impl Sink {
    pub fn from_option(path: Option<&Path>) -> Self {
        match path {
            Some(p) => Sink::File(p.to_path_buf()),
            None => Sink::Stdout,
        }
    }

    pub fn write(&self, bytes: &[u8]) -> Result<(), CliError> {
        match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io("<stdout>", e))
            }
            Sink::Stderr => {
                let mut err = std::io::stderr().lock();
                err.write_all(bytes)
                    .and_then(|_| err.flush())
                    .map_err(|e| CliError::io("<stderr>", e))
            }
            Sink::File(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_matches_printf() {
        assert_eq!(sci(0.59375), "5.9375000000e-01");
        assert_eq!(sci(-1170.0), "-1.1700000000e+03");
        assert_eq!(sci(0.0), "0.0000000000e+00");
        assert_eq!(sci(1.5e-300), "1.5000000000e-300");
        assert_eq!(sci(2.0e100), "2.0000000000e+100");
    }

    #[test]
    fn non_finite_rejected() {
        assert!(ensure_finite("m", "p", &[1.0, 2.0]).is_ok());
        let err = ensure_finite("greens", "theta=1", &[1.0, f64::NAN]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("greens"));
        assert!(err.to_string().contains("theta=1"));
    }

    #[test]
    fn csv_has_single_header() {
        let bytes = csv_bytes(["a", "b"], &[[1.0, -2.0], [0.5, 3.0]]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text,
            "a,b\n1.0000000000e+00,-2.0000000000e+00\n5.0000000000e-01,3.0000000000e+00\n"
        );
    }
}
