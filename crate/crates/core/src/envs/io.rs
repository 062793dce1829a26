//! Instance CSV format.
//!
//! ```text
//! # comments and blank lines are ignored
//! 3,2,0.25          <- optional header `K,D[,sigma]` (only read when `header` is set)
//! 1.0,0.2           <- one row of D means per arm
//! 0.2,1.0
//! 0.5,0.1
//! sigma,0.25,0.25   <- optional per-objective noise scales (one value = isotropic)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BanditInstance, NoiseSpec};
use crate::error::{PsiError, Result};
use crate::pareto::MeanMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    /// First non-comment line is a `K,D[,sigma]` header.
    pub header: bool,
    /// Noise scale when the file gives none.
    pub default_sigma: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            header: false,
            default_sigma: 0.25,
        }
    }
}

pub fn load_instance(path: impl AsRef<Path>, opts: LoadOptions) -> Result<BanditInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| PsiError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text, opts)
}

fn parse_err(line: usize, message: impl Into<String>) -> PsiError {
    PsiError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_floats<'a>(line: usize, fields: impl Iterator<Item = &'a str>) -> Result<Vec<f64>> {
    fields
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("bad number {:?}: {e}", f.trim())))
        })
        .collect()
}

pub fn parse_instance(text: &str, opts: LoadOptions) -> Result<BanditInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut declared: Option<(usize, usize)> = None;
    let mut sigma: Option<Vec<f64>> = None;
    if opts.header {
        let (n, line) = lines.next().ok_or_else(|| parse_err(1, "missing header line"))?;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(n, "header must be K,D or K,D,sigma"));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(n, format!("bad header field {s:?}: {e}")))
        };
        declared = Some((int(fields[0])?, int(fields[1])?));
        if let Some(s) = fields.get(2) {
            sigma = Some(parse_floats(n, std::iter::once(*s))?);
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut sigma_row_seen = false;
    for (n, line) in lines {
        let mut fields = line.split(',');
        let first = fields.clone().next().unwrap_or("").trim();
        if first.eq_ignore_ascii_case("sigma") {
            fields.next();
            if sigma.is_some() {
                return Err(parse_err(n, "noise scale given twice"));
            }
            sigma = Some(parse_floats(n, fields)?);
            sigma_row_seen = true;
            continue;
        }
        if sigma_row_seen {
            return Err(parse_err(n, "mean row after the sigma row"));
        }
        let row = parse_floats(n, fields)?;
        if let Some(prev) = rows.first() {
            if row.len() != prev.len() {
                return Err(parse_err(
                    n,
                    format!("expected {} values, found {}", prev.len(), row.len()),
                ));
            }
        }
        if let Some(d) = row.iter().position(|x| !x.is_finite()) {
            return Err(PsiError::Validation(format!(
                "line {n}: non-finite mean in column {}",
                d + 1
            )));
        }
        rows.push(row);
    }

    if let Some((k, d)) = declared {
        let got_d = rows.first().map_or(0, Vec::len);
        if rows.len() != k || got_d != d {
            return Err(PsiError::Validation(format!(
                "header declares {k}x{d} but file has {}x{got_d}",
                rows.len()
            )));
        }
    }
    let theta = MeanMatrix::new(rows)?;
    let dims = theta.dims();
    let noise = match sigma {
        None => NoiseSpec::isotropic(opts.default_sigma, dims)?,
        Some(s) if s.len() == 1 => NoiseSpec::isotropic(s[0], dims)?,
        Some(s) if s.len() == dims => NoiseSpec::per_dim(s)?,
        Some(s) => {
            return Err(PsiError::Validation(format!(
                "{} noise scales for {dims} objectives",
                s.len()
            )))
        }
    };
    BanditInstance::new(theta, noise)
}

/// Writes an instance in the format read by [`parse_instance`] (no header).
pub fn write_instance(instance: &BanditInstance, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# K={}, D={}", instance.arms(), instance.dims())?;
    for row in instance.theta.rows() {
        let fields: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    let sigma: Vec<String> = instance.noise.sigma().iter().map(|x| format!("{x:?}")).collect();
    writeln!(out, "sigma,{}", sigma.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::i3;

    const I3_CSV: &str = "# I3\n1.0,0.2\n0.2,1.0\n0.5,0.1\n";

    #[test]
    fn reads_plain_rows() {
        let inst = parse_instance(I3_CSV, LoadOptions::default()).unwrap();
        assert_eq!((inst.arms(), inst.dims()), (3, 2));
        assert_eq!(inst.theta, i3());
        assert_eq!(inst.noise.sigma(), &[0.25, 0.25]);
    }

    #[test]
    fn reads_header_and_sigma() {
        let text = "3,2,0.5\n1.0,0.2\n0.2,1.0\n0.5,0.1\n";
        let opts = LoadOptions {
            header: true,
            ..Default::default()
        };
        let inst = parse_instance(text, opts).unwrap();
        assert_eq!(inst.noise.sigma(), &[0.5, 0.5]);
        let text = "1.0,0.2\n0.2,1.0\nsigma,0.1,0.3\n";
        let inst = parse_instance(text, LoadOptions::default()).unwrap();
        assert_eq!(inst.noise.sigma(), &[0.1, 0.3]);
    }

    #[test]
    fn header_mismatch() {
        let opts = LoadOptions {
            header: true,
            ..Default::default()
        };
        assert!(matches!(
            parse_instance("4,2\n1,2\n3,4\n", opts),
            Err(PsiError::Validation(_))
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_instance("1.0,0.2\n\n0.2,abc\n", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PsiError::Parse { line: 3, .. }), "{err}");
        let err = parse_instance("1.0,0.2\n0.2\n", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PsiError::Parse { line: 2, .. }));
        let err = parse_instance("1,2\nsigma,1,1\n3,4\n", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PsiError::Parse { line: 3, .. }));
    }

    #[test]
    fn nan_is_a_validation_error() {
        let err = parse_instance("1.0,NaN\n0.2,1.0\n", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PsiError::Validation(_)));
    }

    #[test]
    fn write_then_read() {
        let inst = crate::envs::gen_experiment(4, 9).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = parse_instance(std::str::from_utf8(&buf).unwrap(), LoadOptions::default()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn missing_file() {
        let err = load_instance("/nonexistent/instance.csv", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PsiError::Io { .. }));
    }
}
