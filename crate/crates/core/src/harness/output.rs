use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{PsiError, Result};

/// Column order of the result CSV.
pub const CSV_COLUMNS: [&str; 12] = [
    "instance",
    "algorithm",
    "budget",
    "trials",
    "failures",
    "error_rate",
    "log10_error",
    "mean_tau",
    "mean_samples",
    "mean_hv_fraction",
    "wall_time",
    "note",
];

/// Aggregate of one (algorithm, budget) cell. Statistics are `None` when the
/// metric was not requested or the cell failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub algorithm: String,
    pub budget: u64,
    pub trials: u64,
    pub failures: Option<u64>,
    pub error_rate: Option<f64>,
    /// `log10(max(error_rate, 1/(10·trials)))`.
    pub log10_error: Option<f64>,
    pub mean_tau: Option<f64>,
    pub mean_samples: Option<f64>,
    pub mean_hv_fraction: Option<f64>,
    pub wall_time: Option<f64>,
    pub note: String,
}

impl ResultRow {
    pub fn from_failures(instance: String, algorithm: String, budget: u64, trials: u64, failures: u64) -> Self {
        let rate = failures as f64 / trials as f64;
        let floor = 1.0 / (10.0 * trials as f64);
        Self {
            instance,
            algorithm,
            budget,
            trials,
            failures: Some(failures),
            error_rate: Some(rate),
            log10_error: Some(rate.max(floor).log10()),
            mean_tau: None,
            mean_samples: None,
            mean_hv_fraction: None,
            wall_time: None,
            note: String::new(),
        }
    }

    pub fn failed(instance: String, algorithm: String, budget: u64, trials: u64, note: String) -> Self {
        Self {
            instance,
            algorithm,
            budget,
            trials,
            failures: None,
            error_rate: None,
            log10_error: None,
            mean_tau: None,
            mean_samples: None,
            mean_hv_fraction: None,
            wall_time: None,
            note,
        }
    }

    /// Binomial standard error `sqrt(p(1-p)/n)` of the error rate.
    pub fn std_error(&self) -> Option<f64> {
        self.error_rate.map(|p| (p * (1.0 - p) / self.trials as f64).sqrt())
    }

    fn fields(&self) -> Vec<String> {
        fn float(x: Option<f64>) -> String {
            x.map(|v| format!("{v:.16e}")).unwrap_or_default()
        }
        vec![
            self.instance.clone(),
            self.algorithm.clone(),
            self.budget.to_string(),
            self.trials.to_string(),
            self.failures.map(|f| f.to_string()).unwrap_or_default(),
            float(self.error_rate),
            float(self.log10_error),
            float(self.mean_tau),
            float(self.mean_samples),
            float(self.mean_hv_fraction),
            float(self.wall_time),
            self.note.clone(),
        ]
    }
}

/// Writes a header and one line per row. Floats carry 17 significant digits.
pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// [`write_csv`] to a file.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io_err = |source| PsiError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    let mut file = file;
    file.write_all(&buf).map_err(io_err)?;
    Ok(())
}

/// Parses output of [`write_csv`].
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(PsiError::Validation(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let err = |message: String| PsiError::Parse { line, message };
        let int = |i: usize| -> Result<u64> {
            rec[i]
                .parse()
                .map_err(|_| err(format!("{}: bad integer '{}'", CSV_COLUMNS[i], &rec[i])))
        };
        let opt_int = |i: usize| -> Result<Option<u64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                int(i).map(Some)
            }
        };
        let opt_float = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                return Ok(None);
            }
            rec[i]
                .parse()
                .map(Some)
                .map_err(|_| err(format!("{}: bad number '{}'", CSV_COLUMNS[i], &rec[i])))
        };
        rows.push(ResultRow {
            instance: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            budget: int(2)?,
            trials: int(3)?,
            failures: opt_int(4)?,
            error_rate: opt_float(5)?,
            log10_error: opt_float(6)?,
            mean_tau: opt_float(7)?,
            mean_samples: opt_float(8)?,
            mean_hv_fraction: opt_float(9)?,
            wall_time: opt_float(10)?,
            note: rec[11].to_string(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_log_error() {
        let r = ResultRow::from_failures("i3".into(), "ege-sr".into(), 100, 1000, 0);
        assert_eq!(r.error_rate, Some(0.0));
        assert!((r.log10_error.unwrap() + 4.0).abs() < 1e-12);
        let r = ResultRow::from_failures("i3".into(), "ege-sr".into(), 100, 1000, 100);
        assert!((r.log10_error.unwrap() + 1.0).abs() < 1e-12);
        assert!((r.std_error().unwrap() - (0.09f64 / 1000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn round_trip() {
        let mut a = ResultRow::from_failures("exp:8".into(), "ape-fb:0.1".into(), 238_000, 7, 3);
        a.mean_tau = Some(1.0 / 3.0);
        a.mean_hv_fraction = Some(0.987_654_321_012_345_6);
        a.note = "a beyond guaranteed range, see docs".into();
        let b = ResultRow::failed("x.csv".into(), "ege-gg:9".into(), 10, 5, "failed: too small".into());
        let mut buf = Vec::new();
        write_csv(&[a.clone(), b.clone()], &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), vec![a, b]);
    }

    #[test]
    fn golden_layout() {
        let mut r = ResultRow::from_failures("i3".into(), "ege-sr".into(), 60, 4, 1);
        r.mean_samples = Some(59.0);
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "instance,algorithm,budget,trials,failures,error_rate,log10_error,mean_tau,mean_samples,mean_hv_fraction,wall_time,note\n\
             i3,ege-sr,60,4,1,2.5000000000000000e-1,-6.0205999132796240e-1,,5.9000000000000000e1,,,\n"
        );
    }

    #[test]
    fn bad_input() {
        assert!(read_csv("a,b\n".as_bytes()).is_err());
        let text = format!("{}\ni3,ege-sr,x,4,1,,,,,,,\n", CSV_COLUMNS.join(","));
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(PsiError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn unwritable_path_reports_path() {
        let err = emit_csv(&[], Path::new("/nonexistent-dir/out.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
