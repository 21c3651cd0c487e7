//! Experiment-versus-theory comparison harness: dataset ingestion,
//! per-point differences, and confidence-band exclusion verdicts.
//!
//! A point lies outside a band when |difference| strictly exceeds the
//! half-width; a difference exactly on the border counts as inside
//! (conservative, favours non-exclusion). Excluded ranges are maximal
//! runs of consecutive outside points; no interpolation between points.

use crate::lifshitz::{self, Geometry, ThermalConfiguration};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("confidence level 70 requested but the dataset has rows without ci70")]
    MissingCi70,
    #[error("theory evaluator does not cover separation {separation_nm:.3} nm")]
    RangeViolation { separation_nm: f64 },
    #[error("diffs and records have different lengths ({diffs} vs {records})")]
    LengthMismatch { diffs: usize, records: usize },
    #[error(transparent)]
    Lifshitz(#[from] lifshitz::LifshitzError),
    #[error(transparent)]
    Thermo(#[from] crate::thermo::ThermoError),
}

/// Whether a dataset holds plate-plate pressures or sphere-plate forces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Pressure,
    Force,
}

impl DatasetKind {
    /// SI factor for a unit tag, or None when the tag does not belong to
    /// this kind.
    fn unit_factor(&self, unit: &str) -> Option<f64> {
        match (self, unit) {
            (DatasetKind::Pressure, "mPa") => Some(1e-3),
            (DatasetKind::Pressure, "Pa") => Some(1.0),
            (DatasetKind::Force, "pN") => Some(1e-12),
            (DatasetKind::Force, "nN") => Some(1e-9),
            (DatasetKind::Force, "N") => Some(1.0),
            _ => None,
        }
    }
}

/// One experimental point, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRecord {
    /// Separation, m.
    pub separation: f64,
    /// Measured pressure (Pa) or force (N).
    pub value: f64,
    pub ci95_half_width: f64,
    pub ci70_half_width: Option<f64>,
}

/// Confidence level of an exclusion statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfidenceLevel {
    Seventy,
    NinetyFive,
}

/// Exclusion analysis at one confidence level.
#[derive(Debug, Clone)]
pub struct ExclusionReport {
    pub level: ConfidenceLevel,
    /// Per-point outside flag, same order as the records.
    pub outside: Vec<bool>,
    /// Maximal runs of consecutive outside points, as closed separation
    /// intervals in metres.
    pub excluded: Vec<(f64, f64)>,
}

/// Loads a dataset file: UTF-8 CSV with header `d_nm,value,ci95,ci70,unit`
/// (ci70 may be empty). Records come back sorted by separation.
pub fn load_dataset(path: &Path, kind: DatasetKind) -> Result<Vec<ComparisonRecord>, CompareError> {
    let file = std::fs::File::open(path)?;
    parse_dataset(std::io::BufReader::new(file), kind)
}

/// Parser behind [`load_dataset`], usable on any reader.
pub fn parse_dataset<R: BufRead>(
    reader: R,
    kind: DatasetKind,
) -> Result<Vec<ComparisonRecord>, CompareError> {
    let mut records = Vec::new();
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Ok(records), // empty file: empty sequence
            Some((_, line)) => {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                break trimmed.to_string();
            }
        }
    };
    if header != "d_nm,value,ci95,ci70,unit" {
        return Err(CompareError::Parse {
            line: 1,
            message: format!("expected header `d_nm,value,ci95,ci70,unit`, got `{header}`"),
        });
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 5 {
            return Err(CompareError::Parse {
                line: lineno,
                message: format!("expected 5 comma-separated fields, got {}", fields.len()),
            });
        }
        let num = |s: &str, name: &str| -> Result<f64, CompareError> {
            s.trim().parse::<f64>().map_err(|e| CompareError::Parse {
                line: lineno,
                message: format!("bad {name} `{s}`: {e}"),
            })
        };
        let d_nm = num(fields[0], "d_nm")?;
        let value = num(fields[1], "value")?;
        let ci95 = num(fields[2], "ci95")?;
        let ci70 = if fields[3].trim().is_empty() {
            None
        } else {
            Some(num(fields[3], "ci70")?)
        };
        let unit = fields[4].trim();
        if unit.is_empty() {
            return Err(CompareError::Parse {
                line: lineno,
                message: "unit tag missing".into(),
            });
        }
        let factor = kind.unit_factor(unit).ok_or_else(|| CompareError::Parse {
            line: lineno,
            message: format!("unit `{unit}` is not valid for a {kind:?} dataset"),
        })?;
        if d_nm <= 0.0 {
            return Err(CompareError::Parse {
                line: lineno,
                message: format!("separation must be positive, got {d_nm}"),
            });
        }
        if ci95 <= 0.0 {
            return Err(CompareError::Parse {
                line: lineno,
                message: format!("ci95 half-width must be positive, got {ci95}"),
            });
        }
        if let Some(c70) = ci70 {
            if c70 <= 0.0 {
                return Err(CompareError::Parse {
                    line: lineno,
                    message: format!("ci70 half-width must be positive, got {c70}"),
                });
            }
            if c70 > ci95 {
                return Err(CompareError::Parse {
                    line: lineno,
                    message: format!("ci70 ({c70}) exceeds ci95 ({ci95})"),
                });
            }
        }
        records.push(ComparisonRecord {
            separation: d_nm * 1e-9,
            value: value * factor,
            ci95_half_width: ci95 * factor,
            ci70_half_width: ci70.map(|c| c * factor),
        });
    }
    records.sort_by(|a, b| a.separation.total_cmp(&b.separation));
    for (i, pair) in records.windows(2).enumerate() {
        if pair[0].separation == pair[1].separation {
            return Err(CompareError::Parse {
                line: i + 2,
                message: format!(
                    "duplicate separation {} nm",
                    pair[0].separation * 1e9
                ),
            });
        }
    }
    Ok(records)
}

/// A theory curve the harness can evaluate at arbitrary separations.
pub trait TheoryCurve {
    fn eval(&self, separation: f64) -> Result<f64, CompareError>;
}

/// Full-pipeline plate-plate pressure at the configuration's temperature.
pub struct LifshitzPressureCurve {
    pub cfg: ThermalConfiguration,
    pub tolerance: f64,
}

impl TheoryCurve for LifshitzPressureCurve {
    fn eval(&self, separation: f64) -> Result<f64, CompareError> {
        let mut cfg = self.cfg;
        cfg.gap = separation;
        cfg.geometry = Geometry::ParallelPlates;
        Ok(lifshitz::pressure(&cfg, self.tolerance)?.pressure)
    }
}

/// Full-pipeline sphere-plate force (PFA) with the configuration's radius.
pub struct LifshitzForceCurve {
    pub cfg: ThermalConfiguration,
    pub tolerance: f64,
}

impl TheoryCurve for LifshitzForceCurve {
    fn eval(&self, separation: f64) -> Result<f64, CompareError> {
        let mut cfg = self.cfg;
        cfg.gap = separation;
        Ok(lifshitz::sphere_plate_force(&cfg, self.tolerance)?.0)
    }
}

/// Piecewise-linear interpolation over a precomputed curve; errors outside
/// its separation range.
pub struct CachedCurve {
    separations: Vec<f64>,
    values: Vec<f64>,
}

impl CachedCurve {
    pub fn new(mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            separations: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
        }
    }
}

impl TheoryCurve for CachedCurve {
    fn eval(&self, separation: f64) -> Result<f64, CompareError> {
        let n = self.separations.len();
        if n < 2
            || separation < self.separations[0]
            || separation > self.separations[n - 1]
        {
            return Err(CompareError::RangeViolation {
                separation_nm: separation * 1e9,
            });
        }
        let i = match self
            .separations
            .binary_search_by(|s| s.total_cmp(&separation))
        {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i,
        };
        let (s0, s1) = (self.separations[i - 1], self.separations[i]);
        let w = (separation - s0) / (s1 - s0);
        Ok(self.values[i - 1] * (1.0 - w) + self.values[i] * w)
    }
}

/// Per-point differences theory(d_i) - measured_i, same units as the data.
pub fn differences(
    theory: &dyn TheoryCurve,
    records: &[ComparisonRecord],
) -> Result<Vec<f64>, CompareError> {
    records
        .iter()
        .map(|r| Ok(theory.eval(r.separation)? - r.value))
        .collect()
}

/// Exclusion verdict at one confidence level: a point is outside iff
/// |difference| strictly exceeds the half-width; an interval is excluded
/// iff every point in it is outside; maximal such intervals are reported.
pub fn exclusion_verdict(
    diffs: &[f64],
    records: &[ComparisonRecord],
    level: ConfidenceLevel,
) -> Result<ExclusionReport, CompareError> {
    if diffs.len() != records.len() {
        return Err(CompareError::LengthMismatch {
            diffs: diffs.len(),
            records: records.len(),
        });
    }
    let mut outside = Vec::with_capacity(records.len());
    for (diff, rec) in diffs.iter().zip(records) {
        let hw = match level {
            ConfidenceLevel::NinetyFive => rec.ci95_half_width,
            ConfidenceLevel::Seventy => {
                rec.ci70_half_width.ok_or(CompareError::MissingCi70)?
            }
        };
        outside.push(diff.abs() > hw);
    }
    let mut excluded = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=outside.len() {
        let out = i < outside.len() && outside[i];
        match (out, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                excluded.push((records[s].separation, records[i - 1].separation));
                run_start = None;
            }
            _ => {}
        }
    }
    Ok(ExclusionReport {
        level,
        outside,
        excluded,
    })
}

fn fmt_sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Serializes the report format: per-point rows `d_nm,diff,outside95,outside70`
/// then a summary block of excluded intervals. The header flags the
/// all-points convention.
pub fn write_report(
    records: &[ComparisonRecord],
    diffs: &[f64],
    rep95: &ExclusionReport,
    rep70: Option<&ExclusionReport>,
) -> Result<String, CompareError> {
    if diffs.len() != records.len() || rep95.outside.len() != records.len() {
        return Err(CompareError::LengthMismatch {
            diffs: diffs.len(),
            records: records.len(),
        });
    }
    let mut out = String::new();
    out.push_str(
        "# exclusion convention: all points outside; |diff| equal to half-width counts inside\n",
    );
    out.push_str("d_nm,diff,outside95,outside70\n");
    for (i, (rec, diff)) in records.iter().zip(diffs).enumerate() {
        let o70 = match rep70 {
            Some(r) => {
                if r.outside[i] {
                    "1"
                } else {
                    "0"
                }
            }
            None => "",
        };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sci(rec.separation * 1e9),
            fmt_sci(*diff),
            if rep95.outside[i] { "1" } else { "0" },
            o70,
        );
    }
    let fmt_intervals = |iv: &[(f64, f64)]| -> String {
        iv.iter()
            .map(|(a, b)| format!("{}..{}", fmt_sci(a * 1e9), fmt_sci(b * 1e9)))
            .collect::<Vec<_>>()
            .join(";")
    };
    let _ = writeln!(out, "# excluded95: {}", fmt_intervals(&rep95.excluded));
    if let Some(r70) = rep70 {
        let _ = writeln!(out, "# excluded70: {}", fmt_intervals(&r70.excluded));
    }
    Ok(out)
}

/// Parsed form of a written report.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedReport {
    pub rows: Vec<(f64, f64, bool, Option<bool>)>,
    pub excluded95: Vec<(f64, f64)>,
    pub excluded70: Option<Vec<(f64, f64)>>,
}

/// Parses a report produced by [`write_report`]; round-trips exactly.
pub fn parse_report(text: &str) -> Result<ParsedReport, CompareError> {
    let mut rows = Vec::new();
    let mut excluded95 = Vec::new();
    let mut excluded70 = None;
    let parse_intervals = |s: &str, lineno: usize| -> Result<Vec<(f64, f64)>, CompareError> {
        if s.trim().is_empty() {
            return Ok(Vec::new());
        }
        s.split(';')
            .map(|span| {
                let (a, b) = span.split_once("..").ok_or(CompareError::Parse {
                    line: lineno,
                    message: format!("bad interval `{span}`"),
                })?;
                let pa = a.trim().parse::<f64>().map_err(|e| CompareError::Parse {
                    line: lineno,
                    message: e.to_string(),
                })?;
                let pb = b.trim().parse::<f64>().map_err(|e| CompareError::Parse {
                    line: lineno,
                    message: e.to_string(),
                })?;
                Ok((pa * 1e-9, pb * 1e-9))
            })
            .collect()
    };
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(rest) = line.strip_prefix("# excluded95:") {
            excluded95 = parse_intervals(rest, lineno)?;
            continue;
        }
        if let Some(rest) = line.strip_prefix("# excluded70:") {
            excluded70 = Some(parse_intervals(rest, lineno)?);
            continue;
        }
        if line.starts_with('#') || line == "d_nm,diff,outside95,outside70" || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CompareError::Parse {
                line: lineno,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let d: f64 = fields[0].parse().map_err(|e: std::num::ParseFloatError| {
            CompareError::Parse {
                line: lineno,
                message: e.to_string(),
            }
        })?;
        let diff: f64 = fields[1].parse().map_err(|e: std::num::ParseFloatError| {
            CompareError::Parse {
                line: lineno,
                message: e.to_string(),
            }
        })?;
        let flag = |s: &str| -> Result<Option<bool>, CompareError> {
            match s {
                "1" => Ok(Some(true)),
                "0" => Ok(Some(false)),
                "" => Ok(None),
                other => Err(CompareError::Parse {
                    line: lineno,
                    message: format!("bad flag `{other}`"),
                }),
            }
        };
        let o95 = flag(fields[2])?.ok_or(CompareError::Parse {
            line: lineno,
            message: "outside95 flag missing".into(),
        })?;
        rows.push((d * 1e-9, diff, o95, flag(fields[3])?));
    }
    Ok(ParsedReport {
        rows,
        excluded95,
        excluded70,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn synthetic(rows: &[(f64, f64, f64, Option<f64>)]) -> Vec<ComparisonRecord> {
        rows.iter()
            .map(|&(d_nm, v, c95, c70)| ComparisonRecord {
                separation: d_nm * 1e-9,
                value: v,
                ci95_half_width: c95,
                ci70_half_width: c70,
            })
            .collect()
    }

    #[test]
    fn empty_file_gives_empty_sequence() {
        let recs = parse_dataset(Cursor::new(""), DatasetKind::Pressure).unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn three_line_round_trip() {
        let text = "d_nm,value,ci95,ci70,unit\n\
                    300.0,-12.5,0.8,0.4,mPa\n\
                    200.0,-50.0,1.5,,mPa\n\
                    400.0,-5.0,0.6,0.3,mPa\n";
        let recs = parse_dataset(Cursor::new(text), DatasetKind::Pressure).unwrap();
        assert_eq!(recs.len(), 3);
        // sorted by separation, converted to SI
        assert_eq!(recs[0].separation, 200.0 * 1e-9);
        assert_eq!(recs[0].value, -50.0 * 1e-3);
        assert_eq!(recs[0].ci70_half_width, None);
        assert_eq!(recs[1].separation, 300.0 * 1e-9);
        assert_eq!(recs[1].ci95_half_width, 0.8 * 1e-3);
        assert_eq!(recs[1].ci70_half_width, Some(0.4 * 1e-3));
    }

    #[test]
    fn ci70_above_ci95_rejected_with_line() {
        let text = "d_nm,value,ci95,ci70,unit\n\
                    200.0,-50.0,1.5,0.5,mPa\n\
                    300.0,-12.5,0.8,0.9,mPa\n";
        let err = parse_dataset(Cursor::new(text), DatasetKind::Pressure).unwrap_err();
        match err {
            CompareError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("ci70"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unit_and_kind_must_agree() {
        let text = "d_nm,value,ci95,ci70,unit\n100.0,-3.0,0.2,,pN\n";
        assert!(parse_dataset(Cursor::new(text), DatasetKind::Pressure).is_err());
        assert!(parse_dataset(Cursor::new(text), DatasetKind::Force).is_ok());
    }

    #[test]
    fn duplicate_separations_rejected() {
        let text = "d_nm,value,ci95,ci70,unit\n\
                    200.0,-50.0,1.5,,mPa\n\
                    200.0,-49.0,1.5,,mPa\n";
        assert!(parse_dataset(Cursor::new(text), DatasetKind::Pressure).is_err());
    }

    #[test]
    fn differences_identity_and_offset() {
        let recs = synthetic(&[
            (100.0, -5.0, 0.5, None),
            (200.0, -2.0, 0.3, None),
            (300.0, -1.0, 0.2, None),
        ]);
        let curve = CachedCurve::new(recs.iter().map(|r| (r.separation, r.value)).collect());
        let diffs = differences(&curve, &recs).unwrap();
        assert!(diffs.iter().all(|d| d.abs() < 1e-15));
        let offset = CachedCurve::new(
            recs.iter()
                .map(|r| (r.separation, r.value + 0.7))
                .collect(),
        );
        let diffs = differences(&offset, &recs).unwrap();
        assert!(diffs.iter().all(|d| (d - 0.7).abs() < 1e-12));
    }

    #[test]
    fn cached_curve_range_violation() {
        let curve = CachedCurve::new(vec![(100e-9, 1.0), (200e-9, 2.0)]);
        assert!(curve.eval(150e-9).is_ok());
        assert!(matches!(
            curve.eval(250e-9),
            Err(CompareError::RangeViolation { .. })
        ));
    }

    #[test]
    fn exclusion_all_zero_and_all_out() {
        let recs = synthetic(&[
            (100.0, 0.0, 1.0, Some(0.5)),
            (200.0, 0.0, 1.0, Some(0.5)),
            (300.0, 0.0, 1.0, Some(0.5)),
        ]);
        let zeros = vec![0.0; 3];
        let rep = exclusion_verdict(&zeros, &recs, ConfidenceLevel::NinetyFive).unwrap();
        assert!(rep.excluded.is_empty());
        let big = vec![2.0; 3];
        let rep = exclusion_verdict(&big, &recs, ConfidenceLevel::NinetyFive).unwrap();
        assert_eq!(rep.excluded, vec![(100.0 * 1e-9, 300.0 * 1e-9)]);
    }

    #[test]
    fn boundary_difference_counts_inside() {
        let recs = synthetic(&[(100.0, 0.0, 1.0, None)]);
        let rep = exclusion_verdict(&[1.0], &recs, ConfidenceLevel::NinetyFive).unwrap();
        assert!(!rep.outside[0]);
        let rep = exclusion_verdict(&[1.0 + 1e-12], &recs, ConfidenceLevel::NinetyFive).unwrap();
        assert!(rep.outside[0]);
    }

    #[test]
    fn interior_inside_point_splits_interval() {
        // all points outside except one interior point: two disjoint spans
        let recs = synthetic(&[
            (100.0, 0.0, 1.0, None),
            (150.0, 0.0, 1.0, None),
            (200.0, 0.0, 5.0, None),
            (250.0, 0.0, 1.0, None),
            (300.0, 0.0, 1.0, None),
        ]);
        let diffs = vec![2.0; 5];
        let rep = exclusion_verdict(&diffs, &recs, ConfidenceLevel::NinetyFive).unwrap();
        assert_eq!(rep.excluded, vec![(100.0 * 1e-9, 150.0 * 1e-9), (250.0 * 1e-9, 300.0 * 1e-9)]);
    }

    #[test]
    fn missing_ci70_is_an_error_at_level_70() {
        let recs = synthetic(&[(100.0, 0.0, 1.0, None)]);
        assert!(matches!(
            exclusion_verdict(&[0.5], &recs, ConfidenceLevel::Seventy),
            Err(CompareError::MissingCi70)
        ));
    }

    #[test]
    fn widening_bands_shrinks_exclusion() {
        let recs = synthetic(&[
            (100.0, 0.0, 1.0, None),
            (200.0, 0.0, 1.0, None),
            (300.0, 0.0, 1.0, None),
        ]);
        let diffs = [1.5, 0.5, 1.2];
        let narrow = exclusion_verdict(&diffs, &recs, ConfidenceLevel::NinetyFive).unwrap();
        let wide_recs = synthetic(&[
            (100.0, 0.0, 1.4, None),
            (200.0, 0.0, 1.4, None),
            (300.0, 0.0, 1.4, None),
        ]);
        let wide = exclusion_verdict(&diffs, &wide_recs, ConfidenceLevel::NinetyFive).unwrap();
        for (w, n) in wide.outside.iter().zip(&narrow.outside) {
            assert!(!w || *n, "widening created a new outside point");
        }
    }

    #[test]
    fn report_round_trip_is_byte_identical() {
        let recs = synthetic(&[
            (100.0, -5.0, 1.0, Some(0.5)),
            (200.0, -2.0, 1.0, Some(0.5)),
            (300.0, -1.0, 1.0, Some(0.5)),
        ]);
        let diffs = [1.5, 0.4, -0.8];
        let rep95 = exclusion_verdict(&diffs, &recs, ConfidenceLevel::NinetyFive).unwrap();
        let rep70 = exclusion_verdict(&diffs, &recs, ConfidenceLevel::Seventy).unwrap();
        let text = write_report(&recs, &diffs, &rep95, Some(&rep70)).unwrap();
        let parsed = parse_report(&text).unwrap();
        // re-serialize from the parsed structure
        let recs2: Vec<ComparisonRecord> = parsed
            .rows
            .iter()
            .zip(&recs)
            .map(|(&(d, _, _, _), orig)| ComparisonRecord {
                separation: d,
                ..*orig
            })
            .collect();
        let diffs2: Vec<f64> = parsed.rows.iter().map(|r| r.1).collect();
        let rep95b = exclusion_verdict(&diffs2, &recs2, ConfidenceLevel::NinetyFive).unwrap();
        let rep70b = exclusion_verdict(&diffs2, &recs2, ConfidenceLevel::Seventy).unwrap();
        let text2 = write_report(&recs2, &diffs2, &rep95b, Some(&rep70b)).unwrap();
        assert_eq!(text, text2);
    }
}
