//! File formats: CSV tables, matrix CSV, instance sidecars, JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certify::{CertifyReport, Verdict};
use crate::ensemble::{Instance, Sign, SignPattern};
use crate::error::{Error, Result};
use crate::harness::{ConcentrationReport, PhaseCell};
use crate::seed::SeedSpec;
use crate::threshold::ThresholdPoint;

pub const CURVE_HEADER: &str = "p,z_star,rho_star,drho_dp";
pub const PHASE_HEADER: &str = "p,rho,m,n,trials,successes,success_rate,mean_objective_gap,wallclock_ms";
pub const CONCENTRATION_HEADER: &str = "rho,p,m,trials,ratio_Tminus,ratio_Tc,margin_sign";

/// Formats like C's `%.9g`.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        return format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn curve_csv(points: &[ThresholdPoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for pt in points {
        let d = pt.drho_dp.map(sig9).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", sig9(pt.p), sig9(pt.z_star), sig9(pt.rho_star), d);
    }
    out
}

/// Phase table. `with_timing = false` writes 0 for wallclock so reruns are
/// byte-identical.
pub fn phase_csv(cells: &[PhaseCell], with_timing: bool) -> String {
    let mut out = String::from(PHASE_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            sig9(c.p),
            sig9(c.rho),
            c.m,
            c.n,
            c.trials,
            c.successes,
            sig9(c.success_rate()),
            sig9(c.mean_objective_gap),
            if with_timing { c.wallclock_ms } else { 0 }
        );
    }
    out
}

pub fn concentration_csv(reports: &[ConcentrationReport]) -> String {
    let mut out = String::from(CONCENTRATION_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(r.rho),
            sig9(r.p),
            r.m,
            r.trials,
            sig9(r.ratio_tminus),
            sig9(r.ratio_tc),
            r.margin_sign.as_str()
        );
    }
    out
}

/// One matrix row per line, comma separated, shortest round-trip floats.
pub fn matrix_to_csv(a: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in a.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: '{}' is not a number", lineno + 1, field.trim())))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {}: non-finite entry", lineno + 1)));
            }
            values.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(Error::Parse(format!("line {}: {count} fields, expected {c}", lineno + 1)));
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Parse("empty matrix".into()))?;
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// JSON companion of a matrix CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSidecar {
    pub m: usize,
    pub n: usize,
    /// Matrix CSV path, relative to the sidecar's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<String>,
    pub f: Vec<f64>,
    pub e: Vec<f64>,
    pub y: Vec<f64>,
    pub support: Vec<usize>,
    pub signs: Vec<Sign>,
    #[serde(default)]
    pub seed: Option<SeedSpec>,
}

impl InstanceSidecar {
    pub fn from_instance(inst: &Instance, matrix: Option<String>) -> Self {
        InstanceSidecar {
            m: inst.m(),
            n: inst.n(),
            matrix,
            f: inst.f.as_slice().to_vec(),
            e: inst.e.as_slice().to_vec(),
            y: inst.y.as_slice().to_vec(),
            support: inst.pattern.support.clone(),
            signs: inst.pattern.signs.clone(),
            seed: inst.seed,
        }
    }
}

/// Rebuilds an instance from matrix CSV text and sidecar JSON text,
/// checking every invariant. `y` must match `A f + e` to within
/// `1e-12 * (1 + max|y|)`; the stored `y` is recomputed exactly.
pub fn parse_instance(matrix_csv: &str, sidecar_json: &str) -> Result<Instance> {
    let a = parse_matrix_csv(matrix_csv)?;
    let side: InstanceSidecar = serde_json::from_str(sidecar_json)?;
    if a.shape() != (side.m, side.n) {
        return Err(Error::Parse(format!(
            "matrix is {}x{} but sidecar declares {}x{}",
            a.nrows(),
            a.ncols(),
            side.m,
            side.n
        )));
    }
    if side.n == 0 || side.m < side.n {
        return Err(Error::Parse(format!("need m >= n >= 1, got {}x{}", side.m, side.n)));
    }
    if side.y.len() != side.m {
        return Err(Error::Parse(format!("y has {} entries, expected {}", side.y.len(), side.m)));
    }
    if [&side.f, &side.e, &side.y].iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::Parse("non-finite vector entry".into()));
    }
    let pattern = SignPattern::new(side.support, side.signs);
    let mut inst = Instance::assemble(a, DVector::from_vec(side.f), DVector::from_vec(side.e), pattern)
        .map_err(|e| Error::Parse(e.to_string()))?;
    let y = DVector::from_vec(side.y);
    let tol = 1e-12 * (1.0 + y.amax());
    if (&y - &inst.y).amax() > tol {
        return Err(Error::Parse("y does not equal A f + e".into()));
    }
    inst.seed = side.seed;
    Ok(inst)
}

/// Writes `<prefix>.csv` and `<prefix>.json`; returns both paths.
pub fn write_instance(inst: &Instance, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv_path = prefix.with_extension("csv");
    let json_path = prefix.with_extension("json");
    let csv_name = csv_path.file_name().map(|s| s.to_string_lossy().into_owned());
    fs::write(&csv_path, matrix_to_csv(&inst.a))?;
    let side = InstanceSidecar::from_instance(inst, csv_name);
    fs::write(&json_path, serde_json::to_string_pretty(&side)? + "\n")?;
    Ok((csv_path, json_path))
}

/// Reads an instance from its sidecar; the matrix is located through the
/// sidecar's `matrix` field, or next to it with a `.csv` extension.
pub fn read_instance(sidecar_path: &Path) -> Result<Instance> {
    let json = fs::read_to_string(sidecar_path)?;
    let side: InstanceSidecar = serde_json::from_str(&json)?;
    let csv_path = match &side.matrix {
        Some(name) => sidecar_path.parent().unwrap_or(Path::new(".")).join(name),
        None => sidecar_path.with_extension("csv"),
    };
    parse_instance(&fs::read_to_string(csv_path)?, &json)
}

/// Parses a certification report and checks its internal consistency.
pub fn parse_certify_report(json: &str) -> Result<CertifyReport> {
    let report: CertifyReport = serde_json::from_str(json)?;
    if report.witness.is_empty() || report.witness.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse("witness must be a nonempty finite vector".into()));
    }
    let norm = report.witness.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Parse(format!("witness norm {norm} is not 1")));
    }
    if report.verdict != Verdict::from_margin(report.min_margin) || report.violated != (report.min_margin < 0.0) {
        return Err(Error::Parse("verdict disagrees with min_margin".into()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_instance, ErrorSpec};

    #[test]
    fn sig9_matches_printf_g() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.239_031_415_9), "0.239031416");
        assert_eq!(sig9(-1.177_410_022_515), "-1.17741002");
        assert_eq!(sig9(123_456_789.4), "123456789");
        assert_eq!(sig9(1_234_567_890.0), "1.23456789e+09");
        assert_eq!(sig9(1.5e-7), "1.5e-07");
        assert_eq!(sig9(9.999_999_999_6), "10");
        assert_eq!(sig9(0.0001), "0.0001");
        assert_eq!(sig9(f64::NAN), "NaN");
    }

    #[test]
    fn matrix_csv_rejects_ragged_rows() {
        assert!(parse_matrix_csv("1,2\n3\n").is_err());
        assert!(parse_matrix_csv("").is_err());
        assert!(parse_matrix_csv("1,x\n").is_err());
        assert!(parse_matrix_csv("1,inf\n").is_err());
        let a = parse_matrix_csv("1, 2\n3,4\n\n").unwrap();
        assert_eq!(a[(1, 0)], 3.0);
    }

    #[test]
    fn instance_text_round_trip() {
        let inst = make_instance(12, 3, &ErrorSpec::gaussian(0.25), SeedSpec::new(3, 0)).unwrap();
        let csv = matrix_to_csv(&inst.a);
        let json = serde_json::to_string(&InstanceSidecar::from_instance(&inst, None)).unwrap();
        let back = parse_instance(&csv, &json).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn instance_rejects_tampering() {
        let inst = make_instance(12, 3, &ErrorSpec::gaussian(0.25), SeedSpec::new(3, 0)).unwrap();
        let csv = matrix_to_csv(&inst.a);
        let mut side = InstanceSidecar::from_instance(&inst, None);
        side.y[0] += 1.0;
        assert!(parse_instance(&csv, &serde_json::to_string(&side).unwrap()).is_err());
        let mut side = InstanceSidecar::from_instance(&inst, None);
        let off = (0..12).find(|i| !side.support.contains(i)).unwrap();
        side.e[off] = 1.0;
        assert!(parse_instance(&csv, &serde_json::to_string(&side).unwrap()).is_err());
        let mut side = InstanceSidecar::from_instance(&inst, None);
        side.m = 11;
        assert!(parse_instance(&csv, &serde_json::to_string(&side).unwrap()).is_err());
    }

    #[test]
    fn curve_csv_leaves_missing_derivative_empty() {
        let pt = ThresholdPoint { p: 1.0, z_star: 1.1774100225, rho_star: 0.2390, drho_dp: None };
        assert_eq!(curve_csv(&[pt]), "p,z_star,rho_star,drho_dp\n1,1.17741002,0.239,\n");
    }
}
