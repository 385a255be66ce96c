//! Grid specifications: `start:stop:step`, a comma list, or one value.

use crate::error::{Error, Result};

const MAX_POINTS: usize = 1_000_000;

fn number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("'{}' is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("'{}' is not finite", s.trim())));
    }
    Ok(v)
}

// snaps start + i*step onto a 1e-12 lattice so 0.05*3 prints as 0.15
fn snap(v: f64) -> f64 {
    let s = (v * 1e12).round() / 1e12;
    if s.is_finite() {
        s
    } else {
        v
    }
}

/// Parses a grid. Ranges include `stop` whenever the last point lies
/// within `step / 2` of it.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Parse("empty grid".into()));
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("range '{spec}' must be start:stop:step")));
        }
        let (start, stop, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if !(step > 0.0) {
            return Err(Error::Parse(format!("step {step} must be positive")));
        }
        if stop < start {
            return Err(Error::Parse(format!("stop {stop} below start {start}")));
        }
        let count = ((stop - start) / step + 0.5).floor();
        if !(count < MAX_POINTS as f64) {
            return Err(Error::Parse(format!("range '{spec}' has too many points")));
        }
        let count = count as usize + 1;
        return Ok((0..count).map(|i| snap(start + step * i as f64)).collect());
    }
    let values: Vec<f64> = spec.split(',').map(number).collect::<Result<_>>()?;
    Ok(values)
}
