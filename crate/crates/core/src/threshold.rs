//! The worst-case recovery threshold curve `rho*(p)`.
//!
//! For `p in (0, 1]`, `z*` solves `g(z*) = g(0)/2` where
//! `g(t) = int_t^inf z^p f(z) dz` is the half-normal tail moment, and
//! `rho* = 1 - F(z*)`: the fraction of largest-magnitude coordinates of a
//! Gaussian vector that carries half of its total `p`-th power mass.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::halfnormal::{HalfNormal, MomentQuery};
use crate::seed::SeedSpec;

pub const DEFAULT_TOL: f64 = 1e-10;
const BRACKET: (f64, f64) = (0.0, 10.0);
const MAX_BISECTIONS: usize = 200;
/// Smallest sample size accepted by [`mc_threshold_oracle`].
pub const MIN_ORACLE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub p: f64,
    pub z_star: f64,
    pub rho_star: f64,
    pub drho_dp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRequest {
    pub p_min: f64,
    pub p_max: f64,
    pub steps: usize,
    pub with_derivative: bool,
}

impl CurveRequest {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_min > 0.0 && self.p_min <= self.p_max && self.p_max <= 1.0) {
            return domain(format!("need 0 < p_min <= p_max <= 1, got [{}, {}]", self.p_min, self.p_max));
        }
        if self.steps == 0 {
            return domain("curve needs at least one step");
        }
        if self.steps > 1 && self.p_min == self.p_max {
            return domain("several steps over a degenerate p-range");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.p_min];
        }
        let h = (self.p_max - self.p_min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.p_max } else { self.p_min + h * i as f64 }).collect()
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 || p > 1.0 {
        return domain(format!("exponent p={p} outside (0, 1]"));
    }
    Ok(())
}

/// Threshold computations backed by a half-normal quadrature engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThresholdSolver {
    hn: HalfNormal,
}

impl ThresholdSolver {
    pub fn new(hn: HalfNormal) -> Self {
        ThresholdSolver { hn }
    }

    /// Bisection for `g(z) = g(0)/2` on `[0, 10]`; the result satisfies
    /// `|g(z*) - g(0)/2| <= tol * g(0)`.
    pub fn solve_zstar(&self, p: f64, tol: f64) -> Result<f64> {
        check_exponent(p)?;
        if !(tol > 0.0) {
            return domain(format!("tolerance {tol} must be positive"));
        }
        let g0 = self.hn.mu(p)?;
        let target = 0.5 * g0;
        let excess = |z: f64| -> Result<f64> { Ok(self.hn.tail_moment(MomentQuery::new(p, z)?)? - target) };

        let (mut lo, mut hi) = BRACKET;
        if !(excess(lo)? > 0.0 && excess(hi)? < 0.0) {
            return Err(Error::Numeric(format!("g(z) - g(0)/2 not bracketed on {BRACKET:?} for p={p}")));
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z = 0.5 * (lo + hi);
        let residual = excess(z)?;
        if residual.abs() > tol * g0 {
            return Err(Error::Numeric(format!("z* residual {residual:e} exceeds tolerance {:e} at p={p}", tol * g0)));
        }
        Ok(z)
    }

    /// `H(z, p) = int_0^z x^p f - int_z^inf x^p f`, zero at `z = z*(p)`.
    pub fn defining_residual(&self, z: f64, p: f64) -> Result<f64> {
        let total = self.hn.mu(p)?;
        let upper = self.hn.tail_moment(MomentQuery::new(p, z)?)?;
        Ok((total - upper) - upper)
    }

    pub fn rho_star(&self, p: f64) -> Result<f64> {
        let z = self.solve_zstar(p, DEFAULT_TOL)?;
        Ok(1.0 - self.hn.cdf(z)?)
    }

    /// Numerator of `d rho*/dp`: `int_0^z* x^p ln(x) f - int_z*^inf x^p ln(x) f`.
    pub fn derivative_numerator(&self, p: f64, z_star: f64) -> Result<f64> {
        let (head, tail) = self.hn.log_moment_integrals(p, z_star)?;
        Ok(head - tail)
    }

    /// `d rho*/dp = numerator / (2 z*^p)`, from implicit differentiation of
    /// `H(z*, p) = 0`.
    pub fn drho_dp(&self, p: f64) -> Result<f64> {
        let z = self.solve_zstar(p, DEFAULT_TOL)?;
        Ok(self.derivative_numerator(p, z)? / (2.0 * z.powf(p)))
    }

    pub fn point(&self, p: f64, with_derivative: bool) -> Result<ThresholdPoint> {
        let z_star = self.solve_zstar(p, DEFAULT_TOL)?;
        let rho_star = 1.0 - self.hn.cdf(z_star)?;
        let drho_dp =
            if with_derivative { Some(self.derivative_numerator(p, z_star)? / (2.0 * z_star.powf(p))) } else { None };
        Ok(ThresholdPoint { p, z_star, rho_star, drho_dp })
    }

    /// Samples the curve on a uniform p-grid. Points are computed in
    /// parallel; the output order follows the grid.
    pub fn curve(&self, req: &CurveRequest) -> Result<Vec<ThresholdPoint>> {
        req.validate()?;
        req.grid().into_par_iter().map(|p| self.point(p, req.with_derivative)).collect()
    }
}

pub fn solve_zstar(p: f64, tol: f64) -> Result<f64> {
    ThresholdSolver::default().solve_zstar(p, tol)
}

pub fn rho_star(p: f64) -> Result<f64> {
    ThresholdSolver::default().rho_star(p)
}

pub fn drho_dp(p: f64) -> Result<f64> {
    ThresholdSolver::default().drho_dp(p)
}

pub fn curve(req: &CurveRequest) -> Result<Vec<ThresholdPoint>> {
    ThresholdSolver::default().curve(req)
}

/// Empirical threshold from order statistics.
///
/// Draws `m` standard normals, sorts `|X_i|^p` in non-increasing order and
/// returns `k/m` for the smallest `k` whose prefix sum reaches half of the
/// total.
pub fn mc_threshold_oracle(p: f64, m: usize, seed: u64) -> Result<f64> {
    check_exponent(p)?;
    if m < MIN_ORACLE_SAMPLES {
        return domain(format!("oracle needs m >= {MIN_ORACLE_SAMPLES}, got {m}"));
    }
    let mut rng = SeedSpec::new(seed, 0).rng();
    let mut powers: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal).abs().powf(p)).collect();
    powers.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(half_mass_count(&powers) as f64 / m as f64)
}

/// Smallest `k` with `sum(sorted[..k]) >= sum(sorted) / 2`, for a
/// non-increasing slice.
pub(crate) fn half_mass_count(sorted_desc: &[f64]) -> usize {
    let total: f64 = sorted_desc.iter().sum();
    let half = 0.5 * total;
    let mut acc = 0.0;
    for (i, v) in sorted_desc.iter().enumerate() {
        acc += v;
        if acc >= half {
            return i + 1;
        }
    }
    sorted_desc.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfnormal;

    #[test]
    fn zstar_at_one_is_sqrt_two_ln_two() {
        let z = solve_zstar(1.0, DEFAULT_TOL).unwrap();
        assert!((z - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-5);
        assert!((z - 1.177_410).abs() < 1e-5);
    }

    #[test]
    fn zstar_tends_to_half_normal_median() {
        // bisection on cdf = 1/2 gives the median
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if halfnormal::cdf(mid).unwrap() < 0.5 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let z = solve_zstar(0.001, DEFAULT_TOL).unwrap();
        assert!((z - lo).abs() < 0.01, "{z} vs median {lo}");
    }

    #[test]
    fn defining_residual_vanishes() {
        let s = ThresholdSolver::default();
        for p in [0.25, 0.5, 0.75] {
            let z = s.solve_zstar(p, DEFAULT_TOL).unwrap();
            assert!(s.defining_residual(z, p).unwrap().abs() < 2.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(rho_star(0.0).is_err());
        assert!(rho_star(1.01).is_err());
        assert!(solve_zstar(0.5, 0.0).is_err());
        assert!(mc_threshold_oracle(0.5, 100, 1).is_err());
    }

    #[test]
    fn numerator_is_negative() {
        let s = ThresholdSolver::default();
        for p in [0.1, 0.5, 1.0] {
            let z = s.solve_zstar(p, DEFAULT_TOL).unwrap();
            assert!(s.derivative_numerator(p, z).unwrap() < 0.0);
        }
    }

    #[test]
    fn single_point_curve() {
        let pts = curve(&CurveRequest { p_min: 1.0, p_max: 1.0, steps: 1, with_derivative: false }).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].rho_star, rho_star(1.0).unwrap());
        assert!(pts[0].drho_dp.is_none());
        assert!(curve(&CurveRequest { p_min: 0.5, p_max: 0.5, steps: 3, with_derivative: false }).is_err());
        assert!(curve(&CurveRequest { p_min: 0.0, p_max: 0.5, steps: 3, with_derivative: false }).is_err());
    }

    #[test]
    fn half_mass_count_edges() {
        assert_eq!(half_mass_count(&[3.0, 1.0, 1.0, 1.0]), 1);
        assert_eq!(half_mass_count(&[1.0, 1.0, 1.0, 1.0]), 2);
        assert_eq!(half_mass_count(&[1.5, 1.0, 1.0]), 2);
    }

    #[test]
    fn oracle_is_deterministic() {
        let a = mc_threshold_oracle(0.5, 20_000, 9).unwrap();
        let b = mc_threshold_oracle(0.5, 20_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
