//! `min_x ||y - A x||_p^p` by iteratively reweighted least squares.
//!
//! Each inner step minimizes the quadratic majorizer of the smoothed
//! objective `sum_i (r_i^2 + eps)^(p/2)` at the current residual, which is
//! the weighted least-squares problem with `w_i = (r_i^2 + eps)^(p/2 - 1)`.
//! The smoothing `eps` is shrunk geometrically between phases. It is
//! measured in units of the mean squared residual of the unweighted fit
//! (floored at a small fraction of the mean square of `y`), so
//! the whole iteration is equivariant under `y -> c y`.
//!
//! This finds a local minimizer only; for `p < 1` the objective is
//! nonconvex and no global certificate is attempted.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::seed::SeedSpec;

/// Smoothing is measured against `max(mean r0^2, (SCALE_FLOOR * rms(y))^2)`,
/// where `r0` is the least-squares residual.
const SCALE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub p: f64,
    pub eps_start: f64,
    pub eps_min: f64,
    pub eps_shrink: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Relative step tolerance `||dx||_inf <= inner_tol * ||x||_inf`.
    pub inner_tol: f64,
    pub restarts: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            p: 1.0,
            eps_start: 1.0,
            eps_min: 1e-8,
            eps_shrink: 0.1,
            max_outer: 12,
            max_inner: 100,
            inner_tol: 1e-10,
            restarts: 1,
        }
    }
}

impl DecoderConfig {
    pub fn with_p(p: f64) -> Self {
        DecoderConfig { p, ..Default::default() }
    }

    /// Five restarts, for certification-grade decoding.
    pub fn thorough(p: f64) -> Self {
        DecoderConfig { p, restarts: 5, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return domain(format!("decoder exponent p={} outside (0, 1]", self.p));
        }
        if !(self.eps_min > 0.0 && self.eps_min < self.eps_start && self.eps_start.is_finite()) {
            return domain("need 0 < eps_min < eps_start");
        }
        if !(self.eps_shrink > 0.0 && self.eps_shrink < 1.0) {
            return domain("eps_shrink must lie in (0, 1)");
        }
        if !(self.inner_tol > 0.0) {
            return domain("inner_tol must be positive");
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.restarts == 0 {
            return domain("max_outer, max_inner and restarts must be >= 1");
        }
        Ok(())
    }
}

/// One IRLS iterate. `eps` is the absolute smoothing in force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub phase: usize,
    pub eps: f64,
    pub smoothed: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub x_hat: Vec<f64>,
    pub objective: f64,
    /// Per phase: the smoothed objective at the phase's starting point,
    /// followed by one entry per weighted solve.
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub converged: bool,
}

impl DecodeResult {
    /// `||y - A x||_p^p` after every weighted solve.
    pub fn objective_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|t| t.objective).collect()
    }
}

/// `sum_i |r_i|^p`.
pub fn lp_objective(r: &[f64], p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 1.0);
    r.iter().map(|v| v.abs().powf(p)).sum()
}

/// `sum_i (r_i^2 + eps)^(p/2)`.
pub fn smoothed_objective(r: &[f64], p: f64, eps: f64) -> f64 {
    r.iter().map(|v| (v * v + eps).powf(0.5 * p)).sum()
}

/// `argmin_x sum_i w_i (y - A x)_i^2` through a Householder QR of
/// `diag(sqrt(w)) A`.
pub fn weighted_least_squares(a: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if y.len() != m || w.len() != m {
        return domain(format!("weighted LS shape mismatch: A {m}x{n}, y {}, w {}", y.len(), w.len()));
    }
    if m < n {
        return Err(Error::Singular(format!("{m} equations for {n} unknowns")));
    }
    if let Some(i) = w.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return domain(format!("weight w[{i}]={} must be positive and finite", w[i]));
    }
    let sqrt_w = w.map(f64::sqrt);
    let mut scaled = a.clone();
    for (mut row, s) in scaled.row_iter_mut().zip(sqrt_w.iter()) {
        row *= *s;
    }
    let mut rhs = y.component_mul(&sqrt_w);

    let qr = scaled.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let floor = diag_max * f64::EPSILON * m as f64;
    if let Some(j) = r.diagonal().iter().position(|v| !(v.abs() > floor)) {
        return Err(Error::Singular(format!(
            "column {j} is numerically dependent (|R_jj| = {:e}, max {:e})",
            r[(j, j)].abs(),
            diag_max
        )));
    }
    qr.q_tr_mul(&mut rhs);
    let head = rhs.rows(0, n).into_owned();
    r.solve_upper_triangular(&head).ok_or_else(|| Error::Singular("triangular solve failed".into()))
}

fn residual(a: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    y - a * x
}

fn check_finite(x: &DVector<f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric("non-finite iterate".into()))
    }
}

struct Run {
    x: DVector<f64>,
    objective: f64,
    trace: Vec<TraceEntry>,
    iterations: usize,
    converged: bool,
}

fn irls(a: &DMatrix<f64>, y: &DVector<f64>, cfg: &DecoderConfig, scale: f64, mut x: DVector<f64>) -> Result<Run> {
    let p = cfg.p;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut eps = cfg.eps_start;
    for phase in 0..cfg.max_outer {
        let eps_abs = eps * scale;
        let r = residual(a, y, &x);
        trace.push(TraceEntry {
            phase,
            eps: eps_abs,
            smoothed: smoothed_objective(r.as_slice(), p, eps_abs),
            objective: lp_objective(r.as_slice(), p),
        });
        converged = false;
        let mut r = r;
        for _ in 0..cfg.max_inner {
            let w = r.map(|ri| (ri * ri + eps_abs).powf(0.5 * p - 1.0));
            let next = weighted_least_squares(a, y, &w)?;
            check_finite(&next)?;
            let step = (&next - &x).amax();
            x = next;
            r = residual(a, y, &x);
            iterations += 1;
            trace.push(TraceEntry {
                phase,
                eps: eps_abs,
                smoothed: smoothed_objective(r.as_slice(), p, eps_abs),
                objective: lp_objective(r.as_slice(), p),
            });
            if step <= cfg.inner_tol * x.amax() {
                converged = true;
                break;
            }
        }
        if eps <= cfg.eps_min * (1.0 + 1e-9) {
            break;
        }
        eps = (eps * cfg.eps_shrink).max(cfg.eps_min);
    }
    let objective = lp_objective(residual(a, y, &x).as_slice(), p);
    Ok(Run { x, objective, trace, iterations, converged })
}

/// Decodes `y ~ A f` under the `l_p` loss.
///
/// Restart 0 starts from the unweighted least-squares fit `x0`; restart
/// `k > 0` perturbs `x0` by seeded Gaussian noise of scale
/// `0.1 ||x0||_2 / sqrt(n)`. The restart with the smallest objective wins
/// (earliest on ties).
pub fn decode(a: &DMatrix<f64>, y: &DVector<f64>, cfg: &DecoderConfig, seed: SeedSpec) -> Result<DecodeResult> {
    cfg.validate()?;
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return domain(format!("decoder needs m >= n >= 1, got {m}x{n}"));
    }
    if y.len() != m {
        return domain(format!("y has {} entries, expected {m}", y.len()));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("non-finite observations".into()));
    }
    let x0 = weighted_least_squares(a, y, &DVector::from_element(m, 1.0))?;
    let r0 = residual(a, y, &x0);
    // An exact fit leaves r0 at roundoff, where the smoothing would only
    // resolve rounding noise.
    let floor = SCALE_FLOOR * SCALE_FLOOR * y.norm_squared() / m as f64;
    let mut scale = (r0.norm_squared() / m as f64).max(floor);
    if !(scale > 0.0) {
        scale = 1.0;
    }

    let mut best: Option<Run> = None;
    for k in 0..cfg.restarts {
        let start = if k == 0 {
            x0.clone()
        } else {
            let mut rng = seed.derive(&[k as u64]).rng();
            let amp = 0.1 * x0.norm() / (n as f64).sqrt();
            DVector::from_iterator(n, x0.iter().map(|v| v + amp * rng.sample::<f64, _>(StandardNormal)))
        };
        let run = irls(a, y, cfg, scale, start)?;
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    Ok(DecodeResult {
        x_hat: best.x.as_slice().to_vec(),
        objective: best.objective,
        trace: best.trace,
        iterations: best.iterations,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::gaussian_matrix;

    #[test]
    fn objective_arithmetic() {
        assert_eq!(lp_objective(&[0.0, 0.0], 0.3), 0.0);
        assert_eq!(lp_objective(&[3.0, 4.0], 1.0), 7.0);
        assert!((lp_objective(&[4.0, 9.0], 0.5) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn wls_mean_and_dominant_weight() {
        let a = DMatrix::from_element(3, 1, 1.0);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = weighted_least_squares(&a, &y, &DVector::from_element(3, 1.0)).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        let x = weighted_least_squares(&a, &y, &DVector::from_vec(vec![1.0, 1.0, 1e6])).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn wls_orthogonality() {
        let a = gaussian_matrix(50, 10, SeedSpec::new(4, 0)).unwrap();
        let mut rng = SeedSpec::new(4, 1).rng();
        let y = DVector::from_iterator(50, (0..50).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let w = DVector::from_iterator(50, (0..50).map(|_| rng.random_range(0.1..10.0)));
        let x = weighted_least_squares(&a, &y, &w).unwrap();
        let g = a.transpose() * (y.clone() - &a * x).component_mul(&w);
        let scale = a.amax() * w.amax() * y.amax();
        assert!(g.amax() <= 1e-8 * scale, "{}", g.amax());
    }

    #[test]
    fn wls_rejects_rank_deficiency_and_bad_weights() {
        let mut a = gaussian_matrix(10, 3, SeedSpec::new(1, 0)).unwrap();
        let c0 = a.column(0).into_owned();
        a.set_column(2, &(c0 * 2.0));
        let y = DVector::from_element(10, 1.0);
        let w = DVector::from_element(10, 1.0);
        assert!(matches!(weighted_least_squares(&a, &y, &w), Err(Error::Singular(_))));
        let good = gaussian_matrix(10, 3, SeedSpec::new(1, 0)).unwrap();
        let mut bad_w = w.clone();
        bad_w[4] = 0.0;
        assert!(weighted_least_squares(&good, &y, &bad_w).is_err());
    }

    #[test]
    fn one_dimensional_outlier() {
        // |7 - x|^0.5 + 2|2 - x|^0.5 is minimized at x = 2
        let a = DMatrix::from_element(3, 1, 1.0);
        let y = DVector::from_vec(vec![7.0, 2.0, 2.0]);
        let res = decode(&a, &y, &DecoderConfig::with_p(0.5), SeedSpec::new(0, 0)).unwrap();
        assert!((res.x_hat[0] - 2.0).abs() < 1e-4, "{:?}", res.x_hat);
        assert!(res.objective >= 5f64.sqrt() && res.objective < 5f64.sqrt() + 1e-2);
    }

    #[test]
    fn config_validation() {
        let mut cfg = DecoderConfig::with_p(0.5);
        cfg.eps_min = 2.0;
        assert!(cfg.validate().is_err());
        assert!(DecoderConfig::with_p(0.0).validate().is_err());
        assert!(DecoderConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(DecoderConfig::thorough(0.7).validate().is_ok());
    }

    #[test]
    fn zero_observations_decode_to_zero() {
        let a = gaussian_matrix(20, 4, SeedSpec::new(2, 0)).unwrap();
        let y = DVector::zeros(20);
        let res = decode(&a, &y, &DecoderConfig::with_p(0.5), SeedSpec::new(0, 0)).unwrap();
        assert!(res.x_hat.iter().all(|&v| v == 0.0));
        assert!(res.converged);
    }
}
