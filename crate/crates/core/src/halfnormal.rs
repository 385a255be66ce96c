//! The half-normal law of |X|, X ~ N(0, 1).
//!
//! Every quantity here is obtained by adaptive quadrature on `[0, z_max]`;
//! the mass beyond `z_max` is never ignored but folded into the reported
//! error bound through the Gaussian tail inequality
//! `int_T^inf z^2 f(z) dz <= f(T) (T + 1/T)`, which dominates
//! `z^p f(z)` and `z^p ln(z) f(z)` for `z >= 1` and `p <= 2` (resp. `p <= 1`).

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{domain, Result};
use crate::quadrature::{integrate, Integral};

/// sqrt(2/pi), the half-normal density at zero.
pub const PDF_AT_ZERO: f64 = 0.797_884_560_802_865_4;

/// Below this point the `ln x` singularity of the log-moment integrand is
/// handled in closed form.
const LOG_SPLIT: f64 = 1e-3;

/// Exponent and truncation point of a tail moment `int_t^inf z^p f(z) dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentQuery {
    pub p: f64,
    pub t: f64,
}

impl MomentQuery {
    pub fn new(p: f64, t: f64) -> Result<Self> {
        let q = MomentQuery { p, t };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p.is_finite() || self.p <= 0.0 || self.p > 2.0 {
            return domain(format!("moment exponent p={} outside (0, 2]", self.p));
        }
        if !self.t.is_finite() || self.t < 0.0 {
            return domain(format!("truncation point t={} must be finite and >= 0", self.t));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper cutoff of the semi-infinite integrals; at least 8.
    pub z_max: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-13, z_max: 10.0 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if !(self.z_max >= 8.0) || !self.z_max.is_finite() {
            return domain(format!("z_max={} must be finite and >= 8", self.z_max));
        }
        Ok(())
    }
}

fn density(z: f64) -> f64 {
    (FRAC_2_PI).sqrt() * (-0.5 * z * z).exp()
}

/// Upper bound on `int_t^inf z^2 f(z) dz` for `t >= 1`.
fn second_moment_tail_bound(t: f64) -> f64 {
    let t = t.max(1.0);
    density(t) * (t + 1.0 / t)
}

/// Half-normal quadrature engine with a fixed configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfNormal {
    cfg: QuadratureConfig,
}

impl HalfNormal {
    pub fn new(cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(HalfNormal { cfg })
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    fn quad<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Integral {
        integrate(f, a, b, self.cfg.abs_tol, self.cfg.rel_tol)
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        if !z.is_finite() || z < 0.0 {
            return domain(format!("pdf argument z={z} must be finite and >= 0"));
        }
        Ok(density(z))
    }

    /// `P(|X| <= z)` as `int_0^z f`; beyond `z_max` the missing tail is part
    /// of the error bound.
    pub fn cdf_with_error(&self, z: f64) -> Result<Integral> {
        if z.is_nan() || z < 0.0 {
            return domain(format!("cdf argument z={z} must be >= 0"));
        }
        let upper = z.min(self.cfg.z_max);
        let mut r = self.quad(density, 0.0, upper);
        if z > self.cfg.z_max {
            r.abs_error += second_moment_tail_bound(self.cfg.z_max);
        }
        Ok(r)
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        Ok(self.cdf_with_error(z)?.value.clamp(0.0, 1.0))
    }

    /// `E|X|^p` for `p in (0, 2]`.
    pub fn mu(&self, p: f64) -> Result<f64> {
        Ok(self.tail_moment_with_error(MomentQuery::new(p, 0.0)?)?.value)
    }

    /// `g(t) = int_t^inf z^p f(z) dz` with its error bound.
    pub fn tail_moment_with_error(&self, q: MomentQuery) -> Result<Integral> {
        q.validate()?;
        let tail = second_moment_tail_bound(self.cfg.z_max.max(q.t));
        if q.t >= self.cfg.z_max {
            return Ok(Integral { value: 0.0, abs_error: tail });
        }
        let p = q.p;
        let mut r = self.quad(|z: f64| z.powf(p) * density(z), q.t, self.cfg.z_max);
        r.abs_error += tail;
        Ok(r)
    }

    pub fn tail_moment(&self, q: MomentQuery) -> Result<f64> {
        Ok(self.tail_moment_with_error(q)?.value)
    }

    /// `int_lo^hi x^p ln(x) f(x) dx` for `0 <= lo <= hi`.
    fn log_moment_between(&self, p: f64, lo: f64, hi: f64) -> Integral {
        if hi <= lo {
            return Integral::zero();
        }
        let mut total = Integral::zero();
        let mut start = lo;
        if lo < LOG_SPLIT {
            let a = hi.min(LOG_SPLIT);
            total = total + near_zero_log_moment(p, lo, a);
            start = a;
        }
        let upper = hi.min(self.cfg.z_max);
        if upper > start {
            total = total + self.quad(|x: f64| x.powf(p) * x.ln() * density(x), start, upper);
        }
        if hi > self.cfg.z_max {
            total.abs_error += second_moment_tail_bound(self.cfg.z_max);
        }
        total
    }

    /// Returns `(int_0^z* x^p ln(x) f(x) dx, int_z*^inf x^p ln(x) f(x) dx)`.
    pub fn log_moment_integrals(&self, p: f64, zstar: f64) -> Result<(f64, f64)> {
        let (head, tail) = self.log_moment_integrals_with_error(p, zstar)?;
        Ok((head.value, tail.value))
    }

    pub fn log_moment_integrals_with_error(&self, p: f64, zstar: f64) -> Result<(Integral, Integral)> {
        if !p.is_finite() || p <= 0.0 || p > 1.0 {
            return domain(format!("log-moment exponent p={p} outside (0, 1]"));
        }
        if !zstar.is_finite() || zstar <= 0.0 {
            return domain(format!("split point z*={zstar} must be finite and > 0"));
        }
        let head = self.log_moment_between(p, 0.0, zstar);
        let tail = self.log_moment_between(p, zstar, f64::INFINITY);
        Ok((head, tail))
    }
}

/// `int_lo^hi x^p ln(x) f(x) dx` on a subinterval of `[0, 1e-3]`.
///
/// On that interval `f` lies in `[f(hi), f(0)]` and `x^p ln x` keeps one
/// sign, so the integral is the closed-form `int x^p ln x dx` times a
/// density value in that range; the midpoint is reported and half the range
/// is the error bound.
fn near_zero_log_moment(p: f64, lo: f64, hi: f64) -> Integral {
    let q = p + 1.0;
    let antiderivative = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            x.powf(q) * (x.ln() / q - 1.0 / (q * q))
        }
    };
    let base = antiderivative(hi) - antiderivative(lo);
    let (f_hi, f_lo) = (density(hi), density(lo));
    Integral { value: base * 0.5 * (f_hi + f_lo), abs_error: base.abs() * 0.5 * (f_lo - f_hi) }
}

/// `E|X|^p` from the Gamma-function closed form, `2^(p/2) Gamma((p+1)/2) / sqrt(pi)`.
///
/// Only used to cross-check the quadrature; relies on a Lanczos Gamma.
pub fn mu_closed_form(p: f64) -> f64 {
    2f64.powf(0.5 * p) * gamma((p + 1.0) / 2.0) / PI.sqrt()
}

// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 for x > 0.
fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

pub fn pdf(z: f64) -> Result<f64> {
    HalfNormal::default().pdf(z)
}

pub fn cdf(z: f64) -> Result<f64> {
    HalfNormal::default().cdf(z)
}

pub fn mu(p: f64) -> Result<f64> {
    HalfNormal::default().mu(p)
}

pub fn tail_moment(q: MomentQuery) -> Result<f64> {
    HalfNormal::default().tail_moment(q)
}

pub fn log_moment_integrals(p: f64, zstar: f64) -> Result<(f64, f64)> {
    HalfNormal::default().log_moment_integrals(p, zstar)
}
