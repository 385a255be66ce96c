//! Oracles shared by the integration tests. They use statrs special
//! functions only, never the crate's own quadrature.
#![allow(dead_code)]

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, gamma_ur};

/// `int_t^inf z^p sqrt(2/pi) exp(-z^2/2) dz` via the upper incomplete gamma.
pub fn tail_moment_oracle(p: f64, t: f64) -> f64 {
    let a = 0.5 * (p + 1.0);
    mu_oracle(p) * gamma_ur(a, 0.5 * t * t)
}

/// `E|X|^p = 2^(p/2) Gamma((p+1)/2) / sqrt(pi)`.
pub fn mu_oracle(p: f64) -> f64 {
    2f64.powf(0.5 * p) * gamma(0.5 * (p + 1.0)) / std::f64::consts::PI.sqrt()
}

/// Threshold through `Q((p+1)/2, z^2/2) = 1/2`, solved by bisection.
pub fn rho_star_oracle(p: f64) -> f64 {
    let a = 0.5 * (p + 1.0);
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_ur(a, 0.5 * mid * mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    erfc(z / std::f64::consts::SQRT_2)
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// All `k`-subsets of `0..m`, in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}
