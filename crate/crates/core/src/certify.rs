//! Null-space conditions for `l_p` decoding on a concrete matrix.
//!
//! For a direction `z` with `u = A z`, the unsigned condition asks that the
//! `p`-th power mass of `u` on any support of size `ceil(rho m)` stays below
//! the mass off it; the worst support is the set of largest `|u_i|`. The
//! signed condition (fixed support `T` and fixed signs) only charges the
//! indices of `T` where `u_i` disagrees in sign with the error.
//!
//! A negative margin found by [`search_violation`] is a constructive
//! disproof; a nonnegative one proves nothing.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::lp_objective;
use crate::ensemble::{ceil_count, SignPattern};
use crate::error::{domain, Error, Result};
use crate::seed::SeedSpec;

/// Projected subgradient steps per restart.
pub const SEARCH_STEPS: usize = 500;
const INITIAL_STEP: f64 = 0.5;
pub const HEAD_SCALE_START: f64 = 10.0;
const HEAD_SCALE_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionMode {
    Unsigned { rho: f64 },
    Signed { pattern: SignPattern },
}

impl ConditionMode {
    pub fn name(&self) -> &'static str {
        match self {
            ConditionMode::Unsigned { .. } => "unsigned",
            ConditionMode::Signed { .. } => "signed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionQuery {
    pub a: DMatrix<f64>,
    pub p: f64,
    pub mode: ConditionMode,
}

impl ConditionQuery {
    pub fn unsigned(a: DMatrix<f64>, p: f64, rho: f64) -> Self {
        ConditionQuery { a, p, mode: ConditionMode::Unsigned { rho } }
    }

    pub fn signed(a: DMatrix<f64>, p: f64, pattern: SignPattern) -> Self {
        ConditionQuery { a, p, mode: ConditionMode::Signed { pattern } }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return domain(format!("exponent p={} outside (0, 1]", self.p));
        }
        match &self.mode {
            ConditionMode::Unsigned { rho } => {
                if !(0.0..=1.0).contains(rho) {
                    return domain(format!("rho={rho} outside [0, 1]"));
                }
            }
            ConditionMode::Signed { pattern } => pattern.validate(self.a.nrows())?,
        }
        Ok(())
    }

    /// Corrupted fraction: `rho` itself, or `|T| / m` in signed mode.
    pub fn rho(&self) -> f64 {
        match &self.mode {
            ConditionMode::Unsigned { rho } => *rho,
            ConditionMode::Signed { pattern } => pattern.len() as f64 / self.a.nrows() as f64,
        }
    }

    pub fn margin(&self, z: &[f64]) -> Result<f64> {
        match &self.mode {
            ConditionMode::Unsigned { rho } => unsigned_margin(&self.a, self.p, *rho, z),
            ConditionMode::Signed { pattern } => signed_margin(&self.a, self.p, pattern, z),
        }
    }

    /// Per-row coefficient in `{-1, 0, +1}` such that the margin at `z`
    /// equals `sum_i c_i |(A z)_i|^p`.
    fn coefficients(&self, u: &[f64]) -> Vec<f64> {
        match &self.mode {
            ConditionMode::Unsigned { rho } => {
                let powers: Vec<f64> = u.iter().map(|v| v.abs().powf(self.p)).collect();
                let mut c = vec![1.0; u.len()];
                for i in worst_support(&powers, ceil_count(*rho, u.len())) {
                    c[i] = -1.0;
                }
                c
            }
            ConditionMode::Signed { pattern } => {
                let mut c = vec![1.0; u.len()];
                for (i, s) in pattern.iter() {
                    c[i] = if u[i] * s.value() < 0.0 { -1.0 } else { 0.0 };
                }
                c
            }
        }
    }
}

fn direction(a: &DMatrix<f64>, z: &[f64]) -> Result<DVector<f64>> {
    if z.len() != a.ncols() {
        return domain(format!("direction has length {} but A has {} columns", z.len(), a.ncols()));
    }
    if !z.iter().all(|v| v.is_finite()) {
        return domain("direction must be finite");
    }
    if z.iter().all(|&v| v == 0.0) {
        return domain("direction z must be nonzero");
    }
    Ok(a * DVector::from_column_slice(z))
}

/// Indices of the `k` largest values; ties go to the lowest index.
pub fn worst_support(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// `sum_{T^c} |(Az)_i|^p - sum_T |(Az)_i|^p` for an explicit support `T`.
pub fn support_margin(a: &DMatrix<f64>, p: f64, support: &[usize], z: &[f64]) -> Result<f64> {
    let u = direction(a, z)?;
    let mut in_t = vec![false; u.len()];
    for &i in support {
        if i >= u.len() {
            return domain(format!("support index {i} out of range"));
        }
        in_t[i] = true;
    }
    Ok(u.iter().zip(&in_t).map(|(v, &t)| if t { -v.abs().powf(p) } else { v.abs().powf(p) }).sum())
}

/// Unsigned margin at the worst support of size `ceil(rho m)`; negative
/// means the condition fails for this `z`.
pub fn unsigned_margin(a: &DMatrix<f64>, p: f64, rho: f64, z: &[f64]) -> Result<f64> {
    let u = direction(a, z)?;
    let powers: Vec<f64> = u.iter().map(|v| v.abs().powf(p)).collect();
    let k = ceil_count(rho, u.len());
    let t = worst_support(&powers, k);
    let head: f64 = t.iter().map(|&i| powers[i]).sum();
    let total: f64 = powers.iter().sum();
    let rest = total - head;
    Ok(rest - head)
}

/// `sum_{T^c} |(Az)_i|^p - sum_{T^-} |(Az)_i|^p` with
/// `T^- = { i in T : (Az)_i * sign_i < 0 }`.
pub fn signed_margin(a: &DMatrix<f64>, p: f64, pattern: &SignPattern, z: &[f64]) -> Result<f64> {
    pattern.validate(a.nrows())?;
    let u = direction(a, z)?;
    let mut in_t = vec![false; u.len()];
    let mut mismatched = 0.0;
    for (i, s) in pattern.iter() {
        in_t[i] = true;
        if u[i] * s.value() < 0.0 {
            mismatched += u[i].abs().powf(p);
        }
    }
    let outside: f64 = u.iter().zip(&in_t).filter(|(_, &t)| !t).map(|(v, _)| v.abs().powf(p)).sum();
    Ok(outside - mismatched)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// A direction with negative margin was found.
    Violated,
    /// Best margin exactly zero: the boundary case is not decided.
    Undetermined,
    /// Nothing negative found; not a proof that the condition holds.
    NoViolationFound,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Verdict {
        if margin < 0.0 {
            Verdict::Violated
        } else if margin == 0.0 {
            Verdict::Undetermined
        } else {
            Verdict::NoViolationFound
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub mode: String,
    pub p: f64,
    pub rho: f64,
    pub min_margin: f64,
    pub violated: bool,
    pub verdict: Verdict,
    /// Unit-norm direction achieving `min_margin`.
    pub witness: Vec<f64>,
    pub restarts_used: usize,
}

impl CertifyReport {
    fn new(q: &ConditionQuery, min_margin: f64, witness: Vec<f64>, restarts_used: usize) -> Self {
        let verdict = Verdict::from_margin(min_margin);
        CertifyReport {
            mode: q.mode.name().to_string(),
            p: q.p,
            rho: q.rho(),
            min_margin,
            violated: verdict == Verdict::Violated,
            verdict,
            witness,
            restarts_used,
        }
    }
}

fn normalize(z: &mut [f64]) -> f64 {
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        z.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// One restart of projected subgradient descent on the unit sphere.
fn descend(q: &ConditionQuery, mut z: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    normalize(&mut z);
    let at = q.a.transpose();
    let mut best_margin = q.margin(&z)?;
    let mut best = z.clone();
    for step in 0..SEARCH_STEPS {
        let u = &q.a * DVector::from_column_slice(&z);
        let c = q.coefficients(u.as_slice());
        // smoothed derivative of |u|^p keeps the step finite near u_i = 0
        let eta = 1e-12 * (u.norm_squared() / u.len() as f64).max(f64::MIN_POSITIVE);
        let du = DVector::from_iterator(
            u.len(),
            u.iter().zip(&c).map(|(&ui, &ci)| ci * q.p * ui * (ui * ui + eta).powf(0.5 * q.p - 1.0)),
        );
        let mut g = &at * du;
        let radial = g.dot(&DVector::from_column_slice(&z));
        for (gi, zi) in g.iter_mut().zip(&z) {
            *gi -= radial * zi;
        }
        let gnorm = g.norm();
        if !(gnorm > 0.0) || !gnorm.is_finite() {
            break;
        }
        let h = INITIAL_STEP / ((step + 1) as f64).sqrt();
        for (zi, gi) in z.iter_mut().zip(g.iter()) {
            *zi -= h * gi / gnorm;
        }
        if normalize(&mut z) == 0.0 {
            break;
        }
        let margin = q.margin(&z)?;
        if margin < best_margin {
            best_margin = margin;
            best.copy_from_slice(&z);
        }
    }
    Ok((best_margin, best))
}

/// Multi-restart minimization of the margin over the unit sphere. Restart
/// `r` starts from a Gaussian direction drawn from `seed.derive(&[r])`.
pub fn search_violation(q: &ConditionQuery, restarts: usize, seed: SeedSpec) -> Result<CertifyReport> {
    q.validate()?;
    if restarts == 0 {
        return domain("restarts must be >= 1");
    }
    let n = q.a.ncols();
    let runs: Vec<(f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.derive(&[r as u64]).rng();
            let z0: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            descend(q, z0)
        })
        .collect::<Result<_>>()?;
    let (min_margin, witness) =
        runs.into_iter().reduce(|best, cand| if cand.0 < best.0 { cand } else { best }).expect("restarts >= 1");
    Ok(CertifyReport::new(q, min_margin, witness, restarts))
}

/// Exhaustive scan of a hyperspherical-coordinate grid with the given
/// angular resolution (radians), for `n <= 4`.
pub fn exhaustive_search(q: &ConditionQuery, resolution: f64) -> Result<CertifyReport> {
    q.validate()?;
    let n = q.a.ncols();
    if !(1..=4).contains(&n) {
        return domain(format!("exhaustive sphere search supports n <= 4, got {n}"));
    }
    if !(resolution > 0.0) {
        return domain("resolution must be positive");
    }
    let polar: Vec<f64> = {
        let k = (PI / resolution).ceil() as usize;
        (0..=k).map(|i| PI * i as f64 / k as f64).collect()
    };
    let azimuth: Vec<f64> = {
        let k = (2.0 * PI / resolution).ceil() as usize;
        (0..k).map(|i| 2.0 * PI * i as f64 / k as f64).collect()
    };
    let mut points: Vec<Vec<f64>> = Vec::new();
    match n {
        1 => {
            points.push(vec![1.0]);
            points.push(vec![-1.0]);
        }
        2 => points.extend(azimuth.iter().map(|&phi| vec![phi.cos(), phi.sin()])),
        3 => {
            for &t in &polar {
                for &phi in &azimuth {
                    points.push(vec![t.cos(), t.sin() * phi.cos(), t.sin() * phi.sin()]);
                }
            }
        }
        _ => {
            for &t1 in &polar {
                for &t2 in &polar {
                    for &phi in &azimuth {
                        let (s1, s2) = (t1.sin(), t2.sin());
                        points.push(vec![t1.cos(), s1 * t2.cos(), s1 * s2 * phi.cos(), s1 * s2 * phi.sin()]);
                    }
                }
            }
        }
    }
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for mut z in points {
        if normalize(&mut z) == 0.0 {
            continue;
        }
        let m = q.margin(&z)?;
        if m < best.0 {
            best = (m, z);
        }
    }
    Ok(CertifyReport::new(q, best.0, best.1, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArbitraryAttack {
    /// `(Az)_i` on the `ceil(rho m)` largest `|(Az)_i|`, zero elsewhere.
    pub e: Vec<f64>,
    /// `f + z`.
    pub x_alt: Vec<f64>,
    pub direction: Vec<f64>,
    pub support: Vec<usize>,
    /// `||y - A f||_p^p = sum_T |(Az)_i|^p`.
    pub objective_truth: f64,
    /// `||y - A x_alt||_p^p = sum_{T^c} |(Az)_i|^p`.
    pub objective_alt: f64,
}

impl ArbitraryAttack {
    /// The alternative explains `y` at least as well as the truth.
    pub fn succeeded(&self) -> bool {
        self.objective_alt <= self.objective_truth
    }
}

/// Builds the worst-case sparse error for direction `z` (a seeded Gaussian
/// direction when `None`): copying `Az` onto its heaviest `ceil(rho m)`
/// rows makes `x_alt = f + z` fit those rows exactly.
pub fn attack_arbitrary(
    a: &DMatrix<f64>,
    f: &[f64],
    p: f64,
    rho: f64,
    z: Option<&[f64]>,
    seed: SeedSpec,
) -> Result<ArbitraryAttack> {
    let (m, n) = a.shape();
    if f.len() != n {
        return domain(format!("message has length {} but n={n}", f.len()));
    }
    if !(p > 0.0 && p <= 1.0) || !(0.0..=1.0).contains(&rho) {
        return domain(format!("need p in (0, 1] and rho in [0, 1], got p={p}, rho={rho}"));
    }
    let z: Vec<f64> = match z {
        Some(z) => z.to_vec(),
        None => {
            let mut rng = seed.rng();
            (0..n).map(|_| rng.sample(StandardNormal)).collect()
        }
    };
    let u = direction(a, &z)?;
    let powers: Vec<f64> = u.iter().map(|v| v.abs().powf(p)).collect();
    let support = worst_support(&powers, ceil_count(rho, m));
    let mut e = vec![0.0; m];
    for &i in &support {
        e[i] = u[i];
    }
    let x_alt: Vec<f64> = f.iter().zip(&z).map(|(fi, zi)| fi + zi).collect();
    // y - A f = e and y - A x_alt = e - Az, which vanishes on T
    let alt_residual: Vec<f64> = e.iter().zip(u.iter()).map(|(ei, ui)| ei - ui).collect();
    let objective_truth = lp_objective(&e, p);
    let objective_alt = lp_objective(&alt_residual, p);
    Ok(ArbitraryAttack { e, x_alt, direction: z, support, objective_truth, objective_alt })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedSignAttack {
    pub e: Vec<f64>,
    /// `x = f - z`, which beats `f` on `y = A f + e`.
    pub x_alt: Vec<f64>,
    /// `-signed_margin(z) > 0`.
    pub delta: f64,
    /// Final multiplier: `|e_i| = head_scale * max_i |(Az)_i|` on `T^+`.
    pub head_scale: f64,
    /// `sum_{T^+} (|e_i + (Az)_i|^p - |e_i|^p)`, below `delta / 2`.
    pub head_gap: f64,
    /// `||e + Az||_p^p - ||e||_p^p`, accumulated term by term.
    pub objective_change: f64,
    pub objective_truth: f64,
    pub objective_alt: f64,
}

/// `|a + b|^p - |a|^p` for `a, b` of equal sign, `|a| > 0`, without
/// cancellation.
fn power_increment(big: f64, small: f64, p: f64) -> f64 {
    big.powf(p) * (p * (small / big).ln_1p()).exp_m1()
}

/// Worst-case error with prescribed support and signs for a direction `z`
/// violating the signed condition, for `p < 1`.
///
/// On `T^-` the error cancels `Az` exactly; on `T^+` it is pushed to
/// magnitude `head_scale * max|Az|`, doubling `head_scale` until the
/// concavity gap on `T^+` drops below `delta / 2`.
pub fn attack_fixed_sign(
    a: &DMatrix<f64>,
    f: &[f64],
    p: f64,
    pattern: &SignPattern,
    z: &[f64],
    head_scale: f64,
) -> Result<FixedSignAttack> {
    let (m, n) = a.shape();
    if f.len() != n {
        return domain(format!("message has length {} but n={n}", f.len()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!("fixed-sign attack needs 0 < p < 1, got {p}")));
    }
    if !(head_scale > 0.0 && head_scale.is_finite()) {
        return domain("head_scale must be positive");
    }
    let margin = signed_margin(a, p, pattern, z)?;
    if !(margin < 0.0) {
        return Err(Error::Precondition(format!("signed margin {margin} is not negative")));
    }
    let delta = -margin;
    let u = direction(a, z)?;
    let umax = u.amax();

    let mut in_t = vec![false; m];
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for (i, s) in pattern.iter() {
        in_t[i] = true;
        if u[i] * s.value() < 0.0 {
            minus.push(i);
        } else {
            plus.push((i, s));
        }
    }

    let mut scale = head_scale;
    let (magnitude, head_gap) = loop {
        let magnitude = scale * umax;
        let gap: f64 = plus.iter().map(|&(i, _)| power_increment(magnitude, u[i].abs(), p)).sum();
        if gap.is_finite() && gap < 0.5 * delta {
            break (magnitude, gap);
        }
        if scale >= HEAD_SCALE_CAP {
            return Err(Error::Numeric(format!(
                "head scale cap reached with gap {gap:e} >= delta/2 = {:e}",
                0.5 * delta
            )));
        }
        scale *= 2.0;
    };

    let mut e = vec![0.0; m];
    for &i in &minus {
        e[i] = -u[i];
    }
    for &(i, s) in &plus {
        e[i] = s.value() * magnitude;
    }

    let outside: f64 = (0..m).filter(|&i| !in_t[i]).map(|i| u[i].abs().powf(p)).sum();
    let cancelled: f64 = minus.iter().map(|&i| u[i].abs().powf(p)).sum();
    let objective_change = outside - cancelled + head_gap;
    if !(objective_change <= -0.5 * delta) {
        return Err(Error::Numeric(format!(
            "constructed error misses the bound: change {objective_change:e} > -delta/2 = {:e}",
            -0.5 * delta
        )));
    }

    let ev = DVector::from_vec(e.clone());
    let objective_truth = lp_objective(ev.as_slice(), p);
    let objective_alt = lp_objective((&ev + &u).as_slice(), p);
    let x_alt: Vec<f64> = f.iter().zip(z).map(|(fi, zi)| fi - zi).collect();
    Ok(FixedSignAttack {
        e,
        x_alt,
        delta,
        head_scale: scale,
        head_gap,
        objective_change,
        objective_truth,
        objective_alt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{gaussian_matrix, Sign};

    fn column(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn handmade_unsigned_margin() {
        let a = column(&[3.0, 1.0, 1.0, 1.0]);
        assert_eq!(unsigned_margin(&a, 1.0, 0.5, &[1.0]).unwrap(), -2.0);
        assert!(unsigned_margin(&a, 1.0, 0.5, &[0.0]).is_err());
    }

    #[test]
    fn worst_support_ties_lowest_index() {
        assert_eq!(worst_support(&[1.0, 2.0, 2.0, 0.5], 2), vec![1, 2]);
        assert_eq!(worst_support(&[1.0, 1.0, 1.0], 2), vec![0, 1]);
        assert!(worst_support(&[1.0], 0).is_empty());
    }

    #[test]
    fn signed_margin_all_agree_and_flip() {
        let a = DMatrix::from_row_slice(6, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, -1.0, 2.0, 0.5, -0.5, 2.0, 1.0]);
        let z = [1.0, -1.0];
        // Az = (1, -1, 0, -3, 1, 1)
        let agree = SignPattern::new(vec![0, 1, 3], vec![Sign::Plus, Sign::Minus, Sign::Minus]);
        let m = signed_margin(&a, 1.0, &agree, &z).unwrap();
        assert_eq!(m, 0.0 + 1.0 + 1.0);
        let flipped = SignPattern::new(vec![0, 1, 3], vec![Sign::Minus, Sign::Plus, Sign::Plus]);
        assert_eq!(signed_margin(&a, 1.0, &flipped, &z).unwrap(), 2.0 - (1.0 + 1.0 + 3.0));
        let incomplete = SignPattern::new(vec![0, 1], vec![Sign::Plus]);
        assert!(signed_margin(&a, 1.0, &incomplete, &z).is_err());
    }

    #[test]
    fn fixed_sign_attack_on_a_column() {
        // A = column, z = 1: Az = A. Support {0,1,2,3} with signs making
        // rows 0..3 mismatched except row 3.
        let a = column(&[2.0, -1.5, 1.0, 0.7, 0.3, -0.2]);
        let pattern = SignPattern::new(vec![0, 1, 2, 3], vec![Sign::Minus, Sign::Plus, Sign::Minus, Sign::Plus]);
        let p = 0.5;
        let margin = signed_margin(&a, p, &pattern, &[1.0]).unwrap();
        assert!(margin < 0.0);
        let atk = attack_fixed_sign(&a, &[0.4], p, &pattern, &[1.0], HEAD_SCALE_START).unwrap();
        assert!(atk.objective_alt < atk.objective_truth);
        for i in [0usize, 1, 2] {
            assert_eq!(atk.e[i] + a[(i, 0)], 0.0);
        }
        assert!(atk.e[3] > 0.0);
        assert_eq!(atk.e[4], 0.0);
        assert!(atk.objective_change <= -0.5 * atk.delta);
    }

    #[test]
    fn fixed_sign_attack_preconditions() {
        let a = column(&[1.0, 1.0, 1.0]);
        let agree = SignPattern::new(vec![0], vec![Sign::Plus]);
        assert!(matches!(attack_fixed_sign(&a, &[0.0], 0.5, &agree, &[1.0], 10.0), Err(Error::Precondition(_))));
        let against = SignPattern::new(vec![0, 1, 2], vec![Sign::Minus; 3]);
        assert!(matches!(attack_fixed_sign(&a, &[0.0], 1.0, &against, &[1.0], 10.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn head_gap_shrinks_with_scale() {
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let big = 10.0 * 2f64.powi(k);
            let gap = power_increment(big, 1.3, 0.5);
            assert!(gap < last && gap > 0.0);
            last = gap;
        }
    }

    #[test]
    fn arbitrary_attack_identity() {
        let a = gaussian_matrix(30, 3, SeedSpec::new(1, 0)).unwrap();
        let f = [0.5, -1.0, 2.0];
        let z = [1.0, 0.5, -0.25];
        let atk = attack_arbitrary(&a, &f, 0.5, 0.4, Some(&z), SeedSpec::new(0, 0)).unwrap();
        assert_eq!(atk.support.len(), 12);
        let u = &a * DVector::from_column_slice(&z);
        let off: f64 = (0..30).filter(|i| !atk.support.contains(i)).map(|i| u[i].abs().sqrt()).sum();
        let on: f64 = atk.support.iter().map(|&i| u[i].abs().sqrt()).sum();
        assert!((atk.objective_alt - off).abs() <= 1e-12 * off);
        assert!((atk.objective_truth - on).abs() <= 1e-12 * on);
    }

    #[test]
    fn exhaustive_rejects_large_n() {
        let a = gaussian_matrix(10, 5, SeedSpec::new(1, 0)).unwrap();
        assert!(exhaustive_search(&ConditionQuery::unsigned(a, 1.0, 0.2), 0.1).is_err());
    }

    #[test]
    fn verdict_boundary() {
        assert_eq!(Verdict::from_margin(0.0), Verdict::Undetermined);
        assert_eq!(Verdict::from_margin(-1e-300), Verdict::Violated);
        assert_eq!(Verdict::from_margin(1.0), Verdict::NoViolationFound);
    }
}
