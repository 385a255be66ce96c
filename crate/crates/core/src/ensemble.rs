//! Seeded generation of decoding instances `y = A f + e`.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::seed::SeedSpec;

/// Success tolerance (infinity norm) for declaring exact recovery.
pub const DEFAULT_SUCCESS_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Sign, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be +1 or -1, got {other}")),
        }
    }
}

/// A support set `T` (sorted, strictly increasing) with one sign per index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    pub support: Vec<usize>,
    pub signs: Vec<Sign>,
}

impl SignPattern {
    pub fn new(support: Vec<usize>, signs: Vec<Sign>) -> Self {
        SignPattern { support, signs }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.support.iter().copied().zip(self.signs.iter().copied())
    }

    /// Checks the pattern against an ambient dimension `m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.support.len() != self.signs.len() {
            return domain(format!(
                "sign map covers {} indices but support has {}",
                self.signs.len(),
                self.support.len()
            ));
        }
        if self.support.windows(2).any(|w| w[0] >= w[1]) {
            return domain("support must be strictly increasing");
        }
        if let Some(&last) = self.support.last() {
            if last >= m {
                return domain(format!("support index {last} out of range for m={m}"));
            }
        }
        Ok(())
    }

    /// Random support of size `k` drawn uniformly without replacement, with
    /// independent uniform signs.
    pub fn random<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > m {
            return domain(format!("support size {k} exceeds m={m}"));
        }
        let mut support = index::sample(rng, m, k).into_vec();
        support.sort_unstable();
        let signs = (0..k).map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus }).collect();
        Ok(SignPattern { support, signs })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeLaw {
    /// |e_i| ~ |N(0, 1)|.
    Gaussian,
    /// |e_i| = c.
    Constant(f64),
    /// e_i = (A z)_i on the support.
    FromDirection(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPolicy {
    Random,
    Fixed(SignPattern),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    /// Corrupted fraction; the support has `floor(rho * m)` entries.
    pub rho: f64,
    pub magnitude_law: MagnitudeLaw,
    pub sign_policy: SignPolicy,
}

impl ErrorSpec {
    pub fn gaussian(rho: f64) -> Self {
        ErrorSpec { rho, magnitude_law: MagnitudeLaw::Gaussian, sign_policy: SignPolicy::Random }
    }

    pub fn support_size(&self, m: usize) -> Result<usize> {
        if !self.rho.is_finite() || !(0.0..1.0).contains(&self.rho) {
            return domain(format!("error fraction rho={} outside [0, 1)", self.rho));
        }
        Ok(floor_count(self.rho, m))
    }
}

/// How the message vector `f` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageLaw {
    #[default]
    Gaussian,
    Zero,
}

// Guards against 0.29 * 100 = 28.999999999999996 style products.
const COUNT_GUARD: f64 = 1e-9;

/// `floor(rho * m)` robust to representation error in `rho`.
pub fn floor_count(rho: f64, m: usize) -> usize {
    ((rho * m as f64 + COUNT_GUARD).floor().max(0.0) as usize).min(m)
}

/// `ceil(rho * m)` robust to representation error in `rho`.
pub fn ceil_count(rho: f64, m: usize) -> usize {
    ((rho * m as f64 - COUNT_GUARD).ceil().max(0.0) as usize).min(m)
}

/// A decoding problem. Vectors are stored as `DVector`; `support`/`signs`
/// describe the nonzero pattern of `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: DMatrix<f64>,
    pub f: DVector<f64>,
    pub e: DVector<f64>,
    pub y: DVector<f64>,
    pub pattern: SignPattern,
    pub seed: Option<SeedSpec>,
}

impl Instance {
    /// Assembles an instance from its parts, computing `y = a f + e` and
    /// checking the support/sign invariants.
    pub fn assemble(a: DMatrix<f64>, f: DVector<f64>, e: DVector<f64>, pattern: SignPattern) -> Result<Self> {
        let (m, n) = a.shape();
        if f.len() != n || e.len() != m {
            return domain(format!("shape mismatch: A is {m}x{n}, f has {}, e has {}", f.len(), e.len()));
        }
        pattern.validate(m)?;
        let y = &a * &f + &e;
        let inst = Instance { a, f, e, y, pattern, seed: None };
        inst.check_pattern()?;
        Ok(inst)
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// `e` vanishes off the support and agrees in sign on it.
    pub fn check_pattern(&self) -> Result<()> {
        let mut on_support = vec![false; self.m()];
        for (i, s) in self.pattern.iter() {
            on_support[i] = true;
            let v = self.e[i];
            if v != 0.0 && Sign::of(v) != s {
                return domain(format!("e[{i}]={v} disagrees with sign {:?}", s));
            }
        }
        if let Some(i) = (0..self.m()).find(|&i| !on_support[i] && self.e[i] != 0.0) {
            return domain(format!("e[{i}] is nonzero off the support"));
        }
        Ok(())
    }
}

fn normal_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn fill_gaussian<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> DMatrix<f64> {
    // row-major draw order, fixed project-wide
    DMatrix::from_row_iterator(m, n, (0..m * n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// An `m x n` matrix of i.i.d. N(0, 1) entries.
pub fn gaussian_matrix(m: usize, n: usize, seed: SeedSpec) -> Result<DMatrix<f64>> {
    if n == 0 || m < n {
        return domain(format!("coding matrix needs m >= n >= 1, got m={m}, n={n}"));
    }
    Ok(fill_gaussian(m, n, &mut seed.rng()))
}

/// Generates an instance with a standard normal message.
pub fn make_instance(m: usize, n: usize, spec: &ErrorSpec, seed: SeedSpec) -> Result<Instance> {
    make_instance_with_message(m, n, spec, MessageLaw::Gaussian, seed)
}

/// Generates `A`, `f`, then the error pattern and magnitudes, all from one
/// stream in that order.
///
/// With `FromDirection(z)` the error is `e_i = (A z)_i` on the support under
/// a random sign policy, and `signs[i] * |(A z)_i|` under a fixed one.
pub fn make_instance_with_message(
    m: usize,
    n: usize,
    spec: &ErrorSpec,
    message: MessageLaw,
    seed: SeedSpec,
) -> Result<Instance> {
    if n == 0 || m < n {
        return domain(format!("coding matrix needs m >= n >= 1, got m={m}, n={n}"));
    }
    let k = spec.support_size(m)?;
    match &spec.magnitude_law {
        MagnitudeLaw::Constant(c) if !c.is_finite() || *c < 0.0 => {
            return domain(format!("constant magnitude {c} must be finite and >= 0"));
        }
        MagnitudeLaw::FromDirection(z) if z.len() != n => {
            return domain(format!("direction has length {} but n={n}", z.len()));
        }
        _ => {}
    }
    if let SignPolicy::Fixed(pattern) = &spec.sign_policy {
        pattern.validate(m)?;
        if pattern.len() != k {
            return domain(format!("fixed pattern has {} indices but floor(rho*m) = {k}", pattern.len()));
        }
    }

    let mut rng = seed.rng();
    let a = fill_gaussian(m, n, &mut rng);
    let f = match message {
        MessageLaw::Gaussian => normal_vector(n, &mut rng),
        MessageLaw::Zero => DVector::zeros(n),
    };
    let direction = match &spec.magnitude_law {
        MagnitudeLaw::FromDirection(z) => Some(&a * DVector::from_column_slice(z)),
        _ => None,
    };
    let mut pattern = match &spec.sign_policy {
        SignPolicy::Random => SignPattern::random(m, k, &mut rng)?,
        SignPolicy::Fixed(p) => p.clone(),
    };
    if let (Some(az), SignPolicy::Random) = (&direction, &spec.sign_policy) {
        for (slot, &i) in pattern.signs.iter_mut().zip(pattern.support.iter()) {
            *slot = Sign::of(az[i]);
        }
    }
    let mut e = DVector::zeros(m);
    for (i, s) in pattern.iter() {
        let magnitude = match &spec.magnitude_law {
            MagnitudeLaw::Gaussian => rng.sample::<f64, _>(StandardNormal).abs(),
            MagnitudeLaw::Constant(c) => *c,
            MagnitudeLaw::FromDirection(_) => direction.as_ref().map_or(0.0, |az| az[i].abs()),
        };
        e[i] = s.value() * magnitude;
    }
    let mut inst = Instance::assemble(a, f, e, pattern)?;
    inst.seed = Some(seed);
    Ok(inst)
}

/// Exact recovery test: `max_i |x_hat_i - f_i| <= tol`.
///
/// # Panics
/// If the vectors differ in length.
pub fn recovered(x_hat: &[f64], f: &[f64], tol: f64) -> bool {
    assert_eq!(x_hat.len(), f.len(), "recovered: length mismatch");
    x_hat.iter().zip(f).all(|(x, t)| (x - t).abs() <= tol)
}
