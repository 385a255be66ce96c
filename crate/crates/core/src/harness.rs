//! Seeded Monte Carlo experiments: phase-transition sweeps, empirical
//! threshold estimation and the fixed-sign concentration study.
//!
//! Every trial draws from its own stream, `mix_seed(master, [p_idx, rho_idx,
//! trial])`, so results do not depend on execution order or on the number
//! of worker threads.

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::attack_arbitrary;
use crate::decoder::{decode, lp_objective, DecoderConfig};
use crate::ensemble::{
    floor_count, make_instance, recovered, ErrorSpec, Instance, MagnitudeLaw, Sign, SignPattern, SignPolicy,
    DEFAULT_SUCCESS_TOL,
};
use crate::error::{domain, Result};
use crate::halfnormal;
use crate::seed::{mix_seed, SeedSpec};

/// Minimum sample size for [`concentration_study`].
pub const MIN_CONCENTRATION_SAMPLES: usize = 10_000;

// stream ids within one trial seed
const INSTANCE_STREAM: u64 = 0;
const DECODER_STREAM: u64 = 1;
const ATTACK_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorRegime {
    /// Random support, random signs, |N(0,1)| magnitudes.
    Arbitrary,
    /// Support and signs fixed per cell, magnitudes redrawn per trial.
    FixedSign,
    /// Worst-case error `(Az)_i` on the heaviest `ceil(rho m)` rows of a
    /// random direction `z`.
    Adversarial,
}

impl std::str::FromStr for ErrorRegime {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "arbitrary" => Ok(ErrorRegime::Arbitrary),
            "fixed_sign" | "fixed-sign" => Ok(ErrorRegime::FixedSign),
            "adversarial" => Ok(ErrorRegime::Adversarial),
            other => Err(format!("unknown regime '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub m: usize,
    pub n: usize,
    pub p_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub trials: usize,
    pub regime: ErrorRegime,
    /// Its `p` is overwritten per cell.
    pub decoder: DecoderConfig,
    pub master_seed: u64,
    pub success_tol: f64,
}

impl SweepPlan {
    pub fn new(m: usize, n: usize, p_values: Vec<f64>, rho_values: Vec<f64>, trials: usize, master_seed: u64) -> Self {
        SweepPlan {
            m,
            n,
            p_values,
            rho_values,
            trials,
            regime: ErrorRegime::Arbitrary,
            decoder: DecoderConfig::default(),
            master_seed,
            success_tol: DEFAULT_SUCCESS_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < self.n {
            return domain(format!("need m >= n >= 1, got m={}, n={}", self.m, self.n));
        }
        if self.trials == 0 {
            return domain("trials must be >= 1");
        }
        if self.p_values.is_empty() || self.rho_values.is_empty() {
            return domain("p and rho grids must be nonempty");
        }
        if let Some(p) = self.p_values.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return domain(format!("p={p} outside (0, 1]"));
        }
        if let Some(r) = self.rho_values.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return domain(format!("rho={r} outside [0, 1)"));
        }
        if !(self.success_tol > 0.0) {
            return domain("success tolerance must be positive");
        }
        DecoderConfig { p: self.p_values[0], ..self.decoder }.validate()
    }

    pub fn trial_seed(&self, p_idx: usize, rho_idx: usize, trial: usize) -> SeedSpec {
        SeedSpec::new(mix_seed(self.master_seed, &[p_idx as u64, rho_idx as u64, trial as u64]), INSTANCE_STREAM)
    }

    fn cell_pattern_seed(&self, p_idx: usize, rho_idx: usize) -> SeedSpec {
        SeedSpec::new(mix_seed(self.master_seed, &[p_idx as u64, rho_idx as u64, u64::MAX]), INSTANCE_STREAM)
    }
}

/// Outcome of one decoding trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub success: bool,
    /// `objective(x_hat) - objective(f)`; `None` when the solver failed.
    pub objective_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub p: f64,
    pub rho: f64,
    pub m: usize,
    pub n: usize,
    pub successes: usize,
    pub trials: usize,
    /// Mean over trials the solver completed; NaN if it completed none.
    pub mean_objective_gap: f64,
    pub wallclock_ms: u64,
}

impl PhaseCell {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

fn build_instance(plan: &SweepPlan, p: f64, rho: f64, p_idx: usize, rho_idx: usize, trial: usize) -> Result<Instance> {
    let seed = plan.trial_seed(p_idx, rho_idx, trial);
    match plan.regime {
        ErrorRegime::Arbitrary => make_instance(plan.m, plan.n, &ErrorSpec::gaussian(rho), seed),
        ErrorRegime::FixedSign => {
            let k = floor_count(rho, plan.m);
            let pattern = SignPattern::random(plan.m, k, &mut plan.cell_pattern_seed(p_idx, rho_idx).rng())?;
            let spec =
                ErrorSpec { rho, magnitude_law: MagnitudeLaw::Gaussian, sign_policy: SignPolicy::Fixed(pattern) };
            make_instance(plan.m, plan.n, &spec, seed)
        }
        ErrorRegime::Adversarial => {
            let clean = make_instance(plan.m, plan.n, &ErrorSpec::gaussian(0.0), seed)?;
            let atk = attack_arbitrary(&clean.a, clean.f.as_slice(), p, rho, None, seed.with_stream(ATTACK_STREAM))?;
            let signs = atk.support.iter().map(|&i| Sign::of(atk.e[i])).collect();
            let pattern = SignPattern::new(atk.support.clone(), signs);
            let mut inst = Instance::assemble(clean.a, clean.f, DVector::from_vec(atk.e), pattern)?;
            inst.seed = Some(seed);
            Ok(inst)
        }
    }
}

/// Runs one trial of a cell.
pub fn run_trial(plan: &SweepPlan, p_idx: usize, rho_idx: usize, trial: usize) -> TrialRecord {
    let p = plan.p_values[p_idx];
    let rho = plan.rho_values[rho_idx];
    let outcome = build_instance(plan, p, rho, p_idx, rho_idx, trial).and_then(|inst| {
        let cfg = DecoderConfig { p, ..plan.decoder };
        let seed = plan.trial_seed(p_idx, rho_idx, trial).with_stream(DECODER_STREAM);
        let res = decode(&inst.a, &inst.y, &cfg, seed)?;
        let truth = lp_objective(inst.e.as_slice(), p);
        Ok((recovered(&res.x_hat, inst.f.as_slice(), plan.success_tol), res.objective - truth))
    });
    match outcome {
        Ok((success, gap)) => TrialRecord { success, objective_gap: Some(gap) },
        Err(err) => {
            log::warn!("trial (p={p}, rho={rho}, #{trial}) failed: {err}");
            TrialRecord { success: false, objective_gap: None }
        }
    }
}

/// Runs every `(p, rho)` cell of the plan, cells in grid order (p outer),
/// trials in parallel on the current rayon pool.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<PhaseCell>> {
    plan.validate()?;
    let mut cells = Vec::with_capacity(plan.p_values.len() * plan.rho_values.len());
    for (pi, &p) in plan.p_values.iter().enumerate() {
        for (ri, &rho) in plan.rho_values.iter().enumerate() {
            let started = Instant::now();
            let records: Vec<TrialRecord> =
                (0..plan.trials).into_par_iter().map(|t| run_trial(plan, pi, ri, t)).collect();
            cells.push(aggregate(plan, p, rho, &records, started.elapsed().as_millis() as u64));
        }
    }
    Ok(cells)
}

fn aggregate(plan: &SweepPlan, p: f64, rho: f64, records: &[TrialRecord], wallclock_ms: u64) -> PhaseCell {
    let successes = records.iter().filter(|r| r.success).count();
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.objective_gap).collect();
    let mean_objective_gap = if gaps.is_empty() { f64::NAN } else { gaps.iter().sum::<f64>() / gaps.len() as f64 };
    PhaseCell { p, rho, m: plan.m, n: plan.n, successes, trials: records.len(), mean_objective_gap, wallclock_ms }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub rho: f64,
    /// False when the success rate never crosses 1/2 on the grid; `rho` is
    /// then the grid boundary on the side the rates lie.
    pub crossed: bool,
}

/// Empirical threshold: the `rho` where the linearly interpolated success
/// rate first falls through 1/2.
pub fn estimate_threshold(cells: &[PhaseCell]) -> Result<ThresholdEstimate> {
    let mut sorted: Vec<&PhaseCell> = cells.iter().collect();
    sorted.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    sorted.dedup_by(|a, b| a.rho == b.rho);
    if sorted.len() < 4 {
        return domain(format!("need >= 4 distinct rho values, got {}", sorted.len()));
    }
    if let Some(c) = cells.iter().find(|c| c.p != cells[0].p) {
        return domain(format!("cells mix p={} and p={}", cells[0].p, c.p));
    }
    for w in sorted.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (r0, r1) = (lo.success_rate(), hi.success_rate());
        if r0 >= 0.5 && r1 < 0.5 {
            let rho = lo.rho + (r0 - 0.5) / (r0 - r1) * (hi.rho - lo.rho);
            return Ok(ThresholdEstimate { rho, crossed: true });
        }
    }
    let first = sorted[0];
    let last = sorted[sorted.len() - 1];
    let rho = if first.success_rate() < 0.5 { first.rho } else { last.rho };
    Ok(ThresholdEstimate { rho, crossed: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginSign {
    Positive,
    Negative,
    Indeterminate,
}

impl MarginSign {
    pub fn as_str(self) -> &'static str {
        match self {
            MarginSign::Positive => "positive",
            MarginSign::Negative => "negative",
            MarginSign::Indeterminate => "indeterminate",
        }
    }
}

/// Normalized sums for a Gaussian vector against a fixed signed support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub rho: f64,
    pub p: f64,
    pub m: usize,
    pub trials: usize,
    /// Mean of `sum_{T^-} |X_i|^p / (m mu)`.
    pub ratio_tminus: f64,
    /// Mean of `sum_{T^+} |X_i|^p / (m mu)`.
    pub ratio_tplus: f64,
    /// Mean of `sum_{T^c} |X_i|^p / (m mu)`.
    pub ratio_tc: f64,
    /// Sign of the mean of `ratio_tc - ratio_tminus`; indeterminate when
    /// within three standard errors of zero.
    pub margin_sign: MarginSign,
    pub positive_trials: usize,
    pub negative_trials: usize,
}

/// Draws `X ~ N(0, I_m)` per trial against the support `{0, .., floor(rho m) - 1}`
/// carrying one random sign pattern, fixed for the whole study.
pub fn concentration_study(rho: f64, p: f64, m: usize, trials: usize, seed: SeedSpec) -> Result<ConcentrationReport> {
    if m < MIN_CONCENTRATION_SAMPLES {
        return domain(format!("concentration study needs m >= {MIN_CONCENTRATION_SAMPLES}, got {m}"));
    }
    if !(0.0..1.0).contains(&rho) || !(p > 0.0 && p <= 1.0) || trials == 0 {
        return domain(format!("need rho in [0, 1), p in (0, 1], trials >= 1; got {rho}, {p}, {trials}"));
    }
    let mu = halfnormal::mu(p)?;
    let k = floor_count(rho, m);
    let signs: Vec<f64> = {
        let mut rng = seed.rng();
        (0..k).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
    };
    let norm = m as f64 * mu;
    let per_trial: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.derive(&[t as u64]).rng();
            let (mut minus, mut plus, mut outside) = (0.0, 0.0, 0.0);
            for i in 0..m {
                let x: f64 = rng.sample(StandardNormal);
                let w = x.abs().powf(p);
                match signs.get(i) {
                    Some(&s) if x * s < 0.0 => minus += w,
                    Some(_) => plus += w,
                    None => outside += w,
                }
            }
            (minus / norm, plus / norm, outside / norm)
        })
        .collect();
    let count = trials as f64;
    let ratio_tminus = per_trial.iter().map(|r| r.0).sum::<f64>() / count;
    let ratio_tplus = per_trial.iter().map(|r| r.1).sum::<f64>() / count;
    let ratio_tc = per_trial.iter().map(|r| r.2).sum::<f64>() / count;
    let diffs: Vec<f64> = per_trial.iter().map(|r| r.2 - r.0).collect();
    let mean = diffs.iter().sum::<f64>() / count;
    let positive_trials = diffs.iter().filter(|&&d| d > 0.0).count();
    let negative_trials = diffs.iter().filter(|&&d| d < 0.0).count();
    let std_error = if trials > 1 {
        (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (count - 1.0) / count).sqrt()
    } else {
        0.0
    };
    let margin_sign = if mean == 0.0 || mean.abs() <= 3.0 * std_error {
        MarginSign::Indeterminate
    } else if mean > 0.0 {
        MarginSign::Positive
    } else {
        MarginSign::Negative
    };
    Ok(ConcentrationReport {
        rho,
        p,
        m,
        trials,
        ratio_tminus,
        ratio_tplus,
        ratio_tc,
        margin_sign,
        positive_trials,
        negative_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(rho: f64, rate: f64) -> PhaseCell {
        PhaseCell {
            p: 1.0,
            rho,
            m: 100,
            n: 10,
            successes: (rate * 100.0).round() as usize,
            trials: 100,
            mean_objective_gap: 0.0,
            wallclock_ms: 0,
        }
    }

    #[test]
    fn threshold_midpoint() {
        let cells = [cell(0.1, 1.0), cell(0.2, 1.0), cell(0.3, 0.0), cell(0.4, 0.0)];
        let est = estimate_threshold(&cells).unwrap();
        assert!(est.crossed);
        assert!((est.rho - 0.25).abs() < 1e-12);
    }

    #[test]
    fn threshold_between_grid_points() {
        let cells = [cell(0.1, 1.0), cell(0.2, 0.9), cell(0.3, 0.6), cell(0.4, 0.2), cell(0.5, 0.0)];
        let est = estimate_threshold(&cells).unwrap();
        assert!(est.rho > 0.3 && est.rho < 0.4);
    }

    #[test]
    fn threshold_without_crossing_is_flagged() {
        let high = [cell(0.1, 1.0), cell(0.2, 0.9), cell(0.3, 0.8), cell(0.4, 0.7)];
        let est = estimate_threshold(&high).unwrap();
        assert!(!est.crossed);
        assert_eq!(est.rho, 0.4);
        let low = [cell(0.1, 0.1), cell(0.2, 0.0), cell(0.3, 0.0), cell(0.4, 0.0)];
        assert_eq!(estimate_threshold(&low).unwrap().rho, 0.1);
        assert!(estimate_threshold(&high[..3]).is_err());
    }

    #[test]
    fn regime_parsing() {
        assert_eq!("fixed-sign".parse::<ErrorRegime>().unwrap(), ErrorRegime::FixedSign);
        assert!("bogus".parse::<ErrorRegime>().is_err());
    }

    #[test]
    fn plan_validation() {
        let mut plan = SweepPlan::new(20, 4, vec![0.5], vec![0.1], 2, 1);
        assert!(plan.validate().is_ok());
        plan.rho_values = vec![1.0];
        assert!(plan.validate().is_err());
        plan.rho_values = vec![];
        assert!(plan.validate().is_err());
    }

    #[test]
    fn concentration_rejects_small_m() {
        assert!(concentration_study(0.5, 0.5, 100, 1, SeedSpec::new(1, 0)).is_err());
    }
}
