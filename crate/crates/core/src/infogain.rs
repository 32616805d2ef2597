//! Gaussian information-gain scheduling in two dimensions.
//!
//! Prior covariance `Diag(s₀, t₀)`; action `e` measures with
//! `A = Diag(√e, √(1−e))` and noise variance `σᵢ²` at stage `i`. The diagonal
//! posterior follows `s_k⁻¹ = s₀⁻¹ + Σ σᵢ⁻² eᵢ`, `t_k⁻¹ = t₀⁻¹ + Σ σᵢ⁻² (1−eᵢ)`,
//! and `f = ½(log det P₀ − log det P_k)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checks::check_diminishing_return;
use crate::curvature::restricted_eta_hat;
use crate::error::{Error, Result};
use crate::objective::{Memoized, Objective};
use crate::string::{for_each_string, Action};
use crate::tasks::probe_depth;

pub const DEFAULT_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn default_grid() -> Vec<f64> {
    DEFAULT_GRID.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoGainModel {
    pub s0: f64,
    pub t0: f64,
    /// `σᵢ²` for stages `1, 2, ..`; later stages repeat the last value.
    pub noise_vars: Vec<f64>,
    /// Bounds on the noise standard deviations, `a ≤ σᵢ ≤ b`.
    pub a: f64,
    pub b: f64,
    /// Power splits `e`; action `k` is `grid[k]`.
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(rename = "K")]
    pub horizon: usize,
}

/// Diagonal posterior variances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    pub s: f64,
    pub t: f64,
}

impl InfoGainModel {
    pub fn new(s0: f64, t0: f64, noise_vars: Vec<f64>, a: f64, b: f64, grid: Vec<f64>, horizon: usize) -> Result<Self> {
        let m = InfoGainModel { s0, t0, noise_vars, a, b, grid, horizon };
        m.validate()?;
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: InfoGainModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let m: InfoGainModel = serde_json::from_value(value)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if !(self.t0 > 0.0 && self.s0 >= self.t0) {
            return Err(Error::invalid(format!("need s0 ≥ t0 > 0, got s0 = {}, t0 = {}", self.s0, self.t0)));
        }
        if !(0.0 < self.a && self.a < self.b) {
            return Err(Error::invalid(format!("need 0 < a < b, got a = {}, b = {}", self.a, self.b)));
        }
        if self.noise_vars.is_empty() {
            return Err(Error::invalid("noise_vars is empty"));
        }
        let (lo, hi) = (self.a * self.a, self.b * self.b);
        for (i, &v) in self.noise_vars.iter().enumerate() {
            if !(lo * (1.0 - 1e-12) <= v && v <= hi * (1.0 + 1e-12)) {
                return Err(Error::invalid(format!("noise_vars[{i}] = {v} lies outside [a², b²] = [{lo}, {hi}]")));
            }
        }
        if self.grid.is_empty() {
            return Err(Error::invalid("the action grid is empty"));
        }
        if let Some(e) = self.grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::invalid(format!("grid point {e} is outside [0, 1]")));
        }
        Ok(())
    }

    pub fn num_actions(&self) -> usize {
        self.grid.len()
    }

    pub fn probe_depth(&self) -> usize {
        probe_depth(self.horizon)
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        self.grid = grid;
        self.validate()?;
        Ok(self)
    }

    /// `σᵢ²` with `i` counted from 1.
    pub fn noise_var(&self, stage: usize) -> f64 {
        self.noise_vars[(stage - 1).min(self.noise_vars.len() - 1)]
    }

    /// `σᵢ⁻²`.
    pub fn precision(&self, stage: usize) -> f64 {
        1.0 / self.noise_var(stage)
    }

    /// Grid index of the split `e`, if present.
    pub fn action_for(&self, e: f64) -> Option<Action> {
        self.grid.iter().position(|&g| (g - e).abs() <= 1e-12).map(Action::new)
    }

    fn check_string(&self, s: &[Action]) -> Result<()> {
        if s.len() > self.probe_depth() {
            return Err(Error::DepthExceeded { len: s.len(), max: self.probe_depth() });
        }
        for a in s {
            a.check(self.num_actions())?;
        }
        Ok(())
    }

    /// Accumulated `(Σ σᵢ⁻² eᵢ, Σ σᵢ⁻² (1−eᵢ))`.
    fn information(&self, s: &[Action]) -> (f64, f64) {
        let mut is = 0.0;
        let mut it = 0.0;
        for (i, a) in s.iter().enumerate() {
            let e = self.grid[a.index()];
            let w = self.precision(i + 1);
            is += w * e;
            it += w * (1.0 - e);
        }
        (is, it)
    }

    pub fn posterior(&self, s: &[Action]) -> Result<PosteriorState> {
        self.check_string(s)?;
        let (is, it) = self.information(s);
        debug_assert!(self.trace_conserved(s.len(), is, it));
        Ok(PosteriorState { s: 1.0 / (1.0 / self.s0 + is), t: 1.0 / (1.0 / self.t0 + it) })
    }

    /// `s_k⁻¹ + t_k⁻¹ = s₀⁻¹ + t₀⁻¹ + Σ_{i≤k} σᵢ⁻²`.
    fn trace_conserved(&self, len: usize, is: f64, it: f64) -> bool {
        let total: f64 = (1..=len).map(|i| self.precision(i)).sum();
        let lhs = 1.0 / self.s0 + is + 1.0 / self.t0 + it;
        let rhs = 1.0 / self.s0 + 1.0 / self.t0 + total;
        (lhs - rhs).abs() <= 1e-9 * rhs
    }

    /// Whether `σᵢ²` is nondecreasing for `i = 1, .., len`.
    pub fn noise_nondecreasing(&self, len: usize) -> bool {
        (1..len).all(|i| self.noise_var(i) <= self.noise_var(i + 1))
    }

    /// Stage `k` of the first strict decrease `σ_k > σ_{k+1}` within `len`.
    pub fn first_decrease(&self, len: usize) -> Option<usize> {
        (1..len).find(|&i| self.noise_var(i) > self.noise_var(i + 1))
    }

    /// Explicit diminishing-return counterexample when the noise decreases,
    /// otherwise exhaustive confirmation of submodularity.
    pub fn submodularity_witness(&self, budget: u128, tol: f64) -> Result<SubmodularityReport> {
        let one = self.action_for(1.0).ok_or(Error::MissingGridPoint(1.0))?;
        let zero = self.action_for(0.0).ok_or(Error::MissingGridPoint(0.0))?;
        let depth = 2 * self.horizon;
        let mut report = SubmodularityReport {
            nondecreasing: self.noise_nondecreasing(self.probe_depth()),
            first_decrease: self.first_decrease(self.probe_depth()),
            witness: None,
            diminishing_return_empty: None,
            eta_hat: None,
        };
        if let Some(k) = report.first_decrease {
            let prefix = vec![one; k - 1];
            let mut longer = prefix.clone();
            longer.push(one);
            let gain = |base: &[Action]| -> Result<f64> {
                let mut ext = base.to_vec();
                ext.push(zero);
                Ok(self.eval(&ext)? - self.eval(base)?)
            };
            let gain_shorter = gain(&prefix)?;
            let gain_longer = gain(&longer)?;
            report.witness = Some(DrWitness {
                stage: k,
                shorter: prefix.into(),
                longer: longer.into(),
                action: zero,
                gain_shorter,
                gain_longer,
                confirmed: gain_longer > gain_shorter,
            });
        }
        if report.nondecreasing {
            let f = Memoized::new(self);
            let n = self.num_actions();
            report.diminishing_return_empty = Some(check_diminishing_return(&f, n, depth, tol, budget)?.is_empty());
            report.eta_hat = Some(restricted_eta_hat(&f, n, self.horizon, budget)?.value);
        }
        Ok(report)
    }

    /// Lower bound on `η̂` from the stage pair with the largest precision jump.
    pub fn eta_hat_lower_closed_form(&self) -> EtaHatLower {
        let k = self.horizon;
        // m = |M| ranges over 0..=2K−2; the ratio is σ_{m+1}²/σ_{m+2}²
        let (m, ratio) = (0..=2 * k - 2)
            .map(|m| (m, self.noise_var(m + 1) / self.noise_var(m + 2)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let x1 = self.precision(m + 1);
        let x2 = self.precision(m + 2);
        let fresh = (x2 * self.t0).ln_1p() / (x1 * self.t0).ln_1p();
        let tau = 1.0 / (1.0 / self.t0 + (1..=m).map(|i| self.precision(i)).sum::<f64>());
        let informed = (x2 * tau).ln_1p() / (x1 * tau).ln_1p();
        let interval = (self.t0 / (self.b * self.b)).ln_1p() / (self.t0 / (self.a * self.a)).ln_1p();
        EtaHatLower {
            stage: m,
            ratio,
            value: if ratio <= 1.0 { fresh } else { informed },
            fresh_branch: fresh,
            informed_branch: informed,
            interval,
        }
    }

    /// Upper bound on `η̂`: instance-specific and interval forms.
    pub fn eta_hat_upper_closed_form(&self) -> EtaHatUpper {
        let k = self.horizon;
        let (s0, t0) = (self.s0, self.t0);
        let prec: Vec<f64> = (1..=2 * k).map(|i| self.precision(i)).collect();
        let max_p = prec.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_p = prec.iter().copied().fold(f64::INFINITY, f64::min);
        let sum_2k: f64 = prec.iter().sum();
        let sum_2k2: f64 = prec[..2 * k - 2].iter().sum();
        let num = (0.25 * (1.0 + s0 / t0 + s0 * sum_2k) * (1.0 + (1.0 / s0 + max_p) / (1.0 / t0 + prec[0]))).ln();
        let den = (min_p / (1.0 / t0 + sum_2k2)).ln_1p();
        let (ia, ib) = (1.0 / (self.a * self.a), 1.0 / (self.b * self.b));
        let inum = (0.25 * (1.0 + s0 / t0 + 2.0 * k as f64 * s0 * ia) * (1.0 + (1.0 / s0 + ia) / (1.0 / t0 + ib))).ln();
        let iden = (t0 * ib / (1.0 + t0 * (2 * k - 2) as f64 * ia)).ln_1p();
        EtaHatUpper { value: num / den, interval: inum / iden }
    }

    /// Maximizer of the first-stage gain over continuous `e ∈ [0, 1]`:
    /// `e* = ½(1 + (t₀⁻¹ − s₀⁻¹) σ₁²)`, clamped.
    pub fn greedy_first_split(&self) -> f64 {
        (0.5 * (1.0 + (1.0 / self.t0 - 1.0 / self.s0) * self.noise_var(1))).clamp(0.0, 1.0)
    }

    /// Compares the variance and standard-deviation readings of the `e*`
    /// formula against a numerical maximizer of the first-stage gain.
    pub fn first_split_audit(&self) -> FirstSplitAudit {
        let d = 1.0 / self.t0 - 1.0 / self.s0;
        let variance_form = self.greedy_first_split();
        let deviation_form = (0.5 * (1.0 + d * self.noise_var(1).sqrt())).clamp(0.0, 1.0);
        let x = self.precision(1);
        let gain = |e: f64| 0.5 * ((self.s0 * e * x).ln_1p() + (self.t0 * (1.0 - e) * x).ln_1p());
        let numerical = golden_section_max(gain, 0.0, 1.0, 1e-12);
        FirstSplitAudit {
            variance_form,
            deviation_form,
            numerical,
            variance_matches: (variance_form - numerical).abs() <= 1e-6,
            deviation_matches: (deviation_form - numerical).abs() <= 1e-6,
        }
    }

    /// `b⁻²/(a⁻² − b⁻²) ≥ (K²/4) t₀ (a⁻² + b⁻²) + 1`.
    pub fn t2_condition_sufficient(&self) -> bool {
        let (ia, ib) = (1.0 / (self.a * self.a), 1.0 / (self.b * self.b));
        let k = self.horizon as f64;
        ib / (ia - ib) >= 0.25 * k * k * self.t0 * (ia + ib) + 1.0
    }

    /// Checks `f((first) ⊕ M) ≥ f(M) − tol` for every grid string `M` of length `K`.
    pub fn prepend_dominates(&self, first: Action, budget: u128, tol: f64) -> Result<bool> {
        let n = self.num_actions();
        crate::string::ensure_budget(crate::string::count_strings(n, self.horizon, self.horizon), budget)?;
        let mut ok = true;
        let mut err = None;
        let mut buf = Vec::with_capacity(self.horizon + 1);
        for_each_string(n, self.horizon, |m| {
            buf.clear();
            buf.push(first);
            buf.extend_from_slice(m);
            match (self.eval(&buf), self.eval(m)) {
                (Ok(with), Ok(without)) => {
                    ok &= with >= without - tol;
                    ok
                }
                (Err(e), _) | (_, Err(e)) => {
                    err = Some(e);
                    false
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(ok),
        }
    }

    /// Seeded random instance; see [`RandomInfoGain`].
    pub fn random(seed: u64, params: &RandomInfoGain) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (params.a * params.a, params.b * params.b);
        let len = params.len.unwrap_or(probe_depth(params.horizon));
        let mut noise: Vec<f64> = match params.shape {
            NoiseShape::Constant => vec![rng.gen_range(lo..=hi); len],
            _ => (0..len).map(|_| rng.gen_range(lo..=hi)).collect(),
        };
        if params.shape == NoiseShape::NonDecreasing {
            noise.sort_by(f64::total_cmp);
        }
        let t0 = rng.gen_range(params.t0.0..=params.t0.1);
        let s0 = t0 * rng.gen_range(1.0..=params.s0_over_t0_max);
        Self::new(s0, t0, noise, params.a, params.b, params.grid.clone(), params.horizon)
    }
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

impl Objective for InfoGainModel {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        self.check_string(s)?;
        let (is, it) = self.information(s);
        debug_assert!(self.trace_conserved(s.len(), is, it));
        Ok(0.5 * ((self.s0 * is).ln_1p() + (self.t0 * it).ln_1p()))
    }

    fn max_len(&self) -> Option<usize> {
        Some(self.probe_depth())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrWitness {
    /// Stage `k` with `σ_k > σ_{k+1}`.
    pub stage: usize,
    pub shorter: crate::string::ActionString,
    pub longer: crate::string::ActionString,
    pub action: Action,
    pub gain_shorter: f64,
    pub gain_longer: f64,
    /// `gain_longer > gain_shorter`.
    pub confirmed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmodularityReport {
    /// Noise nondecreasing over the probe depth.
    pub nondecreasing: bool,
    pub first_decrease: Option<usize>,
    pub witness: Option<DrWitness>,
    /// Filled in when the noise is nondecreasing.
    pub diminishing_return_empty: Option<bool>,
    pub eta_hat: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaHatLower {
    /// `|M|` of the selected stage pair.
    pub stage: usize,
    /// `σ_{m+1}²/σ_{m+2}²` at that pair.
    pub ratio: f64,
    /// Branch chosen by `ratio`.
    pub value: f64,
    /// `log(1+t₀σ_{m+2}⁻²)/log(1+t₀σ_{m+1}⁻²)`.
    pub fresh_branch: f64,
    /// Same with `t₀` replaced by `(t₀⁻¹ + Σ_{i≤m} σᵢ⁻²)⁻¹`.
    pub informed_branch: f64,
    /// `log(1+t₀b⁻²)/log(1+t₀a⁻²)`.
    pub interval: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaHatUpper {
    pub value: f64,
    pub interval: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstSplitAudit {
    pub variance_form: f64,
    pub deviation_form: f64,
    pub numerical: f64,
    pub variance_matches: bool,
    pub deviation_matches: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseShape {
    Constant,
    Free,
    NonDecreasing,
}

/// Parameters of [`InfoGainModel::random`]: variances uniform in `[a², b²]`,
/// `t₀` uniform in the given range and `s₀/t₀` uniform in `[1, s0_over_t0_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomInfoGain {
    pub horizon: usize,
    pub a: f64,
    pub b: f64,
    pub t0: (f64, f64),
    pub s0_over_t0_max: f64,
    pub grid: Vec<f64>,
    /// Number of variances; the probe depth when unset.
    pub len: Option<usize>,
    pub shape: NoiseShape,
}

impl Default for RandomInfoGain {
    fn default() -> Self {
        RandomInfoGain {
            horizon: 3,
            a: 0.5,
            b: 2.0,
            t0: (0.5, 2.0),
            s0_over_t0_max: 3.0,
            grid: default_grid(),
            len: None,
            shape: NoiseShape::Free,
        }
    }
}
