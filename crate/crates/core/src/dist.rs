//! Log-concave densities, truncation, and 2ⁿ-point discretization.
//!
//! A [`ContinuousDistribution`] is an analytic family restricted to a finite
//! support `[0, width)`; the original coordinate of the left edge is kept in
//! `origin`. [`discretize`] turns it into a [`DiscretizedDistribution`] by a
//! left-Riemann sum on `N = 2ⁿ` equal cells, renormalized to unit mass.
//!
//! All means computed on a discretized distribution are in index units,
//! i.e. over the domain `{0, 1, …, 2ⁿ − 1}`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::stats::neumaier_sum;

/// Default per-tail truncation tolerance.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;
/// Largest supported qubit count.
pub const MAX_QUBITS: u32 = 20;
/// Probe points used to estimate the density slope bound.
pub const BETA_PROBE_POINTS: usize = 100_000;
/// Safety factor applied to the probed slope bound.
pub const BETA_SAFETY: f64 = 1.05;
/// Absolute slack in the discrete log-concavity check.
pub const LOG_CONCAVITY_SLACK: f64 = 1e-12;

const QUADRATURE_PANELS: usize = 1_000_000;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Analytic log-concave density families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Logistic { loc: f64, scale: f64 },
    /// Constant density on `[lo, hi]`. Never truncated.
    Uniform { lo: f64, hi: f64 },
}

impl Family {
    pub fn standard_normal() -> Self {
        Family::Normal { mean: 0.0, sd: 1.0 }
    }

    /// Family with its conventional standard parameters, by name.
    pub fn standard(name: &str) -> Result<Self> {
        match name {
            "normal" => Ok(Family::standard_normal()),
            "exponential" => Ok(Family::Exponential { rate: 1.0 }),
            "logistic" => Ok(Family::Logistic { loc: 0.0, scale: 1.0 }),
            "uniform" => Ok(Family::Uniform { lo: 0.0, hi: 1.0 }),
            other => Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Normal { .. } => "normal",
            Family::Exponential { .. } => "exponential",
            Family::Logistic { .. } => "logistic",
            Family::Uniform { .. } => "uniform",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::UnboundedParameter(format!("{}: {what}", self.name())));
        match *self {
            Family::Normal { mean, sd } => {
                if !mean.is_finite() || !sd.is_finite() {
                    return bad("non-finite parameter");
                }
                if sd <= 0.0 {
                    return bad("sd must be positive");
                }
            }
            Family::Exponential { rate } => {
                if !rate.is_finite() || rate <= 0.0 {
                    return bad("rate must be positive and finite");
                }
            }
            Family::Logistic { loc, scale } => {
                if !loc.is_finite() || !scale.is_finite() {
                    return bad("non-finite parameter");
                }
                if scale <= 0.0 {
                    return bad("scale must be positive");
                }
            }
            Family::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return bad("non-finite parameter");
                }
                if hi <= lo {
                    return bad("hi must exceed lo");
                }
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Family::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Family::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Family::Logistic { loc, scale } => {
                let e = (-((x - loc) / scale).abs()).exp();
                e / (scale * (1.0 + e) * (1.0 + e))
            }
            Family::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Family::Normal { mean, sd } => 0.5 * erfc(-(x - mean) / (sd * SQRT_2)),
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Family::Logistic { loc, scale } => 1.0 / (1.0 + (-(x - loc) / scale).exp()),
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Survival function `1 − cdf(x)`, evaluated without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Family::Normal { mean, sd } => 0.5 * erfc((x - mean) / (sd * SQRT_2)),
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Family::Logistic { loc, scale } => 1.0 / (1.0 + ((x - loc) / scale).exp()),
            Family::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// `x` with `cdf(x) = p`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Family::Normal { mean, sd } => mean - sd * SQRT_2 * erfc_inv(2.0 * p),
            Family::Exponential { rate } => -(-p).ln_1p() / rate,
            Family::Logistic { loc, scale } => loc + scale * (p / (1.0 - p)).ln(),
            Family::Uniform { lo, hi } => lo + p * (hi - lo),
        }
    }

    /// `x` with `sf(x) = q`.
    pub fn upper_quantile(&self, q: f64) -> f64 {
        match *self {
            Family::Normal { mean, sd } => mean + sd * SQRT_2 * erfc_inv(2.0 * q),
            Family::Exponential { rate } => -q.ln() / rate,
            Family::Logistic { loc, scale } => loc + scale * ((1.0 - q) / q).ln(),
            Family::Uniform { lo, hi } => hi - q * (hi - lo),
        }
    }

    fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Probability of `[a, b)`, using whichever tail keeps the difference well conditioned.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let m = if a >= self.median() {
            self.sf(a) - self.sf(b)
        } else {
            self.cdf(b) - self.cdf(a)
        };
        m.max(0.0)
    }
}

/// A log-concave density restricted to `[0, width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousDistribution {
    pub family: Family,
    /// Original coordinate of the left support edge; `x = 0` here maps to `origin` there.
    pub origin: f64,
    /// Support length `Δx = x_u − x_l`.
    pub width: f64,
    /// Bound on `|dp/dx|` over the support (of the renormalized truncated density).
    pub beta: f64,
    pub tail_tol: f64,
    /// Family mass kept inside the support.
    pub kept_mass: f64,
}

/// Truncates `family` to the central region leaving at most `tail_tol` mass in each
/// tail, and shifts it so that the support starts at zero.
pub fn truncate(family: Family, tail_tol: f64) -> Result<ContinuousDistribution> {
    family.validate()?;
    if !(tail_tol > 0.0 && tail_tol <= 0.01) {
        return Err(Error::InvalidParameter(format!(
            "tail_tol must lie in (0, 0.01], got {tail_tol}"
        )));
    }
    let (lo, hi) = match family {
        Family::Exponential { .. } => (0.0, family.upper_quantile(tail_tol)),
        Family::Uniform { lo, hi } => (lo, hi),
        _ => (family.quantile(tail_tol), family.upper_quantile(tail_tol)),
    };
    let width = hi - lo;
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::UnboundedParameter(format!(
            "{} truncation produced support width {width}",
            family.name()
        )));
    }
    let kept_mass = family.mass(lo, hi);
    let mut d = ContinuousDistribution {
        family,
        origin: lo,
        width,
        beta: 0.0,
        tail_tol,
        kept_mass,
    };
    d.beta = d.probe_slope_bound(BETA_PROBE_POINTS) * BETA_SAFETY;
    Ok(d)
}

impl ContinuousDistribution {
    /// `(x_l, x_u)`.
    pub fn support(&self) -> (f64, f64) {
        (0.0, self.width)
    }

    /// Renormalized truncated density. Zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..self.width).contains(&x) {
            return 0.0;
        }
        self.family.pdf(x + self.origin) / self.kept_mass
    }

    /// Renormalized truncated mass of `[a, b)` (coordinates relative to the support).
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let b = b.min(self.width);
        self.family.mass(a + self.origin, b + self.origin) / self.kept_mass
    }

    /// Mass the truncation removed below `x_l` and above `x_u`.
    pub fn tail_masses(&self) -> (f64, f64) {
        (
            self.family.cdf(self.origin),
            self.family.sf(self.origin + self.width),
        )
    }

    /// Largest `|finite-difference slope|` of the density over `points` probes.
    pub fn probe_slope_bound(&self, points: usize) -> f64 {
        let step = self.width / (points - 1) as f64;
        let mut prev = self.family.pdf(self.origin) / self.kept_mass;
        let mut worst = 0.0_f64;
        for j in 1..points {
            let x = (j as f64 * step).min(self.width);
            let cur = self.family.pdf(x + self.origin) / self.kept_mass;
            worst = worst.max(((cur - prev) / step).abs());
            prev = cur;
        }
        worst
    }

    /// Midpoint concavity of `ln p` on a probe grid of `points` points.
    pub fn is_log_concave(&self, points: usize) -> bool {
        let step = self.width / (points + 1) as f64;
        let logp: Vec<f64> = (0..=points)
            .map(|j| self.pdf(j as f64 * step).ln())
            .collect();
        logp.windows(3)
            .all(|w| w[1] + 1e-9 * w[1].abs().max(1.0) >= 0.5 * (w[0] + w[2]))
    }

    /// Mean over the support in support coordinates, by composite Simpson quadrature
    /// of `x p(x)` and `p(x)` on `panels` panels.
    pub fn quadrature_mean(&self, panels: usize) -> f64 {
        let panels = panels + panels % 2;
        let h = self.width / panels as f64;
        let weight = |j: usize| match j {
            0 => 1.0,
            j if j == panels => 1.0,
            j if j % 2 == 1 => 4.0,
            _ => 2.0,
        };
        // the density is continuous up to x_u, so evaluate the family directly at the right edge
        let f = |x: f64| self.family.pdf(x + self.origin);
        let mass = neumaier_sum((0..=panels).map(|j| weight(j) * f(j as f64 * h)));
        let first = neumaier_sum((0..=panels).map(|j| {
            let x = j as f64 * h;
            weight(j) * x * f(x)
        }));
        first / mass
    }
}

/// Where inside each cell the density is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// `p_i ∝ p(x_l + i Δx/N)`.
    #[default]
    #[serde(alias = "left-riemann")]
    Left,
    /// `p_i ∝ p(x_l + (i + ½) Δx/N)`.
    Midpoint,
}

impl Rule {
    /// Offset of the evaluation point inside a cell, in cell widths.
    pub fn anchor(self) -> f64 {
        match self {
            Rule::Left => 0.0,
            Rule::Midpoint => 0.5,
        }
    }
}

/// A `2ⁿ`-point probability mass function on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizedDistribution {
    n: u32,
    probs: Vec<f64>,
    x_lo: f64,
    width: f64,
    anchor: f64,
}

impl DiscretizedDistribution {
    /// Wraps an explicit pmf on `{0, …, 2ⁿ − 1}` (grid `x_i = i`).
    ///
    /// The length must be a power of two ≥ 2, entries non-negative and finite,
    /// the sum within 1e−9 of one (it is renormalized exactly), and the pmf
    /// discretely log-concave.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let len = probs.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidPmf(format!(
                "length {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros();
        if n > MAX_QUBITS {
            return Err(Error::InvalidPmf(format!("n = {n} exceeds {MAX_QUBITS}")));
        }
        let width = len as f64;
        Self::with_grid(n, probs, 0.0, width, 0.0, 1e-9)
    }

    fn with_grid(
        n: u32,
        mut probs: Vec<f64>,
        x_lo: f64,
        width: f64,
        anchor: f64,
        sum_tol: f64,
    ) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!("entry {bad} is negative or non-finite")));
        }
        let total = neumaier_sum(probs.iter().copied());
        if !(total > 0.0) || (total - 1.0).abs() > sum_tol {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        if let Some(i) = first_log_concavity_violation(&probs) {
            return Err(Error::InvalidPmf(format!(
                "not log-concave at index {i}: {}² < {}·{}",
                probs[i],
                probs[i - 1],
                probs[i + 1]
            )));
        }
        Ok(Self {
            n,
            probs,
            x_lo,
            width,
            anchor,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `N = 2ⁿ`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Coordinate at which cell `i` was sampled: `x_l + i Δx / N` for the left rule.
    pub fn grid_point(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + self.anchor) * self.cell_width()
    }

    pub fn cell_width(&self) -> f64 {
        self.width / self.len() as f64
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn half(&self) -> usize {
        self.len() / 2
    }

    /// Converts an index-unit mean to grid coordinates.
    pub fn index_to_x(&self, index_mean: f64) -> f64 {
        self.x_lo + (index_mean + self.anchor) * self.cell_width()
    }
}

fn first_log_concavity_violation(probs: &[f64]) -> Option<usize> {
    (1..probs.len().saturating_sub(1))
        .find(|&i| probs[i] * probs[i] < probs[i - 1] * probs[i + 1] - LOG_CONCAVITY_SLACK)
}

/// Left-Riemann discretization of `d` on `2ⁿ` cells, renormalized to sum to one.
pub fn discretize(d: &ContinuousDistribution, n: u32) -> Result<DiscretizedDistribution> {
    discretize_with(d, n, Rule::Left)
}

pub fn discretize_with(
    d: &ContinuousDistribution,
    n: u32,
    rule: Rule,
) -> Result<DiscretizedDistribution> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "n must lie in 1..={MAX_QUBITS}, got {n}"
        )));
    }
    let cells = 1usize << n;
    let h = d.width / cells as f64;
    let anchor = rule.anchor();
    let probs: Vec<f64> = (0..cells)
        .map(|i| d.pdf((i as f64 + anchor) * h) * h)
        .collect();
    // the raw left-Riemann sum is only approximately 1; its drift is O(β h Δx)
    let total = neumaier_sum(probs.iter().copied());
    let probs = probs.into_iter().map(|p| p / total).collect();
    DiscretizedDistribution::with_grid(n, probs, 0.0, d.width, anchor, f64::INFINITY)
}

/// `Σ i·p_i` over `{0, …, 2ⁿ − 1}`.
pub fn exact_mean(disc: &DiscretizedDistribution) -> f64 {
    neumaier_sum(disc.probs.iter().enumerate().map(|(i, p)| i as f64 * p))
}

/// Mass on the left half of the grid, `Σ_{i < 2ⁿ⁻¹} p_i`.
pub fn left_mass(disc: &DiscretizedDistribution) -> f64 {
    neumaier_sum(disc.probs[..disc.half()].iter().copied()).clamp(0.0, 1.0)
}

/// Conditional means of the two halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfMeans {
    pub left: f64,
    pub right: f64,
    pub left_mass: f64,
}

pub fn half_means(disc: &DiscretizedDistribution) -> Result<HalfMeans> {
    let half = disc.half();
    let pl = neumaier_sum(disc.probs[..half].iter().copied());
    let pr = neumaier_sum(disc.probs[half..].iter().copied());
    if pl <= 0.0 || pr <= 0.0 {
        return Err(Error::DegenerateHalf(pl));
    }
    let left = neumaier_sum(disc.probs[..half].iter().enumerate().map(|(i, p)| i as f64 * p)) / pl;
    let right = neumaier_sum(
        disc.probs[half..]
            .iter()
            .enumerate()
            .map(|(i, p)| (i + half) as f64 * p),
    ) / pr;
    Ok(HalfMeans {
        left,
        right,
        left_mass: pl,
    })
}

/// Sensitivity `k = μ_R − μ_L` of the encoded mean to a left-mass error:
/// shifting `ε` of mass into the left half moves the mean to `μ − k ε`.
pub fn half_gap_k(disc: &DiscretizedDistribution) -> Result<f64> {
    let h = half_means(disc)?;
    Ok(h.right - h.left)
}

/// Discretization error of the mean, in support coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscretizationErrorReport {
    pub n: u32,
    /// `(β/2)(Δx/N_d)²`.
    pub bound: f64,
    /// `|μ_cont − μ_d|`.
    pub measured: f64,
    pub continuous_mean: f64,
    pub discrete_mean: f64,
}

pub fn discretization_bound(beta: f64, width: f64, cells: usize) -> f64 {
    let h = width / cells as f64;
    0.5 * beta * h * h
}

pub fn discretization_error_report(
    d: &ContinuousDistribution,
    n: u32,
) -> Result<DiscretizationErrorReport> {
    discretization_error_report_with(d, n, Rule::Left)
}

pub fn discretization_error_report_with(
    d: &ContinuousDistribution,
    n: u32,
    rule: Rule,
) -> Result<DiscretizationErrorReport> {
    let disc = discretize_with(d, n, rule)?;
    let continuous_mean = d.quadrature_mean(QUADRATURE_PANELS);
    let discrete_mean = disc.index_to_x(exact_mean(&disc));
    Ok(DiscretizationErrorReport {
        n,
        bound: discretization_bound(d.beta, d.width, disc.len()),
        measured: (continuous_mean - discrete_mean).abs(),
        continuous_mean,
        discrete_mean,
    })
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

/// Everything needed to build a discretized distribution: family, truncation,
/// qubit count and quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    pub n: u32,
    #[serde(default)]
    pub rule: Rule,
}

impl DistributionSpec {
    pub fn new(family: Family, n: u32) -> Self {
        Self {
            family,
            tail_tol: DEFAULT_TAIL_TOL,
            n,
            rule: Rule::Left,
        }
    }

    pub fn continuous(&self) -> Result<ContinuousDistribution> {
        truncate(self.family, self.tail_tol)
    }

    pub fn build(&self) -> Result<DiscretizedDistribution> {
        discretize_with(&self.continuous()?, self.n, self.rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform01() -> ContinuousDistribution {
        truncate(Family::Uniform { lo: 0.0, hi: 1.0 }, DEFAULT_TAIL_TOL).unwrap()
    }

    #[test]
    fn exponential_truncation_is_closed_form() {
        let d = truncate(Family::Exponential { rate: 1.0 }, 1e-9).unwrap();
        assert_eq!(d.origin, 0.0);
        assert!((d.width - 20.723_265_836_946_41).abs() < 1e-9);
        let (lo, hi) = d.tail_masses();
        assert_eq!(lo, 0.0);
        assert!(hi <= 1e-9 * (1.0 + 1e-12));
    }

    #[test]
    fn logistic_truncation_width() {
        let d = truncate(Family::Logistic { loc: 0.0, scale: 1.0 }, 0.01).unwrap();
        assert!((d.width - 2.0 * 99f64.ln()).abs() < 1e-12);
        assert!((d.width - 9.190).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_parameters() {
        for fam in [
            Family::Normal { mean: 0.0, sd: 0.0 },
            Family::Normal { mean: f64::NAN, sd: 1.0 },
            Family::Exponential { rate: -1.0 },
            Family::Logistic { loc: 0.0, scale: f64::INFINITY },
            Family::Uniform { lo: 1.0, hi: 1.0 },
        ] {
            assert!(matches!(
                truncate(fam, 1e-9),
                Err(Error::UnboundedParameter(_))
            ));
        }
        assert!(matches!(
            truncate(Family::standard_normal(), 0.5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            truncate(Family::standard_normal(), 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn uniform_discretization() {
        let disc = discretize(&uniform01(), 2).unwrap();
        assert_eq!(disc.probs(), &[0.25; 4]);
        assert_eq!(exact_mean(&disc), 1.5);
        assert_eq!(left_mass(&disc), 0.5);
        assert_eq!(half_gap_k(&disc).unwrap(), 2.0);
        let hm = half_means(&disc).unwrap();
        assert_eq!((hm.left, hm.right), (0.5, 2.5));
    }

    #[test]
    fn uniform_half_gap_is_half_the_grid() {
        for n in 1..=12 {
            let disc = discretize(&uniform01(), n).unwrap();
            let k = half_gap_k(&disc).unwrap();
            assert!((k - (1u64 << (n - 1)) as f64).abs() < 1e-9 * k);
        }
    }

    #[test]
    fn exponential_two_point_ratio() {
        let d = truncate(Family::Exponential { rate: 1.0 }, 1e-9).unwrap();
        let disc = discretize(&d, 1).unwrap();
        let p = disc.probs();
        let expected = 1.0 / (1.0 + (-d.width / 2.0).exp());
        assert!((p[0] / (p[0] + p[1]) - expected).abs() < 1e-15);
    }

    #[test]
    fn point_mass_mean() {
        let disc = DiscretizedDistribution::from_probs(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(exact_mean(&disc), 3.0);
        assert_eq!(left_mass(&disc), 0.0);
        assert!(matches!(half_gap_k(&disc), Err(Error::DegenerateHalf(_))));
    }

    #[test]
    fn from_probs_validation() {
        assert!(DiscretizedDistribution::from_probs(vec![1.0]).is_err());
        assert!(DiscretizedDistribution::from_probs(vec![0.5, 0.25, 0.25]).is_err());
        assert!(DiscretizedDistribution::from_probs(vec![0.5, 0.6, 0.0, -0.1]).is_err());
        assert!(DiscretizedDistribution::from_probs(vec![0.5, 0.0, 0.5, 0.0]).is_err());
        assert!(DiscretizedDistribution::from_probs(vec![0.3, 0.3, 0.3, 0.3]).is_err());
        assert!(DiscretizedDistribution::from_probs(vec![0.1, 0.2, 0.3, 0.4]).is_ok());
    }

    #[test]
    fn discretize_rejects_out_of_range_n() {
        let d = uniform01();
        assert!(discretize(&d, 0).is_err());
        assert!(discretize(&d, 21).is_err());
    }

    #[test]
    fn normal_is_symmetric_under_midpoint_rule() {
        let d = truncate(Family::standard_normal(), DEFAULT_TAIL_TOL).unwrap();
        for n in [1, 4, 9, 14] {
            let disc = discretize_with(&d, n, Rule::Midpoint).unwrap();
            assert!((left_mass(&disc) - 0.5).abs() < 1e-12, "n={n}");
            let mid = ((1u64 << n) - 1) as f64 / 2.0;
            assert!((exact_mean(&disc) - mid).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn normal_left_rule_is_symmetric_about_the_centre_cell() {
        // left endpoints i and N - i mirror each other, so the centre cell N/2
        // (the mode) belongs to the right half
        let d = truncate(Family::standard_normal(), DEFAULT_TAIL_TOL).unwrap();
        for n in [1, 4, 9, 14] {
            let disc = discretize(&d, n).unwrap();
            let p = disc.probs();
            let half = disc.half();
            let expected = 0.5 - 0.5 * (p[half] - p[0]);
            assert!((left_mass(&disc) - expected).abs() < 1e-12, "n={n}");
            assert!((exact_mean(&disc) - half as f64 * (1.0 - p[0])).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn densities_are_log_concave() {
        for fam in [
            Family::standard_normal(),
            Family::Exponential { rate: 2.0 },
            Family::Logistic { loc: 1.0, scale: 0.5 },
            Family::Uniform { lo: -1.0, hi: 3.0 },
        ] {
            let d = truncate(fam, 1e-6).unwrap();
            assert!(d.is_log_concave(10_000), "{fam:?}");
        }
    }

    #[test]
    fn beta_covers_fine_probe() {
        let d = truncate(Family::standard_normal(), 1e-9).unwrap();
        // peak slope of the standard normal is φ(1) = 0.2420
        assert!(d.beta >= d.probe_slope_bound(300_000));
        assert!((d.beta / BETA_SAFETY - 0.241_970_724_519_143_37).abs() < 1e-6);
        assert_eq!(uniform01().beta, 0.0);
    }

    #[test]
    fn bound_plug_in() {
        let b = discretization_bound(0.4, 12.0, 1024);
        assert!((b - 2.746_582_031_25e-5).abs() < 1e-15);
    }

    #[test]
    fn uniform_discretization_error() {
        let r = discretization_error_report_with(&uniform01(), 6, Rule::Midpoint).unwrap();
        assert!(r.measured < 1e-12, "{r:?}");
        // left endpoints sit half a cell below the cell centres
        let r = discretization_error_report(&uniform01(), 6).unwrap();
        assert!((r.measured - 0.5 / 64.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn quadrature_mean_of_truncated_exponential() {
        let d = truncate(Family::Exponential { rate: 1.0 }, 1e-9).unwrap();
        let l = d.width;
        let exact = 1.0 - l * (-l).exp() / (-(-l).exp_m1());
        assert!((d.quadrature_mean(1_000_000) - exact).abs() < 1e-13);
    }
}
