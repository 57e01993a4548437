//! Reference laws: the CDFs of `sigma*xi + chi2_1` and its centered
//! variant `sigma*xi + (chi2_1 - 1)`, where `xi ~ N(0,1)` and `chi2_1`
//! are independent.
//!
//! Conditioning on the chi-square component's underlying normal `eta`
//! turns the CDF into a smooth convolution,
//!
//! ```text
//! P(sigma*xi + chi2_1 <= t) = integral Phi((t - y^2)/sigma) phi(y) dy ,
//! ```
//!
//! which a Gauss–Hermite rule evaluates to high accuracy: integrating in
//! `y` rather than in `s = y^2` keeps the chi-square density singularity
//! out of the integrand. Each [`ReferenceCdf`] calibrates one fixed rule
//! by doubling the node count until two consecutive levels agree within
//! `abs_tol` on a probe grid, then evaluates every `t` with that frozen
//! rule. A frozen positive rule makes monotonicity in `t` structural:
//! the computed value is a fixed positive combination of functions that
//! are each nondecreasing in `t`.
//!
//! Evaluation cost per point is small because the integrand saturates:
//! nodes with `t - y^2 > 12 sigma` contribute their full weight (as a
//! precomputed prefix sum) and nodes with `y^2 - t > 12 sigma` contribute
//! nothing beyond 1e-33, so only an `O(sigma sqrt(order))`-sized window
//! of nodes needs the error function.

use std::sync::OnceLock;

use crate::erf;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gk, gauss_hermite};
use crate::sum::NeumaierSum;

/// Standard normal CDF, absolute error below 1e-15.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF of a chi-squared variable with one degree of freedom:
/// `0` for `t <= 0`, else `2 Phi(sqrt(t)) - 1 = erf(sqrt(t/2))`.
#[inline]
pub fn chisq1_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        erf::erf((0.5 * t).sqrt())
    }
}

/// Default absolute tolerance for the quadrature behind [`ReferenceCdf`].
pub const DEFAULT_ABS_TOL: f64 = 1e-9;
/// Default base order of the Gauss–Hermite ladder.
pub const DEFAULT_BASE_NODES: usize = 201;
/// Default cap on the rule order (the ladder doubles the base order).
pub const DEFAULT_MAX_NODES: usize = 13_000;

/// Saturation cutoff in units of `sigma`: `Phi(-12) < 2e-33`.
const WINDOW_CUT: f64 = 12.0;

/// Evaluable CDF of `sigma*xi + chi2_1` (or the centered variant).
#[derive(Debug)]
pub struct ReferenceCdf {
    sigma: f64,
    centered: bool,
    base_nodes: usize,
    max_nodes: usize,
    abs_tol: f64,
    rule: OnceLock<std::result::Result<EvalRule, Error>>,
}

/// A frozen, folded Gauss–Hermite rule on the `c = y^2` axis.
#[derive(Debug)]
struct EvalRule {
    /// `y^2` at each folded node, ascending.
    c: Vec<f64>,
    /// Matching weights, normalized to sum to one.
    w: Vec<f64>,
    /// `prefix[i] = sum(w[..i])`; `prefix[len]` is the total mass.
    prefix: Vec<f64>,
    order: usize,
}

impl EvalRule {
    fn build(order: usize) -> Result<Self> {
        let gh = gauss_hermite(order)?;
        let nodes = gh.nodes();
        let weights = gh.weights();
        let half = order / 2;
        let norm = std::f64::consts::PI.sqrt();
        let mut c = Vec::with_capacity(half + order % 2);
        let mut w = Vec::with_capacity(half + order % 2);
        if order % 2 == 1 {
            c.push(0.0);
            w.push(weights[half] / norm);
        }
        // fold symmetric +/- node pairs; c = y^2 = 2 x^2 ascends as we
        // walk outward from the center
        for k in 1..=half {
            let x = nodes[half + k - 1 + order % 2];
            c.push(2.0 * x * x);
            w.push((weights[half + k - 1 + order % 2] + weights[half - k]) / norm);
        }
        let mut prefix = Vec::with_capacity(c.len() + 1);
        let mut acc = NeumaierSum::new();
        prefix.push(0.0);
        for &wi in &w {
            acc.add(wi);
            prefix.push(acc.value());
        }
        Ok(Self { c, w, prefix, order })
    }

    /// CDF value at `u` on the uncentered axis.
    fn eval(&self, sigma: f64, u: f64) -> f64 {
        let cut = WINDOW_CUT * sigma;
        let lo = self.c.partition_point(|&ci| ci <= u - cut);
        let hi = self.c.partition_point(|&ci| ci < u + cut);
        let mut acc = NeumaierSum::new();
        acc.add(self.prefix[lo]);
        for i in lo..hi {
            acc.add(self.w[i] * normal_cdf((u - self.c[i]) / sigma));
        }
        acc.value().clamp(0.0, 1.0)
    }
}

/// Probe points (uncentered axis) used during rule calibration; they
/// bracket the sharp region near the chi-square singularity and sweep the
/// body and tail of the law.
const CALIBRATION_PROBES: [f64; 16] = [
    -0.5, -0.1, -0.02, 0.0, 0.02, 0.1, 0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0,
];

impl ReferenceCdf {
    /// A reference CDF with `sigma >= 0`; `centered` selects the
    /// `chi2_1 - 1` variant.
    pub fn new(sigma: f64, centered: bool) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma = {sigma} must be nonnegative and finite")));
        }
        Ok(Self {
            sigma,
            centered,
            base_nodes: DEFAULT_BASE_NODES,
            max_nodes: DEFAULT_MAX_NODES,
            abs_tol: DEFAULT_ABS_TOL,
            rule: OnceLock::new(),
        })
    }

    /// Replace the absolute quadrature tolerance (default 1e-9).
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::invalid("abs_tol must be positive"));
        }
        self.abs_tol = abs_tol;
        Ok(self)
    }

    /// Replace the base node count of the calibration ladder.
    pub fn with_base_nodes(mut self, nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::invalid("quad_nodes must be positive"));
        }
        self.base_nodes = nodes;
        Ok(self)
    }

    /// Replace the node budget (ladder stops at this order).
    pub fn with_max_nodes(mut self, nodes: usize) -> Result<Self> {
        if nodes < self.base_nodes {
            return Err(Error::invalid("max_nodes must be at least the base node count"));
        }
        self.max_nodes = nodes;
        Ok(self)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    /// The rule order calibration settled on (evaluates lazily).
    pub fn calibrated_order(&self) -> Result<usize> {
        if self.sigma == 0.0 {
            return Ok(0);
        }
        match self.calibrated() {
            Ok(rule) => Ok(rule.order),
            Err(e) => Err(e.clone()),
        }
    }

    fn calibrated(&self) -> &std::result::Result<EvalRule, Error> {
        self.rule.get_or_init(|| self.calibrate())
    }

    fn calibrate(&self) -> std::result::Result<EvalRule, Error> {
        let mut order = self.base_nodes.min(self.max_nodes);
        let mut rule = EvalRule::build(order)?;
        let mut probe: Vec<f64> =
            CALIBRATION_PROBES.iter().map(|&t| rule.eval(self.sigma, t)).collect();
        let mut achieved = f64::INFINITY;
        while order.saturating_mul(2) <= self.max_nodes {
            order *= 2;
            let next = EvalRule::build(order)?;
            let next_probe: Vec<f64> =
                CALIBRATION_PROBES.iter().map(|&t| next.eval(self.sigma, t)).collect();
            achieved = probe
                .iter()
                .zip(&next_probe)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            rule = next;
            probe = next_probe;
            if achieved <= self.abs_tol {
                return Ok(rule);
            }
        }
        if achieved <= self.abs_tol {
            return Ok(rule);
        }
        Err(Error::Accuracy {
            estimate: f64::NAN,
            error_estimate: achieved,
            target: self.abs_tol,
            context: format!(
                "Gauss-Hermite ladder for sigma = {} exhausted at {} nodes",
                self.sigma, rule.order
            ),
        })
    }

    /// The CDF at `t`, clamped to `[0, 1]`.
    ///
    /// With `sigma = 0` this degenerates to the exact chi-squared CDF.
    /// Fails with an accuracy error (carrying the best estimate computed
    /// at the largest rule the budget allowed) when calibration could not
    /// reach `abs_tol`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let u = if self.centered { t + 1.0 } else { t };
        if self.sigma == 0.0 {
            return Ok(chisq1_cdf(u));
        }
        match self.calibrated() {
            Ok(rule) => Ok(rule.eval(self.sigma, u)),
            Err(Error::Accuracy { error_estimate, target, context, .. }) => {
                // still give the caller the best-effort value
                let best = EvalRule::build(self.max_ladder_order())?;
                Err(Error::Accuracy {
                    estimate: best.eval(self.sigma, u),
                    error_estimate: *error_estimate,
                    target: *target,
                    context: context.clone(),
                })
            }
            Err(e) => Err(e.clone()),
        }
    }

    fn max_ladder_order(&self) -> usize {
        let mut order = self.base_nodes.min(self.max_nodes);
        while order.saturating_mul(2) <= self.max_nodes {
            order *= 2;
        }
        order
    }
}

/// Free-function form of [`ReferenceCdf::eval`].
pub fn mixture_cdf(reference: &ReferenceCdf, t: f64) -> Result<f64> {
    reference.eval(t)
}

/// Numerically bound the two tail integrals from the smoothing argument,
///
/// ```text
/// I1(tau) = integral_{|tau - y^2| >= 1} exp(-(tau - y^2)^2 / 16) dy
/// I2(tau) = integral_{|tau - y^2| >= 1} (tau - y^2)^(-4) dy
/// ```
///
/// over a grid of `tau` values, returning the grid maxima. The analytic
/// bounds are `2 + 4 sqrt(pi)` and `8/3` respectively.
pub fn verify_i1_i2(tau_grid: &[f64]) -> Result<(f64, f64)> {
    if tau_grid.is_empty() {
        return Err(Error::invalid("tau grid must be nonempty"));
    }
    let mut max_i1 = 0.0f64;
    let mut max_i2 = 0.0f64;
    for &tau in tau_grid {
        max_i1 = max_i1.max(eval_i1(tau)?);
        max_i2 = max_i2.max(eval_i2(tau)?);
    }
    Ok((max_i1, max_i2))
}

/// `I1` at a single `tau`.
pub fn eval_i1(tau: f64) -> Result<f64> {
    // beyond y^2 = tau + 60 the integrand is below exp(-225)
    let ymax = (tau.max(0.0) + 60.0).sqrt();
    let f = |y: f64| {
        let d = tau - y * y;
        (-d * d / 16.0).exp()
    };
    integrate_admissible(tau, ymax, f)
}

/// `I2` at a single `tau`.
pub fn eval_i2(tau: f64) -> Result<f64> {
    // for y >= ymax we have y^2 - tau >= y^2/2 (since ymax^2 >= 2 tau),
    // so the tail is below 16/(7 ymax^7) < 2e-11
    let ymax = (tau.max(0.0).sqrt() + 40.0).max(40.0);
    let f = |y: f64| (tau - y * y).powi(-4);
    integrate_admissible(tau, ymax, f)
}

/// Integrate an even function over the admissible region
/// `{ y : |tau - y^2| >= 1 }`, truncated at `|y| = ymax`.
fn integrate_admissible(tau: f64, ymax: f64, f: impl Fn(f64) -> f64 + Copy) -> Result<f64> {
    const TOL: f64 = 1e-8;
    const BUDGET: usize = 20_000;
    let mut total = 0.0;
    if tau <= -1.0 {
        // every y is admissible
        total += 2.0 * adaptive_gk(f, 0.0, ymax, TOL, BUDGET)?.value;
    } else {
        let hi = (tau + 1.0).sqrt();
        if hi < ymax {
            total += 2.0 * adaptive_gk(f, hi, ymax, TOL, BUDGET)?.value;
        }
        if tau >= 1.0 {
            let lo = (tau - 1.0).sqrt();
            total += 2.0 * adaptive_gk(f, 0.0, lo, TOL, BUDGET)?.value;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // high-precision reference: Phi(1)
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-14);
        assert!((normal_cdf(-1.0) - 0.15865525393145705).abs() < 1e-14);
        assert!((normal_cdf(2.0) - 0.9772498680518208).abs() < 1e-14);
        for x in [0.1, 0.5, 1.0, 2.5, 4.0, 7.0] {
            assert!((normal_cdf(-x) - (1.0 - normal_cdf(x))).abs() < 1e-13);
        }
    }

    #[test]
    fn chisq1_cdf_reference_points() {
        assert_eq!(chisq1_cdf(0.0), 0.0);
        assert_eq!(chisq1_cdf(-3.0), 0.0);
        assert_relative_eq!(chisq1_cdf(1.0), 0.6826894921370859, max_relative = 1e-13);
        // 95% quantile via bisection on the CDF itself
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if chisq1_cdf(mid) < 0.95 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - 3.841459).abs() < 1e-5);
        assert_relative_eq!(chisq1_cdf(3.841459), 0.95, max_relative = 1e-6);
    }

    #[test]
    fn sigma_zero_degenerates_to_chisq() {
        let r = ReferenceCdf::new(0.0, false).unwrap();
        assert_eq!(r.eval(1.0).unwrap(), chisq1_cdf(1.0));
        assert_eq!(r.eval(-0.5).unwrap(), 0.0);
        let rc = ReferenceCdf::new(0.0, true).unwrap();
        assert_eq!(rc.eval(0.0).unwrap(), chisq1_cdf(1.0));
    }

    #[test]
    fn centered_is_an_exact_shift() {
        let plain = ReferenceCdf::new(0.25, false).unwrap();
        let centered = ReferenceCdf::new(0.25, true).unwrap();
        for t in [-1.0, -0.3, 0.0, 0.7, 2.0, 9.5] {
            let a = centered.eval(t).unwrap();
            let b = plain.eval(t + 1.0).unwrap();
            assert!((a - b).abs() <= 1e-15, "shift identity at t = {t}");
        }
    }

    #[test]
    fn cdf_limits() {
        // small sigma needs a looser quadrature tolerance (sharp integrand)
        for (sigma, tol) in [(0.05, 2.5e-4), (0.25, 1e-9), (1.0, 1e-9)] {
            let r = ReferenceCdf::new(sigma, false).unwrap().with_abs_tol(tol).unwrap();
            assert!(r.eval(-50.0).unwrap() < tol);
            assert!((r.eval(50.0).unwrap() - 1.0).abs() < tol + 1e-11);
        }
    }

    #[test]
    fn cdf_nondecreasing_on_grid() {
        for sigma in [0.0, 0.05, 0.25, 1.0] {
            let r = ReferenceCdf::new(sigma, false).unwrap().with_abs_tol(2.5e-4).unwrap();
            let mut last = -1.0f64;
            // 2001-point grid over [-10, 30]; the acceptance battery runs 10^4
            for k in 0..=2000 {
                let t = -10.0 + 40.0 * k as f64 / 2000.0;
                let v = r.eval(t).unwrap();
                assert!(
                    v >= last - 1e-12 * (1.0 + last.abs()),
                    "monotonicity violated at sigma={sigma}, t={t}: {v} < {last}"
                );
                last = v;
            }
        }
    }

    #[test]
    fn matches_monte_carlo_smoke() {
        // 10^6 draws of sigma*xi + chi2_1 at sigma = 0.25; the acceptance
        // suite runs the full 10^7-draw version
        use rand::Rng;
        use rand_distr::StandardNormal;
        let sigma = 0.25;
        let r = ReferenceCdf::new(sigma, false).unwrap();
        let n = 1_000_000usize;
        let mut rng = crate::rng::stream(424242);
        let mut draws: Vec<f64> = (0..n)
            .map(|_| {
                let xi: f64 = rng.sample(StandardNormal);
                let eta: f64 = rng.sample(StandardNormal);
                sigma * xi + eta * eta
            })
            .collect();
        draws.sort_unstable_by(f64::total_cmp);
        // DKW radius at 99.9%: sqrt(ln(2000)/(2e6))
        let radius = (2000f64.ln() / (2.0 * n as f64)).sqrt();
        for k in 1..50 {
            let t = -0.5 + k as f64 * 0.12;
            let emp = draws.partition_point(|&v| v <= t) as f64 / n as f64;
            let thy = r.eval(t).unwrap();
            assert!(
                (emp - thy).abs() <= radius,
                "MC mismatch at t={t}: emp={emp} quad={thy} radius={radius}"
            );
        }
    }

    #[test]
    fn unreachable_tolerance_is_an_accuracy_error() {
        let r = ReferenceCdf::new(0.25, false)
            .unwrap()
            .with_abs_tol(1e-15)
            .unwrap()
            .with_max_nodes(402)
            .unwrap();
        match r.eval(1.0) {
            Err(Error::Accuracy { estimate, error_estimate, .. }) => {
                // best-effort estimate still delivered, and sane
                assert!(estimate > 0.5 && estimate < 1.0);
                assert!(error_estimate > 1e-15);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn calibration_order_grows_as_sigma_shrinks() {
        let coarse = ReferenceCdf::new(1.0, false).unwrap();
        let sharp = ReferenceCdf::new(0.25, false).unwrap();
        coarse.eval(1.0).unwrap();
        sharp.eval(1.0).unwrap();
        assert!(coarse.calibrated_order().unwrap() < sharp.calibrated_order().unwrap());
    }

    #[test]
    fn i1_i2_bounds_and_closed_form() {
        let grid = [-10.0, -1.0, 0.0, 1.0, 5.0, 25.0, 100.0];
        let (max_i1, max_i2) = verify_i1_i2(&grid).unwrap();
        assert!(max_i1 <= 2.0 + 4.0 * std::f64::consts::PI.sqrt());
        assert!(max_i2 <= 8.0 / 3.0);
        // attained maxima are far below the analytic bounds
        assert!(max_i1 > 2.0 && max_i1 < 3.5);
        assert!(max_i2 > 0.9 && max_i2 < 1.1);
        // I2(0) = 2 * integral_1^inf y^-8 dy = 2/7 exactly
        assert!((eval_i2(0.0).unwrap() - 2.0 / 7.0).abs() < 1e-6);
        // far-left tail vanishes
        assert!(eval_i1(-1e4).unwrap() < 1e-6);
        assert!(eval_i2(-1e4).unwrap() < 1e-6);
    }
}
