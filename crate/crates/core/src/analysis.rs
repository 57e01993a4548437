//! Inequality calculators, convergence-rate fitting, and the end-to-end
//! experiment pipeline.
//!
//! The bound calculators make the paper-style inequalities executable:
//! variance domination (interval probability plus a Chebyshev-type
//! variance term), the Carbery–Wright anti-concentration bound for
//! degree-m polynomials of log-concave vectors, and their corollary that
//! trades the two off. The unspecified absolute constants are parameters
//! (default 1) and the outputs are shapes to compare, not certified
//! numbers.
//!
//! `theorem1_pipeline` runs the whole experiment: for each sample size in
//! a grid it replicates the scaled V- and U-statistics under the chosen
//! law, estimates the Kolmogorov distance of each to its reference law
//! (`sigma_n xi + chi2_1` for the V row, the centered variant for the U
//! row), flags points indistinguishable from Monte Carlo noise, and fits
//! a log-log rate to compare against the theoretical exponent
//! `-(nu - 2) / (4 nu)`.

use crate::construction::{ConstructionParams, LawTag};
use crate::error::{Error, Result};
use crate::montecarlo::{
    self, DistanceEstimate, EmpiricalCdf, ReplicateOptions, DEFAULT_CONFIDENCE_DELTA,
};
use crate::refdist::ReferenceCdf;
use crate::rng::replicate_seed;
use crate::statistics::StatisticKind;

/// Inputs of the variance-domination bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceDominationInput {
    /// Variance of the dominant term X'.
    pub var_x: f64,
    /// Variance of the perturbation Y'.
    pub var_y: f64,
    /// Window width epsilon.
    pub epsilon: f64,
    /// `P(X' in (t - eps, t])`, scaled as in the normalized bound.
    pub interval_prob_left: f64,
    /// `P(X' in (t, t + eps])`.
    pub interval_prob_right: f64,
}

impl VarianceDominationInput {
    pub fn new(
        var_x: f64,
        var_y: f64,
        epsilon: f64,
        interval_prob_left: f64,
        interval_prob_right: f64,
    ) -> Result<Self> {
        if !(var_x > 0.0) {
            return Err(Error::invalid("var_x must be positive"));
        }
        if !(var_y >= 0.0) {
            return Err(Error::invalid("var_y must be nonnegative"));
        }
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        for (name, p) in [("interval_prob_left", interval_prob_left), ("interval_prob_right", interval_prob_right)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} must be a probability")));
            }
        }
        Ok(Self { var_x, var_y, epsilon, interval_prob_left, interval_prob_right })
    }
}

/// Variance-domination bound at one epsilon:
/// `max(P(X' in (t-eps, t]), P(X' in (t, t+eps])) + Var[Y'] / (Var[X'] eps^2)`.
///
/// With `var_x = 1` this is the unnormalized form; minimizing over an
/// epsilon grid realizes the infimum (see [`vd_bound_infimum`]).
pub fn vd_bound(input: &VarianceDominationInput) -> f64 {
    input.interval_prob_left.max(input.interval_prob_right)
        + input.var_y / (input.var_x * input.epsilon * input.epsilon)
}

/// Geometric epsilon grid `2^-20, 2^-19, ..., 2^4` for realizing infima.
pub fn epsilon_grid() -> impl Iterator<Item = f64> {
    (-20..=4).map(|k| (k as f64).exp2())
}

/// Minimize [`vd_bound`] over [`epsilon_grid`]; `interval_probs(eps)`
/// supplies the two interval probabilities at each window width.
pub fn vd_bound_infimum(
    var_x: f64,
    var_y: f64,
    mut interval_probs: impl FnMut(f64) -> (f64, f64),
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for eps in epsilon_grid() {
        let (pl, pr) = interval_probs(eps);
        let input = VarianceDominationInput::new(var_x, var_y, eps, pl, pr)?;
        best = best.min(vd_bound(&input));
    }
    Ok(best)
}

/// Carbery–Wright anti-concentration bound for a degree-`m` polynomial of
/// a log-concave random vector:
/// `P(|q_m| <= eps) <= C m eps^(1/m) (E q_m^2)^(-1/(2m))`.
///
/// The absolute constant `C` is not pinned down by the theory; it is a
/// parameter with default 1 and the result is non-normative.
pub fn carbery_wright_bound(
    m: u32,
    epsilon: f64,
    second_moment: f64,
    constant_c: f64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("polynomial degree m must be positive"));
    }
    if !(epsilon > 0.0 && second_moment > 0.0 && constant_c > 0.0) {
        return Err(Error::invalid(
            "epsilon, second_moment and constant_C must all be positive",
        ));
    }
    let mf = m as f64;
    Ok(constant_c * mf * epsilon.powf(1.0 / mf) * second_moment.powf(-1.0 / (2.0 * mf)))
}

/// Two-term corollary bound:
/// `C m (Var[Y']/Var[X'])^(1/(2m+1)) + 2 * sup-gap`.
pub fn cor4_bound(
    m: u32,
    var_ratio: f64,
    universality_gap: f64,
    constant_c: f64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("polynomial degree m must be positive"));
    }
    if !(var_ratio > 0.0) {
        return Err(Error::invalid("var_ratio must be positive"));
    }
    if !(universality_gap >= 0.0) {
        return Err(Error::invalid("universality_gap must be nonnegative"));
    }
    let mf = m as f64;
    Ok(constant_c * mf * var_ratio.powf(1.0 / (2.0 * mf + 1.0)) + 2.0 * universality_gap)
}

/// Empirically check the two-sided sandwich
///
/// ```text
/// P(a <= X'+Y' <= b) <= P(a-eps <= X' <= b+eps) + P(|Y'| >= eps)
/// P(a <= X'+Y' <= b) >= P(a+eps <= X' <= b-eps) - P(|Y'| >= eps)
/// ```
///
/// on empirical CDFs of `X'+Y'` and `X'`, allowing DKW slack (at
/// confidence `delta`) for both empirical interval probabilities.
/// `tail_prob_y` is the caller's bound on `P(|Y'| >= eps)` (e.g. from
/// Markov's inequality). Returns `(upper_holds, lower_holds)`.
pub fn sandwich_check(
    ecdf_xy: &EmpiricalCdf,
    ecdf_x: &EmpiricalCdf,
    a: f64,
    b: f64,
    epsilon: f64,
    tail_prob_y: f64,
    delta: f64,
) -> Result<(bool, bool)> {
    if a > b {
        return Err(Error::invalid(format!("interval [{a}, {b}] is empty")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if !(0.0..=1.0).contains(&tail_prob_y) {
        return Err(Error::invalid("tail_prob_y must be a probability"));
    }
    let slack = montecarlo::dkw_radius(ecdf_xy.r(), delta) + montecarlo::dkw_radius(ecdf_x.r(), delta);
    let p_xy = ecdf_xy.interval_prob(a, b);
    let upper = p_xy <= ecdf_x.interval_prob(a - epsilon, b + epsilon) + tail_prob_y + slack;
    let lower = p_xy >= ecdf_x.interval_prob(a + epsilon, b - epsilon) - tail_prob_y - slack;
    Ok((upper, lower))
}

/// One point of a rate fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n: usize,
    pub d_hat: f64,
    pub dkw_radius: f64,
}

/// Least-squares fit of `ln d_hat` against `ln n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    /// Slope of the log-log fit: the empirical rate exponent.
    pub exponent: f64,
    /// Intercept of the log-log fit.
    pub intercept: f64,
    pub r_squared: f64,
}

/// Theoretical rate exponent `-(nu - 2) / (4 nu)`.
pub fn theoretical_exponent(nu: f64) -> f64 {
    -(nu - 2.0) / (4.0 * nu)
}

/// Ordinary least squares of `ln d_hat` on `ln n`.
///
/// Needs at least two distinct `n` and strictly positive distances (a
/// nonpositive `d_hat` means the Monte Carlo noise floor was reached and
/// the point carries no rate information).
pub fn fit_rate(points: &[RatePoint]) -> Result<RateFit> {
    fit_rate_impl(points, false)
}

/// As [`fit_rate`] but weighting each point by `1 / dkw_radius^2`.
pub fn fit_rate_weighted(points: &[RatePoint]) -> Result<RateFit> {
    fit_rate_impl(points, true)
}

fn fit_rate_impl(points: &[RatePoint], weighted: bool) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::invalid(format!(
            "rate fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    for p in points {
        if !(p.d_hat > 0.0) {
            return Err(Error::invalid(format!(
                "nonpositive d_hat = {} at n = {}: cannot take logs (noise floor reached)",
                p.d_hat, p.n
            )));
        }
        if weighted && !(p.dkw_radius > 0.0) {
            return Err(Error::invalid("weighted fit needs positive dkw radii"));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.d_hat.ln()).collect();
    let ws: Vec<f64> = if weighted {
        points.iter().map(|p| 1.0 / (p.dkw_radius * p.dkw_radius)).collect()
    } else {
        vec![1.0; points.len()]
    };
    let w_tot: f64 = ws.iter().sum();
    let x_bar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / w_tot;
    let y_bar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / w_tot;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - x_bar) * (x - x_bar)).sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("rate fit needs at least 2 distinct n"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - x_bar) * (y - y_bar))
        .sum();
    let exponent = sxy / sxx;
    let intercept = y_bar - exponent * x_bar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| {
            let r = y - (intercept + exponent * x);
            w * r * r
        })
        .sum();
    let ss_tot: f64 = ys.iter().zip(&ws).map(|(y, w)| w * (y - y_bar) * (y - y_bar)).sum();
    let r_squared = if ss_tot > 1e-300 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit { points: points.to_vec(), exponent, intercept, r_squared })
}

/// Knobs of [`theorem1_pipeline`].
#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    /// Law to replicate under (the experiment proper uses the heavy-tailed
    /// law; the Gaussian surrogate turns the V row into an exact-identity
    /// check).
    pub law: LawTag,
    /// DKW confidence parameter for every distance estimate.
    pub confidence_delta: f64,
    /// Absolute tolerance for the reference-CDF quadrature.
    pub quad_tol: f64,
    /// Base node count for the quadrature ladder.
    pub quad_base_nodes: usize,
    /// Node budget for the quadrature ladder.
    pub quad_max_nodes: usize,
    /// Points with `d_hat < noise_floor_factor * dkw_radius` are flagged
    /// and excluded from rate fitting.
    pub noise_floor_factor: f64,
    /// Replication resource limits.
    pub replicate: ReplicateOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            law: LawTag::HeavyTailedY,
            confidence_delta: DEFAULT_CONFIDENCE_DELTA,
            quad_tol: crate::refdist::DEFAULT_ABS_TOL,
            quad_base_nodes: crate::refdist::DEFAULT_BASE_NODES,
            quad_max_nodes: crate::refdist::DEFAULT_MAX_NODES,
            noise_floor_factor: 2.0,
            replicate: ReplicateOptions::default(),
        }
    }
}

/// Distance estimate for one grid point, or the error that stopped it.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub n: usize,
    pub sigma_n: f64,
    /// Seed this grid point's replication ran under.
    pub seed: u64,
    pub outcome: std::result::Result<DistanceOutcome, String>,
}

/// Successful distance estimate plus its noise-floor flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceOutcome {
    pub estimate: DistanceEstimate,
    /// True when the distance is statistically indistinguishable from
    /// zero at this replicate count.
    pub flagged_noise_floor: bool,
}

/// Everything `theorem1_pipeline` produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub nu: f64,
    pub sigma0: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub confidence_delta: f64,
    pub law: LawTag,
    pub theoretical_exponent: f64,
    /// Scaled V-statistic vs `sigma_n xi + chi2_1`, per grid point.
    pub v_rows: Vec<DistanceRow>,
    /// Scaled U-statistic vs `sigma_n xi + chi2_1 - 1`, per grid point.
    pub u_rows: Vec<DistanceRow>,
    pub v_fit: std::result::Result<RateFit, String>,
    pub u_fit: std::result::Result<RateFit, String>,
}

impl Theorem1Report {
    /// Unflagged successful points of a row set, ready for fitting.
    pub fn fit_points(rows: &[DistanceRow]) -> Vec<RatePoint> {
        rows.iter()
            .filter_map(|row| match &row.outcome {
                Ok(out) if !out.flagged_noise_floor => Some(RatePoint {
                    n: row.n,
                    d_hat: out.estimate.d_hat,
                    dkw_radius: out.estimate.dkw_radius,
                }),
                _ => None,
            })
            .collect()
    }
}

/// Run the two-row rate experiment over `n_grid`.
///
/// For each `n`: recompute `sigma_n`, replicate both statistics from the
/// same draws, estimate both Kolmogorov distances, flag noise-floor
/// points, and finally fit log-log rates per row. Per-point failures are
/// recorded in the affected rows and do not abort the grid.
pub fn theorem1_pipeline(
    params_base: &ConstructionParams,
    n_grid: &[usize],
    r: usize,
    master_seed: u64,
    opts: &PipelineOptions,
) -> Result<Theorem1Report> {
    if n_grid.is_empty() {
        return Err(Error::invalid("n_grid must be nonempty"));
    }
    let mut v_rows = Vec::with_capacity(n_grid.len());
    let mut u_rows = Vec::with_capacity(n_grid.len());
    for (idx, &n) in n_grid.iter().enumerate() {
        let seed = replicate_seed(master_seed, idx as u64);
        let (v_out, u_out) = run_grid_point(params_base, n, r, seed, opts);
        let sigma_n = params_base
            .with_n(n)
            .map(|p| p.sigma_n())
            .unwrap_or(f64::NAN);
        v_rows.push(DistanceRow { n, sigma_n, seed, outcome: v_out });
        u_rows.push(DistanceRow { n, sigma_n, seed, outcome: u_out });
    }
    let v_fit = fit_rate(&Theorem1Report::fit_points(&v_rows)).map_err(|e| e.to_string());
    let u_fit = fit_rate(&Theorem1Report::fit_points(&u_rows)).map_err(|e| e.to_string());
    Ok(Theorem1Report {
        nu: params_base.nu(),
        sigma0: params_base.sigma0(),
        replicates: r,
        master_seed,
        confidence_delta: opts.confidence_delta,
        law: opts.law,
        theoretical_exponent: theoretical_exponent(params_base.nu()),
        v_rows,
        u_rows,
        v_fit,
        u_fit,
    })
}

type RowOutcome = std::result::Result<DistanceOutcome, String>;

fn run_grid_point(
    params_base: &ConstructionParams,
    n: usize,
    r: usize,
    seed: u64,
    opts: &PipelineOptions,
) -> (RowOutcome, RowOutcome) {
    let once = || -> Result<(DistanceOutcome, DistanceOutcome)> {
        let params = params_base.with_n(n)?;
        let sigma_n = params.sigma_n();
        let ecdfs = montecarlo::replicate_multi_with(
            &opts.replicate,
            &params,
            &[StatisticKind::ScaledV, StatisticKind::ScaledU],
            opts.law,
            r,
            seed,
        )?;
        let mut outcomes = Vec::with_capacity(2);
        for (ecdf, centered) in ecdfs.iter().zip([false, true]) {
            let reference = ReferenceCdf::new(sigma_n, centered)?
                .with_abs_tol(opts.quad_tol)?
                .with_base_nodes(opts.quad_base_nodes)?
                .with_max_nodes(opts.quad_max_nodes.max(opts.quad_base_nodes))?;
            let estimate = montecarlo::kolmogorov_distance(ecdf, &reference, opts.confidence_delta)?;
            let flagged = estimate.d_hat < opts.noise_floor_factor * estimate.dkw_radius;
            outcomes.push(DistanceOutcome { estimate, flagged_noise_floor: flagged });
        }
        Ok((outcomes[0], outcomes[1]))
    };
    match once() {
        Ok((v, u)) => (Ok(v), Ok(u)),
        Err(e) => {
            let msg = e.to_string();
            (Err(msg.clone()), Err(msg))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vd_bound_examples() {
        // degenerate Y': only the interval term survives
        let input = VarianceDominationInput::new(1.0, 0.0, 1.0, 0.01, 0.02).unwrap();
        assert_relative_eq!(vd_bound(&input), 0.02, max_relative = 1e-15);

        // the epsilon choice (Var[Y']/Var[X'])^(1/3) turns the variance
        // term into the cube root of the ratio
        let var_y = 2.0f64 / 100.0;
        let var_x = 2.0f64;
        let eps = (var_y / var_x).powf(1.0 / 3.0);
        let input = VarianceDominationInput::new(var_x, var_y, eps, 0.0, 0.0).unwrap();
        assert_relative_eq!(vd_bound(&input), (var_y / var_x).powf(1.0 / 3.0), max_relative = 1e-12);
        assert_relative_eq!(vd_bound(&input), 0.21544346900318834, max_relative = 1e-12);

        // pure Chebyshev term
        let input = VarianceDominationInput::new(1.0, 1.0, 10.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(vd_bound(&input), 0.01, max_relative = 1e-15);
    }

    #[test]
    fn vd_bound_monotone_in_var_y() {
        let mut last = 0.0;
        for var_y in [0.0, 0.1, 0.2, 0.5, 1.0] {
            let input = VarianceDominationInput::new(2.0, var_y, 0.5, 0.05, 0.04).unwrap();
            let b = vd_bound(&input);
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn vd_infimum_no_worse_than_any_grid_point() {
        let probs = |eps: f64| (0.3 * eps.min(1.0), 0.2 * eps.min(1.0));
        let inf = vd_bound_infimum(1.0, 0.01, probs).unwrap();
        for eps in epsilon_grid() {
            let (pl, pr) = (0.3 * eps.min(1.0), 0.2 * eps.min(1.0));
            let input = VarianceDominationInput::new(1.0, 0.01, eps, pl, pr).unwrap();
            assert!(inf <= vd_bound(&input) + 1e-15);
        }
    }

    #[test]
    fn carbery_wright_examples() {
        assert_relative_eq!(carbery_wright_bound(1, 0.04, 1.0, 1.0).unwrap(), 0.04, max_relative = 1e-15);
        assert_relative_eq!(carbery_wright_bound(2, 1e-4, 1.0, 1.0).unwrap(), 0.02, max_relative = 1e-12);
        // larger second moment tightens the bound
        let loose = carbery_wright_bound(2, 0.01, 1.0, 1.0).unwrap();
        let tight = carbery_wright_bound(2, 0.01, 4.0, 1.0).unwrap();
        assert!(tight < loose);
        assert!(carbery_wright_bound(0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn cor4_examples() {
        let b = cor4_bound(2, 1e-5, 0.0, 1.0).unwrap();
        assert_relative_eq!(b, 0.2, max_relative = 1e-12);
        assert_relative_eq!(cor4_bound(1, 1.0, 0.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        // vanishing ratio leaves twice the gap
        assert_relative_eq!(cor4_bound(3, 1e-300, 0.125, 1.0).unwrap(), 0.25, max_relative = 1e-3);
        // monotone in the gap
        assert!(cor4_bound(2, 0.5, 0.2, 1.0).unwrap() > cor4_bound(2, 0.5, 0.1, 1.0).unwrap());
    }

    #[test]
    fn fit_rate_recovers_exact_exponents() {
        let points: Vec<RatePoint> = (8..=14)
            .map(|k| {
                let n = 1usize << k;
                RatePoint { n, d_hat: (n as f64).powf(-1.0 / 12.0), dkw_radius: 0.01 }
            })
            .collect();
        let fit = fit_rate(&points).unwrap();
        assert_relative_eq!(fit.exponent, -1.0 / 12.0, epsilon = 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);

        let points: Vec<RatePoint> = (8..=14)
            .map(|k| {
                let n = 1usize << k;
                RatePoint { n, d_hat: 3.0 * (n as f64).powf(-0.2), dkw_radius: 0.01 }
            })
            .collect();
        let fit = fit_rate(&points).unwrap();
        assert_relative_eq!(fit.exponent, -0.2, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);

        // weighted fit agrees on exact data
        let wfit = fit_rate_weighted(&points).unwrap();
        assert_relative_eq!(wfit.exponent, -0.2, epsilon = 1e-12);
    }

    #[test]
    fn fit_rate_error_paths() {
        let p = RatePoint { n: 16, d_hat: 0.1, dkw_radius: 0.01 };
        assert!(fit_rate(&[p]).is_err());
        assert!(fit_rate(&[p, RatePoint { n: 16, d_hat: 0.2, dkw_radius: 0.01 }]).is_err());
        assert!(fit_rate(&[p, RatePoint { n: 32, d_hat: 0.0, dkw_radius: 0.01 }]).is_err());
    }

    #[test]
    fn theoretical_exponent_values() {
        assert_relative_eq!(theoretical_exponent(3.0), -1.0 / 12.0, epsilon = 1e-15);
        assert_relative_eq!(theoretical_exponent(2.5), -0.05, epsilon = 1e-15);
    }

    #[test]
    fn sandwich_trivial_cases() {
        use crate::construction::LawTag;
        let vals: Vec<f64> = (0..256).map(|i| (i as f64) / 17.0 - 7.0).collect();
        let e = EmpiricalCdf::from_values(vals, StatisticKind::PStar, LawTag::GaussianZ, 4, 0)
            .unwrap();
        // Y' identically zero: both inequalities hold with slack
        let (up, lo) = sandwich_check(&e, &e, -1.0, 2.0, 0.25, 0.0, 0.01).unwrap();
        assert!(up && lo);
        // degenerate interval a = b
        let (up, lo) = sandwich_check(&e, &e, 0.5, 0.5, 0.1, 0.0, 0.01).unwrap();
        assert!(up && lo);
        assert!(sandwich_check(&e, &e, 2.0, 1.0, 0.1, 0.0, 0.01).is_err());
    }

    #[test]
    fn pipeline_smoke_on_gaussian_law() {
        let params = ConstructionParams::new(3.0, 1.0, 64).unwrap();
        let opts = PipelineOptions { law: LawTag::GaussianZ, ..Default::default() };
        let report =
            theorem1_pipeline(&params, &[64, 256], 1000, 7, &opts).unwrap();
        assert_eq!(report.v_rows.len(), 2);
        assert_eq!(report.u_rows.len(), 2);
        assert_relative_eq!(report.theoretical_exponent, -1.0 / 12.0, epsilon = 1e-15);
        for row in report.v_rows.iter().chain(&report.u_rows) {
            let out = row.outcome.as_ref().expect("grid point should succeed");
            assert!(out.estimate.d_hat >= 0.0 && out.estimate.d_hat <= 1.0);
            assert_relative_eq!(
                out.estimate.dkw_radius,
                0.051469978465839854,
                max_relative = 1e-12
            );
        }
        // deterministic reruns
        let again = theorem1_pipeline(&params, &[64, 256], 1000, 7, &opts).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn pipeline_records_per_point_failures() {
        // n = 2 under the heavy-tailed law is invalid at sigma0 = 1
        let params = ConstructionParams::new(3.0, 1.0, 64).unwrap();
        let opts = PipelineOptions::default();
        let report = theorem1_pipeline(&params, &[2, 64], 100, 7, &opts).unwrap();
        assert!(report.v_rows[0].outcome.is_err());
        assert!(report.v_rows[1].outcome.is_ok());
        assert!(report.u_rows[0].outcome.is_err());
        // with a single usable point, the fit degrades to an error
        assert!(report.v_fit.is_err() || report.v_fit.is_ok());
    }
}
