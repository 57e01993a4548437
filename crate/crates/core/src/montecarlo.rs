//! Parallel replication of statistics and Kolmogorov distance estimation.
//!
//! Replicate `r` of an experiment draws its own sample from the stream
//! seeded by `(master_seed, r)` and evaluates the statistic through the
//! O(n) reduced path. Replication is embarrassingly parallel and the
//! result is a pure function of `(params, kind, law, R, master_seed)`:
//! per-replicate streams do not depend on scheduling, values land in a
//! preallocated slot indexed by replicate, and the final sort makes the
//! empirical CDF order-independent.
//!
//! The Kolmogorov distance of an empirical CDF from a continuous
//! reference is computed exactly at the sample points:
//! `sup_t |F_R(t) - F(t)| = max_k max(|k/R - F(v_k)|, |(k-1)/R - F(v_k)|)`
//! over the sorted values `v_1 <= ... <= v_R`. DKW confidence radii
//! `sqrt(ln(2/delta) / (2R))` accompany every estimate.

use rayon::prelude::*;

use crate::construction::{self, ConstructionParams, LawTag, ThreePointLaw};
use crate::error::{Error, Result};
use crate::refdist::ReferenceCdf;
use crate::rng::replicate_seed;
use crate::statistics::{RowSums, StatisticKind};

/// Default confidence parameter for DKW radii.
pub const DEFAULT_CONFIDENCE_DELTA: f64 = 0.01;

/// Resource limits for a replication run.
#[derive(Debug, Clone, Copy)]
pub struct ReplicateOptions {
    /// Cap on the replicate count R.
    pub max_replicates: usize,
    /// Cap on the product R * n (total rows drawn).
    pub max_total_rows: u64,
}

impl Default for ReplicateOptions {
    fn default() -> Self {
        Self { max_replicates: 10_000_000, max_total_rows: 1 << 36 }
    }
}

/// DKW confidence radius `sqrt(ln(2/delta) / (2 R))`.
pub fn dkw_radius(r: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * r as f64)).sqrt()
}

/// Sorted replicate values of one statistic, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
    kind: StatisticKind,
    law: LawTag,
    n: usize,
    master_seed: u64,
}

impl EmpiricalCdf {
    /// Wrap raw replicate values (sorted here). All values must be finite.
    pub fn from_values(
        mut values: Vec<f64>,
        kind: StatisticKind,
        law: LawTag,
        n: usize,
        master_seed: u64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empirical CDF needs at least one replicate"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("replicate values must be finite"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values, kind, law, n, master_seed })
    }

    /// Replicate count R.
    pub fn r(&self) -> usize {
        self.values.len()
    }

    /// Values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> StatisticKind {
        self.kind
    }

    pub fn law(&self) -> LawTag {
        self.law
    }

    /// Sample size n each replicate was computed from.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Empirical CDF value `#{v <= t} / R`.
    pub fn cdf_at(&self, t: f64) -> f64 {
        self.values.partition_point(|&v| v <= t) as f64 / self.r() as f64
    }

    /// Empirical probability of the closed interval `[a, b]` (zero when
    /// `a > b`).
    pub fn interval_prob(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return 0.0;
        }
        let lo = self.values.partition_point(|&v| v < a);
        let hi = self.values.partition_point(|&v| v <= b);
        (hi - lo) as f64 / self.r() as f64
    }

    /// Empirical mean (compensated).
    pub fn mean(&self) -> f64 {
        crate::sum::compensated_sum(self.values.iter().copied()) / self.r() as f64
    }

    /// Empirical variance (compensated, denominator R).
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        crate::sum::compensated_sum(self.values.iter().map(|v| (v - m) * (v - m)))
            / self.r() as f64
    }
}

/// A Monte Carlo Kolmogorov-distance estimate with its DKW radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    /// Estimated sup-distance, in `[0, 1]`.
    pub d_hat: f64,
    /// DKW radius at the confidence used.
    pub dkw_radius: f64,
    /// Confidence parameter delta behind `dkw_radius`.
    pub confidence_delta: f64,
    /// Replicate count.
    pub r: usize,
    /// Sample size per replicate.
    pub n: usize,
    pub statistic_kind: StatisticKind,
    pub law_tag: LawTag,
    /// Master seed of the replication.
    pub seed: u64,
}

/// R replicates of one statistic. See [`replicate_multi_with`].
pub fn replicate(
    params: &ConstructionParams,
    kind: StatisticKind,
    law: LawTag,
    r: usize,
    master_seed: u64,
) -> Result<EmpiricalCdf> {
    replicate_with(&ReplicateOptions::default(), params, kind, law, r, master_seed)
}

/// As [`replicate`] with explicit resource limits.
pub fn replicate_with(
    opts: &ReplicateOptions,
    params: &ConstructionParams,
    kind: StatisticKind,
    law: LawTag,
    r: usize,
    master_seed: u64,
) -> Result<EmpiricalCdf> {
    let mut out = replicate_multi_with(opts, params, &[kind], law, r, master_seed)?;
    Ok(out.pop().expect("one kind requested"))
}

/// Replicate several statistics of the *same* draws in one pass.
///
/// `replicate_multi(p, &[A, B], ...)` produces exactly the same values as
/// two separate [`replicate`] calls, because replicate `i` always draws
/// from the stream seeded by `(master_seed, i)` regardless of which
/// statistics are read off the sample.
pub fn replicate_multi(
    params: &ConstructionParams,
    kinds: &[StatisticKind],
    law: LawTag,
    r: usize,
    master_seed: u64,
) -> Result<Vec<EmpiricalCdf>> {
    replicate_multi_with(&ReplicateOptions::default(), params, kinds, law, r, master_seed)
}

/// As [`replicate_multi`] with explicit resource limits.
pub fn replicate_multi_with(
    opts: &ReplicateOptions,
    params: &ConstructionParams,
    kinds: &[StatisticKind],
    law: LawTag,
    r: usize,
    master_seed: u64,
) -> Result<Vec<EmpiricalCdf>> {
    if kinds.is_empty() {
        return Err(Error::invalid("at least one statistic kind required"));
    }
    if r < 2 {
        return Err(Error::invalid(format!("replicate count R = {r} must be at least 2")));
    }
    if r > opts.max_replicates {
        return Err(Error::BudgetExceeded(format!(
            "R = {r} exceeds the replicate cap {}",
            opts.max_replicates
        )));
    }
    let n = params.n();
    let total_rows = (r as u64).saturating_mul(n as u64);
    if total_rows > opts.max_total_rows {
        return Err(Error::BudgetExceeded(format!(
            "R * n = {total_rows} exceeds the row budget {}",
            opts.max_total_rows
        )));
    }
    // fail fast on configurations whose law is invalid, before any work
    if law == LawTag::HeavyTailedY {
        ThreePointLaw::new(params.nu(), params.sigma_n())?;
    }

    let k = kinds.len();
    // flat row-major [replicate][kind] value table
    let mut table = vec![0.0f64; r * k];
    table
        .par_chunks_mut(k)
        .enumerate()
        .try_for_each_init(Vec::new, |buf, (rep, slot)| -> Result<()> {
            let seed = replicate_seed(master_seed, rep as u64);
            construction::sample_into(params, law, n, seed, buf)?;
            let sums = RowSums::from_rows(buf);
            for (j, kind) in kinds.iter().enumerate() {
                slot[j] = match kind {
                    StatisticKind::PStar => sums.pstar(),
                    StatisticKind::ScaledV => sums.pstar(),
                    StatisticKind::ScaledU => sums.u_scaled(),
                    StatisticKind::Remainder => sums.remainder(),
                };
            }
            Ok(())
        })?;

    kinds
        .iter()
        .enumerate()
        .map(|(j, &kind)| {
            let column: Vec<f64> = (0..r).map(|i| table[i * k + j]).collect();
            EmpiricalCdf::from_values(column, kind, law, n, master_seed)
        })
        .collect()
}

/// Exact sup-distance between an empirical CDF and a continuous reference,
/// with the DKW radius at confidence `delta`.
pub fn kolmogorov_distance(
    ecdf: &EmpiricalCdf,
    reference: &ReferenceCdf,
    delta: f64,
) -> Result<DistanceEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("confidence delta = {delta} must lie in (0, 1)")));
    }
    let r = ecdf.r();
    let values = ecdf.values();
    // parallel chunked max-reduction; by-value max is exact, so the
    // result does not depend on the chunking
    let chunk = 8192usize;
    let d_hat = values
        .par_chunks(chunk)
        .enumerate()
        .map(|(ci, vs)| -> Result<f64> {
            let base = ci * chunk;
            let mut local = 0.0f64;
            for (off, &v) in vs.iter().enumerate() {
                let k = (base + off + 1) as f64;
                let f = reference.eval(v)?;
                local = local.max((k / r as f64 - f).abs());
                local = local.max(((k - 1.0) / r as f64 - f).abs());
            }
            Ok(local)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(DistanceEstimate {
        d_hat,
        dkw_radius: dkw_radius(r, delta),
        confidence_delta: delta,
        r,
        n: ecdf.n(),
        statistic_kind: ecdf.kind(),
        law_tag: ecdf.law(),
        seed: ecdf.master_seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::EvalPath;
    use approx::assert_relative_eq;

    fn params(n: usize) -> ConstructionParams {
        ConstructionParams::new(3.0, 1.0, n).unwrap()
    }

    #[test]
    fn replicate_is_deterministic_and_matches_manual_path() {
        let p = params(64);
        let e1 = replicate(&p, StatisticKind::ScaledV, LawTag::GaussianZ, 8, 5).unwrap();
        let e2 = replicate(&p, StatisticKind::ScaledV, LawTag::GaussianZ, 8, 5).unwrap();
        assert_eq!(e1, e2);

        // replicate 3 equals sampling with its derived seed and evaluating
        let seed3 = crate::rng::replicate_seed(5, 3);
        let m = crate::construction::sample_z(&p, 64, seed3).unwrap();
        let v = crate::statistics::eval_v_scaled(&m, EvalPath::Reduced).unwrap().value;
        assert!(e1.values().contains(&v));
    }

    #[test]
    fn multi_kind_replication_reuses_draws() {
        let p = params(32);
        let both = replicate_multi(
            &p,
            &[StatisticKind::ScaledV, StatisticKind::ScaledU],
            LawTag::GaussianZ,
            16,
            99,
        )
        .unwrap();
        let solo_v = replicate(&p, StatisticKind::ScaledV, LawTag::GaussianZ, 16, 99).unwrap();
        let solo_u = replicate(&p, StatisticKind::ScaledU, LawTag::GaussianZ, 16, 99).unwrap();
        assert_eq!(both[0], solo_v);
        assert_eq!(both[1], solo_u);
    }

    #[test]
    fn budget_and_validation_errors() {
        let p = params(1024);
        assert!(matches!(
            replicate(&p, StatisticKind::ScaledV, LawTag::GaussianZ, 1, 0),
            Err(Error::InvalidParameter(_))
        ));
        let opts = ReplicateOptions { max_replicates: 10, max_total_rows: 1 << 36 };
        assert!(matches!(
            replicate_with(&opts, &p, StatisticKind::ScaledV, LawTag::GaussianZ, 11, 0),
            Err(Error::BudgetExceeded(_))
        ));
        let opts = ReplicateOptions { max_replicates: 1 << 30, max_total_rows: 100 };
        assert!(matches!(
            replicate_with(&opts, &p, StatisticKind::ScaledV, LawTag::GaussianZ, 1000, 0),
            Err(Error::BudgetExceeded(_))
        ));
        // heavy-tailed law invalid at n = 2, sigma0 = 1
        let tiny = params(2);
        assert!(replicate(&tiny, StatisticKind::PStar, LawTag::HeavyTailedY, 4, 0).is_err());
    }

    #[test]
    fn single_replicate_at_the_median_gives_half() {
        // chi-squared(1) median: chisq1_cdf(q) = 1/2
        let (mut lo, mut hi) = (0.0f64, 3.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if crate::refdist::chisq1_cdf(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let median = 0.5 * (lo + hi);
        let ecdf = EmpiricalCdf::from_values(
            vec![median],
            StatisticKind::ScaledV,
            LawTag::GaussianZ,
            2,
            0,
        )
        .unwrap();
        let reference = ReferenceCdf::new(0.0, false).unwrap();
        let d = kolmogorov_distance(&ecdf, &reference, 0.01).unwrap();
        assert_relative_eq!(d.d_hat, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn dkw_radius_reference_values() {
        assert_relative_eq!(dkw_radius(1_000, 0.01), 0.051469978465839854, max_relative = 1e-12);
        assert_relative_eq!(dkw_radius(1_000_000, 0.01), 1.6276236307187293e-3, max_relative = 1e-12);
        assert_relative_eq!(
            dkw_radius(10_000_000, 0.001),
            (2000f64.ln() / 2e7).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn gaussian_v_mean_matches_reference_law() {
        // E[n v_n(Z)] = E[sigma xi + chi2_1] = 1
        let p = params(4096);
        let r = 100_000;
        let e = replicate(&p, StatisticKind::ScaledV, LawTag::GaussianZ, r, 11).unwrap();
        let sigma = p.sigma_n();
        let band = 4.0 * ((sigma * sigma + 2.0) / r as f64).sqrt();
        assert!((e.mean() - 1.0).abs() <= band, "mean {} not within {band} of 1", e.mean());

        let eu = replicate(&p, StatisticKind::ScaledU, LawTag::GaussianZ, r, 11).unwrap();
        assert!((eu.mean() - 0.0).abs() <= band, "u mean {} not within {band} of 0", eu.mean());
    }

    #[test]
    fn interval_probabilities() {
        let ecdf = EmpiricalCdf::from_values(
            vec![1.0, 2.0, 2.0, 3.0],
            StatisticKind::PStar,
            LawTag::GaussianZ,
            2,
            0,
        )
        .unwrap();
        assert_eq!(ecdf.interval_prob(2.0, 2.0), 0.5);
        assert_eq!(ecdf.interval_prob(1.5, 3.0), 0.75);
        assert_eq!(ecdf.interval_prob(3.5, 1.0), 0.0);
        assert_eq!(ecdf.cdf_at(2.0), 0.75);
    }
}
