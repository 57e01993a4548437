//! The data-generating process: the shrinking scale schedule, the
//! heavy-tailed three-point law, and the two sample laws used throughout
//! the experiments.
//!
//! A sample row is a vector in R^2. Under the heavy-tailed law the first
//! coordinate mixes a three-point variable `U` with a Gaussian,
//! `y1 = (U + sigma*xi1)/sqrt(2)`, and the second coordinate is standard
//! normal. The Gaussian surrogate law matches the first two moments of
//! every coordinate: `z1 ~ N(0, sigma^2)`, `z2 ~ N(0, 1)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;

/// Exponent, scale and sample size for one experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructionParams {
    nu: f64,
    sigma0: f64,
    n: usize,
}

impl ConstructionParams {
    /// Validates `2 < nu <= 3`, `sigma0 > 0`, `n >= 2`.
    pub fn new(nu: f64, sigma0: f64, n: usize) -> Result<Self> {
        if !(nu > 2.0 && nu <= 3.0) {
            return Err(Error::invalid(format!(
                "nu = {nu} violates the constraint 2 < nu <= 3"
            )));
        }
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::invalid(format!("sigma0 = {sigma0} must be positive and finite")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("n = {n} must be at least 2")));
        }
        Ok(Self { nu, sigma0, n })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same parameters at a different sample size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.nu, self.sigma0, n)
    }

    /// The scale this configuration puts on the Gaussian component.
    pub fn sigma_n(&self) -> f64 {
        sigma_schedule(self)
    }
}

/// The scale schedule `sigma_n = min(sigma0 * n^(-(nu-2)/(2 nu)), 1)`.
///
/// Strictly positive and nonincreasing in `n` for fixed `sigma0`, `nu`.
pub fn sigma_schedule(params: &ConstructionParams) -> f64 {
    let exponent = -(params.nu - 2.0) / (2.0 * params.nu);
    (params.sigma0 * (params.n as f64).powf(exponent)).min(1.0)
}

/// The three-point law: support `{-a, 0, +2a}` with
/// `a = 6^(-1/2) sigma^(-2/(nu-2))`, `P(-a) = 2 sigma^(2 nu/(nu-2))`,
/// `P(+2a) = sigma^(2 nu/(nu-2))` and the rest of the mass at zero.
///
/// Tuned so the mean is 0, the variance is `sigma^2`, and the nu-th
/// absolute moment `6^(-nu/2) (2 + 2^nu)` does not depend on `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePointLaw {
    a: f64,
    p_neg: f64,
    p_zero: f64,
    p_pos: f64,
}

impl ThreePointLaw {
    /// Requires `2 < nu <= 3` and a `sigma` small enough that the three
    /// probabilities are valid, i.e. `3 sigma^(2 nu/(nu-2)) <= 1`.
    pub fn new(nu: f64, sigma: f64) -> Result<Self> {
        if !(nu > 2.0 && nu <= 3.0) {
            return Err(Error::invalid(format!(
                "nu = {nu} violates the constraint 2 < nu ≤ 3"
            )));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::invalid(format!("sigma = {sigma} must lie in (0, 1]")));
        }
        let p_pos = sigma.powf(2.0 * nu / (nu - 2.0));
        let p_neg = 2.0 * p_pos;
        let tail_mass = 3.0 * p_pos;
        if tail_mass > 1.0 {
            return Err(Error::invalid(format!(
                "sigma = {sigma} gives tail mass 3*sigma^(2nu/(nu-2)) = {tail_mass} > 1 at nu = {nu}"
            )));
        }
        Ok(Self {
            a: 6.0_f64.powf(-0.5) * sigma.powf(-2.0 / (nu - 2.0)),
            p_neg,
            p_zero: 1.0 - tail_mass,
            p_pos,
        })
    }

    /// Support magnitude `a`; the atoms sit at `-a`, `0`, `+2a`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p_neg(&self) -> f64 {
        self.p_neg
    }

    pub fn p_zero(&self) -> f64 {
        self.p_zero
    }

    pub fn p_pos(&self) -> f64 {
        self.p_pos
    }

    /// Exact weighted-sum mean over the three atoms.
    pub fn mean(&self) -> f64 {
        -self.a * self.p_neg + 2.0 * self.a * self.p_pos
    }

    /// Exact weighted-sum variance over the three atoms.
    pub fn variance(&self) -> f64 {
        self.a * self.a * self.p_neg + 4.0 * self.a * self.a * self.p_pos
    }

    /// Exact weighted-sum absolute moment `E|U|^p` over the three atoms.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.a.powf(p) * self.p_neg + (2.0 * self.a).powf(p) * self.p_pos
    }

    /// One draw by inverse CDF on a single uniform, with the fixed branch
    /// order `-a`, `0`, `+2a` so the mapping from uniforms to atoms is
    /// bit-reproducible.
    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        if u < self.p_neg {
            -self.a
        } else if u < self.p_neg + self.p_zero {
            0.0
        } else {
            2.0 * self.a
        }
    }
}

/// Which law generated a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LawTag {
    /// Heavy-tailed rows `((U + sigma*xi1)/sqrt(2), xi2)`.
    HeavyTailedY,
    /// Moment-matched Gaussian rows `(sigma*g1, g2)`.
    GaussianZ,
}

impl std::fmt::Display for LawTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LawTag::HeavyTailedY => write!(f, "y"),
            LawTag::GaussianZ => write!(f, "z"),
        }
    }
}

/// A batch of R^2 draws with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: Vec<(f64, f64)>,
    law: LawTag,
    seed: u64,
}

impl SampleMatrix {
    /// Wrap explicitly given rows (used by tests and the kernel oracles).
    pub fn from_rows(rows: Vec<(f64, f64)>, law: LawTag, seed: u64) -> Self {
        Self { rows, law, seed }
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn law(&self) -> LawTag {
        self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Fill `rows` with `count` i.i.d. draws of the given law. The hot path
/// behind [`sample_y`] / [`sample_z`]; lets replication reuse buffers.
pub(crate) fn sample_into(
    params: &ConstructionParams,
    law_tag: LawTag,
    count: usize,
    seed: u64,
    rows: &mut Vec<(f64, f64)>,
) -> Result<()> {
    let sigma = params.sigma_n();
    rows.clear();
    rows.reserve(count);
    let mut rng = rng::stream(seed);
    match law_tag {
        LawTag::HeavyTailedY => {
            let law = ThreePointLaw::new(params.nu(), sigma)?;
            for _ in 0..count {
                // fixed draw order per row: uniform for U, then xi1, xi2
                let u = law.sample(&mut rng);
                let xi1: f64 = rng.sample(StandardNormal);
                let xi2: f64 = rng.sample(StandardNormal);
                rows.push(((u + sigma * xi1) / SQRT_2, xi2));
            }
        }
        LawTag::GaussianZ => {
            for _ in 0..count {
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                rows.push((sigma * g1, g2));
            }
        }
    }
    Ok(())
}

/// `count` i.i.d. heavy-tailed rows, deterministic in `seed`.
///
/// Fails when the three-point law is invalid for this configuration's
/// `sigma_n` (tail mass above one), which happens at small `n` for
/// `sigma0` near 1.
pub fn sample_y(params: &ConstructionParams, count: usize, seed: u64) -> Result<SampleMatrix> {
    let mut rows = Vec::new();
    sample_into(params, LawTag::HeavyTailedY, count, seed, &mut rows)?;
    Ok(SampleMatrix { rows, law: LawTag::HeavyTailedY, seed })
}

/// `count` i.i.d. Gaussian surrogate rows `(sigma_n * g1, g2)`,
/// deterministic in `seed`.
pub fn sample_z(params: &ConstructionParams, count: usize, seed: u64) -> Result<SampleMatrix> {
    let mut rows = Vec::new();
    sample_into(params, LawTag::GaussianZ, count, seed, &mut rows)?;
    Ok(SampleMatrix { rows, law: LawTag::GaussianZ, seed })
}

/// Draw a matrix under either law.
pub fn sample(params: &ConstructionParams, law: LawTag, count: usize, seed: u64) -> Result<SampleMatrix> {
    match law {
        LawTag::HeavyTailedY => sample_y(params, count, seed),
        LawTag::GaussianZ => sample_z(params, count, seed),
    }
}
