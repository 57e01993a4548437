//! Kernels and statistics over a sample matrix.
//!
//! The central object is the degree-two polynomial
//! `pstar = n^(-1/2) sum_i y_i1 + (n^(-1/2) sum_i y_i2)^2`,
//! which can be rewritten exactly as a scaled V-statistic of the kernel
//! `kernel_v`, and decomposed as a scaled U-statistic of `kernel_u` plus
//! the diagonal remainder `R_n = n^(-1) sum_i y_i2^2`:
//!
//! ```text
//! pstar = n * v_n = sqrt(n(n-1)) * u_n + R_n
//! ```
//!
//! Every statistic has an O(n) `Reduced` evaluation and an O(n^2)
//! `KernelSum` evaluation that sums the kernel over index pairs. The
//! kernel-sum path exists as an independent oracle for the identities
//! above; it is capped in size to keep its quadratic cost bounded.

use crate::construction::SampleMatrix;
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Which statistic a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticKind {
    /// `pstar`.
    PStar,
    /// `n * v_n`.
    ScaledV,
    /// `sqrt(n(n-1)) * u_n`.
    ScaledU,
    /// `R_n`, the mean of squared second coordinates.
    Remainder,
}

impl std::fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StatisticKind::PStar => write!(f, "pstar"),
            StatisticKind::ScaledV => write!(f, "v"),
            StatisticKind::ScaledU => write!(f, "u"),
            StatisticKind::Remainder => write!(f, "remainder"),
        }
    }
}

/// A statistic evaluated on one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    pub kind: StatisticKind,
    pub value: f64,
    pub n: usize,
}

/// Evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    /// Explicit double sum over index pairs, O(n^2).
    KernelSum,
    /// Closed-form O(n) evaluation.
    Reduced,
}

/// Largest sample size the kernel-sum oracle accepts by default.
pub const DEFAULT_KERNEL_SUM_CAP: usize = 4096;

/// V-statistic kernel
/// `k_v((a1,a2),(b1,b2)) = a1/(2 sqrt n) + b1/(2 sqrt n) + a2 b2`.
///
/// Symmetric in its two arguments. `n` is the sample size the kernel is
/// built for (it enters the linear part's normalisation).
#[inline]
pub fn kernel_v(a: (f64, f64), b: (f64, f64), n: usize) -> f64 {
    debug_assert!(n >= 1);
    let s = 2.0 * (n as f64).sqrt();
    a.0 / s + b.0 / s + a.1 * b.1
}

/// U-statistic kernel
/// `k_u((a1,a2),(b1,b2)) = a1/(2 sqrt(n-1)) + b1/(2 sqrt(n-1)) + sqrt(n-1)/sqrt(n) a2 b2`.
///
/// Requires `n >= 2`.
#[inline]
pub fn kernel_u(a: (f64, f64), b: (f64, f64), n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("kernel_u requires n >= 2, got n = {n}")));
    }
    let nm1 = (n - 1) as f64;
    let s = 2.0 * nm1.sqrt();
    // scale the product, not the factors, so symmetry is bit-exact
    Ok(a.0 / s + b.0 / s + (nm1.sqrt() / (n as f64).sqrt()) * (a.1 * b.1))
}

/// Streaming sums that every reduced statistic is assembled from.
#[derive(Debug, Clone, Copy, Default)]
pub struct RowSums {
    pub sum_y1: f64,
    pub sum_y2: f64,
    pub sum_y2_sq: f64,
    pub n: usize,
}

impl RowSums {
    /// Accumulate the three row sums in ascending index order.
    pub fn from_rows(rows: &[(f64, f64)]) -> Self {
        let mut s1 = NeumaierSum::new();
        let mut s2 = NeumaierSum::new();
        let mut s2q = NeumaierSum::new();
        for &(y1, y2) in rows {
            s1.add(y1);
            s2.add(y2);
            s2q.add(y2 * y2);
        }
        Self {
            sum_y1: s1.value(),
            sum_y2: s2.value(),
            sum_y2_sq: s2q.value(),
            n: rows.len(),
        }
    }

    /// `pstar` from the accumulated sums.
    pub fn pstar(&self) -> f64 {
        let rn = (self.n as f64).sqrt();
        let lin = self.sum_y1 / rn;
        let quad = self.sum_y2 / rn;
        lin + quad * quad
    }

    /// `R_n` from the accumulated sums.
    pub fn remainder(&self) -> f64 {
        self.sum_y2_sq / self.n as f64
    }

    /// `sqrt(n(n-1)) u_n = pstar - R_n`.
    pub fn u_scaled(&self) -> f64 {
        self.pstar() - self.remainder()
    }
}

/// `pstar(sample)` in O(n).
pub fn eval_pstar(sample: &SampleMatrix) -> StatisticValue {
    StatisticValue {
        kind: StatisticKind::PStar,
        value: RowSums::from_rows(sample.rows()).pstar(),
        n: sample.n(),
    }
}

/// `R_n(sample)` in O(n).
pub fn eval_remainder(sample: &SampleMatrix) -> StatisticValue {
    StatisticValue {
        kind: StatisticKind::Remainder,
        value: RowSums::from_rows(sample.rows()).remainder(),
        n: sample.n(),
    }
}

/// `n * v_n(sample)`.
///
/// `KernelSum` computes `n^(-1) sum_{i,j} k_v(y_i, y_j)` over all ordered
/// pairs including the diagonal; `Reduced` uses the algebraic identity
/// `n v_n = pstar`. A single row is allowed (the V-statistic keeps its
/// diagonal term).
pub fn eval_v_scaled(sample: &SampleMatrix, path: EvalPath) -> Result<StatisticValue> {
    eval_v_scaled_capped(sample, path, DEFAULT_KERNEL_SUM_CAP)
}

/// As [`eval_v_scaled`] with an explicit kernel-sum size cap.
pub fn eval_v_scaled_capped(
    sample: &SampleMatrix,
    path: EvalPath,
    kernel_sum_cap: usize,
) -> Result<StatisticValue> {
    let n = sample.n();
    if n == 0 {
        return Err(Error::invalid("v-statistic needs at least one row"));
    }
    let value = match path {
        EvalPath::Reduced => RowSums::from_rows(sample.rows()).pstar(),
        EvalPath::KernelSum => {
            check_kernel_cap(n, kernel_sum_cap)?;
            let rows = sample.rows();
            let mut acc = NeumaierSum::new();
            for i in 0..n {
                for j in 0..n {
                    acc.add(kernel_v(rows[i], rows[j], n));
                }
            }
            acc.value() / n as f64
        }
    };
    Ok(StatisticValue { kind: StatisticKind::ScaledV, value, n })
}

/// `sqrt(n(n-1)) * u_n(sample)`, `n >= 2`.
///
/// `KernelSum` computes `(n(n-1))^(-1/2) sum_{i != j} k_u(y_i, y_j)`;
/// `Reduced` uses `sqrt(n(n-1)) u_n = pstar - R_n`.
pub fn eval_u_scaled(sample: &SampleMatrix, path: EvalPath) -> Result<StatisticValue> {
    eval_u_scaled_capped(sample, path, DEFAULT_KERNEL_SUM_CAP)
}

/// As [`eval_u_scaled`] with an explicit kernel-sum size cap.
pub fn eval_u_scaled_capped(
    sample: &SampleMatrix,
    path: EvalPath,
    kernel_sum_cap: usize,
) -> Result<StatisticValue> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::invalid(format!("u-statistic requires n >= 2, got n = {n}")));
    }
    let value = match path {
        EvalPath::Reduced => RowSums::from_rows(sample.rows()).u_scaled(),
        EvalPath::KernelSum => {
            check_kernel_cap(n, kernel_sum_cap)?;
            let rows = sample.rows();
            let mut acc = NeumaierSum::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        acc.add(kernel_u(rows[i], rows[j], n)?);
                    }
                }
            }
            acc.value() / ((n as f64) * ((n - 1) as f64)).sqrt()
        }
    };
    Ok(StatisticValue { kind: StatisticKind::ScaledU, value, n })
}

/// Evaluate any statistic through its O(n) reduced path.
pub fn eval_reduced(sample: &SampleMatrix, kind: StatisticKind) -> Result<StatisticValue> {
    let sums = RowSums::from_rows(sample.rows());
    let n = sample.n();
    let value = match kind {
        StatisticKind::PStar => sums.pstar(),
        StatisticKind::ScaledV => sums.pstar(),
        StatisticKind::Remainder => sums.remainder(),
        StatisticKind::ScaledU => {
            if n < 2 {
                return Err(Error::invalid("u-statistic requires n >= 2"));
            }
            sums.u_scaled()
        }
    };
    Ok(StatisticValue { kind, value, n })
}

fn check_kernel_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::BudgetExceeded(format!(
            "kernel-sum path called with n = {n}, above the configured cap {cap}"
        )));
    }
    Ok(())
}
