//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use uvlab_core::analysis::{self, theorem1_pipeline, DistanceRow, PipelineOptions, RatePoint};
use uvlab_core::montecarlo::{self, ReplicateOptions};
use uvlab_core::rng::replicate_seed;
use uvlab_core::{construction, Error, LawTag, ReferenceCdf, StatisticKind};

use crate::config::ExperimentConfig;
use crate::output::{fmt17, fmt_shortest, Json};
use crate::CliError;

/// Write a CSV of `count` sample rows under the given law.
///
/// The scale `sigma_n` is the one a sample of this size carries, i.e.
/// the drawn matrix is distributed exactly like one experiment sample of
/// size `count`.
pub fn cmd_sample(
    config: &ExperimentConfig,
    count: usize,
    law: LawTag,
    out: &Path,
    seed: u64,
) -> Result<(), CliError> {
    let params = config.params_at(count)?;
    let matrix = construction::sample(&params, law, count, seed)?;
    let mut text = String::from("y1,y2\n");
    for &(y1, y2) in matrix.rows() {
        text.push_str(&fmt17(y1));
        text.push(',');
        text.push_str(&fmt17(y2));
        text.push('\n');
    }
    write_file(out, text.as_bytes())?;
    Ok(())
}

fn reference_for(kind: StatisticKind, sigma_n: f64, config: &ExperimentConfig) -> Result<ReferenceCdf, Error> {
    let centered = match kind {
        StatisticKind::ScaledV | StatisticKind::PStar => false,
        StatisticKind::ScaledU => true,
        StatisticKind::Remainder => {
            return Err(Error::InvalidParameter(
                "the remainder statistic has no reference law to measure against".into(),
            ))
        }
    };
    ReferenceCdf::new(sigma_n, centered)?
        .with_abs_tol(config.quad_tol)?
        .with_base_nodes(config.quad_base_nodes)?
        .with_max_nodes(config.max_quad_nodes)
}

const DISTANCE_HEADER: &str = "n,sigma_n,d_hat,dkw_radius,R,seed\n";

fn distance_csv_row(row_n: usize, sigma_n: f64, d: &montecarlo::DistanceEstimate) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        row_n,
        fmt_shortest(sigma_n),
        fmt_shortest(d.d_hat),
        fmt_shortest(d.dkw_radius),
        d.r,
        d.seed
    )
}

/// Estimate the Kolmogorov distance of one statistic to its reference law
/// at every `n` in the grid; write the distance CSV.
pub fn cmd_distance(
    config: &ExperimentConfig,
    kind: StatisticKind,
    law: LawTag,
    out: &Path,
    master_seed: u64,
) -> Result<(), CliError> {
    let mut csv = String::from(DISTANCE_HEADER);
    let mut first_error: Option<Error> = None;
    for (idx, &n) in config.n_grid.iter().enumerate() {
        let seed = replicate_seed(master_seed, idx as u64);
        let outcome = (|| -> Result<String, Error> {
            let params = config.params_at(n)?;
            let sigma_n = params.sigma_n();
            let reference = reference_for(kind, sigma_n, config)?;
            let ecdf = montecarlo::replicate(&params, kind, law, config.replicates, seed)?;
            let d = montecarlo::kolmogorov_distance(&ecdf, &reference, config.confidence_delta)?;
            Ok(distance_csv_row(n, sigma_n, &d))
        })();
        match outcome {
            Ok(row) => csv.push_str(&row),
            Err(e) => {
                eprintln!("distance: n = {n}: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    write_file(out, csv.as_bytes())?;
    match first_error {
        None => Ok(()),
        Some(e) => Err(CliError::Core(e)),
    }
}

fn fit_json(fit: &Result<analysis::RateFit, String>) -> Json {
    match fit {
        Ok(f) => Json::Obj(vec![
            ("exponent".into(), Json::F64(f.exponent)),
            ("intercept".into(), Json::F64(f.intercept)),
            ("r_squared".into(), Json::F64(f.r_squared)),
            ("points_used".into(), Json::U64(f.points.len() as u64)),
        ]),
        Err(msg) => Json::Obj(vec![("error".into(), Json::s(msg.clone()))]),
    }
}

fn rows_csv(rows: &[DistanceRow]) -> String {
    let mut csv = String::from(DISTANCE_HEADER);
    for row in rows {
        if let Ok(out) = &row.outcome {
            csv.push_str(&distance_csv_row(row.n, row.sigma_n, &out.estimate));
        }
    }
    csv
}

fn row_statuses(rows: &[DistanceRow]) -> Json {
    Json::Arr(
        rows.iter()
            .map(|row| {
                let status = match &row.outcome {
                    Ok(_) => Json::s("ok"),
                    Err(e) => Json::s(e.clone()),
                };
                Json::Obj(vec![
                    ("n".into(), Json::U64(row.n as u64)),
                    ("status".into(), status),
                ])
            })
            .collect(),
    )
}

fn flagged_ns(rows: &[DistanceRow]) -> Json {
    Json::Arr(
        rows.iter()
            .filter(|row| matches!(&row.outcome, Ok(o) if o.flagged_noise_floor))
            .map(|row| Json::U64(row.n as u64))
            .collect(),
    )
}

/// Run the full rate experiment; write `<out>.v.csv`, `<out>.u.csv` and a
/// `<out>.json` summary.
///
/// `synthetic_dhat_exponent` is a test hook: when set, every measured
/// `d_hat` is replaced by `n^exponent` before fitting, so the fitted
/// exponent must reproduce the injected one exactly.
pub fn cmd_rate(
    config: &ExperimentConfig,
    out_base: &Path,
    master_seed: u64,
    synthetic_dhat_exponent: Option<f64>,
) -> Result<(), CliError> {
    let params = config.params_at(config.n_grid[0])?;
    let opts = PipelineOptions {
        law: LawTag::HeavyTailedY,
        confidence_delta: config.confidence_delta,
        quad_tol: config.quad_tol,
        quad_base_nodes: config.quad_base_nodes,
        quad_max_nodes: config.max_quad_nodes,
        noise_floor_factor: 2.0,
        replicate: ReplicateOptions::default(),
    };
    let mut report =
        theorem1_pipeline(&params, &config.n_grid, config.replicates, master_seed, &opts)?;

    if let Some(exponent) = synthetic_dhat_exponent {
        for rows in [&mut report.v_rows, &mut report.u_rows] {
            for row in rows.iter_mut() {
                if let Ok(outcome) = &mut row.outcome {
                    outcome.estimate.d_hat = (row.n as f64).powf(exponent);
                    outcome.flagged_noise_floor = false;
                }
            }
        }
        let refit = |rows: &[DistanceRow]| {
            let points: Vec<RatePoint> = rows
                .iter()
                .filter_map(|row| match &row.outcome {
                    Ok(o) => Some(RatePoint {
                        n: row.n,
                        d_hat: o.estimate.d_hat,
                        dkw_radius: o.estimate.dkw_radius,
                    }),
                    Err(_) => None,
                })
                .collect();
            analysis::fit_rate(&points).map_err(|e| e.to_string())
        };
        report.v_fit = refit(&report.v_rows);
        report.u_fit = refit(&report.u_rows);
    }

    let v_csv_path = with_suffix(out_base, ".v.csv");
    let u_csv_path = with_suffix(out_base, ".u.csv");
    let json_path = with_suffix(out_base, ".json");
    write_file(&v_csv_path, rows_csv(&report.v_rows).as_bytes())?;
    write_file(&u_csv_path, rows_csv(&report.u_rows).as_bytes())?;

    let summary = Json::Obj(vec![
        ("nu".into(), Json::F64(report.nu)),
        ("sigma0".into(), Json::F64(report.sigma0)),
        ("n_grid".into(), Json::Arr(config.n_grid.iter().map(|&n| Json::U64(n as u64)).collect())),
        ("replicates".into(), Json::U64(report.replicates as u64)),
        ("master_seed".into(), Json::U64(report.master_seed)),
        ("confidence_delta".into(), Json::F64(report.confidence_delta)),
        ("law".into(), Json::s(report.law.to_string())),
        ("theoretical_exponent".into(), Json::F64(report.theoretical_exponent)),
        ("v_fit".into(), fit_json(&report.v_fit)),
        ("u_fit".into(), fit_json(&report.u_fit)),
        ("flagged_noise_floor_v".into(), flagged_ns(&report.v_rows)),
        ("flagged_noise_floor_u".into(), flagged_ns(&report.u_rows)),
        ("v_rows".into(), row_statuses(&report.v_rows)),
        ("u_rows".into(), row_statuses(&report.u_rows)),
        ("v_csv".into(), Json::s(v_csv_path.display().to_string())),
        ("u_csv".into(), Json::s(u_csv_path.display().to_string())),
    ]);
    let mut text = summary.render();
    text.push('\n');
    write_file(&json_path, text.as_bytes())?;
    Ok(())
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

/// Run the invariant battery; prints one line per check.
///
/// `inject_kernel_sign_flip` corrupts the verification oracle's kernel
/// (sign of the quadratic term) to demonstrate that the identity checks
/// catch a broken kernel.
pub fn cmd_verify(
    config: &ExperimentConfig,
    master_seed: u64,
    inject_kernel_sign_flip: bool,
) -> Result<bool, CliError> {
    let mut checks: Vec<Check> = Vec::new();

    // 1-2: decomposition identities against a local kernel-sum oracle
    let quad_sign = if inject_kernel_sign_flip { -1.0 } else { 1.0 };
    let mut worst_v = 0.0f64;
    let mut worst_u = 0.0f64;
    let mut rng = uvlab_core::rng::stream(replicate_seed(master_seed, 0));
    for &n in &[2usize, 3, 17, 64] {
        for _ in 0..12 {
            use rand::Rng;
            let rows: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0))
                .collect();
            let matrix =
                uvlab_core::SampleMatrix::from_rows(rows.clone(), LawTag::GaussianZ, 0);
            let p = uvlab_core::statistics::eval_pstar(&matrix).value;
            let rem = uvlab_core::statistics::eval_remainder(&matrix).value;

            // independent oracle: explicit double sums with its own kernel
            let rn = (n as f64).sqrt();
            let mut v_sum = 0.0;
            let mut u_sum = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (rows[i], rows[j]);
                    v_sum += a.0 / (2.0 * rn) + b.0 / (2.0 * rn) + quad_sign * (a.1 * b.1);
                    if i != j {
                        let rm = ((n - 1) as f64).sqrt();
                        u_sum += a.0 / (2.0 * rm)
                            + b.0 / (2.0 * rm)
                            + quad_sign * (rm / rn) * (a.1 * b.1);
                    }
                }
            }
            let v_oracle = v_sum / n as f64;
            let u_oracle = u_sum / ((n * (n - 1)) as f64).sqrt();
            worst_v = worst_v.max((p - v_oracle).abs() / (1.0 + p.abs()));
            worst_u = worst_u.max((p - (u_oracle + rem)).abs() / (1.0 + p.abs()));
        }
    }
    checks.push(Check {
        name: "identity p*_n = n*v_n (kernel sum)",
        passed: worst_v <= 1e-9,
        detail: format!("max relative gap {worst_v:.3e}"),
    });
    checks.push(Check {
        name: "identity p*_n = sqrt(n(n-1))*u_n + R_n",
        passed: worst_u <= 1e-9,
        detail: format!("max relative gap {worst_u:.3e}"),
    });

    // 3: three-point law moments, sigma-independent nu-th moment
    let mut worst_moment = 0.0f64;
    for nu in [2.25, 2.5, 3.0] {
        let expected = 6f64.powf(-nu / 2.0) * (2.0 + 2f64.powf(nu));
        for sigma in [0.05, 0.1, 0.25] {
            let law = uvlab_core::ThreePointLaw::new(nu, sigma)?;
            worst_moment = worst_moment
                .max(law.mean().abs() / (sigma * sigma))
                .max((law.variance() - sigma * sigma).abs() / (sigma * sigma))
                .max((law.abs_moment(nu) - expected).abs() / expected);
        }
    }
    checks.push(Check {
        name: "three-point law moment identities",
        passed: worst_moment <= 1e-12,
        detail: format!("max relative deviation {worst_moment:.3e}"),
    });

    // 4: proof-integral bounds
    let tau_grid: Vec<f64> = (0..=400).map(|k| -100.0 + 0.5 * k as f64).collect();
    let (max_i1, max_i2) = uvlab_core::refdist::verify_i1_i2(&tau_grid)?;
    let i2_zero = uvlab_core::refdist::eval_i2(0.0)?;
    let i1_bound = 2.0 + 4.0 * std::f64::consts::PI.sqrt();
    let i2_bound = 8.0 / 3.0;
    checks.push(Check {
        name: "tail integral bounds I1 <= 2+4*sqrt(pi), I2 <= 8/3",
        passed: max_i1 <= i1_bound && max_i2 <= i2_bound && (i2_zero - 2.0 / 7.0).abs() <= 1e-6,
        detail: format!(
            "max I1 = {max_i1:.4} (bound {i1_bound:.4}), max I2 = {max_i2:.4} (bound {i2_bound:.4}), I2(0) = {i2_zero:.8}"
        ),
    });

    // 5: exact Gaussian reference law for the scaled V-statistic
    let n0 = config.n_grid[0];
    let params = config.params_at(n0)?;
    let sigma_n = params.sigma_n();
    let reference = reference_for(StatisticKind::ScaledV, sigma_n, config)?;
    let ecdf = montecarlo::replicate(
        &params,
        StatisticKind::ScaledV,
        LawTag::GaussianZ,
        config.replicates,
        replicate_seed(master_seed, 1),
    )?;
    let d = montecarlo::kolmogorov_distance(&ecdf, &reference, config.confidence_delta)?;
    checks.push(Check {
        name: "gaussian V-statistic matches sigma*xi + chi2_1 exactly",
        passed: d.d_hat <= d.dkw_radius,
        detail: format!("d_hat = {:.5e} vs dkw radius {:.5e} (n = {n0}, R = {})", d.d_hat, d.dkw_radius, d.r),
    });

    // 6: reference CDF structure: shift identity, monotonicity, limits
    let centered = ReferenceCdf::new(sigma_n, true)?
        .with_abs_tol(config.quad_tol)?
        .with_base_nodes(config.quad_base_nodes)?
        .with_max_nodes(config.max_quad_nodes)?;
    let mut worst_shift = 0.0f64;
    for k in 0..=40 {
        let t = -2.0 + 0.2 * k as f64;
        worst_shift = worst_shift.max((centered.eval(t)? - reference.eval(t + 1.0)?).abs());
    }
    let mut monotone = true;
    let mut last = -1.0f64;
    for k in 0..=2000 {
        let t = -10.0 + 40.0 * k as f64 / 2000.0;
        let v = reference.eval(t)?;
        if v < last - 1e-12 * (1.0 + last.abs()) {
            monotone = false;
        }
        last = v;
    }
    let limits_ok = reference.eval(-50.0)? < 1e-9 && (reference.eval(50.0)? - 1.0).abs() < 1e-9;
    checks.push(Check {
        name: "reference CDF shift identity, monotonicity, limits",
        passed: worst_shift <= 1e-12 && monotone && limits_ok,
        detail: format!("max shift gap {worst_shift:.3e}, monotone = {monotone}, limits ok = {limits_ok}"),
    });

    // 7: normal CDF sanity
    let phi_ok = uvlab_core::refdist::normal_cdf(0.0) == 0.5
        && (uvlab_core::refdist::normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-13
        && (uvlab_core::refdist::normal_cdf(-3.0) + uvlab_core::refdist::normal_cdf(3.0) - 1.0)
            .abs()
            < 1e-13;
    checks.push(Check {
        name: "normal CDF reference points",
        passed: phi_ok,
        detail: String::from("Phi(0), Phi(1), symmetry at 3"),
    });

    let mut all = true;
    let mut stdout = std::io::stdout().lock();
    for check in &checks {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(stdout, "{verdict} {} — {}", check.name, check.detail);
        all &= check.passed;
    }
    Ok(all)
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(CliError::Io)?;
        }
    }
    std::fs::write(path, bytes).map_err(CliError::Io)
}
