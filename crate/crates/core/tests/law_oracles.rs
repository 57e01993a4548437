//! Cross-module Monte Carlo oracles: variance identities of the Gaussian
//! surrogate statistics, the exact-in-distribution reference-law check,
//! and the sandwich inequality on paired simulations.

use uvlab_core::analysis::sandwich_check;
use uvlab_core::montecarlo::{dkw_radius, kolmogorov_distance, replicate, replicate_multi, EmpiricalCdf};
use uvlab_core::statistics::eval_remainder;
use uvlab_core::{ConstructionParams, LawTag, ReferenceCdf, StatisticKind};

#[test]
fn remainder_of_a_large_gaussian_sample_is_one() {
    // E[R_n(Z)] = 1; a single sample of size 10^6 is within 1%
    let params = ConstructionParams::new(3.0, 1.0, 1_000_000).unwrap();
    let z = uvlab_core::construction::sample_z(&params, 1_000_000, 8).unwrap();
    let r = eval_remainder(&z).value;
    assert!((r - 1.0).abs() < 0.01, "R_n = {r}");
}

#[test]
fn gaussian_variance_identities_smoke() {
    // Var[R_n(Z)] = 2/n and Var[pstar(Z)] = sigma_n^2 + 2; the acceptance
    // battery runs these at R = 10^6, n = 2^10
    let n = 256;
    let r = 100_000;
    let params = ConstructionParams::new(3.0, 1.0, n).unwrap();
    let sigma = params.sigma_n();
    let ecdfs = replicate_multi(
        &params,
        &[StatisticKind::Remainder, StatisticKind::PStar],
        LawTag::GaussianZ,
        r,
        13,
    )
    .unwrap();
    let var_r = ecdfs[0].variance();
    let var_p = ecdfs[1].variance();
    assert!(
        (var_r - 2.0 / n as f64).abs() <= 0.05 * (2.0 / n as f64),
        "Var[R_n] = {var_r}, want ~{}",
        2.0 / n as f64
    );
    let want = sigma * sigma + 2.0;
    assert!((var_p - want).abs() <= 0.05 * want, "Var[pstar] = {var_p}, want ~{want}");
}

#[test]
fn gaussian_v_statistic_has_the_reference_law_exactly() {
    // n v_n(Z) is distributed exactly as sigma_n xi + chi2_1, so the
    // Kolmogorov distance is statistically zero
    let params = ConstructionParams::new(3.0, 1.0, 256).unwrap();
    let r = 100_000;
    let ecdf = replicate(&params, StatisticKind::ScaledV, LawTag::GaussianZ, r, 21).unwrap();
    let reference = ReferenceCdf::new(params.sigma_n(), false).unwrap();
    let d = kolmogorov_distance(&ecdf, &reference, 0.01).unwrap();
    assert!(
        d.d_hat <= d.dkw_radius,
        "exact identity violated: d_hat = {} > dkw = {}",
        d.d_hat,
        d.dkw_radius
    );
}

#[test]
fn ecdf_drawn_from_the_reference_matches_it() {
    // self-consistency: draw sigma*xi + eta^2 directly and compare
    use rand::Rng;
    use rand_distr::StandardNormal;
    let sigma = 0.25;
    let r = 100_000;
    let mut rng = uvlab_core::rng::stream(5150);
    let values: Vec<f64> = (0..r)
        .map(|_| {
            let xi: f64 = rng.sample(StandardNormal);
            let eta: f64 = rng.sample(StandardNormal);
            sigma * xi + eta * eta
        })
        .collect();
    let ecdf =
        EmpiricalCdf::from_values(values, StatisticKind::ScaledV, LawTag::GaussianZ, 2, 5150)
            .unwrap();
    let reference = ReferenceCdf::new(sigma, false).unwrap();
    let d = kolmogorov_distance(&ecdf, &reference, 0.01).unwrap();
    assert!(d.d_hat <= d.dkw_radius, "d_hat = {} > dkw = {}", d.d_hat, d.dkw_radius);
}

#[test]
fn sandwich_holds_on_paired_decomposition_simulations() {
    // X' = pstar(Y) - 1, Y' = -(R_n - 1), X' + Y' = scaled U-statistic;
    // the tail probability bound comes from Markov: Var[R_n]/eps^2
    let n = 256;
    let r = 100_000;
    let params = ConstructionParams::new(3.0, 1.0, n).unwrap();
    let ecdfs = replicate_multi(
        &params,
        &[StatisticKind::ScaledU, StatisticKind::PStar],
        LawTag::HeavyTailedY,
        r,
        31,
    )
    .unwrap();
    let ecdf_xy = ecdfs[0].clone();
    let shifted: Vec<f64> = ecdfs[1].values().iter().map(|v| v - 1.0).collect();
    let ecdf_x =
        EmpiricalCdf::from_values(shifted, StatisticKind::PStar, LawTag::HeavyTailedY, n, 31)
            .unwrap();
    let eps = 0.5;
    let tail = (2.0 / n as f64) / (eps * eps);
    for (a, b) in [(-1.0, 1.0), (0.0, 2.0), (-0.5, 0.5), (1.0, 4.0), (-2.0, 6.0)] {
        let (upper, lower) = sandwich_check(&ecdf_xy, &ecdf_x, a, b, eps, tail, 0.01).unwrap();
        assert!(upper && lower, "sandwich failed on [{a}, {b}]");
    }
}

#[test]
fn dkw_radius_shrinks_at_root_r() {
    let r1 = dkw_radius(1_000, 0.01);
    let r2 = dkw_radius(4_000, 0.01);
    assert!((r1 / r2 - 2.0).abs() < 1e-12);
}
