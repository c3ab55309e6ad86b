use ngqmle::mc::run_parallel;
use ngqmle_core::montecarlo::{normality_check, EstimatorSpec, McConfig, NormalitySummary, Standardization};
use ngqmle_core::volatility::GarchParams;

fn in_bands(s: &NormalitySummary) -> bool {
    s.mean.abs() < 0.15 && (0.8..=1.2).contains(&s.variance)
}

#[test]
fn ks_statistic_under_the_null() {
    let n = 1000;
    let passed = (0..20u64)
        .filter(|seed| {
            let z = ngqmle_core::likelihoods::InnovationDistribution::gaussian().sample(n, 100 + seed);
            normality_check(&z).ks < 1.36 / (n as f64).sqrt()
        })
        .count();
    assert!(passed >= 19, "{passed}/20");
}

/// With `a = b = 0` only the unconditional variance `σ²/(1 − σ²a − b)` is
/// identified; for Gaussian innovations its estimate has asymptotic variance
/// `σ⁴·E(ε²−1)²/T = 2σ⁴/T`.
#[test]
fn iid_unconditional_variance() {
    let theta = GarchParams::new(0.5, vec![0.0], vec![0.0]).unwrap();
    let t = 1000;
    let c = McConfig::new(theta, "gaussian".parse().unwrap(), t, 400, vec![EstimatorSpec::Gaussian], 12);
    let report = run_parallel(c, None).unwrap();
    let implied: Vec<f64> = report.estimators[0]
        .estimates
        .iter()
        .flatten()
        .map(|e| e[0] * e[0] / (1.0 - e[0] * e[0] * e[1] - e[2]))
        .collect();
    assert!(implied.len() >= 390);
    let var = ngqmle_core::stats::variance(&implied);
    let theory = 2.0 * 0.5f64.powi(4) / t as f64;
    assert!((var / theory - 1.0).abs() < 0.2, "{var:e} vs {theory:e}");
}

/// Without a fourth moment the two-step γ̂ is still asymptotically normal at
/// rate √T while the Gaussian QMLE is not.
#[test]
fn stable_innovations_normality() {
    let theta = GarchParams::new(0.5, vec![0.35], vec![0.3]).unwrap();
    let f = "t:3".parse().unwrap();
    let mut c = McConfig::new(
        theta,
        "stable:1.5".parse().unwrap(),
        7000,
        600,
        vec![EstimatorSpec::Gaussian, EstimatorSpec::TwoStep { likelihood: f }],
        1,
    );
    c.standardization = Standardization::Population;
    let report = run_parallel(c, None).unwrap();
    let (g, two) = (&report.estimators[0], &report.estimators[1]);
    for i in 1..3 {
        let s = &two.normality[i];
        assert!(in_bands(s), "two-step {}: mean {:.3} var {:.3}", two.parameter_names[i], s.mean, s.variance);
    }
    let a1 = &g.normality[1];
    assert!(!in_bands(a1), "gaussian a1: mean {:.3} var {:.3}", a1.mean, a1.variance);
}
