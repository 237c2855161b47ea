use std::ffi::CStr;
use std::ptr;

use qcw_ffi::*;

fn last_error() -> String {
    let p = qcw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn eigenprices_and_errors() {
    let mut lv = QcwPriceLevels::default();
    let s = unsafe { qcw_eigenprices(100.05, 99.95, 0.0, 0.0, &mut lv) };
    assert_eq!(s, QcwStatus::Ok);
    assert!(qcw_last_error_message().is_null());
    assert!((lv.s_ask - 100.05).abs() < 1e-12 && (lv.s_bid - 99.95).abs() < 1e-12);
    assert!((lv.delta - 0.1).abs() < 1e-12);

    let s = unsafe { qcw_eigenprices(f64::NAN, 1.0, 0.0, 0.0, &mut lv) };
    assert_eq!(s, QcwStatus::Validation);
    assert!(!last_error().is_empty());

    let s = unsafe { qcw_eigenprices(1.0, 1.0, 0.0, 0.0, ptr::null_mut()) };
    assert_eq!(s, QcwStatus::NullPointer);
}

#[test]
fn bessel_and_version() {
    assert!((qcw_bessel_i0(1.0) - 1.2660658777520084).abs() < 1e-15);
    assert!((qcw_bessel_i0e(700.0) * (2.0 * std::f64::consts::PI * 700.0).sqrt() - 1.0).abs() < 1e-3);
    let v = unsafe { CStr::from_ptr(qcw_version()) };
    assert_eq!(v.to_str().unwrap(), qcw::VERSION);
}

#[test]
fn path_handle_matches_library() {
    let mut params = qcw_model_params_default();
    params.sigma = 1e-3;
    params.xi1 = 0.05;
    params.kappa1 = 0.03;
    let mut config = qcw_sim_config_default();
    config.n_steps = 100;
    config.seed = 9;

    let mut path: *mut QcwPath = ptr::null_mut();
    assert_eq!(unsafe { qcw_simulate_path(&config, &params, &mut path) }, QcwStatus::Ok);
    assert_eq!(unsafe { qcw_path_len(path) }, 100);

    let expected = qcw::market::simulate_path(
        &qcw::SimConfig {
            n_steps: 100,
            seed: 9,
            ..qcw::SimConfig::default()
        },
        &qcw::ModelParams::from(params),
    )
    .unwrap();
    for (k, e) in expected.points.iter().enumerate() {
        let mut p = QcwPathPoint {
            t: 0,
            s_bid: 0.0,
            s_ask: 0.0,
            s_trade: 0.0,
            side: QcwSide::Bid,
            imbalance: 0.0,
        };
        assert_eq!(unsafe { qcw_path_get(path, k, &mut p) }, QcwStatus::Ok);
        assert_eq!(
            (p.t, p.s_bid, p.s_ask, p.s_trade, p.imbalance),
            (e.t, e.s_bid, e.s_ask, e.s_trade, e.imbalance)
        );
        assert_eq!(p.side == QcwSide::Ask, e.side == qcw::Side::Ask);
    }
    let mut p = QcwPathPoint {
        t: 0,
        s_bid: 0.0,
        s_ask: 0.0,
        s_trade: 0.0,
        side: QcwSide::Bid,
        imbalance: 0.0,
    };
    assert_eq!(unsafe { qcw_path_get(path, 100, &mut p) }, QcwStatus::OutOfRange);
    assert!(last_error().contains("100"));
    unsafe { qcw_path_free(path) };
    unsafe { qcw_path_free(ptr::null_mut()) };
}

#[test]
fn simulation_failures_map_to_codes() {
    let params = QcwModelParams {
        sigma: 5.0,
        ..qcw_model_params_default()
    };
    let config = QcwSimConfig {
        n_steps: 1000,
        ..qcw_sim_config_default()
    };
    let mut path: *mut QcwPath = ptr::null_mut();
    assert_eq!(
        unsafe { qcw_simulate_path(&config, &params, &mut path) },
        QcwStatus::Numeric
    );
    assert!(path.is_null());

    let config = QcwSimConfig {
        n_steps: 0,
        ..qcw_sim_config_default()
    };
    assert_eq!(
        unsafe { qcw_simulate_path(&config, &qcw_model_params_default(), &mut path) },
        QcwStatus::Validation
    );
    assert!(last_error().contains("n_steps"));
}

#[test]
fn spread_law_and_fit() {
    let mut law: *mut QcwSpreadLaw = ptr::null_mut();
    assert_eq!(unsafe { qcw_spread_law_new(0.1, 0.05, &mut law) }, QcwStatus::Ok);
    let direct = qcw::SpreadLaw::new(0.1, 0.05).unwrap();
    assert_eq!(unsafe { qcw_spread_law_pdf(law, 0.07) }, direct.pdf(0.07));
    let c = unsafe { qcw_spread_law_cdf(law, 10.0) };
    assert!((c - 1.0).abs() < 1e-8);
    unsafe { qcw_spread_law_free(law) };
    assert!(unsafe { qcw_spread_law_pdf(ptr::null(), 0.1) }.is_nan());
    assert_eq!(
        unsafe { qcw_spread_law_new(-1.0, 0.05, &mut law) },
        QcwStatus::Validation
    );

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let samples = qcw::statistics::sample_spread(&direct, &mut rng, 20_000);
    let mut fit = QcwFitResult::default();
    assert_eq!(
        unsafe { qcw_fit_spreads(samples.as_ptr(), samples.len(), &mut fit) },
        QcwStatus::Ok
    );
    assert!((fit.xi1_hat / 0.1 - 1.0).abs() < 0.05);
    assert!((fit.kappa1_hat / 0.05 - 1.0).abs() < 0.05);
    assert_eq!(fit.n, 20_000);

    assert_eq!(
        unsafe { qcw_fit_spreads(samples.as_ptr(), 10, &mut fit) },
        QcwStatus::Validation
    );
}

#[test]
fn errors_are_per_thread() {
    let mut lv = QcwPriceLevels::default();
    assert_eq!(
        unsafe { qcw_eigenprices(f64::INFINITY, 1.0, 0.0, 0.0, &mut lv) },
        QcwStatus::Validation
    );
    std::thread::spawn(|| assert!(qcw_last_error_message().is_null()))
        .join()
        .unwrap();
    assert!(!qcw_last_error_message().is_null());
}
