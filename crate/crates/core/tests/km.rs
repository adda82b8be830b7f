use bdspectral::km::{
    closed_form_transition, current_row, integrate_piece, probability_current, transition_probability,
    transition_row, CurrentMethod, QuadratureConfig,
};
use bdspectral::model::{build_model, FamilyKind, Side};
use bdspectral::oracle::{oracle_row, OracleConfig};
use bdspectral::spectral::spectral_measure_halfline;
use bdspectral::specialfns::bessel_i;
use bdspectral::{CatalogModel, Domain, Error, TransitionMethod};

fn figure_models() -> Vec<CatalogModel> {
    FamilyKind::ALL
        .into_iter()
        .flat_map(|k| k.figure_params().iter().map(move |p| build_model(k, p).unwrap()))
        .collect()
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn quadrature_matches_oracle() {
    let oc = OracleConfig { tol: 1e-9, ..OracleConfig::default() };
    for model in figure_models() {
        let (lo, hi) = if model.domain() == Domain::HalfLine { (0, 5) } else { (-5, 5) };
        let mut worst = 0.0f64;
        for t in [0.5, 1.0, 3.0] {
            for i in lo..=hi {
                let km = transition_row(&model, i, t, lo, hi, &cfg()).unwrap();
                let or = oracle_row(&model, i, t, lo, hi, &oc).unwrap();
                for (a, b) in km.iter().zip(&or) {
                    worst = worst.max((a.value - b.value).abs());
                }
            }
        }
        assert!(worst <= 1e-6, "{:?}: {worst:e}", model.family());
        eprintln!("{:?}: {worst:e}", model.family());
    }
}

#[test]
fn closed_forms_match_quadrature() {
    for p in [[1.0, 1.0], [1.0, 2.0], [2.0, 1.0]] {
        for kind in [FamilyKind::ConstantBilateral, FamilyKind::Mm1Absorbing] {
            let model = build_model(kind, &p).unwrap();
            let lo = if kind == FamilyKind::Mm1Absorbing { 0 } else { -6 };
            for t in [0.5, 1.0, 3.0, 9.0] {
                for i in lo..=6 {
                    let row = transition_row(&model, i, t, lo, 6, &cfg()).unwrap();
                    for (j, r) in (lo..=6).zip(&row) {
                        let c = closed_form_transition(&model, i, j, t).unwrap();
                        assert_eq!(c.method, TransitionMethod::ClosedFormBessel);
                        assert!((r.value - c.value).abs() <= 1e-8, "{kind} {p:?} t={t} {i}->{j}");
                    }
                }
            }
        }
    }
}

#[test]
fn spot_values() {
    let m = build_model(FamilyKind::ConstantBilateral, &[1.0, 1.0]).unwrap();
    let expected = (-2.0f64).exp() * bessel_i(0, 2.0);
    let p = transition_probability(&m, 0, 0, 1.0, &cfg()).unwrap();
    assert!((p.value - expected).abs() < 1e-10);
    assert!((p.value - 0.308508).abs() < 1e-6);
    let c = closed_form_transition(&m, 2, 5, 1.0).unwrap();
    assert!((c.value - (-2.0f64).exp() * bessel_i(3, 2.0)).abs() < 1e-15);

    let mm1 = build_model(FamilyKind::Mm1Absorbing, &[1.0, 1.0]).unwrap();
    let c = closed_form_transition(&mm1, 0, 1, 2.0).unwrap();
    let expected = (-4.0f64).exp() * (bessel_i(-1, 4.0) - bessel_i(3, 4.0));
    assert!((c.value - expected).abs() < 1e-14);
    let q = transition_probability(&mm1, 0, 1, 2.0, &cfg()).unwrap();
    assert!((q.value - expected).abs() < 1e-8);
    let start = closed_form_transition(&build_model(FamilyKind::Mm1Absorbing, &[3.0, 0.5]).unwrap(), 0, 0, 0.0).unwrap();
    assert_eq!(start.value, 1.0);
}

#[test]
fn no_closed_form_elsewhere() {
    let m = build_model(FamilyKind::SymmetricBilateral, &[1.0, 2.0]).unwrap();
    assert!(matches!(closed_form_transition(&m, 0, 0, 1.0), Err(Error::NoClosedForm(_))));
}

#[test]
fn rows_are_stochastic_or_substochastic() {
    let c = build_model(FamilyKind::ConstantBilateral, &[1.0, 1.0]).unwrap();
    let s: f64 = transition_row(&c, 0, 1.0, -8, 8, &cfg()).unwrap().iter().map(|r| r.value).sum();
    assert!((s - 1.0).abs() < 1e-6);
    let mm1 = build_model(FamilyKind::Mm1Absorbing, &[1.0, 2.0]).unwrap();
    let row = transition_row(&mm1, 0, 3.0, 0, 30, &cfg()).unwrap();
    let s: f64 = row.iter().map(|r| r.value).sum();
    assert!(s < 1.0 && s > 0.0);
    assert!(row.iter().all(|r| r.value >= -1e-8));
}

#[test]
fn row_matches_single_entries() {
    let m = build_model(FamilyKind::DefectCase1, &[1.0, 2.0, 5.0, 1.0]).unwrap();
    let row = transition_row(&m, 1, 0.7, -3, 3, &cfg()).unwrap();
    for (j, r) in (-3..=3).zip(&row) {
        let single = transition_probability(&m, 1, j, 0.7, &cfg()).unwrap();
        assert_eq!(single.value, r.value);
    }
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let m = build_model(FamilyKind::SplitQueues, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    let a = transition_row(&m, 0, 1.0, -4, 4, &cfg()).unwrap();
    let b = transition_row(&m, 0, 1.0, -4, 4, &cfg().sequential()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn identity_at_time_zero() {
    for model in figure_models() {
        let lo = if model.domain() == Domain::HalfLine { 0 } else { -8 };
        for i in lo..=8 {
            let row = transition_row(&model, i, 0.0, lo, 8, &cfg()).unwrap();
            for (j, r) in (lo..=8).zip(&row) {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((r.value - want).abs() <= 1e-7, "{:?} {i}->{j}: {}", model.family(), r.value);
            }
        }
    }
}

#[test]
fn chapman_kolmogorov() {
    let m = build_model(FamilyKind::AlternatingCase2, &[1.0, 2.0]).unwrap();
    let (s, t) = (0.4, 0.8);
    let w = (4.0 * m.max_exit_rate() * (s + t) + 20.0).ceil() as i64 / 2;
    let w = w.min(60);
    let first = transition_row(&m, 1, s, -w, w, &cfg()).unwrap();
    let direct = transition_probability(&m, 1, -2, s + t, &cfg()).unwrap().value;
    let mut sum = 0.0;
    for (k, p) in (-w..=w).zip(&first) {
        sum += p.value * transition_probability(&m, k, -2, t, &cfg()).unwrap().value;
    }
    assert!((sum - direct).abs() <= 1e-5, "{sum} vs {direct}");
}

#[test]
fn current_methods_agree() {
    for model in figure_models() {
        let (lo, hi) = if model.domain() == Domain::HalfLine { (0, 10) } else { (-10, 10) };
        for t in [0.0, 3.0, 6.0, 9.0] {
            let d = current_row(&model, 0, lo, hi, t, CurrentMethod::Direct, &cfg()).unwrap();
            let u = current_row(&model, 0, lo, hi, t, CurrentMethod::Dual, &cfg()).unwrap();
            for (n, (a, b)) in (lo..=hi).zip(d.iter().zip(&u)) {
                assert!((a - b).abs() <= 1e-8, "{:?} t={t} n={n}: {a} vs {b}", model.family());
            }
        }
    }
}

#[test]
fn current_at_time_zero() {
    let m = build_model(FamilyKind::SymmetricBilateral, &[1.0, 2.0]).unwrap();
    for n in -3..=3 {
        let (l_prev, _) = m.rates_at(n - 1).unwrap();
        let (_, mu) = m.rates_at(n).unwrap();
        let want = if n == 1 { l_prev } else if n == 0 { -mu } else { 0.0 };
        let got = probability_current(&m, 0, n, 0.0, CurrentMethod::Dual, &cfg()).unwrap();
        assert!((got - want).abs() < 1e-9, "n={n}: {got}");
    }
}

#[test]
fn constant_rate_current_closed_form() {
    let (l, mu) = (1.0f64, 2.0f64);
    let m = build_model(FamilyKind::ConstantBilateral, &[l, mu]).unwrap();
    let t = 1.5;
    let z = 2.0 * (l * mu).sqrt() * t;
    let r = (l / mu).sqrt();
    for n in -4..=4i64 {
        let k = n;
        let want = mu * (-(l + mu) * t).exp() * r.powi(k as i32) * (r * bessel_i(k - 1, z) - bessel_i(k, z));
        let got = probability_current(&m, 0, n, t, CurrentMethod::Dual, &cfg()).unwrap();
        assert!((got - want).abs() < 1e-9, "n={n}: {got} vs {want}");
    }
}

#[test]
fn mm1_current_negative_in_first_state() {
    let m = build_model(FamilyKind::Mm1Absorbing, &[1.0, 2.0]).unwrap();
    let v = probability_current(&m, 0, 1, 3.0, CurrentMethod::Direct, &cfg()).unwrap();
    assert!(v < 0.0);
}

#[test]
fn piece_integration() {
    let f = build_model(FamilyKind::Mm1Absorbing, &[1.0, 1.0]).unwrap().half_line(Side::Plus).unwrap();
    let m = spectral_measure_halfline(&f);
    let mass = integrate_piece(&m.pieces[0], |_| 1.0, &cfg()).unwrap();
    assert!((mass - 1.0).abs() < 1e-10);
    let first = integrate_piece(&m.pieces[0], |x| x, &cfg()).unwrap();
    assert!((first - 2.0).abs() < 1e-8);

    let alt = build_model(FamilyKind::AlternatingCase1, &[1.0, 2.0]).unwrap().half_line(Side::Plus).unwrap();
    let m = spectral_measure_halfline(&alt);
    let total: f64 = m.pieces.iter().map(|p| integrate_piece(p, |_| 1.0, &cfg()).unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-8);
}

#[test]
fn rejects_bad_inputs() {
    let m = build_model(FamilyKind::Mm1Absorbing, &[1.0, 2.0]).unwrap();
    assert!(matches!(transition_probability(&m, -1, 0, 1.0, &cfg()), Err(Error::OutOfDomain(_))));
    assert!(matches!(transition_probability(&m, 0, 0, -1.0, &cfg()), Err(Error::OutOfDomain(_))));
    assert!(matches!(transition_probability(&m, 0, 65, 1.0, &cfg()), Err(Error::OutOfDomain(_))));
    assert!(QuadratureConfig::new(8).is_err());
}

#[test]
fn coarse_grid_reports_non_convergence() {
    let m = build_model(FamilyKind::SplitQueues, &[0.5, 1.0 / 3.0, 2.6, 0.1]).unwrap();
    let coarse = QuadratureConfig::new(16).unwrap();
    let r = transition_row(&m, 0, 0.0, -20, 20, &coarse);
    assert!(matches!(r, Err(Error::NonConvergedQuadrature { .. })), "{r:?}");
}
