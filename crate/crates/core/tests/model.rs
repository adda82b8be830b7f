use bdspectral::model::{build_model, FamilyKind};
use bdspectral::{Domain, Error};

fn figure_models() -> Vec<bdspectral::CatalogModel> {
    FamilyKind::ALL
        .into_iter()
        .flat_map(|k| k.figure_params().iter().map(move |p| build_model(k, p).unwrap()))
        .collect()
}

#[test]
fn detailed_balance() {
    for m in figure_models() {
        let lo = if m.domain() == Domain::HalfLine { 1 } else { -20 };
        for n in lo..=20 {
            let lhs = m.potential_coefficient(n).unwrap() * m.rates_at(n).unwrap().1;
            let rhs = m.rates_at(n - 1).unwrap().0 * m.potential_coefficient(n - 1).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "{:?} n={n}", m.family());
        }
        assert_eq!(m.potential_coefficient(0).unwrap(), 1.0);
    }
}

#[test]
fn rate_examples() {
    let m = build_model(FamilyKind::AlternatingCase1, &[1.0, 2.0]).unwrap();
    assert_eq!(m.rates_at(3).unwrap(), (2.0, 2.0));
    let m = build_model(FamilyKind::SplitQueues, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(m.rates_at(-1).unwrap(), (4.0, 3.0));
    assert_eq!(m.potential_coefficient(-1).unwrap(), 0.5);
    let m = build_model(FamilyKind::ConstantBilateral, &[1.0, 1.0]).unwrap();
    assert_eq!(m.rates_at(0).unwrap(), (1.0, 1.0));
    let m = build_model(FamilyKind::SymmetricBilateral, &[1.0, 2.0]).unwrap();
    assert_eq!(m.potential_coefficient(-2).unwrap(), 0.5);
}

#[test]
fn half_line_rejects_negative_states() {
    let m = build_model(FamilyKind::Mm1Absorbing, &[1.0, 2.0]).unwrap();
    assert!(matches!(m.rates_at(-1), Err(Error::OutOfDomain(_))));
    assert!(matches!(m.potential_coefficient(-3), Err(Error::OutOfDomain(_))));
}

#[test]
fn construction_errors() {
    assert!(matches!(
        build_model(FamilyKind::Mm1Absorbing, &[1.0, 0.0]),
        Err(Error::NonPositiveParameter { .. })
    ));
    assert!(matches!(build_model(FamilyKind::Mm1Absorbing, &[1.0]), Err(Error::OutOfDomain(_))));
    let e = build_model(FamilyKind::SplitQueues, &[1.0, 1.0, 1.0, 1.0]).unwrap_err();
    assert!(e.to_string().contains("constant-bilateral"), "{e}");
    assert!(build_model(FamilyKind::DefectCase2, &[1.0, 2.0, 1.0, 5.0]).is_ok());
    // λ0 + μ0 = λ
    assert!(matches!(
        build_model(FamilyKind::DefectCase2, &[3.0, 2.0, 1.0, 2.0]),
        Err(Error::DegenerateParameters(_))
    ));
    // λ0μ + μ0λ = λμ
    assert!(matches!(
        build_model(FamilyKind::DefectCase1, &[2.0, 2.0, 0.5, 1.5]),
        Err(Error::DegenerateParameters(_))
    ));
}

#[test]
fn reductions_give_identical_rates() {
    let (l, m) = (1.3, 0.7);
    let c = build_model(FamilyKind::ConstantBilateral, &[l, m]).unwrap();
    let s = build_model(FamilyKind::SymmetricBilateral, &[l, m]).unwrap();
    for n in -20..=20 {
        let d1 = build_model(FamilyKind::DefectCase1, &[l, m, l, m]).map(|d| d.rates_at(n).unwrap());
        let d2 = build_model(FamilyKind::DefectCase2, &[l, m, l, m]).map(|d| d.rates_at(n).unwrap());
        if let Ok(r) = d1 {
            assert_eq!(r, c.rates_at(n).unwrap());
        }
        if let Ok(r) = d2 {
            assert_eq!(r, s.rates_at(n).unwrap());
        }
        let sc = build_model(FamilyKind::SplitQueues, &[l, m, m, l]);
        assert!(sc.is_err() || sc.unwrap().rates_at(n).unwrap() == c.rates_at(n).unwrap());
        let ss = build_model(FamilyKind::SplitQueues, &[l, m, l, m]).unwrap();
        assert_eq!(ss.rates_at(n).unwrap(), s.rates_at(n).unwrap());
    }
}
