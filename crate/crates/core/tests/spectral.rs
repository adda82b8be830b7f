use bdspectral::model::{build_model, FamilyKind, Side};
use bdspectral::spectral::{
    spectral_matrix, spectral_measure_halfline, split_arrangement, split_stieltjes_unrationalized, stieltjes_closed,
    stieltjes_halfline, stieltjes_quadrature, verify_coupling, Endpoint, Entry, SpectralObject,
};
use bdspectral::{CatalogModel, Domain, Error};

fn all_models() -> Vec<CatalogModel> {
    let mut out = Vec::new();
    for kind in FamilyKind::ALL {
        for p in kind.figure_params() {
            out.push(build_model(kind, p).unwrap());
        }
    }
    for (kind, p) in [
        (FamilyKind::AlternatingCase1, vec![1.5, 1.5]),
        (FamilyKind::AlternatingCase2, vec![0.7, 0.7]),
        (FamilyKind::SymmetricBilateral, vec![1.0, 1.0]),
        (FamilyKind::DefectCase2, vec![1.0, 3.0, 2.0, 7.0]),
        (FamilyKind::DefectCase1, vec![1.0, 1.0, 3.0, 0.5]),
        (FamilyKind::SplitQueues, vec![2.0, 1.0, 3.0, 5.0]),
        (FamilyKind::SplitQueues, vec![1.0, 4.0, 2.0, 3.0]),
    ] {
        out.push(build_model(kind, &p).unwrap());
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-3)
}

#[test]
fn closed_forms_match_quadrature() {
    for model in all_models() {
        let obj = SpectralObject::of(&model).unwrap();
        let entries: &[Entry] = match model.domain() {
            Domain::HalfLine => &[Entry::Scalar],
            Domain::Bilateral => &[Entry::E11, Entry::E12, Entry::E22],
        };
        let zmin = obj.support_min();
        for dz in [0.25, 1.0, 5.0] {
            let z = zmin - dz;
            for &e in entries {
                let c = stieltjes_closed(&model, e, z).unwrap();
                let q = stieltjes_quadrature(&obj, e, z).unwrap();
                assert!(rel(q, c) < 1e-9, "{:?} {e:?} z={z}: closed {c} quad {q}", model.family());
            }
        }
    }
}

#[test]
fn coupling_relations_hold() {
    for model in all_models().into_iter().filter(|m| m.domain() == Domain::Bilateral) {
        let z = SpectralObject::of(&model).unwrap().support_min() - 0.5;
        let (r11, r22, r12) = verify_coupling(&model, z).unwrap();
        let worst = r11.abs().max(r22.abs()).max(r12.abs());
        assert!(worst < 1e-9, "{:?}: {r11} {r22} {r12}", model.family());
    }
}

#[test]
fn masses_match_initial_conditions() {
    for model in all_models() {
        match model.domain() {
            Domain::HalfLine => {
                let m = spectral_measure_halfline(&model.half_line(Side::Plus).unwrap());
                assert!((m.total_mass(512) - 1.0).abs() < 1e-9);
            }
            Domain::Bilateral => {
                let m = spectral_matrix(&model).unwrap();
                let w = m.total_mass(512);
                assert!((w.m11 - 1.0).abs() < 1e-8, "{:?} {w:?}", model.family());
                assert!(w.m12.abs() < 1e-8, "{:?} {w:?}", model.family());
                assert!((w.m22 * m.pi_minus1 - 1.0).abs() < 1e-8, "{:?} {w:?}", model.family());
            }
        }
    }
}

#[test]
fn half_line_factors_have_unit_mass() {
    for model in all_models().into_iter().filter(|m| m.domain() == Domain::Bilateral) {
        for side in [Side::Plus, Side::Minus] {
            let f = model.half_line(side).unwrap();
            let m = spectral_measure_halfline(&f);
            assert!((m.total_mass(512) - 1.0).abs() < 1e-9, "{f:?}");
            let z = m.support_min() - 1.0;
            let c = stieltjes_halfline(&f, z).unwrap();
            assert!(rel(m.stieltjes(z, 512).unwrap(), c) < 1e-10, "{f:?}");
        }
    }
}

#[test]
fn z_inside_support_is_rejected() {
    let model = build_model(FamilyKind::ConstantBilateral, &[1.0, 2.0]).unwrap();
    let err = stieltjes_closed(&model, Entry::E11, 0.5).unwrap_err();
    assert!(matches!(err, Error::ZInSupport { .. }));
}

#[test]
fn unrationalized_split_reduces_to_constant_rates() {
    let cst = build_model(FamilyKind::ConstantBilateral, &[1.0, 2.0]).unwrap();
    for z in [-0.3, -2.0] {
        let u = split_stieltjes_unrationalized(1.0, 2.0, 2.0, 1.0, z);
        for (e, v) in [(Entry::E11, u.m11), (Entry::E12, u.m12), (Entry::E22, u.m22)] {
            let c = stieltjes_closed(&cst, e, z).unwrap();
            assert!(rel(v, c) < 1e-12, "{e:?}: {v} vs {c}");
        }
    }
}

#[test]
fn split_arrangements() {
    assert_eq!(split_arrangement(1.0, 2.0, 3.0, 4.0).label(), "2(b)");
    assert_eq!(split_arrangement(0.5, 1.0 / 3.0, 2.6, 0.1).label(), "1(a)");
}

fn local_power(f: &dyn Fn(f64) -> f64, x: f64, inward: f64, w: f64) -> f64 {
    (f(x + inward * 1e-10 * w) / f(x + inward * 1e-8 * w)).ln() / (1e-2f64).ln()
}

fn expected_power(e: Endpoint) -> f64 {
    match e {
        Endpoint::InverseSqrt => -0.5,
        Endpoint::SqrtVanishing => 0.5,
        Endpoint::Regular => 0.0,
    }
}

#[test]
fn endpoint_flags_match_local_power() {
    for m in all_models() {
        let check = |a: f64, b: f64, left: Endpoint, right: Endpoint, f: &dyn Fn(f64) -> f64| {
            let w = b - a;
            for (x, inward, e) in [(a, 1.0, left), (b, -1.0, right)] {
                let p = local_power(f, x, inward, w);
                assert!((p - expected_power(e)).abs() < 0.05, "{:?} at {x}: {e:?} vs {p}", m.family());
            }
        };
        match m.domain() {
            Domain::HalfLine => {
                for p in spectral_measure_halfline(&m.half_line(Side::Plus).unwrap()).pieces {
                    check(p.a, p.b, p.left, p.right, &|x| p.density(x));
                }
            }
            Domain::Bilateral => {
                for p in spectral_matrix(&m).unwrap().pieces.iter() {
                    check(p.a, p.b, p.left, p.right, &|x| {
                        let d = p.density(x);
                        d.m11 + d.m22
                    });
                }
            }
        }
    }
}

#[test]
fn densities_are_psd() {
    for m in all_models().into_iter().filter(|m| m.domain() == Domain::Bilateral) {
        let s = spectral_matrix(&m).unwrap();
        for p in s.pieces.iter() {
            for k in 1..=65 {
                let x = p.a + (p.b - p.a) * k as f64 / 66.0;
                let d = p.density(x);
                assert!(d.min_eigenvalue() >= -1e-10 * d.trace().abs(), "{:?} x={x}", m.family());
            }
        }
        for a in &s.atoms {
            let w = a.weight;
            assert!(a.location >= 0.0);
            assert!(w.min_eigenvalue() >= -1e-12 * w.trace());
            assert!(w.det().abs() <= 1e-12 * w.trace().powi(2), "{:?}", m.family());
            for p in s.pieces.iter() {
                assert!(!(a.location > p.a && a.location < p.b));
            }
        }
    }
}

fn atom_locations(kind: FamilyKind, p: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> =
        spectral_matrix(&build_model(kind, p).unwrap()).unwrap().atoms.iter().map(|a| a.location).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn published_atom_locations() {
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
    let v = atom_locations(FamilyKind::DefectCase2, &[1.0, 2.0, 1.0, 5.0]);
    assert!(close(&v, &[0.0, 42.0 / 5.0]), "{v:?}");
    let v = atom_locations(FamilyKind::DefectCase2, &[2.0, 1.0, 5.0, 1.0]);
    assert!(close(&v, &[7.5]), "{v:?}");
    let v = atom_locations(FamilyKind::SplitQueues, &[1.0, 2.5, 1.0, 2.0]);
    assert!(close(&v, &[0.0, 20.0 / 3.0]), "{v:?}");
    for (l, m) in [(1.0, 2.0), (0.5, 3.0)] {
        let v = atom_locations(FamilyKind::SymmetricBilateral, &[l, m]);
        assert!(close(&v, &[0.0, 2.0 * l + 2.0 * m]), "{v:?}");
    }
    let s = spectral_matrix(&build_model(FamilyKind::SymmetricBilateral, &[1.0, 2.0]).unwrap()).unwrap();
    for a in &s.atoms {
        assert!((a.weight.m11 - 0.25).abs() < 1e-14);
    }
    assert!(atom_locations(FamilyKind::ConstantBilateral, &[1.0, 2.0]).is_empty());
}

#[test]
fn stieltjes_examples() {
    let m = build_model(FamilyKind::Mm1Absorbing, &[1.0, 2.0]).unwrap();
    let obj = SpectralObject::of(&m).unwrap();
    let v = stieltjes_quadrature(&obj, Entry::Scalar, 0.0).unwrap();
    assert!((v - 0.5).abs() <= 1e-9);
    let v = stieltjes_closed(&m, Entry::Scalar, -1.0).unwrap();
    assert!((v - (4.0 - 2.0 * 2f64.sqrt()) / 4.0).abs() <= 1e-14);

    let m = build_model(FamilyKind::ConstantBilateral, &[1.0, 1.0]).unwrap();
    let obj = SpectralObject::of(&m).unwrap();
    let v = stieltjes_quadrature(&obj, Entry::E12, -1.0).unwrap();
    assert!((v - (-1.0 + 3.0 / 5f64.sqrt()) / 2.0).abs() <= 1e-9);

    for m in all_models() {
        let obj = SpectralObject::of(&m).unwrap();
        let entry = if m.domain() == Domain::HalfLine { Entry::Scalar } else { Entry::E11 };
        let v = stieltjes_quadrature(&obj, entry, -1e6).unwrap();
        assert!((v * 1e6 - 1.0).abs() <= 1e-4, "{:?}", m.family());
    }
}

#[test]
fn defect_reduces_to_symmetric() {
    let (l, m) = (1.0, 2.0);
    let d = build_model(FamilyKind::DefectCase2, &[l, m, l, m]).unwrap();
    let s = build_model(FamilyKind::SymmetricBilateral, &[l, m]).unwrap();
    for e in [Entry::E11, Entry::E12, Entry::E22] {
        for z in [-0.3, -2.0, -9.0] {
            let a = stieltjes_closed(&d, e, z).unwrap();
            let b = stieltjes_closed(&s, e, z).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn defect_figure_atom_counts() {
    let count = |p: &[f64]| atom_locations(FamilyKind::DefectCase1, p).len();
    assert_eq!(count(&[1.0, 2.0, 1.0, 5.0]), 1);
    assert_eq!(count(&[1.0, 2.0, 5.0, 1.0]), 2);
    assert_eq!(count(&[2.0, 1.0, 1.0, 5.0]), 2);
    assert_eq!(count(&[2.0, 1.0, 5.0, 1.0]), 1);
}
