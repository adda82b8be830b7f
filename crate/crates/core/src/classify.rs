//! Transient / null-recurrent / positive-recurrent classification, the
//! weight of the spectral atom at 0 and invariant distributions.
//!
//! Away from state 0 every catalog chain has rates periodic in n with
//! period 1 or 2 on each side, so the series Σπ_n and Σ1/(λ_nπ_n) are
//! geometric past the first period and are summed in closed form.

use std::fmt;

use crate::model::{CatalogModel, Domain, FamilyKind, Side};
use crate::spectral::{spectral_matrix, spectral_measure_halfline, Endpoint};

/// Edge of the support treated as touching 0.
const ZERO_EDGE: f64 = 1e-12;
const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Transient,
    NullRecurrent,
    PositiveRecurrent,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Transient => "transient",
            Verdict::NullRecurrent => "null-recurrent",
            Verdict::PositiveRecurrent => "positive-recurrent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evidence {
    /// From the support of the spectral object near 0.
    pub spectral: Verdict,
    /// From the series Σπ_n and Σ(λ_nπ_n)^{-1}.
    pub ratesum: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

fn period(model: &CatalogModel) -> i64 {
    match model.kind() {
        FamilyKind::AlternatingCase1 | FamilyKind::AlternatingCase2 => 2,
        _ => 1,
    }
}

fn rates(model: &CatalogModel, n: i64) -> (f64, f64) {
    model.rates_at(n).expect("state inside the model domain")
}

fn pi(model: &CatalogModel, n: i64) -> f64 {
    model.potential_coefficient(n).expect("state inside the model domain")
}

fn geometric(block: f64, ratio: f64) -> f64 {
    if ratio >= 1.0 - RATIO_TOL {
        f64::INFINITY
    } else {
        block / (1.0 - ratio)
    }
}

/// Σ_{n>=a} of π_n (or of 1/(λ_nπ_n) when `reciprocal`).
fn right_sum(model: &CatalogModel, a: i64, reciprocal: bool) -> f64 {
    let term = |n: i64| if reciprocal { 1.0 / (rates(model, n).0 * pi(model, n)) } else { pi(model, n) };
    let start = a.max(1);
    let head: f64 = (a..start).map(term).sum();
    let p = period(model);
    let block: f64 = (start..start + p).map(term).sum();
    let mut r = 1.0;
    for k in start..start + p {
        r *= rates(model, k).0 / rates(model, k + 1).1;
    }
    head + geometric(block, if reciprocal { 1.0 / r } else { r })
}

/// Σ_{n<=-a} of π_n (or of 1/(λ_nπ_n)), bilateral models only.
fn left_sum(model: &CatalogModel, a: i64, reciprocal: bool) -> f64 {
    let term = |n: i64| if reciprocal { 1.0 / (rates(model, n).0 * pi(model, n)) } else { pi(model, n) };
    let start = a.max(1);
    let head: f64 = (a..start).map(|k| term(-k)).sum();
    let p = period(model);
    let block: f64 = (start..start + p).map(|k| term(-k)).sum();
    let mut r = 1.0;
    for k in start..start + p {
        r *= rates(model, -k).1 / rates(model, -k - 1).0;
    }
    head + geometric(block, if reciprocal { 1.0 / r } else { r })
}

/// Σ_n π_n over the whole domain, `None` when it diverges.
pub fn potential_sum(model: &CatalogModel) -> Option<f64> {
    let mut s = right_sum(model, 0, false);
    if model.domain() == Domain::Bilateral {
        s += left_sum(model, 1, false);
    }
    s.is_finite().then_some(s)
}

/// Mass of π outside `n_lo..=n_hi`, normalised by Σπ.
pub fn tail_mass(model: &CatalogModel, n_lo: i64, n_hi: i64) -> Option<f64> {
    let total = potential_sum(model)?;
    let mut tail = right_sum(model, n_hi + 1, false);
    if model.domain() == Domain::Bilateral {
        tail += left_sum(model, 1 - n_lo, false);
    }
    Some(tail / total)
}

fn ratesum_verdict(model: &CatalogModel) -> Verdict {
    let right_rec = right_sum(model, 0, true).is_infinite();
    let mass = potential_sum(model);
    match model.domain() {
        Domain::HalfLine => {
            // killed through state 0: only the critical case fails to be transient
            if right_rec && mass.is_none() {
                Verdict::NullRecurrent
            } else {
                Verdict::Transient
            }
        }
        Domain::Bilateral => {
            let left_rec = left_sum(model, 1, true).is_infinite();
            match (right_rec && left_rec, mass) {
                (false, _) => Verdict::Transient,
                (true, Some(_)) => Verdict::PositiveRecurrent,
                (true, None) => Verdict::NullRecurrent,
            }
        }
    }
}

fn spectral_verdict(model: &CatalogModel) -> Verdict {
    let (atom_at_zero, ac_at_zero) = match model.domain() {
        Domain::HalfLine => {
            let m = spectral_measure_halfline(&model.half_line(Side::Plus).expect("half-line factor"));
            (
                m.atoms.iter().any(|a| a.location.abs() <= ZERO_EDGE && a.weight > 0.0),
                m.pieces.iter().any(|p| p.a <= ZERO_EDGE),
            )
        }
        Domain::Bilateral => {
            // ∫x^{-1}dψ diverges unless the density vanishes like √x at 0
            let m = spectral_matrix(model).expect("validated bilateral model");
            (
                m.atoms.iter().any(|a| a.location.abs() <= ZERO_EDGE && a.weight.m11 > 0.0),
                m.pieces.iter().any(|p| p.a <= ZERO_EDGE && p.left != Endpoint::SqrtVanishing),
            )
        }
    };
    if atom_at_zero {
        Verdict::PositiveRecurrent
    } else if ac_at_zero {
        Verdict::NullRecurrent
    } else {
        Verdict::Transient
    }
}

/// The verdict is the spectral one; the rate-sum verdict is carried as
/// independent evidence.
pub fn classify(model: &CatalogModel) -> Classification {
    let evidence = Evidence { spectral: spectral_verdict(model), ratesum: ratesum_verdict(model) };
    Classification { verdict: evidence.spectral, evidence }
}

/// ψ({0}) = (Σπ_n)^{-1} for bilateral chains with summable π, else 0.
pub fn atom_at_zero_weight(model: &CatalogModel) -> f64 {
    if model.domain() == Domain::HalfLine {
        return 0.0;
    }
    potential_sum(model).map_or(0.0, |s| 1.0 / s)
}

/// π_n/Σπ for n in `n_lo..=n_hi` when the chain is positive recurrent.
pub fn invariant_distribution(model: &CatalogModel, n_lo: i64, n_hi: i64) -> Option<Vec<f64>> {
    if classify(model).verdict != Verdict::PositiveRecurrent || n_lo > n_hi {
        return None;
    }
    let total = potential_sum(model)?;
    let pis = model.potentials().range(n_lo, n_hi).ok()?;
    Some(pis.into_iter().map(|p| p / total).collect())
}
