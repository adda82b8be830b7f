//! Scalar and 2×2 spectral measures: absolutely continuous pieces plus
//! Dirac atoms, their Stieltjes transforms, and the coupling relations that
//! tie a bilateral spectral matrix to its two half-line measures.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{CatalogModel, Domain, HalfLineFactor, Side};
use crate::quadrature::interval_nodes;

mod catalog;

pub use catalog::{split_arrangement, split_stieltjes_unrationalized, SplitArrangement};

/// Nodes per piece used for Stieltjes transforms and masses.
pub const DEFAULT_NODES: usize = 512;

/// Symmetric 2×2 matrix stored by its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const fn new(m11: f64, m12: f64, m22: f64) -> Self {
        Self { m11, m12, m22 }
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    /// Smaller eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = 0.5 * (self.m11 - self.m22);
        0.5 * self.trace() - (h * h + self.m12 * self.m12).sqrt()
    }

    pub fn entry(&self, e: Entry) -> f64 {
        match e {
            Entry::E11 | Entry::Scalar => self.m11,
            Entry::E12 => self.m12,
            Entry::E22 => self.m22,
        }
    }
}

/// Value type carried by a measure: a scalar for half-line chains, a
/// symmetric matrix for bilateral ones.
pub trait Weight: Copy + Send + Sync + fmt::Debug + 'static {
    const ZERO: Self;
    fn scale(self, s: f64) -> Self;
    fn plus(self, other: Self) -> Self;
    /// aᵀ W b, where a scalar weight only sees the first components.
    fn bilinear(&self, a: [f64; 2], b: [f64; 2]) -> f64;
    fn max_abs(&self) -> f64;
    /// (c, v) with self = c·v vᵀ, exact for the rank-one weights of atoms.
    fn rank_one(&self) -> (f64, [f64; 2]);
}

impl Weight for f64 {
    const ZERO: Self = 0.0;
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn bilinear(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self * a[0] * b[0]
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
    fn rank_one(&self) -> (f64, [f64; 2]) {
        (*self, [1.0, 0.0])
    }
}

impl Weight for Mat2 {
    const ZERO: Self = Mat2::new(0.0, 0.0, 0.0);
    fn scale(self, s: f64) -> Self {
        Mat2::new(self.m11 * s, self.m12 * s, self.m22 * s)
    }
    fn plus(self, o: Self) -> Self {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m22 + o.m22)
    }
    fn bilinear(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        a[0] * b[0] * self.m11 + (a[0] * b[1] + a[1] * b[0]) * self.m12 + a[1] * b[1] * self.m22
    }
    fn max_abs(&self) -> f64 {
        self.m11.abs().max(self.m12.abs()).max(self.m22.abs())
    }
    fn rank_one(&self) -> (f64, [f64; 2]) {
        if self.m11.abs() >= self.m22.abs() {
            (self.m11, [1.0, self.m12 / self.m11])
        } else {
            (self.m22, [self.m12 / self.m22, 1.0])
        }
    }
}

/// Behaviour of a density at an interval endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    SqrtVanishing,
    InverseSqrt,
    Regular,
}

impl Endpoint {
    pub fn name(self) -> &'static str {
        match self {
            Endpoint::SqrtVanishing => "sqrt-vanishing",
            Endpoint::InverseSqrt => "inverse-sqrt",
            Endpoint::Regular => "regular",
        }
    }
}

pub type DensityFn<W> = Arc<dyn Fn(f64) -> W + Send + Sync>;

/// Absolutely continuous part of a measure on [a, b].
#[derive(Clone)]
pub struct AcPiece<W> {
    pub a: f64,
    pub b: f64,
    pub left: Endpoint,
    pub right: Endpoint,
    /// The density has rank one on the whole piece.
    pub rank_one: bool,
    density: DensityFn<W>,
}

impl<W: Weight> AcPiece<W> {
    pub fn new(a: f64, b: f64, left: Endpoint, right: Endpoint, density: impl Fn(f64) -> W + Send + Sync + 'static) -> Self {
        Self { a, b, left, right, rank_one: false, density: Arc::new(density) }
    }

    pub fn with_rank_one(mut self) -> Self {
        self.rank_one = true;
        self
    }

    pub fn density(&self, x: f64) -> W {
        (self.density)(x)
    }

    /// Quadrature points (x_k, density(x_k)·Jacobian·weight).
    pub fn nodes(&self, n: usize) -> impl Iterator<Item = (f64, W)> + '_ {
        interval_nodes(self.a, self.b, n).map(move |(x, w)| (x, self.density(x).scale(w)))
    }
}

impl<W> fmt::Debug for AcPiece<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AcPiece")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("left", &self.left)
            .field("right", &self.right)
            .field("rank_one", &self.rank_one)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<W> {
    pub location: f64,
    pub weight: W,
}

/// Pieces plus atoms.
#[derive(Debug, Clone)]
pub struct Spectral<W> {
    pub pieces: Vec<AcPiece<W>>,
    pub atoms: Vec<Atom<W>>,
}

impl<W: Weight> Spectral<W> {
    /// Smallest point of the support.
    pub fn support_min(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.a)
            .chain(self.atoms.iter().map(|a| a.location))
            .fold(f64::INFINITY, f64::min)
    }

    /// Quadrature points of the absolutely continuous part only, tagged
    /// with the rank-one flag of their piece.
    pub fn discretize_ac(&self, nodes: usize) -> Vec<(f64, W, bool)> {
        let mut out = Vec::with_capacity(self.pieces.len() * nodes);
        for p in &self.pieces {
            out.extend(p.nodes(nodes).map(|(x, w)| (x, w, p.rank_one)));
        }
        out
    }

    /// Every quadrature point followed by every atom, in a fixed order.
    pub fn discretize(&self, nodes: usize) -> Vec<(f64, W)> {
        let mut out = Vec::with_capacity(self.pieces.len() * nodes + self.atoms.len());
        for p in &self.pieces {
            out.extend(p.nodes(nodes));
        }
        out.extend(self.atoms.iter().map(|a| (a.location, a.weight)));
        out
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, nodes: usize) -> W {
        self.discretize(nodes).into_iter().fold(W::ZERO, |acc, (x, w)| acc.plus(w.scale(f(x))))
    }

    pub fn total_mass(&self, nodes: usize) -> W {
        self.integrate(|_| 1.0, nodes)
    }

    /// B(z) = ∫ dψ(x)/(x − z) for real z below the support.
    pub fn stieltjes(&self, z: f64, nodes: usize) -> Result<W> {
        let min = self.support_min();
        if !(z < min - 1e-9) {
            return Err(Error::ZInSupport { z, min });
        }
        Ok(self.integrate(|x| 1.0 / (x - z), nodes))
    }
}

pub type SpectralMeasure = Spectral<f64>;

/// Spectral matrix of a bilateral chain together with π_{-1}.
#[derive(Debug, Clone)]
pub struct SpectralMatrix {
    pub measure: Spectral<Mat2>,
    pub pi_minus1: f64,
}

impl std::ops::Deref for SpectralMatrix {
    type Target = Spectral<Mat2>;
    fn deref(&self) -> &Self::Target {
        &self.measure
    }
}

/// Entry selector for Stieltjes transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entry {
    Scalar,
    E11,
    E12,
    E22,
}

/// The spectral object belonging to a catalog model.
#[derive(Debug, Clone)]
pub enum SpectralObject {
    Measure(SpectralMeasure),
    Matrix(SpectralMatrix),
}

impl SpectralObject {
    pub fn of(model: &CatalogModel) -> Result<Self> {
        match model.domain() {
            Domain::HalfLine => Ok(SpectralObject::Measure(spectral_measure_halfline(&model.half_line(Side::Plus)?))),
            Domain::Bilateral => Ok(SpectralObject::Matrix(spectral_matrix(model)?)),
        }
    }

    pub fn support_min(&self) -> f64 {
        match self {
            SpectralObject::Measure(m) => m.support_min(),
            SpectralObject::Matrix(m) => m.support_min(),
        }
    }
}

/// Spectral measure of a half-line chain.
pub fn spectral_measure_halfline(factor: &HalfLineFactor) -> SpectralMeasure {
    catalog::halfline_measure(factor)
}

/// Spectral matrix of a bilateral catalog model.
pub fn spectral_matrix(model: &CatalogModel) -> Result<SpectralMatrix> {
    if model.domain() != Domain::Bilateral {
        return Err(Error::OutOfDomain(format!("{} is not bilateral", model.kind())));
    }
    let measure = catalog::matrix_measure(model)?;
    Ok(SpectralMatrix { measure, pi_minus1: model.potential_coefficient(-1)? })
}

pub fn stieltjes_quadrature(object: &SpectralObject, entry: Entry, z: f64) -> Result<f64> {
    match (object, entry) {
        (SpectralObject::Measure(m), Entry::Scalar) => m.stieltjes(z, DEFAULT_NODES),
        (SpectralObject::Matrix(m), e) if e != Entry::Scalar => Ok(m.stieltjes(z, DEFAULT_NODES)?.entry(e)),
        _ => Err(Error::OutOfDomain(format!("entry {entry:?} does not match the spectral object"))),
    }
}

/// Closed-form Stieltjes transform of a half-line chain's measure.
pub fn stieltjes_halfline(factor: &HalfLineFactor, z: f64) -> Result<f64> {
    let min = catalog::halfline_measure(factor).support_min();
    if !(z < min - 1e-9) {
        return Err(Error::ZInSupport { z, min });
    }
    Ok(catalog::halfline_closed(factor, z))
}

/// Closed-form Stieltjes transform of a catalog model's spectral object.
pub fn stieltjes_closed(model: &CatalogModel, entry: Entry, z: f64) -> Result<f64> {
    match (model.domain(), entry) {
        (Domain::HalfLine, Entry::Scalar) => stieltjes_halfline(&model.half_line(Side::Plus)?, z),
        (Domain::Bilateral, e) if e != Entry::Scalar => {
            let min = catalog::matrix_measure(model)?.support_min();
            if !(z < min - 1e-9) {
                return Err(Error::ZInSupport { z, min });
            }
            Ok(catalog::matrix_closed(model, z).entry(e))
        }
        _ => Err(Error::OutOfDomain(format!("entry {entry:?} does not apply to {}", model.kind()))),
    }
}

/// Residuals (r11, r22, r12) of the relations expressing B(z;ψ_αβ) through
/// the half-line transforms B(z;ψ^±).
pub fn verify_coupling(model: &CatalogModel, z: f64) -> Result<(f64, f64, f64)> {
    let matrix = spectral_matrix(model)?;
    let plus = model.half_line(Side::Plus)?;
    let minus = model.half_line(Side::Minus)?;
    let bp = stieltjes_halfline(&plus, z)?;
    let bm = stieltjes_halfline(&minus, z)?;
    let b = matrix.stieltjes(z, DEFAULT_NODES)?;
    let (lm1, _) = model.rates_at(-1)?;
    let (_, mu0) = model.rates_at(0)?;
    let den = 1.0 - lm1 * mu0 * bp * bm;
    Ok((
        b.m11 - bp / den,
        b.m22 - (lm1 / mu0) * bm / den,
        b.m12 - lm1 * bp * bm / den,
    ))
}
