use std::f64::consts::PI;

use super::{AcPiece, Atom, Endpoint, Mat2, Spectral, SpectralMeasure, Weight};
use crate::error::{Error, Result};
use crate::model::{CatalogModel, Family, HalfLineFactor};

const ATOM_TOL: f64 = 1e-12;

fn band(l: f64, m: f64) -> (f64, f64) {
    ((l.sqrt() - m.sqrt()).powi(2), (l.sqrt() + m.sqrt()).powi(2))
}

/// sqrt((x−a)(b−x)), clamped to zero outside [a, b].
fn semi(x: f64, (a, b): (f64, f64)) -> f64 {
    ((x - a) * (b - x)).max(0.0).sqrt()
}

/// sqrt((l+m−z)² − 4lm), positive for z below the band.
fn s_below(l: f64, m: f64, z: f64) -> f64 {
    let (a, b) = band(l, m);
    ((a - z) * (b - z)).sqrt()
}

/// Same square root continued to either side of the band: positive below,
/// negative above.
fn s_real(l: f64, m: f64, z: f64) -> f64 {
    let (a, b) = band(l, m);
    let r = ((a - z) * (b - z)).max(0.0).sqrt();
    if z >= b {
        -r
    } else {
        r
    }
}

fn b_mm1(l: f64, m: f64, z: f64) -> f64 {
    (l + m - z - s_real(l, m, z)) / (2.0 * l * m)
}

fn d_endpoint(d: impl Fn(f64) -> f64, x: f64, scale: f64) -> Endpoint {
    if d(x).abs() <= 1e-12 * scale {
        Endpoint::InverseSqrt
    } else {
        Endpoint::SqrtVanishing
    }
}

fn lower_pieces(l: f64, m: f64) -> [(f64, f64); 2] {
    let c = 2.0 * l + 2.0 * m;
    [(0.0, 2.0 * l.min(m)), (2.0 * l.max(m), c)]
}

pub(super) fn halfline_measure(factor: &HalfLineFactor) -> SpectralMeasure {
    match *factor {
        HalfLineFactor::Mm1 { lambda: l, mu: m } => {
            let sb = band(l, m);
            Spectral {
                pieces: vec![AcPiece::new(sb.0, sb.1, Endpoint::SqrtVanishing, Endpoint::SqrtVanishing, move |x| {
                    semi(x, sb) / (2.0 * PI * l * m)
                })],
                atoms: vec![],
            }
        }
        HalfLineFactor::Alternating1 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            let dens = move |x: f64| {
                let r = (x * (2.0 * m - x) * (c - x) / (2.0 * l - x)).max(0.0);
                r.sqrt() / (2.0 * PI * l * m)
            };
            if l == m {
                let dens = move |x: f64| (x * (c - x)).max(0.0).sqrt() / (2.0 * PI * l * l);
                return Spectral {
                    pieces: vec![AcPiece::new(0.0, c, Endpoint::SqrtVanishing, Endpoint::SqrtVanishing, dens)],
                    atoms: vec![],
                };
            }
            // 2λ sits in the denominator, 2μ in the numerator
            let inner = if m < l { Endpoint::SqrtVanishing } else { Endpoint::InverseSqrt };
            let outer = if m > l { Endpoint::SqrtVanishing } else { Endpoint::InverseSqrt };
            let [j1, j2] = lower_pieces(l, m);
            Spectral {
                pieces: vec![
                    AcPiece::new(j1.0, j1.1, Endpoint::SqrtVanishing, inner, dens),
                    AcPiece::new(j2.0, j2.1, outer, Endpoint::SqrtVanishing, dens),
                ],
                atoms: vec![],
            }
        }
        HalfLineFactor::Alternating2 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            if l == m {
                let dens = move |x: f64| (x * (c - x)).max(0.0).sqrt() / (2.0 * PI * l * l);
                return Spectral {
                    pieces: vec![AcPiece::new(0.0, c, Endpoint::SqrtVanishing, Endpoint::SqrtVanishing, dens)],
                    atoms: vec![],
                };
            }
            let dens = move |x: f64| {
                let p = (x * (2.0 * m - x) * (2.0 * l - x) * (c - x)).max(0.0);
                p.sqrt() / (2.0 * PI * m * m * (l + m - x).abs())
            };
            let [j1, j2] = lower_pieces(l, m);
            let v = Endpoint::SqrtVanishing;
            let mut atoms = vec![];
            if m > l {
                atoms.push(Atom { location: l + m, weight: 1.0 - l * l / (m * m) });
            }
            Spectral {
                pieces: vec![AcPiece::new(j1.0, j1.1, v, v, dens), AcPiece::new(j2.0, j2.1, v, v, dens)],
                atoms,
            }
        }
        HalfLineFactor::Defect { lambda: l, mu: m, lambda0: l0, mu0: m0 } => {
            let sb = band(l, m);
            let dens = move |x: f64| {
                let u = l0 + m0 - x - l0 * (l + m - x) / (2.0 * l);
                let v = l0 * semi(x, sb) / (2.0 * l);
                let den = u * u + v * v;
                if den == 0.0 {
                    0.0
                } else {
                    v / den / PI
                }
            };
            Spectral {
                pieces: vec![AcPiece::new(sb.0, sb.1, Endpoint::SqrtVanishing, Endpoint::SqrtVanishing, dens)],
                atoms: defect_atoms(l, m, l0, m0),
            }
        }
    }
}

/// Poles of 1/(λ0+μ0−z−λ0μB(z)) off the band.
fn defect_atoms(l: f64, m: f64, l0: f64, m0: f64) -> Vec<Atom<f64>> {
    let c0 = l0 + m0;
    let a2 = l - l0;
    let a1 = -2.0 * l * c0 + l0 * (l + m) + l0 * c0;
    let a0 = l * c0 * c0 - l0 * (l + m) * c0 + l0 * l0 * m;
    let scale = a0.abs().max(a1.abs()).max(a2.abs()).max(1.0);
    let mut roots = Vec::new();
    if a2.abs() <= ATOM_TOL * scale {
        if a1.abs() > ATOM_TOL * scale {
            roots.push(-a0 / a1);
        }
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // stable pair of roots
            let q = -0.5 * (a1 + a1.signum() * sq);
            if q != 0.0 {
                roots.push(q / a2);
                roots.push(a0 / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    let (sm, sp) = band(l, m);
    let mut atoms = Vec::new();
    for z in roots {
        let width = 1e-9 * sp.max(1.0);
        if z < -width || (z > sm - width && z < sp + width) {
            continue;
        }
        let c = c0 - z;
        let s_branch = l + m - z - 2.0 * l * c / l0;
        let ok = if z < sm { s_branch > 0.0 } else { s_branch < 0.0 };
        if !ok {
            continue;
        }
        let s = s_real(l, m, z);
        let db = (-1.0 + (l + m - z) / s) / (2.0 * l * m);
        let g1 = -1.0 - l0 * m * db;
        let w = -1.0 / g1;
        if w > ATOM_TOL {
            atoms.push(Atom { location: z.max(0.0), weight: w });
        }
    }
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    atoms
}

pub(super) fn halfline_closed(factor: &HalfLineFactor, z: f64) -> f64 {
    match *factor {
        HalfLineFactor::Mm1 { lambda: l, mu: m } => (l + m - z - s_below(l, m, z)) / (2.0 * l * m),
        HalfLineFactor::Alternating1 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            let r = (-z * (2.0 * m - z) * (c - z) / (2.0 * l - z)).sqrt();
            (2.0 * m - z - r) / (2.0 * l * m)
        }
        HalfLineFactor::Alternating2 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            let r = (-z * (2.0 * m - z) * (2.0 * l - z) * (c - z)).sqrt();
            (z * z - 2.0 * (l + m) * z + 2.0 * m * (l + m) - r) / (2.0 * m * m * (l + m - z))
        }
        HalfLineFactor::Defect { lambda: l, mu: m, lambda0: l0, mu0: m0 } => {
            1.0 / (l0 + m0 - z - l0 * m * b_mm1(l, m, z))
        }
    }
}

fn uniform(x: f64) -> Mat2 {
    Mat2::new(x, x, x)
}

/// Density −q(x)·s(x)/(π D(x)) shared by the two defect families.
fn defect_density<D, Q12, Q22>(q11: f64, q12: Q12, q22: Q22, sb: (f64, f64), d: D) -> impl Fn(f64) -> Mat2 + Send + Sync + 'static
where
    D: Fn(f64) -> f64 + Send + Sync + 'static,
    Q12: Fn(f64) -> f64 + Send + Sync + 'static,
    Q22: Fn(f64) -> f64 + Send + Sync + 'static,
{
    move |x| {
        let dx = d(x);
        if dx == 0.0 {
            return Mat2::ZERO;
        }
        let f = -semi(x, sb) / (PI * dx);
        Mat2::new(f * q11, f * q12(x), f * q22(x))
    }
}

fn def1_parts(l: f64, m: f64, l0: f64, m0: f64) -> (impl Fn(f64) -> f64 + Copy, impl Fn(f64) -> f64 + Copy) {
    let d = move |x: f64| {
        (-2.0 * l0 * m - 2.0 * m0 * l + 2.0 * l * m) * x * x - 2.0 * l0 * m0 * (l - m).powi(2)
            + (2.0 * l0 * l0 * m + 2.0 * l0 * m0 * l + 2.0 * l0 * m0 * m - 2.0 * l0 * l * m + 2.0 * l0 * m * m
                + 2.0 * m0 * m0 * l
                + 2.0 * m0 * l * l
                - 2.0 * m0 * l * m)
                * x
    };
    let q22 = move |x: f64| {
        -((l - l0) * x * x + (l0 * l0 + l0 * m0 - l0 * l + l0 * m - 2.0 * m0 * l) * x
            + m0 * (2.0 * l0 * l - l0 * m + m0 * l))
            / m0
    };
    (d, q22)
}

fn def2_parts(l: f64, m: f64, l0: f64, m0: f64) -> (impl Fn(f64) -> f64 + Copy, impl Fn(f64) -> f64 + Copy) {
    let d = move |x: f64| 2.0 * x * ((l0 + m0) * (l0 + m0 - l + m) - (l0 + m0 - l) * x);
    let q22 = move |x: f64| {
        -((l - l0) * x * x + (l0 * l0 + l0 * m0 - l0 * l + l0 * m - 2.0 * m0 * l) * x + m0 * l * (l0 + m0))
            / (l * m0)
    };
    (d, q22)
}

pub(super) fn matrix_measure(model: &CatalogModel) -> Result<Spectral<Mat2>> {
    let out = match model.family() {
        Family::Mm1Absorbing { .. } => {
            return Err(Error::OutOfDomain("mm1-absorbing has a scalar spectral measure".into()))
        }
        Family::ConstantBilateral { lambda: l, mu: m } => {
            let sb = band(l, m);
            let dens = move |x: f64| {
                let f = 1.0 / (PI * semi(x, sb));
                Mat2::new(f, f * (l + m - x) / (2.0 * m), f * l / m)
            };
            let e = Endpoint::InverseSqrt;
            Spectral { pieces: vec![AcPiece::new(sb.0, sb.1, e, e, dens)], atoms: vec![] }
        }
        Family::SymmetricBilateral { lambda: l, mu: m } => {
            let sb = band(l, m);
            let c = 2.0 * l + 2.0 * m;
            let dens = move |x: f64| {
                let f = semi(x, sb) / (2.0 * PI * m * x * (c - x));
                Mat2::new(f * (l + m), f * (l + m - x), f * (l + m))
            };
            let e = if l == m { Endpoint::InverseSqrt } else { Endpoint::SqrtVanishing };
            let mut atoms = vec![];
            if m > l {
                let w = (m - l) / (2.0 * m);
                atoms.push(Atom { location: 0.0, weight: uniform(w) });
                atoms.push(Atom { location: c, weight: Mat2::new(w, -w, w) });
            }
            Spectral { pieces: vec![AcPiece::new(sb.0, sb.1, e, e, dens)], atoms }
        }
        Family::AlternatingCase1 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            let dens = move |x: f64| {
                let r = if l == m { 1.0 } else { ((2.0 * m - x) / (2.0 * l - x)).max(0.0) };
                let g = x * (c - x);
                if g <= 0.0 || r == 0.0 {
                    return Mat2::ZERO;
                }
                let a = (r / g).sqrt();
                Mat2::new(a / PI, (2.0 * l - x) / (2.0 * PI * l) * a, m / (PI * l) * (1.0 / (r * g)).sqrt())
            };
            let e = Endpoint::InverseSqrt;
            let pieces = if l == m {
                vec![AcPiece::new(0.0, c, e, e, dens)]
            } else {
                let [j1, j2] = lower_pieces(l, m);
                vec![AcPiece::new(j1.0, j1.1, e, e, dens), AcPiece::new(j2.0, j2.1, e, e, dens)]
            };
            Spectral { pieces, atoms: vec![] }
        }
        Family::AlternatingCase2 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            let e = Endpoint::InverseSqrt;
            if l == m {
                let dens = move |x: f64| {
                    let g = (x * (c - x)).max(0.0).sqrt();
                    if g == 0.0 {
                        return Mat2::ZERO;
                    }
                    let f = 1.0 / (PI * g);
                    Mat2::new(f, f * (l + m - x) / (2.0 * m), f)
                };
                Spectral { pieces: vec![AcPiece::new(0.0, c, e, e, dens)], atoms: vec![] }
            } else {
                let dens = move |x: f64| {
                    let p = (x * (2.0 * m - x) * (2.0 * l - x) * (c - x)).max(0.0).sqrt();
                    if p == 0.0 {
                        return Mat2::ZERO;
                    }
                    let u = l + m - x;
                    let d = u.abs() / (PI * p);
                    Mat2::new(d, u.signum() * (u * u + m * m - l * l) / (2.0 * m * PI * p), d)
                };
                let [j1, j2] = lower_pieces(l, m);
                Spectral {
                    pieces: vec![AcPiece::new(j1.0, j1.1, e, e, dens), AcPiece::new(j2.0, j2.1, e, e, dens)],
                    atoms: vec![],
                }
            }
        }
        Family::DefectCase1 { lambda: l, mu: m, lambda0: l0, mu0: m0 } => {
            let sb = band(l, m);
            let (d, q22) = def1_parts(l, m, l0, m0);
            let dens = defect_density(-(l0 * m + l * m0), move |x| -l * (l0 + m0 - x), q22, sb, d);
            let scale = (l + m + l0 + m0).powi(3);
            let piece = AcPiece::new(sb.0, sb.1, d_endpoint(d, sb.0, scale), d_endpoint(d, sb.1, scale), dens);
            Spectral { pieces: vec![piece], atoms: def1_atoms(l, m, l0, m0) }
        }
        Family::DefectCase2 { lambda: l, mu: m, lambda0: l0, mu0: m0 } => {
            let sb = band(l, m);
            let (d, q22) = def2_parts(l, m, l0, m0);
            let dens = defect_density(-(l0 + m0), move |x| -(l0 + m0 - x), q22, sb, d);
            let scale = (l + m + l0 + m0).powi(2);
            let piece = AcPiece::new(sb.0, sb.1, d_endpoint(d, sb.0, scale), d_endpoint(d, sb.1, scale), dens);
            let mut atoms = vec![];
            let k = l0 + m0 - l;
            if m > l {
                atoms.push(Atom { location: 0.0, weight: uniform((m - l) / (l0 + m0 + m - l)) });
            }
            if k.abs() > (l * m).sqrt() * (1.0 + ATOM_TOL) {
                let eta = (l0 + m0) * (l0 + m0 - l + m) / k;
                let w = (k * k - l * m) / (k * (l0 + m0 + m - l));
                let r = m / k;
                atoms.push(Atom { location: eta, weight: Mat2::new(w, -w * r, w * r * r) });
            }
            Spectral { pieces: vec![piece], atoms }
        }
        Family::SplitQueues { lambda: l, mu: m, alpha: a, beta: b } => split_measure(l, m, a, b)?,
    };
    Ok(out)
}

fn def1_atoms(l: f64, m: f64, l0: f64, m0: f64) -> Vec<Atom<Mat2>> {
    let s = l0 * m + m0 * l;
    let d = s - l * m;
    let r = (l0 - m0 - l + m).powi(2) + 4.0 * l0 * m0;
    let sr = r.sqrt();
    let c = l * m * r - d * (s + 2.0 * l * m);
    let e = l + m - l0 - m0;
    let gamma = |sg: f64| (s * (l0 + m0) + (l0 * m - m0 * l) * (m - l) + sg * s * sr) / (2.0 * d);
    let a11 = |sg: f64| (s - 2.0 * l * m + sg * s * e / sr) / (2.0 * d);
    let a12 = |sg: f64| l / (2.0 * d * d) * (l * m * e + sg * (c - d * (s - 2.0 * l * m)) / sr);
    let a22 = |sg: f64| l * l / (2.0 * d.powi(3)) * (-c + sg * e * (c + 2.0 * l * m * d) / sr);
    let mut atoms = Vec::new();
    for sg in [1.0, -1.0] {
        let g = gamma(sg);
        let w11 = a11(-sg);
        if w11 > ATOM_TOL && g > ATOM_TOL {
            atoms.push(Atom { location: g, weight: Mat2::new(w11, a12(sg), a22(-sg)) });
        }
    }
    atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
    atoms
}

/// Relative position of the two bands of the split model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitArrangement {
    /// [σ−,σ+] entirely below [τ−,τ+].
    DisjointSigmaFirst,
    DisjointTauFirst,
    /// [τ−,τ+] inside [σ−,σ+].
    TauInsideSigma,
    SigmaInsideTau,
    /// σ− < τ− < σ+ < τ+.
    OverlapSigmaFirst,
    OverlapTauFirst,
}

impl SplitArrangement {
    pub fn label(self) -> &'static str {
        match self {
            SplitArrangement::DisjointSigmaFirst => "1(a)",
            SplitArrangement::DisjointTauFirst => "1(b)",
            SplitArrangement::TauInsideSigma => "2(a)",
            SplitArrangement::SigmaInsideTau => "2(b)",
            SplitArrangement::OverlapSigmaFirst => "3(a)",
            SplitArrangement::OverlapTauFirst => "3(b)",
        }
    }
}

pub fn split_arrangement(lambda: f64, mu: f64, alpha: f64, beta: f64) -> SplitArrangement {
    let (sm, sp) = band(lambda, mu);
    let (tm, tp) = band(alpha, beta);
    if sp <= tm {
        SplitArrangement::DisjointSigmaFirst
    } else if tp <= sm {
        SplitArrangement::DisjointTauFirst
    } else if sm <= tm && tp <= sp {
        SplitArrangement::TauInsideSigma
    } else if tm <= sm && sp <= tp {
        SplitArrangement::SigmaInsideTau
    } else if sm < tm && tm < sp && sp < tp {
        SplitArrangement::OverlapSigmaFirst
    } else {
        SplitArrangement::OverlapTauFirst
    }
}

#[derive(Debug, Clone, Copy)]
struct SplitCoeffs {
    p: Mat2,
    q: Mat2,
    r: Mat2,
    s: Mat2,
    d: f64,
}

fn split_coeffs(l: f64, m: f64, a: f64, b: f64, z: f64) -> SplitCoeffs {
    let k = (l - m + a - b) * (a * l - b * m);
    let d = 4.0 * m * z * (k - (l - b) * (a - m) * z);
    let g = a * l - b * m;
    let cub = -z * z + (a + b + l + m) * z + (l - m) * (a - b);
    let p11 = ((m - a) * z + g) * cub;
    let q11 = (a - m) * z * z + (-a * a - a * b - a * l + a * m + 2.0 * b * m) * z - (a - b) * g;
    let r11 = (m - a) * z * z + (2.0 * a * l + a * m - b * m - l * m - m * m) * z - (l - m) * g;
    let s11 = (m - a) * z + g;
    let p12 = (a * l - 2.0 * a * b - 2.0 * l * m + 3.0 * b * m) * z * z - (a - 3.0 * b + l - 3.0 * m) * g * z
        + (l - m) * (a - b) * g;
    let q12 = (a * l + b * m - 2.0 * a * b) * z - (a - b) * g;
    let r12 = (a * l + b * m - 2.0 * l * m) * z - (l - m) * g;
    let s12 = g;
    let p22 = ((b - l) * z + g) * cub;
    let q22 = (b - l) * z * z + (-a * b + 2.0 * a * l - b * b + b * l - b * m) * z - (a - b) * g;
    let r22 = (l - b) * z * z + (-a * l + b * l + 2.0 * b * m - l * l - l * m) * z - (l - m) * g;
    let s22 = (b - l) * z + g;
    SplitCoeffs {
        p: Mat2::new(p11, p12, p22),
        q: Mat2::new(q11, q12, q22),
        r: Mat2::new(r11, r12, r22),
        s: Mat2::new(s11, s12, s22),
        d,
    }
}

#[derive(Debug, Clone, Copy)]
enum SplitPiece {
    SigmaOnly(f64),
    TauOnly(f64),
    Overlap,
}

fn split_measure(l: f64, m: f64, a: f64, b: f64) -> Result<Spectral<Mat2>> {
    let sb = band(l, m);
    let tb = band(a, b);
    let mut cuts = vec![sb.0, sb.1, tb.0, tb.1];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let inside = |x: f64, (lo, hi): (f64, f64)| x > lo && x < hi;
    let mut pieces = Vec::new();
    let dfun = move |x: f64| split_coeffs(l, m, a, b, x).d;
    let scale = (l + m + a + b).powi(3);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let kind = match (inside(mid, sb), inside(mid, tb)) {
            (true, true) => SplitPiece::Overlap,
            (true, false) => SplitPiece::SigmaOnly(if mid < tb.0 { 1.0 } else { -1.0 }),
            (false, true) => SplitPiece::TauOnly(if mid < sb.0 { 1.0 } else { -1.0 }),
            (false, false) => continue,
        };
        let dens = move |x: f64| {
            let c = split_coeffs(l, m, a, b, x);
            if c.d == 0.0 {
                return Mat2::ZERO;
            }
            let s1 = semi(x, sb);
            let s2 = semi(x, tb);
            let f1 = ((sb.0 - x) * (sb.1 - x)).max(0.0).sqrt();
            let f2 = ((tb.0 - x) * (tb.1 - x)).max(0.0).sqrt();
            let k = -1.0 / (PI * c.d);
            let ent = |q: f64, r: f64, s: f64| match kind {
                SplitPiece::SigmaOnly(sg) => k * s1 * (q + sg * s * f2),
                SplitPiece::TauOnly(sg) => k * s2 * (r + sg * s * f1),
                SplitPiece::Overlap => k * (q * s1 + r * s2),
            };
            Mat2::new(ent(c.q.m11, c.r.m11, c.s.m11), ent(c.q.m12, c.r.m12, c.s.m12), ent(c.q.m22, c.r.m22, c.s.m22))
        };
        let end = |x: f64| {
            if dfun(x).abs() <= 1e-12 * scale {
                // numerator may vanish with D; read the power off the density
                let w = hi - lo;
                let inward = if x == lo { 1.0 } else { -1.0 };
                let tr = |h: f64| {
                    let d = dens(x + inward * h * w);
                    d.m11 + d.m22
                };
                let power = (tr(1e-10) / tr(1e-8)).ln() / (1e-2f64).ln();
                return if power < -0.25 {
                    Endpoint::InverseSqrt
                } else if power > 0.25 {
                    Endpoint::SqrtVanishing
                } else {
                    Endpoint::Regular
                };
            }
            match kind {
                SplitPiece::Overlap => Endpoint::Regular,
                SplitPiece::SigmaOnly(_) if x == sb.0 || x == sb.1 => Endpoint::SqrtVanishing,
                SplitPiece::TauOnly(_) if x == tb.0 || x == tb.1 => Endpoint::SqrtVanishing,
                _ => Endpoint::Regular,
            }
        };
        let piece = AcPiece::new(lo, hi, end(lo), end(hi), dens);
        pieces.push(if matches!(kind, SplitPiece::Overlap) { piece } else { piece.with_rank_one() });
    }
    Ok(Spectral { pieces, atoms: split_atoms(l, m, a, b)? })
}

fn split_atoms(l: f64, m: f64, a: f64, b: f64) -> Result<Vec<Atom<Mat2>>> {
    let mut atoms = Vec::new();
    if m > l && b > a {
        atoms.push(Atom { location: 0.0, weight: uniform((b - a) * (m - l) / (m * (b - a + m - l))) });
    }
    let c1 = l * (a - m).powi(2) - m * (b - l).powi(2);
    let c2 = b * (a - m).powi(2) - a * (b - l).powi(2);
    let orders = !(a > m && b < l);
    if c1 < 0.0 && c2 > 0.0 && orders {
        let zeta = (a - b + l - m) * (a * l - b * m) / ((l - b) * (a - m));
        if zeta.abs() <= 1e-12 * (l + m + a + b) {
            return Err(Error::DegenerateParameters("the second pole of D collapses onto 0".into()));
        }
        let w = -c1 * c2 / (m * (a - m) * (b - l) * (a - b + l - m));
        let (bl, am) = (b - l, a - m);
        atoms.push(Atom { location: zeta, weight: Mat2::new(w / (bl * bl), w / (am * bl), w / (am * am)) });
    }
    atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
    Ok(atoms)
}

pub(super) fn matrix_closed(model: &CatalogModel, z: f64) -> Mat2 {
    match model.family() {
        Family::Mm1Absorbing { .. } => unreachable!("checked by the caller"),
        Family::ConstantBilateral { lambda: l, mu: m } => {
            let s = s_below(l, m, z);
            Mat2::new(1.0 / s, (-1.0 + (l + m - z) / s) / (2.0 * m), (l / m) / s)
        }
        Family::SymmetricBilateral { lambda: l, mu: m } => {
            let s = s_below(l, m, z);
            let d = 2.0 * m * z * (2.0 * l + 2.0 * m - z);
            let b11 = ((l - m) * (l + m - z) - (l + m) * s) / d;
            let b12 = ((l - z).powi(2) - m * (m + 2.0 * z) - (l + m - z) * s) / d;
            Mat2::new(b11, b12, b11)
        }
        Family::AlternatingCase1 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            let b11 = (-(2.0 * m - z) / (z * (2.0 * l - z) * (c - z))).sqrt();
            let b12 = -(1.0 - (-(2.0 * l - z) * (2.0 * m - z) / (z * (c - z))).sqrt()) / (2.0 * l);
            let b22 = (m / l) * (-(2.0 * l - z) / (z * (2.0 * m - z) * (c - z))).sqrt();
            Mat2::new(b11, b12, b22)
        }
        Family::AlternatingCase2 { lambda: l, mu: m } => {
            let c = 2.0 * l + 2.0 * m;
            let r = (-z * (2.0 * m - z) * (2.0 * l - z) * (c - z)).sqrt();
            let u = l + m - z;
            Mat2::new(u / r, -(1.0 - (u * u + m * m - l * l) / r) / (2.0 * m), u / r)
        }
        Family::DefectCase1 { lambda: l, mu: m, lambda0: l0, mu0: m0 } => {
            let s = s_below(l, m, z);
            let (d, q22) = def1_parts(l, m, l0, m0);
            let p11 = (l0 * m + m0 * l - 2.0 * l * m) * z + (l - m) * (l0 * m - m0 * l);
            let q11 = -(l0 * m + l * m0);
            let p12 = l * (z * z - (l0 + m0 + l + m) * z + (l - m) * (l0 - m0));
            let q12 = -l * (l0 + m0 - z);
            let p22 = ((l0 - l) * z.powi(3)
                + (-l0 * l0 - l0 * m0 - 2.0 * l0 * m + 2.0 * m0 * l + l * l + l * m) * z * z
                + m0 * (l - m) * (l0 * m - m0 * l)
                + (l0 * l0 * l + l0 * l0 * m - l0 * m0 * l + 2.0 * l0 * m0 * m - l0 * l * l + l0 * m * m
                    - m0 * m0 * l
                    - 2.0 * m0 * l * m)
                    * z)
                / m0;
            let dz = d(z);
            Mat2::new((p11 + q11 * s) / dz, (p12 + q12 * s) / dz, (p22 + q22(z) * s) / dz)
        }
        Family::DefectCase2 { lambda: l, mu: m, lambda0: l0, mu0: m0 } => {
            let s = s_below(l, m, z);
            let (d, q22) = def2_parts(l, m, l0, m0);
            let p11 = (l0 + m0 - 2.0 * l) * z + (l - m) * (l0 + m0);
            let q11 = -(l0 + m0);
            let p12 = z * z - (l0 + m0 + l + m) * z + (l - m) * (l0 + m0);
            let q12 = -(l0 + m0 - z);
            let p22 = ((l0 - l) * z.powi(3)
                + (-l0 * l0 - l0 * m0 - 2.0 * l0 * m + 2.0 * m0 * l + l * l + l * m) * z * z
                + m0 * l * (l - m) * (l0 + m0)
                + (l0 * l0 * l + l0 * l0 * m + l0 * m0 * m - l0 * l * l + l0 * m * m - m0 * m0 * l
                    - 2.0 * m0 * l * l)
                    * z)
                / (l * m0);
            let dz = d(z);
            Mat2::new((p11 + q11 * s) / dz, (p12 + q12 * s) / dz, (p22 + q22(z) * s) / dz)
        }
        Family::SplitQueues { lambda: l, mu: m, alpha: a, beta: b } => {
            let c = split_coeffs(l, m, a, b, z);
            let s1 = s_below(l, m, z);
            let s2 = s_below(a, b, z);
            let ent = |p: f64, q: f64, r: f64, s: f64| (p + q * s1 + r * s2 + s * s1 * s2) / c.d;
            Mat2::new(
                ent(c.p.m11, c.q.m11, c.r.m11, c.s.m11),
                ent(c.p.m12, c.q.m12, c.r.m12, c.s.m12),
                ent(c.p.m22, c.q.m22, c.r.m22, c.s.m22),
            )
        }
    }
}

/// Transforms of the split model written without rationalising, with
/// Σ1 = sqrt((λ+μ−z)²−4λμ) and Σ2 = sqrt((α+β−z)²−4αβ). Stays finite when
/// α = μ and β = λ, where the catalog model itself is rejected.
pub fn split_stieltjes_unrationalized(lambda: f64, mu: f64, alpha: f64, beta: f64, z: f64) -> Mat2 {
    let (l, m, a, b) = (lambda, mu, alpha, beta);
    let s1 = s_below(l, m, z);
    let s2 = s_below(a, b, z);
    let g = a * l - b * m;
    let d1 = a * s1 + m * s2 + (m - a) * z + g;
    let d2 = b * s1 + l * s2 + (b - l) * z + g;
    Mat2::new(2.0 * a / d1, (b / m) * (l + m - z - s1) / d2, (b / m) * 2.0 * l / d2)
}
