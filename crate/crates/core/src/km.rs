//! Karlin-McGregor transition probabilities and probability currents.
//!
//! Every entry is computed twice, with `nodes_per_piece` and twice as many
//! nodes per absolutely continuous piece; the difference is the reported
//! error estimate and the finer value is returned.

use crate::error::{Error, Result};
use crate::model::{CatalogModel, Domain, Family, Side};
use crate::polynomials::{solution_profile, q_bilateral_range, q_halfline_range, MAX_INDEX};
use crate::specialfns::bessel_i_scaled;
use crate::spectral::{AcPiece, Spectral, SpectralObject, Weight};

/// Largest node-doubling discrepancy accepted before giving up.
pub const CONVERGENCE_TOL: f64 = 1e-6;
pub const DEFAULT_NODES_PER_PIECE: usize = 512;
pub const MIN_NODES_PER_PIECE: usize = 16;
pub const NODES_ENV: &str = "KM_SPECTRAL_NODES";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub nodes_per_piece: usize,
    /// Spread quadrature nodes over the rayon pool when the `parallel`
    /// feature is enabled. Results do not depend on this flag.
    pub parallel: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes_per_piece: DEFAULT_NODES_PER_PIECE, parallel: true }
    }
}

impl QuadratureConfig {
    pub fn new(nodes_per_piece: usize) -> Result<Self> {
        if nodes_per_piece < MIN_NODES_PER_PIECE {
            return Err(Error::OutOfDomain(format!(
                "nodes_per_piece must be at least {MIN_NODES_PER_PIECE}, got {nodes_per_piece}"
            )));
        }
        Ok(Self { nodes_per_piece, parallel: true })
    }

    /// Default configuration with the node count taken from
    /// `KM_SPECTRAL_NODES` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(NODES_ENV) {
            Ok(v) => {
                let n = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::OutOfDomain(format!("{NODES_ENV}={v} is not a node count")))?;
                Self::new(n)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn sequential(self) -> Self {
        Self { parallel: false, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionMethod {
    Quadrature,
    ClosedFormBessel,
    Oracle,
}

impl TransitionMethod {
    pub fn name(self) -> &'static str {
        match self {
            TransitionMethod::Quadrature => "quadrature",
            TransitionMethod::ClosedFormBessel => "closed-form-bessel",
            TransitionMethod::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionResult {
    pub value: f64,
    pub method: TransitionMethod,
    pub err_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentMethod {
    Direct,
    Dual,
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfDomain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

fn check_state(model: &CatalogModel, n: i64) -> Result<()> {
    if n.abs() > MAX_INDEX {
        return Err(Error::OutOfDomain(format!("|{n}| exceeds the index window {MAX_INDEX}")));
    }
    if model.domain() == Domain::HalfLine && n < 0 {
        return Err(Error::OutOfDomain(format!("state {n} is below a half-line domain")));
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn map_points<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_points<T, R, F>(items: &[T], _parallel: bool, f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// What is paired with Q_i at each quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    Transition,
    Dual,
}

/// Polynomial pairs (Q^1_n, Q^2_n) for n in `lo..=hi`; half-line chains
/// carry (Q_n, 0).
fn poly_pairs(model: &CatalogModel, lo: i64, hi: i64, x: f64) -> Result<Vec<[f64; 2]>> {
    match model.domain() {
        Domain::Bilateral => q_bilateral_range(model, lo, hi, x),
        Domain::HalfLine => {
            let q = q_halfline_range(&model.half_line(Side::Plus)?, hi, x)?;
            Ok(q[lo as usize..].iter().map(|&v| [v, 0.0]).collect())
        }
    }
}

/// One pass over the discretised measure: entry k of the result is
/// Σ_x e^{-xt} W(x)·bilinear(q_i, v_{n_lo+k}) with v = Q or the dual H.
fn km_pass<W: Weight>(
    model: &CatalogModel,
    spectral: &Spectral<W>,
    i: i64,
    t: f64,
    n_lo: i64,
    n_hi: i64,
    kernel: Kernel,
    nodes: usize,
    parallel: bool,
) -> Result<Vec<f64>> {
    let half = model.domain() == Domain::HalfLine;
    let need_lo = if kernel == Kernel::Dual && !(half && n_lo == 0) { n_lo - 1 } else { n_lo };
    let lo = i.min(need_lo);
    let hi = i.max(n_hi);
    let len = (n_hi - n_lo + 1) as usize;
    // λ_{n-1}π_{n-1} for the dual polynomials
    let mut dual_scale = vec![0.0; len];
    if kernel == Kernel::Dual {
        for (k, s) in dual_scale.iter_mut().enumerate() {
            let n = n_lo + k as i64;
            if !(half && n == 0) {
                *s = model.rates_at(n - 1)?.0 * model.potential_coefficient(n - 1)?;
            }
        }
    }
    let mu0 = model.rates_at(0)?.1;
    let x_min = spectral.support_min();
    let kernel_vec = |k: usize, at: &dyn Fn(i64) -> [f64; 2]| -> [f64; 2] {
        let n = n_lo + k as i64;
        match kernel {
            Kernel::Transition => at(n),
            Kernel::Dual if half && n == 0 => [mu0, 0.0],
            Kernel::Dual => {
                let (a, b) = (at(n), at(n - 1));
                [dual_scale[k] * (a[0] - b[0]), dual_scale[k] * (a[1] - b[1])]
            }
        }
    };
    let points = spectral.discretize_ac(nodes);
    let contributions = map_points(&points, parallel, |&(x, w, rank_one)| -> Result<Vec<f64>> {
        let damp = (-(x - x_min) * t).exp();
        if rank_one {
            let (c, dir) = w.rank_one();
            let phi = solution_profile(model, x, dir, lo, hi)?;
            let at = |n: i64| [phi[(n - lo) as usize], 0.0];
            let phi_i = at(i)[0];
            return Ok((0..len).map(|k| damp * c * phi_i * kernel_vec(k, &at)[0]).collect());
        }
        let q = poly_pairs(model, lo, hi, x)?;
        let at = |n: i64| q[(n - lo) as usize];
        let qi = at(i);
        Ok((0..len).map(|k| damp * w.bilinear(qi, kernel_vec(k, &at))).collect())
    });
    let mut sum = vec![0.0; len];
    for c in contributions {
        for (s, v) in sum.iter_mut().zip(c?) {
            *s += v;
        }
    }
    // atoms: rank-one weights c·v vᵀ paired with the eigenvector
    for atom in &spectral.atoms {
        let (c, dir) = atom.weight.rank_one();
        let phi = solution_profile(model, atom.location, dir, lo, hi)?;
        let at = |n: i64| [phi[(n - lo) as usize], 0.0];
        let damp = (-(atom.location - x_min) * t).exp();
        let phi_i = at(i)[0];
        for (k, s) in sum.iter_mut().enumerate() {
            *s += damp * c * phi_i * kernel_vec(k, &at)[0];
        }
    }
    let scale = (-x_min * t).exp();
    for s in &mut sum {
        *s *= scale;
    }
    Ok(sum)
}

fn km_doubled(
    model: &CatalogModel,
    i: i64,
    t: f64,
    n_lo: i64,
    n_hi: i64,
    kernel: Kernel,
    config: &QuadratureConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if config.nodes_per_piece < MIN_NODES_PER_PIECE {
        return Err(Error::OutOfDomain(format!("nodes_per_piece must be at least {MIN_NODES_PER_PIECE}")));
    }
    let n = config.nodes_per_piece;
    let run = |nodes: usize| match SpectralObject::of(model)? {
        SpectralObject::Measure(m) => km_pass(model, &m, i, t, n_lo, n_hi, kernel, nodes, config.parallel),
        SpectralObject::Matrix(m) => km_pass(model, &m.measure, i, t, n_lo, n_hi, kernel, nodes, config.parallel),
    };
    let coarse = run(n)?;
    let fine = run(2 * n)?;
    Ok((coarse, fine))
}

/// P_{i,n}(t) for n in `n_lo..=n_hi`, sharing one pass over the nodes.
pub fn transition_row(
    model: &CatalogModel,
    i: i64,
    t: f64,
    n_lo: i64,
    n_hi: i64,
    config: &QuadratureConfig,
) -> Result<Vec<TransitionResult>> {
    check_time(t)?;
    check_state(model, i)?;
    check_state(model, n_lo)?;
    check_state(model, n_hi)?;
    if n_lo > n_hi {
        return Err(Error::OutOfDomain(format!("empty range {n_lo}..={n_hi}")));
    }
    let pis = model.potentials().range(n_lo, n_hi)?;
    let (coarse, fine) = km_doubled(model, i, t, n_lo, n_hi, Kernel::Transition, config)?;
    let mut out = Vec::with_capacity(pis.len());
    let mut worst = 0.0f64;
    for ((pi, c), f) in pis.iter().zip(coarse).zip(fine) {
        let err = (pi * (f - c)).abs();
        worst = worst.max(err);
        out.push(TransitionResult { value: pi * f, method: TransitionMethod::Quadrature, err_estimate: err });
    }
    if !(worst <= CONVERGENCE_TOL) {
        return Err(Error::NonConvergedQuadrature { delta: worst });
    }
    Ok(out)
}

/// P_ij(t) = π_j ∫ e^{-xt} q_iᵀ dΨ(x) q_j.
pub fn transition_probability(
    model: &CatalogModel,
    i: i64,
    j: i64,
    t: f64,
    config: &QuadratureConfig,
) -> Result<TransitionResult> {
    Ok(transition_row(model, i, t, j, j, config)?[0])
}

/// Bessel-function expressions available for the constant-rate models.
pub fn closed_form_transition(model: &CatalogModel, i: i64, j: i64, t: f64) -> Result<TransitionResult> {
    check_time(t)?;
    let (l, m, absorbing) = match model.family() {
        Family::Mm1Absorbing { lambda, mu } => (lambda, mu, true),
        Family::ConstantBilateral { lambda, mu } => (lambda, mu, false),
        _ => return Err(Error::NoClosedForm("Bessel closed forms exist for mm1-absorbing and constant-bilateral only")),
    };
    if absorbing && (i < 0 || j < 0) {
        return Err(Error::OutOfDomain("states of a half-line model are nonnegative".into()));
    }
    let z = 2.0 * (l * m).sqrt() * t;
    // e^{-(λ+μ)t} I_k(z) = e^{-(√λ−√μ)²t} e^{-z} I_k(z)
    let damp = (-(l.sqrt() - m.sqrt()).powi(2) * t).exp();
    let ratio = (l / m).powf(0.5 * (j - i) as f64);
    let mut bracket = bessel_i_scaled(j - i, z);
    if absorbing {
        bracket -= bessel_i_scaled(i + j + 2, z);
    }
    Ok(TransitionResult { value: damp * ratio * bracket, method: TransitionMethod::ClosedFormBessel, err_estimate: 0.0 })
}

/// Ω_{j,n}(t), the net flux from n−1 to n at time t when started at j.
pub fn probability_current(
    model: &CatalogModel,
    j: i64,
    n: i64,
    t: f64,
    method: CurrentMethod,
    config: &QuadratureConfig,
) -> Result<f64> {
    Ok(current_row(model, j, n, n, t, method, config)?[0])
}

/// Ω_{j,n}(t) for n in `n_lo..=n_hi`.
pub fn current_row(
    model: &CatalogModel,
    j: i64,
    n_lo: i64,
    n_hi: i64,
    t: f64,
    method: CurrentMethod,
    config: &QuadratureConfig,
) -> Result<Vec<f64>> {
    check_time(t)?;
    check_state(model, j)?;
    check_state(model, n_lo)?;
    check_state(model, n_hi)?;
    if n_lo > n_hi {
        return Err(Error::OutOfDomain(format!("empty range {n_lo}..={n_hi}")));
    }
    let half = model.domain() == Domain::HalfLine;
    match method {
        CurrentMethod::Direct => {
            let lo = if half { n_lo.max(1) - 1 } else { n_lo - 1 };
            check_state(model, lo)?;
            let row = transition_row(model, j, t, lo, n_hi, config)?;
            let p = |n: i64| row[(n - lo) as usize].value;
            (n_lo..=n_hi)
                .map(|n| {
                    let inflow = if half && n == 0 { 0.0 } else { model.rates_at(n - 1)?.0 * p(n - 1) };
                    Ok(inflow - model.rates_at(n)?.1 * p(n))
                })
                .collect()
        }
        CurrentMethod::Dual => {
            if !half || n_lo > 0 {
                check_state(model, n_lo - 1)?;
            }
            let (coarse, fine) = km_doubled(model, j, t, n_lo, n_hi, Kernel::Dual, config)?;
            let worst = coarse.iter().zip(&fine).map(|(c, f)| (f - c).abs()).fold(0.0, f64::max);
            if !(worst <= CONVERGENCE_TOL) {
                return Err(Error::NonConvergedQuadrature { delta: worst });
            }
            Ok(fine.into_iter().map(|v| -v).collect())
        }
    }
}

/// ∫_a^b f(x) dψ(x) over one absolutely continuous piece, with the same
/// node-doubling check as the transition probabilities.
pub fn integrate_piece<W: Weight>(piece: &AcPiece<W>, f: impl Fn(f64) -> f64, config: &QuadratureConfig) -> Result<W> {
    let run = |n: usize| piece.nodes(n).fold(W::ZERO, |acc, (x, w)| acc.plus(w.scale(f(x))));
    let coarse = run(config.nodes_per_piece);
    let fine = run(2 * config.nodes_per_piece);
    let delta = fine.plus(coarse.scale(-1.0)).max_abs();
    if !(delta <= CONVERGENCE_TOL) {
        return Err(Error::NonConvergedQuadrature { delta });
    }
    Ok(fine)
}
