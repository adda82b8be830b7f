//! Recurrence and closed-form evaluation of the polynomial families Q_n,
//! Q_n^1, Q_n^2 and their duals H_n.
//!
//! Recurrences march outward from the initial pair at indices (−1, 0).
//! Values grow geometrically off the spectral support, so indices are
//! limited to |n| <= [`MAX_INDEX`].

use crate::error::{Error, Result};
use crate::model::{CatalogModel, Domain, Family, HalfLineFactor, Side};
use crate::specialfns::{chebyshev_t, chebyshev_u};

pub const MAX_INDEX: i64 = 64;

/// Which polynomial sequence is meant: the single half-line family or one
/// of the two bilateral families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Scalar,
    One,
    Two,
}

impl Component {
    pub fn from_alpha(alpha: u8) -> Result<Self> {
        match alpha {
            1 => Ok(Component::One),
            2 => Ok(Component::Two),
            _ => Err(Error::OutOfDomain(format!("alpha must be 1 or 2, got {alpha}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Recurrence,
    ClosedForm,
}

fn check_index(n: i64) -> Result<()> {
    if n.abs() > MAX_INDEX {
        return Err(Error::OutOfDomain(format!("|n| = {} exceeds the index window {MAX_INDEX}", n.abs())));
    }
    Ok(())
}

/// Q_0, ..., Q_{n_hi} of a half-line chain at x.
pub fn q_halfline_range(factor: &HalfLineFactor, n_hi: i64, x: f64) -> Result<Vec<f64>> {
    check_index(n_hi)?;
    let mut out = Vec::with_capacity(n_hi.max(0) as usize + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push(cur);
    for k in 0..n_hi {
        let (l, m) = factor.rates_at(k)?;
        let next = ((l + m - x) * cur - m * prev) / l;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    Ok(out)
}

pub fn eval_q_halfline(factor: &HalfLineFactor, n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::OutOfDomain(format!("half-line index {n} is negative")));
    }
    Ok(*q_halfline_range(factor, n, x)?.last().unwrap())
}

fn bilateral_rates(model: &CatalogModel, n: i64) -> Result<(f64, f64)> {
    if model.domain() != Domain::Bilateral {
        return Err(Error::OutOfDomain(format!("{} is not bilateral", model.kind())));
    }
    model.rates_at(n)
}

/// (Q_n^1(x), Q_n^2(x)) for n in `n_lo..=n_hi`.
pub fn q_bilateral_range(model: &CatalogModel, n_lo: i64, n_hi: i64, x: f64) -> Result<Vec<[f64; 2]>> {
    check_index(n_lo)?;
    check_index(n_hi)?;
    bilateral_rates(model, 0)?;
    let lo = n_lo.min(-1);
    let hi = n_hi.max(0);
    let len = (hi - lo + 1) as usize;
    let mut v = vec![[0.0; 2]; len];
    let at = |n: i64| (n - lo) as usize;
    v[at(-1)] = [0.0, 1.0];
    v[at(0)] = [1.0, 0.0];
    for k in 0..hi {
        let (l, m) = model.rates_at(k)?;
        let (a, b) = (v[at(k - 1)], v[at(k)]);
        v[at(k + 1)] = [((l + m - x) * b[0] - m * a[0]) / l, ((l + m - x) * b[1] - m * a[1]) / l];
    }
    for k in (lo + 1..=-1).rev() {
        let (l, m) = model.rates_at(k)?;
        let (up, cur) = (v[at(k + 1)], v[at(k)]);
        v[at(k - 1)] = [((l + m - x) * cur[0] - l * up[0]) / m, ((l + m - x) * cur[1] - l * up[1]) / m];
    }
    Ok(v[at(n_lo)..=at(n_hi)].to_vec())
}

pub fn eval_q_bilateral(model: &CatalogModel, alpha: u8, n: i64, x: f64) -> Result<f64> {
    let c = Component::from_alpha(alpha)?;
    let pair = q_bilateral_range(model, n, n, x)?[0];
    Ok(if c == Component::One { pair[0] } else { pair[1] })
}

/// H_0 = μ_0 and H_n = λ_{n-1}π_{n-1}(Q_n − Q_{n-1}) for a half-line chain.
pub fn eval_dual_h_halfline(factor: &HalfLineFactor, n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::OutOfDomain(format!("half-line index {n} is negative")));
    }
    if n == 0 {
        return Ok(factor.rates_at(0)?.1);
    }
    let q = q_halfline_range(factor, n, x)?;
    let lam = factor.rates_at(n - 1)?.0;
    let pi = factor.potential_coefficient(n - 1)?;
    Ok(lam * pi * (q[n as usize] - q[n as usize - 1]))
}

/// Dual pair (H_n^1, H_n^2) with H_n^α = λ_{n-1}π_{n-1}(Q_n^α − Q_{n-1}^α).
pub fn dual_h_pair(model: &CatalogModel, n: i64, x: f64) -> Result<[f64; 2]> {
    let q = q_bilateral_range(model, n - 1, n, x)?;
    let lam = bilateral_rates(model, n - 1)?.0;
    let pi = model.potential_coefficient(n - 1)?;
    Ok([lam * pi * (q[1][0] - q[0][0]), lam * pi * (q[1][1] - q[0][1])])
}

pub fn eval_dual_h(model: &CatalogModel, component: Component, n: i64, x: f64) -> Result<f64> {
    match (model.domain(), component) {
        (Domain::HalfLine, Component::Scalar) => eval_dual_h_halfline(&model.half_line(Side::Plus)?, n, x),
        (Domain::Bilateral, Component::One) => Ok(dual_h_pair(model, n, x)?[0]),
        (Domain::Bilateral, Component::Two) => Ok(dual_h_pair(model, n, x)?[1]),
        _ => Err(Error::OutOfDomain(format!("component {component:?} does not apply to {}", model.kind()))),
    }
}

/// Published closed form of Q_n (half-line) or Q_n^α (bilateral).
pub fn eval_closed_form_q(model: &CatalogModel, component: Component, n: i64, x: f64) -> Result<f64> {
    check_index(n)?;
    let u = chebyshev_u;
    match (model.family(), component) {
        (Family::Mm1Absorbing { lambda, mu }, Component::Scalar) => {
            if n < 0 {
                return Err(Error::OutOfDomain(format!("half-line index {n} is negative")));
            }
            let y = (lambda + mu - x) / (2.0 * (lambda * mu).sqrt());
            Ok((mu / lambda).powf(n as f64 / 2.0) * u(n, y))
        }
        (Family::Mm1Absorbing { .. }, _) | (_, Component::Scalar) => Err(Error::OutOfDomain(format!(
            "component {component:?} does not apply to {}",
            model.kind()
        ))),
        (family, c) => {
            let one = c == Component::One;
            Ok(bilateral_closed(family, one, n, x))
        }
    }
}

/// Chebyshev-type expression shared by the M/M/1-like halves:
/// n >= 0 side with ratio r = μ/λ, n < 0 side with its own ratio and variable.
fn mm1_half(one: bool, n: i64, r_pos: f64, y_pos: f64, r_neg: f64, y_neg: f64) -> f64 {
    let u = chebyshev_u;
    if n >= 0 {
        let nf = n as f64;
        if one {
            r_pos.powf(nf / 2.0) * u(n, y_pos)
        } else {
            -r_pos.powf((nf + 1.0) / 2.0) * u(n - 1, y_pos)
        }
    } else {
        let k = -n - 1;
        let kf = k as f64;
        if one {
            -r_neg.powf((kf + 1.0) / 2.0) * u(k - 1, y_neg)
        } else {
            r_neg.powf(kf / 2.0) * u(k, y_neg)
        }
    }
}

fn bilateral_closed(family: Family, one: bool, n: i64, x: f64) -> f64 {
    let u = chebyshev_u;
    let yv = |l: f64, m: f64| (l + m - x) / (2.0 * (l * m).sqrt());
    match family {
        Family::ConstantBilateral { lambda: l, mu: m } => mm1_half(one, n, m / l, yv(l, m), l / m, yv(l, m)),
        Family::SymmetricBilateral { lambda: l, mu: m } => mm1_half(one, n, m / l, yv(l, m), m / l, yv(l, m)),
        Family::SplitQueues { lambda: l, mu: m, alpha: a, beta: b } => {
            mm1_half(one, n, m / l, yv(l, m), b / a, yv(a, b))
        }
        Family::DefectCase1 { lambda: l, mu: m, lambda0: l0, mu0: m0 }
        | Family::DefectCase2 { lambda: l, mu: m, lambda0: l0, mu0: m0 } => {
            let y = yv(l, m);
            if n >= 0 {
                let nf = n as f64;
                if one {
                    (m / l).powf(nf / 2.0)
                        * (2.0 * (l0 - l) / l0 * chebyshev_t(n, y)
                            + (2.0 * l - l0) / l0 * u(n, y)
                            + (l / m).sqrt() * (l0 + m0 - l - m) / l0 * u(n - 1, y))
                } else {
                    -(m0 / l0) * (m / l).powf((nf - 1.0) / 2.0) * u(n - 1, y)
                }
            } else {
                let r = if matches!(family, Family::DefectCase1 { .. }) { l / m } else { m / l };
                mm1_half(one, n, 0.0, 0.0, r, y)
            }
        }
        Family::AlternatingCase1 { lambda: l, mu: m } => alt1_closed(l, m, one, n, x),
        Family::AlternatingCase2 { lambda: l, mu: m } => {
            if n >= 0 {
                alt2_closed_pos(l, m, one, n, x)
            } else {
                alt2_closed_pos(l, m, !one, -n - 1, x)
            }
        }
        Family::Mm1Absorbing { .. } => unreachable!("half-line family"),
    }
}

fn alt1_closed(l: f64, m: f64, one: bool, n: i64, x: f64) -> f64 {
    let u = chebyshev_u;
    let y = -1.0 + (2.0 * l - x) * (2.0 * m - x) / (2.0 * l * m);
    let even = n.rem_euclid(2) == 0;
    match (one, n >= 0, even) {
        (true, true, true) => {
            let k = n / 2;
            if k == 0 {
                1.0
            } else {
                (2.0 * y + 1.0) * u(k - 1, y) - u(k - 2, y)
            }
        }
        (true, true, false) => -(x - 2.0 * l) / l * u((n - 1) / 2, y),
        (true, false, true) => {
            let k = (-n - 2) / 2;
            -(2.0 * y + 1.0) * u(k - 1, y) + u(k - 2, y)
        }
        (true, false, false) => (x - 2.0 * l) / l * u((-n - 1) / 2 - 1, y),
        (false, true, true) => (x - 2.0 * m) / m * u(n / 2 - 1, y),
        (false, true, false) => {
            if n == 1 {
                -1.0
            } else {
                let k = (n - 1) / 2;
                -(2.0 * y + 1.0) * u(k - 1, y) + u(k - 2, y)
            }
        }
        (false, false, true) => -(x - 2.0 * m) / m * u(-n / 2 - 1, y),
        (false, false, false) => {
            let k = (-n - 1) / 2;
            if k == 0 {
                1.0
            } else {
                (2.0 * y + 1.0) * u(k - 1, y) - u(k - 2, y)
            }
        }
    }
}

fn alt2_closed_pos(l: f64, m: f64, one: bool, n: i64, x: f64) -> f64 {
    let u = chebyshev_u;
    let y = ((l + m - x).powi(2) - l * l - m * m) / (2.0 * l * m);
    if !one && n == 1 {
        return -m / l;
    }
    let even = n % 2 == 0;
    match (one, even) {
        (true, true) => {
            let k = n / 2;
            if k == 0 {
                1.0
            } else {
                (2.0 * y + m / l) * u(k - 1, y) - u(k - 2, y)
            }
        }
        (true, false) => (l + m - x) / l * u((n - 1) / 2, y),
        (false, true) => (x - l - m) / l * u(n / 2 - 1, y),
        (false, false) => {
            let k = (n - 1) / 2;
            -(m / l) * ((2.0 * y + l / m) * u(k - 1, y) - u(k - 2, y))
        }
    }
}

/// A model's polynomial sequences evaluated by a fixed method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialFamily {
    pub model: CatalogModel,
    pub method: Method,
}

impl PolynomialFamily {
    pub fn new(model: CatalogModel, method: Method) -> Self {
        Self { model, method }
    }

    pub fn eval(&self, component: Component, n: i64, x: f64) -> Result<f64> {
        match self.method {
            Method::ClosedForm => eval_closed_form_q(&self.model, component, n, x),
            Method::Recurrence => match (self.model.domain(), component) {
                (Domain::HalfLine, Component::Scalar) => eval_q_halfline(&self.model.half_line(Side::Plus)?, n, x),
                (Domain::Bilateral, Component::One) => eval_q_bilateral(&self.model, 1, n, x),
                (Domain::Bilateral, Component::Two) => eval_q_bilateral(&self.model, 2, n, x),
                _ => Err(Error::OutOfDomain(format!(
                    "component {component:?} does not apply to {}",
                    self.model.kind()
                ))),
            },
        }
    }
}

/// Period of the rates away from state 0.
fn rate_period(model: &CatalogModel) -> i64 {
    match model.family() {
        Family::AlternatingCase1 { .. } | Family::AlternatingCase2 { .. } => 2,
        _ => 1,
    }
}

/// Eigenvalues and eigenvector of the smaller one for the one-period
/// transfer matrix on one side, when x lies off that side's band.
/// `step(n)` is the 2×2 map used at state n.
fn decaying_direction(steps: &[[[f64; 2]; 2]]) -> Option<[f64; 2]> {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for t in steps {
        m = [
            [t[0][0] * m[0][0] + t[0][1] * m[1][0], t[0][0] * m[0][1] + t[0][1] * m[1][1]],
            [t[1][0] * m[0][0] + t[1][1] * m[1][0], t[1][0] * m[0][1] + t[1][1] * m[1][1]],
        ];
    }
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let big = 0.5 * (tr + tr.signum() * sq);
    let small = det / big;
    if big.abs() <= small.abs() * (1.0 + 1e-9) {
        return None;
    }
    // (M − small·I) e = 0
    let (p, q) = (m[0][0] - small, m[0][1]);
    let (r, s) = (m[1][0], m[1][1] - small);
    let e = if p.abs() + q.abs() >= r.abs() + s.abs() { [-q, p] } else { [-s, r] };
    Some(e)
}

/// Scale s minimising |s·(g0, g1) − (a, b)|.
fn fit(g0: f64, g1: f64, a: f64, b: f64) -> f64 {
    let nrm = g0.abs().max(g1.abs());
    let (u, v) = (g0 / nrm, g1 / nrm);
    (u * a + v * b) / (u * u + v * v) / nrm
}

/// φ_n for n in `lo..=hi`, the solution of −xφ = Aφ through
/// (φ_0, φ_{-1}) = `dir` (φ_{-1} = 0 on the half-line).
///
/// On a side where x lies off the band the solution is taken to be the one
/// decaying along that side, computed inward from the exact asymptotic
/// direction. This is the eigenvector at an atom, and the only surviving
/// combination where the spectral density has rank one; the outward
/// recurrence would lose it to cancellation against the growing solution.
pub fn solution_profile(model: &CatalogModel, x: f64, dir: [f64; 2], lo: i64, hi: i64) -> Result<Vec<f64>> {
    check_index(lo)?;
    check_index(hi)?;
    let half = model.domain() == Domain::HalfLine;
    let p = rate_period(model);
    let [a, b] = if half { [dir[0], 0.0] } else { dir };
    let mut out = vec![0.0; (hi - lo + 1) as usize];
    let mut put = |n: i64, v: f64| {
        if n >= lo && n <= hi {
            out[(n - lo) as usize] = v;
        }
    };

    // n >= 0: maps (φ_n, φ_{n-1}) -> (φ_{n+1}, φ_n) for n >= 1
    let fwd = |n: i64| -> Result<[[f64; 2]; 2]> {
        let (l, m) = model.rates_at(n)?;
        Ok([[(l + m - x) / l, -m / l], [1.0, 0.0]])
    };
    let steps = (1..=p).map(fwd).collect::<Result<Vec<_>>>()?;
    let (l0, m0) = model.rates_at(0)?;
    let phi1 = ((l0 + m0 - x) * a - m0 * b) / l0;
    if hi >= 0 {
        match decaying_direction(&steps) {
            Some(e) => {
                // e ∝ (φ_{1+kP}, φ_{kP}); run the recurrence inward from there
                let top = (MAX_INDEX + p - 1) / p * p;
                let mut vals = vec![0.0; top as usize + 2];
                vals[top as usize + 1] = e[0];
                vals[top as usize] = e[1];
                for n in (1..=top).rev() {
                    let (l, m) = model.rates_at(n)?;
                    let v = ((l + m - x) * vals[n as usize] - l * vals[n as usize + 1]) / m;
                    vals[n as usize - 1] = v;
                    if v.abs() > 1e200 {
                        for w in &mut vals[n as usize - 1..] {
                            *w *= 1e-200;
                        }
                    }
                }
                let s = fit(vals[0], vals[1], a, phi1);
                for n in 0..=hi {
                    put(n, s * vals[n as usize]);
                }
            }
            None => {
                let (mut prev, mut cur) = (b, a);
                put(0, a);
                for n in 0..hi {
                    let (l, m) = model.rates_at(n)?;
                    let next = ((l + m - x) * cur - m * prev) / l;
                    prev = cur;
                    cur = next;
                    put(n + 1, cur);
                }
            }
        }
    }
    if lo < 0 && !half {
        // n <= -1: maps (φ_n, φ_{n+1}) -> (φ_{n-1}, φ_n)
        let bwd = |n: i64| -> Result<[[f64; 2]; 2]> {
            let (l, m) = model.rates_at(n)?;
            Ok([[(l + m - x) / m, -l / m], [1.0, 0.0]])
        };
        let steps = (1..=p).map(|k| bwd(-k)).collect::<Result<Vec<_>>>()?;
        let (lm, mm) = model.rates_at(-1)?;
        let phim2 = ((lm + mm - x) * b - lm * a) / mm;
        match decaying_direction(&steps) {
            Some(e) => {
                // e ∝ (φ_{-1-kP}, φ_{-kP})
                let depth = ((MAX_INDEX + p - 1) / p * p) as usize;
                // vals[j] holds φ_{-j}
                let mut vals = vec![0.0; depth + 2];
                vals[depth + 1] = e[0];
                vals[depth] = e[1];
                for j in (1..=depth).rev() {
                    let n = -(j as i64);
                    let (l, m) = model.rates_at(n)?;
                    let v = ((l + m - x) * vals[j] - m * vals[j + 1]) / l;
                    vals[j - 1] = v;
                    if v.abs() > 1e200 {
                        for w in &mut vals[j - 1..] {
                            *w *= 1e-200;
                        }
                    }
                }
                let s = fit(vals[1], vals[2], b, phim2);
                for n in lo..=-1 {
                    put(n, s * vals[(-n) as usize]);
                }
            }
            None => {
                let (mut up, mut cur) = (a, b);
                put(-1, b);
                for n in (lo + 1..=-1).rev() {
                    let (l, m) = model.rates_at(n)?;
                    let next = ((l + m - x) * cur - l * up) / m;
                    up = cur;
                    cur = next;
                    put(n - 1, cur);
                }
            }
        }
    }
    Ok(out)
}
