//! Reference transition probabilities from the generator truncated to a
//! finite window, computed by uniformization.
//!
//! States outside the window are dropped, so boundary rows leak mass. The
//! truncated and untruncated chains agree until the first exit from the
//! window, which needs more jumps than the distance to the boundary; that
//! Poisson tail is the leakage bound.

use crate::error::{Error, Result};
use crate::km::{TransitionMethod, TransitionResult};
use crate::model::{CatalogModel, Domain};

pub const DEFAULT_WINDOW_CAP: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Tridiagonal generator restricted to `n_lo..=n_hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedGenerator {
    pub n_lo: i64,
    pub n_hi: i64,
    /// μ_n, the rate from n to n−1 (zero in the first row).
    pub lower: Vec<f64>,
    /// −(λ_n + μ_n).
    pub diag: Vec<f64>,
    /// λ_n, the rate from n to n+1 (zero in the last row).
    pub upper: Vec<f64>,
    pub q_max: f64,
}

impl TruncatedGenerator {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn entry(&self, row: i64, col: i64) -> f64 {
        if row < self.n_lo || row > self.n_hi || col < self.n_lo || col > self.n_hi {
            return 0.0;
        }
        let r = (row - self.n_lo) as usize;
        match col - row {
            0 => self.diag[r],
            1 => self.upper[r],
            -1 => self.lower[r],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (self.n_lo..=self.n_hi)
            .map(|r| (self.n_lo..=self.n_hi).map(|c| self.entry(r, c)).collect())
            .collect()
    }

    /// v ↦ v(I + A/q) for a row vector v.
    fn step(&self, v: &[f64], out: &mut [f64], q: f64) {
        let n = v.len();
        for k in 0..n {
            let mut s = v[k] * (1.0 + self.diag[k] / q);
            if k > 0 {
                s += v[k - 1] * self.upper[k - 1] / q;
            }
            if k + 1 < n {
                s += v[k + 1] * self.lower[k + 1] / q;
            }
            out[k] = s;
        }
    }
}

pub fn truncated_generator(model: &CatalogModel, n_lo: i64, n_hi: i64) -> Result<TruncatedGenerator> {
    if n_lo >= n_hi {
        return Err(Error::OutOfDomain(format!("window [{n_lo}, {n_hi}] needs n_lo < n_hi")));
    }
    if model.domain() == Domain::HalfLine && n_lo < 0 {
        return Err(Error::OutOfDomain(format!("window starts at {n_lo}, below a half-line domain")));
    }
    let size = (n_hi - n_lo + 1) as usize;
    let mut g = TruncatedGenerator {
        n_lo,
        n_hi,
        lower: vec![0.0; size],
        diag: vec![0.0; size],
        upper: vec![0.0; size],
        q_max: 0.0,
    };
    for (k, n) in (n_lo..=n_hi).enumerate() {
        let (l, m) = model.rates_at(n)?;
        g.diag[k] = -(l + m);
        if k > 0 {
            g.lower[k] = m;
        }
        if k + 1 < size {
            g.upper[k] = l;
        }
        g.q_max = g.q_max.max(l + m);
    }
    Ok(g)
}

/// P(N > d) for N ~ Poisson(mean).
pub fn poisson_tail(mean: f64, d: u64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    // log pmf at d+1
    let mut lw = -mean;
    for k in 1..=d + 1 {
        lw += ln_mean - (k as f64).ln();
    }
    if (d as f64) + 1.0 >= mean {
        // terms decrease from k = d+1 on
        let mut sum = 0.0;
        let mut k = d + 1;
        loop {
            let term = lw.exp();
            sum += term;
            if term <= 1e-18 * sum || term == 0.0 && k as f64 > mean {
                break;
            }
            k += 1;
            lw += ln_mean - (k as f64).ln();
        }
        sum.min(1.0)
    } else {
        let mut lw = -mean;
        let mut cdf = lw.exp();
        for k in 1..=d {
            lw += ln_mean - (k as f64).ln();
            cdf += lw.exp();
        }
        (1.0 - cdf).clamp(0.0, 1.0)
    }
}

/// Bound on the probability that the chain started at `i` leaves
/// `n_lo..=n_hi` by time t. A half-line window starting at 0 only leaks
/// through its upper end.
pub fn leakage_bound(model: &CatalogModel, i: i64, t: f64, n_lo: i64, n_hi: i64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let q = match truncated_generator(model, n_lo, n_hi) {
        Ok(g) => g.q_max,
        Err(_) => model.max_exit_rate(),
    };
    let up = n_hi - i;
    let d = if model.domain() == Domain::HalfLine && n_lo == 0 { up } else { up.min(i - n_lo) };
    if d < 0 {
        return 1.0;
    }
    poisson_tail(q * t, d as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub tol: f64,
    pub window_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, window_cap: DEFAULT_WINDOW_CAP }
    }
}

/// P_{i,n}(t) for n in `n_lo..=n_hi`. The internal window is chosen so the
/// leakage bound stays below tol/2.
pub fn oracle_row(
    model: &CatalogModel,
    i: i64,
    t: f64,
    n_lo: i64,
    n_hi: i64,
    config: &OracleConfig,
) -> Result<Vec<TransitionResult>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfDomain(format!("time must be finite and nonnegative, got {t}")));
    }
    if n_lo > n_hi {
        return Err(Error::OutOfDomain(format!("empty range {n_lo}..={n_hi}")));
    }
    let half = model.domain() == Domain::HalfLine;
    if half && (i < 0 || n_lo < 0) {
        return Err(Error::OutOfDomain("states of a half-line model are nonnegative".into()));
    }
    let budget = 0.5 * config.tol;
    let qt = model.max_exit_rate() * t;
    let mut w = (qt + 12.0 * (qt + 1.0).sqrt() + 12.0).ceil() as i64;
    let (lo, hi, leak) = loop {
        let mut lo = i.min(n_lo) - w;
        if half {
            lo = lo.max(0);
        }
        let hi = i.max(n_hi) + w;
        let size = (hi - lo + 1) as usize;
        if size > config.window_cap {
            return Err(Error::WindowTooLarge { needed: size, cap: config.window_cap });
        }
        let leak = leakage_bound(model, i, t, lo, hi);
        if leak < budget {
            break (lo, hi, leak);
        }
        w *= 2;
    };
    let g = truncated_generator(model, lo, hi)?;
    let size = g.size();
    let mut v = vec![0.0; size];
    v[(i - lo) as usize] = 1.0;
    let mut acc = vec![0.0; size];
    let mut tail = 0.0;
    if t > 0.0 {
        let q = g.q_max;
        let mean = q * t;
        let mut kmax = mean.ceil() as u64;
        while poisson_tail(mean, kmax) >= budget {
            kmax += (mean.sqrt().ceil() as u64).max(1);
        }
        tail = poisson_tail(mean, kmax);
        let ln_mean = mean.ln();
        let mut lw = -mean;
        let mut next = vec![0.0; size];
        for k in 0..=kmax {
            if k > 0 {
                lw += ln_mean - (k as f64).ln();
                g.step(&v, &mut next, q);
                std::mem::swap(&mut v, &mut next);
            }
            let pk = lw.exp();
            if pk > 0.0 {
                for (a, x) in acc.iter_mut().zip(&v) {
                    *a += pk * x;
                }
            }
        }
    } else {
        acc.copy_from_slice(&v);
    }
    let err = tail + leak;
    Ok((n_lo..=n_hi)
        .map(|n| TransitionResult { value: acc[(n - lo) as usize], method: TransitionMethod::Oracle, err_estimate: err })
        .collect())
}

pub fn oracle_transition(model: &CatalogModel, i: i64, j: i64, t: f64, tol: f64) -> Result<TransitionResult> {
    let config = OracleConfig { tol, ..OracleConfig::default() };
    Ok(oracle_row(model, i, t, j, j, &config)?[0])
}
