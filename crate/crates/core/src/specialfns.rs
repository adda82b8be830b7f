//! Chebyshev polynomials and modified Bessel functions of the first kind.

/// Chebyshev polynomial of the second kind, U_n(y), by forward recurrence.
///
/// Defined for every integer n through U_{-n-2} = −U_n, so U_{-1} = 0 and
/// U_{-2} = −1. Valid for any real y, including |y| > 1.
pub fn chebyshev_u(n: i64, y: f64) -> f64 {
    if n < -1 {
        return -chebyshev_u(-n - 2, y);
    }
    if n == -1 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..n {
        let next = 2.0 * y * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Chebyshev polynomial of the first kind, T_n(y), by forward recurrence.
/// Negative orders use T_{-n} = T_n.
pub fn chebyshev_t(n: i64, y: f64) -> f64 {
    let n = n.unsigned_abs();
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, y);
    for _ in 1..n {
        let next = 2.0 * y * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

const SERIES_LIMIT: f64 = 25.0;

/// Modified Bessel function I_n(z) for integer n and z >= 0.
///
/// Negative orders are folded with I_{-n} = I_n. Overflows past z ≈ 700;
/// use [`bessel_i_scaled`] there.
pub fn bessel_i(n: i64, z: f64) -> f64 {
    let n = n.unsigned_abs();
    if z <= SERIES_LIMIT {
        bessel_series(n, z)
    } else {
        miller_scaled(n, z) * z.exp()
    }
}

/// e^{-z} I_n(z).
pub fn bessel_i_scaled(n: i64, z: f64) -> f64 {
    let n = n.unsigned_abs();
    if z <= SERIES_LIMIT {
        bessel_series(n, z) * (-z).exp()
    } else {
        miller_scaled(n, z)
    }
}

fn bessel_series(n: u64, z: f64) -> f64 {
    let half = 0.5 * z;
    // leading term (z/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0u64;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Backward recurrence normalised by e^z = I_0 + 2 Σ I_k.
fn miller_scaled(n: u64, z: f64) -> f64 {
    let big = (n as f64).max(z);
    let start = (big + 30.0 + 12.0 * big.sqrt()).ceil() as u64 + n;
    let mut next = 0.0; // r_{k+1}
    let mut cur = 1e-300; // r_k
    let mut sum = 0.0;
    let mut at_n = 0.0;
    for k in (1..=start).rev() {
        if k == n {
            at_n = cur;
        }
        sum += 2.0 * cur;
        let prev = (2.0 * k as f64 / z) * cur + next;
        next = cur;
        cur = prev;
        if cur > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            sum *= 1e-250;
            at_n *= 1e-250;
        }
    }
    if n == 0 {
        at_n = cur;
    }
    sum += cur;
    at_n / sum
}
