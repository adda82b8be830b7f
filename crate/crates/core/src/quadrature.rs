//! Gauss-Legendre rules in the angle variable of the substitution
//! x = (a+b)/2 + ((b−a)/2)·cos θ, θ ∈ [0, π].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes θ_k and weights w_k for ∫_0^π g(θ) dθ ≈ Σ w_k g(θ_k).
#[derive(Debug)]
pub struct AngleRule {
    pub theta: Vec<f64>,
    pub weight: Vec<f64>,
}

fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Cached rule with `n` nodes.
pub fn angle_rule(n: usize) -> Arc<AngleRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<AngleRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return Arc::clone(r);
    }
    let (x, w) = legendre_rule(n);
    let rule = Arc::new(AngleRule {
        theta: x.iter().map(|t| 0.5 * PI * (t + 1.0)).collect(),
        weight: w.iter().map(|wi| 0.5 * PI * wi).collect(),
    });
    cache.lock().unwrap().insert(n, Arc::clone(&rule));
    rule
}

/// Points x_k and Jacobian-weighted weights for ∫_a^b f(x) dx.
pub fn interval_nodes(a: f64, b: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let rule = angle_rule(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n).map(move |k| {
        let th = rule.theta[k];
        (mid + half * th.cos(), rule.weight[k] * half * th.sin())
    })
}
