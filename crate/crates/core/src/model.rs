//! Rate rules, potential coefficients and validated constructors for the
//! catalog families.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Relative tolerance used when deciding that two parameter expressions coincide.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    HalfLine,
    Bilateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Mm1Absorbing,
    ConstantBilateral,
    SymmetricBilateral,
    AlternatingCase1,
    AlternatingCase2,
    DefectCase1,
    DefectCase2,
    SplitQueues,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 8] = [
        FamilyKind::Mm1Absorbing,
        FamilyKind::ConstantBilateral,
        FamilyKind::SymmetricBilateral,
        FamilyKind::AlternatingCase1,
        FamilyKind::AlternatingCase2,
        FamilyKind::DefectCase1,
        FamilyKind::DefectCase2,
        FamilyKind::SplitQueues,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Mm1Absorbing => "mm1-absorbing",
            FamilyKind::ConstantBilateral => "constant-bilateral",
            FamilyKind::SymmetricBilateral => "symmetric-bilateral",
            FamilyKind::AlternatingCase1 => "alternating-case1",
            FamilyKind::AlternatingCase2 => "alternating-case2",
            FamilyKind::DefectCase1 => "defect-case1",
            FamilyKind::DefectCase2 => "defect-case2",
            FamilyKind::SplitQueues => "split-queues",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::DefectCase1 | FamilyKind::DefectCase2 => &["lambda", "mu", "lambda0", "mu0"],
            FamilyKind::SplitQueues => &["lambda", "mu", "alpha", "beta"],
            _ => &["lambda", "mu"],
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            FamilyKind::Mm1Absorbing => Domain::HalfLine,
            _ => Domain::Bilateral,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FamilyKind::Mm1Absorbing => "M/M/1 queue on n >= 0 with absorption through state 0",
            FamilyKind::ConstantBilateral => "constant rates lambda up, mu down on all of Z",
            FamilyKind::SymmetricBilateral => "rates (lambda, mu) for n >= 0 mirrored to (mu, lambda) for n < 0",
            FamilyKind::AlternatingCase1 => "lambda_n = mu_n, alternating lambda (even n) and mu (odd n)",
            FamilyKind::AlternatingCase2 => "(lambda, mu) at even n, (mu, lambda) at odd n",
            FamilyKind::DefectCase1 => "constant rates with a defect (lambda0, mu0) at state 0",
            FamilyKind::DefectCase2 => "symmetric rates with a defect (lambda0, mu0) at state 0",
            FamilyKind::SplitQueues => "(lambda, mu) for n >= 0, (beta, alpha) for n < 0",
        }
    }

    /// Parameter sets used for the published figures. The constant-rate
    /// bilateral family and the second alternating case have no figure of
    /// their own; the sets listed for them are representative choices.
    pub fn figure_params(self) -> &'static [&'static [f64]] {
        match self {
            FamilyKind::Mm1Absorbing => &[&[1.0, 1.0], &[1.0, 2.0], &[2.0, 1.0], &[2.0, 2.0]],
            FamilyKind::ConstantBilateral => &[&[1.0, 1.0], &[1.0, 2.0], &[2.0, 1.0]],
            FamilyKind::SymmetricBilateral => &[&[1.0, 2.0], &[2.0, 1.0]],
            FamilyKind::AlternatingCase1 => &[&[1.0, 2.0], &[2.0, 1.0]],
            FamilyKind::AlternatingCase2 => &[&[1.0, 2.0], &[2.0, 1.0]],
            FamilyKind::DefectCase1 => &[
                &[1.0, 2.0, 1.0, 5.0],
                &[1.0, 2.0, 5.0, 1.0],
                &[2.0, 1.0, 1.0, 5.0],
                &[2.0, 1.0, 5.0, 1.0],
            ],
            FamilyKind::DefectCase2 => &[&[1.0, 2.0, 1.0, 5.0], &[2.0, 1.0, 5.0, 1.0]],
            FamilyKind::SplitQueues => &[
                &[1.0, 2.0, 3.0, 4.0],
                &[0.5, 1.0 / 3.0, 13.0 / 5.0, 0.1],
                &[1.0, 2.5, 1.0, 2.0],
                &[1.0, 1.0, 2.0, 2.0],
            ],
        }
    }

    /// Figure number whose current plots use this family, if any.
    pub fn figure(self) -> Option<u8> {
        match self {
            FamilyKind::Mm1Absorbing => Some(1),
            FamilyKind::SymmetricBilateral => Some(2),
            FamilyKind::AlternatingCase1 => Some(3),
            FamilyKind::DefectCase1 => Some(4),
            FamilyKind::DefectCase2 => Some(6),
            FamilyKind::SplitQueues => Some(7),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::OutOfDomain(format!("unknown family `{s}`")))
    }
}

/// Family tag together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Mm1Absorbing { lambda: f64, mu: f64 },
    ConstantBilateral { lambda: f64, mu: f64 },
    SymmetricBilateral { lambda: f64, mu: f64 },
    AlternatingCase1 { lambda: f64, mu: f64 },
    AlternatingCase2 { lambda: f64, mu: f64 },
    DefectCase1 { lambda: f64, mu: f64, lambda0: f64, mu0: f64 },
    DefectCase2 { lambda: f64, mu: f64, lambda0: f64, mu0: f64 },
    SplitQueues { lambda: f64, mu: f64, alpha: f64, beta: f64 },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Mm1Absorbing { .. } => FamilyKind::Mm1Absorbing,
            Family::ConstantBilateral { .. } => FamilyKind::ConstantBilateral,
            Family::SymmetricBilateral { .. } => FamilyKind::SymmetricBilateral,
            Family::AlternatingCase1 { .. } => FamilyKind::AlternatingCase1,
            Family::AlternatingCase2 { .. } => FamilyKind::AlternatingCase2,
            Family::DefectCase1 { .. } => FamilyKind::DefectCase1,
            Family::DefectCase2 { .. } => FamilyKind::DefectCase2,
            Family::SplitQueues { .. } => FamilyKind::SplitQueues,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Family::Mm1Absorbing { lambda, mu }
            | Family::ConstantBilateral { lambda, mu }
            | Family::SymmetricBilateral { lambda, mu }
            | Family::AlternatingCase1 { lambda, mu }
            | Family::AlternatingCase2 { lambda, mu } => vec![lambda, mu],
            Family::DefectCase1 { lambda, mu, lambda0, mu0 }
            | Family::DefectCase2 { lambda, mu, lambda0, mu0 } => vec![lambda, mu, lambda0, mu0],
            Family::SplitQueues { lambda, mu, alpha, beta } => vec![lambda, mu, alpha, beta],
        }
    }

    /// Rates without domain checks.
    fn rates(&self, n: i64) -> (f64, f64) {
        match *self {
            Family::Mm1Absorbing { lambda, mu } | Family::ConstantBilateral { lambda, mu } => (lambda, mu),
            Family::SymmetricBilateral { lambda, mu } => {
                if n >= 0 {
                    (lambda, mu)
                } else {
                    (mu, lambda)
                }
            }
            Family::AlternatingCase1 { lambda, mu } => {
                if n.rem_euclid(2) == 0 {
                    (lambda, lambda)
                } else {
                    (mu, mu)
                }
            }
            Family::AlternatingCase2 { lambda, mu } => {
                if n.rem_euclid(2) == 0 {
                    (lambda, mu)
                } else {
                    (mu, lambda)
                }
            }
            Family::DefectCase1 { lambda, mu, lambda0, mu0 } => {
                if n == 0 {
                    (lambda0, mu0)
                } else {
                    (lambda, mu)
                }
            }
            Family::DefectCase2 { lambda, mu, lambda0, mu0 } => match n {
                0 => (lambda0, mu0),
                n if n > 0 => (lambda, mu),
                _ => (mu, lambda),
            },
            Family::SplitQueues { lambda, mu, alpha, beta } => {
                if n >= 0 {
                    (lambda, mu)
                } else {
                    (beta, alpha)
                }
            }
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEGENERACY_TOL * a.abs().max(b.abs())
}

/// A catalog model whose parameters passed validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogModel {
    family: Family,
}

impl CatalogModel {
    pub fn new(family: Family) -> Result<Self> {
        let kind = family.kind();
        for (name, value) in kind.param_names().iter().zip(family.params()) {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        match family {
            Family::DefectCase1 { lambda, mu, lambda0, mu0 } => {
                if close(lambda0 * mu + mu0 * lambda, lambda * mu) {
                    return Err(Error::DegenerateParameters(
                        "lambda0*mu + mu0*lambda - lambda*mu vanishes".into(),
                    ));
                }
            }
            Family::DefectCase2 { lambda, lambda0, mu0, .. } => {
                if close(lambda0 + mu0, lambda) {
                    return Err(Error::DegenerateParameters("lambda0 + mu0 - lambda vanishes".into()));
                }
            }
            Family::SplitQueues { lambda, mu, alpha, beta } => {
                let lb = close(lambda, beta);
                let am = close(alpha, mu);
                if lb && am {
                    return Err(Error::DegenerateParameters(format!(
                        "(lambda - beta)(alpha - mu) vanishes; alpha = mu and beta = lambda reduce to \
                         constant-bilateral with lambda = {lambda}, mu = {mu}"
                    )));
                }
                if lb || am {
                    return Err(Error::DegenerateParameters("(lambda - beta)(alpha - mu) vanishes".into()));
                }
            }
            _ => {}
        }
        Ok(Self { family })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    pub fn domain(&self) -> Domain {
        self.kind().domain()
    }

    pub fn params(&self) -> Vec<f64> {
        self.family.params()
    }

    pub fn rate_rule(&self) -> RateRule {
        RateRule { domain: self.domain(), family: self.family }
    }

    pub fn rates_at(&self, n: i64) -> Result<(f64, f64)> {
        self.rate_rule().rate_at(n)
    }

    pub fn potential_coefficient(&self, n: i64) -> Result<f64> {
        self.potentials().pi_at(n)
    }

    pub fn potentials(&self) -> PotentialCoefficients {
        PotentialCoefficients { rule: self.rate_rule() }
    }

    /// Largest total exit rate λ_n + μ_n over all states.
    pub fn max_exit_rate(&self) -> f64 {
        // every family is periodic with period at most 2 away from state 0
        let lo = if self.domain() == Domain::HalfLine { 0 } else { -3 };
        (lo..=3)
            .map(|n| {
                let (l, m) = self.family.rates(n);
                l + m
            })
            .fold(0.0, f64::max)
    }

    /// Half-line factor obtained by cutting the chain between −1 and 0.
    pub fn half_line(&self, side: Side) -> Result<HalfLineFactor> {
        use Family::*;
        let f = match (self.family, side) {
            (Mm1Absorbing { lambda, mu }, Side::Plus) => HalfLineFactor::Mm1 { lambda, mu },
            (Mm1Absorbing { .. }, Side::Minus) => {
                return Err(Error::OutOfDomain("a half-line model has no negative factor".into()))
            }
            (ConstantBilateral { lambda, mu }, Side::Plus) => HalfLineFactor::Mm1 { lambda, mu },
            (ConstantBilateral { lambda, mu }, Side::Minus) => HalfLineFactor::Mm1 { lambda: mu, mu: lambda },
            (SymmetricBilateral { lambda, mu }, _) => HalfLineFactor::Mm1 { lambda, mu },
            (AlternatingCase1 { lambda, mu }, Side::Plus) => HalfLineFactor::Alternating1 { lambda, mu },
            (AlternatingCase1 { lambda, mu }, Side::Minus) => {
                HalfLineFactor::Alternating1 { lambda: mu, mu: lambda }
            }
            (AlternatingCase2 { lambda, mu }, _) => HalfLineFactor::Alternating2 { lambda, mu },
            (DefectCase1 { lambda, mu, lambda0, mu0 }, Side::Plus)
            | (DefectCase2 { lambda, mu, lambda0, mu0 }, Side::Plus) => {
                HalfLineFactor::Defect { lambda, mu, lambda0, mu0 }
            }
            (DefectCase1 { lambda, mu, .. }, Side::Minus) => HalfLineFactor::Mm1 { lambda: mu, mu: lambda },
            (DefectCase2 { lambda, mu, .. }, Side::Minus) => HalfLineFactor::Mm1 { lambda, mu },
            (SplitQueues { lambda, mu, .. }, Side::Plus) => HalfLineFactor::Mm1 { lambda, mu },
            (SplitQueues { alpha, beta, .. }, Side::Minus) => HalfLineFactor::Mm1 { lambda: alpha, mu: beta },
        };
        Ok(f)
    }
}

/// Build a validated model from a family tag and its positional parameters.
pub fn build_model(kind: FamilyKind, params: &[f64]) -> Result<CatalogModel> {
    let names = kind.param_names();
    if params.len() != names.len() {
        return Err(Error::OutOfDomain(format!(
            "{kind} takes {} parameters ({}), got {}",
            names.len(),
            names.join(", "),
            params.len()
        )));
    }
    let p = params;
    let family = match kind {
        FamilyKind::Mm1Absorbing => Family::Mm1Absorbing { lambda: p[0], mu: p[1] },
        FamilyKind::ConstantBilateral => Family::ConstantBilateral { lambda: p[0], mu: p[1] },
        FamilyKind::SymmetricBilateral => Family::SymmetricBilateral { lambda: p[0], mu: p[1] },
        FamilyKind::AlternatingCase1 => Family::AlternatingCase1 { lambda: p[0], mu: p[1] },
        FamilyKind::AlternatingCase2 => Family::AlternatingCase2 { lambda: p[0], mu: p[1] },
        FamilyKind::DefectCase1 => Family::DefectCase1 { lambda: p[0], mu: p[1], lambda0: p[2], mu0: p[3] },
        FamilyKind::DefectCase2 => Family::DefectCase2 { lambda: p[0], mu: p[1], lambda0: p[2], mu0: p[3] },
        FamilyKind::SplitQueues => Family::SplitQueues { lambda: p[0], mu: p[1], alpha: p[2], beta: p[3] },
    };
    CatalogModel::new(family)
}

/// Evaluates (λ_n, μ_n) on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRule {
    pub domain: Domain,
    family: Family,
}

impl RateRule {
    pub fn rate_at(&self, n: i64) -> Result<(f64, f64)> {
        if self.domain == Domain::HalfLine && n < 0 {
            return Err(Error::OutOfDomain(format!("state {n} is below a half-line domain")));
        }
        Ok(self.family.rates(n))
    }
}

/// Potential coefficients π_n, computed from π_0 = 1 outward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialCoefficients {
    rule: RateRule,
}

impl PotentialCoefficients {
    pub fn pi_at(&self, n: i64) -> Result<f64> {
        if self.rule.domain == Domain::HalfLine && n < 0 {
            return Err(Error::OutOfDomain(format!("state {n} is below a half-line domain")));
        }
        let f = &self.rule.family;
        let mut pi = 1.0;
        if n > 0 {
            for k in 1..=n {
                pi *= f.rates(k - 1).0 / f.rates(k).1;
            }
        } else {
            for k in (n..0).rev() {
                pi *= f.rates(k + 1).1 / f.rates(k).0;
            }
        }
        Ok(pi)
    }

    /// π_n for every n in `n_lo..=n_hi`.
    pub fn range(&self, n_lo: i64, n_hi: i64) -> Result<Vec<f64>> {
        if n_lo > n_hi {
            return Ok(Vec::new());
        }
        let first = self.pi_at(n_lo)?;
        let f = &self.rule.family;
        let mut out = Vec::with_capacity((n_hi - n_lo + 1) as usize);
        out.push(first);
        for k in n_lo + 1..=n_hi {
            let prev = *out.last().unwrap();
            out.push(prev * f.rates(k - 1).0 / f.rates(k).1);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

/// Birth-death chain on n >= 0 with killing through state 0 (μ_0 > 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfLineFactor {
    Mm1 { lambda: f64, mu: f64 },
    Alternating1 { lambda: f64, mu: f64 },
    Alternating2 { lambda: f64, mu: f64 },
    Defect { lambda: f64, mu: f64, lambda0: f64, mu0: f64 },
}

impl HalfLineFactor {
    pub fn rates_at(&self, n: i64) -> Result<(f64, f64)> {
        if n < 0 {
            return Err(Error::OutOfDomain(format!("state {n} is below a half-line domain")));
        }
        Ok(match *self {
            HalfLineFactor::Mm1 { lambda, mu } => (lambda, mu),
            HalfLineFactor::Alternating1 { lambda, mu } => {
                if n % 2 == 0 {
                    (lambda, lambda)
                } else {
                    (mu, mu)
                }
            }
            HalfLineFactor::Alternating2 { lambda, mu } => {
                if n % 2 == 0 {
                    (lambda, mu)
                } else {
                    (mu, lambda)
                }
            }
            HalfLineFactor::Defect { lambda, mu, lambda0, mu0 } => {
                if n == 0 {
                    (lambda0, mu0)
                } else {
                    (lambda, mu)
                }
            }
        })
    }

    pub fn potential_coefficient(&self, n: i64) -> Result<f64> {
        let mut pi = 1.0;
        for k in 1..=n {
            pi *= self.rates_at(k - 1)?.0 / self.rates_at(k)?.1;
        }
        self.rates_at(n)?;
        Ok(pi)
    }
}
