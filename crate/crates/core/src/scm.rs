//! The generative model: parameters, intercept centering, mechanism tables
//! and the exact factual joint law of `(A, U, M, Y)`.
//!
//! ```text
//! A = 1[eps_A <= p_A]
//! U = 1[eps_U <= p_U]
//! M = 1[eps_M <= p_M(A, U)]      p_M(a,u)   = expit(a0 + aA a + aU u + aAU a u)
//! Y = 1[eps_Y <= p_Y(A, M, U)]   p_Y(a,m,u) = expit(b0 + bA a + bU u + bM m
//!                                                   + bAU a u + bAM a m + bUM u m + bAUM a u m)
//! ```
//!
//! with independent uniform disturbances. Binary variables are indexed as
//! `usize` values `0` or `1` throughout.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Logistic sigmoid `1 / (1 + exp(-x))`.
///
/// Evaluated through `exp(x) / (1 + exp(x))` on the negative half-line so
/// that small probabilities keep full relative precision.
pub fn expit(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    })
}

/// How the two intercepts are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InterceptMode {
    /// Intercepts centre the linear predictors at `a = u = m = 1/2`
    /// (shifted by `nu` for the outcome).
    #[default]
    Centered,
    Explicit {
        alpha_0: f64,
        beta_0: f64,
    },
}

/// The ten non-intercept log-odds coefficients of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coefficient {
    AlphaA,
    AlphaU,
    AlphaAU,
    BetaA,
    BetaU,
    BetaM,
    BetaAU,
    BetaAM,
    BetaUM,
    BetaAUM,
}

impl Coefficient {
    pub const ALL: [Coefficient; 10] = [
        Coefficient::AlphaA,
        Coefficient::AlphaU,
        Coefficient::AlphaAU,
        Coefficient::BetaA,
        Coefficient::BetaU,
        Coefficient::BetaM,
        Coefficient::BetaAU,
        Coefficient::BetaAM,
        Coefficient::BetaUM,
        Coefficient::BetaAUM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Coefficient::AlphaA => "alpha_A",
            Coefficient::AlphaU => "alpha_U",
            Coefficient::AlphaAU => "alpha_AU",
            Coefficient::BetaA => "beta_A",
            Coefficient::BetaU => "beta_U",
            Coefficient::BetaM => "beta_M",
            Coefficient::BetaAU => "beta_AU",
            Coefficient::BetaAM => "beta_AM",
            Coefficient::BetaUM => "beta_UM",
            Coefficient::BetaAUM => "beta_AUM",
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Coefficient {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are interchangeable (`alpha-au`, `Alpha_AU`).
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Coefficient::ALL
            .into_iter()
            .find(|c| c.name().to_ascii_lowercase() == norm)
            .ok_or_else(|| Error::invalid(s, "not a model coefficient"))
    }
}

/// Full parameter vector of the generative model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmParams {
    pub p_a: f64,
    pub p_u: f64,
    pub alpha_a: f64,
    pub alpha_u: f64,
    pub alpha_au: f64,
    pub beta_a: f64,
    pub beta_u: f64,
    pub beta_m: f64,
    pub beta_au: f64,
    pub beta_am: f64,
    pub beta_um: f64,
    pub beta_aum: f64,
    pub nu: f64,
    pub intercepts: InterceptMode,
}

impl Default for ScmParams {
    /// Balanced prevalences, every coefficient zero, centred intercepts.
    fn default() -> Self {
        ScmParams {
            p_a: 0.5,
            p_u: 0.5,
            alpha_a: 0.0,
            alpha_u: 0.0,
            alpha_au: 0.0,
            beta_a: 0.0,
            beta_u: 0.0,
            beta_m: 0.0,
            beta_au: 0.0,
            beta_am: 0.0,
            beta_um: 0.0,
            beta_aum: 0.0,
            nu: 0.0,
            intercepts: InterceptMode::Centered,
        }
    }
}

impl ScmParams {
    pub fn get(&self, c: Coefficient) -> f64 {
        match c {
            Coefficient::AlphaA => self.alpha_a,
            Coefficient::AlphaU => self.alpha_u,
            Coefficient::AlphaAU => self.alpha_au,
            Coefficient::BetaA => self.beta_a,
            Coefficient::BetaU => self.beta_u,
            Coefficient::BetaM => self.beta_m,
            Coefficient::BetaAU => self.beta_au,
            Coefficient::BetaAM => self.beta_am,
            Coefficient::BetaUM => self.beta_um,
            Coefficient::BetaAUM => self.beta_aum,
        }
    }

    pub fn set(&mut self, c: Coefficient, value: f64) {
        let slot = match c {
            Coefficient::AlphaA => &mut self.alpha_a,
            Coefficient::AlphaU => &mut self.alpha_u,
            Coefficient::AlphaAU => &mut self.alpha_au,
            Coefficient::BetaA => &mut self.beta_a,
            Coefficient::BetaU => &mut self.beta_u,
            Coefficient::BetaM => &mut self.beta_m,
            Coefficient::BetaAU => &mut self.beta_au,
            Coefficient::BetaAM => &mut self.beta_am,
            Coefficient::BetaUM => &mut self.beta_um,
            Coefficient::BetaAUM => &mut self.beta_aum,
        };
        *slot = value;
    }

    pub fn with(mut self, c: Coefficient, value: f64) -> Self {
        self.set(c, value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_A", self.p_a), ("p_U", self.p_u)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::invalid(
                    name,
                    format!("prevalence {p} must lie strictly inside (0, 1)"),
                ));
            }
        }
        if !self.nu.is_finite() || self.nu < 0.0 {
            return Err(Error::invalid(
                "nu",
                format!("{} must be finite and >= 0", self.nu),
            ));
        }
        for c in Coefficient::ALL {
            let v = self.get(c);
            if !v.is_finite() {
                return Err(Error::invalid(c.name(), format!("{v} is not finite")));
            }
        }
        if let InterceptMode::Explicit { alpha_0, beta_0 } = self.intercepts {
            for (name, v) in [("alpha_0", alpha_0), ("beta_0", beta_0)] {
                if !v.is_finite() {
                    return Err(Error::invalid(name, format!("{v} is not finite")));
                }
            }
        }
        Ok(())
    }

    /// Intercepts `(alpha_0, beta_0)`: the centring formulas in
    /// [`InterceptMode::Centered`], the stored values otherwise.
    pub fn resolve_intercepts(&self) -> (f64, f64) {
        match self.intercepts {
            InterceptMode::Explicit { alpha_0, beta_0 } => (alpha_0, beta_0),
            InterceptMode::Centered => {
                let alpha_0 = -0.5 * (self.alpha_a + self.alpha_u + 0.5 * self.alpha_au);
                let beta_0 = -0.5
                    * (self.beta_a
                        + self.beta_m
                        + self.beta_u
                        + 0.5 * (self.beta_am + self.beta_au + self.beta_um)
                        + 0.25 * self.beta_aum
                        - self.nu);
                (alpha_0, beta_0)
            }
        }
    }

    /// Linear predictor of the mediator mechanism.
    pub fn mediator_logit(&self, alpha_0: f64, a: usize, u: usize) -> f64 {
        let (a, u) = (a as f64, u as f64);
        alpha_0 + self.alpha_a * a + self.alpha_u * u + self.alpha_au * a * u
    }

    /// Linear predictor of the outcome mechanism.
    pub fn outcome_logit(&self, beta_0: f64, a: usize, m: usize, u: usize) -> f64 {
        let (a, m, u) = (a as f64, m as f64, u as f64);
        beta_0
            + self.beta_a * a
            + self.beta_u * u
            + self.beta_m * m
            + self.beta_au * a * u
            + self.beta_am * a * m
            + self.beta_um * u * m
            + self.beta_aum * a * u * m
    }
}

/// Evaluated mechanism probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismTables {
    /// `p_m[a][u]`
    pub p_m: [[f64; 2]; 2],
    /// `p_y[a][m][u]`
    pub p_y: [[[f64; 2]; 2]; 2],
    pub alpha_0: f64,
    pub beta_0: f64,
}

impl MechanismTables {
    #[inline]
    pub fn p_m(&self, a: usize, u: usize) -> f64 {
        self.p_m[a][u]
    }

    #[inline]
    pub fn p_y(&self, a: usize, m: usize, u: usize) -> f64 {
        self.p_y[a][m][u]
    }
}

#[allow(clippy::needless_range_loop)]
pub fn build_mechanisms(params: &ScmParams) -> Result<MechanismTables> {
    params.validate()?;
    let (alpha_0, beta_0) = params.resolve_intercepts();
    let mut p_m = [[0.0; 2]; 2];
    let mut p_y = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for u in 0..2 {
            p_m[a][u] = expit(params.mediator_logit(alpha_0, a, u))?;
            for m in 0..2 {
                p_y[a][m][u] = expit(params.outcome_logit(beta_0, a, m, u))?;
            }
        }
    }
    Ok(MechanismTables {
        p_m,
        p_y,
        alpha_0,
        beta_0,
    })
}

fn bernoulli(p: f64, x: usize) -> f64 {
    if x == 1 {
        p
    } else {
        1.0 - p
    }
}

/// Exact factual law of `(A, U, M, Y)` as 16 cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTable {
    cells: [f64; 16],
}

impl JointTable {
    #[inline]
    fn index(a: usize, u: usize, m: usize, y: usize) -> usize {
        (a << 3) | (u << 2) | (m << 1) | y
    }

    pub fn cell(&self, a: usize, u: usize, m: usize, y: usize) -> f64 {
        self.cells[Self::index(a, u, m, y)]
    }

    pub fn cells(&self) -> &[f64; 16] {
        &self.cells
    }

    /// Probability of the event selected by `pred(a, u, m, y)`.
    pub fn prob(&self, pred: impl Fn(usize, usize, usize, usize) -> bool) -> f64 {
        let mut total = 0.0;
        for a in 0..2 {
            for u in 0..2 {
                for m in 0..2 {
                    for y in 0..2 {
                        if pred(a, u, m, y) {
                            total += self.cell(a, u, m, y);
                        }
                    }
                }
            }
        }
        total
    }

    pub fn p_m1(&self) -> f64 {
        self.prob(|_, _, m, _| m == 1)
    }

    pub fn p_y1(&self) -> f64 {
        self.prob(|_, _, _, y| y == 1)
    }

    /// `P(U = u | given)` for `u = 0, 1`.
    pub fn condition_u(&self, given: Given) -> Result<[f64; 2]> {
        let joint = |u: usize| self.prob(|a, uu, m, _| uu == u && given.admits(a, m));
        let (j0, j1) = (joint(0), joint(1));
        let total = j0 + j1;
        if total <= 0.0 {
            return Err(Error::DegenerateEvent {
                event: given.to_string(),
            });
        }
        Ok([j0 / total, j1 / total])
    }

    /// `P(Y = 1 | A = a, M = m)` read directly off the cells.
    pub fn p_y1_given(&self, a: usize, m: usize) -> Result<f64> {
        let den = self.prob(|aa, _, mm, _| aa == a && mm == m);
        if den <= 0.0 {
            return Err(Error::DegenerateEvent {
                event: Given::am(a, m).to_string(),
            });
        }
        Ok(self.prob(|aa, _, mm, y| aa == a && mm == m && y == 1) / den)
    }
}

/// Factual law induced by the structural equations. Prevalences may sit on
/// the closed interval here so that degenerate exposures can be studied.
pub fn joint_factual(tables: &MechanismTables, p_a: f64, p_u: f64) -> Result<JointTable> {
    for (name, p) in [("p_A", p_a), ("p_U", p_u)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(name, format!("{p} is not a probability")));
        }
    }
    let mut cells = [0.0; 16];
    for a in 0..2 {
        for u in 0..2 {
            let w = bernoulli(p_a, a) * bernoulli(p_u, u);
            for m in 0..2 {
                let pm = bernoulli(tables.p_m(a, u), m);
                for y in 0..2 {
                    cells[JointTable::index(a, u, m, y)] =
                        w * pm * bernoulli(tables.p_y(a, m, u), y);
                }
            }
        }
    }
    Ok(JointTable { cells })
}

/// Conditioning event over `{A = a, M = m}`; either part may be absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Given {
    pub a: Option<usize>,
    pub m: Option<usize>,
}

impl Given {
    pub const NONE: Given = Given { a: None, m: None };

    pub fn m(m: usize) -> Self {
        Given {
            a: None,
            m: Some(m),
        }
    }

    pub fn am(a: usize, m: usize) -> Self {
        Given {
            a: Some(a),
            m: Some(m),
        }
    }

    fn admits(&self, a: usize, m: usize) -> bool {
        self.a.is_none_or(|x| x == a) && self.m.is_none_or(|x| x == m)
    }
}

impl fmt::Display for Given {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.m) {
            (None, None) => f.write_str("(sure event)"),
            (Some(a), None) => write!(f, "A={a}"),
            (None, Some(m)) => write!(f, "M={m}"),
            (Some(a), Some(m)) => write!(f, "A={a}, M={m}"),
        }
    }
}

/// A fully evaluated model: prevalences, mechanisms and factual joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmModel {
    pub p_a: f64,
    pub p_u: f64,
    pub tables: MechanismTables,
    pub joint: JointTable,
}

impl ScmModel {
    pub fn new(params: &ScmParams) -> Result<Self> {
        let tables = build_mechanisms(params)?;
        Self::from_tables(tables, params.p_a, params.p_u)
    }

    /// Bypasses parameter validation; prevalences may be 0 or 1.
    pub fn from_tables(tables: MechanismTables, p_a: f64, p_u: f64) -> Result<Self> {
        let joint = joint_factual(&tables, p_a, p_u)?;
        Ok(ScmModel {
            p_a,
            p_u,
            tables,
            joint,
        })
    }

    /// `P(A = a)`
    pub fn prevalence_a(&self, a: usize) -> f64 {
        bernoulli(self.p_a, a)
    }

    /// `P(U = u)`
    pub fn prevalence_u(&self, u: usize) -> f64 {
        bernoulli(self.p_u, u)
    }
}
