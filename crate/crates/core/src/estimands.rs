//! Closed-form estimands.
//!
//! Every estimand is a contrast of two risks, the `a = 1` arm against the
//! `a = 0` arm:
//!
//! | estimand        | risk in arm `a`                  |
//! |-----------------|----------------------------------|
//! | `as`            | `P(Y = 1 | A = a, M = 1)`          |
//! | `sp`            | `sum_u P(Y=1 | A=a, M=1, U=u) P(U=u | M=1)` |
//! | `ce`            | `P(Y^{A=a} = 1 | M = 1)`           |
//! | `cde`           | `P(Y^{a,1} = 1)`                   |
//! | `cde_m1`        | `P(Y^{a,1} = 1 | M = 1)`           |
//! | `cde_a1m1`      | `P(Y^{a,1} = 1 | A = 1, M = 1)`    |
//! | `total`         | `P(Y^{A=a} = 1)`                   |
//!
//! `sp`, `cde`, `cde_m1` and `cde_a1m1` share the contrast
//! `c(u) = p_Y(1,1,u) - p_Y(0,1,u)` and differ only in the law of `U` used to
//! average it. `Y^{a,1} = 1[eps_Y <= p_Y(a,1,U)]` depends on `(eps_Y, U)` only,
//! so conditioning on `M = 1` just reweights `U`; under this mechanism `sp`
//! and `cde_m1` are therefore the same number. That equality is a property of
//! the logistic threshold model, not of arbitrary models on the same graph.
//!
//! `ce` needs the joint law of the factual mediator and the counterfactual
//! mediator `M^{A=a}`. Both threshold the same `eps_M`, so
//! `P(M = 1, M^{A=a} = 1 | A = i, U = u) = min(p_M(i,u), p_M(a,u))`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scm::{Given, ScmModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimand {
    Association,
    Sperrin,
    ConditionalEffect,
    ControlledDirect,
    ControlledDirectM1,
    ControlledDirectA1M1,
    Total,
}

impl Estimand {
    pub const ALL: [Estimand; 7] = [
        Estimand::Association,
        Estimand::Sperrin,
        Estimand::ConditionalEffect,
        Estimand::ControlledDirect,
        Estimand::ControlledDirectM1,
        Estimand::ControlledDirectA1M1,
        Estimand::Total,
    ];

    /// Short suffix used in column names (`delta_<key>`, `or_<key>`).
    pub fn key(self) -> &'static str {
        match self {
            Estimand::Association => "as",
            Estimand::Sperrin => "sp",
            Estimand::ConditionalEffect => "ce",
            Estimand::ControlledDirect => "cde",
            Estimand::ControlledDirectM1 => "cde_m1",
            Estimand::ControlledDirectA1M1 => "cde_a1m1",
            Estimand::Total => "total",
        }
    }

    pub fn delta_name(self) -> &'static str {
        match self {
            Estimand::Association => "delta_as",
            Estimand::Sperrin => "delta_sp",
            Estimand::ConditionalEffect => "delta_ce",
            Estimand::ControlledDirect => "delta_cde",
            Estimand::ControlledDirectM1 => "delta_cde_m1",
            Estimand::ControlledDirectA1M1 => "delta_cde_a1m1",
            Estimand::Total => "total_effect",
        }
    }

    pub fn or_name(self) -> &'static str {
        match self {
            Estimand::Association => "or_as",
            Estimand::Sperrin => "or_sp",
            Estimand::ConditionalEffect => "or_ce",
            Estimand::ControlledDirect => "or_cde",
            Estimand::ControlledDirectM1 => "or_cde_m1",
            Estimand::ControlledDirectA1M1 => "or_cde_a1m1",
            Estimand::Total => "or_total",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Estimand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Risks in the exposed (`risk1`) and unexposed (`risk0`) arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPair {
    pub risk1: f64,
    pub risk0: f64,
}

impl RiskPair {
    pub fn new(risk1: f64, risk0: f64) -> Self {
        RiskPair { risk1, risk0 }
    }

    pub fn delta(&self) -> f64 {
        self.risk1 - self.risk0
    }

    pub fn odds_ratio(&self) -> Result<f64> {
        odds_ratio(*self)
    }
}

pub fn odds_ratio(pair: RiskPair) -> Result<f64> {
    let RiskPair { risk1, risk0 } = pair;
    let inside = |r: f64| r > 0.0 && r < 1.0;
    if !(inside(risk1) && inside(risk0)) {
        return Err(Error::UndefinedOdds { risk1, risk0 });
    }
    Ok((risk1 / (1.0 - risk1)) / (risk0 / (1.0 - risk0)))
}

/// `c(u) = p_Y(1,1,u) - p_Y(0,1,u)`, the direct-effect contrast at `M = 1`.
pub fn controlled_contrast(model: &ScmModel) -> [f64; 2] {
    let t = &model.tables;
    [
        t.p_y(1, 1, 0) - t.p_y(0, 1, 0),
        t.p_y(1, 1, 1) - t.p_y(0, 1, 1),
    ]
}

fn u_weighted_arms(model: &ScmModel, weights: [f64; 2]) -> RiskPair {
    let t = &model.tables;
    let arm = |a| t.p_y(a, 1, 0) * weights[0] + t.p_y(a, 1, 1) * weights[1];
    RiskPair::new(arm(1), arm(0))
}

fn named<T>(estimand: Estimand, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Estimand {
        estimand: estimand.delta_name(),
        source: Box::new(e),
    })
}

pub fn risk_as(model: &ScmModel) -> Result<RiskPair> {
    let t = &model.tables;
    let arm = |a: usize| -> Result<f64> {
        let w = model.joint.condition_u(Given::am(a, 1))?;
        Ok(t.p_y(a, 1, 0) * w[0] + t.p_y(a, 1, 1) * w[1])
    };
    Ok(RiskPair::new(arm(1)?, arm(0)?))
}

pub fn risk_sp(model: &ScmModel) -> Result<RiskPair> {
    Ok(u_weighted_arms(
        model,
        model.joint.condition_u(Given::m(1))?,
    ))
}

pub fn risk_cde(model: &ScmModel) -> RiskPair {
    u_weighted_arms(model, [model.prevalence_u(0), model.prevalence_u(1)])
}

pub fn risk_cde_m1(model: &ScmModel) -> Result<RiskPair> {
    // Same weights as `sp`: eps_Y is independent of (A, M, U).
    Ok(u_weighted_arms(
        model,
        model.joint.condition_u(Given::m(1))?,
    ))
}

pub fn risk_cde_a1m1(model: &ScmModel) -> Result<RiskPair> {
    Ok(u_weighted_arms(
        model,
        model.joint.condition_u(Given::am(1, 1))?,
    ))
}

/// `P(M = 1) = sum_{i,u} P(A=i) P(U=u) p_M(i,u)`.
fn mediator_prevalence(model: &ScmModel) -> f64 {
    let mut p = 0.0;
    for i in 0..2 {
        for u in 0..2 {
            p += model.prevalence_a(i) * model.prevalence_u(u) * model.tables.p_m(i, u);
        }
    }
    p
}

/// `P(Y^{A=a} = 1 | M = 1)` through the comonotone mediator coupling.
fn conditional_effect_arm(model: &ScmModel, a: usize, p_m1: f64) -> f64 {
    let t = &model.tables;
    let mut num = 0.0;
    for i in 0..2 {
        for u in 0..2 {
            let w = model.prevalence_a(i) * model.prevalence_u(u);
            let pm = t.p_m(i, u);
            let both = pm.min(t.p_m(a, u));
            num += w * (t.p_y(a, 1, u) * both + t.p_y(a, 0, u) * (pm - both));
        }
    }
    num / p_m1
}

pub fn risk_ce(model: &ScmModel) -> Result<RiskPair> {
    let p_m1 = mediator_prevalence(model);
    if p_m1 <= 0.0 {
        return Err(Error::DegenerateEvent {
            event: Given::m(1).to_string(),
        });
    }
    Ok(RiskPair::new(
        conditional_effect_arm(model, 1, p_m1),
        conditional_effect_arm(model, 0, p_m1),
    ))
}

/// g-formula over `U`: `P(Y^{A=a}=1) = sum_u P(U=u) sum_m P(M=m | a,u) p_Y(a,m,u)`.
pub fn risk_total(model: &ScmModel) -> RiskPair {
    let t = &model.tables;
    let arm = |a: usize| {
        (0..2)
            .map(|u| {
                let pm = t.p_m(a, u);
                model.prevalence_u(u) * (pm * t.p_y(a, 1, u) + (1.0 - pm) * t.p_y(a, 0, u))
            })
            .sum::<f64>()
    };
    RiskPair::new(arm(1), arm(0))
}

pub fn risk_pair(model: &ScmModel, estimand: Estimand) -> Result<RiskPair> {
    let r = match estimand {
        Estimand::Association => risk_as(model),
        Estimand::Sperrin => risk_sp(model),
        Estimand::ConditionalEffect => risk_ce(model),
        Estimand::ControlledDirect => Ok(risk_cde(model)),
        Estimand::ControlledDirectM1 => risk_cde_m1(model),
        Estimand::ControlledDirectA1M1 => risk_cde_a1m1(model),
        Estimand::Total => Ok(risk_total(model)),
    };
    named(estimand, r)
}

pub fn delta_as(model: &ScmModel) -> Result<f64> {
    risk_pair(model, Estimand::Association).map(|p| p.delta())
}

pub fn delta_sp(model: &ScmModel) -> Result<f64> {
    risk_pair(model, Estimand::Sperrin).map(|p| p.delta())
}

pub fn delta_ce(model: &ScmModel) -> Result<f64> {
    risk_pair(model, Estimand::ConditionalEffect).map(|p| p.delta())
}

pub fn delta_cde(model: &ScmModel) -> f64 {
    risk_cde(model).delta()
}

pub fn delta_cde_m1(model: &ScmModel) -> Result<f64> {
    risk_pair(model, Estimand::ControlledDirectM1).map(|p| p.delta())
}

pub fn delta_cde_a1m1(model: &ScmModel) -> Result<f64> {
    risk_pair(model, Estimand::ControlledDirectA1M1).map(|p| p.delta())
}

pub fn total_effect(model: &ScmModel) -> f64 {
    risk_total(model).delta()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Exact,
    MonteCarlo { n: u64, seed: u64 },
}

/// All contrasts of one model on both scales.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimandReport {
    pub delta_as: f64,
    pub delta_sp: f64,
    pub delta_ce: f64,
    pub delta_cde: f64,
    pub delta_cde_m1: f64,
    pub delta_cde_a1m1: f64,
    pub total_effect: f64,
    /// `None` when an arm risk is 0 or 1.
    pub or_as: Option<f64>,
    pub or_sp: Option<f64>,
    pub or_ce: Option<f64>,
    pub or_cde: Option<f64>,
    pub or_cde_m1: Option<f64>,
    pub or_cde_a1m1: Option<f64>,
    pub p_m1: f64,
    pub p_y1: f64,
    pub source: Source,
    /// Monte Carlo standard errors keyed by field name (`delta_ce`, `or_ce`, `p_m1`, ...).
    pub se: Option<BTreeMap<String, f64>>,
    /// Arm risks indexed by [`Estimand::index`].
    pub risks: [RiskPair; 7],
}

impl EstimandReport {
    pub fn from_risks(risks: [RiskPair; 7], p_m1: f64, p_y1: f64, source: Source) -> Self {
        let d = |e: Estimand| risks[e.index()].delta();
        let or = |e: Estimand| risks[e.index()].odds_ratio().ok();
        use Estimand::*;
        EstimandReport {
            delta_as: d(Association),
            delta_sp: d(Sperrin),
            delta_ce: d(ConditionalEffect),
            delta_cde: d(ControlledDirect),
            delta_cde_m1: d(ControlledDirectM1),
            delta_cde_a1m1: d(ControlledDirectA1M1),
            total_effect: d(Total),
            or_as: or(Association),
            or_sp: or(Sperrin),
            or_ce: or(ConditionalEffect),
            or_cde: or(ControlledDirect),
            or_cde_m1: or(ControlledDirectM1),
            or_cde_a1m1: or(ControlledDirectA1M1),
            p_m1,
            p_y1,
            source,
            se: None,
            risks,
        }
    }

    pub fn risk(&self, e: Estimand) -> RiskPair {
        self.risks[e.index()]
    }

    pub fn delta(&self, e: Estimand) -> f64 {
        match e {
            Estimand::Association => self.delta_as,
            Estimand::Sperrin => self.delta_sp,
            Estimand::ConditionalEffect => self.delta_ce,
            Estimand::ControlledDirect => self.delta_cde,
            Estimand::ControlledDirectM1 => self.delta_cde_m1,
            Estimand::ControlledDirectA1M1 => self.delta_cde_a1m1,
            Estimand::Total => self.total_effect,
        }
    }

    /// Odds ratio; the total effect has no stored field and is derived from its risks.
    pub fn odds_ratio(&self, e: Estimand) -> Option<f64> {
        match e {
            Estimand::Association => self.or_as,
            Estimand::Sperrin => self.or_sp,
            Estimand::ConditionalEffect => self.or_ce,
            Estimand::ControlledDirect => self.or_cde,
            Estimand::ControlledDirectM1 => self.or_cde_m1,
            Estimand::ControlledDirectA1M1 => self.or_cde_a1m1,
            Estimand::Total => self.risk(Estimand::Total).odds_ratio().ok(),
        }
    }

    pub fn standard_error(&self, field: &str) -> Option<f64> {
        self.se.as_ref()?.get(field).copied()
    }
}

/// Exact report for `model`.
pub fn report(model: &ScmModel) -> Result<EstimandReport> {
    let mut risks = [RiskPair::new(0.0, 0.0); 7];
    for e in Estimand::ALL {
        risks[e.index()] = risk_pair(model, e)?;
    }
    Ok(EstimandReport::from_risks(
        risks,
        model.joint.p_m1(),
        model.joint.p_y1(),
        Source::Exact,
    ))
}
