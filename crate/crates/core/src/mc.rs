//! Monte Carlo oracle.
//!
//! Each sample draws the four disturbances once and evaluates the factual
//! world together with every counterfactual world from the same draws:
//! `M^{A=a'}` thresholds the shared `eps_M` against `p_M(a', U)` and
//! `Y^{a',m'}` thresholds the shared `eps_Y` against `p_Y(a', m', U)`.
//! Nothing here touches the closed forms in [`crate::estimands`].
//!
//! Samples are drawn in fixed-size batches. Batch `k` uses a ChaCha8 stream
//! seeded with `seed` on stream `k`, and batches only produce integer
//! counts, so the result for a given `(n, seed)` is the same whatever the
//! execution mode or thread count.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimands::{Estimand, EstimandReport, RiskPair, Source};
use crate::exec::{map_reduce, Execution};
use crate::scm::ScmModel;

pub const BATCH_SIZE: u64 = 1 << 16;
pub const MIN_SAMPLES: u64 = 10_000;
/// Smallest conditioning subset an estimate may rest on.
pub const MIN_SUBSET: u64 = 100;

/// One draw of the disturbances with all variables materialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldSample {
    pub eps_a: f64,
    pub eps_u: f64,
    pub eps_m: f64,
    pub eps_y: f64,
    pub a: usize,
    pub u: usize,
    pub m: usize,
    pub y: usize,
    /// `M^{A=a'}`
    pub m_do: [usize; 2],
    /// `Y^{A=a'}`
    pub y_do_a: [usize; 2],
    /// `Y^{a',m'}` indexed `[a'][m']`
    pub y_do_am: [[usize; 2]; 2],
}

#[inline]
fn below(eps: f64, p: f64) -> usize {
    usize::from(eps <= p)
}

impl WorldSample {
    pub fn from_disturbances(model: &ScmModel, eps: [f64; 4]) -> Self {
        let [eps_a, eps_u, eps_m, eps_y] = eps;
        let t = &model.tables;
        let a = below(eps_a, model.p_a);
        let u = below(eps_u, model.p_u);
        let m = below(eps_m, t.p_m(a, u));
        let y = below(eps_y, t.p_y(a, m, u));
        let m_do = [below(eps_m, t.p_m(0, u)), below(eps_m, t.p_m(1, u))];
        let mut y_do_am = [[0; 2]; 2];
        for (aa, row) in y_do_am.iter_mut().enumerate() {
            for (mm, cell) in row.iter_mut().enumerate() {
                *cell = below(eps_y, t.p_y(aa, mm, u));
            }
        }
        let y_do_a = [y_do_am[0][m_do[0]], y_do_am[1][m_do[1]]];
        WorldSample {
            eps_a,
            eps_u,
            eps_m,
            eps_y,
            a,
            u,
            m,
            y,
            m_do,
            y_do_a,
            y_do_am,
        }
    }

    /// `m_do(a) = m` and `y_do_a(a) = y` for the factual `a`.
    pub fn is_consistent(&self) -> bool {
        self.m_do[self.a] == self.m && self.y_do_a[self.a] == self.y
    }
}

/// Four independent uniform draws, in the order `eps_A, eps_U, eps_M, eps_Y`.
pub fn sample_world<R: Rng + ?Sized>(model: &ScmModel, rng: &mut R) -> WorldSample {
    let eps = [rng.random(), rng.random(), rng.random(), rng.random()];
    WorldSample::from_disturbances(model, eps)
}

/// Integer sufficient statistics of a batch of samples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tally {
    pub n: u64,
    /// Factual cells indexed `a << 3 | u << 2 | m << 1 | y`.
    pub factual: [u64; 16],
    /// `(Y^{A=1}, Y^{A=0})` pairs by factual `m`: `[m][y_do1][y_do0]`.
    pub total: [[[u64; 2]; 2]; 2],
    /// `(Y^{1,1}, Y^{0,1})` pairs by factual `(a, m)`: `[a][m][y11][y01]`.
    pub controlled: [[[[u64; 2]; 2]; 2]; 2],
    /// Mediator event cells indexed `m << 2 | m_do0 << 1 | m_do1`.
    pub mediator_events: [u64; 8],
    /// `(M^{A=a'}, Y^{A=a'})` per arm: `[a'][m_do][y_do]`.
    pub own_arm: [[[u64; 2]; 2]; 2],
    pub consistency_violations: u64,
}

impl Tally {
    pub fn add(&mut self, s: &WorldSample) {
        self.n += 1;
        self.factual[(s.a << 3) | (s.u << 2) | (s.m << 1) | s.y] += 1;
        self.total[s.m][s.y_do_a[1]][s.y_do_a[0]] += 1;
        self.controlled[s.a][s.m][s.y_do_am[1][1]][s.y_do_am[0][1]] += 1;
        self.mediator_events[(s.m << 2) | (s.m_do[0] << 1) | s.m_do[1]] += 1;
        for arm in 0..2 {
            self.own_arm[arm][s.m_do[arm]][s.y_do_a[arm]] += 1;
        }
        if !s.is_consistent() {
            self.consistency_violations += 1;
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.n += other.n;
        for (x, y) in self.factual.iter_mut().zip(other.factual) {
            *x += y;
        }
        for m in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    self.total[m][i][j] += other.total[m][i][j];
                    self.own_arm[m][i][j] += other.own_arm[m][i][j];
                    for k in 0..2 {
                        self.controlled[m][i][j][k] += other.controlled[m][i][j][k];
                    }
                }
            }
        }
        for (x, y) in self.mediator_events.iter_mut().zip(other.mediator_events) {
            *x += y;
        }
        self.consistency_violations += other.consistency_violations;
        self
    }

    /// Count of factual samples matching `pred(a, u, m, y)`.
    pub fn count(&self, pred: impl Fn(usize, usize, usize, usize) -> bool) -> u64 {
        (0..16)
            .filter(|&i| pred(i >> 3, (i >> 2) & 1, (i >> 1) & 1, i & 1))
            .map(|i| self.factual[i])
            .sum()
    }

    fn mediator_count(&self, pred: impl Fn(usize, usize, usize) -> bool) -> u64 {
        (0..8)
            .filter(|&i| pred(i >> 2, (i >> 1) & 1, i & 1))
            .map(|i| self.mediator_events[i])
            .sum()
    }
}

fn run_batch(model: &ScmModel, seed: u64, batch: u64, len: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let mut tally = Tally::default();
    for _ in 0..len {
        tally.add(&sample_world(model, &mut rng));
    }
    tally
}

/// Draws `n` samples and tallies them. Output depends only on `(model, n, seed)`.
pub fn simulate(model: &ScmModel, n: u64, seed: u64, exec: Execution) -> Tally {
    let batches = n.div_ceil(BATCH_SIZE);
    map_reduce(
        batches as usize,
        exec,
        |k| {
            let k = k as u64;
            let len = BATCH_SIZE.min(n - k * BATCH_SIZE);
            run_batch(model, seed, k, len)
        },
        Tally::default,
        Tally::merge,
    )
}

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
    pub n_effective: u64,
}

impl McEstimate {
    /// `|value - target| / se`; infinite when `se` is 0 and the values differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }
}

/// Two estimated arm risks with their (co)variances.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ArmEstimate {
    pair: RiskPair,
    var1: f64,
    var0: f64,
    cov: f64,
    n_effective: u64,
}

impl ArmEstimate {
    /// Both arms measured on the same `n` samples; `table[y1][y0]`.
    fn paired(table: [[u64; 2]; 2], n: u64) -> Self {
        let nf = n as f64;
        let r1 = (table[1][0] + table[1][1]) as f64 / nf;
        let r0 = (table[0][1] + table[1][1]) as f64 / nf;
        let both = table[1][1] as f64 / nf;
        ArmEstimate {
            pair: RiskPair::new(r1, r0),
            var1: r1 * (1.0 - r1) / nf,
            var0: r0 * (1.0 - r0) / nf,
            cov: (both - r1 * r0) / nf,
            n_effective: n,
        }
    }

    fn delta(&self) -> McEstimate {
        McEstimate {
            value: self.pair.delta(),
            se: (self.var1 + self.var0 - 2.0 * self.cov).max(0.0).sqrt(),
            n_effective: self.n_effective,
        }
    }

    /// Delta method on the log odds ratio.
    fn odds_ratio(&self) -> Option<McEstimate> {
        let or = self.pair.odds_ratio().ok()?;
        let g1 = self.pair.risk1 * (1.0 - self.pair.risk1);
        let g0 = self.pair.risk0 * (1.0 - self.pair.risk0);
        let var_log = self.var1 / (g1 * g1) + self.var0 / (g0 * g0) - 2.0 * self.cov / (g1 * g0);
        Some(McEstimate {
            value: or,
            se: or * var_log.max(0.0).sqrt(),
            n_effective: self.n_effective,
        })
    }
}

/// Proportion `k / n` with its binomial standard error.
fn proportion(k: u64, n: u64) -> McEstimate {
    let p = k as f64 / n as f64;
    McEstimate {
        value: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
        n_effective: n,
    }
}

fn require(subset: impl Into<String>, count: u64) -> Result<u64> {
    if count < MIN_SUBSET {
        return Err(Error::SubsetTooSmall {
            subset: subset.into(),
            count,
            min: MIN_SUBSET,
        });
    }
    Ok(count)
}

fn sum_pairs<'a>(tables: impl IntoIterator<Item = &'a [[u64; 2]; 2]>) -> [[u64; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for t in tables {
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += t[i][j];
            }
        }
    }
    out
}

fn pair_count(t: &[[u64; 2]; 2]) -> u64 {
    t.iter().flatten().sum()
}

fn arm_estimates(tally: &Tally) -> Result<[ArmEstimate; 7]> {
    let y1 =
        |a: usize, u: usize| tally.count(|aa, uu, m, y| aa == a && uu == u && m == 1 && y == 1);
    let stratum = |a: usize, u: usize| tally.count(|aa, uu, m, _| aa == a && uu == u && m == 1);

    // Association: disjoint arms among M = 1.
    let mut assoc = [(0.0, 0.0, 0u64); 2];
    for (a, slot) in assoc.iter_mut().enumerate() {
        let n_am = require(
            format!("A={a}, M=1"),
            tally.count(|aa, _, m, _| aa == a && m == 1),
        )?;
        let k = tally.count(|aa, _, m, y| aa == a && m == 1 && y == 1);
        let p = k as f64 / n_am as f64;
        *slot = (p, p * (1.0 - p) / n_am as f64, n_am);
    }
    let association = ArmEstimate {
        pair: RiskPair::new(assoc[1].0, assoc[0].0),
        var1: assoc[1].1,
        var0: assoc[0].1,
        cov: 0.0,
        n_effective: assoc[0].2 + assoc[1].2,
    };

    // Sperrin: stratum risks among M = 1, averaged with the estimated P(U | M = 1).
    let n_m1 = require("M=1", tally.count(|_, _, m, _| m == 1))?;
    let w1 = tally.count(|_, u, m, _| u == 1 && m == 1) as f64 / n_m1 as f64;
    let weights = [1.0 - w1, w1];
    let var_w = w1 * (1.0 - w1) / n_m1 as f64;
    let mut risk = [[0.0; 2]; 2];
    let mut var = [0.0; 2];
    for a in 0..2 {
        for u in 0..2 {
            let n_au = require(format!("A={a}, U={u}, M=1"), stratum(a, u))?;
            let p = y1(a, u) as f64 / n_au as f64;
            risk[a][u] = p;
            var[a] += weights[u] * weights[u] * p * (1.0 - p) / n_au as f64;
        }
    }
    let slope = |a: usize| risk[a][1] - risk[a][0];
    let sperrin = ArmEstimate {
        pair: RiskPair::new(
            risk[1][0] * weights[0] + risk[1][1] * weights[1],
            risk[0][0] * weights[0] + risk[0][1] * weights[1],
        ),
        var1: var[1] + slope(1) * slope(1) * var_w,
        var0: var[0] + slope(0) * slope(0) * var_w,
        cov: slope(1) * slope(0) * var_w,
        n_effective: n_m1,
    };

    let ce_table = tally.total[1];
    let conditional = ArmEstimate::paired(ce_table, require("M=1", pair_count(&ce_table))?);
    let total = ArmEstimate::paired(sum_pairs(&tally.total), tally.n);

    let c = &tally.controlled;
    let cde = ArmEstimate::paired(sum_pairs([&c[0][0], &c[0][1], &c[1][0], &c[1][1]]), tally.n);
    let m1 = sum_pairs([&c[0][1], &c[1][1]]);
    let cde_m1 = ArmEstimate::paired(m1, require("M=1", pair_count(&m1))?);
    let cde_a1m1 = ArmEstimate::paired(c[1][1], require("A=1, M=1", pair_count(&c[1][1]))?);

    let mut out = [association; 7];
    out[Estimand::Sperrin.index()] = sperrin;
    out[Estimand::ConditionalEffect.index()] = conditional;
    out[Estimand::ControlledDirect.index()] = cde;
    out[Estimand::ControlledDirectM1.index()] = cde_m1;
    out[Estimand::ControlledDirectA1M1.index()] = cde_a1m1;
    out[Estimand::Total.index()] = total;
    Ok(out)
}

/// A completed Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub tally: Tally,
    pub report: EstimandReport,
    /// Additive contrasts.
    pub deltas: BTreeMap<Estimand, McEstimate>,
    /// Odds ratios; absent when an arm risk is 0 or 1 in the sample.
    pub odds_ratios: BTreeMap<Estimand, McEstimate>,
    pub p_m1: McEstimate,
    pub p_y1: McEstimate,
}

impl McRun {
    pub fn from_tally(tally: Tally, seed: u64) -> Result<Self> {
        let arms = arm_estimates(&tally)?;
        let n = tally.n;
        let p_m1 = proportion(tally.count(|_, _, m, _| m == 1), n);
        let p_y1 = proportion(tally.count(|_, _, _, y| y == 1), n);
        let mut deltas = BTreeMap::new();
        let mut odds_ratios = BTreeMap::new();
        let mut se = BTreeMap::new();
        for e in Estimand::ALL {
            let arm = &arms[e.index()];
            let d = arm.delta();
            se.insert(e.delta_name().to_string(), d.se);
            deltas.insert(e, d);
            if let Some(or) = arm.odds_ratio() {
                se.insert(e.or_name().to_string(), or.se);
                odds_ratios.insert(e, or);
            }
        }
        se.insert("p_m1".to_string(), p_m1.se);
        se.insert("p_y1".to_string(), p_y1.se);

        let mut risks = [RiskPair::new(0.0, 0.0); 7];
        for e in Estimand::ALL {
            risks[e.index()] = arms[e.index()].pair;
        }
        let mut report = EstimandReport::from_risks(
            risks,
            p_m1.value,
            p_y1.value,
            Source::MonteCarlo { n, seed },
        );
        report.se = Some(se);
        Ok(McRun {
            tally,
            report,
            deltas,
            odds_ratios,
            p_m1,
            p_y1,
        })
    }

    /// Every additive contrast plus `P(M=1)` and `P(Y=1)`, keyed by field name.
    pub fn additive_estimates(&self) -> Vec<(&'static str, McEstimate)> {
        let mut out: Vec<_> = self
            .deltas
            .iter()
            .map(|(e, est)| (e.delta_name(), *est))
            .collect();
        out.push(("p_m1", self.p_m1));
        out.push(("p_y1", self.p_y1));
        out
    }

    /// `P(Y^{A=a} = 1 | M = 1)`
    pub fn counterfactual_given_factual_m1(&self, a: usize) -> McEstimate {
        let t = &self.tally.total[1];
        let n = pair_count(t);
        let k = if a == 1 {
            t[1][0] + t[1][1]
        } else {
            t[0][1] + t[1][1]
        };
        proportion(k, n)
    }

    /// `P(Y^{A=a} = 1 | M^{A=a} = 1)`
    pub fn counterfactual_given_own_m1(&self, a: usize) -> McEstimate {
        let t = &self.tally.own_arm[a][1];
        proportion(t[1], t[0] + t[1])
    }

    /// `P(Y = 1 | A = a, M = 1)`
    pub fn factual_given_am1(&self, a: usize) -> McEstimate {
        let n = self.tally.count(|aa, _, m, _| aa == a && m == 1);
        proportion(
            self.tally.count(|aa, _, m, y| aa == a && m == 1 && y == 1),
            n,
        )
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::SampleSizeTooSmall {
            n,
            min: MIN_SAMPLES,
        });
    }
    Ok(())
}

pub fn run(model: &ScmModel, n: u64, seed: u64, exec: Execution) -> Result<McRun> {
    check_n(n)?;
    McRun::from_tally(simulate(model, n, seed, exec), seed)
}

/// Monte Carlo counterpart of [`crate::estimands::report`], with standard errors.
pub fn estimate_report(model: &ScmModel, n: u64, seed: u64) -> Result<EstimandReport> {
    run(model, n, seed, Execution::default()).map(|r| r.report)
}

/// Joint occurrence of two mediator events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventOverlap {
    /// `P(E and F)`
    pub both: f64,
    /// `P(E or F)`
    pub either: f64,
}

impl EventOverlap {
    /// Share of the union covered by the intersection (1 for identical events).
    pub fn jaccard(&self) -> f64 {
        if self.either == 0.0 {
            1.0
        } else {
            self.both / self.either
        }
    }
}

/// Empirical comparison of `{M=1}`, `{M^{A=0}=1}` and `{M^{A=1}=1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSetDivergence {
    pub p_m_factual: McEstimate,
    pub p_m_do0: McEstimate,
    pub p_m_do1: McEstimate,
    pub factual_vs_do0: EventOverlap,
    pub factual_vs_do1: EventOverlap,
    pub do0_vs_do1: EventOverlap,
    /// Samples with `M^{A=1} = 0` but `M^{A=0} = 1`.
    pub order_violations: u64,
}

pub fn event_set_divergence(model: &ScmModel, n: u64, seed: u64) -> Result<EventSetDivergence> {
    check_n(n)?;
    let tally = simulate(model, n, seed, Execution::default());
    Ok(divergence_from_tally(&tally))
}

pub fn divergence_from_tally(tally: &Tally) -> EventSetDivergence {
    let n = tally.n;
    let frac = |k: u64| k as f64 / n as f64;
    let overlap = |pick: fn(usize, usize, usize) -> (bool, bool)| EventOverlap {
        both: frac(tally.mediator_count(|m, d0, d1| {
            let (e, f) = pick(m, d0, d1);
            e && f
        })),
        either: frac(tally.mediator_count(|m, d0, d1| {
            let (e, f) = pick(m, d0, d1);
            e || f
        })),
    };
    EventSetDivergence {
        p_m_factual: proportion(tally.mediator_count(|m, _, _| m == 1), n),
        p_m_do0: proportion(tally.mediator_count(|_, d0, _| d0 == 1), n),
        p_m_do1: proportion(tally.mediator_count(|_, _, d1| d1 == 1), n),
        factual_vs_do0: overlap(|m, d0, _| (m == 1, d0 == 1)),
        factual_vs_do1: overlap(|m, _, d1| (m == 1, d1 == 1)),
        do0_vs_do1: overlap(|_, d0, d1| (d0 == 1, d1 == 1)),
        order_violations: tally.mediator_count(|_, d0, d1| d0 == 1 && d1 == 0),
    }
}
