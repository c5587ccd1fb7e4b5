//! One-parameter sweeps over equally spaced grids.

use crate::error::{Error, Result};
use crate::estimands::{report, EstimandReport};
use crate::exec::{map_indices, Execution};
use crate::scm::{Coefficient, ScmModel, ScmParams};

/// Which scales a caller wants plotted. Reports always carry both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scales {
    pub additive: bool,
    pub odds_ratio: bool,
}

impl Default for Scales {
    fn default() -> Self {
        Scales {
            additive: false,
            odds_ratio: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub base: ScmParams,
    pub vary: Coefficient,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub scales: Scales,
}

pub const FIGURE_RANGE: (f64, f64) = (-3.0, 3.0);
pub const FIGURE_STEPS: usize = 61;

/// Axes swept in the Figure 2 panels.
pub const FIG2_AXES: [Coefficient; 4] = [
    Coefficient::AlphaA,
    Coefficient::AlphaU,
    Coefficient::BetaU,
    Coefficient::AlphaAU,
];

/// Axes swept in the Figure 3 panels.
pub const FIG3_AXES: [Coefficient; 4] = [
    Coefficient::AlphaAU,
    Coefficient::BetaM,
    Coefficient::BetaAU,
    Coefficient::BetaAUM,
];

impl SweepSpec {
    pub fn new(
        base: ScmParams,
        vary: Coefficient,
        from: f64,
        to: f64,
        steps: usize,
    ) -> Result<Self> {
        let spec = SweepSpec {
            base,
            vary,
            from,
            to,
            steps,
            scales: Scales::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.from.is_finite() && self.to.is_finite()) || self.from >= self.to {
            return Err(Error::InvalidSweep(format!(
                "range [{}, {}] must be finite with from < to",
                self.from, self.to
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidSweep(format!(
                "steps = {} must be at least 2",
                self.steps
            )));
        }
        self.base.validate()
    }

    /// Grid point `k`: `from + k (to - from) / (steps - 1)`.
    pub fn grid_value(&self, k: usize) -> f64 {
        self.from + (k as f64 * (self.to - self.from)) / (self.steps - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.grid_value(k)).collect()
    }
}

/// Figure 2 base: no exposure terms in the outcome model, `beta_M` either 0
/// (top row) or 1 (bottom row), `alpha_A = alpha_U = beta_U = 1`, `alpha_AU = 0`.
pub fn fig2_base(beta_m: f64) -> ScmParams {
    ScmParams {
        alpha_a: 1.0,
        alpha_u: 1.0,
        alpha_au: 0.0,
        beta_u: 1.0,
        beta_m,
        ..ScmParams::default()
    }
}

/// Figure 3 base: `alpha_A = alpha_U = beta_A = beta_UM = 2`, `beta_U = 3`,
/// `beta_AM = -2` and the quartet `alpha_AU, beta_M, beta_AU, beta_AUM` at 1.
///
/// The published caption reads "alpha_A = alpha_U = 2 = beta_A = beta_UM = 2";
/// it is taken to mean all four equal 2, as the accompanying text states.
pub fn fig3_base() -> ScmParams {
    ScmParams {
        alpha_a: 2.0,
        alpha_u: 2.0,
        alpha_au: 1.0,
        beta_a: 2.0,
        beta_u: 3.0,
        beta_m: 1.0,
        beta_au: 1.0,
        beta_am: -2.0,
        beta_um: 2.0,
        beta_aum: 1.0,
        ..ScmParams::default()
    }
}

fn figure_spec(base: ScmParams, vary: Coefficient) -> SweepSpec {
    SweepSpec {
        base,
        vary,
        from: FIGURE_RANGE.0,
        to: FIGURE_RANGE.1,
        steps: FIGURE_STEPS,
        scales: Scales::default(),
    }
}

pub fn preset_fig2(beta_m: f64, vary: Coefficient) -> Result<SweepSpec> {
    if beta_m != 0.0 && beta_m != 1.0 {
        return Err(Error::InvalidSweep(format!(
            "Figure 2 uses beta_M in {{0, 1}}, got {beta_m}"
        )));
    }
    if !FIG2_AXES.contains(&vary) {
        return Err(Error::InvalidSweep(format!(
            "{vary} is not a Figure 2 axis (alpha_A, alpha_U, beta_U, alpha_AU)"
        )));
    }
    Ok(figure_spec(fig2_base(beta_m), vary))
}

pub fn preset_fig3(vary: Coefficient) -> Result<SweepSpec> {
    if !FIG3_AXES.contains(&vary) {
        return Err(Error::InvalidSweep(format!(
            "{vary} is not a Figure 3 axis (alpha_AU, beta_M, beta_AU, beta_AUM)"
        )));
    }
    Ok(figure_spec(fig3_base(), vary))
}

/// One grid point. A point whose model has a zero-probability conditioning
/// event keeps its slot with the error instead of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param_value: f64,
    pub outcome: Result<EstimandReport>,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(map_indices(spec.steps, exec, |k| {
        let param_value = spec.grid_value(k);
        let params = spec.base.with(spec.vary, param_value);
        SweepRow {
            param_value,
            outcome: ScmModel::new(&params).and_then(|m| report(&m)),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::InterceptMode;

    fn or1(x: Option<f64>) -> bool {
        (x.unwrap() - 1.0).abs() <= 1e-12
    }

    #[test]
    fn fig2_presets() {
        let s = preset_fig2(0.0, Coefficient::AlphaA).unwrap();
        let b = s.base;
        assert_eq!(
            (b.alpha_u, b.beta_u, b.alpha_au, b.beta_m),
            (1.0, 1.0, 0.0, 0.0)
        );
        assert_eq!(
            (b.beta_a, b.beta_am, b.beta_au, b.beta_um, b.beta_aum),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!((b.p_a, b.p_u, b.nu), (0.5, 0.5, 0.0));
        assert_eq!((s.from, s.to, s.steps), (-3.0, 3.0, 61));

        let s = preset_fig2(1.0, Coefficient::BetaU).unwrap();
        assert_eq!(s.base, fig2_base(1.0));
        assert_eq!(s.base.beta_m, 1.0);

        assert!(matches!(
            preset_fig2(0.0, Coefficient::BetaAM),
            Err(Error::InvalidSweep(_))
        ));
        assert!(preset_fig2(0.5, Coefficient::AlphaA).is_err());
    }

    #[test]
    fn fig3_presets() {
        let s = preset_fig3(Coefficient::BetaM).unwrap();
        assert_eq!(
            (s.base.alpha_au, s.base.beta_au, s.base.beta_aum),
            (1.0, 1.0, 1.0)
        );
        let s = preset_fig3(Coefficient::AlphaAU).unwrap();
        assert_eq!(
            (s.base.beta_m, s.base.beta_au, s.base.beta_aum),
            (1.0, 1.0, 1.0)
        );
        assert_eq!(
            (
                s.base.alpha_a,
                s.base.alpha_u,
                s.base.beta_a,
                s.base.beta_um
            ),
            (2.0, 2.0, 2.0, 2.0)
        );
        assert_eq!((s.base.beta_u, s.base.beta_am), (3.0, -2.0));
        assert!(preset_fig3(Coefficient::AlphaA).is_err());
    }

    #[test]
    fn spec_validation() {
        let base = ScmParams::default();
        assert!(SweepSpec::new(base, Coefficient::BetaM, 1.0, 1.0, 5).is_err());
        assert!(SweepSpec::new(base, Coefficient::BetaM, 2.0, 1.0, 5).is_err());
        assert!(SweepSpec::new(base, Coefficient::BetaM, 0.0, 1.0, 1).is_err());
        assert!(SweepSpec::new(base, Coefficient::BetaM, 0.0, f64::NAN, 5).is_err());
        assert!(SweepSpec::new(
            ScmParams { p_a: 1.0, ..base },
            Coefficient::BetaM,
            0.0,
            1.0,
            5
        )
        .is_err());
    }

    #[test]
    fn grid_is_exact_and_increasing() {
        let s = SweepSpec::new(ScmParams::default(), Coefficient::BetaM, -1.3, 2.9, 17).unwrap();
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 17);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.param_value, -1.3 + (k as f64 * (2.9 - -1.3)) / 16.0);
        }
        assert!(rows.windows(2).all(|w| w[0].param_value < w[1].param_value));
        assert_eq!(rows[0].param_value, -1.3);
    }

    #[test]
    fn revisiting_the_base_value_is_bit_identical() {
        let s = preset_fig2(1.0, Coefficient::AlphaA).unwrap();
        let rows = run_sweep(&s).unwrap();
        let at_one = rows.iter().find(|r| r.param_value == 1.0).unwrap();
        let base = report(&ScmModel::new(&s.base).unwrap()).unwrap();
        assert_eq!(at_one.outcome.as_ref().unwrap(), &base);
    }

    #[test]
    fn sequential_and_parallel_sweeps_agree() {
        let s = preset_fig3(Coefficient::BetaAUM).unwrap();
        assert_eq!(
            run_sweep_with(&s, Execution::Sequential).unwrap(),
            run_sweep_with(&s, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn fig2_top_alpha_a_causal_ors_are_one() {
        for row in run_sweep(&preset_fig2(0.0, Coefficient::AlphaA).unwrap()).unwrap() {
            let r = row.outcome.unwrap();
            assert!(or1(r.or_ce) && or1(r.or_sp) && or1(r.or_cde) && or1(r.or_cde_a1m1));
        }
    }

    #[test]
    fn fig2_bottom_alpha_a_above_two_reverses_association() {
        for row in run_sweep(&preset_fig2(1.0, Coefficient::AlphaA).unwrap()).unwrap() {
            if row.param_value > 2.0 {
                let r = row.outcome.unwrap();
                assert!(
                    r.or_as.unwrap() < 1.0 && r.or_ce.unwrap() > 1.0,
                    "{}",
                    row.param_value
                );
            }
        }
    }

    #[test]
    fn fig3_beta_aum_panel_follows_the_contrast_sign() {
        // With beta_A + beta_AM = 0 the u = 0 contrast vanishes, so the sign of
        // every controlled effect is the sign of beta_AU + beta_AUM = 1 + beta_AUM.
        for row in run_sweep(&preset_fig3(Coefficient::BetaAUM).unwrap()).unwrap() {
            let r = row.outcome.unwrap();
            assert!(r.or_as.unwrap() < 1.0, "{}", row.param_value);
            let expected = (1.0 + row.param_value).signum();
            for or in [r.or_cde, r.or_cde_a1m1] {
                let log = or.unwrap().ln();
                if (1.0 + row.param_value).abs() < 1e-9 {
                    assert!(log.abs() < 1e-12);
                } else {
                    assert_eq!(log.signum(), expected, "{}", row.param_value);
                }
            }
            if row.param_value >= -2.8 {
                assert!(r.or_ce.unwrap() > 1.0, "{}", row.param_value);
            }
        }
    }

    #[test]
    fn degenerate_points_keep_their_slot() {
        // p_M underflows to 0 unless alpha_U lifts the u = 1 stratum.
        let base = ScmParams {
            intercepts: InterceptMode::Explicit {
                alpha_0: -800.0,
                beta_0: 0.0,
            },
            ..ScmParams::default()
        };
        let s = SweepSpec::new(base, Coefficient::AlphaU, 0.0, 1600.0, 3).unwrap();
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].outcome.as_ref().unwrap_err().is_degenerate());
        assert!(rows[1].outcome.is_ok());
        assert!(rows[2].outcome.is_ok());
    }
}
