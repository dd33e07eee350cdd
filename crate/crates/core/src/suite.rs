//! The property suite behind `kpplab verify`: every check yields one verdict row.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conv::Boundary;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kernels::{marginal_pair, truncate, Kernel1D, KernelSpec};
use crate::model::ModelParams;
use crate::reduction::{verify_planar_reduction, ReductionOptions};
use crate::semiflow::*;
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub verdict: Verdict,
    /// Measured quantity compared against `tolerance`; `NaN` when skipped.
    pub value: f64,
    pub tolerance: f64,
    pub note: String,
}

impl CheckRow {
    fn measured(name: &str, value: f64, tolerance: f64, pass: bool, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            value,
            tolerance,
            note: note.into(),
        }
    }

    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self::measured(name, value, tolerance, value <= tolerance, "")
    }

    fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::Skipped,
            value: f64::NAN,
            tolerance: f64::NAN,
            note: reason.into(),
        }
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::Fail,
            value: f64::NAN,
            tolerance: f64::NAN,
            note: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteOptions {
    pub step: f64,
    /// Half-width of the periodic test domain.
    pub half_width: f64,
    pub horizon: f64,
    pub dt: f64,
    pub pairs: usize,
    pub truncation_radii: Vec<f64>,
    pub direction: Vec<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            step: 0.05,
            half_width: 10.0,
            horizon: 1.0,
            dt: 0.01,
            pairs: 100,
            truncation_radii: vec![2.0, 5.0, 10.0],
            direction: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub rows: Vec<CheckRow>,
}

impl SuiteReport {
    /// No applicable check failed.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }
}

fn row(name: &str, check: impl FnOnce() -> Result<CheckRow>) -> CheckRow {
    check().unwrap_or_else(|e| CheckRow::failed(name, &e))
}

/// Runs every property check for the kernel pair along `opts.direction`.
pub fn run_suite(
    aplus: &KernelSpec,
    aminus: &KernelSpec,
    params: &ModelParams,
    tol: &Tolerances,
    opts: &SuiteOptions,
    seed: u64,
) -> Result<SuiteReport> {
    params.check()?;
    tol.validate()?;
    let (a, b) = marginal_pair(aplus, aminus, &opts.direction, opts.step)?;
    let grid = Grid1D::from_extent(opts.step, opts.half_width)?;
    let system = ReactionSystem::new(&a, &b, *params, grid)?;
    let theta = params.theta();
    let co = CheckOptions::new(opts.horizon, opts.dt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let invariant = system.tube_invariant();
    let not_expected = "not expected: J_theta is negative somewhere, so [0, theta] need not be invariant";
    let mut rows = Vec::new();

    let u0 = Field::new(grid, random_tube_field(&grid, theta, &mut rng), Boundary::Periodic)?;
    rows.push(if invariant {
        row("tube_invariance", || Ok(CheckRow::below("tube_invariance", tube_violation(&system, &u0, co)?, 1e-10)))
    } else {
        CheckRow::skipped("tube_invariance", not_expected)
    });

    rows.push(row("translation_equivariance", || {
        let shift = 7.0 * grid.step();
        Ok(CheckRow::below(
            "translation_equivariance",
            translation_equivariance_check(&system, &u0, shift, co)?,
            1e-10,
        ))
    }));

    rows.push(row("constant_data", || {
        let c0 = 0.3 * theta;
        let traj = evolve_rk4(&system, &Field::constant(grid, c0, Boundary::Periodic), Rk4Options::new(opts.horizon, opts.dt))?;
        let exact = params.logistic_solution(c0, opts.horizon)?;
        let err = traj.last().values.iter().map(|v| (v - exact).abs()).fold(0.0, f64::max);
        Ok(CheckRow::below("constant_data", err, tol.comparison_tol))
    }));

    rows.push(if invariant {
        row("comparison", || {
            let mut worst = 0.0f64;
            for _ in 0..opts.pairs {
                let (lo, hi) = random_ordered_pair(&grid, theta, &mut rng);
                let lo = Field::new(grid, lo, Boundary::Periodic)?;
                let hi = Field::new(grid, hi, Boundary::Periodic)?;
                worst = worst.max(comparison_check(&system, &lo, &hi, co, tol.comparison_tol)?.max_violation);
            }
            Ok(CheckRow::measured(
                "comparison",
                worst,
                tol.comparison_tol,
                worst <= tol.comparison_tol,
                format!("{} random ordered pairs", opts.pairs),
            ))
        })
    } else {
        CheckRow::skipped("comparison", not_expected)
    });

    rows.push(if invariant {
        row("strict_separation", || {
            let zero = Field::constant(grid, 0.0, Boundary::Periodic);
            let bump = Field::from_fn(grid, Boundary::Periodic, |s| 0.5 * theta * (-s * s).exp());
            let r = strict_separation_check(&system, &zero, &bump, co, opts.horizon)?;
            Ok(CheckRow::measured("strict_separation", r.min_gap, 0.0, r.pass, "minimum gap at the horizon"))
        })
    } else {
        CheckRow::skipped("strict_separation", not_expected)
    });

    rows.push(row("continuity", || {
        let base = Field::from_fn(grid, Boundary::Periodic, |s| theta * (0.5 + 0.3 * (s / 3.0).sin()));
        let w = 0.5 * opts.half_width;
        let r = continuity_surrogate(&system, &base, &[1e-2, 1e-3, 1e-4], co, (-w, w))?;
        let finite = r.constant.is_finite();
        Ok(CheckRow::measured("continuity", r.constant, f64::INFINITY, finite, "Lipschitz constant estimate"))
    }));

    rows.push(if invariant {
        row("monotonicity", || {
            let wave_grid = Grid1D::from_extent(opts.step, 2.0 * opts.half_width)?;
            let wave_system = ReactionSystem::new(&a, &b, *params, wave_grid)?;
            let m0 = Field::new(wave_grid, random_monotone_field(&wave_grid, theta, &mut rng), Boundary::Wave)?;
            Ok(CheckRow::below("monotonicity", monotonicity_violation(&wave_system, &m0, co)?, 1e-10))
        })
    } else {
        CheckRow::skipped("monotonicity", not_expected)
    });

    for &r in &opts.truncation_radii {
        let name = format!("truncation_r{r}");
        rows.push(if invariant {
            truncation_row(&name, &system, &a, &b, params, r, &u0, co)
        } else {
            CheckRow::skipped(&name, not_expected)
        });
    }

    rows.push(row("necessity_counterexample", || {
        let r = necessity_counterexample(&a, &b, params, None)?;
        Ok(if r.applicable {
            CheckRow::measured(
                "necessity_counterexample",
                r.rhs_at_y0,
                0.0,
                r.pass,
                "applicable: rhs must be positive at the probe point",
            )
        } else {
            CheckRow::skipped("necessity_counterexample", "J_theta is nonnegative, so no counterexample exists")
        })
    }));

    rows.push(row("stability_probe", || {
        let r = stability_probe(&system, 0.01 * theta, CheckOptions::new(10.0 / params.beta(), opts.dt))?;
        Ok(CheckRow::measured(
            "stability_probe",
            r.return_final / r.return_initial,
            0.5,
            r.returns && r.escapes,
            format!("escape from 0: {:.3e} -> {:.3e}", r.escape_initial, r.escape_final),
        ))
    }));

    rows.push(planar_row(aplus, aminus, params, opts, theta));
    Ok(SuiteReport { rows })
}

#[allow(clippy::too_many_arguments)]
fn truncation_row(
    name: &str,
    system: &ReactionSystem,
    a: &Kernel1D,
    b: &Kernel1D,
    params: &ModelParams,
    radius: f64,
    u0: &Field,
    co: CheckOptions,
) -> CheckRow {
    row(name, || {
        let tr = truncate(a, b, params, radius)?;
        if !tr.valid {
            return Ok(CheckRow::skipped(
                name,
                format!(
                    "truncated mass condition kappa_plus A+_R > m fails ({:.6} <= {:.6})",
                    params.kappa_plus * tr.mass_plus,
                    params.mortality
                ),
            ));
        }
        let ts = ReactionSystem::truncated(&tr, *params, *system.grid())?;
        let r = truncation_bound_check(system, &ts, u0, co)?;
        let ordered = tr.theta_r > 0.0 && tr.theta_r <= params.theta() + 1e-12;
        Ok(CheckRow::measured(
            name,
            r.max_violation.max(r.max_above_theta_r),
            1e-8,
            r.pass && ordered,
            format!("theta_R = {:.10}", tr.theta_r),
        ))
    })
}

fn planar_row(aplus: &KernelSpec, aminus: &KernelSpec, params: &ModelParams, opts: &SuiteOptions, theta: f64) -> CheckRow {
    let name = "planar_reduction";
    if aplus.dim() != 2 || aminus.dim() != 2 {
        return CheckRow::skipped(name, "kernels are not two-dimensional");
    }
    row(name, || {
        let xi = [opts.direction[0], opts.direction[1]];
        let grid = Grid1D::from_extent(opts.step, 3.0 * opts.half_width)?;
        let psi = Field::from_fn(grid, Boundary::Wave, |s| 0.5 * theta * (1.0 - (0.8 * s).tanh()));
        let ro = ReductionOptions {
            step: opts.step,
            window: 0.5 * opts.half_width,
            strip: 0.0,
        };
        let r = verify_planar_reduction(&psi, xi, aplus, aminus, params, &ro)?;
        Ok(CheckRow::below(name, r.discrepancy, 1e-6))
    })
}
