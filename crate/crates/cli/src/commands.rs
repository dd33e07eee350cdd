//! The five subcommands. Each writes its run directory and returns the exit status.

use kpplab_core::kernels::{marginal_pair, Kernel1D};
use kpplab_core::semiflow::*;
use kpplab_core::suite::run_suite;
use kpplab_core::wave::*;
use kpplab_core::reduction::anisotropy_sweep;
use kpplab_core::{Error, Grid1D};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{Initial, RunConfig, Scheme};
use crate::output::{finite, num, RunDir};

/// Why a run stopped, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Assumption(String),
    Numerics(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Assumption(_) => 2,
            Failure::Numerics(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Assumption(m) | Failure::Numerics(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Input(_) | Error::GridMismatch(_) => Failure::Config(msg),
            Error::Assumption(_) | Error::Divergence(_) => Failure::Assumption(msg),
            _ => Failure::Numerics(msg),
        }
    }
}

pub type Outcome = Result<(), Failure>;

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub quiet: bool,
}

impl Ctx<'_> {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn marginals(&self) -> Result<(Kernel1D, Kernel1D), Failure> {
        let k = &self.cfg.kernels;
        Ok(marginal_pair(&k.aplus, &k.aminus, &k.direction(), self.cfg.grid.step)?)
    }

    fn checked_params(&self) -> Result<(), Failure> {
        self.cfg.model.check()?;
        for w in self.cfg.model.validate().warnings {
            self.note(&format!("warning: {w}"));
        }
        Ok(())
    }

    fn profile_options(&self) -> ProfileOptions {
        let p = &self.cfg.profile;
        ProfileOptions {
            half_width: p.half_width,
            dt: p.dt,
            max_iter: p.max_iter,
            omega: p.omega,
            profile_tol: self.cfg.tolerances.profile_tol,
            drift_tol: self.cfg.tolerances.drift_tol,
            ..ProfileOptions::default()
        }
    }
}

fn io(e: String) -> Failure {
    Failure::Numerics(e)
}

pub fn simulate(ctx: &Ctx, mut out: RunDir) -> Outcome {
    let cfg = ctx.cfg;
    ctx.checked_params()?;
    let params = cfg.model;
    let (a, b) = ctx.marginals()?;
    let grid = Grid1D::from_extent(cfg.grid.step, cfg.grid.half_width)?;
    let system = ReactionSystem::new(&a, &b, params, grid)?;
    if !system.tube_invariant() {
        ctx.note("warning: J_theta is negative somewhere; solutions may leave [0, theta]");
    }
    let theta = params.theta();
    let boundary = cfg.grid.boundary;
    let u0 = match cfg.simulate.initial {
        Initial::Step { position } => Field::from_fn(grid, boundary, |s| if s <= position { theta } else { 0.0 }),
        Initial::Constant { value } => Field::constant(grid, value, boundary),
        Initial::Bump { amplitude, width } => Field::from_fn(grid, boundary, |s| amplitude * (-(s / width).powi(2)).exp()),
        Initial::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Field::new(grid, random_tube_field(&grid, theta, &mut rng), boundary)?
        }
    };
    let level = cfg.simulate.level.unwrap_or(0.5 * theta);
    let horizon = cfg.simulate.horizon;
    let (traj, scheme_info) = match cfg.scheme {
        Scheme::Rk4 { dt } => {
            let opts = Rk4Options::new(horizon, dt)
                .sample_every(cfg.simulate.sample_every)
                .level(level)
                .clip_tol(Some(cfg.tolerances.clip_tol));
            let traj = evolve_rk4(&system, &u0, opts)?;
            let info = json!({ "scheme": "rk4", "dt": dt, "max_overshoot": traj.meta.max_overshoot });
            (traj, info)
        }
        Scheme::Picard { tau_hat, substeps, max_iter } => {
            picard_trajectory(&system, &u0, level, horizon, cfg.simulate.sample_every, tau_hat, substeps, max_iter, cfg.tolerances.picard_tol)?
        }
    };
    ctx.note(&format!("simulated {} samples up to t = {}", traj.times.len(), traj.times.last().unwrap()));

    let rows = traj.times.iter().zip(&traj.fields).flat_map(|(t, f)| {
        grid.points().zip(f).map(move |(s, u)| vec![num(*t), num(s), num(*u)])
    });
    out.csv("trajectory.csv", &["t", "s", "u"], rows).map_err(io)?;
    let fronts: Vec<Vec<String>> = traj
        .times
        .iter()
        .zip(&traj.fronts)
        .filter_map(|(t, x)| x.map(|x| vec![num(*t), num(x)]))
        .collect();
    let n_fronts = fronts.len();
    out.csv("fronts.csv", &["t", "position"], fronts).map_err(io)?;

    let last = traj.last();
    let speed = if n_fronts >= 3 {
        match measure_speed(&traj, level, None) {
            Ok(fit) => json!({ "speed": fit.speed, "stderr": finite(fit.stderr), "samples": fit.samples, "window": [fit.window.0, fit.window.1] }),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        Value::Null
    };
    let mut results = json!({
        "theta": theta,
        "level": level,
        "final_time": traj.times.last().copied(),
        "final_min": last.min(),
        "final_max": last.max(),
        "fronts_recorded": n_fronts,
        "speed_fit": speed,
        "run": scheme_info,
    });
    if let Initial::Constant { value } = cfg.simulate.initial {
        let t = *traj.times.last().unwrap();
        let exact = params.logistic_solution(value, t)?;
        let err = last.values.iter().map(|v| (v - exact).abs()).fold(0.0, f64::max);
        results["logistic"] = json!({ "exact": exact, "max_error": err });
    }
    out.finish("simulate", cfg.seed, "ok", results).map_err(io)
}

#[allow(clippy::too_many_arguments)]
fn picard_trajectory(
    system: &ReactionSystem,
    u0: &Field,
    level: f64,
    horizon: f64,
    every: f64,
    tau_hat: f64,
    substeps: usize,
    max_iter: usize,
    tol: f64,
) -> Result<(Trajectory, Value), Failure> {
    let samples = (horizon / every).round().max(1.0) as usize;
    let grid = *system.grid();
    let front = |v: &[f64]| front_position(&grid, v, level).ok();
    let mut times = vec![0.0];
    let mut fields = vec![u0.values.clone()];
    let mut fronts = vec![front(&u0.values)];
    let mut u = u0.clone();
    let mut iterations = 0usize;
    let mut worst = 0.0f64;
    for k in 1..=samples {
        let t = horizon * k as f64 / samples as f64;
        let opts = PicardOptions {
            horizon: t - times[k - 1],
            tau_hat,
            substeps,
            max_iter,
            tol,
        };
        let run = evolve_picard(system, &u, opts)?;
        iterations += run.iterations.iter().sum::<usize>();
        worst = run.residuals.iter().copied().fold(worst, f64::max);
        u = run.field;
        times.push(t);
        fronts.push(front(&u.values));
        fields.push(u.values.clone());
    }
    let params = *system.params();
    let traj = Trajectory {
        grid,
        boundary: u0.boundary,
        times,
        fields,
        level,
        fronts,
        meta: RunMeta {
            scheme: "picard".into(),
            dt: tau_hat / substeps as f64,
            step: grid.step(),
            params,
            theta: params.theta(),
            max_overshoot: 0.0,
        },
    };
    let info = json!({ "scheme": "picard", "tau_hat": tau_hat, "substeps": substeps, "iterations": iterations, "max_residual": worst });
    Ok((traj, info))
}

pub fn speed(ctx: &Ctx, mut out: RunDir) -> Outcome {
    let cfg = ctx.cfg;
    ctx.checked_params()?;
    let (a, _) = ctx.marginals()?;
    let sc = &cfg.speed;
    let curve = speed_curve(&a, &cfg.model, (sc.lambda_min, sc.lambda_max), sc.n)?;
    let ms = minimal_speed(&a, &cfg.model)?;
    let rows = curve.lambdas.iter().zip(&curve.speeds).map(|(l, c)| vec![num(*l), num(*c)]);
    out.csv("speed_curve.csv", &["lambda", "c"], rows).map_err(io)?;
    ctx.note(&format!("c* = {:.10} at lambda* = {:.10}", ms.c_star, ms.lambda_star));
    let results = json!({
        "c_star": ms.c_star,
        "lambda_star": ms.lambda_star,
        "lambda_max_finite": ms.lambda_max_finite,
        "boundary_minimum": ms.boundary_minimum,
        "sampled_c_star": curve.c_star,
        "sampled_lambda_star": curve.lambda_star,
        "divergent_samples": curve.speeds.iter().filter(|c| !c.is_finite()).count(),
    });
    out.finish("speed", cfg.seed, "ok", results).map_err(io)
}

pub fn profile(ctx: &Ctx, mut out: RunDir) -> Outcome {
    let cfg = ctx.cfg;
    ctx.checked_params()?;
    let params = cfg.model;
    let (a, b) = ctx.marginals()?;
    let opts = ctx.profile_options();
    let tol = &cfg.tolerances;

    let (prof, branch, c_star) = if cfg.profile.c == Some(0.0) && params.kappa_local > 0.0 {
        let (prof, change) = stationary_profile(&a, &b, &params, None, &opts)?;
        ctx.note(&format!("stationary iteration stopped after {} steps, last change {change:.3e}", prof.report.iterations));
        let c_star = minimal_speed(&a, &params).ok().map(|m| m.c_star);
        (prof, "stationary", c_star)
    } else {
        let ms = minimal_speed(&a, &params)?;
        let c = cfg.profile.c.unwrap_or(ms.c_star + cfg.profile.offset);
        if c < ms.c_star - 1e-9 {
            return subcritical(ctx, out, &a, &b, c, ms.c_star, &opts);
        }
        let prof = solve_profile(&a, &b, &params, c, &opts)?;
        ctx.note(&format!("profile at c = {c} converged after {} iterations", prof.report.iterations));
        (prof, "traveling", Some(ms.c_star))
    };

    let rows = prof.grid.points().zip(&prof.values).map(|(s, v)| vec![num(s), num(*v)]);
    out.csv("profile.csv", &["s", "psi"], rows).map_err(io)?;
    let d = profile_diagnostics(&prof.grid, &prof.values, prof.theta, tol.strict_tol);
    let residual = profile_residual(&prof, &a, &b, &params, tol.boundary_tol);
    let mut results = json!({
        "branch": branch,
        "speed": prof.speed,
        "c_star": c_star,
        "theta": prof.theta,
        "iterations": prof.report.iterations,
        "last_change": finite(prof.report.residual),
        "diagnostics": d,
    });
    let below = match (branch, c_star) {
        ("stationary", Some(cs)) if cs > 0.0 => {
            let note = format!("c = 0 lies below c* = {cs:.10}; no stationary monotone wave connects theta to 0");
            results["note"] = json!(note);
            format!("; {note}")
        }
        _ => String::new(),
    };
    let failure = match &residual {
        Ok(r) => {
            results["residual"] = json!({ "sup": r.sup, "argmax": r.argmax, "window": [r.window.0, r.window.1] });
            (r.sup > tol.residual_tol)
                .then(|| format!("profile residual {:.3e} exceeds residual_tol {:.1e}", r.sup, tol.residual_tol))
        }
        Err(e) => {
            results["residual"] = json!({ "error": e.to_string() });
            Some(e.to_string())
        }
    };
    match failure {
        None => out.finish("profile", cfg.seed, "ok", results).map_err(io),
        Some(msg) => {
            out.finish("profile", cfg.seed, "failed", results).map_err(io)?;
            Err(Failure::Numerics(format!("{msg}{below}")))
        }
    }
}

fn subcritical(
    ctx: &Ctx,
    mut out: RunDir,
    a: &Kernel1D,
    b: &Kernel1D,
    c: f64,
    c_star: f64,
    opts: &ProfileOptions,
) -> Outcome {
    let note = format!(
        "no monotone traveling wave exists for c = {c} below the minimal speed c* = {c_star:.10}"
    );
    let drift = match subcritical_drift(a, b, &ctx.cfg.model, c, 50, 10, opts) {
        Ok(r) => {
            let rows = r.drifts.iter().zip(&r.positions).enumerate().map(|(k, (d, x))| vec![(k + 1).to_string(), num(*d), num(*x)]);
            out.csv("drift.csv", &["iteration", "drift", "position"], rows).map_err(io)?;
            json!({ "total": r.total, "monotone": r.monotone, "iterations": r.drifts.len() })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    let results = json!({ "branch": "traveling", "speed": c, "c_star": c_star, "note": note, "drift": drift });
    out.finish("profile", ctx.cfg.seed, "failed", results).map_err(io)?;
    let total = drift["total"].as_f64().map(|t| format!("; the front drifts by {t:.4} over 50 iterations")).unwrap_or_default();
    Err(Failure::Numerics(format!("profile iteration cannot converge: {note}{total}")))
}

pub fn sweep(ctx: &Ctx, mut out: RunDir) -> Outcome {
    let cfg = ctx.cfg;
    ctx.checked_params()?;
    let rows = anisotropy_sweep(&cfg.kernels.aplus, &cfg.model, cfg.sweep.n_directions, cfg.grid.step)?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let csv_rows = rows.iter().map(|r| {
        vec![
            num(r.angle),
            num(r.direction[0]),
            num(r.direction[1]),
            opt(r.lambda_star),
            opt(r.c_star),
            r.error.clone().unwrap_or_default(),
        ]
    });
    out.csv("sweep.csv", &["angle", "xi_x", "xi_y", "lambda_star", "c_star", "error"], csv_rows).map_err(io)?;
    let speeds: Vec<f64> = rows.iter().filter_map(|r| r.c_star).collect();
    let failed = rows.len() - speeds.len();
    let results = json!({
        "directions": rows.len(),
        "failed_directions": failed,
        "c_star_min": speeds.iter().copied().reduce(f64::min),
        "c_star_max": speeds.iter().copied().reduce(f64::max),
    });
    out.finish("sweep", cfg.seed, "ok", results).map_err(io)
}

pub fn verify(ctx: &Ctx, mut out: RunDir) -> Outcome {
    let cfg = ctx.cfg;
    ctx.checked_params()?;
    let mut opts = cfg.verify.clone();
    if cfg.kernels.direction.is_some() || opts.direction.len() != cfg.kernels.aplus.dim() {
        opts.direction = cfg.kernels.direction();
    }
    let report = run_suite(&cfg.kernels.aplus, &cfg.kernels.aminus, &cfg.model, &cfg.tolerances, &opts, cfg.seed)?;
    for r in &report.rows {
        ctx.note(&format!("{:<26} {:<8} {:>12.4e}  {}", r.name, r.verdict, r.value, r.note));
    }
    let rows = report.rows.iter().map(|r| {
        vec![r.name.clone(), r.verdict.to_string(), num(r.value), num(r.tolerance), r.note.clone()]
    });
    out.csv("verdicts.csv", &["check", "verdict", "value", "tolerance", "note"], rows).map_err(io)?;
    let failed: Vec<&str> = report.rows.iter().filter(|r| r.verdict == kpplab_core::suite::Verdict::Fail).map(|r| r.name.as_str()).collect();
    let status = if failed.is_empty() { "ok" } else { "failed" };
    let results = json!({ "all_pass": failed.is_empty(), "failed": failed, "rows": report.rows.len() });
    out.finish("verify", cfg.seed, status, results).map_err(io)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerics(format!("failed checks: {}", failed.join(", "))))
    }
}
