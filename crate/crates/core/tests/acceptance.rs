//! Acceptance criteria. Run with `cargo test -p kpplab-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kpplab_core::conv::Boundary;
use kpplab_core::kernels::{marginal_pair, truncate, Kernel1D};
use kpplab_core::reduction::{anisotropy_sweep, refinement_study, verify_planar_reduction, ReductionOptions};
use kpplab_core::semiflow::*;
use kpplab_core::wave::*;
use kpplab_core::{Grid1D, KernelSpec, ModelParams, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String)>;
type Criterion = (usize, &'static str, fn() -> Outcome);

fn gaussian(dim: usize, sigma: f64) -> KernelSpec {
    KernelSpec::gaussian_isotropic(dim, sigma).unwrap()
}

fn kpp_pair() -> (Kernel1D, Kernel1D, ModelParams) {
    let (a, b) = marginal_pair(&gaussian(1, 1.0), &gaussian(1, 1.0), &[1.0], 0.05).unwrap();
    (a, b, ModelParams::new(2.0, 1.0, 1.0, 0.0))
}

fn order_system() -> (ReactionSystem, Kernel1D, Kernel1D, ModelParams) {
    let (a, b) = marginal_pair(&gaussian(1, 1.0), &gaussian(1, 0.5), &[1.0], 0.05).unwrap();
    let p = ModelParams::new(2.0, 1.0, 0.5, 0.5);
    let grid = Grid1D::from_extent(0.05, 15.0).unwrap();
    (ReactionSystem::new(&a, &b, p, grid).unwrap(), a, b, p)
}

fn speed_law() -> Outcome {
    let (a, b, p) = kpp_pair();
    let ms = minimal_speed(&a, &p)?;
    let n = 10_000;
    let oracle = (0..n)
        .map(|k| 0.1 + 1.4 * k as f64 / (n - 1) as f64)
        .map(|l| (2.0 * (0.5 * l * l).exp() - 1.0) / l)
        .fold(f64::INFINITY, f64::min);
    let scan_rel = (ms.c_star - oracle).abs() / oracle;

    let theta = p.theta();
    let grid = Grid1D::from_extent(0.05, 60.0)?;
    let system = ReactionSystem::new(&a, &b, p, grid)?;
    let u0 = Field::from_fn(grid, Boundary::Wave, |s| if s <= -40.0 { theta } else { 0.0 });
    let opts = Rk4Options::new(30.0, 0.01).sample_every(0.5).level(0.5 * theta);
    let traj = evolve_rk4(&system, &u0, opts)?;
    let fit = measure_speed(&traj, 0.5 * theta, Some((15.0, 30.0)))?;
    let rel = (fit.speed - ms.c_star).abs() / ms.c_star;
    Ok((
        rel < 0.05 && scan_rel < 1e-8,
        format!(
            "measured {:.4} vs c* {:.6} (rel {:.2e}); dense scan rel {:.1e}",
            fit.speed, ms.c_star, rel, scan_rel
        ),
    ))
}

fn profile(c_offset: f64) -> Result<(WaveProfile, Kernel1D, Kernel1D, ModelParams)> {
    let (a, b, p) = kpp_pair();
    let c = minimal_speed(&a, &p)?.c_star + c_offset;
    Ok((solve_profile(&a, &b, &p, c, &ProfileOptions::default())?, a, b, p))
}

fn profile_correctness(prof: &WaveProfile, a: &Kernel1D, b: &Kernel1D, p: &ModelParams) -> Outcome {
    let res = profile_residual(prof, a, b, p, 1e-6)?;
    let system = ReactionSystem::new(a, b, *p, prof.grid)?;
    let traj = evolve_rk4(&system, &prof.field(), Rk4Options::new(1.0, 0.01).sample_every(0.1))?;
    let mut worst = 0.0f64;
    for (t, f) in traj.times.iter().zip(&traj.fields) {
        for (i, s) in prof.grid.points().enumerate() {
            worst = worst.max((f[i] - prof.at(s - prof.speed * t)).abs());
        }
    }
    let tol = 5e-3 * prof.theta;
    Ok((
        res.sup < 1e-6 && worst < tol,
        format!(
            "{} iterations, residual {:.2e}, translation error {:.2e}",
            prof.report.iterations, res.sup, worst
        ),
    ))
}

fn nonexistence() -> Outcome {
    let (a, b, p) = kpp_pair();
    let c = minimal_speed(&a, &p)?.c_star - 0.5;
    let opts = ProfileOptions::default();
    let r = subcritical_drift(&a, &b, &p, c, 50, 10, &opts)?;
    let h = a.grid().step();
    Ok((
        r.monotone && r.total > 10.0 * h,
        format!(
            "c = {:.4}: drift {:.3} over 50 iterations, monotone {} (operational check, not a proof)",
            c, r.total, r.monotone
        ),
    ))
}

fn semiflow_suite() -> Outcome {
    let (sys, _, _, p) = order_system();
    let grid = *sys.grid();
    let theta = p.theta();
    let opts = CheckOptions::new(1.0, 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let u0 = Field::new(grid, random_tube_field(&grid, theta, &mut rng), Boundary::Periodic)?;
    let tube = tube_violation(&sys, &u0, opts)?;
    let equi = translation_equivariance_check(&sys, &u0, 13.0 * grid.step(), opts)?;
    let mut logistic = 0.0f64;
    for r in [0.1, 0.5, 0.9] {
        let traj = evolve_rk4(&sys, &Field::constant(grid, r * theta, Boundary::Periodic), Rk4Options::new(1.0, 0.01))?;
        let exact = p.logistic_solution(r * theta, 1.0)?;
        logistic = logistic.max(traj.last().values.iter().map(|v| (v - exact).abs()).fold(0.0, f64::max));
    }
    let mut order = 0.0f64;
    for _ in 0..100 {
        let (lo, hi) = random_ordered_pair(&grid, theta, &mut rng);
        let r = comparison_check(
            &sys,
            &Field::new(grid, lo, Boundary::Periodic)?,
            &Field::new(grid, hi, Boundary::Periodic)?,
            opts,
            1e-8,
        )?;
        order = order.max(r.max_violation);
    }
    let wave_grid = Grid1D::from_extent(0.05, 30.0)?;
    let (a, b) = (sys.aplus().to_vec(), sys.aminus().to_vec());
    let ka = Kernel1D::from_values(*sys.kernel_grid(), a, vec![1.0])?;
    let kb = Kernel1D::from_values(*sys.kernel_grid(), b, vec![1.0])?;
    let wave_sys = ReactionSystem::new(&ka, &kb, p, wave_grid)?;
    let m0 = Field::new(wave_grid, random_monotone_field(&wave_grid, theta, &mut rng), Boundary::Wave)?;
    let mono = monotonicity_violation(&wave_sys, &m0, opts)?;
    Ok((
        tube < 1e-10 && equi < 1e-10 && logistic < 1e-8 && order <= 1e-8 && mono < 1e-10,
        format!(
            "tube {tube:.1e}, equivariance {equi:.1e}, logistic {logistic:.1e}, 100 pairs {order:.1e}, monotone {mono:.1e}"
        ),
    ))
}

fn cross_validation() -> Outcome {
    let (sys, _, _, p) = order_system();
    let grid = *sys.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let u0 = Field::new(grid, random_tube_field(&grid, p.theta(), &mut rng), Boundary::Periodic)?;
        let pic = evolve_picard(&sys, &u0, PicardOptions::new(1.0))?;
        let rk = evolve_rk4(&sys, &u0, Rk4Options::new(1.0, 1e-3))?;
        let d = pic
            .field
            .values
            .iter()
            .zip(&rk.last().values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok((worst < 5e-4, format!("max sup difference over 5 data {worst:.2e}")))
}

fn truncation_bounds() -> Outcome {
    let (sys, a, b, p) = order_system();
    let grid = *sys.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u0 = Field::new(grid, random_tube_field(&grid, p.theta(), &mut rng), Boundary::Periodic)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for r in [2.0, 5.0, 10.0] {
        let tr = truncate(&a, &b, &p, r)?;
        let ts = ReactionSystem::truncated(&tr, p, grid)?;
        let rep = truncation_bound_check(&sys, &ts, &u0, CheckOptions::new(1.0, 0.01))?;
        ok &= rep.pass && tr.theta_r > 0.0 && tr.theta_r <= p.theta();
        notes.push(format!("R={r}: theta_R {:.10}, w-u {:.1e}", tr.theta_r, rep.max_violation));
    }
    Ok((ok, notes.join("; ")))
}

fn counterexample() -> Outcome {
    let (a, b) = marginal_pair(&gaussian(1, 1.0), &gaussian(1, 3.0), &[1.0], 0.05)?;
    let p = ModelParams::new(2.0, 1.0, 0.0, 1.0);
    let r = necessity_counterexample(&a, &b, &p, None)?;
    Ok((
        r.applicable && r.pass,
        format!("rhs at probe {:.4e}, dip at {:.3}", r.rhs_at_y0, r.dip_center),
    ))
}

fn diagnostics(prof: &WaveProfile) -> Outcome {
    let d = profile_diagnostics(&prof.grid, &prof.values, prof.theta, 1e-10);
    Ok((
        d.strictly_decreasing && d.exp_moment.is_some() && d.nu_witness.is_some(),
        format!(
            "strictly decreasing {}, tail rate {:.4}, moment {:?}, nu {:?}",
            d.strictly_decreasing,
            d.tail_rate.unwrap_or(f64::NAN),
            d.exp_moment,
            d.nu_witness
        ),
    ))
}

fn planar(prof: &WaveProfile) -> Outcome {
    let p = ModelParams::new(2.0, 1.0, 1.0, 0.0);
    let k = gaussian(2, 1.0);
    let xi = [std::f64::consts::FRAC_1_SQRT_2; 2];
    let opts = ReductionOptions {
        step: prof.grid.step() * 2f64.sqrt(),
        window: 8.0,
        strip: 0.0,
    };
    let r = verify_planar_reduction(&prof.field(), xi, &k, &k, &p, &opts)?;
    let fine = Grid1D::from_extent(0.0125, 30.0)?;
    let kink = super_solution(fine, 0.8, p.theta());
    let study = refinement_study(&kink, [1.0, 0.0], &k, &k, &p, &[0.4, 0.2, 0.1], 4.0)?;
    Ok((
        r.discrepancy < 1e-6 && study.order >= 1.8,
        format!("discrepancy {:.2e}, refinement order {:.3}", r.discrepancy, study.order),
    ))
}

fn anisotropy() -> Outcome {
    let p = ModelParams::new(2.0, 1.0, 1.0, 0.0);
    let rows = anisotropy_sweep(&KernelSpec::gaussian_diag(&[1.0, 4.0])?, &p, 4, 0.05)?;
    let (x, y) = (rows[0].c_star, rows[1].c_star);
    let iso = anisotropy_sweep(&gaussian(2, 1.0), &p, 16, 0.05)?;
    let speeds: Vec<f64> = iso.iter().filter_map(|r| r.c_star).collect();
    let spread = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - speeds.iter().cloned().fold(f64::INFINITY, f64::min);
    let ok = matches!((x, y), (Some(x), Some(y)) if y > x) && speeds.len() == 16 && spread < 1e-6;
    Ok((ok, format!("c*(1,0) {x:?}, c*(0,1) {y:?}; isotropic spread {spread:.1e}")))
}

fn report(id: usize, name: &str, elapsed: Duration, outcome: Outcome) -> bool {
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    println!(
        "criterion {id:>2} [{}] {name}: {detail} ({:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

fn main() -> ExitCode {
    let mut all = true;
    let (o, t) = timed(speed_law);
    all &= report(1, "speed law", t, o);

    let (prof, t_prof) = timed(|| profile(0.5));
    let missing = |e: &kpplab_core::Error| Err(kpplab_core::Error::Input(format!("no profile: {e}")));
    let (o, t) = timed(|| match &prof {
        Ok((prof, a, b, p)) => profile_correctness(prof, a, b, p),
        Err(e) => missing(e),
    });
    all &= report(2, "profile correctness", t + t_prof, o);

    let independent: [Criterion; 5] = [
        (3, "nonexistence below c*", nonexistence),
        (4, "semiflow properties", semiflow_suite),
        (5, "scheme cross-validation", cross_validation),
        (6, "truncation bounds", truncation_bounds),
        (7, "necessity counterexample", counterexample),
    ];
    for (id, name, f) in independent {
        let (o, t) = timed(f);
        all &= report(id, name, t, o);
    }

    let (o, t) = timed(|| match &prof {
        Ok((prof, ..)) => diagnostics(prof),
        Err(e) => missing(e),
    });
    all &= report(8, "profile diagnostics", t, o);
    let (o, t) = timed(|| match &prof {
        Ok((prof, ..)) => planar(prof),
        Err(e) => missing(e),
    });
    all &= report(9, "planar reduction", t, o);

    let (o, t) = timed(anisotropy);
    all &= report(10, "anisotropy", t, o);
    if all {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("some acceptance criteria failed");
        ExitCode::FAILURE
    }
}
