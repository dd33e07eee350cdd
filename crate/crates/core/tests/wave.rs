use kpplab_core::conv::Boundary;
use kpplab_core::kernels::{marginal_pair, Kernel1D, KernelSpec};
use kpplab_core::semiflow::{evolve_rk4, Field, ReactionSystem, Rk4Options};
use kpplab_core::wave::*;
use kpplab_core::{Grid1D, ModelParams};

fn kpp() -> (Kernel1D, Kernel1D, ModelParams) {
    let (a, b) = marginal_pair(
        &KernelSpec::gaussian_isotropic(1, 1.0).unwrap(),
        &KernelSpec::gaussian_isotropic(1, 1.0).unwrap(),
        &[1.0],
        0.05,
    )
    .unwrap();
    (a, b, ModelParams::new(2.0, 1.0, 1.0, 0.0))
}

#[test]
fn supercritical_profile() {
    let (a, b, p) = kpp();
    let ms = minimal_speed(&a, &p).unwrap();
    let c = ms.c_star + 0.5;
    let t0 = std::time::Instant::now();
    let prof = solve_profile(&a, &b, &p, c, &ProfileOptions::default()).unwrap();
    eprintln!("iterations {} in {:?}", prof.report.iterations, t0.elapsed());
    let res = profile_residual(&prof, &a, &b, &p, 1e-6).unwrap();
    eprintln!("residual {res:?}");
    assert!(res.sup < 1e-6);
    let d = profile_diagnostics(&prof.grid, &prof.values, prof.theta, 1e-10);
    eprintln!("{d:?}");
    assert!(d.strictly_decreasing && d.exp_moment.is_some() && d.nu_witness.is_some());
    // translation
    let sys = ReactionSystem::new(&a, &b, p, prof.grid).unwrap();
    let traj = evolve_rk4(&sys, &prof.field(), Rk4Options::new(1.0, 0.01).sample_every(0.1)).unwrap();
    let mut worst = 0.0f64;
    for (t, f) in traj.times.iter().zip(&traj.fields) {
        for (i, s) in prof.grid.points().enumerate() {
            worst = worst.max((f[i] - prof.at(s - c * t)).abs());
        }
    }
    eprintln!("tracking {worst}");
    assert!(worst < 5e-3);
}

#[test]
fn subcritical_drifts() {
    let (a, b, p) = kpp();
    let ms = minimal_speed(&a, &p).unwrap();
    let r = subcritical_drift(&a, &b, &p, ms.c_star - 0.5, 50, 10, &ProfileOptions::default()).unwrap();
    eprintln!("total {} first {:?} last {:?}", r.total, &r.drifts[..3], r.drifts.last());
    assert!(r.monotone && r.total > 10.0 * 0.05);
}

#[test]
fn supersolution_examples() {
    let (a, b, p) = kpp();
    let grid = Grid1D::from_extent(0.05, 40.0).unwrap();
    let mu = 0.6;
    let phi = super_solution(grid, mu, 1.0);
    let c = speed_at(&a, &p, mu);
    let ok = verify_supersolution(&phi, mu, c, &a, &b, &p).unwrap();
    eprintln!("max J {}", ok.max);
    assert!(ok.max <= 1e-10);
    let bad = verify_supersolution(&phi, mu, c - 1.0, &a, &b, &p).unwrap();
    assert!(bad.max > 0.0 && bad.argmax > 0.0);
    let left = ok.values.iter().zip(phi.grid.points()).filter(|(_, s)| *s < -5.0);
    assert!(left.map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max) <= 1e-10);
}


#[test]
fn minimal_speed_matches_dense_scan() {
    let (a, _, p) = kpp();
    let ms = minimal_speed(&a, &p).unwrap();
    let n = 10_000;
    let oracle = (0..n)
        .map(|k| 0.1 + 1.4 * k as f64 / (n - 1) as f64)
        .map(|l| (2.0 * (0.5 * l * l).exp() - 1.0) / l)
        .fold(f64::INFINITY, f64::min);
    assert!((ms.c_star - oracle).abs() < 1e-8 * oracle, "{} vs {oracle}", ms.c_star);
    assert!((ms.lambda_star - 0.80).abs() < 0.01);
    assert!(!ms.boundary_minimum);
    let curve = speed_curve(&a, &p, (0.05, 2.0), 200).unwrap();
    assert!(curve.speeds.iter().all(|c| *c >= ms.c_star - 1e-12));
    assert!(curve.speeds[0] > ms.c_star);
}

#[test]
fn minimal_speed_vanishes_as_growth_vanishes() {
    let (a, _, _) = kpp();
    let speeds: Vec<f64> = [0.5, 0.1, 0.01, 0.001]
        .iter()
        .map(|e| minimal_speed(&a, &ModelParams::new(1.0 + e, 1.0, 1.0, 0.0)).unwrap().c_star)
        .collect();
    assert!(speeds.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    assert!(speeds[3] < 0.05);
}

#[test]
fn laplace_minimum_inside_domain() {
    let alpha = 2.0;
    let k = KernelSpec::laplace(&[alpha]).unwrap();
    let (a, _) = marginal_pair(&k, &k, &[1.0], 0.02).unwrap();
    let p = ModelParams::new(2.0, 1.0, 1.0, 0.0);
    let ms = minimal_speed(&a, &p).unwrap();
    assert!(ms.lambda_star < alpha && ms.lambda_max_finite <= alpha + 1e-9);
    let oracle = (1..10_000)
        .map(|k| alpha * k as f64 / 10_000.0)
        .map(|l| (2.0 * alpha * alpha / (alpha * alpha - l * l) - 1.0) / l)
        .fold(f64::INFINITY, f64::min);
    assert!((ms.c_star - oracle).abs() < 1e-4 * oracle, "{} vs {oracle}", ms.c_star);
    assert!((speed_at(&a, &p, 1.0) - 5.0 / 3.0).abs() < 1e-4);
}

#[test]
fn seed_is_mapped_below_itself() {
    let (a, b, p) = kpp();
    let c = minimal_speed(&a, &p).unwrap().c_star + 0.5;
    let mu = slow_root(&a, &p, c).unwrap();
    assert!((speed_at(&a, &p, mu) - c).abs() < 1e-9);
    let grid = Grid1D::from_extent(0.05, 30.0).unwrap();
    let phi = super_solution(grid, mu, p.theta());
    let sys = ReactionSystem::new(&a, &b, p, grid).unwrap();
    let traj = evolve_rk4(&sys, &phi, Rk4Options::new(1.0, 0.01)).unwrap();
    let moved = traj.last();
    let worst = grid
        .points()
        .enumerate()
        .filter(|(_, s)| *s + c < 30.0 - 5.0)
        .map(|(i, s)| {
            let shifted = linear_at(&grid, &moved.values, s + c);
            shifted - phi.values[i]
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

fn linear_at(grid: &Grid1D, v: &[f64], s: f64) -> f64 {
    let x = (s + grid.half_width()) / grid.step();
    let i = (x.floor() as usize).min(v.len() - 2);
    let t = x - i as f64;
    (1.0 - t) * v[i] + t * v[i + 1]
}

#[test]
fn residual_detects_noise() {
    let (a, b, p) = kpp();
    let c = minimal_speed(&a, &p).unwrap().c_star + 0.5;
    let prof = solve_profile(&a, &b, &p, c, &ProfileOptions { half_width: 40.0, ..Default::default() }).unwrap();
    let clean = profile_residual(&prof, &a, &b, &p, 1e-4).unwrap().sup;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let mut noisy = prof.clone();
    for v in noisy.values.iter_mut() {
        *v *= 1.0 + 0.01 * rand::Rng::gen_range(&mut rng, -1.0..1.0);
    }
    let dirty = profile_residual(&noisy, &a, &b, &p, 1e-2).unwrap().sup;
    assert!(dirty >= 10.0 * clean.max(1e-12), "{dirty} vs {clean}");

    assert!(constant_rhs(&a, &b, &p, &prof.grid) < 1e-12);
}

fn constant_rhs(a: &Kernel1D, b: &Kernel1D, p: &ModelParams, grid: &Grid1D) -> f64 {
    let sys = ReactionSystem::new(a, b, *p, *grid).unwrap();
    let u = Field::constant(*grid, p.theta(), Boundary::ConstantExtend);
    sys.rhs(&u).unwrap().values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn stationary_from_theta() {
    let (a, b, p) = kpp();
    let opts = ProfileOptions { half_width: 10.0, ..Default::default() };
    let grid = Grid1D::from_extent(0.05, 10.0).unwrap();
    let theta = p.theta();
    let (top, residual) = stationary_profile(&a, &b, &p, Some(&vec![theta; grid.len()]), &opts).unwrap();
    assert!(residual < 1e-7, "{residual}");
    assert!(top.values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(top.values.iter().all(|v| *v >= 0.0 && *v <= theta + 1e-12));
    assert!((top.values[0] - theta).abs() < 1e-6);
}

#[test]
fn stationary_without_local_competition() {
    let k = KernelSpec::gaussian_isotropic(1, 1.0).unwrap().with_shift(vec![-3.0]).unwrap();
    let (a, b) = marginal_pair(&k, &KernelSpec::gaussian_isotropic(1, 1.0).unwrap(), &[1.0], 0.05).unwrap();
    let p = ModelParams::new(2.0, 1.0, 0.0, 1.0);
    let opts = ProfileOptions { half_width: 20.0, max_iter: 20_000, ..Default::default() };
    let (prof, residual) = stationary_profile(&a, &b, &p, None, &opts).unwrap();
    assert!(residual / p.mortality < 1e-7, "{residual}");
    assert!(prof.values.iter().all(|v| *v >= 0.0 && *v <= p.theta() + 1e-12));
}
