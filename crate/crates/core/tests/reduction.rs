use kpplab_core::conv::Boundary;
use kpplab_core::reduction::*;
use kpplab_core::semiflow::Field;
use kpplab_core::wave::super_solution;
use kpplab_core::{Grid1D, KernelSpec, ModelParams};

fn params() -> ModelParams {
    ModelParams::new(2.0, 1.0, 1.0, 0.5)
}

fn smooth_front(step: f64) -> Field {
    let grid = Grid1D::from_extent(step, 30.0).unwrap();
    Field::from_fn(grid, Boundary::Wave, |s| 0.5 * (1.0 - (0.8 * s).tanh()))
}

#[test]
fn diagonal_isotropic_gaussian() {
    let p = params();
    let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap();
    let psi = smooth_front(0.05);
    let xi = [std::f64::consts::FRAC_1_SQRT_2; 2];
    let opts = ReductionOptions { step: 0.05 * 2f64.sqrt(), window: 6.0, strip: 0.1 };
    let r = verify_planar_reduction(&psi, xi, &k, &k, &p, &opts).unwrap();
    assert!(r.samples.len() > 100);
    assert!(r.transverse_variation < 1e-12);
    assert!(r.discrepancy < 1e-6, "{}", r.discrepancy);
}

#[test]
fn separable_kernels_along_an_axis() {
    let p = params();
    let psi = smooth_front(0.05);
    let opts = ReductionOptions { step: 0.05, window: 6.0, strip: 0.0 };
    for k in [
        KernelSpec::gaussian_diag(&[1.0, 4.0]).unwrap(),
        KernelSpec::laplace(&[2.0, 1.0]).unwrap(),
    ] {
        let r = verify_planar_reduction(&psi, [1.0, 0.0], &k, &k, &p, &opts).unwrap();
        assert!(r.discrepancy < 1e-8, "{k:?}: {}", r.discrepancy);
    }
}

#[test]
fn kinked_datum_converges_at_second_order() {
    let p = params();
    let grid = Grid1D::from_extent(0.0125, 30.0).unwrap();
    let phi = super_solution(grid, 0.8, p.theta());
    let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap();
    let study = refinement_study(&phi, [1.0, 0.0], &k, &k, &p, &[0.4, 0.2, 0.1], 4.0).unwrap();
    assert!(study.discrepancies.windows(2).all(|w| w[1] < w[0]));
    assert!(study.order >= 1.8, "{study:?}");
}

#[test]
fn isotropic_sweep_is_flat() {
    let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap();
    let rows = anisotropy_sweep(&k, &ModelParams::new(2.0, 1.0, 1.0, 0.0), 8, 0.05).unwrap();
    let c: Vec<f64> = rows.iter().map(|r| r.c_star.unwrap()).collect();
    let spread = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - c.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-6, "{c:?}");
}

#[test]
fn elongated_kernel_is_faster_along_its_long_axis() {
    let k = KernelSpec::gaussian_diag(&[1.0, 4.0]).unwrap();
    let p = ModelParams::new(2.0, 1.0, 1.0, 0.0);
    let rows = anisotropy_sweep(&k, &p, 4, 0.05).unwrap();
    let (x, y) = (rows[0].c_star.unwrap(), rows[1].c_star.unwrap());
    // c(l) = (2 exp(v l^2 / 2) - 1) / l for variance v along the direction
    let scan = |v: f64| {
        (1..20_000)
            .map(|k| k as f64 * 1e-4)
            .map(|l| (2.0 * (0.5 * v * l * l).exp() - 1.0) / l)
            .fold(f64::INFINITY, f64::min)
    };
    assert!(y > x);
    assert!((x - scan(1.0)).abs() < 1e-6 && (y - scan(4.0)).abs() < 1e-6, "{x} {y}");
}

#[test]
fn shifted_kernel_breaks_reflection_symmetry() {
    let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap().with_shift(vec![0.5, 0.0]).unwrap();
    let p = ModelParams::new(2.0, 1.0, 1.0, 0.0);
    let rows = anisotropy_sweep(&k, &p, 2, 0.05).unwrap();
    let (fwd, back) = (rows[0].c_star.unwrap(), rows[1].c_star.unwrap());
    // c(l) = (2 exp(b l + l^2 / 2) - 1) / l for shift projection b
    let scan = |b: f64| {
        (1..40_000)
            .map(|k| k as f64 * 1e-4)
            .map(|l| (2.0 * (b * l + 0.5 * l * l).exp() - 1.0) / l)
            .fold(f64::INFINITY, f64::min)
    };
    assert!(fwd > back + 1.0);
    assert!((fwd - scan(0.5)).abs() < 1e-6 && (back - scan(-0.5)).abs() < 1e-6, "{fwd} {back}");
}
