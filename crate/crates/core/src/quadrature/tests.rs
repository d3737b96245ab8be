use super::*;
use crate::domains::Region;
use crate::{c64, C64};
use std::f64::consts::PI;

#[test]
fn annulus_area() {
    let r = integrate2d(&Region::Annulus { inner: 0.25 }, |_| c64(1.0, 0.0), 1e-10, &[]).unwrap();
    assert!((r.value.re - PI * (1.0 - 0.0625)).abs() < 1e-10);
    assert!((r.value.re - 2.945243).abs() < 1e-6);
    assert!(r.error_estimate >= 0.0);
}

#[test]
fn boundary_pole_is_finite_and_stable() {
    let f = |z: C64| c64(1.0 / (z - c64(1.0, 0.0)).norm(), 0.0);
    let sing = [Singularity::simple_pole(c64(1.0, 0.0))];
    let region = Region::Annulus { inner: 0.25 };
    let a = integrate2d(&region, f, 1e-7, &sing).unwrap();
    let b = integrate2d(&region, f, 1e-9, &sing).unwrap();
    assert!(a.value.re.is_finite());
    assert!(((a.value - b.value).norm() / b.value.norm()) < 1e-6);
    // refining by 10x moves the value by less than the coarse estimate
    assert!((a.value - b.value).norm() <= a.error_estimate.max(1e-12));
}

#[test]
fn interior_pole_matches_closed_form() {
    // ∫∫_{|z|<1} 1/|z - a| for a = 0: 2π
    let f = |z: C64| c64(1.0 / z.norm(), 0.0);
    let r = integrate2d(&Region::UnitDisk, f, 1e-10, &[Singularity::simple_pole(c64(0.0, 0.0))]).unwrap();
    assert!((r.value.re - 2.0 * PI).abs() < 1e-9);
    // off-centre pole in a rectangle, oracle by polar splitting about the pole
    let p = c64(0.3, 0.2);
    let rect = Region::Rectangle { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
    let r = integrate2d(&rect, |z| c64(1.0 / (z - p).norm(), 0.0), 1e-10, &[Singularity::simple_pole(p)]).unwrap();
    // exact: sum over the four sub-rectangles with the pole at a corner,
    // ∫_0^a∫_0^b 1/r = a asinh(b/a) + b asinh(a/b)
    let corner = |a: f64, b: f64| a * (b / a).asinh() + b * (a / b).asinh();
    let exact = corner(0.3, 0.2) + corner(0.7, 0.2) + corner(0.3, 0.8) + corner(0.7, 0.8);
    assert!((r.value.re - exact).abs() < 1e-9, "{} vs {exact}", r.value.re);
}

#[test]
fn angular_symmetry() {
    let r = integrate2d(&Region::UnitDisk, |z| z / z.conj(), 1e-10, &[]).unwrap();
    assert!(r.value.norm() < 1e-10);
}

#[test]
fn high_order_singularity_rejected() {
    let e = integrate2d(
        &Region::UnitDisk,
        |_| c64(1.0, 0.0),
        1e-8,
        &[Singularity { location: c64(0.0, 0.0), order: 2.0 }],
    );
    assert!(matches!(e, Err(crate::Error::InvalidInput(_))));
    assert!(integrate2d(&Region::UnitDisk, |_| c64(1.0, 0.0), 0.0, &[]).is_err());
}

#[test]
fn non_convergence_reports_partial() {
    let opts = QuadOptions { tol: 1e-14, max_cells: 64, ..Default::default() };
    let e = integrate2d_with(&Region::UnitDisk, |z| c64((40.0 * z.re).sin(), 0.0), &opts);
    assert!(matches!(e, Err(crate::Error::QuadratureNoConvergence { .. })));
}

#[test]
fn cell_integral_of_decaying_function() {
    // ∫_0^3 ∫_R 1/(1+y²)² dy dx = 3 π / 2
    let f = |z: C64| c64(1.0 / (1.0 + z.im * z.im).powi(2), 0.0);
    let r = integrate2d(&Region::Cell { period: 3.0, index: 2 }, f, 1e-9, &[]).unwrap();
    assert!((r.value.re - 1.5 * PI).abs() < 1e-8, "{}", r.value.re);
}

#[test]
fn fixed_rule_integrates_cell() {
    let f = |z: C64| c64(1.0 / (1.0 + z.im * z.im).powi(2), 0.0);
    let pts: Vec<C64> = (0..=3).map(|k| c64(k as f64, 0.0)).collect();
    let rule = FixedRule::build(&Region::Cell { period: 3.0, index: 0 }, &pts, 1, 8).unwrap();
    let v = rule.apply(crate::par::Exec::Sequential, |_, z| f(z));
    assert!((v.re - 1.5 * PI).abs() < 1e-8);
    let g = |z: C64| c64(1.0 / ((z - c64(1.0, 0.0)).norm() * (1.0 + z.im * z.im).powi(2)), 0.0);
    let a = rule.apply(crate::par::Exec::Parallel, |_, z| g(z));
    let b = integrate2d(&Region::Cell { period: 3.0, index: 0 }, g, 1e-9, &[Singularity::simple_pole(c64(1.0, 0.0))]).unwrap();
    assert!((a - b.value).norm() < 1e-7, "{a} vs {}", b.value);
}

#[test]
fn plane_tail_bound_cubic() {
    // degree 3: 4 coef / X
    let b = plane_tail_bound(Decay { coef: 1.0, degree: 3.0 }, 10.0).unwrap();
    assert!((b - 0.4).abs() < 1e-12);
}

#[test]
fn contour_examples() {
    let c = contour_fourier(|z| 1.0 / (z - c64(0.1, 0.0)), Contour::circle(0.25), 64).unwrap();
    assert!((c - c64(0.1, 0.0)).norm() < 1e-12);
    let c = contour_fourier(|z| 1.0 / z, Contour::circle(0.25), 64).unwrap();
    assert!(c.norm() < 1e-14);
    let c = contour_fourier(|z| 1.0 / (z * z), Contour::circle(0.25), 64).unwrap();
    assert!((c - c64(1.0, 0.0)).norm() < 1e-14);
    assert!(contour_fourier(|z| z, Contour::circle(1.0), 8).is_err());
    assert!(contour_fourier(|z| 1.0 / z, Contour::horizontal(0.0), 16).is_err());
}

#[test]
fn contour_doubling_and_height_independence() {
    let h = |z: C64| 1.0 / ((z - c64(0.4, 0.1)) * (z + c64(0.2, 0.5)));
    let a = contour_fourier(h, Contour::circle(0.75), 256).unwrap();
    let b = contour_fourier(h, Contour::circle(0.75), 512).unwrap();
    assert!((a - b).norm() < 1e-10);
    // periodic holomorphic function on a strip, poles at Im = ±2
    let p = |z: C64| 1.0 / (c64(2.0f64.cosh(), 0.0) - z.cos());
    let y1 = contour_fourier(p, Contour::horizontal(0.3), 128).unwrap();
    let y2 = contour_fourier(p, Contour::horizontal(1.1), 128).unwrap();
    assert!((y1 - y2).norm() < 1e-8);
}

#[test]
fn cesaro_examples() {
    let k = c64(0.7, -0.2);
    assert!(cesaro_means(&[k; 10]).iter().all(|y| (y - k).norm() < 1e-15));
    let alt: Vec<C64> = (0..41).map(|n| c64(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    let y = cesaro_means(&alt);
    assert!(y[40].norm() <= 1.0 / 41.0 + 1e-15);
    let conv: Vec<C64> = (0..200).map(|n| k + 0.5f64.powi(n)).collect();
    let y = cesaro_means(&conv);
    for n in [10usize, 50, 199] {
        assert!((y[n] - k).norm() <= 2.0 / (n + 1) as f64 + 1e-12);
    }
}

#[test]
fn integrate1d_smooth() {
    let (v, _) = integrate1d(|x| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-10).unwrap();
    assert!((v - PI / 2.0).abs() < 1e-8);
}

