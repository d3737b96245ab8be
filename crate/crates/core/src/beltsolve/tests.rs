use super::*;
use crate::domains::Region;
use crate::fields::{radial_stretch, ring_family, LambdaParam};
use crate::sampling::Sampler;

fn shear(l: C64, inner: f64) -> impl Fn(C64) -> C64 {
    let r = -inner.ln();
    move |z: C64| {
        let m = z.norm();
        if m >= 1.0 || m <= inner {
            return z;
        }
        let eta = -m.ln();
        z * (C64::i() * l * eta.min(r - eta)).exp()
    }
}

fn max_error(g: &MapGrid, oracle: impl Fn(C64) -> C64) -> f64 {
    g.f.iter().enumerate().map(|(i, w)| (w - oracle(g.node(i / g.n, i % g.n))).norm()).fold(0.0, f64::max)
}

#[test]
fn zero_field_is_identity() {
    let mu = BeltramiField::zero(Region::UnitDisk);
    let g = solve(&mu, 32, SquareBox::centered(c64(0.0, 0.0), 2.0), 1e-12, 10).unwrap();
    assert_eq!(max_error(&g, |z| z), 0.0);
    assert_eq!(maximal_dilatation(&g).unwrap(), 1.0);
    let r = verify_triviality(&mu, &[c64(1.0, 0.0), c64(-1.0, 0.0)], &g, 1e-12).unwrap();
    assert!(r.pass && r.max_puncture_error == 0.0);
}

#[test]
fn radial_stretch_oracle() {
    let mu = radial_stretch(2.0, c64(0.0, 0.0), 1.0).unwrap();
    let mut last = f64::INFINITY;
    for n in [128usize, 256] {
        let g = solve(&mu, n, SquareBox::centered(c64(0.0, 0.0), 2.0), 1e-10, 100).unwrap();
        let e = max_error(&g, |z| if z.norm() < 1.0 { z * z.norm() } else { z });
        for w in g.stats.ratios.iter() {
            assert!(*w <= 1.0 / 3.0 + 0.05, "{w}");
        }
        assert!(e < 1e-3, "{e}");
        let k = maximal_dilatation(&g).unwrap();
        assert!((k - 2.0).abs() < 0.05, "{k}");
        let c = g.coefficient_l2_error(&mu).unwrap();
        assert!(c < 0.6 * last, "{c} {last}");
        last = c;
        let h = g.bbox.spacing(n);
        let cr = (0..n * n).filter(|i| g.node(i / n, i % n).norm() > 1.2).map(|i| g.fzbar[i].norm()).fold(0.0, f64::max);
        assert!(cr < 10.0 * h * h, "{cr}");
    }
}

#[test]
fn annulus_shear_oracle() {
    let l = c64(1.0, 0.0);
    let mu = ring_family(LambdaParam::new(l).unwrap(), c64(0.0, 0.0), 0.3, 1.0).unwrap();
    let g = solve(&mu, 256, SquareBox::centered(c64(0.0, 0.0), 2.0), 1e-10, 100).unwrap();
    let e = max_error(&g, shear(l, 0.3));
    assert!(e < 2.5e-3, "{e}");
    let rep = verify_triviality(&mu, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0), c64(1.5, 0.0)], &g, 2.5e-3).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn cauchy_of_disk_indicator() {
    // C χ = conj(z) inside, r²/z outside
    let n = 128;
    let b = SquareBox::centered(c64(0.0, 0.0), 2.0);
    let sp = Spectral::new(n, b.spacing(n), Exec::default());
    let h: Vec<C64> = (0..n * n).map(|i| c64(if b.node(n, i / n, i % n).norm() < 0.75 { 1.0 } else { 0.0 }, 0.0)).collect();
    let c = sp.cauchy(&h);
    let mut worst = 0.0f64;
    for i in 0..n * n {
        let z = b.node(n, i / n, i % n);
        let r = z.norm();
        if (r - 0.75).abs() < 0.1 {
            continue;
        }
        let e = if r < 0.75 { z.conj() } else { 0.5625 / z };
        worst = worst.max((c[i] - e).norm());
    }
    assert!(worst < 5e-3, "{worst}");
}

#[test]
fn beurling_is_unitary() {
    let n = 64;
    let b = SquareBox::centered(c64(0.0, 0.0), 2.0);
    let sp = Spectral::new(n, b.spacing(n), Exec::default());
    let m = sp.padded_len();
    let mut pad = vec![c64(0.0, 0.0); m * m];
    for r in 0..n {
        for c in 0..n {
            let z = b.node(n, r, c);
            pad[r * m + c] = z.conj() * (-4.0 * z.norm_sqr()).exp();
        }
    }
    let s = sp.beurling_padded(&pad);
    let n0 = pad.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let n1 = s.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    assert!((n0 - n1).abs() < 1e-8 * n0, "{n0} {n1}");
}

#[test]
fn bad_inputs() {
    let mu = radial_stretch(2.0, c64(0.0, 0.0), 1.0).unwrap();
    assert!(solve(&mu, 100, SquareBox::centered(c64(0.0, 0.0), 2.0), 1e-8, 10).is_err());
    assert!(solve(&mu, 64, SquareBox::centered(c64(0.0, 0.0), 1.5), 1e-8, 10).is_err());
    assert!(matches!(
        solve(&mu, 64, SquareBox::centered(c64(0.0, 0.0), 2.0), 1e-14, 2),
        Err(Error::NoConvergence(_))
    ));
}

#[test]
fn qcgrid_round_trip() {
    let mut s = Sampler::new(3);
    let n = 16;
    let f: Vec<C64> = (0..n * n).map(|_| s.rect(-1.0, 1.0, -1.0, 1.0)).collect();
    let b = SquareBox { x0: -1.5, y0: 0.25, side: 3.0 };
    let mut buf = Vec::new();
    write_qcgrid(&mut buf, n, &b, &f).unwrap();
    assert_eq!(&buf[..8], b"QCGRID1\0");
    assert_eq!(buf.len(), 16 + 8 + 24 + 16 * n * n);
    let (m, bb, g) = read_qcgrid(&buf[..]).unwrap();
    assert_eq!((m, bb), (n, b));
    assert_eq!(g, f);
    buf[0] = b'X';
    assert!(read_qcgrid(&buf[..]).is_err());
}

fn glued_solves(n: usize, lambdas: &[f64]) -> (Vec<MapGrid>, Vec<C64>) {
    use crate::fields::{example1_field, glue, truncate, WeightSequences};
    let window = Region::Rectangle { x0: 0.5, x1: 2.5, y0: -1.0, y1: 1.0 };
    let base = example1_field(0.3, WeightSequences::Logistic, crate::qdiff::qs_basis().unwrap()).unwrap();
    let base = truncate(&base, &window).unwrap();
    let (c, inner, outer) = (c64(1.5, 0.0), 0.2, 0.5);
    let u = Region::Ring { center: c, inner, outer };
    let grids = lambdas
        .iter()
        .map(|&l| {
            let tau = ring_family(LambdaParam::real(l).unwrap(), c, inner, outer).unwrap();
            let mu = glue(&base, &tau, &u).unwrap();
            solve_with(&mu, &SolveOptions::new(n, SquareBox::centered(c, 2.0))).unwrap()
        })
        .collect();
    (grids, vec![c64(1.0, 0.0), c64(2.0, 0.0)])
}

#[test]
fn glued_patches_agree_at_punctures() {
    // λ = 0 is the base with U cut out; both patched solutions must match it
    let (g, ps) = glued_solves(256, &[0.0, 0.5, 1.0]);
    for &p in &ps {
        let base = g[0].eval(p).unwrap();
        for other in &g[1..] {
            assert!((other.eval(p).unwrap() - base).norm() < 1e-3);
        }
    }
}
