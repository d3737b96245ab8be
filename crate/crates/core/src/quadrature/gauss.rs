//! Gauss-Legendre rules on `[-1, 1]`, computed once per order.

use std::sync::OnceLock;

const MAX_ORDER: usize = 64;

static TABLE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();

/// Nodes and weights of the `n`-point rule, `1 <= n <= 64`.
pub fn legendre(n: usize) -> (&'static [f64], &'static [f64]) {
    assert!((1..=MAX_ORDER).contains(&n), "Gauss order {n} out of range");
    let table = TABLE.get_or_init(|| (0..=MAX_ORDER).map(compute).collect());
    let (x, w) = &table[n];
    (x, w)
}

fn compute(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (vec![], vec![]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pd(n, z);
        dp = if d.is_finite() { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_pd(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Fixed-order Gauss-Legendre on `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, order: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: Fn(f64) -> T,
{
    let (x, w) = legendre(order);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut acc = T::default();
    for (xi, wi) in x.iter().zip(w) {
        acc = acc + f(m + h * xi) * (wi * h);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=40 {
            let (_, w) = legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "order {n}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let v: f64 = integrate(|x| x.powi(15) + 3.0 * x.powi(14), -1.0, 1.0, 8);
        assert!((v - 3.0 * 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integral() {
        let v: f64 = integrate(f64::exp, 0.0, 1.0, 12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-15);
    }
}
