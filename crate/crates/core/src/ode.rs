//! Dormand-Prince 5(4) for small complex systems along a real parameter.

use crate::{Error, Result, C64};

pub(crate) struct Dopri {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri {
    fn default() -> Self {
        Dopri { rtol: 1e-12, atol: 1e-13, max_steps: 200_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl Dopri {
    /// Integrates `y' = f(s, y)` from `s = 0` to `s = 1`.
    pub fn solve<const N: usize>(
        &self,
        y0: [C64; N],
        f: impl Fn(f64, &[C64; N]) -> [C64; N],
    ) -> Result<[C64; N]> {
        let mut s = 0.0;
        let mut y = y0;
        let mut h: f64 = 0.05;
        let mut steps = 0;
        while s < 1.0 {
            if steps >= self.max_steps {
                return Err(Error::NoConvergence(format!("ode stalled at s = {s}")));
            }
            steps += 1;
            h = h.min(1.0 - s);
            let mut k = [[C64::new(0.0, 0.0); N]; 7];
            for i in 0..7 {
                let mut yi = y;
                for (j, kj) in k.iter().enumerate().take(i) {
                    if A[i][j] != 0.0 {
                        for n in 0..N {
                            yi[n] += kj[n] * (h * A[i][j]);
                        }
                    }
                }
                k[i] = f(s + C[i] * h, &yi);
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for n in 0..N {
                let mut d5 = C64::new(0.0, 0.0);
                let mut d4 = C64::new(0.0, 0.0);
                for i in 0..7 {
                    d5 += k[i][n] * B5[i];
                    d4 += k[i][n] * B4[i];
                }
                y5[n] += d5 * h;
                let sc = self.atol + self.rtol * y[n].norm().max(y5[n].norm());
                err = err.max(((d5 - d4) * h).norm() / sc);
            }
            if !err.is_finite() {
                h *= 0.25;
                if h < 1e-14 {
                    return Err(Error::NonFinite(format!("ode blew up at s = {s}")));
                }
                continue;
            }
            if err <= 1.0 {
                s += h;
                y = y5;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
            if h < 1e-14 {
                return Err(Error::NoConvergence(format!("ode step underflow at s = {s}")));
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn exponential() {
        let lam = c64(0.3, 2.0);
        let y = Dopri::default().solve([c64(1.0, 0.0)], |_, y| [y[0] * lam]).unwrap();
        assert!((y[0] - lam.exp()).norm() < 1e-11);
    }
}
