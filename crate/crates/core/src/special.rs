//! Special functions: complete elliptic integral of the second kind.

use crate::error::{Error, Result};

/// Carlson's `R_F(x, y, z)`, at most one argument zero.
fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    loop {
        let a = (x + y + z) / 3.0;
        let (dx, dy, dz) = ((a - x) / a, (a - y) / a, (a - z) / a);
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / a.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = (x + lambda) / 4.0;
        y = (y + lambda) / 4.0;
        z = (z + lambda) / 4.0;
    }
}

/// Carlson's `R_D(x, y, z)`.
fn carlson_rd(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C1;
    const C6: f64 = 1.5 * C4;
    let mut sum = 0.0;
    let mut fac = 1.0;
    loop {
        let a = (x + y + 3.0 * z) / 5.0;
        let (dx, dy, dz) = ((a - x) / a, (a - y) / a, (a - z) / a);
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            return 3.0 * sum
                + fac * (1.0 + ed * (-C1 + C5 * ed - C6 * dz * ee) + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
                    / (a * a.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lambda));
        fac /= 4.0;
        x = (x + lambda) / 4.0;
        y = (y + lambda) / 4.0;
        z = (z + lambda) / 4.0;
    }
}

/// `E(m) = ∫₀^{π/2} sqrt(1 − m sin²θ) dθ` in the parameter convention.
pub fn elliptic_e(m: f64) -> Result<f64> {
    if m.is_nan() || m > 1.0 {
        return Err(Error::InvalidArgument(format!("E(m) needs m <= 1, got {m}")));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    if m == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    let y = 1.0 - m;
    Ok(carlson_rf(0.0, y, 1.0) - m / 3.0 * carlson_rd(0.0, y, 1.0))
}
