//! Airy function `Ai` on the real line.
//!
//! Maclaurin series in the central region, asymptotic expansions outside it.
//! Absolute accuracy is about 1e-11 everywhere, which is what the Condon
//! factor quadrature needs.

use std::f64::consts::{FRAC_PI_4, PI};

/// `Ai(0)`.
const AI0: f64 = 0.355_028_053_887_817_24;
/// `-Ai'(0)`.
const AIP0: f64 = 0.258_819_403_792_806_8;

const SERIES_MAX_POS: f64 = 5.0;
const SERIES_MAX_NEG: f64 = 7.0;

pub fn airy_ai(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > SERIES_MAX_POS {
        asymptotic_pos(z)
    } else if z < -SERIES_MAX_NEG {
        asymptotic_neg(-z)
    } else {
        maclaurin(z)
    }
}

fn maclaurin(z: f64) -> f64 {
    let z3 = z * z * z;
    let (mut f, mut g) = (1.0, 1.0);
    let (mut a, mut b) = (1.0, 1.0);
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        a *= z3 / (k3 * (k3 - 1.0));
        b *= z3 / (k3 * (k3 + 1.0));
        f += a;
        g += b;
        if a.abs() < 1e-18 * f.abs().max(1.0) && b.abs() < 1e-18 * g.abs().max(1.0) {
            break;
        }
    }
    AI0 * f - AIP0 * z * g
}

/// Coefficients `u_k` of the large-argument expansions.
fn u_coefficients(n: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(n);
    u.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
    }
    u
}

fn asymptotic_pos(z: f64) -> f64 {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let u = u_coefficients(40);
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    for (k, uk) in u.iter().enumerate() {
        let term = uk / zeta.powi(k as i32);
        if term > last {
            break;
        }
        sum += sign * term;
        last = term;
        sign = -sign;
        if term < 1e-17 {
            break;
        }
    }
    (-zeta).exp() / (2.0 * PI.sqrt() * z.powf(0.25)) * sum
}

fn asymptotic_neg(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let u = u_coefficients(40);
    let (mut even, mut odd) = (0.0, 0.0);
    let mut last = f64::INFINITY;
    for (k, uk) in u.iter().enumerate() {
        let term = uk / zeta.powi(k as i32);
        if term > last {
            break;
        }
        last = term;
        // (-1)^j u_{2j} and (-1)^j u_{2j+1}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        if term < 1e-17 {
            break;
        }
    }
    let phase = zeta - FRAC_PI_4;
    (phase.cos() * even + phase.sin() * odd) / (PI.sqrt() * x.powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Independent reference values (Cephes/AMOS).
        let cases = [
            (0.0, 0.355_028_053_887_817_2),
            (1.0, 0.135_292_416_312_881_47),
            (-1.0, 0.535_560_883_292_352_2),
            (-5.0, 0.350_761_009_024_114_2),
            (-10.0, 0.040_241_238_486_441_955),
            (-18.0, 0.271_204_540_804_413_9),
            (5.0, 1.083_444_281_360_743_3e-4),
            (10.0, 1.104_753_255_289_865_4e-10),
            (-6.0001, -0.329_179_757_303_795_4),
            (6.0001, 9.945_218_138_620_908e-6),
        ];
        for (z, want) in cases {
            let got = airy_ai(z);
            assert!((got - want).abs() < 1e-11, "Ai({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn branches_agree_at_switch_points() {
        for z in [SERIES_MAX_POS, -SERIES_MAX_NEG] {
            let a = maclaurin(z);
            let b = if z > 0.0 { asymptotic_pos(z) } else { asymptotic_neg(-z) };
            assert!((a - b).abs() < 1e-10, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn satisfies_airy_equation() {
        // Ai'' = z Ai by central differences.
        let h = 1e-3;
        for z in [-12.0, -7.5, -3.0, 0.5, 4.0, 6.5] {
            let d2 = (airy_ai(z + h) - 2.0 * airy_ai(z) + airy_ai(z - h)) / (h * h);
            assert!((d2 - z * airy_ai(z)).abs() < 1e-4, "{z}");
        }
    }
}
