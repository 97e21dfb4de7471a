//! Closed-form reference models: Weisskopf-Wigner decay rates, the Condon
//! factor of a harmonic ground state against a linear continuum,
//! Landau-Zener and Rabi probabilities.
//!
//! All formulas use the scaled units of the propagator (`hbar = 1`,
//! kinetic operator `-d^2/dx^2`). The discrete state is the harmonic ground
//! state `phi0(x) = (pi sqrt 2)^(-1/4) exp(-x^2 / (2 sqrt 2))` at energy
//! `omega0 = 1/sqrt 2`; the continuum is `U = 1/sqrt 2 - alpha x`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::Serialize;

use crate::airy::airy_ai;
use crate::error::{invalid, Error, Result};

/// Energy of the discrete state.
pub const OMEGA0: f64 = FRAC_1_SQRT_2;

/// `|phi0(0)|^2 = (2 pi^2)^(-1/4)`.
pub fn ground_density_at_origin() -> f64 {
    (2.0 * PI * PI).powf(-0.25)
}

/// Discrete state coupled by a constant `v` to a linear continuum of slope `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayModelParams {
    pub v: f64,
    pub alpha: f64,
}

impl DecayModelParams {
    pub fn new(v: f64, alpha: f64) -> Result<Self> {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid("v", format!("{v} must be non-negative")));
        }
        check_alpha(alpha)?;
        Ok(Self { v, alpha })
    }

    pub fn omega0(&self) -> f64 {
        OMEGA0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid("alpha", format!("{alpha} must be positive")))
    }
}

/// Steep-slope (reflection principle) rate `2 pi V^2 / (alpha (2 pi^2)^(1/4))`.
pub fn ww_rate_reflection(params: &DecayModelParams) -> Result<f64> {
    check_alpha(params.alpha)?;
    Ok(2.0 * PI * params.v * params.v / (params.alpha * (2.0 * PI * PI).powf(0.25)))
}

/// Coupling that gives `gamma` under the reflection-principle rate.
pub fn coupling_for_rate(gamma: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", format!("{gamma} must be non-negative")));
    }
    Ok((gamma * alpha * (2.0 * PI * PI).powf(0.25) / (2.0 * PI)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CondonMethod {
    /// `|phi0(0)|^2 / alpha`.
    Reflection,
    /// Overlap with the energy-normalized Airy continuum state.
    Quadrature,
}

/// Squared Franck-Condon overlap, in units of 1/energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CondonFactor {
    pub magnitude_sq: f64,
    pub method: CondonMethod,
}

/// Condon factor at the resonant energy `omega0`.
///
/// The continuum state of `-d^2/dx^2 + 1/sqrt 2 - alpha x` at energy
/// `omega0` is `alpha^(-1/6) Ai(-alpha^(1/3) x)`, normalized to
/// `delta(E - E')`.
pub fn condon_factor(alpha: f64, method: CondonMethod) -> Result<CondonFactor> {
    check_alpha(alpha)?;
    let magnitude_sq = match method {
        CondonMethod::Reflection => ground_density_at_origin() / alpha,
        CondonMethod::Quadrature => {
            let s = condon_overlap(alpha)?;
            s * s
        }
    };
    Ok(CondonFactor {
        magnitude_sq,
        method,
    })
}

/// Half-width of the integration domain; `phi0` is below 1e-16 of its peak beyond it.
const QUADRATURE_HALF_WIDTH: f64 = 11.0;
const QUADRATURE_TOL: f64 = 1e-13;

/// Real overlap `<phi0 | E = omega0>` by composite Simpson quadrature,
/// refined by interval doubling until successive estimates agree.
pub fn condon_overlap(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let c = (PI * SQRT_2).powf(-0.25);
    let norm = alpha.powf(-1.0 / 6.0);
    let scale = alpha.cbrt();
    let integrand = |x: f64| c * (-x * x / (2.0 * SQRT_2)).exp() * norm * airy_ai(-scale * x);

    let a = -QUADRATURE_HALF_WIDTH;
    let b = QUADRATURE_HALF_WIDTH;
    let mut previous = simpson(&integrand, a, b, 128);
    let mut delta = f64::INFINITY;
    let mut n = 256;
    while n <= 1 << 20 {
        let current = simpson(&integrand, a, b, n);
        delta = (current - previous).abs();
        if delta < QUADRATURE_TOL {
            return Ok(current);
        }
        previous = current;
        n *= 2;
    }
    Err(Error::QuadratureDiverged { delta })
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Golden-rule rate `2 pi V^2 |S|^2`.
pub fn ww_rate_condon(v: f64, s: &CondonFactor) -> Result<f64> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(invalid("v", format!("{v} must be non-negative")));
    }
    Ok(2.0 * PI * v * v * s.magnitude_sq)
}

/// Population left in the discrete state, `exp(-gamma t)`.
pub fn survival_probability(gamma: f64, t: f64) -> f64 {
    (-gamma * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandauZener {
    /// Probability of staying on the initial diabatic channel.
    pub survival: f64,
    /// Probability of crossing over to the other diabatic channel.
    pub transfer: f64,
}

/// Landau-Zener passage with constant coupling `v`, diabatic slope
/// difference `slope_difference` and crossing speed `velocity`:
/// survival `exp(-2 pi V^2 / (|dF| v))`.
///
/// For a packet of mean wave number `k` the speed is `2k` (mass 1/2).
pub fn lz_probability(v: f64, slope_difference: f64, velocity: f64) -> Result<LandauZener> {
    if !v.is_finite() {
        return Err(invalid("v", "must be finite"));
    }
    let sweep = slope_difference.abs() * velocity;
    if !(sweep > 0.0 && velocity > 0.0 && sweep.is_finite()) {
        return Err(invalid(
            "sweep_rate",
            format!("|dF| v = {sweep} must be positive"),
        ));
    }
    let survival = (-2.0 * PI * v * v / sweep).exp();
    Ok(LandauZener {
        survival,
        transfer: 1.0 - survival,
    })
}

/// Excited population `sin^2(V t)` for resonant flat surfaces.
pub fn rabi_population(v: f64, t: f64) -> f64 {
    (v * t).sin().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_rate_values() {
        let v = coupling_for_rate(0.26, 2.0).unwrap();
        assert!((v - 0.4177).abs() < 1e-4, "{v}");
        let p = DecayModelParams::new(v, 2.0).unwrap();
        assert!((ww_rate_reflection(&p).unwrap() - 0.26).abs() < 1e-14);
        let zero = DecayModelParams::new(0.0, 2.0).unwrap();
        assert_eq!(ww_rate_reflection(&zero).unwrap(), 0.0);
        let g1 = ww_rate_reflection(&DecayModelParams::new(0.3, 1.5).unwrap()).unwrap();
        let g2 = ww_rate_reflection(&DecayModelParams::new(0.6, 1.5).unwrap()).unwrap();
        assert!((g2 / g1 - 4.0).abs() < 1e-14);
        assert!(DecayModelParams::new(0.3, 0.0).is_err());
        assert!(condon_factor(-1.0, CondonMethod::Reflection).is_err());
    }

    #[test]
    fn reflection_condon_value() {
        assert!((ground_density_at_origin() - 0.4744).abs() < 1e-4);
        let s = condon_factor(2.0, CondonMethod::Reflection).unwrap();
        assert!((s.magnitude_sq - 0.2372).abs() < 1e-4);
    }

    #[test]
    fn rate_routes_agree() {
        for (v, alpha) in [(0.1, 0.5), (0.4177, 2.0), (1.3, 7.0)] {
            let s = condon_factor(alpha, CondonMethod::Reflection).unwrap();
            let p = DecayModelParams::new(v, alpha).unwrap();
            let a = ww_rate_condon(v, &s).unwrap();
            let b = ww_rate_reflection(&p).unwrap();
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b);
        }
    }

    #[test]
    fn quadrature_approaches_reflection_on_steep_slopes() {
        let gap = |alpha: f64| {
            let q = condon_factor(alpha, CondonMethod::Quadrature).unwrap().magnitude_sq;
            let r = condon_factor(alpha, CondonMethod::Reflection).unwrap().magnitude_sq;
            (q - r).abs() / r
        };
        assert!(gap(8.0) < 0.05, "{}", gap(8.0));
        assert!(gap(4.0) > gap(8.0));
        assert!(gap(2.0) > gap(4.0));
        assert!(gap(0.5) > gap(2.0));
    }

    #[test]
    fn survival_and_rabi() {
        assert_eq!(survival_probability(0.26, 0.0), 1.0);
        assert!((survival_probability(0.26, 1.0 / 0.26) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(survival_probability(0.0, 123.0), 1.0);
        assert_eq!(rabi_population(0.7, 0.0), 0.0);
        assert!((rabi_population(2.0, PI / 4.0) - 1.0).abs() < 1e-15);
        assert!((rabi_population(1.0, PI / 4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn landau_zener_limits() {
        let lz = lz_probability(0.0, 1.0, 2.0).unwrap();
        assert_eq!((lz.survival, lz.transfer), (1.0, 0.0));
        let lz = lz_probability(1e3, 1.0, 2.0).unwrap();
        assert_eq!(lz.transfer, 1.0);
        let lz = lz_probability(0.2, -1.0, 2.0).unwrap();
        assert!((lz.survival - (-2.0 * PI * 0.04 / 2.0f64).exp()).abs() < 1e-15);
        assert!((lz.survival - 0.8819).abs() < 1e-4);
        assert!(lz_probability(0.2, 0.0, 2.0).is_err());
        assert!(lz_probability(0.2, 1.0, 0.0).is_err());
    }
}
