//! Potential surfaces, laser pulse envelopes and crossing geometry.
//!
//! The laser frequency is folded into the excited surface, so a model
//! stores `U1` and `U2 - omega` directly. A linear chirp enters as a
//! time-dependent additive energy on channel 2.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;

/// A potential energy surface on the line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    /// `U(x) = x^2 / 2`.
    Harmonic,
    /// `U(x) = offset - slope * x`.
    Linear { offset: f64, slope: f64 },
    /// Samples on uniformly spaced nodes `x0 + j * dx`, linearly interpolated.
    Tabulated { x0: f64, dx: f64, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn linear(offset: f64, slope: f64) -> Self {
        PotentialSpec::Linear { offset, slope }
    }

    /// Constant surface, a linear one without slope.
    pub fn constant(value: f64) -> Self {
        PotentialSpec::Linear {
            offset: value,
            slope: 0.0,
        }
    }

    /// Surface sampled on the nodes of `grid`.
    pub fn tabulated(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::BadTable(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadTable(format!("non-finite sample at node {j}")));
        }
        Ok(PotentialSpec::Tabulated {
            x0: grid.x_min(),
            dx: grid.dx(),
            values,
        })
    }

    /// Evaluates the surface at `x`.
    pub fn value(&self, x: f64) -> Result<f64> {
        match self {
            PotentialSpec::Harmonic => Ok(0.5 * x * x),
            PotentialSpec::Linear { offset, slope } => Ok(offset - slope * x),
            PotentialSpec::Tabulated { x0, dx, values } => {
                let last = values.len() - 1;
                let hi = x0 + last as f64 * dx;
                let f = (x - x0) / dx;
                let nearest = f.round();
                if (f - nearest).abs() < 1e-9 && nearest >= 0.0 && nearest <= last as f64 {
                    return Ok(values[nearest as usize]);
                }
                if !(0.0..=last as f64).contains(&f) {
                    return Err(Error::OutsideTable { x, lo: *x0, hi });
                }
                let j = (f.floor() as usize).min(last - 1);
                let frac = f - j as f64;
                Ok(values[j] + frac * (values[j + 1] - values[j]))
            }
        }
    }

    /// Values at every node of `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        if let PotentialSpec::Tabulated { x0, dx, values } = self {
            if values.len() == grid.len() && *x0 == grid.x_min() && *dx == grid.dx() {
                return Ok(values.clone());
            }
        }
        grid.x().iter().map(|&x| self.value(x)).collect()
    }
}

/// Time envelope of the laser coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Envelope {
    Constant { v0: f64 },
    /// `V0 * exp(-(t - t_center)^2 / (2 t_width^2))`.
    Gaussian { v0: f64, t_center: f64, t_width: f64 },
}

/// Laser coupling: envelope plus a linear frequency chirp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    pub envelope: Envelope,
    /// Rate of the linear chirp; the channel-2 offset is
    /// `chirp_rate * (t - t_center)`, with `t_center = 0` for a constant envelope.
    pub chirp_rate: f64,
}

/// Instantaneous coupling and channel-2 energy shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseValue {
    pub coupling: f64,
    pub delta_omega: f64,
}

impl PulseSpec {
    pub fn constant(v0: f64) -> Result<Self> {
        Self::new(Envelope::Constant { v0 }, 0.0)
    }

    pub fn gaussian(v0: f64, t_center: f64, t_width: f64) -> Result<Self> {
        Self::new(
            Envelope::Gaussian {
                v0,
                t_center,
                t_width,
            },
            0.0,
        )
    }

    pub fn new(envelope: Envelope, chirp_rate: f64) -> Result<Self> {
        let v0 = match envelope {
            Envelope::Constant { v0 } => v0,
            Envelope::Gaussian {
                v0,
                t_center,
                t_width,
            } => {
                if !(t_width > 0.0 && t_width.is_finite()) {
                    return Err(invalid("t_width", format!("{t_width} must be positive")));
                }
                if !t_center.is_finite() {
                    return Err(invalid("t_center", "must be finite"));
                }
                v0
            }
        };
        if !(v0 >= 0.0 && v0.is_finite()) {
            return Err(invalid("v0", format!("{v0} must be finite and non-negative")));
        }
        if !chirp_rate.is_finite() {
            return Err(invalid("chirp_rate", "must be finite"));
        }
        Ok(Self {
            envelope,
            chirp_rate,
        })
    }

    pub fn with_chirp(mut self, chirp_rate: f64) -> Result<Self> {
        if !chirp_rate.is_finite() {
            return Err(invalid("chirp_rate", "must be finite"));
        }
        self.chirp_rate = chirp_rate;
        Ok(self)
    }

    fn t_center(&self) -> f64 {
        match self.envelope {
            Envelope::Constant { .. } => 0.0,
            Envelope::Gaussian { t_center, .. } => t_center,
        }
    }

    pub fn peak(&self) -> f64 {
        match self.envelope {
            Envelope::Constant { v0 } | Envelope::Gaussian { v0, .. } => v0,
        }
    }

    /// Whether the coupling and the chirp offset are both constant in time.
    pub fn is_static(&self) -> bool {
        matches!(self.envelope, Envelope::Constant { .. }) && self.chirp_rate == 0.0
    }

    pub fn value(&self, t: f64) -> PulseValue {
        let coupling = match self.envelope {
            Envelope::Constant { v0 } => v0,
            Envelope::Gaussian {
                v0,
                t_center,
                t_width,
            } => {
                let s = (t - t_center) / t_width;
                v0 * (-0.5 * s * s).exp()
            }
        };
        PulseValue {
            coupling,
            delta_omega: self.chirp_rate * (t - self.t_center()),
        }
    }
}

/// The full two-channel Hamiltonian: surfaces plus laser coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub u1: PotentialSpec,
    pub u2_minus_omega: PotentialSpec,
    pub pulse: PulseSpec,
}

/// A root of a surface difference located on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// The root nearest `x = 0`; exact ties go to the negative side.
    pub x: f64,
    /// Number of distinct roots found on the grid.
    pub count: usize,
}

impl ModelSpec {
    pub fn new(u1: PotentialSpec, u2_minus_omega: PotentialSpec, pulse: PulseSpec) -> Self {
        Self {
            u1,
            u2_minus_omega,
            pulse,
        }
    }

    /// Harmonic ground surface and a linear excited surface crossing the
    /// ground-state energy `1/sqrt(2)` at `x = 0`.
    pub fn decay(slope: f64, pulse: PulseSpec) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(invalid("alpha", format!("{slope} must be positive")));
        }
        Ok(Self::new(
            PotentialSpec::Harmonic,
            PotentialSpec::linear(std::f64::consts::FRAC_1_SQRT_2, slope),
            pulse,
        ))
    }

    /// `(U2 - omega)(x) - U1(x)`, the emitted photon frequency as a
    /// function of the position where the decay happens (up to `omega`).
    pub fn difference_potential(&self, x: f64) -> Result<f64> {
        Ok(self.u2_minus_omega.value(x)? - self.u1.value(x)?)
    }

    /// Root of `U2 - omega = U1` on `grid`.
    pub fn crossing_point(&self, grid: &Grid) -> Result<Crossing> {
        find_root(grid, |x| self.difference_potential(x))
    }

    /// Position where the excited surface `U2 - omega` equals `energy`.
    ///
    /// With `energy` set to a vibrational level of channel 1 this is the
    /// Franck-Condon resonance point.
    pub fn resonance_point(&self, grid: &Grid, energy: f64) -> Result<Crossing> {
        find_root(grid, |x| Ok(self.u2_minus_omega.value(x)? - energy))
    }
}

fn find_root<F>(grid: &Grid, f: F) -> Result<Crossing>
where
    F: Fn(f64) -> Result<f64>,
{
    let xs = grid.x();
    let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for j in 0..xs.len() {
        if values[j] == 0.0 {
            roots.push(xs[j]);
            continue;
        }
        if j + 1 < xs.len() && values[j + 1] != 0.0 && values[j].signum() != values[j + 1].signum()
        {
            roots.push(bisect(&f, xs[j], xs[j + 1], values[j])?);
        }
    }
    let mut best: Option<f64> = None;
    for &r in &roots {
        best = match best {
            Some(b) if b.abs() <= r.abs() => Some(b),
            _ => Some(r),
        };
    }
    best.map(|x| Crossing {
        x,
        count: roots.len(),
    })
    .ok_or(Error::NoCrossing)
}

fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
