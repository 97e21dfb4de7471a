//! Uniform spatial grid and two-channel wave functions.
//!
//! Units are scaled so that `hbar = 1` and the kinetic operator is exactly
//! `-d^2/dx^2` (effective mass 1/2).

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::spectral::Spectral;

/// Uniform periodic lattice `x_j = x_min + j dx`, `j = 0..n`, with its
/// momentum lattice in standard discrete-transform ordering.
#[derive(Debug, Clone)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.x_min == other.x_min && self.x_max == other.x_max && self.len() == other.len()
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 64 || !n_points.is_power_of_two() {
            return Err(Error::BadPointCount(n_points));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::DegenerateInterval { x_min, x_max });
        }
        let length = x_max - x_min;
        let dx = length / n_points as f64;
        let x = (0..n_points).map(|j| x_min + j as f64 * dx).collect();
        let dk = 2.0 * PI / length;
        let half = n_points / 2;
        let k = (0..n_points)
            .map(|j| {
                if j < half {
                    j as f64 * dk
                } else {
                    (j as f64 - n_points as f64) * dk
                }
            })
            .collect();
        Ok(Self {
            x_min,
            x_max,
            dx,
            x,
            k,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.x_max - self.x_min)
    }

    /// Largest momentum magnitude, `pi / dx`.
    pub fn k_max(&self) -> f64 {
        PI / self.dx
    }
}

/// One of the two electronic channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Ground,
    Excited,
}

impl Channel {
    pub fn index(self) -> usize {
        match self {
            Channel::Ground => 1,
            Channel::Excited => 2,
        }
    }
}

/// Populations of a state: `total = p1 + p2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub total: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Complex amplitudes of both channels on a shared grid.
#[derive(Debug, Clone)]
pub struct TwoChannelState {
    grid: Arc<Grid>,
    pub(crate) psi1: Vec<Complex64>,
    pub(crate) psi2: Vec<Complex64>,
}

impl TwoChannelState {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            psi1: vec![Complex64::new(0.0, 0.0); n],
            psi2: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Builds a state from per-node amplitudes `(psi1(x), psi2(x))`.
    pub fn from_fn<F>(grid: Arc<Grid>, f: F) -> Self
    where
        F: Fn(f64) -> (Complex64, Complex64),
    {
        let (psi1, psi2) = grid.x().iter().map(|&x| f(x)).unzip();
        Self { grid, psi1, psi2 }
    }

    pub fn from_channels(
        grid: Arc<Grid>,
        psi1: Vec<Complex64>,
        psi2: Vec<Complex64>,
    ) -> Result<Self> {
        if psi1.len() != grid.len() || psi2.len() != grid.len() {
            return Err(Error::LengthMismatch(psi1.len().max(psi2.len()), grid.len()));
        }
        Ok(Self { grid, psi1, psi2 })
    }

    /// Normalized Gaussian packet `exp(-(x-x0)^2 / (4 sigma^2) + i k0 x)` on
    /// one channel; `sigma` is the standard deviation of the density.
    pub fn gaussian_packet(
        grid: Arc<Grid>,
        channel: Channel,
        x0: f64,
        k0: f64,
        sigma: f64,
    ) -> Self {
        let amp = |x: f64| {
            let d = x - x0;
            Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), k0 * x)
        };
        let zero = Complex64::new(0.0, 0.0);
        let mut state = Self::from_fn(grid, |x| match channel {
            Channel::Ground => (amp(x), zero),
            Channel::Excited => (zero, amp(x)),
        });
        state.normalize();
        state
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn psi1(&self) -> &[Complex64] {
        &self.psi1
    }

    pub fn psi2(&self) -> &[Complex64] {
        &self.psi2
    }

    pub fn channel(&self, channel: Channel) -> &[Complex64] {
        match channel {
            Channel::Ground => &self.psi1,
            Channel::Excited => &self.psi2,
        }
    }

    pub fn density(&self, channel: Channel) -> Vec<f64> {
        self.channel(channel).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Riemann-sum populations with `dx` weight.
    pub fn norm(&self) -> Norms {
        let dx = self.grid.dx();
        let p1 = sum_sqr(&self.psi1) * dx;
        let p2 = sum_sqr(&self.psi2) * dx;
        Norms {
            total: p1 + p2,
            p1,
            p2,
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for z in self.psi1.iter_mut().chain(self.psi2.iter_mut()) {
            *z *= factor;
        }
    }

    /// Rescales to unit total norm; a zero state is left unchanged.
    pub fn normalize(&mut self) {
        let total = self.norm().total;
        if total > 0.0 {
            self.scale(total.sqrt().recip());
        }
    }

    /// `sum(conj(a1) b1 + conj(a2) b2) dx`.
    pub fn overlap(&self, other: &TwoChannelState) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).map(|(p, q)| p.conj() * q).sum()
        };
        Ok((dot(&self.psi1, &other.psi1) + dot(&self.psi2, &other.psi2)) * self.grid.dx())
    }

    /// Norm evaluated from the momentum-space amplitudes.
    pub fn momentum_norm(&self) -> f64 {
        let mut spectral = Spectral::new(self.grid.len());
        let mut total = 0.0;
        for psi in [&self.psi1, &self.psi2] {
            let mut buf = psi.clone();
            spectral.forward(&mut buf);
            total += sum_sqr(&buf);
        }
        total * self.grid.dx() / self.grid.len() as f64
    }

    /// `<psi_c| -d^2/dx^2 + U |psi_c>` for one channel, unnormalized.
    pub fn channel_energy(&self, channel: Channel, potential: &PotentialSpec) -> Result<f64> {
        let u = potential.sample(&self.grid)?;
        let mut spectral = Spectral::new(self.grid.len());
        Ok(energy_with(&mut spectral, &self.grid, self.channel(channel), &u))
    }
}

fn sum_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn energy_with(spectral: &mut Spectral, grid: &Grid, psi: &[Complex64], u: &[f64]) -> f64 {
    let mut buf = psi.to_vec();
    spectral.forward(&mut buf);
    let kinetic: f64 = buf
        .iter()
        .zip(grid.k())
        .map(|(z, k)| k * k * z.norm_sqr())
        .sum::<f64>()
        * grid.dx()
        / grid.len() as f64;
    let potential: f64 = psi.iter().zip(u).map(|(z, v)| v * z.norm_sqr()).sum::<f64>() * grid.dx();
    kinetic + potential
}

/// Exact ground state of `-d^2/dx^2 + x^2/2` on channel 1,
/// `C exp(-x^2 / (2 sqrt 2))`, with energy `1/sqrt(2)`.
pub fn harmonic_ground_state(grid: Arc<Grid>) -> Result<TwoChannelState> {
    let edge = grid.x_min().abs().min(grid.x_max().abs());
    let ratio = if grid.x_min() < 0.0 && grid.x_max() > 0.0 {
        (-edge * edge / SQRT_2).exp()
    } else {
        1.0
    };
    if ratio >= 1e-12 {
        return Err(Error::GridTooNarrow { ratio });
    }
    displaced_ground_state(grid, 0.0)
}

/// The harmonic ground state translated to `x = shift`, without the tail check.
pub fn displaced_ground_state(grid: Arc<Grid>, shift: f64) -> Result<TwoChannelState> {
    let zero = Complex64::new(0.0, 0.0);
    let mut state = TwoChannelState::from_fn(grid, |x| {
        let d = x - shift;
        (Complex64::new((-d * d / (2.0 * SQRT_2)).exp(), 0.0), zero)
    });
    state.normalize();
    Ok(state)
}

/// Lowest eigenstate of `-d^2/dx^2 + U` by split-operator diffusion in
/// imaginary time, renormalizing every step.
///
/// Stops when the energy changes by less than `tol` between iterations.
/// The result is placed on channel 1.
pub fn imaginary_time_relax(
    grid: Arc<Grid>,
    potential: &PotentialSpec,
    dt: f64,
    max_iters: usize,
    tol: f64,
) -> Result<(TwoChannelState, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(crate::error::invalid("dt", format!("{dt} must be positive")));
    }
    let u = potential.sample(&grid)?;
    let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
    if !umin.is_finite() {
        return Err(crate::error::invalid(
            "potential",
            "must be finite on the grid",
        ));
    }
    let n = grid.len();
    let dx = grid.dx();
    let mut spectral = Spectral::new(n);
    let kinetic: Vec<Complex64> = grid
        .k()
        .iter()
        .map(|k| Complex64::new((-k * k * dt / 2.0).exp(), 0.0))
        .collect();
    // Shifting by the minimum keeps the potential factor bounded by 1.
    let pot: Vec<f64> = u.iter().map(|v| (-(v - umin) * dt).exp()).collect();

    let j_min = u
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let center = grid.x()[j_min];
    let width = (grid.x_max() - grid.x_min()) / 16.0;
    let mut psi: Vec<Complex64> = grid
        .x()
        .iter()
        .map(|&x| {
            let d = (x - center) / width;
            Complex64::new((-d * d).exp(), 0.0)
        })
        .collect();

    let renorm = |psi: &mut Vec<Complex64>| {
        let s = (sum_sqr(psi) * dx).sqrt().recip();
        for z in psi.iter_mut() {
            *z *= s;
        }
    };
    renorm(&mut psi);
    let mut energy = energy_with(&mut spectral, &grid, &psi, &u);
    let mut delta = f64::INFINITY;
    for _ in 0..max_iters {
        spectral.apply_diagonal(&mut psi, &kinetic);
        for (z, p) in psi.iter_mut().zip(&pot) {
            *z *= p;
        }
        spectral.apply_diagonal(&mut psi, &kinetic);
        renorm(&mut psi);
        let next = energy_with(&mut spectral, &grid, &psi, &u);
        delta = (next - energy).abs();
        energy = next;
        if delta < tol {
            let psi2 = vec![Complex64::new(0.0, 0.0); n];
            let state = TwoChannelState::from_channels(grid, psi, psi2)?;
            return Ok((state, energy));
        }
    }
    Err(Error::RelaxationDiverged {
        iters: max_iters,
        delta,
    })
}
