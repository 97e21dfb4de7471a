//! Physics extracted from states and recorded series: conditional moments,
//! exponential decay fits, oscillation detection and emission spectra.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Channel, TwoChannelState};
use crate::mcwf::JumpRecord;
use crate::model::ModelSpec;

/// Populations below this count as an empty channel.
pub const EMPTY_CHANNEL: f64 = 1e-12;

/// Minimum number of samples a decay fit accepts.
pub const MIN_FIT_POINTS: usize = 10;

/// Conditional position moments of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub population: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn position_moments(state: &TwoChannelState, channel: Channel) -> Result<Moments> {
    let grid = state.grid();
    let psi = state.channel(channel);
    let (mut p, mut sx) = (0.0, 0.0);
    for (z, &x) in psi.iter().zip(grid.x()) {
        let d = z.norm_sqr();
        p += d;
        sx += d * x;
    }
    let population = p * grid.dx();
    if population <= EMPTY_CHANNEL {
        return Err(Error::EmptyChannel {
            channel: channel.index(),
            population,
        });
    }
    let mean = sx / p;
    let sxx: f64 = psi
        .iter()
        .zip(grid.x())
        .map(|(z, &x)| z.norm_sqr() * (x - mean) * (x - mean))
        .sum();
    Ok(Moments {
        population,
        mean,
        variance: sxx / p,
    })
}

/// Which samples enter a decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowPolicy {
    /// Samples whose population lies in `[lo, hi]`. This skips the quadratic
    /// turn-on at early times and the non-exponential tail.
    PopulationBand { lo: f64, hi: f64 },
    /// Samples with `t_lo <= t <= t_hi`.
    TimeRange { t_lo: f64, t_hi: f64 },
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::PopulationBand { lo: 0.1, hi: 0.8 }
    }
}

/// Least-squares line through `ln p` versus `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Negative slope of the log-population line.
    pub gamma_fit: f64,
    /// Log-population at `t = 0` on the fitted line.
    pub intercept: f64,
    pub r_squared: f64,
    /// `(t_lo, t_hi)` of the samples used.
    pub window: (f64, f64),
    pub n_points: usize,
}

pub fn fit_decay_rate(times: &[f64], population: &[f64], window: WindowPolicy) -> Result<DecayFit> {
    if times.len() != population.len() {
        return Err(Error::LengthMismatch(times.len(), population.len()));
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (&t, &p) in times.iter().zip(population) {
        let inside = match window {
            WindowPolicy::PopulationBand { lo, hi } => p >= lo && p <= hi,
            WindowPolicy::TimeRange { t_lo, t_hi } => t >= t_lo && t <= t_hi,
        };
        if !inside {
            continue;
        }
        if !(p > 0.0) {
            return Err(Error::NonPositivePopulation { t, value: p });
        }
        ts.push(t);
        ys.push(p.ln());
    }
    if ts.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            found: ts.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let n = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        let (dt, dy) = (t - t_mean, y - y_mean);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    let slope = sty / stt;
    let intercept = y_mean - slope * t_mean;
    let ss_res: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| {
            let r = y - (intercept + slope * t);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        gamma_fit: -slope,
        intercept,
        r_squared,
        window: (ts[0], ts[ts.len() - 1]),
        n_points: ts.len(),
    })
}

/// Result of [`detect_oscillation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Oscillation {
    pub is_oscillatory: bool,
    pub n_local_minima: usize,
}

pub const OSCILLATION_MIN_LEN: usize = 16;

/// Counts strict local minima of the 5-point moving average of `series`.
pub fn detect_oscillation(series: &[f64]) -> Result<Oscillation> {
    if series.len() < OSCILLATION_MIN_LEN {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: OSCILLATION_MIN_LEN,
        });
    }
    let smooth: Vec<f64> = series.windows(5).map(|w| w.iter().sum::<f64>() / 5.0).collect();
    let n_local_minima = smooth
        .windows(3)
        .filter(|w| w[1] < w[0] && w[1] < w[2])
        .count();
    Ok(Oscillation {
        is_oscillatory: n_local_minima >= 1,
        n_local_minima,
    })
}

/// Histogram of emitted photon frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl SpectrumHistogram {
    /// Uniform bins over `[min, max]` of `values`. When all values coincide
    /// the histogram collapses to one bin centred on them.
    pub fn from_values(values: &[f64], n_bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoJumps);
        }
        if n_bins == 0 {
            return Err(crate::error::invalid("n_bins", "must be at least 1"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi, n_bins) = if hi > lo {
            (lo, hi, n_bins)
        } else {
            let half = 1e-9 * lo.abs().max(1.0);
            (lo - half, lo + half, 1)
        };
        let width = (hi - lo) / n_bins as f64;
        let mut bin_edges: Vec<f64> = (0..n_bins).map(|i| lo + i as f64 * width).collect();
        bin_edges.push(hi);
        let mut counts = vec![0u64; n_bins];
        for &v in values {
            let i = (((v - lo) / width) as usize).min(n_bins - 1);
            counts[i] += 1;
        }
        Ok(Self {
            bin_edges,
            counts,
            total: values.len() as u64,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Bin containing `value`, clamped to the histogram range.
    pub fn bin_of(&self, value: f64) -> usize {
        let n = self.n_bins();
        let lo = self.bin_edges[0];
        let width = (self.bin_edges[n] - lo) / n as f64;
        if value <= lo {
            return 0;
        }
        (((value - lo) / width) as usize).min(n - 1)
    }

    /// Most populated bin; ties go to the lowest index.
    pub fn peak_bin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }
}

/// Maps each jump position to its photon frequency through the difference
/// potential and histograms the result.
pub fn emission_spectrum(
    jumps: &[JumpRecord],
    model: &ModelSpec,
    n_bins: usize,
) -> Result<SpectrumHistogram> {
    if jumps.is_empty() {
        return Err(Error::NoJumps);
    }
    let freqs: Vec<f64> = jumps
        .iter()
        .map(|j| model.difference_potential(j.x_jump))
        .collect::<Result<_>>()?;
    SpectrumHistogram::from_values(&freqs, n_bins)
}

/// One-sample Kolmogorov-Smirnov test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Kolmogorov-Smirnov test of `samples` against the exponential law with
/// the given rate.
pub fn ks_exponential(samples: &[f64], rate: f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::SeriesTooShort { len: 0, needed: 1 });
    }
    if !(rate > 0.0) {
        return Err(crate::error::invalid("rate", format!("{rate} must be positive")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = 1.0 - (-rate * x.max(0.0)).exp();
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        n: sorted.len(),
    })
}

/// Complementary Kolmogorov distribution `Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
