//! Frequency-domain mode solutions and the time-to-frequency comparison.
//!
//! In the frequency domain every tested equation is algebraic:
//! `a²·K̂(ω)·J(ω) = f̂(ω)` for the electric-field kernels and
//! `a²·(1 + K̂(ω))·J(ω) = f̂(ω)` for the magnetic-field kernels, where `f̂` is
//! the incident spectrum times the angular projection factor.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::kernels::{band_frequencies, kernel_fd_oracle_with, KernelKind};
use crate::mot::CoefficientSeries;
use crate::specfun::sph_j_all;
use crate::vsh::{AngularProjector, Equation, IncidentConfig, ModeIndex, SurfaceRule};
use crate::{Error, Result};

/// Smallest `|a²·K̂|` accepted as a divisor.
pub const DIVISION_GUARD: f64 = 1e-300;

/// Late-time level below which a series counts as decayed.
pub const DECAY_THRESHOLD: f64 = 1e-8;

/// Equispaced frequency band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub f_lo: f64,
    pub f_hi: f64,
    pub count: usize,
}

impl BandSpec {
    pub fn new(f_lo: f64, f_hi: f64, count: usize) -> Result<Self> {
        if !(f_lo > 0.0 && f_hi >= f_lo && count >= 1) {
            return Err(Error::Config(format!("invalid band [{f_lo}, {f_hi}] with {count} samples")));
        }
        Ok(Self { f_lo, f_hi, count })
    }

    pub fn frequencies(&self) -> Vec<f64> {
        band_frequencies(self.f_lo, self.f_hi, self.count)
    }
}

impl Default for BandSpec {
    fn default() -> Self {
        Self { f_lo: 0.1e9, f_hi: 0.7e9, count: 21 }
    }
}

/// Fourier transform of the modulated Gaussian at frequency `f` (Hz):
/// `(Aσ√(2π)/2)[e^{−2π²σ²(f−f0)²} e^{j2πf0 tp} + e^{−2π²σ²(f+f0)²} e^{−j2πf0 tp}] e^{−j2πf tp}`.
pub fn incident_spectrum(config: &IncidentConfig, f: f64) -> Complex64 {
    let s = config.sigma;
    let g = |d: f64| (-2.0 * PI * PI * s * s * d * d).exp();
    let carrier = 2.0 * PI * config.f0 * config.tp;
    let sum = Complex64::from_polar(g(f - config.f0), carrier) + Complex64::from_polar(g(f + config.f0), -carrier);
    sum * Complex64::from_polar(config.amplitude * s * (2.0 * PI).sqrt() / 2.0, -2.0 * PI * f * config.tp)
}

/// Power of the incident spectrum at `f` relative to `f_ref`, in dB.
pub fn spectrum_level_db(config: &IncidentConfig, f: f64, f_ref: f64) -> f64 {
    10.0 * (incident_spectrum(config, f).norm_sqr() / incident_spectrum(config, f_ref).norm_sqr()).log10()
}

/// Frequency-domain mode current over a band.
#[derive(Debug, Clone, PartialEq)]
pub struct FdModeSolution {
    pub mode: ModeIndex,
    pub kind: KernelKind,
    pub radius: f64,
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `f̂(ω)` per frequency.
    pub rhs: Vec<Complex64>,
    /// `K̂(ω)` per frequency.
    pub kernel: Vec<Complex64>,
}

impl FdModeSolution {
    /// Worst relative residual of the frequency-domain equation.
    pub fn residual(&self) -> f64 {
        let a2 = self.radius * self.radius;
        let id = if self.kind.is_second_kind() { 1.0 } else { 0.0 };
        self.values
            .iter()
            .zip(&self.rhs)
            .zip(&self.kernel)
            .map(|((j, f), k)| (a2 * (id + k) * j - f).norm() / f.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Mode current `J(ω)` for `mode` under `kind` on a sphere of radius `radius`.
pub fn fd_mode_solution(
    mode: &ModeIndex,
    kind: KernelKind,
    band: &BandSpec,
    config: &IncidentConfig,
    radius: f64,
) -> Result<FdModeSolution> {
    let equation = Equation::from_kernel(kind)?;
    equation.check_mode(mode)?;
    let rule = SurfaceRule::for_band(mode.n, radius, config.f0 + 4.0 * config.bandwidth, config.c);
    let projector = AngularProjector::new(config, mode, equation, radius, &rule)?;
    let freqs = band.frequencies();
    let a2 = radius * radius;
    let id = if kind.is_second_kind() { 1.0 } else { 0.0 };
    let mu = config.eta / config.c;
    let mut values = Vec::with_capacity(freqs.len());
    let mut rhs = Vec::with_capacity(freqs.len());
    let mut kernel = Vec::with_capacity(freqs.len());
    for &f in &freqs {
        let w = 2.0 * PI * f;
        let fh = incident_spectrum(config, f) * projector.spatial_factor(w);
        let kh = kernel_fd_oracle_with(kind, mode.n, radius, w, config.c, mu)?;
        let denom = a2 * (id + kh);
        if !(denom.norm() > DIVISION_GUARD) {
            return Err(Error::Resonance { freq_hz: f, magnitude: denom.norm() });
        }
        values.push(fh / denom);
        rhs.push(fh);
        kernel.push(kh);
    }
    Ok(FdModeSolution { mode: *mode, kind, radius, freqs, values, rhs, kernel })
}

/// Spectrum of a marched series at band frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TdSpectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Late-time magnitude (last 5 % of steps) relative to the peak.
    pub decay_ratio: f64,
}

impl TdSpectrum {
    pub fn decayed(&self) -> bool {
        self.decay_ratio <= DECAY_THRESHOLD
    }

    /// Human-readable warning when the series has not decayed.
    pub fn warning(&self) -> Option<String> {
        (!self.decayed()).then(|| {
            format!(
                "series has not decayed: late/peak = {:.3e} > {DECAY_THRESHOLD:e}; spectrum carries truncation error",
                self.decay_ratio
            )
        })
    }
}

/// Exact Fourier integral of the piecewise-Legendre current:
/// `∫_0^1 P_j(2τ−1) e^{−jωΔtτ} dτ = e^{−jb} (−j)^j j_j(b)`, `b = ωΔt/2`.
pub fn td_to_fd(series: &CoefficientSeries, band: &BandSpec) -> Result<TdSpectrum> {
    let freqs = band.frequencies();
    let dt = series.dt;
    let np = series.np;
    let mut values = Vec::with_capacity(freqs.len());
    for &f in &freqs {
        let w = 2.0 * PI * f;
        let b = 0.5 * w * dt;
        let jj = sph_j_all(np, b)?;
        let mut minus_j_pow = Complex64::new(1.0, 0.0);
        let factors: Vec<Complex64> = (0..=np)
            .map(|j| {
                let v = minus_j_pow * jj[j] * Complex64::from_polar(dt, -b);
                minus_j_pow *= Complex64::new(0.0, -1.0);
                v
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, step) in series.steps().enumerate() {
            let s: Complex64 = step.iter().zip(&factors).map(|(v, fj)| v * fj).sum();
            if s != Complex64::new(0.0, 0.0) {
                acc += s * Complex64::from_polar(1.0, -w * dt * q as f64);
            }
        }
        values.push(acc);
    }
    let peak = series.peak();
    let tail_from = series.nt() - (series.nt() / 20).max(1);
    let decay_ratio = if peak > 0.0 { series.max_from(tail_from) / peak } else { 0.0 };
    Ok(TdSpectrum { freqs, values, decay_ratio })
}

/// `‖td − fd‖₂ / ‖fd‖₂`.
pub fn band_compare(td: &[Complex64], fd: &[Complex64]) -> Result<f64> {
    if td.len() != fd.len() {
        return Err(Error::Mismatch(format!("{} time-domain samples vs {} reference samples", td.len(), fd.len())));
    }
    let den: f64 = fd.iter().map(|v| v.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = td.iter().zip(fd).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((num / den).sqrt())
}

/// CSV `f_hz,td_re,td_im,fd_re,fd_im,abs_err`.
pub fn write_comparison_csv<W: Write>(mut out: W, freqs: &[f64], td: &[Complex64], fd: &[Complex64]) -> io::Result<()> {
    writeln!(out, "f_hz,td_re,td_im,fd_re,fd_im,abs_err")?;
    for ((f, a), b) in freqs.iter().zip(td).zip(fd) {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            f,
            a.re,
            a.im,
            b.re,
            b.im,
            (a - b).norm()
        )?;
    }
    Ok(())
}
