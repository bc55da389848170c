//! Tangential vector spherical harmonics and projections of the incident
//! plane-wave pulse onto them.
//!
//! `Ψ_n^m = ∇_t Y_n^m · r/√(n(n+1))` and `Φ_n^m = r̂ × Ψ_n^m`; both families are
//! orthonormal on the unit sphere. Components are stored along `θ̂` and `φ̂`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::kernels::KernelKind;
use crate::specfun::{dtheta_assoc_legendre, gauss_legendre, m_over_sin_assoc_legendre, ynm_norm};
use crate::{Error, Result, C0, ETA0};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Psi,
    Phi,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Psi => "psi",
            Family::Phi => "phi",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psi" => Ok(Family::Psi),
            "phi" => Ok(Family::Phi),
            other => Err(Error::Config(format!("unknown mode family '{other}' (expected psi or phi)"))),
        }
    }
}

/// Degree, order and family of one surface-current mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub n: usize,
    pub m: i64,
    pub family: Family,
}

impl ModeIndex {
    pub fn new(n: usize, m: i64, family: Family) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("mode degree n must be ≥ 1 (n = 0 carries no tangential current)".into()));
        }
        if m.unsigned_abs() as usize > n {
            return Err(Error::Config(format!("mode order |m| = {} exceeds degree n = {n}", m.abs())));
        }
        Ok(Self { n, m, family })
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.family, self.n, self.m)
    }
}

/// Tangential vector at a point of the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub v_theta: Complex64,
    pub v_phi: Complex64,
}

impl TangentVector {
    pub fn new(v_theta: Complex64, v_phi: Complex64) -> Self {
        Self { v_theta, v_phi }
    }

    /// `conj(self) · other`.
    pub fn inner(&self, other: &TangentVector) -> Complex64 {
        self.v_theta.conj() * other.v_theta + self.v_phi.conj() * other.v_phi
    }

    /// `r̂ × self`.
    pub fn rotate(&self) -> TangentVector {
        TangentVector::new(-self.v_phi, self.v_theta)
    }
}

/// `Ψ_n^m(θ, φ)`; regular at the poles through the derivative identities in `specfun`.
pub fn vsh_psi(mode: &ModeIndex, theta: f64, phi: f64) -> TangentVector {
    let n = mode.n;
    let m = mode.m;
    let scale = ynm_norm(n, m) / ((n * (n + 1)) as f64).sqrt();
    let e = Complex64::from_polar(scale, m as f64 * phi);
    let vt = e * dtheta_assoc_legendre(n, m, theta);
    let vp = e * Complex64::new(0.0, m_over_sin_assoc_legendre(n, m, theta));
    TangentVector::new(vt, vp)
}

/// `Φ_n^m(θ, φ) = r̂ × Ψ_n^m(θ, φ)`.
pub fn vsh_phi(mode: &ModeIndex, theta: f64, phi: f64) -> TangentVector {
    vsh_psi(mode, theta, phi).rotate()
}

/// The harmonic selected by `mode.family`.
pub fn vsh(mode: &ModeIndex, theta: f64, phi: f64) -> TangentVector {
    match mode.family {
        Family::Psi => vsh_psi(mode, theta, phi),
        Family::Phi => vsh_phi(mode, theta, phi),
    }
}

/// Modulated-Gaussian plane wave, `x̂`-polarized and travelling along `ẑ`:
/// `E = x̂ A cos(2πf0 τ) exp(−(τ − tp)²/2σ²)` with `τ = t − z/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentConfig {
    pub f0: f64,
    pub bandwidth: f64,
    pub sigma: f64,
    pub tp: f64,
    pub c: f64,
    pub eta: f64,
    pub amplitude: f64,
}

impl IncidentConfig {
    pub fn new(f0: f64, bandwidth: f64) -> Self {
        let sigma = 3.0 / (2.0 * PI * bandwidth);
        Self { f0, bandwidth, sigma, tp: 40.0 * sigma, c: C0, eta: ETA0, amplitude: 1.0 }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Scalar waveform at retarded time `τ`.
    #[inline]
    pub fn waveform(&self, tau: f64) -> f64 {
        let d = (tau - self.tp) / self.sigma;
        if d.abs() > 40.0 {
            return 0.0;
        }
        self.amplitude * (2.0 * PI * self.f0 * tau).cos() * (-0.5 * d * d).exp()
    }
}

impl Default for IncidentConfig {
    fn default() -> Self {
        Self::new(0.4e9, 0.3e9)
    }
}

/// Incident electric field at point `r` (Cartesian, m) and time `t` (s).
pub fn incident_e(config: &IncidentConfig, r: [f64; 3], t: f64) -> [f64; 3] {
    [config.waveform(t - r[2] / config.c), 0.0, 0.0]
}

/// Incident magnetic field `(1/η) ẑ × E`.
pub fn incident_h(config: &IncidentConfig, r: [f64; 3], t: f64) -> [f64; 3] {
    let e = incident_e(config, r, t);
    [-e[1] / config.eta, e[0] / config.eta, 0.0]
}

/// Tested traces of the incident field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equation {
    /// `<Ψ*, E^i_tan>`, first kind.
    EfiePsi,
    /// `<Φ*, E^i_tan>`, first kind.
    EfiePhi,
    /// `<Ψ*, n̂ × H^i>`, second kind.
    MfiePsi,
    /// `<Φ*, n̂ × H^i>`, second kind.
    MfiePhi,
}

impl Equation {
    pub fn family(self) -> Family {
        match self {
            Equation::EfiePsi | Equation::MfiePsi => Family::Psi,
            Equation::EfiePhi | Equation::MfiePhi => Family::Phi,
        }
    }

    pub fn is_second_kind(self) -> bool {
        matches!(self, Equation::MfiePsi | Equation::MfiePhi)
    }

    /// Reduced kernel of this tested equation.
    pub fn kernel(self) -> KernelKind {
        match self {
            Equation::EfiePsi => KernelKind::K1,
            Equation::EfiePhi => KernelKind::K2,
            Equation::MfiePsi => KernelKind::K3,
            Equation::MfiePhi => KernelKind::K4,
        }
    }

    /// Tested equation whose reduced kernel is `kind`.
    pub fn from_kernel(kind: KernelKind) -> Result<Self> {
        match kind {
            KernelKind::K1 => Ok(Equation::EfiePsi),
            KernelKind::K2 => Ok(Equation::EfiePhi),
            KernelKind::K3 => Ok(Equation::MfiePsi),
            KernelKind::K4 => Ok(Equation::MfiePhi),
            KernelKind::K0 => Err(Error::Config("K0 is not the kernel of a tested equation".into())),
        }
    }

    /// Checks that `mode` belongs to the family this equation tests.
    pub fn check_mode(self, mode: &ModeIndex) -> Result<()> {
        if mode.family != self.family() {
            return Err(Error::Config(format!(
                "kernel {} acts on {} modes, got {mode}",
                self.kernel(),
                self.family()
            )));
        }
        Ok(())
    }
}

/// Surface quadrature: Gauss-Legendre in `cos θ` times a uniform rule in `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceRule {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl SurfaceRule {
    /// Smallest resolution accepted for degree `n`.
    pub fn minimum(n: usize) -> Self {
        Self { n_theta: n + 2, n_phi: 2 * (n + 1) + 1 }
    }

    /// Resolution that also resolves the retardation `e^{−jka cos θ}` up to
    /// `f_max` with margin.
    pub fn for_band(n: usize, radius: f64, f_max: f64, c: f64) -> Self {
        let ka = 2.0 * PI * f_max * radius / c;
        Self { n_theta: n + 22 + ka.ceil() as usize, n_phi: 2 * (n + 1) + 1 }
    }

    fn check(&self, n: usize) -> Result<()> {
        let min = Self::minimum(n);
        if self.n_theta < min.n_theta || self.n_phi < min.n_phi {
            return Err(Error::Config(format!(
                "surface rule {}×{} too coarse for degree {n}; need at least {}×{}",
                self.n_theta, self.n_phi, min.n_theta, min.n_phi
            )));
        }
        Ok(())
    }
}

fn tangential(v: [f64; 3], theta: f64, phi: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let vt = v[0] * ct * cp + v[1] * ct * sp - v[2] * st;
    let vp = -v[0] * sp + v[1] * cp;
    (vt, vp)
}

/// `f_nm^ν(t)`: surface integral over the sphere of radius `a` of the tested
/// incident trace (measure `a² dΩ`), evaluated point by point from
/// [`incident_e`] / [`incident_h`].
pub fn project_incident(
    config: &IncidentConfig,
    mode: &ModeIndex,
    equation: Equation,
    radius: f64,
    t: f64,
    rule: &SurfaceRule,
) -> Result<Complex64> {
    rule.check(mode.n)?;
    let test = ModeIndex { family: equation.family(), ..*mode };
    let gl = gauss_legendre(rule.n_theta);
    let dphi = 2.0 * PI / rule.n_phi as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
        let theta = x.acos();
        let st = theta.sin();
        for k in 0..rule.n_phi {
            let phi = dphi * k as f64;
            let r = [radius * st * phi.cos(), radius * st * phi.sin(), radius * x];
            let trace = if equation.is_second_kind() {
                let (ht, hp) = tangential(incident_h(config, r, t), theta, phi);
                TangentVector::new((-hp).into(), ht.into())
            } else {
                let (et, ep) = tangential(incident_e(config, r, t), theta, phi);
                TangentVector::new(et.into(), ep.into())
            };
            acc += vsh(&test, theta, phi).inner(&trace) * (w * dphi);
        }
    }
    Ok(acc * (radius * radius))
}

/// Separable form of [`project_incident`] for the plane wave: the field is
/// `d̂(θ,φ) g(t − a cos θ / c)`, so the `φ` integral is done once and
/// `f(t) = Σ_i w_i g(t − a x_i / c)`.
#[derive(Debug, Clone)]
pub struct AngularProjector {
    config: IncidentConfig,
    radius: f64,
    cos_nodes: Vec<f64>,
    weights: Vec<Complex64>,
    moments: Vec<Complex64>,
}

impl AngularProjector {
    pub fn new(
        config: &IncidentConfig,
        mode: &ModeIndex,
        equation: Equation,
        radius: f64,
        rule: &SurfaceRule,
    ) -> Result<Self> {
        rule.check(mode.n)?;
        let test = ModeIndex { family: equation.family(), ..*mode };
        let gl = gauss_legendre(rule.n_theta);
        let dphi = 2.0 * PI / rule.n_phi as f64;
        let mut weights = Vec::with_capacity(gl.len());
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let theta = x.acos();
            let mut a = Complex64::new(0.0, 0.0);
            for k in 0..rule.n_phi {
                let phi = dphi * k as f64;
                let (sp, cp) = phi.sin_cos();
                // unit-amplitude direction of E (x̂) or of n̂ × H (r̂ × ŷ/η)
                let dir = if equation.is_second_kind() {
                    TangentVector::new((-cp / config.eta).into(), (x * sp / config.eta).into())
                } else {
                    TangentVector::new((x * cp).into(), (-sp).into())
                };
                a += vsh(&test, theta, phi).inner(&dir) * dphi;
            }
            weights.push(a * (w * radius * radius));
        }
        // Legendre moments a_l = Σ_i w_i P_l(x_i). The φ-integrated weight is a
        // polynomial of degree ≤ n+1 in cos θ, so these are exact for l ≤ n+1
        // and only l ∈ {n−1, n, n+1} survive; the rest are rounding noise.
        let lmax = mode.n + 1;
        let mut pl = vec![0.0; lmax + 1];
        let mut moments = vec![Complex64::new(0.0, 0.0); lmax + 1];
        for (x, w) in gl.nodes.iter().zip(&weights) {
            crate::specfun::legendre_all(*x, &mut pl);
            for (m, p) in moments.iter_mut().zip(&pl) {
                *m += w * p;
            }
        }
        let biggest = moments.iter().map(|m| m.norm()).fold(0.0, f64::max);
        for m in &mut moments {
            if m.norm() <= 1e-12 * biggest {
                *m = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { config: *config, radius, cos_nodes: gl.nodes, weights, moments })
    }

    pub fn config(&self) -> &IncidentConfig {
        &self.config
    }

    /// `f(t)`.
    pub fn eval(&self, t: f64) -> Complex64 {
        let delay = self.radius / self.config.c;
        self.cos_nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * self.config.waveform(t - delay * x))
            .sum()
    }

    /// `S(ω) = Σ_i w_i e^{−jω a x_i / c}`, so that `f̂(ω) = ĝ(ω) S(ω)`.
    ///
    /// Evaluated through `e^{−jκx} = Σ_l (−j)^l (2l+1) j_l(κ) P_l(x)` on the
    /// Legendre moments, which keeps full relative accuracy when `S` is tiny
    /// (high degree, low frequency).
    pub fn spatial_factor(&self, omega: f64) -> Complex64 {
        let kappa = omega * self.radius / self.config.c;
        if kappa <= 0.0 {
            return self.moments[0];
        }
        let jl = match crate::specfun::sph_j_all(self.moments.len() - 1, kappa) {
            Ok(v) => v,
            Err(_) => return self.spatial_factor_direct(omega),
        };
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, (m, j)) in self.moments.iter().zip(&jl).enumerate() {
            acc += m * phase * ((2 * l + 1) as f64 * j);
            phase *= Complex64::new(0.0, -1.0);
        }
        acc
    }

    /// Direct node sum for `S(ω)`.
    pub fn spatial_factor_direct(&self, omega: f64) -> Complex64 {
        let delay = self.radius / self.config.c;
        self.cos_nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * Complex64::from_polar(1.0, -omega * delay * x))
            .sum()
    }

    /// Pulse-arrival bound: `f(t)` is negligible for `t` below this time.
    pub fn onset(&self) -> f64 {
        self.config.tp - 6.0 * self.config.sigma - self.radius / self.config.c
    }
}
