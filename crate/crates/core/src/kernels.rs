//! Reduced Volterra kernels `K_n^(0..4)` on the sphere surface `r = r' = a`.
//!
//! Every kernel is stored as a smooth part on the open support `(0, β)`,
//! `β = 2a/c`, a list of impulses at the support edges and a constant tail
//! for `t > β` (nonzero only for `K1`). The source-side surface measure `a²`
//! is folded into `K1..K4`, so that testing with `a² dΩ` gives the system
//! `a²·K ⊗ J = f` (first kind) or `a²·(J + K ⊗ J) = f` (second kind).
//!
//! Writing `u = 1 − c²t²/(2a²)` and `K0 = c/(2a²)·P_n(u)`:
//!
//! ```text
//! K1 = −μc² ∫_0^t c/(2a²)·[P''(u)(1−u)² + P'(u)(u−2)] dt'   impulses μc/2, (−1)^n μc/2
//! K2 = μa² ∂_t K0                                            impulses μc/2, −(−1)^n μc/2
//! K3 = −(c/2a)·P'(u)(1−u)                                    impulses −1/2, −(−1)^n/2
//! K4 = +(c/2a)·P'(u)(1−u)                                    impulses −1/2, +(−1)^n/2
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::specfun::{gauss_legendre, legendre_triple, riccati_factor, sph_bessel, QuadratureRule, RadialKind};
use crate::{Error, Result, C0, MU0};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    K0,
    K1,
    K2,
    K3,
    K4,
}

impl KernelKind {
    pub const SOLVER_KINDS: [KernelKind; 4] = [KernelKind::K1, KernelKind::K2, KernelKind::K3, KernelKind::K4];

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(KernelKind::K0),
            1 => Ok(KernelKind::K1),
            2 => Ok(KernelKind::K2),
            3 => Ok(KernelKind::K3),
            4 => Ok(KernelKind::K4),
            _ => Err(Error::Config(format!("kernel index {i} out of range 0..=4"))),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// `K3`, `K4` belong to the magnetic-field equation, which carries the identity term.
    pub fn is_second_kind(self) -> bool {
        matches!(self, KernelKind::K3 | KernelKind::K4)
    }

    /// Only `K1` has a nonzero tail beyond the pulse support.
    pub fn has_tail(self) -> bool {
        self == KernelKind::K1
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K{}", self.index())
    }
}

/// Retardation symbols of the two-radius kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSymbols {
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub pulse: f64,
}

impl KernelSymbols {
    pub fn new(r: f64, rp: f64, t: f64, c: f64) -> Self {
        let alpha = (r - rp).abs() / c;
        let beta = (r + rp) / c;
        let pulse = if (alpha..=beta).contains(&t) { 1.0 } else { 0.0 };
        Self { xi: r * r + rp * rp - c * c * t * t, alpha, beta, pulse }
    }
}

/// `c/(2rr')·P_n(ξ/(2rr'))` on `[α, β]`, zero elsewhere.
pub fn kernel_k0(n: usize, r: f64, rp: f64, t: f64, c: f64) -> f64 {
    let s = KernelSymbols::new(r, rp, t, c);
    if s.pulse == 0.0 {
        return 0.0;
    }
    let x = (s.xi / (2.0 * r * rp)).clamp(-1.0, 1.0);
    c / (2.0 * r * rp) * legendre_triple(n, x).0
}

#[derive(Clone)]
enum Smooth {
    Zero,
    Analytic { rule: Option<Arc<QuadratureRule>> },
    Custom { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, degree: Option<usize> },
}

impl fmt::Debug for Smooth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smooth::Zero => f.write_str("Zero"),
            Smooth::Analytic { .. } => f.write_str("Analytic"),
            Smooth::Custom { degree, .. } => write!(f, "Custom(degree={degree:?})"),
        }
    }
}

/// Impulse `weight·δ(t − time)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    pub time: f64,
    pub weight: f64,
}

/// A reduced kernel: smooth part on `(0, support)`, edge impulses, constant tail.
#[derive(Debug, Clone)]
pub struct PiecewiseKernel {
    pub n: usize,
    pub kind: KernelKind,
    pub a: f64,
    pub c: f64,
    pub mu: f64,
    pub support: f64,
    pub deltas: Vec<Impulse>,
    pub tail: f64,
    smooth: Smooth,
}

/// Kernel `kind` of degree `n` on a sphere of radius `a`.
pub fn build_kernel(kind: KernelKind, n: usize, a: f64, c: f64, mu: f64) -> Result<PiecewiseKernel> {
    if n == 0 && kind != KernelKind::K0 {
        return Err(Error::Config(format!("kernel {kind} needs degree n ≥ 1")));
    }
    if !(a > 0.0 && c > 0.0 && mu > 0.0) {
        return Err(Error::Config(format!("radius, c and μ must be positive (a={a}, c={c}, μ={mu})")));
    }
    let beta = 2.0 * a / c;
    let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
    let imp = |time, weight| Impulse { time, weight };
    let (deltas, rule) = match kind {
        KernelKind::K0 => (vec![], None),
        KernelKind::K1 => (
            vec![imp(0.0, mu * c / 2.0), imp(beta, parity * mu * c / 2.0)],
            Some(Arc::new(gauss_legendre(n + 3))),
        ),
        KernelKind::K2 => (vec![imp(0.0, mu * c / 2.0), imp(beta, -parity * mu * c / 2.0)], None),
        KernelKind::K3 => (vec![imp(0.0, -0.5), imp(beta, -parity * 0.5)], None),
        KernelKind::K4 => (vec![imp(0.0, -0.5), imp(beta, parity * 0.5)], None),
    };
    let mut kernel = PiecewiseKernel {
        n,
        kind,
        a,
        c,
        mu,
        support: beta,
        deltas,
        tail: 0.0,
        smooth: Smooth::Analytic { rule },
    };
    if kind == KernelKind::K1 {
        // P_n'(−1) = (−1)^{n+1} n(n+1)/2
        let dp_m1 = -parity * (n * (n + 1)) as f64 / 2.0;
        kernel.tail = -mu * c * c * (kernel.k1_running_integral(beta) + dp_m1 / a);
    }
    Ok(kernel)
}

/// [`build_kernel`] with vacuum constants.
pub fn build_vacuum_kernel(kind: KernelKind, n: usize, a: f64) -> Result<PiecewiseKernel> {
    build_kernel(kind, n, a, C0, MU0)
}

impl PiecewiseKernel {
    /// Kernel from explicit parts; `degree` is the polynomial degree of the
    /// smooth part in `t` when known (selects exact quadrature downstream).
    pub fn from_parts<F>(
        kind: KernelKind,
        support: f64,
        smooth: F,
        degree: Option<usize>,
        deltas: Vec<Impulse>,
        tail: f64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support > 0.0) {
            return Err(Error::Config(format!("kernel support must be positive, got {support}")));
        }
        if let Some(d) = deltas.iter().find(|d| !(0.0..=support).contains(&d.time)) {
            return Err(Error::Config(format!("impulse at t={} outside [0, {support}]", d.time)));
        }
        Ok(Self {
            n: 0,
            kind,
            a: support * C0 / 2.0,
            c: C0,
            mu: MU0,
            support,
            deltas,
            tail,
            smooth: Smooth::Custom { f: Arc::new(smooth), degree },
        })
    }

    /// Kernel with only impulses and a tail.
    pub fn impulses_only(kind: KernelKind, support: f64, deltas: Vec<Impulse>, tail: f64) -> Result<Self> {
        let mut k = Self::from_parts(kind, support, |_| 0.0, Some(0), deltas, tail)?;
        k.smooth = Smooth::Zero;
        Ok(k)
    }

    /// Times at which the kernel is not smooth.
    pub fn breakpoints(&self) -> [f64; 2] {
        [0.0, self.support]
    }

    /// Polynomial degree of the smooth part in `t`, when known.
    pub fn smooth_degree(&self) -> Option<usize> {
        match &self.smooth {
            Smooth::Zero => Some(0),
            Smooth::Custom { degree, .. } => *degree,
            Smooth::Analytic { .. } => Some(match self.kind {
                KernelKind::K1 => 2 * self.n + 1,
                _ => 2 * self.n,
            }),
        }
    }

    fn k1_integrand(&self, t: f64) -> f64 {
        let (a, c) = (self.a, self.c);
        let u = 1.0 - c * c * t * t / (2.0 * a * a);
        let (_, d, e) = legendre_triple(self.n, u.clamp(-1.0, 1.0));
        c / (2.0 * a * a) * (e * (1.0 - u) * (1.0 - u) + d * (u - 2.0))
    }

    /// `∫_0^t` of the pre-integration smooth part of `K1` (exact: polynomial integrand).
    fn k1_running_integral(&self, t: f64) -> f64 {
        let rule = match &self.smooth {
            Smooth::Analytic { rule: Some(r) } => r,
            _ => return 0.0,
        };
        rule.integrate(0.0, t, |s| self.k1_integrand(s))
    }

    /// Smooth part at `t`; zero outside the open support.
    pub fn smooth(&self, t: f64) -> f64 {
        if !(t > 0.0 && t < self.support) {
            return 0.0;
        }
        self.smooth_on_support(t)
    }

    /// Smooth part continued onto the closed support `[0, β]` (one-sided limits at the edges).
    pub fn smooth_on_support(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.support);
        match &self.smooth {
            Smooth::Zero => 0.0,
            Smooth::Custom { f, .. } => f(t),
            Smooth::Analytic { .. } => {
                let (a, c, mu, n) = (self.a, self.c, self.mu, self.n);
                let u = (1.0 - c * c * t * t / (2.0 * a * a)).clamp(-1.0, 1.0);
                match self.kind {
                    KernelKind::K0 => c / (2.0 * a * a) * legendre_triple(n, u).0,
                    KernelKind::K1 => -mu * c * c * self.k1_running_integral(t),
                    KernelKind::K2 => mu * c / 2.0 * legendre_triple(n, u).1 * (-c * c * t / (a * a)),
                    KernelKind::K3 => -c / (2.0 * a) * legendre_triple(n, u).1 * (1.0 - u),
                    KernelKind::K4 => c / (2.0 * a) * legendre_triple(n, u).1 * (1.0 - u),
                }
            }
        }
    }

    /// Smooth part plus tail (the regular part of the kernel) at `t`.
    pub fn regular(&self, t: f64) -> f64 {
        if t > self.support {
            self.tail
        } else {
            self.smooth(t)
        }
    }

    /// Fourier transform `∫ K(t) e^{−jωt} dt` evaluated numerically.
    pub fn fd_numeric(&self, omega: f64) -> Complex64 {
        kernel_fd_numeric(self, omega)
    }

    /// Analytic transform for this kernel's kind, degree and constants.
    pub fn fd_oracle(&self, omega: f64) -> Result<Complex64> {
        kernel_fd_oracle_with(self.kind, self.n, self.a, omega, self.c, self.mu)
    }

    /// Debug dump: `# delta` and `# tail` header lines, then `t,smooth_value` rows.
    pub fn write_csv<W: Write>(&self, mut out: W, samples: usize) -> io::Result<()> {
        for d in &self.deltas {
            writeln!(out, "# delta t={:.17e} w={:.17e}", d.time, d.weight)?;
        }
        writeln!(out, "# tail={:.17e}", self.tail)?;
        writeln!(out, "t,smooth_value")?;
        let count = samples.max(2);
        for i in 0..count {
            let t = self.support * (i as f64 + 0.5) / count as f64;
            writeln!(out, "{:.17e},{:.17e}", t, self.smooth(t))?;
        }
        Ok(())
    }
}

/// Analytic frequency-domain kernel with vacuum constants.
pub fn kernel_fd_oracle(kind: KernelKind, n: usize, a: f64, omega: f64) -> Result<Complex64> {
    kernel_fd_oracle_with(kind, n, a, omega, C0, MU0)
}

/// Analytic frequency-domain kernel. With `x = ka`, `R_z = z/x + z'`:
/// `K0: −jk h j`, `K1: ωμk a² R_h R_j`, `K2: ωμk a² h j`,
/// `K3: j k² a² h R_j`, `K4: −j k² a² R_h j`.
pub fn kernel_fd_oracle_with(kind: KernelKind, n: usize, a: f64, omega: f64, c: f64, mu: f64) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("oracle frequency must be positive, got ω={omega}")));
    }
    let k = omega / c;
    let x = k * a;
    let j = Complex64::new(0.0, 1.0);
    let h = || sph_bessel(RadialKind::Hankel2, n, x);
    let bj = || sph_bessel(RadialKind::BesselJ, n, x);
    let rh = || riccati_factor(RadialKind::Hankel2, n, x);
    let rj = || riccati_factor(RadialKind::BesselJ, n, x);
    Ok(match kind {
        KernelKind::K0 => -j * k * h()? * bj()?,
        KernelKind::K1 => omega * mu * k * a * a * rh()? * rj()?,
        KernelKind::K2 => omega * mu * k * a * a * h()? * bj()?,
        KernelKind::K3 => j * k * k * a * a * h()? * rj()?,
        KernelKind::K4 => -j * k * k * a * a * rh()? * bj()?,
    })
}

/// Numerical Fourier transform of a piecewise kernel: Gauss panels on the
/// smooth part, exact impulse phases and `tail·e^{−jωβ}/(jω)` for the tail.
pub fn kernel_fd_numeric(kernel: &PiecewiseKernel, omega: f64) -> Complex64 {
    let beta = kernel.support;
    let degree = kernel.smooth_degree().unwrap_or(40);
    let phase_span = (omega * beta).abs();
    let panels = (phase_span / 3.0).ceil().max(1.0) as usize + 1;
    let rule = gauss_legendre(degree / 2 + 24);
    let mut acc = Complex64::new(0.0, 0.0);
    if !matches!(kernel.smooth, Smooth::Zero) {
        for p in 0..panels {
            let lo = beta * p as f64 / panels as f64;
            let hi = beta * (p + 1) as f64 / panels as f64;
            for (t, w) in rule.mapped(lo, hi) {
                acc += Complex64::from_polar(w * kernel.smooth(t), -omega * t);
            }
        }
    }
    for d in &kernel.deltas {
        acc += Complex64::from_polar(d.weight, -omega * d.time);
    }
    if kernel.tail != 0.0 {
        acc += Complex64::from_polar(kernel.tail, -omega * beta) / Complex64::new(0.0, omega);
    }
    acc
}

/// Band sample frequencies `f_lo..=f_hi` (Hz), `count` equispaced points.
pub fn band_frequencies(f_lo: f64, f_hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![f_lo],
        _ => (0..count).map(|i| f_lo + (f_hi - f_lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Worst relative mismatch between [`kernel_fd_numeric`] and the oracle over a band.
pub fn oracle_mismatch(kernel: &PiecewiseKernel, freqs_hz: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &f in freqs_hz {
        let w = 2.0 * PI * f;
        let exact = kernel.fd_oracle(w)?;
        worst = worst.max((kernel.fd_numeric(w) - exact).norm() / exact.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const A: f64 = 1.0;

    fn band() -> Vec<f64> {
        band_frequencies(0.1e9, 0.7e9, 21)
    }

    #[test]
    fn k0_values() {
        let c = C0;
        for n in 0..6 {
            assert_relative_eq!(kernel_k0(n, A, A, 1e-15, c), c / 2.0, max_relative = 1e-12);
            let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(kernel_k0(n, A, A, 2.0 * A / c, c), parity * c / 2.0, max_relative = 1e-12);
        }
        assert!(kernel_k0(1, A, A, 2f64.sqrt() / c, c).abs() < 1e-7);
        assert_eq!(kernel_k0(3, A, A, 2.0 * A / c * 1.0001, c), 0.0);
        assert_eq!(kernel_k0(3, 1.0, 0.5, 0.4 / c, c), 0.0);
    }

    #[test]
    fn symbols() {
        let s = KernelSymbols::new(1.0, 0.8, 1.0, 1.0);
        assert_relative_eq!(s.alpha, 0.2, epsilon = 1e-15);
        assert_relative_eq!(s.beta, 1.8, epsilon = 1e-15);
        assert_relative_eq!(s.xi, 0.64, epsilon = 1e-15);
        assert_eq!(s.pulse, 1.0);
        assert_eq!(KernelSymbols::new(1.0, 0.8, 0.1, 1.0).pulse, 0.0);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(KernelKind::from_index(3).unwrap(), KernelKind::K3);
        assert!(KernelKind::from_index(5).is_err());
        assert_eq!(KernelKind::K4.to_string(), "K4");
        assert!(build_vacuum_kernel(KernelKind::K2, 0, A).is_err());
        assert!(build_vacuum_kernel(KernelKind::K0, 0, A).is_ok());
    }

    #[test]
    fn k2_smooth_closed_form() {
        let k = build_vacuum_kernel(KernelKind::K2, 3, A).unwrap();
        let c = C0;
        let t = 0.37 * k.support;
        let u = 1.0 - c * c * t * t / (2.0 * A * A);
        let (_, dp, _) = legendre_triple(3, u);
        let expected = MU0 * A * A * c / (2.0 * A * A) * dp * (-c * c * t / (A * A));
        assert_relative_eq!(k.smooth(t), expected, max_relative = 1e-14);
    }

    #[test]
    fn k2_is_time_derivative_of_k0() {
        for n in [1, 4, 17] {
            let k0 = build_vacuum_kernel(KernelKind::K0, n, A).unwrap();
            let k2 = build_vacuum_kernel(KernelKind::K2, n, A).unwrap();
            let scale = MU0 * A * A;
            let h = k0.support * 1e-6;
            let peak = (1..200).map(|i| k2.smooth(k0.support * i as f64 / 200.0).abs()).fold(0.0, f64::max);
            for i in 1..40 {
                let t = k0.support * i as f64 / 40.0;
                let fd = scale * (k0.smooth(t + h) - k0.smooth(t - h)) / (2.0 * h);
                assert!((fd - k2.smooth(t)).abs() <= 1e-7 * peak, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn k1_tail_is_limit_of_pre_integration_parts() {
        // tail = −μc²·(∫_0^β T1 + P'(−1)/a): the P'(−1)/a term is the far-edge
        // impulse content of the pre-integration kernel.
        for n in [1, 2, 3, 8] {
            let k = build_vacuum_kernel(KernelKind::K1, n, A).unwrap();
            let fine = gauss_legendre(60);
            let integral = fine.integrate(0.0, k.support, |t| k.k1_integrand(t));
            let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
            let dp_m1 = -parity * (n * (n + 1)) as f64 / 2.0;
            let expected = -MU0 * C0 * C0 * (integral + dp_m1 / A);
            assert_relative_eq!(k.tail, expected, max_relative = 1e-12);
            // smooth part is continuous into the closed-form running integral
            assert_relative_eq!(
                k.smooth(k.support * (1.0 - 1e-12)),
                -MU0 * C0 * C0 * integral,
                max_relative = 1e-8,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn fourier_transform_of_k0_matches_hankel_product() {
        let k = build_vacuum_kernel(KernelKind::K0, 3, A).unwrap();
        let w = 2.0 * PI * 0.4e9;
        let exact = kernel_fd_oracle(KernelKind::K0, 3, A, w).unwrap();
        assert!((k.fd_numeric(w) - exact).norm() <= 1e-10 * exact.norm());
    }

    #[test]
    fn n0_rectangular_pulse_transform() {
        let k = build_vacuum_kernel(KernelKind::K0, 0, A).unwrap();
        let beta = k.support;
        for f in [0.05e9, 0.3e9, 1.1e9] {
            let w = 2.0 * PI * f;
            // ∫_0^β (c/2) e^{−jωt} dt = (c/2)(1 − e^{−jωβ})/(jω)
            let direct = Complex64::new(C0 / 2.0, 0.0) * (1.0 - Complex64::from_polar(1.0, -w * beta)) / Complex64::new(0.0, w);
            assert!((k.fd_numeric(w) - direct).norm() <= 1e-12 * direct.norm());
        }
    }

    #[test]
    fn delta_only_transform_is_constant() {
        let k = PiecewiseKernel::impulses_only(KernelKind::K0, 1e-9, vec![Impulse { time: 0.0, weight: 2.5 }], 0.0).unwrap();
        for w in [1e6, 1e9, 7e9] {
            assert_relative_eq!(k.fd_numeric(w).re, 2.5, max_relative = 1e-15);
            assert_eq!(k.fd_numeric(w).im, 0.0);
        }
    }

    #[test]
    fn oracle_identity_all_kernels() {
        for n in [1, 3, 30] {
            for kind in KernelKind::SOLVER_KINDS {
                let k = build_vacuum_kernel(kind, n, A).unwrap();
                let err = oracle_mismatch(&k, &band()).unwrap();
                assert!(err <= 1e-6, "{kind} n={n}: {err:e}");
            }
        }
    }

    #[test]
    fn oracle_identity_other_radius() {
        for kind in KernelKind::SOLVER_KINDS {
            let k = build_vacuum_kernel(kind, 4, 0.6).unwrap();
            let err = oracle_mismatch(&k, &band()).unwrap();
            assert!(err <= 1e-8, "{kind}: {err:e}");
        }
    }

    #[test]
    fn k3_k4_oracles_swap_riccati_factor() {
        let (n, w) = (5, 2.0 * PI * 0.5e9);
        let x = w / C0 * A;
        let h = sph_bessel(RadialKind::Hankel2, n, x).unwrap();
        let j = sph_bessel(RadialKind::BesselJ, n, x).unwrap();
        let rh = riccati_factor(RadialKind::Hankel2, n, x).unwrap();
        let rj = riccati_factor(RadialKind::BesselJ, n, x).unwrap();
        let k3 = kernel_fd_oracle(KernelKind::K3, n, A, w).unwrap();
        let k4 = kernel_fd_oracle(KernelKind::K4, n, A, w).unwrap();
        assert!((k3 / (h * rj) + k4 / (rh * j)).norm() < 1e-12 * (k3 / (h * rj)).norm());
    }

    #[test]
    fn low_frequency_oracle_follows_static_limit() {
        // h_1(x) j_1(x) → j/(3x) as x → 0, so F[K0] → 1/(3a) = ∫K0 dt, and the
        // first-kind K2 transform vanishes linearly in ω.
        for a in [0.5, 1.0, 2.0] {
            let w = 2.0 * PI * 1e4;
            let k0 = kernel_fd_oracle(KernelKind::K0, 1, a, w).unwrap();
            assert_relative_eq!(k0.re, 1.0 / (3.0 * a), max_relative = 1e-6);
            assert!(k0.im.abs() < 1e-6 * k0.re);
            let k2a = kernel_fd_oracle(KernelKind::K2, 1, a, w).unwrap();
            let k2b = kernel_fd_oracle(KernelKind::K2, 1, a, 2.0 * w).unwrap();
            assert_relative_eq!(k2b.norm() / k2a.norm(), 2.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn addition_theorem_consistency() {
        // Gaussian-smoothed partial sum (N = 80) against the smoothed retarded
        // potential, in units with c = 1.
        let (r, rp, gamma, c) = (1.0, 0.8, 0.6f64, 1.0);
        let cg = gamma.cos();
        let big_r = (r * r + rp * rp - 2.0 * r * rp * cg).sqrt();
        let s = 0.08;
        let gauss = |x: f64| (-(x * x) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt());
        let nmax = 80;
        let (alpha, beta) = ((r - rp) / c, (r + rp) / c);
        let rule = gauss_legendre(40);
        let panels = 400;
        let mut pn_cg = vec![0.0; nmax + 1];
        crate::specfun::legendre_all(cg, &mut pn_cg);
        let series = |tp: f64| {
            let x = ((r * r + rp * rp - c * c * tp * tp) / (2.0 * r * rp)).clamp(-1.0, 1.0);
            let mut pn = vec![0.0; nmax + 1];
            crate::specfun::legendre_all(x, &mut pn);
            (0..=nmax).map(|n| (2 * n + 1) as f64 * pn[n] * pn_cg[n]).sum::<f64>() * c / (8.0 * PI * r * rp)
        };
        let samples: Vec<(f64, f64, f64)> = (0..panels)
            .flat_map(|p| {
                let lo = alpha + (beta - alpha) * p as f64 / panels as f64;
                let hi = alpha + (beta - alpha) * (p + 1) as f64 / panels as f64;
                rule.mapped(lo, hi).map(|(t, w)| (t, w, series(t))).collect::<Vec<_>>()
            })
            .collect();
        let direct = |t: f64| gauss(t - big_r / c) / (4.0 * PI * big_r);
        let peak = direct(big_r / c);
        for dt in [-0.15, -0.05, 0.0, 0.04, 0.12] {
            let t = big_r / c + dt;
            let smoothed: f64 = samples.iter().map(|(tp, w, v)| w * v * gauss(t - tp)).sum();
            assert!((smoothed - direct(t)).abs() <= 1e-3 * peak, "t={t}: {smoothed} vs {}", direct(t));
        }
    }

    #[test]
    fn csv_dump_format() {
        let k = build_vacuum_kernel(KernelKind::K1, 2, A).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf, 4).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# delta t=0"));
        assert!(lines[1].starts_with("# delta t="));
        assert!(lines[2].starts_with("# tail="));
        assert_eq!(lines[3], "t,smooth_value");
        assert_eq!(lines.len(), 8);
    }

    #[test]
    fn custom_kernel_validation() {
        assert!(PiecewiseKernel::from_parts(KernelKind::K0, 0.0, |_| 1.0, Some(0), vec![], 0.0).is_err());
        assert!(PiecewiseKernel::impulses_only(KernelKind::K0, 1.0, vec![Impulse { time: 2.0, weight: 1.0 }], 0.0).is_err());
    }
}
