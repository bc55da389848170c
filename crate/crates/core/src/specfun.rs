//! Real special functions: Legendre and associated Legendre polynomials,
//! spherical Bessel/Hankel functions, Gauss-Legendre rules and scalar
//! spherical harmonics.
//!
//! Conventions: associated Legendre functions carry the Condon-Shortley phase,
//! `Y_n^m` is orthonormal on the unit sphere, and the outgoing radial function
//! is `h_n^(2) = j_n − j·y_n` (time dependence `e^{jωt}`).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;

fn check_unit_interval(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!("|x| = {x} exceeds 1")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// `(P_n(x), P_n'(x), P_n''(x))` by forward recurrence. Caller guarantees `|x| ≤ 1`.
#[inline]
pub(crate) fn legendre_triple(n: usize, x: f64) -> (f64, f64, f64) {
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut e0, mut e1) = (0.0, 0.0);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        let e2 = e0 + (2.0 * kf + 1.0) * d1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
        e0 = e1;
        e1 = e2;
    }
    (p1, d1, e1)
}

/// Fills `out[j] = P_j(x)` for `j = 0..out.len()`.
#[inline]
pub(crate) fn legendre_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Legendre polynomial `P_n(x)` with its first and second derivatives.
pub fn legendre(n: usize, x: f64) -> Result<(f64, f64, f64)> {
    let x = check_unit_interval(x)?;
    Ok(legendre_triple(n, x))
}

/// `(n−m)!/(n+m)!` for signed `m` with `|m| ≤ n`.
pub(crate) fn factorial_ratio(n: usize, m: i64) -> f64 {
    let n = n as i64;
    if m >= 0 {
        let mut r = 1.0;
        for k in (n - m + 1)..=(n + m) {
            r /= k as f64;
        }
        r
    } else {
        let mut r = 1.0;
        for k in (n + m + 1)..=(n - m) {
            r *= k as f64;
        }
        r
    }
}

fn assoc_legendre_nonneg(n: usize, m: usize, x: f64) -> f64 {
    if m > n {
        return 0.0;
    }
    let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    // P_m^m = (−1)^m (2m−1)!! s^m
    let mut pmm = 1.0;
    for k in 0..m {
        pmm *= -((2 * k + 1) as f64) * s;
    }
    if n == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if n == m + 1 {
        return pm1;
    }
    let mut pm0 = pmm;
    for l in (m + 2)..=n {
        let pl = ((2 * l - 1) as f64 * x * pm1 - (l + m - 1) as f64 * pm0) / (l - m) as f64;
        pm0 = pm1;
        pm1 = pl;
    }
    pm1
}

/// Unnormalized `P_n^m(x)` with the Condon-Shortley phase, signed `m`.
/// Returns 0 for `|m| > n`, which the derivative identities rely on.
pub(crate) fn assoc_legendre_signed(n: usize, m: i64, x: f64) -> f64 {
    if m.unsigned_abs() as usize > n {
        return 0.0;
    }
    if m >= 0 {
        assoc_legendre_nonneg(n, m as usize, x)
    } else {
        let mp = (-m) as usize;
        let sign = if mp % 2 == 0 { 1.0 } else { -1.0 };
        sign * factorial_ratio(n, m.abs()) * assoc_legendre_nonneg(n, mp, x)
    }
}

/// Associated Legendre function `P_n^m(x)`, `|m| ≤ n`, Condon-Shortley phase.
pub fn assoc_legendre(n: usize, m: i64, x: f64) -> Result<f64> {
    let x = check_unit_interval(x)?;
    if m.unsigned_abs() as usize > n {
        return Err(Error::Domain(format!("order m={m} exceeds degree n={n}")));
    }
    Ok(assoc_legendre_signed(n, m, x))
}

/// Radial function family of the spherical wave expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialKind {
    /// Regular solution `z^(1) = j_n`.
    BesselJ,
    /// Outgoing solution `z^(4) = h_n^(2) = j_n − j y_n`.
    Hankel2,
}

fn check_positive(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("spherical Bessel argument must be > 0, got {x}")));
    }
    Ok(())
}

/// `j_0(x) .. j_{nmax}(x)` by Miller's downward recurrence.
pub fn sph_j_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_positive(x)?;
    let top = (nmax as f64).max(x.ceil());
    let start = (top + 30.0 + 2.0 * (40.0 * top).sqrt()) as usize;
    let mut out = vec![0.0; nmax + 1];
    let mut f_next = 0.0;
    let mut f = 1e-300;
    for k in (1..=start).rev() {
        let f_prev = (2 * k + 1) as f64 / x * f - f_next;
        f_next = f;
        f = f_prev;
        if k - 1 <= nmax {
            out[k - 1] = f;
        }
        if k <= nmax {
            out[k] = f_next;
        }
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // f ≡ j_0 and f_next ≡ j_1 up to a common scale.
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if j0.abs() >= j1.abs() { j0 / f } else { j1 / f_next };
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// `y_0(x) .. y_{nmax}(x)` by upward recurrence.
pub fn sph_y_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_positive(x)?;
    let mut out = vec![0.0; nmax + 1];
    out[0] = -x.cos() / x;
    if nmax >= 1 {
        out[1] = -x.cos() / (x * x) - x.sin() / x;
    }
    for k in 1..nmax {
        out[k + 1] = (2 * k + 1) as f64 / x * out[k] - out[k - 1];
    }
    Ok(out)
}

/// `z_n(x)` for the requested family.
pub fn sph_bessel(kind: RadialKind, n: usize, x: f64) -> Result<Complex64> {
    let j = sph_j_all(n, x)?[n];
    Ok(match kind {
        RadialKind::BesselJ => Complex64::new(j, 0.0),
        RadialKind::Hankel2 => Complex64::new(j, -sph_y_all(n, x)?[n]),
    })
}

/// `(z_n(x), z_n'(x))`.
pub fn sph_bessel_with_derivative(kind: RadialKind, n: usize, x: f64) -> Result<(Complex64, Complex64)> {
    let j = sph_j_all(n + 1, x)?;
    let y = match kind {
        RadialKind::BesselJ => vec![0.0; n + 2],
        RadialKind::Hankel2 => sph_y_all(n + 1, x)?,
    };
    let z = |k: usize| Complex64::new(j[k], -y[k]);
    let value = z(n);
    let deriv = if n == 0 { -z(1) } else { z(n - 1) - value * ((n + 1) as f64 / x) };
    Ok((value, deriv))
}

/// Riccati-type factor `[x z_n(x)]'/x = z_n(x)/x + z_n'(x)`.
pub fn riccati_factor(kind: RadialKind, n: usize, x: f64) -> Result<Complex64> {
    let (z, dz) = sph_bessel_with_derivative(kind, n, x)?;
    Ok(z / x + dz)
}

/// Gauss-Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        self.mapped(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

/// `count`-point Gauss-Legendre rule, nodes ascending.
pub fn gauss_legendre(count: usize) -> QuadratureRule {
    let n = count.max(1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d, _) = legendre_triple(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d, _) = legendre_triple(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

/// Normalization `sqrt((2n+1)/(4π) · (n−m)!/(n+m)!)`.
pub(crate) fn ynm_norm(n: usize, m: i64) -> f64 {
    ((2 * n + 1) as f64 / (4.0 * PI) * factorial_ratio(n, m)).sqrt()
}

/// Orthonormal scalar spherical harmonic `Y_n^m(θ, φ)`.
pub fn ynm(n: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > n {
        return Err(Error::Domain(format!("|m|={} exceeds n={n}", m.abs())));
    }
    let p = assoc_legendre_signed(n, m, theta.cos());
    Ok(Complex64::from_polar(ynm_norm(n, m) * p, m as f64 * phi))
}

/// `∂_θ P_n^m(cos θ)` via `½[P_n^{m+1} − (n+m)(n−m+1) P_n^{m−1}]`; regular at the poles.
pub(crate) fn dtheta_assoc_legendre(n: usize, m: i64, theta: f64) -> f64 {
    let x = theta.cos();
    let nn = n as i64;
    0.5 * (assoc_legendre_signed(n, m + 1, x)
        - ((nn + m) * (nn - m + 1)) as f64 * assoc_legendre_signed(n, m - 1, x))
}

/// `m P_n^m(cos θ) / sin θ` via `−½[P_{n+1}^{m+1} + (n−m+1)(n−m+2) P_{n+1}^{m−1}]`.
pub(crate) fn m_over_sin_assoc_legendre(n: usize, m: i64, theta: f64) -> f64 {
    let x = theta.cos();
    let nn = n as i64;
    -0.5 * (assoc_legendre_signed(n + 1, m + 1, x)
        + ((nn - m + 1) * (nn - m + 2)) as f64 * assoc_legendre_signed(n + 1, m - 1, x))
}
