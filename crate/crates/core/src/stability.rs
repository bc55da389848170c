//! Companion form of the marching recursion and its eigen-spectrum.
//!
//! Plain recursion, state `x_j = [I_j, …, I_{j−Nk}]`:
//!
//! ```text
//! A x_{j+1} + B x_j = F_{j+1},  A = diag(Z_0, 1, …),  B[0][k−1] = Z_k,  B[l][l−1] = −1
//! ```
//!
//! Charge recursion, state `x_j = [I_j, …, I_{j−Nk}, C_{j−1}, …, C_{j−1−Nk}]`:
//! the current row reads `Z^I_0 I_{j+1} + C_j = V_{j+1} − Σ_{k≥1} Z^I_k I_{j+1−k}` and
//! the charge row `C_j − C_{j−1} − Σ_{k≥0} Z^I_k I_{j−k} = 0`.
//! Stability is governed by the spectrum of `M = −A⁻¹B`.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kernels::KernelKind;
use crate::linalg::RealLu;
use crate::mot::{BlockVariant, MotBlocks};
use crate::{Error, Result};

/// Default band around the unit circle.
pub const UNIT_CIRCLE_TOL: f64 = 1e-8;

/// Block companion pair `(A, B)` of a marching recursion.
#[derive(Debug, Clone)]
pub struct CompanionSystem {
    pub kind: KernelKind,
    pub n: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub dim: usize,
    /// Size of one current block.
    pub block: usize,
    /// Current slots `I_j … I_{j−Nk}`.
    pub slots: usize,
    pub with_charge: bool,
}

/// Companion pair for plain blocks (no tail) or differenced blocks (charge form).
pub fn build_companion(blocks: &MotBlocks) -> Result<CompanionSystem> {
    if blocks.repeats_last() {
        return Err(Error::Config("plain blocks with a tail have unbounded memory; difference them first".into()));
    }
    let m = blocks.dim();
    let nk = blocks.nk;
    let slots = nk + 1;
    let with_charge = blocks.variant == BlockVariant::Differenced;
    let dim = if with_charge { 2 * slots * m } else { slots * m };
    let mut a = DMatrix::<f64>::identity(dim, dim);
    let mut b = DMatrix::<f64>::zeros(dim, dim);
    let put = |mat: &mut DMatrix<f64>, r: usize, c: usize, src: &DMatrix<f64>, sign: f64| {
        for i in 0..m {
            for j in 0..m {
                mat[(r * m + i, c * m + j)] += sign * src[(i, j)];
            }
        }
    };
    let eye = DMatrix::<f64>::identity(m, m);
    a.view_mut((0, 0), (m, m)).copy_from(&blocks.blocks[0]);
    for k in 1..=nk {
        put(&mut b, 0, k - 1, &blocks.blocks[k], 1.0);
    }
    for l in 1..slots {
        put(&mut b, l, l - 1, &eye, -1.0);
    }
    if with_charge {
        let c0 = slots;
        put(&mut a, 0, c0, &eye, 1.0);
        put(&mut b, c0, c0, &eye, -1.0);
        for k in 0..=nk {
            put(&mut b, c0, k, &blocks.blocks[k], -1.0);
        }
        for l in 1..slots {
            put(&mut b, c0 + l, c0 + l - 1, &eye, -1.0);
        }
    }
    Ok(CompanionSystem { kind: blocks.kind, n: blocks.n, a, b, dim, block: m, slots, with_charge })
}

impl CompanionSystem {
    fn lu(&self) -> Result<RealLu> {
        RealLu::new(&self.a).ok_or(Error::SingularBlock { kind: self.kind, n: self.n })
    }

    /// `M = −A⁻¹B`.
    pub fn iteration_matrix(&self) -> Result<DMatrix<f64>> {
        Ok(self.lu()?.solve_matrix(&(-&self.b)))
    }

    /// Zero state before the first step.
    pub fn initial_state(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.dim]
    }

    /// `x_{j+1} = A⁻¹(F_{j+1} − B x_j)` with `F = [V, 0, …]`.
    pub fn step(&self, lu: &RealLu, state: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        if state.len() != self.dim || v.len() != self.block {
            return Err(Error::Mismatch(format!(
                "state {} / rhs {} vs companion {} / block {}",
                state.len(),
                v.len(),
                self.dim,
                self.block
            )));
        }
        let mut f = vec![Complex64::new(0.0, 0.0); self.dim];
        f[..self.block].copy_from_slice(v);
        for i in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, s) in state.iter().enumerate() {
                let bij = self.b[(i, j)];
                if bij != 0.0 {
                    acc += s * bij;
                }
            }
            f[i] -= acc;
        }
        Ok(lu.solve_complex(&f))
    }

    /// Runs the companion recursion over `rhs` and returns the current of every step.
    pub fn trajectory(&self, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let lu = self.lu()?;
        let mut x = self.initial_state();
        let mut out = Vec::with_capacity(rhs.len());
        for v in rhs {
            x = self.step(&lu, &x, v)?;
            out.push(x[..self.block].to_vec());
        }
        Ok(out)
    }
}

/// Eigenvalues of the companion iteration matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub rho: f64,
    pub on_circle_count: usize,
    /// Eigenvalues with `|λ| > 1 + tol`.
    pub outside_count: usize,
    pub tol: f64,
}

impl SpectrumReport {
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>, tol: f64) -> Self {
        eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
        let rho = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let on_circle_count = eigenvalues.iter().filter(|l| (l.norm() - 1.0).abs() <= tol).count();
        let outside_count = eigenvalues.iter().filter(|l| l.norm() > 1.0 + tol).count();
        Self { eigenvalues, rho, on_circle_count, outside_count, tol }
    }

    /// `rho=<v> on_circle=<k>`.
    pub fn summary_line(&self) -> String {
        format!("rho={:.17e} on_circle={}", self.rho, self.on_circle_count)
    }

    /// CSV `re,im,abs`, largest modulus first.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "re,im,abs")?;
        for l in &self.eigenvalues {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", l.re, l.im, l.norm())?;
        }
        Ok(())
    }
}

/// Full spectrum of `−A⁻¹B`.
pub fn eigen_spectrum(system: &CompanionSystem, tol: f64) -> Result<SpectrumReport> {
    let m = system.iteration_matrix()?;
    Ok(SpectrumReport::from_eigenvalues(eigenvalues(&m)?, tol))
}

/// Dominant modulus of `−A⁻¹B` by power iteration from a fixed start vector:
/// geometric-mean growth over the second half of `iterations` steps.
pub fn power_iteration(system: &CompanionSystem, iterations: usize) -> Result<f64> {
    let m = system.iteration_matrix()?;
    power_iteration_matrix(&m, iterations)
}

/// [`power_iteration`] on an explicit matrix.
pub fn power_iteration_matrix(m: &DMatrix<f64>, iterations: usize) -> Result<f64> {
    let n = m.nrows();
    if n == 0 || iterations < 2 {
        return Err(Error::Config("power iteration needs a non-empty matrix and at least 2 iterations".into()));
    }
    let mut x = nalgebra::DVector::<f64>::from_fn(n, |i, _| 1.0 + ((i * 7919) % 97) as f64 / 97.0);
    x /= x.norm();
    let half = iterations / 2;
    let mut log_growth = 0.0;
    for it in 0..iterations {
        let y = m * &x;
        let norm = y.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Ok(if norm == 0.0 { 0.0 } else { f64::INFINITY });
        }
        if it >= half {
            log_growth += norm.ln();
        }
        x = y / norm;
    }
    Ok((log_growth / (iterations - half) as f64).exp())
}

/// Diagonal similarity `D⁻¹ M D` with power-of-two scales equalizing row and column norms.
pub fn balanced(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let n = matrix.nrows().min(matrix.ncols());
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = matrix[(i, j)];
        }
    }
    balance(&mut a, n);
    DMatrix::from_fn(n, n, |i, j| a[i + 1][j + 1])
}

/// All eigenvalues of a real square matrix: balancing, Hessenberg reduction by
/// stabilized elementary similarity transforms, then Francis double-shift QR.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Mismatch(format!("matrix is {}×{}, expected square", n, matrix.ncols())));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    // 1-based working copy
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = matrix[(i, j)];
        }
    }
    balance(&mut a, n);
    to_hessenberg(&mut a, n);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = 0.0;
        }
    }
    hessenberg_qr(&mut a, n)
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut().skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn to_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x: f64 = 0.0;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut().skip(1) {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

const MAX_SWEEPS: usize = 120;

fn hessenberg_qr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<Complex64>> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize;
    let mut t = 0.0;
    let at = |a: &[Vec<f64>], i: isize, j: isize| a[i as usize][j as usize];
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() <= f64::EPSILON * s {
                    a[l as usize][(l - 1) as usize] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
            } else {
                let mut y = at(a, nn - 1, nn - 1);
                let mut w = at(a, nn, nn - 1) * at(a, nn - 1, nn);
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    let (u, v) = (nn as usize - 1, nn as usize);
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[u] = x + z;
                        wr[v] = x + z;
                        if z != 0.0 {
                            wr[v] = x - w / z;
                        }
                        wi[u] = 0.0;
                        wi[v] = 0.0;
                    } else {
                        wr[u] = x + p;
                        wr[v] = x + p;
                        wi[u] = -z;
                        wi[v] = z;
                    }
                    nn -= 2;
                } else {
                    if its >= MAX_SWEEPS {
                        return Err(Error::NoConvergence { index: nn as usize - 1, iterations: its });
                    }
                    if its > 0 && its % 10 == 0 {
                        t += x;
                        for i in 1..=nn {
                            a[i as usize][i as usize] -= x;
                        }
                        let s = at(a, nn, nn - 1).abs() + at(a, nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
                    let mut z;
                    let mut m = nn - 2;
                    while m >= l {
                        z = at(a, m, m);
                        let rr = x - z;
                        let ss = y - z;
                        p = (rr * ss - w) / at(a, m + 1, m) + at(a, m, m + 1);
                        q = at(a, m + 1, m + 1) - z - rr - ss;
                        r = at(a, m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                        if u <= f64::EPSILON * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i as usize][(i - 2) as usize] = 0.0;
                        if i != m + 2 {
                            a[i as usize][(i - 3) as usize] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = at(a, k, k - 1);
                            q = at(a, k + 1, k - 1);
                            r = 0.0;
                            if k != nn - 1 {
                                r = at(a, k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            let (ku, k1) = (k as usize, (k + 1) as usize);
                            if k == m {
                                if l != m {
                                    a[ku][ku - 1] = -a[ku][ku - 1];
                                }
                            } else {
                                a[ku][ku - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let ju = j as usize;
                                let mut pp = a[ku][ju] + q * a[k1][ju];
                                if k != nn - 1 {
                                    pp += r * a[ku + 2][ju];
                                    a[ku + 2][ju] -= pp * z;
                                }
                                a[k1][ju] -= pp * y;
                                a[ku][ju] -= pp * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                let iu = i as usize;
                                let mut pp = x * a[iu][ku] + y * a[iu][k1];
                                if k != nn - 1 {
                                    pp += z * a[iu][ku + 2];
                                    a[iu][ku + 2] -= pp * r;
                                }
                                a[iu][k1] -= pp * q;
                                a[iu][ku] -= pp;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_vacuum_kernel, Impulse, PiecewiseKernel};
    use crate::mot::{assemble_blocks, assemble_system, march_any, TemporalBasisConfig};

    fn match_spectra(ours: &[Complex64], reference: &[Complex64], tol: f64) {
        assert_eq!(ours.len(), reference.len());
        let mut used = vec![false; reference.len()];
        for l in ours {
            let (idx, d) = reference
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, r)| (i, (r - l).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d <= tol, "{l} unmatched (closest {d:e})");
            used[idx] = true;
        }
    }

    #[test]
    fn small_known_spectra() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = eigenvalues(&m).unwrap();
        match_spectra(&ev, &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)], 1e-14);
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 3.0, 1.0, 0.0, 0.0, -1.0]);
        let ev = eigenvalues(&m).unwrap();
        match_spectra(&ev, &[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(-1.0, 0.0)], 1e-13);
        assert!(eigenvalues(&DMatrix::zeros(2, 3)).is_err());
        assert!(eigenvalues(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn random_matrices_match_schur_reference() {
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for n in [5, 17, 60] {
            let m = DMatrix::from_fn(n, n, |_, _| rnd());
            let ours = eigenvalues(&m).unwrap();
            let reference: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
            match_spectra(&ours, &reference, 1e-9);
        }
    }

    #[test]
    fn impulse_kernel_companion_is_nilpotent_shift() {
        let basis = TemporalBasisConfig::new(0.1, 1, 10).unwrap();
        let k = PiecewiseKernel::impulses_only(KernelKind::K3, 0.35, vec![Impulse { time: 0.0, weight: 1.0 }], 0.0).unwrap();
        let blocks = assemble_blocks(&k, &basis, BlockVariant::Plain).unwrap();
        let sys = build_companion(&blocks).unwrap();
        let expected_b = {
            let mut b = DMatrix::<f64>::zeros(sys.dim, sys.dim);
            for i in 2..sys.dim {
                b[(i, i - 2)] = -1.0;
            }
            b
        };
        assert_eq!(sys.b, expected_b);
        let rep = eigen_spectrum(&sys, UNIT_CIRCLE_TOL).unwrap();
        assert!(rep.rho <= 1e-10);
        assert_eq!(rep.on_circle_count, 0);
    }

    #[test]
    fn constant_tail_charge_row_structure() {
        let basis = TemporalBasisConfig::new(0.1, 0, 10).unwrap();
        let k = PiecewiseKernel::from_parts(KernelKind::K1, 0.25, |_| 2.0, Some(0), vec![], 2.0).unwrap();
        let blocks = assemble_blocks(&k, &basis, BlockVariant::Differenced).unwrap();
        let sys = build_companion(&blocks).unwrap();
        assert!(sys.with_charge);
        assert_eq!(sys.dim, 2 * (blocks.nk + 1));
        let c0 = blocks.nk + 1;
        assert_eq!(sys.a[(c0, c0)], 1.0);
        assert_eq!(sys.b[(c0, c0)], -1.0);
        assert_eq!(sys.a[(0, c0)], 1.0);
        for k in 0..=blocks.nk {
            assert_eq!(sys.b[(c0, k)], -blocks.blocks[k][(0, 0)]);
        }
        let plain = assemble_blocks(&k, &basis, BlockVariant::Plain).unwrap();
        assert!(build_companion(&plain).is_err());
    }

    fn trajectory_matches_march(kind: KernelKind, np: usize) {
        let dt = 1.0 / (20.0 * 0.7e9);
        let basis = TemporalBasisConfig::new(dt, np, 50).unwrap();
        let k = build_vacuum_kernel(kind, 3, 1.0).unwrap();
        let blocks = assemble_system(&k, &basis).unwrap();
        let mut seed = 99u64 + kind.index() as u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let rhs: Vec<Vec<Complex64>> = (0..50).map(|_| (0..=np).map(|_| Complex64::new(rnd(), rnd())).collect()).collect();
        let marched = march_any(&blocks, &rhs).unwrap();
        let sys = build_companion(&blocks).unwrap();
        let traj = sys.trajectory(&rhs).unwrap();
        let peak = marched.peak();
        for (q, x) in traj.iter().enumerate() {
            for (u, v) in x.iter().zip(marched.step(q)) {
                assert!((u - v).norm() <= 1e-10 * peak, "{kind} step {q}");
            }
        }
    }

    #[test]
    fn companion_trajectories_equal_marching() {
        for kind in KernelKind::SOLVER_KINDS {
            trajectory_matches_march(kind, 1);
        }
        trajectory_matches_march(KernelKind::K1, 2);
    }

    #[test]
    fn one_step_update_matches() {
        let dt = 1.0 / (20.0 * 0.7e9);
        let basis = TemporalBasisConfig::new(dt, 1, 1).unwrap();
        let k = build_vacuum_kernel(KernelKind::K2, 3, 1.0).unwrap();
        let blocks = assemble_system(&k, &basis).unwrap();
        let sys = build_companion(&blocks).unwrap();
        let v = vec![Complex64::new(0.3, -0.2), Complex64::new(1.1, 0.4)];
        let lu = RealLu::new(&sys.a).unwrap();
        let x = sys.step(&lu, &sys.initial_state(), &v).unwrap();
        let m = march_any(&blocks, &[v.clone()]).unwrap();
        for (a, b) in x[..2].iter().zip(m.step(0)) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
        assert!(sys.step(&lu, &x[1..], &v).is_err());
    }

    #[test]
    fn power_iteration_on_separated_spectrum() {
        let m = DMatrix::from_fn(6, 6, |i, j| if i == j { [0.97, 0.5, -0.3, 0.2, 0.1, 0.0][i] } else if j == i + 1 { 0.3 } else { 0.0 });
        let est = power_iteration_matrix(&m, 200).unwrap();
        let rho = SpectrumReport::from_eigenvalues(eigenvalues(&m).unwrap(), 1e-8).rho;
        assert!((est - rho).abs() <= 1e-6, "{est} vs {rho}");
    }

    #[test]
    fn report_formats() {
        let rep = SpectrumReport::from_eigenvalues(vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0)], 1e-8);
        assert_eq!(rep.on_circle_count, 1);
        assert_eq!(rep.outside_count, 0);
        assert_eq!(rep.eigenvalues[0], Complex64::new(0.0, 1.0));
        assert!(rep.summary_line().starts_with("rho=1.0000000000000000") && rep.summary_line().ends_with("on_circle=1"));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "re,im,abs");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn physical_spectrum_matches_schur_reference() {
        // the reference is run on the balanced matrix: K1's λ = 1 is defective and unbalanced Schur
        // scatters it by ε^(1/k)
        let dt = 1.0 / (20.0 * 0.7e9);
        let basis = TemporalBasisConfig::new(dt, 1, 10).unwrap();
        for kind in [KernelKind::K1, KernelKind::K3] {
            let k = build_vacuum_kernel(kind, 3, 1.0).unwrap();
            let sys = build_companion(&assemble_system(&k, &basis).unwrap()).unwrap();
            let m = sys.iteration_matrix().unwrap();
            let ours = SpectrumReport::from_eigenvalues(eigenvalues(&m).unwrap(), 1e-8);
            let reference = SpectrumReport::from_eigenvalues(balanced(&m).complex_eigenvalues().iter().copied().collect(), 1e-8);
            assert!((ours.rho - reference.rho).abs() <= 1e-8, "{kind}: {} vs {}", ours.rho, reference.rho);
        }
    }
}
