//! Galerkin marching-on-in-time for the reduced Volterra equations.
//!
//! The current of step `q` is `Σ_j I_qj P_j(2τ − 1)` with `τ = t/Δt − q`.
//! Testing with the same functions gives the block recursion
//!
//! ```text
//! Z_0 I_q = V_q − Σ_{k≥1} Z_k I_{q−k}
//! Z_k[i][j] = Δt² ∫_{−1}^{1} K((k + w)Δt) Φ_ij(w) dw,
//! Φ_ij(w)   = ∫ P_i(2τ − 1) P_j(2(τ − w) − 1) dτ
//! ```
//!
//! Kernels with a constant tail are marched in differenced form with a running
//! charge accumulator so the cost per step stays bounded.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kernels::{build_kernel, KernelKind, PiecewiseKernel};
use crate::linalg::{add_mat_vec, sub_mat_vec, RealLu};
use crate::specfun::{gauss_legendre, legendre_all, legendre_triple, QuadratureRule};
use crate::vsh::{AngularProjector, Equation, IncidentConfig, ModeIndex, SurfaceRule};
use crate::{Error, Result};

/// Time step, highest Legendre order and number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalBasisConfig {
    pub dt: f64,
    pub np: usize,
    pub nt: usize,
}

impl TemporalBasisConfig {
    pub fn new(dt: f64, np: usize, nt: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if nt == 0 {
            return Err(Error::Config("step count must be at least 1".into()));
        }
        Ok(Self { dt, np, nt })
    }

    /// Number of basis functions per step.
    pub fn size(&self) -> usize {
        self.np + 1
    }

    pub fn t_start(&self, q: usize) -> f64 {
        q as f64 * self.dt
    }
}

/// Shifted Legendre polynomial `P_j(2τ − 1)`.
pub fn temporal_basis(j: usize, tau: f64) -> f64 {
    legendre_triple(j, (2.0 * tau - 1.0).clamp(-1.0, 1.0)).0
}

/// `Φ_ij(w)` for all `i, j ≤ np`, exact by Gauss quadrature.
struct Overlap {
    rule: QuadratureRule,
    pa: Vec<f64>,
    pb: Vec<f64>,
}

impl Overlap {
    fn new(np: usize) -> Self {
        Self { rule: gauss_legendre(np + 2), pa: vec![0.0; np + 1], pb: vec![0.0; np + 1] }
    }

    fn accumulate(&mut self, w: f64, scale: f64, out: &mut DMatrix<f64>) {
        let lo = w.max(0.0);
        let hi = (1.0 + w).min(1.0);
        if hi <= lo {
            return;
        }
        let m = self.pa.len();
        for (tau, wt) in self.rule.mapped(lo, hi) {
            legendre_all((2.0 * tau - 1.0).clamp(-1.0, 1.0), &mut self.pa);
            legendre_all((2.0 * (tau - w) - 1.0).clamp(-1.0, 1.0), &mut self.pb);
            for i in 0..m {
                let s = scale * wt * self.pa[i];
                for j in 0..m {
                    out[(i, j)] += s * self.pb[j];
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockVariant {
    /// `Z_k` as defined by the kernel; with a tail, `Z_k = Z_{Nk}` for all `k ≥ Nk`.
    Plain,
    /// `Z^I_k = Z_k − Z_{k−1}`; vanishes beyond `Nk`.
    Differenced,
}

/// Interaction blocks indexed by step lag.
#[derive(Debug, Clone)]
pub struct MotBlocks {
    pub kind: KernelKind,
    pub n: usize,
    pub dt: f64,
    pub np: usize,
    pub nk: usize,
    pub variant: BlockVariant,
    pub blocks: Vec<DMatrix<f64>>,
    /// Kernel tail value (zero unless the kernel has one).
    pub tail_constant: f64,
}

impl MotBlocks {
    pub fn dim(&self) -> usize {
        self.np + 1
    }

    /// Plain blocks of a tailed kernel repeat their last entry forever.
    pub fn repeats_last(&self) -> bool {
        self.variant == BlockVariant::Plain && self.tail_constant != 0.0
    }

    /// Block of lag `k`, or `None` when it is zero.
    pub fn block(&self, k: usize) -> Option<&DMatrix<f64>> {
        if k <= self.nk {
            Some(&self.blocks[k])
        } else if self.repeats_last() {
            self.blocks.last()
        } else {
            None
        }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for b in &mut self.blocks {
            *b *= s;
        }
        self.tail_constant *= s;
        self
    }

    /// Adds `weight·J` (identity in time) to the recursion.
    pub fn with_identity(mut self, weight: f64) -> Self {
        let gram = gram_matrix(self.np, self.dt) * weight;
        self.blocks[0] += &gram;
        if self.variant == BlockVariant::Differenced {
            self.blocks[1] -= &gram;
        }
        self
    }

    /// Differenced form of plain blocks.
    pub fn differenced(&self) -> Result<Self> {
        if self.variant != BlockVariant::Plain {
            return Err(Error::Config("blocks are already differenced".into()));
        }
        let mut blocks = Vec::with_capacity(self.nk + 1);
        blocks.push(self.blocks[0].clone());
        for k in 1..=self.nk {
            blocks.push(&self.blocks[k] - &self.blocks[k - 1]);
        }
        Ok(Self { variant: BlockVariant::Differenced, blocks, ..self.clone() })
    }

    /// `Σ_k Z_k e^{−jωkΔt}` for the plain variant without tail.
    pub fn transfer(&self, omega: f64) -> DMatrix<Complex64> {
        let m = self.dim();
        let mut out = DMatrix::<Complex64>::zeros(m, m);
        for (k, b) in self.blocks.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -omega * k as f64 * self.dt);
            for i in 0..m {
                for j in 0..m {
                    out[(i, j)] += ph * b[(i, j)];
                }
            }
        }
        out
    }
}

/// `Δt·diag(1/(2i+1))`, the step Gram matrix of the shifted Legendre basis.
pub fn gram_matrix(np: usize, dt: f64) -> DMatrix<f64> {
    DMatrix::from_fn(np + 1, np + 1, |i, j| if i == j { dt / (2 * i + 1) as f64 } else { 0.0 })
}

/// Blocks of `kernel` alone (no surface measure, no identity term).
pub fn assemble_blocks(kernel: &PiecewiseKernel, basis: &TemporalBasisConfig, variant: BlockVariant) -> Result<MotBlocks> {
    let dt = basis.dt;
    let np = basis.np;
    let m = np + 1;
    let beta = kernel.support;
    let nk = (beta / dt).ceil() as usize + 1;
    let tail = kernel.tail;
    let nodes = match kernel.smooth_degree() {
        Some(d) => (d + 2 * np + 1) / 2 + 2,
        None => 24,
    };
    let rule = gauss_legendre(nodes);
    let mut overlap = Overlap::new(np);
    let mut blocks = Vec::with_capacity(nk + 1);
    for k in 0..=nk {
        let kf = k as f64;
        let mut z = DMatrix::<f64>::zeros(m, m);
        let mut bps = vec![-1.0, 0.0, 1.0];
        for b in kernel.breakpoints() {
            let w = b / dt - kf;
            if w > -1.0 && w < 1.0 {
                bps.push(w);
            }
        }
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        for pair in bps.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let mid = (kf + 0.5 * (lo + hi)) * dt;
            if mid <= 0.0 {
                continue;
            }
            let in_support = mid < beta;
            if !in_support && tail == 0.0 {
                continue;
            }
            for (w, wt) in rule.mapped(lo, hi) {
                let t = (kf + w) * dt;
                let kv = if in_support { kernel.smooth_on_support(t) } else { tail };
                if kv != 0.0 {
                    overlap.accumulate(w, dt * dt * wt * kv, &mut z);
                }
            }
        }
        for d in &kernel.deltas {
            let w0 = d.time / dt - kf;
            if w0 > -1.0 && w0 < 1.0 {
                overlap.accumulate(w0, dt * d.weight, &mut z);
            }
        }
        blocks.push(z);
    }
    let plain = MotBlocks {
        kind: kernel.kind,
        n: kernel.n,
        dt,
        np,
        nk,
        variant: BlockVariant::Plain,
        blocks,
        tail_constant: tail,
    };
    match variant {
        BlockVariant::Plain => Ok(plain),
        BlockVariant::Differenced => plain.differenced(),
    }
}

/// Blocks of the tested equation for a physical kernel: surface measure `a²`,
/// identity term for second-kind kernels, differenced form when the kernel has a tail.
pub fn assemble_system(kernel: &PiecewiseKernel, basis: &TemporalBasisConfig) -> Result<MotBlocks> {
    let scale = kernel.a * kernel.a;
    let mut blocks = assemble_blocks(kernel, basis, BlockVariant::Plain)?.scaled(scale);
    if kernel.kind.is_second_kind() {
        blocks = blocks.with_identity(scale);
    }
    if blocks.tail_constant != 0.0 {
        blocks = blocks.differenced()?;
    }
    Ok(blocks)
}

/// Running accumulator `C_q = C_{q−1} + Σ_k Z^I_k I_{q−k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeState {
    pub c: Vec<Complex64>,
}

/// Time-dependent expansion coefficients `I_qj` of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries {
    pub mode: Option<ModeIndex>,
    pub kind: KernelKind,
    pub dt: f64,
    pub np: usize,
    values: Vec<Complex64>,
}

impl CoefficientSeries {
    pub fn new(kind: KernelKind, dt: f64, np: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() % (np + 1) != 0 {
            return Err(Error::Mismatch(format!("{} values is not a multiple of {}", values.len(), np + 1)));
        }
        Ok(Self { mode: None, kind, dt, np, values })
    }

    pub fn with_mode(mut self, mode: ModeIndex) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn nt(&self) -> usize {
        self.values.len() / (self.np + 1)
    }

    pub fn step(&self, q: usize) -> &[Complex64] {
        let m = self.np + 1;
        &self.values[q * m..(q + 1) * m]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn steps(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks(self.np + 1)
    }

    /// Current at time `t` from the piecewise-polynomial expansion.
    pub fn reconstruct(&self, t: f64) -> Complex64 {
        let x = t / self.dt;
        if x < 0.0 || x >= self.nt() as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let q = x.floor() as usize;
        let mut p = vec![0.0; self.np + 1];
        legendre_all((2.0 * (x - q as f64) - 1.0).clamp(-1.0, 1.0), &mut p);
        self.step(q).iter().zip(&p).map(|(v, pj)| v * pj).sum()
    }

    /// Largest coefficient magnitude over all steps.
    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude over steps `from..`.
    pub fn max_from(&self, from: usize) -> f64 {
        let m = self.np + 1;
        self.values.iter().skip(from * m).map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// CSV `step,t_start,order,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "step,t_start,order,re,im")?;
        for (q, s) in self.steps().enumerate() {
            let t = q as f64 * self.dt;
            for (j, v) in s.iter().enumerate() {
                writeln!(out, "{q},{t:.16e},{j},{:.16e},{:.16e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Parses the CSV written by [`CoefficientSeries::write_csv`].
    pub fn read_csv(text: &str, kind: KernelKind) -> Result<Self> {
        let mut rows: Vec<(usize, f64, usize, Complex64)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (ln == 0 && line.starts_with("step")) {
                continue;
            }
            let bad = || Error::Config(format!("coefficient CSV line {}: cannot parse '{line}'", ln + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let q = f[0].trim().parse::<usize>().map_err(|_| bad())?;
            let t = f[1].trim().parse::<f64>().map_err(|_| bad())?;
            let j = f[2].trim().parse::<usize>().map_err(|_| bad())?;
            let re = f[3].trim().parse::<f64>().map_err(|_| bad())?;
            let im = f[4].trim().parse::<f64>().map_err(|_| bad())?;
            rows.push((q, t, j, Complex64::new(re, im)));
        }
        let np = rows.iter().map(|r| r.2).max().unwrap_or(0);
        let nt = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        if rows.len() != nt * (np + 1) {
            return Err(Error::Config(format!("coefficient CSV has {} rows, expected {}", rows.len(), nt * (np + 1))));
        }
        let dt = rows.iter().find(|r| r.0 == 1).map(|r| r.1).unwrap_or(1.0);
        let mut values = vec![Complex64::new(0.0, 0.0); rows.len()];
        for (q, _, j, v) in rows {
            values[q * (np + 1) + j] = v;
        }
        Self::new(kind, dt, np, values)
    }
}

/// Step-by-step solver for a block recursion.
#[derive(Debug, Clone)]
pub struct Marcher<'a> {
    blocks: &'a MotBlocks,
    lu: RealLu,
    history: Vec<Complex64>,
    charge: Option<ChargeState>,
    work: Vec<Complex64>,
}

impl<'a> Marcher<'a> {
    /// Plain blocks march directly (full history when the last block repeats);
    /// differenced blocks march with the charge accumulator.
    pub fn new(blocks: &'a MotBlocks) -> Result<Self> {
        let lu = RealLu::new(&blocks.blocks[0]).ok_or(Error::SingularBlock { kind: blocks.kind, n: blocks.n })?;
        let m = blocks.dim();
        let charge = match blocks.variant {
            BlockVariant::Plain => None,
            BlockVariant::Differenced => Some(ChargeState { c: vec![Complex64::new(0.0, 0.0); m] }),
        };
        Ok(Self { blocks, lu, history: Vec::new(), charge, work: vec![Complex64::new(0.0, 0.0); m] })
    }

    pub fn steps_done(&self) -> usize {
        self.history.len() / self.blocks.dim()
    }

    pub fn charge(&self) -> Option<&ChargeState> {
        self.charge.as_ref()
    }

    pub fn history(&self) -> &[Complex64] {
        &self.history
    }

    fn past(&self, q: usize, k: usize) -> &[Complex64] {
        let m = self.blocks.dim();
        &self.history[(q - k) * m..(q - k + 1) * m]
    }

    /// Advances one step with right-hand side `v`; returns `I_q`.
    pub fn step(&mut self, v: &[Complex64]) -> Result<&[Complex64]> {
        let m = self.blocks.dim();
        if v.len() != m {
            return Err(Error::Mismatch(format!("right-hand side has {} entries, expected {m}", v.len())));
        }
        let q = self.steps_done();
        let mut r = v.to_vec();
        let reach = if self.blocks.repeats_last() { q } else { q.min(self.blocks.nk) };
        for k in 1..=reach {
            if let Some(z) = self.blocks.block(k) {
                sub_mat_vec(z, self.past(q, k), &mut r);
            }
        }
        if let Some(ch) = &self.charge {
            for (ri, ci) in r.iter_mut().zip(&ch.c) {
                *ri -= ci;
            }
        }
        let i_q = self.lu.solve_complex(&r);
        self.history.extend_from_slice(&i_q);
        if let Some(mut ch) = self.charge.take() {
            self.work.iter_mut().for_each(|w| *w = Complex64::new(0.0, 0.0));
            let mut acc = std::mem::take(&mut self.work);
            for k in 0..=q.min(self.blocks.nk) {
                add_mat_vec(&self.blocks.blocks[k], self.past(q, k), &mut acc);
            }
            for (ci, a) in ch.c.iter_mut().zip(&acc) {
                *ci += a;
            }
            self.work = acc;
            self.charge = Some(ch);
        }
        Ok(&self.history[q * m..(q + 1) * m])
    }

    pub fn into_series(self) -> Result<CoefficientSeries> {
        CoefficientSeries::new(self.blocks.kind, self.blocks.dt, self.blocks.np, self.history)
    }
}

fn run(blocks: &MotBlocks, rhs: &[Vec<Complex64>]) -> Result<CoefficientSeries> {
    let mut marcher = Marcher::new(blocks)?;
    marcher.history.reserve(rhs.len() * blocks.dim());
    for v in rhs {
        marcher.step(v)?;
    }
    marcher.into_series()
}

/// Plain marching. Blocks of a tailed kernel are summed over the full history.
pub fn march(blocks: &MotBlocks, rhs: &[Vec<Complex64>]) -> Result<CoefficientSeries> {
    if blocks.variant != BlockVariant::Plain {
        return Err(Error::Config("march expects plain blocks; use march_with_charge".into()));
    }
    run(blocks, rhs)
}

/// Marching with the running charge accumulator on differenced blocks.
pub fn march_with_charge(blocks: &MotBlocks, rhs: &[Vec<Complex64>]) -> Result<CoefficientSeries> {
    if blocks.variant != BlockVariant::Differenced {
        return Err(Error::Config("march_with_charge expects differenced blocks".into()));
    }
    run(blocks, rhs)
}

/// Marches whichever variant `blocks` holds.
pub fn march_any(blocks: &MotBlocks, rhs: &[Vec<Complex64>]) -> Result<CoefficientSeries> {
    run(blocks, rhs)
}

/// `V_q[i] = ∫_{t_q}^{t_{q+1}} P_i(2τ − 1) f(t) dt` for `q < nt`.
pub fn project_onto_steps<F>(f: F, basis: &TemporalBasisConfig) -> Vec<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    let rule = gauss_legendre(basis.np + 12);
    let mut p = vec![0.0; basis.size()];
    (0..basis.nt)
        .map(|q| {
            let mut v = vec![Complex64::new(0.0, 0.0); basis.size()];
            let t0 = basis.t_start(q);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let fv = f(t0 + 0.5 * (x + 1.0) * basis.dt);
                if fv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                legendre_all(*x, &mut p);
                for (vi, pi) in v.iter_mut().zip(&p) {
                    *vi += fv * (0.5 * basis.dt * w * pi);
                }
            }
            v
        })
        .collect()
}

/// Per-step tested incident field for one mode and equation.
#[derive(Debug, Clone)]
pub struct RhsAssembler {
    projector: AngularProjector,
    basis: TemporalBasisConfig,
}

impl RhsAssembler {
    pub fn new(
        config: &IncidentConfig,
        mode: &ModeIndex,
        equation: Equation,
        radius: f64,
        basis: &TemporalBasisConfig,
    ) -> Result<Self> {
        let rule = SurfaceRule::for_band(mode.n, radius, config.f0 + 4.0 * config.bandwidth, config.c);
        Self::with_rule(config, mode, equation, radius, basis, &rule)
    }

    pub fn with_rule(
        config: &IncidentConfig,
        mode: &ModeIndex,
        equation: Equation,
        radius: f64,
        basis: &TemporalBasisConfig,
        rule: &SurfaceRule,
    ) -> Result<Self> {
        let projector = AngularProjector::new(config, mode, equation, radius, rule)?;
        Ok(Self { projector, basis: *basis })
    }

    pub fn projector(&self) -> &AngularProjector {
        &self.projector
    }

    /// `V_q`.
    pub fn step(&self, q: usize) -> Vec<Complex64> {
        let one = TemporalBasisConfig { nt: 1, ..self.basis };
        let t0 = self.basis.t_start(q);
        project_onto_steps(|t| self.projector.eval(t + t0), &one).pop().unwrap_or_default()
    }

    /// `V_0 .. V_{nt−1}`.
    pub fn all(&self) -> Vec<Vec<Complex64>> {
        project_onto_steps(|t| self.projector.eval(t), &self.basis)
    }
}

/// `V_q` for a single step.
pub fn assemble_rhs(
    config: &IncidentConfig,
    mode: &ModeIndex,
    equation: Equation,
    radius: f64,
    basis: &TemporalBasisConfig,
    q: usize,
) -> Result<Vec<Complex64>> {
    Ok(RhsAssembler::new(config, mode, equation, radius, basis)?.step(q))
}

/// `scale·(identity·J + K ⊗ J) = f`.
#[derive(Debug, Clone)]
pub struct VolterraProblem<'a> {
    pub kernel: &'a PiecewiseKernel,
    pub scale: f64,
    pub identity: f64,
}

impl<'a> VolterraProblem<'a> {
    /// The tested equation of a physical kernel (`scale = a²`).
    pub fn for_kernel(kernel: &'a PiecewiseKernel) -> Self {
        let identity = if kernel.kind.is_second_kind() { 1.0 } else { 0.0 };
        Self { kernel, scale: kernel.a * kernel.a, identity }
    }
}

/// Fine-step collocation of the Volterra equation at `t_i = i·h`, `i = 0..=n`,
/// with trapezoidal convolution, exact impulse terms (linear interpolation
/// between samples) and a cumulative-trapezoid tail.
pub fn volterra_oracle<F>(problem: &VolterraProblem<'_>, f: F, h: f64, n: usize) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    let kernel = problem.kernel;
    let beta = kernel.support;
    if !(h > 0.0 && h < beta) {
        return Err(Error::Config(format!("oracle step {h} must lie in (0, {beta})")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let lmax = (beta / h).floor() as usize;
    let ks: Vec<f64> = (0..=lmax).map(|l| kernel.smooth_on_support(l as f64 * h)).collect();
    let k_edge = kernel.smooth_on_support(beta);
    let partial = beta - lmax as f64 * h;
    let w0: f64 = kernel.deltas.iter().filter(|d| d.time == 0.0).map(|d| d.weight).sum();
    let late: Vec<_> = kernel.deltas.iter().filter(|d| d.time > 0.0).copied().collect();
    let coef = problem.scale * (problem.identity + w0 + 0.5 * h * ks[0]);
    if coef == 0.0 {
        return Err(Error::SingularBlock { kind: kernel.kind, n: kernel.n });
    }
    let mut j = vec![zero; n + 1];
    let mut cum = vec![zero; n + 1];
    let interp = |j: &[Complex64], x: f64| -> Complex64 {
        let i0 = x.floor() as usize;
        let fr = x - i0 as f64;
        j[i0] * (1.0 - fr) + j[i0 + 1] * fr
    };
    let integral_to = |j: &[Complex64], cum: &[Complex64], x: f64| -> Complex64 {
        let i0 = x.floor() as usize;
        let fr = x - i0 as f64;
        let mid = j[i0] * (1.0 - fr) + j[i0 + 1] * fr;
        cum[i0] + (j[i0] + mid) * (0.5 * h * fr)
    };
    for i in 0..=n {
        let t = i as f64 * h;
        let mut known = zero;
        if t < beta {
            for l in 1..=i {
                let wt = if l == i { 0.5 } else { 1.0 };
                known += j[i - l] * (h * wt * ks[l]);
            }
            for d in &late {
                if t >= d.time {
                    known += interp(&j, (t - d.time) / h) * d.weight;
                }
            }
        } else {
            for l in 1..=lmax {
                let wt = if l == lmax { 0.5 } else { 1.0 };
                known += j[i - l] * (h * wt * ks[l]);
            }
            let x = (t - beta) / h;
            if partial > 0.0 {
                known += (j[i - lmax] * ks[lmax] + interp(&j, x) * k_edge) * (0.5 * partial);
            }
            for d in &late {
                known += interp(&j, (t - d.time) / h) * d.weight;
            }
            if kernel.tail != 0.0 {
                known += integral_to(&j, &cum, x) * kernel.tail;
            }
        }
        j[i] = (f(t) - known * problem.scale) / coef;
        if i > 0 {
            cum[i] = cum[i - 1] + (j[i - 1] + j[i]) * (0.5 * h);
        }
    }
    Ok(j)
}

/// Legendre coefficients of sampled data per step: `samples[i] = J(i·h)` with
/// `per_step` (even) samples per step, composite Simpson in each step.
pub fn project_samples(samples: &[Complex64], per_step: usize, dt: f64, np: usize) -> Result<Vec<Vec<Complex64>>> {
    if per_step == 0 || per_step % 2 != 0 {
        return Err(Error::Config(format!("samples per step must be even and positive, got {per_step}")));
    }
    let steps = (samples.len().saturating_sub(1)) / per_step;
    let h = dt / per_step as f64;
    let mut p = vec![0.0; np + 1];
    Ok((0..steps)
        .map(|q| {
            let mut v = vec![Complex64::new(0.0, 0.0); np + 1];
            for s in 0..=per_step {
                let w = if s == 0 || s == per_step { 1.0 } else if s % 2 == 1 { 4.0 } else { 2.0 };
                let tau = s as f64 / per_step as f64;
                legendre_all(2.0 * tau - 1.0, &mut p);
                let js = samples[q * per_step + s];
                for (j, vj) in v.iter_mut().enumerate() {
                    *vj += js * (w * h / 3.0 * p[j] * (2 * j + 1) as f64 / dt);
                }
            }
            v
        })
        .collect())
}

/// `‖a − b‖₂ / ‖b‖₂` over the common steps of two coefficient tables.
pub fn relative_l2(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        for (u, v) in x.iter().zip(y) {
            num += (u - v).norm_sqr();
            den += v.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}

/// Coefficient table of a series as nested vectors.
pub fn series_table(series: &CoefficientSeries) -> Vec<Vec<Complex64>> {
    series.steps().map(|s| s.to_vec()).collect()
}

/// Marches one mode of the physical scatterer under `config`.
pub fn simulate_mode(
    config: &IncidentConfig,
    mode: &ModeIndex,
    kind: KernelKind,
    radius: f64,
    basis: &TemporalBasisConfig,
) -> Result<CoefficientSeries> {
    let equation = Equation::from_kernel(kind)?;
    equation.check_mode(mode)?;
    let kernel = build_kernel(kind, mode.n, radius, config.c, config.eta / config.c)?;
    let blocks = assemble_system(&kernel, basis)?;
    let rhs = RhsAssembler::new(config, mode, equation, radius, basis)?.all();
    Ok(march_any(&blocks, &rhs)?.with_mode(*mode))
}
