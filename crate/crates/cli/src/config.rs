//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! a = 1
//! f0 = 4e8
//! B = 3e8
//! dt = 7.1428571428571428e-11   # optional, defaults to 1/(20(f0+B))
//! Nt = 100000
//! Np = 1
//! modes = 3,1,psi; 30,1,phi
//! kernels = 1,2,3,4
//! c = 299792458
//! amplitude = 1
//! outdir = out
//! ```

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use tdmie::kernels::KernelKind;
use tdmie::vsh::{Equation, Family, IncidentConfig, ModeIndex};
use tdmie::{C0, MU0};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub a: f64,
    pub f0: f64,
    pub bandwidth: f64,
    /// `None` means `1/(20(f0+B))`.
    pub dt: Option<f64>,
    pub nt: usize,
    pub np: usize,
    pub modes: Vec<ModeIndex>,
    pub kernels: Vec<KernelKind>,
    pub c: f64,
    pub amplitude: f64,
    pub outdir: PathBuf,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            f0: 0.4e9,
            bandwidth: 0.3e9,
            dt: None,
            nt: 100_000,
            np: 1,
            modes: vec![
                ModeIndex { n: 3, m: 1, family: Family::Psi },
                ModeIndex { n: 3, m: 1, family: Family::Phi },
            ],
            kernels: KernelKind::SOLVER_KINDS.to_vec(),
            c: C0,
            amplitude: 1.0,
            outdir: PathBuf::from("out"),
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_mode(text: &str) -> Result<ModeIndex, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("mode '{text}' must be n,m,psi|phi"));
    }
    let n = parts[0].parse::<usize>().map_err(|_| format!("mode degree '{}' is not a non-negative integer", parts[0]))?;
    let m = parts[1].parse::<i64>().map_err(|_| format!("mode order '{}' is not an integer", parts[1]))?;
    let family = parts[2].parse::<Family>().map_err(|e| e.to_string())?;
    ModeIndex::new(n, m, family).map_err(|e| e.to_string())
}

pub fn parse_kernel(text: &str) -> Result<KernelKind, String> {
    let t = text.trim();
    let t = t.strip_prefix(['K', 'k']).unwrap_or(t);
    match t.parse::<usize>() {
        Ok(i @ 1..=4) => Ok(KernelKind::from_index(i).expect("index in range")),
        _ => Err(format!("kernel '{text}' must be one of 1, 2, 3, 4")),
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("'{v}' is not a number"))
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("'{v}' is not a non-negative integer"))
}

impl SimulationConfig {
    /// Parses a config file; `origin` labels error messages.
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Parse { path: origin.to_string(), line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "a" => self.a = parse_f64(value)?,
            "f0" => self.f0 = parse_f64(value)?,
            "B" => self.bandwidth = parse_f64(value)?,
            "dt" => self.dt = Some(parse_f64(value)?),
            "Nt" => self.nt = parse_usize(value)?,
            "Np" => self.np = parse_usize(value)?,
            "c" => self.c = parse_f64(value)?,
            "amplitude" => self.amplitude = parse_f64(value)?,
            "outdir" => self.outdir = PathBuf::from(value),
            "modes" => {
                self.modes = value.split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_mode).collect::<Result<_, _>>()?
            }
            "kernels" => {
                self.kernels = value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse_kernel).collect::<Result<_, _>>()?
            }
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "a = {}", fmt_f64(self.a));
        let _ = writeln!(s, "f0 = {}", fmt_f64(self.f0));
        let _ = writeln!(s, "B = {}", fmt_f64(self.bandwidth));
        if let Some(dt) = self.dt {
            let _ = writeln!(s, "dt = {}", fmt_f64(dt));
        }
        let _ = writeln!(s, "Nt = {}", self.nt);
        let _ = writeln!(s, "Np = {}", self.np);
        let modes: Vec<String> = self.modes.iter().map(|m| format!("{},{},{}", m.n, m.m, m.family)).collect();
        let _ = writeln!(s, "modes = {}", modes.join("; "));
        let kernels: Vec<String> = self.kernels.iter().map(|k| k.index().to_string()).collect();
        let _ = writeln!(s, "kernels = {}", kernels.join(","));
        let _ = writeln!(s, "c = {}", fmt_f64(self.c));
        let _ = writeln!(s, "amplitude = {}", fmt_f64(self.amplitude));
        let _ = writeln!(s, "outdir = {}", self.outdir.display());
        s
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(1.0 / (20.0 * (self.f0 + self.bandwidth)))
    }

    /// Highest resolvable degree `ceil(2 k_max a)` with `k_max = 2π(f0+B)/c`.
    pub fn max_degree(&self) -> usize {
        let k_max = 2.0 * PI * (self.f0 + self.bandwidth) / self.c;
        (2.0 * k_max * self.a).ceil() as usize
    }

    pub fn incident(&self) -> IncidentConfig {
        let mut inc = IncidentConfig::new(self.f0, self.bandwidth).with_amplitude(self.amplitude);
        inc.c = self.c;
        inc.eta = MU0 * self.c;
        inc
    }

    pub fn validate(&self) -> CliResult<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        for (name, v) in [("a", self.a), ("f0", self.f0), ("B", self.bandwidth), ("c", self.c), ("dt", self.dt())] {
            if !(v.is_finite() && v > 0.0) {
                return usage(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !self.amplitude.is_finite() {
            return usage("amplitude must be finite".into());
        }
        if self.nt == 0 {
            return usage("Nt must be at least 1".into());
        }
        if self.modes.is_empty() || self.kernels.is_empty() {
            return usage("at least one mode and one kernel are required".into());
        }
        let nm = self.max_degree();
        for mode in &self.modes {
            if mode.n > nm {
                return usage(format!("mode {mode}: degree {} exceeds N_m = {nm} = ceil(2 k_max a) for this band and radius", mode.n));
            }
        }
        Ok(())
    }

    /// Compatible `(mode, kernel)` pairs in request order.
    pub fn jobs(&self) -> CliResult<Vec<(ModeIndex, KernelKind)>> {
        let mut out = Vec::new();
        for mode in &self.modes {
            let before = out.len();
            for &k in &self.kernels {
                let eq = Equation::from_kernel(k)?;
                if eq.family() == mode.family {
                    out.push((*mode, k));
                }
            }
            if out.len() == before {
                let allowed = if mode.family == Family::Psi { "1 or 3" } else { "2 or 4" };
                return Err(CliError::Usage(format!("mode {mode} needs kernel {allowed} among the requested kernels")));
            }
        }
        Ok(out)
    }

    /// Distinct degrees in request order.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for m in &self.modes {
            if !out.contains(&m.n) {
                out.push(m.n);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_reference_setup() {
        let c = SimulationConfig::default();
        assert_eq!(c.max_degree(), 30);
        assert!((c.dt() - 1.0 / 14e9).abs() < 1e-25);
        assert_eq!(c.nt, 100_000);
        c.validate().unwrap();
    }

    #[test]
    fn round_trip_is_idempotent() {
        let text = "# run\nf0 = 0.4e9\nNt=10\nmodes = 3,1,psi ; 30,-1,phi\nkernels = 4,1\ndt = 1e-11\n";
        let c = SimulationConfig::parse(text, "t").unwrap();
        let s1 = c.serialize();
        let c2 = SimulationConfig::parse(&s1, "t").unwrap();
        assert_eq!(c, c2);
        assert_eq!(s1, c2.serialize());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = SimulationConfig::parse("a = 1\n\nNt = ten\n", "cfg.txt").unwrap_err();
        assert_eq!(e.to_string(), "cfg.txt:3: 'ten' is not a non-negative integer");
        let e = SimulationConfig::parse("bogus = 1", "x").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 1, .. }));
        assert!(SimulationConfig::parse("modes = 2,3,psi", "x").is_err());
        assert!(SimulationConfig::parse("modes = 0,0,psi", "x").is_err());
        assert!(SimulationConfig::parse("kernels = 5", "x").is_err());
    }

    #[test]
    fn degree_guard_cites_limit() {
        let mut c = SimulationConfig::default();
        c.modes = vec![ModeIndex::new(45, 1, Family::Psi).unwrap()];
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("N_m = 30"), "{msg}");
    }

    #[test]
    fn jobs_pair_families_with_kernels() {
        let mut c = SimulationConfig::default();
        c.modes = vec![ModeIndex::new(3, 1, Family::Psi).unwrap()];
        let jobs = c.jobs().unwrap();
        assert_eq!(jobs.iter().map(|j| j.1).collect::<Vec<_>>(), vec![KernelKind::K1, KernelKind::K3]);
        c.kernels = vec![KernelKind::K2];
        assert!(c.jobs().is_err());
    }
}
