//! Pipelines behind the `simulate`, `stability` and `compare` subcommands.
//!
//! Independent `(mode, kernel)` jobs run on the rayon pool; each job writes its
//! own files and the orchestrator writes summaries and the manifest afterwards.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tdmie::fdmie::{band_compare, fd_mode_solution, td_to_fd, write_comparison_csv, BandSpec};
use tdmie::kernels::{build_kernel, KernelKind};
use tdmie::mot::{assemble_system, simulate_mode, CoefficientSeries, TemporalBasisConfig};
use tdmie::stability::{build_companion, eigen_spectrum, SpectrumReport, UNIT_CIRCLE_TOL};
use tdmie::vsh::ModeIndex;
use tdmie::MU0;

use crate::config::{fmt_f64, SimulationConfig};
use crate::error::{job, CliError, CliResult};
use crate::manifest::{write_manifest, MANIFEST_NAME};

/// Samples per step in the reconstructed time trace.
pub const TRACE_OVERSAMPLE: usize = 2;
pub const CONFIG_NAME: &str = "config.txt";
pub const BAND_POINTS: usize = 21;

/// Files written by a run (relative to the output directory) and log lines.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

pub fn series_file(mode: &ModeIndex, kind: KernelKind) -> String {
    format!("coeff_{mode}_{kind}.csv")
}

pub fn trace_file(mode: &ModeIndex, kind: KernelKind) -> String {
    format!("trace_{mode}_{kind}.csv")
}

pub fn eigen_file(kind: KernelKind, n: usize) -> String {
    format!("eig_{kind}_n{n}.csv")
}

pub fn comparison_file(mode: &ModeIndex, kind: KernelKind) -> String {
    format!("compare_{mode}_{kind}.csv")
}

fn basis(cfg: &SimulationConfig, np: usize) -> CliResult<TemporalBasisConfig> {
    Ok(TemporalBasisConfig::new(cfg.dt(), np, cfg.nt)?)
}

/// Analysis band `[f0 − B, f0 + B]`, clipped away from DC.
pub fn band(cfg: &SimulationConfig) -> CliResult<BandSpec> {
    let lo = (cfg.f0 - cfg.bandwidth).max(0.05 * cfg.f0);
    Ok(BandSpec::new(lo, cfg.f0 + cfg.bandwidth, BAND_POINTS)?)
}

fn create(outdir: &Path, name: &str) -> CliResult<BufWriter<fs::File>> {
    let path = outdir.join(name);
    Ok(BufWriter::new(fs::File::create(&path).map_err(CliError::io(&path))?))
}

fn write_text(outdir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    let path = outdir.join(name);
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(PathBuf::from(name))
}

fn prepare(cfg: &SimulationConfig) -> CliResult<PathBuf> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.outdir).map_err(CliError::io(&cfg.outdir))?;
    write_text(&cfg.outdir, CONFIG_NAME, &cfg.serialize())
}

/// Manifest over every regular file in the output directory.
fn finish(cfg: &SimulationConfig, out: &mut RunOutput) -> CliResult<()> {
    let dir = &cfg.outdir;
    let mut all = Vec::new();
    for entry in fs::read_dir(dir).map_err(CliError::io(dir))? {
        let entry = entry.map_err(CliError::io(dir))?;
        let name = entry.file_name();
        if entry.file_type().map_err(CliError::io(entry.path()))?.is_file() && name != MANIFEST_NAME {
            all.push(PathBuf::from(name));
        }
    }
    write_manifest(dir, &cfg.serialize(), &all)?;
    out.files.sort();
    out.files.dedup();
    Ok(())
}

fn io_write(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: e }
}

fn march_job(cfg: &SimulationConfig, mode: &ModeIndex, kind: KernelKind, np: usize) -> CliResult<CoefficientSeries> {
    let b = basis(cfg, np)?;
    simulate_mode(&cfg.incident(), mode, kind, cfg.a, &b).map_err(job(format!("{mode} {kind}")))
}

fn write_series(cfg: &SimulationConfig, mode: &ModeIndex, kind: KernelKind, series: &CoefficientSeries) -> CliResult<Vec<PathBuf>> {
    let dir = &cfg.outdir;
    let name = series_file(mode, kind);
    let path = dir.join(&name);
    let mut w = create(dir, &name)?;
    series.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_write(&path))?;

    let tname = trace_file(mode, kind);
    let tpath = dir.join(&tname);
    let mut w = create(dir, &tname)?;
    let h = series.dt / TRACE_OVERSAMPLE as f64;
    let res: std::io::Result<()> = (|| {
        writeln!(w, "t,re,im")?;
        for i in 0..series.nt() * TRACE_OVERSAMPLE {
            let t = (i as f64 + 0.5) * h;
            let v = series.reconstruct(t);
            writeln!(w, "{},{},{}", fmt_f64(t), fmt_f64(v.re), fmt_f64(v.im))?;
        }
        w.flush()
    })();
    res.map_err(io_write(&tpath))?;
    Ok(vec![PathBuf::from(name), PathBuf::from(tname)])
}

/// Marches every compatible `(mode, kernel)` pair and writes coefficient and trace CSVs.
pub fn run_simulate(cfg: &SimulationConfig) -> CliResult<RunOutput> {
    let mut out = RunOutput { files: vec![prepare(cfg)?], ..Default::default() };
    let jobs = cfg.jobs()?;
    let results: Vec<CliResult<(Vec<PathBuf>, String)>> = jobs
        .par_iter()
        .map(|(mode, kind)| {
            let series = march_job(cfg, mode, *kind, cfg.np)?;
            if !series.all_finite() {
                return Err(CliError::Job { label: format!("{mode} {kind}"), source: tdmie::Error::Domain("march produced non-finite values".into()) });
            }
            let files = write_series(cfg, mode, *kind, &series)?;
            Ok((files, format!("{mode} {kind}: peak={} steps={}", fmt_f64(series.peak()), series.nt())))
        })
        .collect();
    for r in results {
        let (files, msg) = r?;
        out.files.extend(files);
        out.messages.push(msg);
    }
    finish(cfg, &mut out)?;
    Ok(out)
}

fn spectrum_job(cfg: &SimulationConfig, kind: KernelKind, n: usize) -> CliResult<SpectrumReport> {
    let label = format!("{kind} n={n} Np={}", cfg.np);
    let kernel = build_kernel(kind, n, cfg.a, cfg.c, MU0).map_err(job(&label))?;
    let b = TemporalBasisConfig::new(cfg.dt(), cfg.np, 1)?;
    let blocks = assemble_system(&kernel, &b).map_err(job(&label))?;
    let system = build_companion(&blocks).map_err(job(&label))?;
    eigen_spectrum(&system, UNIT_CIRCLE_TOL).map_err(job(&label))
}

/// Companion-matrix spectrum per `(kernel, degree)`.
pub fn run_stability(cfg: &SimulationConfig) -> CliResult<RunOutput> {
    let mut out = RunOutput { files: vec![prepare(cfg)?], ..Default::default() };
    let pairs: Vec<(KernelKind, usize)> =
        cfg.kernels.iter().flat_map(|&k| cfg.degrees().into_iter().map(move |n| (k, n))).collect();
    let results: Vec<CliResult<(PathBuf, String)>> = pairs
        .par_iter()
        .map(|&(kind, n)| {
            let rep = spectrum_job(cfg, kind, n)?;
            let name = eigen_file(kind, n);
            let path = cfg.outdir.join(&name);
            let mut w = create(&cfg.outdir, &name)?;
            rep.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_write(&path))?;
            let line = format!("{kind} n={n} Np={} {} outside={}", cfg.np, rep.summary_line(), rep.outside_count);
            Ok((PathBuf::from(name), line))
        })
        .collect();
    let mut summary = String::new();
    for r in results {
        let (file, line) = r?;
        out.files.push(file);
        summary.push_str(&line);
        summary.push('\n');
        out.messages.push(line);
    }
    out.files.push(write_text(&cfg.outdir, "stability_summary.txt", &summary)?);
    finish(cfg, &mut out)?;
    Ok(out)
}

fn load_series(dir: &Path, mode: &ModeIndex, kind: KernelKind) -> CliResult<CoefficientSeries> {
    let path = dir.join(series_file(mode, kind));
    if !path.is_file() {
        return Err(CliError::MissingSeries(path));
    }
    let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
    Ok(CoefficientSeries::read_csv(&text, kind).map_err(job(path.display().to_string()))?.with_mode(*mode))
}

struct CompareRow {
    mode: ModeIndex,
    kind: KernelKind,
    error: f64,
    peak: f64,
    decay: f64,
}

/// TD-vs-FD band errors per job, an optional `Np = 1..=sweep` convergence
/// table, and peak ratios between degrees.
pub fn run_compare(cfg: &SimulationConfig, series_dir: Option<&Path>, sweep: Option<usize>) -> CliResult<RunOutput> {
    let mut out = RunOutput { files: vec![prepare(cfg)?], ..Default::default() };
    let jobs = cfg.jobs()?;
    let band = band(cfg)?;
    let inc = cfg.incident();
    let results: Vec<CliResult<(CompareRow, PathBuf, Option<String>)>> = jobs
        .par_iter()
        .map(|(mode, kind)| {
            let label = format!("{mode} {kind}");
            let series = match series_dir {
                Some(dir) => load_series(dir, mode, *kind)?,
                None => march_job(cfg, mode, *kind, cfg.np)?,
            };
            let td = td_to_fd(&series, &band).map_err(job(&label))?;
            let fd = fd_mode_solution(mode, *kind, &band, &inc, cfg.a).map_err(job(&label))?;
            let error = band_compare(&td.values, &fd.values).map_err(job(&label))?;
            let name = comparison_file(mode, *kind);
            let path = cfg.outdir.join(&name);
            let mut w = create(&cfg.outdir, &name)?;
            write_comparison_csv(&mut w, &td.freqs, &td.values, &fd.values).and_then(|_| w.flush()).map_err(io_write(&path))?;
            let warning = td.warning().map(|w| format!("{label}: {w}"));
            Ok((CompareRow { mode: *mode, kind: *kind, error, peak: series.peak(), decay: td.decay_ratio }, PathBuf::from(name), warning))
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        let (row, file, warning) = r?;
        out.files.push(file);
        out.messages.extend(warning);
        rows.push(row);
    }

    let mut table = String::from("mode,kernel,np,band_error,peak,decay_ratio\n");
    for r in &rows {
        table.push_str(&format!("{},{},{},{},{},{}\n", r.mode, r.kind, cfg.np, fmt_f64(r.error), fmt_f64(r.peak), fmt_f64(r.decay)));
        out.messages.push(format!("{} {}: band error {}", r.mode, r.kind, fmt_f64(r.error)));
    }
    out.files.push(write_text(&cfg.outdir, "compare.csv", &table)?);

    let mut summary = String::new();
    for a in &rows {
        for b in &rows {
            if a.kind == b.kind && a.mode.family == b.mode.family && a.mode.n < b.mode.n && b.peak > 0.0 {
                let line = format!("peak ratio {}/{} {} = {}", a.mode, b.mode, a.kind, fmt_f64(a.peak / b.peak));
                summary.push_str(&line);
                summary.push('\n');
                out.messages.push(line);
            }
        }
    }

    if let Some(max_np) = sweep {
        if max_np == 0 {
            return Err(CliError::Usage("--sweep needs a maximum order of at least 1".into()));
        }
        let cells: Vec<(usize, ModeIndex, KernelKind)> =
            (1..=max_np).flat_map(|np| jobs.iter().map(move |(m, k)| (np, *m, *k))).collect();
        let errors: Vec<CliResult<f64>> = cells
            .par_iter()
            .map(|(np, mode, kind)| {
                let label = format!("{mode} {kind} Np={np}");
                let series = march_job(cfg, mode, *kind, *np)?;
                let td = td_to_fd(&series, &band).map_err(job(&label))?;
                let fd = fd_mode_solution(mode, *kind, &band, &inc, cfg.a).map_err(job(&label))?;
                band_compare(&td.values, &fd.values).map_err(job(&label))
            })
            .collect();
        let errors: Vec<f64> = errors.into_iter().collect::<CliResult<_>>()?;
        let mut conv = String::from("mode,kernel,np,band_error\n");
        for ((np, mode, kind), e) in cells.iter().zip(&errors) {
            conv.push_str(&format!("{mode},{kind},{np},{}\n", fmt_f64(*e)));
        }
        for (j, (mode, kind)) in jobs.iter().enumerate() {
            let col: Vec<f64> = (0..max_np).map(|i| errors[i * jobs.len() + j]).collect();
            let decreasing = col.windows(2).all(|w| w[1] < w[0]);
            let line = format!("convergence {mode} {kind}: Np=1..{max_np} strictly decreasing={decreasing}");
            summary.push_str(&line);
            summary.push('\n');
            out.messages.push(line);
        }
        out.files.push(write_text(&cfg.outdir, "convergence.csv", &conv)?);
    }
    out.files.push(write_text(&cfg.outdir, "compare_summary.txt", &summary)?);
    finish(cfg, &mut out)?;
    Ok(out)
}
