use std::fs;
use std::path::Path;
use std::process::Command;

use tdmie::fdmie::{band_compare, td_to_fd, BandSpec};
use tdmie::kernels::KernelKind;
use tdmie::mot::CoefficientSeries;
use tdmie::vsh::{Family, ModeIndex};
use tdmie_cli::run::{run_compare, run_simulate, run_stability, series_file};
use tdmie_cli::SimulationConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tdmie"))
}

fn config(dir: &Path, modes: &[(usize, i64, Family)], kernels: &[KernelKind], nt: usize) -> SimulationConfig {
    SimulationConfig {
        modes: modes.iter().map(|&(n, m, f)| ModeIndex::new(n, m, f).unwrap()).collect(),
        kernels: kernels.to_vec(),
        nt,
        outdir: dir.to_path_buf(),
        ..SimulationConfig::default()
    }
}

fn read_series(dir: &Path, mode: &ModeIndex, kind: KernelKind) -> CoefficientSeries {
    CoefficientSeries::read_csv(&fs::read_to_string(dir.join(series_file(mode, kind))).unwrap(), kind).unwrap()
}

#[test]
fn simulate_efie_and_mfie_spectra_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[(3, 1, Family::Psi)], &[KernelKind::K1, KernelKind::K3], 3000);
    let out = run_simulate(&cfg).unwrap();
    assert_eq!(out.files.iter().filter(|f| f.to_string_lossy().starts_with("coeff_")).count(), 2);
    let mode = cfg.modes[0];
    let band = BandSpec::default();
    let a = td_to_fd(&read_series(dir.path(), &mode, KernelKind::K1), &band).unwrap();
    let b = td_to_fd(&read_series(dir.path(), &mode, KernelKind::K3), &band).unwrap();
    let err = band_compare(&a.values, &b.values).unwrap();
    assert!(err <= 1e-3, "{err:e}");
}

#[test]
fn zero_amplitude_gives_zero_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    fs::write(&cfg_path, format!("Nt = 10\namplitude = 0\nmodes = 3,1,phi\nkernels = 2,4\noutdir = {}\n", out.display())).unwrap();
    let st = bin().args(["simulate", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    for kind in [KernelKind::K2, KernelKind::K4] {
        let s = read_series(&out, &ModeIndex::new(3, 1, Family::Phi).unwrap(), kind);
        assert_eq!(s.nt(), 10);
        assert!(s.values().iter().all(|v| v.norm() == 0.0));
    }
}

#[test]
fn degree_guard_rejects_with_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin().args(["simulate", "--mode", "45,1,psi", "--nt", "5", "--outdir"]).arg(dir.path()).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("N_m = 30"));
}

#[test]
fn invalid_modes_and_flags_are_usage_errors() {
    for args in [vec!["simulate", "--mode", "2,3,psi"], vec!["simulate", "--mode", "0,0,phi"], vec!["simulate", "--kernel", "7"], vec!["frobnicate"]] {
        let st = bin().args(&args).output().unwrap();
        assert_eq!(st.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn config_parse_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfg");
    fs::write(&p, "a = 1\nNp = 2\nf0 = fast\n").unwrap();
    let st = bin().args(["stability", "--config"]).arg(&p).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("bad.cfg:3:"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        let mut cfg = config(d, &[(3, 1, Family::Phi), (5, -1, Family::Psi)], &KernelKind::SOLVER_KINDS, 400);
        cfg.outdir = d.to_path_buf();
        run_simulate(&cfg).unwrap();
    }
    let names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(names.len() >= 9);
    for n in names {
        if n == "manifest.txt" || n == "config.txt" {
            continue;
        }
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
    // manifests differ only through the outdir line of the config
    let ma = fs::read_to_string(a.path().join("manifest.txt")).unwrap();
    let mb = fs::read_to_string(b.path().join("manifest.txt")).unwrap();
    assert_eq!(ma.lines().skip(1).filter(|l| !l.ends_with("config.txt")).collect::<Vec<_>>(), mb.lines().skip(1).filter(|l| !l.ends_with("config.txt")).collect::<Vec<_>>());
    assert!(ma.lines().next().unwrap().starts_with("config_sha256 "));
}

#[test]
fn stability_reports_per_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[(30, 1, Family::Psi)], &KernelKind::SOLVER_KINDS, 1);
    let out = run_stability(&cfg).unwrap();
    let eig: Vec<_> = out.files.iter().filter(|f| f.to_string_lossy().starts_with("eig_")).collect();
    assert_eq!(eig.len(), 4);
    let summary = fs::read_to_string(dir.path().join("stability_summary.txt")).unwrap();
    let line = |k: &str| summary.lines().find(|l| l.starts_with(k)).unwrap().to_string();
    assert!(line("K1 ").contains("on_circle=1"), "{summary}");
    let rho = |l: String| -> f64 { l.split("rho=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap() };
    assert!(rho(line("K3 ")) < 1.0);
    assert!(rho(line("K4 ")) < 1.0);
    // K2 carries an exact static eigenvalue at 1
    assert!(rho(line("K2 ")) <= 1.0 + 1e-8);
    let csv = fs::read_to_string(dir.path().join("eig_K1_n30.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("re,im,abs"));
}

#[test]
fn compare_sweep_and_peak_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[(3, 1, Family::Phi), (30, 1, Family::Phi)], &[KernelKind::K2], 3000);
    let out = run_compare(&cfg, None, Some(6)).unwrap();
    let conv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let errs: Vec<f64> = conv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("phi_3_1,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(errs.len(), 6);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let ratio_line = out.messages.iter().find(|m| m.starts_with("peak ratio phi_3_1/phi_30_1")).unwrap();
    let ratio: f64 = ratio_line.rsplit("= ").next().unwrap().parse().unwrap();
    assert!(ratio >= 100.0, "{ratio_line}");
    let table = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    for l in table.lines().skip(1) {
        let e: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!(e <= 1e-2, "{l}");
    }
}

#[test]
fn compare_reads_series_and_reports_missing() {
    let sim = tempfile::tempdir().unwrap();
    let cmp = tempfile::tempdir().unwrap();
    let cfg = config(sim.path(), &[(3, 1, Family::Psi)], &[KernelKind::K3], 3000);
    run_simulate(&cfg).unwrap();
    let cfg2 = SimulationConfig { outdir: cmp.path().to_path_buf(), ..cfg.clone() };
    run_compare(&cfg2, Some(sim.path()), None).unwrap();
    assert!(cmp.path().join("compare_psi_3_1_K3.csv").is_file());

    let st = bin()
        .args(["compare", "--mode", "3,1,psi", "--kernel", "1", "--nt", "100", "--series-dir"])
        .arg(sim.path())
        .arg("--outdir")
        .arg(cmp.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("missing series file"));
}

#[test]
fn plots_are_deterministic_and_validate_input() {
    let dir = tempfile::tempdir().unwrap();
    let eig = dir.path().join("eig.csv");
    fs::write(&eig, "re,im,abs\n0.5,0.1,0.5099\n-0.2,0.9,0.922\n").unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let svg = dir.path().join(format!("e{i}.svg"));
        let st = bin().args(["plot", "--kind", "eigenmap"]).arg(&eig).arg("-o").arg(&svg).output().unwrap();
        assert!(st.status.success());
        outputs.push(fs::read(&svg).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(String::from_utf8_lossy(&outputs[0]).contains("unit-circle"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,re,im\n0,1,2\n1,x,3\n").unwrap();
    let st = bin().args(["plot", "--kind", "timeseries"]).arg(&bad).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("bad.csv:3:"));

    let sim = tempfile::tempdir().unwrap();
    let cfg = config(sim.path(), &[(3, 1, Family::Psi)], &[KernelKind::K1], 1500);
    run_simulate(&cfg).unwrap();
    for (file, kind) in [("trace_psi_3_1_K1.csv", "timeseries"), ("coeff_psi_3_1_K1.csv", "timeseries")] {
        let st = bin().args(["plot", "--kind", kind]).arg(sim.path().join(file)).output().unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        let svg = fs::read_to_string(sim.path().join(file).with_extension("svg")).unwrap();
        assert!(svg.contains("<polyline"));
    }
    let cmp = tempfile::tempdir().unwrap();
    run_compare(&SimulationConfig { outdir: cmp.path().to_path_buf(), ..cfg }, None, None).unwrap();
    let st = bin().args(["plot", "--kind", "spectrum"]).arg(cmp.path().join("compare_psi_3_1_K1.csv")).output().unwrap();
    assert!(st.status.success());
}
