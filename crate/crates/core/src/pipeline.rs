//! End-to-end jobs: forward data generation, reconstruction and round trips.

use crate::error::{Error, Result};
use crate::forward::RobinProblem;
use crate::glevitan::{build_g, extract_potential, solve_all, KernelOptions, WeylData};
use crate::invariants::{run_suite, InvariantReport, SuiteTolerances};
use crate::io;
use crate::medium::{schrodinger_from_love, shear_from_two_potentials, PotentialGrid, ShearProfile};
use crate::numeric::uniform_grid;
use crate::spectrum::{
    jost_from_zeros, norming_constants, spectrum_data, validate_weyl_class, Calibration, JumpTable,
    Pole, SpectralMeasure, SpectrumData, SpectrumOptions, WeylClassReport, WeylEvaluator,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Job kind, matching the CLI subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Forward,
    Spectrum,
    Reconstruct,
    Roundtrip,
}

/// Where the reconstruction takes `f_h` on the real axis from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JostSource {
    /// The stored jump samples and norming constants.
    #[default]
    Samples,
    /// The truncated Hadamard product over the stored zeros.
    Hadamard,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Points of the reconstruction grid.
    pub n: usize,
    /// End of the reconstruction grid; defaults to the support bound.
    pub x_max: Option<f64>,
    pub k_max: f64,
    pub dk: f64,
    pub truncation_radius: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 2001,
            x_max: None,
            k_max: 200.0,
            dk: 0.05,
            truncation_radius: 40.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub tau_max: Option<f64>,
    pub resonance_depth: f64,
    pub resonance_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tau_max: None,
            resonance_depth: 10.0,
            resonance_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub potential_sup: f64,
    pub h: f64,
    pub shear_rel_sup: f64,
    /// Allowed mismatch between the differentiated and integrated diagonal identities.
    pub extraction: f64,
    pub gl_residual: f64,
    pub quadrature_resolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            potential_sup: 5e-2,
            h: 2e-2,
            shear_rel_sup: 1e-1,
            extraction: 1e-3,
            gl_residual: 1e-9,
            quadrature_resolution: 2e-2,
        }
    }
}

/// JSON job description. Relative paths are resolved against the config file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Shear profile CSV (with sidecar).
    #[serde(default)]
    pub profile: Option<PathBuf>,
    /// Potential CSV (with sidecar), used instead of a profile.
    #[serde(default)]
    pub potential: Option<PathBuf>,
    /// Spectral data files, one per frequency, for `reconstruct`.
    #[serde(default)]
    pub spectra: Vec<PathBuf>,
    #[serde(default)]
    pub omegas: Vec<f64>,
    #[serde(default)]
    pub mu_hat_tail: Option<f64>,
    #[serde(default)]
    pub x_support: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub jost_source: JostSource,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl JobConfig {
    /// Reads a config and resolves its paths.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: JobConfig = io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.profile.as_mut().map(fix);
        cfg.potential.as_mut().map(fix);
        cfg.spectra.iter_mut().for_each(fix);
        Ok(cfg)
    }

    /// Checks the parts of the config a job needs before any computation starts.
    pub fn check(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(Error::Config(format!("config is for {m:?} but {mode:?} was requested")));
            }
        }
        let distinct_pair = || -> Result<()> {
            match self.omegas.as_slice() {
                [a, b] if a != b && a.is_finite() && b.is_finite() => Ok(()),
                [a, b] if a == b => Err(Error::Config(format!(
                    "shear recovery needs two distinct frequencies, got {a} twice"
                ))),
                other => Err(Error::Config(format!(
                    "shear recovery needs exactly two frequencies, got {}",
                    other.len()
                ))),
            }
        };
        match mode {
            Mode::Forward | Mode::Spectrum => {
                self.input()?;
                if self.profile.is_some() && self.omegas.is_empty() {
                    return Err(Error::Config("a profile needs at least one frequency in `omegas`".into()));
                }
            }
            Mode::Reconstruct => {
                if self.spectra.is_empty() {
                    return Err(Error::Config("reconstruct needs `spectra`".into()));
                }
                if self.x_support.is_none() {
                    return Err(Error::Config("reconstruct needs `x_support`".into()));
                }
                if self.mu_hat_tail.is_some() {
                    distinct_pair()?;
                    if self.spectra.len() != 2 {
                        return Err(Error::Config("shear recovery needs two spectra, one per frequency".into()));
                    }
                }
            }
            Mode::Roundtrip => {
                self.input()?;
                if self.profile.is_some() {
                    distinct_pair()?;
                }
            }
        }
        if self.grid.n < 5 {
            return Err(Error::Config(format!("grid.n = {} is below 5", self.grid.n)));
        }
        Ok(())
    }

    fn input(&self) -> Result<()> {
        match (&self.profile, &self.potential) {
            (Some(_), Some(_)) => Err(Error::Config("give either `profile` or `potential`, not both".into())),
            (None, None) => Err(Error::Config("missing input: `profile` or `potential`".into())),
            _ => Ok(()),
        }
    }

    fn spectrum_options(&self) -> SpectrumOptions {
        SpectrumOptions {
            tau_max: self.search.tau_max,
            truncation_radius: self.grid.truncation_radius,
            resonance_depth: self.search.resonance_depth,
            resonance_tol: self.search.resonance_tol,
            k_max: self.grid.k_max,
            dk: self.grid.dk,
        }
    }
}

/// One forward problem with its label.
#[derive(Clone, Debug)]
pub struct Case {
    pub omega: Option<f64>,
    pub problem: RobinProblem,
}

impl Case {
    fn tag(&self, i: usize) -> String {
        match self.omega {
            Some(_) => format!("w{}", i + 1),
            None => "v".into(),
        }
    }
}

/// Forward problems described by the config.
pub fn load_cases(cfg: &JobConfig) -> Result<(Vec<Case>, Option<ShearProfile>)> {
    if let Some(p) = &cfg.profile {
        let profile = io::read_profile(p)?;
        let mut cases = Vec::new();
        for &w in &cfg.omegas {
            let (pot, h) = schrodinger_from_love(&profile, w).map_err(|e| e.in_stage("medium", format!("ω = {w}")))?;
            cases.push(Case {
                omega: Some(w),
                problem: RobinProblem::new(pot, h)?,
            });
        }
        Ok((cases, Some(profile)))
    } else if let Some(p) = &cfg.potential {
        let (pot, h) = io::read_potential(p)?;
        Ok((
            vec![Case {
                omega: None,
                problem: RobinProblem::new(pot, h)?,
            }],
            None,
        ))
    } else {
        Err(Error::Config("missing input: `profile` or `potential`".into()))
    }
}

/// Outcome of a job: whether every tolerance held, plus the files written.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub passed: bool,
    pub failures: Vec<String>,
    pub written: Vec<PathBuf>,
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.display().to_string(),
        source,
    })
}

/// Spectral data of one case.
pub fn case_spectrum(cfg: &JobConfig, case: &Case) -> Result<SpectrumData> {
    let label = case.omega.map_or("potential input".to_string(), |w| format!("ω = {w}"));
    let data = spectrum_data(&case.problem, &cfg.spectrum_options()).map_err(|e| e.in_stage("spectrum", label.clone()))?;
    data.validate(1e-8).map_err(|e| e.in_stage("spectrum", label))?;
    Ok(data)
}

/// Potentials and spectral data for every case.
pub fn run_forward(cfg: &JobConfig, out: &Path) -> Result<Outcome> {
    cfg.check(Mode::Forward)?;
    ensure_dir(out)?;
    let (cases, _) = load_cases(cfg)?;
    let mut written = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let tag = case.tag(i);
        let pot_path = out.join(format!("potential_{tag}.csv"));
        io::write_potential(&pot_path, &case.problem.potential, case.problem.h)?;
        written.push(pot_path);
        let data = case_spectrum(cfg, case)?;
        log::info!(
            "{tag}: {} eigenvalues, {} resonances, truncation radius {}",
            data.eigen_k.len(),
            data.resonance_k.len(),
            data.truncation_radius
        );
        let spec_path = out.join(format!("spectrum_{tag}.json"));
        io::write_spectrum(&spec_path, &data)?;
        written.push(spec_path);
    }
    Ok(Outcome {
        passed: true,
        failures: vec![],
        written,
    })
}

/// Report of the `spectrum` job for one case.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub omega: Option<f64>,
    pub eigenvalues: usize,
    pub resonances: usize,
    pub weyl_class: WeylClassReport,
    pub invariants: InvariantReport,
}

/// Spectral data plus the Weyl-class and invariant checks.
pub fn run_spectrum(cfg: &JobConfig, out: &Path) -> Result<Outcome> {
    cfg.check(Mode::Spectrum)?;
    ensure_dir(out)?;
    let (cases, _) = load_cases(cfg)?;
    let mut written = Vec::new();
    let mut failures = Vec::new();
    let mut reports = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let tag = case.tag(i);
        let data = case_spectrum(cfg, case)?;
        let spec_path = out.join(format!("spectrum_{tag}.json"));
        io::write_spectrum(&spec_path, &data)?;
        written.push(spec_path);
        let weyl_class = validate_weyl_class(&WeylEvaluator::Forward(case.problem.clone()), Some(case.problem.h))
            .map_err(|e| e.in_stage("weyl-class", tag.clone()))?;
        let invariants = run_suite(&case.problem, &data, None, &SuiteTolerances::default())
            .map_err(|e| e.in_stage("invariants", tag.clone()))?;
        if !weyl_class.passed() {
            failures.push(format!("{tag}: Weyl-class conditions failed"));
        }
        for f in invariants.failures() {
            failures.push(format!("{tag}: invariant {} failed ({})", f.name, f.result.detail));
        }
        reports.push(SpectrumReport {
            omega: case.omega,
            eigenvalues: data.eigen_k.len(),
            resonances: data.resonance_k.len(),
            weyl_class,
            invariants,
        });
    }
    let report_path = out.join("spectrum_report.json");
    io::write_json(&report_path, &reports)?;
    written.push(report_path);
    Ok(Outcome {
        passed: failures.is_empty(),
        failures,
        written,
    })
}

/// Result of reconstructing one potential.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub potential: PotentialGrid,
    pub h: f64,
    pub gl_residual: f64,
    pub identity_mismatch: f64,
    pub condition_estimate: f64,
    pub measure: SpectralMeasure,
}

/// Spectral measure from stored data, via the samples or the Hadamard product.
pub fn measure_from_data(data: &SpectrumData, source: JostSource, k_max: f64, dk: f64) -> Result<SpectralMeasure> {
    match source {
        JostSource::Samples => SpectralMeasure::from_data(data),
        JostSource::Hadamard => {
            let r = data.truncation_radius;
            let f = jost_from_zeros(&data.all_zeros(), r, &Calibration::for_radius(r))?;
            let alphas = norming_constants(&f, &data.eigen_k)?;
            Ok(SpectralMeasure {
                poles: data.eigen_k.iter().zip(alphas).map(|(&k, alpha)| Pole { k, alpha }).collect(),
                jump: JumpTable::from_jost(&f, k_max, dk)?,
            })
        }
    }
}

/// Weyl data → `g` → `K` → `(V, h)` on `n` points over `[0, x_max]`.
pub fn reconstruct_potential(
    measure: SpectralMeasure,
    n: usize,
    x_max: f64,
    x_support: f64,
    tol: &Tolerances,
) -> Result<Reconstruction> {
    let w = WeylData::new(measure).map_err(|e| e.in_stage("weyl-data", "spectral measure"))?;
    let grid = uniform_grid(n, x_max);
    let g = build_g(
        &w,
        &grid,
        &KernelOptions {
            resolution_tol: tol.quadrature_resolution,
        },
    )
    .map_err(|e| e.in_stage("kernel", format!("K_max = {}", w.k_cutoff)))?;
    let sol = solve_all(&g).map_err(|e| e.in_stage("gelfand-levitan", format!("N = {n}")))?;
    let ext = extract_potential(&sol.kernel.diagonal(), &grid, x_support, f64::INFINITY)
        .map_err(|e| e.in_stage("extraction", format!("x_I = {x_support}")))?;
    Ok(Reconstruction {
        potential: ext.potential,
        h: ext.h,
        gl_residual: sol.max_residual,
        identity_mismatch: ext.identity_mismatch,
        condition_estimate: sol.condition_estimate,
        measure: w.measure,
    })
}

fn reconstruction_failures(tag: &str, r: &Reconstruction, tol: &Tolerances) -> Vec<String> {
    let mut f = Vec::new();
    if !(r.gl_residual <= tol.gl_residual) {
        f.push(format!("{tag}: GL residual {:.3e} above {:.1e}", r.gl_residual, tol.gl_residual));
    }
    if !(r.identity_mismatch <= tol.extraction) {
        f.push(format!(
            "{tag}: diagonal identity mismatch {:.3e} above {:.1e}",
            r.identity_mismatch, tol.extraction
        ));
    }
    f
}

/// Potentials (and the shear modulus, given two frequencies) from stored spectral data.
pub fn run_reconstruct(cfg: &JobConfig, out: &Path) -> Result<Outcome> {
    cfg.check(Mode::Reconstruct)?;
    ensure_dir(out)?;
    let x_support = cfg.x_support.expect("checked");
    let x_max = cfg.grid.x_max.unwrap_or(x_support);
    let mut written = Vec::new();
    let mut failures = Vec::new();
    let mut recovered = Vec::new();
    for (i, path) in cfg.spectra.iter().enumerate() {
        let tag = format!("w{}", i + 1);
        let data = io::read_spectrum(path)?;
        data.validate(1e-8).map_err(|e| e.in_stage("spectrum", path.display().to_string()))?;
        let measure = measure_from_data(&data, cfg.jost_source, cfg.grid.k_max, cfg.grid.dk)
            .map_err(|e| e.in_stage("jost", path.display().to_string()))?;
        let r = reconstruct_potential(measure, cfg.grid.n, x_max, x_support, &cfg.tolerances)?;
        log::info!("{tag}: h = {:.6}, GL residual {:.2e}", r.h, r.gl_residual);
        failures.extend(reconstruction_failures(&tag, &r, &cfg.tolerances));
        let p = out.join(format!("potential_recovered_{tag}.csv"));
        io::write_potential(&p, &r.potential, r.h)?;
        written.push(p);
        recovered.push(r);
    }
    if let Some(tail) = cfg.mu_hat_tail {
        let profile = shear_from_two_potentials(
            &recovered[0].potential,
            &recovered[1].potential,
            cfg.omegas[0],
            cfg.omegas[1],
            tail,
        )
        .map_err(|e| e.in_stage("shear", format!("ω = {:?}", cfg.omegas)))?;
        let p = out.join("profile_recovered.csv");
        io::write_profile(&p, &profile)?;
        written.push(p);
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        failures,
        written,
    })
}

/// Errors of one frequency in a round trip.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyReport {
    pub omega: Option<f64>,
    pub eigenvalues: usize,
    pub resonances: usize,
    pub potential_sup_error: f64,
    pub potential_l1_error: f64,
    pub h_true: f64,
    pub h_recovered: f64,
    pub h_error: f64,
    pub gl_residual: f64,
    pub identity_mismatch: f64,
    pub condition_estimate: f64,
    pub weyl_class: WeylClassReport,
    pub invariants: InvariantReport,
}

/// Round-trip report.
#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub frequencies: Vec<FrequencyReport>,
    pub shear_rel_sup_error: Option<f64>,
    pub shear_rel_l1_error: Option<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Linear interpolation of `(xs, ys)` at `x` (clamped to the table).
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Sup and trapezoid-L¹ norms of `a − b` on a shared uniform grid.
pub fn error_norms(grid: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    let sup = d.iter().fold(0.0f64, |m, v| m.max(*v));
    let dx = grid[1] - grid[0];
    let l1 = d.windows(2).map(|p| 0.5 * dx * (p[0] + p[1])).sum();
    (sup, l1)
}

/// Forward data → reconstruction → comparison with the input.
pub fn roundtrip(cfg: &JobConfig) -> Result<RoundtripReport> {
    cfg.check(Mode::Roundtrip)?;
    let (cases, profile) = load_cases(cfg)?;
    let tol = &cfg.tolerances;
    let mut frequencies = Vec::new();
    let mut failures = Vec::new();
    let mut recovered = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let tag = case.tag(i);
        let prob = &case.problem;
        let x_support = prob.potential.x_support;
        let x_max = cfg.grid.x_max.unwrap_or(x_support);
        let data = case_spectrum(cfg, case)?;
        let measure = measure_from_data(&data, cfg.jost_source, cfg.grid.k_max, cfg.grid.dk)
            .map_err(|e| e.in_stage("jost", tag.clone()))?;
        let r = reconstruct_potential(measure, cfg.grid.n, x_max, x_support, tol)?;
        let truth: Vec<f64> = r
            .potential
            .grid_x
            .iter()
            .map(|&x| interpolate(&prob.potential.grid_x, &prob.potential.v, x))
            .collect();
        let (sup, l1) = error_norms(&r.potential.grid_x, &r.potential.v, &truth);
        let h_error = (r.h - prob.h).abs();
        log::info!("{tag}: sup |ΔV| = {sup:.3e}, |Δh| = {h_error:.3e}");
        failures.extend(reconstruction_failures(&tag, &r, tol));
        if !(sup <= tol.potential_sup) {
            failures.push(format!("{tag}: potential sup error {sup:.3e} above {:.1e}", tol.potential_sup));
        }
        if !(h_error <= tol.h) {
            failures.push(format!("{tag}: h error {h_error:.3e} above {:.1e}", tol.h));
        }
        let weyl_class = validate_weyl_class(&WeylEvaluator::Spectral(r.measure.clone()), Some(prob.h))
            .map_err(|e| e.in_stage("weyl-class", tag.clone()))?;
        if !weyl_class.passed() {
            failures.push(format!("{tag}: Weyl-class conditions failed on the spectral representation"));
        }
        let g = build_g(
            &WeylData::new(r.measure.clone())?,
            &uniform_grid(cfg.grid.n.min(401), x_max),
            &KernelOptions {
                resolution_tol: tol.quadrature_resolution,
            },
        )?;
        let invariants = run_suite(prob, &data, Some(&g), &SuiteTolerances::default())
            .map_err(|e| e.in_stage("invariants", tag.clone()))?;
        for f in invariants.failures() {
            failures.push(format!("{tag}: invariant {} failed ({})", f.name, f.result.detail));
        }
        frequencies.push(FrequencyReport {
            omega: case.omega,
            eigenvalues: data.eigen_k.len(),
            resonances: data.resonance_k.len(),
            potential_sup_error: sup,
            potential_l1_error: l1,
            h_true: prob.h,
            h_recovered: r.h,
            h_error,
            gl_residual: r.gl_residual,
            identity_mismatch: r.identity_mismatch,
            condition_estimate: r.condition_estimate,
            weyl_class,
            invariants,
        });
        recovered.push(r);
    }
    let (mut shear_sup, mut shear_l1) = (None, None);
    if let Some(profile) = profile {
        let rec = shear_from_two_potentials(
            &recovered[0].potential,
            &recovered[1].potential,
            cfg.omegas[0],
            cfg.omegas[1],
            profile.mu_hat_tail,
        )
        .map_err(|e| e.in_stage("shear", format!("ω = {:?}", cfg.omegas)))?;
        let truth: Vec<f64> = rec
            .grid_x
            .iter()
            .map(|&x| interpolate(&profile.grid_x, &profile.mu_hat, x))
            .collect();
        let rel: Vec<f64> = rec.mu_hat.iter().zip(&truth).map(|(a, b)| (a - b) / b).collect();
        let (sup, l1) = error_norms(&rec.grid_x, &rel, &vec![0.0; rel.len()]);
        if !(sup <= tol.shear_rel_sup) {
            failures.push(format!(
                "shear modulus relative sup error {sup:.3e} above {:.1e}",
                tol.shear_rel_sup
            ));
        }
        shear_sup = Some(sup);
        shear_l1 = Some(l1);
    }
    Ok(RoundtripReport {
        frequencies,
        shear_rel_sup_error: shear_sup,
        shear_rel_l1_error: shear_l1,
        passed: failures.is_empty(),
        failures,
    })
}

/// Runs [`roundtrip`] and writes `roundtrip_report.json`.
pub fn run_roundtrip(cfg: &JobConfig, out: &Path) -> Result<Outcome> {
    cfg.check(Mode::Roundtrip)?;
    ensure_dir(out)?;
    let report = roundtrip(cfg)?;
    let path = out.join("roundtrip_report.json");
    io::write_json(&path, &report)?;
    Ok(Outcome {
        passed: report.passed,
        failures: report.failures,
        written: vec![path],
    })
}

/// Dispatches on the mode.
pub fn run(mode: Mode, cfg: &JobConfig, out: &Path) -> Result<Outcome> {
    match mode {
        Mode::Forward => run_forward(cfg, out),
        Mode::Spectrum => run_spectrum(cfg, out),
        Mode::Reconstruct => run_reconstruct(cfg, out),
        Mode::Roundtrip => run_roundtrip(cfg, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_omegas_are_rejected_before_work() {
        let cfg = JobConfig {
            profile: Some("does-not-exist.csv".into()),
            omegas: vec![1.0, 1.0],
            ..Default::default()
        };
        assert!(matches!(roundtrip(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: std::result::Result<JobConfig, _> = serde_json::from_str(r#"{"potental": "v.csv"}"#);
        assert!(r.unwrap_err().to_string().contains("potental"));
        let r: std::result::Result<JobConfig, _> = serde_json::from_str(r#"{"grid": {"N": 11}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn interpolation_and_norms() {
        let xs = [0.0, 0.5, 1.0];
        assert_eq!(interpolate(&xs, &[0.0, 1.0, 4.0], 0.75), 2.5);
        assert_eq!(interpolate(&xs, &[0.0, 1.0, 4.0], 2.0), 4.0);
        let (s, l) = error_norms(&xs, &[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]);
        assert_eq!((s, l), (1.0, 1.0));
    }

    #[test]
    fn reconstruct_requires_support() {
        let cfg = JobConfig {
            spectra: vec!["a.json".into()],
            ..Default::default()
        };
        assert!(matches!(cfg.check(Mode::Reconstruct), Err(Error::Config(_))));
    }
}
