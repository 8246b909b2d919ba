//! Acceptance criteria 1–8. Each prints one PASS/FAIL line; the test fails if any does.

use lovespec::bundled::{self, BUMP_AMPLITUDE};
use lovespec::forward::{jost_function, weyl_function_forward, RobinProblem};
use lovespec::glevitan::{
    build_g, extract_potential, row_residual, solve_all, Extension, Kernel2D, KernelKind, KernelOptions, WeylData,
};
use lovespec::invariants::{run_suite, uniform_bounds_hold, SuiteTolerances};
use lovespec::io;
use lovespec::medium::shear_from_two_potentials;
use lovespec::numeric::uniform_grid;
use lovespec::pipeline::{self, interpolate, JobConfig};
use lovespec::spectrum::{
    find_eigenvalues, jost_from_zeros, jump_function, norming_constants, spectrum_data, weyl_from_spectral_data,
    Calibration, JostEvaluator, SpectralMeasure, SpectrumData, SpectrumOptions,
};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::time::{Duration, Instant};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let t = Instant::now();
    let mut v = f();
    let el = t.elapsed();
    v.detail = format!("{} [{:.1} s]", v.detail, el.as_secs_f64());
    if let Some(l) = limit {
        if el > l {
            v.passed = false;
            v.detail = format!("{} over the {} s limit", v.detail, l.as_secs());
        }
    }
    v
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

// 1. free case
fn free_case() -> Verdict {
    let mut worst = 0.0f64;
    let ks = [
        Complex64::new(0.7, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(-2.0, 0.5),
        Complex64::new(0.3, 4.0),
    ];
    let mut m_rep = f64::NAN;
    for h in [0.0, 1.0, 2.0] {
        let prob = RobinProblem::free(h, 201, 1.0).unwrap();
        let f = JostEvaluator::Direct(prob.clone());
        for &k in &ks {
            let fh = h + I * k;
            worst = worst.max((jost_function(&prob, k).unwrap() - fh).norm());
            if k.im > 0.0 {
                worst = worst.max((weyl_function_forward(&prob, k).unwrap() - 1.0 / fh).norm());
            }
        }
        for kr in [0.5, 1.0, 2.5, 7.0] {
            let t = kr / (PI * (h * h + kr * kr));
            worst = worst.max((jump_function(&f, kr * kr).unwrap() - t).abs());
        }
        let eig = find_eigenvalues(&f, 2.0 * h + 3.0).unwrap();
        if h > 0.0 {
            if eig.len() != 1 {
                return verdict(false, format!("h = {h}: {} eigenvalues", eig.len()));
            }
            worst = worst.max((eig[0] - I * h).norm());
            let a = norming_constants(&f, &eig).unwrap()[0];
            worst = worst.max((a - 2.0 * h).abs());
        } else if !eig.is_empty() {
            return verdict(false, format!("h = 0: unexpected eigenvalues {eig:?}"));
        }
        if h == 1.0 {
            let data = spectrum_data(&prob, &SpectrumOptions::default()).unwrap();
            let m = weyl_from_spectral_data(&SpectralMeasure::from_data(&data).unwrap(), Complex64::new(-4.0, 0.0))
                .unwrap()
                .value;
            m_rep = (m - Complex64::new(-1.0, 0.0)).norm();
        }
    }
    verdict(
        worst <= 1e-10 && m_rep <= 1e-6,
        format!("closed-form max error {worst:.2e} (tol 1e-10), representation |M(-4) + 1| = {m_rep:.2e} (tol 1e-6)"),
    )
}

/// `q tan q = √(4 − q²)` on `(0, π/2)` by bisection; the eigenvalue is `i√(4 − q²)`.
fn square_well_oracle() -> f64 {
    let f = |q: f64| q * q.tan() - (4.0 - q * q).sqrt();
    let (mut a, mut b) = (1e-9, FRAC_PI_2 - 1e-9);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            b = m
        } else {
            a = m
        }
    }
    let q = 0.5 * (a + b);
    (4.0 - q * q).sqrt()
}

// 2. square-well spectrum
fn square_well_spectrum() -> Verdict {
    let prob = bundled::square_well(2001, 4.0).unwrap();
    let eig = find_eigenvalues(&JostEvaluator::Direct(prob.clone()), 10.0).unwrap();
    let tau = square_well_oracle();
    if eig.len() != 1 {
        return verdict(false, format!("{} eigenvalues, expected 1", eig.len()));
    }
    let err = (eig[0] - I * tau).norm();
    let bounds = uniform_bounds_hold(&prob).unwrap();
    verdict(
        err <= 1e-8 && bounds.passed,
        format!("eigenvalue error {err:.2e} (tol 1e-8); uniform bounds: {}", bounds.detail),
    )
}

fn bundled_problems() -> Vec<(&'static str, RobinProblem)> {
    vec![
        ("square well", bundled::square_well(2001, 4.0).unwrap()),
        ("bump ω=1", bundled::bump(2001, 1.0).unwrap()),
    ]
}

fn lambda_samples() -> Vec<Complex64> {
    let mut out = Vec::new();
    for r in [1.0, 4.0, 16.0, 64.0] {
        for th in [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI, -PI / 2.0] {
            out.push(Complex64::from_polar(r, th));
        }
    }
    out
}

// 3. Weyl cross-validation
fn weyl_cross_validation(cases: &[(&str, RobinProblem, SpectrumData)]) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, prob, data) in cases {
        let measure = SpectralMeasure::from_data(data).unwrap();
        let pole_l: Vec<Complex64> = data.eigen_k.iter().map(|k| k * k).collect();
        let mut worst = 0.0f64;
        let mut used = 0;
        for lambda in lambda_samples() {
            let cut = if lambda.re >= 0.0 { lambda.im.abs() } else { lambda.norm() };
            if cut < 0.5 || pole_l.iter().any(|p| (lambda - p).norm() < 0.5) {
                continue;
            }
            used += 1;
            let mut k = lambda.sqrt();
            if k.im < 0.0 {
                k = -k;
            }
            let rep = weyl_from_spectral_data(&measure, lambda).unwrap().value;
            let fwd = weyl_function_forward(prob, k).unwrap();
            worst = worst.max(rel(rep, fwd));
        }
        ok &= worst <= 1e-3 && used == 20;
        parts.push(format!("{name}: max rel {worst:.2e} over {used} λ"));
    }
    verdict(ok, format!("{} (tol 1e-3)", parts.join("; ")))
}

// 4. Gelfand–Levitan regression
fn gl_regression(square: &SpectrumData) -> Verdict {
    let c = 0.7;
    let grid = uniform_grid(400, 1.0);
    let g = Kernel2D::from_fn(grid.clone(), KernelKind::G, Extension::Triangular, |_, _| c).unwrap();
    let sol = solve_all(&g).unwrap();
    let mut worst = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid[..=i].iter().enumerate() {
            worst = worst.max((sol.kernel.get(i, j) - c * (c * (y - x)).exp()).abs());
        }
    }
    let mut res = sol.max_residual;
    for i in 0..grid.len() {
        res = res.max(row_residual(&g, i, sol.kernel.row(i)));
    }
    let w = WeylData::new(SpectralMeasure::from_data(square).unwrap()).unwrap();
    let gs = build_g(&w, &uniform_grid(400, 1.0), &KernelOptions::default()).unwrap();
    let ss = solve_all(&gs).unwrap();
    let mut res_sq = 0.0f64;
    for i in 0..gs.len() {
        res_sq = res_sq.max(row_residual(&gs, i, ss.kernel.row(i)));
    }
    verdict(
        worst <= 1e-10 && res <= 1e-9 && res_sq <= 1e-9,
        format!(
            "closed-form error {worst:.2e} (tol 1e-10), residual {res:.2e}, square-well residual {res_sq:.2e} (tol 1e-9)"
        ),
    )
}

struct Recon {
    sup: f64,
    h: f64,
    v: Vec<f64>,
    grid: Vec<f64>,
}

fn reconstruct(data: &SpectrumData, n: usize) -> Recon {
    let measure = SpectralMeasure::from_data(data).unwrap();
    let w = WeylData::new(measure).unwrap();
    let grid = uniform_grid(n, 1.0);
    let g = build_g(&w, &grid, &KernelOptions::default()).unwrap();
    let sol = solve_all(&g).unwrap();
    let e = extract_potential(&sol.kernel.diagonal(), &grid, 1.0, f64::INFINITY).unwrap();
    Recon {
        sup: f64::NAN,
        h: e.h,
        v: e.potential.v,
        grid,
    }
}

fn sup_error(r: &Recon, prob: &RobinProblem) -> f64 {
    r.grid
        .iter()
        .zip(&r.v)
        .map(|(&x, v)| (v - interpolate(&prob.potential.grid_x, &prob.potential.v, x)).abs())
        .fold(0.0, f64::max)
}

/// Sup distance between two reconstructions, sampled on the coarser grid.
fn sup_distance(a: &Recon, b: &Recon) -> f64 {
    a.grid
        .iter()
        .zip(&a.v)
        .map(|(&x, v)| (v - interpolate(&b.grid, &b.v, x)).abs())
        .fold(0.0, f64::max)
}

// 5. round trip
fn roundtrip_reconstruction() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    let cases = [
        ("bump ω=1", bundled::bump(4001, 1.0).unwrap()),
        ("free h=1", bundled::free(1.0, 4001, 1.0).unwrap()),
    ];
    for (name, prob) in cases {
        let opts = SpectrumOptions::default();
        let data = spectrum_data(&prob, &opts).unwrap();
        let fine_k = spectrum_data(&prob, &SpectrumOptions { k_max: 400.0, ..opts.clone() }).unwrap();
        let fine_dk = spectrum_data(&prob, &SpectrumOptions { dk: 0.025, ..opts.clone() }).unwrap();
        let mut r1 = reconstruct(&data, 2001);
        r1.sup = sup_error(&r1, &prob);
        let mut r2 = reconstruct(&data, 4001);
        r2.sup = sup_error(&r2, &prob);
        let floor = 2.0 * sup_distance(&r1, &reconstruct(&fine_k, 2001)) + sup_distance(&r1, &reconstruct(&fine_dk, 2001));
        let h_err = (r1.h - prob.h).abs();
        let refines = r2.sup <= 0.5 * r1.sup || r2.sup <= floor;
        ok &= r1.sup <= 5e-2 && h_err <= 2e-2 && refines;
        parts.push(format!(
            "{name}: sup {:.2e} (N=2001), {:.2e} (N=4001), quadrature floor {floor:.2e}, |Δh| {h_err:.2e}",
            r1.sup, r2.sup
        ));
    }
    verdict(ok, format!("{} (tol 5e-2, 2e-2)", parts.join("; ")))
}

// 6. shear recovery
fn shear_recovery() -> Verdict {
    let profile = bundled::bump_profile(2001, BUMP_AMPLITUDE).unwrap();
    let (v1, _) = lovespec::medium::schrodinger_from_love(&profile, 1.0).unwrap();
    let (v2, _) = lovespec::medium::schrodinger_from_love(&profile, 2.0).unwrap();
    let rec = shear_from_two_potentials(&v1, &v2, 1.0, 2.0, profile.mu_hat_tail).unwrap();
    let exact = rec
        .mu_hat
        .iter()
        .zip(&profile.mu_hat)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bump.csv");
    io::write_profile(&path, &profile).unwrap();
    let cfg = JobConfig {
        profile: Some(path),
        omegas: vec![1.0, 2.0],
        ..Default::default()
    };
    let report = pipeline::roundtrip(&cfg).unwrap();
    let full = report.shear_rel_sup_error.unwrap();
    verdict(
        exact <= 1e-10 && full <= 1e-1,
        format!("exact potentials: rel {exact:.2e} (tol 1e-10); full pipeline: rel sup {full:.2e} (tol 1e-1)"),
    )
}

// 7. invariant suites
fn invariant_suites() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    let cases = vec![
        ("square well", bundled::square_well(2001, 4.0).unwrap()),
        ("bump ω=1", bundled::bump(2001, 1.0).unwrap()),
        ("bump ω=2", bundled::bump(2001, 2.0).unwrap()),
        ("free h=1", bundled::free(1.0, 2001, 1.0).unwrap()),
    ];
    for (name, prob) in cases {
        let t = Instant::now();
        let data = spectrum_data(&prob, &SpectrumOptions::default()).unwrap();
        let w = WeylData::new(SpectralMeasure::from_data(&data).unwrap()).unwrap();
        let g = build_g(&w, &uniform_grid(401, 1.0), &KernelOptions::default()).unwrap();
        let report = run_suite(&prob, &data, Some(&g), &SuiteTolerances::default()).unwrap();
        let el = t.elapsed().as_secs_f64();
        let failed: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        ok &= report.passed() && el < 60.0;
        parts.push(if failed.is_empty() {
            format!("{name}: {} checks in {el:.1} s", report.checks.len())
        } else {
            format!("{name}: failed {failed:?}")
        });
    }
    verdict(ok, parts.join("; "))
}

// 8. Hadamard truncation
fn hadamard_truncation(square: &SpectrumData, prob: &RobinProblem) -> Verdict {
    let zeros = square.all_zeros();
    let ks: Vec<f64> = (0..=36).map(|i| 1.0 + 0.25 * i as f64).collect();
    let direct: Vec<Complex64> = ks.iter().map(|&k| jost_function(prob, k.into()).unwrap()).collect();
    let mut errs = Vec::new();
    for r in [10.0, 20.0, 40.0] {
        let f = jost_from_zeros(&zeros, r, &Calibration::for_radius(r)).unwrap();
        let e = ks
            .iter()
            .zip(&direct)
            .map(|(&k, d)| rel(f.eval(k.into()).unwrap(), *d))
            .fold(0.0, f64::max);
        errs.push(e);
    }
    verdict(
        errs[1] < errs[0] && errs[2] < errs[1],
        format!("max rel error at R = 10, 20, 40: {:.2e}, {:.2e}, {:.2e}", errs[0], errs[1], errs[2]),
    )
}

#[test]
fn acceptance_criteria() {
    let square = bundled::square_well(2001, 4.0).unwrap();
    let square_data = spectrum_data(&square, &SpectrumOptions::default()).unwrap();

    let mut lines = Vec::new();
    lines.push(("1 free-case exactness", timed(Some(Duration::from_secs(10)), free_case)));
    lines.push(("2 square-well spectrum", timed(Some(Duration::from_secs(30)), square_well_spectrum)));
    lines.push((
        "3 Weyl cross-validation",
        timed(Some(Duration::from_secs(120)), || {
            let cases: Vec<_> = bundled_problems()
                .into_iter()
                .map(|(n, p)| {
                    let d = spectrum_data(&p, &SpectrumOptions::default()).unwrap();
                    (n, p, d)
                })
                .collect();
            weyl_cross_validation(&cases)
        }),
    ));
    lines.push(("4 Gelfand-Levitan regression", timed(None, || gl_regression(&square_data))));
    lines.push(("5 round-trip reconstruction", timed(Some(Duration::from_secs(600)), roundtrip_reconstruction)));
    lines.push(("6 shear recovery", timed(None, shear_recovery)));
    lines.push(("7 invariant suites", timed(None, invariant_suites)));
    lines.push(("8 Hadamard reconstruction", timed(None, || hadamard_truncation(&square_data, &square))));

    // bypass the test harness capture so the report shows up on success too
    let mut err = std::io::stderr().lock();
    for (name, v) in &lines {
        writeln!(err, "criterion {name}: {} {}", if v.passed { "PASS" } else { "FAIL" }, v.detail).unwrap();
    }
    drop(err);
    let failed: Vec<&str> = lines.iter().filter(|(_, v)| !v.passed).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
