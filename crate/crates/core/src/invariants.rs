//! Property checks that every forward problem and its spectral data must satisfy.

use crate::error::Result;
use crate::forward::{jost_boundary, jost_function, jost_solution, potential_transform, scattering_function, RobinProblem};
use crate::glevitan::{check_solvability, Kernel2D};
use crate::spectrum::{CheckResult, JostEvaluator, SpectrumData};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One named outcome.
#[derive(Clone, Debug, Serialize)]
pub struct NamedCheck {
    pub name: &'static str,
    #[serde(flatten)]
    pub result: CheckResult,
}

/// Outcomes of the invariant suite.
#[derive(Clone, Debug, Default, Serialize)]
pub struct InvariantReport {
    pub checks: Vec<NamedCheck>,
}

impl InvariantReport {
    pub fn push(&mut self, name: &'static str, result: CheckResult) {
        self.checks.push(NamedCheck { name, result });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.result.passed)
    }

    pub fn failures(&self) -> Vec<&NamedCheck> {
        self.checks.iter().filter(|c| !c.result.passed).collect()
    }
}

/// `i(−1)^j ḟ_h(k_j) > 0` and `(−1)^j f_h(−k_j) < 0`, eigenvalues ordered by decreasing
/// modulus and numbered from 1.
pub fn sign_ladder(f: &JostEvaluator, eigen_k: &[Complex64]) -> Result<CheckResult> {
    let mut ks = eigen_k.to_vec();
    ks.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let mut worst = f64::INFINITY;
    for (idx, &k) in ks.iter().enumerate() {
        let sign = if (idx + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let d = (I * sign * f.derivative(k)?).re;
        let m = -(sign * f.eval(-k)?).re;
        worst = worst.min(d).min(m);
    }
    Ok(if ks.is_empty() {
        CheckResult::new(true, f64::NAN, "no eigenvalues")
    } else {
        CheckResult::new(
            worst > 0.0,
            worst,
            format!("{} eigenvalues, smallest signed value {worst:.4e}", ks.len()),
        )
    })
}

pub fn jump_positive(data: &SpectrumData) -> CheckResult {
    let min = data.jump_samples.iter().fold(f64::INFINITY, |m, s| m.min(s[1]));
    CheckResult::new(min > 0.0, min, format!("min T over {} samples", data.jump_samples.len()))
}

pub fn alphas_positive(data: &SpectrumData) -> CheckResult {
    let min = data.alphas.iter().fold(f64::INFINITY, |m, a| m.min(*a));
    if data.alphas.is_empty() {
        return CheckResult::new(true, f64::NAN, "no norming constants");
    }
    CheckResult::new(min > 0.0, min, format!("min α over {}", data.alphas.len()))
}

/// Real wavenumbers used by the unitarity, Wronskian and conjugation checks.
pub fn real_lattice() -> Vec<f64> {
    vec![0.3, 0.9, 1.7, 3.1, 6.4, 12.5, 25.0]
}

/// `max |S(k)| − 1` over real `k`.
pub fn scattering_unitary(prob: &RobinProblem, ks: &[f64], tol: f64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for &k in ks {
        worst = worst.max((scattering_function(prob, Complex64::new(k, 0.0))?.norm() - 1.0).abs());
    }
    Ok(CheckResult::new(worst <= tol, worst, format!("max ||S| − 1| (tolerance {tol:.0e})")))
}

/// `W(f(·,k), f(·,−k)) = −2ik` at every grid point.
pub fn wronskian_constancy(prob: &RobinProblem, ks: &[f64], tol: f64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for &k in ks {
        let k = Complex64::new(k, 0.0);
        let a = jost_solution(prob, k)?;
        let b = jost_solution(prob, -k)?;
        let target = -2.0 * I * k;
        for w in a.wronskian_with(&b) {
            worst = worst.max((w - target).norm() / target.norm());
        }
    }
    Ok(CheckResult::new(worst <= tol, worst, format!("max relative Wronskian defect (tolerance {tol:.0e})")))
}

/// `f(x,−k) = conj f(x,k)` and `f_h(−k) = conj f_h(k)` for real `k`.
pub fn conjugation_symmetry(prob: &RobinProblem, ks: &[f64], tol: f64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for &k in ks {
        let k = Complex64::new(k, 0.0);
        let a = jost_solution(prob, k)?;
        let b = jost_solution(prob, -k)?;
        for (u, v) in a.f.iter().zip(&b.f) {
            worst = worst.max((u.conj() - v).norm());
        }
        worst = worst.max((jost_function(prob, k)?.conj() - jost_function(prob, -k)?).norm());
    }
    Ok(CheckResult::new(worst <= tol, worst, format!("max conjugation defect (tolerance {tol:.0e})")))
}

/// `max |k/f_h(k)|` on half circles `k = εe^{iθ}`, `ε = 1e−1, 1e−2, 1e−3`; passes if the
/// maximum does not grow by more than a factor 10 as ε shrinks.
pub fn bounded_near_zero(f: &JostEvaluator) -> Result<CheckResult> {
    let mut maxima = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3] {
        let mut mx = 0.0f64;
        for j in 0..=12 {
            let k = Complex64::from_polar(eps, PI * j as f64 / 12.0);
            mx = mx.max((k / f.eval(k)?).norm());
        }
        maxima.push(mx);
    }
    let growth = maxima[2] / maxima[0].max(1e-300);
    Ok(CheckResult::new(
        maxima.iter().all(|m| m.is_finite()) && growth <= 10.0,
        maxima[2],
        format!(
            "max |k/f_h| = {:.3e}, {:.3e}, {:.3e} at ε = 1e-1, 1e-2, 1e-3",
            maxima[0], maxima[1], maxima[2]
        ),
    ))
}

/// `∫₀^x sup|g| ≤ c₂ x` on `x ∈ [0.1 x_I, x_I]` with `c₂ = sup|g|` over `[0, x_I]²`.
pub fn solvability_linear(g: &Kernel2D, x_support: f64) -> Result<CheckResult> {
    let last = g.node(x_support.min(g.grid_x[g.len() - 1]))?;
    let c2 = (0..=last).fold(0.0f64, |m, i| g.row(i).iter().fold(m, |m, v| m.max(v.abs())));
    let mut worst_ratio = 0.0f64;
    let mut ok = c2.is_finite();
    for step in 1..=10 {
        let x = g.grid_x[(last * step) / 10];
        if x <= 0.0 {
            continue;
        }
        let bound = check_solvability(g, x)?;
        let ratio = bound / x;
        worst_ratio = worst_ratio.max(ratio);
        ok &= bound.is_finite() && bound <= c2 * x * (1.0 + 1e-12);
    }
    Ok(CheckResult::new(
        ok,
        worst_ratio,
        format!("max ∫sup|g|/x = {worst_ratio:.4e} against c₂ = {c2:.4e}"),
    ))
}

/// The four inequalities bounding the Jost solution at `k`: pairs `(lhs, rhs)` for
/// `|f(0,k) − 1|`, `|f(0,k) − 1 + (V̂(0) − V̂(k))/(2ik)|`, `|f_h − ik|` and
/// `|f_h − ik − h + (V̂(0) + V̂(k))/2|`.
///
/// The third bound carries no `h` term and only holds for `h = 0`.
pub fn uniform_bounds(prob: &RobinProblem, k: Complex64) -> Result<[(f64, f64); 4]> {
    let norm = prob.potential.l1_norm();
    let a = norm / k.norm().max(1.0);
    let x_i = prob.potential.x_support;
    let growth = ((k.im.abs() - k.im) * x_i).exp();
    let (f0, fp0) = jost_boundary(prob, k)?;
    let fh = prob.h * f0 + fp0;
    let v0 = potential_transform(&prob.potential, Complex64::new(0.0, 0.0));
    let vk = potential_transform(&prob.potential, k);
    let h = prob.h;
    Ok([
        ((f0 - 1.0).norm(), growth * a * a.exp()),
        ((f0 - 1.0 + (v0 - vk) / (2.0 * I * k)).norm(), 0.5 * a * a * growth * a.exp()),
        ((fh - I * k).norm(), norm * growth * a.exp()),
        ((fh - I * k - h + 0.5 * (v0 + vk)).norm(), (h.abs() + 0.5 * norm) * a * growth * a.exp()),
    ])
}

/// 40-point lattice `|k| ∈ [0.5, 50]`, `arg k ∈ [0, π]`.
pub fn bounds_lattice() -> Vec<Complex64> {
    let radii = [0.5, 1.5, 5.0, 15.0, 50.0];
    let mut out = Vec::new();
    for r in radii {
        for j in 0..8 {
            out.push(Complex64::from_polar(r, PI * j as f64 / 7.0));
        }
    }
    out
}

pub fn uniform_bounds_hold(prob: &RobinProblem) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for k in bounds_lattice() {
        for (lhs, rhs) in uniform_bounds(prob, k)? {
            worst = worst.max(lhs / rhs);
            if lhs > rhs {
                failures += 1;
            }
        }
    }
    Ok(CheckResult::new(
        failures == 0,
        worst,
        format!("{failures} violations on the 40-point lattice, max lhs/rhs = {worst:.4}"),
    ))
}

/// Tolerances of the suite.
#[derive(Clone, Copy, Debug)]
pub struct SuiteTolerances {
    pub unitarity: f64,
    pub wronskian: f64,
    pub conjugation: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        SuiteTolerances {
            unitarity: 1e-8,
            wronskian: 1e-6,
            conjugation: 1e-12,
        }
    }
}

/// Runs the suite on a forward problem, its spectral data and (optionally) its `g` kernel.
pub fn run_suite(
    prob: &RobinProblem,
    data: &SpectrumData,
    g: Option<&Kernel2D>,
    tol: &SuiteTolerances,
) -> Result<InvariantReport> {
    let f = JostEvaluator::Direct(prob.clone());
    let ks = real_lattice();
    let mut r = InvariantReport::default();
    r.push("sign_ladder", sign_ladder(&f, &data.eigen_k)?);
    r.push("jump_positive", jump_positive(data));
    r.push("alphas_positive", alphas_positive(data));
    r.push("scattering_unitary", scattering_unitary(prob, &ks, tol.unitarity)?);
    r.push("wronskian_constancy", wronskian_constancy(prob, &ks, tol.wronskian)?);
    r.push("conjugation_symmetry", conjugation_symmetry(prob, &ks, tol.conjugation)?);
    r.push("bounded_near_zero", bounded_near_zero(&f)?);
    if let Some(g) = g {
        r.push("solvability_linear", solvability_linear(g, prob.potential.x_support)?);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::spectrum::{spectrum_data, SpectrumOptions};

    #[test]
    fn free_robin_ladder_and_bounds() {
        let p = bundled::free(1.0, 201, 1.0).unwrap();
        let f = JostEvaluator::Direct(p.clone());
        assert!(sign_ladder(&f, &[I]).unwrap().passed);
        assert!(bounded_near_zero(&f).unwrap().passed);
        assert!(uniform_bounds_hold(&bundled::free(0.0, 201, 1.0).unwrap()).unwrap().passed);
        // with V ≡ 0 the third bound reads |h| ≤ 0
        for k in bounds_lattice() {
            let b = uniform_bounds(&p, k).unwrap();
            assert!(b[0].0 <= b[0].1 && b[1].0 <= b[1].1 && b[3].0 <= b[3].1);
            assert!(b[2].0 > b[2].1);
        }
    }

    #[test]
    fn reversed_ladder_fails() {
        // ik − 1 has its zero at −i; evaluating the ladder at +i gives the wrong signs
        let p = bundled::free(-1.0, 201, 1.0).unwrap();
        let f = JostEvaluator::Direct(p);
        assert!(!sign_ladder(&f, &[I]).unwrap().passed);
    }

    #[test]
    fn square_well_suite_passes() {
        let p = bundled::square_well(2001, 4.0).unwrap();
        let data = spectrum_data(
            &p,
            &SpectrumOptions {
                resonance_depth: 3.0,
                truncation_radius: 10.0,
                ..Default::default()
            },
        )
        .unwrap();
        let r = run_suite(&p, &data, None, &SuiteTolerances::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.failures());
    }
}
