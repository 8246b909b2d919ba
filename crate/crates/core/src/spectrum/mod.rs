//! Spectral data: zeros of the Jost function, norming constants, the jump of the Weyl
//! function, Hadamard reconstruction and the spectral representation of `M`.

mod hadamard;
mod repr;
mod zeros;

pub use hadamard::{jost_from_zeros, Calibration, HadamardJost};
pub use repr::{
    validate_weyl_class, weyl_from_spectral_data, CheckResult, JumpTable, Pole, SpectralMeasure, WeylClassReport,
    WeylEvaluator, WeylValue,
};
pub use zeros::{find_eigenvalues, find_resonances, Rect};

use crate::error::{Error, Result};
use crate::forward::{complex_derivative, jost_function, RobinProblem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Evaluator of the Jost function `k ↦ f_h(k)`.
#[derive(Clone, Debug)]
pub enum JostEvaluator {
    /// Forward solve of the Volterra equation.
    Direct(RobinProblem),
    /// Truncated Hadamard product over known zeros.
    Hadamard(HadamardJost),
}

impl JostEvaluator {
    pub fn eval(&self, k: Complex64) -> Result<Complex64> {
        match self {
            JostEvaluator::Direct(p) => jost_function(p, k),
            JostEvaluator::Hadamard(h) => Ok(h.eval(k)),
        }
    }

    /// `ḟ_h(k)` by fourth-order central differences.
    pub fn derivative(&self, k: Complex64) -> Result<Complex64> {
        complex_derivative(|z| self.eval(z), k)
    }

    /// Length scale of the support, used to size contour sampling.
    pub(crate) fn support_scale(&self) -> f64 {
        match self {
            JostEvaluator::Direct(p) => p.potential.x_support.max(p.potential.x_max()),
            JostEvaluator::Hadamard(h) => h.a.re.abs().max(1.0),
        }
    }
}

/// Eigenvalues, resonances, norming constants and jump samples of one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumData {
    pub eigen_k: Vec<Complex64>,
    pub resonance_k: Vec<Complex64>,
    pub alphas: Vec<f64>,
    pub jump_samples: Vec<[f64; 2]>,
    pub truncation_radius: f64,
}

impl SpectrumData {
    /// Checks the type invariants.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.eigen_k.len() != self.alphas.len() {
            return Err(Error::DataInconsistency(format!(
                "{} eigenvalues but {} norming constants",
                self.eigen_k.len(),
                self.alphas.len()
            )));
        }
        for k in &self.eigen_k {
            if k.re.abs() > tol * k.norm().max(1.0) || !(k.im > 0.0) {
                return Err(Error::DataInconsistency(format!("eigenvalue {k} is not on the positive imaginary axis")));
            }
        }
        for w in self.eigen_k.windows(2) {
            if w[0].norm() < w[1].norm() {
                return Err(Error::DataInconsistency("eigenvalues are not sorted by decreasing modulus".into()));
            }
        }
        for a in &self.alphas {
            if !(*a > 0.0) || !a.is_finite() {
                return Err(Error::DataInconsistency(format!("norming constant {a} is not positive")));
            }
        }
        for [lambda, t] in &self.jump_samples {
            if !(*lambda > 0.0) || !(*t > 0.0) || !t.is_finite() {
                return Err(Error::DataInconsistency(format!("jump sample T({lambda}) = {t} is not positive")));
            }
        }
        for k in &self.resonance_k {
            if k.im > tol * k.norm().max(1.0) {
                return Err(Error::DataInconsistency(format!("resonance {k} lies in the upper half plane")));
            }
        }
        let unpaired = unpaired_zeros(&self.resonance_k, self.truncation_radius, tol.max(1e-6));
        if let Some(k) = unpaired.first() {
            return Err(Error::DataInconsistency(format!("resonance {k} has no partner −conj(k)")));
        }
        Ok(())
    }

    /// All zeros (eigenvalues and resonances).
    pub fn all_zeros(&self) -> Vec<Complex64> {
        let mut z: Vec<Complex64> = self.eigen_k.iter().chain(&self.resonance_k).copied().collect();
        z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        z
    }
}

/// Zeros whose mirror `−conj(k)` is missing from the list (zeros near the truncation
/// radius are allowed to lose their partner).
pub fn unpaired_zeros(zeros: &[Complex64], radius: f64, tol: f64) -> Vec<Complex64> {
    zeros
        .iter()
        .filter(|k| {
            let mirror = -k.conj();
            let near_edge = (k.norm() - radius).abs() < 1e-6 * radius.max(1.0);
            !near_edge && !zeros.iter().any(|w| (w - mirror).norm() <= tol * k.norm().max(1.0))
        })
        .copied()
        .collect()
}

/// Norming constants `α_j = 4k_j² (−i)/(f_h(−k_j) ḟ_h(k_j))`.
pub fn norming_constants(f: &JostEvaluator, eigen_k: &[Complex64]) -> Result<Vec<f64>> {
    eigen_k
        .iter()
        .map(|&k| {
            let fd = f.derivative(k)?;
            let fm = f.eval(-k)?;
            let alpha = 4.0 * k * k * (-I) / (fm * fd);
            check_alpha(k, alpha)
        })
        .collect()
}

/// Norming constant from the residue form `α_j = 2k_j f(0,k_j)/ḟ_h(k_j)`.
pub fn norming_constant_residue(prob: &RobinProblem, k: Complex64) -> Result<f64> {
    let (f0, _) = crate::forward::jost_boundary(prob, k)?;
    let fd = crate::forward::jost_function_derivative(prob, k)?;
    check_alpha(k, 2.0 * k * f0 / fd)
}

fn check_alpha(k: Complex64, alpha: Complex64) -> Result<f64> {
    if alpha.im.abs() > 1e-8 * alpha.norm().max(1.0) {
        return Err(Error::DataInconsistency(format!(
            "norming constant at k = {k} has imaginary part {:e}",
            alpha.im
        )));
    }
    if !(alpha.re > 0.0) {
        return Err(Error::DataInconsistency(format!(
            "norming constant at k = {k} is not positive ({})",
            alpha.re
        )));
    }
    Ok(alpha.re)
}

/// Jump of the Weyl function across the cut, `T(λ) = k/(π|f_h(k)|²)`, `k = √λ`.
pub fn jump_function(f: &JostEvaluator, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("jump function needs λ > 0, got {lambda}")));
    }
    let k = lambda.sqrt();
    let fh = f.eval(Complex64::new(k, 0.0))?;
    Ok(k / (PI * fh.norm_sqr()))
}

/// Jump samples on the uniform wavenumber grid `k = dk, 2dk, …, k_max`.
pub fn sample_jump(f: &JostEvaluator, k_max: f64, dk: f64) -> Result<Vec<[f64; 2]>> {
    use rayon::prelude::*;
    let m = (k_max / dk).round() as usize;
    if m < 4 {
        return Err(Error::Config(format!("k_max = {k_max} and dk = {dk} give fewer than 4 samples")));
    }
    (1..=m)
        .into_par_iter()
        .map(|i| {
            let k = i as f64 * dk;
            Ok([k * k, jump_function(f, k * k)?])
        })
        .collect()
}

/// Options for assembling [`SpectrumData`] from a forward problem.
#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub tau_max: Option<f64>,
    pub truncation_radius: f64,
    pub resonance_depth: f64,
    pub resonance_tol: f64,
    pub k_max: f64,
    pub dk: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            tau_max: None,
            truncation_radius: 40.0,
            resonance_depth: 10.0,
            resonance_tol: 1e-10,
            k_max: 200.0,
            dk: 0.05,
        }
    }
}

/// Default upper end of the eigenvalue search: eigenvalues satisfy `τ² ≤ max(−V) + h²`
/// up to the boundary term, so this leaves generous room.
pub fn default_tau_max(prob: &RobinProblem) -> f64 {
    let depth = prob.potential.v.iter().fold(0.0f64, |m, v| m.max(-v));
    2.0 * (depth.sqrt() + prob.h.abs()) + 2.0
}

/// Computes the full spectral data of a forward problem.
pub fn spectrum_data(prob: &RobinProblem, opts: &SpectrumOptions) -> Result<SpectrumData> {
    let f = JostEvaluator::Direct(prob.clone());
    let tau_max = opts.tau_max.unwrap_or_else(|| default_tau_max(prob));
    let eigen_k = find_eigenvalues(&f, tau_max)?;
    let alphas = norming_constants(&f, &eigen_k)?;
    let r = opts.truncation_radius;
    let region = Rect {
        re_lo: -r,
        re_hi: r,
        im_lo: -opts.resonance_depth,
        im_hi: 0.0,
    };
    let mut resonance_k: Vec<Complex64> = find_resonances(&f, region, opts.resonance_tol)?
        .into_iter()
        .filter(|k| k.norm() <= r)
        .collect();
    resonance_k.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let jump_samples = sample_jump(&f, opts.k_max, opts.dk)?;
    log::info!(
        "spectral data: {} eigenvalues, {} resonances within R = {r}",
        eigen_k.len(),
        resonance_k.len()
    );
    Ok(SpectrumData {
        eigen_k,
        resonance_k,
        alphas,
        jump_samples,
        truncation_radius: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::PotentialGrid;

    #[test]
    fn free_norming_constants_are_twice_h() {
        for h in [1.0, 2.0, 0.5] {
            let p = RobinProblem::free(h, 101, 1.0).unwrap();
            let f = JostEvaluator::Direct(p);
            let a = norming_constants(&f, &[Complex64::new(0.0, h)]).unwrap();
            assert!((a[0] - 2.0 * h).abs() < 1e-10);
        }
    }

    #[test]
    fn free_jump_function() {
        let f = JostEvaluator::Direct(RobinProblem::free(0.0, 11, 1.0).unwrap());
        assert!((jump_function(&f, 1.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        let f = JostEvaluator::Direct(RobinProblem::free(1.0, 11, 1.0).unwrap());
        assert!((jump_function(&f, 1.0).unwrap() - 0.5 / PI).abs() < 1e-15);
        assert!(jump_function(&f, 0.0).is_err());
    }

    #[test]
    fn mispolished_zero_is_rejected() {
        let f = JostEvaluator::Direct(RobinProblem::free(1.0, 11, 1.0).unwrap());
        // A point that is not a zero gives a complex "norming constant".
        let r = norming_constants(&f, &[Complex64::new(0.3, 1.2)]);
        assert!(matches!(r, Err(Error::DataInconsistency(_))));
    }

    #[test]
    fn spectrum_data_json_shape() {
        let d = SpectrumData {
            eigen_k: vec![Complex64::new(0.0, 1.0)],
            resonance_k: vec![],
            alphas: vec![2.0],
            jump_samples: vec![[1.0, 0.1]],
            truncation_radius: 10.0,
        };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(
            s,
            r#"{"eigen_k":[[0.0,1.0]],"resonance_k":[],"alphas":[2.0],"jump_samples":[[1.0,0.1]],"truncation_radius":10.0}"#
        );
        d.validate(1e-9).unwrap();
    }

    #[test]
    fn unpaired_resonance_fails_validation() {
        let d = SpectrumData {
            eigen_k: vec![],
            resonance_k: vec![Complex64::new(2.0, -1.0)],
            alphas: vec![],
            jump_samples: vec![],
            truncation_radius: 10.0,
        };
        assert!(d.validate(1e-9).is_err());
    }

    #[test]
    fn default_tau_max_covers_square_well() {
        let p = RobinProblem::new(PotentialGrid::from_fn(11, 1.0, 1.0, |_| -4.0).unwrap(), 0.0).unwrap();
        assert!(default_tau_max(&p) > 2.0);
    }
}
