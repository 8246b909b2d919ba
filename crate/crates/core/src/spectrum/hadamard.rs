//! Jost function rebuilt from its zeros by a truncated Hadamard product.

use super::{unpaired_zeros, JostEvaluator};
use crate::error::{Error, Result};
use crate::numeric::least_squares;
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `C e^{iak + bk²} Π_{|k_n| ≤ R} (1 − k/k_n)`.
///
/// `e^{bk²}` stands in for the zeros beyond `R`: their factors contribute
/// `exp(−k Σ 1/k_n − k²/2 Σ 1/k_n² − …)`, the linear part being absorbed by `a`.
#[derive(Clone, Debug)]
pub struct HadamardJost {
    pub zeros: Vec<Complex64>,
    pub c: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub truncation_radius: f64,
    /// RMS mismatch of `log f_h` against the calibration targets.
    pub normalization_residual: f64,
}

impl HadamardJost {
    pub fn eval(&self, k: Complex64) -> Complex64 {
        self.c * (I * self.a * k + self.b * k * k).exp() * product(&self.zeros, k)
    }
}

fn product(zeros: &[Complex64], k: Complex64) -> Complex64 {
    zeros.iter().fold(Complex64::new(1.0, 0.0), |p, z| p * (1.0 - k / z))
}

/// A branch of `log Π(1 − k/k_n)` continuous on the upper half plane cut along the
/// segments `[0, k_n]` of the upper-half-plane zeros.
fn log_product(zeros: &[Complex64], k: Complex64) -> Complex64 {
    zeros
        .iter()
        .map(|z| {
            if z.im > 0.0 {
                (k / z - 1.0).ln() + I * PI
            } else {
                (1.0 - k / z).ln()
            }
        })
        .sum()
}

/// Points and target behavior used to fix `C`, `a` and `b`.
///
/// The target is `f_h(k) ≈ ik + offset` at every calibration point.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub points: Vec<Complex64>,
    pub offset: Complex64,
}

impl Calibration {
    /// `count` points `iτ` spread uniformly over `[tau_lo, tau_hi]`, targeting `ik`.
    pub fn imaginary_axis(tau_lo: f64, tau_hi: f64, count: usize) -> Self {
        let points = (0..count)
            .map(|i| {
                let s = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
                I * (tau_lo + s * (tau_hi - tau_lo))
            })
            .collect();
        Calibration {
            points,
            offset: Complex64::new(0.0, 0.0),
        }
    }

    /// `4 × 5` points on the annular sector `ρ ∈ [rho_lo, rho_hi]`, `arg k ∈ [π/4, 3π/4]`,
    /// targeting `ik`. Spreading the angle decorrelates the `k²` column from the others.
    pub fn sector(rho_lo: f64, rho_hi: f64) -> Self {
        let mut points = Vec::with_capacity(20);
        for i in 0..4 {
            let rho = rho_lo + (rho_hi - rho_lo) * i as f64 / 3.0;
            for j in 0..5 {
                points.push(Complex64::from_polar(rho, 0.25 * PI + 0.5 * PI * j as f64 / 4.0));
            }
        }
        Calibration {
            points,
            offset: Complex64::new(0.0, 0.0),
        }
    }

    /// Default calibration for truncation radius `r`: the sector `ρ ∈ [0.6ρ₁, ρ₁]`,
    /// `ρ₁ = min(10, r/2)`. Larger `ρ` makes the `e^{2ik}` terms of `f_h` negligible,
    /// smaller `ρ` keeps the missing zeros' factors close to `e^{bk²}`.
    pub fn for_radius(r: f64) -> Self {
        let rho = (0.5 * r).min(10.0);
        Self::sector(0.6 * rho, rho)
    }
}

/// Builds the Hadamard evaluator from the zeros with `|k_n| ≤ radius`.
///
/// `C`, `a` and `b` come from a linear least-squares fit of `log(target/Π)` against
/// `log C + iak + bk²`, with four extra `(ik)⁻ⁿ` terms absorbing the unknown constant in
/// `f_h(k) = ik + O(1)`. Fewer calibration points drop columns from the right.
pub fn jost_from_zeros(zeros: &[Complex64], radius: f64, calibration: &Calibration) -> Result<JostEvaluator> {
    if calibration.points.len() < 2 {
        return Err(Error::Config(format!(
            "Hadamard normalization needs at least 2 calibration points, got {}",
            calibration.points.len()
        )));
    }
    let kept: Vec<Complex64> = zeros.iter().copied().filter(|z| z.norm() <= radius).collect();
    if kept.is_empty() {
        return Err(Error::Config(
            "no zeros inside the truncation radius: an empty product has no polynomial growth to match ik".into(),
        ));
    }
    if kept.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::Config("k = 0 cannot be a factor of the normalized product".into()));
    }
    let unpaired = unpaired_zeros(&kept, radius, 1e-6);
    if !unpaired.is_empty() {
        return Err(Error::Truncation(format!(
            "partial products do not converge: {} zeros lack their partner −conj(k), first {}",
            unpaired.len(),
            unpaired[0]
        )));
    }

    let pts = calibration.points.clone();
    let mut logs = Vec::with_capacity(pts.len());
    for &k in &pts {
        if !(k.im > 0.0) {
            return Err(Error::Config(format!("calibration point {k} is not in the upper half plane")));
        }
        let target = Complex64::new(k.norm().ln(), k.arg() + 0.5 * PI) + (1.0 + calibration.offset / (I * k)).ln();
        let lp = log_product(&kept, k);
        if !lp.re.is_finite() {
            return Err(Error::Config(format!("calibration point {k} hits a zero of the product")));
        }
        logs.push(target - lp);
    }
    // columns: log C, a, b, then nuisance terms for log(f_h/(ik + offset)) ≈ Σ dₙ/(ik)ⁿ
    let cols = pts.len().min(7);
    let basis = |k: Complex64| -> Vec<Complex64> {
        let ik = I * k;
        let z = 1.0 / ik;
        [Complex64::new(1.0, 0.0), ik, k * k, z, z * z, z * z * z, z * z * z * z][..cols].to_vec()
    };
    let rows: Vec<Vec<Complex64>> = pts.iter().map(|&k| basis(k)).collect();
    let coef = least_squares(&rows, &logs)
        .ok_or_else(|| Error::Config("calibration points do not determine C and a".into()))?;
    let residual = (rows
        .iter()
        .zip(&logs)
        .map(|(r, l)| (r.iter().zip(&coef).map(|(x, c)| x * c).sum::<Complex64>() - l).norm_sqr())
        .sum::<f64>()
        / rows.len() as f64)
        .sqrt();
    let (log_c, a) = (coef[0], coef[1]);
    let b = coef.get(2).copied().unwrap_or_default();
    log::info!(
        "Hadamard product: {} zeros within R = {radius}, C = {:.6e}, a = {:.6}, b = {:.3e}, residual {residual:.3e}",
        kept.len(),
        log_c.exp(),
        a,
        b
    );
    Ok(JostEvaluator::Hadamard(HadamardJost {
        zeros: kept,
        c: log_c.exp(),
        a,
        b,
        truncation_radius: radius,
        normalization_residual: residual,
    }))
}
