//! Translation between the Love-wave medium (shear modulus, frequency) and the
//! Schrödinger/Robin problem (potential `V`, boundary coefficient `h`).

use crate::error::{Error, Result};
use crate::numeric::{first_derivative, first_derivative_at_start, second_derivative, uniform_spacing};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Density-normalized shear modulus sampled in depth (`x ≥ 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct ShearProfile {
    pub grid_x: Vec<f64>,
    pub mu_hat: Vec<f64>,
    pub mu_hat_tail: f64,
    pub x_support: f64,
}

/// Compactly supported potential on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialGrid {
    pub grid_x: Vec<f64>,
    pub v: Vec<f64>,
    pub v_prime: Vec<f64>,
    pub x_support: f64,
}

/// Frequency, horizontal wavenumber and tail modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumConfig {
    pub omega: f64,
    pub xi_norm: f64,
    pub mu_hat_tail: f64,
}

/// Relative tolerance used to decide whether a sample equals the tail value.
const TAIL_TOL: f64 = 1e-12;

fn beyond_support(x: f64, x_support: f64) -> bool {
    x > x_support * (1.0 + 1e-12) + 1e-14
}

impl ShearProfile {
    /// Builds a profile from depth samples (`x ≥ 0`) and checks its invariants.
    pub fn new(grid_x: Vec<f64>, mu_hat: Vec<f64>, mu_hat_tail: f64, x_support: f64) -> Result<Self> {
        let p = ShearProfile {
            grid_x,
            mu_hat,
            mu_hat_tail,
            x_support,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds a profile from samples in the vertical coordinate `Z = −x ≤ 0`.
    pub fn from_vertical(z: &[f64], mu_hat: &[f64], mu_hat_tail: f64, x_support: f64) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = z.iter().map(|z| -z).zip(mu_hat.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, m) = pairs.into_iter().unzip();
        Self::new(x, m, mu_hat_tail, x_support)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_x.len() != self.mu_hat.len() {
            return Err(Error::InvalidInput(format!(
                "profile has {} depths but {} shear values",
                self.grid_x.len(),
                self.mu_hat.len()
            )));
        }
        uniform_spacing(&self.grid_x)?;
        if !(self.mu_hat_tail > 0.0) || !self.mu_hat_tail.is_finite() {
            return Err(Error::Domain(format!("tail shear modulus {} is not positive", self.mu_hat_tail)));
        }
        if !(self.x_support > 0.0) {
            return Err(Error::InvalidInput(format!("support bound {} must be positive", self.x_support)));
        }
        for (&x, &m) in self.grid_x.iter().zip(&self.mu_hat) {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Domain(format!("non-positive shear modulus {m} at x = {x}")));
            }
            if beyond_support(x, self.x_support) && (m - self.mu_hat_tail).abs() > TAIL_TOL * self.mu_hat_tail {
                return Err(Error::InvalidInput(format!(
                    "shear modulus {m} at x = {x} differs from the homogeneous tail value {} beyond x_support = {}",
                    self.mu_hat_tail, self.x_support
                )));
            }
        }
        Ok(())
    }
}

impl PotentialGrid {
    /// Builds a potential from samples, zeroing everything beyond `x_support`, and
    /// differentiates it numerically.
    pub fn from_samples(grid_x: Vec<f64>, mut v: Vec<f64>, x_support: f64) -> Result<Self> {
        if grid_x.len() != v.len() {
            return Err(Error::InvalidInput("potential samples and grid differ in length".into()));
        }
        let dx = uniform_spacing(&grid_x)?;
        if !(x_support > 0.0) {
            return Err(Error::InvalidInput(format!("support bound {x_support} must be positive")));
        }
        for (x, vi) in grid_x.iter().zip(v.iter_mut()) {
            if !vi.is_finite() {
                return Err(Error::Domain(format!("non-finite potential at x = {x}")));
            }
            if beyond_support(*x, x_support) {
                *vi = 0.0;
            }
        }
        let mut v_prime = first_derivative(&v, dx);
        for (x, d) in grid_x.iter().zip(v_prime.iter_mut()) {
            if beyond_support(*x, x_support) {
                *d = 0.0;
            }
        }
        Ok(PotentialGrid {
            grid_x,
            v,
            v_prime,
            x_support,
        })
    }

    /// Evaluates `V` on a uniform grid from a closure.
    pub fn from_fn(n: usize, x_max: f64, x_support: f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        let x = crate::numeric::uniform_grid(n, x_max);
        let vals = x.iter().map(|&x| v(x)).collect();
        Self::from_samples(x, vals, x_support)
    }

    /// The identically zero potential.
    pub fn zero(n: usize, x_max: f64) -> Result<Self> {
        Self::from_fn(n, x_max, x_max, |_| 0.0)
    }

    pub fn spacing(&self) -> f64 {
        (self.grid_x[self.grid_x.len() - 1] - self.grid_x[0]) / (self.grid_x.len() - 1) as f64
    }

    pub fn x_max(&self) -> f64 {
        self.grid_x[self.grid_x.len() - 1]
    }

    /// Trapezoid L¹ norm of `V`.
    pub fn l1_norm(&self) -> f64 {
        let dx = self.spacing();
        self.v.windows(2).map(|w| 0.5 * dx * (w[0].abs() + w[1].abs())).sum()
    }

    /// Checks the type invariants (zero tail, finite norms).
    pub fn validate(&self) -> Result<()> {
        uniform_spacing(&self.grid_x)?;
        if self.v.len() != self.grid_x.len() || self.v_prime.len() != self.grid_x.len() {
            return Err(Error::InvalidInput("potential arrays differ in length".into()));
        }
        for ((x, v), d) in self.grid_x.iter().zip(&self.v).zip(&self.v_prime) {
            if !v.is_finite() || !d.is_finite() {
                return Err(Error::Domain(format!("non-finite potential at x = {x}")));
            }
            if beyond_support(*x, self.x_support) && (*v != 0.0 || *d != 0.0) {
                return Err(Error::InvalidInput(format!(
                    "potential is non-zero at x = {x} beyond x_support = {}",
                    self.x_support
                )));
            }
        }
        Ok(())
    }
}

/// Potential and Robin coefficient of the calibrated Love problem at frequency `omega`.
///
/// `V = (√μ̂)''/√μ̂ − ω²/μ̂ + ω²/μ̂_I` and `h = −μ̂'(0)/(2μ̂(0))`.
pub fn schrodinger_from_love(profile: &ShearProfile, omega: f64) -> Result<(PotentialGrid, f64)> {
    profile.validate()?;
    let dx = uniform_spacing(&profile.grid_x)?;
    let root: Vec<f64> = profile.mu_hat.iter().map(|m| m.sqrt()).collect();
    let root_dd = second_derivative(&root, dx);
    let w2 = omega * omega;
    let v: Vec<f64> = root_dd
        .iter()
        .zip(&root)
        .zip(&profile.mu_hat)
        .map(|((d2, r), m)| d2 / r - w2 / m + w2 / profile.mu_hat_tail)
        .collect();
    let h = -0.5 * first_derivative_at_start(&profile.mu_hat, dx) / profile.mu_hat[0];
    let pot = PotentialGrid::from_samples(profile.grid_x.clone(), v, profile.x_support)?;
    Ok((pot, h))
}

/// Principal square root of `ω²/μ̂_I − |ξ|²` (imaginary part non-negative).
pub fn quasi_momentum(cfg: &MediumConfig) -> Complex64 {
    let r = cfg.omega * cfg.omega / cfg.mu_hat_tail - cfg.xi_norm * cfg.xi_norm;
    if r >= 0.0 {
        Complex64::new(r.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-r).sqrt())
    }
}

/// Relative tolerance below which the recovery denominator counts as zero.
const SINGULAR_TOL: f64 = 1e-10;

/// Shear modulus from the potentials at two distinct frequencies.
///
/// `μ̂ = μ̂_I (ω₁² − ω₂²) / (ω₁² − ω₂² − μ̂_I (V₁ − V₂))`.
pub fn shear_from_two_potentials(
    v1: &PotentialGrid,
    v2: &PotentialGrid,
    omega1: f64,
    omega2: f64,
    mu_hat_tail: f64,
) -> Result<ShearProfile> {
    let dw = omega1 * omega1 - omega2 * omega2;
    if dw == 0.0 || omega1 == omega2 {
        return Err(Error::InvalidInput(format!(
            "shear recovery needs two distinct frequencies, got {omega1} and {omega2}"
        )));
    }
    if !(mu_hat_tail > 0.0) {
        return Err(Error::Domain(format!("tail shear modulus {mu_hat_tail} is not positive")));
    }
    if v1.grid_x.len() != v2.grid_x.len()
        || v1.grid_x.iter().zip(&v2.grid_x).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::InvalidInput("potentials do not share a grid".into()));
    }
    if (v1.x_support - v2.x_support).abs() > 1e-12 * v1.x_support {
        return Err(Error::InvalidInput("potentials have different support bounds".into()));
    }
    let mut mu = Vec::with_capacity(v1.v.len());
    for ((x, a), b) in v1.grid_x.iter().zip(&v1.v).zip(&v2.v) {
        let den = dw - mu_hat_tail * (a - b);
        if den.abs() <= SINGULAR_TOL * dw.abs() || !den.is_finite() {
            return Err(Error::SingularRecovery { x: *x, denominator: den });
        }
        let m = if beyond_support(*x, v1.x_support) {
            mu_hat_tail
        } else {
            mu_hat_tail * dw / den
        };
        if !(m > 0.0) {
            return Err(Error::Domain(format!("recovered shear modulus {m} at x = {x} is not positive")));
        }
        mu.push(m);
    }
    ShearProfile::new(v1.grid_x.clone(), mu, mu_hat_tail, v1.x_support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::uniform_grid;
    use approx::assert_relative_eq;

    fn bump(n: usize, amp: f64) -> ShearProfile {
        let x = uniform_grid(n, 1.0);
        let mu = x.iter().map(|x| (2.0 * amp * (1.0 - x).powi(4)).exp()).collect();
        ShearProfile::new(x, mu, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_profile_gives_free_problem() {
        let x = uniform_grid(101, 1.0);
        let p = ShearProfile::new(x, vec![2.5; 101], 2.5, 0.5).unwrap();
        let (v, h) = schrodinger_from_love(&p, 3.0).unwrap();
        assert!(v.v.iter().all(|v| v.abs() < 1e-10));
        assert!(h.abs() < 1e-12);
    }

    #[test]
    fn bump_matches_symbolic_potential() {
        let a = -0.25;
        let p = bump(2001, a);
        let (pot, h) = schrodinger_from_love(&p, 1.0).unwrap();
        let last = pot.grid_x.len() - 1;
        for (i, (x, v)) in pot.grid_x.iter().zip(&pot.v).enumerate() {
            // one-sided second-order stencils at the two ends
            let tol = if i == 0 || i == last { 5e-5 } else { 2e-6 };
            let s = a * (1.0 - x).powi(4);
            let sp = -4.0 * a * (1.0 - x).powi(3);
            let spp = 12.0 * a * (1.0 - x).powi(2);
            let exact = spp + sp * sp + 1.0 - (-2.0 * s).exp();
            assert!((v - exact).abs() < tol, "x = {x}: {v} vs {exact}");
        }
        assert_relative_eq!(h, 4.0 * a, max_relative = 1e-10);
    }

    #[test]
    fn omega_dependence_is_the_frequency_term() {
        let p = bump(401, -0.25);
        let (v1, _) = schrodinger_from_love(&p, 1.0).unwrap();
        let (v2, _) = schrodinger_from_love(&p, 2.0).unwrap();
        for i in 0..p.grid_x.len() {
            let expect = (1.0 - 4.0) * (1.0 / p.mu_hat_tail - 1.0 / p.mu_hat[i]);
            assert!((v1.v[i] - v2.v[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn potential_vanishes_beyond_support() {
        let x = uniform_grid(301, 1.5);
        let mu = x
            .iter()
            .map(|&x: &f64| if x < 1.0 { (-0.5 * (1.0 - x).powi(4)).exp() } else { 1.0 })
            .collect();
        let p = ShearProfile::new(x, mu, 1.0, 1.0).unwrap();
        let (v, _) = schrodinger_from_love(&p, 1.0).unwrap();
        v.validate().unwrap();
        for (x, (v, d)) in v.grid_x.iter().zip(v.v.iter().zip(&v.v_prime)) {
            if *x > 1.0 + 1e-9 {
                assert_eq!((*v, *d), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn shear_recovery_round_trip() {
        let p = bump(2001, -0.25);
        let (v1, _) = schrodinger_from_love(&p, 1.0).unwrap();
        let (v2, _) = schrodinger_from_love(&p, 2.0).unwrap();
        let back = shear_from_two_potentials(&v1, &v2, 1.0, 2.0, 1.0).unwrap();
        for (a, b) in back.mu_hat.iter().zip(&p.mu_hat) {
            assert!((a - b).abs() <= 1e-10 * b);
        }
        assert!(matches!(
            shear_from_two_potentials(&v1, &v2, 1.0, 1.0, 1.0),
            Err(Error::InvalidInput(_))
        ));
        let zero = PotentialGrid::zero(11, 1.0).unwrap();
        let flat = shear_from_two_potentials(&zero, &zero, 1.0, 2.0, 3.0).unwrap();
        assert!(flat.mu_hat.iter().all(|&m| m == 3.0));
    }

    #[test]
    fn singular_denominator_reports_position() {
        let x = uniform_grid(11, 1.0);
        let v1 = PotentialGrid::from_samples(x.clone(), vec![0.0; 11], 1.0).unwrap();
        let mut bad = vec![0.0; 11];
        bad[4] = 3.0;
        let v2 = PotentialGrid::from_samples(x, bad, 1.0).unwrap();
        match shear_from_two_potentials(&v1, &v2, 1.0, 2.0, 1.0) {
            Err(Error::SingularRecovery { x, .. }) => assert_relative_eq!(x, 0.4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quasi_momentum_branches() {
        let k = quasi_momentum(&MediumConfig { omega: 0.0, xi_norm: 2.0, mu_hat_tail: 1.0 });
        assert_eq!(k, Complex64::new(0.0, 2.0));
        let k = quasi_momentum(&MediumConfig { omega: 2f64.sqrt(), xi_norm: 1.0, mu_hat_tail: 1.0 });
        assert_relative_eq!(k.re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn increasing_surface_modulus_gives_negative_h() {
        let x = uniform_grid(201, 1.0);
        let mu = x.iter().map(|x| 1.0 + 0.5 * (1.0 - (1.0 - x).powi(3))).collect();
        let p = ShearProfile::new(x, mu, 1.5, 1.0).unwrap();
        let (_, h) = schrodinger_from_love(&p, 1.0).unwrap();
        assert!(h < 0.0);
    }

    #[test]
    fn rejects_bad_profiles() {
        let x = uniform_grid(11, 1.0);
        let mut mu = vec![1.0; 11];
        mu[3] = 0.0;
        assert!(matches!(ShearProfile::new(x.clone(), mu, 1.0, 1.0), Err(Error::Domain(_))));
        let mut mu = vec![1.0; 11];
        mu[9] = 1.2;
        assert!(matches!(ShearProfile::new(x, mu, 1.0, 0.5), Err(Error::InvalidInput(_))));
        let short = ShearProfile::new(vec![0.0, 0.5, 1.0], vec![1.0; 3], 1.0, 1.0);
        assert!(matches!(short, Err(Error::Resolution(_))));
    }

    #[test]
    fn vertical_coordinates_are_flipped() {
        let z: Vec<f64> = (0..11).map(|i| -(i as f64) * 0.1).collect();
        let mu: Vec<f64> = (0..11).map(|i| 1.0 + i as f64).collect();
        let p = ShearProfile::from_vertical(&z, &mu, 11.0, 1.0).unwrap();
        assert_relative_eq!(p.grid_x[10], 1.0);
        assert_eq!(p.mu_hat[10], 11.0);
    }
}
