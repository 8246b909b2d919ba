//! Reference media and potentials used by the tests, the guide and the CLI.

use crate::error::Result;
use crate::forward::RobinProblem;
use crate::medium::{schrodinger_from_love, PotentialGrid, ShearProfile};
use crate::numeric::uniform_grid;

/// Amplitude of the bundled bump profile.
pub const BUMP_AMPLITUDE: f64 = -0.25;

/// `V = −depth` on `[0, 1]`, `h = 0`, grid ending at the support.
pub fn square_well(n: usize, depth: f64) -> Result<RobinProblem> {
    RobinProblem::new(PotentialGrid::from_fn(n, 1.0, 1.0, |_| -depth)?, 0.0)
}

/// `V ≡ 0` with Robin coefficient `h` on `[0, x_max]`.
pub fn free(h: f64, n: usize, x_max: f64) -> Result<RobinProblem> {
    RobinProblem::free(h, n, x_max)
}

/// `μ̂(x) = exp(2A(1 − x)⁴)` on `[0, 1]` with `μ̂_I = 1`: a C² profile meeting the
/// homogeneous tail at `x_I = 1`. Surface slope gives `h = 4A`.
pub fn bump_profile(n: usize, amplitude: f64) -> Result<ShearProfile> {
    let x = uniform_grid(n, 1.0);
    let mu = x.iter().map(|x| (2.0 * amplitude * (1.0 - x).powi(4)).exp()).collect();
    ShearProfile::new(x, mu, 1.0, 1.0)
}

/// Closed-form potential of [`bump_profile`] at frequency `omega`.
pub fn bump_potential_exact(x: f64, amplitude: f64, omega: f64) -> f64 {
    if x >= 1.0 {
        return 0.0;
    }
    let s = amplitude * (1.0 - x).powi(4);
    let sp = -4.0 * amplitude * (1.0 - x).powi(3);
    let spp = 12.0 * amplitude * (1.0 - x).powi(2);
    spp + sp * sp + omega * omega * (1.0 - (-2.0 * s).exp())
}

/// Robin problem of the bump profile at `omega`, potential sampled in closed form.
pub fn bump(n: usize, omega: f64) -> Result<RobinProblem> {
    let pot = PotentialGrid::from_fn(n, 1.0, 1.0, |x| bump_potential_exact(x, BUMP_AMPLITUDE, omega))?;
    RobinProblem::new(pot, 4.0 * BUMP_AMPLITUDE)
}

/// Robin problem of the bump profile at `omega` through the medium transform.
pub fn bump_from_profile(n: usize, omega: f64) -> Result<RobinProblem> {
    let (pot, h) = schrodinger_from_love(&bump_profile(n, BUMP_AMPLITUDE)?, omega)?;
    RobinProblem::new(pot, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_transform_matches_closed_form() {
        let a = bump(2001, 1.5).unwrap();
        let b = bump_from_profile(2001, 1.5).unwrap();
        assert!((a.h - b.h).abs() < 1e-10);
        let worst = a
            .potential
            .v
            .iter()
            .zip(&b.potential.v)
            .skip(1)
            .take(1999)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(worst < 2e-6);
    }
}
