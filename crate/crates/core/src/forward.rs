//! Direct scattering: Jost, regular and θ solutions, Jost function, Weyl solution and
//! Weyl function, ψ-function.
//!
//! Both Volterra equations are discretized by product integration: the unknown times
//! `V` is interpolated linearly on each cell and integrated exactly against the
//! oscillatory kernel. The resulting lower-triangular system is solved by marching,
//! which gives the exact discrete solution in one pass.

use crate::error::{Error, Result};
use crate::medium::PotentialGrid;
use crate::special::{phi123, sinc, trig_moments};
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Schrödinger operator on the half line with Robin condition `u'(0) + h u(0) = 0`.
#[derive(Clone, Debug)]
pub struct RobinProblem {
    pub potential: PotentialGrid,
    pub h: f64,
}

/// A solution sampled on the problem grid together with its derivative.
#[derive(Clone, Debug)]
pub struct WaveSolution {
    pub k: Complex64,
    pub grid_x: Vec<f64>,
    pub f: Vec<Complex64>,
    pub f_prime: Vec<Complex64>,
}

impl WaveSolution {
    /// Value at an arbitrary `x` inside the sampled range (cubic Hermite interpolation).
    pub fn value_at(&self, x: f64) -> Result<Complex64> {
        let n = self.grid_x.len();
        let dx = self.grid_x[1] - self.grid_x[0];
        let last = self.grid_x[n - 1];
        if x < -1e-12 || x > last + 1e-9 * dx.max(last) {
            return Err(Error::InvalidInput(format!(
                "x = {x} outside the sampled range [0, {last}]"
            )));
        }
        let s = (x / dx).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n.saturating_sub(2));
        let t = s - i as f64;
        if t == 0.0 {
            return Ok(self.f[i]);
        }
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        Ok(self.f[i] * h00 + self.f_prime[i] * (h10 * dx) + self.f[i + 1] * h01 + self.f_prime[i + 1] * (h11 * dx))
    }

    /// Wronskian `f g' − f' g` with another solution, pointwise.
    pub fn wronskian_with(&self, other: &WaveSolution) -> Vec<Complex64> {
        self.f
            .iter()
            .zip(&self.f_prime)
            .zip(other.f.iter().zip(&other.f_prime))
            .map(|((f, fp), (g, gp))| f * gp - fp * g)
            .collect()
    }
}

impl RobinProblem {
    pub fn new(potential: PotentialGrid, h: f64) -> Result<Self> {
        potential.validate()?;
        if !h.is_finite() {
            return Err(Error::InvalidInput(format!("Robin coefficient {h} is not finite")));
        }
        Ok(RobinProblem { potential, h })
    }

    /// Free problem `V ≡ 0` on `[0, x_max]`.
    pub fn free(h: f64, n: usize, x_max: f64) -> Result<Self> {
        Self::new(PotentialGrid::zero(n, x_max)?, h)
    }

    /// Sup norm of `V`.
    pub fn v_sup(&self) -> f64 {
        self.potential.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Marches the Jost solution `f = e^{ikx} m` from the grid end to 0.
///
/// `m = 1 − ∫_x κ(t−x) V m dt` with `κ(s) = (1 − e^{2iks})/(2ik)`, and `m' = −A` with
/// `A(x) = ∫_x e^{2ik(t−x)} V m dt`. The sink receives `(index, m, A)`.
fn march_jost(
    v: &[f64],
    dx: f64,
    k: Complex64,
    mut sink: impl FnMut(usize, Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    let n = v.len();
    let z = 2.0 * I * k * dx;
    let (p1, p2, p3) = phi123(z);
    let ez = z.exp();
    let dx2 = dx * dx;
    let w_self = -dx2 * p3;
    let w_next = -dx2 * (p2 - p3);
    let a_self = dx * p2;
    let a_next = dx * (p1 - p2);
    let kappa = -dx * p1;

    let one = Complex64::new(1.0, 0.0);
    let mut m = one;
    let mut a = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(0.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    let mut u_next = m * v[n - 1];
    sink(n - 1, m, a);
    for i in (0..n - 1).rev() {
        let rest = w_next * u_next + kappa * b + ez * c;
        m = (one - rest) / (1.0 + v[i] * w_self);
        let u = m * v[i];
        c = w_self * u + rest;
        a = a_self * u + a_next * u_next + ez * a;
        b += 0.5 * dx * (u + u_next);
        u_next = u;
        sink(i, m, a);
    }
    if !(m.re.is_finite() && m.im.is_finite() && a.re.is_finite() && a.im.is_finite()) {
        return Err(Error::Convergence { k });
    }
    Ok((m, a))
}

/// Jost solution on the problem grid.
pub fn jost_solution(prob: &RobinProblem, k: Complex64) -> Result<WaveSolution> {
    let pot = &prob.potential;
    let n = pot.grid_x.len();
    let mut m = vec![Complex64::new(0.0, 0.0); n];
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    march_jost(&pot.v, pot.spacing(), k, |i, mi, ai| {
        m[i] = mi;
        a[i] = ai;
    })?;
    let mut f = Vec::with_capacity(n);
    let mut fp = Vec::with_capacity(n);
    for (i, &x) in pot.grid_x.iter().enumerate() {
        let e = (I * k * x).exp();
        f.push(e * m[i]);
        fp.push(e * (I * k * m[i] - a[i]));
    }
    Ok(WaveSolution {
        k,
        grid_x: pot.grid_x.clone(),
        f,
        f_prime: fp,
    })
}

/// `(f(0,k), f'(0,k))` without storing the whole solution.
pub fn jost_boundary(prob: &RobinProblem, k: Complex64) -> Result<(Complex64, Complex64)> {
    let pot = &prob.potential;
    let (m, a) = march_jost(&pot.v, pot.spacing(), k, |_, _, _| {})?;
    Ok((m, I * k * m - a))
}

/// Jost function `f_h(k) = h f(0,k) + f'(0,k)`.
pub fn jost_function(prob: &RobinProblem, k: Complex64) -> Result<Complex64> {
    let (f0, fp0) = jost_boundary(prob, k)?;
    Ok(prob.h * f0 + fp0)
}

/// Fourth-order central difference of an analytic function along the real direction.
pub fn complex_derivative(
    mut f: impl FnMut(Complex64) -> Result<Complex64>,
    k: Complex64,
) -> Result<Complex64> {
    let d = 1e-4 * k.norm().max(1.0);
    let fp1 = f(k + d)?;
    let fm1 = f(k - d)?;
    let fp2 = f(k + 2.0 * d)?;
    let fm2 = f(k - 2.0 * d)?;
    Ok((8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * d))
}

/// `d f_h/dk` by fourth-order central differences with step `1e−4·max(1,|k|)`.
pub fn jost_function_derivative(prob: &RobinProblem, k: Complex64) -> Result<Complex64> {
    complex_derivative(|z| jost_function(prob, z), k)
}

/// Marches `y = a0 cos kx + b0 sin(kx)/k + ∫_0^x sin(k(x−t))/k V y dt` forward.
fn march_regular(prob: &RobinProblem, k: Complex64, upto_x: f64, a0: f64, b0: f64) -> Result<WaveSolution> {
    let pot = &prob.potential;
    let dx = pot.spacing();
    let last = pot.x_max();
    if upto_x > last * (1.0 + 1e-12) + 1e-14 || upto_x < 0.0 {
        return Err(Error::InvalidInput(format!(
            "upto_x = {upto_x} outside the potential grid [0, {last}]"
        )));
    }
    let n = ((upto_x / dx + 1e-9).floor() as usize + 1).clamp(2, pot.grid_x.len());
    let v = &pot.v;
    let w = k * dx;
    let (c1, c2, c3) = trig_moments(w);
    let dx2 = dx * dx;
    let (p0, p1) = (dx2 * c1, dx2 * c2);
    let sw = sinc(w);
    let (q0, q1) = (dx * sw, dx * c3);
    let cw = w.cos();
    let sin_over_k = dx * sw;
    let k_sin = k * k * dx * sw;

    let homogeneous = |x: f64| {
        let kx = k * x;
        let (s, c) = (kx.sin(), kx.cos());
        let s_over_k = x * sinc(kx);
        (a0 * c + b0 * s_over_k, -a0 * k * s + b0 * c)
    };

    let mut f = Vec::with_capacity(n);
    let mut fp = Vec::with_capacity(n);
    let (y0, yp0) = homogeneous(0.0);
    let mut y = y0;
    let mut s_acc = Complex64::new(0.0, 0.0);
    let mut c_acc = Complex64::new(0.0, 0.0);
    let mut u = y * v[0];
    f.push(y);
    fp.push(yp0);
    for i in 0..n - 1 {
        let x = pot.grid_x[i + 1];
        let (h, hp) = homogeneous(x);
        let s_pre = p1 * u + cw * s_acc + sin_over_k * c_acc;
        y = (h + s_pre) / (1.0 - (p0 - p1) * v[i + 1]);
        let u_new = y * v[i + 1];
        let s_new = s_pre + (p0 - p1) * u_new;
        let c_new = q1 * u + (q0 - q1) * u_new + cw * c_acc - k_sin * s_acc;
        s_acc = s_new;
        c_acc = c_new;
        u = u_new;
        f.push(y);
        fp.push(hp + c_acc);
    }
    if f.iter().chain(&fp).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Convergence { k });
    }
    Ok(WaveSolution {
        k,
        grid_x: pot.grid_x[..n].to_vec(),
        f,
        f_prime: fp,
    })
}

/// Regular solution: `φ(0) = 1`, `φ'(0) = −h`, sampled on grid nodes up to `upto_x`.
pub fn regular_solution(prob: &RobinProblem, k: Complex64, upto_x: f64) -> Result<WaveSolution> {
    march_regular(prob, k, upto_x, 1.0, -prob.h)
}

/// θ solution: `θ(0) = 0`, `θ'(0) = 1`.
pub fn theta_solution(prob: &RobinProblem, k: Complex64, upto_x: f64) -> Result<WaveSolution> {
    march_regular(prob, k, upto_x, 0.0, 1.0)
}

/// Threshold on `|f_h(k)|/max(1,|k|)` below which `k` counts as a zero.
const POLE_TOL: f64 = 1e-13;

fn nearest_zero(prob: &RobinProblem, k: Complex64) -> Complex64 {
    let mut z = k;
    for _ in 0..50 {
        let (Ok(f), Ok(d)) = (jost_function(prob, z), jost_function_derivative(prob, z)) else {
            break;
        };
        if d.norm() == 0.0 {
            break;
        }
        let step = f / d;
        z -= step;
        if step.norm() < 1e-14 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

fn checked_jost_function(prob: &RobinProblem, k: Complex64) -> Result<Complex64> {
    let fh = jost_function(prob, k)?;
    if fh.norm() <= POLE_TOL * k.norm().max(1.0) {
        return Err(Error::Pole {
            k,
            nearest: nearest_zero(prob, k),
        });
    }
    Ok(fh)
}

/// Weyl solution `f(x,k)/f_h(k)`.
pub fn weyl_solution(prob: &RobinProblem, k: Complex64, x: f64) -> Result<Complex64> {
    let fh = checked_jost_function(prob, k)?;
    Ok(jost_value(prob, k, x)? / fh)
}

/// `f(x,k)` at an arbitrary `x ≥ 0` (exact exponential beyond the grid).
pub fn jost_value(prob: &RobinProblem, k: Complex64, x: f64) -> Result<Complex64> {
    if x >= prob.potential.x_max() {
        return Ok((I * k * x).exp());
    }
    jost_solution(prob, k)?.value_at(x)
}

/// Weyl function `M = f(0,k)/f_h(k)`.
pub fn weyl_function_forward(prob: &RobinProblem, k: Complex64) -> Result<Complex64> {
    let (f0, fp0) = jost_boundary(prob, k)?;
    let fh = prob.h * f0 + fp0;
    if fh.norm() <= POLE_TOL * k.norm().max(1.0) {
        return Err(Error::Pole {
            k,
            nearest: nearest_zero(prob, k),
        });
    }
    Ok(f0 / fh)
}

/// The ψ-function, discontinuous across the real axis.
pub fn psi_function(prob: &RobinProblem, k: Complex64, x: f64) -> Result<Complex64> {
    if k.im == 0.0 {
        return Err(Error::InvalidInput(format!("ψ is undefined on the real axis (k = {k})")));
    }
    let e = (I * k * x).exp();
    if k.im > 0.0 {
        let plus = weyl_solution(prob, k, x)?;
        let phi = regular_solution(prob, k, x.min(prob.potential.x_max()))?;
        let phi_x = if x <= prob.potential.x_max() {
            phi.value_at(x)?
        } else {
            regular_beyond(prob, k, x)?
        };
        Ok(-I * k * e * (plus + 2.0 * I / k * phi_x))
    } else {
        let minus = weyl_solution(prob, -k, x)?;
        Ok(-I * k * e * minus)
    }
}

/// Regular solution at `x` beyond the grid, continued as a free wave.
fn regular_beyond(prob: &RobinProblem, k: Complex64, x: f64) -> Result<Complex64> {
    let end = prob.potential.x_max();
    let sol = regular_solution(prob, k, end)?;
    let (y, yp) = (sol.f[sol.f.len() - 1], sol.f_prime[sol.f_prime.len() - 1]);
    let d = x - end;
    Ok(y * (k * d).cos() + yp * d * sinc(k * d))
}

/// `V̂(k) = ∫_0^∞ e^{2ikt} V(t) dt` for the piecewise-linear interpolant of `V`.
pub fn potential_transform(pot: &PotentialGrid, k: Complex64) -> Complex64 {
    let dx = pot.spacing();
    let z = 2.0 * I * k * dx;
    let (p1, p2, _) = phi123(z);
    let (w0, w1) = (dx * p2, dx * (p1 - p2));
    let mut acc = crate::numeric::CompensatedComplex::default();
    for (i, pair) in pot.v.windows(2).enumerate() {
        let e = (2.0 * I * k * pot.grid_x[i]).exp();
        acc.add(e * (w0 * pair[0] + w1 * pair[1]));
    }
    acc.value()
}

/// Scattering function `S(k) = −f_h(−k)/f_h(k)`.
pub fn scattering_function(prob: &RobinProblem, k: Complex64) -> Result<Complex64> {
    Ok(-jost_function(prob, -k)? / checked_jost_function(prob, k)?)
}
