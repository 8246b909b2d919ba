//! Gelfand–Levitan reconstruction: kernel `g` from Weyl data, the transformation
//! kernel `K` from the integral equation, and the potential from `K(x,x)`.
//!
//! `g(x,y) = G(x−y) + G(x+y)` with
//! `G(t) = ∫₀^∞ q(k) cos(kt) dk + ½ Σ_j α_j cosh(τ_j t)`, `q(k) = k T(k²) − 1/π`,
//! so only the one-dimensional cosine transform of `q` needs oscillatory quadrature.

use crate::error::{Error, Result};
use crate::forward::{regular_solution, RobinProblem};
use crate::medium::PotentialGrid;
use crate::numeric::{cumulative_trapezoid, first_derivative, uniform_spacing, CompensatedComplex};
use crate::special::{cosine_tail, phi123};
use crate::spectrum::{JumpTable, Pole, SpectralMeasure, WeylEvaluator};
use num_complex::Complex64;
use rayon::prelude::*;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which kernel a [`Kernel2D`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    G,
    K,
}

/// How a `g` table is read above the diagonal (`s < y`) inside the integral equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// `g(s,y) = g(y,s)`: the kernel built from spectral data.
    Symmetric,
    /// `g(s,y) = 0` for `s < y`: Volterra-type test kernels.
    Triangular,
}

/// Lower-triangular table `k(x_i, y_j)`, `j ≤ i`, on a uniform grid.
#[derive(Clone, Debug)]
pub struct Kernel2D {
    pub grid_x: Vec<f64>,
    values: Vec<f64>,
    pub kind: KernelKind,
    pub extension: Extension,
}

fn packed(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

impl Kernel2D {
    /// Tabulates `f(x, y)` for `y ≤ x`.
    pub fn from_fn(grid_x: Vec<f64>, kind: KernelKind, extension: Extension, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        uniform_spacing(&grid_x)?;
        let n = grid_x.len();
        let mut values = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                values.push(f(grid_x[i], grid_x[j]));
            }
        }
        Ok(Kernel2D {
            grid_x,
            values,
            kind,
            extension,
        })
    }

    pub fn len(&self) -> usize {
        self.grid_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_x.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.grid_x[1] - self.grid_x[0]
    }

    /// Stored value at `(x_i, y_j)`, `j ≤ i`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i);
        self.values[packed(i, j)]
    }

    /// Value at `(x_i, y_j)` for any `i, j`, applying the extension above the diagonal.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.get(i, j)
        } else {
            match self.extension {
                Extension::Symmetric => self.get(j, i),
                Extension::Triangular => 0.0,
            }
        }
    }

    /// Row `i`: values at `y_0..=y_i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[packed(i, 0)..=packed(i, i)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i, i)).collect()
    }

    /// Index of the grid node at `x`.
    pub fn node(&self, x: f64) -> Result<usize> {
        let dx = self.spacing();
        let s = x / dx;
        let i = s.round();
        if (s - i).abs() > 1e-6 || i < 0.0 || i as usize >= self.len() {
            return Err(Error::InvalidInput(format!("x = {x} is not a grid node")));
        }
        Ok(i as usize)
    }
}

/// Weyl data prepared for the kernel assembly.
#[derive(Clone, Debug)]
pub struct WeylData {
    pub measure: SpectralMeasure,
    pub k_cutoff: f64,
}

impl WeylData {
    /// Checks the invariants: positive residues, poles on the imaginary axis, `k² q`
    /// bounded along the sampled axis.
    pub fn new(measure: SpectralMeasure) -> Result<Self> {
        for p in &measure.poles {
            if !(p.alpha > 0.0) {
                return Err(Error::InvalidInput(format!("norming constant {} at k = {} is not positive", p.alpha, p.k)));
            }
            if p.k.re.abs() > 1e-8 * p.k.norm().max(1.0) || !(p.k.im > 0.0) {
                return Err(Error::InvalidInput(format!("pole k = {} is not on the positive imaginary axis", p.k)));
            }
        }
        let t = &measure.jump;
        let m = t.samples().len() - 1;
        let growth = |lo: usize, hi: usize| {
            (lo..=hi).fold(0.0f64, |s, i| s.max(((i as f64 * t.dk()).powi(2) * t.samples()[i]).abs()))
        };
        let (low, high) = (growth(1, m / 2), growth(m / 2, m));
        if high > 10.0 * low.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "k²·q(k) grows along the sampled axis ({low:.3e} on the lower half, {high:.3e} on the upper half)"
            )));
        }
        let k_cutoff = t.k_max();
        Ok(WeylData { measure, k_cutoff })
    }

    pub fn tail_coefficient(&self) -> f64 {
        self.measure.jump.tail_coefficient()
    }

    pub fn poles(&self) -> &[Pole] {
        &self.measure.poles
    }
}

/// `j(k) = M − 1/(ik)`.
pub fn j_function(m: &WeylEvaluator, k: Complex64) -> Result<Complex64> {
    if k.norm() == 0.0 {
        return Err(Error::InvalidInput("j is undefined at k = 0".into()));
    }
    Ok(m.m(k)? - 1.0 / (I * k))
}

/// Options for the kernel assembly.
#[derive(Clone, Copy, Debug)]
pub struct KernelOptions {
    /// Largest admissible bound on the unmodelled tail `max|k²q − c₂|/K_max`.
    pub resolution_tol: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { resolution_tol: 2e-2 }
    }
}

/// `∫₀^{K} q(k) cos(kt) dk` for piecewise-linear `q`, exact in the oscillation.
fn filon_cosine(table: &JumpTable, t: f64) -> f64 {
    let q = table.samples();
    let dk = table.dk();
    let m = q.len() - 1;
    let theta = t * dk;
    let mut e = CompensatedComplex::default();
    for (c, &qc) in q.iter().enumerate() {
        let (s, co) = (t * c as f64 * dk).sin_cos();
        e.add(Complex64::new(co * qc, s * qc));
    }
    let e = e.value();
    let (p1, p2, _) = phi123(I * theta);
    let end = Complex64::from_polar(q[m], t * m as f64 * dk);
    let v = p2 * (e - end) + (p1 - p2) * Complex64::from_polar(1.0, -theta) * (e - q[0]);
    dk * v.re
}

/// The one-dimensional profile `G(t)` at `t = 0, dx, …, (count−1)·dx`.
pub fn g_profile(w: &WeylData, dx: f64, count: usize) -> Vec<f64> {
    let table = &w.measure.jump;
    let big_k = table.k_max();
    let c2 = table.tail_coefficient();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * dx;
            let poles: f64 = w.poles().iter().map(|p| 0.5 * p.alpha * (p.k.im * t).cosh()).sum();
            filon_cosine(table, t) + c2 * cosine_tail(big_k, t) + poles
        })
        .collect()
}

/// Kernel `g(x,y)` on the grid from Weyl data (symmetric extension).
pub fn build_g(w: &WeylData, grid: &[f64], opts: &KernelOptions) -> Result<Kernel2D> {
    let dx = uniform_spacing(grid)?;
    let table = &w.measure.jump;
    let unresolved = table.tail_spread() / table.k_max();
    if unresolved > opts.resolution_tol {
        return Err(Error::QuadratureResolution(format!(
            "the 1/k² tail model leaves {unresolved:.3e} unresolved at K_max = {} (tolerance {:.1e})",
            table.k_max(),
            opts.resolution_tol
        )));
    }
    let n = grid.len();
    let big_g = g_profile(w, dx, 2 * n - 1);
    let mut values = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            values.push(big_g[i - j] + big_g[i + j]);
        }
    }
    Ok(Kernel2D {
        grid_x: grid.to_vec(),
        values,
        kind: KernelKind::G,
        extension: Extension::Symmetric,
    })
}

/// `∫₀^x sup_{0≤s≤t} |g(t,s)| dt` by the trapezoid rule.
pub fn check_solvability(g: &Kernel2D, x: f64) -> Result<f64> {
    let last = g.node(x)?;
    let dx = g.spacing();
    let sup: Vec<f64> = (0..=last)
        .map(|i| g.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    Ok(sup.windows(2).map(|p| 0.5 * dx * (p[0] + p[1])).sum())
}

/// One solved row `K(x, y_j)`, `j ≤ i`.
#[derive(Clone, Debug)]
pub struct GlRow {
    pub x: f64,
    pub values: Vec<f64>,
    pub residual: f64,
    pub condition_estimate: f64,
}

fn trapezoid_weights(n: usize, dx: f64) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    let mut w = vec![dx; n + 1];
    w[0] = 0.5 * dx;
    w[n] = 0.5 * dx;
    w
}

/// Quadrature weights on `m` uniform intervals of width `dx`: trapezoid for one interval,
/// Newton–Cotes up to four, Gregory end corrections beyond (exact for cubics).
fn volterra_weights(m: usize, dx: f64) -> Vec<f64> {
    let w: Vec<f64> = match m {
        0 => vec![0.0],
        1 => vec![0.5, 0.5],
        2 => vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
        3 => vec![3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0],
        4 => vec![14.0 / 45.0, 64.0 / 45.0, 24.0 / 45.0, 64.0 / 45.0, 14.0 / 45.0],
        _ => {
            let mut w = vec![1.0; m + 1];
            for (i, c) in [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0].into_iter().enumerate() {
                w[i] = c;
                w[m - i] = c;
            }
            w
        }
    };
    w.into_iter().map(|v| v * dx).collect()
}

/// `∂g/∂y` at `(x_i, y_j)`, `j ≤ i`, from the lower-triangular table.
fn g_dy(g: &Kernel2D, i: usize, j: usize) -> f64 {
    let dx = g.spacing();
    if j >= 1 && j < i {
        (g.get(i, j + 1) - g.get(i, j - 1)) / (2.0 * dx)
    } else if j == i && i >= 2 {
        (3.0 * g.get(i, i) - 4.0 * g.get(i, i - 1) + g.get(i, i - 2)) / (2.0 * dx)
    } else if j == i && i == 1 {
        (g.get(1, 1) - g.get(1, 0)) / dx
    } else if i >= 2 {
        (-3.0 * g.get(i, 0) + 4.0 * g.get(i, 1) - g.get(i, 2)) / (2.0 * dx)
    } else if i == 1 {
        (g.get(1, 1) - g.get(1, 0)) / dx
    } else {
        0.0
    }
}

/// `∂g/∂x` at `(x_i, y_j)`, `j ≤ i`, from the lower-triangular table.
fn g_dx(g: &Kernel2D, i: usize, j: usize) -> f64 {
    let dx = g.spacing();
    let last = g.len() - 1;
    if i > j && i < last {
        (g.get(i + 1, j) - g.get(i - 1, j)) / (2.0 * dx)
    } else if i + 2 <= last {
        (-3.0 * g.get(i, j) + 4.0 * g.get(i + 1, j) - g.get(i + 2, j)) / (2.0 * dx)
    } else if i > j {
        (g.get(i, j) - g.get(i - 1, j)) / dx
    } else if i < last {
        (g.get(i + 1, j) - g.get(i, j)) / dx
    } else {
        0.0
    }
}

/// `∫ K(x_n,s) g(s,y_j) ds` as discretized by the solver.
///
/// Symmetric kernels integrate over `[0, x_n]` with the trapezoid rule. Triangular
/// kernels integrate over `[y_j, x_n]`; single cells get Euler–Maclaurin end corrections
/// with the slope of `K` taken from the differentiated equation.
fn row_integral(g: &Kernel2D, n: usize, j: usize, k: &[f64]) -> f64 {
    let dx = g.spacing();
    match g.extension {
        Extension::Symmetric => {
            let w = trapezoid_weights(n, dx);
            (0..=n).map(|s| w[s] * k[s] * g.at(s, j)).sum()
        }
        Extension::Triangular => {
            let m = n - j;
            if m != 1 {
                let w = volterra_weights(m, dx);
                return (j..=n).map(|s| w[s - j] * k[s] * g.get(s, j)).sum();
            }
            let (ka, kb) = (k[j], k[n]);
            let (gaa, gba, gbb) = (g.get(j, j), g.get(n, j), g.get(n, n));
            let slope_b = g_dy(g, n, n) + kb * gbb;
            let slope_a = g_dy(g, n, j) + ka * gaa - 0.5 * dx * (ka * g_dy(g, j, j) + kb * g_dy(g, n, j));
            let fa = ka * gaa;
            let fb = kb * gba;
            let dfa = slope_a * gaa + ka * g_dx(g, j, j);
            let dfb = slope_b * gba + kb * g_dx(g, n, j);
            0.5 * dx * (fa + fb) + dx * dx / 12.0 * (dfa - dfb)
        }
    }
}

/// Max-norm residual of `K(x,y) − g(x,y) + ∫₀^x K(x,s) g(s,y) ds` on row `n`, evaluated
/// with the same quadrature as the solver.
pub fn row_residual(g: &Kernel2D, n: usize, k_row: &[f64]) -> f64 {
    if g.extension == Extension::Symmetric {
        // row-ordered accumulation of Σ_s w_s K_s g(s, j)
        let w = trapezoid_weights(n, g.spacing());
        let c: Vec<f64> = (0..=n).map(|s| w[s] * k_row[s]).collect();
        let mut acc = vec![0.0; n + 1];
        for s in 0..=n {
            let row = g.row(s);
            for (a, v) in acc[..=s].iter_mut().zip(row) {
                *a += c[s] * v;
            }
        }
        for j in 1..=n {
            acc[j] += dot(&g.row(j)[..j], &c[..j]);
        }
        return (0..=n)
            .map(|j| (k_row[j] - g.get(n, j) + acc[j]).abs())
            .fold(0.0, f64::max);
    }
    (0..=n)
        .map(|j| (k_row[j] - g.at(n, j) + row_integral(g, n, j, k_row)).abs())
        .fold(0.0, f64::max)
}

/// Solves the Nyström system of one row by dense LU factorization.
pub fn solve_gl(g: &Kernel2D, x: f64) -> Result<GlRow> {
    let n = g.node(x)?;
    let dim = n + 1;
    let mut a = nalgebra::DMatrix::<f64>::identity(dim, dim);
    match g.extension {
        Extension::Symmetric => {
            let w = trapezoid_weights(n, g.spacing());
            for s in 0..dim {
                for j in 0..dim {
                    a[(j, s)] += w[s] * g.at(s, j);
                }
            }
        }
        Extension::Triangular => {
            // the discrete integral is linear in the row: read its matrix off unit vectors
            let mut unit = vec![0.0; dim];
            for s in 0..dim {
                unit[s] = 1.0;
                for j in 0..=s {
                    a[(j, s)] += row_integral(g, n, j, &unit);
                }
                unit[s] = 0.0;
            }
        }
    }
    let b = nalgebra::DVector::from_fn(dim, |j, _| g.at(n, j));
    let norm1 = (0..dim).map(|c| a.column(c).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let lu = a.clone().lu();
    let sol = lu.solve(&b).ok_or(Error::Solvability {
        x,
        condition: f64::INFINITY,
    })?;
    let lu_t = a.transpose().lu();
    let inv_norm = inverse_norm1_estimate(dim, |v| lu.solve(v), |v| lu_t.solve(v));
    let condition = norm1 * inv_norm;
    if !condition.is_finite() || condition > 1e12 {
        return Err(Error::Solvability { x, condition });
    }
    let values: Vec<f64> = sol.iter().copied().collect();
    let residual = row_residual(g, n, &values);
    Ok(GlRow {
        x: g.grid_x[n],
        values,
        residual,
        condition_estimate: condition,
    })
}

/// Hager's estimate of `‖A⁻¹‖₁` from solves with `A` and `Aᵀ`.
fn inverse_norm1_estimate(
    dim: usize,
    solve: impl Fn(&nalgebra::DVector<f64>) -> Option<nalgebra::DVector<f64>>,
    solve_t: impl Fn(&nalgebra::DVector<f64>) -> Option<nalgebra::DVector<f64>>,
) -> f64 {
    let mut x = nalgebra::DVector::from_element(dim, 1.0 / dim as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let Some(y) = solve(&x) else { return f64::INFINITY };
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = solve_t(&xi) else { return f64::INFINITY };
        let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |(bj, bv), (j, v)| {
            if v.abs() > bv {
                (j, v.abs())
            } else {
                (bj, bv)
            }
        });
        if zmax <= z.dot(&x) {
            break;
        }
        x.fill(0.0);
        x[jmax] = 1.0;
    }
    est
}

/// All rows of `K` with diagnostics.
#[derive(Clone, Debug)]
pub struct GlSolution {
    pub kernel: Kernel2D,
    pub max_residual: f64,
    pub condition_estimate: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Lower Cholesky factor (row-major, in place). Returns the failing row on breakdown.
///
/// Rows are processed in blocks so that each earlier row is streamed once per block.
fn cholesky(a: &mut [f64], n: usize) -> std::result::Result<(), usize> {
    const BLOCK: usize = 64;
    for b0 in (0..n).step_by(BLOCK) {
        let b1 = (b0 + BLOCK).min(n);
        let (head, block) = a.split_at_mut(b0 * n);
        for j in 0..b0 {
            let rj = &head[j * n..j * n + j];
            let d = head[j * n + j];
            for i in b0..b1 {
                let ri = &mut block[(i - b0) * n..(i - b0) * n + n];
                ri[j] = (ri[j] - dot(&ri[..j], rj)) / d;
            }
        }
        for i in b0..b1 {
            for j in b0..=i {
                let (prev, rest) = block.split_at_mut((i - b0) * n);
                let ri = &mut rest[..n];
                if j == i {
                    let s = ri[i] - dot(&ri[..i], &ri[..i]);
                    if !(s > 1e-14) {
                        return Err(i);
                    }
                    ri[i] = s.sqrt();
                } else {
                    let rj = &prev[(j - b0) * n..(j - b0) * n + n];
                    ri[j] = (ri[j] - dot(&ri[..j], &rj[..j])) / rj[j];
                }
            }
        }
    }
    Ok(())
}

/// Solves every row of the Gelfand–Levitan equation.
///
/// Symmetric kernels: one Cholesky factorization of `I + D^{1/2} G D^{1/2}` serves every
/// leading block; the halved trapezoid weight at the row end is a rank-one update
/// handled by Sherman–Morrison. Triangular kernels: back substitution per row.
pub fn solve_all(g: &Kernel2D) -> Result<GlSolution> {
    if g.kind != KernelKind::G {
        return Err(Error::InvalidInput("solve_all expects a g kernel".into()));
    }
    match g.extension {
        Extension::Symmetric => solve_symmetric(g),
        Extension::Triangular => solve_triangular(g),
    }
}

fn solve_symmetric(g: &Kernel2D) -> Result<GlSolution> {
    let n = g.len();
    let dx = g.spacing();
    let d: Vec<f64> = (0..n).map(|i| if i == 0 { 0.5 * dx } else { dx }).collect();
    let sd: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            l[i * n + j] = if i == j { 1.0 } else { 0.0 } + sd[i] * g.get(i, j) * sd[j];
        }
    }
    if let Err(i) = cholesky(&mut l, n) {
        return Err(Error::Solvability {
            x: g.grid_x[i],
            condition: f64::INFINITY,
        });
    }
    let (dmin, dmax) = (0..n).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
        let v = l[i * n + i];
        (lo.min(v), hi.max(v))
    });
    let condition = (dmax / dmin).powi(2);

    // Row m solves (S_m + e_m e_mᵀ) y = D^{1/2} g(x_m, ·) with S_m = L_m L_mᵀ. Writing
    // z = L_m⁻¹ b, Sherman–Morrison reduces to one back substitution of
    // z − (y⁰_m / (1 + 1/L_mm²)) e_m / L_mm, where y⁰_m = z_m / L_mm.
    // Batches of rows share each pass over L.
    const BATCH: usize = 32;
    let batches: Vec<usize> = (1..n).step_by(BATCH).collect();
    let mut rows: Vec<(Vec<f64>, f64)> = vec![(vec![g.get(0, 0)], 0.0)];
    let solved: Vec<Vec<(Vec<f64>, f64)>> = batches
        .into_par_iter()
        .map(|m0| {
            let m1 = (m0 + BATCH).min(n);
            let mut rhs: Vec<Vec<f64>> = (m0..m1)
                .map(|m| (0..=m).map(|j| sd[j] * g.get(m, j)).collect())
                .collect();
            for i in 0..m1 {
                let li = &l[i * n..i * n + i];
                let lii = l[i * n + i];
                for r in rhs.iter_mut().filter(|r| r.len() > i) {
                    r[i] = (r[i] - dot(li, &r[..i])) / lii;
                }
            }
            for (r, m) in rhs.iter_mut().zip(m0..m1) {
                let lmm = l[m * n + m];
                let factor = (r[m] / lmm) / (1.0 + 1.0 / (lmm * lmm));
                r[m] -= factor / lmm;
            }
            for i in (0..m1).rev() {
                let li = &l[i * n..i * n + i];
                let lii = l[i * n + i];
                for r in rhs.iter_mut().filter(|r| r.len() > i) {
                    r[i] /= lii;
                    let v = r[i];
                    for (rj, lij) in r[..i].iter_mut().zip(li) {
                        *rj -= lij * v;
                    }
                }
            }
            rhs.into_iter()
                .zip(m0..m1)
                .map(|(y, m)| {
                    let k: Vec<f64> = y
                        .iter()
                        .enumerate()
                        .map(|(j, v)| if j == m { 2.0 * v / sd[j] } else { v / sd[j] })
                        .collect();
                    let r = row_residual(g, m, &k);
                    (k, r)
                })
                .collect()
        })
        .collect();
    rows.extend(solved.into_iter().flatten());
    finish(g, rows, condition)
}

fn solve_triangular(g: &Kernel2D) -> Result<GlSolution> {
    let n = g.len();
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut k = vec![0.0; m + 1];
            for j in (0..=m).rev() {
                // the integral over [y_j, x_m] is affine in k[j]
                k[j] = 0.0;
                let base = row_integral(g, m, j, &k);
                k[j] = 1.0;
                let slope = row_integral(g, m, j, &k) - base;
                k[j] = (g.get(m, j) - base) / (1.0 + slope);
            }
            let r = row_residual(g, m, &k);
            (k, r)
        })
        .collect();
    finish(g, rows, 1.0)
}

fn finish(g: &Kernel2D, rows: Vec<(Vec<f64>, f64)>, condition: f64) -> Result<GlSolution> {
    let mut values = Vec::with_capacity(g.values.len());
    let mut max_residual = 0.0f64;
    for (i, (row, r)) in rows.into_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solvability {
                x: g.grid_x[i],
                condition,
            });
        }
        max_residual = max_residual.max(r);
        values.extend(row);
    }
    Ok(GlSolution {
        kernel: Kernel2D {
            grid_x: g.grid_x.clone(),
            values,
            kind: KernelKind::K,
            extension: Extension::Triangular,
        },
        max_residual,
        condition_estimate: condition,
    })
}

/// `K(x,y) = 2∫₀^∞ q(k) φ(x,k) cos(ky) dk + Σ_j α_j φ(x,k_j) cos(k_j y)` on a block of
/// points, using the forward regular solution. Returns `out[i][j] = K(xs[i], ys[j])`.
pub fn kernel_direct_many(w: &WeylData, prob: &RobinProblem, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
    let table = &w.measure.jump;
    let big_k = table.k_max();
    let steps = 4 * (table.samples().len() - 1);
    let h = big_k / steps as f64;
    let x_top = xs.iter().fold(0.0f64, |m, v| m.max(*v));
    let contributions: Vec<Vec<f64>> = (0..=steps)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let k = i as f64 * h;
            let simpson = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            } * h
                / 3.0;
            let phi = regular_solution(prob, Complex64::new(k, 0.0), x_top)?;
            let qk = table.q(k);
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for &x in xs {
                let px = phi.value_at(x)?.re;
                for &y in ys {
                    out.push(2.0 * simpson * qk * px * (k * y).cos());
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![crate::numeric::CompensatedSum::default(); xs.len() * ys.len()];
    for c in &contributions {
        for (a, v) in acc.iter_mut().zip(c) {
            a.add(*v);
        }
    }
    let c2 = table.tail_coefficient();
    let mut pole_phi = Vec::new();
    for p in w.poles() {
        let phi = regular_solution(prob, p.k, x_top)?;
        pole_phi.push(xs.iter().map(|&x| phi.value_at(x).map(|v| v.re)).collect::<Result<Vec<f64>>>()?);
    }
    let mut out = vec![vec![0.0; ys.len()]; xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let mut v = acc[i * ys.len() + j].value();
            v += c2 * (cosine_tail(big_k, x - y) + cosine_tail(big_k, x + y));
            for (p, phis) in w.poles().iter().zip(&pole_phi) {
                v += p.alpha * phis[i] * (p.k.im * y).cosh();
            }
            out[i][j] = v;
        }
    }
    Ok(out)
}

/// Single-point form of [`kernel_direct_many`].
pub fn kernel_direct(w: &WeylData, prob: &RobinProblem, x: f64, y: f64) -> Result<f64> {
    Ok(kernel_direct_many(w, prob, &[x], &[y])?[0][0])
}

/// Potential and Robin coefficient from the diagonal `K(x,x)`.
#[derive(Clone, Debug)]
pub struct Extracted {
    pub potential: PotentialGrid,
    pub h: f64,
    /// Largest mismatch of `∫₀^x V − 2h + 2K(x,x)` over `x ≤ x_support`.
    pub identity_mismatch: f64,
}

/// `V = −2 d/dx K(x,x)`, `h = K(0,0)`, checked against the integrated identity.
pub fn extract_potential(k_diag: &[f64], grid: &[f64], x_support: f64, tol: f64) -> Result<Extracted> {
    if k_diag.len() != grid.len() {
        return Err(Error::InvalidInput("diagonal and grid differ in length".into()));
    }
    let dx = uniform_spacing(grid)?;
    let v: Vec<f64> = first_derivative(k_diag, dx).iter().map(|d| -2.0 * d).collect();
    let h = k_diag[0];
    let integral = cumulative_trapezoid(&v, dx);
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..grid.len() {
        if grid[i] > x_support * (1.0 + 1e-12) {
            break;
        }
        let mismatch = (integral[i] - 2.0 * h + 2.0 * k_diag[i]).abs();
        if mismatch > worst.1 {
            worst = (grid[i], mismatch);
        }
    }
    if worst.1 > tol {
        return Err(Error::Extraction {
            x: worst.0,
            mismatch: worst.1,
        });
    }
    Ok(Extracted {
        potential: PotentialGrid::from_samples(grid.to_vec(), v, x_support)?,
        h,
        identity_mismatch: worst.1,
    })
}

/// `φ(x,k) = cos kx − ∫₀^x K(x,t) cos kt dt` (trapezoid rule, `x` a grid node).
pub fn regular_solution_from_kernel(kernel: &Kernel2D, k: Complex64, x: f64) -> Result<Complex64> {
    let n = kernel.node(x)?;
    let w = trapezoid_weights(n, kernel.spacing());
    let row = kernel.row(n);
    let mut acc = CompensatedComplex::default();
    for j in 0..=n {
        acc.add(w[j] * row[j] * (k * kernel.grid_x[j]).cos());
    }
    Ok((k * kernel.grid_x[n]).cos() - acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::uniform_grid;
    use std::f64::consts::PI;

    fn free_data(h: f64) -> WeylData {
        let q = move |k: f64| if h == 0.0 { 0.0 } else { -h * h / (PI * (k * k + h * h)) };
        let poles = if h > 0.0 {
            vec![Pole { k: I * h, alpha: 2.0 * h }]
        } else {
            vec![]
        };
        WeylData::new(SpectralMeasure {
            poles,
            jump: JumpTable::from_fn(q, 200.0, 0.05).unwrap(),
        })
        .unwrap()
    }

    #[test]
    fn free_data_gives_zero_kernel() {
        let grid = uniform_grid(51, 1.0);
        let g = build_g(&free_data(0.0), &grid, &KernelOptions::default()).unwrap();
        for i in 0..51 {
            for &v in g.row(i) {
                assert!(v.abs() < 1e-12);
            }
        }
        let sol = solve_all(&g).unwrap();
        assert!(sol.kernel.diagonal().iter().all(|v| v.abs() < 1e-12));
        assert_eq!(check_solvability(&g, 1.0).unwrap(), check_solvability(&g, 1.0).unwrap());
    }

    #[test]
    fn robin_free_data_recovers_constant_diagonal() {
        let grid = uniform_grid(201, 1.0);
        let g = build_g(&free_data(1.0), &grid, &KernelOptions::default()).unwrap();
        assert!((g.get(0, 0) - 1.0).abs() < 1e-4);
        // g(x,x) = eˣ cosh x for this data
        for i in [50, 100, 200] {
            let x = grid[i];
            assert!((g.get(i, i) - x.exp() * x.cosh()).abs() < 1e-3, "x = {x}");
        }
        let sol = solve_all(&g).unwrap();
        assert!(sol.max_residual < 1e-9);
        let worst = sol.kernel.diagonal().iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        eprintln!("free Robin diagonal error {worst:.3e}");
        assert!(worst < 2e-3);
    }

    #[test]
    fn triangular_constant_kernel_closed_form() {
        let c = 0.7;
        let grid = uniform_grid(401, 1.0);
        let g = Kernel2D::from_fn(grid.clone(), KernelKind::G, Extension::Triangular, |_, _| c).unwrap();
        let sol = solve_all(&g).unwrap();
        assert!(sol.max_residual <= 1e-9);
        let mut worst = 0.0f64;
        for (i, &x) in grid.iter().enumerate() {
            for (j, &y) in grid[..=i].iter().enumerate() {
                worst = worst.max((sol.kernel.get(i, j) - c * (c * (y - x)).exp()).abs());
            }
        }
        assert!(worst < 1e-10, "{worst:e}");
        let row = solve_gl(&g, 1.0).unwrap();
        for (j, v) in row.values.iter().enumerate() {
            assert!((v - sol.kernel.get(400, j)).abs() < 1e-11);
        }
    }

    #[test]
    fn symmetric_constant_kernel_matches_rational_closed_form() {
        let c = 0.5;
        let grid = uniform_grid(101, 1.0);
        let g = Kernel2D::from_fn(grid.clone(), KernelKind::G, Extension::Symmetric, |_, _| c).unwrap();
        let sol = solve_all(&g).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            for j in 0..=i {
                assert!((sol.kernel.get(i, j) - c / (1.0 + c * x)).abs() < 1e-12);
            }
        }
        let row = solve_gl(&g, 0.6).unwrap();
        assert!(row.residual < 1e-12 && row.condition_estimate < 10.0);
    }

    #[test]
    fn nested_cholesky_agrees_with_dense_lu() {
        let grid = uniform_grid(61, 1.0);
        let g = Kernel2D::from_fn(grid, KernelKind::G, Extension::Symmetric, |x, y| {
            (x - y).cos() * 0.8 + (x + y).sin() * 0.3
        })
        .unwrap();
        let sol = solve_all(&g).unwrap();
        for x in [0.0, 1.0 / 60.0, 0.5, 1.0] {
            let row = solve_gl(&g, x).unwrap();
            let i = g.node(x).unwrap();
            for (j, v) in row.values.iter().enumerate() {
                assert!((v - sol.kernel.get(i, j)).abs() < 1e-12);
            }
        }
        assert!(sol.max_residual < 1e-12);
    }

    #[test]
    fn indefinite_kernel_is_a_solvability_error() {
        let grid = uniform_grid(41, 1.0);
        let g = Kernel2D::from_fn(grid, KernelKind::G, Extension::Symmetric, |_, _| -3.0).unwrap();
        assert!(matches!(solve_all(&g), Err(Error::Solvability { .. })));
    }

    #[test]
    fn extraction_rules() {
        let grid = uniform_grid(101, 1.0);
        let c = extract_potential(&vec![0.3; 101], &grid, 1.0, 1e-10).unwrap();
        assert!(c.potential.v.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(c.h, 0.3);
        let sq: Vec<f64> = grid.iter().map(|x| x * x).collect();
        let e = extract_potential(&sq, &grid, 1.0, 1e-10).unwrap();
        for (x, v) in grid.iter().zip(&e.potential.v) {
            assert!((v + 4.0 * x).abs() < 1e-10);
        }
        assert_eq!(e.h, 0.0);
        let mut bumpy = sq.clone();
        bumpy[50] += 1e-3;
        assert!(matches!(
            extract_potential(&bumpy, &grid, 1.0, 1e-6),
            Err(Error::Extraction { .. })
        ));
    }

    #[test]
    fn solvability_bound_of_constant_kernel() {
        let grid = uniform_grid(101, 1.0);
        let g = Kernel2D::from_fn(grid, KernelKind::G, Extension::Triangular, |_, _| 2.0).unwrap();
        assert!((check_solvability(&g, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_kernel_gives_cosine() {
        let grid = uniform_grid(11, 1.0);
        let k = Kernel2D::from_fn(grid, KernelKind::K, Extension::Triangular, |_, _| 0.0).unwrap();
        let v = regular_solution_from_kernel(&k, Complex64::new(2.0, 0.0), 0.5).unwrap();
        assert!((v.re - 1f64.cos()).abs() < 1e-15);
    }
}
