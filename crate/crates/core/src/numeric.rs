//! Grids, finite differences, compensated sums and small quadrature/root helpers.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Checks that `x` is a uniform ascending grid starting at 0 with at least 5 points
/// and returns its spacing.
pub fn uniform_spacing(x: &[f64]) -> Result<f64> {
    if x.len() < 5 {
        return Err(Error::Resolution(format!(
            "need at least 5 grid points, got {}",
            x.len()
        )));
    }
    if x[0].abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("grid must start at 0, starts at {}", x[0])));
    }
    let n = x.len();
    let dx = (x[n - 1] - x[0]) / (n - 1) as f64;
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::InvalidInput("grid must be strictly ascending".into()));
    }
    for (i, &xi) in x.iter().enumerate() {
        if (xi - i as f64 * dx).abs() > 1e-9 * dx.max(x[n - 1].abs()) {
            return Err(Error::InvalidInput(format!(
                "grid is not uniform near x = {xi} (index {i})"
            )));
        }
    }
    Ok(dx)
}

/// Uniform grid of `n` points on `[0, x_max]`.
pub fn uniform_grid(n: usize, x_max: f64) -> Vec<f64> {
    let dx = x_max / (n - 1) as f64;
    (0..n).map(|i| i as f64 * dx).collect()
}

/// Second derivative: 4th-order central stencil inside, 2nd-order central next to the
/// ends, 2nd-order one-sided at the ends.
pub fn second_derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5);
    let h2 = dx * dx;
    let mut out = vec![0.0; n];
    for i in 2..n - 2 {
        out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h2);
    }
    for i in [1, n - 2] {
        out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / h2;
    }
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    out
}

/// First derivative: 4th-order central inside, 2nd-order stencils at and next to the ends.
pub fn first_derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5);
    let mut out = vec![0.0; n];
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dx);
    }
    for i in [1, n - 2] {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    out
}

/// 4th-order one-sided first derivative at the left end.
pub fn first_derivative_at_start(f: &[f64], dx: f64) -> f64 {
    (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * dx)
}

/// Cumulative trapezoid integral, `out[i] = ∫_0^{x_i} f`.
pub fn cumulative_trapezoid(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Complex counterpart of [`CompensatedSum`].
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedComplex {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplex {
    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Bisection/secant (Illinois) root of `f` on a sign-changing bracket `[a, b]`.
pub fn bracketed_root(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!("no sign change on [{a}, {b}]")));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let width = (b - a).abs();
        if width <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        // Fall back to bisection when the secant stalls.
        if (b - a).abs() > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m)?;
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk15(f: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WEIGHTS[7];
    let mut g = fc * G_WEIGHTS[3];
    for j in 0..7 {
        let dx = hw * GK_NODES[j];
        let s = f(c - dx) + f(c + dx);
        k += s * GK_WEIGHTS[j];
        if j % 2 == 1 {
            g += s * G_WEIGHTS[j / 2];
        }
    }
    (k * hw, ((k - g) * hw).norm())
}

/// Globally adaptive Gauss–Kronrod integral of a complex integrand over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed estimate
/// drops below `abs_tol` or `max_intervals` pieces exist. Returns (value, error estimate).
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> (Complex64, f64) {
    struct Piece {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }
    impl PartialEq for Piece {
        fn eq(&self, o: &Self) -> bool {
            self.err == o.err
        }
    }
    impl Eq for Piece {}
    impl PartialOrd for Piece {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Piece {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.err.total_cmp(&o.err)
        }
    }
    let (value, err) = gk15(&mut f, a, b);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Piece { a, b, value, err });
    let mut total_err = err;
    while total_err > abs_tol && heap.len() < max_intervals.max(1) {
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (lv, le) = gk15(&mut f, p.a, m);
        let (rv, re) = gk15(&mut f, m, p.b);
        total_err += le + re - p.err;
        heap.push(Piece { a: p.a, b: m, value: lv, err: le });
        heap.push(Piece { a: m, b: p.b, value: rv, err: re });
    }
    let mut v = CompensatedComplex::default();
    let mut e = 0.0;
    for p in heap {
        v.add(p.value);
        e += p.err;
    }
    (v.value(), e)
}

/// Complex linear least squares `min |A c − y|` with columns scaled to unit norm
/// before the SVD. `None` when `A` is rank deficient.
pub fn least_squares(rows: &[Vec<Complex64>], y: &[Complex64]) -> Option<Vec<Complex64>> {
    let m = rows.len();
    let n = rows.first()?.len();
    if m < n || y.len() != m {
        return None;
    }
    let mut a = nalgebra::DMatrix::<Complex64>::from_fn(m, n, |i, j| rows[i][j]);
    let mut scale = vec![1.0; n];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if !(norm > 0.0) {
            return None;
        }
        *s = norm;
        a.column_mut(j).unscale_mut(norm);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-13 * smax {
        return None;
    }
    let b = nalgebra::DVector::from_column_slice(y);
    let c = svd.solve(&b, 0.0).ok()?;
    Some(c.iter().zip(&scale).map(|(c, s)| c / s).collect())
}
