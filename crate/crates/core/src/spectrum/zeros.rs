//! Zeros of the Jost function: eigenvalues on the positive imaginary axis and
//! resonances in the closed lower half plane.

use super::JostEvaluator;
use crate::error::{Error, Result};
use crate::numeric::bracketed_root;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Number of samples of `τ ↦ f_h(iτ)` used to bracket sign changes.
const EIGEN_SAMPLES: usize = 2000;

/// Eigenvalues `k_j = iτ_j`, `0 < τ_j < tau_max`, sorted by decreasing modulus.
///
/// Samples are quadratically clustered towards `τ = 0`. Two eigenvalues closer than
/// the local sample spacing (about `tau_max/1000` at the top) would be missed.
pub fn find_eigenvalues(f: &JostEvaluator, tau_max: f64) -> Result<Vec<Complex64>> {
    if !(tau_max > 0.0) {
        return Err(Error::InvalidInput(format!("tau_max = {tau_max} must be positive")));
    }
    let taus: Vec<f64> = (1..=EIGEN_SAMPLES)
        .map(|i| {
            let s = i as f64 / EIGEN_SAMPLES as f64;
            tau_max * s * s
        })
        .collect();
    let vals: Vec<Complex64> = taus
        .par_iter()
        .map(|&t| f.eval(I * t))
        .collect::<Result<_>>()?;
    for (t, v) in taus.iter().zip(&vals) {
        if v.im.abs() > 1e-8 * v.norm().max(1.0) {
            return Err(Error::BackendInconsistency(format!(
                "f_h(iτ) is not real at τ = {t}: {v}"
            )));
        }
    }
    let real = |t: f64| -> Result<f64> { Ok(f.eval(I * t)?.re) };
    let mut roots = Vec::new();
    for i in 0..taus.len() - 1 {
        let (a, b) = (vals[i].re, vals[i + 1].re);
        if a == 0.0 {
            roots.push(taus[i]);
        } else if a.signum() != b.signum() && b != 0.0 {
            roots.push(bracketed_root(real, taus[i], taus[i + 1])?);
        }
    }
    let mut ks: Vec<Complex64> = roots.into_iter().map(|t| I * t).collect();
    for k in &ks {
        let scale = f.derivative(*k)?.norm().max(1.0) * k.norm().max(1.0);
        let r = f.eval(*k)?.norm();
        if r > 1e-10 * scale {
            log::warn!("eigenvalue {k} polished only to |f_h| = {r:e}");
        }
    }
    ks.sort_by(|a, b| b.im.total_cmp(&a.im));
    Ok(ks)
}

/// Axis-aligned rectangle in the complex `k` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_lo, self.im_lo),
            Complex64::new(self.re_hi, self.im_lo),
            Complex64::new(self.re_hi, self.im_hi),
            Complex64::new(self.re_lo, self.im_hi),
        ]
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_lo - slack && z.re <= self.re_hi + slack && z.im >= self.im_lo - slack && z.im <= self.im_hi + slack
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))
    }

    fn size(&self) -> f64 {
        (self.re_hi - self.re_lo).max(self.im_hi - self.im_lo)
    }

    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.re_hi - self.re_lo >= self.im_hi - self.im_lo {
            let m = self.re_lo + frac * (self.re_hi - self.re_lo);
            (Rect { re_hi: m, ..*self }, Rect { re_lo: m, ..*self })
        } else {
            let m = self.im_lo + frac * (self.im_hi - self.im_lo);
            (Rect { im_hi: m, ..*self }, Rect { im_lo: m, ..*self })
        }
    }

    fn incomplete(&self, counted: i64, found: usize) -> Error {
        Error::IncompleteSearch {
            re_lo: self.re_lo,
            re_hi: self.re_hi,
            im_lo: self.im_lo,
            im_hi: self.im_hi,
            counted,
            found,
        }
    }
}

/// Raised internally when the contour passes too close to a zero.
struct OnContour;

fn edge_increment(
    f: &JostEvaluator,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: u32,
) -> Result<std::result::Result<f64, OnContour>> {
    if fa.norm() == 0.0 || fb.norm() == 0.0 {
        return Ok(Err(OnContour));
    }
    let d = (fb / fa).arg();
    if d.abs() < 0.4 {
        return Ok(Ok(d));
    }
    if depth == 0 {
        return Ok(Err(OnContour));
    }
    let m = 0.5 * (a + b);
    let fm = f.eval(m)?;
    let left = match edge_increment(f, a, m, fa, fm, depth - 1)? {
        Ok(v) => v,
        Err(e) => return Ok(Err(e)),
    };
    let right = match edge_increment(f, m, b, fm, fb, depth - 1)? {
        Ok(v) => v,
        Err(e) => return Ok(Err(e)),
    };
    Ok(Ok(left + right))
}

/// Argument-principle zero count inside `rect`.
fn count_zeros(f: &JostEvaluator, rect: &Rect) -> Result<std::result::Result<i64, OnContour>> {
    let corners = rect.corners();
    let scale = f.support_scale();
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let len = (b - a).norm();
        let segments = ((len * 8.0 * scale).ceil() as usize).max(8);
        let pts: Vec<Complex64> = (0..=segments).map(|i| a + (b - a) * (i as f64 / segments as f64)).collect();
        let vals: Vec<Complex64> = pts.par_iter().map(|&z| f.eval(z)).collect::<Result<_>>()?;
        for i in 0..segments {
            match edge_increment(f, pts[i], pts[i + 1], vals[i], vals[i + 1], 30)? {
                Ok(d) => total += d,
                Err(e) => return Ok(Err(e)),
            }
        }
    }
    let w = total / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.05 || n < 0.0 {
        return Ok(Err(OnContour));
    }
    Ok(Ok(n as i64))
}

fn newton(f: &JostEvaluator, start: Complex64, tol: f64) -> Result<Option<Complex64>> {
    let mut z = start;
    for _ in 0..80 {
        let fz = f.eval(z)?;
        let d = f.derivative(z)?;
        if d.norm() == 0.0 || !d.re.is_finite() {
            return Ok(None);
        }
        let step = fz / d;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Ok(None);
        }
        if step.norm() <= 1e-13 * z.norm().max(1.0) {
            let r = f.eval(z)?.norm();
            let scale = f.derivative(z)?.norm().max(1.0) * z.norm().max(1.0);
            return Ok((r <= tol * scale).then_some(z));
        }
    }
    Ok(None)
}

const MAX_DEPTH: u32 = 40;
const SPLIT_FRACTIONS: [f64; 7] = [0.5, 0.46, 0.54, 0.41, 0.59, 0.37, 0.63];

fn search(f: &JostEvaluator, rect: Rect, count: i64, depth: u32, tol: f64) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        let slack = 1e-9 * rect.size().max(1.0);
        let c = rect.center();
        let (w, h) = (rect.re_hi - rect.re_lo, rect.im_hi - rect.im_lo);
        for start in [
            c,
            c + Complex64::new(0.25 * w, 0.25 * h),
            c - Complex64::new(0.25 * w, 0.25 * h),
            c + Complex64::new(0.25 * w, -0.25 * h),
            c - Complex64::new(0.25 * w, -0.25 * h),
        ] {
            if let Some(z) = newton(f, start, tol)? {
                if rect.contains(z, slack) {
                    return Ok(vec![z]);
                }
            }
        }
    }
    if depth >= MAX_DEPTH {
        return Err(rect.incomplete(count, 0));
    }
    for frac in SPLIT_FRACTIONS {
        let (r1, r2) = rect.split(frac);
        let Ok(c1) = count_zeros(f, &r1)? else { continue };
        let Ok(c2) = count_zeros(f, &r2)? else { continue };
        if c1 + c2 != count {
            continue;
        }
        let (a, b) = rayon::join(
            || search(f, r1, c1, depth + 1, tol),
            || search(f, r2, c2, depth + 1, tol),
        );
        let mut out = a?;
        out.extend(b?);
        return Ok(out);
    }
    Err(rect.incomplete(count, 0))
}

/// Zeros of `f_h` in `region` located by the argument principle with recursive
/// subdivision, each polished by Newton's method.
///
/// `tol` bounds `|f_h(z)|` relative to the local scale `|ḟ_h(z)|·max(1,|z|)`.
pub fn find_resonances(f: &JostEvaluator, region: Rect, tol: f64) -> Result<Vec<Complex64>> {
    if !(region.re_lo < region.re_hi && region.im_lo < region.im_hi) {
        return Err(Error::InvalidInput(format!("degenerate search region {region:?}")));
    }
    if region.im_hi > 0.0 {
        return Err(Error::InvalidInput("resonance search region must lie in Im k ≤ 0".into()));
    }
    // Nudge the outer contour if it passes through a zero. A zero on the real
    // axis (the threshold k = 0) is stepped over by lowering the top edge.
    let mut rect = region;
    let mut count = None;
    'outer: for drop in [0.0, 1e-6 * region.size().max(1.0)] {
        for attempt in 0..6 {
            let pad = attempt as f64 * 1e-3 * region.size().max(1.0);
            rect = Rect {
                re_lo: region.re_lo - pad,
                re_hi: region.re_hi + pad,
                im_lo: region.im_lo - pad,
                im_hi: region.im_hi - drop,
            };
            if let Ok(n) = count_zeros(f, &rect)? {
                if drop > 0.0 {
                    log::warn!("zero of f_h on the real axis near k = 0, top edge lowered to Im k = {}", rect.im_hi);
                }
                count = Some(n);
                break 'outer;
            }
        }
    }
    let Some(count) = count else {
        return Err(region.incomplete(-1, 0));
    };
    let mut zeros = search(f, rect, count, 0, tol)?;
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    zeros.dedup_by(|a, b| (*a - *b).norm() <= 1e-9 * a.norm().max(1.0));
    if zeros.len() as i64 != count {
        return Err(rect.incomplete(count, zeros.len()));
    }
    Ok(zeros.into_iter().filter(|z| region.contains(*z, 0.0)).collect())
}
