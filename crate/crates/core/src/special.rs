//! Special functions used by the product-integration and Filon weights.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

const SERIES_RADIUS: f64 = 1.0;

/// Sums `Σ_{n≥0} c_n(z)` where `term(n)` returns the coefficient of `z^n` times `z^n`
/// built incrementally; stops once terms stop contributing.
fn sum_series(mut next: impl FnMut(usize, Complex64) -> Complex64, first: Complex64) -> Complex64 {
    let mut term = first;
    let mut acc = first;
    for n in 1..60 {
        term = next(n, term);
        acc += term;
        if term.norm() <= 1e-17 * acc.norm() {
            break;
        }
    }
    acc
}

/// The exponential divided-difference functions `φ_j(z) = Σ_n z^n/(n+j)!` for j = 1, 2, 3.
///
/// `φ_1(z) = (e^z − 1)/z`, `φ_2(z) = (e^z − 1 − z)/z²`, `φ_3(z) = (e^z − 1 − z − z²/2)/z³`.
pub fn phi123(z: Complex64) -> (Complex64, Complex64, Complex64) {
    if z.norm() < SERIES_RADIUS {
        let series = |j: usize| {
            let first = Complex64::new(1.0 / factorial(j), 0.0);
            sum_series(|n, t| t * z / (n + j) as f64, first)
        };
        (series(1), series(2), series(3))
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        (p1, p2, p3)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `sin(w)/w`, continuous at zero.
pub fn sinc(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        let w2 = w * w;
        sum_series(|n, t| -t * w2 / ((2 * n) as f64 * (2 * n + 1) as f64), Complex64::new(1.0, 0.0))
    } else {
        w.sin() / w
    }
}

/// Moments of the sine/cosine kernels against a linear hat on one cell.
///
/// Returns `(c1, c2, c3)` with `c1 = (1 − cos w)/w²`, `c2 = (sin w − w cos w)/w³`,
/// `c3 = (w sin w + cos w − 1)/w²`.
pub fn trig_moments(w: Complex64) -> (Complex64, Complex64, Complex64) {
    if w.norm() < SERIES_RADIUS {
        let w2 = w * w;
        // c1 = Σ (−1)^n w^{2n}/(2n+2)!
        let c1 = sum_series(
            |n, t| -t * w2 / ((2 * n + 1) as f64 * (2 * n + 2) as f64),
            Complex64::new(0.5, 0.0),
        );
        // c2 = Σ_{n≥1} (−1)^{n+1} 2n w^{2n−2}/(2n+1)!
        let c2 = sum_series(
            |n, t| {
                let m = n + 1;
                -t * w2 * (m as f64) / ((m - 1) as f64 * (2 * m) as f64 * (2 * m + 1) as f64)
            },
            Complex64::new(1.0 / 3.0, 0.0),
        );
        // c3 = Σ_{m≥1} (−1)^m (1 − 2m) w^{2m−2}/(2m)!
        let c3 = sum_series(
            |n, t| {
                let m = n + 1;
                -t * w2 * ((2 * m - 1) as f64)
                    / ((2 * m - 3) as f64 * (2 * m - 1) as f64 * (2 * m) as f64)
            },
            Complex64::new(0.5, 0.0),
        );
        (c1, c2, c3)
    } else {
        let (s, c) = (w.sin(), w.cos());
        let w2 = w * w;
        ((1.0 - c) / w2, (s - w * c) / (w2 * w), (w * s + c - 1.0) / w2)
    }
}

/// Sine integral `Si(x) = ∫_0^x sin t / t dt`.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x <= 2.0 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        for n in 1..40 {
            let n = n as f64;
            term *= -x2 / ((2.0 * n) * (2.0 * n + 1.0));
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // Modified Lentz evaluation of the continued fraction for E1(ix).
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 2..10_000 {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(x.cos(), -x.sin());
        FRAC_PI_2 + h.im
    }
}

/// `∫_K^∞ cos(k t)/k² dk` for `K > 0`, `t ≥ 0`.
pub fn cosine_tail(big_k: f64, t: f64) -> f64 {
    let t = t.abs();
    (big_k * t).cos() / big_k - t * (FRAC_PI_2 - sine_integral(big_k * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_functions_match_closed_forms_across_the_switch() {
        for z in [c(0.3, 0.2), c(0.99, 0.0), c(1.01, 0.0), c(-2.0, 3.0), c(0.0, 5.0)] {
            let (p1, p2, p3) = phi123(z);
            let e = z.exp();
            assert_relative_eq!((p1 - (e - 1.0) / z).norm(), 0.0, epsilon = 1e-14);
            assert!((p2 - (e - 1.0 - z) / (z * z)).norm() < 1e-13);
            assert!((p3 - (e - 1.0 - z - z * z / 2.0) / (z * z * z)).norm() < 1e-12);
        }
        let (p1, p2, p3) = phi123(c(0.0, 0.0));
        assert_eq!((p1.re, p2.re, p3.re), (1.0, 0.5, 1.0 / 6.0));
    }

    #[test]
    fn trig_moments_continuous_at_switch() {
        for w in [c(0.999999, 0.0), c(0.0, 0.999999), c(0.7, 0.7)] {
            let (a1, a2, a3) = trig_moments(w);
            let (s, co) = (w.sin(), w.cos());
            assert!((a1 - (1.0 - co) / (w * w)).norm() < 1e-13);
            assert!((a2 - (s - w * co) / (w * w * w)).norm() < 1e-12);
            assert!((a3 - (w * s + co - 1.0) / (w * w)).norm() < 1e-12);
        }
        let (a1, a2, a3) = trig_moments(c(0.0, 0.0));
        assert_eq!((a1.re, a2.re, a3.re), (0.5, 1.0 / 3.0, 0.5));
        assert!((sinc(c(1e-9, 0.0)) - 1.0).norm() < 1e-15);
    }

    /// Composite Gauss–Legendre integration of sin t / t as an independent oracle.
    fn si_oracle(x: f64) -> f64 {
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189),
            (-0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.0, 0.568_888_888_888_889),
            (0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.906_179_845_938_664, 0.236_926_885_056_189),
        ];
        let panels = 4000;
        let hw = x / panels as f64 / 2.0;
        (0..panels)
            .map(|p| {
                let mid = (2 * p + 1) as f64 * hw;
                nodes
                    .iter()
                    .map(|&(t, w)| {
                        let s = mid + hw * t;
                        w * s.sin() / s
                    })
                    .sum::<f64>()
                    * hw
            })
            .sum()
    }

    #[test]
    fn sine_integral_matches_quadrature() {
        for x in [0.1, 1.0, 1.999, 2.001, 5.0, 10.0, 37.5] {
            assert_relative_eq!(sine_integral(x), si_oracle(x), max_relative = 1e-12);
        }
        assert_relative_eq!(sine_integral(-3.0), -sine_integral(3.0));
        assert!((sine_integral(1e6) - FRAC_PI_2).abs() < 2e-6);
    }

    #[test]
    fn cosine_tail_at_zero_is_reciprocal() {
        assert_relative_eq!(cosine_tail(200.0, 0.0), 1.0 / 200.0);
    }
}
