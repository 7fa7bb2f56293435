//! Composite Simpson rules shared by the averaging, Stepanov and
//! convolution code.

use num_complex::Complex64;

/// Number of Simpson panels (always even, at least 2) covering `len` with
/// spacing no larger than `max_step`.
pub(crate) fn panels(len: f64, max_step: f64) -> usize {
    let n = (len / max_step).ceil().max(2.0) as usize;
    n + (n & 1)
}

/// Simpson weight multiplier (1, 4, 2, 4, …, 4, 1) for node `k` of `n` panels.
#[inline]
pub(crate) fn simpson_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

pub(crate) fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let sum: f64 = (0..=n)
        .map(|k| simpson_weight(k, n) * f(a + k as f64 * h))
        .sum();
    sum * h / 3.0
}

/// Simpson value together with the Richardson estimate `|S_h − S_2h| / 15`
/// (requires `n` divisible by 4; otherwise the estimate is NaN).
pub(crate) fn simpson_complex_with_estimate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
) -> (Complex64, f64) {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut fine = Complex64::new(0.0, 0.0);
    let mut coarse = Complex64::new(0.0, 0.0);
    let half = n / 2;
    for k in 0..=n {
        let v = f(a + k as f64 * h);
        fine += v * simpson_weight(k, n);
        if n.is_multiple_of(4) && k % 2 == 0 {
            coarse += v * simpson_weight(k / 2, half);
        }
    }
    let fine = fine * (h / 3.0);
    let estimate = if n.is_multiple_of(4) {
        let coarse = coarse * (2.0 * h / 3.0);
        (fine - coarse).norm() / 15.0
    } else {
        f64::NAN
    };
    (fine, estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panels_are_even() {
        assert_eq!(panels(1.0, 0.3), 4);
        assert_eq!(panels(1.0, 10.0), 2);
        assert_eq!(panels(1.0, 0.25), 4);
        assert_eq!(panels(1.0, 0.2), 6);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn richardson_estimate_tracks_error() {
        let (v, est) = simpson_complex_with_estimate(|x| Complex64::cis(3.0 * x), 0.0, 1.0, 16);
        let exact = (Complex64::cis(3.0) - 1.0) / Complex64::new(0.0, 3.0);
        let err = (v - exact).norm();
        assert!(est > 0.0 && err < 10.0 * est && est < 10.0 * err);
    }
}
