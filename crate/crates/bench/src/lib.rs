//! Fixtures shared by the benchmarks.

use std::f64::consts::{PI, SQRT_2};

use apl_core::convolution::Kernel;
use apl_core::signals::random_antiperiodic;
use apl_core::{NormKind, TrigPolynomial};

/// `sin πt + sin √2πt`
pub fn two_tone() -> TrigPolynomial {
    TrigPolynomial::sine(1.0, PI)
        .add(&TrigPolynomial::sine(1.0, SQRT_2 * PI))
        .expect("same shape")
}

/// Eight-term, three-dimensional anti-periodic polynomial.
pub fn generated() -> TrigPolynomial {
    random_antiperiodic(1.3, 8, 3, 42, NormKind::Euclidean).expect("valid parameters")
}

pub fn unit_kernel(dim: usize) -> Kernel {
    Kernel::exponential(1.0, dim).expect("valid kernel")
}

pub fn singular_kernel(dim: usize) -> Kernel {
    let rows = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| apl_core::Complex64::new(if i == j { 1.0 } else { 0.1 }, 0.0))
                .collect()
        })
        .collect();
    Kernel::new(1.0, 0.6, rows).expect("valid kernel")
}
