//! Numerics for almost anti-periodic functions: trigonometric polynomial
//! signals, certified ε-antiperiod scanning, Bohr coefficients, Stepanov
//! seminorms and kernel convolutions.

pub mod bohr;
pub mod convolution;
pub mod error;
pub mod files;
mod quadrature;
pub mod scanner;
pub mod signals;
pub mod stepanov;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use signals::{ComplexVec, NormKind, SampledFunction, Signal, TrigPolynomial, TrigTerm};
