//! Trigonometric polynomials on the `d`-torus and the Fourier-side
//! description of the classes `W^r_2` and `E^r`.

mod class;
mod index;
mod poly;
mod quasi;

pub use class::{kernel_1d, power_sum_1d, power_tail, ClassKind, ClassSpec};
pub use index::{FrequencyBox, MultiIndex};
pub use poly::TrigPolynomial;
pub(crate) use poly::check_even;
pub use quasi::{quasi_algebra_constant, quasi_algebra_ratio, QuasiAlgebraConstant};
