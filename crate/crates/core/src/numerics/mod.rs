//! Quadrature, monotone root finding and saddle-point asymptotics.

mod quadrature;
mod roots;
mod saddle;

pub use quadrature::{
    gauss_legendre, integrate, integrate_even_line, integrate_half_line, integrate_with, Integral,
    QuadratureSpec, Truncation,
};
pub use roots::{find_root_increasing, find_root_increasing_with, RootOptions};
pub use saddle::{saddle_asymptotic_1d, saddle_asymptotic_nd, SaddleInput};
