//! Radial grids, quadrature, finite differences and interpolation.
//!
//! Radial integrands in this crate always carry a factor `r` or `r²`, so they
//! vanish at the origin; the quadrature rules treat `r = 0` as an implicit
//! node with value zero.

mod diff;
mod function;
mod grid;

pub use diff::{derivatives, Parity};
pub use function::{RadialFunction, Tail};
pub use grid::{RadialGrid, Spacing};
