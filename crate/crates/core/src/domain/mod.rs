//! Reference unit-ball geometry and the modified spherical calculus.

pub mod cutoff;
pub mod diffop;
pub mod grid;
pub mod poly;
pub mod quadrature;

pub use cutoff::{chi, chibar};
pub use diffop::{decompose_rect, DiffOperator};
pub use grid::{build_grid, eval_at, Projector, ReferenceGrid};
pub use poly::{
    angular_derivative, basis_len, mixed_derivative, mixed_orders, radial_derivative, rect_derivative,
    rect_orders, FieldRep, VectorField,
};
