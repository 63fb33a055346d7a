//! Exterior-algebra kernel: Grassmann elements, supermatrices with graded
//! blocks, supertrace and superdeterminant, and the Grassmann-valued Haar
//! average whose numerical part is χ.

mod character;
mod element;
pub mod random;
mod supermatrix;

pub use character::{grassmann_character_mc, sdet_inv_id_minus_kron, GrassmannEstimate};
pub use element::{gmul, Grade, GrassmannElement, MAX_GENERATORS};
pub use supermatrix::{sdet, sdet_form1, sdet_form2, supertrace, GMatrix, Parity, Supermatrix};
