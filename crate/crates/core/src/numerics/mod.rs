//! Numerical building blocks: Pfaffians, Haar sampling, canonical
//! forms of antisymmetric matrices, special functions, and adaptive
//! quadrature.

pub mod canonical;
pub mod haar;
pub mod pfaffian;
pub mod quadrature;
pub mod special;

pub use canonical::canonical_values;
pub use haar::haar_so;
pub use pfaffian::pfaffian;
