//! Numerical laboratory for quasi-periodic Schrödinger cocycles.
//!
//! The crate computes the finite-scale objects attached to the operator
//! `(H phi)_n = phi_{n+1} + phi_{n-1} + v(theta + n omega) phi_n`:
//! transfer-matrix cocycles and Lyapunov exponents, the acceleration of the
//! complexified exponent, Green's-function potential theory on annuli, zero
//! structures of trace determinants, large-deviation sets of the
//! norm-square function, and eigenfunction-decay diagnostics on finite
//! boxes.
//!
//! Numeric kernels are generic over the scalar type (see [`scalar::Real`]);
//! concrete `f64` aliases live at the crate root. Frequency arithmetic is
//! exact (`arithmetic` works over big rationals) because `||q_n omega||`
//! drops below float resolution as soon as the denominators grow.

pub mod acceleration;
pub mod annulus;
pub mod arithmetic;
pub mod cocycle;
pub mod deviation;
pub mod error;
pub mod localization;
pub mod model;
pub mod scalar;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
pub use scalar::{torus_norm, Cplx, Real};

/// Default scalar for the shipped drivers.
pub type Scalar = f64;
/// Complex number over the default scalar.
pub type Complex = Cplx<Scalar>;
/// Potential over the default scalar.
pub type Potential64 = model::Potential<Scalar>;
/// Scaled transfer matrix over the default scalar.
pub type ScaledTransfer64 = cocycle::ScaledTransfer<Scalar>;
/// Log-scaled value over the default scalar.
pub type LogValue64 = cocycle::LogValue<Scalar>;
