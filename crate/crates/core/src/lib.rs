//! Ballistic-capture analysis in the planar elliptic restricted three-body
//! problem via Lagrangian descriptors.
//!
//! The pipeline: propagate grids of periapsis initial conditions around the
//! secondary body ([`survey`]), accumulate the Lagrangian-descriptor integral
//! along each trajectory ([`propagate`]), classify every initial condition as
//! weakly stable / unstable / crash ([`survey::classify_point`]), extract
//! phase-space separatrices from the descriptor field with a Roberts-cross
//! gradient threshold ([`edges`]), and quantify how well those separatrices
//! track the stability-set boundaries ([`validate`]).
//!
//! All numerics are generic over the scalar type through the [`Real`] trait;
//! every public type defaults to `f64`.

pub mod dynamics;
pub mod edges;
pub mod error;
pub mod model;
pub mod propagate;
pub mod rk87;
pub mod survey;
pub mod validate;

pub use error::{Error, Result};

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};
use std::ops::{AddAssign, MulAssign, SubAssign};

/// Scalar type the whole crate is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal (tableau coefficients, defaults) into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable in scalar type")
    }

    #[inline]
    fn usize(v: usize) -> Self {
        Self::from_usize(v).expect("count not representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
