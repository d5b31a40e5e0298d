//! Finite-grid computations with tempered generalized functions: nets of numbers, points
//! and functions indexed by `eps in (0, 1]`, their classification (moderate, negligible,
//! strictly non-zero), point values, scaling maps and invertibility checks, plus an
//! explicit net that is invertible at every generalized point but not globally.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` / `*32` aliases
//! below fix the scalar.

// Negated comparisons such as `!(x > 0)` deliberately also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod context;
pub mod counterexample;
pub mod error;
pub mod gfunction;
pub mod gnumber;
pub mod gpoint;
pub mod netdsl;
pub mod report;
mod scalar;

pub use asymptotics::{EpsGrid, ScalarNet, SignedLog, Thresholds};
pub use context::Context;
pub use error::{Error, Result};
pub use gfunction::{FunctionNet, XSampleSpec};
pub use gnumber::GeneralizedNumber;
pub use gpoint::{GeneralizedPoint, OpenBox};
pub use scalar::Scalar;

pub type Context64 = Context<f64>;
pub type EpsGrid64 = EpsGrid<f64>;
pub type SignedLog64 = SignedLog<f64>;
pub type ScalarNet64 = ScalarNet<f64>;
pub type GeneralizedNumber64 = GeneralizedNumber<f64>;
pub type OpenBox64 = OpenBox<f64>;
pub type GeneralizedPoint64 = GeneralizedPoint<f64>;
pub type FunctionNet64 = FunctionNet<f64>;

pub type Context32 = Context<f32>;
pub type EpsGrid32 = EpsGrid<f32>;
pub type SignedLog32 = SignedLog<f32>;
pub type ScalarNet32 = ScalarNet<f32>;
pub type GeneralizedNumber32 = GeneralizedNumber<f32>;
pub type OpenBox32 = OpenBox<f32>;
pub type GeneralizedPoint32 = GeneralizedPoint<f32>;
pub type FunctionNet32 = FunctionNet<f32>;
