//! Photon position operator as a flat connection on momentum space.
//!
//! Momentum-space wave functions are transverse vector fields `Ψ(k)` with
//! `k·Ψ = 0`. The position operator `X̂_l = i(∂_l + Γ_l)` is built from an
//! orthonormal triad whose third leg is radial; different triads (gauges)
//! give unitarily equivalent operators with commuting components.

pub mod algebra;
pub mod berry;
pub mod connection;
pub mod diff;
pub mod eigenstates;
pub mod error;
pub mod geometry;
pub mod inner_product;
pub mod ode;
pub mod operator;
pub mod phasespace;
pub mod quadrature;
pub mod section;
pub mod special;

pub use algebra::{Constants, Mat3C, Vec3C, Vec3R, C64};
pub use error::{Error, Result};
pub use geometry::{Gauge, MomentumPoint};
pub use section::WaveSection;
