//! Homogeneous projective special Kähler structures on Lie algebras.
//!
//! The pipeline takes a Lie algebra with an adapted Kähler basis, computes
//! its connection and curvature blocks, evaluates or solves the intrinsic
//! special Kähler equations for a candidate `(p, q, κ)`, cross-checks the
//! result on the cone, and applies the c-map twist to produce a Lie algebra
//! of dimension `4n + 4` carrying a quaternionic Kähler metric.

pub mod cmap;
pub mod cone;
pub mod connection;
pub mod dga;
pub mod error;
pub mod exterior;
pub mod interface;
pub mod intrinsic;
pub mod lie;
pub mod models;
pub mod solver;
pub mod trig;

pub use connection::{ConnectionData, CurvatureData};
pub use error::{Error, Result};
pub use exterior::{Form, FormMatrix};
pub use intrinsic::{PskCandidate, SymTensor3};
pub use lie::{AdaptedBasis, LieAlgebra};
pub use trig::TrigLaurent;
