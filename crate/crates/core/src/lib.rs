//! Closed-geodesic counting on the moduli space of the once-punctured torus.
//!
//! The Teichmüller space is the upper half-plane with `d_T = d_hyp / 2`, the
//! mapping class group is SL(2,Z), and closed geodesics are hyperbolic
//! conjugacy classes. Modules build from exact geometry ([`hyp`], [`torus`])
//! through enumeration ([`mcg`]) to the Monte-Carlo and counting machinery
//! ([`product`], [`walk`], [`flow`], [`lattice`]) driven by [`experiments`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avg;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod group;
pub mod hyp;
pub mod lattice;
pub mod mcg;
pub mod par;
pub mod product;
pub mod report;
pub mod stats;
pub mod torus;
pub mod walk;

pub use error::{Error, Result};
pub use group::{MappingClass, Mat2i};
pub use hyp::{ModelPoint, MODEL};
pub use par::Exec;
